#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "qkflow/core.hpp"

namespace qkf::symfunc {

/// The values S_0..S_n of one curvature vector. S_l = 0 for l > n and
/// S_l = 0 for l < 0 by convention, handled by at().
struct SymValues {
    int n = 0;
    std::array<double, kMaxDim + 1> s{};

    double at(int l) const { return (l < 0 || l > n) ? 0.0 : s[static_cast<std::size_t>(l)]; }
};

/// S_0..S_n plus the deleted tables: deleted1[l][i] = S_{l,i} (terms of S_l
/// free of entry i) and deleted2[l][i][j] = S_{l,i;j} (free of entries i and
/// j, i != j; the diagonal i == j is unused and stays zero).
struct SymTable {
    int n = 0;
    std::vector<double> s;        // n+1
    std::vector<double> deleted1; // (n+1) * n
    std::vector<double> deleted2; // (n+1) * n * n

    double S(int l) const { return (l < 0 || l > n) ? 0.0 : s[static_cast<std::size_t>(l)]; }

    double S1(int l, int i) const
    {
        return (l < 0 || l > n) ? 0.0 : deleted1[static_cast<std::size_t>(l * n + i)];
    }

    double S2(int l, int i, int j) const
    {
        return (l < 0 || l > n) ? 0.0
                                : deleted2[static_cast<std::size_t>((l * n + i) * n + j)];
    }
};

/// Incremental-product recurrence for S_0..S_n; O(n^2), no cancellation
/// beyond what the values themselves carry.
SymValues elementary(const CurvatureVector& lambda);

/// Same recurrence with one (optionally two) entries left out. Used for the
/// deleted tables instead of dividing the full values by lambda_i, which is
/// unstable near zero entries.
SymValues elementary_skipping(const CurvatureVector& lambda, int skip_i, int skip_j = -1);

SymTable sym_all(const CurvatureVector& lambda);

/// Classification against the nested cones where S_1..S_k are positive.
/// Interior(k): S_1..S_k pass the relative-tolerance positivity test and the
/// next value fails it strictly (or k == n). Boundary(k): S_1..S_k pass and
/// S_{k+1} sits inside the tolerance band around zero. Outside: S_1 is
/// strictly negative.
struct ConeClass {
    enum class Tag { Interior, Boundary, Outside };
    Tag tag = Tag::Outside;
    int k = 0;

    bool interior_at_least(int kk) const { return k >= kk; }
};

ConeClass cone_classify(const CurvatureVector& lambda, double rel_tol = kConeRelTol);

/// True iff S_1..S_k all pass the positivity test (membership in the k-th cone).
bool in_cone(const CurvatureVector& lambda, int k, double rel_tol = kConeRelTol);
bool in_cone(const SymValues& v, double max_abs_entry, int k, double rel_tol = kConeRelTol);

/// Scale used by the relative positivity test for S_l: the largest magnitude
/// S_l could have for entries bounded by max_abs_entry, floored at one.
double cone_scale(int n, int l, double max_abs_entry);

/// The quotient S_{k+1}/S_k. Throws DomainError unless S_k passes the strict
/// positivity test; the cone boundary is an error, not a limit.
double qk(const CurvatureVector& lambda, int k, double rel_tol = kConeRelTol);
double qk_from_values(const SymValues& v, double max_abs_entry, int k,
                      double rel_tol = kConeRelTol);

/// Partial derivatives of the quotient: component i equals
/// (S_{k,i} S_k - S_{k+1} S_{k-1,i}) / S_k^2.
std::vector<double> qk_gradient(const CurvatureVector& lambda, int k,
                                double rel_tol = kConeRelTol);

/// Sum of the quotient's partial derivatives in closed form:
/// n for k = 0, else (n-k) - (n-k+1) S_{k+1} S_{k-1} / S_k^2.
double qk_derivative_sum(const SymValues& v, double max_abs_entry, int k,
                         double rel_tol = kConeRelTol);

/// Weighted second moment of the quotient gradient.
struct SecondMoment {
    double value = 0.0;        // sum_i lambda_i^2 dQ_k/dlambda_i
    bool identity_checked = false;
    double identity_value = 0.0; // (k+1) Q_k^2 - (k+2) Q_{k+1} Q_k, when defined
};

SecondMoment qk_second_moment(const CurvatureVector& lambda, int k,
                              double rel_tol = kConeRelTol);

/// k(n-k) S_k^2 - (k+1)(n-(k-1)) S_{k-1} S_{k+1}; non-negative for every real
/// vector, zero exactly at equal entries.
double newton_defect(const CurvatureVector& lambda, int k);

/// True iff Q_k <= ((l+1)(n-k))/((k+1)(n-l)) Q_l + tol. Requires membership
/// in the (k+1)-cone.
bool maclaurin_quotient_check(const CurvatureVector& lambda, int l, int k,
                              double tol = 1e-12);

/// Eigenvalues of a symmetric matrix, descending. Closed form for 1x1/2x2,
/// iterative solver otherwise.
CurvatureVector eigenvalues_sym(const Eigen::MatrixXd& b);

/// S_k of a symmetric matrix: eigendecompose, then run the recurrence. Equals
/// the unnormalized sum of principal k x k minors.
double matrix_sym(const Eigen::MatrixXd& b, int k);

/// S_{k+1}(B)/S_k(B) through the eigenvalues, with the same positivity guard
/// as the vector form.
double qk_of_matrix(const Eigen::MatrixXd& b, int k, double rel_tol = kConeRelTol);

/// Derivatives of B -> Q_k(B) at an arrowhead matrix (negative first diagonal
/// entry, off-diagonal mass only in the first row/column), by symmetrized
/// central differences, together with the inequality checks they must satisfy
/// there.
struct StructuredDerivativeReport {
    Eigen::MatrixXd dq;            // dQ_k/dA_{ij}, independent-entry convention
    double d11 = 0.0;              // dQ_k/dA_11
    double diag_sum = 0.0;         // sum_i dQ_k/dA_ii
    double d11_lower_bound = 0.0;  // n / ((k+1)(n-k))
    double diag_ratio_bound = 0.0; // n / ((n-k)^2 (k+1))
    double euler_sum = 0.0;        // sum_ij dQ_k/dA_{ij} A_{ij}
    double qk_value = 0.0;
    bool d11_bound_ok = false;
    bool diag_nonneg_ok = false;
    bool diag_ratio_ok = false;
    bool euler_ok = false;

    bool all_ok() const { return d11_bound_ok && diag_nonneg_ok && diag_ratio_ok && euler_ok; }
};

StructuredDerivativeReport structured_derivative_check(const Eigen::MatrixXd& a, int k,
                                                       double fd_step = 1e-6,
                                                       double tol = 1e-6);

/// Largest eigenvalue of the finite-difference Hessian of lambda -> Q_k at a
/// point of the (k+1)-cone; non-positive up to FD noise by concavity.
double concavity_probe(const CurvatureVector& lambda, int k, double fd_step = 1e-4);

} // namespace qkf::symfunc
