#include "qkflow/symfunc.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace qkf::symfunc {

SymValues elementary(const CurvatureVector& lambda)
{
    return elementary_skipping(lambda, -1, -1);
}

SymValues elementary_skipping(const CurvatureVector& lambda, int skip_i, int skip_j)
{
    const int n = lambda.size();
    SymValues out;
    out.n = n;
    out.s[0] = 1.0;

    for (int m = 0; m < n; ++m) {
        if (m == skip_i || m == skip_j) continue;
        const double x = lambda[m];
        // reverse order so e_{l-1} is still the previous stage's value
        for (int l = n; l >= 1; --l)
            out.s[static_cast<std::size_t>(l)] += x * out.s[static_cast<std::size_t>(l - 1)];
    }
    return out;
}

SymTable sym_all(const CurvatureVector& lambda)
{
    const int n = lambda.size();
    SymTable t;
    t.n = n;
    t.s.resize(static_cast<std::size_t>(n + 1));
    t.deleted1.assign(static_cast<std::size_t>((n + 1) * n), 0.0);
    t.deleted2.assign(static_cast<std::size_t>((n + 1) * n * n), 0.0);

    const SymValues full = elementary(lambda);
    for (int l = 0; l <= n; ++l) t.s[static_cast<std::size_t>(l)] = full.at(l);

    for (int i = 0; i < n; ++i) {
        const SymValues one = elementary_skipping(lambda, i);
        for (int l = 0; l <= n; ++l)
            t.deleted1[static_cast<std::size_t>(l * n + i)] = one.at(l);
        for (int j = i + 1; j < n; ++j) {
            const SymValues two = elementary_skipping(lambda, i, j);
            for (int l = 0; l <= n; ++l) {
                const double v = two.at(l);
                t.deleted2[static_cast<std::size_t>((l * n + i) * n + j)] = v;
                t.deleted2[static_cast<std::size_t>((l * n + j) * n + i)] = v;
            }
        }
    }
    return t;
}

double cone_scale(int n, int l, double max_abs_entry)
{
    return std::max(1.0, binomial(n, l) * std::pow(max_abs_entry, l));
}

namespace {

bool passes_positivity(const SymValues& v, double m, int l, double rel_tol)
{
    return v.at(l) > rel_tol * cone_scale(v.n, l, m);
}

} // namespace

bool in_cone(const SymValues& v, double max_abs_entry, int k, double rel_tol)
{
    for (int l = 1; l <= k; ++l)
        if (!passes_positivity(v, max_abs_entry, l, rel_tol)) return false;
    return true;
}

bool in_cone(const CurvatureVector& lambda, int k, double rel_tol)
{
    return in_cone(elementary(lambda), lambda.max_abs(), k, rel_tol);
}

ConeClass cone_classify(const CurvatureVector& lambda, double rel_tol)
{
    const SymValues v = elementary(lambda);
    const double m = lambda.max_abs();
    const int n = lambda.size();

    int kpos = 0;
    while (kpos < n && passes_positivity(v, m, kpos + 1, rel_tol)) ++kpos;

    ConeClass c;
    c.k = kpos;
    if (kpos == n) {
        c.tag = ConeClass::Tag::Interior;
        return c;
    }
    const double next = v.at(kpos + 1);
    const double band = rel_tol * cone_scale(n, kpos + 1, m);
    if (next < -band)
        c.tag = (kpos >= 1) ? ConeClass::Tag::Interior : ConeClass::Tag::Outside;
    else
        c.tag = ConeClass::Tag::Boundary;
    return c;
}

double qk_from_values(const SymValues& v, double max_abs_entry, int k, double rel_tol)
{
    const int n = v.n;
    if (k < 0 || k > n - 1)
        throw DomainError("quotient index k must be in [0, n-1], got k=" + std::to_string(k) +
                          " for n=" + std::to_string(n));
    if (k > 0 && !passes_positivity(v, max_abs_entry, k, rel_tol))
        throw DomainError("S_" + std::to_string(k) + " not strictly positive: quotient undefined");
    return v.at(k + 1) / v.at(k);
}

double qk(const CurvatureVector& lambda, int k, double rel_tol)
{
    return qk_from_values(elementary(lambda), lambda.max_abs(), k, rel_tol);
}

std::vector<double> qk_gradient(const CurvatureVector& lambda, int k, double rel_tol)
{
    const int n = lambda.size();
    const SymValues v = elementary(lambda);
    const double m = lambda.max_abs();
    if (k < 0 || k > n - 1) throw DomainError("quotient index k out of range");
    if (k > 0 && !passes_positivity(v, m, k, rel_tol))
        throw DomainError("S_" + std::to_string(k) + " not strictly positive: gradient undefined");

    const double sk = v.at(k);
    const double sk1 = v.at(k + 1);
    std::vector<double> grad(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const SymValues del = elementary_skipping(lambda, i);
        grad[static_cast<std::size_t>(i)] =
            (del.at(k) * sk - sk1 * del.at(k - 1)) / (sk * sk);
    }
    return grad;
}

double qk_derivative_sum(const SymValues& v, double max_abs_entry, int k, double rel_tol)
{
    const int n = v.n;
    if (k == 0) return static_cast<double>(n);
    if (!in_cone(v, max_abs_entry, k, rel_tol))
        throw DomainError("derivative sum needs S_1..S_k positive");
    const double sk = v.at(k);
    return (n - k) - (n - k + 1) * v.at(k + 1) * v.at(k - 1) / (sk * sk);
}

SecondMoment qk_second_moment(const CurvatureVector& lambda, int k, double rel_tol)
{
    const int n = lambda.size();
    const SymValues v = elementary(lambda);
    const double m = lambda.max_abs();

    SecondMoment out;
    const std::vector<double> grad = qk_gradient(lambda, k, rel_tol);
    for (int i = 0; i < n; ++i)
        out.value += lambda[i] * lambda[i] * grad[static_cast<std::size_t>(i)];

    // The closed form needs the next quotient as well, i.e. S_{k+1} > 0.
    if (passes_positivity(v, m, k + 1, rel_tol)) {
        const double q = v.at(k + 1) / v.at(k);
        const double q_next = v.at(k + 2) / v.at(k + 1);
        out.identity_checked = true;
        out.identity_value = (k + 1) * q * q - (k + 2) * q_next * q;
    }
    return out;
}

double newton_defect(const CurvatureVector& lambda, int k)
{
    const int n = lambda.size();
    if (k < 1 || k > n - 1) throw DomainError("newton defect needs 1 <= k <= n-1");

    // The defect is a difference of two nearly equal products (exactly equal
    // at equal entries); run the recurrence in extended precision so the
    // cancellation does not swamp the result.
    std::array<long double, kMaxDim + 1> s{};
    s[0] = 1.0L;
    for (int m = 0; m < n; ++m) {
        const long double x = lambda[m];
        for (int l = n; l >= 1; --l)
            s[static_cast<std::size_t>(l)] += x * s[static_cast<std::size_t>(l - 1)];
    }
    const long double d =
        static_cast<long double>(k * (n - k)) * s[static_cast<std::size_t>(k)] *
            s[static_cast<std::size_t>(k)] -
        static_cast<long double>((k + 1) * (n - (k - 1))) * s[static_cast<std::size_t>(k - 1)] *
            s[static_cast<std::size_t>(k + 1)];
    return static_cast<double>(d);
}

bool maclaurin_quotient_check(const CurvatureVector& lambda, int l, int k, double tol)
{
    const int n = lambda.size();
    if (l < 0 || k > n - 1 || l > k) throw DomainError("need 0 <= l <= k <= n-1");
    if (!in_cone(lambda, k + 1)) throw DomainError("maclaurin chain needs the (k+1)-cone");
    const double q_k = qk(lambda, k);
    const double q_l = qk(lambda, l);
    const double factor = static_cast<double>((l + 1) * (n - k)) /
                          static_cast<double>((k + 1) * (n - l));
    return q_k <= factor * q_l + tol * std::max(1.0, std::abs(q_l));
}

CurvatureVector eigenvalues_sym(const Eigen::MatrixXd& b)
{
    const int n = static_cast<int>(b.rows());
    CurvatureVector::check_dim(n);
    if (n == 1) return CurvatureVector{b(0, 0)};
    if (n == 2) {
        const double mean = 0.5 * (b(0, 0) + b(1, 1));
        const double off = 0.5 * (b(0, 1) + b(1, 0));
        const double d = std::hypot(0.5 * (b(0, 0) - b(1, 1)), off);
        return CurvatureVector{mean + d, mean - d};
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (b + b.transpose()));
    if (solver.info() != Eigen::Success)
        throw EigenSolverError("symmetric eigensolver failed to converge");
    CurvatureVector out;
    std::array<double, kMaxDim> tmp{};
    for (int i = 0; i < n; ++i) tmp[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    std::sort(tmp.begin(), tmp.begin() + n, std::greater<double>());
    return CurvatureVector(std::span<const double>(tmp.data(), static_cast<std::size_t>(n)));
}

double matrix_sym(const Eigen::MatrixXd& b, int k)
{
    if (b.rows() != b.cols()) throw ShapeError("matrix_sym needs a square matrix");
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    if ((b - b.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ShapeError("matrix_sym needs a symmetric matrix");
    return elementary(eigenvalues_sym(b)).at(k);
}

double qk_of_matrix(const Eigen::MatrixXd& b, int k, double rel_tol)
{
    const CurvatureVector ev = eigenvalues_sym(b);
    return qk_from_values(elementary(ev), ev.max_abs(), k, rel_tol);
}

StructuredDerivativeReport structured_derivative_check(const Eigen::MatrixXd& a, int k,
                                                       double fd_step, double tol)
{
    const int n = static_cast<int>(a.rows());
    CurvatureVector::check_dim(n);
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    for (int i = 1; i < n; ++i)
        for (int j = 1; j < n; ++j)
            if (i != j && std::abs(a(i, j)) > 1e-14 * scale)
                throw ShapeError("matrix is not arrowhead: nonzero entry off the first row/column");
    if (!(a(0, 0) < 0.0))
        throw ShapeError("arrowhead check requires a negative (0,0) entry");
    if (!in_cone(eigenvalues_sym(a), k + 1))
        throw DomainError("arrowhead spectrum leaves the (k+1)-cone");

    StructuredDerivativeReport rep;
    rep.qk_value = qk_of_matrix(a, k);
    rep.dq = Eigen::MatrixXd::Zero(n, n);

    const double eps = fd_step * scale;
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            Eigen::MatrixXd ap = a;
            Eigen::MatrixXd am = a;
            ap(i, j) += eps;
            am(i, j) -= eps;
            if (i != j) {
                ap(j, i) += eps;
                am(j, i) -= eps;
            }
            const double d = (qk_of_matrix(ap, k) - qk_of_matrix(am, k)) / (2.0 * eps);
            // symmetrized perturbation hits both entries; halve off-diagonals
            // to get the independent-entry derivative
            rep.dq(i, j) = (i == j) ? d : 0.5 * d;
            rep.dq(j, i) = rep.dq(i, j);
        }
    }

    rep.d11 = rep.dq(0, 0);
    rep.diag_sum = rep.dq.trace();
    rep.d11_lower_bound = static_cast<double>(n) / static_cast<double>((k + 1) * (n - k));
    rep.diag_ratio_bound =
        static_cast<double>(n) / (static_cast<double>(n - k) * (n - k) * (k + 1));
    rep.euler_sum = (rep.dq.array() * a.array()).sum();

    rep.d11_bound_ok = rep.d11 >= rep.d11_lower_bound - tol;
    rep.diag_nonneg_ok = true;
    for (int i = 1; i < n; ++i)
        if (rep.dq(i, i) < -tol) rep.diag_nonneg_ok = false;
    rep.diag_ratio_ok = rep.d11 >= rep.diag_ratio_bound * rep.diag_sum - tol;
    rep.euler_ok =
        std::abs(rep.euler_sum - rep.qk_value) <= tol * std::max(1.0, std::abs(rep.qk_value));
    return rep;
}

double concavity_probe(const CurvatureVector& lambda, int k, double fd_step)
{
    const int n = lambda.size();
    if (!in_cone(lambda, k + 1)) throw DomainError("concavity probe needs the (k+1)-cone");

    if (k == 0) return 0.0; // Q_0 is linear

    const double eps = fd_step * std::max(1.0, lambda.max_abs());
    auto f = [&](const CurvatureVector& x) { return qk(x, k); };

    Eigen::MatrixXd hess(n, n);
    const double f0 = f(lambda);
    for (int i = 0; i < n; ++i) {
        CurvatureVector xp = lambda, xm = lambda;
        xp[i] += eps;
        xm[i] -= eps;
        hess(i, i) = (f(xp) - 2.0 * f0 + f(xm)) / (eps * eps);
        for (int j = i + 1; j < n; ++j) {
            CurvatureVector pp = lambda, pm = lambda, mp = lambda, mm = lambda;
            pp[i] += eps; pp[j] += eps;
            pm[i] += eps; pm[j] -= eps;
            mp[i] -= eps; mp[j] += eps;
            mm[i] -= eps; mm[j] -= eps;
            const double d = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * eps * eps);
            hess(i, j) = d;
            hess(j, i) = d;
        }
    }
    const CurvatureVector ev = eigenvalues_sym(hess);
    return ev[0];
}

} // namespace qkf::symfunc
