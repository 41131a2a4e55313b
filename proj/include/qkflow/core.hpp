#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>

namespace qkf {

/// Hard cap on the number of principal curvatures handled anywhere.
inline constexpr int kMaxDim = 16;

/// Default relative tolerance for cone membership and quotient positivity.
inline constexpr double kConeRelTol = 1e-9;

// Input lies outside the admissible set of an operation (e.g. the quotient
// S_{k+1}/S_k is requested where S_k is not strictly positive).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A scalar solve degenerated (vanishing pivot / denominator).
class SolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A matrix does not have the structural form an operation requires.
class ShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Requested dimension exceeds kMaxDim or is non-positive.
class DimensionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Symmetric eigensolver did not converge.
class EigenSolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid or unresolvable run configuration. Maps to CLI exit code 64.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Not enough samples/panels to perform a fit.
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Ordered list of principal curvatures (units 1/length).
/// Fixed-capacity so it can live on the stack in hot loops.
class CurvatureVector {
public:
    CurvatureVector() = default;

    explicit CurvatureVector(std::span<const double> entries) { assign(entries); }

    CurvatureVector(std::initializer_list<double> entries)
        : CurvatureVector(std::span<const double>(entries.begin(), entries.size())) {}

    /// n copies of the same value.
    static CurvatureVector constant(int n, double value)
    {
        check_dim(n);
        CurvatureVector out;
        out.n_ = n;
        for (int i = 0; i < n; ++i) out.v_[i] = value;
        return out;
    }

    static void check_dim(int n)
    {
        if (n < 1 || n > kMaxDim)
            throw DimensionError("curvature vector dimension must be in [1," +
                                 std::to_string(kMaxDim) + "], got " + std::to_string(n));
    }

    int size() const { return n_; }

    double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return v_[static_cast<std::size_t>(i)]; }

    std::span<const double> entries() const { return {v_.data(), static_cast<std::size_t>(n_)}; }

    double max_abs() const
    {
        double m = 0.0;
        for (int i = 0; i < n_; ++i) m = std::max(m, v_[i] < 0 ? -v_[i] : v_[i]);
        return m;
    }

private:
    void assign(std::span<const double> entries)
    {
        check_dim(static_cast<int>(entries.size()));
        n_ = static_cast<int>(entries.size());
        for (int i = 0; i < n_; ++i) v_[i] = entries[static_cast<std::size_t>(i)];
    }

    std::array<double, kMaxDim> v_{};
    int n_ = 0;

    friend bool operator==(const CurvatureVector&, const CurvatureVector&) = default;
};

/// Binomial coefficient as a double; exact for the small arguments used here.
inline double binomial(int n, int k)
{
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

} // namespace qkf
