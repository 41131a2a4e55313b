#pragma once

#include <vector>

#include "qkflow/flow.hpp"

namespace qkf::translator {

/// Common curvature of the bowl at its vertex: Q_k(a,...,a) = 1 gives
/// a = (k+1)/(n-k).
double vertex_curvature(int n, int k);

/// Radial translating-graph equation solved for u''. The curvature vector is
/// (kappa_rad, kappa_ang * (n-1)) with kappa_ang = u'/(r sqrt(1+u'^2)); the
/// symmetric values are affine in kappa_rad, so Q_k = 1/w is one linear solve:
///   kappa_rad = (B_k - w B_{k+1}) / (w B_k - B_{k-1}),   B_l = C(n-1,l) kappa_ang^l,
/// and u'' = kappa_rad (1+u'^2)^{3/2}. Throws SolveError when the denominator
/// degenerates and DomainError when the curvatures leave the (k+1)-cone.
double radial_rhs(double r, double up, int k, int n);

/// Rotationally symmetric bowl profile on a uniform radius grid.
struct TranslatorProfile {
    int n = 2;
    int k = 0;
    double h = 0.0;
    std::vector<double> r, u, up;

    double r_end() const { return r.empty() ? 0.0 : r.back(); }
    std::size_t size() const { return r.size(); }

    /// Cubic Hermite interpolation of u (quadratic vertex extension below the
    /// first sample).
    double value(double rr) const;

    /// u' by linear interpolation of the stored derivative samples.
    double slope(double rr) const;
};

enum class ProfileStop { ReachedRmax, SlopeLimit };

struct ProfileOptions {
    double r_max = 20.0;
    double h = 1e-3;
    double slope_max = 1e6; // graceful stop before a vertical-slope edge
};

struct ProfileResult {
    TranslatorProfile profile;
    ProfileStop stop = ProfileStop::ReachedRmax;
};

/// Fourth-order integration from a quadratic vertex start at r = h.
/// radial_rhs failures propagate with the radius of failure in the message.
ProfileResult integrate_profile(int n, int k, const ProfileOptions& opt);

/// Pointwise curvatures and the defining-equation residual |Q_k w - 1|,
/// reassembled from finite differences of the stored profile through the
/// full jet -> shape -> quotient machinery.
struct ProfilePointData {
    std::vector<double> kappa_rad, kappa_ang, w, residual;
};

ProfilePointData profile_pointwise(const TranslatorProfile& p);

/// Limit of u''(r) as r -> 0 along the computed profile, by Richardson
/// extrapolation of the equation right side at the two smallest radii.
double measured_vertex_curvature(const TranslatorProfile& p);

/// Least-squares slope of log u against log r on [r_lo, r_hi].
/// Requires r_hi > 2 r_lo and both radii inside the profile range.
double growth_exponent(const TranslatorProfile& p, double r_lo, double r_hi);

/// Residual of the height identity: the weighted second-order operator of the
/// height against Q_k times the vertical normal component, evaluated
/// intrinsically (second derivative along meridian arclength plus the angular
/// term u'/(r w^2) with multiplicity n-1, weights from the quotient gradient
/// at the principal frame).
struct HeightIdentityResult {
    double sup_residual = 0.0;
    std::size_t points = 0;
};

HeightIdentityResult intrinsic_height_identity(const TranslatorProfile& p, int k);

struct RelaxConfig {
    int k = 0;                 // grid dimension is 2, so k in {0, 1}
    double half_width = 1.5;
    int points_per_axis = 49;
    double rtol = 1e-6;        // stop when sup |Q_k w - 1| over the interior drops below
    std::int64_t max_steps = 2000000;
    int residual_check_every = 16;
    int record_every = 256;
    enum class Init { Profile, Paraboloid } init = Init::Profile;
    double paraboloid_curvature = 0.0; // 0 means the exact vertex curvature
    flow::StepControls controls;       // source is forced to -1 internally
};

struct RelaxResult {
    flow::GraphPatch patch;
    monitors::MonitorReport report;
    std::int64_t steps = 0;
    double final_residual = 0.0;
};

/// Relax u_t = Q_k w - 1 to the translating steady state on a box, with
/// Dirichlet data taken from the radial profile (which must cover the box
/// diagonal). Throws NonConvergenceError past max_steps.
RelaxResult relax_to_translator(const TranslatorProfile& profile, const RelaxConfig& cfg);

} // namespace qkf::translator
