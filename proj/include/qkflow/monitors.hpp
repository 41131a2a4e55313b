#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "qkflow/flow.hpp"
#include "qkflow/report.hpp"
#include "qkflow/translator.hpp"

namespace qkf::monitors {

/// Least-squares sphere through the graph samples: minimizes the linear
/// residual of u^2 + |x|^2 = 2 c u + 2 p.x + d over all grid points.
struct SphereFit {
    double center_x = 0.0;
    double center_y = 0.0;
    double center_height = 0.0;
    double radius_sq = 0.0;
    double rms = 0.0; // relative rms of the linear residual
};

SphereFit fit_sphere(const flow::GraphPatch& p);

/// Tracks |R_fit(t)^2 + 2 (n-k)/(k+1) t - R0^2| on a run started from the
/// exact cap. Throws DomainError when the data stops looking spherical.
class RadiusLawMonitor {
public:
    RadiusLawMonitor(int n, int k, double r0_sq, double tolerance,
                     double rms_threshold = 1e-3)
        : n_(n), k_(k), r0_sq_(r0_sq), tol_(tolerance), rms_threshold_(rms_threshold)
    {
    }

    void operator()(const flow::FlowState& s, MonitorReport& rep);

private:
    int n_, k_;
    double r0_sq_, tol_, rms_threshold_;
    double worst_ = 0.0;
};

/// Minimum of H^2 - |A|^2 over interior points classified inside the
/// (k+1)-cone; negative values beyond the tolerance fail the flag.
class PinchingMonitor {
public:
    explicit PinchingMonitor(int k, double tolerance = 1e-10) : k_(k), tol_(tolerance) {}

    void operator()(const flow::FlowState& s, MonitorReport& rep);

private:
    int k_;
    double tol_;
    double worst_gap_ = std::numeric_limits<double>::infinity();
};

/// sup over the patch interior of phi_+ * w with
/// phi = R^2 - |p - x0|^2 - 2 (n-k)/(k+1) t, the distance taken between
/// ambient points p = (x, u(x)) and the ambient center x0. Passes while every
/// value stays within tol_budget of the initial one.
class MaxVMonitor {
public:
    MaxVMonitor(int n, int k, double radius, std::array<double, 3> x0, double tol_budget)
        : n_(n), k_(k), radius_(radius), x0_(x0), budget_(tol_budget)
    {
    }

    void operator()(const flow::FlowState& s, MonitorReport& rep);

private:
    int n_, k_;
    double radius_;
    std::array<double, 3> x0_;
    double budget_;
    double initial_ = 0.0;
    bool has_initial_ = false;
    double worst_excess_ = 0.0;
};

enum class TestFunctionalMode { Parabolic, Elliptic };

/// Interior maximum of the gradient test functional: t rho phi ln(u_xi) with
/// rho = 1 - |x|^2/r^2 (parabolic) or rho phi ln(u_xi) with rho = r^2 - |x|^2
/// (elliptic). Points with u_xi <= 1 contribute zero; requires u > 0 on the
/// ball of radius r about the patch center of coordinates.
double gradient_test_functional(const flow::FlowState& s, std::array<double, 2> xi,
                                TestFunctionalMode mode, double r);

/// One gradient-bound panel: ball radius, oscillation of u over the ball and
/// the gradient magnitude at its center.
struct EstimatePanel {
    double m = 0.0;     // sup of the shifted height over the ball
    double r = 0.0;     // ball radius
    double grad0 = 0.0; // |Du| at the ball center
};

/// Panel at horizontal center distance d from a bowl profile; the height is
/// normalized to vanish at its minimum over the ball.
EstimatePanel panel_from_profile(const translator::TranslatorProfile& p, double d, double r);

struct BoundFit {
    double c = 0.0;
    bool pass = false;
    std::size_t used = 0; // panels with grad0 > 1 that entered the fit
    std::string message;
    std::vector<double> per_panel; // constant forced by each used panel
};

/// Smallest C with ln(grad0) <= C (M/r + M^2/r^2) across the panels. Panels
/// with grad0 <= 1 are trivially satisfied and excluded. The fit fails when
/// one panel forces a constant far beyond the rest of the sweep
/// (outlier_factor times the median).
BoundFit elliptic_gradient_bound_fit(std::span<const EstimatePanel> panels,
                                     double outlier_factor = 50.0);

struct CurvatureFit {
    double c = 0.0;
    bool pass = false;
    std::string message;
    std::vector<std::pair<double, double>> per_radius; // (R, forced c)
};

/// Elliptic curvature bound on a bowl profile: for each R the constant forced
/// by sup H^2 over {|x|^2 <= theta R^2} against (1 + 1/R^2) sup_{|x| <= R} v^4,
/// scaled by (1-theta)^2.
CurvatureFit curvature_estimate_elliptic(const translator::TranslatorProfile& p, double theta,
                                         std::span<const double> radii);

/// Parabolic counterpart on a flow run: accumulates sup v^4 over time and
/// tracks the constant forced at each snapshot by
/// sup_{|x-x0|^2 <= theta R^2} H^2 <= c/(1-theta)^2 (1/t + 1/R^2) sup v^4.
class CurvatureEstimateMonitor {
public:
    CurvatureEstimateMonitor(int k, double theta, std::vector<double> radii,
                             std::array<double, 2> x0)
        : k_(k), theta_(theta), radii_(std::move(radii)), x0_(x0)
    {
    }

    void operator()(const flow::FlowState& s, MonitorReport& rep);

    CurvatureFit fit() const;

private:
    int k_;
    double theta_;
    std::vector<double> radii_;
    std::array<double, 2> x0_;
    double sup_v4_ = 0.0;
    std::vector<double> forced_; // running max per radius
};

} // namespace qkf::monitors
