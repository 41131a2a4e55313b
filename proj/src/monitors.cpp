#include "qkflow/monitors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "qkflow/shape.hpp"
#include "qkflow/symfunc.hpp"

namespace qkf::monitors {

SphereFit fit_sphere(const flow::GraphPatch& p)
{
    const int cols = p.dim == 2 ? 4 : 3; // c, px[, py], d
    const auto rows = static_cast<Eigen::Index>(p.total());
    Eigen::MatrixXd a(rows, cols);
    Eigen::VectorXd b(rows);

    Eigen::Index row = 0;
    for (int j = 0; j < p.ny; ++j)
        for (int i = 0; i < p.nx; ++i, ++row) {
            const double x = p.x(i);
            const double y = p.dim == 2 ? p.y(j) : 0.0;
            const double u = p.u[static_cast<std::size_t>(p.idx(i, j))];
            a(row, 0) = 2.0 * u;
            a(row, 1) = 2.0 * x;
            if (p.dim == 2) a(row, 2) = 2.0 * y;
            a(row, cols - 1) = 1.0;
            b(row) = u * u + x * x + y * y;
        }

    const Eigen::VectorXd z = (a.transpose() * a).ldlt().solve(a.transpose() * b);
    SphereFit fit;
    fit.center_height = z(0);
    fit.center_x = z(1);
    fit.center_y = p.dim == 2 ? z(2) : 0.0;
    const double d = z(cols - 1);
    fit.radius_sq = d + fit.center_height * fit.center_height + fit.center_x * fit.center_x +
                    fit.center_y * fit.center_y;

    const double scale = std::max(1.0, b.cwiseAbs().mean());
    fit.rms = std::sqrt((a * z - b).squaredNorm() / static_cast<double>(rows)) / scale;
    return fit;
}

void RadiusLawMonitor::operator()(const flow::FlowState& s, MonitorReport& rep)
{
    const SphereFit fit = fit_sphere(s.patch);
    if (fit.rms > rms_threshold_)
        throw DomainError("radius-law monitor: data is not spherical (rms " +
                          std::to_string(fit.rms) + ")");
    const double rate = 2.0 * static_cast<double>(n_ - k_) / static_cast<double>(k_ + 1);
    const double residual = std::abs(fit.radius_sq + rate * s.t - r0_sq_);
    worst_ = std::max(worst_, residual);
    rep.append("radius_law_residual", s.t, residual);
    rep.set_flag("radius_law", worst_ <= tol_,
                 "worst residual " + std::to_string(worst_) + " vs tolerance " +
                     std::to_string(tol_));
}

void PinchingMonitor::operator()(const flow::FlowState& s, MonitorReport& rep)
{
    const flow::GraphPatch& p = s.patch;
    double gap = std::numeric_limits<double>::infinity();
    bool any = false;
    for (int j = 0; j < p.ny; ++j)
        for (int i = 0; i < p.nx; ++i) {
            if (!p.is_interior(i, j)) continue;
            const shape::ShapeMatrix sm = shape::weingarten(flow::jet_at(p, i, j));
            const CurvatureVector lam = shape::principal_curvatures(sm);
            if (!symfunc::cone_classify(lam).interior_at_least(k_ + 1)) continue;
            double h = 0.0, sq = 0.0;
            for (int d = 0; d < lam.size(); ++d) {
                h += lam[d];
                sq += lam[d] * lam[d];
            }
            gap = std::min(gap, h * h - sq);
            any = true;
        }
    if (!any) return; // nothing inside the cone at this snapshot
    worst_gap_ = std::min(worst_gap_, gap);
    rep.append("pinching_gap_min", s.t, gap);
    rep.set_flag("pinching", worst_gap_ >= -tol_,
                 "worst gap " + std::to_string(worst_gap_));
}

void MaxVMonitor::operator()(const flow::FlowState& s, MonitorReport& rep)
{
    const flow::GraphPatch& p = s.patch;
    const double rate = 2.0 * static_cast<double>(n_ - k_) / static_cast<double>(k_ + 1);
    double sup = 0.0;
    for (int j = 0; j < p.ny; ++j)
        for (int i = 0; i < p.nx; ++i) {
            if (!p.is_interior(i, j)) continue;
            const shape::JetPoint jet = flow::jet_at(p, i, j);
            const double w = std::sqrt(1.0 + jet.grad.squaredNorm());
            const double dx = p.x(i) - x0_[0];
            const double dy = p.dim == 2 ? p.y(j) - x0_[1] : 0.0;
            const double du = p.u[static_cast<std::size_t>(p.idx(i, j))] - x0_[2];
            const double phi =
                radius_ * radius_ - (dx * dx + dy * dy + du * du) - rate * s.t;
            sup = std::max(sup, std::max(phi, 0.0) * w);
        }
    rep.append("sup_phi_v", s.t, sup);
    if (!has_initial_) {
        initial_ = sup;
        has_initial_ = true;
    }
    worst_excess_ = std::max(worst_excess_, sup - initial_);
    rep.set_flag("phi_v_monotone", worst_excess_ <= budget_,
                 "worst excess over the initial value " + std::to_string(worst_excess_) +
                     " vs budget " + std::to_string(budget_));
}

double gradient_test_functional(const flow::FlowState& s, std::array<double, 2> xi,
                                TestFunctionalMode mode, double r)
{
    const flow::GraphPatch& p = s.patch;
    const double norm = std::hypot(xi[0], p.dim == 2 ? xi[1] : 0.0);
    if (!(norm > 0.0)) throw DomainError("test functional needs a nonzero direction");
    const double ex = xi[0] / norm;
    const double ey = p.dim == 2 ? xi[1] / norm : 0.0;

    // ball center: midpoint of the patch coordinates
    const double cx = p.x0 + 0.5 * (p.nx - 1) * p.h;
    const double cy = p.dim == 2 ? p.y0 + 0.5 * (p.ny - 1) * p.h : 0.0;

    double best = 0.0;
    double m = 0.0;
    for (int j = 0; j < p.ny; ++j)
        for (int i = 0; i < p.nx; ++i) {
            const double dx = p.x(i) - cx;
            const double dy = p.dim == 2 ? p.y(j) - cy : 0.0;
            if (dx * dx + dy * dy > r * r) continue;
            const double u = p.u[static_cast<std::size_t>(p.idx(i, j))];
            if (!(u > 0.0))
                throw DomainError("test functional needs u > 0 on the ball; shift first");
            m = std::max(m, u);
        }
    if (!(m > 0.0)) throw DomainError("ball does not meet the patch");

    for (int j = 0; j < p.ny; ++j)
        for (int i = 0; i < p.nx; ++i) {
            if (!p.is_interior(i, j)) continue;
            const double dx = p.x(i) - cx;
            const double dy = p.dim == 2 ? p.y(j) - cy : 0.0;
            const double d2 = dx * dx + dy * dy;
            if (d2 > r * r) continue;

            const shape::JetPoint jet = flow::jet_at(p, i, j);
            const double u_xi = ex * jet.grad(0) + (p.dim == 2 ? ey * jet.grad(1) : 0.0);
            if (u_xi <= 1.0) continue; // log clamp

            const double u = p.u[static_cast<std::size_t>(p.idx(i, j))];
            const double phi = 1.0 + u / m;
            const double rho = mode == TestFunctionalMode::Parabolic ? 1.0 - d2 / (r * r)
                                                                     : r * r - d2;
            const double tfac = mode == TestFunctionalMode::Parabolic ? s.t : 1.0;
            best = std::max(best, tfac * rho * phi * std::log(u_xi));
        }
    return best;
}

EstimatePanel panel_from_profile(const translator::TranslatorProfile& p, double d, double r)
{
    if (!(r > 0.0) || !(d >= 0.0)) throw DomainError("panel needs r > 0 and d >= 0");
    EstimatePanel out;
    out.r = r;
    out.grad0 = std::abs(p.slope(d));
    const double lo = std::max(0.0, d - r);
    const double hi = d + r;
    out.m = p.value(hi) - p.value(lo); // height normalized to its ball minimum
    return out;
}

BoundFit elliptic_gradient_bound_fit(std::span<const EstimatePanel> panels,
                                     double outlier_factor)
{
    if (panels.size() < 5)
        throw InsufficientDataError("gradient-bound fit needs at least 5 panels");

    BoundFit fit;
    for (const EstimatePanel& p : panels) {
        if (!(p.grad0 > 1.0)) continue; // ln <= 0: trivially satisfied
        const double denom = p.m / p.r + (p.m * p.m) / (p.r * p.r);
        if (!(denom > 0.0)) {
            fit.pass = false;
            fit.message = "panel with positive gradient but vanishing bound";
            return fit;
        }
        fit.per_panel.push_back(std::log(p.grad0) / denom);
    }
    fit.used = fit.per_panel.size();
    if (fit.used == 0) {
        fit.pass = true;
        fit.c = 0.0;
        fit.message = "all panels trivially satisfied";
        return fit;
    }

    std::vector<double> sorted = fit.per_panel;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    fit.c = sorted.back();
    fit.pass = std::isfinite(fit.c) && fit.c <= outlier_factor * std::max(median, 1e-300);
    fit.message = fit.pass ? "single constant fits the sweep"
                           : "one panel forces a constant far beyond the sweep";
    return fit;
}

namespace {

// H and v along a profile, from finite differences of the stored slopes.
struct ProfileHV {
    std::vector<double> h2, v4;
};

ProfileHV profile_hv(const translator::TranslatorProfile& p)
{
    const translator::ProfilePointData d = translator::profile_pointwise(p);
    ProfileHV out;
    out.h2.resize(p.size());
    out.v4.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double h = d.kappa_rad[i] + (p.n - 1) * d.kappa_ang[i];
        out.h2[i] = h * h;
        out.v4[i] = d.w[i] * d.w[i] * d.w[i] * d.w[i];
    }
    return out;
}

} // namespace

CurvatureFit curvature_estimate_elliptic(const translator::TranslatorProfile& p, double theta,
                                         std::span<const double> radii)
{
    if (radii.empty()) throw InsufficientDataError("curvature fit needs at least one radius");
    if (!(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie in (0,1)");

    const ProfileHV hv = profile_hv(p);
    CurvatureFit fit;
    fit.pass = true;
    for (double radius : radii) {
        if (radius > p.r_end())
            throw DomainError("sweep radius outside the computed profile range");
        const double inner = std::sqrt(theta) * radius;
        double sup_h2 = 0.0, sup_v4 = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p.r[i] <= inner) sup_h2 = std::max(sup_h2, hv.h2[i]);
            if (p.r[i] <= radius) sup_v4 = std::max(sup_v4, hv.v4[i]);
        }
        const double bound = (1.0 + 1.0 / (radius * radius)) * sup_v4;
        const double forced = sup_h2 * (1.0 - theta) * (1.0 - theta) / bound;
        if (!std::isfinite(forced)) fit.pass = false;
        fit.per_radius.emplace_back(radius, forced);
        fit.c = std::max(fit.c, forced);
    }
    fit.message = fit.pass ? "single constant fits the radius sweep"
                           : "no finite constant fits the radius sweep";
    return fit;
}

void CurvatureEstimateMonitor::operator()(const flow::FlowState& s, MonitorReport& rep)
{
    const flow::GraphPatch& p = s.patch;
    if (forced_.empty()) forced_.assign(radii_.size(), 0.0);

    // running sup of v^4 over the run, then the constant each radius forces now
    double sup_h2_all = 0.0;
    std::vector<double> sup_h2_inner(radii_.size(), 0.0);
    for (int j = 0; j < p.ny; ++j)
        for (int i = 0; i < p.nx; ++i) {
            if (!p.is_interior(i, j)) continue;
            const shape::JetPoint jet = flow::jet_at(p, i, j);
            const double w2 = 1.0 + jet.grad.squaredNorm();
            sup_v4_ = std::max(sup_v4_, w2 * w2);

            const shape::ShapeMatrix sm = shape::weingarten(jet);
            const double h = sm.a.trace();
            const double dx = p.x(i) - x0_[0];
            const double dy = p.dim == 2 ? p.y(j) - x0_[1] : 0.0;
            const double d2 = dx * dx + dy * dy;
            sup_h2_all = std::max(sup_h2_all, h * h);
            for (std::size_t m = 0; m < radii_.size(); ++m)
                if (d2 <= theta_ * radii_[m] * radii_[m])
                    sup_h2_inner[m] = std::max(sup_h2_inner[m], h * h);
        }

    if (s.t > 0.0) {
        for (std::size_t m = 0; m < radii_.size(); ++m) {
            const double bound = (1.0 / s.t + 1.0 / (radii_[m] * radii_[m])) * sup_v4_;
            const double forced =
                sup_h2_inner[m] * (1.0 - theta_) * (1.0 - theta_) / bound;
            forced_[m] = std::max(forced_[m], forced);
            rep.append("curvature_forced_c_R" + std::to_string(radii_[m]).substr(0, 4), s.t,
                       forced);
        }
    }
}

CurvatureFit CurvatureEstimateMonitor::fit() const
{
    CurvatureFit out;
    out.pass = !forced_.empty();
    for (std::size_t m = 0; m < radii_.size(); ++m) {
        const double forced = forced_.empty() ? 0.0 : forced_[m];
        if (!std::isfinite(forced)) out.pass = false;
        out.per_radius.emplace_back(radii_[m], forced);
        out.c = std::max(out.c, forced);
    }
    out.message = out.pass ? "single constant fits the sweep over time"
                           : "no finite constant fits the sweep";
    return out;
}

} // namespace qkf::monitors
