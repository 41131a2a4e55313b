#include "qkflow/translator.hpp"

#include <algorithm>
#include <cmath>

#include "qkflow/shape.hpp"
#include "qkflow/symfunc.hpp"

namespace qkf::translator {

double vertex_curvature(int n, int k)
{
    if (n < 1 || k < 0 || k > n - 1) throw DomainError("need 0 <= k <= n-1");
    return static_cast<double>(k + 1) / static_cast<double>(n - k);
}

double radial_rhs(double r, double up, int k, int n)
{
    if (n < 1 || k < 0 || k > n - 1) throw DomainError("need 0 <= k <= n-1");
    if (!(r > 0.0)) throw DomainError("radial right side needs r > 0");

    const double w = std::sqrt(1.0 + up * up);
    const double kappa_ang = up / (r * w);

    auto bpow = [&](int l) {
        if (l < 0 || l > n - 1) return 0.0;
        return binomial(n - 1, l) * std::pow(kappa_ang, l);
    };
    const double bkm = bpow(k - 1);
    const double bk = bpow(k);
    const double bkp = bpow(k + 1);

    const double den = w * bk - bkm;
    const double scale = std::max({1.0, std::abs(w * bk), std::abs(bkm)});
    if (std::abs(den) <= 1e-14 * scale)
        throw SolveError("radial curvature solve degenerated at r = " + std::to_string(r));
    const double kappa_rad = (bk - w * bkp) / den;

    CurvatureVector lam = CurvatureVector::constant(n, kappa_ang);
    lam[0] = kappa_rad;
    if (!symfunc::in_cone(lam, k + 1))
        throw DomainError("curvatures left the admissible cone at r = " + std::to_string(r));

    return kappa_rad * w * w * w;
}

double TranslatorProfile::value(double rr) const
{
    if (r.empty()) throw DomainError("empty profile");
    if (rr > r_end() + 1e-12) throw DomainError("radius outside the computed profile range");
    if (rr <= r.front()) {
        // quadratic vertex extension through the first sample
        const double ratio = rr / r.front();
        return u.front() * ratio * ratio;
    }
    const double pos = (rr - r.front()) / h;
    const auto i = std::min(static_cast<std::size_t>(pos), r.size() - 2);
    const double t = (rr - r[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * u[i] + (t3 - 2.0 * t2 + t) * h * up[i] +
           (-2.0 * t3 + 3.0 * t2) * u[i + 1] + (t3 - t2) * h * up[i + 1];
}

double TranslatorProfile::slope(double rr) const
{
    if (r.empty()) throw DomainError("empty profile");
    if (rr > r_end() + 1e-12) throw DomainError("radius outside the computed profile range");
    if (rr <= r.front()) return up.front() * (rr / r.front());
    const double pos = (rr - r.front()) / h;
    const auto i = std::min(static_cast<std::size_t>(pos), r.size() - 2);
    const double t = (rr - r[i]) / h;
    return (1.0 - t) * up[i] + t * up[i + 1];
}

ProfileResult integrate_profile(int n, int k, const ProfileOptions& opt)
{
    if (!(opt.h > 0.0)) throw ConfigError("profile step must be positive");
    if (!(opt.r_max > 10.0 * opt.h)) throw ConfigError("profile range too short for its step");

    const double a = vertex_curvature(n, k);
    const double h = opt.h;

    ProfileResult out;
    TranslatorProfile& p = out.profile;
    p.n = n;
    p.k = k;
    p.h = h;

    double r, u, up;
    auto rk4 = [&](double dr) {
        const double f1 = up;
        const double g1 = radial_rhs(r, up, k, n);
        const double f2 = up + 0.5 * dr * g1;
        const double g2 = radial_rhs(r + 0.5 * dr, up + 0.5 * dr * g1, k, n);
        const double f3 = up + 0.5 * dr * g2;
        const double g3 = radial_rhs(r + 0.5 * dr, up + 0.5 * dr * g2, k, n);
        const double f4 = up + dr * g3;
        const double g4 = radial_rhs(r + dr, up + dr * g3, k, n);
        u += (dr / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
        up += (dr / 6.0) * (g1 + 2.0 * g2 + 2.0 * g3 + g4);
        r += dr;
    };

    // Quadratic vertex data carries an O(r0^3) slope truncation; seed it at a
    // radius where that is below double precision, then advance to the first
    // grid radius.
    const double r_seed = std::min(h, 1e-6);
    r = r_seed;
    u = 0.5 * a * r_seed * r_seed;
    up = a * r_seed;
    if (r_seed < h) {
        const int warm = 128;
        const double dr = (h - r_seed) / warm;
        for (int i = 0; i < warm; ++i) rk4(dr);
        r = h; // kill accumulated roundoff in the abscissa
    }
    p.r.push_back(r);
    p.u.push_back(u);
    p.up.push_back(up);

    const auto steps = std::llround(opt.r_max / h) - 1; // grid r = h, 2h, ..., ~r_max
    for (std::int64_t i = 0; i < steps; ++i) {
        // the solution varies on the scale of r itself near the vertex, so
        // resolve the first few grid intervals with substeps
        if (i < 10) {
            for (int sub = 0; sub < 16; ++sub) rk4(h / 16.0);
        } else {
            rk4(h);
        }
        p.r.push_back(r);
        p.u.push_back(u);
        p.up.push_back(up);

        if (up > opt.slope_max) {
            out.stop = ProfileStop::SlopeLimit;
            return out;
        }
    }
    out.stop = ProfileStop::ReachedRmax;
    return out;
}

namespace {

// u'' from the stored derivative samples: centered inside, one-sided
// second-order at the ends.
double upp_fd(const TranslatorProfile& p, std::size_t i)
{
    const std::size_t m = p.size();
    const double h = p.h;
    if (i == 0) return (-3.0 * p.up[0] + 4.0 * p.up[1] - p.up[2]) / (2.0 * h);
    if (i == m - 1)
        return (3.0 * p.up[m - 1] - 4.0 * p.up[m - 2] + p.up[m - 3]) / (2.0 * h);
    return (p.up[i + 1] - p.up[i - 1]) / (2.0 * h);
}

} // namespace

ProfilePointData profile_pointwise(const TranslatorProfile& p)
{
    const std::size_t m = p.size();
    if (m < 3) throw DomainError("profile too short");
    const int n = p.n;

    ProfilePointData out;
    out.kappa_rad.resize(m);
    out.kappa_ang.resize(m);
    out.w.resize(m);
    out.residual.resize(m);

    Eigen::VectorXd grad(n);
    Eigen::MatrixXd hess(n, n);
    for (std::size_t i = 0; i < m; ++i) {
        const double r = p.r[i];
        const double up = p.up[i];
        const double upp = upp_fd(p, i);
        const double w = std::sqrt(1.0 + up * up);
        out.w[i] = w;
        out.kappa_rad[i] = upp / (w * w * w);
        out.kappa_ang[i] = up / (r * w);

        // full round trip: radial jets -> shape matrix -> quotient
        grad.setZero();
        hess.setZero();
        grad(0) = up;
        hess(0, 0) = upp;
        for (int d = 1; d < n; ++d) hess(d, d) = up / r;
        const shape::ShapeMatrix s = shape::weingarten({grad, hess});
        const CurvatureVector lam = shape::principal_curvatures(s);
        out.residual[i] = std::abs(symfunc::qk(lam, p.k) * s.w - 1.0);
    }
    return out;
}

double measured_vertex_curvature(const TranslatorProfile& p)
{
    if (p.size() < 3) throw DomainError("profile too short");
    // u''(r) = a + b r^2 + c r^4 + ...; extrapolate to r = 0 through the
    // first three radii in the even variable z = r^2
    double f[3], z[3];
    for (int i = 0; i < 3; ++i) {
        f[i] = radial_rhs(p.r[static_cast<std::size_t>(i)], p.up[static_cast<std::size_t>(i)],
                          p.k, p.n);
        z[i] = p.r[static_cast<std::size_t>(i)] * p.r[static_cast<std::size_t>(i)];
    }
    double a = 0.0;
    for (int i = 0; i < 3; ++i) {
        double w = 1.0;
        for (int j = 0; j < 3; ++j)
            if (j != i) w *= z[j] / (z[j] - z[i]);
        a += w * f[i];
    }
    return a;
}

double growth_exponent(const TranslatorProfile& p, double r_lo, double r_hi)
{
    if (!(r_hi > 2.0 * r_lo) || r_lo <= 0.0)
        throw DomainError("growth exponent needs r_hi > 2 r_lo > 0");
    if (r_hi > p.r_end() + 1e-12)
        throw DomainError("growth window outside the computed profile range");

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p.r[i] < r_lo || p.r[i] > r_hi) continue;
        if (!(p.u[i] > 0.0)) continue;
        const double x = std::log(p.r[i]);
        const double y = std::log(p.u[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 8) throw InsufficientDataError("too few profile samples in the growth window");
    const double d = static_cast<double>(count);
    return (d * sxy - sx * sy) / (d * sxx - sx * sx);
}

HeightIdentityResult intrinsic_height_identity(const TranslatorProfile& p, int k)
{
    const std::size_t m = p.size();
    if (m < 5) throw DomainError("profile too short");
    const int n = p.n;

    // meridian arclength by the trapezoid rule
    std::vector<double> s(m, 0.0);
    for (std::size_t i = 1; i < m; ++i) {
        const double wa = std::sqrt(1.0 + p.up[i - 1] * p.up[i - 1]);
        const double wb = std::sqrt(1.0 + p.up[i] * p.up[i]);
        s[i] = s[i - 1] + 0.5 * p.h * (wa + wb);
    }

    HeightIdentityResult out;
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const double ha = s[i] - s[i - 1];
        const double hb = s[i + 1] - s[i];
        // second derivative of u along arclength (meridians are geodesics)
        const double d2 = 2.0 *
                          (p.u[i - 1] * hb - p.u[i] * (ha + hb) + p.u[i + 1] * ha) /
                          (ha * hb * (ha + hb));

        const double r = p.r[i];
        const double up = p.up[i];
        const double upp = upp_fd(p, i);
        const double w = std::sqrt(1.0 + up * up);

        CurvatureVector lam = CurvatureVector::constant(n, up / (r * w));
        lam[0] = upp / (w * w * w);
        const std::vector<double> g = symfunc::qk_gradient(lam, k);

        const double angular = n > 1 ? (n - 1) * g[1] * up / (r * w * w) : 0.0;
        const double lhs = g[0] * d2 + angular;
        const double rhs = symfunc::qk(lam, k) / w;
        out.sup_residual = std::max(out.sup_residual, std::abs(lhs - rhs));
        ++out.points;
    }
    return out;
}

RelaxResult relax_to_translator(const TranslatorProfile& profile, const RelaxConfig& cfg)
{
    if (cfg.k < 0 || cfg.k > 1) throw ConfigError("2d relaxation admits k in {0, 1}");
    if (cfg.points_per_axis < 5) throw ConfigError("relaxation grid too small");
    const double diag = cfg.half_width * std::sqrt(2.0);
    if (profile.r_end() < diag)
        throw ConfigError("radial profile does not cover the box diagonal");
    if (profile.n != 2 || profile.k != cfg.k)
        throw ConfigError("profile indices do not match the relaxation run");

    const double h = 2.0 * cfg.half_width / (cfg.points_per_axis - 1);
    flow::GraphPatch patch =
        flow::GraphPatch::box(cfg.points_per_axis, cfg.points_per_axis, h, -cfg.half_width,
                              -cfg.half_width, flow::BoundaryKind::Dirichlet);
    patch.boundary = [profile](double x, double y, double) {
        return profile.value(std::hypot(x, y));
    };
    if (cfg.init == RelaxConfig::Init::Profile) {
        patch.fill([&](double x, double y) { return profile.value(std::hypot(x, y)); });
    } else {
        const double c = cfg.paraboloid_curvature > 0.0 ? cfg.paraboloid_curvature
                                                        : vertex_curvature(2, cfg.k);
        patch.fill([&](double x, double y) { return 0.5 * c * (x * x + y * y); });
        patch.refresh_boundary(0.0);
    }
    patch.validate();

    flow::StepControls controls = cfg.controls;
    controls.source = -1.0;

    flow::FlowState state{std::move(patch), cfg.k, 0.0, 0.0, 0, 0};
    monitors::MonitorReport report;

    auto interior_residual = [&](const flow::GraphPatch& q) {
        const flow::KernelResult r = controls.parallel
                                         ? flow::rhs(q, cfg.k, controls.cone_rel_tol)
                                         : flow::rhs_serial(q, cfg.k, controls.cone_rel_tol);
        double worst = 0.0;
        for (int j = 1; j < q.ny - 1; ++j)
            for (int i = 1; i < q.nx - 1; ++i)
                worst = std::max(worst,
                                 std::abs(r.f[static_cast<std::size_t>(q.idx(i, j))] - 1.0));
        return worst;
    };

    double residual = interior_residual(state.patch);
    auto record = [&](double t, double v) {
        const auto& s = report.series["relax_residual"];
        if (!s.empty() && !(t > s.back().first)) return;
        report.times.push_back(t);
        report.append("relax_residual", t, v);
    };
    record(0.0, residual);

    std::int64_t since_check = 0, since_record = 0;
    while (residual > cfg.rtol) {
        if (state.steps >= cfg.max_steps)
            throw flow::NonConvergenceError(
                "relaxation hit its step budget at residual = " + std::to_string(residual));
        flow::step(state, controls);
        if (++since_check >= cfg.residual_check_every) {
            residual = interior_residual(state.patch);
            since_check = 0;
            if (++since_record >= cfg.record_every / std::max(1, cfg.residual_check_every)) {
                record(state.t, residual);
                since_record = 0;
            }
        }
    }
    record(state.t, residual);

    RelaxResult out;
    out.patch = std::move(state.patch);
    out.report = std::move(report);
    out.steps = state.steps;
    out.final_residual = residual;
    return out;
}

} // namespace qkf::translator
