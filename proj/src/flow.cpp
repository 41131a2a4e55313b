#include "qkflow/flow.hpp"

#include <algorithm>
#include <cmath>

#include "qkflow/symfunc.hpp"

namespace qkf::flow {

namespace {

// Pointwise status: admissible, outside the cone but with a defined quotient,
// or quotient undefined (value held at zero).
enum : unsigned char { kOk = 0, kOutsideCone = 1, kUndefined = 2 };

struct PointValue {
    double f = 0.0;
    double trace = 0.0;
    unsigned char status = kOk;
};

inline PointValue eval_1d(double ux, double uxx)
{
    // n = 1 admits only k = 0: speed = (u_xx / w^3) * w = u_xx / (1 + u_x^2)
    PointValue out;
    const double w2 = 1.0 + ux * ux;
    out.f = uxx / w2;
    out.trace = 1.0;
    return out;
}

inline PointValue eval_2d(double ux, double uy, double uxx, double uyy, double uxy, int k,
                          double tol)
{
    const double w2 = 1.0 + ux * ux + uy * uy;
    const double w = std::sqrt(w2);
    const double c1 = 1.0 / (w * (1.0 + w));

    // shape matrix entries from the four-term graph formula
    const double q1 = uxx * ux + uxy * uy;
    const double q2 = uxy * ux + uyy * uy;
    const double gq = ux * q1 + uy * q2;
    const double a11 = (uxx - 2.0 * ux * q1 * c1 + gq * ux * ux * c1 * c1) / w;
    const double a22 = (uyy - 2.0 * uy * q2 * c1 + gq * uy * uy * c1 * c1) / w;
    const double a12 = (uxy - (ux * q2 + uy * q1) * c1 + gq * ux * uy * c1 * c1) / w;

    const double s1 = a11 + a22;
    const double s2 = a11 * a22 - a12 * a12;

    PointValue out;
    if (k == 0) {
        out.f = s1 * w;
        out.trace = 2.0;
        return out;
    }

    // k = 1: quotient S_2/S_1, parabolic on the second cone
    const double disc = std::sqrt(std::max(s1 * s1 - 4.0 * s2, 0.0));
    const double m = 0.5 * (std::abs(s1) + disc); // largest |eigenvalue|
    const bool pos1 = s1 > tol * std::max(1.0, 2.0 * m);
    const bool pos2 = s2 > tol * std::max(1.0, m * m);
    if (pos1) {
        out.f = (s2 / s1) * w;
        out.trace = 1.0 - 2.0 * s2 / (s1 * s1);
        out.status = pos2 ? kOk : kOutsideCone;
    } else {
        out.status = kUndefined;
    }
    return out;
}

KernelResult run_kernel(const GraphPatch& p, int k, double tol, bool parallel)
{
    if (p.dim == 1 && k != 0) throw DomainError("1d grids admit only k = 0");
    if (p.dim == 2 && (k < 0 || k > 1)) throw DomainError("2d grids admit k in {0, 1}");

    const int nx = p.nx, ny = p.ny;
    const double h = p.h;
    const double* u = p.u.data();

    KernelResult out;
    out.f.assign(static_cast<std::size_t>(p.total()), 0.0);
    std::vector<unsigned char> status(static_cast<std::size_t>(p.total()), kOk);

    double max_trace = 0.0;
    double max_abs_f = 0.0;
    const bool periodic = p.bc == BoundaryKind::Periodic;

    if (p.dim == 1) {
        const int lo = periodic ? 0 : 1;
        const int hi = periodic ? nx - 1 : nx - 2;
#pragma omp parallel for reduction(max : max_trace, max_abs_f) if (parallel)
        for (int i = lo; i <= hi; ++i) {
            const int ip = (i + 1 == nx) ? 0 : i + 1;
            const int im = (i == 0) ? nx - 1 : i - 1;
            const double ux = (u[ip] - u[im]) / (2.0 * h);
            const double uxx = (u[ip] - 2.0 * u[i] + u[im]) / (h * h);
            const PointValue v = eval_1d(ux, uxx);
            out.f[static_cast<std::size_t>(i)] = v.f;
            max_trace = std::max(max_trace, v.trace);
            max_abs_f = std::max(max_abs_f, std::abs(v.f));
        }
    } else {
        const int jlo = periodic ? 0 : 1;
        const int jhi = periodic ? ny - 1 : ny - 2;
        const int ilo = periodic ? 0 : 1;
        const int ihi = periodic ? nx - 1 : nx - 2;
#pragma omp parallel for collapse(2) reduction(max : max_trace, max_abs_f) if (parallel)
        for (int j = jlo; j <= jhi; ++j) {
            for (int i = ilo; i <= ihi; ++i) {
                const int ip = (i + 1 == nx) ? 0 : i + 1;
                const int im = (i == 0) ? nx - 1 : i - 1;
                const int jp = (j + 1 == ny) ? 0 : j + 1;
                const int jm = (j == 0) ? ny - 1 : j - 1;
                const std::size_t c = static_cast<std::size_t>(j) * nx + i;
                const std::size_t e = static_cast<std::size_t>(j) * nx + ip;
                const std::size_t wios = static_cast<std::size_t>(j) * nx + im;
                const std::size_t no = static_cast<std::size_t>(jp) * nx + i;
                const std::size_t so = static_cast<std::size_t>(jm) * nx + i;

                const double ux = (u[e] - u[wios]) / (2.0 * h);
                const double uy = (u[no] - u[so]) / (2.0 * h);
                const double uxx = (u[e] - 2.0 * u[c] + u[wios]) / (h * h);
                const double uyy = (u[no] - 2.0 * u[c] + u[so]) / (h * h);
                const double uxy =
                    (u[static_cast<std::size_t>(jp) * nx + ip] -
                     u[static_cast<std::size_t>(jm) * nx + ip] -
                     u[static_cast<std::size_t>(jp) * nx + im] +
                     u[static_cast<std::size_t>(jm) * nx + im]) /
                    (4.0 * h * h);

                const PointValue v = eval_2d(ux, uy, uxx, uyy, uxy, k, tol);
                out.f[c] = v.f;
                status[c] = v.status;
                max_trace = std::max(max_trace, v.trace);
                max_abs_f = std::max(max_abs_f, std::abs(v.f));
            }
        }
    }

    out.max_trace = max_trace;
    out.max_abs_f = max_abs_f;
    for (std::int64_t id = 0; id < p.total(); ++id)
        if (status[static_cast<std::size_t>(id)] != kOk) out.violations.push_back(id);
    return out;
}

} // namespace

KernelResult rhs(const GraphPatch& p, int k, double cone_rel_tol)
{
    return run_kernel(p, k, cone_rel_tol, true);
}

KernelResult rhs_serial(const GraphPatch& p, int k, double cone_rel_tol)
{
    return run_kernel(p, k, cone_rel_tol, false);
}

std::vector<double> rhs_reference(const GraphPatch& p, int k, double cone_rel_tol)
{
    std::vector<double> f(static_cast<std::size_t>(p.total()), 0.0);
    const bool periodic = p.bc == BoundaryKind::Periodic;
    for (int j = 0; j < p.ny; ++j)
        for (int i = 0; i < p.nx; ++i) {
            if (!periodic && !p.is_interior(i, j)) continue;
            const shape::ShapeMatrix s = shape::weingarten(jet_at(p, i, j));
            const CurvatureVector lam = shape::principal_curvatures(s);
            const symfunc::SymValues v = symfunc::elementary(lam);
            const double m = lam.max_abs();
            if (k > 0 && !symfunc::in_cone(v, m, k, cone_rel_tol)) continue;
            f[static_cast<std::size_t>(p.idx(i, j))] =
                symfunc::qk_from_values(v, m, k, cone_rel_tol) * s.w;
        }
    return f;
}

double stable_dt(const GraphPatch& p, int k, double safety, double dt_max, ConePolicy policy,
                 double cone_rel_tol)
{
    const KernelResult r = rhs(p, k, cone_rel_tol);
    if (!r.violations.empty() && policy == ConePolicy::Abort)
        throw ConeViolationError(std::to_string(r.violations.size()) +
                                     " grid points outside the parabolicity set",
                                 r.violations, 0.0);
    if (r.max_trace <= 0.0) return dt_max;
    return std::min(safety * p.h * p.h / r.max_trace, dt_max);
}

namespace {

void check_finite(const GraphPatch& p, double t)
{
    for (double v : p.u)
        if (!std::isfinite(v))
            throw NonFiniteError("solution became non-finite at t = " + std::to_string(t), t);
}

void apply_speed(GraphPatch& p, const std::vector<double>& f, double factor, double source,
                 const std::vector<double>& base)
{
    if (p.bc == BoundaryKind::Periodic) {
        for (std::int64_t id = 0; id < p.total(); ++id)
            p.u[static_cast<std::size_t>(id)] =
                base[static_cast<std::size_t>(id)] +
                factor * (f[static_cast<std::size_t>(id)] + source);
        return;
    }
    if (p.dim == 1) {
        for (int i = 1; i < p.nx - 1; ++i)
            p.u[static_cast<std::size_t>(i)] =
                base[static_cast<std::size_t>(i)] + factor * (f[static_cast<std::size_t>(i)] + source);
        return;
    }
    for (int j = 1; j < p.ny - 1; ++j)
        for (int i = 1; i < p.nx - 1; ++i) {
            const std::size_t id = static_cast<std::size_t>(p.idx(i, j));
            p.u[id] = base[id] + factor * (f[id] + source);
        }
}

} // namespace

void step(FlowState& s, const StepControls& c, double dt_cap)
{
    GraphPatch& p = s.patch;
    p.refresh_boundary(s.t);

    auto sweep = [&](const GraphPatch& q) {
        return c.parallel ? rhs(q, s.k, c.cone_rel_tol) : rhs_serial(q, s.k, c.cone_rel_tol);
    };
    auto note_violations = [&](const KernelResult& r) {
        if (r.violations.empty()) return;
        s.cone_violations += static_cast<std::int64_t>(r.violations.size());
        if (c.policy == ConePolicy::Abort)
            throw ConeViolationError(std::to_string(r.violations.size()) +
                                         " grid points outside the parabolicity set at t = " +
                                         std::to_string(s.t),
                                     r.violations, s.t);
    };

    const KernelResult k1 = sweep(p);
    note_violations(k1);

    double dt = c.dt_max;
    if (k1.max_trace > 0.0) dt = std::min(dt, c.safety * p.h * p.h / k1.max_trace);
    dt = std::min(dt, dt_cap);
    if (!(dt > 0.0)) throw NonConvergenceError("step size collapsed to zero");

    const std::vector<double> base = p.u;
    if (c.scheme == Scheme::Euler) {
        apply_speed(p, k1.f, dt, c.source, base);
    } else {
        apply_speed(p, k1.f, 0.5 * dt, c.source, base);
        p.refresh_boundary(s.t + 0.5 * dt);
        const KernelResult k2 = sweep(p);
        note_violations(k2);
        apply_speed(p, k2.f, dt, c.source, base);
    }

    s.t += dt;
    s.dt_last = dt;
    s.dt_min = std::min(s.dt_min, dt);
    s.dt_max_seen = std::max(s.dt_max_seen, dt);
    ++s.steps;
    p.refresh_boundary(s.t);
    check_finite(p, s.t);
}

EvolveResult evolve(FlowState s, const StepControls& c, double t_final, int record_every,
                    const std::vector<SnapshotHook>& hooks)
{
    monitors::MonitorReport report;
    auto record = [&]() {
        if (!report.times.empty() && !(s.t > report.times.back())) return;
        report.times.push_back(s.t);
        for (const auto& hook : hooks) hook(s, report);
    };

    record();
    const double eps = 1e-12 * std::max(1.0, std::abs(t_final));
    int since = 0;
    while (s.t < t_final - eps) {
        step(s, c, t_final - s.t);
        if (record_every > 0 && ++since >= record_every) {
            record();
            since = 0;
        }
    }
    record();
    return {std::move(s), std::move(report)};
}

} // namespace qkf::flow
