#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cmath>

#include "oracles.hpp"
#include "qkflow/flow.hpp"

using namespace qkf;
using namespace qkf::flow;

namespace {

GraphPatch cap_patch(const oracle::ShrinkingCap& cap, int points_per_axis, double half_width,
                     double t)
{
    const double h = 2.0 * half_width / (points_per_axis - 1);
    GraphPatch p = GraphPatch::box(points_per_axis, points_per_axis, h, -half_width,
                                   -half_width, BoundaryKind::Dirichlet);
    p.boundary = [cap](double x, double y, double tt) { return cap.value(x, y, tt); };
    p.fill([&](double x, double y) { return cap.value(x, y, t); });
    return p;
}

double max_interior_error(const GraphPatch& p, const std::function<double(double, double)>& ref)
{
    double err = 0.0;
    for (int j = 0; j < p.ny; ++j)
        for (int i = 0; i < p.nx; ++i) {
            if (!p.is_interior(i, j)) continue;
            err = std::max(err,
                           std::abs(p.u[size_t(p.idx(i, j))] - ref(p.x(i), p.y(j))));
        }
    return err;
}

} // namespace

TEST_CASE("1d curve speed reduces to u_xx/(1+u_x^2) through the generic path")
{
    // five sample jets, speed assembled via the shape module vs the reduction
    const double samples[5][2] = {{0.0, 1.0}, {0.5, -0.7}, {-1.2, 2.0}, {3.0, 0.3}, {0.1, 0.0}};
    for (const auto& s : samples) {
        const double ux = s[0], uxx = s[1];
        Eigen::VectorXd g(1);
        Eigen::MatrixXd h(1, 1);
        g(0) = ux;
        h(0, 0) = uxx;
        const shape::ShapeMatrix sm = shape::weingarten({g, h});
        const double via_shape = symfunc::qk(shape::principal_curvatures(sm), 0) * sm.w;
        CHECK(via_shape == doctest::Approx(uxx / (1.0 + ux * ux)).epsilon(1e-13));
    }

    // and the grid kernel agrees with that reduction
    GraphPatch p = GraphPatch::line(64, 2.0 * M_PI / 64, 0.0, BoundaryKind::Periodic);
    p.fill([](double x, double) { return 0.3 * std::sin(x); });
    const KernelResult r = rhs(p, 0);
    for (int i = 0; i < p.nx; ++i) {
        const shape::JetPoint jet = jet_at(p, i, 0);
        const double want = jet.hess(0, 0) / (1.0 + jet.grad(0) * jet.grad(0));
        CHECK(r.f[size_t(i)] == doctest::Approx(want).epsilon(1e-13));
    }
}

TEST_CASE("affine data is stationary for k = 0")
{
    GraphPatch p = GraphPatch::box(9, 9, 0.1, 0.0, 0.0, BoundaryKind::Dirichlet);
    p.boundary = [](double x, double y, double) { return 0.3 * x - 0.7 * y + 2.0; };
    p.fill([](double x, double y) { return 0.3 * x - 0.7 * y + 2.0; });
    const KernelResult r = rhs(p, 0);
    CHECK(r.max_abs_f <= 1e-12); // roundoff of the affine stencil differences

    FlowState s{p, 0, 0.0, 0.0, 0, 0};
    StepControls c;
    c.scheme = Scheme::Euler;
    const std::vector<double> before = s.patch.u;
    step(s, c);
    CHECK(s.t > 0.0);
    for (std::int64_t id = 0; id < s.patch.total(); ++id)
        CHECK(std::abs(s.patch.u[size_t(id)] - before[size_t(id)]) <= 1e-14);
}

TEST_CASE("kernel agrees with the generic reference path")
{
    const oracle::ShrinkingCap cap;
    for (int k : {0, 1}) {
        const GraphPatch p = cap_patch(cap, 33, 0.5, 0.0);
        const KernelResult fast = rhs(p, k);
        const std::vector<double> ref = rhs_reference(p, k);
        CHECK(fast.violations.empty());
        for (std::int64_t id = 0; id < p.total(); ++id)
            CHECK(std::abs(fast.f[size_t(id)] - ref[size_t(id)]) <= 1e-12);
    }
}

TEST_CASE("parallel and serial sweeps are bit-identical")
{
    const oracle::ShrinkingCap cap;
    const GraphPatch p = cap_patch(cap, 49, 0.5, 0.0);
#ifdef _OPENMP
    omp_set_num_threads(2);
#endif
    const KernelResult a = rhs(p, 1);
    const KernelResult b = rhs_serial(p, 1);
    CHECK(a.f == b.f);
    CHECK(a.max_trace == b.max_trace);
#ifdef _OPENMP
    omp_set_num_threads(8);
    const KernelResult c = rhs(p, 1);
    CHECK(a.f == c.f);
#endif
}

TEST_CASE("manufactured cap: speed matches the exact time derivative to O(h^2)")
{
    const oracle::ShrinkingCap cap;
    double errs[2];
    int idx = 0;
    for (int npts : {33, 65}) {
        const GraphPatch p = cap_patch(cap, npts, 0.5, 0.0);
        const KernelResult r = rhs(p, cap.k);
        double err = 0.0;
        for (int j = 1; j < p.ny - 1; ++j)
            for (int i = 1; i < p.nx - 1; ++i)
                err = std::max(err, std::abs(r.f[size_t(p.idx(i, j))] -
                                             cap.time_derivative(p.x(i), p.y(j), 0.0)));
        errs[idx++] = err;
    }
    const double order = oracle::observed_order(errs[0], errs[1]);
    CHECK(order > 1.7);
    CHECK(order < 2.3);
}

TEST_CASE("stable step size")
{
    const oracle::ShrinkingCap cap;

    // k = 0: the derivative sum is exactly n, so dt = safety h^2 / n
    {
        const GraphPatch p = cap_patch(cap, 33, 0.5, 0.0);
        const double h = p.h;
        CHECK(stable_dt(p, 0, 0.3, 1.0) == doctest::Approx(0.3 * h * h / 2.0).epsilon(1e-14));
    }

    // halving h divides dt by four
    {
        const GraphPatch coarse = cap_patch(cap, 33, 0.5, 0.0);
        const GraphPatch fine = cap_patch(cap, 65, 0.5, 0.0);
        const double a = stable_dt(coarse, 1, 0.3, 1.0);
        const double b = stable_dt(fine, 1, 0.3, 1.0);
        CHECK(a / b == doctest::Approx(4.0).epsilon(2e-2));
    }

    // nearly equal curvatures: dt within [0.5, 1] x safety h^2 (k+1)/(n-k)
    {
        const GraphPatch p = cap_patch(cap, 33, 0.2, 0.0); // small patch, curvatures ~ 1/R0
        const double dt = stable_dt(p, 1, 0.3, 1.0);
        const double flat = 0.3 * p.h * p.h * 2.0; // (k+1)/(n-k) = 2
        CHECK(dt >= 0.5 * flat);
        CHECK(dt <= 1.0 * flat + 1e-15);
    }

    // dt_max is a hard cap
    {
        const GraphPatch p = cap_patch(cap, 33, 0.5, 0.0);
        CHECK(stable_dt(p, 1, 0.3, 1e-9) == 1e-9);
    }
}

TEST_CASE("one rk2 step against the exact cap")
{
    const oracle::ShrinkingCap cap;
    GraphPatch p = cap_patch(cap, 33, 0.5, 0.0);
    FlowState s{std::move(p), cap.k, 0.0, 0.0, 0, 0};
    StepControls c;
    c.safety = 0.2;
    step(s, c);
    const double dt = s.dt_last;
    const double h = s.patch.h;
    const double err = max_interior_error(
        s.patch, [&](double x, double y) { return cap.value(x, y, s.t); });
    // one-step consistency budget; the constant absorbs the cap's derivatives
    CHECK(err <= 20.0 * (dt * dt + dt * h * h));
}

TEST_CASE("cap run to t = 0.1 converges at second order")
{
    const oracle::ShrinkingCap cap;
    StepControls c;
    c.safety = 0.2;
    double errs[2];
    int idx = 0;
    for (int npts : {17, 33}) {
        FlowState s{cap_patch(cap, npts, 0.4, 0.0), cap.k, 0.0, 0.0, 0, 0};
        EvolveResult res = evolve(std::move(s), c, 0.1, 0, {});
        CHECK(res.state.t == doctest::Approx(0.1).epsilon(1e-12));
        errs[idx++] = max_interior_error(
            res.state.patch, [&](double x, double y) { return cap.value(x, y, 0.1); });
    }
    const double order = oracle::observed_order(errs[0], errs[1]);
    CHECK(order > 1.7);
    CHECK(order < 2.3);
}

TEST_CASE("evolve with no monitors reports only the time axis")
{
    const oracle::ShrinkingCap cap;
    FlowState s{cap_patch(cap, 17, 0.4, 0.0), 1, 0.0, 0.0, 0, 0};
    StepControls c;
    const EvolveResult res = evolve(std::move(s), c, 0.02, 3, {});
    CHECK(res.report.series.empty());
    CHECK(res.report.flags.empty());
    CHECK(res.report.times.size() >= 2);
    CHECK(res.report.times.front() == 0.0);
    CHECK(res.report.times.back() == doctest::Approx(0.02).epsilon(1e-12));
    for (std::size_t i = 1; i < res.report.times.size(); ++i)
        CHECK(res.report.times[i] > res.report.times[i - 1]);
}

TEST_CASE("periodic sine under the curve flow: maximum principles")
{
    GraphPatch p = GraphPatch::line(64, 2.0 * M_PI / 64, 0.0, BoundaryKind::Periodic);
    p.fill([](double x, double) { return 0.1 * std::sin(x); });

    StepControls c;
    c.safety = 0.4;
    c.dt_max = 1.0;
    FlowState s{std::move(p), 0, 0.0, 0.0, 0, 0};

    double prev_sup_u = 0.1;
    double prev_sup_du = 0.1; // |u'| of the initial sine
    for (int rounds = 0; rounds < 20; ++rounds) {
        for (int i = 0; i < 10; ++i) step(s, c);
        double sup_u = 0.0, sup_du = 0.0;
        for (int i = 0; i < s.patch.nx; ++i) {
            sup_u = std::max(sup_u, std::abs(s.patch.u[size_t(i)]));
            sup_du = std::max(sup_du, std::abs(jet_at(s.patch, i, 0).grad(0)));
        }
        CHECK(sup_u <= prev_sup_u + 1e-14);
        CHECK(sup_du <= prev_sup_du + 1e-12);
        prev_sup_u = sup_u;
        prev_sup_du = sup_du;
    }
    CHECK(prev_sup_u < 0.1);
}

TEST_CASE("vertical translation invariance is exact")
{
    GraphPatch p = GraphPatch::line(32, 2.0 * M_PI / 32, 0.0, BoundaryKind::Periodic);
    p.fill([](double x, double) { return 0.2 * std::sin(x); });
    GraphPatch q = p;
    const double shift = 3.25;
    for (auto& v : q.u) v += shift;

    StepControls c;
    FlowState a{std::move(p), 0, 0.0, 0.0, 0, 0};
    FlowState b{std::move(q), 0, 0.0, 0.0, 0, 0};
    for (int i = 0; i < 25; ++i) {
        step(a, c);
        step(b, c);
    }
    for (int i = 0; i < a.patch.nx; ++i)
        CHECK(b.patch.u[size_t(i)] - shift == doctest::Approx(a.patch.u[size_t(i)]).epsilon(1e-14));
}

TEST_CASE("horizontal shift equivariance on periodic domains")
{
    const int nx = 48;
    GraphPatch p = GraphPatch::line(nx, 2.0 * M_PI / nx, 0.0, BoundaryKind::Periodic);
    p.fill([](double x, double) { return 0.15 * std::sin(x) + 0.05 * std::cos(2.0 * x); });
    GraphPatch q = p;
    const int shift = 7; // whole grid points, so both runs see identical stencils
    for (int i = 0; i < nx; ++i) q.u[size_t((i + shift) % nx)] = p.u[size_t(i)];

    StepControls c;
    FlowState a{std::move(p), 0, 0.0, 0.0, 0, 0};
    FlowState b{std::move(q), 0, 0.0, 0.0, 0, 0};
    for (int i = 0; i < 30; ++i) {
        step(a, c);
        step(b, c);
    }
    for (int i = 0; i < nx; ++i)
        CHECK(std::abs(b.patch.u[size_t((i + shift) % nx)] - a.patch.u[size_t(i)]) <= 1e-12);
}

TEST_CASE("cone violations: abort and flag policies")
{
    // saddle: S_2 < 0 everywhere, so k = 1 is outside its parabolicity set
    GraphPatch p = GraphPatch::box(17, 17, 0.1, -0.8, -0.8, BoundaryKind::Dirichlet);
    p.boundary = [](double x, double y, double) { return 0.5 * (x * x - y * y); };
    p.fill([](double x, double y) { return 0.5 * (x * x - y * y); });

    const KernelResult r = rhs(p, 1);
    CHECK(!r.violations.empty());

    FlowState s{p, 1, 0.0, 0.0, 0, 0};
    StepControls c;
    CHECK_THROWS_AS(step(s, c), ConeViolationError);

    FlowState s2{p, 1, 0.0, 0.0, 0, 0};
    c.policy = ConePolicy::Flag;
    step(s2, c);
    CHECK(s2.cone_violations > 0);
}

TEST_CASE("unstable step is reported as a non-finite failure")
{
    // the quotient speed grows superlinearly in the oscillation amplitude,
    // so a far-too-large step blows up past the range of doubles
    const oracle::ShrinkingCap cap;
    FlowState s{cap_patch(cap, 33, 0.5, 0.0), 1, 0.0, 0.0, 0, 0};
    StepControls c;
    c.safety = 1e6; // deliberately far beyond the stability limit
    c.dt_max = 1e6;
    c.scheme = Scheme::Euler;
    c.policy = ConePolicy::Flag;
    bool thrown = false;
    try {
        for (int i = 0; i < 200; ++i) step(s, c);
    } catch (const NonFiniteError& e) {
        thrown = true;
        CHECK(e.when > 0.0);
    }
    CHECK(thrown);
}
