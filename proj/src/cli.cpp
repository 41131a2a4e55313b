#include "qkflow/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <nlohmann/json.hpp>
#include <ostream>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qkflow/config.hpp"
#include "qkflow/io.hpp"
#include "qkflow/monitors.hpp"
#include "qkflow/random.hpp"
#include "qkflow/symfunc.hpp"
#include "qkflow/translator.hpp"

namespace qkf::cli {

namespace fs = std::filesystem;
using config::KvConfig;
using nlohmann::json;

namespace {

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

CurvatureVector sample_real(Rng& rng, int n, double lo, double hi)
{
    CurvatureVector v = CurvatureVector::constant(n, 0.0);
    for (int i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
    return v;
}

CurvatureVector sample_cone(Rng& rng, int n, int k)
{
    for (int t = 0; t < 10000; ++t) {
        CurvatureVector v = CurvatureVector::constant(n, 0.0);
        for (int i = 0; i < n; ++i) v[i] = rng.uniform(0.1, 2.0) + rng.uniform(-0.4, 0.4);
        if (symfunc::in_cone(v, k, 1e-6)) return v;
    }
    throw DomainError("cone sampler failed");
}

} // namespace

int run_identities(const IdentityOptions& opt, std::ostream& out)
{
    struct Entry {
        std::string name;
        double worst = 0.0;
    };
    std::vector<Entry> entries;
    auto track = [&](const std::string& name) -> double& {
        for (Entry& e : entries)
            if (e.name == name) return e.worst;
        entries.push_back({name, 0.0});
        return entries.back().worst;
    };
    auto rel = [](double got, double want) {
        return std::abs(got - want) / std::max(1.0, std::abs(want));
    };

    Rng rng(opt.seed);
    out << "identity sweep: seed=" << opt.seed << " n_max=" << opt.n_max
        << " samples=" << opt.samples << "\n";
    if (opt.n_max < 2)
        out << "note: n_max < 2, quotient/pair/newton identities need n >= 2 and are skipped\n";

    for (int n = 2; n <= opt.n_max; ++n) {
        for (int s = 0; s < opt.samples; ++s) {
            const CurvatureVector lam = sample_real(rng, n, -2.0, 2.0);
            const symfunc::SymTable t = symfunc::sym_all(lam);

            for (int k = 0; k <= n; ++k) {
                double row = 0.0, weighted = 0.0, squared = 0.0;
                for (int i = 0; i < n; ++i) {
                    row += t.S1(k, i);
                    weighted += lam[i] * t.S1(k, i);
                    squared += lam[i] * lam[i] * t.S1(k, i);

                    if (k < n) {
                        // multilinearity: a unit move of one entry changes
                        // S_{k+1} by exactly the deleted value
                        CurvatureVector shifted = lam;
                        shifted[i] += 1.0;
                        const double diff =
                            symfunc::elementary(shifted).at(k + 1) - t.S(k + 1);
                        double& w1 = track("derivative_is_deleted_value");
                        w1 = std::max(w1, rel(diff, t.S1(k, i)));

                        double& w2 = track("partial_split");
                        w2 = std::max(w2,
                                      rel(t.S(k + 1), t.S1(k + 1, i) + lam[i] * t.S1(k, i)));
                    }
                }
                double& w3 = track("deleted_row_sum");
                w3 = std::max(w3, rel(row, (n - k) * t.S(k)));
                double& w4 = track("deleted_weighted_sum");
                w4 = std::max(w4, rel(weighted, (k + 1) * t.S(k + 1)));
                double& w5 = track("deleted_square_sum");
                w5 = std::max(w5, rel(squared, t.S(1) * t.S(k + 1) - (k + 2) * t.S(k + 2)));

                for (int j = 0; j < n; ++j) {
                    double pair_sum = 0.0;
                    for (int i = 0; i < n; ++i)
                        if (i != j) pair_sum += t.S2(k, i, j);
                    double& w6 = track("deleted_pair_sum");
                    w6 = std::max(w6, rel(pair_sum, (n - k - 1) * t.S1(k, j)));
                }
            }
        }

        // quotient identities on admissible samples
        for (int k = 0; k < n; ++k) {
            for (int s = 0; s < opt.samples; ++s) {
                const CurvatureVector lam = sample_cone(rng, n, k + 1);
                const std::vector<double> g = symfunc::qk_gradient(lam, k);
                const double q = symfunc::qk(lam, k);
                double trace = 0.0, euler = 0.0;
                for (int i = 0; i < n; ++i) {
                    trace += g[static_cast<std::size_t>(i)];
                    euler += lam[i] * g[static_cast<std::size_t>(i)];
                }
                double& we = track("quotient_euler_sum");
                we = std::max(we, rel(euler, q));
                const double want_trace =
                    k == 0 ? static_cast<double>(n)
                           : (n - k) - (n - k + 1) * q / symfunc::qk(lam, k - 1);
                double& wt = track("quotient_derivative_sum");
                wt = std::max(wt, rel(trace, want_trace));

                const symfunc::SecondMoment m = symfunc::qk_second_moment(lam, k);
                if (m.identity_checked) {
                    double& wm = track("quotient_second_moment");
                    wm = std::max(wm, rel(m.value, m.identity_value));
                }

                for (int l = 0; l <= k; ++l) {
                    const double factor = static_cast<double>((l + 1) * (n - k)) /
                                          static_cast<double>((k + 1) * (n - l));
                    const double excess = q - factor * symfunc::qk(lam, l);
                    double& wq = track("maclaurin_chain");
                    wq = std::max(wq, excess / std::max(1.0, std::abs(q)));
                }
            }
        }

        // newton inequality: sign over wide real samples, equality at equal entries
        for (int s = 0; s < 10 * opt.samples; ++s) {
            const int k = rng.uniform_int(1, n - 1);
            const CurvatureVector lam = sample_real(rng, n, -5.0, 5.0);
            const symfunc::SymValues v = symfunc::elementary(lam);
            const double scale =
                std::max({1.0, std::abs(k * (n - k) * v.at(k) * v.at(k)),
                          std::abs((k + 1.0) * (n - k + 1.0) * v.at(k - 1) * v.at(k + 1))});
            double& wn = track("newton_defect_nonnegative");
            wn = std::max(wn, -symfunc::newton_defect(lam, k) / scale);
        }
        for (int s = 0; s < opt.samples; ++s) {
            const int k = rng.uniform_int(1, n - 1);
            const double c = rng.uniform(0.25, 1.0);
            double& wn = track("newton_defect_equality_case");
            wn = std::max(wn,
                          std::abs(symfunc::newton_defect(CurvatureVector::constant(n, c), k)));
        }
    }

    int code = kExitOk;
    std::string first_fail;
    for (const Entry& e : entries) {
        const bool ok = e.worst <= opt.tol;
        out << "  " << e.name;
        for (std::size_t pad = e.name.size(); pad < 30; ++pad) out << ' ';
        out << " max_rel_err = " << fmt(e.worst) << (ok ? "  [PASS]" : "  [FAIL]") << "\n";
        if (!ok && first_fail.empty()) {
            first_fail = e.name;
            code = kExitIdentityFailure;
        }
    }
    if (code == kExitOk)
        out << "all identities within " << fmt(opt.tol) << "\n";
    else
        out << "FAIL: " << first_fail << " exceeded " << fmt(opt.tol) << "\n";
    return code;
}

std::string resolve_out_dir(const std::string& from_config, const Overrides& ov)
{
    if (ov.out_dir) return *ov.out_dir;
    if (const char* env = std::getenv("QKF_OUT_DIR")) return env;
    return from_config;
}

namespace {

void apply_threads(const Overrides& ov)
{
#ifdef _OPENMP
    if (ov.threads) omp_set_num_threads(std::max(1, *ov.threads));
#else
    (void)ov;
#endif
}

flow::StepControls controls_from(const KvConfig& kv, const std::string& section)
{
    flow::StepControls c;
    const std::string scheme = kv.get_string(section + ".scheme", "rk2");
    if (scheme == "euler")
        c.scheme = flow::Scheme::Euler;
    else if (scheme == "rk2")
        c.scheme = flow::Scheme::RK2;
    else
        throw ConfigError("unknown scheme: " + scheme);
    const std::string policy = kv.get_string(section + ".cone_policy", "abort");
    if (policy == "abort")
        c.policy = flow::ConePolicy::Abort;
    else if (policy == "flag")
        c.policy = flow::ConePolicy::Flag;
    else
        throw ConfigError("unknown cone policy: " + policy);
    c.safety = kv.get_double(section + ".safety", 0.2);
    if (!(c.safety > 0.0)) throw ConfigError("safety must be positive");
    c.dt_max = kv.get_double(section + ".dt_max", 1e-2);
    if (!(c.dt_max > 0.0)) throw ConfigError("dt_max must be positive");
    c.cone_rel_tol = kv.get_double("tolerances.cone_rel", kConeRelTol);
    return c;
}

struct CapParams {
    int n, k;
    double r0, center_height;

    double radius_sq(double t) const
    {
        return r0 * r0 - 2.0 * double(n - k) / double(k + 1) * t;
    }
    double value(double x, double y, double t) const
    {
        const double rho2 = n == 1 ? x * x : x * x + y * y;
        return center_height - std::sqrt(radius_sq(t) - rho2);
    }
};

struct FlowSetup {
    int n = 2, k = 0;
    flow::FlowState state;
    flow::StepControls controls;
    double t_final = 0.0;
    int record_every = 0;
    bool warn_only = false;
    std::vector<flow::SnapshotHook> hooks;
    std::vector<std::function<void(monitors::MonitorReport&)>> finalizers;
};

std::vector<std::string> split_names(const std::string& s)
{
    std::vector<std::string> names;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) names.push_back(cur);
            cur.clear();
        } else if (c != ' ' && c != '\t') {
            cur += c;
        }
    }
    if (!cur.empty()) names.push_back(cur);
    return names;
}

void add_monitor_hooks(FlowSetup& setup, const KvConfig& kv, int n, int k)
{
    if (!kv.has("monitors.enable")) return;
    for (const std::string& name : split_names(kv.get_string("monitors.enable"))) {
        if (name == "radius_law") {
            auto m = std::make_shared<monitors::RadiusLawMonitor>(
                n, k, kv.get_double("initial.r0") * kv.get_double("initial.r0"),
                kv.get_double("monitors.radius_law_tol"),
                kv.get_double("monitors.radius_law_rms", 1e-3));
            setup.hooks.push_back(
                [m](const flow::FlowState& s, monitors::MonitorReport& r) { (*m)(s, r); });
        } else if (name == "pinching") {
            if (k < 1) throw ConfigError("pinching monitor needs k >= 1");
            auto m = std::make_shared<monitors::PinchingMonitor>(
                k, kv.get_double("monitors.pinching_tol", 1e-10));
            setup.hooks.push_back(
                [m](const flow::FlowState& s, monitors::MonitorReport& r) { (*m)(s, r); });
        } else if (name == "max_v") {
            const std::vector<double> c = kv.get_list("monitors.max_v_center");
            if (c.size() != 3)
                throw ConfigError("max_v_center needs three components (x, y, height)");
            auto m = std::make_shared<monitors::MaxVMonitor>(
                n, k, kv.get_double("monitors.max_v_radius"),
                std::array<double, 3>{c[0], c[1], c[2]},
                kv.get_double("monitors.max_v_budget"));
            setup.hooks.push_back(
                [m](const flow::FlowState& s, monitors::MonitorReport& r) { (*m)(s, r); });
        } else if (name == "curvature_parabolic") {
            if (k < 1) throw ConfigError("curvature monitor needs k >= 1");
            std::array<double, 2> x0{0.0, 0.0};
            if (kv.has("monitors.curvature_center")) {
                const std::vector<double> c = kv.get_list("monitors.curvature_center");
                if (c.size() != 2) throw ConfigError("curvature_center needs two components");
                x0 = {c[0], c[1]};
            }
            auto m = std::make_shared<monitors::CurvatureEstimateMonitor>(
                k, kv.get_double("monitors.curvature_theta", 0.5),
                kv.get_list("monitors.curvature_radii"), x0);
            setup.hooks.push_back(
                [m](const flow::FlowState& s, monitors::MonitorReport& r) { (*m)(s, r); });
            setup.finalizers.push_back([m](monitors::MonitorReport& r) {
                const monitors::CurvatureFit fit = m->fit();
                r.set_flag("curvature_bound", fit.pass,
                           fit.message + "; fitted c = " + io::format_full(fit.c));
            });
        } else if (name == "gradient_functional") {
            const std::string mode_s = kv.get_string("monitors.functional_mode", "parabolic");
            const monitors::TestFunctionalMode mode =
                mode_s == "elliptic" ? monitors::TestFunctionalMode::Elliptic
                                     : monitors::TestFunctionalMode::Parabolic;
            const double r = kv.get_double("monitors.functional_radius");
            setup.hooks.push_back(
                [mode, r](const flow::FlowState& s, monitors::MonitorReport& rep) {
                    rep.append("grad_functional", s.t,
                               monitors::gradient_test_functional(s, {1.0, 0.0}, mode, r));
                });
        } else {
            throw ConfigError("unknown monitor: " + name);
        }
    }
}

FlowSetup build_flow(const KvConfig& kv)
{
    FlowSetup setup;
    setup.n = static_cast<int>(kv.get_int("run.n"));
    setup.k = static_cast<int>(kv.get_int("run.k"));
    if (setup.n < 1 || setup.n > 2)
        throw ConfigError("grid runs support n in {1, 2}");
    if (setup.k < 0 || setup.k > setup.n - 1)
        throw ConfigError("need 0 <= k <= n-1, got k = " + std::to_string(setup.k));

    const std::string bc = kv.get_string("bc.type", "exact");
    const std::string profile = kv.get_string("initial.profile");

    flow::GraphPatch patch;
    if (bc == "periodic") {
        const int points = static_cast<int>(kv.get_int("domain.points_per_axis"));
        const double length = kv.get_double("domain.period_length", 2.0 * M_PI);
        const double h = length / points;
        if (setup.n == 1)
            patch = flow::GraphPatch::line(points, h, 0.0, flow::BoundaryKind::Periodic);
        else
            patch = flow::GraphPatch::box(points, points, h, 0.0, 0.0,
                                          flow::BoundaryKind::Periodic);
    } else if (bc == "exact" || bc == "frozen") {
        const int points = static_cast<int>(kv.get_int("domain.points_per_axis"));
        const double hw = kv.get_double("domain.half_width");
        const double h = 2.0 * hw / (points - 1);
        if (setup.n == 1)
            patch = flow::GraphPatch::line(points, h, -hw, flow::BoundaryKind::Dirichlet);
        else
            patch = flow::GraphPatch::box(points, points, h, -hw, -hw,
                                          flow::BoundaryKind::Dirichlet);
    } else {
        throw ConfigError("unknown boundary type: " + bc);
    }

    setup.t_final = kv.get_double("time.t_final");
    if (!(setup.t_final > 0.0)) throw ConfigError("t_final must be positive");

    if (profile == "shrinking_cap") {
        const CapParams cap{setup.n, setup.k, kv.get_double("initial.r0"),
                            kv.get_double("initial.center_height", 0.0)};
        const double hw = kv.get_double("domain.half_width");
        const double diag2 = setup.n == 1 ? hw * hw : 2.0 * hw * hw;
        // the initial cap must cover the grid; a run that outlives the cap
        // fails mid-run with a non-finite report when the sphere shrinks
        // inside the grid corners
        if (cap.radius_sq(0.0) <= diag2)
            throw ConfigError("initial cap does not cover the grid");
        patch.fill([&](double x, double y) { return cap.value(x, y, 0.0); });
        if (bc == "exact")
            patch.boundary = [cap](double x, double y, double t) { return cap.value(x, y, t); };
        else if (bc == "frozen")
            patch.boundary = [cap](double x, double y, double) { return cap.value(x, y, 0.0); };
        else
            throw ConfigError("shrinking_cap needs a dirichlet boundary");
    } else if (profile == "sine") {
        if (bc != "periodic") throw ConfigError("sine initial data needs periodic boundaries");
        const double amp = kv.get_double("initial.amplitude", 0.1);
        const double length = kv.get_double("domain.period_length", 2.0 * M_PI);
        const double fundamental = 2.0 * M_PI / length;
        patch.fill([&](double x, double y) {
            return setup.n == 1 ? amp * std::sin(fundamental * x)
                                : amp * std::sin(fundamental * x) * std::sin(fundamental * y);
        });
    } else if (profile.rfind("file:", 0) == 0) {
        patch.u = io::read_grid_values(profile.substr(5), patch.total());
        if (bc == "frozen") {
            const flow::GraphPatch frozen = patch; // boundary pinned at the loaded values
            patch.boundary = [frozen](double x, double y, double) {
                const int i = static_cast<int>(std::lround((x - frozen.x0) / frozen.h));
                const int j = frozen.dim == 2
                                  ? static_cast<int>(std::lround((y - frozen.y0) / frozen.h))
                                  : 0;
                return frozen.u[static_cast<std::size_t>(frozen.idx(i, j))];
            };
        } else if (bc != "periodic") {
            throw ConfigError("file input supports frozen or periodic boundaries");
        }
    } else {
        throw ConfigError("unknown initial profile: " + profile);
    }
    patch.validate();

    setup.controls = controls_from(kv, "time");
    setup.record_every = static_cast<int>(kv.get_int("time.record_every", 0));
    setup.warn_only = kv.get_string("monitors.fail_mode", "error") == "warn";
    setup.state = flow::FlowState{std::move(patch), setup.k, 0.0, 0.0, 0, 0};

    add_monitor_hooks(setup, kv, setup.n, setup.k);
    return setup;
}

json geometry_json(const flow::GraphPatch& p)
{
    return json{{"dim", p.dim},
                {"nx", p.nx},
                {"ny", p.ny},
                {"h", p.h},
                {"x0", p.x0},
                {"y0", p.y0},
                {"bc", p.bc == flow::BoundaryKind::Periodic ? "periodic" : "dirichlet"}};
}

json config_json(const KvConfig& kv)
{
    json j = json::object();
    for (const auto& [key, value] : kv.entries()) j[key] = value;
    return j;
}

} // namespace

int run_flow(const std::string& config_path, const Overrides& ov, std::ostream& out)
{
    KvConfig kv = KvConfig::parse_file(config_path);
    if (ov.seed) kv.set("run.seed", std::to_string(*ov.seed));
    apply_threads(ov);

    const std::string out_dir = resolve_out_dir(kv.get_string("run.out_dir", "qkf_flow_run"), ov);
    fs::create_directories(out_dir);

    FlowSetup setup = build_flow(kv);

    json summary;
    summary["kind"] = "flow";
    summary["config"] = config_json(kv);
    summary["geometry"] = geometry_json(setup.state.patch);
    summary["n"] = setup.n;
    summary["k"] = setup.k;

    auto snapshots = std::make_shared<std::vector<std::pair<std::string, double>>>();
    std::vector<flow::SnapshotHook> hooks;
    hooks.push_back([snapshots, out_dir](const flow::FlowState& s, monitors::MonitorReport&) {
        char name[32];
        std::snprintf(name, sizeof(name), "snapshot_%06zu.csv", snapshots->size());
        io::write_grid_csv(s.patch, out_dir + "/" + name);
        snapshots->emplace_back(name, s.t);
    });
    for (auto& h : setup.hooks) hooks.push_back(std::move(h));

    try {
        flow::EvolveResult res = flow::evolve(std::move(setup.state), setup.controls,
                                              setup.t_final, setup.record_every, hooks);
        for (auto& fin : setup.finalizers) fin(res.report);
        io::write_report(res.report, out_dir);

        json snaps = json::array();
        for (const auto& [name, t] : *snapshots) snaps.push_back({name, t});
        summary["snapshots"] = std::move(snaps);
        summary["final_t"] = res.state.t;
        summary["steps"] = res.state.steps;
        summary["dt_last"] = res.state.dt_last;
        summary["dt_min"] = res.state.dt_min;
        summary["dt_max"] = res.state.dt_max_seen;
        summary["cone_violations"] = res.state.cone_violations;
        json flags = json::object();
        for (const auto& [name, f] : res.report.flags)
            flags[name] = {{"pass", f.pass}, {"message", f.message}};
        summary["monitor_flags"] = std::move(flags);
        summary["status"] = "completed";
        io::write_json(summary, out_dir + "/summary.json");

        if (!res.report.all_pass()) {
            out << "monitor failure in " << out_dir << "\n";
            return setup.warn_only ? kExitOk : kExitMonitorFailure;
        }
        out << "flow run completed: " << out_dir << "\n";
        return kExitOk;
    } catch (const flow::NonFiniteError& e) {
        summary["status"] = "failed";
        summary["failure"] = {{"kind", "non_finite"}, {"time", e.when}, {"what", e.what()}};
        io::write_json(summary, out_dir + "/summary.json");
        out << "solver failure: " << e.what() << "\n";
        return kExitSolverFailure;
    } catch (const flow::ConeViolationError& e) {
        summary["status"] = "failed";
        summary["failure"] = {{"kind", "cone_violation"},
                              {"time", e.when},
                              {"points", e.points.size()},
                              {"what", e.what()}};
        io::write_json(summary, out_dir + "/summary.json");
        out << "solver failure: " << e.what() << "\n";
        return kExitSolverFailure;
    } catch (const flow::NonConvergenceError& e) {
        summary["status"] = "failed";
        summary["failure"] = {{"kind", "non_convergence"}, {"what", e.what()}};
        io::write_json(summary, out_dir + "/summary.json");
        out << "solver failure: " << e.what() << "\n";
        return kExitSolverFailure;
    }
}

int run_translator(const std::string& config_path, const Overrides& ov, std::ostream& out)
{
    KvConfig kv = KvConfig::parse_file(config_path);
    if (ov.seed) kv.set("run.seed", std::to_string(*ov.seed));
    apply_threads(ov);

    const std::string out_dir =
        resolve_out_dir(kv.get_string("run.out_dir", "qkf_translator_run"), ov);
    fs::create_directories(out_dir);

    const int n = static_cast<int>(kv.get_int("run.n"));
    const int k = static_cast<int>(kv.get_int("run.k"));
    if (n < 1 || n > kMaxDim || k < 0 || k > n - 1)
        throw ConfigError("need 1 <= n <= " + std::to_string(kMaxDim) + " and 0 <= k <= n-1");

    translator::ProfileOptions opt;
    opt.r_max = kv.get_double("profile.r_max");
    opt.h = kv.get_double("profile.h");
    opt.slope_max = kv.get_double("profile.slope_max", 1e6);

    json summary;
    summary["kind"] = "translator";
    summary["config"] = config_json(kv);
    summary["n"] = n;
    summary["k"] = k;

    monitors::MonitorReport report;

    try {
        const translator::ProfileResult res = translator::integrate_profile(n, k, opt);
        const translator::TranslatorProfile& profile = res.profile;
        const translator::ProfilePointData data = translator::profile_pointwise(profile);
        io::write_profile_csv(profile, data, out_dir + "/profile.csv");

        summary["profile_stop"] =
            res.stop == translator::ProfileStop::ReachedRmax ? "r_max" : "slope_limit";
        summary["r_end"] = profile.r_end();

        const double vertex = translator::measured_vertex_curvature(profile);
        const double vertex_want = translator::vertex_curvature(n, k);
        summary["vertex_curvature"] = vertex;
        summary["vertex_curvature_expected"] = vertex_want;
        report.set_flag("vertex_curvature",
                        std::abs(vertex - vertex_want) <=
                            kv.get_double("profile.vertex_tol", 1e-8),
                        "measured " + io::format_full(vertex) + " expected " +
                            io::format_full(vertex_want));

        double worst_residual = 0.0;
        for (std::size_t i = 0; i < profile.size(); ++i)
            worst_residual = std::max(worst_residual, data.residual[i]);
        summary["roundtrip_residual"] = worst_residual;
        report.set_flag("roundtrip_residual",
                        worst_residual <= kv.get_double("profile.residual_tol", 1e-6),
                        "worst |Q_k w - 1| = " + io::format_full(worst_residual));

        if (kv.has("growth.r_lo")) {
            const double r_lo = kv.get_double("growth.r_lo");
            const double r_hi = kv.get_double("growth.r_hi");
            if (r_hi <= profile.r_end()) {
                const double slope = translator::growth_exponent(profile, r_lo, r_hi);
                summary["growth_exponent"] = slope;
                report.set_flag("growth_superlinear",
                                slope > kv.get_double("growth.min_exponent", 1.2),
                                "log-log slope " + io::format_full(slope));
            } else {
                summary["growth_exponent"] = nullptr;
                summary["growth_note"] = "profile ended before the growth window";
            }
        }

        if (kv.has("panels.center")) {
            const double d = kv.get_double("panels.center");
            std::vector<monitors::EstimatePanel> panels;
            for (double r : kv.get_list("panels.radii"))
                panels.push_back(monitors::panel_from_profile(profile, d, r));
            const monitors::BoundFit fit = monitors::elliptic_gradient_bound_fit(panels);
            summary["gradient_bound_c"] = fit.c;
            summary["gradient_bound_panels_used"] = fit.used;
            report.set_flag("gradient_bound", fit.pass,
                            fit.message + "; fitted C = " + io::format_full(fit.c));
        }

        if (kv.has("curvature.radii")) {
            const std::vector<double> radii = kv.get_list("curvature.radii");
            const monitors::CurvatureFit fit = monitors::curvature_estimate_elliptic(
                profile, kv.get_double("curvature.theta", 0.5), radii);
            summary["curvature_bound_c"] = fit.c;
            report.set_flag("curvature_bound", fit.pass,
                            fit.message + "; fitted c = " + io::format_full(fit.c));
        }

        if (kv.get_bool("height_identity.enable", false)) {
            const translator::HeightIdentityResult hi =
                translator::intrinsic_height_identity(profile, k);
            summary["height_identity_residual"] = hi.sup_residual;
            report.set_flag("height_identity",
                            hi.sup_residual <= kv.get_double("height_identity.tol", 1e-4),
                            "sup residual " + io::format_full(hi.sup_residual));
        }

        if (kv.get_bool("relax.enable", false)) {
            if (n != 2) throw ConfigError("relaxation runs on 2d grids only");
            translator::RelaxConfig rc;
            rc.k = k;
            rc.half_width = kv.get_double("relax.half_width");
            rc.points_per_axis = static_cast<int>(kv.get_int("relax.points_per_axis"));
            rc.rtol = kv.get_double("relax.rtol", 1e-6);
            rc.max_steps = kv.get_int("relax.max_steps", 2000000);
            rc.record_every = static_cast<int>(kv.get_int("relax.record_every", 256));
            const std::string init = kv.get_string("relax.init", "profile");
            if (init == "paraboloid") {
                rc.init = translator::RelaxConfig::Init::Paraboloid;
                rc.paraboloid_curvature = kv.get_double("relax.paraboloid_curvature", 0.0);
            } else if (init != "profile") {
                throw ConfigError("unknown relax init: " + init);
            }
            rc.controls = controls_from(kv, "relax");

            const translator::RelaxResult relax = translator::relax_to_translator(profile, rc);
            io::write_grid_csv(relax.patch, out_dir + "/relaxed.csv");
            for (const auto& [name, series] : relax.report.series)
                for (const auto& [t, v] : series) report.append(name, t, v);

            double dist = 0.0;
            for (int j = 0; j < relax.patch.ny; ++j)
                for (int i = 0; i < relax.patch.nx; ++i) {
                    const double want =
                        profile.value(std::hypot(relax.patch.x(i), relax.patch.y(j)));
                    dist = std::max(
                        dist,
                        std::abs(relax.patch.u[static_cast<std::size_t>(relax.patch.idx(i, j))] -
                                 want));
                }
            summary["relax_steps"] = relax.steps;
            summary["relax_final_residual"] = relax.final_residual;
            summary["relax_profile_distance"] = dist;
            report.set_flag("relax_matches_profile",
                            dist <= kv.get_double("relax.match_tol", 1e-3),
                            "max-norm distance to the radial profile " + io::format_full(dist));
        }
    } catch (const SolveError& e) {
        summary["status"] = "failed";
        summary["failure"] = {{"kind", "solve"}, {"what", e.what()}};
        io::write_json(summary, out_dir + "/summary.json");
        out << "solver failure: " << e.what() << "\n";
        return kExitSolverFailure;
    } catch (const DomainError& e) {
        summary["status"] = "failed";
        summary["failure"] = {{"kind", "domain"}, {"what", e.what()}};
        io::write_json(summary, out_dir + "/summary.json");
        out << "solver failure: " << e.what() << "\n";
        return kExitSolverFailure;
    } catch (const flow::NonConvergenceError& e) {
        summary["status"] = "failed";
        summary["failure"] = {{"kind", "non_convergence"}, {"what", e.what()}};
        io::write_json(summary, out_dir + "/summary.json");
        out << "solver failure: " << e.what() << "\n";
        return kExitSolverFailure;
    }

    io::write_report(report, out_dir);
    json flags = json::object();
    for (const auto& [name, f] : report.flags)
        flags[name] = {{"pass", f.pass}, {"message", f.message}};
    summary["monitor_flags"] = std::move(flags);
    summary["status"] = "completed";
    io::write_json(summary, out_dir + "/summary.json");

    if (!report.all_pass()) {
        out << "monitor failure in " << out_dir << "\n";
        return kv.get_string("monitors.fail_mode", "error") == "warn" ? kExitOk
                                                                      : kExitMonitorFailure;
    }
    out << "translator run completed: " << out_dir << "\n";
    return kExitOk;
}

int run_report(const std::string& run_dir, std::ostream& out)
{
    const json summary = io::read_json(run_dir + "/summary.json");
    if (summary.value("kind", "") != "flow")
        throw ConfigError("report re-rendering is defined for flow runs");
    if (summary.value("status", "") != "completed")
        throw ConfigError("cannot re-render a failed run");

    KvConfig kv;
    for (const auto& [key, value] : summary.at("config").items())
        kv.set(key, value.get<std::string>());

    const json& g = summary.at("geometry");
    flow::GraphPatch patch;
    if (g.at("dim").get<int>() == 1)
        patch = flow::GraphPatch::line(g.at("nx").get<int>(), g.at("h").get<double>(),
                                       g.at("x0").get<double>(),
                                       g.at("bc").get<std::string>() == "periodic"
                                           ? flow::BoundaryKind::Periodic
                                           : flow::BoundaryKind::Dirichlet);
    else
        patch = flow::GraphPatch::box(g.at("nx").get<int>(), g.at("ny").get<int>(),
                                      g.at("h").get<double>(), g.at("x0").get<double>(),
                                      g.at("y0").get<double>(),
                                      g.at("bc").get<std::string>() == "periodic"
                                          ? flow::BoundaryKind::Periodic
                                          : flow::BoundaryKind::Dirichlet);

    const int n = summary.at("n").get<int>();
    const int k = summary.at("k").get<int>();

    FlowSetup setup;
    add_monitor_hooks(setup, kv, n, k);

    monitors::MonitorReport report;
    for (const auto& snap : summary.at("snapshots")) {
        const std::string file = snap.at(0).get<std::string>();
        const double t = snap.at(1).get<double>();
        patch.u = io::read_grid_values(run_dir + "/" + file, patch.total());
        report.times.push_back(t);
        flow::FlowState state{patch, k, t, 0.0, 0, 0};
        for (const auto& hook : setup.hooks) hook(state, report);
    }
    for (auto& fin : setup.finalizers) fin(report);
    io::write_report(report, run_dir);

    out << "report re-rendered from " << summary.at("snapshots").size() << " snapshots in "
        << run_dir << "\n";
    return report.all_pass() ? kExitOk : kExitMonitorFailure;
}

} // namespace qkf::cli
