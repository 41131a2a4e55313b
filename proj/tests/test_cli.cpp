#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "qkflow/cli.hpp"
#include "qkflow/config.hpp"
#include "qkflow/io.hpp"

using namespace qkf;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& text)
{
    const std::string path = (fs::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << text;
    return path;
}

} // namespace

TEST_CASE("config parsing and canonical round trip")
{
    const std::string text = R"(# run description
[run]
n = 2
k = 1        # quotient index

[domain]
half_width = 0.5
radii = 2, 4, 8
)";
    const config::KvConfig a = config::KvConfig::parse_string(text);
    CHECK(a.get_int("run.n") == 2);
    CHECK(a.get_double("domain.half_width") == 0.5);
    CHECK(a.get_list("domain.radii") == std::vector<double>{2.0, 4.0, 8.0});
    CHECK(a.get_string("missing.key", "fallback") == "fallback");
    CHECK_THROWS_AS((void)a.get_string("missing.key"), ConfigError);
    CHECK_THROWS_AS((void)a.get_int("domain.half_width"), ConfigError);

    // parse -> serialize -> parse is the identity
    const config::KvConfig b = config::KvConfig::parse_string(a.serialize());
    CHECK(a == b);
    CHECK(a.serialize() == b.serialize());

    CHECK_THROWS_AS((void)config::KvConfig::parse_string("key_without_section = 1"),
                    ConfigError);
    CHECK_THROWS_AS((void)config::KvConfig::parse_string("[sec]\nnot a pair"), ConfigError);
}

TEST_CASE("grid csv round trip is bit exact")
{
    flow::GraphPatch p = flow::GraphPatch::box(7, 7, 1.0 / 3.0, -1.0, -1.0,
                                               flow::BoundaryKind::Periodic);
    p.fill([](double x, double y) { return std::sin(3.0 * x) * std::exp(y) + 1e-17; });
    const std::string path = (fs::temp_directory_path() / "qkf_grid.csv").string();
    io::write_grid_csv(p, path);
    const std::vector<double> u = io::read_grid_values(path, p.total());
    CHECK(u == p.u);
}

TEST_CASE("identity sweep output is deterministic and seed-dependent")
{
    cli::IdentityOptions opt;
    opt.n_max = 4;
    opt.samples = 50;
    std::ostringstream a, b;
    CHECK(cli::run_identities(opt, a) == cli::kExitOk);
    CHECK(cli::run_identities(opt, b) == cli::kExitOk);
    CHECK(a.str() == b.str());

    cli::IdentityOptions low = opt;
    low.n_max = 1;
    std::ostringstream c;
    CHECK(cli::run_identities(low, c) == cli::kExitOk);
    CHECK(c.str().find("skipped") != std::string::npos);

    cli::IdentityOptions strict = opt;
    strict.tol = 1e-17; // below roundoff: must fail and name an identity
    std::ostringstream d;
    CHECK(cli::run_identities(strict, d) == cli::kExitIdentityFailure);
    CHECK(d.str().find("FAIL") != std::string::npos);
}

TEST_CASE("flow run configuration validation")
{
    const std::string bad_k = write_temp("qkf_bad_k.cfg", R"([run]
n = 2
k = 2
[domain]
half_width = 0.5
points_per_axis = 17
[initial]
profile = shrinking_cap
r0 = 1.0
center_height = 1.25
[bc]
type = exact
[time]
t_final = 0.01
)");
    CHECK_THROWS_AS((void)cli::run_flow(bad_k, {}, std::cout), ConfigError);

    const std::string bad_profile = write_temp("qkf_bad_profile.cfg", R"([run]
n = 2
k = 1
[domain]
half_width = 0.5
points_per_axis = 17
[initial]
profile = nonsense
[bc]
type = exact
[time]
t_final = 0.01
)");
    CHECK_THROWS_AS((void)cli::run_flow(bad_profile, {}, std::cout), ConfigError);
}

TEST_CASE("solver failures exit with code 2 and record the failure time")
{
    // (a) stability margin removed, abort policy: the first oversized step
    // pushes grid points out of the parabolicity set
    const std::string dir_a = (fs::temp_directory_path() / "qkf_coneabort").string();
    const std::string cfg_a = write_temp("qkf_coneabort.cfg", R"([run]
n = 2
k = 1
out_dir = )" + dir_a + R"(
[domain]
half_width = 0.5
points_per_axis = 33
[initial]
profile = shrinking_cap
r0 = 1.0
center_height = 1.25
[bc]
type = exact
[time]
t_final = 0.4
scheme = euler
safety = 1e6
dt_max = 4e-3
cone_policy = abort
)");
    std::ostringstream out;
    CHECK(cli::run_flow(cfg_a, {}, out) == cli::kExitSolverFailure);
    auto summary = io::read_json(dir_a + "/summary.json");
    CHECK(summary.at("status") == "failed");
    CHECK(summary.at("failure").at("kind") == "cone_violation");
    CHECK(summary.at("failure").at("time").get<double>() > 0.0);

    // (b) the run outlives the cap: the sphere shrinks inside the grid
    // corners, the graph stops existing there, and the values go non-finite
    const std::string dir_b = (fs::temp_directory_path() / "qkf_expired").string();
    const std::string cfg_b = write_temp("qkf_expired.cfg", R"([run]
n = 2
k = 1
out_dir = )" + dir_b + R"(
[domain]
half_width = 0.5
points_per_axis = 33
[initial]
profile = shrinking_cap
r0 = 1.0
center_height = 1.25
[bc]
type = exact
[time]
t_final = 0.8
scheme = rk2
safety = 0.2
dt_max = 0.01
cone_policy = flag
)");
    std::ostringstream out_b;
    CHECK(cli::run_flow(cfg_b, {}, out_b) == cli::kExitSolverFailure);
    summary = io::read_json(dir_b + "/summary.json");
    CHECK(summary.at("status") == "failed");
    CHECK(summary.at("failure").at("kind") == "non_finite");
    const double when = summary.at("failure").at("time").get<double>();
    CHECK(when > 0.4); // the corners leave the cap at t = 0.5
    CHECK(when < 0.8);
}

TEST_CASE("out-dir resolution precedence")
{
    unsetenv("QKF_OUT_DIR");
    CHECK(cli::resolve_out_dir("from_config", {}) == "from_config");
    setenv("QKF_OUT_DIR", "from_env", 1);
    CHECK(cli::resolve_out_dir("from_config", {}) == "from_env");
    cli::Overrides ov;
    ov.out_dir = "from_flag";
    CHECK(cli::resolve_out_dir("from_config", ov) == "from_flag");
    unsetenv("QKF_OUT_DIR");
}

TEST_CASE("file-based initial data with frozen boundary")
{
    // write a paraboloid grid, load it back through the file: profile
    flow::GraphPatch src = flow::GraphPatch::box(17, 17, 0.0625, -0.5, -0.5,
                                                 flow::BoundaryKind::Dirichlet);
    src.boundary = [](double, double, double) { return 0.0; };
    src.fill([](double x, double y) { return 0.5 * (x * x + y * y); });
    const std::string grid = (fs::temp_directory_path() / "qkf_init.csv").string();
    io::write_grid_csv(src, grid);

    const std::string dir = (fs::temp_directory_path() / "qkf_filerun").string();
    const std::string cfg = write_temp("qkf_file.cfg", R"([run]
n = 2
k = 0
out_dir = )" + dir + R"(
[domain]
half_width = 0.5
points_per_axis = 17
[initial]
profile = file:)" + grid + R"(
[bc]
type = frozen
[time]
t_final = 0.005
record_every = 10
)");
    std::ostringstream out;
    CHECK(cli::run_flow(cfg, {}, out) == cli::kExitOk);
    const auto summary = io::read_json(dir + "/summary.json");
    CHECK(summary.at("status") == "completed");
    CHECK(summary.at("final_t").get<double>() == doctest::Approx(0.005).epsilon(1e-12));
}
