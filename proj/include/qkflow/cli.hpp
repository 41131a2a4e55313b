#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace qkf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIdentityFailure = 1;
inline constexpr int kExitSolverFailure = 2;
inline constexpr int kExitMonitorFailure = 3;
inline constexpr int kExitUsage = 64;

struct IdentityOptions {
    std::uint64_t seed = 1;
    int n_max = 8;
    int samples = 1000;
    double tol = 1e-10;
};

/// Full identity/inequality sweep; one line per identity with its worst
/// relative error. Returns 0, or 1 naming the first failing identity.
int run_identities(const IdentityOptions& opt, std::ostream& out);

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out_dir;
};

/// out-dir precedence: --out-dir flag, then QKF_OUT_DIR, then the config.
std::string resolve_out_dir(const std::string& from_config, const Overrides& ov);

int run_flow(const std::string& config_path, const Overrides& ov, std::ostream& out);
int run_translator(const std::string& config_path, const Overrides& ov, std::ostream& out);

/// Re-render the monitor report of a finished flow run from its stored
/// snapshots; byte-identical to the original report.
int run_report(const std::string& run_dir, std::ostream& out);

} // namespace qkf::cli
