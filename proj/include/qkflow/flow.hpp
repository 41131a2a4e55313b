#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "qkflow/grid.hpp"
#include "qkflow/report.hpp"

namespace qkf::flow {

// One or more grid points left the parabolicity set and the policy is Abort.
class ConeViolationError : public std::runtime_error {
public:
    ConeViolationError(std::string msg, std::vector<std::int64_t> pts, double t)
        : std::runtime_error(std::move(msg)), points(std::move(pts)), when(t)
    {
    }
    std::vector<std::int64_t> points;
    double when = 0.0;
};

// The solution stopped being finite (blow-up or an unstable step).
class NonFiniteError : public std::runtime_error {
public:
    NonFiniteError(std::string msg, double t) : std::runtime_error(std::move(msg)), when(t) {}
    double when = 0.0;
};

// An iteration hit its step budget before reaching its target.
class NonConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Scheme { Euler, RK2 };

/// What to do with grid points outside the parabolicity set: stop honestly,
/// or keep going and count them. The spectrum is never clamped.
enum class ConePolicy { Abort, Flag };

struct StepControls {
    Scheme scheme = Scheme::RK2;
    ConePolicy policy = ConePolicy::Abort;
    double safety = 0.2;  // explicit stepping is stable for safety <= 0.5
    double dt_max = 1e-2;
    double cone_rel_tol = kConeRelTol;
    double source = 0.0;  // constant speed offset (translator relaxation uses -1)
    bool parallel = true;
};

/// Result of one kernel sweep over the grid.
struct KernelResult {
    std::vector<double> f;                 // Q_k * w per point; 0 on untouched slots
    std::vector<std::int64_t> violations;  // flat indices outside the parabolicity set
    double max_trace = 0.0;                // max over points of sum_i dQ_k/dlambda_i
    double max_abs_f = 0.0;
};

/// Speed field Q_k(A(Du, D^2u)) * sqrt(1+|Du|^2) on interior points from
/// second-order central differences. Dimension-specialized kernel,
/// OpenMP-parallel over grid points; identical results for any thread count.
/// For k = 0 the speed is linear in the curvatures and needs no cone; for
/// k >= 1 points outside the (k+1)-cone are reported as violations, and the
/// value is computed whenever the quotient itself is defined (S_k > 0).
KernelResult rhs(const GraphPatch& p, int k, double cone_rel_tol = kConeRelTol);

/// Same kernel without OpenMP.
KernelResult rhs_serial(const GraphPatch& p, int k, double cone_rel_tol = kConeRelTol);

/// Slow reference: per-point jets through shape::weingarten and the generic
/// symmetric-function evaluator. Kept for testing the kernel against an
/// independent code path.
std::vector<double> rhs_reference(const GraphPatch& p, int k,
                                  double cone_rel_tol = kConeRelTol);

/// Largest admissible explicit step: safety * h^2 / max(trace), capped at
/// dt_max. The trace bound is n for k = 0 and
/// (n-k) - (n-k+1) S_{k+1} S_{k-1} / S_k^2 otherwise.
double stable_dt(const GraphPatch& p, int k, double safety, double dt_max,
                 ConePolicy policy = ConePolicy::Abort, double cone_rel_tol = kConeRelTol);

struct FlowState {
    GraphPatch patch;
    int k = 0;
    double t = 0.0;
    double dt_last = 0.0;
    std::int64_t steps = 0;
    std::int64_t cone_violations = 0;
    double dt_min = std::numeric_limits<double>::infinity();
    double dt_max_seen = 0.0;
};

/// Advance one adaptive step (dt additionally capped by dt_cap so callers can
/// land exactly on a final time).
void step(FlowState& s, const StepControls& c,
          double dt_cap = std::numeric_limits<double>::infinity());

using SnapshotHook = std::function<void(const FlowState&, monitors::MonitorReport&)>;

struct EvolveResult {
    FlowState state;
    monitors::MonitorReport report;
};

/// Integrate to t_final, invoking every hook at t = 0, every record_every
/// steps, and at the final time.
EvolveResult evolve(FlowState s, const StepControls& c, double t_final, int record_every,
                    const std::vector<SnapshotHook>& hooks);

} // namespace qkf::flow
