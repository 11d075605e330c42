#pragma once

// Property checks shared by the `verify`/`oracle` commands and the tests.
// Each check compares a fast path against the brute-force routines in
// oracle.hpp.

#include "gpc/controller.hpp"
#include "gpc/spec.hpp"

#include <string>
#include <vector>

namespace gpc::checks {

/// A strongly stable instance with certificate H = I, L = A − BK.
struct Instance {
    LdsSystem system;
    StabilizingController controller;
};

/// d_x × d_u instance whose closed loop has spectral norm in [0.2, 0.8].
/// kappa = 1 and gamma = 1 − ‖A − BK‖.
Instance random_instance(Rng& rng, int dx, int du);

/// A second gain K* for the same plant with ‖A − BK*‖ < 1.
StabilizingController random_comparator(Rng& rng, const Instance& inst);

/// Random policy with every block strictly inside its radius.
DisturbancePolicy random_feasible_policy(Rng& rng, int du, int dx, const std::vector<double>& radii);

/// Unrestricted random policy (entries scaled by `scale`), then projected
/// or not.
DisturbancePolicy random_policy(Rng& rng, int du, int dx, const std::vector<double>& radii, double scale);

std::vector<Vec> random_disturbances(Rng& rng, int dim, TimeIndex T, double W);

/// max_t ‖recover(step(x, u, w)) − w‖ over `trials` random transitions.
double round_trip_error(Rng& rng, const LdsSystem& sys, int trials);

/// max_i entrywise |Ψ_i(M_*) − (A − BK*)^i| for i = 0..H.
double sufficiency_identity_error(const LdsSystem& sys, const StabilizingController& base,
                                  const StabilizingController& comparator, int H);

struct EvolutionErrors {
    double full = 0.0;       ///< brute x_{t+1} vs Σ history transfers
    double truncated = 0.0;  ///< brute x_{t+1} vs Ã^{H+1}x_{t−H} + Σ Ψ_{t,i}w_{t−i}
    double ideal = 0.0;      ///< transfer-based y_t vs replayed y_t
};

/// Compares the transfer identities with brute rollouts for t ≤ t_max under
/// the given time-varying policies (policies[s] = M_s).
EvolutionErrors evolution_errors(const LdsSystem& sys, const StabilizingController& ctrl,
                                 const std::vector<DisturbancePolicy>& policies, const std::vector<Vec>& w,
                                 TimeIndex t_max);

/// ‖∇_analytic − ∇_fd‖ / max(‖∇_analytic‖, 1e-12) for g_t at M.
double gradient_relative_error(const LdsSystem& sys, const StabilizingController& ctrl, const CostOracle& cost,
                               const DisturbancePolicy& M, const std::vector<Vec>& w, TimeIndex t, double h = 1e-6);

/// Smooth convex non-quadratic cost Σ log cosh(x_i) + Σ log cosh(u_j) +
/// ½‖x‖² + ½‖u‖²; exercises gradient code paths without a quadratic form.
CostPtr make_log_cosh_cost(int dx, int du);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Property checks on the spec's instance (first horizon, capped at 2000).
std::vector<CheckResult> verify_spec(const ExperimentSpec& spec);

/// JSON with derived reference values for the spec's instance.
std::string oracle_report(const ExperimentSpec& spec);

}  // namespace gpc::checks
