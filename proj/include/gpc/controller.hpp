#pragma once

#include "gpc/cost.hpp"
#include "gpc/disturbance.hpp"
#include "gpc/lds.hpp"
#include "gpc/oco.hpp"
#include "gpc/policy.hpp"
#include "gpc/transfer.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gpc {

enum class Optimizer { ogd_m, ons_restricted };
enum class EtaRule {
    oco_memory,    ///< D_M / √(G_f(G_f + L·H²)·T)
    sqrt_horizon,  ///< eta_scale / (G·W·√T)
};

const char* to_string(Optimizer o);
Optimizer optimizer_from_string(const std::string& name);
const char* to_string(EtaRule r);
EtaRule eta_rule_from_string(const std::string& name);

struct GpcConfig {
    GpcConfig(LdsSystem sys, StabilizingController ctrl, CostPtr c, DisturbanceGenerator gen, TimeIndex horizon)
        : system(std::move(sys)), controller(std::move(ctrl)), cost(std::move(c)), disturbances(std::move(gen)),
          T(horizon) {}

    LdsSystem system;
    StabilizingController controller;
    CostPtr cost;
    DisturbanceGenerator disturbances;
    TimeIndex T = 2;
    std::optional<double> eta;
    std::optional<int> H;
    Optimizer optimizer = Optimizer::ogd_m;
    EtaRule eta_rule = EtaRule::oco_memory;
    double eta_scale = 1.0;
    double ons_delta = 1e-4;
    /// Abort once ‖x_t‖ exceeds abort_factor·D.
    double abort_factor = 10.0;
    /// Keep M_0 … M_T in the trace.
    bool keep_policies = false;
    /// Check (kappa, gamma) before running; depth of the decay check.
    bool verify_stability = true;
};

/// H, eta and the constants actually used by a run.
struct ResolvedGpc {
    int H = 1;
    double eta = 0.0;
    OcoConstants constants;
    std::vector<double> radii;
};

ResolvedGpc resolve_gpc(const GpcConfig& cfg);

struct StepRecord {
    TimeIndex t = 0;
    Vec x;
    Vec u;
    Vec w;                   ///< recovered from the observed transition
    double cost = 0.0;       ///< c_t(x_t, u_t)
    double ideal_cost = 0.0; ///< f_t on the played window M_{t−1−H} … M_t
    double diagonal_cost = 0.0;  ///< g_t(M_t)
    double movement = 0.0;   ///< ‖M_t − M_{t−1}‖_F
    double grad_norm = 0.0;  ///< ‖∇g_t(M_t)‖
    double state_gap = 0.0;  ///< ‖x_t − y_t‖
    double action_gap = 0.0; ///< ‖u_t − v_t‖
};

struct BoundViolations {
    std::size_t state = 0;       ///< ‖x_t‖ > D
    std::size_t state_gap = 0;   ///< ‖x_t − y_t‖ > kappa²(1−gamma)^{H+1}·D
    std::size_t action_gap = 0;  ///< ‖u_t − v_t‖ > kappa³(1−gamma)^{H+1}·D
    std::size_t total() const { return state + state_gap + action_gap; }
};

struct ExperimentTrace {
    std::vector<StepRecord> steps;
    std::optional<DisturbancePolicy> final_policy;
    std::vector<DisturbancePolicy> policies;  ///< M_0 … M_T when requested
    int H = 0;
    double eta = 0.0;
    OcoConstants constants;
    double total_cost = 0.0;
    double total_ideal_cost = 0.0;
    double total_diagonal_cost = 0.0;
    double max_state_norm = 0.0;
    BoundViolations violations;

    std::vector<Vec> disturbances() const;
};

/// Online GPC: play u_t = −K·x_t + Σ M_t^[i]·w_{t−i}, observe x_{t+1},
/// recover w_t, update M with the gradient of g_t. Throws StateBoundAbort
/// when ‖x‖ exceeds abort_factor·D and NumericalError on non-finite states.
ExperimentTrace run_gpc(const GpcConfig& cfg);

/// u_t = −K·x_t on the generator's stream. Ideal-cost fields are NaN.
ExperimentTrace run_linear_baseline(const LdsSystem& sys, const Mat& K, const DisturbanceGenerator& gen,
                                    const CostOracle& cost, TimeIndex T);

/// Same loop as run_gpc with M held fixed. `M` is played as given even if
/// it lies outside its radii.
ExperimentTrace run_fixed_policy(const LdsSystem& sys, const StabilizingController& ctrl, const DisturbancePolicy& M,
                                 const DisturbanceGenerator& gen, const CostOracle& cost, TimeIndex T);

/// Σ_{t ∈ [t_begin, t_end)} g_t(M) over a recorded stream, with its gradient.
class HindsightObjective {
public:
    HindsightObjective(const LdsSystem& sys, const StabilizingController& ctrl, CostPtr cost, int H,
                       const std::vector<Vec>& disturbances, TimeIndex t_begin = 0,
                       std::optional<TimeIndex> t_end = std::nullopt);

    int H() const { return cache_.H(); }
    std::size_t dimension() const { return static_cast<std::size_t>(n_); }
    double value(const Vec& m) const;
    Vec gradient(const Vec& m) const;
    /// Upper bound on the gradient's Lipschitz constant.
    double smoothness() const { return smoothness_; }
    bool quadratic() const { return quadratic_; }
    /// Direct summation of g_t(M), independent of the collapsed quadratic.
    double summed_value(const Vec& m) const;

private:
    TransferCache cache_;
    CostPtr cost_;
    TimeIndex t_begin_;
    TimeIndex t_end_;
    Eigen::Index n_ = 0;
    std::vector<IdealAffineMap> maps_;
    bool quadratic_ = false;
    Mat P_;
    Vec b_;
    double c_ = 0.0;
    double smoothness_ = 0.0;
};

struct HindsightOptions {
    int iterations = 2000;
    int restarts = 5;
    std::uint64_t seed = 0;
    TimeIndex t_begin = 0;
    std::optional<TimeIndex> t_end;
};

struct HindsightPolicy {
    DisturbancePolicy policy;
    double total = 0.0;                     ///< Σ g_t at the returned policy
    double residual = 0.0;                  ///< ‖gradient mapping‖ at the returned policy
    std::vector<double> restart_objectives; ///< one per restart, first from 0
    double restart_spread = 0.0;            ///< (max − min)/max(1, |min|)
};

/// Minimizes Σ_t g_t(M) over the radii by projected accelerated gradient
/// with step 1/smoothness, restarted from 0 and from projected random points.
HindsightPolicy best_policy_in_hindsight(const std::vector<Vec>& disturbances, CostPtr cost,
                                         const StabilizingController& ctrl, const LdsSystem& sys, int H,
                                         const std::vector<double>& radii, const HindsightOptions& opts = {});

struct HindsightLinear {
    Mat K;
    double total = 0.0;
    std::size_t index = 0;
    std::vector<double> costs;  ///< rollout cost per candidate (inf if it diverges)
};

/// Exact rollout cost of u = −K·x for each candidate; returns the minimizer.
HindsightLinear best_linear_in_hindsight(const std::vector<Vec>& disturbances, const CostOracle& cost,
                                         const LdsSystem& sys, const std::vector<Mat>& candidates);

/// Σ_t c_t(x_t, −K·x_t) from x_0 = 0 on a recorded stream.
double linear_rollout_cost(const std::vector<Vec>& disturbances, const CostOracle& cost, const LdsSystem& sys,
                           const Mat& K);

/// n evenly spaced scalar gains in [lo, hi].
std::vector<Mat> scalar_gain_grid(double lo, double hi, int n);

/// Prefix sums of the trace's cost minus the comparator's prefix sums.
std::vector<double> regret_series(const ExperimentTrace& trace, const ExperimentTrace& comparator);

/// Prefix sums of the trace's cost minus the comparator total spread evenly
/// over the horizon; the last entry is J_T − comparator_cost.
std::vector<double> regret_series(const ExperimentTrace& trace, double comparator_cost);

}  // namespace gpc
