#pragma once

#include "gpc/cost.hpp"
#include "gpc/disturbance.hpp"
#include "gpc/lds.hpp"
#include "gpc/policy.hpp"

#include <functional>
#include <vector>

namespace gpc {

/// Powers of the closed loop Ã = A − BK and the products Ã^j·B, computed
/// once per (system, controller, H). Read-only after construction.
class TransferCache {
public:
    TransferCache(const LdsSystem& sys, const StabilizingController& ctrl, int H);

    int H() const { return H_; }
    int state_dim() const { return static_cast<int>(K_.cols()); }
    int action_dim() const { return static_cast<int>(K_.rows()); }
    const Mat& K() const { return K_; }
    const Mat& closed_loop() const { return powers_[1]; }

    /// Ã^k, 0 ≤ k ≤ 2H + 1.
    const Mat& closed_power(int k) const { return powers_.at(static_cast<std::size_t>(k)); }
    /// Ã^j·B, 0 ≤ j ≤ H.
    const Mat& closed_power_B(int j) const { return powers_B_.at(static_cast<std::size_t>(j)); }

private:
    int H_;
    Mat K_;
    std::vector<Mat> powers_;
    std::vector<Mat> powers_B_;
};

using PolicyRef = std::reference_wrapper<const DisturbancePolicy>;

/// Ψ_{s,i} = Ã^i·1{i ≤ H} + Σ_{j=0}^{H} Ã^j·B·M_{s−j}^[i−j]·1{i−j ∈ [1, H]}.
///
/// `window` lists M_{s−H}, …, M_s oldest first (H + 1 entries). Ψ_{s,i} maps
/// w_{s−i} to x_{s+1} in the truncated evolution
///   x_{s+1} = Ã^{H+1}·x_{s−H} + Σ_{i=0}^{2H} Ψ_{s,i}·w_{s−i}.
/// Throws std::out_of_range unless 0 ≤ i ≤ 2H.
Mat transfer_matrix(const TransferCache& cache, const std::vector<PolicyRef>& window, int i);

/// Untruncated transfer from w_{s−i} to x_{s+1} over the whole history
/// M_0 … M_s (`history[k]` is M_k):
///   Ã^i + Σ_{j=0}^{min(s, i−1)} Ã^j·B·M_{s−j}^[i−j]·1{i−j ≤ H},  0 ≤ i ≤ s,
/// so that x_{s+1} = Σ_{i=0}^{s} (this)·w_{s−i} from x_0 = 0.
Mat history_transfer_matrix(const TransferCache& cache, const std::vector<PolicyRef>& history, TimeIndex s, int i);

/// Policies and disturbances needed to evaluate the ideal cost f_t.
///
/// `policies` holds M_{t−1−H}, …, M_t oldest first (H + 2 entries): the
/// ideal state y_t uses the first H + 1 and the ideal action v_t the last.
/// `disturbances` must contain w_{t−1−2H}, …, w_{t−1}; earlier times read 0.
struct IdealWindow {
    TimeIndex t = 0;
    std::vector<PolicyRef> policies;
    std::reference_wrapper<const DisturbanceBuffer> disturbances;
};

/// y_t = Σ_{i=0}^{2H} Ψ_{t−1,i}·w_{t−1−i}: the state reached at t from a zero
/// state at t−1−H under the window's policies.
Vec ideal_state(const TransferCache& cache, const IdealWindow& window);

/// v_t = −K·y_t + Σ_{i=1}^{H} M_t^[i]·w_{t−i}.
Vec ideal_action(const StabilizingController& ctrl, const DisturbancePolicy& current, const Vec& y,
                 const DisturbanceBuffer& buf, TimeIndex t);

struct IdealPoint {
    Vec y;
    Vec v;
    double cost = 0.0;
};

/// f_t = c_t(y_t, v_t) for the window's (possibly time-varying) policies.
IdealPoint ideal_cost(const CostOracle& cost, const TransferCache& cache, const IdealWindow& window);

/// Affine dependence of (y_t, v_t) on a policy M held at every window slot:
///   y = y0 + Jy·m,  v = v0 + Jv·m,  m = M.flatten().
struct IdealAffineMap {
    Vec y0;
    Vec v0;
    Mat Jy;  ///< d_x × (H·d_u·d_x)
    Mat Jv;  ///< d_u × (H·d_u·d_x)

    Vec state(const Vec& m) const { return y0 + Jy * m; }
    Vec action(const Vec& m) const { return v0 + Jv * m; }
};

IdealAffineMap ideal_affine_map(const TransferCache& cache, const DisturbanceBuffer& buf, TimeIndex t);

/// Value and exact gradient of g_t(M) = f_t(M, …, M).
struct PolicyGradient {
    double value = 0.0;
    Vec flat;  ///< in DisturbancePolicy::flatten() order
    Vec y;
    Vec v;
};

/// ∇g_t(M) = Jᵀ·[∇_x c_t(y, v); ∇_u c_t(y, v)] with J from ideal_affine_map.
PolicyGradient grad_ideal_cost_diagonal(const CostOracle& cost, const TransferCache& cache,
                                        const DisturbancePolicy& M, const DisturbanceBuffer& buf, TimeIndex t);

/// Same, reusing a precomputed map.
PolicyGradient grad_from_map(const CostOracle& cost, const IdealAffineMap& map, const Vec& m, TimeIndex t);

/// Hessian of g_t in flattened coordinates: Jᵀ·∇²c_t·J.
Mat hessian_from_map(const CostOracle& cost, const IdealAffineMap& map, const Vec& m, TimeIndex t);

}  // namespace gpc
