#pragma once

// Brute-force reference computations used to check the fast paths. Nothing
// here calls the transfer-matrix or analytic-gradient code.

#include "gpc/cost.hpp"
#include "gpc/linalg.hpp"

#include <functional>
#include <vector>

namespace gpc::oracle {

/// M_s as a list of blocks M_s^[1..H]; returns empty for "all zero".
using PolicyAt = std::function<std::vector<Mat>(TimeIndex s)>;

struct Rollout {
    std::vector<Vec> x;  ///< x_0 … x_T
    std::vector<Vec> u;  ///< u_0 … u_{T−1}
};

/// Simulates x_{t+1} = A x + B u + w with u_t = −K x_t + Σ_i M_t^[i] w_{t−i}
/// from x_0 = 0, by explicit loops.
Rollout rollout(const Mat& A, const Mat& B, const Mat& K, const PolicyAt& policy, const std::vector<Vec>& w,
                TimeIndex T);

/// y_t: restart from zero at time t−1−H and replay H + 1 steps with the
/// true policies and disturbances.
Vec ideal_state(const Mat& A, const Mat& B, const Mat& K, const PolicyAt& policy, const std::vector<Vec>& w,
                TimeIndex t, int H);

/// v_t = −K y_t + Σ_i M_t^[i] w_{t−i}.
Vec ideal_action(const Mat& K, const PolicyAt& policy, const std::vector<Vec>& w, const Vec& y, TimeIndex t);

/// Σ_{t∈[t0,t1)} c_t(y_t, v_t) with M fixed, by replaying each window.
double diagonal_objective(const Mat& A, const Mat& B, const Mat& K, const std::vector<Mat>& M,
                          const std::vector<Vec>& w, const CostOracle& cost, TimeIndex t0, TimeIndex t1);

/// Central differences with step h in every coordinate.
Vec central_difference(const std::function<double(const Vec&)>& f, const Vec& x, double h);

struct GridMin {
    double argmin = 0.0;
    double value = 0.0;
    double resolution = 0.0;
};

/// Evaluates f on n evenly spaced points of [lo, hi].
GridMin grid_scan(const std::function<double(double)>& f, double lo, double hi, int n);

/// Long-run per-step cost q·x² + r·(kx)² of u = −kx for
/// x_{t+1} = a x + b u + w with constant w and |a − bk| < 1.
double steady_state_scalar_cost(double a, double b, double k, double w, double q, double r);

/// M^k by k − 1 plain multiplications.
Mat matrix_power_naive(const Mat& M, int k);

}  // namespace gpc::oracle
