#pragma once

#include "gpc/linalg.hpp"

#include <memory>
#include <optional>

namespace gpc {

/// Time-invariant quadratic cost xᵀQx + uᵀRu + qᵀx + rᵀu + c0.
/// Exposed so offline solvers can collapse a long horizon into one quadratic.
struct QuadraticForm {
    Mat Q;
    Mat R;
    Vec q;
    Vec r;
    double c0 = 0.0;
};

/// Convex per-step cost c_t(x, u).
///
/// Besides values and gradients an oracle advertises the constants used by
/// the regret analysis: whenever ‖x‖, ‖u‖ ≤ D it must hold that
/// |c_t| ≤ value_bound()·D² and ‖∇_x c_t‖, ‖∇_u c_t‖ ≤ gradient_bound()·D.
/// `smoothness()` bounds the joint Hessian's spectral norm.
class CostOracle {
public:
    virtual ~CostOracle() = default;

    virtual int state_dim() const = 0;
    virtual int action_dim() const = 0;

    virtual double value(TimeIndex t, const Vec& x, const Vec& u) const = 0;
    virtual Vec grad_x(TimeIndex t, const Vec& x, const Vec& u) const = 0;
    virtual Vec grad_u(TimeIndex t, const Vec& x, const Vec& u) const = 0;
    /// Joint Hessian over (x, u), size (d_x + d_u)².
    virtual Mat hessian(TimeIndex t, const Vec& x, const Vec& u) const = 0;

    virtual double gradient_bound() const = 0;  ///< G
    virtual double value_bound() const = 0;     ///< beta
    virtual double smoothness() const = 0;

    virtual std::optional<QuadraticForm> quadratic_form() const { return std::nullopt; }
};

using CostPtr = std::shared_ptr<const CostOracle>;

/// c(x,u) = xᵀQx + uᵀRu. Q and R must be symmetric PSD.
/// G = 2·max(‖Q‖, ‖R‖), beta = ‖Q‖ + ‖R‖.
CostPtr make_quadratic_cost(const Mat& Q, const Mat& R);

/// One-dimensional square loss (δx − 1)² with δ = 1/√T; ignores u.
/// The stated bounds assume D ≥ 1 (the scenario lives on x ∈ [−1, 1]).
CostPtr make_counterexample_cost(TimeIndex T, int action_dim = 1);

}  // namespace gpc
