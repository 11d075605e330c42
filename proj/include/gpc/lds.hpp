#pragma once

#include "gpc/linalg.hpp"

namespace gpc {

/// Linear plant x_{t+1} = A x_t + B u_t + w_t with its norm bounds.
///
/// The bounds are validated on construction: ‖A‖ ≤ kappa_A, ‖B‖ ≤ kappa_B
/// (spectral norm), W > 0. Pass a negative kappa to have it computed.
class LdsSystem {
public:
    LdsSystem(Mat A, Mat B, double kappa_A, double kappa_B, double W);

    /// Bounds taken as the measured spectral norms.
    static LdsSystem with_measured_bounds(Mat A, Mat B, double W);

    const Mat& A() const { return A_; }
    const Mat& B() const { return B_; }
    double kappa_A() const { return kappa_A_; }
    double kappa_B() const { return kappa_B_; }
    double W() const { return W_; }
    int state_dim() const { return static_cast<int>(A_.rows()); }
    int action_dim() const { return static_cast<int>(B_.cols()); }

private:
    Mat A_;
    Mat B_;
    double kappa_A_;
    double kappa_B_;
    double W_;
};

/// A x + B u + w.
Vec step_dynamics(const LdsSystem& sys, const Vec& x, const Vec& u, const Vec& w);

/// x_next − A x − B u: the disturbance that explains an observed transition.
Vec recover_disturbance(const LdsSystem& sys, const Vec& x_next, const Vec& x, const Vec& u);

}  // namespace gpc
