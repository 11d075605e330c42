#include "gpc/lds.hpp"

#include "gpc/error.hpp"

#include <cmath>
#include <string>

namespace gpc {

namespace {

// Bound checks use power iteration; allow its relative tolerance.
constexpr double kNormSlack = 1e-9;

void check_vec(const Vec& v, Eigen::Index n, const char* what) {
    if (v.size() != n)
        throw DimensionError(std::string(what) + " has dimension " + std::to_string(v.size()) + ", expected " +
                             std::to_string(n));
}

}  // namespace

LdsSystem::LdsSystem(Mat A, Mat B, double kappa_A, double kappa_B, double W)
    : A_(std::move(A)), B_(std::move(B)), kappa_A_(kappa_A), kappa_B_(kappa_B), W_(W) {
    if (A_.rows() < 1 || A_.rows() != A_.cols()) throw DimensionError("A must be square with d_x >= 1");
    if (B_.rows() != A_.rows() || B_.cols() < 1) throw DimensionError("B must be d_x x d_u with d_u >= 1");
    if (!A_.allFinite() || !B_.allFinite()) throw std::invalid_argument("A and B must be finite");
    if (!(W_ > 0.0) || !std::isfinite(W_)) throw std::invalid_argument("disturbance bound W must be positive");

    const double nA = spectral_norm(A_);
    const double nB = spectral_norm(B_);
    if (kappa_A_ < 0) kappa_A_ = nA;
    if (kappa_B_ < 0) kappa_B_ = nB;
    if (nA > kappa_A_ * (1 + kNormSlack))
        throw std::invalid_argument("spectral norm of A (" + std::to_string(nA) + ") exceeds kappa_A (" +
                                    std::to_string(kappa_A_) + ")");
    if (nB > kappa_B_ * (1 + kNormSlack))
        throw std::invalid_argument("spectral norm of B (" + std::to_string(nB) + ") exceeds kappa_B (" +
                                    std::to_string(kappa_B_) + ")");
}

LdsSystem LdsSystem::with_measured_bounds(Mat A, Mat B, double W) {
    return LdsSystem(std::move(A), std::move(B), -1.0, -1.0, W);
}

Vec step_dynamics(const LdsSystem& sys, const Vec& x, const Vec& u, const Vec& w) {
    check_vec(x, sys.state_dim(), "state");
    check_vec(u, sys.action_dim(), "action");
    check_vec(w, sys.state_dim(), "disturbance");
    Vec ax = sys.A() * x;
    Vec bu = sys.B() * u;
    return ax + bu + w;
}

Vec recover_disturbance(const LdsSystem& sys, const Vec& x_next, const Vec& x, const Vec& u) {
    check_vec(x_next, sys.state_dim(), "next state");
    check_vec(x, sys.state_dim(), "state");
    check_vec(u, sys.action_dim(), "action");
    Vec ax = sys.A() * x;
    Vec bu = sys.B() * u;
    return x_next - ax - bu;
}

}  // namespace gpc
