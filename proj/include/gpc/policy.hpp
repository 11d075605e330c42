#pragma once

#include "gpc/disturbance.hpp"
#include "gpc/lds.hpp"
#include "gpc/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gpc {

/// Similarity certificate A − BK = Hm·L·Hm⁻¹ backing a strong-stability claim.
struct StabilityCertificate {
    Mat Hm;
    Mat L;
};

/// Fixed linear feedback K with a claimed (kappa, gamma)-strong-stability
/// certificate. The claim is not trusted until verify_strong_stability
/// confirms it for a particular system.
struct StabilizingController {
    Mat K;               ///< d_u × d_x
    double kappa = 1.0;  ///< ≥ 1
    double gamma = 0.5;  ///< in (0, 1]
    std::optional<StabilityCertificate> certificate;

    StabilizingController() = default;
    StabilizingController(Mat K_, double kappa_, double gamma_,
                          std::optional<StabilityCertificate> cert = std::nullopt);
};

/// Spectral radii r_i = kappa_B·kappa³·(1 − gamma)^i, i = 1..H.
std::vector<double> policy_radii(double kappa_B, double kappa, double gamma, int H);

/// Disturbance-action parameters M = (M^[1], …, M^[H]), each d_u × d_x,
/// together with the radii that define the feasible set.
///
/// Flattened order (used by gradients and learners): block-major, then
/// row-major inside each block.
class DisturbancePolicy {
public:
    DisturbancePolicy(std::vector<Mat> blocks, std::vector<double> radii);

    static DisturbancePolicy zeros(int action_dim, int state_dim, std::vector<double> radii);

    int H() const { return static_cast<int>(blocks_.size()); }
    int action_dim() const { return static_cast<int>(blocks_.front().rows()); }
    int state_dim() const { return static_cast<int>(blocks_.front().cols()); }
    int param_count() const { return H() * action_dim() * state_dim(); }

    /// M^[lag] for lag in 1..H.
    const Mat& block(int lag) const { return blocks_.at(static_cast<std::size_t>(lag - 1)); }
    const std::vector<Mat>& blocks() const { return blocks_; }
    const std::vector<double>& radii() const { return radii_; }

    Vec flatten() const;
    static DisturbancePolicy from_flat(const Vec& flat, int action_dim, int state_dim, std::vector<double> radii);

    /// Every block within its radius (spectral norm, via SVD) up to `tol`.
    bool feasible(double tol = 1e-9) const;

    /// Frobenius distance over all blocks.
    double distance(const DisturbancePolicy& other) const;

    bool approx_equal(const DisturbancePolicy& other, double tol = 1e-12) const;

private:
    std::vector<Mat> blocks_;
    std::vector<double> radii_;
};

/// H = ceil(2·kappa_B·kappa³·ln(T)/gamma), clamped to [1, T].
int horizon_for(double kappa_B, double kappa, double gamma, double T);

/// −K·x_t + Σ_{i=1}^{H} M^[i]·w_{t−i}; `buf` must hold w_{t−H}…w_{t−1}.
Vec policy_action(const StabilizingController& ctrl, const DisturbancePolicy& M, const Vec& x,
                  const DisturbanceBuffer& buf, TimeIndex t);

/// Euclidean (Frobenius) projection onto {‖M^[i]‖ ≤ r_i}. The set is a
/// product of spectral-norm balls, so each block is projected on its own by
/// clipping its singular values. Feasible blocks are returned untouched.
DisturbancePolicy project_policy(const DisturbancePolicy& M);

/// Nearest matrix with spectral norm ≤ radius.
Mat project_spectral_ball(const Mat& block, double radius);

struct StabilityReport {
    bool passed = false;
    bool used_certificate = false;
    /// First power i with ‖(A − BK)^i‖ > kappa²(1 − gamma)^i (decay mode).
    std::optional<int> first_violation;
    /// max_i ‖(A − BK)^i‖ / (kappa²(1 − gamma)^i) over the checked range.
    double worst_ratio = 0.0;
    double reconstruction_residual = 0.0;
    std::string detail;
};

/// Checks the (kappa, gamma) claim. With a certificate: Hm invertible,
/// ‖L‖ ≤ 1 − gamma, ‖Hm‖, ‖Hm⁻¹‖, ‖K‖ ≤ kappa, and A − BK = Hm·L·Hm⁻¹ to
/// 1e−8. Without one: ‖K‖ ≤ kappa and ‖(A − BK)^i‖ ≤ kappa²(1 − gamma)^i
/// for i = 0..depth.
StabilityReport verify_strong_stability(const LdsSystem& sys, const StabilizingController& ctrl, int depth);

/// Comparator-mimicking policy M_*^[i] = (K − K*)(A − BK*)^{i−1}.
///
/// Played on top of K it reproduces the closed loop of K* on the last H
/// disturbances: Ψ_{t,i}(M_*) = (A − BK*)^i for i ≤ H. Radii come from the
/// base controller; the result is not projected, so it may sit outside them.
DisturbancePolicy sufficiency_policy(const StabilizingController& base, const StabilizingController& comparator,
                                     const LdsSystem& sys, int H);

/// {"H": int, "blocks": [[[row]...]...], "radii": [...]}; each block is a
/// list of rows.
std::string policy_to_json(const DisturbancePolicy& M);
DisturbancePolicy policy_from_json(const std::string& text);

}  // namespace gpc
