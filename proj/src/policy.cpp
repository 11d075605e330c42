#include "gpc/policy.hpp"

#include "gpc/error.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace gpc {

namespace {
// Relative slack for norm comparisons that may hold with equality.
constexpr double kRelTol = 1e-9;
}  // namespace

StabilizingController::StabilizingController(Mat K_, double kappa_, double gamma_,
                                             std::optional<StabilityCertificate> cert)
    : K(std::move(K_)), kappa(kappa_), gamma(gamma_), certificate(std::move(cert)) {
    if (!(kappa >= 1.0)) throw std::invalid_argument("kappa must be >= 1");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
    if (K.size() == 0) throw DimensionError("K must be non-empty");
}

std::vector<double> policy_radii(double kappa_B, double kappa, double gamma, int H) {
    if (H < 1) throw std::invalid_argument("H must be >= 1");
    std::vector<double> r(static_cast<std::size_t>(H));
    const double scale = kappa_B * kappa * kappa * kappa;
    for (int i = 1; i <= H; ++i) r[static_cast<std::size_t>(i - 1)] = scale * std::pow(1.0 - gamma, i);
    return r;
}

DisturbancePolicy::DisturbancePolicy(std::vector<Mat> blocks, std::vector<double> radii)
    : blocks_(std::move(blocks)), radii_(std::move(radii)) {
    if (blocks_.empty()) throw std::invalid_argument("policy needs H >= 1 blocks");
    if (radii_.size() != blocks_.size()) throw DimensionError("one radius per block required");
    const auto r = blocks_.front().rows(), c = blocks_.front().cols();
    if (r < 1 || c < 1) throw DimensionError("policy blocks must be non-empty");
    for (const auto& b : blocks_) {
        if (b.rows() != r || b.cols() != c) throw DimensionError("policy blocks must share a shape");
    }
}

DisturbancePolicy DisturbancePolicy::zeros(int action_dim, int state_dim, std::vector<double> radii) {
    std::vector<Mat> blocks(radii.size(), Mat::Zero(action_dim, state_dim));
    return DisturbancePolicy(std::move(blocks), std::move(radii));
}

Vec DisturbancePolicy::flatten() const {
    const int du = action_dim(), dx = state_dim();
    Vec flat(param_count());
    Eigen::Index k = 0;
    for (const auto& b : blocks_)
        for (int p = 0; p < du; ++p)
            for (int q = 0; q < dx; ++q) flat(k++) = b(p, q);
    return flat;
}

DisturbancePolicy DisturbancePolicy::from_flat(const Vec& flat, int action_dim, int state_dim,
                                               std::vector<double> radii) {
    const auto H = static_cast<Eigen::Index>(radii.size());
    if (flat.size() != H * action_dim * state_dim) throw DimensionError("flat policy has wrong length");
    std::vector<Mat> blocks;
    blocks.reserve(radii.size());
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < H; ++i) {
        Mat b(action_dim, state_dim);
        for (int p = 0; p < action_dim; ++p)
            for (int q = 0; q < state_dim; ++q) b(p, q) = flat(k++);
        blocks.push_back(std::move(b));
    }
    return DisturbancePolicy(std::move(blocks), std::move(radii));
}

bool DisturbancePolicy::feasible(double tol) const {
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        if (spectral_norm_svd(blocks_[i]) > radii_[i] + tol) return false;
    }
    return true;
}

double DisturbancePolicy::distance(const DisturbancePolicy& other) const {
    if (other.blocks_.size() != blocks_.size()) throw DimensionError("policies have different H");
    double s = 0.0;
    for (std::size_t i = 0; i < blocks_.size(); ++i) s += (blocks_[i] - other.blocks_[i]).squaredNorm();
    return std::sqrt(s);
}

bool DisturbancePolicy::approx_equal(const DisturbancePolicy& other, double tol) const {
    if (other.blocks_.size() != blocks_.size()) return false;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        if (blocks_[i].rows() != other.blocks_[i].rows() || blocks_[i].cols() != other.blocks_[i].cols())
            return false;
        if ((blocks_[i] - other.blocks_[i]).cwiseAbs().maxCoeff() > tol) return false;
    }
    return true;
}

int horizon_for(double kappa_B, double kappa, double gamma, double T) {
    if (!(T >= 2.0)) throw std::invalid_argument("horizon_for needs T >= 2");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
    if (!(kappa >= 1.0) || !(kappa_B > 0.0)) throw std::invalid_argument("need kappa >= 1 and kappa_B > 0");
    const double raw = 2.0 * kappa_B * kappa * kappa * kappa * std::log(T) / gamma;
    // ln(e) and friends can land one ulp above an integer; don't round that up.
    const double h = std::ceil(raw * (1.0 - 1e-12));
    return static_cast<int>(std::clamp(h, 1.0, std::floor(T)));
}

Vec policy_action(const StabilizingController& ctrl, const DisturbancePolicy& M, const Vec& x,
                  const DisturbanceBuffer& buf, TimeIndex t) {
    if (x.size() != ctrl.K.cols() || M.state_dim() != ctrl.K.cols() || M.action_dim() != ctrl.K.rows())
        throw DimensionError("policy_action: controller, policy and state disagree");
    Vec u = -(ctrl.K * x);
    for (int i = 1; i <= M.H(); ++i) u.noalias() += M.block(i) * buf.lookup(t - i);
    return u;
}

Mat project_spectral_ball(const Mat& block, double radius) {
    if (!(radius >= 0.0)) throw std::invalid_argument("projection radius must be non-negative");
    Eigen::JacobiSVD<Mat> svd(block, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& s = svd.singularValues();
    if (!s.allFinite() || !svd.matrixU().allFinite() || !svd.matrixV().allFinite())
        throw NumericalError("SVD failed while projecting a policy block");
    if (s.size() == 0 || s(0) <= radius) return block;
    const Vec clipped = s.cwiseMin(radius);
    return svd.matrixU() * clipped.asDiagonal() * svd.matrixV().transpose();
}

DisturbancePolicy project_policy(const DisturbancePolicy& M) {
    std::vector<Mat> blocks;
    blocks.reserve(static_cast<std::size_t>(M.H()));
    for (int i = 1; i <= M.H(); ++i) {
        const double r = M.radii()[static_cast<std::size_t>(i - 1)];
        if (!(r > 0.0)) throw std::invalid_argument("policy radii must be positive");
        blocks.push_back(project_spectral_ball(M.block(i), r));
    }
    return DisturbancePolicy(std::move(blocks), M.radii());
}

StabilityReport verify_strong_stability(const LdsSystem& sys, const StabilizingController& ctrl, int depth) {
    if (depth < 1) throw std::invalid_argument("stability depth must be >= 1");
    if (ctrl.K.rows() != sys.action_dim() || ctrl.K.cols() != sys.state_dim())
        throw DimensionError("K must be d_u x d_x");

    StabilityReport rep;
    const Mat closed = sys.A() - sys.B() * ctrl.K;
    const double k2 = ctrl.kappa * ctrl.kappa;
    std::ostringstream why;

    const double nK = spectral_norm(ctrl.K);
    bool ok = nK <= ctrl.kappa * (1 + kRelTol);
    if (!ok) why << "‖K‖=" << nK << " > kappa; ";

    if (ctrl.certificate) {
        rep.used_certificate = true;
        const auto& c = *ctrl.certificate;
        if (c.Hm.rows() != closed.rows() || c.Hm.cols() != closed.cols() || c.L.rows() != closed.rows() ||
            c.L.cols() != closed.cols())
            throw DimensionError("certificate matrices must be d_x x d_x");
        Eigen::FullPivLU<Mat> lu(c.Hm);
        if (!lu.isInvertible()) {
            rep.passed = false;
            rep.detail = "certificate rejected: Hm is singular";
            return rep;
        }
        const Mat Hinv = lu.inverse();
        rep.reconstruction_residual = (c.Hm * c.L * Hinv - closed).cwiseAbs().maxCoeff();
        const double nL = spectral_norm(c.L), nH = spectral_norm(c.Hm), nHi = spectral_norm(Hinv);
        if (nL > (1.0 - ctrl.gamma) * (1 + kRelTol) + 1e-15) { ok = false; why << "‖L‖=" << nL << " > 1-gamma; "; }
        if (nH > ctrl.kappa * (1 + kRelTol)) { ok = false; why << "‖Hm‖=" << nH << " > kappa; "; }
        if (nHi > ctrl.kappa * (1 + kRelTol)) { ok = false; why << "‖Hm^-1‖=" << nHi << " > kappa; "; }
        if (rep.reconstruction_residual > 1e-8) {
            ok = false;
            why << "A-BK != Hm L Hm^-1 (residual " << rep.reconstruction_residual << "); ";
        }
        rep.worst_ratio = std::max({nL / (1.0 - ctrl.gamma + 1e-300), nH / ctrl.kappa, nHi / ctrl.kappa});
    } else {
        Mat power = Mat::Identity(closed.rows(), closed.cols());
        for (int i = 0; i <= depth; ++i) {
            if (i > 0) power = power * closed;
            const double bound = k2 * std::pow(1.0 - ctrl.gamma, i);
            const double n = spectral_norm(power);
            const double ratio = bound > 0 ? n / bound : (n > 0 ? INFINITY : 0.0);
            rep.worst_ratio = std::max(rep.worst_ratio, ratio);
            if (n > bound * (1 + kRelTol) + 1e-300 && !rep.first_violation) {
                rep.first_violation = i;
                ok = false;
                why << "‖(A-BK)^" << i << "‖=" << n << " > kappa^2(1-gamma)^" << i << "=" << bound << "; ";
            }
        }
    }
    rep.passed = ok;
    rep.detail = ok ? "ok" : why.str();
    return rep;
}

DisturbancePolicy sufficiency_policy(const StabilizingController& base, const StabilizingController& comparator,
                                     const LdsSystem& sys, int H) {
    if (base.K.rows() != sys.action_dim() || base.K.cols() != sys.state_dim() ||
        comparator.K.rows() != base.K.rows() || comparator.K.cols() != base.K.cols())
        throw DimensionError("controllers must be d_u x d_x");
    const Mat closed_star = sys.A() - sys.B() * comparator.K;
    const Mat diff = base.K - comparator.K;
    std::vector<Mat> blocks;
    blocks.reserve(static_cast<std::size_t>(H));
    Mat power = Mat::Identity(sys.state_dim(), sys.state_dim());
    for (int i = 1; i <= H; ++i) {
        blocks.push_back(diff * power);
        power = power * closed_star;
    }
    return DisturbancePolicy(std::move(blocks), policy_radii(sys.kappa_B(), base.kappa, base.gamma, H));
}

std::string policy_to_json(const DisturbancePolicy& M) {
    nlohmann::json j;
    j["H"] = M.H();
    auto blocks = nlohmann::json::array();
    for (const auto& b : M.blocks()) {
        auto rows = nlohmann::json::array();
        for (int p = 0; p < b.rows(); ++p) {
            auto row = nlohmann::json::array();
            for (int q = 0; q < b.cols(); ++q) row.push_back(b(p, q));
            rows.push_back(std::move(row));
        }
        blocks.push_back(std::move(rows));
    }
    j["blocks"] = std::move(blocks);
    j["radii"] = M.radii();
    return j.dump();
}

DisturbancePolicy policy_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    const int H = j.at("H").get<int>();
    const auto& jb = j.at("blocks");
    auto radii = j.at("radii").get<std::vector<double>>();
    if (static_cast<int>(jb.size()) != H || static_cast<int>(radii.size()) != H)
        throw std::invalid_argument("policy JSON: H disagrees with blocks/radii length");
    std::vector<Mat> blocks;
    for (const auto& rows : jb) {
        const auto nr = static_cast<Eigen::Index>(rows.size());
        const auto nc = nr ? static_cast<Eigen::Index>(rows.at(0).size()) : 0;
        Mat b(nr, nc);
        for (Eigen::Index p = 0; p < nr; ++p) {
            if (static_cast<Eigen::Index>(rows.at(p).size()) != nc)
                throw DimensionError("policy JSON: ragged block");
            for (Eigen::Index q = 0; q < nc; ++q) b(p, q) = rows.at(p).at(q).get<double>();
        }
        blocks.push_back(std::move(b));
    }
    return DisturbancePolicy(std::move(blocks), std::move(radii));
}

}  // namespace gpc
