#include "gpc/transfer.hpp"

#include "gpc/error.hpp"

#include <stdexcept>
#include <string>

namespace gpc {

TransferCache::TransferCache(const LdsSystem& sys, const StabilizingController& ctrl, int H) : H_(H), K_(ctrl.K) {
    if (H < 1) throw std::invalid_argument("H must be >= 1");
    if (K_.rows() != sys.action_dim() || K_.cols() != sys.state_dim()) throw DimensionError("K must be d_u x d_x");
    const Mat closed = sys.A() - sys.B() * K_;
    powers_.reserve(static_cast<std::size_t>(2 * H + 2));
    powers_.push_back(Mat::Identity(sys.state_dim(), sys.state_dim()));
    for (int k = 1; k <= 2 * H + 1; ++k) powers_.push_back(powers_.back() * closed);
    powers_B_.reserve(static_cast<std::size_t>(H + 1));
    for (int j = 0; j <= H; ++j) powers_B_.push_back(powers_[static_cast<std::size_t>(j)] * sys.B());
}

namespace {

void check_window(const TransferCache& cache, const std::vector<PolicyRef>& window, std::size_t expected) {
    if (window.size() != expected)
        throw std::invalid_argument("policy window has " + std::to_string(window.size()) + " entries, expected " +
                                    std::to_string(expected));
    for (const auto& M : window) {
        if (M.get().H() != cache.H() || M.get().action_dim() != cache.action_dim() ||
            M.get().state_dim() != cache.state_dim())
            throw DimensionError("policy in window does not match the transfer cache");
    }
}

}  // namespace

Mat transfer_matrix(const TransferCache& cache, const std::vector<PolicyRef>& window, int i) {
    const int H = cache.H();
    if (i < 0 || i > 2 * H) throw std::out_of_range("transfer lag " + std::to_string(i) + " outside [0, 2H]");
    check_window(cache, window, static_cast<std::size_t>(H + 1));
    Mat psi = i <= H ? cache.closed_power(i) : Mat::Zero(cache.state_dim(), cache.state_dim());
    for (int j = 0; j <= H; ++j) {
        const int lag = i - j;
        if (lag < 1 || lag > H) continue;
        // window[H − j] is M_{s−j}
        const DisturbancePolicy& M = window[static_cast<std::size_t>(H - j)];
        psi.noalias() += cache.closed_power_B(j) * M.block(lag);
    }
    return psi;
}

Mat history_transfer_matrix(const TransferCache& cache, const std::vector<PolicyRef>& history, TimeIndex s, int i) {
    const int H = cache.H();
    if (s < 0 || static_cast<TimeIndex>(history.size()) <= s)
        throw std::out_of_range("history must contain M_0 … M_s");
    if (i < 0 || i > s) throw std::out_of_range("history transfer lag must lie in [0, s]");
    const Mat& closed = cache.closed_loop();
    Mat power = Mat::Identity(cache.state_dim(), cache.state_dim());  // Ã^j
    Mat psi = Mat::Zero(cache.state_dim(), cache.state_dim());
    for (int j = 0; j <= i; ++j) {
        if (j == i) {
            psi += power;
            break;
        }
        const int lag = i - j;
        if (lag <= H) {
            const DisturbancePolicy& M = history[static_cast<std::size_t>(s - j)];
            psi.noalias() += power * (cache.closed_power_B(0) * M.block(lag));
        }
        power = power * closed;
    }
    return psi;
}

Vec ideal_state(const TransferCache& cache, const IdealWindow& window) {
    const int H = cache.H();
    check_window(cache, window.policies, static_cast<std::size_t>(H + 2));
    // Ψ_{t−1,·} uses M_{t−1−H} … M_{t−1}: all but the newest entry.
    const std::vector<PolicyRef> psi_window(window.policies.begin(), window.policies.end() - 1);
    const DisturbanceBuffer& buf = window.disturbances;
    Vec y = Vec::Zero(cache.state_dim());
    for (int i = 0; i <= 2 * H; ++i) {
        const Vec& w = buf.lookup(window.t - 1 - i);
        if (w.isZero(0.0)) continue;
        y.noalias() += transfer_matrix(cache, psi_window, i) * w;
    }
    return y;
}

Vec ideal_action(const StabilizingController& ctrl, const DisturbancePolicy& current, const Vec& y,
                 const DisturbanceBuffer& buf, TimeIndex t) {
    return policy_action(ctrl, current, y, buf, t);
}

IdealPoint ideal_cost(const CostOracle& cost, const TransferCache& cache, const IdealWindow& window) {
    IdealPoint p;
    p.y = ideal_state(cache, window);
    const DisturbancePolicy& current = window.policies.back();
    p.v = -(cache.K() * p.y);
    for (int i = 1; i <= current.H(); ++i) p.v.noalias() += current.block(i) * window.disturbances.get().lookup(window.t - i);
    p.cost = cost.value(window.t, p.y, p.v);
    return p;
}

IdealAffineMap ideal_affine_map(const TransferCache& cache, const DisturbanceBuffer& buf, TimeIndex t) {
    const int H = cache.H();
    const int dx = cache.state_dim(), du = cache.action_dim();
    const Eigen::Index n = static_cast<Eigen::Index>(H) * du * dx;

    IdealAffineMap map;
    map.y0 = Vec::Zero(dx);
    for (int i = 0; i <= H; ++i) {
        const Vec& w = buf.lookup(t - 1 - i);
        map.y0.noalias() += cache.closed_power(i) * w;
    }
    map.v0 = -(cache.K() * map.y0);

    map.Jy = Mat::Zero(dx, n);
    Mat E = Mat::Zero(du, n);
    for (int r = 1; r <= H; ++r) {
        const Eigen::Index base = static_cast<Eigen::Index>(r - 1) * du * dx;
        // ∂y/∂M^[r]_{pq} = Σ_j (Ã^j B)_{:,p}·w_{t−1−j−r}(q)
        for (int j = 0; j <= H; ++j) {
            const TimeIndex s = t - 1 - j - r;
            if (s < 0) break;
            const Vec& w = buf.lookup(s);
            const Mat& P = cache.closed_power_B(j);
            for (int p = 0; p < du; ++p)
                for (int q = 0; q < dx; ++q) {
                    if (w(q) != 0.0) map.Jy.col(base + p * dx + q).noalias() += w(q) * P.col(p);
                }
        }
        // ∂(M^[r] w_{t−r})/∂M^[r]_{pq} = e_p·w_{t−r}(q)
        const Vec& wr = buf.lookup(t - r);
        for (int p = 0; p < du; ++p)
            for (int q = 0; q < dx; ++q) E(p, base + p * dx + q) = wr(q);
    }
    map.Jv = -(cache.K() * map.Jy) + E;
    return map;
}

PolicyGradient grad_from_map(const CostOracle& cost, const IdealAffineMap& map, const Vec& m, TimeIndex t) {
    PolicyGradient g;
    g.y = map.state(m);
    g.v = map.action(m);
    g.value = cost.value(t, g.y, g.v);
    const Vec gx = cost.grad_x(t, g.y, g.v);
    const Vec gu = cost.grad_u(t, g.y, g.v);
    g.flat = map.Jy.transpose() * gx + map.Jv.transpose() * gu;
    return g;
}

PolicyGradient grad_ideal_cost_diagonal(const CostOracle& cost, const TransferCache& cache,
                                        const DisturbancePolicy& M, const DisturbanceBuffer& buf, TimeIndex t) {
    if (M.H() != cache.H()) throw DimensionError("policy H does not match the transfer cache");
    return grad_from_map(cost, ideal_affine_map(cache, buf, t), M.flatten(), t);
}

Mat hessian_from_map(const CostOracle& cost, const IdealAffineMap& map, const Vec& m, TimeIndex t) {
    const Vec y = map.state(m);
    const Vec v = map.action(m);
    const Mat h = cost.hessian(t, y, v);
    Mat J(map.Jy.rows() + map.Jv.rows(), map.Jy.cols());
    J << map.Jy, map.Jv;
    return J.transpose() * h * J;
}

}  // namespace gpc
