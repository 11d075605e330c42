#include "gpc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gpc::oracle {

namespace {

Vec w_at(const std::vector<Vec>& w, TimeIndex s, Eigen::Index dim) {
    if (s < 0) return Vec::Zero(dim);
    return w.at(static_cast<std::size_t>(s));
}

Vec action(const Mat& K, const PolicyAt& policy, const std::vector<Vec>& w, const Vec& x, TimeIndex t) {
    Vec u = -(K * x);
    if (t < 0) return u;
    const std::vector<Mat> blocks = policy ? policy(t) : std::vector<Mat>{};
    for (std::size_t i = 0; i < blocks.size(); ++i)
        u += blocks[i] * w_at(w, t - 1 - static_cast<TimeIndex>(i), x.size());
    return u;
}

}  // namespace

Rollout rollout(const Mat& A, const Mat& B, const Mat& K, const PolicyAt& policy, const std::vector<Vec>& w,
                TimeIndex T) {
    Rollout r;
    Vec x = Vec::Zero(A.rows());
    r.x.push_back(x);
    for (TimeIndex t = 0; t < T; ++t) {
        const Vec u = action(K, policy, w, x, t);
        x = A * x + B * u + w.at(static_cast<std::size_t>(t));
        r.u.push_back(u);
        r.x.push_back(x);
    }
    return r;
}

Vec ideal_state(const Mat& A, const Mat& B, const Mat& K, const PolicyAt& policy, const std::vector<Vec>& w,
                TimeIndex t, int H) {
    Vec x = Vec::Zero(A.rows());
    for (TimeIndex s = t - 1 - H; s < t; ++s) {
        const Vec u = action(K, policy, w, x, s);
        x = A * x + B * u + w_at(w, s, A.rows());
    }
    return x;
}

Vec ideal_action(const Mat& K, const PolicyAt& policy, const std::vector<Vec>& w, const Vec& y, TimeIndex t) {
    return action(K, policy, w, y, t);
}

double diagonal_objective(const Mat& A, const Mat& B, const Mat& K, const std::vector<Mat>& M,
                          const std::vector<Vec>& w, const CostOracle& cost, TimeIndex t0, TimeIndex t1) {
    const PolicyAt fixed = [&](TimeIndex) { return M; };
    const int H = static_cast<int>(M.size());
    double total = 0.0;
    for (TimeIndex t = t0; t < t1; ++t) {
        const Vec y = ideal_state(A, B, K, fixed, w, t, H);
        total += cost.value(t, y, ideal_action(K, fixed, w, y, t));
    }
    return total;
}

Vec central_difference(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
    Vec g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vec p = x, m = x;
        p(i) += h;
        m(i) -= h;
        g(i) = (f(p) - f(m)) / (2.0 * h);
    }
    return g;
}

GridMin grid_scan(const std::function<double(double)>& f, double lo, double hi, int n) {
    if (n < 2 || !(lo < hi)) throw std::invalid_argument("grid scan needs n >= 2 and lo < hi");
    GridMin best;
    best.value = std::numeric_limits<double>::infinity();
    best.resolution = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) {
        const double z = lo + best.resolution * i;
        const double v = f(z);
        if (v < best.value) {
            best.value = v;
            best.argmin = z;
        }
    }
    return best;
}

double steady_state_scalar_cost(double a, double b, double k, double w, double q, double r) {
    const double closed = a - b * k;
    if (!(std::abs(closed) < 1.0)) return std::numeric_limits<double>::infinity();
    const double x = w / (1.0 - closed);
    return q * x * x + r * k * k * x * x;
}

Mat matrix_power_naive(const Mat& M, int k) {
    if (k < 0) throw std::invalid_argument("negative power");
    Mat out = Mat::Identity(M.rows(), M.cols());
    for (int i = 0; i < k; ++i) out = out * M;
    return out;
}

}  // namespace gpc::oracle
