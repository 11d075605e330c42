#include "gpc/cost.hpp"

#include "gpc/error.hpp"

#include <cmath>
#include <stdexcept>

namespace gpc {

namespace {

class QuadraticCost final : public CostOracle {
public:
    QuadraticCost(Mat Q, Mat R) : Q_(std::move(Q)), R_(std::move(R)) {
        nQ_ = spectral_norm_svd(Q_);
        nR_ = spectral_norm_svd(R_);
    }

    int state_dim() const override { return static_cast<int>(Q_.rows()); }
    int action_dim() const override { return static_cast<int>(R_.rows()); }

    double value(TimeIndex, const Vec& x, const Vec& u) const override {
        return x.dot(Q_ * x) + u.dot(R_ * u);
    }
    Vec grad_x(TimeIndex, const Vec& x, const Vec&) const override { return 2.0 * (Q_ * x); }
    Vec grad_u(TimeIndex, const Vec&, const Vec& u) const override { return 2.0 * (R_ * u); }
    Mat hessian(TimeIndex, const Vec&, const Vec&) const override {
        const auto dx = Q_.rows(), du = R_.rows();
        Mat h = Mat::Zero(dx + du, dx + du);
        h.topLeftCorner(dx, dx) = 2.0 * Q_;
        h.bottomRightCorner(du, du) = 2.0 * R_;
        return h;
    }

    double gradient_bound() const override { return 2.0 * std::max(nQ_, nR_); }
    double value_bound() const override { return nQ_ + nR_; }
    double smoothness() const override { return 2.0 * std::max(nQ_, nR_); }

    std::optional<QuadraticForm> quadratic_form() const override {
        return QuadraticForm{Q_, R_, Vec::Zero(Q_.rows()), Vec::Zero(R_.rows()), 0.0};
    }

private:
    Mat Q_;
    Mat R_;
    double nQ_ = 0.0;
    double nR_ = 0.0;
};

class CounterexampleCost final : public CostOracle {
public:
    CounterexampleCost(double delta, int du) : delta_(delta), du_(du) {}

    int state_dim() const override { return 1; }
    int action_dim() const override { return du_; }

    double value(TimeIndex, const Vec& x, const Vec&) const override {
        const double r = delta_ * x(0) - 1.0;
        return r * r;
    }
    Vec grad_x(TimeIndex, const Vec& x, const Vec&) const override {
        return Vec::Constant(1, 2.0 * delta_ * (delta_ * x(0) - 1.0));
    }
    Vec grad_u(TimeIndex, const Vec&, const Vec&) const override { return Vec::Zero(du_); }
    Mat hessian(TimeIndex, const Vec&, const Vec&) const override {
        Mat h = Mat::Zero(1 + du_, 1 + du_);
        h(0, 0) = 2.0 * delta_ * delta_;
        return h;
    }

    // For D >= 1: |2δ(δx − 1)| ≤ 2δ(δ + 1)·D and (δx − 1)² ≤ (δ + 1)²·D².
    double gradient_bound() const override { return 2.0 * delta_ * (delta_ + 1.0); }
    double value_bound() const override { return (delta_ + 1.0) * (delta_ + 1.0); }
    double smoothness() const override { return 2.0 * delta_ * delta_; }

    std::optional<QuadraticForm> quadratic_form() const override {
        QuadraticForm f;
        f.Q = Mat::Constant(1, 1, delta_ * delta_);
        f.R = Mat::Zero(du_, du_);
        f.q = Vec::Constant(1, -2.0 * delta_);
        f.r = Vec::Zero(du_);
        f.c0 = 1.0;
        return f;
    }

private:
    double delta_;
    int du_;
};

void check_psd(const Mat& m, const char* name) {
    if (m.rows() != m.cols() || m.rows() < 1) throw DimensionError(std::string(name) + " must be square");
    if (!is_symmetric(m)) throw std::invalid_argument(std::string(name) + " must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -1e-12 * scale)
        throw std::invalid_argument(std::string(name) + " must be positive semidefinite");
}

}  // namespace

CostPtr make_quadratic_cost(const Mat& Q, const Mat& R) {
    check_psd(Q, "Q");
    check_psd(R, "R");
    return std::make_shared<QuadraticCost>(Q, R);
}

CostPtr make_counterexample_cost(TimeIndex T, int action_dim) {
    if (T < 1) throw std::invalid_argument("counterexample cost needs T >= 1");
    if (action_dim < 1) throw DimensionError("action dimension must be >= 1");
    return std::make_shared<CounterexampleCost>(1.0 / std::sqrt(static_cast<double>(T)), action_dim);
}

}  // namespace gpc
