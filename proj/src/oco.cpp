#include "gpc/oco.hpp"

#include "gpc/error.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gpc {

OgdMemoryState make_ogd_memory(const Vec& x0, double eta, ProjectionFn project) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("step size must be positive");
    if (!project) throw std::invalid_argument("projection handle is empty");
    OgdMemoryState s;
    s.point = project(x0);
    s.eta = eta;
    s.project = std::move(project);
    return s;
}

OgdMemoryState ogd_memory_step(OgdMemoryState state, const Vec& gradient) {
    if (gradient.size() != state.point.size()) throw DimensionError("gradient does not match the current point");
    state.point = state.project(state.point - state.eta * gradient);
    ++state.steps;
    return state;
}

Vec project_box(const Vec& z, const BoxSet& box) {
    return z.cwiseMax(box.lo).cwiseMin(box.hi);
}

namespace {

void check_box(const BoxSet& box, Eigen::Index n) {
    if (box.lo.size() != n || box.hi.size() != n) throw DimensionError("box bounds do not match the point");
    if ((box.lo.array() > box.hi.array()).any()) throw std::invalid_argument("box has lo > hi");
}

void check_ball(const BallSet& ball, Eigen::Index n) {
    if (ball.center.size() != n) throw DimensionError("ball center does not match the point");
    if (!(ball.radius >= 0.0)) throw std::invalid_argument("ball radius must be non-negative");
}

}  // namespace

Vec project_box_in_norm(const Vec& z, const Mat& A, const BoxSet& box, double tol) {
    const Eigen::Index n = z.size();
    check_box(box, n);
    Vec x = project_box(z, box);
    if (n == 1) return x;
    Vec Ad = A * (x - z);
    for (int sweep = 0; sweep < 100000; ++sweep) {
        double moved = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
            if (A(k, k) <= 0.0) throw NumericalError("A-norm projection needs a positive diagonal");
            const double target = std::clamp(x(k) - Ad(k) / A(k, k), box.lo(k), box.hi(k));
            const double change = target - x(k);
            if (change != 0.0) {
                x(k) = target;
                Ad += change * A.col(k);
                moved = std::max(moved, std::abs(change));
            }
        }
        if (moved <= tol) return x;
    }
    throw NumericalError("A-norm box projection did not converge");
}

Vec project_ball_in_norm(const Vec& z, const Mat& A, const BallSet& ball) {
    check_ball(ball, z.size());
    const Vec offset = z - ball.center;
    if (offset.norm() <= ball.radius) return z;
    if (ball.radius == 0.0) return ball.center;

    // x − c = U·diag(λ/(λ + μ))·Uᵀ(z − c) with μ ≥ 0 chosen so ‖x − c‖ = r.
    Eigen::SelfAdjointEigenSolver<Mat> eig(A);
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed in ball projection");
    const Vec lambda = eig.eigenvalues().cwiseMax(0.0);
    const Vec coeff = eig.eigenvectors().transpose() * offset;
    auto radius_at = [&](double mu) {
        return (lambda.array() / (lambda.array() + mu) * coeff.array()).matrix().norm();
    };
    double lo = 0.0;
    double hi = std::max(lambda.maxCoeff(), 1e-300) * offset.norm() / ball.radius;
    while (radius_at(hi) > ball.radius) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (radius_at(mid) > ball.radius ? lo : hi) = mid;
    }
    const Vec scaled = (lambda.array() / (lambda.array() + hi) * coeff.array()).matrix();
    Vec x = ball.center + eig.eigenvectors() * scaled;
    const double norm = (x - ball.center).norm();
    if (norm > ball.radius) x = ball.center + (x - ball.center) * (ball.radius / norm);
    return x;
}

OnsState make_ons(const Vec& x0, double delta, OnsFeasibleSet set) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("ONS delta must be positive");
    OnsState s;
    s.delta = delta;
    s.A = delta * Mat::Identity(x0.size(), x0.size());
    s.set = std::move(set);
    s.point = std::visit(
        [&](const auto& feasible) -> Vec {
            using S = std::decay_t<decltype(feasible)>;
            if constexpr (std::is_same_v<S, BoxSet>) {
                check_box(feasible, x0.size());
                return project_box(x0, feasible);
            } else {
                check_ball(feasible, x0.size());
                return project_ball_in_norm(x0, Mat::Identity(x0.size(), x0.size()), feasible);
            }
        },
        s.set);
    return s;
}

OnsState ons_square_step(OnsState state, const Vec& gradient, const Mat& hessian) {
    const Eigen::Index n = state.point.size();
    if (gradient.size() != n) throw DimensionError("gradient does not match the current point");
    if (hessian.rows() != n || hessian.cols() != n) throw DimensionError("hessian does not match the current point");
    if (!is_symmetric(hessian, 1e-9 * std::max(1.0, hessian.cwiseAbs().maxCoeff())))
        throw std::invalid_argument("hessian must be symmetric");

    Eigen::LDLT<Mat> ldlt(state.A);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw NumericalError("ONS matrix is not positive definite");
    const Vec z = ldlt.solve(gradient);
    state.last_solve_residual = (state.A * z - gradient).norm();
    if (!z.allFinite() || state.last_solve_residual > 1e-10 * std::max(1.0, gradient.norm()))
        throw NumericalError("ONS solve failed its residual check");

    const Vec target = state.point - z;
    state.point = std::visit(
        [&](const auto& feasible) -> Vec {
            using S = std::decay_t<decltype(feasible)>;
            if constexpr (std::is_same_v<S, BoxSet>)
                return project_box_in_norm(target, state.A, feasible);
            else
                return project_ball_in_norm(target, state.A, feasible);
        },
        state.set);
    state.A += 0.5 * (hessian + hessian.transpose());
    ++state.steps;
    return state;
}

OcoConstants derive_constants(const OcoParams& p) {
    if (!(p.kappa > 0.0) || !(p.kappa_B > 0.0) || !(p.W > 0.0) || !(p.G > 0.0) || !(p.d > 0.0) || p.H < 1 ||
        !(p.T > 0.0))
        throw std::invalid_argument("constants need positive parameters");
    if (!(p.gamma > 0.0 && p.gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
    const double k2 = p.kappa * p.kappa;
    const double a = p.kappa_B * k2 * p.kappa;
    const double denom = p.gamma * (1.0 - k2 * std::pow(1.0 - p.gamma, p.H + 1));
    if (!(denom > 0.0)) throw std::domain_error("state bound diverges; increase H");

    OcoConstants c;
    c.D = p.W * (k2 + p.H * p.kappa_B * k2 * a) / denom + a * p.W / p.gamma;
    c.D_M = a * std::sqrt(p.d) / p.gamma;
    c.G_f = p.G * c.D * p.W * p.H * p.d * (2.0 * a / p.gamma + p.H);
    c.L = 2.0 * p.G * c.D * p.W * a;
    c.eta = c.D_M / std::sqrt(c.G_f * (c.G_f + c.L * p.H * p.H) * p.T);
    return c;
}

double eta_sqrt_horizon(double G, double W, double T, double scale) {
    if (!(G > 0.0) || !(W > 0.0) || !(T > 0.0) || !(scale > 0.0))
        throw std::invalid_argument("step-size parameters must be positive");
    return scale / (G * W * std::sqrt(T));
}

double ogd_memory_regret_bound(double diameter, double eta, double G_f, double L, double memory, double T) {
    return diameter * diameter / eta + T * G_f * G_f * eta + L * memory * memory * eta * G_f * T;
}

double policy_regret(const std::vector<double>& losses_with_memory, const std::vector<double>& comparator_losses) {
    if (losses_with_memory.size() != comparator_losses.size())
        throw std::invalid_argument("loss sequences have different lengths");
    const double a = std::accumulate(losses_with_memory.begin(), losses_with_memory.end(), 0.0);
    const double b = std::accumulate(comparator_losses.begin(), comparator_losses.end(), 0.0);
    return a - b;
}

SquareLossScenario run_ons_square_scenario(TimeIndex T, double delta_init, bool record) {
    if (T < 1) throw std::invalid_argument("scenario needs T >= 1");
    SquareLossScenario out;
    out.T = T;
    out.delta_init = delta_init;
    const double delta = 1.0 / std::sqrt(static_cast<double>(T));
    out.loss_scale = delta;

    BoxSet interval{Vec::Constant(1, -1.0), Vec::Constant(1, 1.0)};
    OnsState ons = make_ons(Vec::Zero(1), delta_init, interval);
    const Mat hessian = Mat::Constant(1, 1, 2.0 * delta * delta);
    // (δx − 1)² is decreasing on [−1, 1] because 1/δ ≥ 1.
    const double best = std::min(1.0, 1.0 / delta);
    const double best_step = (delta * best - 1.0) * (delta * best - 1.0);
    for (TimeIndex t = 0; t < T; ++t) {
        const double x = ons.point(0);
        const double r = delta * x - 1.0;
        out.learner_loss += r * r;
        if (record) {
            out.points.push_back(x);
            out.cumulative_regret.push_back(out.learner_loss - static_cast<double>(t + 1) * best_step);
        }
        const Vec grad = Vec::Constant(1, 2.0 * delta * r);
        ons = ons_square_step(std::move(ons), grad, hessian);
        out.total_movement += std::abs(ons.point(0) - x);
    }
    out.best_loss = static_cast<double>(T) * best_step;
    out.regret = out.learner_loss - out.best_loss;
    out.final_point = ons.point(0);
    return out;
}

}  // namespace gpc
