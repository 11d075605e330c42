#pragma once

#include "gpc/linalg.hpp"

#include <cstddef>
#include <functional>
#include <variant>
#include <vector>

namespace gpc {

/// Euclidean projection onto a convex feasible set.
using ProjectionFn = std::function<Vec(const Vec&)>;

/// Projected online gradient descent for losses with memory (OGD-M).
struct OgdMemoryState {
    Vec point;
    double eta = 0.0;
    ProjectionFn project;
    std::size_t steps = 0;
};

/// Starts at project(x0). Throws std::invalid_argument unless eta > 0.
OgdMemoryState make_ogd_memory(const Vec& x0, double eta, ProjectionFn project);

/// point ← project(point − eta·gradient).
OgdMemoryState ogd_memory_step(OgdMemoryState state, const Vec& gradient);

/// Axis-aligned box lo ≤ x ≤ hi (an interval in one dimension).
struct BoxSet {
    Vec lo;
    Vec hi;
};

struct BallSet {
    Vec center;
    double radius = 1.0;
};

using OnsFeasibleSet = std::variant<BoxSet, BallSet>;

/// Online Newton Step for square losses.
///
/// A starts at delta·I and gains the loss Hessian after every step; the
/// step solves A·z = ∇ and projects in the A-norm.
struct OnsState {
    Vec point;
    Mat A;
    double delta = 1e-4;
    OnsFeasibleSet set;
    std::size_t steps = 0;
    double last_solve_residual = 0.0;
};

OnsState make_ons(const Vec& x0, double delta, OnsFeasibleSet set);

/// x ← Π^A(x − A⁻¹∇), then A ← A + ∇². `hessian` must be symmetric PSD.
/// Throws NumericalError if the solve fails its residual check.
OnsState ons_square_step(OnsState state, const Vec& gradient, const Mat& hessian);

/// argmin_{x ∈ box} (x − z)ᵀA(x − z) by cyclic coordinate minimization.
/// Exact in one dimension; otherwise iterated until no coordinate moves by
/// more than `tol`.
Vec project_box_in_norm(const Vec& z, const Mat& A, const BoxSet& box, double tol = 1e-10);

/// argmin_{‖x − c‖ ≤ r} (x − z)ᵀA(x − z) via the multiplier equation on A's
/// eigenbasis.
Vec project_ball_in_norm(const Vec& z, const Mat& A, const BallSet& ball);

Vec project_box(const Vec& z, const BoxSet& box);

/// Problem constants for the regret analysis.
struct OcoParams {
    double kappa = 1.0;
    double gamma = 0.5;
    double kappa_B = 1.0;
    double W = 1.0;
    double G = 1.0;
    double d = 1.0;
    int H = 1;
    double T = 1.0;
};

struct OcoConstants {
    double D = 0.0;    ///< bound on ‖x_t‖, ‖u_t‖
    double G_f = 0.0;  ///< bound on ‖∇g_t‖
    double L = 0.0;    ///< coordinate-wise Lipschitz constant of f_t
    double D_M = 0.0;  ///< diameter of the policy set
    double eta = 0.0;  ///< D_M / √(G_f(G_f + L·H²)·T)
};

/// With a = kappa_B·kappa³:
///   D   = W(kappa² + H·kappa_B·kappa²·a) / (gamma(1 − kappa²(1−gamma)^{H+1})) + a·W/gamma
///   D_M = a·√d / gamma
///   G_f = G·D·W·H·d·(2a/gamma + H)
///   L   = 2·G·D·W·a
/// Throws std::domain_error("state bound diverges; increase H") when the
/// denominator of D is not positive.
OcoConstants derive_constants(const OcoParams& p);

/// 1 / (G·W·√T), multiplied by `scale`.
double eta_sqrt_horizon(double G, double W, double T, double scale = 1.0);

/// D²/eta + T·G_f²·eta + L·m²·eta·G_f·T for memory length m.
double ogd_memory_regret_bound(double diameter, double eta, double G_f, double L, double memory, double T);

/// Σ losses_with_memory − Σ comparator_losses. Throws on length mismatch.
double policy_regret(const std::vector<double>& losses_with_memory, const std::vector<double>& comparator_losses);

/// One-dimensional square-loss stream (δx − 1)², δ = 1/√T, x ∈ [−1, 1],
/// played by ONS from x = 0.
struct SquareLossScenario {
    TimeIndex T = 0;
    double delta_init = 1e-4;
    double loss_scale = 0.0;  ///< δ
    double learner_loss = 0.0;
    double best_loss = 0.0;   ///< T·min_x (δx − 1)²
    double regret = 0.0;
    double total_movement = 0.0;
    double final_point = 0.0;
    std::vector<double> points;             ///< x_0 … x_{T−1} when recorded
    std::vector<double> cumulative_regret;  ///< running regret when recorded
};

SquareLossScenario run_ons_square_scenario(TimeIndex T, double delta_init, bool record = false);

}  // namespace gpc
