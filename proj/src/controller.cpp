#include "gpc/controller.hpp"

#include "gpc/error.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <stdexcept>

namespace gpc {

const char* to_string(Optimizer o) {
    switch (o) {
        case Optimizer::ogd_m: return "ogd_m";
        case Optimizer::ons_restricted: return "ons_restricted";
    }
    return "?";
}

Optimizer optimizer_from_string(const std::string& name) {
    if (name == "ogd_m") return Optimizer::ogd_m;
    if (name == "ons_restricted") return Optimizer::ons_restricted;
    throw std::invalid_argument("unknown optimizer '" + name + "'");
}

const char* to_string(EtaRule r) {
    switch (r) {
        case EtaRule::oco_memory: return "oco_memory";
        case EtaRule::sqrt_horizon: return "sqrt_horizon";
    }
    return "?";
}

EtaRule eta_rule_from_string(const std::string& name) {
    if (name == "oco_memory") return EtaRule::oco_memory;
    if (name == "sqrt_horizon") return EtaRule::sqrt_horizon;
    throw std::invalid_argument("unknown eta rule '" + name + "'");
}

std::vector<Vec> ExperimentTrace::disturbances() const {
    std::vector<Vec> out;
    out.reserve(steps.size());
    for (const auto& s : steps) out.push_back(s.w);
    return out;
}

namespace {

void check_dims(const LdsSystem& sys, const Mat& K, const CostOracle& cost) {
    if (K.rows() != sys.action_dim() || K.cols() != sys.state_dim()) throw DimensionError("K must be d_u x d_x");
    if (cost.state_dim() != sys.state_dim() || cost.action_dim() != sys.action_dim())
        throw DimensionError("cost dimensions do not match the system");
}

OcoConstants constants_for(const LdsSystem& sys, const StabilizingController& ctrl, const CostOracle& cost, int H,
                           TimeIndex T) {
    OcoParams p;
    p.kappa = ctrl.kappa;
    p.gamma = ctrl.gamma;
    p.kappa_B = sys.kappa_B();
    p.W = sys.W();
    p.G = cost.gradient_bound();
    p.d = static_cast<double>(std::max(sys.state_dim(), sys.action_dim()));
    p.H = H;
    p.T = static_cast<double>(T);
    return derive_constants(p);
}

struct LoopInputs {
    const LdsSystem& sys;
    const StabilizingController& ctrl;
    const CostOracle& cost;
    const DisturbanceGenerator& gen;
    TimeIndex T;
    int H;
    OcoConstants constants;
    double abort_factor;
    bool keep_policies;
};

// Runs the disturbance-action loop. `update(M, map, grad, t)` returns M_{t+1}.
template <class Update>
ExperimentTrace run_loop(const LoopInputs& in, DisturbancePolicy M, Update update) {
    const int H = in.H;
    const int dx = in.sys.state_dim();
    if (in.gen.dim() != dx) throw DimensionError("disturbance dimension does not match the system");

    TransferCache cache(in.sys, in.ctrl, H);
    DisturbanceBuffer buf(dx, static_cast<std::size_t>(2 * H + 2), in.sys.W());
    std::deque<DisturbancePolicy> window(static_cast<std::size_t>(H + 2), M);

    ExperimentTrace trace;
    trace.H = H;
    trace.constants = in.constants;
    trace.steps.reserve(static_cast<std::size_t>(in.T));
    if (in.keep_policies) trace.policies.push_back(M);

    const double D = in.constants.D;
    const double decay = std::pow(1.0 - in.ctrl.gamma, H + 1);
    const double k2 = in.ctrl.kappa * in.ctrl.kappa;
    const double state_gap_bound = k2 * decay * D;
    const double action_gap_bound = k2 * in.ctrl.kappa * decay * D;
    const double limit = in.abort_factor * D;
    const double slack = 1e-9;

    Vec x = Vec::Zero(dx);
    double movement = 0.0;
    for (TimeIndex t = 0; t < in.T; ++t) {
        StepRecord rec;
        rec.t = t;
        rec.x = x;
        rec.u = policy_action(in.ctrl, M, x, buf, t);
        rec.cost = in.cost.value(t, rec.x, rec.u);

        IdealWindow win{t, std::vector<PolicyRef>(window.begin(), window.end()), std::cref(buf)};
        const IdealPoint ideal = ideal_cost(in.cost, cache, win);
        rec.ideal_cost = ideal.cost;
        rec.state_gap = (rec.x - ideal.y).norm();
        rec.action_gap = (rec.u - ideal.v).norm();

        const IdealAffineMap map = ideal_affine_map(cache, buf, t);
        const PolicyGradient grad = grad_from_map(in.cost, map, M.flatten(), t);
        rec.diagonal_cost = grad.value;
        rec.grad_norm = grad.flat.norm();
        rec.movement = movement;

        const Vec w = in.gen.emit(t);
        const Vec x_next = step_dynamics(in.sys, x, rec.u, w);
        rec.w = recover_disturbance(in.sys, x_next, x, rec.u);
        buf.push(rec.w);

        const double xn = rec.x.norm();
        trace.max_state_norm = std::max(trace.max_state_norm, xn);
        if (xn > D * (1.0 + slack)) ++trace.violations.state;
        if (rec.state_gap > state_gap_bound * (1.0 + slack) + 1e-12) ++trace.violations.state_gap;
        if (rec.action_gap > action_gap_bound * (1.0 + slack) + 1e-12) ++trace.violations.action_gap;
        trace.total_cost += rec.cost;
        trace.total_ideal_cost += rec.ideal_cost;
        trace.total_diagonal_cost += rec.diagonal_cost;

        DisturbancePolicy next = update(M, map, grad, t);
        movement = next.distance(M);
        M = std::move(next);
        window.pop_front();
        window.push_back(M);
        if (in.keep_policies) trace.policies.push_back(M);
        trace.steps.push_back(std::move(rec));

        const double norm_next = x_next.norm();
        if (!std::isfinite(norm_next)) throw NumericalError("state became non-finite at t = " + std::to_string(t + 1));
        if (norm_next > limit) throw StateBoundAbort(t + 1, norm_next, limit);
        x = x_next;
    }
    trace.final_policy = M;
    return trace;
}

}  // namespace

ResolvedGpc resolve_gpc(const GpcConfig& cfg) {
    if (!cfg.cost) throw std::invalid_argument("GPC needs a cost oracle");
    check_dims(cfg.system, cfg.controller.K, *cfg.cost);
    if (cfg.T < 2) throw std::invalid_argument("GPC needs T >= 2");
    ResolvedGpc r;
    if (cfg.H) {
        if (*cfg.H < 1) throw std::invalid_argument("H must be >= 1");
        r.H = *cfg.H;
    } else {
        r.H = horizon_for(cfg.system.kappa_B(), cfg.controller.kappa, cfg.controller.gamma,
                          static_cast<double>(cfg.T));
    }
    r.radii = policy_radii(cfg.system.kappa_B(), cfg.controller.kappa, cfg.controller.gamma, r.H);
    r.constants = constants_for(cfg.system, cfg.controller, *cfg.cost, r.H, cfg.T);
    if (cfg.eta) {
        r.eta = *cfg.eta;
    } else if (cfg.eta_rule == EtaRule::sqrt_horizon) {
        r.eta = eta_sqrt_horizon(cfg.cost->gradient_bound(), cfg.system.W(), static_cast<double>(cfg.T),
                                 cfg.eta_scale);
    } else {
        r.eta = r.constants.eta;
    }
    if (!(r.eta > 0.0) || !std::isfinite(r.eta)) throw std::invalid_argument("step size must be positive");
    return r;
}

ExperimentTrace run_gpc(const GpcConfig& cfg) {
    const ResolvedGpc r = resolve_gpc(cfg);
    if (cfg.verify_stability) {
        const StabilityReport rep = verify_strong_stability(cfg.system, cfg.controller, std::max(50, 2 * r.H + 2));
        if (!rep.passed) throw std::invalid_argument("controller is not (kappa, gamma)-strongly stable: " + rep.detail);
    }
    const int du = cfg.system.action_dim(), dx = cfg.system.state_dim();
    LoopInputs in{cfg.system, cfg.controller, *cfg.cost, cfg.disturbances, cfg.T, r.H, r.constants,
                  cfg.abort_factor, cfg.keep_policies};
    DisturbancePolicy M0 = DisturbancePolicy::zeros(du, dx, r.radii);

    ExperimentTrace trace;
    if (cfg.optimizer == Optimizer::ogd_m) {
        OgdMemoryState ogd = make_ogd_memory(M0.flatten(), r.eta, [&](const Vec& m) {
            return project_policy(DisturbancePolicy::from_flat(m, du, dx, r.radii)).flatten();
        });
        trace = run_loop(in, M0, [&](const DisturbancePolicy&, const IdealAffineMap&, const PolicyGradient& g,
                                     TimeIndex) {
            ogd = ogd_memory_step(std::move(ogd), g.flat);
            return DisturbancePolicy::from_flat(ogd.point, du, dx, r.radii);
        });
    } else {
        // Entry-wise box inside each spectral ball: |m_pq| ≤ r_i/√(d_u·d_x).
        const Eigen::Index n = M0.param_count();
        BoxSet box{Vec(n), Vec(n)};
        const double shrink = 1.0 / std::sqrt(static_cast<double>(du * dx));
        for (int i = 0; i < r.H; ++i)
            for (int k = 0; k < du * dx; ++k) {
                const double b = r.radii[static_cast<std::size_t>(i)] * shrink;
                box.lo(i * du * dx + k) = -b;
                box.hi(i * du * dx + k) = b;
            }
        OnsState ons = make_ons(M0.flatten(), cfg.ons_delta, box);
        trace = run_loop(in, M0, [&](const DisturbancePolicy& M, const IdealAffineMap& map, const PolicyGradient& g,
                                     TimeIndex t) {
            const Mat hess = hessian_from_map(*cfg.cost, map, M.flatten(), t);
            ons = ons_square_step(std::move(ons), g.flat, hess);
            return DisturbancePolicy::from_flat(ons.point, du, dx, r.radii);
        });
    }
    trace.eta = r.eta;
    return trace;
}

ExperimentTrace run_fixed_policy(const LdsSystem& sys, const StabilizingController& ctrl, const DisturbancePolicy& M,
                                 const DisturbanceGenerator& gen, const CostOracle& cost, TimeIndex T) {
    check_dims(sys, ctrl.K, cost);
    if (M.action_dim() != sys.action_dim() || M.state_dim() != sys.state_dim())
        throw DimensionError("policy does not match the system");
    LoopInputs in{sys, ctrl, cost, gen, T, M.H(), constants_for(sys, ctrl, cost, M.H(), std::max<TimeIndex>(T, 1)),
                  10.0, false};
    return run_loop(in, M, [](const DisturbancePolicy& cur, const IdealAffineMap&, const PolicyGradient&, TimeIndex) {
        return cur;
    });
}

ExperimentTrace run_linear_baseline(const LdsSystem& sys, const Mat& K, const DisturbanceGenerator& gen,
                                    const CostOracle& cost, TimeIndex T) {
    check_dims(sys, K, cost);
    if (gen.dim() != sys.state_dim()) throw DimensionError("disturbance dimension does not match the system");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    ExperimentTrace trace;
    trace.total_ideal_cost = nan;
    trace.total_diagonal_cost = nan;
    trace.steps.reserve(static_cast<std::size_t>(std::max<TimeIndex>(T, 0)));
    Vec x = Vec::Zero(sys.state_dim());
    for (TimeIndex t = 0; t < T; ++t) {
        StepRecord rec;
        rec.t = t;
        rec.x = x;
        rec.u = -(K * x);
        rec.cost = cost.value(t, rec.x, rec.u);
        rec.ideal_cost = nan;
        rec.diagonal_cost = nan;
        rec.state_gap = nan;
        rec.action_gap = nan;
        const Vec x_next = step_dynamics(sys, x, rec.u, gen.emit(t));
        rec.w = recover_disturbance(sys, x_next, x, rec.u);
        trace.max_state_norm = std::max(trace.max_state_norm, x.norm());
        trace.total_cost += rec.cost;
        trace.steps.push_back(std::move(rec));
        if (!x_next.allFinite()) throw NumericalError("state became non-finite at t = " + std::to_string(t + 1));
        x = x_next;
    }
    return trace;
}

HindsightObjective::HindsightObjective(const LdsSystem& sys, const StabilizingController& ctrl, CostPtr cost, int H,
                                       const std::vector<Vec>& disturbances, TimeIndex t_begin,
                                       std::optional<TimeIndex> t_end)
    : cache_(sys, ctrl, H), cost_(std::move(cost)), t_begin_(t_begin) {
    if (!cost_) throw std::invalid_argument("objective needs a cost oracle");
    check_dims(sys, ctrl.K, *cost_);
    const auto T = static_cast<TimeIndex>(disturbances.size());
    t_end_ = std::min(t_end.value_or(T), T);
    if (t_begin_ < 0 || t_begin_ > t_end_) throw std::invalid_argument("objective time range is empty or inverted");
    n_ = static_cast<Eigen::Index>(H) * sys.action_dim() * sys.state_dim();

    DisturbanceBuffer buf(sys.state_dim(), disturbances.size() + 1, sys.W());
    for (const auto& w : disturbances) buf.push(w);

    const auto form = cost_->quadratic_form();
    quadratic_ = form.has_value();
    if (quadratic_) {
        const Mat& Q = form->Q;
        const Mat& R = form->R;
        const Vec q = form->q.size() ? form->q : Vec::Zero(sys.state_dim());
        const Vec r = form->r.size() ? form->r : Vec::Zero(sys.action_dim());
        P_ = Mat::Zero(n_, n_);
        b_ = Vec::Zero(n_);
        c_ = 0.0;
        for (TimeIndex t = t_begin_; t < t_end_; ++t) {
            const IdealAffineMap m = ideal_affine_map(cache_, buf, t);
            const Mat QJ = Q * m.Jy;
            const Mat RJ = R * m.Jv;
            P_.noalias() += m.Jy.transpose() * QJ + m.Jv.transpose() * RJ;
            b_.noalias() += 2.0 * (QJ.transpose() * m.y0 + RJ.transpose() * m.v0) + m.Jy.transpose() * q +
                            m.Jv.transpose() * r;
            c_ += m.y0.dot(Q * m.y0) + m.v0.dot(R * m.v0) + q.dot(m.y0) + r.dot(m.v0) + form->c0;
        }
        P_ = 0.5 * (P_ + P_.transpose());
        if (n_ > 0) {
            Eigen::SelfAdjointEigenSolver<Mat> eig(P_, Eigen::EigenvaluesOnly);
            smoothness_ = 2.0 * std::max(0.0, eig.eigenvalues().maxCoeff());
        }
        // Keep maps only for direct summation on short horizons.
        if ((t_end_ - t_begin_) * n_ <= 4'000'000) {
            for (TimeIndex t = t_begin_; t < t_end_; ++t) maps_.push_back(ideal_affine_map(cache_, buf, t));
        }
    } else {
        maps_.reserve(static_cast<std::size_t>(t_end_ - t_begin_));
        for (TimeIndex t = t_begin_; t < t_end_; ++t) {
            maps_.push_back(ideal_affine_map(cache_, buf, t));
            const auto& m = maps_.back();
            smoothness_ += cost_->smoothness() * (m.Jy.squaredNorm() + m.Jv.squaredNorm());
        }
    }
}

double HindsightObjective::value(const Vec& m) const {
    if (m.size() != n_) throw DimensionError("objective point has the wrong size");
    if (quadratic_) return m.dot(P_ * m) + b_.dot(m) + c_;
    return summed_value(m);
}

double HindsightObjective::summed_value(const Vec& m) const {
    if (m.size() != n_) throw DimensionError("objective point has the wrong size");
    if (quadratic_ && maps_.empty()) return value(m);
    double total = 0.0;
    TimeIndex t = t_begin_;
    for (const auto& map : maps_) {
        total += cost_->value(t, map.state(m), map.action(m));
        ++t;
    }
    return total;
}

Vec HindsightObjective::gradient(const Vec& m) const {
    if (m.size() != n_) throw DimensionError("objective point has the wrong size");
    if (quadratic_) return 2.0 * (P_ * m) + b_;
    Vec g = Vec::Zero(n_);
    TimeIndex t = t_begin_;
    for (const auto& map : maps_) {
        const Vec y = map.state(m), v = map.action(m);
        g.noalias() += map.Jy.transpose() * cost_->grad_x(t, y, v) + map.Jv.transpose() * cost_->grad_u(t, y, v);
        ++t;
    }
    return g;
}

HindsightPolicy best_policy_in_hindsight(const std::vector<Vec>& disturbances, CostPtr cost,
                                         const StabilizingController& ctrl, const LdsSystem& sys, int H,
                                         const std::vector<double>& radii, const HindsightOptions& opts) {
    if (static_cast<int>(radii.size()) != H) throw DimensionError("one radius per block required");
    if (opts.iterations < 1 || opts.restarts < 1) throw std::invalid_argument("solver needs iterations and restarts");
    const int du = sys.action_dim(), dx = sys.state_dim();
    const HindsightObjective obj(sys, ctrl, std::move(cost), H, disturbances, opts.t_begin, opts.t_end);
    auto project = [&](const Vec& m) {
        return project_policy(DisturbancePolicy::from_flat(m, du, dx, radii)).flatten();
    };

    const Eigen::Index n = static_cast<Eigen::Index>(obj.dimension());
    const double Lc = obj.smoothness();
    std::vector<Vec> finals;
    std::vector<double> values;
    for (int r = 0; r < opts.restarts; ++r) {
        Vec x = Vec::Zero(n);
        if (r > 0) {
            Rng rng = make_rng(opts.seed, static_cast<std::uint64_t>(r));
            std::normal_distribution<double> normal(0.0, 1.0);
            for (int i = 0; i < H; ++i)
                for (int k = 0; k < du * dx; ++k) x(i * du * dx + k) = radii[static_cast<std::size_t>(i)] * normal(rng);
            x = project(x);
        }
        if (Lc > 0.0) {
            // Accelerated projected gradient; momentum is reset whenever
            // the step direction disagrees with the gradient.
            Vec y = x;
            double tk = 1.0;
            for (int k = 0; k < opts.iterations; ++k) {
                const Vec g = obj.gradient(y);
                const Vec xn = project(y - g / Lc);
                if (g.dot(xn - x) > 0.0) {
                    tk = 1.0;
                    y = xn;
                } else {
                    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
                    y = xn + ((tk - 1.0) / tn) * (xn - x);
                    tk = tn;
                }
                x = xn;
            }
        }
        values.push_back(obj.value(x));
        finals.push_back(std::move(x));
    }

    const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    HindsightPolicy out{DisturbancePolicy::from_flat(finals[best], du, dx, radii), obj.summed_value(finals[best]),
                        0.0, values, (*hi - *lo) / std::max(1.0, std::abs(*lo))};
    if (Lc > 0.0) {
        const Vec& m = finals[best];
        out.residual = Lc * (m - project(m - obj.gradient(m) / Lc)).norm();
    }
    return out;
}

double linear_rollout_cost(const std::vector<Vec>& disturbances, const CostOracle& cost, const LdsSystem& sys,
                           const Mat& K) {
    check_dims(sys, K, cost);
    Vec x = Vec::Zero(sys.state_dim());
    double total = 0.0;
    for (std::size_t t = 0; t < disturbances.size(); ++t) {
        const Vec u = -(K * x);
        total += cost.value(static_cast<TimeIndex>(t), x, u);
        x = step_dynamics(sys, x, u, disturbances[t]);
        if (!x.allFinite() || x.norm() > 1e150) return std::numeric_limits<double>::infinity();
    }
    return std::isfinite(total) ? total : std::numeric_limits<double>::infinity();
}

HindsightLinear best_linear_in_hindsight(const std::vector<Vec>& disturbances, const CostOracle& cost,
                                         const LdsSystem& sys, const std::vector<Mat>& candidates) {
    if (candidates.empty()) throw std::invalid_argument("candidate grid is empty");
    HindsightLinear out;
    out.total = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double c = linear_rollout_cost(disturbances, cost, sys, candidates[i]);
        out.costs.push_back(c);
        if (c < out.total || (i == 0)) {
            out.total = c;
            out.index = i;
        }
    }
    out.K = candidates[out.index];
    return out;
}

std::vector<Mat> scalar_gain_grid(double lo, double hi, int n) {
    if (n < 1 || !(lo <= hi)) throw std::invalid_argument("gain grid needs n >= 1 and lo <= hi");
    std::vector<Mat> grid;
    grid.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double k = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
        grid.push_back(Mat::Constant(1, 1, k));
    }
    return grid;
}

std::vector<double> regret_series(const ExperimentTrace& trace, const ExperimentTrace& comparator) {
    if (trace.steps.size() != comparator.steps.size()) throw std::invalid_argument("traces have different lengths");
    std::vector<double> out(trace.steps.size());
    double a = 0.0, b = 0.0;
    for (std::size_t t = 0; t < out.size(); ++t) {
        a += trace.steps[t].cost;
        b += comparator.steps[t].cost;
        out[t] = a - b;
    }
    return out;
}

std::vector<double> regret_series(const ExperimentTrace& trace, double comparator_cost) {
    std::vector<double> out(trace.steps.size());
    const double n = static_cast<double>(out.size());
    double a = 0.0;
    for (std::size_t t = 0; t < out.size(); ++t) {
        a += trace.steps[t].cost;
        out[t] = a - comparator_cost * (static_cast<double>(t + 1) / n);
    }
    return out;
}

}  // namespace gpc
