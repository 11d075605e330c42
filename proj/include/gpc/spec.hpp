#pragma once

#include "gpc/controller.hpp"
#include "gpc/cost.hpp"
#include "gpc/disturbance.hpp"
#include "gpc/lds.hpp"
#include "gpc/policy.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gpc {

enum class Scenario { control, ons_counterexample };

struct SystemSpec {
    Mat A;
    Mat B;
    double kappa_A = -1.0;  ///< negative: measured
    double kappa_B = -1.0;
    double W = 1.0;
};

struct ControllerSpec {
    Mat K;
    double kappa = 1.0;
    double gamma = 0.5;
    std::optional<StabilityCertificate> certificate;
};

struct CostSpec {
    enum class Kind { quadratic, counterexample } kind = Kind::quadratic;
    Mat Q;
    Mat R;
};

/// A validated experiment description.
struct ExperimentSpec {
    std::string name;
    Scenario scenario = Scenario::control;
    std::optional<SystemSpec> system;
    std::optional<ControllerSpec> controller;
    CostSpec cost;
    DisturbanceParams disturbance;
    std::vector<TimeIndex> T;
    Optimizer optimizer = Optimizer::ogd_m;
    std::optional<double> eta;
    EtaRule eta_rule = EtaRule::oco_memory;
    double eta_scale = 1.0;
    std::optional<int> H;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir;
    double ons_delta = 1e-4;
    std::vector<Mat> linear_candidates;  ///< empty: only K itself
    std::optional<Mat> K_star;           ///< comparator for the sufficiency check
    int hindsight_iterations = 2000;
    int hindsight_restarts = 5;
};

/// Strict parse: unknown keys, missing keys and invariant violations are all
/// collected and thrown together as a SpecError with JSON pointers. Relative
/// file references resolve against `base_dir`.
ExperimentSpec parse_spec_text(const std::string& text, const std::filesystem::path& base_dir = {});

/// Reads and parses a spec file. Throws IoError if it cannot be read.
ExperimentSpec parse_spec(const std::filesystem::path& path);

LdsSystem build_system(const ExperimentSpec& spec);
StabilizingController build_controller(const ExperimentSpec& spec);
CostPtr build_cost(const ExperimentSpec& spec, TimeIndex T);
DisturbanceGenerator build_generator(const ExperimentSpec& spec);

}  // namespace gpc
