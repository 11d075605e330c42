#include "gpc/checks.hpp"
#include "gpc/error.hpp"
#include "gpc/harness.hpp"
#include "gpc/spec.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSpec = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct Common {
    std::string spec_path;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("spec", c.spec_path, "experiment spec (JSON)")->required();
    cmd->add_option("--out", c.out, "output directory")->capture_default_str();
    cmd->add_option("--seed", c.seed, "override the spec seed");
    cmd->add_flag("--quiet", c.quiet, "suppress progress output");
}

gpc::ExperimentSpec load(const Common& c) {
    gpc::ExperimentSpec spec = gpc::parse_spec(c.spec_path);
    if (c.seed) spec.seed = *c.seed;
    return spec;
}

void write_error_json(const std::filesystem::path& dir, const std::string& kind, const std::string& message,
                      const gpc::StateBoundAbort* abort) {
    nlohmann::ordered_json j;
    j["error"] = kind;
    j["message"] = message;
    if (abort) {
        j["t"] = abort->step();
        j["state_norm"] = abort->norm();
        j["limit"] = abort->limit();
    }
    try {
        std::filesystem::create_directories(dir);
        gpc::write_text_file(dir / "error.json", j.dump(2) + "\n");
    } catch (const std::exception& e) {
        std::cerr << "could not write error.json: " << e.what() << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online control of linear dynamical systems with disturbance-action policies"};
    app.require_subcommand(1);

    Common run_opts, sweep_opts, verify_opts, oracle_opts;
    auto* run = app.add_subcommand("run", "run every horizon of a spec and export traces, summary and plots");
    add_common(run, run_opts);

    auto* sw = app.add_subcommand("sweep", "repeat a run over values of H, eta or gamma");
    add_common(sw, sweep_opts);
    std::string param;
    std::vector<double> values;
    int threads = 1;
    sw->add_option("--param", param, "H, eta or gamma")->required()->check(CLI::IsMember({"H", "eta", "gamma"}));
    sw->add_option("--values", values, "comma-separated values")->required()->delimiter(',');
    sw->add_option("--threads", threads, "parallel runs")->capture_default_str()->check(CLI::PositiveNumber);

    auto* verify = app.add_subcommand("verify", "run the property checks on the spec's instance");
    add_common(verify, verify_opts);

    auto* orc = app.add_subcommand("oracle", "recompute reference values by brute force");
    add_common(orc, oracle_opts);

    CLI11_PARSE(app, argc, argv);

    const Common& active = run->parsed() ? run_opts : sw->parsed() ? sweep_opts : verify->parsed() ? verify_opts
                                                                                                 : oracle_opts;
    std::string name = "experiment";
    try {
        const gpc::ExperimentSpec spec = load(active);
        name = spec.name;
        gpc::RunOptions opts;
        opts.out_dir = active.out;
        opts.log = active.quiet ? nullptr : &std::cerr;

        if (run->parsed()) {
            const gpc::RunSummary s = gpc::run_experiment(spec, opts);
            if (!active.quiet) std::cout << gpc::summary_to_json(s);
        } else if (sw->parsed()) {
            const auto p = gpc::sweep_param_from_string(param);
            const auto rows = gpc::sweep(spec, p, values, opts, threads);
            const std::string table = gpc::sweep_table_csv(p, rows);
            const auto dir = std::filesystem::path(active.out) / spec.name;
            std::filesystem::create_directories(dir);
            gpc::write_text_file(dir / ("sweep_" + param + ".csv"), table);
            if (!active.quiet) std::cout << table;
        } else if (verify->parsed()) {
            const auto results = gpc::checks::verify_spec(spec);
            nlohmann::ordered_json j = nlohmann::ordered_json::array();
            bool ok = true;
            for (const auto& r : results) {
                ok = ok && r.passed;
                j.push_back({{"check", r.name}, {"passed", r.passed}, {"detail", r.detail}});
                if (!active.quiet) std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.detail << '\n';
            }
            const auto dir = std::filesystem::path(active.out) / spec.name;
            std::filesystem::create_directories(dir);
            gpc::write_text_file(dir / "verify.json", j.dump(2) + "\n");
            return ok ? kExitOk : kExitNumerical;
        } else {
            const std::string report = gpc::checks::oracle_report(spec);
            const auto dir = std::filesystem::path(active.out) / spec.name;
            std::filesystem::create_directories(dir);
            gpc::write_text_file(dir / "oracle.json", report);
            if (!active.quiet) std::cout << report;
        }
        return kExitOk;
    } catch (const gpc::SpecError& e) {
        for (const auto& issue : e.issues())
            std::cerr << "spec error at " << (issue.pointer.empty() ? "/" : issue.pointer) << ": " << issue.message
                      << '\n';
        return kExitSpec;
    } catch (const gpc::StateBoundAbort& e) {
        std::cerr << "numerical abort: " << e.what() << '\n';
        write_error_json(std::filesystem::path(active.out) / name, "state_bound_abort", e.what(), &e);
        return kExitNumerical;
    } catch (const gpc::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        write_error_json(std::filesystem::path(active.out) / name, "numerical_error", e.what(), nullptr);
        return kExitNumerical;
    } catch (const gpc::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return kExitSpec;
    } catch (const std::domain_error& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return kExitSpec;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        write_error_json(std::filesystem::path(active.out) / name, "error", e.what(), nullptr);
        return kExitNumerical;
    }
}
