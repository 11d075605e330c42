#include "gpc/spec.hpp"

#include "gpc/error.hpp"

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <sstream>

namespace gpc {

namespace {

using nlohmann::json;

std::string escape_token(const std::string& key) {
    std::string out;
    for (char c : key) {
        if (c == '~')
            out += "~0";
        else if (c == '/')
            out += "~1";
        else
            out += c;
    }
    return out;
}

std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + escape_token(key); }

class Reader {
public:
    std::vector<SpecIssue> issues;

    void issue(std::string ptr, std::string msg) { issues.push_back({std::move(ptr), std::move(msg)}); }

    bool object(const json& j, const std::string& ptr) {
        if (j.is_object()) return true;
        issue(ptr, "expected an object");
        return false;
    }

    void allow_only(const json& obj, const std::string& ptr, std::initializer_list<const char*> allowed) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || it.key() == a;
            if (!ok) issue(child(ptr, it.key()), "unknown key '" + it.key() + "'");
        }
    }

    const json* field(const json& obj, const std::string& ptr, const char* key, bool required) {
        auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) issue(child(ptr, key), std::string("missing required key '") + key + "'");
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const json& obj, const std::string& ptr, const char* key, bool required) {
        const json* j = field(obj, ptr, key, required);
        if (!j) return std::nullopt;
        if (!j->is_number()) {
            issue(child(ptr, key), "expected a number");
            return std::nullopt;
        }
        const double v = j->get<double>();
        if (!std::isfinite(v)) {
            issue(child(ptr, key), "must be finite");
            return std::nullopt;
        }
        return v;
    }

    std::optional<double> positive(const json& obj, const std::string& ptr, const char* key, bool required) {
        auto v = number(obj, ptr, key, required);
        if (v && !(*v > 0.0)) {
            issue(child(ptr, key), "must be positive");
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::int64_t> integer(const json& obj, const std::string& ptr, const char* key, bool required,
                                        std::int64_t min) {
        const json* j = field(obj, ptr, key, required);
        if (!j) return std::nullopt;
        if (!j->is_number_integer()) {
            issue(child(ptr, key), "expected an integer");
            return std::nullopt;
        }
        const auto v = j->get<std::int64_t>();
        if (v < min) {
            issue(child(ptr, key), "must be >= " + std::to_string(min));
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::string> string(const json& obj, const std::string& ptr, const char* key, bool required) {
        const json* j = field(obj, ptr, key, required);
        if (!j) return std::nullopt;
        if (!j->is_string()) {
            issue(child(ptr, key), "expected a string");
            return std::nullopt;
        }
        return j->get<std::string>();
    }

    std::optional<Mat> matrix_value(const json& j, const std::string& ptr) {
        if (!j.is_array() || j.empty()) {
            issue(ptr, "expected a non-empty list of rows");
            return std::nullopt;
        }
        std::size_t cols = 0;
        for (std::size_t r = 0; r < j.size(); ++r) {
            const json& row = j[r];
            const std::string rp = ptr + "/" + std::to_string(r);
            if (!row.is_array() || row.empty()) {
                issue(rp, "expected a non-empty row of numbers");
                return std::nullopt;
            }
            if (r == 0) cols = row.size();
            if (row.size() != cols) {
                issue(rp, "row length differs from the first row");
                return std::nullopt;
            }
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (!row[c].is_number() || !std::isfinite(row[c].get<double>())) {
                    issue(rp + "/" + std::to_string(c), "expected a finite number");
                    return std::nullopt;
                }
            }
        }
        Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
        for (std::size_t r = 0; r < j.size(); ++r)
            for (std::size_t c = 0; c < cols; ++c)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
        return m;
    }

    std::optional<Mat> matrix(const json& obj, const std::string& ptr, const char* key, bool required) {
        const json* j = field(obj, ptr, key, required);
        if (!j) return std::nullopt;
        return matrix_value(*j, child(ptr, key));
    }

    std::optional<Vec> vector(const json& obj, const std::string& ptr, const char* key, bool required) {
        const json* j = field(obj, ptr, key, required);
        if (!j) return std::nullopt;
        const std::string p = child(ptr, key);
        if (!j->is_array() || j->empty()) {
            issue(p, "expected a non-empty list of numbers");
            return std::nullopt;
        }
        Vec v(static_cast<Eigen::Index>(j->size()));
        for (std::size_t i = 0; i < j->size(); ++i) {
            if (!(*j)[i].is_number()) {
                issue(p + "/" + std::to_string(i), "expected a number");
                return std::nullopt;
            }
            v(static_cast<Eigen::Index>(i)) = (*j)[i].get<double>();
        }
        return v;
    }
};

bool filesystem_safe(const std::string& name) {
    if (name.empty() || name == "." || name == "..") return false;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                        c == '-' || c == '.';
        if (!ok) return false;
    }
    return true;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base.empty() ? base / path : path;
}

void parse_system(Reader& rd, const json& j, ExperimentSpec& spec, const std::filesystem::path& base) {
    const std::string ptr = "/system";
    if (!rd.object(j, ptr)) return;
    rd.allow_only(j, ptr, {"A", "B", "W", "kappa_A", "kappa_B", "file"});
    SystemSpec s;
    std::optional<Mat> A, B;
    if (auto file = rd.string(j, ptr, "file", false)) {
        if (j.contains("A") || j.contains("B")) rd.issue(child(ptr, "file"), "give either 'file' or inline A and B");
        const auto path = resolve(base, *file);
        std::ifstream in(path);
        if (!in) {
            rd.issue(child(ptr, "file"), "cannot read system file '" + path.string() + "'");
        } else {
            json doc;
            try {
                doc = json::parse(in);
            } catch (const json::exception& e) {
                rd.issue(child(ptr, "file"), std::string("system file is not valid JSON: ") + e.what());
            }
            if (doc.is_object()) {
                A = rd.matrix(doc, child(ptr, "file"), "A", true);
                B = rd.matrix(doc, child(ptr, "file"), "B", true);
            } else if (!doc.is_null()) {
                rd.issue(child(ptr, "file"), "system file must hold an object with A and B");
            }
        }
    } else {
        A = rd.matrix(j, ptr, "A", true);
        B = rd.matrix(j, ptr, "B", true);
    }
    const auto W = rd.positive(j, ptr, "W", true);
    const auto kA = rd.positive(j, ptr, "kappa_A", false);
    const auto kB = rd.positive(j, ptr, "kappa_B", false);
    if (!A || !B || !W) return;
    if (A->rows() != A->cols()) {
        rd.issue(child(ptr, "A"), "A must be square");
        return;
    }
    if (B->rows() != A->rows()) {
        rd.issue(child(ptr, "B"), "B must have as many rows as A");
        return;
    }
    s.A = *A;
    s.B = *B;
    s.W = *W;
    s.kappa_A = kA.value_or(-1.0);
    s.kappa_B = kB.value_or(-1.0);
    try {
        LdsSystem(s.A, s.B, s.kappa_A, s.kappa_B, s.W);
    } catch (const std::exception& e) {
        rd.issue(kB ? child(ptr, "kappa_B") : ptr, e.what());
        return;
    }
    spec.system = s;
}

void parse_controller(Reader& rd, const json& j, ExperimentSpec& spec) {
    const std::string ptr = "/controller";
    if (!rd.object(j, ptr)) return;
    rd.allow_only(j, ptr, {"K", "kappa", "gamma", "certificate"});
    ControllerSpec c;
    const auto K = rd.matrix(j, ptr, "K", true);
    const auto kappa = rd.number(j, ptr, "kappa", true);
    const auto gamma = rd.number(j, ptr, "gamma", true);
    bool ok = K && kappa && gamma;
    if (kappa && !(*kappa >= 1.0)) {
        rd.issue(child(ptr, "kappa"), "kappa must be >= 1");
        ok = false;
    }
    if (gamma && !(*gamma > 0.0 && *gamma <= 1.0)) {
        rd.issue(child(ptr, "gamma"), "gamma must lie in (0, 1]");
        ok = false;
    }
    if (const json* cert = rd.field(j, ptr, "certificate", false)) {
        const std::string cp = child(ptr, "certificate");
        if (rd.object(*cert, cp)) {
            rd.allow_only(*cert, cp, {"H", "L"});
            const auto Hm = rd.matrix(*cert, cp, "H", true);
            const auto L = rd.matrix(*cert, cp, "L", true);
            if (Hm && L) {
                if (Hm->rows() != Hm->cols() || L->rows() != L->cols() || Hm->rows() != L->rows()) {
                    rd.issue(cp, "certificate H and L must be square and of equal size");
                    ok = false;
                } else {
                    c.certificate = StabilityCertificate{*Hm, *L};
                }
            } else {
                ok = false;
            }
        } else {
            ok = false;
        }
    }
    if (!ok) return;
    c.K = *K;
    c.kappa = *kappa;
    c.gamma = *gamma;
    if (spec.system) {
        if (c.K.rows() != spec.system->B.cols() || c.K.cols() != spec.system->A.rows()) {
            rd.issue(child(ptr, "K"), "K must be d_u x d_x");
            return;
        }
        if (c.certificate && c.certificate->Hm.rows() != spec.system->A.rows()) {
            rd.issue(child(ptr, "certificate"), "certificate size must equal d_x");
            return;
        }
    }
    spec.controller = c;
}

void parse_cost(Reader& rd, const json& j, ExperimentSpec& spec) {
    const std::string ptr = "/cost";
    if (!rd.object(j, ptr)) return;
    rd.allow_only(j, ptr, {"type", "Q", "R"});
    const auto type = rd.string(j, ptr, "type", true);
    if (!type) return;
    if (*type == "counterexample") {
        spec.cost.kind = CostSpec::Kind::counterexample;
        if (j.contains("Q") || j.contains("R")) rd.issue(ptr, "counterexample cost takes no Q or R");
        return;
    }
    if (*type != "quadratic") {
        rd.issue(child(ptr, "type"), "cost type must be 'quadratic' or 'counterexample'");
        return;
    }
    const auto Q = rd.matrix(j, ptr, "Q", true);
    const auto R = rd.matrix(j, ptr, "R", true);
    if (!Q || !R) return;
    if (spec.system) {
        const auto dx = spec.system->A.rows(), du = spec.system->B.cols();
        if (Q->rows() != dx || Q->cols() != dx) return rd.issue(child(ptr, "Q"), "Q must be d_x x d_x");
        if (R->rows() != du || R->cols() != du) return rd.issue(child(ptr, "R"), "R must be d_u x d_u");
    }
    try {
        make_quadratic_cost(*Q, *R);
    } catch (const std::exception& e) {
        return rd.issue(ptr, e.what());
    }
    spec.cost.kind = CostSpec::Kind::quadratic;
    spec.cost.Q = *Q;
    spec.cost.R = *R;
}

void parse_disturbance(Reader& rd, const json& j, ExperimentSpec& spec, const std::filesystem::path& base) {
    const std::string ptr = "/disturbance";
    if (!rd.object(j, ptr)) return;
    rd.allow_only(j, ptr, {"kind", "value", "sigma", "half_width", "amplitude", "period", "phase", "path"});
    const auto kind = rd.string(j, ptr, "kind", true);
    if (!kind) return;
    DisturbanceParams p;
    try {
        p.kind = disturbance_kind_from_string(*kind);
    } catch (const std::exception&) {
        return rd.issue(child(ptr, "kind"), "unknown disturbance kind '" + *kind + "'");
    }
    if (auto v = rd.vector(j, ptr, "value", p.kind == DisturbanceKind::constant)) {
        if (spec.system && v->size() != spec.system->A.rows())
            rd.issue(child(ptr, "value"), "value must have d_x entries");
        p.value = *v;
    }
    if (auto v = rd.positive(j, ptr, "sigma", false)) p.sigma = *v;
    if (auto v = rd.positive(j, ptr, "half_width", false)) p.half_width = *v;
    if (auto v = rd.positive(j, ptr, "amplitude", false)) p.amplitude = *v;
    if (auto v = rd.positive(j, ptr, "period", false)) p.period = *v;
    if (auto v = rd.number(j, ptr, "phase", false)) p.phase = *v;
    if (auto path = rd.string(j, ptr, "path", p.kind == DisturbanceKind::replay_from_file)) {
        p.replay_path = resolve(base, *path);
        if (!std::filesystem::exists(p.replay_path))
            rd.issue(child(ptr, "path"), "replay file '" + p.replay_path.string() + "' does not exist");
    }
    spec.disturbance = p;
}

}  // namespace

ExperimentSpec parse_spec_text(const std::string& text, const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw SpecError(std::vector<SpecIssue>{{"", std::string("not valid JSON: ") + e.what()}});
    }
    Reader rd;
    ExperimentSpec spec;
    if (!rd.object(root, "")) throw SpecError(rd.issues);
    rd.allow_only(root, "",
                  {"name", "scenario", "system", "controller", "cost", "disturbance", "T", "optimizer", "eta",
                   "eta_rule", "eta_scale", "H", "seed", "output_dir", "ons_delta", "linear_grid",
                   "linear_candidates", "sufficiency", "hindsight"});

    if (auto name = rd.string(root, "", "name", true)) {
        if (!filesystem_safe(*name))
            rd.issue("/name", "name must be non-empty and use only letters, digits, '_', '-' or '.'");
        spec.name = *name;
    }
    if (auto sc = rd.string(root, "", "scenario", false)) {
        if (*sc == "control")
            spec.scenario = Scenario::control;
        else if (*sc == "ons_counterexample")
            spec.scenario = Scenario::ons_counterexample;
        else
            rd.issue("/scenario", "scenario must be 'control' or 'ons_counterexample'");
    }
    const bool control = spec.scenario == Scenario::control;

    if (const json* T = rd.field(root, "", "T", true)) {
        if (!T->is_array() || T->empty()) {
            rd.issue("/T", "expected a non-empty list of horizons");
        } else {
            for (std::size_t i = 0; i < T->size(); ++i) {
                const json& v = (*T)[i];
                const std::string p = "/T/" + std::to_string(i);
                if (!v.is_number_integer() || v.get<std::int64_t>() < 2) {
                    rd.issue(p, "horizon must be an integer >= 2");
                    continue;
                }
                const auto t = v.get<std::int64_t>();
                if (!spec.T.empty() && t <= spec.T.back()) rd.issue(p, "horizons must be strictly increasing");
                spec.T.push_back(t);
            }
        }
    }

    if (const json* s = rd.field(root, "", "system", control)) parse_system(rd, *s, spec, base_dir);
    if (const json* c = rd.field(root, "", "controller", control)) parse_controller(rd, *c, spec);
    if (const json* c = rd.field(root, "", "cost", control)) parse_cost(rd, *c, spec);
    if (const json* d = rd.field(root, "", "disturbance", control)) parse_disturbance(rd, *d, spec, base_dir);

    if (auto o = rd.string(root, "", "optimizer", false)) {
        try {
            spec.optimizer = optimizer_from_string(*o);
        } catch (const std::exception&) {
            rd.issue("/optimizer", "optimizer must be 'ogd_m' or 'ons_restricted'");
        }
    }
    if (auto e = rd.positive(root, "", "eta", false)) spec.eta = *e;
    if (auto r = rd.string(root, "", "eta_rule", false)) {
        try {
            spec.eta_rule = eta_rule_from_string(*r);
        } catch (const std::exception&) {
            rd.issue("/eta_rule", "eta_rule must be 'oco_memory' or 'sqrt_horizon'");
        }
    }
    if (auto s = rd.positive(root, "", "eta_scale", false)) spec.eta_scale = *s;
    if (auto h = rd.integer(root, "", "H", false, 1)) spec.H = static_cast<int>(*h);
    if (auto s = rd.integer(root, "", "seed", false, 0)) spec.seed = static_cast<std::uint64_t>(*s);
    if (auto o = rd.string(root, "", "output_dir", false)) spec.output_dir = *o;
    if (auto d = rd.positive(root, "", "ons_delta", false)) spec.ons_delta = *d;

    const bool scalar = spec.system && spec.system->A.rows() == 1 && spec.system->B.cols() == 1;
    if (const json* g = rd.field(root, "", "linear_grid", false)) {
        if (rd.object(*g, "/linear_grid")) {
            rd.allow_only(*g, "/linear_grid", {"lo", "hi", "n"});
            const auto lo = rd.number(*g, "/linear_grid", "lo", true);
            const auto hi = rd.number(*g, "/linear_grid", "hi", true);
            const auto n = rd.integer(*g, "/linear_grid", "n", true, 1);
            if (spec.system && !scalar) rd.issue("/linear_grid", "a gain grid needs a scalar system");
            if (lo && hi && n) {
                if (*lo > *hi)
                    rd.issue("/linear_grid/hi", "hi must be >= lo");
                else if (scalar)
                    spec.linear_candidates = scalar_gain_grid(*lo, *hi, static_cast<int>(*n));
            }
        }
    }
    if (const json* cands = rd.field(root, "", "linear_candidates", false)) {
        if (!cands->is_array() || cands->empty()) {
            rd.issue("/linear_candidates", "expected a non-empty list of gain matrices");
        } else {
            for (std::size_t i = 0; i < cands->size(); ++i) {
                const std::string p = "/linear_candidates/" + std::to_string(i);
                if (auto K = rd.matrix_value((*cands)[i], p)) {
                    if (spec.system && (K->rows() != spec.system->B.cols() || K->cols() != spec.system->A.rows()))
                        rd.issue(p, "candidate must be d_u x d_x");
                    else
                        spec.linear_candidates.push_back(*K);
                }
            }
        }
    }
    if (const json* s = rd.field(root, "", "sufficiency", false)) {
        if (rd.object(*s, "/sufficiency")) {
            rd.allow_only(*s, "/sufficiency", {"K_star"});
            if (auto K = rd.matrix(*s, "/sufficiency", "K_star", true)) {
                if (spec.system && (K->rows() != spec.system->B.cols() || K->cols() != spec.system->A.rows()))
                    rd.issue("/sufficiency/K_star", "K_star must be d_u x d_x");
                else
                    spec.K_star = *K;
            }
        }
    }
    if (const json* h = rd.field(root, "", "hindsight", false)) {
        if (rd.object(*h, "/hindsight")) {
            rd.allow_only(*h, "/hindsight", {"iterations", "restarts"});
            if (auto v = rd.integer(*h, "/hindsight", "iterations", false, 1)) spec.hindsight_iterations = static_cast<int>(*v);
            if (auto v = rd.integer(*h, "/hindsight", "restarts", false, 1)) spec.hindsight_restarts = static_cast<int>(*v);
        }
    }

    if (control && spec.cost.kind == CostSpec::Kind::counterexample && spec.system &&
        (spec.system->A.rows() != 1))
        rd.issue("/cost/type", "counterexample cost needs a one-dimensional state");

    if (!rd.issues.empty()) throw SpecError(rd.issues);
    return spec;
}

ExperimentSpec parse_spec(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read spec file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_spec_text(ss.str(), path.parent_path());
}

LdsSystem build_system(const ExperimentSpec& spec) {
    if (!spec.system) throw std::invalid_argument("spec has no system");
    const auto& s = *spec.system;
    return LdsSystem(s.A, s.B, s.kappa_A, s.kappa_B, s.W);
}

StabilizingController build_controller(const ExperimentSpec& spec) {
    if (!spec.controller) throw std::invalid_argument("spec has no controller");
    const auto& c = *spec.controller;
    return StabilizingController(c.K, c.kappa, c.gamma, c.certificate);
}

CostPtr build_cost(const ExperimentSpec& spec, TimeIndex T) {
    if (spec.cost.kind == CostSpec::Kind::counterexample) {
        const int du = spec.system ? static_cast<int>(spec.system->B.cols()) : 1;
        return make_counterexample_cost(T, du);
    }
    return make_quadratic_cost(spec.cost.Q, spec.cost.R);
}

DisturbanceGenerator build_generator(const ExperimentSpec& spec) {
    if (!spec.system) throw std::invalid_argument("spec has no system");
    return DisturbanceGenerator(spec.disturbance, static_cast<int>(spec.system->A.rows()), spec.system->W, spec.seed);
}

}  // namespace gpc
