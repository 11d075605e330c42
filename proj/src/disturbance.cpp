#include "gpc/disturbance.hpp"

#include "gpc/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace gpc {

DisturbanceBuffer::DisturbanceBuffer(int dim, std::size_t capacity, double W)
    : slots_(capacity, Vec::Zero(dim)), zero_(Vec::Zero(dim)), W_(W) {
    if (dim < 1) throw DimensionError("disturbance dimension must be >= 1");
    if (capacity < 1) throw std::invalid_argument("buffer capacity must be >= 1");
}

void DisturbanceBuffer::push(const Vec& w) {
    if (w.size() != zero_.size()) throw DimensionError("disturbance dimension mismatch");
    // Recovered disturbances carry round-off from x_{t+1} − Ax − Bu.
    if (w.norm() > W_ * (1.0 + 1e-9) + 1e-12)
        throw std::invalid_argument("disturbance norm " + std::to_string(w.norm()) + " exceeds W=" +
                                    std::to_string(W_) + " at t=" + std::to_string(count_));
    slots_[static_cast<std::size_t>(count_) % slots_.size()] = w;
    ++count_;
}

const Vec& DisturbanceBuffer::lookup(TimeIndex s) const {
    if (s < 0) return zero_;
    if (s >= count_) throw std::out_of_range("disturbance w_" + std::to_string(s) + " not observed yet");
    if (count_ - s > static_cast<TimeIndex>(slots_.size()))
        throw std::out_of_range("disturbance w_" + std::to_string(s) + " evicted from buffer");
    return slots_[static_cast<std::size_t>(s) % slots_.size()];
}

const char* to_string(DisturbanceKind kind) {
    switch (kind) {
        case DisturbanceKind::zero: return "zero";
        case DisturbanceKind::constant: return "constant";
        case DisturbanceKind::gaussian_clipped: return "gaussian_clipped";
        case DisturbanceKind::uniform: return "uniform";
        case DisturbanceKind::sinusoidal: return "sinusoidal";
        case DisturbanceKind::sign_alternating: return "sign_alternating";
        case DisturbanceKind::replay_from_file: return "replay_from_file";
    }
    return "?";
}

DisturbanceKind disturbance_kind_from_string(const std::string& name) {
    for (auto k : {DisturbanceKind::zero, DisturbanceKind::constant, DisturbanceKind::gaussian_clipped,
                   DisturbanceKind::uniform, DisturbanceKind::sinusoidal, DisturbanceKind::sign_alternating,
                   DisturbanceKind::replay_from_file}) {
        if (name == to_string(k)) return k;
    }
    throw std::invalid_argument("unknown disturbance kind '" + name + "'");
}

Vec clip_to_ball(Vec w, double W) {
    double n = w.norm();
    if (n <= W) return w;
    w *= W / n;
    // Scaling can overshoot by an ulp; shave until the bound holds exactly.
    while ((n = w.norm()) > W) w *= std::nextafter(W / n, 0.0);
    return w;
}

DisturbanceGenerator::DisturbanceGenerator(DisturbanceParams params, int dim, double W, std::uint64_t seed)
    : params_(std::move(params)), dim_(dim), W_(W), seed_(seed) {
    if (dim_ < 1) throw DimensionError("disturbance dimension must be >= 1");
    if (!(W_ > 0.0)) throw std::invalid_argument("W must be positive");
    switch (params_.kind) {
        case DisturbanceKind::constant:
            if (params_.value.size() != dim_) throw DimensionError("constant disturbance has wrong dimension");
            break;
        case DisturbanceKind::gaussian_clipped:
            if (!(params_.sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
            break;
        case DisturbanceKind::uniform:
            if (!(params_.half_width > 0.0)) throw std::invalid_argument("half_width must be positive");
            break;
        case DisturbanceKind::sinusoidal:
            if (!(params_.period > 0.0)) throw std::invalid_argument("period must be positive");
            break;
        case DisturbanceKind::replay_from_file:
            replay_ = read_replay_csv(params_.replay_path, dim_);
            break;
        default:
            break;
    }
    if (params_.amplitude < 0.0) params_.amplitude = W_;
}

Vec DisturbanceGenerator::emit(TimeIndex t) const {
    if (t < 0) throw std::invalid_argument("disturbance time must be >= 0");
    Vec w = Vec::Zero(dim_);
    switch (params_.kind) {
        case DisturbanceKind::zero:
            break;
        case DisturbanceKind::constant:
            w = params_.value;
            break;
        case DisturbanceKind::gaussian_clipped: {
            // A fresh engine per step keeps emit() random-access in t.
            Rng rng = make_rng(seed_, static_cast<std::uint64_t>(t));
            std::normal_distribution<double> n(0.0, params_.sigma);
            for (int k = 0; k < dim_; ++k) w(k) = n(rng);
            break;
        }
        case DisturbanceKind::uniform: {
            Rng rng = make_rng(seed_, static_cast<std::uint64_t>(t));
            std::uniform_real_distribution<double> u(-params_.half_width, params_.half_width);
            for (int k = 0; k < dim_; ++k) w(k) = u(rng);
            break;
        }
        case DisturbanceKind::sinusoidal: {
            const double base = 2.0 * std::numbers::pi * static_cast<double>(t) / params_.period + params_.phase;
            for (int k = 0; k < dim_; ++k) w(k) = params_.amplitude * std::sin(base + k * std::numbers::pi / 2.0);
            break;
        }
        case DisturbanceKind::sign_alternating:
            w(0) = (t % 2 == 0 ? 1.0 : -1.0) * params_.amplitude;
            break;
        case DisturbanceKind::replay_from_file:
            if (t >= static_cast<TimeIndex>(replay_.size())) throw ReplayExhausted(t);
            w = replay_[static_cast<std::size_t>(t)];
            break;
    }
    return clip_to_ball(std::move(w), W_);
}

std::vector<Vec> DisturbanceGenerator::stream(TimeIndex T) const {
    std::vector<Vec> out;
    out.reserve(static_cast<std::size_t>(std::max<TimeIndex>(T, 0)));
    for (TimeIndex t = 0; t < T; ++t) out.push_back(emit(t));
    return out;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_double(const std::string& s, std::size_t row, std::size_t col) {
    std::size_t b = 0, e = s.size();
    while (b < e && s[b] == ' ') ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\r')) --e;
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data() + b, s.data() + e, v);
    if (ec != std::errc() || p != s.data() + e)
        throw IoError("replay CSV: bad number '" + s + "' at row " + std::to_string(row) + ", column " +
                      std::to_string(col));
    return v;
}

}  // namespace

std::vector<Vec> read_replay_csv(const std::filesystem::path& path, int dim) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open replay file " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError("replay file " + path.string() + " is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv(line);
    if (static_cast<int>(header.size()) != dim) throw IoError("replay CSV header has wrong column count");
    for (int k = 0; k < dim; ++k) {
        if (header[static_cast<std::size_t>(k)] != "w" + std::to_string(k))
            throw IoError("replay CSV header must be w0,...,w" + std::to_string(dim - 1));
    }
    std::vector<Vec> rows;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv(line);
        if (static_cast<int>(cells.size()) != dim)
            throw IoError("replay CSV row " + std::to_string(row) + " has wrong column count");
        Vec w(dim);
        for (int k = 0; k < dim; ++k) w(k) = parse_double(cells[static_cast<std::size_t>(k)], row, k);
        rows.push_back(std::move(w));
    }
    return rows;
}

void write_replay_csv(const std::filesystem::path& path, const std::vector<Vec>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write replay file " + path.string());
    const int dim = rows.empty() ? 1 : static_cast<int>(rows.front().size());
    for (int k = 0; k < dim; ++k) out << (k ? "," : "") << 'w' << k;
    out << '\n';
    char buf[64];
    for (const auto& w : rows) {
        for (int k = 0; k < w.size(); ++k) {
            auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), w(k));
            (void)ec;
            if (k) out << ',';
            out.write(buf, p - buf);
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing replay file " + path.string());
}

}  // namespace gpc
