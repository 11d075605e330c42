#pragma once

#include "gpc/linalg.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace gpc {

/// Ring of the most recent disturbances, addressed by absolute time.
///
/// Times before 0 read as the zero vector. Entries are checked against the
/// disturbance bound W on insertion.
class DisturbanceBuffer {
public:
    DisturbanceBuffer(int dim, std::size_t capacity, double W);

    void push(const Vec& w);

    /// w_s. Zero for s < 0; throws std::out_of_range for times not yet seen
    /// or already evicted.
    const Vec& lookup(TimeIndex s) const;

    /// Number of entries pushed so far, i.e. the time index of the next push.
    TimeIndex now() const { return count_; }
    std::size_t capacity() const { return slots_.size(); }
    int dim() const { return static_cast<int>(zero_.size()); }

private:
    std::vector<Vec> slots_;
    Vec zero_;
    TimeIndex count_ = 0;
    double W_;
};

enum class DisturbanceKind { zero, constant, gaussian_clipped, uniform, sinusoidal, sign_alternating, replay_from_file };

const char* to_string(DisturbanceKind kind);
DisturbanceKind disturbance_kind_from_string(const std::string& name);

/// Parameters for every generator kind; each kind reads only its own fields.
struct DisturbanceParams {
    DisturbanceKind kind = DisturbanceKind::zero;
    Vec value;                    ///< constant
    double sigma = 1.0;           ///< gaussian_clipped: per-coordinate std dev
    double half_width = 1.0;      ///< uniform: per-coordinate range [−h, h]
    double amplitude = -1.0;      ///< sinusoidal / sign_alternating; negative means W
    double period = 20.0;         ///< sinusoidal period in steps
    double phase = 0.0;           ///< sinusoidal phase offset (radians)
    std::filesystem::path replay_path;
};

/// Oblivious adversary: a deterministic function of (params, seed, t).
///
/// Sinusoidal: w_t[k] = a·sin(2πt/period + phase + kπ/2), so in two
/// dimensions the vector rotates with constant norm a. Sign-alternating:
/// (−1)^t·a·e₁. Every emitted vector is radially clipped to norm ≤ W.
class DisturbanceGenerator {
public:
    DisturbanceGenerator(DisturbanceParams params, int dim, double W, std::uint64_t seed);

    Vec emit(TimeIndex t) const;

    /// w_0 … w_{T−1}.
    std::vector<Vec> stream(TimeIndex T) const;

    DisturbanceKind kind() const { return params_.kind; }
    int dim() const { return dim_; }
    double W() const { return W_; }

private:
    DisturbanceParams params_;
    int dim_;
    double W_;
    std::uint64_t seed_;
    std::vector<Vec> replay_;
};

/// Radial projection onto the ball of radius W; the result satisfies
/// ‖w‖ ≤ W in floating point, not just mathematically.
Vec clip_to_ball(Vec w, double W);

/// Replay CSV: header `w0,...,w{d-1}`, one row per step, '.' decimals.
std::vector<Vec> read_replay_csv(const std::filesystem::path& path, int dim);
void write_replay_csv(const std::filesystem::path& path, const std::vector<Vec>& rows);

}  // namespace gpc
