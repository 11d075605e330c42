#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gpc {

/// Mismatched vector/matrix shapes. Raised when objects are constructed or
/// combined, never deferred to a later numerical failure.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not produce a trustworthy answer (failed SVD,
/// singular system, diverging state bound).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The closed loop left the region guaranteed by the state bound. Carries the
/// step and the offending norm so the harness can emit a diagnostic.
class StateBoundAbort : public NumericalError {
public:
    StateBoundAbort(std::int64_t t, double norm, double limit);

    std::int64_t step() const { return t_; }
    double norm() const { return norm_; }
    double limit() const { return limit_; }

private:
    std::int64_t t_;
    double norm_;
    double limit_;
};

/// Replay stream ran out of rows.
class ReplayExhausted : public std::out_of_range {
public:
    explicit ReplayExhausted(std::int64_t t);
    std::int64_t step() const { return t_; }

private:
    std::int64_t t_;
};

struct SpecIssue {
    std::string pointer;  ///< JSON pointer into the offending document
    std::string message;
};

/// Experiment spec failed validation. All problems found are reported at once.
class SpecError : public std::runtime_error {
public:
    explicit SpecError(std::vector<SpecIssue> issues);
    const std::vector<SpecIssue>& issues() const { return issues_; }

private:
    std::vector<SpecIssue> issues_;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gpc
