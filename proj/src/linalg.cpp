#include "gpc/linalg.hpp"

#include "gpc/error.hpp"

#include <cmath>
#include <sstream>

namespace gpc {

StateBoundAbort::StateBoundAbort(std::int64_t t, double norm, double limit)
    : NumericalError([&] {
          std::ostringstream os;
          os << "state norm " << norm << " at t=" << t << " exceeds abort limit " << limit
             << " (10x the state bound D); check that K is strongly stable for this system";
          return os.str();
      }()),
      t_(t), norm_(norm), limit_(limit) {}

ReplayExhausted::ReplayExhausted(std::int64_t t)
    : std::out_of_range("disturbance replay exhausted at t=" + std::to_string(t)), t_(t) {}

SpecError::SpecError(std::vector<SpecIssue> issues)
    : std::runtime_error([&] {
          std::ostringstream os;
          os << "invalid experiment spec:";
          for (const auto& i : issues) os << "\n  " << (i.pointer.empty() ? "/" : i.pointer) << ": " << i.message;
          return os.str();
      }()),
      issues_(std::move(issues)) {}

double spectral_norm(const Mat& m, int max_iter, double tol) {
    if (m.size() == 0) return 0.0;
    // Rescale so tiny or huge entries don't under/overflow in the Gram matrix.
    const double scale = m.cwiseAbs().maxCoeff();
    if (scale == 0.0 || !std::isfinite(scale)) return scale;
    const Mat ms = m / scale;
    const Mat gram = ms.transpose() * ms;
    // Start from the heaviest column direction so the initial vector is
    // rarely orthogonal to the top singular vector.
    Eigen::Index best = 0;
    gram.diagonal().maxCoeff(&best);
    Vec v = gram.col(best);
    if (v.norm() == 0.0) return 0.0;
    v += Vec::Constant(v.size(), 1e-3 * v.norm());
    v.normalize();

    double estimate = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Vec next = gram * v;
        const double n = next.norm();
        if (n == 0.0) return 0.0;
        const double rq = v.dot(next);  // Rayleigh quotient of MᵀM
        v = next / n;
        if (std::abs(rq - estimate) <= tol * std::max(rq, 1e-300)) {
            estimate = rq;
            break;
        }
        estimate = rq;
    }
    return scale * std::sqrt(std::max(estimate, 0.0));
}

double spectral_norm_svd(const Mat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& s = svd.singularValues();
    if (!s.allFinite()) throw NumericalError("SVD produced non-finite singular values");
    return s.size() > 0 ? s(0) : 0.0;
}

Mat matrix_power(const Mat& m, int k) {
    if (m.rows() != m.cols()) throw DimensionError("matrix_power needs a square matrix");
    if (k < 0) throw std::invalid_argument("matrix_power needs k >= 0");
    Mat result = Mat::Identity(m.rows(), m.cols());
    Mat base = m;
    while (k > 0) {
        if (k & 1) result = result * base;
        k >>= 1;
        if (k > 0) base = base * base;
    }
    return result;
}

bool is_symmetric(const Mat& m, double tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

}  // namespace gpc
