#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace gpc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using TimeIndex = std::int64_t;

/// Largest singular value by power iteration on MᵀM.
///
/// Used for bound checks at small dimensions where a full SVD is not needed.
/// Stops after `max_iter` sweeps or when the relative change of the estimate
/// drops below `tol`.
double spectral_norm(const Mat& m, int max_iter = 50, double tol = 1e-10);

/// Largest singular value from a Jacobi SVD. Throws NumericalError if the
/// decomposition produces non-finite values.
double spectral_norm_svd(const Mat& m);

/// Integer matrix power by repeated squaring; `k >= 0`.
Mat matrix_power(const Mat& m, int k);

bool is_symmetric(const Mat& m, double tol = 1e-12);

/// Seeded 64-bit engine. Every random draw in the library comes from an
/// engine built here so results depend only on (seed, stream).
using Rng = std::mt19937_64;
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

}  // namespace gpc
