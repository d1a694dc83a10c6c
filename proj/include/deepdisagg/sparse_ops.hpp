#pragma once

#include "deepdisagg/core_model.hpp"
#include "deepdisagg/random.hpp"

#include <optional>
#include <vector>

namespace deepdisagg {

struct IstaOptions {
  int max_iters = 300;
  // Stop when |f_prev - f| <= tol * f_prev.
  double tol = 1e-6;
  bool nonneg = false;
  // Overrides spectral_step(D) when set.
  std::optional<double> step;
};

struct IstaResult {
  SparseCode code;
  // Objective of the starting point followed by one value per iteration.
  std::vector<double> objective_trace;
  int iterations = 0;
};

double soft_threshold(double v, double theta);
double nonneg_soft_threshold(double v, double theta);

// ||X - D Z||_F^2 + lambda * ||Z||_1
double lasso_objective(const Matrix& D, const Matrix& X, const Matrix& Z, double lambda);

// 1 / (2 sigma_max(D)^2), the reciprocal Lipschitz constant of grad ||X - DZ||^2.
double spectral_step(const Matrix& D);

// Proximal gradient for min ||X - DZ||_F^2 + lambda ||Z||_1 (Z >= 0 when
// opts.nonneg). Monotone: each iterate has objective no higher than the last.
SparseCode ista_solve(const Matrix& D, const Matrix& X, double lambda, const IstaOptions& opts = {});
IstaResult ista_solve_traced(const Matrix& D, const Matrix& X, double lambda, const IstaOptions& opts,
                             const Matrix* warm_start = nullptr);

// Least-squares solves. With no ridge given, the exact minimum-norm minimizer
// is returned (rank-deficient systems included). With a ridge eps, the
// Tikhonov system (G + eps I) is solved instead.
Matrix lsq_code(const Matrix& D, const Matrix& X, std::optional<double> ridge = std::nullopt);
Matrix lsq_dictionary(const Matrix& X, const Matrix& Z, std::optional<double> ridge = std::nullopt);

// 1e-8 * trace(G) / k for a k x k Gram matrix G.
double default_ridge(const Matrix& gram);

struct NormalizedColumns {
  Matrix matrix;
  // Original column norms; 0 marks a column that was re-drawn at random.
  Vector scales;
};

NormalizedColumns normalize_columns(const Matrix& D, Rng& rng);

// Scales rows of `code` by `scales` so that D_unit * code' == D * code.
void rescale_rows(Matrix& code, const Vector& scales);

void require_finite(const Matrix& m, const char* what);

}  // namespace deepdisagg
