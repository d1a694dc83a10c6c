#include "deepdisagg/sparse_ops.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace deepdisagg {

namespace {

void require_nonneg_theta(double theta) {
  if (!(theta >= 0.0)) throw std::invalid_argument("threshold must be non-negative");
}

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw std::domain_error(std::string("non-finite entries in ") + what);
}

double soft_threshold(double v, double theta) {
  require_nonneg_theta(theta);
  const double mag = std::abs(v) - theta;
  if (mag <= 0.0) return 0.0;
  return v > 0.0 ? mag : -mag;
}

double nonneg_soft_threshold(double v, double theta) {
  require_nonneg_theta(theta);
  return std::max(v - theta, 0.0);
}

double lasso_objective(const Matrix& D, const Matrix& X, const Matrix& Z, double lambda) {
  return (X - D * Z).squaredNorm() + lambda * Z.cwiseAbs().sum();
}

double spectral_step(const Matrix& D) {
  if (D.size() == 0 || D.isZero(0.0)) throw std::invalid_argument("spectral_step: zero matrix");
  // sigma_max^2 is the top eigenvalue of the smaller Gram matrix.
  const Matrix gram = D.rows() < D.cols() ? Matrix(D * D.transpose()) : Matrix(D.transpose() * D);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().maxCoeff();
  return 1.0 / (2.0 * top);
}

SparseCode ista_solve(const Matrix& D, const Matrix& X, double lambda, const IstaOptions& opts) {
  return ista_solve_traced(D, X, lambda, opts).code;
}

IstaResult ista_solve_traced(const Matrix& D, const Matrix& X, double lambda, const IstaOptions& opts,
                             const Matrix* warm_start) {
  if (D.rows() != X.rows()) {
    throw std::invalid_argument("ista_solve: dictionary " + shape(D) + " vs data " + shape(X));
  }
  if (!(lambda > 0.0)) throw std::invalid_argument("ista_solve: lambda must be positive");
  if (opts.max_iters < 1 || !(opts.tol >= 0.0)) throw std::invalid_argument("ista_solve: bad options");
  require_finite(D, "dictionary");
  require_finite(X, "data");

  IstaResult result;
  result.code.nonneg = opts.nonneg;
  result.code.lambda = lambda;

  Matrix Z;
  if (warm_start != nullptr) {
    if (warm_start->rows() != D.cols() || warm_start->cols() != X.cols()) {
      throw std::invalid_argument("ista_solve: warm start shape " + shape(*warm_start));
    }
    Z = *warm_start;
    if (opts.nonneg) Z = Z.cwiseMax(0.0);
  } else {
    Z = Matrix::Zero(D.cols(), X.cols());
  }

  if (D.isZero(0.0)) {
    // Only the penalty depends on Z; its minimizer is zero.
    Z.setZero();
    result.objective_trace.push_back(lasso_objective(D, X, Z, lambda));
    result.code.matrix = std::move(Z);
    return result;
  }

  const double step = opts.step.value_or(spectral_step(D));
  const double theta = step * lambda;
  const Matrix gram = D.transpose() * D;
  const Matrix corr = D.transpose() * X;

  double f = lasso_objective(D, X, Z, lambda);
  result.objective_trace.push_back(f);

  Matrix candidate(Z.rows(), Z.cols());
  for (int it = 0; it < opts.max_iters && f > 0.0; ++it) {
    candidate.noalias() = Z - (2.0 * step) * (gram * Z - corr);
    if (opts.nonneg) {
      candidate = candidate.unaryExpr([theta](double v) { return std::max(v - theta, 0.0); });
    } else {
      candidate = candidate.unaryExpr([theta](double v) {
        const double mag = std::abs(v) - theta;
        return mag <= 0.0 ? 0.0 : (v > 0.0 ? mag : -mag);
      });
    }
    const double f_new = lasso_objective(D, X, candidate, lambda);
    if (!std::isfinite(f_new)) throw std::domain_error("ista_solve: objective diverged");
    // Rounding can push a converged iterate up by a few ulps; keep the incumbent.
    if (f_new > f) break;
    const double decrease = f - f_new;
    Z.swap(candidate);
    f = f_new;
    result.objective_trace.push_back(f);
    ++result.iterations;
    if (decrease <= opts.tol * (f + decrease)) break;
  }

  result.code.matrix = std::move(Z);
  return result;
}

double default_ridge(const Matrix& gram) {
  if (gram.rows() == 0) return 0.0;
  return 1e-8 * gram.trace() / static_cast<double>(gram.rows());
}

Matrix lsq_code(const Matrix& D, const Matrix& X, std::optional<double> ridge) {
  if (D.rows() != X.rows()) {
    throw std::invalid_argument("lsq_code: dictionary " + shape(D) + " vs data " + shape(X));
  }
  if (ridge) {
    Matrix gram = D.transpose() * D;
    gram.diagonal().array() += *ridge;
    return gram.ldlt().solve(D.transpose() * X);
  }
  return D.completeOrthogonalDecomposition().solve(X);
}

Matrix lsq_dictionary(const Matrix& X, const Matrix& Z, std::optional<double> ridge) {
  if (X.cols() != Z.cols()) {
    throw std::invalid_argument("lsq_dictionary: data " + shape(X) + " vs code " + shape(Z));
  }
  if (ridge) {
    Matrix gram = Z * Z.transpose();
    gram.diagonal().array() += *ridge;
    return gram.ldlt().solve(Z * X.transpose()).transpose();
  }
  const Matrix zt = Z.transpose();
  return zt.completeOrthogonalDecomposition().solve(Matrix(X.transpose())).transpose();
}

NormalizedColumns normalize_columns(const Matrix& D, Rng& rng) {
  NormalizedColumns out{D, Vector::Zero(D.cols())};
  for (Index j = 0; j < D.cols(); ++j) {
    const double norm = D.col(j).norm();
    out.scales(j) = norm;
    if (norm > 0.0) {
      out.matrix.col(j) /= norm;
      continue;
    }
    Vector fresh = random_normal(D.rows(), 1, rng);
    while (fresh.norm() == 0.0) fresh = random_normal(D.rows(), 1, rng);
    out.matrix.col(j) = fresh / fresh.norm();
  }
  return out;
}

void rescale_rows(Matrix& code, const Vector& scales) {
  if (code.rows() != scales.size()) throw std::invalid_argument("rescale_rows: size mismatch");
  code = scales.asDiagonal() * code;
}

}  // namespace deepdisagg
