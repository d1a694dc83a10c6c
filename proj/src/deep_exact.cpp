#include "deepdisagg/deep_exact.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace deepdisagg {

std::string_view to_string(ExactInit init) {
  return init == ExactInit::random ? "random" : "from_greedy";
}

ExactInit parse_exact_init(std::string_view text) {
  if (text == "random") return ExactInit::random;
  if (text == "from_greedy" || text == "greedy") return ExactInit::from_greedy;
  throw std::invalid_argument("unknown exact init '" + std::string(text) + "'");
}

void validate_config(const ExactConfig& cfg) {
  if (cfg.layer_widths.empty()) throw std::invalid_argument("exact: at least one layer required");
  for (Index w : cfg.layer_widths) {
    if (w < 1) throw std::invalid_argument("exact: layer widths must be >= 1");
  }
  if (!(cfg.lambda > 0.0)) throw std::invalid_argument("exact: lambda must be positive");
  if (cfg.max_iters < 1) throw std::invalid_argument("exact: max_iters must be >= 1");
  if (!(cfg.tol >= 0.0)) throw std::invalid_argument("exact: tol must be >= 0");
  if (cfg.greedy_iters < 1) throw std::invalid_argument("exact: greedy_iters must be >= 1");
  if (!cfg.mu.empty() && cfg.mu.size() + 1 != cfg.layer_widths.size()) {
    throw std::invalid_argument("exact: expected " + std::to_string(cfg.layer_widths.size() - 1) +
                                " mu values, got " + std::to_string(cfg.mu.size()));
  }
  for (double m : cfg.mu) {
    if (!(m > 0.0)) throw std::invalid_argument("exact: mu values must be positive");
  }
}

std::vector<double> resolved_mu(const ExactConfig& cfg) {
  if (!cfg.mu.empty()) return cfg.mu;
  return std::vector<double>(cfg.layer_widths.size() - 1, 1.0);
}

Matrix solve_stacked_lsq(const WeightedTerm& top, const WeightedTerm& bottom, std::optional<double> ridge) {
  const Index k = top.design.cols();
  if (bottom.design.cols() != k || top.design.rows() != top.target.rows() ||
      bottom.design.rows() != bottom.target.rows() || top.target.cols() != bottom.target.cols()) {
    throw std::invalid_argument("solve_stacked_lsq: non-conformable terms");
  }
  if (!(top.weight >= 0.0) || !(bottom.weight >= 0.0)) {
    throw std::invalid_argument("solve_stacked_lsq: weights must be non-negative");
  }
  if (ridge) {
    Matrix normal = top.weight * top.design.transpose() * top.design +
                    bottom.weight * bottom.design.transpose() * bottom.design;
    normal.diagonal().array() += *ridge;
    const Matrix rhs = top.weight * top.design.transpose() * top.target +
                       bottom.weight * bottom.design.transpose() * bottom.target;
    return normal.ldlt().solve(rhs);
  }
  const Index r1 = top.design.rows();
  const Index r2 = bottom.design.rows();
  const double s1 = std::sqrt(top.weight);
  const double s2 = std::sqrt(bottom.weight);
  Matrix design(r1 + r2, k);
  design << s1 * top.design, s2 * bottom.design;
  Matrix target(r1 + r2, top.target.cols());
  target << s1 * top.target, s2 * bottom.target;
  return design.completeOrthogonalDecomposition().solve(target);
}

Matrix bregman_update(const Matrix& Y, const Matrix& D_next, const Matrix& next_code, const Matrix& B) {
  if (D_next.cols() != next_code.rows() || D_next.rows() != Y.rows() || next_code.cols() != Y.cols() ||
      B.rows() != Y.rows() || B.cols() != Y.cols()) {
    throw std::invalid_argument("bregman_update: non-conformable arguments");
  }
  return Y - D_next * next_code - B;
}

Matrix layer_target(const ExactState& state, const Matrix& X, std::size_t j) {
  if (j == 0) return X;
  return state.aux[j - 1] - state.bregman[j - 1];
}

const Matrix& layer_output(const ExactState& state, std::size_t j) {
  return j + 1 < state.n_layers() ? state.aux[j] : state.code;
}

void solve_dictionary_step(ExactState& state, const Matrix& X, std::size_t j) {
  state.layers[j] = lsq_dictionary(layer_target(state, X, j), layer_output(state, j));
}

void solve_auxiliary_step(ExactState& state, const Matrix& X, const std::vector<double>& mu, std::size_t j) {
  if (j + 1 >= state.n_layers()) throw std::invalid_argument("auxiliary step: no auxiliary for last layer");
  const Matrix target = layer_target(state, X, j);
  const double top_weight = j == 0 ? 1.0 : mu[j - 1];
  const Matrix coupled = state.layers[j + 1] * layer_output(state, j + 1) + state.bregman[j];
  const Matrix identity = Matrix::Identity(state.aux[j].rows(), state.aux[j].rows());
  state.aux[j] = solve_stacked_lsq({state.layers[j], target, top_weight}, {identity, coupled, mu[j]});
}

void solve_code_step(ExactState& state, const Matrix& X, double lambda, const std::vector<double>& mu,
                     IstaOptions ista) {
  const std::size_t last = state.n_layers() - 1;
  // mu_{N-1} ||T - D_N Z||^2 + lambda ||Z||_1 has the minimizer of the
  // lasso with weight lambda / mu_{N-1}.
  const double weight = last == 0 ? lambda : lambda / mu[last - 1];
  const Matrix target = layer_target(state, X, last);
  state.code = ista_solve_traced(state.layers[last], target, weight, ista, &state.code).code.matrix;
}

void bregman_step(ExactState& state) {
  for (std::size_t j = 0; j + 1 < state.n_layers(); ++j) {
    state.bregman[j] = bregman_update(state.aux[j], state.layers[j + 1], layer_output(state, j + 1),
                                      state.bregman[j]);
  }
}

void normalize_state(ExactState& state, Rng& rng) {
  for (std::size_t j = 0; j < state.n_layers(); ++j) {
    auto normalized = normalize_columns(state.layers[j], rng);
    state.layers[j] = std::move(normalized.matrix);
    const Vector& scales = normalized.scales;
    if (j + 1 < state.n_layers()) {
      rescale_rows(state.aux[j], scales);
      rescale_rows(state.bregman[j], scales);
      rescale_rows(state.layers[j + 1], scales);
    } else {
      rescale_rows(state.code, scales);
    }
  }
}

std::vector<double> feasibility_gaps(const ExactState& state) {
  std::vector<double> gaps;
  for (std::size_t j = 0; j + 1 < state.n_layers(); ++j) {
    gaps.push_back((state.aux[j] - state.layers[j + 1] * layer_output(state, j + 1)).norm());
  }
  return gaps;
}

namespace {

double state_objective(const Matrix& X, const ExactState& state, double lambda) {
  return deep_objective(X, state.layers, state.code, lambda);
}

void require_finite_state(const ExactState& state, int iteration) {
  bool ok = state.code.allFinite();
  for (const auto& m : state.layers) ok = ok && m.allFinite();
  for (const auto& m : state.aux) ok = ok && m.allFinite();
  for (const auto& m : state.bregman) ok = ok && m.allFinite();
  if (!ok) throw std::domain_error("exact: non-finite iterate at iteration " + std::to_string(iteration));
}

ExactResult exact_single_layer(const Matrix& X, const ExactConfig& cfg) {
  ShallowConfig shallow;
  shallow.n_atoms = cfg.layer_widths.front();
  shallow.lambda = cfg.lambda;
  shallow.outer_iters = cfg.max_iters;
  shallow.nonneg_codes = cfg.nonneg_final;
  shallow.seed = cfg.seed;
  shallow.ista = cfg.ista;
  auto fit = learn_shallow(X, shallow);

  ExactResult result;
  result.initial_objective = X.squaredNorm();
  for (const auto& step : fit.trace) {
    if (step.kind == StepKind::normalize) {
      result.trace.push_back({step.iteration + 1, step.objective_after, {}});
    }
  }
  result.best_objective = result.trace.empty() ? result.initial_objective : result.trace.back().objective;
  result.best_iteration = static_cast<int>(result.trace.size());
  result.state.layers = {fit.dictionary.matrix};
  result.state.code = fit.code.matrix;
  result.dictionary = DeepDictionary({std::move(fit.dictionary)});
  result.code = std::move(fit.code);
  return result;
}

ExactState initial_state(const Matrix& X, const ExactConfig& cfg, const std::vector<double>& mu, Rng& rng) {
  const std::size_t n = cfg.layer_widths.size();
  ExactState state;
  if (cfg.init == ExactInit::from_greedy) {
    GreedyConfig greedy;
    greedy.layer_widths = cfg.layer_widths;
    greedy.lambda = cfg.lambda;
    greedy.per_layer_iters = cfg.greedy_iters;
    greedy.nonneg_final = cfg.nonneg_final;
    greedy.seed = cfg.seed;
    greedy.ista = cfg.ista;
    auto fit = train_greedy(X, greedy);
    for (auto& layer : fit.dictionary.layers) state.layers.push_back(std::move(layer.matrix));
    state.code = std::move(fit.code.matrix);
  } else {
    Index rows = X.rows();
    for (Index width : cfg.layer_widths) {
      state.layers.push_back(normalize_columns(random_normal(rows, width, rng), rng).matrix);
      rows = width;
    }
  }

  Matrix input = X;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    state.aux.push_back(lsq_code(state.layers[j], input));
    state.bregman.push_back(Matrix::Zero(cfg.layer_widths[j], X.cols()));
    input = state.aux.back();
  }
  if (cfg.init == ExactInit::random) {
    IstaOptions ista = cfg.ista;
    ista.nonneg = cfg.nonneg_final;
    state.code = ista_solve(state.layers.back(), input, cfg.lambda / mu.back(), ista).matrix;
  }
  return state;
}

}  // namespace

ExactResult train_exact(const Matrix& X, const ExactConfig& cfg) {
  validate_config(cfg);
  if (X.rows() < 1 || X.cols() < 1) throw std::invalid_argument("exact: empty data matrix");
  require_finite(X, "training data");
  if (cfg.layer_widths.size() == 1) return exact_single_layer(X, cfg);

  const std::vector<double> mu = resolved_mu(cfg);
  const std::size_t n = cfg.layer_widths.size();
  Rng rng = make_rng(cfg.seed, 1);
  IstaOptions ista = cfg.ista;
  ista.nonneg = cfg.nonneg_final;

  ExactState state = initial_state(X, cfg, mu, rng);
  ExactResult result;
  result.initial_objective = state_objective(X, state, cfg.lambda);
  result.best_objective = result.initial_objective;
  result.state = state;

  double previous = result.initial_objective;
  int quiet = 0;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    for (std::size_t j = 0; j + 1 < n; ++j) {
      solve_dictionary_step(state, X, j);
      solve_auxiliary_step(state, X, mu, j);
    }
    solve_dictionary_step(state, X, n - 1);
    solve_code_step(state, X, cfg.lambda, mu, ista);
    bregman_step(state);
    normalize_state(state, rng);
    require_finite_state(state, it);

    const double objective = state_objective(X, state, cfg.lambda);
    result.trace.push_back({it, objective, feasibility_gaps(state)});
    if (objective < result.best_objective) {
      result.best_objective = objective;
      result.best_iteration = it;
      result.state = state;
    }

    const double scale = std::max(std::abs(previous), std::numeric_limits<double>::min());
    const bool small_change = std::abs(previous - objective) / scale < cfg.tol;
    quiet = small_change ? quiet + 1 : 0;
    previous = objective;
    if (quiet >= ExactConfig::kConvergenceWindow) {
      result.converged = true;
      break;
    }
  }

  std::vector<LayerDictionary> layers;
  for (const auto& m : result.state.layers) layers.push_back(LayerDictionary{m, true});
  result.dictionary = DeepDictionary(std::move(layers));
  result.code = SparseCode{result.state.code, cfg.nonneg_final, cfg.lambda};
  return result;
}

void write_trace_csv(std::ostream& out, const std::vector<ExactIteration>& trace) {
  std::size_t n_gaps = trace.empty() ? 0 : trace.front().gaps.size();
  out << "iter,objective";
  for (std::size_t j = 0; j < n_gaps; ++j) out << ",gap_" << (j + 1);
  out << '\n';
  const auto old_precision = out.precision(17);
  for (const auto& row : trace) {
    out << row.iteration << ',' << row.objective;
    for (double g : row.gaps) out << ',' << g;
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace deepdisagg
