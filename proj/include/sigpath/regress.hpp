#ifndef SIGPATH_REGRESS_HPP
#define SIGPATH_REGRESS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sigpath/error.hpp"
#include "sigpath/parallel.hpp"
#include "sigpath/random.hpp"
#include "sigpath/signature.hpp"

namespace sigpath {

enum class FeatureMode { terminal, stopped };

// Trapezoidal quadrature weights on a sorted grid; they sum to the grid's span.
inline std::vector<double> trapezoid_weights(std::span<const double> times) {
  std::vector<double> w(times.size(), 0.0);
  if (times.size() == 1) {
    w[0] = 1.0;
    return w;
  }
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double h = times[k + 1] - times[k];
    w[k] += 0.5 * h;
    w[k + 1] += 0.5 * h;
  }
  return w;
}

// Rows are sample-major: rows_per_sample() consecutive rows per sample. Columns are all
// words of length <= level over the time-extended alphabet, in tensor storage order.
struct FeatureMatrix {
  std::size_t dim = 0;
  std::size_t level = 0;
  FeatureMode mode = FeatureMode::terminal;
  std::size_t samples = 0;
  std::vector<double> eval_times;    // stopped mode only
  std::vector<double> time_weights;  // one per row within a sample, {1} in terminal mode
  Eigen::MatrixXd values;

  std::size_t rows_per_sample() const noexcept { return mode == FeatureMode::terminal ? 1 : eval_times.size(); }
  std::size_t columns() const noexcept { return static_cast<std::size_t>(values.cols()); }

  // Features at a lower level are a column prefix.
  FeatureMatrix truncated(std::size_t n) const {
    detail::require(n <= level, "cannot raise the feature level by truncation");
    FeatureMatrix f{dim, n, mode, samples, eval_times, time_weights, values.leftCols(tensor_size(dim, n))};
    return f;
  }
};

// path_of(i) returns the time-extended path of sample i. Rows are filled in parallel and
// each row depends only on its sample.
template <class PathOf>
FeatureMatrix build_features_with(std::size_t samples, std::size_t dim, std::size_t level, FeatureMode mode,
                                  std::vector<double> eval_times, PathOf&& path_of) {
  detail::require(samples >= 1, "no samples");
  FeatureMatrix f;
  f.dim = dim;
  f.level = level;
  f.mode = mode;
  f.samples = samples;
  if (mode == FeatureMode::stopped) {
    detail::require(!eval_times.empty(), "stopped features need evaluation times");
    detail::require(std::is_sorted(eval_times.begin(), eval_times.end()), "evaluation times must be sorted");
    f.time_weights = trapezoid_weights(eval_times);
    f.eval_times = std::move(eval_times);
  } else {
    f.time_weights = {1.0};
  }
  const std::size_t per = f.rows_per_sample(), cols = tensor_size(dim, level);
  f.values.resize(static_cast<Eigen::Index>(samples * per), static_cast<Eigen::Index>(cols));
  parallel_for(samples, [&](std::size_t i) {
    const PiecewiseLinearPath x = path_of(i);
    detail::require(x.dim() == dim, "path dimension differs from feature dimension");
    auto put = [&](std::size_t row, const TruncatedTensor& g) {
      for (std::size_t c = 0; c < cols; ++c) f.values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c)) = g.data()[c];
    };
    if (mode == FeatureMode::terminal) {
      put(i, signature(x, level));
      return;
    }
    for (double t : f.eval_times)
      detail::require(t >= 0.0 && t <= x.horizon(), "evaluation time outside [0, T]");
    const auto stream = signature_stream(x, level);
    for (std::size_t k = 0; k < per; ++k) put(i * per + k, stream.at(f.eval_times[k]));
  });
  return f;
}

// Stopped mode with no eval_times uses the breakpoints of the first path.
inline FeatureMatrix build_features(std::span<const PiecewiseLinearPath> paths, std::size_t level, FeatureMode mode,
                                    std::vector<double> eval_times = {}) {
  detail::require(!paths.empty(), "no paths");
  const std::size_t dim = paths.front().dim();
  if (mode == FeatureMode::stopped && eval_times.empty()) eval_times = paths.front().partition().times();
  return build_features_with(paths.size(), dim, level, mode, std::move(eval_times),
                             [&](std::size_t i) -> const PiecewiseLinearPath& { return paths[i]; });
}

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Shuffle the sample indices; every fifth position of the shuffled order is held out.
inline Split split_samples(std::size_t samples, std::uint64_t seed) {
  const auto perm = seeded_permutation(samples, seed, 0x5e1ec7ull);
  Split s;
  for (std::size_t k = 0; k < samples; ++k) (k % 5 == 4 ? s.test : s.train).push_back(perm[k]);
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

// Integrated L^p error of the residuals of the listed samples:
// (mean_i sum_k w_k |r_{i,k}|^p)^{1/p}.
inline double lp_error_of_residuals(const FeatureMatrix& f, std::span<const double> residuals,
                                    std::span<const std::size_t> samples, double p) {
  detail::require(p >= 1.0, "p must be at least 1");
  detail::require(!samples.empty(), "no samples to evaluate");
  const std::size_t per = f.rows_per_sample();
  double total = 0.0;
  for (std::size_t i : samples) {
    double s = 0.0;
    for (std::size_t k = 0; k < per; ++k) s += f.time_weights[k] * std::pow(std::abs(residuals[i * per + k]), p);
    total += s;
  }
  return std::pow(total / static_cast<double>(samples.size()), 1.0 / p);
}

inline std::vector<double> predict(const Eigen::VectorXd& coeffs, const FeatureMatrix& f) {
  detail::require(static_cast<std::size_t>(coeffs.size()) == f.columns(), "coefficient count differs from columns");
  const Eigen::VectorXd out = f.values * coeffs;
  return {out.data(), out.data() + out.size()};
}

inline Eigen::VectorXd coefficients_of(const LinearFunctional& l, const FeatureMatrix& f) {
  detail::require(l.dim() == f.dim && l.level() <= f.level, "functional does not fit the feature layout");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(f.columns()));
  for (const auto& [w, v] : l.coefficients()) c(static_cast<Eigen::Index>(flat_index(w, f.dim))) = v;
  return c;
}

inline double lp_error(const LinearFunctional& l, const FeatureMatrix& f, std::span<const double> targets, double p,
                       std::span<const std::size_t> samples) {
  detail::require(targets.size() == f.samples * f.rows_per_sample(), "one target per feature row required");
  auto pred = predict(coefficients_of(l, f), f);
  for (std::size_t r = 0; r < pred.size(); ++r) pred[r] = targets[r] - pred[r];
  return lp_error_of_residuals(f, pred, samples, p);
}

struct FitReport {
  LinearFunctional functional{1, 0};
  double lambda = 0.0;
  double p = 2.0;
  double train_error = 0.0;
  std::optional<double> test_error;
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
  double residual_norm = 0.0;       // |(X'WX + lambda I) l - X'Wy|
  double residual_bound = 0.0;      // 1e-8 (1 + |X'Wy|)
  double gram_min_eigenvalue = 0.0;
  double gram_max_eigenvalue = 0.0;
  std::size_t rank = 0;
  std::vector<std::string> warnings;

  bool optimal() const noexcept { return residual_norm <= residual_bound; }
};

// Scale-aware default ridge: 1e-8 * trace(X'WX) / columns on the training rows.
inline double default_lambda(const FeatureMatrix& f, const Split& split) {
  const std::size_t per = f.rows_per_sample();
  double trace = 0.0;
  for (std::size_t i : split.train)
    for (std::size_t k = 0; k < per; ++k) trace += f.time_weights[k] * f.values.row(static_cast<Eigen::Index>(i * per + k)).squaredNorm();
  return 1e-8 * trace / static_cast<double>(f.columns());
}

// Weighted ridge least squares on the training samples, via a complete orthogonal
// decomposition of sqrt(W) X (stacked on sqrt(lambda) I when lambda > 0) plus one
// step of iterative refinement. With lambda = 0 and a rank-deficient design the
// minimum-norm solution is returned and the report carries a warning.
inline FitReport fit(const FeatureMatrix& f, std::span<const double> targets, double lambda, const Split& split,
                     double p = 2.0) {
  detail::require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be finite and non-negative");
  detail::require(p >= 1.0, "p must be at least 1");
  detail::require(!split.train.empty(), "fit needs at least one training row");
  const std::size_t per = f.rows_per_sample();
  detail::require(targets.size() == f.samples * per, "one target per feature row required");
  for (double y : targets) detail::require(std::isfinite(y), "non-finite target");
  detail::require(f.values.allFinite(), "non-finite feature entry");

  const auto cols = static_cast<Eigen::Index>(f.columns());
  const auto train_rows = static_cast<Eigen::Index>(split.train.size() * per);
  const Eigen::Index extra = lambda > 0.0 ? cols : 0;
  Eigen::MatrixXd a(train_rows + extra, cols);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(train_rows + extra);
  Eigen::Index r = 0;
  for (std::size_t i : split.train)
    for (std::size_t k = 0; k < per; ++k, ++r) {
      const double s = std::sqrt(f.time_weights[k]);
      const auto src = static_cast<Eigen::Index>(i * per + k);
      a.row(r) = s * f.values.row(src);
      b(r) = s * targets[i * per + k];
    }
  if (extra) {
    a.bottomRows(extra).setZero();
    a.bottomRows(extra).diagonal().setConstant(std::sqrt(lambda));
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  if (lambda == 0.0) cod.setThreshold(1e-11);
  cod.compute(a);
  Eigen::VectorXd coef = cod.solve(b);
  coef += cod.solve(b - a * coef);

  FitReport rep;
  rep.lambda = lambda;
  rep.p = p;
  rep.rank = static_cast<std::size_t>(cod.rank());
  const auto top = a.topRows(train_rows);
  const Eigen::MatrixXd gram = top.transpose() * top + lambda * Eigen::MatrixXd::Identity(cols, cols);
  const Eigen::VectorXd rhs = top.transpose() * b.head(train_rows);
  rep.residual_norm = (gram * coef - rhs).norm();
  rep.residual_bound = 1e-8 * (1.0 + rhs.norm());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  rep.gram_min_eigenvalue = eig.eigenvalues().minCoeff();
  rep.gram_max_eigenvalue = eig.eigenvalues().maxCoeff();
  if (lambda == 0.0 && rep.rank < static_cast<std::size_t>(cols))
    rep.warnings.push_back("rank-deficient design (rank " + std::to_string(rep.rank) + " of " + std::to_string(cols) +
                           "), minimum-norm solution");
  if (!rep.optimal()) rep.warnings.push_back("normal-equation residual above tolerance");
  if (!coef.allFinite()) throw numerical_error("least-squares solution is not finite");

  LinearFunctional l(f.dim, f.level);
  const auto words = all_words(f.dim, f.level);
  for (Eigen::Index c = 0; c < cols; ++c)
    if (coef(c) != 0.0) l.set(words[static_cast<std::size_t>(c)], coef(c));
  rep.functional = std::move(l);

  auto res = predict(coef, f);
  for (std::size_t i = 0; i < res.size(); ++i) res[i] = targets[i] - res[i];
  rep.train_samples = split.train.size();
  rep.test_samples = split.test.size();
  rep.train_error = lp_error_of_residuals(f, res, split.train, p);
  if (!split.test.empty()) rep.test_error = lp_error_of_residuals(f, res, split.test, p);
  return rep;
}

// Trains on every sample; the report has no test error.
inline FitReport fit(const FeatureMatrix& f, std::span<const double> targets, double lambda, double p = 2.0) {
  Split all;
  for (std::size_t i = 0; i < f.samples; ++i) all.train.push_back(i);
  return fit(f, targets, lambda, all, p);
}

inline nlohmann::ordered_json to_json(const LinearFunctional& l) {
  nlohmann::ordered_json coeffs = nlohmann::ordered_json::object();
  for (const auto& [w, c] : l.coefficients()) coeffs[w.to_string()] = c;
  return {{"dim", l.dim()}, {"level", l.level()}, {"coefficients", coeffs}};
}

inline LinearFunctional functional_from_json(const nlohmann::json& j) {
  LinearFunctional l(j.at("dim").get<std::size_t>(), j.at("level").get<std::size_t>());
  for (const auto& [k, v] : j.at("coefficients").items()) l.set(Word::parse(k), v.get<double>());
  return l;
}

inline nlohmann::ordered_json to_json(const FitReport& r) {
  nlohmann::ordered_json j;
  j["lambda"] = r.lambda;
  j["p"] = r.p;
  j["train_error"] = r.train_error;
  j["test_error"] = r.test_error ? nlohmann::ordered_json(*r.test_error) : nlohmann::ordered_json(nullptr);
  j["train_samples"] = r.train_samples;
  j["test_samples"] = r.test_samples;
  j["residual_norm"] = r.residual_norm;
  j["residual_bound"] = r.residual_bound;
  j["gram_min_eigenvalue"] = r.gram_min_eigenvalue;
  j["gram_max_eigenvalue"] = r.gram_max_eigenvalue;
  j["rank"] = r.rank;
  j["warnings"] = r.warnings;
  j["functional"] = to_json(r.functional);
  return j;
}

}  // namespace sigpath

#endif
