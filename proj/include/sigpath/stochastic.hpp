#ifndef SIGPATH_STOCHASTIC_HPP
#define SIGPATH_STOCHASTIC_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sigpath/error.hpp"
#include "sigpath/paths.hpp"
#include "sigpath/random.hpp"
#include "sigpath/signature.hpp"

namespace sigpath {

inline constexpr std::size_t max_lattice_depth = 24;

// Brownian motion sampled on the dyadic grid of [0, T] with 2^depth steps.
struct BrownianLattice {
  std::size_t depth;
  double horizon;
  std::size_t dim;
  std::uint64_t seed;
  std::uint64_t sample;
  std::vector<double> values;  // (2^depth + 1) points, dim entries each

  std::size_t points() const noexcept { return (std::size_t{1} << depth) + 1; }
  double value(std::size_t i, std::size_t c) const { return values[i * dim + c]; }
};

// W_0 = 0, W_T ~ N(0, T I), then midpoints level by level from the bridge law
// (left + right)/2 + sqrt(h/4) Z with h the parent spacing. The variate for level l,
// odd grid position j of that level and coordinate c is normal(l, j, c) of the
// generator keyed on (seed, sample), so every coarser lattice is an exact restriction.
inline BrownianLattice sample_brownian(std::uint64_t seed, std::uint64_t sample, std::size_t dim, double horizon,
                                       std::size_t depth) {
  detail::require(depth <= max_lattice_depth, "lattice depth exceeds " + std::to_string(max_lattice_depth));
  detail::require(dim >= 1, "Brownian dimension must be positive");
  detail::require(horizon > 0.0, "horizon must be positive");
  const CounterRng rng(seed, sample);
  const std::size_t n = std::size_t{1} << depth;
  BrownianLattice lat{depth, horizon, dim, seed, sample, std::vector<double>((n + 1) * dim, 0.0)};
  auto& v = lat.values;
  const double sd_end = std::sqrt(horizon);
  for (std::size_t c = 0; c < dim; ++c) v[n * dim + c] = sd_end * rng.normal(0, 1, c);
  for (std::size_t level = 1; level <= depth; ++level) {
    const std::size_t stride = n >> level;  // spacing of new points in fine-grid units
    const double parent = horizon / static_cast<double>(std::size_t{1} << (level - 1));
    const double sd = std::sqrt(parent / 4.0);
    const std::size_t count = std::size_t{1} << level;
    for (std::size_t j = 1; j < count; j += 2) {
      const std::size_t i = j * stride;
      for (std::size_t c = 0; c < dim; ++c) {
        const double mid = 0.5 * (v[(i - stride) * dim + c] + v[(i + stride) * dim + c]);
        v[i * dim + c] = mid + sd * rng.normal(level, j, c);
      }
    }
  }
  return lat;
}

// W^{pi_n}: the lattice restricted to the depth-n grid, linearly interpolated.
inline PiecewiseLinearPath interpolate(const BrownianLattice& lat, std::size_t depth) {
  detail::require(depth <= lat.depth, "interpolation depth exceeds lattice depth");
  const std::size_t n = std::size_t{1} << depth;
  const std::size_t stride = std::size_t{1} << (lat.depth - depth);
  std::vector<double> v((n + 1) * lat.dim);
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t c = 0; c < lat.dim; ++c) v[i * lat.dim + c] = lat.value(i * stride, c);
  return {Partition::uniform(lat.horizon, n), lat.dim, std::move(v)};
}

// l evaluated on the signature of the finest time-extended interpolation, standing in
// for the Stratonovich signature of W.
inline std::vector<double> stratonovich_reference(const BrownianLattice& lat, const LinearFunctional& l,
                                                  std::span<const double> eval_times) {
  detail::require(l.dim() == lat.dim + 1, "functional must act on the time-extended signature");
  for (double t : eval_times) detail::require(t >= 0.0 && t <= lat.horizon, "evaluation time outside [0, T]");
  const auto stream = signature_stream(time_extend(interpolate(lat, lat.depth)), l.level());
  std::vector<double> out;
  out.reserve(eval_times.size());
  for (double t : eval_times) out.push_back(apply(l, stream.at(t)));
  return out;
}

// Drift mu(t, y) in R^m and diffusion sigma(t, y) in R^{m x d}, chosen among built-ins.
// Each satisfies |mu| + |sigma|_F <= C (1 + |y|) with C = growth_constant().
class VectorField {
 public:
  enum class Kind { zero_drift_identity, linear, tanh_bounded };

  // mu = 0, sigma = I_d.
  static VectorField zero_drift_identity(std::size_t d) { return {Kind::zero_drift_identity, 0.0, 0.0, d, d}; }
  // mu_i = a y_i, sigma_ij = b y_i (geometric).
  static VectorField linear(double a, double b, std::size_t m = 1, std::size_t d = 1) {
    return {Kind::linear, a, b, m, d};
  }
  // mu_i = -a tanh(y_i), sigma_ij = b (1 + tanh(y_i)) / 2: bounded and globally Lipschitz.
  static VectorField tanh_bounded(double a, double b, std::size_t m = 1, std::size_t d = 1) {
    return {Kind::tanh_bounded, a, b, m, d};
  }

  static VectorField by_name(const std::string& name, double a, double b, std::size_t m, std::size_t d) {
    if (name == "zero-drift-identity") {
      detail::require(m == d, "zero-drift-identity needs state dimension equal to driver dimension");
      return zero_drift_identity(d);
    }
    if (name == "linear") return linear(a, b, m, d);
    if (name == "tanh-bounded") return tanh_bounded(a, b, m, d);
    throw invalid_input("unknown vector field '" + name + "'");
  }

  Kind kind() const noexcept { return kind_; }
  std::size_t state_dim() const noexcept { return m_; }
  std::size_t driver_dim() const noexcept { return d_; }

  double growth_constant() const noexcept {
    const double sm = std::sqrt(static_cast<double>(m_)), sd = std::sqrt(static_cast<double>(d_));
    switch (kind_) {
      case Kind::zero_drift_identity: return sd;
      case Kind::linear: return std::abs(a_) + std::abs(b_) * sd;
      case Kind::tanh_bounded: return std::abs(a_) * sm + std::abs(b_) * sm * sd;
    }
    return 0.0;
  }

  void drift(double /*t*/, std::span<const double> y, std::span<double> out) const {
    for (std::size_t i = 0; i < m_; ++i) {
      switch (kind_) {
        case Kind::zero_drift_identity: out[i] = 0.0; break;
        case Kind::linear: out[i] = a_ * y[i]; break;
        case Kind::tanh_bounded: out[i] = -a_ * std::tanh(y[i]); break;
      }
    }
  }

  // Row-major m x d.
  void diffusion(double /*t*/, std::span<const double> y, std::span<double> out) const {
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < d_; ++j) {
        double s = 0.0;
        switch (kind_) {
          case Kind::zero_drift_identity: s = i == j ? 1.0 : 0.0; break;
          case Kind::linear: s = b_ * y[i]; break;
          case Kind::tanh_bounded: s = 0.5 * b_ * (1.0 + std::tanh(y[i])); break;
        }
        out[i * d_ + j] = s;
      }
    }
  }

 private:
  VectorField(Kind k, double a, double b, std::size_t m, std::size_t d) : kind_(k), a_(a), b_(b), m_(m), d_(d) {
    detail::require(m >= 1 && d >= 1, "vector field dimensions must be positive");
  }

  Kind kind_;
  double a_, b_;
  std::size_t m_, d_;
};

// dY = mu(t, Y) dt + sigma(t, Y) dX along a time-extended piecewise linear driver. On
// segment k this is the ODE Y' = mu(t, Y) + sigma(t, Y) v_k with v_k the slope of the
// spatial coordinates, integrated by classical RK4 with `substeps` steps per segment.
inline PiecewiseLinearPath solve_ode_pl(const PiecewiseLinearPath& driver, const VectorField& vf,
                                        std::span<const double> y0, std::size_t substeps) {
  detail::require(substeps >= 1, "substeps must be at least 1");
  const std::size_t m = vf.state_dim(), d = vf.driver_dim();
  detail::require(driver.dim() == d + 1, "driver must be time-extended with the field's driver dimension");
  detail::require(y0.size() == m, "initial state has the wrong dimension");

  std::vector<double> out;
  out.reserve(driver.size() * m);
  std::vector<double> y(y0.begin(), y0.end()), v(d), sig(m * d), tmp(m);
  std::vector<double> k1(m), k2(m), k3(m), k4(m);
  out.insert(out.end(), y.begin(), y.end());

  auto rhs = [&](double t, std::span<const double> state, std::span<double> f) {
    vf.drift(t, state, f);
    vf.diffusion(t, state, sig);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < d; ++j) f[i] += sig[i * d + j] * v[j];
  };

  for (std::size_t k = 0; k + 1 < driver.size(); ++k) {
    const double t0 = driver.time(k), dt = driver.time(k + 1) - t0;
    const auto a = driver.point(k), b = driver.point(k + 1);
    for (std::size_t j = 0; j < d; ++j) v[j] = (b[j + 1] - a[j + 1]) / dt;
    const double h = dt / static_cast<double>(substeps);
    for (std::size_t s = 0; s < substeps; ++s) {
      const double t = t0 + h * static_cast<double>(s);
      rhs(t, y, k1);
      for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
      rhs(t + 0.5 * h, tmp, k2);
      for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
      rhs(t + 0.5 * h, tmp, k3);
      for (std::size_t i = 0; i < m; ++i) tmp[i] = y[i] + h * k3[i];
      rhs(t + h, tmp, k4);
      for (std::size_t i = 0; i < m; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    for (double c : y)
      if (!std::isfinite(c)) throw numerical_error("ODE state became non-finite on segment " + std::to_string(k));
    out.insert(out.end(), y.begin(), y.end());
  }
  return {driver.partition(), m, std::move(out)};
}

// Stratonovich GBM dY = aY dt + bY o dW, Y_t = y0 exp(a t + b W_t), with W read from the
// depth-`depth` interpolation of a scalar lattice.
inline std::vector<double> sde_exact_gbm(const BrownianLattice& lat, std::size_t depth, double a, double b, double y0,
                                         std::span<const double> eval_times) {
  detail::require(lat.dim == 1, "exact GBM targets need a scalar Brownian motion");
  const auto w = interpolate(lat, depth);
  std::vector<double> out;
  out.reserve(eval_times.size());
  for (double t : eval_times) out.push_back(y0 * std::exp(a * t + b * eval(w, t)[0]));
  return out;
}

}  // namespace sigpath

#endif
