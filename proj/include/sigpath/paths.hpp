#ifndef SIGPATH_PATHS_HPP
#define SIGPATH_PATHS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sigpath/error.hpp"

namespace sigpath {

// Strictly increasing times 0 = t_0 < t_1 < ... < t_n = T.
class Partition {
 public:
  explicit Partition(std::vector<double> times) : times_(std::move(times)) {
    detail::require(times_.size() >= 2, "a partition needs at least two times");
    detail::require(times_.front() == 0.0, "a partition must start at 0");
    for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
      detail::require(std::isfinite(times_[i + 1]), "partition times must be finite");
      detail::require(times_[i] < times_[i + 1], "partition times must be strictly increasing");
    }
  }

  // n equal steps on [0, T], times computed as T * i / n.
  static Partition uniform(double horizon, std::size_t steps) {
    detail::require(horizon > 0.0, "horizon must be positive");
    detail::require(steps >= 1, "need at least one step");
    std::vector<double> t(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) t[i] = horizon * static_cast<double>(i) / static_cast<double>(steps);
    t.back() = horizon;
    return Partition(std::move(t));
  }

  std::size_t size() const noexcept { return times_.size(); }
  std::size_t segments() const noexcept { return times_.size() - 1; }
  double operator[](std::size_t i) const { return times_[i]; }
  double horizon() const noexcept { return times_.back(); }
  const std::vector<double>& times() const noexcept { return times_; }

  double mesh() const noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < times_.size(); ++i) m = std::max(m, times_[i + 1] - times_[i]);
    return m;
  }

  bool contains(double t) const { return std::binary_search(times_.begin(), times_.end(), t); }

  // Index k of the segment [t_k, t_{k+1}] holding t; t = T maps to the last segment.
  std::size_t segment_of(double t) const {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t k = static_cast<std::size_t>(it - times_.begin());
    k = k == 0 ? 0 : k - 1;
    return std::min(k, segments() - 1);
  }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<double> times_;
};

// Continuous path through breakpoint values, linear in between. Values are absolute
// positions stored point-major (values[k * dim + c]).
class PiecewiseLinearPath {
 public:
  PiecewiseLinearPath(Partition partition, std::size_t dim, std::vector<double> values)
      : partition_(std::move(partition)), dim_(dim), values_(std::move(values)) {
    detail::require(dim_ >= 1, "path dimension must be positive");
    detail::require(values_.size() == partition_.size() * dim_, "one value per partition time is required");
    for (double v : values_) detail::require(std::isfinite(v), "path values must be finite");
  }

  // Constructs from one point per breakpoint.
  static PiecewiseLinearPath from_points(std::vector<double> times, const std::vector<std::vector<double>>& points) {
    detail::require(!points.empty(), "path needs points");
    const std::size_t dim = points.front().size();
    std::vector<double> flat;
    flat.reserve(points.size() * dim);
    for (const auto& p : points) {
      detail::require(p.size() == dim, "all points must have the same dimension");
      flat.insert(flat.end(), p.begin(), p.end());
    }
    return {Partition(std::move(times)), dim, std::move(flat)};
  }

  const Partition& partition() const noexcept { return partition_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return partition_.size(); }
  double horizon() const noexcept { return partition_.horizon(); }
  double time(std::size_t k) const { return partition_[k]; }
  const std::vector<double>& values() const noexcept { return values_; }

  std::span<const double> point(std::size_t k) const {
    return std::span<const double>(values_).subspan(k * dim_, dim_);
  }

  // X_{t_{k+1}} - X_{t_k}
  std::vector<double> increment(std::size_t k) const {
    std::vector<double> d(dim_);
    for (std::size_t c = 0; c < dim_; ++c) d[c] = values_[(k + 1) * dim_ + c] - values_[k * dim_ + c];
    return d;
  }

  friend bool operator==(const PiecewiseLinearPath&, const PiecewiseLinearPath&) = default;

 private:
  Partition partition_;
  std::size_t dim_;
  std::vector<double> values_;
};

namespace detail {
inline void interpolate_into(const PiecewiseLinearPath& x, std::size_t k, double t, std::span<double> out) {
  const double t0 = x.time(k), t1 = x.time(k + 1);
  const auto a = x.point(k), b = x.point(k + 1);
  const double w = (t - t0) / (t1 - t0);
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = a[c] + w * (b[c] - a[c]);
}
}  // namespace detail

// X_t by linear interpolation; exact stored value at breakpoints.
inline std::vector<double> eval(const PiecewiseLinearPath& x, double t) {
  detail::require(t >= 0.0 && t <= x.horizon(), "evaluation time outside [0, T]");
  const auto& times = x.partition().times();
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it != times.end() && *it == t) {
    auto p = x.point(static_cast<std::size_t>(it - times.begin()));
    return {p.begin(), p.end()};
  }
  std::vector<double> out(x.dim());
  detail::interpolate_into(x, x.partition().segment_of(t), t, out);
  return out;
}

// (t, X_t): coordinate 0 becomes time.
inline PiecewiseLinearPath time_extend(const PiecewiseLinearPath& x) {
  const std::size_t d = x.dim();
  std::vector<double> v;
  v.reserve(x.size() * (d + 1));
  for (std::size_t k = 0; k < x.size(); ++k) {
    v.push_back(x.time(k));
    auto p = x.point(k);
    v.insert(v.end(), p.begin(), p.end());
  }
  return {x.partition(), d + 1, std::move(v)};
}

inline PiecewiseLinearPath insert_breakpoint(const PiecewiseLinearPath& x, double t) {
  detail::require(t > 0.0 && t < x.horizon(), "inserted breakpoint must lie in (0, T)");
  if (x.partition().contains(t)) return x;
  const std::size_t k = x.partition().segment_of(t);
  std::vector<double> times = x.partition().times();
  times.insert(times.begin() + static_cast<std::ptrdiff_t>(k + 1), t);
  std::vector<double> mid(x.dim());
  detail::interpolate_into(x, k, t, mid);
  std::vector<double> values = x.values();
  values.insert(values.begin() + static_cast<std::ptrdiff_t>((k + 1) * x.dim()), mid.begin(), mid.end());
  return {Partition(std::move(times)), x.dim(), std::move(values)};
}

// Same trajectory run backwards: breakpoint T - t_k carries X_{t_k}.
inline PiecewiseLinearPath reversed(const PiecewiseLinearPath& x) {
  const std::size_t n = x.size(), d = x.dim();
  const double horizon = x.horizon();
  std::vector<double> times(n), values(n * d);
  for (std::size_t k = 0; k < n; ++k) {
    times[k] = horizon - x.time(n - 1 - k);
    auto p = x.point(n - 1 - k);
    std::copy(p.begin(), p.end(), values.begin() + static_cast<std::ptrdiff_t>(k * d));
  }
  times.front() = 0.0;
  times.back() = horizon;
  return {Partition(std::move(times)), d, std::move(values)};
}

// lambda * X on the same partition.
inline PiecewiseLinearPath scaled(const PiecewiseLinearPath& x, double lambda) {
  std::vector<double> v = x.values();
  for (double& c : v) c *= lambda;
  return {x.partition(), x.dim(), std::move(v)};
}

namespace detail {

inline double holder_ratio(std::span<const double> a, std::span<const double> b, double gap, double alpha) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double d = b[c] - a[c];
    s += d * d;
  }
  return std::sqrt(s) / (alpha == 1.0 ? gap : std::pow(gap, alpha));
}

}  // namespace detail

// Lower estimate of sup_{s<t} |X_t - X_s| / (t - s)^alpha over the candidate grid made of
// all breakpoints plus m - 1 equally spaced interior points per segment.
//
// The search is exhaustive over the grid, but pairs of segments are skipped when a bound
// on their best ratio cannot beat the current maximum: bounding boxes for separated
// segments, the local Lipschitz constant for neighbours.
inline double holder_norm(const PiecewiseLinearPath& x, double alpha, std::size_t m = 16) {
  detail::require(alpha > 0.0 && alpha <= 1.0, "Hoelder exponent must lie in (0, 1]");
  detail::require(m >= 1, "subdivision count must be at least 1");
  const std::size_t d = x.dim();
  const std::size_t segs = x.partition().segments();
  const std::size_t count = segs * m + 1;

  std::vector<double> times(count), pts(count * d);
  for (std::size_t k = 0; k < segs; ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t idx = k * m + j;
      auto out = std::span<double>(pts).subspan(idx * d, d);
      if (j == 0) {
        times[idx] = x.time(k);
        auto p = x.point(k);
        std::copy(p.begin(), p.end(), out.begin());
      } else {
        const double t = x.time(k) + (x.time(k + 1) - x.time(k)) * static_cast<double>(j) / static_cast<double>(m);
        times[idx] = t;
        detail::interpolate_into(x, k, t, out);
      }
    }
  }
  times[count - 1] = x.horizon();
  {
    auto p = x.point(segs);
    std::copy(p.begin(), p.end(), pts.begin() + static_cast<std::ptrdiff_t>((count - 1) * d));
  }
  auto pt = [&](std::size_t i) { return std::span<const double>(pts).subspan(i * d, d); };
  auto ratio = [&](std::size_t i, std::size_t j) { return detail::holder_ratio(pt(i), pt(j), times[j] - times[i], alpha); };

  // Breakpoint pairs seed the maximum; within one segment the ratio grows with the gap,
  // so endpoints dominate there.
  double best = 0.0;
  for (std::size_t a = 0; a <= segs; ++a)
    for (std::size_t b = a + 1; b <= segs; ++b) best = std::max(best, ratio(a * m, b * m));
  if (m == 1) return best;

  std::vector<double> lo(segs * d), hi(segs * d), slope(segs);
  for (std::size_t k = 0; k < segs; ++k) {
    auto p = x.point(k), q = x.point(k + 1);
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      lo[k * d + c] = std::min(p[c], q[c]);
      hi[k * d + c] = std::max(p[c], q[c]);
      s += (q[c] - p[c]) * (q[c] - p[c]);
    }
    slope[k] = std::sqrt(s) / (x.time(k + 1) - x.time(k));
  }
  constexpr double slack = 1.0 + 1e-12;

  for (std::size_t a = 0; a < segs; ++a) {
    for (std::size_t b = a + 1; b < segs; ++b) {
      double bound;
      if (b == a + 1) {
        const double span_len = x.time(b + 1) - x.time(a);
        bound = std::max(slope[a], slope[b]) * (alpha == 1.0 ? 1.0 : std::pow(span_len, 1.0 - alpha));
      } else {
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          const double e = std::max(hi[b * d + c] - lo[a * d + c], hi[a * d + c] - lo[b * d + c]);
          s += e * e;
        }
        const double gap = x.time(b) - x.time(a + 1);
        bound = std::sqrt(s) / std::pow(gap, alpha);
      }
      if (bound * slack <= best) continue;
      for (std::size_t i = a * m; i <= (a + 1) * m; ++i) {
        if (b > a + 1) {
          // Per-point bound against the far segment's box.
          double s = 0.0;
          auto p = pt(i);
          for (std::size_t c = 0; c < d; ++c) {
            const double e = std::max(hi[b * d + c] - p[c], p[c] - lo[b * d + c]);
            s += e * e;
          }
          if (std::sqrt(s) / std::pow(x.time(b) - times[i], alpha) * slack <= best) continue;
        }
        for (std::size_t j = std::max(b * m, i + 1); j <= (b + 1) * m; ++j) best = std::max(best, ratio(i, j));
      }
    }
  }
  return best;
}

// psi(X) = exp(beta * |X|_alpha^gamma)
inline double weight(const PiecewiseLinearPath& x, double alpha, double beta, double gamma, std::size_t m = 16) {
  detail::require(beta > 0.0, "weight requires beta > 0");
  detail::require(gamma >= 1.0, "weight requires gamma >= 1");
  return std::exp(beta * std::pow(holder_norm(x, alpha, m), gamma));
}

// Time-extended path whose spatial coordinates freeze at stop_time while time runs on.
struct StoppedPath {
  PiecewiseLinearPath base;
  double stop_time;
};

inline StoppedPath stop(const PiecewiseLinearPath& xhat, double t) {
  detail::require(xhat.dim() >= 2, "stopping requires a time-extended path");
  detail::require(t >= 0.0 && t <= xhat.horizon(), "stop time outside [0, T]");
  for (std::size_t k = 0; k < xhat.size(); ++k)
    detail::require(xhat.point(k)[0] == xhat.time(k), "stopping requires a time-extended path");
  return {xhat, t};
}

inline PiecewiseLinearPath materialize(const StoppedPath& s) {
  const PiecewiseLinearPath& base = s.base;
  if (s.stop_time == base.horizon()) return base;
  PiecewiseLinearPath x = s.stop_time > 0.0 ? insert_breakpoint(base, s.stop_time) : base;
  const std::size_t d = x.dim();
  const auto& times = x.partition().times();
  const std::size_t ks = static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), s.stop_time) - times.begin());
  std::vector<double> v = x.values();
  for (std::size_t k = ks + 1; k < x.size(); ++k)
    for (std::size_t c = 1; c < d; ++c) v[k * d + c] = v[ks * d + c];
  return {x.partition(), d, std::move(v)};
}

// Reads "t,x1,...,xd" CSV; first time must be 0.
inline PiecewiseLinearPath read_path_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t\r");
      const auto e = cell.find_last_not_of(" \t\r");
      out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header = split(line);
    break;
  }
  if (header.empty()) throw parse_error(lineno, "missing header row");
  if (header.size() < 2) throw parse_error(lineno, "header needs a time column and at least one coordinate");
  if (header[0] != "t") throw parse_error(lineno, "first header column must be 't'");
  const std::size_t d = header.size() - 1;

  std::vector<double> times, values;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split(line);
    if (cells.size() != d + 1)
      throw parse_error(lineno, "expected " + std::to_string(d + 1) + " columns, got " + std::to_string(cells.size()));
    std::vector<double> row;
    for (const auto& c : cells) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(c, &used);
      } catch (const std::exception&) {
        throw parse_error(lineno, "not a number: '" + c + "'");
      }
      if (used != c.size() || !std::isfinite(v)) throw parse_error(lineno, "not a finite number: '" + c + "'");
      row.push_back(v);
    }
    if (times.empty() && row[0] != 0.0) throw parse_error(lineno, "first time must be 0");
    if (!times.empty() && row[0] <= times.back()) throw parse_error(lineno, "times must be strictly increasing");
    times.push_back(row[0]);
    values.insert(values.end(), row.begin() + 1, row.end());
  }
  if (times.size() < 2) throw parse_error(lineno, "a path needs at least two breakpoints");
  return {Partition(std::move(times)), d, std::move(values)};
}

inline void write_path_csv(std::ostream& out, const PiecewiseLinearPath& x) {
  char buf[64];
  out << 't';
  for (std::size_t c = 1; c <= x.dim(); ++c) out << ",x" << c;
  out << '\n';
  for (std::size_t k = 0; k < x.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", x.time(k));
    out << buf;
    for (double v : x.point(k)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace sigpath

#endif
