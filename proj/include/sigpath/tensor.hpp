#ifndef SIGPATH_TENSOR_HPP
#define SIGPATH_TENSOR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sigpath/error.hpp"

namespace sigpath {

// dim^n, rejecting anything that would not fit a reasonable allocation.
inline std::size_t ipow(std::size_t base, std::size_t n) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (base != 0 && r > (std::size_t{1} << 40) / base)
      throw invalid_input("tensor level too large for dimension");
    r *= base;
  }
  return r;
}

// Number of coefficients of T^N(R^dim): sum_{n=0}^{N} dim^n.
inline std::size_t tensor_size(std::size_t dim, std::size_t level) {
  std::size_t total = 0;
  for (std::size_t n = 0; n <= level; ++n) total += ipow(dim, n);
  return total;
}

// Element of the truncated tensor algebra T^N(R^dim).
//
// Coefficients are stored level-major: block n holds dim^n entries, words in
// lexicographic order with the first letter most significant.
class TruncatedTensor {
 public:
  TruncatedTensor() : TruncatedTensor(1, 0) {}

  TruncatedTensor(std::size_t dim, std::size_t level) : dim_(dim), level_(level) {
    detail::require(dim >= 1, "tensor dimension must be positive");
    offsets_.resize(level + 2);
    offsets_[0] = 0;
    for (std::size_t n = 0; n <= level; ++n) offsets_[n + 1] = offsets_[n] + ipow(dim, n);
    coeffs_.assign(offsets_.back(), 0.0);
  }

  static TruncatedTensor zero(std::size_t dim, std::size_t level) { return {dim, level}; }

  static TruncatedTensor unit(std::size_t dim, std::size_t level) {
    TruncatedTensor t(dim, level);
    t.coeffs_[0] = 1.0;
    return t;
  }

  // Builds a tensor from explicit level blocks; levels.size() - 1 is the truncation order.
  static TruncatedTensor from_levels(std::size_t dim, const std::vector<std::vector<double>>& levels) {
    detail::require(!levels.empty(), "at least the level-0 block is required");
    TruncatedTensor t(dim, levels.size() - 1);
    for (std::size_t n = 0; n < levels.size(); ++n) {
      auto blk = t.block(n);
      detail::require(levels[n].size() == blk.size(),
                      "level " + std::to_string(n) + " must have dim^" + std::to_string(n) + " entries");
      for (double v : levels[n]) detail::require(std::isfinite(v), "tensor coefficients must be finite");
      std::copy(levels[n].begin(), levels[n].end(), blk.begin());
    }
    return t;
  }

  // Level-1 element with the given entries and zero elsewhere.
  static TruncatedTensor from_vector(std::span<const double> v, std::size_t level) {
    detail::require(!v.empty(), "vector must be non-empty");
    TruncatedTensor t(v.size(), level);
    if (level >= 1) std::copy(v.begin(), v.end(), t.block(1).begin());
    return t;
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t level() const noexcept { return level_; }
  std::size_t size() const noexcept { return coeffs_.size(); }

  std::span<double> data() noexcept { return coeffs_; }
  std::span<const double> data() const noexcept { return coeffs_; }

  std::span<double> block(std::size_t n) {
    detail::require(n <= level_, "level exceeds truncation order");
    return std::span<double>(coeffs_).subspan(offsets_[n], offsets_[n + 1] - offsets_[n]);
  }
  std::span<const double> block(std::size_t n) const {
    detail::require(n <= level_, "level exceeds truncation order");
    return std::span<const double>(coeffs_).subspan(offsets_[n], offsets_[n + 1] - offsets_[n]);
  }

  // Start of block n inside data().
  std::size_t block_offset(std::size_t n) const { return offsets_.at(n); }

  double scalar() const noexcept { return coeffs_[0]; }

  bool same_shape(const TruncatedTensor& o) const noexcept { return dim_ == o.dim_ && level_ == o.level_; }

  friend bool operator==(const TruncatedTensor&, const TruncatedTensor&) = default;

 private:
  std::size_t dim_;
  std::size_t level_;
  std::vector<std::size_t> offsets_;
  std::vector<double> coeffs_;
};

namespace detail {
inline void require_same_shape(const TruncatedTensor& a, const TruncatedTensor& b) {
  require(a.dim() == b.dim(), "tensor dimensions differ");
  require(a.level() == b.level(), "tensor truncation levels differ");
}
}  // namespace detail

inline TruncatedTensor add(const TruncatedTensor& a, const TruncatedTensor& b) {
  detail::require_same_shape(a, b);
  TruncatedTensor r = a;
  auto out = r.data();
  auto rhs = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += rhs[i];
  return r;
}

inline TruncatedTensor subtract(const TruncatedTensor& a, const TruncatedTensor& b) {
  detail::require_same_shape(a, b);
  TruncatedTensor r = a;
  auto out = r.data();
  auto rhs = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= rhs[i];
  return r;
}

inline TruncatedTensor scale(double lambda, const TruncatedTensor& a) {
  TruncatedTensor r = a;
  for (double& c : r.data()) c *= lambda;
  return r;
}

// out = a (x) b truncated at the common level. out must not alias a or b.
inline void mul_into(const TruncatedTensor& a, const TruncatedTensor& b, TruncatedTensor& out) {
  detail::require_same_shape(a, b);
  detail::require_same_shape(a, out);
  std::fill(out.data().begin(), out.data().end(), 0.0);
  const std::size_t dim = a.dim();
  for (std::size_t n = 0; n <= a.level(); ++n) {
    auto dst = out.block(n);
    for (std::size_t k = 0; k <= n; ++k) {
      auto lhs = a.block(k);
      auto rhs = b.block(n - k);
      const std::size_t stride = rhs.size();
      for (std::size_t i = 0; i < lhs.size(); ++i) {
        const double ai = lhs[i];
        if (ai == 0.0) continue;
        double* row = dst.data() + i * stride;
        for (std::size_t j = 0; j < stride; ++j) row[j] += ai * rhs[j];
      }
    }
    (void)dim;
  }
}

inline TruncatedTensor mul(const TruncatedTensor& a, const TruncatedTensor& b) {
  detail::require_same_shape(a, b);
  TruncatedTensor r(a.dim(), a.level());
  mul_into(a, b, r);
  return r;
}

// Euclidean norm of block n.
inline double level_norm(const TruncatedTensor& a, std::size_t n) {
  detail::require(n <= a.level(), "level exceeds truncation order");
  double s = 0.0;
  for (double c : a.block(n)) s += c * c;
  return std::sqrt(s);
}

// max_n |a^(n)|
inline double norm(const TruncatedTensor& a) {
  double r = 0.0;
  for (std::size_t n = 0; n <= a.level(); ++n) r = std::max(r, level_norm(a, n));
  return r;
}

// Tensor with a^(0) = 1, e.g. a signature. The restriction is checked on construction.
class GroupLikeTensor {
 public:
  GroupLikeTensor() : t_(TruncatedTensor::unit(1, 0)) {}

  explicit GroupLikeTensor(TruncatedTensor t) : t_(std::move(t)) {
    detail::require(t_.scalar() == 1.0, "group-like tensor must have level-0 coefficient 1");
  }

  static GroupLikeTensor unit(std::size_t dim, std::size_t level) {
    return GroupLikeTensor(TruncatedTensor::unit(dim, level));
  }

  const TruncatedTensor& tensor() const noexcept { return t_; }
  operator const TruncatedTensor&() const noexcept { return t_; }

  std::size_t dim() const noexcept { return t_.dim(); }
  std::size_t level() const noexcept { return t_.level(); }
  std::span<const double> block(std::size_t n) const { return t_.block(n); }
  std::span<const double> data() const noexcept { return t_.data(); }

  friend bool operator==(const GroupLikeTensor&, const GroupLikeTensor&) = default;

  friend GroupLikeTensor mul(const GroupLikeTensor& a, const GroupLikeTensor& b) {
    GroupLikeTensor r;
    r.t_ = mul(a.t_, b.t_);
    return r;
  }

  friend void extend_by_segment(GroupLikeTensor& g, std::span<const double> increment);

 private:
  TruncatedTensor t_;
};

// g <- g (x) exp(increment), the Chen step for one linear segment. Each level n is
// evaluated by Horner nesting sum_j g^(n-j) (x) v^{(x)j} / j!, top level first so the
// lower blocks it reads are still the old ones.
inline void extend_by_segment(GroupLikeTensor& g, std::span<const double> increment) {
  TruncatedTensor& t = g.t_;
  const std::size_t dim = t.dim();
  detail::require(increment.size() == dim, "increment dimension differs from tensor dimension");
  const std::size_t top = t.level();
  if (top == 0) return;
  thread_local std::vector<double> cur, next;
  const std::size_t cap = ipow(dim, top);
  if (cur.size() < cap) {
    cur.resize(cap);
    next.resize(cap);
  }
  auto data = t.data();
  for (std::size_t n = top; n >= 1; --n) {
    cur[0] = data[0];
    std::size_t len = 1;
    for (std::size_t k = 1; k <= n; ++k) {
      const double inv = 1.0 / static_cast<double>(n - k + 1);
      const double* gk = data.data() + t.block_offset(k);
      for (std::size_t i = 0; i < len; ++i) {
        const double h = cur[i] * inv;
        double* dst = next.data() + i * dim;
        const double* src = gk + i * dim;
        for (std::size_t l = 0; l < dim; ++l) dst[l] = src[l] + h * increment[l];
      }
      len *= dim;
      std::swap(cur, next);
    }
    std::copy(cur.begin(), cur.begin() + static_cast<std::ptrdiff_t>(len), data.begin() + t.block_offset(n));
  }
}

// Truncated exponential of a tensor with zero scalar part, by Horner nesting
// 1 + a(1 + a/2(1 + a/3(...))).
inline GroupLikeTensor exp(const TruncatedTensor& a) {
  detail::require(a.scalar() == 0.0, "exp requires a zero level-0 coefficient");
  const std::size_t dim = a.dim(), level = a.level();
  TruncatedTensor r = TruncatedTensor::unit(dim, level);
  TruncatedTensor tmp(dim, level);
  for (std::size_t k = level; k >= 1; --k) {
    mul_into(a, r, tmp);
    const double inv = 1.0 / static_cast<double>(k);
    auto out = r.data();
    auto src = tmp.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = src[i] * inv;
    out[0] += 1.0;
  }
  r.data()[0] = 1.0;
  return GroupLikeTensor(std::move(r));
}

// Truncated logarithm log(1 + x) = sum_k (-1)^{k+1} x^k / k, inverse of exp on T_1.
inline TruncatedTensor log(const TruncatedTensor& g) {
  detail::require(g.scalar() == 1.0, "log requires a level-0 coefficient equal to 1");
  const std::size_t dim = g.dim(), level = g.level();
  TruncatedTensor x = g;
  x.data()[0] = 0.0;
  if (level == 0) return x;
  // r_k = (1/k) 1 - x (x) r_{k+1}, log = x (x) r_1
  TruncatedTensor r = TruncatedTensor::unit(dim, level);
  r.data()[0] = 1.0 / static_cast<double>(level);
  TruncatedTensor tmp(dim, level);
  for (std::size_t k = level - 1; k >= 1; --k) {
    mul_into(x, r, tmp);
    auto out = r.data();
    auto src = tmp.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -src[i];
    out[0] += 1.0 / static_cast<double>(k);
  }
  mul_into(x, r, tmp);
  return tmp;
}

inline TruncatedTensor log(const GroupLikeTensor& g) { return log(g.tensor()); }

}  // namespace sigpath

#endif
