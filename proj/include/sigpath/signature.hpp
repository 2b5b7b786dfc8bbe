#ifndef SIGPATH_SIGNATURE_HPP
#define SIGPATH_SIGNATURE_HPP

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sigpath/error.hpp"
#include "sigpath/paths.hpp"
#include "sigpath/tensor.hpp"
#include "sigpath/words.hpp"

namespace sigpath {

// Signature of a straight segment: level n is increment^{(x)n} / n!.
inline GroupLikeTensor segment_signature(std::span<const double> increment, std::size_t level) {
  detail::require(!increment.empty(), "increment must be non-empty");
  const std::size_t dim = increment.size();
  TruncatedTensor t = TruncatedTensor::unit(dim, level);
  for (std::size_t n = 1; n <= level; ++n) {
    auto prev = t.block(n - 1);
    auto cur = t.block(n);
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < prev.size(); ++i)
      for (std::size_t l = 0; l < dim; ++l) cur[i * dim + l] = prev[i] * increment[l] * inv;
  }
  return GroupLikeTensor(std::move(t));
}

// Folds segments into a running signature, keeping only the current tensor.
class SignatureFold {
 public:
  SignatureFold(std::size_t dim, std::size_t level) : current_(GroupLikeTensor::unit(dim, level)) {}

  void push(std::span<const double> increment) { extend_by_segment(current_, increment); }

  const GroupLikeTensor& value() const noexcept { return current_; }

 private:
  GroupLikeTensor current_;
};

// Chen product of the segment signatures, in time order.
inline GroupLikeTensor signature(const PiecewiseLinearPath& x, std::size_t level) {
  SignatureFold fold(x.dim(), level);
  for (std::size_t k = 0; k < x.partition().segments(); ++k) {
    const auto inc = x.increment(k);
    fold.push(inc);
  }
  return fold.value();
}

// Signatures on [0, t_k] for every breakpoint t_k.
struct SignatureStream {
  Partition partition;
  std::size_t dim;
  std::size_t level;
  std::vector<GroupLikeTensor> tensors;
  std::vector<double> increments;  // segment-major, dim entries per segment

  // Signature of the path restricted to [0, t]: the breakpoint signature extended by
  // the partial segment. Exact at breakpoints.
  GroupLikeTensor at(double t) const {
    detail::require(t >= 0.0 && t <= partition.horizon(), "stream time outside [0, T]");
    const std::size_t k = partition.segment_of(t);
    if (t == partition[k]) return tensors[k];
    if (t == partition[k + 1]) return tensors[k + 1];
    const double w = (t - partition[k]) / (partition[k + 1] - partition[k]);
    std::vector<double> partial(dim);
    for (std::size_t c = 0; c < dim; ++c) partial[c] = w * increments[k * dim + c];
    GroupLikeTensor g = tensors[k];
    extend_by_segment(g, partial);
    return g;
  }

  // Index of the breakpoint closest to t (ties go to the earlier one).
  std::size_t nearest(double t) const {
    detail::require(t >= 0.0 && t <= partition.horizon(), "stream time outside [0, T]");
    const std::size_t k = partition.segment_of(t);
    return (t - partition[k] <= partition[k + 1] - t) ? k : k + 1;
  }
};

inline SignatureStream signature_stream(const PiecewiseLinearPath& x, std::size_t level) {
  SignatureStream s{x.partition(), x.dim(), level, {}, {}};
  s.tensors.reserve(x.size());
  s.increments.reserve(x.partition().segments() * x.dim());
  SignatureFold fold(x.dim(), level);
  s.tensors.push_back(fold.value());
  for (std::size_t k = 0; k < x.partition().segments(); ++k) {
    const auto inc = x.increment(k);
    s.increments.insert(s.increments.end(), inc.begin(), inc.end());
    fold.push(inc);
    s.tensors.push_back(fold.value());
  }
  return s;
}

// l = sum_{|I| <= N} l_I e_I, one coefficient map per output coordinate.
class LinearFunctional {
 public:
  LinearFunctional(std::size_t dim, std::size_t level, std::size_t outputs = 1)
      : dim_(dim), level_(level), coeffs_(outputs) {
    detail::require(dim >= 1, "functional dimension must be positive");
    detail::require(outputs >= 1, "functional needs at least one output");
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t level() const noexcept { return level_; }
  std::size_t outputs() const noexcept { return coeffs_.size(); }

  void set(const Word& w, double value, std::size_t output = 0) {
    detail::require(w.valid_for(dim_), "word letter out of range for functional dimension");
    detail::require(w.size() <= level_, "word longer than functional level");
    detail::require(output < coeffs_.size(), "output index out of range");
    coeffs_[output][w] = value;
  }

  double get(const Word& w, std::size_t output = 0) const {
    const auto& m = coeffs_.at(output);
    auto it = m.find(w);
    return it == m.end() ? 0.0 : it->second;
  }

  const std::map<Word, double>& coefficients(std::size_t output = 0) const { return coeffs_.at(output); }

  // Longest word carrying a coefficient.
  std::size_t max_word_length() const noexcept {
    std::size_t n = 0;
    for (const auto& m : coeffs_)
      for (const auto& [w, c] : m) n = std::max(n, w.size());
    return n;
  }

  friend bool operator==(const LinearFunctional&, const LinearFunctional&) = default;

 private:
  std::size_t dim_;
  std::size_t level_;
  std::vector<std::map<Word, double>> coeffs_;
};

inline std::vector<double> apply_vector(const LinearFunctional& l, const TruncatedTensor& g) {
  detail::require(l.dim() == g.dim(), "functional and tensor dimensions differ");
  detail::require(l.level() <= g.level(), "functional level exceeds tensor level");
  std::vector<double> out(l.outputs(), 0.0);
  for (std::size_t o = 0; o < l.outputs(); ++o)
    for (const auto& [w, c] : l.coefficients(o)) out[o] += c * coefficient(g, w);
  return out;
}

inline double apply(const LinearFunctional& l, const TruncatedTensor& g) {
  detail::require(l.outputs() == 1, "scalar apply on a vector-valued functional");
  return apply_vector(l, g)[0];
}

// |S(x) (x) S(reversed x) - 1|, which vanishes for the group inverse.
inline double reverse_check(const PiecewiseLinearPath& x, std::size_t level) {
  const auto fwd = signature(x, level);
  const auto bwd = signature(reversed(x), level);
  auto prod = mul(fwd, bwd).tensor();
  prod.data()[0] -= 1.0;
  return norm(prod);
}

}  // namespace sigpath

#endif
