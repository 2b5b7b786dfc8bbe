#ifndef SIGPATH_WORDS_HPP
#define SIGPATH_WORDS_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sigpath/error.hpp"
#include "sigpath/tensor.hpp"

namespace sigpath {

// Multi-index (i_1, ..., i_n) addressing the coefficient <e_I, .>. In time-extended
// signatures letter 0 is time.
class Word {
 public:
  Word() = default;
  Word(std::initializer_list<std::size_t> letters) : letters_(letters) {}
  explicit Word(std::vector<std::size_t> letters) : letters_(std::move(letters)) {}

  std::size_t size() const noexcept { return letters_.size(); }
  bool empty() const noexcept { return letters_.empty(); }
  std::size_t operator[](std::size_t i) const { return letters_[i]; }
  std::size_t back() const { return letters_.back(); }
  auto begin() const noexcept { return letters_.begin(); }
  auto end() const noexcept { return letters_.end(); }
  const std::vector<std::size_t>& letters() const noexcept { return letters_; }

  Word without_last() const {
    Word w = *this;
    w.letters_.pop_back();
    return w;
  }
  Word append(std::size_t letter) const {
    Word w = *this;
    w.letters_.push_back(letter);
    return w;
  }

  bool valid_for(std::size_t dim) const noexcept {
    for (auto l : letters_)
      if (l >= dim) return false;
    return true;
  }

  // "0,1,2"; the empty word is "".
  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < letters_.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(letters_[i]);
    }
    return s;
  }

  static Word parse(const std::string& s) {
    Word w;
    if (s.empty()) return w;
    std::size_t pos = 0;
    while (pos <= s.size()) {
      const auto comma = s.find(',', pos);
      const auto tok = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      detail::require(!tok.empty() && tok.find_first_not_of("0123456789") == std::string::npos,
                      "malformed word string '" + s + "'");
      w.letters_.push_back(std::stoul(tok));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return w;
  }

  friend auto operator<=>(const Word&, const Word&) = default;
  friend bool operator==(const Word&, const Word&) = default;

 private:
  std::vector<std::size_t> letters_;
};

struct WordAddress {
  std::size_t level;
  std::size_t offset;
  friend bool operator==(const WordAddress&, const WordAddress&) = default;
};

// Position of a word inside its level block: the word read as a base-dim integer.
inline WordAddress word_to_offset(const Word& w, std::size_t dim) {
  std::size_t off = 0;
  for (auto l : w) {
    detail::require(l < dim, "word letter " + std::to_string(l) + " out of range for dimension " +
                                 std::to_string(dim));
    off = off * dim + l;
  }
  return {w.size(), off};
}

// Index of a word in the flat level-major layout.
inline std::size_t flat_index(const Word& w, std::size_t dim) {
  const auto a = word_to_offset(w, dim);
  return (a.level == 0 ? 0 : tensor_size(dim, a.level - 1)) + a.offset;
}

inline Word offset_to_word(WordAddress addr, std::size_t dim) {
  detail::require(addr.offset < ipow(dim, addr.level), "offset out of range for level");
  std::vector<std::size_t> letters(addr.level);
  std::size_t off = addr.offset;
  for (std::size_t i = addr.level; i-- > 0;) {
    letters[i] = off % dim;
    off /= dim;
  }
  return Word(std::move(letters));
}

// All words of length <= level in level-major lexicographic order, matching the
// flat coefficient layout of TruncatedTensor.
inline std::vector<Word> all_words(std::size_t dim, std::size_t level) {
  std::vector<Word> out;
  out.reserve(tensor_size(dim, level));
  for (std::size_t n = 0; n <= level; ++n) {
    const std::size_t count = ipow(dim, n);
    for (std::size_t off = 0; off < count; ++off) out.push_back(offset_to_word({n, off}, dim));
  }
  return out;
}

inline double coefficient(const TruncatedTensor& t, const Word& w) {
  detail::require(w.size() <= t.level(), "word longer than tensor truncation level");
  const auto addr = word_to_offset(w, t.dim());
  return t.block(addr.level)[addr.offset];
}

// Word -> multiplicity.
using ShuffleExpansion = std::map<Word, std::uint64_t>;

namespace detail {
inline const ShuffleExpansion& shuffle_memo(const Word& i, const Word& j) {
  thread_local std::map<std::pair<Word, Word>, ShuffleExpansion> cache;
  auto key = std::make_pair(i, j);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  ShuffleExpansion r;
  if (j.empty()) {
    r.emplace(i, 1);
  } else if (i.empty()) {
    r.emplace(j, 1);
  } else {
    for (const auto& [w, c] : shuffle_memo(i.without_last(), j)) r[w.append(i.back())] += c;
    for (const auto& [w, c] : shuffle_memo(i, j.without_last())) r[w.append(j.back())] += c;
  }
  return cache.emplace(std::move(key), std::move(r)).first->second;
}
}  // namespace detail

// e_I sh e_J = (e_I' sh e_J) e_{i_last} + (e_I sh e_J') e_{j_last}; the cache is per thread.
inline ShuffleExpansion shuffle(const Word& i, const Word& j) { return detail::shuffle_memo(i, j); }

struct ShuffleCheck {
  double lhs;
  double rhs;
};

// lhs = <e_I,g><e_J,g>, rhs = <e_I sh e_J, g>.
inline ShuffleCheck apply_shuffle_check(const TruncatedTensor& g, const Word& i, const Word& j) {
  detail::require(i.size() + j.size() <= g.level(), "|I|+|J| exceeds the truncation level");
  ShuffleCheck r{coefficient(g, i) * coefficient(g, j), 0.0};
  for (const auto& [w, mult] : shuffle(i, j)) r.rhs += static_cast<double>(mult) * coefficient(g, w);
  return r;
}

}  // namespace sigpath

#endif
