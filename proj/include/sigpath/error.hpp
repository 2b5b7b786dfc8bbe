#ifndef SIGPATH_ERROR_HPP
#define SIGPATH_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sigpath {

// Precondition violated by the caller (shape mismatch, out-of-range time, ...).
class invalid_input : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation produced a non-finite value.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input; line is 1-based, 0 when unknown.
class parse_error : public std::runtime_error {
 public:
  parse_error(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Invalid experiment configuration.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool cond, const char* msg) {
  if (!cond) throw invalid_input(msg);
}
inline void require(bool cond, const std::string& msg) {
  if (!cond) throw invalid_input(msg);
}
}  // namespace detail

}  // namespace sigpath

#endif
