#pragma once

#include <stdexcept>
#include <string>

namespace lhzqec {

/// Raised when an operation's preconditions are violated by caller input
/// (dimension mismatch, out-of-range parameter, malformed document).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a persisted file (series, config) cannot be parsed.
class CorruptInput : public std::runtime_error {
 public:
  CorruptInput(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidInput(message);
}

}  // namespace lhzqec
