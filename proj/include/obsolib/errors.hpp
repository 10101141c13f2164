#ifndef OBSOLIB_ERRORS_HPP
#define OBSOLIB_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace obsolib {

// Argument outside the mathematical domain of an operation (NaN, negative
// shape, probability outside [0,1], ...).
class DomainError : public std::invalid_argument {
public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Iterative routine exhausted its iteration budget.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string& what, std::size_t iterations)
      : std::runtime_error(what + " (after " + std::to_string(iterations) +
                           " iterations)"),
        iterations_(iterations) {}

  std::size_t iterations() const { return iterations_; }

private:
  std::size_t iterations_;
};

// Malformed input text: bad header, non-integer field, wrong column count.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

// Structurally valid input that cannot support the requested computation:
// empty sample, degenerate variance, underdispersed counts.
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Tail probability fell below the smallest representable positive double,
// so downstream ratios would be 0/0.  Carries the last age that was still
// representable.
class TailUnderflowError : public std::runtime_error {
public:
  TailUnderflowError(const std::string& what, std::int64_t largest_valid_x)
      : std::runtime_error(what), largest_valid_x_(largest_valid_x) {}

  std::int64_t largest_valid_x() const { return largest_valid_x_; }

private:
  std::int64_t largest_valid_x_;
};

}  // namespace obsolib

#endif
