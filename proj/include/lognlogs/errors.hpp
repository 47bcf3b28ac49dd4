#ifndef LOGNLOGS_ERRORS_HPP
#define LOGNLOGS_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lognlogs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (invalid parameters,
/// probabilities outside (0,1), nonpositive fluxes, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// A segment of the broken power law holds no observations, so its slope
/// is undefined.
class EmptySegmentError : public DomainError {
public:
  EmptySegmentError(std::size_t segment, const std::string& what)
      : DomainError(what), segment_(segment) {}
  std::size_t segment() const noexcept { return segment_; }

private:
  std::size_t segment_;
};

/// A computation produced a non-finite value despite the usual safeguards.
class NumericFailure : public Error {
public:
  using Error::Error;
};

/// Malformed input data; `line()` is 1-based, 0 when not tied to a line.
class DataError : public Error {
public:
  DataError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// An estimator could not produce a fit (degenerate or too small sample, an
/// M-step with no feasible breakpoint configuration, ...). When the failure
/// happens mid-iteration the last valid estimate is attached.
class FitError : public Error {
public:
  explicit FitError(const std::string& what) : Error(what) {}
  FitError(const std::string& what, std::vector<double> last_beta, std::vector<double> last_tau)
      : Error(what), last_beta_(std::move(last_beta)), last_tau_(std::move(last_tau)) {}
  bool has_last_estimate() const noexcept { return !last_beta_.empty(); }
  const std::vector<double>& last_beta() const noexcept { return last_beta_; }
  const std::vector<double>& last_tau() const noexcept { return last_tau_; }

private:
  std::vector<double> last_beta_;
  std::vector<double> last_tau_;
};

}  // namespace lognlogs

#endif  // LOGNLOGS_ERRORS_HPP
