#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace khess {

/// Error taxonomy for the whole library.  The CLI maps kinds onto process
/// exit codes: Config -> 1, Hypothesis -> 2, everything numerical -> 3.
class Error : public std::runtime_error {
 public:
  enum class Kind {
    Argument,     // malformed arguments or out-of-range parameters
    Domain,       // evaluation outside a function's mathematical domain
    Range,        // requested value outside a cached or invertible range
    Singularity,  // singular submatrix / division hazard
    Hypothesis,   // a theorem hypothesis fails for the supplied problem
    Numerics,     // quadrature, bracketing, extrapolation or iteration failure
    Config,       // malformed configuration file or flags
  };

  Error(Kind kind, std::string what) : std::runtime_error(std::move(what)), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct ArgumentError : Error {
  explicit ArgumentError(std::string w) : Error(Kind::Argument, std::move(w)) {}
};
struct DomainError : Error {
  explicit DomainError(std::string w) : Error(Kind::Domain, std::move(w)) {}
};
struct RangeError : Error {
  explicit RangeError(std::string w) : Error(Kind::Range, std::move(w)) {}
};
struct SingularityError : Error {
  explicit SingularityError(std::string w) : Error(Kind::Singularity, std::move(w)) {}
};
struct HypothesisError : Error {
  explicit HypothesisError(std::string w) : Error(Kind::Hypothesis, std::move(w)) {}
};
struct NumericsError : Error {
  explicit NumericsError(std::string w) : Error(Kind::Numerics, std::move(w)) {}
};
struct ConfigError : Error {
  explicit ConfigError(std::string w) : Error(Kind::Config, std::move(w)) {}
};

}  // namespace khess
