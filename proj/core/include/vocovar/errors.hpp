#ifndef VOCOVAR_ERRORS_HPP
#define VOCOVAR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vocovar {

// Base class for all domain errors thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A point lies at or behind a camera (z <= z_min) where a projection
// was required.
struct CheiralityViolation : Error {
  using Error::Error;
};

// An inverse depth was zero or negative.
struct InvalidInverseDepth : Error {
  using Error::Error;
};

// A factor or request references a variable that does not exist.
struct UnknownVariable : Error {
  using Error::Error;
};

// The normal equations are rank deficient; typically the gauge prior
// is missing.
struct SingularSystem : Error {
  using Error::Error;
};

// Cholesky pivot failure. pivot_index is the scalar index (in the
// elimination ordering) of the failing pivot, -1 when not applicable.
struct NotPositiveDefinite : Error {
  explicit NotPositiveDefinite(const std::string& msg, int pivot = -1)
      : Error(msg), pivot_index(pivot) {}
  int pivot_index;
};

// Matrix exceeds the size cap of the dense oracle.
struct DimensionTooLarge : Error {
  using Error::Error;
};

// Malformed input file. line is 1-based, 0 when unknown.
struct ParseError : Error {
  explicit ParseError(const std::string& msg, int line_number = 0)
      : Error(msg), line(line_number) {}
  int line;
};

// Structurally valid file whose contents violate dataset invariants.
struct ValidationError : Error {
  using Error::Error;
};

// A scenario specification produced an unusable scene.
struct DegenerateScenario : Error {
  using Error::Error;
};

// Filesystem-level failure (missing file, unwritable output).
struct IoError : Error {
  using Error::Error;
};

}  // namespace vocovar

#endif  // VOCOVAR_ERRORS_HPP
