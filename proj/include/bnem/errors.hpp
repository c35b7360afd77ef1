#ifndef BNEM_ERRORS_HPP
#define BNEM_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace bnem {

/// Failure categories reported by the library. The CLI maps any Error to
/// exit code 1; usage (argv) problems never reach this type.
enum class ErrorKind {
  kIndex,           // out-of-range state or configuration index
  kMissingValue,    // operation requires a fully observed assignment
  kZeroEvidence,    // evidence has probability zero under the parameters
  kIncompleteData,  // complete-data operation fed a record with missing cells
  kPriorDomain,     // Dirichlet hyperparameters outside the estimator's domain
  kCorruptBounds,   // parameter interval with lower > upper
  kDegenerateRow,   // row with zero sum where a distribution is required
  kConfig,          // inconsistent learning configuration
  kCapacity,        // enumeration larger than the stated cap
  kParse,           // malformed input text
  kDomain,          // argument outside its documented range
  kIo,              // file could not be read or written
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, long record = -1)
      : std::runtime_error(std::move(message)), kind_(kind), record_(record) {}

  ErrorKind kind() const { return kind_; }

  /// Zero-based record index when the failure is tied to one, else -1.
  long record() const { return record_; }

 private:
  ErrorKind kind_;
  long record_;
};

}  // namespace bnem

#endif  // BNEM_ERRORS_HPP
