#pragma once

#include <stdexcept>
#include <string>

namespace altgda {

// Failure categories surfaced by the library. The C API maps these onto
// altgda_status values one-to-one.
enum class ErrorKind {
  kContract = 1,        // dimension mismatch, empty input, invalid argument
  kScale,               // problem too large for an exact method
  kDegenerate,          // no verified equilibrium found
  kConfig,              // bad configuration / unknown tag
  kIo,                  // file cannot be read or written
  kNotAltGdaStep,       // replay of an AltGDA step does not match
  kPrecondition,        // stepsize / regime precondition violated
  kIndex,               // iterate index out of range
  kSampling,            // rejection sampler exhausted
  kSolver,              // external SDP solver failed
  kCertificateRejected, // solver output failed verification
  kReconstruction,      // worst-case replay diverged
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace altgda
