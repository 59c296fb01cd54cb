#include "altgda/error.hpp"

namespace altgda {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kContract: return "contract violation";
    case ErrorKind::kScale: return "scale error";
    case ErrorKind::kDegenerate: return "degenerate game";
    case ErrorKind::kConfig: return "configuration error";
    case ErrorKind::kIo: return "I/O error";
    case ErrorKind::kNotAltGdaStep: return "not an AltGDA step";
    case ErrorKind::kPrecondition: return "precondition violated";
    case ErrorKind::kIndex: return "index error";
    case ErrorKind::kSampling: return "sampling error";
    case ErrorKind::kSolver: return "solver error";
    case ErrorKind::kCertificateRejected: return "certificate rejected";
    case ErrorKind::kReconstruction: return "reconstruction failed";
  }
  return "unknown error";
}

}  // namespace altgda
