#include "fracstab/error.hpp"

namespace fracstab {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::pole: return "pole";
    case ErrorKind::non_convergence: return "non_convergence";
    case ErrorKind::shape: return "shape";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

}  // namespace fracstab
