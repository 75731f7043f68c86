#include <cstdint>
#include <cstdio>
#include <sstream>

#include "fracstab/error.hpp"
#include "fracstab/format.hpp"
#include "fracstab/system.hpp"

namespace fracstab {

void SystemSpec::validate() const {
  order.validate();
  if (A.rows() == 0 || A.rows() != A.cols())
    throw Error(ErrorKind::shape, "system: A must be square and nonempty", "system.A");
  if (!A.allFinite()) throw Error(ErrorKind::domain, "system: A must be finite", "system.A");
  if (rho.size() != A.rows())
    throw Error(ErrorKind::shape, "system: rho length must match A", "system.rho");
  if (!rho.allFinite()) throw Error(ErrorKind::domain, "system: rho must be finite", "system.rho");
  coeffs.validate();
  if (coeffs.dim != A.rows())
    throw Error(ErrorKind::shape, "system: coefficient dimension must match A", "system.coefficients");
}

std::string SystemSpec::digest() const {
  std::ostringstream s;
  s << "alpha=" << format_double(order.alpha) << ";p=" << order.p << ";A=";
  for (Eigen::Index i = 0; i < A.size(); ++i) s << format_double(A.data()[i]) << ',';
  s << ";rho=";
  for (Eigen::Index i = 0; i < rho.size(); ++i) s << format_double(rho(i)) << ',';
  s << ";family=" << to_string(coeffs.family) << ";L=" << format_double(coeffs.L_g) << ','
    << format_double(coeffs.L_b) << ',' << format_double(coeffs.L_sigma) << ";params=" << coeffs.params;
  // FNV-1a, 64 bit
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s.str()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fracstab
