#pragma once

#include <stdexcept>
#include <string>

namespace fracstab {

enum class ErrorKind {
  domain,           // argument outside the mathematical domain
  pole,             // evaluation at a pole of Gamma
  non_convergence,  // iteration or series cap reached
  shape,            // inconsistent dimensions
  precondition,     // structural precondition of a criterion failed
  numeric,          // overflow / non-finite state during simulation
  config,           // malformed or invalid run configuration
};

const char* to_string(ErrorKind kind) noexcept;

/// Library-wide exception. `field` names the offending input when known
/// (e.g. "system.A[1]" or "inputs.L_g").
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string field = {})
      : std::runtime_error(message), kind_(kind), field_(std::move(field)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorKind kind_;
  std::string field_;
};

}  // namespace fracstab
