#pragma once

#include <stdexcept>
#include <string>

namespace latticevar {

enum class ErrorCode {
  invalid_argument,
  degenerate,
  no_convergence,
  dimension_overflow,
  no_crossing,
  step_collapse,
  purity_projection,
};

/// Exception carrying a machine-readable code; the C API maps it to a status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace latticevar
