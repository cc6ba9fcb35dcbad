#pragma once

#include <stdexcept>
#include <string>

namespace conical {

enum class Errc {
  rank_deficient,
  dimension_mismatch,
  invalid_range,
  invalid_params,
  cube_not_found,
  not_nested,
  intermediate_doubling,
  empty_cube,
  not_doubling_root,
  cone_violation,
  empty_ball,
  too_large,
  unsupported_dimension,
  invalid_eta,
  graph_ambient_mismatch,
  invalid_spec,
  invalid_exponent,
  missing_direction,
  schema_mismatch,
  io,
  numerical,
};

const char* errc_name(Errc code);

/// Library-wide exception. `code()` identifies the failure class; the CLI maps
/// it onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace conical
