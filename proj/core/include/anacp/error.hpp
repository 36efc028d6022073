#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace anacp {

enum class Errc {
  bad_magic,
  truncated_file,
  label_out_of_range,
  too_many_tasks,
  dimension_mismatch,
  eig_decomposition_failure,
  singular_system,
  shrinking_targets,
  zero_vector,
  non_orthonormal_basis,
  too_few_classes,
  stats_out_of_sync,
  not_fitted,
  unknown_class,
  repeated_class,
  unknown_task,
  degenerate_baseline,
  invalid_argument,
  io_error,
  parse_error,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so callers
/// (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace anacp
