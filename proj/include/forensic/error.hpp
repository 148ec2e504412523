#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace forensic {

enum class Errc {
  malformed_table,
  frequency_sum_out_of_tolerance,
  dimension_mismatch,
  nonpositive_prior,
  too_many_draws,
  unknown_marker,
  unknown_allele,
  invalid_theta,
  both_zero,
  wrong_peak_count,
  too_many_contributors,
  inconsistent_knowns,
  cycle_detected,
  cpt_shape_mismatch,
  row_not_normalized,
  unknown_node,
  not_polytree,
  impossible_evidence,
  state_space_too_large,
  unbound_port,
  name_collision,
  state_space_mismatch,
  invalid_rate,
  invalid_grid,
  incompatible_tables,
  insufficient_data,
  invalid_argument,
};

std::string_view errc_name(Errc code) noexcept;

/// True for errors caused by bad input documents or arguments, false for
/// failures that only show up while computing (impossible evidence, oversized
/// state spaces).
bool is_validation_error(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }
  /// Message without the error-name prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace forensic
