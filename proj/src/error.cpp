#include "forensic/error.hpp"

namespace forensic {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::malformed_table: return "MalformedTable";
    case Errc::frequency_sum_out_of_tolerance: return "FrequencySumOutOfTolerance";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::nonpositive_prior: return "NonpositivePrior";
    case Errc::too_many_draws: return "TooManyDraws";
    case Errc::unknown_marker: return "UnknownMarker";
    case Errc::unknown_allele: return "UnknownAllele";
    case Errc::invalid_theta: return "InvalidTheta";
    case Errc::both_zero: return "BothZero";
    case Errc::wrong_peak_count: return "WrongPeakCount";
    case Errc::too_many_contributors: return "TooManyContributors";
    case Errc::inconsistent_knowns: return "InconsistentKnowns";
    case Errc::cycle_detected: return "CycleDetected";
    case Errc::cpt_shape_mismatch: return "CptShapeMismatch";
    case Errc::row_not_normalized: return "RowNotNormalized";
    case Errc::unknown_node: return "UnknownNode";
    case Errc::not_polytree: return "NotPolytree";
    case Errc::impossible_evidence: return "ImpossibleEvidence";
    case Errc::state_space_too_large: return "StateSpaceTooLarge";
    case Errc::unbound_port: return "UnboundPort";
    case Errc::name_collision: return "NameCollision";
    case Errc::state_space_mismatch: return "StateSpaceMismatch";
    case Errc::invalid_rate: return "InvalidRate";
    case Errc::invalid_grid: return "InvalidGrid";
    case Errc::incompatible_tables: return "IncompatibleTables";
    case Errc::insufficient_data: return "InsufficientData";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

bool is_validation_error(Errc code) noexcept {
  switch (code) {
    case Errc::impossible_evidence:
    case Errc::state_space_too_large:
    case Errc::not_polytree:
    case Errc::both_zero:
      return false;
    default:
      return true;
  }
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code), detail_(message) {}

}  // namespace forensic
