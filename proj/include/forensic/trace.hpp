#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "forensic/bayesnet.hpp"

namespace forensic {

/// Refractive-index readings of one glass sample.
struct RISample {
  std::string label;  // "control" or "recovered"
  std::vector<double> values;
};

enum class Alternative { two_sided, less, greater };

Alternative parse_alternative(std::string_view name);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  double mean_difference = 0.0;  // mean(control) - mean(recovered)
  /// Both samples constant with different means: t is infinite.
  bool degenerate = false;
};

/// Welch two-sample t-test with Welch-Satterthwaite degrees of freedom.
/// Throws Errc::insufficient_data when a sample has fewer than 2 readings.
/// Two constant samples give t = 0, p = 1 when equal and a degenerate
/// infinite t with p = 0 otherwise.
TTestResult glass_ri_ttest(const RISample& control, const RISample& recovered,
                           Alternative alternative = Alternative::two_sided);

/// One reading per line under a header line "ri". Blank lines are skipped.
/// Errors name the offending line.
std::vector<double> parse_ri_csv(std::string_view text);
std::vector<double> load_ri_csv(const std::filesystem::path& path);

/// Fragment-count states shared by the transfer, persistence and recovery
/// nodes.
inline const std::vector<std::string> kFragmentCounts{"0", "1", "2", "3", "4", "5+"};

/// Conditional tables of the transfer / persistence / recovery network,
/// row-major with the first parent most significant.
struct TransferModelParams {
  std::vector<std::string> distance_states;
  std::vector<double> distance_prior;
  std::vector<double> transfer;  // rows: distance

  std::vector<std::string> time_states;
  std::vector<double> time_prior;
  std::vector<std::string> garment_states;
  std::vector<double> garment_prior;
  std::vector<double> persistence;  // rows: transferred x time x garment

  std::vector<std::string> efficiency_states;
  std::vector<double> efficiency_prior;
  std::vector<double> recovery;  // rows: persisted x efficiency
};

/// Count after each fragment independently survives with probability
/// `keep`; "5+" is treated as five fragments. One row per input count.
std::vector<double> binomial_thinning(double keep);

/// Synthetic defaults: distance-dependent transfer, retention by elapsed
/// time and garment, recovery by lab efficiency.
TransferModelParams default_transfer_params();

/// distance -> transferred; transferred, time, garment -> persisted;
/// persisted, lab efficiency -> recovered. Throws the bayesnet validation
/// errors for malformed tables.
bn::Network build_transfer_network(const TransferModelParams& params);

}  // namespace forensic
