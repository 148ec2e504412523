#pragma once

#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forensic/genetics.hpp"
#include "forensic/population.hpp"

namespace forensic {

enum class PropositionLevel { offense, activity, source };

std::string_view to_string(PropositionLevel level) noexcept;

/// A prosecution/defense proposition pair at one level of the hierarchy.
struct HypothesisPair {
  std::string prosecution;
  std::string defense;
  PropositionLevel level = PropositionLevel::source;
};

struct MarkerLR {
  std::string marker;
  double value = 1.0;
};

/// A likelihood ratio, possibly +infinity, optionally split into per-marker
/// components whose product is the combined value.
class LRValue {
 public:
  LRValue() = default;
  explicit LRValue(double value);
  static LRValue from_components(std::vector<MarkerLR> components);

  double value() const noexcept { return value_; }
  bool is_infinite() const noexcept { return value_ == std::numeric_limits<double>::infinity(); }
  const std::vector<MarkerLR>& components() const noexcept { return components_; }

 private:
  double value_ = 1.0;
  std::vector<MarkerLR> components_;
};

/// P(E|Hp) / P(E|Hd); +infinity when only the denominator vanishes.
/// Throws Errc::both_zero when the evidence is impossible under both.
LRValue likelihood_ratio(double p_e_hp, double p_e_hd);

/// Odds form of Bayes' theorem: posterior odds = prior odds x LR.
double posterior_odds(double prior_odds, const LRValue& lr);

/// Single-contributor stain matching the suspect: P(E|Hp) = 1 and the
/// denominator is the match probability, multiplied across markers.
LRValue single_source_lr(const Profile& suspect, const AlleleFreqTable& table, Theta theta);

enum class ScaleEdition { evett1987, evett1998, evett2000 };

struct VerbalBand {
  double lower = 1.0;  // exclusive
  double upper = std::numeric_limits<double>::infinity();  // inclusive
  std::string label;
};

class VerbalScale {
 public:
  static const VerbalScale& get(ScaleEdition edition);

  ScaleEdition edition() const noexcept { return edition_; }
  std::string_view name() const noexcept;
  const std::vector<VerbalBand>& bands() const noexcept { return bands_; }
  /// Band whose (lower, upper] interval holds `lr`; requires lr > 1.
  const VerbalBand& band_for(double lr) const;

 private:
  VerbalScale(ScaleEdition edition, std::vector<VerbalBand> bands);
  ScaleEdition edition_;
  std::vector<VerbalBand> bands_;
};

/// "evett1987" | "evett1998" | "evett2000".
ScaleEdition parse_edition(std::string_view name);

/// Verbal label for a likelihood ratio. LR = 1 is "neutral"; LR < 1 applies
/// the scale to 1/LR and reports "supports H_d (reciprocal band: ...)".
std::string verbal_category(const LRValue& lr, ScaleEdition edition);

/// Full sentence for a band, e.g. "The evidence has strong support for H_p
/// against H_d".
std::string verbal_statement(const LRValue& lr, ScaleEdition edition);

/// Human-readable LR; infinite values render as "LR > 10^9 (denominator zero)".
std::string format_lr(double lr);

}  // namespace forensic
