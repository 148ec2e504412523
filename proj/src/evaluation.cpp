#include "forensic/evaluation.hpp"

#include <cmath>
#include <sstream>

#include "forensic/error.hpp"

namespace forensic {

std::string_view to_string(PropositionLevel level) noexcept {
  switch (level) {
    case PropositionLevel::offense: return "offense";
    case PropositionLevel::activity: return "activity";
    case PropositionLevel::source: return "source";
  }
  return "source";
}

LRValue::LRValue(double value) : value_(value) {
  if (!(value >= 0.0)) throw Error(Errc::invalid_argument, "likelihood ratio must be >= 0");
}

LRValue LRValue::from_components(std::vector<MarkerLR> components) {
  double product = 1.0;
  for (const auto& c : components) {
    if (!(c.value >= 0.0)) throw Error(Errc::invalid_argument, "marker LR must be >= 0");
    product *= c.value;
  }
  // 0 x inf has no meaning as evidence weight.
  if (std::isnan(product)) {
    throw Error(Errc::both_zero, "markers disagree: one excludes, another has zero denominator");
  }
  LRValue lr(product);
  lr.components_ = std::move(components);
  return lr;
}

LRValue likelihood_ratio(double p_e_hp, double p_e_hd) {
  if (!(p_e_hp >= 0.0 && p_e_hp <= 1.0) || !(p_e_hd >= 0.0 && p_e_hd <= 1.0)) {
    throw Error(Errc::invalid_argument, "probabilities must lie in [0, 1]");
  }
  if (p_e_hp == 0.0 && p_e_hd == 0.0) {
    throw Error(Errc::both_zero, "evidence is impossible under both hypotheses");
  }
  if (p_e_hd == 0.0) return LRValue(std::numeric_limits<double>::infinity());
  return LRValue(p_e_hp / p_e_hd);
}

double posterior_odds(double prior_odds, const LRValue& lr) {
  if (!(prior_odds > 0.0)) throw Error(Errc::invalid_argument, "prior odds must be > 0");
  return prior_odds * lr.value();
}

LRValue single_source_lr(const Profile& suspect, const AlleleFreqTable& table, Theta theta) {
  if (suspect.empty()) throw Error(Errc::invalid_argument, "suspect profile is empty");
  std::vector<MarkerLR> parts;
  for (const auto& [marker, g] : suspect) {
    const double denom = match_prob(g, theta, table.at(marker));
    parts.push_back({marker, likelihood_ratio(1.0, denom).value()});
  }
  return LRValue::from_components(std::move(parts));
}

VerbalScale::VerbalScale(ScaleEdition edition, std::vector<VerbalBand> bands)
    : edition_(edition), bands_(std::move(bands)) {}

const VerbalScale& VerbalScale::get(ScaleEdition edition) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  static const VerbalScale e1987(ScaleEdition::evett1987,
                                 {{1.0, std::sqrt(10.0), "slightly increases the support"},
                                  {std::sqrt(10.0), std::pow(10.0, 1.5), "increases the support"},
                                  {std::pow(10.0, 1.5), std::pow(10.0, 2.5),
                                   "greatly increases the support"},
                                  {std::pow(10.0, 2.5), inf, "very greatly increases the support"}});
  static const VerbalScale e1998(ScaleEdition::evett1998, {{1.0, 10.0, "limited support"},
                                                           {10.0, 100.0, "moderate support"},
                                                           {100.0, 1000.0, "strong support"},
                                                           {1000.0, inf, "very strong support"}});
  static const VerbalScale e2000(ScaleEdition::evett2000,
                                 {{1.0, 10.0, "limited support"},
                                  {10.0, 100.0, "moderate support"},
                                  {100.0, 1000.0, "moderately strong support"},
                                  {1000.0, 10000.0, "strong support"},
                                  {10000.0, inf, "very strong support"}});
  switch (edition) {
    case ScaleEdition::evett1987: return e1987;
    case ScaleEdition::evett1998: return e1998;
    case ScaleEdition::evett2000: return e2000;
  }
  return e2000;
}

std::string_view VerbalScale::name() const noexcept {
  switch (edition_) {
    case ScaleEdition::evett1987: return "evett1987";
    case ScaleEdition::evett1998: return "evett1998";
    case ScaleEdition::evett2000: return "evett2000";
  }
  return "evett2000";
}

const VerbalBand& VerbalScale::band_for(double lr) const {
  if (!(lr > 1.0)) throw Error(Errc::invalid_argument, "verbal bands cover LR > 1 only");
  for (const auto& band : bands_) {
    if (lr > band.lower && lr <= band.upper) return band;
  }
  return bands_.back();
}

ScaleEdition parse_edition(std::string_view name) {
  if (name == "evett1987") return ScaleEdition::evett1987;
  if (name == "evett1998") return ScaleEdition::evett1998;
  if (name == "evett2000") return ScaleEdition::evett2000;
  throw Error(Errc::invalid_argument, "unknown verbal scale '" + std::string(name) + "'");
}

std::string verbal_category(const LRValue& lr, ScaleEdition edition) {
  const auto& scale = VerbalScale::get(edition);
  const double v = lr.value();
  if (v == 1.0) return "neutral";
  if (v > 1.0) return scale.band_for(v).label;
  const double reciprocal = v == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / v;
  return "supports H_d (reciprocal band: " + scale.band_for(reciprocal).label + ")";
}

std::string verbal_statement(const LRValue& lr, ScaleEdition edition) {
  const auto& scale = VerbalScale::get(edition);
  const double v = lr.value();
  if (v == 1.0) return "The evidence does not distinguish between H_p and H_d";
  const bool for_hp = v > 1.0;
  const double w = for_hp ? v : (v == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / v);
  const std::string& label = scale.band_for(w).label;
  const std::string dir = for_hp ? "H_p against H_d" : "H_d against H_p";
  if (edition == ScaleEdition::evett1987) return "The evidence " + label + " for " + dir;
  return "The evidence has " + label + " for " + dir;
}

std::string format_lr(double lr) {
  if (std::isinf(lr)) return "LR > 10^9 (denominator zero)";
  std::ostringstream out;
  out.precision(10);
  out << lr;
  return out.str();
}

}  // namespace forensic
