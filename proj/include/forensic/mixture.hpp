#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "forensic/evaluation.hpp"
#include "forensic/genetics.hpp"
#include "forensic/population.hpp"

namespace forensic {

struct Peak {
  std::string allele;
  double height = 0.0;  // RFU
};

/// marker -> observed peaks
using PeakProfile = std::map<std::string, std::vector<Peak>, std::less<>>;

/// marker -> distinct observed allele labels
using ObservedAlleles = std::map<std::string, std::vector<std::string>, std::less<>>;

/// Minor-contributor proportion from a four-peak locus: the two smallest
/// peaks are minor (ties resolve toward minor). Throws Errc::wrong_peak_count.
double mixture_proportion(std::span<const Peak> peaks);

/// Random-man-not-excluded probability at one locus, with S the summed
/// frequency of the observed alleles: 1 - S^2 - theta S (1 - S).
double exclusion_prob_locus(std::span<const std::string> observed, const MarkerFrequencies& freqs,
                            Theta theta);

/// Cross-locus exclusion: 1 - prod(1 - P_l).
double combine_exclusion(std::span<const double> per_locus);

struct ExclusionResult {
  std::vector<MarkerLR> per_locus;  // value holds P_E at that locus
  double combined = 0.0;
  double theta = 0.0;

  double inclusion() const noexcept { return 1.0 - combined; }  // CPI
};

ExclusionResult exclusion_probability(const ObservedAlleles& observed, const AlleleFreqTable& table,
                                      Theta theta);

struct Contributor {
  std::string name;
  Profile profile;
};

/// Known contributors plus a count of unknown, unrelated contributors.
struct MixtureHypothesis {
  std::vector<Contributor> known;
  int unknowns = 0;

  int total() const noexcept { return static_cast<int>(known.size()) + unknowns; }
};

inline constexpr int kMaxMixtureContributors = 4;

/// P(observed allele set | hypothesis) at one marker: the union of all
/// contributors' alleles must equal the observed set exactly. Unknown
/// genotypes are sampled conditionally on `typed` (alleles of everyone typed
/// in the case) when theta > 0.
double mixture_likelihood(std::span<const std::string> observed, const MixtureHypothesis& hypothesis,
                          std::string_view marker, const MarkerFrequencies& freqs, Theta theta,
                          std::span<const AlleleCount> typed = {});

/// Exact-cover mixture LR across markers. Typed persons are the distinct
/// (by name) known contributors of both hypotheses. Throws
/// Errc::too_many_contributors and Errc::inconsistent_knowns.
LRValue mixture_lr(const ObservedAlleles& observed, const MixtureHypothesis& hp,
                   const MixtureHypothesis& hd, const AlleleFreqTable& table, Theta theta);

/// Probability that 2n i.i.d. allele draws at one marker show at most
/// `max_distinct` distinct labels (the masking effect).
double masking_probability(int contributors, const MarkerFrequencies& freqs, int max_distinct);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::uint64_t samples = 0;
};

MonteCarloEstimate masking_probability_mc(int contributors, const MarkerFrequencies& freqs,
                                          int max_distinct, std::uint64_t samples,
                                          std::uint64_t seed);

}  // namespace forensic
