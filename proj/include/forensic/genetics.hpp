#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forensic/population.hpp"

namespace forensic {

/// Unordered allele pair at one marker; (a,b) and (b,a) compare equal.
class Genotype {
 public:
  Genotype(std::string a, std::string b);

  /// Accepts "a/b" or "a,b".
  static Genotype parse(std::string_view text);

  const std::string& first() const noexcept { return first_; }
  const std::string& second() const noexcept { return second_; }
  bool homozygous() const noexcept { return first_ == second_; }
  bool contains(std::string_view allele) const noexcept {
    return first_ == allele || second_ == allele;
  }
  std::string to_string() const { return first_ + "/" + second_; }

  friend bool operator==(const Genotype& x, const Genotype& y) noexcept {
    return (x.first_ == y.first_ && x.second_ == y.second_) ||
           (x.first_ == y.second_ && x.second_ == y.first_);
  }

 private:
  std::string first_;
  std::string second_;
};

/// Multi-marker profile: marker name -> genotype.
using Profile = std::map<std::string, Genotype, std::less<>>;

/// Co-ancestry coefficient in [0, 1].
class Theta {
 public:
  constexpr Theta() = default;
  /// Throws Errc::invalid_theta outside [0, 1].
  static Theta of(double value);
  /// "first-cousins" (0.0625), "siblings" (0.25), or a number.
  static Theta parse(std::string_view text);
  static Theta first_cousins() { return of(0.0625); }
  static Theta siblings() { return of(0.25); }

  constexpr double value() const noexcept { return value_; }

 private:
  explicit constexpr Theta(double v) : value_(v) {}
  double value_ = 0.0;
};

/// Hardy-Weinberg genotype probability: p^2 or 2 p_a p_b.
double genotype_prob_hwe(const Genotype& g, const MarkerFrequencies& freqs);

/// Product of per-marker HWE probabilities (linkage equilibrium).
double profile_prob(const Profile& profile, const AlleleFreqTable& table);

/// Probability that the next allele is `allele` given `copies` copies of it
/// among `sampled` alleles already seen in the subpopulation.
double conditional_allele_prob(std::string_view allele, int copies, int sampled, Theta theta,
                               const MarkerFrequencies& freqs);

struct AlleleCount {
  std::string allele;
  int count = 0;
};

/// Probability of one specific ordered draw sequence carrying these allele
/// counts, optionally after `given` alleles have already been sampled. The
/// sequential sampling model is exchangeable, so any ordering with the same
/// counts has the same probability.
double sequence_prob(std::span<const AlleleCount> draws, Theta theta,
                     const MarkerFrequencies& freqs, std::span<const AlleleCount> given = {});

inline constexpr int kMaxMultisetDraws = 8;

/// Type-ordered draw probability built by the sampling recursion. When two or
/// more allele types are present the first two draws are treated as one
/// unordered heterozygous pair (factor 2), which reproduces the closed forms
///   P(A^2)   = p_A (theta + (1-theta) p_A)
///   P(AB)    = 2 p_A p_B (1-theta)
///   P(A^4)   = P(A^2) (2theta+(1-theta)p_A)(3theta+(1-theta)p_A) / ((1+theta)(1+2theta))
///   P(A^2B^2)= P(AB) (theta+(1-theta)p_A)(theta+(1-theta)p_B) / ((1+theta)(1+2theta)).
/// Throws Errc::too_many_draws above kMaxMultisetDraws alleles.
double multiset_prob(std::span<const AlleleCount> counts, Theta theta,
                     const MarkerFrequencies& freqs);

/// P(next person has genotype `next` | `given` genotype already observed).
double conditional_genotype_prob(const Genotype& next, const Genotype& given, Theta theta,
                                 const MarkerFrequencies& freqs);

/// Probability that another person in the subpopulation shares the
/// suspect's genotype, conditioning on the suspect's two alleles.
double match_prob(const Genotype& suspect, Theta theta, const MarkerFrequencies& freqs);

/// All K(K+1)/2 unordered genotypes of a marker, in (i <= j) row-major order.
std::vector<Genotype> all_genotypes(const Marker& marker);

}  // namespace forensic
