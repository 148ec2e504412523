#include "forensic/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "forensic/error.hpp"

namespace forensic {

double mixture_proportion(std::span<const Peak> peaks) {
  if (peaks.size() != 4) {
    throw Error(Errc::wrong_peak_count,
                "mixture proportion needs exactly 4 peaks, got " + std::to_string(peaks.size()));
  }
  std::vector<double> h;
  for (const auto& p : peaks) {
    if (!(p.height > 0.0)) throw Error(Errc::invalid_argument, "peak heights must be > 0");
    h.push_back(p.height);
  }
  // Stable ascending order keeps tied peaks on the minor side.
  std::stable_sort(h.begin(), h.end());
  const double minor = h[0] + h[1];
  return minor / (minor + h[2] + h[3]);
}

namespace {

std::vector<std::size_t> observed_indices(std::span<const std::string> observed,
                                          const MarkerFrequencies& freqs) {
  std::set<std::size_t> idx;
  for (const auto& a : observed) idx.insert(freqs.marker.index_of(a));
  return {idx.begin(), idx.end()};
}

}  // namespace

double exclusion_prob_locus(std::span<const std::string> observed, const MarkerFrequencies& freqs,
                            Theta theta) {
  if (observed.empty()) throw Error(Errc::invalid_argument, "observed allele set is empty");
  double s = 0.0;
  for (std::size_t i : observed_indices(observed, freqs)) s += freqs.freqs[i];
  s = std::min(s, 1.0);
  return 1.0 - s * s - theta.value() * s * (1.0 - s);
}

double combine_exclusion(std::span<const double> per_locus) {
  double keep = 1.0;
  for (double p : per_locus) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::invalid_argument, "P_l must lie in [0, 1]");
    keep *= 1.0 - p;
  }
  return 1.0 - keep;
}

ExclusionResult exclusion_probability(const ObservedAlleles& observed, const AlleleFreqTable& table,
                                      Theta theta) {
  ExclusionResult out;
  out.theta = theta.value();
  std::vector<double> values;
  for (const auto& [marker, alleles] : observed) {
    const double pe = exclusion_prob_locus(alleles, table.at(marker), theta);
    out.per_locus.push_back({marker, pe});
    values.push_back(pe);
  }
  out.combined = combine_exclusion(values);
  return out;
}

namespace {

const Genotype& genotype_at(const Contributor& c, std::string_view marker) {
  auto it = c.profile.find(marker);
  if (it == c.profile.end()) {
    throw Error(Errc::invalid_argument,
                "contributor " + c.name + " has no genotype at marker " + std::string(marker));
  }
  return it->second;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

double mixture_likelihood(std::span<const std::string> observed, const MixtureHypothesis& hypothesis,
                          std::string_view marker, const MarkerFrequencies& freqs, Theta theta,
                          std::span<const AlleleCount> typed) {
  if (hypothesis.unknowns < 0 || hypothesis.total() < 1 ||
      hypothesis.total() > kMaxMixtureContributors) {
    throw Error(Errc::too_many_contributors,
                "hypothesis has " + std::to_string(hypothesis.total()) +
                    " contributors; supported range is 1.." +
                    std::to_string(kMaxMixtureContributors));
  }
  const auto obs = observed_indices(observed, freqs);
  if (obs.empty()) throw Error(Errc::invalid_argument, "observed allele set is empty");
  const std::size_t k = freqs.marker.size();

  std::vector<bool> in_obs(k, false);
  for (std::size_t a : obs) in_obs[a] = true;

  std::vector<bool> covered(k, false);
  for (const auto& c : hypothesis.known) {
    const auto& g = genotype_at(c, marker);
    for (const auto* allele : {&g.first(), &g.second()}) {
      const std::size_t a = freqs.marker.index_of(*allele);
      if (!in_obs[a]) {
        throw Error(Errc::inconsistent_knowns, "contributor " + c.name + " carries allele " +
                                                   *allele + " outside the observed set at " +
                                                   std::string(marker));
      }
      covered[a] = true;
    }
  }

  const int n = hypothesis.unknowns;
  auto all_covered = [&](const std::vector<bool>& cov) {
    return std::all_of(obs.begin(), obs.end(), [&](std::size_t a) { return cov[a]; });
  };
  if (n == 0) return all_covered(covered) ? 1.0 : 0.0;

  // Unknown genotypes restricted to observed alleles (any other allele would
  // break the exact cover).
  std::vector<std::pair<std::size_t, std::size_t>> genos;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    for (std::size_t j = i; j < obs.size(); ++j) genos.emplace_back(obs[i], obs[j]);
  }

  double total = 0.0;
  std::vector<std::size_t> pick(n, 0);
  std::vector<AlleleCount> draws;
  while (true) {
    std::vector<bool> cov = covered;
    for (std::size_t g : pick) {
      cov[genos[g].first] = true;
      cov[genos[g].second] = true;
    }
    if (all_covered(cov)) {
      // Ordered-tuple probability times the number of distinct orderings of
      // this multiset of unknown genotypes.
      std::vector<int> allele_counts(k, 0);
      double orders = 1.0;
      for (std::size_t g : pick) {
        ++allele_counts[genos[g].first];
        ++allele_counts[genos[g].second];
        if (genos[g].first != genos[g].second) orders *= 2.0;
      }
      draws.clear();
      for (std::size_t a = 0; a < k; ++a) {
        if (allele_counts[a] > 0) draws.push_back({freqs.marker.alleles[a], allele_counts[a]});
      }
      double perms = factorial(n);
      for (std::size_t i = 0; i < pick.size();) {
        std::size_t j = i;
        while (j < pick.size() && pick[j] == pick[i]) ++j;
        perms /= factorial(static_cast<int>(j - i));
        i = j;
      }
      total += perms * orders * sequence_prob(draws, theta, freqs, typed);
    }
    // Next non-decreasing tuple.
    int pos = n - 1;
    while (pos >= 0 && pick[pos] + 1 == genos.size()) --pos;
    if (pos < 0) break;
    ++pick[pos];
    for (int q = pos + 1; q < n; ++q) pick[q] = pick[pos];
  }
  return total;
}

LRValue mixture_lr(const ObservedAlleles& observed, const MixtureHypothesis& hp,
                   const MixtureHypothesis& hd, const AlleleFreqTable& table, Theta theta) {
  if (observed.empty()) throw Error(Errc::invalid_argument, "no markers observed");
  std::vector<const Contributor*> typed_people;
  std::set<std::string> names;
  for (const auto* h : {&hp, &hd}) {
    for (const auto& c : h->known) {
      if (names.insert(c.name).second) typed_people.push_back(&c);
    }
  }
  std::vector<MarkerLR> parts;
  for (const auto& [marker, alleles] : observed) {
    const auto& freqs = table.at(marker);
    std::vector<AlleleCount> typed;
    if (theta.value() > 0.0) {
      for (const auto* c : typed_people) {
        const auto& g = genotype_at(*c, marker);
        typed.push_back({g.first(), 1});
        typed.push_back({g.second(), 1});
      }
    }
    const double num = mixture_likelihood(alleles, hp, marker, freqs, theta, typed);
    const double den = mixture_likelihood(alleles, hd, marker, freqs, theta, typed);
    parts.push_back({marker, likelihood_ratio(num, den).value()});
  }
  return LRValue::from_components(std::move(parts));
}

double masking_probability(int contributors, const MarkerFrequencies& freqs, int max_distinct) {
  if (contributors < 1 || contributors > kMaxMixtureContributors) {
    throw Error(Errc::too_many_contributors,
                "masking probability supports 1.." + std::to_string(kMaxMixtureContributors) +
                    " contributors");
  }
  if (max_distinct < 0) throw Error(Errc::invalid_argument, "max_distinct must be >= 0");
  const int draws = 2 * contributors;
  const int k = static_cast<int>(freqs.marker.size());
  if (max_distinct >= draws || max_distinct >= k) return 1.0;

  // Multinomial sum over allele count vectors, tracking draws used and
  // distinct labels seen: weight prod p_i^c_i / c_i!, scaled by draws! at the end.
  std::vector<double> inv_fact(draws + 1, 1.0);
  for (int c = 1; c <= draws; ++c) inv_fact[c] = inv_fact[c - 1] / c;
  std::vector<std::vector<double>> f(draws + 1, std::vector<double>(draws + 1, 0.0));
  f[0][0] = 1.0;
  for (int i = 0; i < k; ++i) {
    const double p = freqs.freqs[i];
    std::vector<std::vector<double>> g(draws + 1, std::vector<double>(draws + 1, 0.0));
    for (int m = 0; m <= draws; ++m) {
      for (int j = 0; j <= draws; ++j) {
        if (f[m][j] == 0.0) continue;
        double pc = 1.0;
        for (int c = 0; m + c <= draws; ++c) {
          const int jj = c > 0 ? j + 1 : j;
          if (jj <= draws) g[m + c][jj] += f[m][j] * pc * inv_fact[c];
          pc *= p;
        }
      }
    }
    f = std::move(g);
  }
  double total = 0.0;
  for (int j = 0; j <= max_distinct; ++j) total += f[draws][j];
  return std::min(1.0, total / inv_fact[draws]);
}

MonteCarloEstimate masking_probability_mc(int contributors, const MarkerFrequencies& freqs,
                                          int max_distinct, std::uint64_t samples,
                                          std::uint64_t seed) {
  if (contributors < 1 || contributors > kMaxMixtureContributors) {
    throw Error(Errc::too_many_contributors, "masking probability supports 1..4 contributors");
  }
  if (samples == 0) throw Error(Errc::invalid_argument, "need at least one sample");
  std::vector<double> cumulative(freqs.freqs.size());
  std::partial_sum(freqs.freqs.begin(), freqs.freqs.end(), cumulative.begin());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, cumulative.back());
  std::vector<char> seen(freqs.freqs.size());
  std::uint64_t hits = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    std::fill(seen.begin(), seen.end(), 0);
    int distinct = 0;
    for (int d = 0; d < 2 * contributors; ++d) {
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), unit(rng));
      auto a = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
          it - cumulative.begin(), static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
      if (!seen[a]) {
        seen[a] = 1;
        ++distinct;
      }
    }
    if (distinct <= max_distinct) ++hits;
  }
  MonteCarloEstimate est;
  est.samples = samples;
  est.estimate = static_cast<double>(hits) / static_cast<double>(samples);
  est.standard_error =
      std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(samples));
  return est;
}

}  // namespace forensic
