#include "forensic/genetics.hpp"

#include <charconv>
#include <cmath>

#include "forensic/error.hpp"

namespace forensic {

Genotype::Genotype(std::string a, std::string b) : first_(std::move(a)), second_(std::move(b)) {
  if (first_.empty() || second_.empty()) {
    throw Error(Errc::invalid_argument, "genotype alleles must be non-empty");
  }
}

Genotype Genotype::parse(std::string_view text) {
  auto sep = text.find_first_of("/,");
  if (sep == std::string_view::npos) {
    throw Error(Errc::invalid_argument, "genotype '" + std::string(text) + "' must look like a/b");
  }
  auto trim = [](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return std::string(s);
  };
  return Genotype(trim(text.substr(0, sep)), trim(text.substr(sep + 1)));
}

Theta Theta::of(double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(Errc::invalid_theta, "theta must lie in [0, 1]");
  }
  return Theta(value);
}

Theta Theta::parse(std::string_view text) {
  if (text == "first-cousins") return first_cousins();
  if (text == "siblings") return siblings();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(Errc::invalid_theta, "cannot parse theta '" + std::string(text) + "'");
  }
  return of(v);
}

double genotype_prob_hwe(const Genotype& g, const MarkerFrequencies& freqs) {
  const double pa = freqs.freq(g.first());
  if (g.homozygous()) return pa * pa;
  return 2.0 * pa * freqs.freq(g.second());
}

double profile_prob(const Profile& profile, const AlleleFreqTable& table) {
  double p = 1.0;
  for (const auto& [marker, g] : profile) p *= genotype_prob_hwe(g, table.at(marker));
  return p;
}

double conditional_allele_prob(std::string_view allele, int copies, int sampled, Theta theta,
                               const MarkerFrequencies& freqs) {
  if (copies < 0 || sampled < copies) {
    throw Error(Errc::invalid_argument, "need 0 <= copies <= sampled");
  }
  const double p = freqs.freq(allele);
  if (sampled == 0) return p;
  const double t = theta.value();
  return (copies * t + (1.0 - t) * p) / (1.0 + (sampled - 1) * t);
}

double sequence_prob(std::span<const AlleleCount> draws, Theta theta,
                     const MarkerFrequencies& freqs, std::span<const AlleleCount> given) {
  std::vector<int> seen(freqs.marker.size(), 0);
  int sampled = 0;
  for (const auto& g : given) {
    if (g.count < 0) throw Error(Errc::invalid_argument, "negative allele count");
    seen[freqs.marker.index_of(g.allele)] += g.count;
    sampled += g.count;
  }
  double p = 1.0;
  for (const auto& d : draws) {
    if (d.count < 0) throw Error(Errc::invalid_argument, "negative allele count");
    const std::size_t a = freqs.marker.index_of(d.allele);
    for (int c = 0; c < d.count; ++c) {
      p *= conditional_allele_prob(d.allele, seen[a], sampled, theta, freqs);
      ++seen[a];
      ++sampled;
    }
  }
  return p;
}

double multiset_prob(std::span<const AlleleCount> counts, Theta theta,
                     const MarkerFrequencies& freqs) {
  int total = 0;
  int types = 0;
  for (const auto& c : counts) {
    if (c.count < 0) throw Error(Errc::invalid_argument, "negative allele count");
    total += c.count;
    if (c.count > 0) ++types;
  }
  if (total > kMaxMultisetDraws) {
    throw Error(Errc::too_many_draws, std::to_string(total) + " alleles exceeds the cap of " +
                                          std::to_string(kMaxMultisetDraws));
  }
  const double seed_pair_orders = types >= 2 ? 2.0 : 1.0;
  return seed_pair_orders * sequence_prob(counts, theta, freqs);
}

double conditional_genotype_prob(const Genotype& next, const Genotype& given, Theta theta,
                                 const MarkerFrequencies& freqs) {
  const AlleleCount seen[] = {{given.first(), 1}, {given.second(), 1}};
  const AlleleCount draw[] = {{next.first(), 1}, {next.second(), 1}};
  const double orders = next.homozygous() ? 1.0 : 2.0;
  return orders * sequence_prob(draw, theta, freqs, seen);
}

double match_prob(const Genotype& suspect, Theta theta, const MarkerFrequencies& freqs) {
  return conditional_genotype_prob(suspect, suspect, theta, freqs);
}

std::vector<Genotype> all_genotypes(const Marker& marker) {
  std::vector<Genotype> out;
  out.reserve(marker.size() * (marker.size() + 1) / 2);
  for (std::size_t i = 0; i < marker.size(); ++i) {
    for (std::size_t j = i; j < marker.size(); ++j) {
      out.emplace_back(marker.alleles[i], marker.alleles[j]);
    }
  }
  return out;
}

}  // namespace forensic
