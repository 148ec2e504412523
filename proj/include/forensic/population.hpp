#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace forensic {

/// A genetic marker (locus) and the ordered list of allele labels it can carry.
struct Marker {
  std::string name;
  std::vector<std::string> alleles;

  std::size_t size() const noexcept { return alleles.size(); }
  std::optional<std::size_t> find(std::string_view allele) const noexcept;
  /// Throws Errc::unknown_allele.
  std::size_t index_of(std::string_view allele) const;
};

/// Sampling model for allele-frequency uncertainty at one marker: a flat or
/// informative Dirichlet prior updated with database allele counts.
class DirichletModel {
 public:
  /// Throws Errc::dimension_mismatch or Errc::nonpositive_prior.
  DirichletModel(std::vector<double> prior, std::vector<double> counts);

  /// Builds the model whose posterior mean is `mean` and whose posterior
  /// parameters sum to `concentration` (no separate prior/count split).
  static DirichletModel from_mean(std::span<const double> mean, double concentration);

  const std::vector<double>& prior() const noexcept { return prior_; }
  const std::vector<double>& counts() const noexcept { return counts_; }
  std::vector<double> posterior() const;
  std::size_t size() const noexcept { return prior_.size(); }
  double total_counts() const noexcept;   // N
  double concentration() const noexcept { return concentration_; }  // M = N + sum(alpha)
  const std::vector<double>& mean() const noexcept { return mean_; }  // rho

 private:
  std::vector<double> prior_;
  std::vector<double> counts_;
  double concentration_ = 0.0;
  std::vector<double> mean_;
};

struct MarkerFrequencies {
  Marker marker;
  std::vector<double> freqs;
  std::optional<DirichletModel> dirichlet;

  /// Throws Errc::unknown_allele.
  double freq(std::string_view allele) const;
};

/// Per-marker allele relative frequencies for one (sub)population.
class AlleleFreqTable {
 public:
  static constexpr double kRenormalizeTolerance = 1e-6;

  /// Adds a marker, renormalizing when the frequencies sum to 1 within
  /// kRenormalizeTolerance. Throws Errc::malformed_table or
  /// Errc::frequency_sum_out_of_tolerance.
  void add_marker(Marker marker, std::vector<double> freqs);
  void set_dirichlet(std::string_view marker, DirichletModel model);

  bool contains(std::string_view marker) const noexcept;
  /// Throws Errc::unknown_marker.
  const MarkerFrequencies& at(std::string_view marker) const;
  const std::vector<MarkerFrequencies>& markers() const noexcept { return markers_; }
  bool empty() const noexcept { return markers_.empty(); }

  const std::string& subpopulation() const noexcept { return subpopulation_; }
  void set_subpopulation(std::string name) { subpopulation_ = std::move(name); }
  const std::string& provenance() const noexcept { return provenance_; }
  void set_provenance(std::string source) { provenance_ = std::move(source); }

  /// Copy of this table where every marker with a Dirichlet model uses the
  /// posterior mean as its frequency vector.
  AlleleFreqTable with_posterior_means() const;

 private:
  std::vector<MarkerFrequencies> markers_;
  std::string subpopulation_;
  std::string provenance_;
};

/// Parses `{ marker: { allele: frequency } }` with optional top-level
/// "subpopulation" and "dirichlet": {"alpha": {...}, "counts": {...}}.
/// Allele order follows document order. Throws Errc::malformed_table and
/// Errc::frequency_sum_out_of_tolerance.
AlleleFreqTable parse_frequency_table(std::string_view json_text, std::string provenance);
AlleleFreqTable load_frequency_table(const std::filesystem::path& path);

/// Conjugate update of a Dirichlet prior with multinomial allele counts.
DirichletModel dirichlet_posterior(std::span<const double> prior, std::span<const double> counts);

/// Marginal distribution of the `draw_index`-th (1-based) founder gene drawn
/// from the Polya urn of `model`.
std::vector<double> polya_marginal(const DirichletModel& model, int draw_index);

inline constexpr int kMaxPolyaDraws = 6;

/// Exact joint distribution of the first `draws` founder genes under the urn
/// scheme, over allele tuples in row-major order (first draw most significant).
struct PolyaJoint {
  std::size_t alleles = 0;
  int draws = 0;
  std::vector<double> probs;

  double at(std::span<const std::size_t> tuple) const;
  /// Marginal of draw `i` (0-based) computed from the joint.
  std::vector<double> draw_marginal(int i) const;
};

/// Throws Errc::too_many_draws when draws > kMaxPolyaDraws.
PolyaJoint polya_joint(const DirichletModel& model, int draws);

}  // namespace forensic
