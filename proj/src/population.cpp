#include "forensic/population.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "forensic/error.hpp"
#include "json.hpp"

namespace forensic {

using ordered_json = nlohmann::ordered_json;

std::optional<std::size_t> Marker::find(std::string_view allele) const noexcept {
  for (std::size_t i = 0; i < alleles.size(); ++i) {
    if (alleles[i] == allele) return i;
  }
  return std::nullopt;
}

std::size_t Marker::index_of(std::string_view allele) const {
  if (auto i = find(allele)) return *i;
  throw Error(Errc::unknown_allele,
              "allele '" + std::string(allele) + "' is not defined for marker " + name);
}

DirichletModel::DirichletModel(std::vector<double> prior, std::vector<double> counts)
    : prior_(std::move(prior)), counts_(std::move(counts)) {
  if (prior_.size() != counts_.size() || prior_.empty()) {
    throw Error(Errc::dimension_mismatch, "prior has " + std::to_string(prior_.size()) +
                                              " entries, counts have " +
                                              std::to_string(counts_.size()));
  }
  for (double a : prior_) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw Error(Errc::nonpositive_prior, "Dirichlet prior parameters must be > 0");
    }
  }
  for (double y : counts_) {
    if (!(y >= 0.0) || !std::isfinite(y)) {
      throw Error(Errc::invalid_argument, "allele counts must be >= 0");
    }
  }
  concentration_ = 0.0;
  for (std::size_t j = 0; j < prior_.size(); ++j) concentration_ += prior_[j] + counts_[j];
  mean_.resize(prior_.size());
  for (std::size_t j = 0; j < prior_.size(); ++j) {
    mean_[j] = (prior_[j] + counts_[j]) / concentration_;
  }
}

DirichletModel DirichletModel::from_mean(std::span<const double> mean, double concentration) {
  if (!(concentration > 0.0)) {
    throw Error(Errc::nonpositive_prior, "concentration must be > 0");
  }
  std::vector<double> prior(mean.size());
  for (std::size_t j = 0; j < mean.size(); ++j) prior[j] = mean[j] * concentration;
  return DirichletModel(std::move(prior), std::vector<double>(mean.size(), 0.0));
}

std::vector<double> DirichletModel::posterior() const {
  std::vector<double> out(prior_.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = prior_[j] + counts_[j];
  return out;
}

double DirichletModel::total_counts() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), 0.0);
}

double MarkerFrequencies::freq(std::string_view allele) const {
  return freqs[marker.index_of(allele)];
}

void AlleleFreqTable::add_marker(Marker marker, std::vector<double> freqs) {
  if (marker.name.empty()) throw Error(Errc::malformed_table, "marker name is empty");
  if (contains(marker.name)) {
    throw Error(Errc::malformed_table, "duplicate marker " + marker.name);
  }
  if (marker.alleles.size() < 2) {
    throw Error(Errc::malformed_table, "marker " + marker.name + " needs at least two alleles");
  }
  if (marker.alleles.size() != freqs.size()) {
    throw Error(Errc::malformed_table, "marker " + marker.name + ": label/frequency count differ");
  }
  std::set<std::string> seen;
  for (const auto& a : marker.alleles) {
    if (!seen.insert(a).second) {
      throw Error(Errc::malformed_table, "marker " + marker.name + ": duplicate allele " + a);
    }
  }
  double sum = 0.0;
  for (double f : freqs) {
    if (!(f >= 0.0) || !std::isfinite(f)) {
      throw Error(Errc::malformed_table, "marker " + marker.name + ": negative frequency");
    }
    sum += f;
  }
  if (std::abs(sum - 1.0) > kRenormalizeTolerance) {
    std::ostringstream msg;
    msg.precision(10);
    msg << "marker " << marker.name << " frequencies sum to " << sum;
    throw Error(Errc::frequency_sum_out_of_tolerance, msg.str());
  }
  for (double& f : freqs) f /= sum;
  markers_.push_back(MarkerFrequencies{std::move(marker), std::move(freqs), std::nullopt});
}

void AlleleFreqTable::set_dirichlet(std::string_view marker, DirichletModel model) {
  for (auto& m : markers_) {
    if (m.marker.name == marker) {
      if (model.size() != m.marker.size()) {
        throw Error(Errc::dimension_mismatch,
                    "Dirichlet model size differs from marker " + m.marker.name);
      }
      m.dirichlet = std::move(model);
      return;
    }
  }
  throw Error(Errc::unknown_marker, std::string(marker));
}

bool AlleleFreqTable::contains(std::string_view marker) const noexcept {
  return std::any_of(markers_.begin(), markers_.end(),
                     [&](const MarkerFrequencies& m) { return m.marker.name == marker; });
}

const MarkerFrequencies& AlleleFreqTable::at(std::string_view marker) const {
  for (const auto& m : markers_) {
    if (m.marker.name == marker) return m;
  }
  throw Error(Errc::unknown_marker, "marker '" + std::string(marker) + "' not in frequency table");
}

AlleleFreqTable AlleleFreqTable::with_posterior_means() const {
  AlleleFreqTable out = *this;
  for (auto& m : out.markers_) {
    if (m.dirichlet) m.freqs = m.dirichlet->mean();
  }
  return out;
}

namespace {

std::vector<double> allele_values(const ordered_json& obj, const Marker& marker, double fallback,
                                  const char* what) {
  if (!obj.is_object()) {
    throw Error(Errc::malformed_table, std::string(what) + " for " + marker.name +
                                           " must be an object of allele -> number");
  }
  std::vector<double> out(marker.size(), fallback);
  for (const auto& [allele, value] : obj.items()) {
    auto idx = marker.find(allele);
    if (!idx) {
      throw Error(Errc::malformed_table, std::string(what) + " for " + marker.name +
                                             " names unknown allele " + allele);
    }
    if (!value.is_number()) {
      throw Error(Errc::malformed_table, std::string(what) + " entries must be numbers");
    }
    out[*idx] = value.get<double>();
  }
  return out;
}

}  // namespace

AlleleFreqTable parse_frequency_table(std::string_view json_text, std::string provenance) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::malformed_table, e.what());
  }
  if (!doc.is_object()) throw Error(Errc::malformed_table, "frequency table must be an object");

  AlleleFreqTable table;
  table.set_provenance(std::move(provenance));
  for (const auto& [key, value] : doc.items()) {
    if (key == "subpopulation") {
      if (!value.is_string()) throw Error(Errc::malformed_table, "subpopulation must be a string");
      table.set_subpopulation(value.get<std::string>());
      continue;
    }
    if (key == "dirichlet") continue;
    if (!value.is_object()) {
      throw Error(Errc::malformed_table, "marker " + key + " must map allele labels to numbers");
    }
    Marker marker{key, {}};
    std::vector<double> freqs;
    for (const auto& [allele, f] : value.items()) {
      if (!f.is_number()) {
        throw Error(Errc::malformed_table, "marker " + key + " allele " + allele + " is not a number");
      }
      marker.alleles.push_back(allele);
      freqs.push_back(f.get<double>());
    }
    table.add_marker(std::move(marker), std::move(freqs));
  }

  if (doc.contains("dirichlet")) {
    const auto& dir = doc["dirichlet"];
    if (!dir.is_object()) throw Error(Errc::malformed_table, "dirichlet must be an object");
    const ordered_json empty = ordered_json::object();
    const auto& alpha = dir.contains("alpha") ? dir["alpha"] : empty;
    const auto& counts = dir.contains("counts") ? dir["counts"] : empty;
    std::set<std::string> names;
    for (const auto& [m, _] : alpha.items()) names.insert(m);
    for (const auto& [m, _] : counts.items()) names.insert(m);
    // Keep table order for determinism.
    for (const auto& mf : table.markers()) {
      const auto& name = mf.marker.name;
      if (!names.count(name)) continue;
      names.erase(name);
      // Flat prior when alpha is omitted.
      auto a = alpha.contains(name) ? allele_values(alpha[name], mf.marker, 1.0, "alpha")
                                    : std::vector<double>(mf.marker.size(), 1.0);
      auto y = counts.contains(name) ? allele_values(counts[name], mf.marker, 0.0, "counts")
                                     : std::vector<double>(mf.marker.size(), 0.0);
      table.set_dirichlet(name, DirichletModel(std::move(a), std::move(y)));
    }
    if (!names.empty()) {
      throw Error(Errc::malformed_table, "dirichlet block names unknown marker " + *names.begin());
    }
  }
  return table;
}

AlleleFreqTable load_frequency_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::malformed_table, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_frequency_table(buf.str(), path.string());
}

DirichletModel dirichlet_posterior(std::span<const double> prior, std::span<const double> counts) {
  return DirichletModel({prior.begin(), prior.end()}, {counts.begin(), counts.end()});
}

std::vector<double> polya_marginal(const DirichletModel& model, int draw_index) {
  if (draw_index < 1) throw Error(Errc::invalid_argument, "draw index must be >= 1");
  // The n-th draw copies each earlier gene w.p. 1/(M+n-1) or draws fresh from
  // rho; by linearity its marginal follows from the expected earlier counts.
  const double m = model.concentration();
  const auto& rho = model.mean();
  std::vector<double> expected_counts(rho.size(), 0.0);
  std::vector<double> marginal = rho;
  for (int n = 1; n <= draw_index; ++n) {
    for (std::size_t a = 0; a < rho.size(); ++a) {
      marginal[a] = (expected_counts[a] + m * rho[a]) / (m + n - 1);
    }
    for (std::size_t a = 0; a < rho.size(); ++a) expected_counts[a] += marginal[a];
  }
  return marginal;
}

double PolyaJoint::at(std::span<const std::size_t> tuple) const {
  std::size_t idx = 0;
  for (std::size_t g : tuple) idx = idx * alleles + g;
  return probs.at(idx);
}

std::vector<double> PolyaJoint::draw_marginal(int i) const {
  std::vector<double> out(alleles, 0.0);
  std::size_t stride = 1;
  for (int d = draws - 1; d > i; --d) stride *= alleles;
  for (std::size_t idx = 0; idx < probs.size(); ++idx) {
    out[(idx / stride) % alleles] += probs[idx];
  }
  return out;
}

PolyaJoint polya_joint(const DirichletModel& model, int draws) {
  if (draws < 1) throw Error(Errc::invalid_argument, "need at least one draw");
  if (draws > kMaxPolyaDraws) {
    throw Error(Errc::too_many_draws, std::to_string(draws) + " draws exceeds the cap of " +
                                          std::to_string(kMaxPolyaDraws));
  }
  const std::size_t k = model.size();
  double states = std::pow(static_cast<double>(k), draws);
  if (states > 1e7) throw Error(Errc::state_space_too_large, "Polya joint too large");

  PolyaJoint joint{k, draws, std::vector<double>(static_cast<std::size_t>(states))};
  const double m = model.concentration();
  const auto& rho = model.mean();
  std::vector<std::size_t> tuple(draws);
  std::vector<int> counts(k);
  for (std::size_t idx = 0; idx < joint.probs.size(); ++idx) {
    std::size_t rest = idx;
    for (int d = draws - 1; d >= 0; --d) {
      tuple[d] = rest % k;
      rest /= k;
    }
    std::fill(counts.begin(), counts.end(), 0);
    double p = 1.0;
    for (int n = 0; n < draws; ++n) {
      const std::size_t a = tuple[n];
      p *= (counts[a] + m * rho[a]) / (m + n);
      ++counts[a];
    }
    joint.probs[idx] = p;
  }
  return joint;
}

}  // namespace forensic
