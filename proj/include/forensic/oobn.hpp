#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forensic/bayesnet.hpp"
#include "forensic/evaluation.hpp"
#include "forensic/genetics.hpp"
#include "forensic/mixture.hpp"
#include "forensic/population.hpp"

namespace forensic::oobn {

/// Boolean node states; index 0 is "true".
inline const std::vector<std::string> kBoolStates{"true", "false"};

struct Port {
  std::string name;
  std::vector<std::string> states;
};

/// Port name -> node in the flat network.
using Bindings = std::map<std::string, bn::NodeId, std::less<>>;

/// A reusable sub-network. Instantiating it adds its internal nodes to a flat
/// network under `path.` and wires its input ports to existing nodes.
class ModuleTemplate {
 public:
  using Body = std::function<Bindings(bn::Network&, const std::string& path, const Bindings& inputs)>;

  ModuleTemplate(std::string name, std::vector<Port> inputs, std::vector<Port> outputs, Body body);

  const std::string& name() const noexcept { return name_; }
  const std::vector<Port>& inputs() const noexcept { return inputs_; }
  const std::vector<Port>& outputs() const noexcept { return outputs_; }

  /// Throws Errc::unbound_port, Errc::state_space_mismatch and
  /// Errc::name_collision.
  Bindings instantiate(bn::Network& net, std::string_view path, const Bindings& inputs = {}) const;

 private:
  std::string name_;
  std::vector<Port> inputs_;
  std::vector<Port> outputs_;
  Body body_;
};

/// Genotype labels "a/b" for i <= j, row-major.
std::vector<std::string> genotype_states(const Marker& marker);
std::size_t genotype_index(std::size_t i, std::size_t j, std::size_t alleles);
/// Throws Errc::unknown_allele.
std::size_t genotype_index(const Genotype& g, const Marker& marker);

/// Paternal and maternal genes drawn i.i.d. from the frequencies and their
/// unordered combination. Outputs: paternal_gene, maternal_gene, genotype.
ModuleTemplate founder_module(const MarkerFrequencies& freqs);

/// Founder whose genes are drawn from the table picked by a shared
/// subpopulation indicator. Input: subpopulation. Throws
/// Errc::incompatible_tables when allele labels differ.
ModuleTemplate subpopulation_founder_module(std::vector<const MarkerFrequencies*> tables,
                                            std::vector<std::string> subpopulation_names);

/// Unordered combination of two gene ports. Inputs: paternal_gene,
/// maternal_gene. Output: genotype.
ModuleTemplate genotype_module(const Marker& marker);

/// Transmission of one of the parent's two genes by a fair coin.
/// Input: parent_genotype. Output: gene.
ModuleTemplate meiosis_module(const Marker& marker);

/// Uniform miscopy: the original gene survives w.p. 1 - rate, otherwise
/// becomes one of the other K - 1 alleles uniformly.
struct MutationModel {
  double rate = 0.0;
};

/// Input: original_gene. Output: gene. Throws Errc::invalid_rate unless
/// 0 <= rate < 1.
ModuleTemplate mutation_module(const Marker& marker, MutationModel model);

/// Meiosis from both parents (with mutation when rate > 0) and the child's
/// genotype. Inputs: father_genotype, mother_genotype. Outputs:
/// paternal_gene, maternal_gene, genotype.
ModuleTemplate child_module(const Marker& marker, MutationModel model = {});

/// Identification: output copies if_true when the hypothesis holds, else
/// if_false. Inputs: hypothesis, if_true, if_false.
ModuleTemplate selector_module(std::vector<std::string> states, std::string output = "output");

/// Boolean channel flipping its input with probability `error_rate`.
/// Input: input. Output: output.
ModuleTemplate accuracy_module(double error_rate);

struct TestimonyRates {
  double sensation = 0.0;
  double objectivity = 0.0;
  double veracity = 0.0;
  double competence = 1.0;  // P(witness is competent); incompetent sensation is noise
};

/// Sensation (agreement gated by competence), objectivity and veracity
/// stages. Input: event. Output: report.
ModuleTemplate testimony_module(TestimonyRates rates);

struct FractionGrid {
  std::vector<double> values;  // contributor-1 DNA fractions, each in (0, 1)
  std::vector<double> prior;   // uniform when empty
};

/// Peak-height bins at one marker: the expected relative height of allele a
/// is (f c1(a) + (1 - f) c2(a)) / 2, binned to the nearest multiple of
/// 1/resolution. Inputs: fraction, genotype_1, genotype_2. Outputs:
/// peak.<allele> for every allele of the marker. Throws Errc::invalid_grid.
ModuleTemplate fraction_marker_module(const Marker& marker, const FractionGrid& grid, int resolution);

/// Bin of a relative peak height.
std::size_t peak_bin(double relative_height, int resolution);

/// Adds founder genes g1..gn coupled by the Polya urn of `model` under
/// `path.` (g1 from rho; g_n copies each earlier gene w.p. 1/(M+n-1)).
std::vector<bn::NodeId> add_polya_genes(bn::Network& net, std::string_view path,
                                        const Marker& marker, const DirichletModel& model, int n);

/// DNA evidence with testing error: defendant/source types feeding two
/// accuracy channels.
struct DnaTestingErrorParams {
  double prior_source = 0.5;
  double type_frequency = 0.01;
  double defendant_test_error = 0.0;
  double source_test_error = 0.0;
};
bn::Network dna_testing_error_network(const DnaTestingErrorParams& params);

/// Store break-in example: identification, witness, glass and DNA modules.
bn::Network fictional_crime_network();

enum class CaseKind { criminal, paternity, sibling_paternity, mixture_network, subpopulation, fraction };

std::string_view to_string(CaseKind kind) noexcept;
CaseKind parse_case_kind(std::string_view name);

enum class FounderModel { iid, polya };

/// Everything a case template needs. Participant roles:
///   criminal:          suspect, trace
///   paternity:         mother, child, putative_father
///   sibling_paternity: mother, child, sibling
///   mixture_network:   suspect, victim (+ observed)
///   subpopulation:     suspect, trace (+ subpopulations)
///   fraction:          contributor1, contributor2 optional (+ peaks, fraction)
struct CaseSpec {
  CaseKind kind = CaseKind::criminal;
  std::map<std::string, Profile, std::less<>> participants;
  AlleleFreqTable frequencies;
  std::vector<AlleleFreqTable> subpopulations;
  std::vector<double> subpopulation_weights;      // uniform when empty
  std::optional<std::string> clamp_subpopulation; // observe the indicator
  double prior = 0.5;                              // P(top hypothesis)
  MutationModel mutation;
  FounderModel founders = FounderModel::iid;
  double urn_concentration = 0.0;  // M; 0 uses the table's Dirichlet models
  ObservedAlleles observed;
  PeakProfile peaks;
  FractionGrid fraction;
  int peak_resolution = 20;
  std::vector<std::string> markers;  // restrict analysis; empty = all typed markers
};

struct CaseNetwork {
  std::string label;  // marker name, or "joint" for coupled templates
  bn::Network network;
  bn::Evidence evidence;
  std::vector<bn::NodeId> hypotheses;
};

/// Flattens a case into networks: one per marker, or a single coupled
/// network for the subpopulation and fraction templates. Expansion is
/// deterministic.
std::vector<CaseNetwork> expand(const CaseSpec& spec);

struct NetworkLR {
  LRValue lr;
  std::string engine;
};

/// Posterior odds on "suspect is guilty" divided by the prior odds, per
/// marker, multiplied across markers.
NetworkLR criminal_case_lr(const CaseSpec& spec);
/// Trio or sibling-of-putative-father paternity index.
NetworkLR paternity_lr(const CaseSpec& spec);

struct MixtureCell {
  bool individual1_is_suspect = true;
  bool individual2_is_victim = true;
};

struct MixtureNetworkResult {
  LRValue lr;
  /// Per marker P(observed alleles | cell) for cells (suspect, victim),
  /// (suspect, unknown), (unknown, victim), (unknown, unknown).
  std::vector<std::pair<std::string, std::array<double, 4>>> cell_likelihoods;
  std::string engine;
};

MixtureNetworkResult mixture_network_lr(const CaseSpec& spec, MixtureCell hp, MixtureCell hd);

/// Coupled criminal-case network with one shared subpopulation indicator.
bn::Network subpopulation_network(const CaseSpec& spec);
NetworkLR subpopulation_lr(const CaseSpec& spec);

struct FractionPosterior {
  std::vector<double> grid;
  std::vector<double> posterior;
};
FractionPosterior fraction_posterior(const CaseSpec& spec);

}  // namespace forensic::oobn
