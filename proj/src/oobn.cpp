#include "forensic/oobn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "forensic/error.hpp"

namespace forensic::oobn {

using bn::Cpt;
using bn::Network;
using bn::NodeId;

namespace {

std::string join(std::string_view path, std::string_view local) {
  if (path.empty()) return std::string(local);
  return std::string(path) + "." + std::string(local);
}

std::vector<std::pair<std::size_t, std::size_t>> genotype_pairs(std::size_t k) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) out.emplace_back(i, j);
  }
  return out;
}

NodeId add_genotype_node(Network& net, const std::string& name, const Marker& marker, NodeId paternal,
                         NodeId maternal) {
  const std::size_t k = marker.size();
  std::vector<std::uint32_t> outcome(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      outcome[i * k + j] = static_cast<std::uint32_t>(genotype_index(i, j, k));
    }
  }
  const auto states = genotype_states(marker);
  return net.add_node(name, states, {paternal, maternal}, Cpt::deterministic(states.size(), std::move(outcome)));
}

void check_rate(double rate, std::string_view what) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error(Errc::invalid_rate, std::string(what) + " must lie in [0, 1), got " + std::to_string(rate));
  }
}

std::string grid_label(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

void validate_grid(const FractionGrid& grid, int resolution) {
  if (grid.values.empty()) throw Error(Errc::invalid_grid, "fraction grid is empty");
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    const double v = grid.values[i];
    if (!(v > 0.0 && v < 1.0)) throw Error(Errc::invalid_grid, "fraction grid values must lie in (0, 1)");
    if (i > 0 && !(v > grid.values[i - 1])) {
      throw Error(Errc::invalid_grid, "fraction grid must be strictly increasing");
    }
  }
  if (!grid.prior.empty()) {
    if (grid.prior.size() != grid.values.size()) {
      throw Error(Errc::invalid_grid, "fraction prior size differs from the grid");
    }
    double sum = 0.0;
    for (double p : grid.prior) {
      if (!(p >= 0.0)) throw Error(Errc::invalid_grid, "fraction prior must be nonnegative");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(Errc::invalid_grid, "fraction prior must sum to 1");
  }
  if (resolution < 1) throw Error(Errc::invalid_grid, "peak resolution must be >= 1");
}

std::vector<std::string> fraction_labels(const FractionGrid& grid) {
  std::vector<std::string> out;
  for (double v : grid.values) out.push_back(grid_label(v));
  return out;
}

std::vector<double> fraction_prior(const FractionGrid& grid) {
  if (!grid.prior.empty()) return grid.prior;
  return std::vector<double>(grid.values.size(), 1.0 / static_cast<double>(grid.values.size()));
}

}  // namespace

ModuleTemplate::ModuleTemplate(std::string name, std::vector<Port> inputs, std::vector<Port> outputs, Body body)
    : name_(std::move(name)), inputs_(std::move(inputs)), outputs_(std::move(outputs)), body_(std::move(body)) {}

Bindings ModuleTemplate::instantiate(Network& net, std::string_view path, const Bindings& inputs) const {
  const std::string where = "module " + name_ + " at '" + std::string(path) + "'";
  for (const auto& port : inputs_) {
    auto it = inputs.find(port.name);
    if (it == inputs.end()) throw Error(Errc::unbound_port, where + ": input port '" + port.name + "' is not bound");
    if (it->second >= net.size()) throw Error(Errc::unknown_node, where + ": port '" + port.name + "' bound to unknown node");
    if (net.node(it->second).states != port.states) {
      throw Error(Errc::state_space_mismatch, where + ": node '" + net.node(it->second).name +
                                                 "' does not match the state space of port '" + port.name + "'");
    }
  }
  for (const auto& [name, _] : inputs) {
    if (std::none_of(inputs_.begin(), inputs_.end(), [&](const Port& p) { return p.name == name; })) {
      throw Error(Errc::invalid_argument, where + ": no input port named '" + name + "'");
    }
  }
  return body_(net, std::string(path), inputs);
}

std::vector<std::string> genotype_states(const Marker& marker) {
  std::vector<std::string> out;
  for (const auto& [i, j] : genotype_pairs(marker.size())) out.push_back(marker.alleles[i] + "/" + marker.alleles[j]);
  return out;
}

std::size_t genotype_index(std::size_t i, std::size_t j, std::size_t alleles) {
  if (i > j) std::swap(i, j);
  return i * alleles - i * (i - 1) / 2 + (j - i);
}

std::size_t genotype_index(const Genotype& g, const Marker& marker) {
  return genotype_index(marker.index_of(g.first()), marker.index_of(g.second()), marker.size());
}

ModuleTemplate founder_module(const MarkerFrequencies& freqs) {
  const Marker& m = freqs.marker;
  return ModuleTemplate(
      "founder", {},
      {{"paternal_gene", m.alleles}, {"maternal_gene", m.alleles}, {"genotype", genotype_states(m)}},
      [freqs](Network& net, const std::string& path, const Bindings&) {
        const std::size_t k = freqs.marker.size();
        NodeId pg = net.add_node(join(path, "paternal_gene"), freqs.marker.alleles, {}, Cpt::dense(k, freqs.freqs));
        NodeId mg = net.add_node(join(path, "maternal_gene"), freqs.marker.alleles, {}, Cpt::dense(k, freqs.freqs));
        NodeId g = add_genotype_node(net, join(path, "genotype"), freqs.marker, pg, mg);
        return Bindings{{"paternal_gene", pg}, {"maternal_gene", mg}, {"genotype", g}};
      });
}

ModuleTemplate subpopulation_founder_module(std::vector<const MarkerFrequencies*> tables,
                                            std::vector<std::string> subpopulation_names) {
  if (tables.empty() || tables.size() != subpopulation_names.size()) {
    throw Error(Errc::invalid_argument, "need one frequency table per subpopulation");
  }
  const Marker marker = tables.front()->marker;
  std::vector<double> rows;
  for (const auto* t : tables) {
    if (t->marker.alleles != marker.alleles) {
      throw Error(Errc::incompatible_tables,
                  "subpopulation tables disagree on the allele labels of marker " + marker.name);
    }
    rows.insert(rows.end(), t->freqs.begin(), t->freqs.end());
  }
  return ModuleTemplate(
      "subpopulation_founder", {{"subpopulation", subpopulation_names}},
      {{"paternal_gene", marker.alleles}, {"maternal_gene", marker.alleles}, {"genotype", genotype_states(marker)}},
      [marker, rows](Network& net, const std::string& path, const Bindings& in) {
        const NodeId s = in.at("subpopulation");
        const std::size_t k = marker.size();
        NodeId pg = net.add_node(join(path, "paternal_gene"), marker.alleles, {s}, Cpt::dense(k, rows));
        NodeId mg = net.add_node(join(path, "maternal_gene"), marker.alleles, {s}, Cpt::dense(k, rows));
        NodeId g = add_genotype_node(net, join(path, "genotype"), marker, pg, mg);
        return Bindings{{"paternal_gene", pg}, {"maternal_gene", mg}, {"genotype", g}};
      });
}

ModuleTemplate genotype_module(const Marker& marker) {
  return ModuleTemplate("genotype", {{"paternal_gene", marker.alleles}, {"maternal_gene", marker.alleles}},
                        {{"genotype", genotype_states(marker)}},
                        [marker](Network& net, const std::string& path, const Bindings& in) {
                          NodeId g = add_genotype_node(net, join(path, "genotype"), marker,
                                                       in.at("paternal_gene"), in.at("maternal_gene"));
                          return Bindings{{"genotype", g}};
                        });
}

ModuleTemplate meiosis_module(const Marker& marker) {
  return ModuleTemplate(
      "meiosis", {{"parent_genotype", genotype_states(marker)}}, {{"gene", marker.alleles}},
      [marker](Network& net, const std::string& path, const Bindings& in) {
        const auto pairs = genotype_pairs(marker.size());
        NodeId coin = net.add_node(join(path, "coin"), {"first", "second"}, {}, Cpt::dense(2, {0.5, 0.5}));
        std::vector<std::uint32_t> outcome;
        for (const auto& [i, j] : pairs) {
          outcome.push_back(static_cast<std::uint32_t>(i));
          outcome.push_back(static_cast<std::uint32_t>(j));
        }
        NodeId gene = net.add_node(join(path, "gene"), marker.alleles, {in.at("parent_genotype"), coin},
                                   Cpt::deterministic(marker.size(), std::move(outcome)));
        return Bindings{{"gene", gene}};
      });
}

ModuleTemplate mutation_module(const Marker& marker, MutationModel model) {
  check_rate(model.rate, "mutation rate");
  return ModuleTemplate(
      "mutation", {{"original_gene", marker.alleles}}, {{"gene", marker.alleles}},
      [marker, model](Network& net, const std::string& path, const Bindings& in) {
        const std::size_t k = marker.size();
        const double off = k > 1 ? model.rate / static_cast<double>(k - 1) : 0.0;
        std::vector<double> values(k * k, off);
        for (std::size_t a = 0; a < k; ++a) values[a * k + a] = k > 1 ? 1.0 - model.rate : 1.0;
        NodeId gene = net.add_node(join(path, "gene"), marker.alleles, {in.at("original_gene")},
                                   Cpt::dense(k, std::move(values)));
        return Bindings{{"gene", gene}};
      });
}

ModuleTemplate child_module(const Marker& marker, MutationModel model) {
  check_rate(model.rate, "mutation rate");
  const auto gstates = genotype_states(marker);
  return ModuleTemplate(
      "child", {{"father_genotype", gstates}, {"mother_genotype", gstates}},
      {{"paternal_gene", marker.alleles}, {"maternal_gene", marker.alleles}, {"genotype", gstates}},
      [marker, model](Network& net, const std::string& path, const Bindings& in) {
        const auto meiosis = meiosis_module(marker);
        auto transmit = [&](const std::string& side, NodeId parent) {
          NodeId gene = meiosis.instantiate(net, join(path, side + "_meiosis"), {{"parent_genotype", parent}}).at("gene");
          if (model.rate > 0.0) {
            gene = mutation_module(marker, model)
                       .instantiate(net, join(path, side + "_mutation"), {{"original_gene", gene}})
                       .at("gene");
          }
          return gene;
        };
        NodeId pg = transmit("paternal", in.at("father_genotype"));
        NodeId mg = transmit("maternal", in.at("mother_genotype"));
        NodeId g = add_genotype_node(net, join(path, "genotype"), marker, pg, mg);
        return Bindings{{"paternal_gene", pg}, {"maternal_gene", mg}, {"genotype", g}};
      });
}

ModuleTemplate selector_module(std::vector<std::string> states, std::string output) {
  return ModuleTemplate(
      "selector", {{"hypothesis", kBoolStates}, {"if_true", states}, {"if_false", states}}, {{output, states}},
      [states, output](Network& net, const std::string& path, const Bindings& in) {
        const std::size_t k = states.size();
        std::vector<std::uint32_t> outcome(2 * k * k);
        for (std::size_t h = 0; h < 2; ++h) {
          for (std::size_t t = 0; t < k; ++t) {
            for (std::size_t f = 0; f < k; ++f) {
              outcome[(h * k + t) * k + f] = static_cast<std::uint32_t>(h == 0 ? t : f);
            }
          }
        }
        NodeId out = net.add_node(join(path, output), states,
                                  {in.at("hypothesis"), in.at("if_true"), in.at("if_false")},
                                  Cpt::deterministic(k, std::move(outcome)));
        return Bindings{{output, out}};
      });
}

ModuleTemplate accuracy_module(double error_rate) {
  check_rate(error_rate, "error rate");
  return ModuleTemplate("accuracy", {{"input", kBoolStates}}, {{"output", kBoolStates}},
                        [error_rate](Network& net, const std::string& path, const Bindings& in) {
                          const double e = error_rate;
                          NodeId out = net.add_node(join(path, "output"), kBoolStates, {in.at("input")},
                                                    Cpt::dense(2, {1.0 - e, e, e, 1.0 - e}));
                          return Bindings{{"output", out}};
                        });
}

ModuleTemplate testimony_module(TestimonyRates rates) {
  check_rate(rates.sensation, "sensation error rate");
  check_rate(rates.objectivity, "objectivity error rate");
  check_rate(rates.veracity, "veracity error rate");
  if (!(rates.competence >= 0.0 && rates.competence <= 1.0)) {
    throw Error(Errc::invalid_rate, "competence must lie in [0, 1]");
  }
  return ModuleTemplate(
      "testimony", {{"event", kBoolStates}}, {{"report", kBoolStates}},
      [rates](Network& net, const std::string& path, const Bindings& in) {
        NodeId agreement =
            accuracy_module(rates.sensation).instantiate(net, join(path, "agreement"), {{"input", in.at("event")}}).at("output");
        NodeId competent = net.add_node(join(path, "competent"), kBoolStates, {},
                                        Cpt::dense(2, {rates.competence, 1.0 - rates.competence}));
        // An incompetent witness senses noise.
        NodeId sensation = net.add_node(join(path, "sensation"), kBoolStates, {agreement, competent},
                                        Cpt::dense(2, {1.0, 0.0, 0.5, 0.5, 0.0, 1.0, 0.5, 0.5}));
        NodeId belief =
            accuracy_module(rates.objectivity).instantiate(net, join(path, "objectivity"), {{"input", sensation}}).at("output");
        NodeId report =
            accuracy_module(rates.veracity).instantiate(net, join(path, "veracity"), {{"input", belief}}).at("output");
        return Bindings{{"report", report}};
      });
}

std::size_t peak_bin(double relative_height, int resolution) {
  const double x = std::clamp(relative_height, 0.0, 1.0) * resolution;
  return static_cast<std::size_t>(std::llround(x));
}

ModuleTemplate fraction_marker_module(const Marker& marker, const FractionGrid& grid, int resolution) {
  validate_grid(grid, resolution);
  const auto gstates = genotype_states(marker);
  std::vector<Port> outputs;
  std::vector<std::string> bins;
  for (int b = 0; b <= resolution; ++b) bins.push_back(std::to_string(b));
  for (const auto& a : marker.alleles) outputs.push_back({"peak." + a, bins});
  return ModuleTemplate(
      "fraction_marker", {{"fraction", fraction_labels(grid)}, {"genotype_1", gstates}, {"genotype_2", gstates}},
      outputs, [marker, grid, resolution, bins](Network& net, const std::string& path, const Bindings& in) {
        const auto pairs = genotype_pairs(marker.size());
        const std::size_t g = pairs.size();
        Bindings out;
        for (std::size_t a = 0; a < marker.size(); ++a) {
          std::vector<std::uint32_t> outcome;
          outcome.reserve(grid.values.size() * g * g);
          for (double f : grid.values) {
            for (const auto& [i1, j1] : pairs) {
              const int c1 = (i1 == a) + (j1 == a);
              for (const auto& [i2, j2] : pairs) {
                const int c2 = (i2 == a) + (j2 == a);
                const double expected = (f * c1 + (1.0 - f) * c2) / 2.0;
                outcome.push_back(static_cast<std::uint32_t>(peak_bin(expected, resolution)));
              }
            }
          }
          const std::string port = "peak." + marker.alleles[a];
          out[port] = net.add_node(join(path, port), bins, {in.at("fraction"), in.at("genotype_1"), in.at("genotype_2")},
                                   Cpt::deterministic(bins.size(), std::move(outcome)));
        }
        return out;
      });
}

std::vector<NodeId> add_polya_genes(Network& net, std::string_view path, const Marker& marker,
                                    const DirichletModel& model, int n) {
  if (model.size() != marker.size()) {
    throw Error(Errc::dimension_mismatch, "urn model size differs from marker " + marker.name);
  }
  if (n < 1 || n > kMaxPolyaDraws) {
    throw Error(Errc::too_many_draws, "urn founders support 1.." + std::to_string(kMaxPolyaDraws) + " genes");
  }
  const std::size_t k = marker.size();
  const double m = model.concentration();
  const auto& rho = model.mean();
  std::vector<NodeId> genes;
  for (int i = 0; i < n; ++i) {
    std::size_t rows = 1;
    for (int j = 0; j < i; ++j) rows *= k;
    std::vector<double> values;
    values.reserve(rows * k);
    std::vector<std::size_t> tuple(i, 0);
    std::vector<int> count(k, 0);
    for (std::size_t r = 0; r < rows; ++r) {
      std::fill(count.begin(), count.end(), 0);
      for (std::size_t a : tuple) ++count[a];
      for (std::size_t a = 0; a < k; ++a) values.push_back((count[a] + m * rho[a]) / (m + i));
      for (int j = i; j-- > 0;) {
        if (++tuple[j] < k) break;
        tuple[j] = 0;
      }
    }
    genes.push_back(net.add_node(join(path, "g" + std::to_string(i + 1)), marker.alleles,
                                 std::vector<NodeId>(genes.begin(), genes.end()), Cpt::dense(k, std::move(values))));
  }
  return genes;
}

bn::Network dna_testing_error_network(const DnaTestingErrorParams& p) {
  if (!(p.prior_source > 0.0 && p.prior_source < 1.0)) {
    throw Error(Errc::invalid_argument, "prior must lie in (0, 1)");
  }
  if (!(p.type_frequency >= 0.0 && p.type_frequency <= 1.0)) {
    throw Error(Errc::invalid_argument, "type frequency must lie in [0, 1]");
  }
  Network net;
  const double q = p.type_frequency;
  NodeId src = net.add_node("identification.defendant_is_source", kBoolStates, {},
                            Cpt::dense(2, {p.prior_source, 1.0 - p.prior_source}));
  NodeId def = net.add_node("defendant.is_type_a", kBoolStates, {}, Cpt::dense(2, {q, 1.0 - q}));
  NodeId trace = net.add_node("source.is_type_a", kBoolStates, {src, def},
                              Cpt::dense(2, {1.0, 0.0, 0.0, 1.0, q, 1.0 - q, q, 1.0 - q}));
  accuracy_module(p.defendant_test_error).instantiate(net, "defendant_test", {{"input", def}});
  accuracy_module(p.source_test_error).instantiate(net, "source_test", {{"input", trace}});
  return net;
}

bn::Network fictional_crime_network() {
  Network net;
  NodeId guilty = net.add_node("identification.suspect_guilty", kBoolStates, {}, Cpt::dense(2, {0.3, 0.7}));
  NodeId claim = testimony_module({0.05, 0.05, 0.1, 0.9}).instantiate(net, "witness", {{"event", guilty}}).at("report");

  NodeId window = net.add_node("glass.window_is_source", kBoolStates, {guilty}, Cpt::dense(2, {0.9, 0.1, 0.01, 0.99}));
  NodeId common = net.add_node("glass.glass_type_common", kBoolStates, {}, Cpt::dense(2, {0.2, 0.8}));
  net.add_node("glass.matching_glass_on_clothes", kBoolStates, {window, common},
               Cpt::dense(2, {0.95, 0.05, 0.95, 0.05, 0.2, 0.8, 0.01, 0.99}));

  NodeId cashier = net.add_node("dna.cashier_is_source", kBoolStates, {guilty}, Cpt::dense(2, {0.8, 0.2, 0.001, 0.999}));
  net.add_node("dna.blood_on_clothes", kBoolStates, {claim, cashier},
               Cpt::dense(2, {0.9, 0.1, 0.3, 0.7, 0.7, 0.3, 0.05, 0.95}));
  NodeId match = net.add_node("dna.profile_match", kBoolStates, {cashier}, Cpt::dense(2, {1.0, 0.0, 1e-6, 1.0 - 1e-6}));
  accuracy_module(0.001).instantiate(net, "dna.lab", {{"input", match}});
  bn::ensure_valid(net);
  return net;
}

std::string_view to_string(CaseKind kind) noexcept {
  switch (kind) {
    case CaseKind::criminal: return "criminal";
    case CaseKind::paternity: return "paternity";
    case CaseKind::sibling_paternity: return "sibling_paternity";
    case CaseKind::mixture_network: return "mixture_network";
    case CaseKind::subpopulation: return "subpopulation";
    case CaseKind::fraction: return "fraction";
  }
  return "unknown";
}

CaseKind parse_case_kind(std::string_view name) {
  for (auto k : {CaseKind::criminal, CaseKind::paternity, CaseKind::sibling_paternity, CaseKind::mixture_network,
                 CaseKind::subpopulation, CaseKind::fraction}) {
    if (to_string(k) == name) return k;
  }
  throw Error(Errc::invalid_argument, "unknown case template '" + std::string(name) + "'");
}

namespace {

const Profile& participant(const CaseSpec& spec, std::string_view role) {
  auto it = spec.participants.find(role);
  if (it == spec.participants.end()) {
    throw Error(Errc::unbound_port, "case template " + std::string(to_string(spec.kind)) + " needs participant '" +
                                        std::string(role) + "'");
  }
  return it->second;
}

const Genotype& typed_at(const Profile& profile, std::string_view role, const std::string& marker) {
  auto it = profile.find(marker);
  if (it == profile.end()) {
    throw Error(Errc::invalid_argument, "participant '" + std::string(role) + "' is not typed at " + marker);
  }
  return it->second;
}

// Markers typed for every listed role, in table order, unless the case
// restricts them explicitly.
std::vector<std::string> case_markers(const CaseSpec& spec, std::initializer_list<std::string_view> roles) {
  if (!spec.markers.empty()) return spec.markers;
  std::vector<std::string> out;
  const auto& first = participant(spec, *roles.begin());
  for (const auto& [marker, _] : first) {
    bool all = true;
    for (auto role : roles) all = all && participant(spec, role).count(marker) > 0;
    if (all) out.push_back(marker);
  }
  if (out.empty()) throw Error(Errc::invalid_argument, "no marker is typed for every participant");
  return out;
}

NodeId add_hypothesis(Network& net, const std::string& name, double prior) {
  if (!(prior > 0.0 && prior < 1.0)) throw Error(Errc::invalid_argument, "prior must lie in (0, 1)");
  return net.add_node(name, kBoolStates, {}, Cpt::dense(2, {prior, 1.0 - prior}));
}

DirichletModel urn_model(const CaseSpec& spec, const MarkerFrequencies& f) {
  if (spec.urn_concentration > 0.0) return DirichletModel::from_mean(f.freqs, spec.urn_concentration);
  if (!f.dirichlet) {
    throw Error(Errc::invalid_argument, "urn founders need a concentration or a Dirichlet model for " + f.marker.name);
  }
  return *f.dirichlet;
}

CaseNetwork criminal_network(const CaseSpec& spec, const std::string& marker) {
  const auto& f = spec.frequencies.at(marker);
  const auto& suspect = typed_at(participant(spec, "suspect"), "suspect", marker);
  const auto& trace = typed_at(participant(spec, "trace"), "trace", marker);
  CaseNetwork c;
  c.label = marker;
  auto& net = c.network;
  NodeId h = add_hypothesis(net, "identification.suspect_guilty", spec.prior);
  Bindings s, o;
  if (spec.founders == FounderModel::iid) {
    s = founder_module(f).instantiate(net, "suspect");
    o = founder_module(f).instantiate(net, "offender");
  } else {
    auto g = add_polya_genes(net, "founders", f.marker, urn_model(spec, f), 4);
    s = genotype_module(f.marker).instantiate(net, "suspect", {{"paternal_gene", g[0]}, {"maternal_gene", g[1]}});
    o = genotype_module(f.marker).instantiate(net, "offender", {{"paternal_gene", g[2]}, {"maternal_gene", g[3]}});
  }
  NodeId t = selector_module(genotype_states(f.marker), "genotype")
                 .instantiate(net, "trace", {{"hypothesis", h}, {"if_true", s.at("genotype")}, {"if_false", o.at("genotype")}})
                 .at("genotype");
  c.evidence[s.at("genotype")] = genotype_index(suspect, f.marker);
  c.evidence[t] = genotype_index(trace, f.marker);
  c.hypotheses = {h};
  return c;
}

CaseNetwork paternity_network(const CaseSpec& spec, const std::string& marker, bool sibling) {
  const auto& f = spec.frequencies.at(marker);
  const std::string_view relative = sibling ? "sibling" : "putative_father";
  const auto& mother = typed_at(participant(spec, "mother"), "mother", marker);
  const auto& child = typed_at(participant(spec, "child"), "child", marker);
  const auto& rel = typed_at(participant(spec, relative), relative, marker);
  CaseNetwork c;
  c.label = marker;
  auto& net = c.network;
  NodeId h = add_hypothesis(net, "identification.putative_father_is_father", spec.prior);
  auto m = founder_module(f).instantiate(net, "mother");
  const auto child_tpl = child_module(f.marker, spec.mutation);
  NodeId pf, observed_relative;
  if (!sibling) {
    pf = founder_module(f).instantiate(net, "putative_father").at("genotype");
    observed_relative = pf;
  } else {
    auto gf = founder_module(f).instantiate(net, "grandfather").at("genotype");
    auto gm = founder_module(f).instantiate(net, "grandmother").at("genotype");
    pf = child_tpl.instantiate(net, "putative_father", {{"father_genotype", gf}, {"mother_genotype", gm}}).at("genotype");
    observed_relative =
        child_tpl.instantiate(net, "sibling", {{"father_genotype", gf}, {"mother_genotype", gm}}).at("genotype");
  }
  auto af = founder_module(f).instantiate(net, "alternative_father").at("genotype");
  NodeId tf = selector_module(genotype_states(f.marker), "genotype")
                  .instantiate(net, "true_father", {{"hypothesis", h}, {"if_true", pf}, {"if_false", af}})
                  .at("genotype");
  NodeId ch =
      child_tpl.instantiate(net, "child", {{"father_genotype", tf}, {"mother_genotype", m.at("genotype")}}).at("genotype");
  c.evidence[m.at("genotype")] = genotype_index(mother, f.marker);
  c.evidence[observed_relative] = genotype_index(rel, f.marker);
  c.evidence[ch] = genotype_index(child, f.marker);
  c.hypotheses = {h};
  return c;
}

CaseNetwork mixture_network(const CaseSpec& spec, const std::string& marker) {
  const auto& f = spec.frequencies.at(marker);
  auto obs_it = spec.observed.find(marker);
  if (obs_it == spec.observed.end() || obs_it->second.empty()) {
    throw Error(Errc::invalid_argument, "no observed alleles at " + marker);
  }
  std::vector<bool> observed(f.marker.size(), false);
  for (const auto& a : obs_it->second) observed[f.marker.index_of(a)] = true;
  const auto& suspect = typed_at(participant(spec, "suspect"), "suspect", marker);
  const auto& victim = typed_at(participant(spec, "victim"), "victim", marker);

  CaseNetwork c;
  c.label = marker;
  auto& net = c.network;
  NodeId h1 = add_hypothesis(net, "identification.individual1_is_suspect", 0.5);
  NodeId h2 = add_hypothesis(net, "identification.individual2_is_victim", 0.5);
  auto s = founder_module(f).instantiate(net, "suspect").at("genotype");
  auto v = founder_module(f).instantiate(net, "victim").at("genotype");
  auto u1 = founder_module(f).instantiate(net, "unknown1").at("genotype");
  auto u2 = founder_module(f).instantiate(net, "unknown2").at("genotype");
  const auto gstates = genotype_states(f.marker);
  const auto sel = selector_module(gstates, "genotype");
  NodeId i1 = sel.instantiate(net, "individual1", {{"hypothesis", h1}, {"if_true", s}, {"if_false", u1}}).at("genotype");
  NodeId i2 = sel.instantiate(net, "individual2", {{"hypothesis", h2}, {"if_true", v}, {"if_false", u2}}).at("genotype");

  const auto pairs = genotype_pairs(f.marker.size());
  auto indicator = [&](const std::string& name, auto&& present) {
    std::vector<std::uint32_t> outcome;
    for (const auto& g1 : pairs) {
      for (const auto& g2 : pairs) outcome.push_back(present(g1, g2) ? 0u : 1u);
    }
    return net.add_node(name, kBoolStates, {i1, i2}, Cpt::deterministic(2, std::move(outcome)));
  };
  for (std::size_t a = 0; a < f.marker.size(); ++a) {
    if (!observed[a]) continue;
    NodeId n = indicator("alleles." + f.marker.alleles[a], [a](const auto& g1, const auto& g2) {
      return g1.first == a || g1.second == a || g2.first == a || g2.second == a;
    });
    c.evidence[n] = 0;
  }
  NodeId other = indicator("alleles.other", [&](const auto& g1, const auto& g2) {
    return !observed[g1.first] || !observed[g1.second] || !observed[g2.first] || !observed[g2.second];
  });
  c.evidence[other] = 1;
  c.evidence[s] = genotype_index(suspect, f.marker);
  c.evidence[v] = genotype_index(victim, f.marker);
  c.hypotheses = {h1, h2};
  return c;
}

struct SubpopulationLayout {
  std::vector<std::string> names;
  std::vector<double> weights;
  std::vector<const AlleleFreqTable*> tables;
};

SubpopulationLayout subpopulation_layout(const CaseSpec& spec) {
  SubpopulationLayout out;
  if (spec.subpopulations.empty()) {
    out.tables.push_back(&spec.frequencies);
  } else {
    for (const auto& t : spec.subpopulations) out.tables.push_back(&t);
  }
  for (std::size_t i = 0; i < out.tables.size(); ++i) {
    std::string name = out.tables[i]->subpopulation();
    if (name.empty()) name = "subpopulation_" + std::to_string(i + 1);
    if (std::find(out.names.begin(), out.names.end(), name) != out.names.end()) {
      throw Error(Errc::name_collision, "duplicate subpopulation name '" + name + "'");
    }
    out.names.push_back(name);
  }
  if (spec.subpopulation_weights.empty()) {
    out.weights.assign(out.tables.size(), 1.0 / static_cast<double>(out.tables.size()));
  } else {
    if (spec.subpopulation_weights.size() != out.tables.size()) {
      throw Error(Errc::dimension_mismatch, "one mixing weight per subpopulation table is required");
    }
    double sum = 0.0;
    for (double w : spec.subpopulation_weights) {
      if (!(w >= 0.0)) throw Error(Errc::invalid_argument, "mixing weights must be nonnegative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(Errc::invalid_argument, "mixing weights must sum to 1");
    out.weights = spec.subpopulation_weights;
  }
  return out;
}

CaseNetwork subpopulation_case(const CaseSpec& spec) {
  const auto layout = subpopulation_layout(spec);
  const auto markers = case_markers(spec, {"suspect", "trace"});
  CaseNetwork c;
  c.label = "joint";
  auto& net = c.network;
  NodeId s = net.add_node("population.subpopulation", layout.names, {}, Cpt::dense(layout.names.size(), layout.weights));
  NodeId h = add_hypothesis(net, "identification.suspect_guilty", spec.prior);
  for (const auto& marker : markers) {
    std::vector<const MarkerFrequencies*> per_table;
    for (const auto* t : layout.tables) {
      if (!t->contains(marker)) {
        throw Error(Errc::incompatible_tables, "subpopulation table lacks marker " + marker);
      }
      per_table.push_back(&t->at(marker));
    }
    const auto founder = subpopulation_founder_module(per_table, layout.names);
    const Marker& m = per_table.front()->marker;
    auto sg = founder.instantiate(net, marker + ".suspect", {{"subpopulation", s}}).at("genotype");
    auto og = founder.instantiate(net, marker + ".offender", {{"subpopulation", s}}).at("genotype");
    NodeId t = selector_module(genotype_states(m), "genotype")
                   .instantiate(net, marker + ".trace", {{"hypothesis", h}, {"if_true", sg}, {"if_false", og}})
                   .at("genotype");
    c.evidence[sg] = genotype_index(typed_at(participant(spec, "suspect"), "suspect", marker), m);
    c.evidence[t] = genotype_index(typed_at(participant(spec, "trace"), "trace", marker), m);
  }
  if (spec.clamp_subpopulation) {
    c.evidence[s] = net.state_index(s, *spec.clamp_subpopulation);
  }
  c.hypotheses = {h};
  return c;
}

CaseNetwork fraction_case(const CaseSpec& spec) {
  validate_grid(spec.fraction, spec.peak_resolution);
  std::vector<std::string> markers = spec.markers;
  if (markers.empty()) {
    for (const auto& [marker, _] : spec.peaks) markers.push_back(marker);
  }
  if (markers.empty()) throw Error(Errc::invalid_argument, "fraction case needs peaks at one marker or more");
  CaseNetwork c;
  c.label = "joint";
  auto& net = c.network;
  NodeId fr = net.add_node("mixture.fraction", fraction_labels(spec.fraction), {},
                           Cpt::dense(spec.fraction.values.size(), fraction_prior(spec.fraction)));
  for (const auto& marker : markers) {
    const auto& f = spec.frequencies.at(marker);
    Bindings in{{"fraction", fr}};
    for (const char* role : {"contributor1", "contributor2"}) {
      auto g = founder_module(f).instantiate(net, marker + "." + role).at("genotype");
      in[std::string("genotype_") + role[11]] = g;
      auto p = spec.participants.find(role);
      if (p != spec.participants.end() && p->second.count(marker)) {
        c.evidence[g] = genotype_index(p->second.at(marker), f.marker);
      }
    }
    auto peaks = fraction_marker_module(f.marker, spec.fraction, spec.peak_resolution)
                     .instantiate(net, marker + ".peaks", in);
    auto pk = spec.peaks.find(marker);
    if (pk == spec.peaks.end() || pk->second.empty()) {
      throw Error(Errc::invalid_argument, "no peaks observed at " + marker);
    }
    double total = 0.0;
    for (const auto& p : pk->second) {
      if (!(p.height > 0.0)) throw Error(Errc::invalid_argument, "peak heights must be > 0");
      f.marker.index_of(p.allele);
      total += p.height;
    }
    for (const auto& a : f.marker.alleles) {
      double h = 0.0;
      for (const auto& p : pk->second) {
        if (p.allele == a) h += p.height;
      }
      c.evidence[peaks.at("peak." + a)] = peak_bin(h / total, spec.peak_resolution);
    }
  }
  c.hypotheses = {fr};
  return c;
}

// P(evidence and clamped states).
double clamped_probability(const Network& net, const bn::Evidence& evidence, const bn::Evidence& clamps) {
  bn::Evidence ev = evidence;
  for (const auto& [n, s] : clamps) ev[n] = s;
  return bn::evidence_probability(net, ev);
}

// Splits the evidence of a coupled network into groups that are independent
// given the shared root nodes: nodes sharing a name prefix before the first
// '.' belong to one marker.
std::vector<bn::Evidence> evidence_by_marker(const Network& net, const bn::Evidence& evidence,
                                             const std::vector<NodeId>& shared) {
  std::map<std::string, bn::Evidence> groups;
  for (const auto& [n, s] : evidence) {
    if (std::find(shared.begin(), shared.end(), n) != shared.end()) continue;
    const auto& name = net.node(n).name;
    groups[name.substr(0, name.find('.'))][n] = s;
  }
  std::vector<bn::Evidence> out;
  for (auto& [_, ev] : groups) out.push_back(std::move(ev));
  return out;
}

}  // namespace

std::vector<CaseNetwork> expand(const CaseSpec& spec) {
  if (spec.participants.empty() && spec.kind != CaseKind::fraction) {
    throw Error(Errc::unbound_port, "case has no participants");
  }
  std::vector<CaseNetwork> out;
  switch (spec.kind) {
    case CaseKind::criminal:
      for (const auto& m : case_markers(spec, {"suspect", "trace"})) out.push_back(criminal_network(spec, m));
      break;
    case CaseKind::paternity:
      for (const auto& m : case_markers(spec, {"child", "mother", "putative_father"})) {
        out.push_back(paternity_network(spec, m, false));
      }
      break;
    case CaseKind::sibling_paternity:
      for (const auto& m : case_markers(spec, {"child", "mother", "sibling"})) {
        out.push_back(paternity_network(spec, m, true));
      }
      break;
    case CaseKind::mixture_network: {
      std::vector<std::string> markers = spec.markers;
      if (markers.empty()) {
        for (const auto& [m, _] : spec.observed) markers.push_back(m);
      }
      if (markers.empty()) throw Error(Errc::invalid_argument, "mixture case has no observed markers");
      for (const auto& m : markers) out.push_back(mixture_network(spec, m));
      break;
    }
    case CaseKind::subpopulation:
      out.push_back(subpopulation_case(spec));
      break;
    case CaseKind::fraction:
      out.push_back(fraction_case(spec));
      break;
  }
  return out;
}

namespace {

NetworkLR hypothesis_lr(const std::vector<CaseNetwork>& nets, double prior) {
  std::vector<MarkerLR> parts;
  bool enumerated = false;
  for (const auto& c : nets) {
    const auto inf = bn::infer(c.network, c.evidence, c.hypotheses.front());
    enumerated = enumerated || inf.engine == "enumeration";
    // Posterior odds over prior odds, kept as a ratio of scaled likelihoods
    // so a vanishing denominator yields +inf instead of a division error.
    parts.push_back(
        {c.label, likelihood_ratio(inf.posterior[0] * (1.0 - prior), inf.posterior[1] * prior).value()});
  }
  return {LRValue::from_components(std::move(parts)), enumerated ? "enumeration" : "propagation"};
}

}  // namespace

NetworkLR criminal_case_lr(const CaseSpec& spec) {
  if (spec.kind != CaseKind::criminal) throw Error(Errc::invalid_argument, "not a criminal case");
  return hypothesis_lr(expand(spec), spec.prior);
}

NetworkLR paternity_lr(const CaseSpec& spec) {
  if (spec.kind != CaseKind::paternity && spec.kind != CaseKind::sibling_paternity) {
    throw Error(Errc::invalid_argument, "not a paternity case");
  }
  return hypothesis_lr(expand(spec), spec.prior);
}

MixtureNetworkResult mixture_network_lr(const CaseSpec& spec, MixtureCell hp, MixtureCell hd) {
  if (spec.kind != CaseKind::mixture_network) throw Error(Errc::invalid_argument, "not a mixture network case");
  MixtureNetworkResult out;
  out.engine = "enumeration";
  std::vector<MarkerLR> parts;
  auto cell_index = [](MixtureCell c) { return (c.individual1_is_suspect ? 0 : 2) + (c.individual2_is_victim ? 0 : 1); };
  for (const auto& c : expand(spec)) {
    const NodeId h1 = c.hypotheses[0];
    const NodeId h2 = c.hypotheses[1];
    bn::Evidence typed;
    for (const auto& [n, s] : c.evidence) {
      const auto& name = c.network.node(n).name;
      if (name.rfind("alleles.", 0) != 0) typed[n] = s;
    }
    std::array<double, 4> cells{};
    for (std::size_t i = 0; i < 4; ++i) {
      const bn::Evidence clamps{{h1, i / 2}, {h2, i % 2}};
      const double joint = clamped_probability(c.network, c.evidence, clamps);
      const double base = clamped_probability(c.network, typed, clamps);
      // Both sums run over the same configurations; clamp summation-order noise.
      cells[i] = base > 0.0 ? std::min(1.0, joint / base) : 0.0;
    }
    out.cell_likelihoods.emplace_back(c.label, cells);
    parts.push_back({c.label, likelihood_ratio(cells[cell_index(hp)], cells[cell_index(hd)]).value()});
  }
  out.lr = LRValue::from_components(std::move(parts));
  return out;
}

bn::Network subpopulation_network(const CaseSpec& spec) { return subpopulation_case(spec).network; }

NetworkLR subpopulation_lr(const CaseSpec& spec) {
  if (spec.kind != CaseKind::subpopulation) throw Error(Errc::invalid_argument, "not a subpopulation case");
  const auto c = subpopulation_case(spec);
  const auto& net = c.network;
  const NodeId s = net.id("population.subpopulation");
  const NodeId h = c.hypotheses.front();
  // Markers are independent given the indicator and the hypothesis, so the
  // joint sum factors into per-marker enumerations inside each clamp.
  const auto groups = evidence_by_marker(net, c.evidence, {s, h});
  std::vector<std::size_t> subpops;
  if (auto it = c.evidence.find(s); it != c.evidence.end()) {
    subpops.push_back(it->second);
  } else {
    for (std::size_t i = 0; i < net.node(s).states.size(); ++i) subpops.push_back(i);
  }
  std::array<double, 2> like{};
  for (std::size_t g = 0; g < 2; ++g) {
    for (std::size_t k : subpops) {
      const double w = net.node(s).cpt.prob(0, k);
      if (w == 0.0) continue;
      double term = w;
      for (const auto& ev : groups) {
        term *= clamped_probability(net, ev, {{s, k}, {h, g}}) / (w * net.node(h).cpt.prob(0, g));
      }
      like[g] += term;
    }
  }
  if (like[0] == 0.0 && like[1] == 0.0) throw Error(Errc::impossible_evidence, "evidence has probability zero");
  return {likelihood_ratio(like[0], like[1]), "enumeration"};
}

FractionPosterior fraction_posterior(const CaseSpec& spec) {
  if (spec.kind != CaseKind::fraction) throw Error(Errc::invalid_argument, "not a fraction case");
  const auto c = fraction_case(spec);
  const auto& net = c.network;
  const NodeId fr = c.hypotheses.front();
  const auto groups = evidence_by_marker(net, c.evidence, {fr});
  FractionPosterior out;
  out.grid = spec.fraction.values;
  const auto prior = fraction_prior(spec.fraction);
  for (std::size_t i = 0; i < prior.size(); ++i) {
    double p = prior[i];
    if (p > 0.0) {
      for (const auto& ev : groups) p *= clamped_probability(net, ev, {{fr, i}}) / prior[i];
    }
    out.posterior.push_back(p);
  }
  const double z = std::accumulate(out.posterior.begin(), out.posterior.end(), 0.0);
  if (!(z > 0.0)) throw Error(Errc::impossible_evidence, "peaks are impossible under every fraction on the grid");
  for (double& p : out.posterior) p /= z;
  return out;
}

}  // namespace forensic::oobn
