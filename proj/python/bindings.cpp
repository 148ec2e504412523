#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "forensic/bayesnet.hpp"
#include "forensic/case_file.hpp"
#include "forensic/error.hpp"
#include "forensic/evaluation.hpp"
#include "forensic/genetics.hpp"
#include "forensic/mixture.hpp"
#include "forensic/population.hpp"
#include "forensic/trace.hpp"

namespace py = pybind11;
using namespace forensic;

namespace {

// Python dict {allele: frequency} in insertion order.
MarkerFrequencies marker_freqs(const std::string& name, const std::vector<std::pair<std::string, double>>& freqs) {
  AlleleFreqTable t;
  Marker m{name, {}};
  std::vector<double> f;
  for (const auto& [a, p] : freqs) {
    m.alleles.push_back(a);
    f.push_back(p);
  }
  t.add_marker(std::move(m), std::move(f));
  return t.markers().front();
}

std::vector<std::pair<std::string, double>> items(const py::dict& d) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [k, v] : d) out.emplace_back(py::cast<std::string>(k), py::cast<double>(v));
  return out;
}

Profile profile_from(const std::map<std::string, std::string>& p) {
  Profile out;
  for (const auto& [m, g] : p) out.insert_or_assign(m, Genotype::parse(g));
  return out;
}

py::dict lr_dict(const LRValue& lr) {
  py::dict out;
  out["lr"] = lr.value();
  py::dict per;
  for (const auto& c : lr.components()) per[py::str(c.marker)] = c.value;
  out["per_marker"] = per;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Forensic likelihood-ratio and Bayesian network toolkit";

  static py::exception<Error> error(m, "ForensicError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def("likelihood_ratio", [](double hp, double hd) { return likelihood_ratio(hp, hd).value(); }, py::arg("p_e_hp"),
        py::arg("p_e_hd"));
  m.def("posterior_odds", [](double prior_odds, double lr) { return posterior_odds(prior_odds, LRValue(lr)); });
  m.def("verbal_category", [](double lr, const std::string& edition) {
    return verbal_category(LRValue(lr), parse_edition(edition));
  }, py::arg("lr"), py::arg("edition") = "evett2000");
  m.def("verbal_statement", [](double lr, const std::string& edition) {
    return verbal_statement(LRValue(lr), parse_edition(edition));
  }, py::arg("lr"), py::arg("edition") = "evett2000");

  m.def("match_prob", [](const std::string& genotype, double theta, const py::dict& freqs) {
    return match_prob(Genotype::parse(genotype), Theta::of(theta), marker_freqs("marker", items(freqs)));
  }, py::arg("genotype"), py::arg("theta"), py::arg("freqs"));
  m.def("genotype_prob_hwe", [](const std::string& genotype, const py::dict& freqs) {
    return genotype_prob_hwe(Genotype::parse(genotype), marker_freqs("marker", items(freqs)));
  });
  m.def("single_source_lr", [](const std::map<std::string, std::string>& profile, const std::string& table_json,
                               double theta) {
    return lr_dict(single_source_lr(profile_from(profile), parse_frequency_table(table_json, "python"), Theta::of(theta)));
  }, py::arg("profile"), py::arg("table_json"), py::arg("theta") = 0.0);

  m.def("exclusion_prob_locus", [](const std::vector<std::string>& observed, const py::dict& freqs, double theta) {
    return exclusion_prob_locus(observed, marker_freqs("marker", items(freqs)), Theta::of(theta));
  }, py::arg("observed"), py::arg("freqs"), py::arg("theta") = 0.0);
  m.def("combine_exclusion", [](const std::vector<double>& p) { return combine_exclusion(p); });
  m.def("mixture_proportion", [](const std::vector<double>& heights) {
    std::vector<Peak> peaks;
    for (double h : heights) peaks.push_back({"", h});
    return mixture_proportion(peaks);
  });
  m.def("masking_probability", [](int contributors, const std::vector<double>& freqs, int max_distinct) {
    std::vector<std::pair<std::string, double>> f;
    for (std::size_t i = 0; i < freqs.size(); ++i) f.emplace_back(std::to_string(i), freqs[i]);
    return masking_probability(contributors, marker_freqs("marker", f), max_distinct);
  });

  m.def("polya_marginal", [](const std::vector<double>& prior, const std::vector<double>& counts, int n) {
    return polya_marginal(DirichletModel(prior, counts), n);
  }, py::arg("prior"), py::arg("counts"), py::arg("draw_index"));
  m.def("polya_joint", [](const std::vector<double>& prior, const std::vector<double>& counts, int draws) {
    return polya_joint(DirichletModel(prior, counts), draws).probs;
  }, py::arg("prior"), py::arg("counts"), py::arg("draws"));

  m.def("glass_ri_ttest", [](const std::vector<double>& control, const std::vector<double>& recovered,
                             const std::string& alternative) {
    const auto r = glass_ri_ttest({"control", control}, {"recovered", recovered}, parse_alternative(alternative));
    py::dict out;
    out["t"] = r.t;
    out["df"] = r.df;
    out["p_value"] = r.p_value;
    out["mean_difference"] = r.mean_difference;
    out["degenerate"] = r.degenerate;
    return out;
  }, py::arg("control"), py::arg("recovered"), py::arg("alternative") = "two-sided");

  py::class_<bn::Network>(m, "Network")
      .def_static("from_json", [](const std::string& text) { return bn::parse_network(text); })
      .def("__len__", &bn::Network::size)
      .def("node_names", [](const bn::Network& net) {
        std::vector<std::string> out;
        for (const auto& n : net.nodes()) out.push_back(n.name);
        return out;
      })
      .def("is_polytree", [](const bn::Network& net) { return bn::is_polytree(net); })
      .def("infer", [](const bn::Network& net, const std::string& target,
                       const std::map<std::string, std::string>& evidence) {
        const auto node = net.id(target);
        const auto inf = bn::infer(net, bn::make_evidence(net, evidence), node);
        py::dict post;
        for (std::size_t s = 0; s < inf.posterior.size(); ++s) post[py::str(net.node(node).states[s])] = inf.posterior[s];
        return py::make_tuple(post, inf.engine);
      }, py::arg("target"), py::arg("evidence") = std::map<std::string, std::string>{})
      .def("conditionally_independent", [](const bn::Network& net, const std::vector<std::string>& s,
                                           const std::vector<std::string>& t, const std::vector<std::string>& u) {
        return bn::conditionally_independent(net, s, t, u);
      }, py::arg("s"), py::arg("t"), py::arg("given") = std::vector<std::string>{})
      .def("to_json", [](const bn::Network& net) { return bn::to_json(net); })
      .def("to_dot", [](const bn::Network& net) { return bn::to_dot(net); });

  m.def("evaluate_case", [](const std::string& text, const std::filesystem::path& base_dir, std::optional<double> theta,
                            std::optional<std::string> edition, std::uint64_t seed) {
    CaseOptions o;
    o.theta = theta;
    if (edition) o.edition = parse_edition(*edition);
    o.seed = seed;
    const auto r = evaluate_case(text, base_dir, o);
    return py::make_tuple(r.json, r.text);
  }, py::arg("text"), py::arg("base_dir") = std::filesystem::path("."), py::arg("theta") = py::none(),
        py::arg("edition") = py::none(), py::arg("seed") = 1);
}
