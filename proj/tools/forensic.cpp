// forensic: command-line front end for case evaluation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "forensic/case_file.hpp"
#include "forensic/error.hpp"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using forensic::Errc;
using forensic::Error;

constexpr int kUsageError = 1;
constexpr int kValidationError = 2;
constexpr int kComputeError = 3;

struct Options {
  std::string case_path;
  std::string format = "text";
  std::string dot_path;
  std::optional<double> theta;
  std::string freq_path;
  std::uint64_t seed = 1;
  std::string edition;

  std::string net_path;
  std::string target;
  std::vector<std::string> evidence;
  std::vector<std::string> s, t, given;

  std::string control, recovered, alternative = "two-sided";
  double lr = 1.0;
};

forensic::CaseOptions case_options(const Options& o) {
  forensic::CaseOptions c;
  c.theta = o.theta;
  if (!o.freq_path.empty()) c.frequencies = fs::path(o.freq_path);
  if (!o.edition.empty()) c.edition = forensic::parse_edition(o.edition);
  c.seed = o.seed;
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_argument, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string absolute(const std::string& p) { return fs::absolute(fs::path(p)).lexically_normal().string(); }

void emit(const forensic::Report& report, const Options& o) {
  if (!o.dot_path.empty()) {
    std::ofstream out(o.dot_path);
    if (!out) throw Error(Errc::invalid_argument, "cannot write " + o.dot_path);
    for (const auto& d : report.dot) out << d;
  }
  if (o.format == "json") {
    for (const auto& n : report.notices) std::cerr << "notice: " << n << "\n";
    std::cout << report.json;
  } else {
    std::cout << report.text;
  }
}

forensic::Report run_case_file(const Options& o, const std::set<std::string>& kinds, const std::string& command) {
  const auto text = read_file(o.case_path);
  const auto kind = forensic::case_kind(text);
  if (!kinds.count(kind)) {
    std::string allowed;
    for (const auto& k : kinds) allowed += (allowed.empty() ? "" : ", ") + k;
    throw Error(Errc::invalid_argument,
                o.case_path + ": case kind '" + kind + "' is not handled by '" + command + "' (expected " + allowed + ")");
  }
  try {
    return forensic::evaluate_case(text, fs::path(o.case_path).parent_path(), case_options(o));
  } catch (const Error& e) {
    throw Error(e.code(), o.case_path + ": " + e.detail());
  }
}

forensic::Report run_document(const nlohmann::ordered_json& doc, const Options& o) {
  return forensic::evaluate_case(doc.dump(), fs::current_path(), case_options(o));
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forensic evidence evaluation: likelihood ratios, mixtures, pedigrees and Bayesian networks"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--dot", o.dot_path, "Write the expanded network(s) as Graphviz DOT");
    sub->add_option("--edition", o.edition, "Verbal scale: evett1987, evett1998 or evett2000");
  };
  auto add_case = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--case", o.case_path, "Case file (JSON)");
    if (required) opt->required();
    sub->add_option("--theta", o.theta, "Co-ancestry coefficient override");
    sub->add_option("--freq", o.freq_path, "Allele frequency table override (JSON)");
    sub->add_option("--seed", o.seed, "Seed for Monte Carlo paths");
  };

  auto* lr = app.add_subcommand("lr", "Single-source, criminal-case and subpopulation likelihood ratios");
  add_case(lr, true);
  add_common(lr);
  auto* mixture = app.add_subcommand("mixture", "Mixture LR, exclusion, masking and fraction analyses");
  add_case(mixture, true);
  add_common(mixture);
  auto* pedigree = app.add_subcommand("pedigree", "Paternity index (trio or sibling of the putative father)");
  add_case(pedigree, true);
  add_common(pedigree);

  auto* glass = app.add_subcommand("glass", "Welch t-test on glass refractive indices");
  add_case(glass, false);
  add_common(glass);
  glass->add_option("--control", o.control, "Control sample CSV (header \"ri\")");
  glass->add_option("--recovered", o.recovered, "Recovered sample CSV (header \"ri\")");
  glass->add_option("--alternative", o.alternative, "two-sided, less or greater")
      ->check(CLI::IsMember({"two-sided", "less", "greater"}));

  auto* bn = app.add_subcommand("bn", "Bayesian network queries");
  bn->require_subcommand(1);
  auto* infer = bn->add_subcommand("infer", "Posterior marginal of one node");
  add_case(infer, false);
  add_common(infer);
  infer->add_option("--net", o.net_path, "Network document (JSON)");
  infer->add_option("--target", o.target, "Query node");
  infer->add_option("--evidence", o.evidence, "Findings node=state, comma separated");
  auto* ci = bn->add_subcommand("ci", "Conditional independence by moralization");
  add_case(ci, false);
  add_common(ci);
  ci->add_option("--net", o.net_path, "Network document (JSON)");
  ci->add_option("--s", o.s, "First node set, comma separated");
  ci->add_option("--t", o.t, "Second node set, comma separated");
  ci->add_option("--given", o.given, "Conditioning set, comma separated");

  auto* scale = app.add_subcommand("scale", "Verbal equivalent of a likelihood ratio");
  add_common(scale);
  scale->add_option("--lr", o.lr, "Likelihood ratio")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    forensic::Report report;
    if (lr->parsed()) {
      report = run_case_file(o, {"single_source", "criminal", "subpopulation"}, "lr");
    } else if (mixture->parsed()) {
      report = run_case_file(o, {"mixture", "mixture_network", "fraction"}, "mixture");
    } else if (pedigree->parsed()) {
      report = run_case_file(o, {"paternity", "sibling_paternity"}, "pedigree");
    } else if (glass->parsed()) {
      if (!o.case_path.empty()) {
        report = run_case_file(o, {"glass"}, "glass");
      } else {
        if (o.control.empty() || o.recovered.empty()) {
          std::cerr << "error: glass needs --case or both --control and --recovered\n";
          return kUsageError;
        }
        report = run_document({{"kind", "glass"},
                               {"control", absolute(o.control)},
                               {"recovered", absolute(o.recovered)},
                               {"alternative", o.alternative}},
                              o);
      }
    } else if (infer->parsed()) {
      if (!o.case_path.empty()) {
        report = run_case_file(o, {"bn_query"}, "bn infer");
      } else {
        if (o.net_path.empty() || o.target.empty()) {
          std::cerr << "error: bn infer needs --case or --net and --target\n";
          return kUsageError;
        }
        nlohmann::ordered_json ev = nlohmann::ordered_json::object();
        for (const auto& f : split_list(o.evidence)) {
          const auto eq = f.find('=');
          if (eq == std::string::npos || eq == 0 || eq + 1 == f.size()) {
            std::cerr << "error: evidence must be node=state, got '" << f << "'\n";
            return kUsageError;
          }
          ev[f.substr(0, eq)] = f.substr(eq + 1);
        }
        report = run_document({{"kind", "bn_query"}, {"network", absolute(o.net_path)}, {"target", o.target}, {"evidence", ev}}, o);
      }
    } else if (ci->parsed()) {
      if (!o.case_path.empty()) {
        report = run_case_file(o, {"ci_query"}, "bn ci");
      } else {
        if (o.net_path.empty() || o.s.empty() || o.t.empty()) {
          std::cerr << "error: bn ci needs --case or --net, --s and --t\n";
          return kUsageError;
        }
        report = run_document({{"kind", "ci_query"},
                               {"network", absolute(o.net_path)},
                               {"s", split_list(o.s)},
                               {"t", split_list(o.t)},
                               {"given", split_list(o.given)}},
                              o);
      }
    } else if (scale->parsed()) {
      report = run_document({{"kind", "scale"}, {"lr", o.lr}}, o);
    }
    emit(report, o);
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return forensic::is_validation_error(e.code()) ? kValidationError : kComputeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kComputeError;
  }
}
