#include "forensic/case_file.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "forensic/bayesnet.hpp"
#include "forensic/error.hpp"
#include "forensic/genetics.hpp"
#include "forensic/mixture.hpp"
#include "forensic/oobn.hpp"
#include "forensic/trace.hpp"
#include "json.hpp"

namespace forensic {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw Error(Errc::invalid_argument, "case " + where + ": " + what);
}

json parse_document(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::invalid_argument, what + ": " + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_argument, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) bad(where, std::string("missing \"") + key + "\"");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  return j.get<double>();
}

std::string string(const json& j, const std::string& where) {
  if (!j.is_string()) bad(where, "expected a string");
  return j.get<std::string>();
}

std::vector<std::string> strings(const json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& x : j) out.push_back(string(x, where));
  return out;
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(number(x, where));
  return out;
}

Profile parse_profile(const json& j, const std::string& where) {
  if (!j.is_object()) bad(where, "profile must map marker -> \"a/b\"");
  Profile out;
  for (const auto& [marker, g] : j.items()) out.insert_or_assign(marker, Genotype::parse(string(g, where + "/" + marker)));
  return out;
}

struct Context {
  json doc;
  std::filesystem::path base_dir;
  CaseOptions options;
  ScaleEdition edition = ScaleEdition::evett2000;
  std::string kind;
  std::vector<std::string> provenance;
  std::vector<std::string> dot;
  std::vector<std::string> notices;

  std::filesystem::path resolve(const std::string& p) const {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  }

  AlleleFreqTable table_from(const json& j, const std::string& where) {
    if (j.is_string()) {
      const auto path = resolve(j.get<std::string>());
      provenance.push_back(j.get<std::string>());
      return parse_frequency_table(read_file(path), j.get<std::string>());
    }
    if (j.is_object()) {
      provenance.push_back("inline:" + where);
      return parse_frequency_table(j.dump(), "inline");
    }
    bad(where, "frequency table must be a path or an object");
  }

  AlleleFreqTable frequencies() {
    if (options.frequencies) {
      provenance.push_back(options.frequencies->string());
      return parse_frequency_table(read_file(*options.frequencies), options.frequencies->string());
    }
    return table_from(require(doc, "frequencies", "/"), "/frequencies");
  }

  Theta theta() const {
    if (options.theta) return Theta::of(*options.theta);
    if (!doc.contains("theta")) return Theta{};
    const auto& t = doc.at("theta");
    if (t.is_string()) return Theta::parse(t.get<std::string>());
    return Theta::of(number(t, "/theta"));
  }

  std::map<std::string, Profile, std::less<>> participants() const {
    std::map<std::string, Profile, std::less<>> out;
    if (!doc.contains("participants")) return out;
    const auto& p = doc.at("participants");
    if (!p.is_object()) bad("/participants", "expected an object of role -> profile");
    for (const auto& [role, profile] : p.items()) out.emplace(role, parse_profile(profile, "/participants/" + role));
    return out;
  }

  ObservedAlleles observed() const {
    ObservedAlleles out;
    const auto& o = require(doc, "observed", "/");
    if (!o.is_object()) bad("/observed", "expected marker -> [alleles]");
    for (const auto& [marker, alleles] : o.items()) out.emplace(marker, strings(alleles, "/observed/" + marker));
    return out;
  }

  PeakProfile peaks() const {
    PeakProfile out;
    const auto& o = require(doc, "peaks", "/");
    if (!o.is_object()) bad("/peaks", "expected marker -> {allele: height}");
    for (const auto& [marker, heights] : o.items()) {
      const std::string where = "/peaks/" + marker;
      if (!heights.is_object()) bad(where, "expected {allele: height}");
      auto& list = out[marker];
      for (const auto& [allele, h] : heights.items()) list.push_back({allele, number(h, where + "/" + allele)});
    }
    return out;
  }
};

json lr_json(double v) {
  if (std::isinf(v)) return nullptr;
  return v;
}

std::string lr_line(double v) {
  if (std::isinf(v)) return format_lr(v);
  return "LR = " + format_lr(v);
}

json base_report(const Context& ctx) {
  json r;
  r["kind"] = ctx.kind;
  r["lr"] = nullptr;
  r["lr_text"] = nullptr;
  r["per_marker"] = json::array();
  r["verbal"] = nullptr;
  r["engine"] = nullptr;
  r["theta"] = nullptr;
  r["provenance"] = json::array();
  return r;
}

void set_lr(json& r, const LRValue& lr, ScaleEdition edition) {
  r["lr"] = lr_json(lr.value());
  r["lr_text"] = lr_line(lr.value());
  for (const auto& c : lr.components()) {
    r["per_marker"].push_back({{"marker", c.marker}, {"lr", lr_json(c.value)}, {"lr_text", lr_line(c.value)}});
  }
  r["verbal"] = {{"edition", VerbalScale::get(edition).name()},
                 {"category", verbal_category(lr, edition)},
                 {"statement", verbal_statement(lr, edition)}};
}

void add_dot(Context& ctx, const std::vector<oobn::CaseNetwork>& nets) {
  for (const auto& c : nets) ctx.dot.push_back(bn::to_dot(c.network, c.evidence));
}

oobn::CaseSpec case_spec(Context& ctx, oobn::CaseKind kind) {
  oobn::CaseSpec spec;
  spec.kind = kind;
  spec.participants = ctx.participants();
  const auto& d = ctx.doc;
  if (kind != oobn::CaseKind::subpopulation || !d.contains("subpopulations")) spec.frequencies = ctx.frequencies();
  if (d.contains("prior")) spec.prior = number(d.at("prior"), "/prior");
  if (d.contains("mutation_rate")) spec.mutation.rate = number(d.at("mutation_rate"), "/mutation_rate");
  if (d.contains("founders")) {
    const auto f = string(d.at("founders"), "/founders");
    if (f == "iid") spec.founders = oobn::FounderModel::iid;
    else if (f == "polya") spec.founders = oobn::FounderModel::polya;
    else bad("/founders", "expected \"iid\" or \"polya\"");
  }
  if (d.contains("urn_concentration")) spec.urn_concentration = number(d.at("urn_concentration"), "/urn_concentration");
  if (d.contains("markers")) spec.markers = strings(d.at("markers"), "/markers");
  return spec;
}

void run_single_source(Context& ctx, json& r) {
  LRValue lr;
  if (ctx.doc.contains("likelihoods")) {
    const auto& l = ctx.doc.at("likelihoods");
    lr = likelihood_ratio(number(require(l, "hp", "/likelihoods"), "/likelihoods/hp"),
                          number(require(l, "hd", "/likelihoods"), "/likelihoods/hd"));
    r["engine"] = "analytic";
  } else {
    const auto people = ctx.participants();
    auto it = people.find("suspect");
    if (it == people.end()) bad("/participants", "single_source needs \"likelihoods\" or a suspect profile");
    const Theta theta = ctx.theta();
    lr = single_source_lr(it->second, ctx.frequencies(), theta);
    r["theta"] = theta.value();
    r["engine"] = "analytic";
  }
  set_lr(r, lr, ctx.edition);
}

void run_network_lr(Context& ctx, json& r, oobn::CaseKind kind) {
  auto spec = case_spec(ctx, kind);
  if (kind == oobn::CaseKind::subpopulation) {
    if (ctx.doc.contains("subpopulations")) {
      const auto& subs = ctx.doc.at("subpopulations");
      if (!subs.is_array()) bad("/subpopulations", "expected an array");
      for (std::size_t i = 0; i < subs.size(); ++i) {
        const std::string where = "/subpopulations/" + std::to_string(i);
        spec.subpopulations.push_back(ctx.table_from(require(subs[i], "table", where), where + "/table"));
        if (subs[i].contains("weight")) spec.subpopulation_weights.push_back(number(subs[i].at("weight"), where + "/weight"));
      }
    }
    if (ctx.doc.contains("clamp_subpopulation")) {
      spec.clamp_subpopulation = string(ctx.doc.at("clamp_subpopulation"), "/clamp_subpopulation");
    }
  }
  add_dot(ctx, oobn::expand(spec));
  oobn::NetworkLR out;
  switch (kind) {
    case oobn::CaseKind::criminal: out = oobn::criminal_case_lr(spec); break;
    case oobn::CaseKind::subpopulation: out = oobn::subpopulation_lr(spec); break;
    default: out = oobn::paternity_lr(spec); break;
  }
  r["engine"] = out.engine;
  r["prior"] = spec.prior;
  if (kind == oobn::CaseKind::paternity || kind == oobn::CaseKind::sibling_paternity) {
    r["mutation_rate"] = spec.mutation.rate;
  }
  set_lr(r, out.lr, ctx.edition);
}

MixtureHypothesis mixture_hypothesis(const json& j, const std::map<std::string, Profile, std::less<>>& people,
                                     const std::string& where) {
  MixtureHypothesis h;
  if (j.contains("known")) {
    for (const auto& name : strings(j.at("known"), where + "/known")) {
      auto it = people.find(name);
      if (it == people.end()) bad(where + "/known", "no participant named '" + name + "'");
      h.known.push_back({name, it->second});
    }
  }
  if (j.contains("unknowns")) {
    const auto& u = j.at("unknowns");
    if (!u.is_number_integer()) bad(where + "/unknowns", "expected an integer");
    h.unknowns = u.get<int>();
  }
  return h;
}

void run_mixture(Context& ctx, json& r) {
  const auto people = ctx.participants();
  const auto observed = ctx.observed();
  const auto table = ctx.frequencies();
  const Theta theta = ctx.theta();
  r["theta"] = theta.value();
  r["engine"] = "enumeration";
  const auto hp = mixture_hypothesis(require(ctx.doc, "hp", "/"), people, "/hp");
  const auto hd = mixture_hypothesis(require(ctx.doc, "hd", "/"), people, "/hd");
  set_lr(r, mixture_lr(observed, hp, hd, table, theta), ctx.edition);

  const auto ex = exclusion_probability(observed, table, theta);
  json per = json::array();
  for (const auto& p : ex.per_locus) per.push_back({{"marker", p.marker}, {"exclusion", p.value}});
  r["exclusion"] = {{"per_marker", per}, {"combined", ex.combined}, {"inclusion", ex.inclusion()}};

  if (ctx.doc.contains("peaks")) {
    json props = json::array();
    for (const auto& [marker, peaks] : ctx.peaks()) {
      props.push_back({{"marker", marker}, {"minor_proportion", mixture_proportion(peaks)}});
    }
    r["mixture_proportion"] = props;
  }
  if (ctx.doc.contains("masking")) {
    const auto& m = ctx.doc.at("masking");
    const auto marker = string(require(m, "marker", "/masking"), "/masking/marker");
    const int n = static_cast<int>(number(require(m, "contributors", "/masking"), "/masking/contributors"));
    const int d = static_cast<int>(number(require(m, "max_distinct", "/masking"), "/masking/max_distinct"));
    const std::string method = m.contains("method") ? string(m.at("method"), "/masking/method") : "exact";
    json out = {{"marker", marker}, {"contributors", n}, {"max_distinct", d}, {"method", method}};
    if (method == "exact") {
      out["probability"] = masking_probability(n, table.at(marker), d);
    } else if (method == "monte_carlo") {
      const auto samples = m.contains("samples") ? m.at("samples").get<std::uint64_t>() : std::uint64_t{100000};
      const auto est = masking_probability_mc(n, table.at(marker), d, samples, ctx.options.seed);
      out["probability"] = est.estimate;
      out["standard_error"] = est.standard_error;
      out["samples"] = est.samples;
      out["seed"] = ctx.options.seed;
    } else {
      bad("/masking/method", "expected \"exact\" or \"monte_carlo\"");
    }
    r["masking"] = out;
  }
}

oobn::MixtureCell mixture_cell(const json& doc, const char* key, oobn::MixtureCell fallback) {
  if (!doc.contains(key)) return fallback;
  const auto& j = doc.at(key);
  const std::string where = std::string("/") + key;
  oobn::MixtureCell c;
  const auto& a = require(j, "individual1_is_suspect", where);
  const auto& b = require(j, "individual2_is_victim", where);
  if (!a.is_boolean() || !b.is_boolean()) bad(where, "cell entries must be booleans");
  c.individual1_is_suspect = a.get<bool>();
  c.individual2_is_victim = b.get<bool>();
  return c;
}

void run_mixture_network(Context& ctx, json& r) {
  auto spec = case_spec(ctx, oobn::CaseKind::mixture_network);
  spec.observed = ctx.observed();
  const auto hp = mixture_cell(ctx.doc, "hp", {true, true});
  const auto hd = mixture_cell(ctx.doc, "hd", {false, true});
  add_dot(ctx, oobn::expand(spec));
  const auto out = oobn::mixture_network_lr(spec, hp, hd);
  r["engine"] = out.engine;
  set_lr(r, out.lr, ctx.edition);
  json cells = json::array();
  for (const auto& [marker, c] : out.cell_likelihoods) {
    cells.push_back({{"marker", marker},
                     {"suspect_victim", c[0]},
                     {"suspect_unknown", c[1]},
                     {"unknown_victim", c[2]},
                     {"unknown_unknown", c[3]}});
  }
  r["cells"] = cells;
}

void run_fraction(Context& ctx, json& r) {
  auto spec = case_spec(ctx, oobn::CaseKind::fraction);
  spec.peaks = ctx.peaks();
  const auto& f = require(ctx.doc, "fraction", "/");
  spec.fraction.values = numbers(require(f, "grid", "/fraction"), "/fraction/grid");
  if (f.contains("prior")) spec.fraction.prior = numbers(f.at("prior"), "/fraction/prior");
  if (f.contains("resolution")) spec.peak_resolution = static_cast<int>(number(f.at("resolution"), "/fraction/resolution"));
  add_dot(ctx, oobn::expand(spec));
  const auto post = oobn::fraction_posterior(spec);
  r["engine"] = "enumeration";
  json out = json::array();
  for (std::size_t i = 0; i < post.grid.size(); ++i) {
    out.push_back({{"fraction", post.grid[i]}, {"probability", post.posterior[i]}});
  }
  r["fraction_posterior"] = out;
}

std::vector<double> readings(Context& ctx, const json& j, const std::string& where) {
  if (j.is_string()) {
    ctx.provenance.push_back(j.get<std::string>());
    return load_ri_csv(ctx.resolve(j.get<std::string>()));
  }
  return numbers(j, where);
}

void run_glass(Context& ctx, json& r) {
  RISample control{"control", readings(ctx, require(ctx.doc, "control", "/"), "/control")};
  RISample recovered{"recovered", readings(ctx, require(ctx.doc, "recovered", "/"), "/recovered")};
  const std::string alt = ctx.doc.contains("alternative") ? string(ctx.doc.at("alternative"), "/alternative") : "two-sided";
  const auto t = glass_ri_ttest(control, recovered, parse_alternative(alt));
  r["engine"] = "welch_t_test";
  r["t_test"] = {{"t", std::isinf(t.t) ? json(t.t > 0 ? "+inf" : "-inf") : json(t.t)},
                 {"df", t.df},
                 {"p_value", t.p_value},
                 {"mean_difference", t.mean_difference},
                 {"alternative", alt},
                 {"degenerate", t.degenerate},
                 {"n_control", control.values.size()},
                 {"n_recovered", recovered.values.size()}};
}

bn::Network network_from(Context& ctx) {
  const auto& n = require(ctx.doc, "network", "/");
  if (n.is_string()) {
    ctx.provenance.push_back(n.get<std::string>());
    return bn::parse_network(read_file(ctx.resolve(n.get<std::string>())));
  }
  if (n.is_object()) return bn::parse_network(n.dump());
  bad("/network", "expected a path or an inline network");
}

void run_bn_query(Context& ctx, json& r) {
  const auto net = network_from(ctx);
  std::map<std::string, std::string> findings;
  if (ctx.doc.contains("evidence")) {
    const auto& e = ctx.doc.at("evidence");
    if (!e.is_object()) bad("/evidence", "expected node -> state");
    for (const auto& [node, state] : e.items()) findings[node] = string(state, "/evidence/" + node);
  }
  const auto evidence = bn::make_evidence(net, findings);
  const auto target_name = string(require(ctx.doc, "target", "/"), "/target");
  const auto target = net.id(target_name);
  ctx.dot.push_back(bn::to_dot(net, evidence));
  const auto inf = bn::infer(net, evidence, target);
  if (inf.engine == "enumeration") {
    ctx.notices.push_back("network is not a polytree; falling back to exact enumeration");
  }
  r["engine"] = inf.engine;
  json post = json::object();
  for (std::size_t s = 0; s < inf.posterior.size(); ++s) post[net.node(target).states[s]] = inf.posterior[s];
  r["target"] = target_name;
  r["posterior"] = post;
}

void run_ci_query(Context& ctx, json& r) {
  const auto net = network_from(ctx);
  const auto s = strings(require(ctx.doc, "s", "/"), "/s");
  const auto t = strings(require(ctx.doc, "t", "/"), "/t");
  const auto u = ctx.doc.contains("given") ? strings(ctx.doc.at("given"), "/given") : std::vector<std::string>{};
  ctx.dot.push_back(bn::to_dot(net));
  r["engine"] = "moralization";
  r["s"] = s;
  r["t"] = t;
  r["given"] = u;
  r["separated"] = bn::conditionally_independent(net, s, t, u);
}

std::string render_text(const json& r, const std::vector<std::string>& notices) {
  std::ostringstream out;
  for (const auto& n : notices) out << "notice: " << n << "\n";
  out << "kind: " << r["kind"].get<std::string>() << "\n";
  if (!r["lr_text"].is_null()) {
    out << r["lr_text"].get<std::string>() << "\n";
    if (r["per_marker"].size() > 1) {
      for (const auto& m : r["per_marker"]) out << "  " << m["marker"].get<std::string>() << ": " << m["lr_text"].get<std::string>() << "\n";
    }
    out << "verbal (" << r["verbal"]["edition"].get<std::string>() << "): " << r["verbal"]["category"].get<std::string>()
        << "\n  " << r["verbal"]["statement"].get<std::string>() << "\n";
  }
  if (!r["theta"].is_null()) out << "theta: " << r["theta"].get<double>() << "\n";
  if (!r["engine"].is_null()) out << "engine: " << r["engine"].get<std::string>() << "\n";
  if (r.contains("exclusion")) {
    out << "exclusion probability (RMNE): " << r["exclusion"]["combined"].get<double>()
        << "\ninclusion probability (CPI): " << r["exclusion"]["inclusion"].get<double>() << "\n";
  }
  if (r.contains("mixture_proportion")) {
    for (const auto& m : r["mixture_proportion"]) {
      out << "minor proportion at " << m["marker"].get<std::string>() << ": " << m["minor_proportion"].get<double>() << "\n";
    }
  }
  if (r.contains("masking")) {
    out << "masking probability (" << r["masking"]["method"].get<std::string>()
        << "): " << r["masking"]["probability"].get<double>() << "\n";
  }
  if (r.contains("cells")) {
    for (const auto& c : r["cells"]) {
      out << "cells at " << c["marker"].get<std::string>() << ": suspect+victim " << c["suspect_victim"].get<double>()
          << ", suspect+unknown " << c["suspect_unknown"].get<double>() << ", unknown+victim "
          << c["unknown_victim"].get<double>() << ", unknown+unknown " << c["unknown_unknown"].get<double>() << "\n";
    }
  }
  if (r.contains("fraction_posterior")) {
    out << "fraction posterior:\n";
    for (const auto& f : r["fraction_posterior"]) {
      out << "  " << f["fraction"].get<double>() << ": " << f["probability"].get<double>() << "\n";
    }
  }
  if (r.contains("t_test")) {
    const auto& t = r["t_test"];
    out << "t = " << (t["t"].is_string() ? t["t"].get<std::string>() : std::to_string(t["t"].get<double>()))
        << ", df = " << t["df"].get<double>() << ", p = " << t["p_value"].get<double>() << " ("
        << t["alternative"].get<std::string>() << ")" << (t["degenerate"].get<bool>() ? " [degenerate: zero variance]" : "")
        << "\n";
  }
  if (r.contains("posterior")) {
    out << "P(" << r["target"].get<std::string>() << " | evidence):\n";
    for (const auto& [state, p] : r["posterior"].items()) out << "  " << state << ": " << p.get<double>() << "\n";
  }
  if (r.contains("separated")) out << (r["separated"].get<bool>() ? "separated" : "not separated") << "\n";
  if (!r["provenance"].empty()) {
    out << "sources:";
    for (const auto& p : r["provenance"]) out << " " << p.get<std::string>();
    out << "\n";
  }
  return out.str();
}

}  // namespace

std::string case_kind(std::string_view json_text) {
  const auto doc = parse_document(json_text, "case document");
  return string(require(doc, "kind", "/"), "/kind");
}

Report evaluate_case(std::string_view json_text, const std::filesystem::path& base_dir, const CaseOptions& options) {
  Context ctx;
  ctx.doc = parse_document(json_text, "case document");
  if (!ctx.doc.is_object()) bad("/", "expected a JSON object");
  ctx.base_dir = base_dir;
  ctx.options = options;
  ctx.kind = string(require(ctx.doc, "kind", "/"), "/kind");
  if (options.edition) ctx.edition = *options.edition;
  else if (ctx.doc.contains("edition")) ctx.edition = parse_edition(string(ctx.doc.at("edition"), "/edition"));
  json r = base_report(ctx);
  const auto& k = ctx.kind;
  if (k == "single_source") run_single_source(ctx, r);
  else if (k == "mixture") run_mixture(ctx, r);
  else if (k == "criminal") run_network_lr(ctx, r, oobn::CaseKind::criminal);
  else if (k == "paternity") run_network_lr(ctx, r, oobn::CaseKind::paternity);
  else if (k == "sibling_paternity") run_network_lr(ctx, r, oobn::CaseKind::sibling_paternity);
  else if (k == "subpopulation") run_network_lr(ctx, r, oobn::CaseKind::subpopulation);
  else if (k == "mixture_network") run_mixture_network(ctx, r);
  else if (k == "fraction") run_fraction(ctx, r);
  else if (k == "glass") run_glass(ctx, r);
  else if (k == "scale") set_lr(r, LRValue(number(require(ctx.doc, "lr", "/"), "/lr")), ctx.edition);
  else if (k == "bn_query") run_bn_query(ctx, r);
  else if (k == "ci_query") run_ci_query(ctx, r);
  else bad("/kind", "unknown case kind '" + k + "'");

  r["provenance"] = ctx.provenance;
  Report out;
  out.kind = ctx.kind;
  out.json = r.dump(2) + "\n";
  out.text = render_text(r, ctx.notices);
  out.dot = std::move(ctx.dot);
  out.notices = std::move(ctx.notices);
  return out;
}

Report evaluate_case_file(const std::filesystem::path& path, const CaseOptions& options) {
  const auto text = read_file(path);
  try {
    return evaluate_case(text, path.parent_path(), options);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

}  // namespace forensic
