#include <fstream>
#include <sstream>

#include "forensic/bayesnet.hpp"
#include "json.hpp"

namespace forensic::bn {

using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void malformed(const std::string& where, const std::string& what) {
  throw Error(Errc::invalid_argument, "network document " + where + ": " + what);
}

void flatten(const ordered_json& j, std::vector<double>& out, const std::string& where) {
  if (j.is_number()) {
    out.push_back(j.get<double>());
  } else if (j.is_array()) {
    for (const auto& x : j) flatten(x, out, where);
  } else {
    malformed(where, "CPT entries must be numbers or nested arrays");
  }
}

}  // namespace

Network parse_network(std::string_view json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::invalid_argument, std::string("network document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array()) {
    malformed("/", "expected an object with a \"nodes\" array");
  }
  Network net;
  for (std::size_t i = 0; i < doc["nodes"].size(); ++i) {
    const auto& n = doc["nodes"][i];
    const std::string where = "/nodes/" + std::to_string(i);
    if (!n.is_object() || !n.contains("name") || !n["name"].is_string() || !n.contains("states") ||
        !n["states"].is_array()) {
      malformed(where, "node needs \"name\" and \"states\"");
    }
    std::vector<std::string> states;
    for (const auto& s : n["states"]) {
      if (!s.is_string()) malformed(where + "/states", "state labels must be strings");
      states.push_back(s.get<std::string>());
    }
    net.add_node(n["name"].get<std::string>(), std::move(states));
  }
  if (doc.contains("edges")) {
    const auto& edges = doc["edges"];
    if (!edges.is_array()) malformed("/edges", "must be an array of [parent, child]");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const auto& e = edges[i];
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
        malformed("/edges/" + std::to_string(i), "must be [parent, child]");
      }
      net.add_edge(net.id(e[0].get<std::string>()), net.id(e[1].get<std::string>()));
    }
  }
  if (!doc.contains("cpts") || !doc["cpts"].is_object()) malformed("/cpts", "missing CPT object");
  for (const auto& [name, table] : doc["cpts"].items()) {
    const std::string where = "/cpts/" + name;
    const NodeId n = net.id(name);
    const std::size_t k = net.node(n).states.size();
    if (table.is_object()) {
      if (!table.contains("deterministic") || !table["deterministic"].is_array()) {
        malformed(where, "object form needs a \"deterministic\" array");
      }
      std::vector<std::uint32_t> outcome;
      for (const auto& s : table["deterministic"]) {
        if (s.is_number_unsigned()) {
          outcome.push_back(s.get<std::uint32_t>());
        } else if (s.is_string()) {
          outcome.push_back(static_cast<std::uint32_t>(net.state_index(n, s.get<std::string>())));
        } else {
          malformed(where, "deterministic entries must be state indices or labels");
        }
      }
      net.set_cpt(n, Cpt::deterministic(k, std::move(outcome)));
    } else {
      std::vector<double> values;
      flatten(table, values, where);
      net.set_cpt(n, Cpt::dense(k, std::move(values)));
    }
  }
  for (NodeId n = 0; n < net.size(); ++n) {
    if (net.node(n).cpt.states() == 0) malformed("/cpts", "no CPT for node '" + net.node(n).name + "'");
  }
  ensure_valid(net);
  return net;
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_argument, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_network(buf.str());
}

std::string to_json(const Network& net) {
  ordered_json doc;
  doc["nodes"] = ordered_json::array();
  doc["edges"] = ordered_json::array();
  ordered_json cpts = ordered_json::object();
  for (const auto& node : net.nodes()) {
    doc["nodes"].push_back({{"name", node.name}, {"states", node.states}});
    for (NodeId p : node.parents) doc["edges"].push_back({net.node(p).name, node.name});
    if (node.cpt.is_deterministic()) {
      cpts[node.name] = {{"deterministic", node.cpt.outcomes()}};
    } else {
      ordered_json rows = ordered_json::array();
      const std::size_t k = node.cpt.states();
      for (std::size_t r = 0; r < node.cpt.rows(); ++r) {
        rows.push_back(std::vector<double>(node.cpt.values().begin() + r * k,
                                           node.cpt.values().begin() + (r + 1) * k));
      }
      cpts[node.name] = std::move(rows);
    }
  }
  doc["cpts"] = std::move(cpts);
  return doc.dump(2);
}

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_dot(const Network& net, const Evidence& evidence) {
  std::ostringstream out;
  out << "digraph network {\n  node [shape=ellipse];\n";
  std::map<std::string, std::vector<NodeId>> clusters;
  for (NodeId n = 0; n < net.size(); ++n) {
    const auto& name = net.node(n).name;
    auto dot = name.rfind('.');
    clusters[dot == std::string::npos ? std::string() : name.substr(0, dot)].push_back(n);
  }
  auto emit_node = [&](NodeId n, const char* indent) {
    const auto& name = net.node(n).name;
    out << indent << quoted(name);
    auto it = evidence.find(n);
    if (it != evidence.end()) {
      out << " [style=filled, fillcolor=lightblue, label="
          << quoted(name + "\\n= " + net.node(n).states[it->second]) << "]";
    }
    out << ";\n";
  };
  int cluster_id = 0;
  for (const auto& [prefix, members] : clusters) {
    if (prefix.empty()) {
      for (NodeId n : members) emit_node(n, "  ");
      continue;
    }
    out << "  subgraph cluster_" << cluster_id++ << " {\n    label=" << quoted(prefix)
        << ";\n    style=dashed;\n";
    for (NodeId n : members) emit_node(n, "    ");
    out << "  }\n";
  }
  for (NodeId c = 0; c < net.size(); ++c) {
    for (NodeId p : net.node(c).parents) {
      out << "  " << quoted(net.node(p).name) << " -> " << quoted(net.node(c).name) << ";\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace forensic::bn
