#include "forensic/trace.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "forensic/error.hpp"

namespace forensic {

Alternative parse_alternative(std::string_view name) {
  if (name == "two-sided" || name == "two_sided") return Alternative::two_sided;
  if (name == "less") return Alternative::less;
  if (name == "greater") return Alternative::greater;
  throw Error(Errc::invalid_argument, "unknown alternative '" + std::string(name) + "'");
}

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // unbiased
};

Moments moments(const RISample& s) {
  if (s.values.size() < 2) {
    throw Error(Errc::insufficient_data,
                "sample '" + s.label + "' needs at least 2 readings, got " + std::to_string(s.values.size()));
  }
  Moments m;
  const double n = static_cast<double>(s.values.size());
  m.mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : s.values) ss += (x - m.mean) * (x - m.mean);
  m.var = ss / (n - 1.0);
  return m;
}

}  // namespace

TTestResult glass_ri_ttest(const RISample& control, const RISample& recovered, Alternative alternative) {
  const Moments c = moments(control);
  const Moments r = moments(recovered);
  const double nc = static_cast<double>(control.values.size());
  const double nr = static_cast<double>(recovered.values.size());
  TTestResult out;
  out.mean_difference = c.mean - r.mean;
  const double a = c.var / nc;
  const double b = r.var / nr;
  if (a + b == 0.0) {
    out.df = nc + nr - 2.0;
    if (out.mean_difference == 0.0) return out;
    out.degenerate = true;
    out.t = std::copysign(std::numeric_limits<double>::infinity(), out.mean_difference);
    const bool toward = alternative == Alternative::two_sided || (alternative == Alternative::less) == (out.t < 0);
    out.p_value = toward ? 0.0 : 1.0;
    return out;
  }
  out.t = out.mean_difference / std::sqrt(a + b);
  out.df = (a + b) * (a + b) / (a * a / (nc - 1.0) + b * b / (nr - 1.0));
  const boost::math::students_t dist(out.df);
  switch (alternative) {
    case Alternative::two_sided:
      out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t)));
      break;
    case Alternative::less:
      out.p_value = boost::math::cdf(dist, out.t);
      break;
    case Alternative::greater:
      out.p_value = boost::math::cdf(boost::math::complement(dist, out.t));
      break;
  }
  out.p_value = std::min(out.p_value, 1.0);
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

}  // namespace

std::vector<double> parse_ri_csv(std::string_view text) {
  std::vector<double> out;
  bool header = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    if (!header) {
      if (line != "ri") {
        throw Error(Errc::invalid_argument, "line " + std::to_string(line_no) + ": expected header \"ri\"");
      }
      header = true;
      continue;
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || ptr != line.data() + line.size() || !std::isfinite(v)) {
      throw Error(Errc::invalid_argument,
                  "line " + std::to_string(line_no) + ": not a number: '" + std::string(line) + "'");
    }
    out.push_back(v);
  }
  if (!header) throw Error(Errc::invalid_argument, "line 1: expected header \"ri\"");
  return out;
}

std::vector<double> load_ri_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_argument, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_ri_csv(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

std::vector<double> binomial_thinning(double keep) {
  if (!(keep >= 0.0 && keep <= 1.0)) throw Error(Errc::invalid_argument, "retention probability must lie in [0, 1]");
  const std::size_t k = kFragmentCounts.size();
  std::vector<double> rows(k * k, 0.0);
  for (std::size_t n = 0; n < k; ++n) {
    double choose = 1.0;
    for (std::size_t j = 0; j <= n; ++j) {
      rows[n * k + j] = choose * std::pow(keep, static_cast<double>(j)) * std::pow(1.0 - keep, static_cast<double>(n - j));
      choose = choose * static_cast<double>(n - j) / static_cast<double>(j + 1);
    }
  }
  return rows;
}

TransferModelParams default_transfer_params() {
  TransferModelParams p;
  p.distance_states = {"under_0.5m", "0.5_to_1.5m", "over_1.5m"};
  p.distance_prior = {0.4, 0.4, 0.2};
  p.transfer = {0.05, 0.10, 0.15, 0.20, 0.20, 0.30,
                0.20, 0.25, 0.20, 0.15, 0.10, 0.10,
                0.60, 0.25, 0.10, 0.03, 0.01, 0.01};

  p.time_states = {"under_1h", "1_to_8h", "over_8h"};
  p.time_prior = {0.3, 0.4, 0.3};
  p.garment_states = {"wool", "cotton", "synthetic"};
  p.garment_prior = {0.3, 0.5, 0.2};
  const double retention[] = {0.9, 0.5, 0.2};
  const double grip[] = {1.0, 0.8, 0.5};
  const std::size_t k = kFragmentCounts.size();
  for (std::size_t n = 0; n < k; ++n) {
    for (double r : retention) {
      for (double g : grip) {
        const auto rows = binomial_thinning(r * g);
        p.persistence.insert(p.persistence.end(), rows.begin() + n * k, rows.begin() + (n + 1) * k);
      }
    }
  }

  p.efficiency_states = {"high", "low"};
  p.efficiency_prior = {0.7, 0.3};
  const double efficiency[] = {0.9, 0.5};
  for (std::size_t n = 0; n < k; ++n) {
    for (double e : efficiency) {
      const auto rows = binomial_thinning(e);
      p.recovery.insert(p.recovery.end(), rows.begin() + n * k, rows.begin() + (n + 1) * k);
    }
  }
  return p;
}

bn::Network build_transfer_network(const TransferModelParams& p) {
  using bn::Cpt;
  bn::Network net;
  const std::size_t k = kFragmentCounts.size();
  auto d = net.add_node("scene.distance", p.distance_states, {}, Cpt::dense(p.distance_states.size(), p.distance_prior));
  auto t = net.add_node("transfer.fragments_transferred", kFragmentCounts, {d}, Cpt::dense(k, p.transfer));
  auto time = net.add_node("persistence.time_since_event", p.time_states, {}, Cpt::dense(p.time_states.size(), p.time_prior));
  auto g = net.add_node("persistence.garment", p.garment_states, {}, Cpt::dense(p.garment_states.size(), p.garment_prior));
  auto kept = net.add_node("persistence.fragments_persisted", kFragmentCounts, {t, time, g}, Cpt::dense(k, p.persistence));
  auto e = net.add_node("recovery.lab_efficiency", p.efficiency_states, {},
                        Cpt::dense(p.efficiency_states.size(), p.efficiency_prior));
  net.add_node("recovery.fragments_recovered", kFragmentCounts, {kept, e}, Cpt::dense(k, p.recovery));
  bn::ensure_valid(net);
  return net;
}

}  // namespace forensic
