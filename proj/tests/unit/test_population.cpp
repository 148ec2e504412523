#include <cmath>
#include <random>

#include "doctest.h"
#include "forensic/error.hpp"
#include "forensic/population.hpp"
#include "oracles.hpp"

using namespace forensic;

namespace {

std::string data(const std::string& rel) { return std::string(FORENSIC_DATA_DIR) + "/" + rel; }

}  // namespace

TEST_CASE("frequency table parsing keeps document order and renormalizes small drift") {
  const auto t = parse_frequency_table(R"({"M": {"b": 0.3, "a": 0.7000001}})", "inline");
  const auto& m = t.at("M");
  CHECK(m.marker.alleles == std::vector<std::string>{"b", "a"});
  CHECK(m.freqs[0] + m.freqs[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.freq("a") == doctest::Approx(0.7000001 / 1.0000001));
  CHECK(t.provenance() == "inline");
}

TEST_CASE("frequency table errors") {
  CHECK_THROWS_AS(parse_frequency_table(R"({"M": {"a": 0.5, "b": 0.4}})", "x"), Error);
  try {
    parse_frequency_table(R"({"M": {"a": 0.5, "b": 0.4}})", "x");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::frequency_sum_out_of_tolerance);
  }
  try {
    parse_frequency_table(R"({"M": {"a": -0.1, "b": 1.1}})", "x");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::malformed_table);
  }
  try {
    parse_frequency_table("{not json", "x");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::malformed_table);
  }
  const auto t = parse_frequency_table(R"({"M": {"a": 0.5, "b": 0.5}})", "x");
  try {
    (void)t.at("N");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_marker);
  }
  try {
    (void)t.at("M").freq("z");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_allele);
  }
}

TEST_CASE("shipped tables load") {
  const auto t = load_frequency_table(data("freq/illustrative.json"));
  CHECK(t.contains("TH01"));
  CHECK(t.contains("D8S1179"));
  const auto d = load_frequency_table(data("freq/dirichlet.json"));
  REQUIRE(d.at("TH01").dirichlet.has_value());
  CHECK(d.at("TH01").dirichlet->total_counts() == 40.0);
  CHECK(d.at("TH01").dirichlet->concentration() == 45.0);
  const auto post = d.with_posterior_means();
  // (alpha + count) / (sum alpha + N) for allele "9.3": 16 / 45
  CHECK(post.at("TH01").freq("9.3") == doctest::Approx(16.0 / 45.0).epsilon(1e-14));
}

TEST_CASE("dirichlet posterior is prior plus counts") {
  const std::vector<double> prior{1, 2, 3}, counts{4, 0, 6};
  const auto m = dirichlet_posterior(prior, counts);
  CHECK(m.posterior() == std::vector<double>{5, 2, 9});
  CHECK(m.concentration() == 16.0);
  CHECK(m.mean()[2] == doctest::Approx(9.0 / 16.0));
  CHECK_THROWS_AS(DirichletModel({1, 0}, {1, 1}), Error);
  CHECK_THROWS_AS(DirichletModel({1, 1}, {1}), Error);
}

TEST_CASE("polya joint equals the copy-or-fresh urn oracle") {
  std::mt19937_64 rng(7);
  for (std::size_t k : {2u, 3u}) {
    for (int n = 1; n <= 4; ++n) {
      const auto rho = oracle::random_simplex(rng, k, 0.05);
      const double m = 0.5 + 10.0 * std::uniform_real_distribution<double>()(rng);
      const auto model = DirichletModel::from_mean(rho, m);
      const auto joint = polya_joint(model, n);
      const auto ref = oracle::urn_joint(rho, m, n);
      REQUIRE(joint.probs.size() == ref.size());
      for (std::size_t i = 0; i < ref.size(); ++i) CHECK(joint.probs[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("polya draws are exchangeable with marginal rho") {
  std::mt19937_64 rng(11);
  for (std::size_t k : {2u, 3u}) {
    const auto rho = oracle::random_simplex(rng, k, 0.05);
    const auto model = DirichletModel::from_mean(rho, 2.5);
    const auto joint = polya_joint(model, 4);
    for (int i = 0; i < 4; ++i) {
      const auto marg = joint.draw_marginal(i);
      const auto closed = polya_marginal(model, i + 1);
      for (std::size_t a = 0; a < k; ++a) {
        CHECK(std::abs(marg[a] - rho[a]) < 1e-10);
        CHECK(std::abs(closed[a] - rho[a]) < 1e-10);
      }
    }
    // permuting a tuple leaves its probability unchanged
    const std::vector<std::size_t> t1{0, 1, 1, 0}, t2{1, 0, 0, 1}, t3{1, 1, 0, 0};
    CHECK(joint.at(t1) == doctest::Approx(joint.at(t2)).epsilon(1e-13));
    CHECK(joint.at(t1) == doctest::Approx(joint.at(t3)).epsilon(1e-13));
  }
}

TEST_CASE("polya joint approaches the iid product for large concentration") {
  const std::vector<double> rho{0.2, 0.5, 0.3};
  const auto joint = polya_joint(DirichletModel::from_mean(rho, 1e6), 3);
  for (std::size_t idx = 0; idx < joint.probs.size(); ++idx) {
    const double iid = rho[idx / 9] * rho[(idx / 3) % 3] * rho[idx % 3];
    CHECK(std::abs(joint.probs[idx] - iid) < 1e-4);
  }
}

TEST_CASE("polya joint draw cap") {
  const auto model = DirichletModel::from_mean(std::vector<double>{0.5, 0.5}, 1.0);
  try {
    (void)polya_joint(model, kMaxPolyaDraws + 1);
    FAIL("expected too_many_draws");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::too_many_draws);
  }
}
