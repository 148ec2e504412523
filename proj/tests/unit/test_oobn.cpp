#include <cmath>
#include <random>

#include "doctest.h"
#include "forensic/error.hpp"
#include "forensic/oobn.hpp"
#include "forensic/trace.hpp"
#include "oracles.hpp"

using namespace forensic;
using namespace forensic::oobn;
using bn::Network;
using bn::NodeId;

namespace {

std::string data(const std::string& rel) { return std::string(FORENSIC_DATA_DIR) + "/" + rel; }

template <class F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected forensic::Error");
  return Errc::invalid_argument;
}

AlleleFreqTable table_of(std::initializer_list<MarkerFrequencies> markers) {
  AlleleFreqTable t;
  for (const auto& m : markers) t.add_marker(m.marker, m.freqs);
  return t;
}

MarkerFrequencies abc_marker(double pa, double pb, double pc) {
  MarkerFrequencies m;
  m.marker = {"M", {"A", "B", "C"}};
  m.freqs = {pa, pb, pc};
  return m;
}

// 2x2 boolean channel composition, rows = input (true, false).
using Channel = std::array<std::array<double, 2>, 2>;
Channel flip(double e) { return {{{1 - e, e}, {e, 1 - e}}}; }
Channel compose(const Channel& a, const Channel& b) {
  Channel c{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

// P(child | mother, father) by Mendel; a null father transmits from the
// population frequencies.
double transmission(const Genotype& child, const Genotype& mother, const Genotype* father,
                    const MarkerFrequencies& f) {
  auto from_parent = [&](const Genotype* g, const std::string& a) {
    if (!g) return f.freq(a);
    return 0.5 * (g->first() == a) + 0.5 * (g->second() == a);
  };
  const std::string& x = child.first();
  const std::string& y = child.second();
  // maternal x and paternal y, or maternal y and paternal x
  double p = from_parent(&mother, x) * from_parent(father, y);
  if (x != y) p += from_parent(&mother, y) * from_parent(father, x);
  return p;
}

}  // namespace

TEST_CASE("genotype indexing") {
  const Marker m{"M", {"a", "b", "c"}};
  CHECK(genotype_states(m) == std::vector<std::string>{"a/a", "a/b", "a/c", "b/b", "b/c", "c/c"});
  CHECK(genotype_index(Genotype("c", "b"), m) == 4);
  CHECK(genotype_index(2, 0, 3) == 2);
  CHECK(code_of([&] { (void)genotype_index(Genotype("a", "z"), m); }) == Errc::unknown_allele);
}

TEST_CASE("founder genotype marginal is Hardy-Weinberg") {
  std::mt19937_64 rng(200);
  const auto f = oracle::random_marker(rng, "M", 4);
  Network net;
  const auto out = founder_module(f).instantiate(net, "p");
  CHECK(net.find("p.genotype").has_value());
  const auto post = bn::enumerate_joint(net, {}, out.at("genotype"));
  const auto gts = all_genotypes(f.marker);
  for (std::size_t i = 0; i < gts.size(); ++i) CHECK(post[i] == doctest::Approx(genotype_prob_hwe(gts[i], f)).epsilon(1e-13));
}

TEST_CASE("child genotype follows Mendelian transmission") {
  std::mt19937_64 rng(201);
  const auto f = oracle::random_marker(rng, "M", 4);
  const auto gts = all_genotypes(f.marker);
  const auto gstates = genotype_states(f.marker);
  Network net;
  const auto mo = founder_module(f).instantiate(net, "mother").at("genotype");
  const auto fa = founder_module(f).instantiate(net, "father").at("genotype");
  const auto ch = child_module(f.marker).instantiate(net, "child", {{"father_genotype", fa}, {"mother_genotype", mo}});
  for (std::size_t m = 0; m < gts.size(); m += 3) {
    for (std::size_t p = 0; p < gts.size(); p += 2) {
      const auto post = bn::enumerate_joint(net, {{mo, m}, {fa, p}}, ch.at("genotype"));
      for (std::size_t c = 0; c < gts.size(); ++c) {
        CHECK(post[c] == doctest::Approx(transmission(gts[c], gts[m], &gts[p], f)).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("two-allele mutation flips with the mutation rate") {
  const Marker m{"M", {"x", "y"}};
  Network net;
  const auto g = net.add_node("g", m.alleles, {}, bn::Cpt::dense(2, {1.0, 0.0}));
  const auto out = mutation_module(m, {0.01}).instantiate(net, "mut", {{"original_gene", g}}).at("gene");
  const auto post = bn::enumerate_joint(net, {}, out);
  CHECK(post[1] == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(code_of([&] { (void)mutation_module(m, {1.0}); }) == Errc::invalid_rate);
  CHECK(code_of([&] { (void)mutation_module(m, {-0.1}); }) == Errc::invalid_rate);
}

TEST_CASE("selector copies the branch named by the hypothesis") {
  Network net;
  const std::vector<std::string> st{"u", "v", "w"};
  const auto h = net.add_node("h", kBoolStates, {}, bn::Cpt::dense(2, {0.5, 0.5}));
  const auto a = net.add_node("a", st, {}, bn::Cpt::dense(3, {1, 0, 0}));
  const auto b = net.add_node("b", st, {}, bn::Cpt::dense(3, {0, 0, 1}));
  const auto out = selector_module(st).instantiate(net, "sel", {{"hypothesis", h}, {"if_true", a}, {"if_false", b}});
  CHECK(bn::enumerate_joint(net, {{h, 0}}, out.at("output"))[0] == 1.0);
  CHECK(bn::enumerate_joint(net, {{h, 1}}, out.at("output"))[2] == 1.0);
}

TEST_CASE("module ports are checked") {
  const Marker m{"M", {"x", "y"}};
  Network net;
  const auto two = net.add_node("two", {"p", "q"}, {}, bn::Cpt::dense(2, {0.5, 0.5}));
  CHECK(code_of([&] { (void)meiosis_module(m).instantiate(net, "mei"); }) == Errc::unbound_port);
  CHECK(code_of([&] { (void)meiosis_module(m).instantiate(net, "mei", {{"parent_genotype", two}}); }) ==
        Errc::state_space_mismatch);
  const auto flag = net.add_node("flag", kBoolStates, {}, bn::Cpt::dense(2, {0.5, 0.5}));
  CHECK(code_of([&] { (void)accuracy_module(0.1).instantiate(net, "acc", {{"input", flag}, {"extra", flag}}); }) ==
        Errc::invalid_argument);
  const auto f = abc_marker(0.2, 0.3, 0.5);
  founder_module(f).instantiate(net, "p");
  CHECK(code_of([&] { (void)founder_module(f).instantiate(net, "p"); }) == Errc::name_collision);
  const auto g = abc_marker(0.2, 0.3, 0.5);
  MarkerFrequencies other;
  other.marker = {"M", {"A", "B", "D"}};
  other.freqs = {0.2, 0.3, 0.5};
  CHECK(code_of([&] { (void)subpopulation_founder_module({&g, &other}, {"s1", "s2"}); }) == Errc::incompatible_tables);
}

TEST_CASE("testimony equals the composed channel") {
  for (double c : {1.0, 0.7}) {
    const TestimonyRates r{0.05, 0.1, 0.2, c};
    Network net;
    const auto ev = net.add_node("event", kBoolStates, {}, bn::Cpt::dense(2, {0.5, 0.5}));
    const auto rep = testimony_module(r).instantiate(net, "w", {{"event", ev}}).at("report");
    // sensation: competent witnesses pass the agreement through, incompetent ones guess
    Channel sense = flip(r.sensation);
    for (auto& row : sense)
      for (auto& x : row) x = c * x + (1 - c) * 0.5;
    const auto total = compose(compose(sense, flip(r.objectivity)), flip(r.veracity));
    for (std::size_t e = 0; e < 2; ++e) {
      const auto post = bn::enumerate_joint(net, {{ev, e}}, rep);
      CHECK(post[0] == doctest::Approx(total[e][0]).epsilon(1e-13));
    }
  }
}

TEST_CASE("criminal network equals the single-source LR without co-ancestry") {
  std::mt19937_64 rng(202);
  for (int rep = 0; rep < 50; ++rep) {
    const auto m1 = oracle::random_marker(rng, "M1", 3 + rep % 4);
    const auto m2 = oracle::random_marker(rng, "M2", 4);
    CaseSpec spec;
    spec.kind = CaseKind::criminal;
    spec.frequencies = table_of({m1, m2});
    std::uniform_int_distribution<std::size_t> a1(0, m1.marker.size() - 1), a2(0, 3);
    Profile p;
    p.insert_or_assign("M1", Genotype(m1.marker.alleles[a1(rng)], m1.marker.alleles[a1(rng)]));
    p.insert_or_assign("M2", Genotype(m2.marker.alleles[a2(rng)], m2.marker.alleles[a2(rng)]));
    spec.participants = {{"suspect", p}, {"trace", p}};
    const auto net_lr = criminal_case_lr(spec);
    const auto ref = single_source_lr(p, spec.frequencies, Theta::of(0.0));
    CHECK(net_lr.lr.value() == doctest::Approx(ref.value()).epsilon(1e-10));
    CHECK(net_lr.engine == "propagation");
  }
}

TEST_CASE("criminal LR: prior invariance, non-match and node count") {
  const auto f = abc_marker(0.2, 0.3, 0.5);
  CaseSpec spec;
  spec.frequencies = table_of({f});
  const Profile p{{"M", Genotype("A", "B")}};
  spec.participants = {{"suspect", p}, {"trace", p}};
  const double base = criminal_case_lr(spec).lr.value();
  CHECK(base == doctest::Approx(1.0 / (2 * 0.2 * 0.3)).epsilon(1e-12));
  for (double prior : {0.01, 0.3, 0.9}) {
    spec.prior = prior;
    CHECK(criminal_case_lr(spec).lr.value() == doctest::Approx(base).epsilon(1e-10));
  }
  spec.participants["trace"] = Profile{{"M", Genotype("C", "C")}};
  CHECK(criminal_case_lr(spec).lr.value() == 0.0);
  CHECK(expand(spec).front().network.size() == 8);
}

TEST_CASE("trio paternity hand-enumeration table") {
  // mother A/A, child A/B, putative father B/B: P(E|Hp) = 1, P(E|Hd) = p_B
  struct Row {
    double pb, hp, hd, lr;
  };
  const Row rows[] = {{0.05, 1.0, 0.05, 20.0}, {0.1, 1.0, 0.1, 10.0}, {0.2, 1.0, 0.2, 5.0}};
  for (const auto& r : rows) {
    const auto f = abc_marker(0.3, r.pb, 0.7 - r.pb);
    CaseSpec spec;
    spec.kind = CaseKind::paternity;
    spec.frequencies = table_of({f});
    spec.participants = {{"mother", {{"M", Genotype("A", "A")}}},
                         {"child", {{"M", Genotype("A", "B")}}},
                         {"putative_father", {{"M", Genotype("B", "B")}}}};
    const double lr = paternity_lr(spec).lr.value();
    CHECK(std::abs(lr - r.lr) < 1e-10);
    CHECK(r.hp / r.hd == doctest::Approx(r.lr));
  }
}

TEST_CASE("trio paternity on random trios matches Mendel") {
  std::mt19937_64 rng(203);
  for (int rep = 0; rep < 30; ++rep) {
    const auto f = oracle::random_marker(rng, "M", 4);
    const auto gts = all_genotypes(f.marker);
    std::uniform_int_distribution<std::size_t> pick(0, gts.size() - 1);
    const auto mother = gts[pick(rng)], father = gts[pick(rng)];
    // a child consistent with the putative father
    std::bernoulli_distribution coin(0.5);
    const Genotype child(coin(rng) ? mother.first() : mother.second(), coin(rng) ? father.first() : father.second());
    CaseSpec spec;
    spec.kind = CaseKind::paternity;
    spec.frequencies = table_of({f});
    spec.participants = {{"mother", {{"M", mother}}}, {"child", {{"M", child}}}, {"putative_father", {{"M", father}}}};
    const double want = transmission(child, mother, &father, f) / transmission(child, mother, nullptr, f);
    CHECK(paternity_lr(spec).lr.value() == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("paternity exclusion and mutation") {
  const auto f = abc_marker(0.3, 0.2, 0.5);
  CaseSpec spec;
  spec.kind = CaseKind::paternity;
  spec.frequencies = table_of({f});
  spec.participants = {{"mother", {{"M", Genotype("A", "A")}}},
                       {"child", {{"M", Genotype("A", "B")}}},
                       {"putative_father", {{"M", Genotype("C", "C")}}}};
  CHECK(paternity_lr(spec).lr.value() == 0.0);
  spec.mutation.rate = 1e-4;
  const double with_mutation = paternity_lr(spec).lr.value();
  CHECK(with_mutation > 0.0);
  CHECK(with_mutation < 1e-2);

  // small rates barely move a consistent trio
  spec.participants["putative_father"] = Profile{{"M", Genotype("B", "B")}};
  spec.mutation.rate = 0.0;
  const double clean = paternity_lr(spec).lr.value();
  spec.mutation.rate = 1e-9;
  CHECK(paternity_lr(spec).lr.value() == doctest::Approx(clean).epsilon(1e-6));
}

TEST_CASE("sibling of the putative father gives weaker support than the father") {
  const auto f = abc_marker(0.3, 0.1, 0.6);
  CaseSpec spec;
  spec.kind = CaseKind::sibling_paternity;
  spec.frequencies = table_of({f});
  spec.participants = {{"mother", {{"M", Genotype("A", "A")}}},
                       {"child", {{"M", Genotype("A", "B")}}},
                       {"sibling", {{"M", Genotype("B", "B")}}}};
  const auto sib = paternity_lr(spec);
  CHECK(sib.lr.value() > 1.0);
  CHECK(sib.lr.value() < 1.0 / 0.1);
}

TEST_CASE("mixture network equals the exact-cover mixture LR") {
  std::mt19937_64 rng(204);
  for (int rep = 0; rep < 10; ++rep) {
    const auto f = oracle::random_marker(rng, "M", 5);
    CaseSpec spec;
    spec.kind = CaseKind::mixture_network;
    spec.frequencies = table_of({f});
    const Profile victim{{"M", Genotype("a0", "a2")}}, suspect{{"M", Genotype("a1", "a2")}};
    spec.participants = {{"victim", victim}, {"suspect", suspect}};
    spec.observed = {{"M", {"a0", "a1", "a2"}}};
    const auto r = mixture_network_lr(spec, {true, true}, {false, true});
    MixtureHypothesis hp{{{"victim", victim}, {"suspect", suspect}}, 0};
    MixtureHypothesis hd{{{"victim", victim}}, 1};
    const auto ref = mixture_lr(spec.observed, hp, hd, spec.frequencies, Theta::of(0.0));
    CHECK(r.lr.value() == doctest::Approx(ref.value()).epsilon(1e-10));
    // the unknown/unknown cell is the two-unknown exact-cover probability
    const std::vector<std::string> obs{"a0", "a1", "a2"};
    const double uu = mixture_likelihood(obs, MixtureHypothesis{{}, 2}, "M", f, Theta::of(0.0));
    REQUIRE(r.cell_likelihoods.size() == 1);
    CHECK(r.cell_likelihoods[0].second[3] == doctest::Approx(uu).epsilon(1e-10));
    CHECK(r.cell_likelihoods[0].second[0] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("subpopulation network") {
  const auto fa = abc_marker(0.2, 0.3, 0.5);
  const auto fb = abc_marker(0.6, 0.3, 0.1);
  auto ta = table_of({fa});
  ta.set_subpopulation("a");
  auto tb = table_of({fb});
  tb.set_subpopulation("b");
  const Profile p{{"M", Genotype("A", "A")}};
  CaseSpec spec;
  spec.kind = CaseKind::subpopulation;
  spec.participants = {{"suspect", p}, {"trace", p}};

  auto lr_with = [&](std::vector<AlleleFreqTable> tables, std::optional<std::string> clamp) {
    spec.subpopulations = std::move(tables);
    spec.clamp_subpopulation = std::move(clamp);
    return subpopulation_lr(spec).lr.value();
  };
  auto ta2 = ta;
  ta2.set_subpopulation("a2");
  CHECK(lr_with({ta, ta2}, std::nullopt) == doctest::Approx(1.0 / (0.2 * 0.2)).epsilon(1e-10));
  const double only_a = lr_with({ta, tb}, "a");
  const double only_b = lr_with({ta, tb}, "b");
  CHECK(only_a == doctest::Approx(1.0 / (0.2 * 0.2)).epsilon(1e-10));
  CHECK(only_b == doctest::Approx(1.0 / (0.6 * 0.6)).epsilon(1e-10));
  const double mixed = lr_with({ta, tb}, std::nullopt);
  CHECK(mixed > only_b);
  CHECK(mixed < only_a);
  // P(A/A, A/A | G) / P(A/A, A/A | not G) with the subpopulation shared
  const double hp = 0.5 * std::pow(0.2, 2) + 0.5 * std::pow(0.6, 2);
  const double hd = 0.5 * std::pow(0.2, 4) + 0.5 * std::pow(0.6, 4);
  CHECK(mixed == doctest::Approx(hp / hd).epsilon(1e-10));
}

TEST_CASE("fraction posterior") {
  const auto f = abc_marker(0.3, 0.3, 0.4);
  CaseSpec spec;
  spec.kind = CaseKind::fraction;
  spec.frequencies = table_of({f});
  spec.fraction.values = {0.1, 0.25, 0.5, 0.75, 0.9};
  spec.peak_resolution = 20;
  spec.participants = {{"contributor1", {{"M", Genotype("A", "A")}}}, {"contributor2", {{"M", Genotype("B", "C")}}}};
  // f = 0.25: A at 0.25, B and C at 0.375 each
  spec.peaks = {{"M", {{"A", 250}, {"B", 375}, {"C", 375}}}};
  const auto post = fraction_posterior(spec);
  REQUIRE(post.posterior.size() == 5);
  CHECK(post.posterior[1] == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("matches full enumeration of the coupled network") {
    spec.participants.erase("contributor2");
    const auto nets = expand(spec);
    REQUIRE(nets.size() == 1);
    const auto ref = bn::enumerate_joint(nets[0].network, nets[0].evidence, nets[0].hypotheses[0]);
    const auto got = fraction_posterior(spec);
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(got.posterior[i] == doctest::Approx(ref[i]).epsilon(1e-10));
  }
  SUBCASE("identical homozygous contributors carry no information") {
    spec.participants = {{"contributor1", {{"M", Genotype("A", "A")}}}, {"contributor2", {{"M", Genotype("A", "A")}}}};
    spec.peaks = {{"M", {{"A", 1000}}}};
    const auto got = fraction_posterior(spec);
    for (double p : got.posterior) CHECK(p == doctest::Approx(0.2).epsilon(1e-12));
  }
  SUBCASE("grid errors") {
    spec.fraction.values = {0.0, 0.5};
    CHECK(code_of([&] { (void)fraction_posterior(spec); }) == Errc::invalid_grid);
  }
}

TEST_CASE("Polya founders reproduce the co-ancestry match probability") {
  std::mt19937_64 rng(205);
  for (int rep = 0; rep < 10; ++rep) {
    const auto f = oracle::random_marker(rng, "M", 4);
    const double m = 1.0 + 20.0 * std::uniform_real_distribution<double>()(rng);
    CaseSpec spec;
    spec.frequencies = table_of({f});
    spec.founders = FounderModel::polya;
    spec.urn_concentration = m;
    for (const auto& g : {Genotype("a0", "a0"), Genotype("a1", "a3")}) {
      spec.participants = {{"suspect", {{"M", g}}}, {"trace", {{"M", g}}}};
      const double want = 1.0 / match_prob(g, Theta::of(1.0 / (1.0 + m)), f);
      CHECK(criminal_case_lr(spec).lr.value() == doctest::Approx(want).epsilon(1e-10));
    }
  }
  // sharing a homozygous type is more probable under the urn than under iid draws
  const auto f = abc_marker(0.2, 0.3, 0.5);
  CaseSpec spec;
  spec.frequencies = table_of({f});
  spec.participants = {{"suspect", {{"M", Genotype("A", "A")}}}, {"trace", {{"M", Genotype("A", "A")}}}};
  const double iid = criminal_case_lr(spec).lr.value();
  spec.founders = FounderModel::polya;
  spec.urn_concentration = 10.0;
  CHECK(criminal_case_lr(spec).lr.value() < iid);
}

TEST_CASE("Polya genes match the urn joint") {
  const std::vector<double> rho{0.2, 0.5, 0.3};
  const auto model = DirichletModel::from_mean(rho, 3.0);
  const Marker mk{"M", {"x", "y", "z"}};
  Network net;
  const auto genes = add_polya_genes(net, "urn", mk, model, 3);
  const auto joint = bn::joint_marginal(net, {}, genes);
  const auto ref = oracle::urn_joint(rho, 3.0, 3);
  for (std::size_t i = 0; i < ref.size(); ++i) CHECK(joint[i] == doctest::Approx(ref[i]).epsilon(1e-12));
}

TEST_CASE("expansion is deterministic and validates participants") {
  const auto f = abc_marker(0.2, 0.3, 0.5);
  CaseSpec spec;
  spec.kind = CaseKind::paternity;
  spec.frequencies = table_of({f});
  spec.participants = {{"mother", {{"M", Genotype("A", "A")}}}, {"child", {{"M", Genotype("A", "B")}}}};
  CHECK(code_of([&] { (void)expand(spec); }) == Errc::unbound_port);
  spec.participants["putative_father"] = Profile{{"M", Genotype("B", "B")}};
  const auto a = expand(spec), b = expand(spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].network == b[i].network);
    CHECK(a[i].evidence == b[i].evidence);
    CHECK(bn::to_json(a[i].network) == bn::to_json(b[i].network));
  }
  CHECK(parse_case_kind("sibling_paternity") == CaseKind::sibling_paternity);
  CHECK(to_string(CaseKind::fraction) == "fraction");
}

TEST_CASE("DNA testing error network") {
  const auto exact = dna_testing_error_network({0.5, 0.01, 0.0, 0.0});
  const auto ev = bn::make_evidence(exact, {{"defendant_test.output", "true"}, {"source_test.output", "true"}});
  const auto h = exact.id("identification.defendant_is_source");
  auto lr_of = [&](const Network& net) {
    const auto post = bn::enumerate_joint(net, ev, h);
    return post[0] / post[1];  // prior odds are 1
  };
  CHECK(lr_of(exact) == doctest::Approx(100.0).epsilon(1e-12));
  const double noisy = lr_of(dna_testing_error_network({0.5, 0.01, 0.01, 0.01}));
  CHECK(noisy < 100.0);
  CHECK(noisy > 1.0);
}

TEST_CASE("shipped network documents equal the builders") {
  CHECK(bn::load_network(data("networks/fictional_crime.json")) == fictional_crime_network());
  CHECK(bn::load_network(data("networks/dna_testing_error.json")) ==
        dna_testing_error_network({0.5, 0.01, 0.001, 0.001}));
  CHECK(bn::load_network(data("networks/transfer.json")) == build_transfer_network(default_transfer_params()));
}
