#include <filesystem>

#include "doctest.h"
#include "forensic/case_file.hpp"
#include "forensic/error.hpp"
#include "json.hpp"

using namespace forensic;
using nlohmann::json;

namespace {

std::filesystem::path cases() { return std::filesystem::path(FORENSIC_DATA_DIR) / "cases"; }

json run(const std::string& name, const CaseOptions& o = {}) {
  return json::parse(evaluate_case_file(cases() / name, o).json);
}

std::string error_of(const std::string& text) {
  try {
    (void)evaluate_case(text, cases());
  } catch (const Error& e) {
    return e.what();
  }
  FAIL("expected forensic::Error");
  return {};
}

}  // namespace

TEST_CASE("every shipped case evaluates with the common report fields") {
  for (const auto& entry : std::filesystem::directory_iterator(cases())) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    const auto r = run(entry.path().filename().string());
    for (const char* field : {"kind", "lr", "lr_text", "per_marker", "verbal", "engine", "theta", "provenance"}) {
      CHECK(r.contains(field));
    }
  }
}

TEST_CASE("shoe-mark likelihoods") {
  const auto r = run("shoe.json");
  CHECK(r["lr"].get<double>() == 100.0);
  CHECK(r["lr_text"] == "LR = 100");
  const auto common = run("shoe_common.json");
  CHECK(std::abs(common["lr"].get<double>() - 1.11) < 1e-2);
}

TEST_CASE("overrides: theta and edition") {
  CaseOptions o;
  o.theta = 0.03;
  o.edition = ScaleEdition::evett1998;
  const auto r = run("single_source.json", o);
  CHECK(r["theta"].get<double>() == 0.03);
  CHECK(r["verbal"]["edition"] == "evett1998");
  const auto base = run("single_source.json");
  CHECK(r["lr"].get<double>() < base["lr"].get<double>());
}

TEST_CASE("case kinds dispatch to their engines") {
  CHECK(run("criminal.json")["engine"] == "propagation");
  CHECK(run("sibling_paternity.json")["engine"] == "enumeration");
  CHECK(run("bn_query.json")["engine"] == "enumeration");
  const auto mix = run("mixture_network.json");
  CHECK(mix["per_marker"].size() == 1);
  CHECK(run("glass.json")["t_test"]["p_value"].get<double>() == doctest::Approx(0.90234899132243991).epsilon(1e-6));
  CHECK(case_kind(R"({"kind": "paternity"})") == "paternity");
}

TEST_CASE("reports are deterministic") {
  for (const char* name : {"mixture.json", "criminal_polya.json", "subpopulation.json", "fraction.json"}) {
    CHECK(evaluate_case_file(cases() / name).json == evaluate_case_file(cases() / name).json);
  }
}

TEST_CASE("schema errors name the JSON path") {
  CHECK(error_of(R"({"kind": "single_source", "likelihoods": {"hp": 1}})").find("/likelihoods") != std::string::npos);
  CHECK(error_of(R"({"kind": "teleport"})").find("teleport") != std::string::npos);
  CHECK(error_of(R"({"kind": "scale"})").find("lr") != std::string::npos);
}

TEST_CASE("syntax errors name the line") {
  CHECK(error_of("{\n\"kind\": \"scale\",\n\"lr\": }").find("line 3") != std::string::npos);
}

TEST_CASE("infinite likelihood ratio renders as null with text") {
  const auto r = json::parse(evaluate_case(R"({"kind": "single_source", "likelihoods": {"hp": 0.5, "hd": 0}})", cases()).json);
  CHECK(r["lr"].is_null());
  CHECK(r["lr_text"] == "LR > 10^9 (denominator zero)");
}
