#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forensic/evaluation.hpp"

namespace forensic {

/// Overrides and output options applied on top of a case file.
struct CaseOptions {
  std::optional<double> theta;
  std::optional<std::filesystem::path> frequencies;
  std::optional<ScaleEdition> edition;  // case file's "edition", else evett2000
  std::uint64_t seed = 1;
};

/// Result of evaluating one case. `json` is a single object that always has
/// the fields "kind", "lr", "lr_text", "per_marker", "verbal", "engine",
/// "theta" and "provenance"; kinds without a likelihood ratio set "lr" and
/// "verbal" to null and add their own result fields.
struct Report {
  std::string kind;
  std::string json;
  std::string text;
  std::vector<std::string> dot;      // one digraph per expanded network
  std::vector<std::string> notices;  // e.g. engine fallbacks
};

/// Case kinds: single_source, mixture, criminal, paternity,
/// sibling_paternity, mixture_network, subpopulation, fraction, glass,
/// bn_query, ci_query, scale (a bare "lr" value). Relative paths inside the document resolve against
/// `base_dir`. Throws forensic::Error.
Report evaluate_case(std::string_view json_text, const std::filesystem::path& base_dir,
                     const CaseOptions& options = {});
Report evaluate_case_file(const std::filesystem::path& path, const CaseOptions& options = {});

/// Kind field of a case document without evaluating it.
std::string case_kind(std::string_view json_text);

}  // namespace forensic
