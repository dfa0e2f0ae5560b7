#pragma once

#include <filesystem>

#include "json.hpp"
#include "skyforge/config.hpp"
#include "skyforge/search.hpp"
#include "skyforge/test_log.hpp"

namespace skyforge {

nlohmann::json cell_to_json(const Cell& c);
Cell cell_from_json(const nlohmann::json& j);

/// Provenance of `b`: the root it grew from and the operators applied.
nlohmann::json provenance_json(const SearchResult& r, const StateBitmap& b, const StateSpace& space);

/// Applies a provenance record to its start state and returns the result.
StateBitmap replay_provenance(const nlohmann::json& provenance, const StateSpace& space);

/// Builds the result manifest and, when `out_dir` is non-empty, writes one
/// CSV per reported dataset (rows re-expanded by multiplicity) under
/// out_dir/datasets. Contains no timing, so reruns are byte-identical.
nlohmann::json build_manifest(const RunConfig& cfg, const Session& s, const SearchResult& r, const TestLog& log,
                              const std::filesystem::path& out_dir);

}  // namespace skyforge
