#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "skyforge/estimator.hpp"
#include "skyforge/measures.hpp"
#include "skyforge/operators.hpp"
#include "skyforge/search.hpp"
#include "skyforge/universal.hpp"

namespace skyforge {

/// Checks `instance` against a JSON schema. Supports the subset the run
/// configuration schema uses: type, enum, required, properties,
/// additionalProperties, items, minItems, maxItems, minLength, minimum,
/// maximum, exclusiveMinimum. Returns one diagnostic per failure.
std::vector<std::string> validate_schema(const nlohmann::json& instance, const nlohmann::json& schema);

/// The published run configuration schema.
const nlohmann::json& run_config_schema();

struct SourceSpec {
  std::filesystem::path path;
  std::string name;
};

struct RunConfig {
  std::filesystem::path base_dir;
  std::vector<SourceSpec> sources;
  std::vector<JoinKey> join_keys;
  std::string target;
  std::size_t max_clusters = kDefaultMaxClusters;
  bool compress = true;
  std::vector<MeasureSpec> measures;
  std::optional<std::string> decisive;
  nlohmann::json estimator;
  SearchConfig search;
  std::size_t cache_size = StateSpace::kDefaultCacheSize;
  std::filesystem::path output_dir;
  /// The validated document, after command-line overrides.
  nlohmann::json document;
};

/// Command-line values that replace configuration fields.
struct Overrides {
  std::optional<double> epsilon;
  std::optional<std::size_t> max_length;
  std::optional<std::size_t> budget;
  std::optional<std::size_t> k;
  std::optional<double> alpha;
  std::optional<double> theta;
  std::optional<std::string> algorithm;
  std::optional<std::size_t> workers;
  std::optional<std::string> output_dir;
};

void apply_overrides(nlohmann::json& doc, const Overrides& o);

/// Validates and interprets a configuration document. Relative paths resolve
/// against `base_dir`. Throws ConfigError listing every diagnostic.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Reads, overrides and parses a configuration file.
RunConfig load_config(const std::filesystem::path& path, const Overrides& o = {});

/// FNV-1a (64-bit) of the canonical document without output_dir and
/// search.workers, which do not change results.
std::string config_hash(const nlohmann::json& doc);
std::uint64_t fnv1a64(const std::string& bytes);

/// Everything a run needs, built from a configuration.
struct Session {
  std::shared_ptr<const UniversalTable> universal;
  std::unique_ptr<StateSpace> space;
  MeasureSet measures;
  std::unique_ptr<Estimator> estimator;
};

/// Ingests sources, builds and clusters the universal table, optionally
/// compresses rows, and instantiates the estimator.
Session prepare_session(const RunConfig& cfg);

std::unique_ptr<Estimator> make_estimator(const nlohmann::json& spec, const std::filesystem::path& base_dir,
                                          const std::string& target, std::size_t nbits);

}  // namespace skyforge
