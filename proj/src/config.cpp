#include "skyforge/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "skyforge/csv.hpp"
#include "skyforge/errors.hpp"
#include "skyforge/schema_data.hpp"

namespace skyforge {

namespace {

bool has_type(const nlohmann::json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "number") return v.is_number();
  if (t == "integer") {
    if (v.is_number_integer()) return true;
    return v.is_number_float() && std::floor(v.get<double>()) == v.get<double>();
  }
  return false;
}

void validate(const nlohmann::json& v, const nlohmann::json& s, const std::string& at,
              std::vector<std::string>& errs) {
  auto fail = [&](const std::string& msg) { errs.push_back((at.empty() ? "/" : at) + ": " + msg); };

  if (s.contains("type")) {
    std::vector<std::string> types;
    if (s["type"].is_array())
      types = s["type"].get<std::vector<std::string>>();
    else
      types.push_back(s["type"].get<std::string>());
    bool ok = false;
    for (const auto& t : types) ok = ok || has_type(v, t);
    if (!ok) {
      std::string want;
      for (const auto& t : types) want += (want.empty() ? "" : " or ") + t;
      fail("expected " + want);
      return;
    }
  }
  if (s.contains("enum")) {
    bool ok = false;
    for (const auto& e : s["enum"]) ok = ok || e == v;
    if (!ok) fail("must be one of " + s["enum"].dump());
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (s.contains("minimum") && x < s["minimum"].get<double>()) fail("must be >= " + s["minimum"].dump());
    if (s.contains("maximum") && x > s["maximum"].get<double>()) fail("must be <= " + s["maximum"].dump());
    if (s.contains("exclusiveMinimum") && x <= s["exclusiveMinimum"].get<double>())
      fail("must be > " + s["exclusiveMinimum"].dump());
  }
  if (v.is_string() && s.contains("minLength") &&
      v.get<std::string>().size() < s["minLength"].get<std::size_t>())
    fail("string too short");
  if (v.is_array()) {
    if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>())
      fail("needs at least " + s["minItems"].dump() + " items");
    if (s.contains("maxItems") && v.size() > s["maxItems"].get<std::size_t>())
      fail("allows at most " + s["maxItems"].dump() + " items");
    if (s.contains("items"))
      for (std::size_t i = 0; i < v.size(); ++i) validate(v[i], s["items"], at + "/" + std::to_string(i), errs);
  }
  if (v.is_object()) {
    if (s.contains("required"))
      for (const auto& r : s["required"])
        if (!v.contains(r.get<std::string>())) fail("missing required property '" + r.get<std::string>() + "'");
    const nlohmann::json* props = s.contains("properties") ? &s["properties"] : nullptr;
    for (const auto& [key, val] : v.items()) {
      if (props && props->contains(key)) {
        validate(val, (*props)[key], at + "/" + key, errs);
      } else if (s.contains("additionalProperties")) {
        const auto& ap = s["additionalProperties"];
        if (ap.is_boolean()) {
          if (!ap.get<bool>()) fail("unknown property '" + key + "'");
        } else {
          validate(val, ap, at + "/" + key, errs);
        }
      }
    }
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

RidgeQuantity ridge_quantity(const std::string& s) {
  if (s == "training_error") return RidgeQuantity::TrainingError;
  if (s == "heldout_error") return RidgeQuantity::HeldOutError;
  if (s == "training_cost") return RidgeQuantity::TrainingCost;
  if (s == "model_size") return RidgeQuantity::ModelSize;
  throw ConfigError("unknown ridge quantity '" + s + "'");
}

}  // namespace

std::vector<std::string> validate_schema(const nlohmann::json& instance, const nlohmann::json& schema) {
  std::vector<std::string> errs;
  validate(instance, schema, "", errs);
  return errs;
}

const nlohmann::json& run_config_schema() {
  static const nlohmann::json schema = nlohmann::json::parse(kRunConfigSchemaText);
  return schema;
}

void apply_overrides(nlohmann::json& doc, const Overrides& o) {
  if (!doc.is_object()) return;
  auto& s = doc["search"];
  if (s.is_null()) s = nlohmann::json::object();
  if (!s.is_object()) return;
  if (o.epsilon) s["epsilon"] = *o.epsilon;
  if (o.max_length) s["max_length"] = *o.max_length;
  if (o.budget) s["budget"] = *o.budget;
  if (o.k) s["k"] = *o.k;
  if (o.alpha) s["alpha"] = *o.alpha;
  if (o.theta) s["theta"] = *o.theta;
  if (o.algorithm) s["algorithm"] = *o.algorithm;
  if (o.workers) s["workers"] = *o.workers;
  if (o.output_dir) doc["output_dir"] = *o.output_dir;
}

RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  auto errs = validate_schema(doc, run_config_schema());
  if (!errs.empty()) {
    std::string msg = "configuration does not match the schema:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw ConfigError(msg);
  }

  RunConfig c;
  c.base_dir = base_dir;
  c.document = doc;
  for (const auto& s : doc["sources"]) {
    SourceSpec src;
    src.path = resolve(base_dir, s["path"].get<std::string>());
    src.name = s.value("name", src.path.stem().string());
    c.sources.push_back(std::move(src));
  }
  for (const auto& k : doc.value("join_keys", nlohmann::json::array())) {
    JoinKey jk{k["left"], k["right"], {}};
    for (const auto& pair : k["on"]) jk.on.emplace_back(pair[0], pair[1]);
    c.join_keys.push_back(std::move(jk));
  }
  c.target = doc.value("target", "");
  c.max_clusters = doc.value("max_clusters", kDefaultMaxClusters);
  c.compress = doc.value("compress", true);

  std::vector<std::string> problems;
  for (const auto& m : doc["measures"]) {
    MeasureSpec spec;
    spec.name = m["name"];
    spec.direction = m.value("direction", "minimize") == "maximize" ? Direction::Maximize : Direction::Minimize;
    spec.raw_low = m.value("raw_low", 0.0);
    spec.raw_high = m.value("raw_high", 1.0);
    spec.pl = m.value("pl", kNormFloor);
    spec.pu = m.value("pu", 1.0);
    spec.decisive = m.value("decisive", false);
    c.measures.push_back(spec);
  }
  c.estimator = doc["estimator"];

  const auto search = doc.value("search", nlohmann::json::object());
  c.search.algorithm = parse_algorithm(search.value("algorithm", "apx"));
  c.search.epsilon = search.value("epsilon", c.search.epsilon);
  c.search.budget = search.value("budget", c.search.budget);
  if (search.contains("max_length") && !search["max_length"].is_null())
    c.search.max_length = search["max_length"].get<std::size_t>();
  c.search.k = search.value("k", c.search.k);
  c.search.alpha = search.value("alpha", c.search.alpha);
  c.search.theta = search.value("theta", c.search.theta);
  c.search.workers = search.value("workers", c.search.workers);
  c.search.target = c.target;
  c.cache_size = search.value("cache_size", c.cache_size);
  if (search.contains("decisive")) c.decisive = search["decisive"].get<std::string>();
  c.output_dir = resolve(base_dir, doc.value("output_dir", "skyforge-out"));

  try {
    MeasureSet set(c.measures);
    if (c.decisive) set = set.with_decisive(*c.decisive);
    c.search.validate();
  } catch (const ArgumentError& e) {
    problems.push_back(e.what());
  }
  if (c.search.algorithm != Algorithm::Apx && c.target.empty())
    problems.push_back("the backward search needs a target attribute");
  const std::string type = c.estimator["type"];
  if (type == "ridge" && c.target.empty()) problems.push_back("the ridge estimator needs a target attribute");
  if (type == "ridge" && !c.estimator.contains("bindings")) problems.push_back("ridge estimator needs bindings");
  if (type == "subprocess" && !c.estimator.contains("command"))
    problems.push_back("subprocess estimator needs a command");
  if (type == "lookup" && !c.estimator.contains("table") && !c.estimator.contains("table_path"))
    problems.push_back("lookup estimator needs a table or table_path");
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const Overrides& o) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  apply_overrides(doc, o);
  return parse_config(doc, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash(const nlohmann::json& doc) {
  nlohmann::json d = doc;
  if (d.is_object()) {
    d.erase("output_dir");
    if (d.contains("search") && d["search"].is_object()) d["search"].erase("workers");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(d.dump())));
  return buf;
}

std::unique_ptr<Estimator> make_estimator(const nlohmann::json& spec, const std::filesystem::path& base_dir,
                                          const std::string& target, std::size_t nbits) {
  const std::string type = spec.at("type");
  if (type == "lookup") {
    nlohmann::json table;
    if (spec.contains("table")) {
      table = spec["table"];
    } else {
      auto p = resolve(base_dir, spec["table_path"].get<std::string>());
      std::ifstream in(p);
      if (!in) throw ConfigError("cannot read lookup table " + p.string());
      table = nlohmann::json::parse(in);
    }
    const bool bits = spec.value("keys", "hex") == "bits";
    auto est = std::make_unique<LookupEstimator>();
    for (const auto& [key, vals] : table.items()) {
      StateBitmap b;
      try {
        b = bits ? StateBitmap::from_bits(key) : StateBitmap::from_hex(key, nbits);
      } catch (const ParseError& e) {
        throw ConfigError("lookup key '" + key + "': " + e.what());
      }
      if (b.size() != nbits) throw ConfigError("lookup key '" + key + "' does not match the bitmap length");
      RawMeasures raw;
      for (const auto& [name, v] : vals.items()) {
        if (!v.is_number()) throw ConfigError("lookup value for '" + name + "' is not a number");
        raw[name] = v.get<double>();
      }
      est->set(b, std::move(raw));
    }
    return est;
  }
  if (type == "ridge") {
    std::map<std::string, RidgeQuantity> bindings;
    for (const auto& [name, q] : spec["bindings"].items()) bindings[name] = ridge_quantity(q);
    auto est = std::make_unique<RidgeEstimator>(target, std::move(bindings), spec.value("lambda", 1e-8));
    if (spec.contains("missing_target_error")) est->set_missing_target_error(spec["missing_target_error"]);
    return est;
  }
  if (type == "subprocess") {
    auto cmd = spec["command"].get<std::vector<std::string>>();
    auto timeout = std::chrono::milliseconds(spec.value("timeout_ms", 60000));
    return std::make_unique<SubprocessEstimator>(std::move(cmd), timeout);
  }
  throw ConfigError("unknown estimator type '" + type + "'");
}

Session prepare_session(const RunConfig& cfg) {
  std::vector<Relation> sources;
  std::set<std::string> names;
  for (const auto& s : cfg.sources) {
    if (!names.insert(s.name).second) throw ConfigError("duplicate source name '" + s.name + "'");
    try {
      sources.push_back(read_csv(s.path, s.name));
    } catch (const Error& e) {
      throw ConfigError("cannot ingest " + s.path.string() + ": " + e.what());
    }
  }
  UniversalTable u;
  try {
    u = build_universal(sources, cfg.join_keys);
  } catch (const SchemaConflictError& e) {
    throw ConfigError(std::string("schema conflict: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  if (!cfg.target.empty() && !u.relation().column_index(cfg.target))
    throw ConfigError("target '" + cfg.target + "' is not in the universal schema");
  u = derive_all_literals(u, cfg.max_clusters);
  if (cfg.compress) u = compress_rows(u);

  Session s;
  s.universal = std::make_shared<const UniversalTable>(std::move(u));
  s.space = std::make_unique<StateSpace>(s.universal, cfg.cache_size);
  s.measures = MeasureSet(cfg.measures);
  if (cfg.decisive) s.measures = s.measures.with_decisive(*cfg.decisive);
  s.estimator = make_estimator(cfg.estimator, cfg.base_dir, cfg.target, s.space->num_bits());
  return s;
}

}  // namespace skyforge
