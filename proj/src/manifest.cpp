#include "skyforge/manifest.hpp"

#include <fstream>

#include "skyforge/csv.hpp"
#include "skyforge/errors.hpp"

namespace skyforge {

namespace fs = std::filesystem;
using nlohmann::json;

json cell_to_json(const Cell& c) {
  if (auto* i = std::get_if<std::int64_t>(&c)) return *i;
  if (auto* d = std::get_if<double>(&c)) return *d;
  if (auto* s = std::get_if<std::string>(&c)) return *s;
  return nullptr;
}

Cell cell_from_json(const json& j) {
  if (j.is_null()) return std::monostate{};
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw ParseError("cell must be null, a number or a string");
}

json provenance_json(const SearchResult& r, const StateBitmap& b, const StateSpace& space) {
  const auto path = r.graph.path_to(b);
  const StateBitmap& start = path.empty() ? b : path.front().from;
  const auto& u = space.universal();
  json ops = json::array();
  for (const auto& t : path) {
    const auto& lit = u.literals(t.op.attribute).at(t.op.literal);
    ops.push_back({{"op", t.op.kind == OpKind::Reduct ? "reduct" : "augment"},
                   {"attribute", lit.attribute},
                   {"value", cell_to_json(lit.value)}});
  }
  const bool fwd = r.graph.node(start).direction == SearchDirection::Forward;
  return {{"root", fwd ? "forward" : "backward"}, {"start", start.hex()}, {"operators", ops}};
}

StateBitmap replay_provenance(const json& p, const StateSpace& space) {
  SearchState s{StateBitmap::from_hex(p.at("start").get<std::string>(), space.num_bits()), 0, std::nullopt};
  for (const auto& o : p.at("operators")) {
    Literal lit{o.at("attribute").get<std::string>(), cell_from_json(o.at("value"))};
    const auto kind = o.at("op").get<std::string>();
    if (kind == "reduct")
      s = apply_reduct(s, lit, space);
    else if (kind == "augment")
      s = apply_augment(s, lit, space);
    else
      throw ParseError("unknown operator '" + kind + "'");
  }
  return s.bitmap;
}

namespace {

Relation expanded(const Relation& rel) {
  std::vector<std::vector<Cell>> rows;
  for (std::size_t i = 0; i < rel.num_rows(); ++i)
    for (std::uint64_t w = 0; w < rel.weight(i); ++w) rows.push_back(rel.rows()[i]);
  return Relation(rel.name(), rel.schema(), rel.types(), std::move(rows));
}

}  // namespace

json build_manifest(const RunConfig& cfg, const Session& s, const SearchResult& r, const TestLog& log,
                    const fs::path& out_dir) {
  const auto& space = *s.space;
  json datasets = json::array();
  if (!out_dir.empty()) fs::create_directories(out_dir / "datasets");

  for (const auto& e : r.grid.occupants()) {
    const auto rel = expanded(*space.materialize(e.bitmap));
    const std::string csv = "datasets/" + e.bitmap.hex() + ".csv";
    if (!out_dir.empty()) write_csv(out_dir / csv, rel);

    const auto rec = log.find(e.bitmap);
    json measures = json::object();
    for (std::size_t i = 0; i < s.measures.size(); ++i) {
      json raw = rec && i < rec->raw.size() ? json(rec->raw[i]) : json(nullptr);
      measures[s.measures[i].name] = {{"raw", raw}, {"normalized", e.perf[i]}};
    }
    datasets.push_back({{"bitmap", e.bitmap.hex()},
                        {"bits", e.bitmap.bits()},
                        {"csv", csv},
                        {"rows", rel.num_rows()},
                        {"columns", rel.schema()},
                        {"measures", measures},
                        {"grid_position", e.pos},
                        {"below_pl", e.below_pl},
                        {"provenance", provenance_json(r, e.bitmap, space)}});
  }

  json m;
  m["config_hash"] = config_hash(cfg.document);
  m["algorithm"] = to_string(cfg.search.algorithm);
  m["epsilon"] = cfg.search.epsilon;
  m["num_bits"] = space.num_bits();
  m["stop_reason"] = to_string(r.stop);
  m["partial"] = r.partial;
  if (r.partial) {
    m["failure"] = r.failure;
    m["failed_bitmap"] = r.failed_bitmap;
  }
  m["valuations"] = r.submitted.size();
  m["estimator_calls"] = r.estimator_calls;
  m["cell_bound"] = r.grid.cell_bound();
  m["skyline"] = datasets;
  if (cfg.search.algorithm == Algorithm::Div) {
    json div = json::array();
    for (const auto& b : r.diversified) div.push_back(b.hex());
    m["diversified"] = div;
  }
  json pruned = json::array();
  for (const auto& b : r.pruned) pruned.push_back(b.hex());
  m["pruned"] = pruned;
  m["graph"] = {{"nodes", r.graph.nodes().size()}, {"edges", r.graph.edges().size()}};
  return m;
}

}  // namespace skyforge
