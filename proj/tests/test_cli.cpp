#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "skyforge/commands.hpp"
#include "skyforge/config.hpp"
#include "skyforge/csv.hpp"
#include "skyforge/errors.hpp"
#include "skyforge/manifest.hpp"

using namespace skyforge;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = SKYFORGE_FIXTURES;

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("skyforge-cli-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

int cli(const std::string& args) {
  const std::string cmd = std::string(SKYFORGE_CLI) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

json running_example_doc() { return read_json(kFixtures / "running_example" / "config.json"); }

// Writes `doc` next to copies of the example data so relative paths resolve.
fs::path write_config(const fs::path& dir, const json& doc) {
  fs::copy_file(kFixtures / "running_example" / "data.csv", dir / "data.csv", fs::copy_options::overwrite_existing);
  auto p = dir / "config.json";
  std::ofstream(p) << doc.dump(2);
  return p;
}

int run_in_process(const fs::path& config, const fs::path& out, Overrides o = {}) {
  CommandOptions opts;
  opts.config = config;
  opts.overrides = std::move(o);
  opts.overrides.output_dir = out.string();
  std::ostringstream sink, err;
  return run_command(opts, sink, err);
}

}  // namespace

TEST_CASE("schema diagnostics") {
  auto doc = running_example_doc();
  CHECK(validate_schema(doc, run_config_schema()).empty());

  auto bad = doc;
  bad.erase("measures");
  bad["extra"] = 1;
  bad["measures"] = json::array({{{"name", "p"}, {"direction", "sideways"}, {"pu", 2}}});
  auto errs = validate_schema(bad, run_config_schema());
  auto has = [&](const std::string& needle) {
    for (const auto& e : errs)
      if (e.find(needle) != std::string::npos) return true;
    return false;
  };
  CHECK(has("extra"));
  CHECK(has("/measures/0/direction"));
  CHECK(has("/measures/0/pu"));

  auto wrong_type = doc;
  wrong_type["search"]["budget"] = "many";
  CHECK_FALSE(validate_schema(wrong_type, run_config_schema()).empty());
  CHECK_THROWS_AS(parse_config(wrong_type, kFixtures), ConfigError);

  auto no_target = doc;
  no_target["search"]["algorithm"] = "bi";
  CHECK_THROWS_AS(parse_config(no_target, kFixtures / "running_example"), ConfigError);
}

TEST_CASE("overrides and config hash") {
  auto doc = running_example_doc();
  auto cfg = parse_config(doc, kFixtures / "running_example");
  CHECK(cfg.search.epsilon == 1.0);
  CHECK(cfg.measures.size() == 3);
  CHECK(cfg.measures[1].decisive);

  Overrides o;
  o.epsilon = 0.25;
  o.algorithm = "div";
  o.k = 2;
  auto changed = doc;
  apply_overrides(changed, o);
  CHECK(changed["search"]["epsilon"] == 0.25);
  CHECK(config_hash(changed) != config_hash(doc));

  auto cosmetic = doc;
  Overrides c;
  c.workers = 8;
  c.output_dir = "/elsewhere";
  apply_overrides(cosmetic, c);
  CHECK(config_hash(cosmetic) == config_hash(doc));

  auto measure = doc;
  measure["measures"][0]["pu"] = 0.9;
  CHECK(config_hash(measure) != config_hash(doc));
  CHECK(config_hash(doc).size() == 16);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("example run lists exactly D3 and D5") {
  auto out = scratch("running_example");
  REQUIRE(run_in_process(kFixtures / "running_example" / "config.json", out) == kExitOk);
  auto m = read_json(out / "manifest.json");
  std::set<std::vector<double>> vectors;
  for (const auto& d : m["skyline"])
    vectors.insert(std::vector<double>{d["measures"]["p1"]["normalized"].get<double>(),
                                       d["measures"]["p2"]["normalized"].get<double>(),
                                       d["measures"]["p3"]["normalized"].get<double>()});
  const auto& t = fixtures::running_example();
  CHECK(vectors == std::set<std::vector<double>>{t[2], t[4]});
  CHECK(m["partial"] == false);
  CHECK(fs::exists(out / "timing.json"));
  CHECK(read_json(out / "test_log.json").size() == 7);
}

TEST_CASE("provenance replays to each dataset") {
  auto out = scratch("replay");
  REQUIRE(run_in_process(kFixtures / "ridge" / "config.json", out) == kExitOk);
  auto cfg = load_config(kFixtures / "ridge" / "config.json");
  auto session = prepare_session(cfg);
  auto m = read_json(out / "manifest.json");
  REQUIRE(!m["skyline"].empty());
  for (const auto& d : m["skyline"]) {
    auto b = replay_provenance(d["provenance"], *session.space);
    CHECK(b.hex() == d["bitmap"].get<std::string>());
    // cell-for-cell against the CSV that was written
    auto written = read_csv(out / d["csv"].get<std::string>(), "w");
    auto rel = session.space->materialize(b);
    std::vector<std::vector<std::string>> expect, got;
    for (std::size_t r = 0; r < rel->num_rows(); ++r)
      for (std::uint64_t w = 0; w < rel->weight(r); ++w) {
        std::vector<std::string> row;
        for (const auto& c : rel->rows()[r]) row.push_back(cell_text(c));
        expect.push_back(row);
      }
    for (const auto& row : written.rows()) {
      std::vector<std::string> r;
      for (const auto& c : row) r.push_back(cell_text(c));
      got.push_back(r);
    }
    CHECK(got == expect);
    CHECK(written.schema() == rel->schema());
    CHECK(d["rows"] == expect.size());
  }
}

TEST_CASE("reruns produce byte-identical manifests") {
  auto a = scratch("rerun-a"), b = scratch("rerun-b");
  Overrides o;
  o.algorithm = "div";
  o.k = 3;
  REQUIRE(run_in_process(kFixtures / "ridge" / "config.json", a, o) == kExitOk);
  o.workers = 3;
  REQUIRE(run_in_process(kFixtures / "ridge" / "config.json", b, o) == kExitOk);
  CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
  CHECK(slurp(a / "test_log.json") == slurp(b / "test_log.json"));
  CHECK(read_json(a / "manifest.json").contains("diversified"));
}

TEST_CASE("bi and nobi agree when nothing can be pruned") {
  auto a = scratch("bi"), b = scratch("nobi");
  Overrides o;
  o.theta = 1.0;
  o.algorithm = "bi";
  REQUIRE(run_in_process(kFixtures / "running_example" / "config.json", a, o) == kExitInvalidConfig);  // needs a target

  auto doc = running_example_doc();
  doc["target"] = "B";
  auto dir = scratch("bi-config");
  auto cfg = write_config(dir, doc);
  REQUIRE(run_in_process(cfg, a, o) == kExitOk);
  o.algorithm = "nobi";
  REQUIRE(run_in_process(cfg, b, o) == kExitOk);
  auto ma = read_json(a / "manifest.json"), mb = read_json(b / "manifest.json");
  CHECK(ma["pruned"].empty());
  for (auto* m : {&ma, &mb}) {
    m->erase("algorithm");
    m->erase("config_hash");
  }
  CHECK(ma == mb);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("exit");
  const std::string ex3 = (kFixtures / "running_example" / "config.json").string();
  const std::string out = " --output-dir " + (dir / "out").string();

  CHECK(cli("run --config " + ex3 + out) == kExitOk);
  CHECK(cli("run --config " + ex3 + out + " --epsilon -1") == kExitInvalidConfig);
  CHECK(cli("run --config " + (dir / "missing.json").string() + out) == kExitInvalidConfig);
  CHECK(cli("run --config " + ex3 + out + " --algorithm magic") == kExitInvalidConfig);

  auto doc = running_example_doc();
  doc["sources"][0]["path"] = "absent.csv";
  CHECK(cli("run --config " + write_config(scratch("nosrc"), doc).string() + out) == kExitInvalidConfig);

  doc = running_example_doc();
  doc["estimator"]["table"].erase("110");
  CHECK(cli("run --config " + write_config(scratch("fail"), doc).string() + out) == kExitEstimatorFailure);
  auto partial = read_json(dir / "out" / "manifest.json");
  CHECK(partial["partial"] == true);
  CHECK(partial["failed_bitmap"] == StateBitmap::from_bits("110").hex());

  doc = running_example_doc();
  for (auto& m : doc["measures"]) {
    m["pl"] = 0.005;
    m["pu"] = 0.01;
  }
  CHECK(cli("run --config " + write_config(scratch("empty"), doc).string() + out) == kExitEmptySkyline);

  CHECK(cli("verify --config " + ex3) == kExitOk);
  CHECK(cli("verify --config " + ex3 + " --corrupt-grid") == kExitViolations);
  CHECK(cli("verify --config " + (kFixtures / "ridge" / "config.json").string() + " --algorithm div") == kExitOk);

  // 21 distinct categories give a 21-bit layout
  auto wide = scratch("wide");
  {
    std::ofstream csv(wide / "data.csv");
    csv << "c\n";
    for (int i = 0; i < 21; ++i) csv << "v" << i << "\n";
  }
  json w = running_example_doc();
  w["sources"][0]["path"] = "data.csv";
  w["estimator"]["table"] = json::object();
  std::ofstream(wide / "config.json") << w.dump();
  CHECK(cli("verify --config " + (wide / "config.json").string()) == kExitCapExceeded);
}

TEST_CASE("subprocess estimator end to end") {
  auto doc = running_example_doc();
  doc["estimator"] = {{"type", "subprocess"},
                      {"command", {"python3", (kFixtures / "line_estimator.py").string(), "ok"}},
                      {"timeout_ms", 20000}};
  for (auto& m : doc["measures"]) m["pl"] = kNormFloor;
  auto dir = scratch("subprocess");
  auto cfg = write_config(dir, doc);
  ::setenv("SKYFORGE_TMPDIR", (dir / "tmp").c_str(), 1);
  CHECK(run_in_process(cfg, dir / "out") == kExitOk);
  ::unsetenv("SKYFORGE_TMPDIR");
  CHECK(fs::is_empty(dir / "tmp"));
  CHECK(read_json(dir / "out" / "manifest.json")["estimator_calls"] == 7);
}
