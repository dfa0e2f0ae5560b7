#include "skyforge/commands.hpp"

#include <chrono>
#include <fstream>
#include <ostream>

#include "skyforge/errors.hpp"
#include "skyforge/manifest.hpp"
#include "skyforge/oracle.hpp"

namespace skyforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ArgumentError("cannot write '" + p.string() + "'");
  out << j.dump(2) << '\n';
}

// Shared prologue: configuration and session, with failures mapped to exit 2.
struct Loaded {
  RunConfig cfg;
  Session session;
};

std::optional<Loaded> load(const CommandOptions& opts, std::ostream& err, int& code) {
  try {
    Loaded l;
    l.cfg = load_config(opts.config, opts.overrides);
    l.session = prepare_session(l.cfg);
    return l;
  } catch (const ConfigError& e) {
    err << "invalid configuration:\n" << e.what() << '\n';
  } catch (const ParseError& e) {
    err << "cannot parse input: " << e.what() << '\n';
  } catch (const EstimatorFailure& e) {
    err << "estimator failure: " << e.what() << '\n';
    code = kExitEstimatorFailure;
    return std::nullopt;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  code = kExitInvalidConfig;
  return std::nullopt;
}

}  // namespace

int run_command(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  const auto started = Clock::now();
  int code = kExitOk;
  auto loaded = load(opts, err, code);
  if (!loaded) return code;
  auto& [cfg, s] = *loaded;

  TestLog log;
  const auto search_started = Clock::now();
  SearchResult r;
  try {
    r = run_search(*s.space, s.measures, cfg.search, *s.estimator, log);
  } catch (const EstimatorFailure& e) {
    err << "estimator failure: " << e.what() << '\n';
    return kExitEstimatorFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidConfig;
  }
  const double search_seconds = seconds_since(search_started);

  try {
    fs::create_directories(cfg.output_dir);
    const json manifest = build_manifest(cfg, s, r, log, cfg.output_dir);
    write_json(cfg.output_dir / "manifest.json", manifest);
    write_json(cfg.output_dir / "test_log.json", log.to_json());
    write_json(cfg.output_dir / "timing.json",
               {{"search_seconds", search_seconds}, {"wall_seconds", seconds_since(started)}});
  } catch (const std::exception& e) {
    err << "cannot write results: " << e.what() << '\n';
    return kExitInvalidConfig;
  }

  out << "wrote " << (cfg.output_dir / "manifest.json").string() << ": " << r.grid.size()
      << " datasets, " << r.submitted.size() << " valuations, stop " << to_string(r.stop) << '\n';
  if (r.partial) {
    err << "estimator failure on " << r.failed_bitmap << ": " << r.failure << '\n';
    return kExitEstimatorFailure;
  }
  if (r.grid.empty()) {
    err << "empty skyline: no valuated state is within the measure bounds\n";
    return kExitEmptySkyline;
  }
  return kExitOk;
}

int verify_command(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  int code = kExitOk;
  auto loaded = load(opts, err, code);
  if (!loaded) return code;
  auto& [cfg, s] = *loaded;

  if (s.space->num_bits() > kDefaultMaxBits) {
    err << "enumeration cap exceeded: instance has " << s.space->num_bits() << " bits, limit is "
        << kDefaultMaxBits << '\n';
    return kExitCapExceeded;
  }

  TestLog log;
  try {
    SearchResult r = run_search(*s.space, s.measures, cfg.search, *s.estimator, log);
    if (r.partial) {
      err << "estimator failure on " << r.failed_bitmap << ": " << r.failure << '\n';
      return kExitEstimatorFailure;
    }
    if (opts.corrupt_grid)
      for (const auto& e : r.grid.occupants()) r.grid.erase(e.bitmap);

    const auto report = verify_run(*s.space, s.measures, cfg.search, *s.estimator, r, log);
    out << report.to_json().dump(2) << '\n';
    if (report_ok(report)) return kExitOk;
    for (const auto& v : report.eps_cover_violations) err << "eps-cover " << v.bitmap.hex() << ": " << v.reason << '\n';
    for (const auto& v : report.front_uncovered) err << "front " << v.bitmap.hex() << ": " << v.reason << '\n';
    if (report.div_ratio && *report.div_ratio < 0.25) err << "div ratio " << *report.div_ratio << " below 0.25\n";
    if (static_cast<double>(report.occupied_cells) > report.cell_bound) err << "grid exceeds its cell bound\n";
    return kExitViolations;
  } catch (const EnumerationLimitError& e) {
    err << e.what() << '\n';
    return kExitCapExceeded;
  } catch (const EstimatorFailure& e) {
    err << "estimator failure: " << e.what() << '\n';
    return kExitEstimatorFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidConfig;
  }
}

}  // namespace skyforge
