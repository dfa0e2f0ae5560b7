#include "skyforge/estimator.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <Eigen/Dense>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>

#include "json.hpp"
#include "skyforge/csv.hpp"
#include "skyforge/errors.hpp"

namespace skyforge {

RawMeasures LookupEstimator::estimate(const StateBitmap& bitmap, const Relation&) {
  auto it = table_.find(bitmap.hex());
  if (it == table_.end()) throw EstimatorFailure("no lookup entry for state " + bitmap.hex(), bitmap.hex());
  return it->second;
}

RidgeEstimator::RidgeEstimator(std::string target, std::map<std::string, RidgeQuantity> bindings,
                               double lambda)
    : target_(std::move(target)), bindings_(std::move(bindings)), lambda_(lambda) {
  if (bindings_.empty()) throw ArgumentError("ridge estimator reports no measures");
  if (!(lambda_ >= 0.0)) throw ArgumentError("ridge lambda must be non-negative");
}

namespace {

struct Fit {
  double train_rmse;
  double heldout_rmse;
};

// Design matrix: intercept, numeric columns (mean-imputed), one-hot categories.
Eigen::MatrixXd design(const Relation& d, std::size_t target) {
  const std::size_t n = d.num_rows();
  std::vector<Eigen::VectorXd> cols;
  cols.push_back(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)));
  for (std::size_t c = 0; c < d.num_cols(); ++c) {
    if (c == target) continue;
    if (d.types()[c] != ColumnType::String) {
      double sum = 0.0, wsum = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        if (is_null(d.rows()[r][c])) continue;
        sum += d.weight(r) * as_double(d.rows()[r][c]);
        wsum += d.weight(r);
      }
      const double mean = wsum > 0 ? sum / wsum : 0.0;
      Eigen::VectorXd v(n);
      for (std::size_t r = 0; r < n; ++r)
        v[r] = is_null(d.rows()[r][c]) ? mean : as_double(d.rows()[r][c]);
      cols.push_back(std::move(v));
    } else {
      for (const auto& value : d.adom(c)) {
        Eigen::VectorXd v(n);
        for (std::size_t r = 0; r < n; ++r) v[r] = cell_equal(d.rows()[r][c], value) ? 1.0 : 0.0;
        cols.push_back(std::move(v));
      }
    }
  }
  Eigen::MatrixXd x(n, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) x.col(j) = cols[j];
  return x;
}

double target_value(const Relation& d, std::size_t col, const Cell& c) {
  if (is_numeric(c)) return as_double(c);
  // Categorical targets regress on their rank in the active domain.
  const auto& adom = d.adom(col);
  for (std::size_t i = 0; i < adom.size(); ++i)
    if (cell_equal(adom[i], c)) return static_cast<double>(i);
  return 0.0;
}

std::optional<Fit> fit(const Relation& d, std::size_t target, double lambda) {
  const std::size_t n = d.num_rows();
  Eigen::MatrixXd x = design(d, target);
  std::vector<std::size_t> train, test;
  for (std::size_t r = 0; r < n; ++r) {
    if (is_null(d.rows()[r][target])) continue;
    (r % 5 == 4 ? test : train).push_back(r);
  }
  if (train.empty()) return std::nullopt;

  const auto p = x.cols();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  for (auto r : train) {
    const double w = static_cast<double>(d.weight(r));
    const double y = target_value(d, target, d.rows()[r][target]);
    a.noalias() += w * x.row(r).transpose() * x.row(r);
    b.noalias() += w * y * x.row(r).transpose();
  }
  for (Eigen::Index j = 1; j < p; ++j) a(j, j) += lambda;
  Eigen::VectorXd beta = a.ldlt().solve(b);
  if (!beta.allFinite()) beta = a.completeOrthogonalDecomposition().solve(b);

  auto rmse = [&](const std::vector<std::size_t>& rows) {
    double se = 0.0, wsum = 0.0;
    for (auto r : rows) {
      const double w = static_cast<double>(d.weight(r));
      const double e = target_value(d, target, d.rows()[r][target]) - x.row(r).dot(beta);
      se += w * e * e;
      wsum += w;
    }
    return std::sqrt(se / wsum);
  };
  Fit f;
  f.train_rmse = rmse(train);
  f.heldout_rmse = test.empty() ? f.train_rmse : rmse(test);
  return f;
}

}  // namespace

RawMeasures RidgeEstimator::estimate(const StateBitmap& bitmap, const Relation& dataset) {
  std::optional<Fit> f;
  if (auto t = dataset.column_index(target_)) f = fit(dataset, *t, lambda_);
  RawMeasures out;
  for (const auto& [name, q] : bindings_) {
    switch (q) {
      case RidgeQuantity::TrainingError:
        out[name] = f ? f->train_rmse : missing_error_;
        break;
      case RidgeQuantity::HeldOutError:
        out[name] = f ? f->heldout_rmse : missing_error_;
        break;
      case RidgeQuantity::TrainingCost:
        out[name] = static_cast<double>(dataset.total_weight());
        break;
      case RidgeQuantity::ModelSize:
        out[name] = static_cast<double>(dataset.num_cols());
        break;
    }
  }
  for (const auto& [name, v] : out)
    if (!std::isfinite(v)) throw EstimatorFailure("ridge produced a non-finite " + name, bitmap.hex());
  return out;
}

SubprocessEstimator::SubprocessEstimator(std::vector<std::string> command,
                                         std::chrono::milliseconds timeout,
                                         std::filesystem::path tmpdir)
    : command_(std::move(command)), timeout_(timeout),
      tmpdir_(tmpdir.empty() ? default_tmpdir() : std::move(tmpdir)) {
  if (command_.empty()) throw ArgumentError("subprocess estimator needs a command");
  if (timeout_.count() <= 0) throw ArgumentError("subprocess timeout must be positive");
}

SubprocessEstimator::~SubprocessEstimator() { stop(); }

std::filesystem::path SubprocessEstimator::default_tmpdir() {
  if (const char* env = std::getenv("SKYFORGE_TMPDIR"); env && *env) return env;
  return std::filesystem::temp_directory_path();
}

void SubprocessEstimator::start() {
  ::signal(SIGPIPE, SIG_IGN);
  int in[2], out[2];
  if (::pipe(in) != 0) throw EstimatorFailure(std::string("pipe: ") + std::strerror(errno));
  if (::pipe(out) != 0) {
    ::close(in[0]);
    ::close(in[1]);
    throw EstimatorFailure(std::string("pipe: ") + std::strerror(errno));
  }
  std::vector<char*> argv;
  for (auto& a : command_) argv.push_back(a.data());
  argv.push_back(nullptr);

  pid_t pid = ::fork();
  if (pid < 0) throw EstimatorFailure(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(in[0], STDIN_FILENO);
    ::dup2(out[1], STDOUT_FILENO);
    ::close(in[0]);
    ::close(in[1]);
    ::close(out[0]);
    ::close(out[1]);
    ::execvp(argv[0], argv.data());
    ::_exit(127);
  }
  ::close(in[0]);
  ::close(out[1]);
  ::fcntl(in[1], F_SETFD, FD_CLOEXEC);
  ::fcntl(out[0], F_SETFD, FD_CLOEXEC);
  pid_ = pid;
  to_child_ = in[1];
  from_child_ = out[0];
  buffer_.clear();
}

void SubprocessEstimator::stop() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    // Closing stdin asks the child to exit; give it a moment before killing.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      ::usleep(2000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }
  pid_ = -1;
}

std::string SubprocessEstimator::read_line(std::chrono::steady_clock::time_point deadline,
                                           const std::string& hex) {
  for (;;) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      stop();
      throw EstimatorFailure("estimator timed out", hex);
    }
    pollfd pfd{from_child_, POLLIN, 0};
    int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) {
      stop();
      throw EstimatorFailure(std::string("poll: ") + std::strerror(errno), hex);
    }
    if (rc == 0) continue;
    char buf[4096];
    ssize_t got = ::read(from_child_, buf, sizeof buf);
    if (got < 0 && errno == EINTR) continue;
    if (got <= 0) {
      stop();
      throw EstimatorFailure("estimator process closed its output", hex);
    }
    buffer_.append(buf, static_cast<std::size_t>(got));
  }
}

RawMeasures SubprocessEstimator::estimate(const StateBitmap& bitmap, const Relation& dataset) {
  std::lock_guard lock(mu_);
  const std::string hex = bitmap.hex();
  if (pid_ < 0) start();

  const long id = next_id_++;
  std::filesystem::create_directories(tmpdir_);
  auto csv = tmpdir_ / ("skyforge-" + std::to_string(::getpid()) + "-" + std::to_string(id) + ".csv");
  Relation expanded = expand_weights(dataset);
  write_csv(csv, expanded);

  nlohmann::json req = {{"id", id},
                        {"bitmap", hex},
                        {"rows", expanded.num_rows()},
                        {"cols", expanded.num_cols()},
                        {"columns", expanded.schema()},
                        {"csv_path", csv.string()}};
  std::string line = req.dump() + "\n";

  struct Cleanup {
    std::filesystem::path p;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
  } cleanup{csv};

  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  for (std::size_t off = 0; off < line.size();) {
    ssize_t n = ::write(to_child_, line.data() + off, line.size() - off);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      stop();
      throw EstimatorFailure("cannot write to estimator process", hex);
    }
    off += static_cast<std::size_t>(n);
  }

  nlohmann::json resp;
  try {
    resp = nlohmann::json::parse(read_line(deadline, hex));
  } catch (const nlohmann::json::exception& e) {
    stop();
    throw EstimatorFailure(std::string("malformed estimator reply: ") + e.what(), hex);
  }
  if (!resp.is_object() || !resp.contains("id") || resp["id"] != id || !resp.contains("measures") ||
      !resp["measures"].is_object()) {
    stop();
    throw EstimatorFailure("estimator reply violates the protocol", hex);
  }
  RawMeasures out;
  for (const auto& [name, v] : resp["measures"].items()) {
    if (!v.is_number()) throw EstimatorFailure("measure '" + name + "' is not a number", hex);
    out[name] = v.get<double>();
  }
  return out;
}

}  // namespace skyforge
