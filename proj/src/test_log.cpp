#include "skyforge/test_log.hpp"

#include <cmath>

#include "skyforge/errors.hpp"

namespace skyforge {

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ArgumentError("vectors differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

const TestRecord& TestLog::append(TestRecord rec) {
  std::lock_guard lock(mu_);
  auto it = index_.find(rec.bitmap);
  if (it != index_.end()) return records_[it->second];
  index_.emplace(rec.bitmap, records_.size());
  records_.push_back(std::move(rec));
  return records_.back();
}

std::optional<TestRecord> TestLog::find(const StateBitmap& b) const {
  std::lock_guard lock(mu_);
  auto it = index_.find(b);
  if (it == index_.end()) return std::nullopt;
  return records_[it->second];
}

bool TestLog::contains(const StateBitmap& b) const {
  std::lock_guard lock(mu_);
  return index_.count(b) != 0;
}

std::size_t TestLog::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

double TestLog::max_pairwise_distance() const {
  std::lock_guard lock(mu_);
  for (; dist_upto_ < records_.size(); ++dist_upto_)
    for (std::size_t i = 0; i < dist_upto_; ++i)
      max_dist_ = std::max(max_dist_, euclidean(records_[i].perf, records_[dist_upto_].perf));
  return max_dist_;
}

std::size_t TestLog::estimator_calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

void TestLog::count_estimator_call() {
  std::lock_guard lock(mu_);
  ++calls_;
}

nlohmann::json TestLog::to_json() const {
  std::lock_guard lock(mu_);
  auto arr = nlohmann::json::array();
  for (const auto& r : records_)
    arr.push_back({{"bitmap", r.bitmap.hex()}, {"raw", r.raw}, {"perf", r.perf}, {"size_proxy", r.size_proxy}});
  return arr;
}

void TestLog::load_json(TestLog& log, const nlohmann::json& j, std::size_t nbits) {
  if (!j.is_array()) throw ParseError("test log must be a JSON array");
  for (const auto& e : j) {
    TestRecord r;
    r.bitmap = StateBitmap::from_hex(e.at("bitmap").get<std::string>(), nbits);
    r.raw = e.at("raw").get<std::vector<double>>();
    r.perf = e.at("perf").get<std::vector<double>>();
    r.size_proxy = e.value("size_proxy", static_cast<double>(r.bitmap.count()));
    log.append(std::move(r));
  }
}

TestRecord evaluate(const StateBitmap& bitmap, Estimator& estimator, TestLog& log, const StateSpace& space,
                    const MeasureSet& measures) {
  static std::mutex serial;
  RawMeasures raw;
  try {
    std::shared_ptr<const Relation> data;
    if (estimator.needs_dataset()) data = space.materialize(bitmap);
    static const Relation kEmpty;
    log.count_estimator_call();
    if (estimator.thread_safe()) {
      raw = estimator.estimate(bitmap, data ? *data : kEmpty);
    } else {
      std::lock_guard lock(serial);
      raw = estimator.estimate(bitmap, data ? *data : kEmpty);
    }
  } catch (const EstimatorFailure& e) {
    throw EstimatorFailure(e.what(), e.bitmap.empty() ? bitmap.hex() : e.bitmap);
  } catch (const std::exception& e) {
    throw EstimatorFailure(std::string("estimator error: ") + e.what(), bitmap.hex());
  }

  TestRecord rec;
  rec.bitmap = bitmap;
  rec.size_proxy = static_cast<double>(bitmap.count());
  for (const auto& spec : measures.specs()) {
    auto it = raw.find(spec.name);
    if (it == raw.end())
      throw EstimatorFailure("estimator did not report measure '" + spec.name + "'", bitmap.hex());
    double v;
    try {
      v = normalize(spec, it->second);
    } catch (const EstimatorFailure& e) {
      throw EstimatorFailure(e.what(), bitmap.hex());
    }
    rec.raw.push_back(it->second);
    rec.perf.push_back(v);
  }
  return rec;
}

std::vector<double> valuate(const StateBitmap& bitmap, Estimator& estimator, TestLog& log,
                            const StateSpace& space, const MeasureSet& measures) {
  if (auto hit = log.find(bitmap)) return hit->perf;
  return log.append(evaluate(bitmap, estimator, log, space, measures)).perf;
}

}  // namespace skyforge
