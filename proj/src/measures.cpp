#include "skyforge/measures.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "skyforge/errors.hpp"

namespace skyforge {

MeasureSet::MeasureSet(std::vector<MeasureSpec> specs) : specs_(std::move(specs)) {
  if (specs_.empty()) throw ArgumentError("measure set is empty");
  std::set<std::string> names;
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const auto& s = specs_[i];
    if (!names.insert(s.name).second) throw ArgumentError("duplicate measure '" + s.name + "'");
    if (!(s.raw_high > s.raw_low))
      throw ArgumentError("measure '" + s.name + "': raw_high must exceed raw_low");
    if (!(s.pl > 0.0 && s.pl <= s.pu && s.pu <= 1.0))
      throw ArgumentError("measure '" + s.name + "': bounds must satisfy 0 < pl <= pu <= 1");
    if (s.decisive) {
      ++flagged;
      decisive_ = i;
    }
  }
  if (flagged > 1) throw ArgumentError("more than one decisive measure");
  if (flagged == 0) {
    decisive_ = specs_.size() - 1;
    specs_[decisive_].decisive = true;
  }
}

std::optional<std::size_t> MeasureSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < specs_.size(); ++i)
    if (specs_[i].name == name) return i;
  return std::nullopt;
}

MeasureSet MeasureSet::with_decisive(const std::string& name) const {
  auto idx = index_of(name);
  if (!idx) throw ArgumentError("unknown decisive measure '" + name + "'");
  auto specs = specs_;
  for (std::size_t i = 0; i < specs.size(); ++i) specs[i].decisive = i == *idx;
  return MeasureSet(std::move(specs));
}

double normalize(const MeasureSpec& spec, double raw) {
  if (!std::isfinite(raw))
    throw EstimatorFailure("measure '" + spec.name + "': non-finite raw value");
  if (!(spec.raw_high > spec.raw_low))
    throw ArgumentError("measure '" + spec.name + "': raw_high must exceed raw_low");
  double span = spec.raw_high - spec.raw_low;
  double v = spec.direction == Direction::Minimize ? (raw - spec.raw_low) / span
                                                   : (spec.raw_high - raw) / span;
  return std::clamp(v, kNormFloor, 1.0);
}

PerfVector PerfVector::of(std::initializer_list<double> values) {
  return of(std::vector<double>(values));
}

PerfVector PerfVector::of(const std::vector<double>& values) {
  PerfVector v;
  for (double x : values) v.entries.push_back(PerfEntry::valuated(x));
  return v;
}

bool PerfVector::fully_valuated() const {
  return std::all_of(entries.begin(), entries.end(), [](const PerfEntry& e) { return e.is_valuated(); });
}

std::vector<double> PerfVector::values() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    if (!e.is_valuated()) throw ArgumentError("performance vector is not fully valuated");
    out.push_back(e.value);
  }
  return out;
}

}  // namespace skyforge
