#include <cmath>
#include <string>

#include "dexskin/error.hpp"
#include "dexskin/transfer.hpp"

namespace dexskin {

namespace {

void check_curve(const CalibrationCurve& c, const char* role) {
  if (c.form != CurveForm::pneumatic) {
    throw Error(Errc::InvalidArgument, std::string(role) + " curve for taxel " +
                                           std::to_string(c.taxel) + " is not pneumatic");
  }
  if (!(c.c0 > 0.0) || !(c.a > 0.0) || !(c.b > 0.0)) {
    throw Error(Errc::InvalidArgument, std::string(role) + " curve for taxel " +
                                           std::to_string(c.taxel) +
                                           " needs positive c0, a and b");
  }
}

}  // namespace

TransferMap TransferMap::build(std::span<const CalibrationCurve> source,
                               std::span<const CalibrationCurve> target, int source_sensor,
                               int target_sensor) {
  TransferMap map;
  map.source_sensor = source_sensor;
  map.target_sensor = target_sensor;
  for (const CalibrationCurve& s : source) {
    for (const CalibrationCurve& t : target) {
      if (t.taxel != s.taxel) continue;
      map.set(s.taxel, {s, t});
      break;
    }
  }
  return map;
}

void TransferMap::set(std::size_t taxel, Entry entry) {
  check_curve(entry.source, "source");
  check_curve(entry.target, "target");
  if (entries_.size() <= taxel) entries_.resize(taxel + 1);
  entries_[taxel] = std::move(entry);
}

const TransferMap::Entry* TransferMap::entry(std::size_t taxel) const {
  if (taxel >= entries_.size() || !entries_[taxel]) return nullptr;
  return &*entries_[taxel];
}

std::vector<std::size_t> TransferMap::taxels() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> TransferMap::missing(std::size_t taxel_count) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < taxel_count; ++i) {
    if (!entry(i)) out.push_back(i);
  }
  return out;
}

TransferMap TransferMap::inverse() const {
  TransferMap inv;
  inv.source_sensor = target_sensor;
  inv.target_sensor = source_sensor;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i]) inv.set(i, {entries_[i]->target, entries_[i]->source});
  }
  return inv;
}

double remap(const TransferMap::Entry& e, std::size_t taxel, double c1) {
  const CalibrationCurve& s = e.source;
  const CalibrationCurve& t = e.target;
  const double x1 = (c1 - s.c0) / s.c0;
  const double arg = (s.a * std::exp(s.b * x1) + s.d - t.d) / t.a;
  if (!(arg > 0.0)) {
    throw Error(Errc::NonPositiveLogArgument,
                "taxel " + std::to_string(taxel) + " c1=" + format_double(c1));
  }
  return t.c0 / t.b * std::log(arg) + t.c0;
}

double remap(const TransferMap& map, std::size_t taxel, double c1) {
  const TransferMap::Entry* e = map.entry(taxel);
  if (!e) throw Error(Errc::CoverageGap, "no transfer entry for taxel " + std::to_string(taxel));
  return remap(*e, taxel, c1);
}

}  // namespace dexskin
