#include <algorithm>
#include <cmath>
#include <string>

#include "dexskin/calibration.hpp"
#include "dexskin/error.hpp"

namespace dexskin {

namespace {

struct Candidate {
  std::size_t left;    // first sample of the plateau
  std::size_t right;   // last sample of the plateau
};

// For every i, the minimum over the samples between i and its nearest strictly
// higher neighbour on one side (or the series edge), inclusive of i.
std::vector<double> base_minima(std::span<const double> v, bool leftward) {
  const std::size_t n = v.size();
  std::vector<double> out(n);
  struct Entry {
    std::size_t idx;
    double seg_min;
  };
  std::vector<Entry> stack;
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t i = leftward ? step : n - 1 - step;
    double cur = v[i];
    while (!stack.empty() && v[stack.back().idx] <= v[i]) {
      cur = std::min(cur, stack.back().seg_min);
      stack.pop_back();
    }
    stack.push_back({i, cur});
    out[i] = cur;
  }
  return out;
}

}  // namespace

std::vector<std::size_t> detect_peaks(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 3) {
    throw Error(Errc::SeriesTooShort, "peak detection needs >= 3 samples, got " + std::to_string(n));
  }
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double range = *hi_it - *lo_it;
  if (!(range > 0.0)) return {};

  std::vector<Candidate> local;
  for (std::size_t i = 1; i + 1 < n;) {
    if (v[i] > v[i - 1]) {
      std::size_t r = i;
      while (r + 1 < n && v[r + 1] == v[i]) ++r;
      if (r + 1 < n && v[r + 1] < v[i]) local.push_back({i, r});
      i = r + 1;
    } else {
      ++i;
    }
  }
  if (local.empty()) return {};

  const auto left_base = base_minima(v, true);
  const auto right_base = base_minima(v, false);
  const double min_prominence = 0.2 * range;

  std::vector<std::size_t> prominent;
  for (const Candidate& c : local) {
    const double prominence = v[c.left] - std::max(left_base[c.left], right_base[c.right]);
    if (prominence >= min_prominence) prominent.push_back(c.left);
  }
  if (prominent.size() < 2) return prominent;

  std::vector<std::size_t> gaps;
  for (std::size_t k = 1; k < prominent.size(); ++k) gaps.push_back(prominent[k] - prominent[k - 1]);
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  const double min_sep = 0.25 * static_cast<double>(gaps[gaps.size() / 2]);

  std::vector<std::size_t> by_height = prominent;
  std::stable_sort(by_height.begin(), by_height.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  std::vector<std::size_t> kept;
  for (std::size_t idx : by_height) {
    const bool clear = std::none_of(kept.begin(), kept.end(), [&](std::size_t k) {
      const double d = idx > k ? static_cast<double>(idx - k) : static_cast<double>(k - idx);
      return d < min_sep;
    });
    if (clear) kept.push_back(idx);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<std::size_t> detect_peaks(std::span<const TimedValue> series) {
  std::vector<double> values(series.size());
  std::transform(series.begin(), series.end(), values.begin(),
                 [](const TimedValue& s) { return s.value; });
  return detect_peaks(values);
}

}  // namespace dexskin
