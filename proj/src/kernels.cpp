#include <exception>
#include <string>

#include <omp.h>

#include "dexskin/characterization.hpp"
#include "dexskin/kernels.hpp"

namespace dexskin::kernels {

namespace {

// Runs body(i) for i in [0, n) and rethrows the exception of the lowest failing
// index, so both paths report the same error.
template <typename Body>
void for_each_index(std::size_t n, Exec exec, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

int max_threads() { return omp_get_max_threads(); }

void apply_coupling(const CouplingMatrix& k, std::span<const double> x, std::span<double> out,
                    Exec exec) {
  const std::size_t n = k.size();
  if (x.size() != n || out.size() != n) {
    throw Error(Errc::LengthMismatch, "coupling is " + std::to_string(n) + "x" +
                                          std::to_string(n) + ", vectors " +
                                          std::to_string(x.size()) + " and " +
                                          std::to_string(out.size()));
  }
  const double* kd = k.data().data();
  const auto rows = static_cast<std::ptrdiff_t>(n);
  // Each row sums in column order in both paths, so results are bit-identical.
  auto row = [&](std::ptrdiff_t i) {
    const double* ki = kd + static_cast<std::size_t>(i) * n;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (x[j] != 0.0) s += ki[j] * x[j];
    }
    out[static_cast<std::size_t>(i)] = s;
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < rows; ++i) row(i);
  } else {
    for (std::ptrdiff_t i = 0; i < rows; ++i) row(i);
  }
}

std::vector<FitOutcome> fit_batch(std::span<const AlignedPairs> jobs, CurveForm form,
                                  const FitOptions& options, Exec exec) {
  std::vector<FitOutcome> out(jobs.size());
  for_each_index(jobs.size(), exec, [&](std::size_t i) {
    try {
      out[i].curve = form == CurveForm::force ? fit_force_curve(jobs[i], options)
                                              : fit_pneumatic_curve(jobs[i], options);
    } catch (const Error& e) {
      out[i].error = e.code();
      out[i].message = e.what();
    }
  });
  return out;
}

std::vector<double> crosstalk_batch(std::span<const std::vector<double>> frames,
                                    std::span<const std::size_t> loaded, Exec exec) {
  if (frames.size() != loaded.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(frames.size()) + " frames, " +
                                          std::to_string(loaded.size()) + " loaded ids");
  }
  std::vector<double> out(frames.size());
  for_each_index(frames.size(), exec,
                 [&](std::size_t i) { out[i] = crosstalk_percent(frames[i], loaded[i]); });
  return out;
}

std::vector<double> remap_frame(const TransferMap& map, std::span<const double> source_counts,
                                Exec exec) {
  const auto gaps = map.missing(source_counts.size());
  if (!gaps.empty()) {
    std::string ids;
    for (std::size_t g : gaps) ids += (ids.empty() ? "" : ",") + std::to_string(g);
    throw Error(Errc::CoverageGap, "no transfer entry for taxels " + ids);
  }
  std::vector<double> out(source_counts.size());
  for_each_index(source_counts.size(), exec,
                 [&](std::size_t i) { out[i] = remap(map, i, source_counts[i]); });
  return out;
}

}  // namespace dexskin::kernels
