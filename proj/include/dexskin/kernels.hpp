#pragma once

// Data-parallel kernels. Each has a serial reference path and an OpenMP path
// that produce bit-identical results; tests compare the two and the benchmark
// target times them.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dexskin/calibration.hpp"
#include "dexskin/error.hpp"
#include "dexskin/simulator.hpp"
#include "dexskin/transfer.hpp"

namespace dexskin::kernels {

enum class Exec { serial, parallel };

int max_threads();

/// out = K x. Columns with x_j == 0 are skipped in both paths.
void apply_coupling(const CouplingMatrix& k, std::span<const double> x, std::span<double> out,
                    Exec exec);

struct FitOutcome {
  std::optional<CalibrationCurve> curve;
  std::optional<Errc> error;
  std::string message;
};

/// Independent per-taxel fits.
std::vector<FitOutcome> fit_batch(std::span<const AlignedPairs> jobs, CurveForm form,
                                  const FitOptions& options, Exec exec);

/// crosstalk_percent for each (frame, loaded taxel) sample.
std::vector<double> crosstalk_batch(std::span<const std::vector<double>> frames,
                                    std::span<const std::size_t> loaded, Exec exec);

/// remap() over every taxel of one source frame.
std::vector<double> remap_frame(const TransferMap& map, std::span<const double> source_counts,
                                Exec exec);

}  // namespace dexskin::kernels
