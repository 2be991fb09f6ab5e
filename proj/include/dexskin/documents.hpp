#pragma once

// Versioned JSON documents exchanged by the CLI, the HTTP service and the
// dashboard. Every document carries a "schema" string; readers reject any
// other schema with ParseError.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dexskin/calibration.hpp"
#include "dexskin/characterization.hpp"
#include "dexskin/layout.hpp"
#include "dexskin/simulator.hpp"
#include "dexskin/transfer.hpp"

namespace dexskin::docs {

using json = nlohmann::json;

inline constexpr const char* kLayoutSchema = "dexskin.layout/1";
inline constexpr const char* kPhysicsSchema = "dexskin.physics/1";
inline constexpr const char* kRigSchema = "dexskin.rig/1";
inline constexpr const char* kCurvesSchema = "dexskin.curves/1";
inline constexpr const char* kTransferSchema = "dexskin.transfer/1";
inline constexpr const char* kReportSchema = "dexskin.report/1";

/// Parameters plus the derived per-taxel table (region, finger, grid cell,
/// area, neighbours), so clients never recompute the grid mapping.
json layout_to_json(const TaxelLayout& layout);
TaxelLayout layout_from_json(const json& doc);

/// Everything needed to build a SimulatedSensor for a layout.
struct SimulationConfig {
  PhysicsSpec spec;
  int sensor_id = 0;
  double noise_sigma = 0.0;
  int samples_per_frame = 4;
  std::uint64_t noise_seed = 1;
  HysteresisModel hysteresis;
  DriftModel drift;
  double neighbor_coupling = 0.0;
};

SensorPhysics build_physics(const SimulationConfig& config, const TaxelLayout& layout);

json physics_to_json(const SimulationConfig& config);
SimulationConfig physics_from_json(const json& doc);

json rig_to_json(const RigProgram& program);
RigProgram rig_from_json(const json& doc);

struct CurveSet {
  int sensor_id = 0;
  std::vector<CalibrationCurve> curves;
};

json curve_to_json(const CalibrationCurve& curve);
CalibrationCurve curve_from_json(const json& doc);
json curves_to_json(const CurveSet& set);
CurveSet curves_from_json(const json& doc);

json transfer_to_json(const TransferMap& map);
TransferMap transfer_from_json(const json& doc);

json report_to_json(const CharacterizationReport& report);

/// One NDJSON line of the live stream. `values` carries remapped counts when a
/// transfer map is active.
json frame_to_json(const SensorFrame& frame, const std::vector<double>* values = nullptr);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& doc);

}  // namespace dexskin::docs
