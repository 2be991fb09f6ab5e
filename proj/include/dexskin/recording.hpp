#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dexskin/frame.hpp"

namespace dexskin {

enum class Unit { newton, kilopascal };

const char* to_string(Unit unit);      // "N" / "kPa"
Unit parse_unit(const std::string& text);

struct GaugeRecord {
  std::int64_t timestamp_ms = 0;
  double value = 0.0;
  Unit unit = Unit::newton;

  bool operator==(const GaugeRecord&) const = default;
};

using RecordRow = std::variant<SensorFrame, GaugeRecord>;

std::int64_t timestamp_of(const RecordRow& row);

struct ChannelDescriptor {
  enum class Kind { frames, gauge };
  Kind kind = Kind::frames;
  int sensor_id = 0;             // frames only
  std::size_t taxels = 120;      // frames only
  Unit unit = Unit::newton;      // gauge only

  /// Compares only the fields meaningful for the kind.
  bool operator==(const ChannelDescriptor& o) const {
    if (kind != o.kind) return false;
    return kind == Kind::frames ? sensor_id == o.sensor_id && taxels == o.taxels : unit == o.unit;
  }
};

struct RecordingHeader {
  std::string layout_id = "dexskin-standard";
  std::int64_t start_epoch_ms = 0;
  std::vector<ChannelDescriptor> channels;

  const ChannelDescriptor* frame_channel(int sensor_id) const;
  bool operator==(const RecordingHeader&) const = default;
};

/// Time-ordered frame and reference-gauge rows. Text form: one JSON header line
/// followed by `F <ts> <sensor> <seq> <c0> ... <cN>` and `G <ts> <value> <unit>`.
struct Recording {
  RecordingHeader header;
  std::vector<RecordRow> rows;

  std::vector<SensorFrame> frames(int sensor_id) const;
  std::vector<GaugeRecord> gauge() const;

  /// Throws ParseError when rows are out of order or reference an undeclared
  /// sensor or mismatch the declared taxel count.
  void validate() const;
};

void write_recording(std::ostream& out, const Recording& recording);
Recording read_recording(std::istream& in);

void write_recording(const std::filesystem::path& path, const Recording& recording);
Recording read_recording(const std::filesystem::path& path);

/// Shortest text that parses back to the same double.
std::string format_double(double value);

}  // namespace dexskin
