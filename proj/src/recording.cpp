#include "dexskin/recording.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string_view>

#include <json.hpp>

#include "dexskin/error.hpp"

namespace dexskin {

namespace {

constexpr const char* kSchema = "dexskin.recording/1";

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw Error(Errc::ParseError, "line " + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_number(std::string_view token, std::size_t line, const char* field) {
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    parse_fail(line, std::string("bad ") + field + " '" + std::string(token) + "'");
  }
  return value;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

nlohmann::json header_to_json(const RecordingHeader& h) {
  nlohmann::json channels = nlohmann::json::array();
  for (const auto& c : h.channels) {
    if (c.kind == ChannelDescriptor::Kind::frames) {
      channels.push_back({{"tag", "F"}, {"sensor_id", c.sensor_id}, {"taxels", c.taxels}});
    } else {
      channels.push_back({{"tag", "G"}, {"unit", to_string(c.unit)}});
    }
  }
  return {{"schema", kSchema},
          {"layout_id", h.layout_id},
          {"start_epoch_ms", h.start_epoch_ms},
          {"channels", channels}};
}

RecordingHeader header_from_json(const std::string& text) {
  RecordingHeader h;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("schema").get<std::string>() != kSchema) parse_fail(1, "unknown schema");
    h.layout_id = j.at("layout_id").get<std::string>();
    h.start_epoch_ms = j.at("start_epoch_ms").get<std::int64_t>();
    for (const auto& c : j.at("channels")) {
      ChannelDescriptor d;
      const std::string tag = c.at("tag").get<std::string>();
      if (tag == "F") {
        d.kind = ChannelDescriptor::Kind::frames;
        d.sensor_id = c.at("sensor_id").get<int>();
        d.taxels = c.at("taxels").get<std::size_t>();
      } else if (tag == "G") {
        d.kind = ChannelDescriptor::Kind::gauge;
        d.unit = parse_unit(c.at("unit").get<std::string>());
      } else {
        parse_fail(1, "unknown channel tag '" + tag + "'");
      }
      h.channels.push_back(d);
    }
  } catch (const nlohmann::json::exception& e) {
    parse_fail(1, std::string("header: ") + e.what());
  }
  return h;
}

}  // namespace

const char* to_string(Unit unit) { return unit == Unit::newton ? "N" : "kPa"; }

Unit parse_unit(const std::string& text) {
  if (text == "N") return Unit::newton;
  if (text == "kPa") return Unit::kilopascal;
  throw Error(Errc::ParseError, "unknown unit '" + text + "'");
}

std::int64_t timestamp_of(const RecordRow& row) {
  return std::visit([](const auto& r) { return r.timestamp_ms; }, row);
}

const ChannelDescriptor* RecordingHeader::frame_channel(int sensor_id) const {
  for (const auto& c : channels) {
    if (c.kind == ChannelDescriptor::Kind::frames && c.sensor_id == sensor_id) return &c;
  }
  return nullptr;
}

std::vector<SensorFrame> Recording::frames(int sensor_id) const {
  std::vector<SensorFrame> out;
  for (const auto& row : rows) {
    if (const auto* f = std::get_if<SensorFrame>(&row); f && f->sensor_id == sensor_id) {
      out.push_back(*f);
    }
  }
  return out;
}

std::vector<GaugeRecord> Recording::gauge() const {
  std::vector<GaugeRecord> out;
  for (const auto& row : rows) {
    if (const auto* g = std::get_if<GaugeRecord>(&row)) out.push_back(*g);
  }
  return out;
}

void Recording::validate() const {
  std::int64_t last = std::numeric_limits<std::int64_t>::min();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::int64_t t = timestamp_of(rows[i]);
    if (t < last) parse_fail(i + 2, "row out of time order");
    last = t;
    if (const auto* f = std::get_if<SensorFrame>(&rows[i])) {
      const auto* ch = header.frame_channel(f->sensor_id);
      if (!ch) parse_fail(i + 2, "sensor " + std::to_string(f->sensor_id) + " not in header");
      if (f->counts.size() != ch->taxels) parse_fail(i + 2, "taxel count mismatch");
    }
  }
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_recording(std::ostream& out, const Recording& recording) {
  out << header_to_json(recording.header).dump() << '\n';
  std::string line;
  char num[32];
  for (const auto& row : recording.rows) {
    line.clear();
    if (const auto* f = std::get_if<SensorFrame>(&row)) {
      line += "F ";
      line += std::to_string(f->timestamp_ms);
      line += ' ';
      line += std::to_string(f->sensor_id);
      line += ' ';
      line += std::to_string(f->seq);
      for (std::uint16_t c : f->counts) {
        const auto [ptr, ec] = std::to_chars(num, num + sizeof(num), c);
        line += ' ';
        line.append(num, ptr);
      }
    } else {
      const auto& g = std::get<GaugeRecord>(row);
      line += "G ";
      line += std::to_string(g.timestamp_ms);
      line += ' ';
      line += format_double(g.value);
      line += ' ';
      line += to_string(g.unit);
    }
    line += '\n';
    out << line;
  }
}

Recording read_recording(std::istream& in) {
  Recording rec;
  std::string line;
  if (!std::getline(in, line)) parse_fail(1, "missing header line");
  rec.header = header_from_json(line);

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "F") {
      if (tok.size() < 4) parse_fail(lineno, "frame record needs ts, sensor, seq");
      SensorFrame f;
      f.timestamp_ms = parse_number<std::int64_t>(tok[1], lineno, "timestamp");
      const int sensor = parse_number<int>(tok[2], lineno, "sensor id");
      if (sensor < 0 || sensor > 255) parse_fail(lineno, "sensor id out of range");
      f.sensor_id = static_cast<std::uint8_t>(sensor);
      f.seq = parse_number<std::uint32_t>(tok[3], lineno, "seq");
      f.counts.reserve(tok.size() - 4);
      for (std::size_t i = 4; i < tok.size(); ++i) {
        f.counts.push_back(parse_number<std::uint16_t>(tok[i], lineno, "count"));
      }
      rec.rows.emplace_back(std::move(f));
    } else if (tok[0] == "G") {
      if (tok.size() != 4) parse_fail(lineno, "gauge record needs ts, value, unit");
      GaugeRecord g;
      g.timestamp_ms = parse_number<std::int64_t>(tok[1], lineno, "timestamp");
      g.value = parse_number<double>(tok[2], lineno, "value");
      if (tok[3] == "N") {
        g.unit = Unit::newton;
      } else if (tok[3] == "kPa") {
        g.unit = Unit::kilopascal;
      } else {
        parse_fail(lineno, "unknown unit '" + std::string(tok[3]) + "'");
      }
      rec.rows.emplace_back(g);
    } else {
      parse_fail(lineno, "unknown channel tag '" + std::string(tok[0]) + "'");
    }
  }
  rec.validate();
  return rec;
}

void write_recording(const std::filesystem::path& path, const Recording& recording) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  write_recording(out, recording);
}

Recording read_recording(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  return read_recording(in);
}

}  // namespace dexskin
