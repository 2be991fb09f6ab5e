#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "dexskin/error.hpp"
#include "dexskin/recording.hpp"

using namespace dexskin;

namespace {

Recording mixed(std::size_t rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> counts(0, 65535);
  std::uniform_real_distribution<double> value(-1.0, 3000.0);
  Recording rec;
  rec.header.start_epoch_ms = 1760000000000;
  rec.header.channels.push_back({ChannelDescriptor::Kind::frames, 0, 120, Unit::newton});
  rec.header.channels.push_back({ChannelDescriptor::Kind::frames, 1, 120, Unit::newton});
  rec.header.channels.push_back({ChannelDescriptor::Kind::gauge, 0, 0, Unit::kilopascal});
  std::uint32_t seq = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    const std::int64_t ts = static_cast<std::int64_t>(i / 3) * 33;
    if (i % 3 == 2) {
      rec.rows.emplace_back(GaugeRecord{ts, value(rng), Unit::kilopascal});
    } else {
      SensorFrame f;
      f.timestamp_ms = ts;
      f.sensor_id = static_cast<std::uint8_t>(i % 3);
      f.seq = seq++;
      f.counts.resize(120);
      for (auto& c : f.counts) c = static_cast<std::uint16_t>(counts(rng));
      rec.rows.emplace_back(std::move(f));
    }
  }
  return rec;
}

std::string text_of(const Recording& rec) {
  std::ostringstream os;
  write_recording(os, rec);
  return os.str();
}

Recording parse(const std::string& text) {
  std::istringstream is(text);
  return read_recording(is);
}

}  // namespace

TEST_CASE("empty recording is a header-only file") {
  Recording rec;
  rec.header.channels.push_back({ChannelDescriptor::Kind::frames, 0, 120, Unit::newton});
  const std::string text = text_of(rec);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1);
  const Recording back = parse(text);
  CHECK(back.header == rec.header);
  CHECK(back.rows.empty());
}

TEST_CASE("10k mixed rows re-serialize byte-identically") {
  const Recording rec = mixed(10000, 5);
  const std::string text = text_of(rec);
  const Recording back = parse(text);
  CHECK(back.header == rec.header);
  CHECK(back.rows == rec.rows);
  CHECK(text_of(back) == text);
}

TEST_CASE("file round trip") {
  const Recording rec = mixed(30, 6);
  const auto path = std::filesystem::temp_directory_path() / "dexskin_test_recording.txt";
  write_recording(path, rec);
  CHECK(read_recording(path).rows == rec.rows);
  std::filesystem::remove(path);
  CHECK_THROWS_WITH_AS(read_recording(path), doctest::Contains("Io"), Error);
}

TEST_CASE("gauge doubles round-trip through shortest text") {
  for (double v : {0.1, 1.0 / 3.0, 2.5e-300, -0.0, 702.1, 123456789.123456789}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("parse errors name the line") {
  std::string text = text_of(mixed(6, 7));
  CHECK_THROWS_WITH_AS(parse(text + "X 1 2 3\n"), doctest::Contains("line 8"), Error);
  CHECK_THROWS_WITH_AS(parse(text + "G 100 1.0 psi\n"), doctest::Contains("line 8"), Error);
  CHECK_THROWS_WITH_AS(parse(text + "F 100 0 99 1 2\n"), doctest::Contains("line 8"), Error);
  CHECK_THROWS_AS(parse("not json\n"), Error);
}

TEST_CASE("rows must be time ordered and declared") {
  Recording rec = mixed(6, 8);
  rec.rows.emplace_back(GaugeRecord{0, 1.0, Unit::kilopascal});
  CHECK_THROWS_WITH_AS(rec.validate(), doctest::Contains("ParseError"), Error);
  CHECK_THROWS_AS(parse(text_of(rec)), Error);

  Recording undeclared = mixed(3, 9);
  std::get<SensorFrame>(undeclared.rows[0]).sensor_id = 9;
  CHECK_THROWS_AS(undeclared.validate(), Error);
}

TEST_CASE("channel accessors") {
  const Recording rec = mixed(30, 10);
  CHECK(rec.frames(0).size() == 10);
  CHECK(rec.frames(1).size() == 10);
  CHECK(rec.gauge().size() == 10);
  CHECK(rec.header.frame_channel(1) != nullptr);
  CHECK(rec.header.frame_channel(4) == nullptr);
  CHECK(parse_unit("kPa") == Unit::kilopascal);
  CHECK(std::string(to_string(Unit::newton)) == "N");
}
