#include <doctest.h>

#include <random>
#include <string>

#include "dexskin/error.hpp"
#include "dexskin/protocol.hpp"

using namespace dexskin;
using namespace dexskin::protocol;

namespace {

SensorFrame random_frame(std::mt19937_64& rng, std::uint32_t seq, std::uint8_t sid = 0) {
  std::uniform_int_distribution<int> u(0, 65535);
  SensorFrame f;
  f.sensor_id = sid;
  f.seq = seq;
  f.timestamp_ms = nominal_timestamp_ms(seq);
  f.counts.resize(kStreamTaxels);
  for (auto& c : f.counts) c = static_cast<std::uint16_t>(u(rng));
  return f;
}

std::vector<std::uint8_t> stream_of(const std::vector<SensorFrame>& frames) {
  std::vector<std::uint8_t> out;
  for (const auto& f : frames) {
    const auto b = encode_frame(f);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

}  // namespace

TEST_CASE("CRC-16/CCITT-FALSE check value") {
  const std::string s = "123456789";
  CHECK(crc16_ccitt_false({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}) == 0x29B1);
  CHECK(crc16_ccitt_false({}) == 0xFFFF);
}

TEST_CASE("frame byte layout") {
  SensorFrame f;
  f.sensor_id = 3;
  f.seq = 0x01020304;
  f.timestamp_ms = nominal_timestamp_ms(f.seq);
  f.counts.assign(kStreamTaxels, 0);
  f.counts[0] = 0xBEEF;
  const auto b = encode_frame(f);
  REQUIRE(b.size() == 250);
  CHECK(frame_size() == 250);
  CHECK(b[0] == 0xD5);
  CHECK(b[1] == 0x4B);
  CHECK(b[2] == 1);
  CHECK(b[3] == 3);
  CHECK(b[4] == 0x04);
  CHECK(b[5] == 0x03);
  CHECK(b[6] == 0x02);
  CHECK(b[7] == 0x01);
  CHECK(b[8] == 0xEF);
  CHECK(b[9] == 0xBE);
  const std::uint16_t crc = crc16_ccitt_false(std::span(b).first(248));
  CHECK(b[248] == (crc & 0xFF));
  CHECK(b[249] == (crc >> 8));
}

TEST_CASE("encode/decode round trip over random frames") {
  std::mt19937_64 rng(11);
  for (std::uint32_t i = 0; i < 500; ++i) {
    const SensorFrame f = random_frame(rng, i * 7919u, static_cast<std::uint8_t>(i % 4));
    CHECK(decode_frame(encode_frame(f)) == f);
  }
}

TEST_CASE("encode rejects counts outside u16") {
  std::vector<std::int64_t> counts(kStreamTaxels, 0);
  counts[5] = 65536;
  CHECK_THROWS_WITH_AS(encode_frame(0, 0, counts), doctest::Contains("RangeExceeded"), Error);
  counts[5] = -1;
  CHECK_THROWS_AS(encode_frame(0, 0, counts), Error);
  counts[5] = 65535;
  CHECK(encode_frame(0, 0, counts).size() == 250);
}

TEST_CASE("decode_frame validates") {
  std::mt19937_64 rng(1);
  auto b = encode_frame(random_frame(rng, 1));
  CHECK_THROWS_AS(decode_frame(std::span(b).first(100)), Error);
  auto bad_crc = b;
  bad_crc[20] ^= 0x01;
  CHECK_THROWS_WITH_AS(decode_frame(bad_crc), doctest::Contains("ParseError"), Error);
  auto bad_magic = b;
  bad_magic[0] = 0;
  CHECK_THROWS_AS(decode_frame(bad_magic), Error);
}

TEST_CASE("clean stream decodes without diagnostics") {
  std::mt19937_64 rng(2);
  std::vector<SensorFrame> frames;
  for (std::uint32_t i = 0; i < 100; ++i) frames.push_back(random_frame(rng, i));
  const auto r = decode_stream(stream_of(frames));
  CHECK(r.frames == frames);
  CHECK(r.diagnostics.empty());
}

TEST_CASE("one flipped payload bit costs one frame and one CrcMismatch") {
  std::mt19937_64 rng(3);
  std::vector<SensorFrame> frames;
  for (std::uint32_t i = 0; i < 100; ++i) frames.push_back(random_frame(rng, i));
  auto bytes = stream_of(frames);
  bytes[50 * 250 + 100] ^= 0x10;
  const auto r = decode_stream(bytes);
  CHECK(r.frames.size() == 99);
  REQUIRE(r.diagnostics.size() == 1);
  CHECK(r.diagnostics[0].kind == EventKind::CrcMismatch);
  CHECK(r.diagnostics[0].offset == 50 * 250);
  auto expected = frames;
  expected.erase(expected.begin() + 50);
  CHECK(r.frames == expected);
}

TEST_CASE("stream starting mid-frame resynchronizes") {
  std::mt19937_64 rng(4);
  std::vector<SensorFrame> frames;
  for (std::uint32_t i = 0; i < 10; ++i) frames.push_back(random_frame(rng, i));
  auto bytes = stream_of(frames);
  bytes.erase(bytes.begin(), bytes.begin() + 117);
  const auto r = decode_stream(bytes);
  CHECK(r.frames == std::vector<SensorFrame>(frames.begin() + 1, frames.end()));
  REQUIRE(r.diagnostics.size() == 1);
  CHECK(r.diagnostics[0].kind == EventKind::Resync);
  CHECK(r.diagnostics[0].offset == 0);
  CHECK(r.diagnostics[0].bytes_skipped == 133);
}

TEST_CASE("bad version is its own diagnostic kind") {
  std::mt19937_64 rng(5);
  std::vector<SensorFrame> frames;
  for (std::uint32_t i = 0; i < 3; ++i) frames.push_back(random_frame(rng, i));
  auto bytes = stream_of(frames);
  bytes[250 + 2] = 7;
  const auto r = decode_stream(bytes);
  CHECK(r.frames.size() == 2);
  REQUIRE(r.diagnostics.size() == 1);
  CHECK(r.diagnostics[0].kind == EventKind::BadVersion);
}

TEST_CASE("truncated tail is reported at finish") {
  std::mt19937_64 rng(6);
  std::vector<SensorFrame> frames;
  for (std::uint32_t i = 0; i < 3; ++i) frames.push_back(random_frame(rng, i));
  auto bytes = stream_of(frames);
  bytes.resize(bytes.size() - 40);
  const auto r = decode_stream(bytes);
  CHECK(r.frames.size() == 2);
  REQUIRE(r.diagnostics.size() == 1);
  CHECK(r.diagnostics[0].kind == EventKind::Truncated);
  CHECK(r.diagnostics[0].bytes_skipped == 210);
}

TEST_CASE("incremental feeding matches whole-buffer decoding") {
  std::mt19937_64 rng(7);
  std::vector<SensorFrame> frames;
  for (std::uint32_t i = 0; i < 40; ++i) frames.push_back(random_frame(rng, i));
  auto bytes = stream_of(frames);
  bytes[3 * 250 + 9] ^= 0xFF;
  bytes[17 * 250 + 1] ^= 0xFF;
  const auto whole = decode_stream(bytes);

  StreamDecoder dec;
  DecodeResult inc;
  std::uniform_int_distribution<std::size_t> chunk(1, 600);
  for (std::size_t pos = 0; pos < bytes.size();) {
    const std::size_t n = std::min(chunk(rng), bytes.size() - pos);
    dec.feed(std::span(bytes).subspan(pos, n), inc);
    pos += n;
  }
  dec.finish(inc);
  CHECK(inc.frames == whole.frames);
  REQUIRE(inc.diagnostics.size() == whole.diagnostics.size());
  for (std::size_t i = 0; i < inc.diagnostics.size(); ++i) {
    CHECK(inc.diagnostics[i].kind == whole.diagnostics[i].kind);
    CHECK(inc.diagnostics[i].offset == whole.diagnostics[i].offset);
    CHECK(inc.diagnostics[i].bytes_skipped == whole.diagnostics[i].bytes_skipped);
  }
}

TEST_CASE("garbage never aborts the decoder") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> u(0, 255);
  std::vector<std::uint8_t> junk(20000);
  for (auto& b : junk) b = static_cast<std::uint8_t>(u(rng));
  for (std::size_t i = 0; i + 1 < junk.size(); i += 997) {
    junk[i] = 0xD5;
    junk[i + 1] = 0x4B;
  }
  DecodeResult r;
  CHECK_NOTHROW(r = decode_stream(junk));
  std::uint64_t skipped = 0;
  for (const auto& d : r.diagnostics) skipped += d.bytes_skipped;
  CHECK(skipped + r.frames.size() * 250 == junk.size());
}
