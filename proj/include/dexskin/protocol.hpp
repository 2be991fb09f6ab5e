#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dexskin/frame.hpp"

namespace dexskin::protocol {

// Frame layout (all multi-byte fields little-endian):
//   0  magic      0xD5 0x4B
//   2  version    1
//   3  sensor_id
//   4  seq        u32
//   8  counts     n x u16
//   8+2n crc      u16, CRC-16/CCITT-FALSE over bytes [0, 8+2n)
inline constexpr std::array<std::uint8_t, 2> kMagic{0xD5, 0x4B};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 8;
inline constexpr std::size_t kCrcBytes = 2;
inline constexpr std::size_t kStreamTaxels = 120;

constexpr std::size_t frame_size(std::size_t taxels = kStreamTaxels) {
  return kHeaderBytes + 2 * taxels + kCrcBytes;
}

/// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no xorout.
std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_frame(const SensorFrame& frame);

/// Validates the range of every count before encoding; throws RangeExceeded.
std::vector<std::uint8_t> encode_frame(std::uint8_t sensor_id, std::uint32_t seq,
                                       std::span<const std::int64_t> counts);

struct DecoderOptions {
  std::size_t taxels = kStreamTaxels;
  double frame_rate_hz = 30.0;  // drives the seq -> timestamp mapping
};

/// Decodes exactly one frame. Throws ParseError on bad magic/version/CRC or
/// LengthMismatch on a short buffer.
SensorFrame decode_frame(std::span<const std::uint8_t> bytes, const DecoderOptions& options = {});

enum class EventKind { Resync, CrcMismatch, BadVersion, Truncated };

const char* to_string(EventKind kind);

/// One contiguous run of bytes that did not decode.
struct CodecEvent {
  EventKind kind;
  std::uint64_t offset;         // stream offset where the run starts
  std::uint64_t bytes_skipped;
  std::uint64_t frames_lost;    // bytes_skipped / frame size, rounded
};

struct DecodeResult {
  std::vector<SensorFrame> frames;
  std::vector<CodecEvent> diagnostics;
};

/// Incremental decoder for one byte stream. Never throws on stream content;
/// faults become CodecEvents. A session is single-threaded.
class StreamDecoder {
 public:
  explicit StreamDecoder(DecoderOptions options = {});

  /// Appends bytes and decodes every complete frame now available.
  void feed(std::span<const std::uint8_t> bytes, DecodeResult& out);

  /// Flushes the tail at end of stream (reported as Truncated or Resync).
  void finish(DecodeResult& out);

 private:
  void close_gap(DecodeResult& out, std::uint64_t end);

  DecoderOptions options_;
  std::vector<std::uint8_t> buffer_;
  std::uint64_t buffer_offset_ = 0;  // stream offset of buffer_[0]

  bool in_gap_ = false;
  std::uint64_t gap_start_ = 0;
  EventKind gap_kind_ = EventKind::Resync;
};

DecodeResult decode_stream(std::span<const std::uint8_t> bytes, const DecoderOptions& options = {});

}  // namespace dexskin::protocol
