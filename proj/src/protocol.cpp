#include "dexskin/protocol.hpp"

#include <algorithm>
#include <string>

#include "dexskin/error.hpp"

namespace dexskin::protocol {

namespace {

constexpr std::array<std::uint16_t, 256> make_crc_table() {
  std::array<std::uint16_t, 256> table{};
  for (unsigned i = 0; i < 256; ++i) {
    std::uint16_t c = static_cast<std::uint16_t>(i << 8);
    for (int bit = 0; bit < 8; ++bit) {
      c = (c & 0x8000) ? static_cast<std::uint16_t>((c << 1) ^ 0x1021)
                       : static_cast<std::uint16_t>(c << 1);
    }
    table[i] = c;
  }
  return table;
}

constexpr auto kCrcTable = make_crc_table();

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::vector<std::uint8_t> encode_checked(std::uint8_t sensor_id, std::uint32_t seq,
                                         std::span<const std::uint16_t> counts) {
  std::vector<std::uint8_t> out;
  out.reserve(frame_size(counts.size()));
  out.push_back(kMagic[0]);
  out.push_back(kMagic[1]);
  out.push_back(kVersion);
  out.push_back(sensor_id);
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(seq >> shift));
  for (std::uint16_t c : counts) put_u16(out, c);
  put_u16(out, crc16_ccitt_false(out));
  return out;
}

enum class Check { ok, bad_version, bad_crc };

Check check_candidate(const std::uint8_t* p, std::size_t len) {
  if (p[2] != kVersion) return Check::bad_version;
  const std::uint16_t want = get_u16(p + len - kCrcBytes);
  return crc16_ccitt_false({p, len - kCrcBytes}) == want ? Check::ok : Check::bad_crc;
}

SensorFrame unpack(const std::uint8_t* p, std::size_t taxels, double rate_hz) {
  SensorFrame f;
  f.sensor_id = p[3];
  f.seq = static_cast<std::uint32_t>(p[4]) | (static_cast<std::uint32_t>(p[5]) << 8) |
          (static_cast<std::uint32_t>(p[6]) << 16) | (static_cast<std::uint32_t>(p[7]) << 24);
  f.timestamp_ms = nominal_timestamp_ms(f.seq, rate_hz);
  f.counts.resize(taxels);
  for (std::size_t i = 0; i < taxels; ++i) f.counts[i] = get_u16(p + kHeaderBytes + 2 * i);
  return f;
}

}  // namespace

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes) {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t b : bytes) {
    crc = static_cast<std::uint16_t>((crc << 8) ^ kCrcTable[((crc >> 8) ^ b) & 0xFF]);
  }
  return crc;
}

std::vector<std::uint8_t> encode_frame(const SensorFrame& frame) {
  return encode_checked(frame.sensor_id, frame.seq, frame.counts);
}

std::vector<std::uint8_t> encode_frame(std::uint8_t sensor_id, std::uint32_t seq,
                                       std::span<const std::int64_t> counts) {
  std::vector<std::uint16_t> narrow(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0 || counts[i] > 0xFFFF) {
      throw Error(Errc::RangeExceeded, "taxel " + std::to_string(i) + " count " +
                                           std::to_string(counts[i]) + " outside u16");
    }
    narrow[i] = static_cast<std::uint16_t>(counts[i]);
  }
  return encode_checked(sensor_id, seq, narrow);
}

SensorFrame decode_frame(std::span<const std::uint8_t> bytes, const DecoderOptions& options) {
  const std::size_t len = frame_size(options.taxels);
  if (bytes.size() < len) {
    throw Error(Errc::LengthMismatch, "need " + std::to_string(len) + " bytes, have " +
                                          std::to_string(bytes.size()));
  }
  if (bytes[0] != kMagic[0] || bytes[1] != kMagic[1]) throw Error(Errc::ParseError, "bad magic");
  switch (check_candidate(bytes.data(), len)) {
    case Check::bad_version: throw Error(Errc::ParseError, "unsupported version");
    case Check::bad_crc: throw Error(Errc::ParseError, "CRC mismatch");
    case Check::ok: break;
  }
  return unpack(bytes.data(), options.taxels, options.frame_rate_hz);
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Resync: return "Resync";
    case EventKind::CrcMismatch: return "CrcMismatch";
    case EventKind::BadVersion: return "BadVersion";
    case EventKind::Truncated: return "Truncated";
  }
  return "Unknown";
}

StreamDecoder::StreamDecoder(DecoderOptions options) : options_(options) {}

void StreamDecoder::close_gap(DecodeResult& out, std::uint64_t end) {
  if (!in_gap_) return;
  const std::uint64_t skipped = end - gap_start_;
  const std::uint64_t len = frame_size(options_.taxels);
  if (skipped > 0) {
    out.diagnostics.push_back({gap_kind_, gap_start_, skipped, (skipped + len / 2) / len});
  }
  in_gap_ = false;
}

void StreamDecoder::feed(std::span<const std::uint8_t> bytes, DecodeResult& out) {
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
  const std::size_t len = frame_size(options_.taxels);
  std::size_t pos = 0;

  while (true) {
    // Next magic at or after pos.
    std::size_t m = pos;
    while (m + 1 < buffer_.size() && !(buffer_[m] == kMagic[0] && buffer_[m + 1] == kMagic[1])) ++m;
    if (m + 1 >= buffer_.size()) {
      // Keep a possible first magic byte for the next feed.
      const std::size_t keep_from = (!buffer_.empty() && buffer_.back() == kMagic[0])
                                        ? buffer_.size() - 1
                                        : buffer_.size();
      if (keep_from > pos && !in_gap_) {
        in_gap_ = true;
        gap_start_ = buffer_offset_ + pos;
        gap_kind_ = EventKind::Resync;
      }
      pos = std::max(pos, keep_from);
      break;
    }
    if (m > pos && !in_gap_) {
      in_gap_ = true;
      gap_start_ = buffer_offset_ + pos;
      gap_kind_ = EventKind::Resync;
    }
    if (m + len > buffer_.size()) {
      pos = m;
      break;  // wait for the rest of this candidate
    }
    const Check check = check_candidate(buffer_.data() + m, len);
    if (check == Check::ok) {
      close_gap(out, buffer_offset_ + m);
      out.frames.push_back(unpack(buffer_.data() + m, options_.taxels, options_.frame_rate_hz));
      pos = m + len;
      continue;
    }
    if (!in_gap_) {
      in_gap_ = true;
      gap_start_ = buffer_offset_ + m;
      gap_kind_ = check == Check::bad_crc ? EventKind::CrcMismatch : EventKind::BadVersion;
    }
    pos = m + 1;
  }

  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(pos));
  buffer_offset_ += pos;
}

void StreamDecoder::finish(DecodeResult& out) {
  if (!buffer_.empty()) {
    if (!in_gap_) {
      in_gap_ = true;
      gap_start_ = buffer_offset_;
      gap_kind_ = (buffer_.size() >= 2 && buffer_[0] == kMagic[0] && buffer_[1] == kMagic[1])
                      ? EventKind::Truncated
                      : EventKind::Resync;
    }
    buffer_offset_ += buffer_.size();
    buffer_.clear();
  }
  close_gap(out, buffer_offset_);
}

DecodeResult decode_stream(std::span<const std::uint8_t> bytes, const DecoderOptions& options) {
  DecodeResult out;
  StreamDecoder decoder(options);
  decoder.feed(bytes, out);
  decoder.finish(out);
  return out;
}

}  // namespace dexskin::protocol
