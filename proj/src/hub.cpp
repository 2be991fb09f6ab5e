#include <algorithm>
#include <string>

#include "dexskin/error.hpp"
#include "dexskin/service/hub.hpp"

namespace dexskin::service {

void FrameQueue::push(Published item) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    if (capacity_ != 0 && items_.size() >= capacity_) {
      items_.pop_front();
      ++dropped_;
    }
    items_.push_back(std::move(item));
  }
  cv_.notify_one();
}

std::optional<Published> FrameQueue::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return !items_.empty() || closed_; });
  if (items_.empty()) return std::nullopt;
  Published item = std::move(items_.front());
  items_.pop_front();
  return item;
}

std::vector<Published> FrameQueue::drain() {
  std::lock_guard lock(mu_);
  std::vector<Published> out(std::make_move_iterator(items_.begin()),
                             std::make_move_iterator(items_.end()));
  items_.clear();
  return out;
}

void FrameQueue::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool FrameQueue::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

std::size_t FrameQueue::size() const {
  std::lock_guard lock(mu_);
  return items_.size();
}

std::uint64_t FrameQueue::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

const char* to_string(HubEvent::Kind kind) {
  switch (kind) {
    case HubEvent::Kind::decode: return "decode";
    case HubEvent::Kind::disconnect: return "disconnect";
    case HubEvent::Kind::source_error: return "source_error";
  }
  return "?";
}

Hub::~Hub() { stop(); }

std::shared_ptr<FrameQueue> Hub::subscribe_recorder() {
  auto q = std::make_shared<FrameQueue>(0);
  std::lock_guard lock(mu_);
  sinks_.push_back(q);
  return q;
}

std::shared_ptr<FrameQueue> Hub::subscribe_viewer(std::size_t depth) {
  auto q = std::make_shared<FrameQueue>(depth == 0 ? kViewerDepth : depth);
  std::lock_guard lock(mu_);
  sinks_.push_back(q);
  return q;
}

void Hub::unsubscribe(const std::shared_ptr<FrameQueue>& queue) {
  {
    std::lock_guard lock(mu_);
    std::erase(sinks_, queue);
  }
  queue->close();
}

void Hub::publish(SensorFrame frame) {
  auto shared = std::make_shared<const SensorFrame>(std::move(frame));
  std::lock_guard lock(mu_);
  Published item;
  item.index = published_.load();
  item.frame = shared;
  if (transfer_) {
    std::vector<double> values(shared->counts.size());
    try {
      for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = remap(*transfer_, i, shared->counts[i]);
      }
      item.values = std::make_shared<const std::vector<double>>(std::move(values));
    } catch (const Error& e) {
      // The raw frame still goes out; the failure is reported once per frame.
      events_.push_back({HubEvent::Kind::source_error, "transfer", e.what(), std::nullopt});
    }
  }
  for (const auto& sink : sinks_) sink->push(item);
  latest_ = shared;
  published_.fetch_add(1);
}

void Hub::report(HubEvent event) {
  std::lock_guard lock(mu_);
  events_.push_back(std::move(event));
}

void Hub::apply_transfer(TransferMap map, std::size_t taxel_count) {
  const auto gaps = map.missing(taxel_count);
  if (!gaps.empty()) {
    std::string ids;
    for (std::size_t g : gaps) ids += (ids.empty() ? "" : ",") + std::to_string(g);
    throw Error(Errc::CoverageGap, "transfer map lacks taxels " + ids);
  }
  auto shared = std::make_shared<const TransferMap>(std::move(map));
  std::lock_guard lock(mu_);
  transfer_ = std::move(shared);
}

void Hub::clear_transfer() {
  std::lock_guard lock(mu_);
  transfer_.reset();
}

bool Hub::transfer_active() const {
  std::lock_guard lock(mu_);
  return transfer_ != nullptr;
}

std::shared_ptr<const TransferMap> Hub::transfer() const {
  std::lock_guard lock(mu_);
  return transfer_;
}

void Hub::start(std::unique_ptr<Source> source) {
  std::lock_guard lock(threads_mu_);
  Source* raw = source.get();
  sources_.push_back(std::move(source));
  threads_.emplace_back([this, raw](std::stop_token stop) {
    try {
      raw->run(*this, stop);
    } catch (const std::exception& e) {
      report({HubEvent::Kind::source_error, raw->name(), e.what(), std::nullopt});
    }
  });
}

void Hub::wait() {
  std::lock_guard lock(threads_mu_);
  for (auto& t : threads_) {
    if (t.joinable()) t.join();
  }
  threads_.clear();
}

void Hub::stop() {
  {
    std::lock_guard lock(threads_mu_);
    for (auto& t : threads_) t.request_stop();
  }
  wait();
  std::vector<std::shared_ptr<FrameQueue>> sinks;
  {
    std::lock_guard lock(mu_);
    sinks = sinks_;
  }
  for (const auto& s : sinks) s->close();
}

std::vector<HubEvent> Hub::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

std::optional<SensorFrame> Hub::latest() const {
  std::lock_guard lock(mu_);
  if (!latest_) return std::nullopt;
  return *latest_;
}

ByteStreamSource::ByteStreamSource(std::string name, std::unique_ptr<std::istream> in,
                                   protocol::DecoderOptions options, std::size_t chunk)
    : name_(std::move(name)), in_(std::move(in)), options_(options), chunk_(chunk) {}

void ByteStreamSource::run(Hub& hub, std::stop_token stop) {
  protocol::StreamDecoder decoder(options_);
  std::vector<std::uint8_t> buf(chunk_);
  auto flush = [&](protocol::DecodeResult& r) {
    for (auto& f : r.frames) hub.publish(std::move(f));
    for (const auto& d : r.diagnostics) {
      hub.report({HubEvent::Kind::decode, name_,
                  std::string(protocol::to_string(d.kind)) + " at byte " +
                      std::to_string(d.offset),
                  d});
    }
    r.frames.clear();
    r.diagnostics.clear();
  };
  protocol::DecodeResult result;
  while (!stop.stop_requested() && *in_) {
    in_->read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<std::size_t>(in_->gcount());
    if (got == 0) break;
    decoder.feed(std::span(buf.data(), got), result);
    flush(result);
  }
  decoder.finish(result);
  flush(result);
  hub.report({HubEvent::Kind::disconnect, name_, "end of stream", std::nullopt});
}

ReplaySource::ReplaySource(Recording recording, double rate, std::optional<int> sensor_id)
    : recording_(std::move(recording)), rate_(rate), sensor_id_(sensor_id) {}

void ReplaySource::run(Hub& hub, std::stop_token stop) {
  using clock = std::chrono::steady_clock;
  const auto begin = clock::now();
  std::optional<std::int64_t> t0;
  for (const RecordRow& row : recording_.rows) {
    if (stop.stop_requested()) return;
    const auto* frame = std::get_if<SensorFrame>(&row);
    if (!frame || (sensor_id_ && frame->sensor_id != *sensor_id_)) continue;
    if (rate_ > 0.0) {
      if (!t0) t0 = frame->timestamp_ms;
      const auto due = begin + std::chrono::duration_cast<clock::duration>(
                                   std::chrono::duration<double, std::milli>(
                                       static_cast<double>(frame->timestamp_ms - *t0) / rate_));
      std::this_thread::sleep_until(due);
    }
    hub.publish(*frame);
  }
}

SimulatorSource::SimulatorSource(SensorPhysics physics, RigProgram program, TaxelLayout layout,
                                 bool realtime, std::size_t loops)
    : physics_(std::move(physics)),
      program_(program),
      layout_(std::move(layout)),
      realtime_(realtime),
      loops_(loops) {}

void SimulatorSource::run(Hub& hub, std::stop_token stop) {
  using clock = std::chrono::steady_clock;
  SimulatedSensor sensor(physics_);
  const auto begin = clock::now();
  std::uint32_t seq = 0;
  for (std::size_t loop = 0; loops_ == 0 || loop < loops_; ++loop) {
    sensor.reset();
    const RigRun run = run_rig(program_, sensor, layout_);
    for (const RecordRow& row : run.recording.rows) {
      if (stop.stop_requested()) return;
      const auto* f = std::get_if<SensorFrame>(&row);
      if (!f) continue;
      SensorFrame out = *f;
      out.seq = seq;
      out.timestamp_ms = nominal_timestamp_ms(seq, program_.frame_rate_hz);
      ++seq;
      if (realtime_) {
        std::this_thread::sleep_until(begin + std::chrono::milliseconds(out.timestamp_ms));
      }
      hub.publish(std::move(out));
    }
  }
}

Recorder::Recorder(Hub& hub, RecordingHeader header) : hub_(hub), queue_(hub.subscribe_recorder()) {
  recording_.header = std::move(header);
  worker_ = std::jthread([this](std::stop_token stop) {
    while (!stop.stop_requested()) {
      auto item = queue_->pop(std::chrono::milliseconds(50));
      if (!item) {
        if (queue_->closed()) return;
        continue;
      }
      std::lock_guard lock(mu_);
      recording_.rows.emplace_back(*item->frame);
    }
  });
}

Recorder::~Recorder() {
  if (worker_.joinable()) finish();
}

Recording Recorder::finish() {
  hub_.unsubscribe(queue_);
  worker_.request_stop();
  if (worker_.joinable()) worker_.join();
  for (auto& item : queue_->drain()) recording_.rows.emplace_back(*item.frame);
  return std::move(recording_);
}

Recording merge_frames(const Recording& a, const Recording& b) {
  Recording out;
  out.header = a.header;
  for (const auto& ch : b.header.channels) {
    if (ch.kind == ChannelDescriptor::Kind::frames && !out.header.frame_channel(ch.sensor_id)) {
      out.header.channels.push_back(ch);
    }
  }
  std::vector<const SensorFrame*> extra;
  for (const RecordRow& row : b.rows) {
    if (const auto* f = std::get_if<SensorFrame>(&row)) extra.push_back(f);
  }
  std::size_t j = 0;
  for (const RecordRow& row : a.rows) {
    const std::int64_t t = timestamp_of(row);
    while (j < extra.size() && extra[j]->timestamp_ms < t) out.rows.emplace_back(*extra[j++]);
    out.rows.push_back(row);
    // b's frame follows a's frame of the same instant, ahead of a's gauge rows.
    if (std::holds_alternative<SensorFrame>(row)) {
      while (j < extra.size() && extra[j]->timestamp_ms == t) out.rows.emplace_back(*extra[j++]);
    }
  }
  while (j < extra.size()) out.rows.emplace_back(*extra[j++]);
  return out;
}

}  // namespace dexskin::service
