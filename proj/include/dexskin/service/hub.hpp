#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <istream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dexskin/frame.hpp"
#include "dexskin/protocol.hpp"
#include "dexskin/recording.hpp"
#include "dexskin/simulator.hpp"
#include "dexskin/transfer.hpp"

namespace dexskin::service {

/// What every sink receives. `values` holds remapped counts while a transfer
/// map is active; `frame` always holds the raw counts.
struct Published {
  std::uint64_t index = 0;   // hub-wide publication order
  std::shared_ptr<const SensorFrame> frame;
  std::shared_ptr<const std::vector<double>> values;
};

/// capacity 0: unbounded and lossless. Otherwise pushing into a full queue
/// drops the oldest entry.
class FrameQueue {
 public:
  explicit FrameQueue(std::size_t capacity = 0) : capacity_(capacity) {}

  void push(Published item);
  /// Blocks until an item arrives, the queue closes or the timeout elapses.
  std::optional<Published> pop(std::chrono::milliseconds timeout);
  std::vector<Published> drain();
  void close();

  bool closed() const;
  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }
  std::uint64_t dropped() const;

 private:
  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Published> items_;
  std::uint64_t dropped_ = 0;
  bool closed_ = false;
};

struct HubEvent {
  enum class Kind { decode, disconnect, source_error };
  Kind kind = Kind::decode;
  std::string source;
  std::string message;
  std::optional<protocol::CodecEvent> codec;
};

const char* to_string(HubEvent::Kind kind);

class Hub;

/// A producer run on its own thread until it runs dry or stop is requested.
class Source {
 public:
  virtual ~Source() = default;
  virtual std::string name() const = 0;
  virtual void run(Hub& hub, std::stop_token stop) = 0;
};

class Hub {
 public:
  static constexpr std::size_t kViewerDepth = 8;

  Hub() = default;
  ~Hub();
  Hub(const Hub&) = delete;
  Hub& operator=(const Hub&) = delete;

  std::shared_ptr<FrameQueue> subscribe_recorder();
  std::shared_ptr<FrameQueue> subscribe_viewer(std::size_t depth = kViewerDepth);
  void unsubscribe(const std::shared_ptr<FrameQueue>& queue);

  /// Delivers to every sink under one lock, so all sinks see the same order.
  void publish(SensorFrame frame);
  void report(HubEvent event);

  /// Remaps subsequently published frames. Throws CoverageGap naming every
  /// taxel of `taxel_count` the map lacks; the previous map stays active.
  void apply_transfer(TransferMap map, std::size_t taxel_count);
  void clear_transfer();
  bool transfer_active() const;
  std::shared_ptr<const TransferMap> transfer() const;

  /// Starts each source on its own thread.
  void start(std::unique_ptr<Source> source);
  /// Waits for every source to run dry.
  void wait();
  /// Requests stop, joins sources and closes all queues.
  void stop();

  std::uint64_t published() const { return published_.load(); }
  std::vector<HubEvent> events() const;
  std::optional<SensorFrame> latest() const;

 private:
  mutable std::mutex mu_;
  std::vector<std::shared_ptr<FrameQueue>> sinks_;
  std::shared_ptr<const TransferMap> transfer_;
  std::vector<HubEvent> events_;
  std::shared_ptr<const SensorFrame> latest_;
  std::atomic<std::uint64_t> published_{0};

  std::mutex threads_mu_;
  std::vector<std::unique_ptr<Source>> sources_;
  std::vector<std::jthread> threads_;
};

/// Decodes wire bytes from a stream; the end of the stream is a disconnect.
class ByteStreamSource : public Source {
 public:
  ByteStreamSource(std::string name, std::unique_ptr<std::istream> in,
                   protocol::DecoderOptions options = {}, std::size_t chunk = 4096);

  std::string name() const override { return name_; }
  void run(Hub& hub, std::stop_token stop) override;

 private:
  std::string name_;
  std::unique_ptr<std::istream> in_;
  protocol::DecoderOptions options_;
  std::size_t chunk_;
};

/// Publishes a recording's frames in order. rate 0 replays as fast as
/// possible; rate r paces by recorded timestamps divided by r.
class ReplaySource : public Source {
 public:
  ReplaySource(Recording recording, double rate = 0.0, std::optional<int> sensor_id = {});

  std::string name() const override { return "replay"; }
  void run(Hub& hub, std::stop_token stop) override;

 private:
  Recording recording_;
  double rate_;
  std::optional<int> sensor_id_;
};

/// Drives a simulated sensor through a rig program, `loops` times (0 = until
/// stopped), at real time when `realtime` is set.
class SimulatorSource : public Source {
 public:
  SimulatorSource(SensorPhysics physics, RigProgram program, TaxelLayout layout,
                  bool realtime = true, std::size_t loops = 0);

  std::string name() const override { return "simulator"; }
  void run(Hub& hub, std::stop_token stop) override;

 private:
  SensorPhysics physics_;
  RigProgram program_;
  TaxelLayout layout_;
  bool realtime_;
  std::size_t loops_;
};

/// Collects every frame from a recorder queue into a Recording on its own thread.
class Recorder {
 public:
  Recorder(Hub& hub, RecordingHeader header);
  ~Recorder();

  /// Closes the queue, drains what is left and returns the rows.
  Recording finish();

 private:
  Hub& hub_;
  std::shared_ptr<FrameQueue> queue_;
  Recording recording_;
  std::jthread worker_;
  std::mutex mu_;
};

/// Frames of both recordings interleaved by timestamp (a first on ties);
/// gauge rows come from `a` only.
Recording merge_frames(const Recording& a, const Recording& b);

}  // namespace dexskin::service
