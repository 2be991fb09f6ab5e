#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "dexskin/layout.hpp"
#include "dexskin/service/hub.hpp"
#include "dexskin/service/session.hpp"

namespace httplib {
class Server;
}

namespace dexskin::service {

/// Runs rig programs on simulated sensors (one per sensor id). Transfer checks
/// run every sensor under the same program and merge the frames. When `hub`
/// is set, captured frames are also published live.
RigRunner simulator_rig_runner(std::vector<SensorPhysics> sensors, TaxelLayout layout,
                               Hub* hub = nullptr);

/// Transfer comparison at the source sensor's peak-load frame and the target
/// frame nearest to it: raw and remapped source counts against the target.
/// MSE and SSIM are computed on counts minus the target baselines.
docs::json transfer_comparison(const Recording& recording, const TransferMap& map,
                               const TaxelLayout& layout);

/// The /v1 HTTP surface.
///   GET  /v1/layout               layout document
///   GET  /v1/frames?limit=N       NDJSON, one frame per line, latest-wins
///   POST /v1/session              {"command":"create","mode","targets","sensor_id"}
///                                 or {"id","command","args"}
///   GET  /v1/session/{id}
///   POST /v1/transfer/apply       transfer document, or {"clear":true}
///   GET  /v1/report/{id}
/// Errors are {"error": code, "message"} with 400/404/409.
class Server {
 public:
  Server(Hub& hub, SessionManager& sessions, TaxelLayout layout);
  ~Server();

  /// Binds (port 0 picks a free port) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();
  int port() const { return port_; }

 private:
  void routes();

  Hub& hub_;
  SessionManager& sessions_;
  TaxelLayout layout_;
  std::unique_ptr<httplib::Server> http_;
  std::thread thread_;
  int port_ = 0;
  std::mutex viewers_mu_;
  std::vector<std::shared_ptr<FrameQueue>> viewers_;
};

}  // namespace dexskin::service
