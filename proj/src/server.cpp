#include <httplib.h>

#include <cstdlib>
#include <string>

#include "dexskin/error.hpp"
#include "dexskin/service/server.hpp"

namespace dexskin::service {

namespace {

using docs::json;

int status_for(Errc code) {
  switch (code) {
    case Errc::UnknownSession: return 404;
    case Errc::IllegalTransition:
    case Errc::CoverageGap: return 409;
    default: return 400;
  }
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e, json extra = json::object()) {
  extra["error"] = to_string(e.code());
  extra["message"] = e.what();
  send_json(res, extra, status_for(e.code()));
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("request body: ") + e.what());
  }
}

// The source frame with the largest total response, i.e. the peak of the load.
const SensorFrame* peak_frame(const Recording& rec, int sensor_id) {
  const SensorFrame* best = nullptr;
  double best_sum = -1.0;
  for (const RecordRow& row : rec.rows) {
    const auto* f = std::get_if<SensorFrame>(&row);
    if (!f || f->sensor_id != sensor_id) continue;
    double sum = 0.0;
    for (std::uint16_t c : f->counts) sum += c;
    if (sum > best_sum) {
      best_sum = sum;
      best = f;
    }
  }
  return best;
}

const SensorFrame* nearest_frame(const Recording& rec, int sensor_id, std::int64_t t_ms) {
  const SensorFrame* best = nullptr;
  for (const RecordRow& row : rec.rows) {
    const auto* f = std::get_if<SensorFrame>(&row);
    if (!f || f->sensor_id != sensor_id) continue;
    if (!best || std::llabs(f->timestamp_ms - t_ms) < std::llabs(best->timestamp_ms - t_ms)) {
      best = f;
    }
  }
  return best;
}

}  // namespace

RigRunner simulator_rig_runner(std::vector<SensorPhysics> sensors, TaxelLayout layout, Hub* hub) {
  return [sensors = std::move(sensors), layout = std::move(layout), hub](
             const RigProgram& program, SessionMode mode, int sensor_id) {
    auto run_one = [&](const SensorPhysics& physics) {
      SimulatedSensor sensor(physics);
      return run_rig(program, sensor, layout).recording;
    };
    Recording rec;
    if (mode == SessionMode::transfer_check) {
      if (sensors.empty()) throw Error(Errc::InvalidConfig, "no simulated sensors");
      rec = run_one(sensors.front());
      for (std::size_t i = 1; i < sensors.size(); ++i) rec = merge_frames(rec, run_one(sensors[i]));
    } else {
      const SensorPhysics* match = nullptr;
      for (const auto& s : sensors) {
        if (s.sensor_id == sensor_id) match = &s;
      }
      if (!match) {
        throw Error(Errc::InvalidConfig, "no simulated sensor " + std::to_string(sensor_id));
      }
      rec = run_one(*match);
    }
    if (hub) {
      for (const RecordRow& row : rec.rows) {
        if (const auto* f = std::get_if<SensorFrame>(&row)) hub->publish(*f);
      }
    }
    return rec;
  };
}

json transfer_comparison(const Recording& recording, const TransferMap& map,
                         const TaxelLayout& layout) {
  const SensorFrame* src = peak_frame(recording, map.source_sensor);
  const SensorFrame* tgt =
      src ? nearest_frame(recording, map.target_sensor, src->timestamp_ms) : nullptr;
  if (!src || !tgt) {
    throw Error(Errc::InvalidArgument, "recording lacks frames from sensors " +
                                           std::to_string(map.source_sensor) + " and " +
                                           std::to_string(map.target_sensor));
  }
  std::vector<double> raw(src->counts.begin(), src->counts.end());
  std::vector<double> target(tgt->counts.begin(), tgt->counts.end());
  std::vector<double> mapped(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) mapped[i] = remap(map, i, raw[i]);
  // Scored on dC against the target baseline; raw counts would let the shared
  // baseline dominate SSIM.
  auto delta = [&](const std::vector<double>& counts) {
    std::vector<double> d(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) d[i] = counts[i] - map.entry(i)->target.c0;
    return grid_project(d, layout);
  };
  const HeatmapGrid g_raw = delta(raw);
  const HeatmapGrid g_map = delta(mapped);
  const HeatmapGrid g_tgt = delta(target);
  return {{"source_sensor", map.source_sensor},
          {"target_sensor", map.target_sensor},
          {"mse_raw", mse(g_raw, g_tgt)},
          {"mse_remapped", mse(g_map, g_tgt)},
          {"ssim_raw", ssim(g_raw, g_tgt)},
          {"ssim_remapped", ssim(g_map, g_tgt)},
          {"raw", raw},
          {"remapped", mapped},
          {"target", target}};
}

Server::Server(Hub& hub, SessionManager& sessions, TaxelLayout layout)
    : hub_(hub), sessions_(sessions), layout_(std::move(layout)),
      http_(std::make_unique<httplib::Server>()) {
  routes();
}

Server::~Server() { stop(); }

int Server::start(const std::string& host, int port) {
  port_ = port == 0 ? http_->bind_to_any_port(host) : (http_->bind_to_port(host, port) ? port : -1);
  if (port_ < 0) throw Error(Errc::Io, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  return port_;
}

void Server::run(const std::string& host, int port) {
  if (!http_->bind_to_port(host, port)) {
    throw Error(Errc::Io, "cannot bind " + host + ":" + std::to_string(port));
  }
  port_ = port;
  http_->listen_after_bind();
}

void Server::stop() {
  {
    std::lock_guard lock(viewers_mu_);
    for (auto& q : viewers_) q->close();
  }
  if (http_) http_->stop();
  if (thread_.joinable()) thread_.join();
}

void Server::routes() {
  http_->Get("/v1/layout", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, docs::layout_to_json(layout_));
  });

  http_->Get("/v1/frames", [this](const httplib::Request& req, httplib::Response& res) {
    std::size_t limit = 0;
    if (req.has_param("limit")) {
      try {
        limit = std::stoul(req.get_param_value("limit"));
      } catch (const std::exception&) {
        send_error(res, Error(Errc::InvalidArgument, "limit must be a non-negative integer"));
        return;
      }
    }
    auto queue = hub_.subscribe_viewer();
    {
      std::lock_guard lock(viewers_mu_);
      viewers_.push_back(queue);
    }
    auto sent = std::make_shared<std::size_t>(0);
    res.set_chunked_content_provider(
        "application/x-ndjson",
        [queue, limit, sent](std::size_t, httplib::DataSink& sink) {
          while (sink.is_writable()) {
            auto item = queue->pop(std::chrono::milliseconds(100));
            if (!item) {
              if (queue->closed()) break;
              continue;
            }
            const std::string line = docs::frame_to_json(*item->frame, item->values.get()).dump() + "\n";
            if (!sink.write(line.data(), line.size())) return false;
            if (limit != 0 && ++*sent >= limit) break;
            return true;
          }
          sink.done();
          return true;
        },
        [this, queue](bool) {
          hub_.unsubscribe(queue);
          std::lock_guard lock(viewers_mu_);
          std::erase(viewers_, queue);
        });
  });

  http_->Post("/v1/session", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      const json body = parse_body(req);
      const std::string command = body.value("command", "");
      if (command == "create") {
        const SessionMode mode = parse_mode(body.value("mode", "force_calibration"));
        std::vector<std::size_t> targets;
        try {
          targets = body.value("targets", std::vector<std::size_t>{});
        } catch (const json::exception& e) {
          throw Error(Errc::ParseError, std::string("targets: ") + e.what());
        }
        for (std::size_t t : targets) {
          if (t >= layout_.taxel_count()) {
            throw Error(Errc::OutOfBounds, "target taxel " + std::to_string(t));
          }
        }
        const std::string id = sessions_.create(mode, targets, body.value("sensor_id", 0));
        send_json(res, session_to_json(sessions_.get(id)), 201);
        return;
      }
      if (!body.contains("id") || !body["id"].is_string()) {
        throw Error(Errc::ParseError, "missing session id");
      }
      const SessionState s = sessions_.apply(body["id"].get<std::string>(),
                                             parse_command(command),
                                             body.value("args", json::object()));
      send_json(res, session_to_json(s));
    } catch (const Error& e) {
      send_error(res, e);
    }
  });

  http_->Get(R"(/v1/session/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      send_json(res, session_to_json(sessions_.get(req.matches[1])));
    } catch (const Error& e) {
      send_error(res, e);
    }
  });

  http_->Post("/v1/transfer/apply", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      const json body = parse_body(req);
      if (body.is_object() && body.value("clear", false)) {
        hub_.clear_transfer();
        send_json(res, {{"active", false}});
        return;
      }
      TransferMap map = docs::transfer_from_json(body);
      const auto missing = map.missing(layout_.taxel_count());
      try {
        hub_.apply_transfer(std::move(map), layout_.taxel_count());
      } catch (const Error& e) {
        send_error(res, e, {{"missing", missing}});
        return;
      }
      send_json(res, {{"active", true}, {"taxels", layout_.taxel_count()}});
    } catch (const Error& e) {
      send_error(res, e);
    }
  });

  http_->Get(R"(/v1/report/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      const SessionState s = sessions_.get(req.matches[1]);
      json fits = json::array();
      for (const FitRecord& f : s.fits) {
        json j = {{"taxel", f.taxel}, {"status", to_string(f.status)}};
        j["r2"] = f.curve ? json(f.curve->r2) : json(nullptr);
        j["rmse"] = f.curve ? json(f.curve->rmse) : json(nullptr);
        fits.push_back(j);
      }
      json doc = {{"session", s.id}, {"phase", to_string(s.phase)}, {"fits", fits}};
      doc["characterization"] = nullptr;
      doc["transfer"] = nullptr;
      if (s.rig_armed && s.mode != SessionMode::transfer_check) {
        try {
          ReportOptions opts;
          opts.sensor_id = s.sensor_id;
          opts.taxels = s.targets;
          opts.force_curves = s.accepted;
          doc["characterization"] = docs::report_to_json(characterize(s.recording, layout_, opts));
        } catch (const Error& e) {
          doc["characterization_error"] = e.what();
        }
      }
      if (s.mode == SessionMode::transfer_check && s.rig_armed) {
        if (auto map = hub_.transfer()) {
          try {
            doc["transfer"] = transfer_comparison(s.recording, *map, layout_);
          } catch (const Error& e) {
            doc["transfer_error"] = e.what();
          }
        } else {
          doc["transfer_error"] = "no transfer map applied";
        }
      }
      send_json(res, doc);
    } catch (const Error& e) {
      send_error(res, e);
    }
  });
}

}  // namespace dexskin::service
