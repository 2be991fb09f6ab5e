// dexskin: simulate, calibrate, characterize, replay and serve tactile data.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dexskin/characterization.hpp"
#include "dexskin/documents.hpp"
#include "dexskin/error.hpp"
#include "dexskin/kernels.hpp"
#include "dexskin/protocol.hpp"
#include "dexskin/reward.hpp"
#include "dexskin/service/server.hpp"

namespace {

using namespace dexskin;
using docs::json;

TaxelLayout load_layout(const std::string& path) {
  return path.empty() ? TaxelLayout::standard() : docs::layout_from_json(docs::read_json_file(path));
}

void emit(const json& doc, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << doc.dump(2) << '\n';
  } else {
    docs::write_json_file(out, doc);
  }
}

std::vector<CalibrationCurve> load_curves(const std::vector<std::string>& paths) {
  std::vector<CalibrationCurve> out;
  for (const auto& p : paths) {
    auto set = docs::curves_from_json(docs::read_json_file(p));
    out.insert(out.end(), set.curves.begin(), set.curves.end());
  }
  return out;
}

int cmd_simulate(const std::string& physics_path, const std::string& rig_path,
                 const std::string& layout_path, const std::string& out,
                 const std::string& wire_out) {
  const TaxelLayout layout = load_layout(layout_path);
  const auto config = physics_path.empty() ? docs::SimulationConfig{}
                                           : docs::physics_from_json(docs::read_json_file(physics_path));
  const RigProgram program = docs::rig_from_json(docs::read_json_file(rig_path));
  SimulatedSensor sensor(docs::build_physics(config, layout));
  const RigRun run = run_rig(program, sensor, layout);
  write_recording(std::filesystem::path(out), run.recording);
  if (!wire_out.empty()) {
    std::ofstream w(wire_out, std::ios::binary);
    for (const auto& f : run.recording.frames(config.sensor_id)) {
      const auto bytes = protocol::encode_frame(f);
      w.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    }
  }
  return 0;
}

int cmd_calibrate(CurveForm form, const std::string& rec_path, int sensor_id,
                  std::vector<std::size_t> taxels, const std::string& out) {
  const Recording rec = read_recording(std::filesystem::path(rec_path));
  if (taxels.empty()) {
    if (form == CurveForm::force) {
      throw Error(Errc::InvalidArgument, "force calibration needs --taxels");
    }
    const auto* ch = rec.header.frame_channel(sensor_id);
    if (!ch) throw Error(Errc::InvalidArgument, "no frames for sensor " + std::to_string(sensor_id));
    for (std::size_t i = 0; i < ch->taxels; ++i) taxels.push_back(i);
  }
  const CalibrationInput input;
  std::vector<AlignedPairs> jobs;
  for (std::size_t t : taxels) jobs.push_back(prepare_pairs(rec, sensor_id, t, input));
  const auto results = kernels::fit_batch(jobs, form, input.fit, kernels::Exec::parallel);
  docs::CurveSet set{sensor_id, {}};
  int failures = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].curve) {
      set.curves.push_back(*results[i].curve);
    } else {
      ++failures;
      std::cerr << "taxel " << taxels[i] << ": " << results[i].message << '\n';
    }
  }
  emit(docs::curves_to_json(set), out);
  return failures == 0 ? 0 : 2;
}

int cmd_transfer_build(const std::string& src, const std::string& tgt, const std::string& out) {
  const auto s = docs::curves_from_json(docs::read_json_file(src));
  const auto t = docs::curves_from_json(docs::read_json_file(tgt));
  emit(docs::transfer_to_json(TransferMap::build(s.curves, t.curves, s.sensor_id, t.sensor_id)), out);
  return 0;
}

// Remaps the source sensor's frames into the target's count space; other rows pass through.
int cmd_transfer_apply(const std::string& map_path, const std::string& rec_path,
                       const std::string& out) {
  const TransferMap map = docs::transfer_from_json(docs::read_json_file(map_path));
  Recording rec = read_recording(std::filesystem::path(rec_path));
  for (RecordRow& row : rec.rows) {
    auto* f = std::get_if<SensorFrame>(&row);
    if (!f || f->sensor_id != map.source_sensor) continue;
    const std::vector<double> src(f->counts.begin(), f->counts.end());
    f->counts = to_counts(kernels::remap_frame(map, src, kernels::Exec::parallel));
    f->sensor_id = static_cast<std::uint8_t>(map.target_sensor);
  }
  for (auto& ch : rec.header.channels) {
    if (ch.kind == ChannelDescriptor::Kind::frames && ch.sensor_id == map.source_sensor) {
      ch.sensor_id = map.target_sensor;
    }
  }
  write_recording(std::filesystem::path(out), rec);
  return 0;
}

int cmd_characterize(const std::string& rec_path, const std::vector<std::string>& curves,
                     const std::string& layout_path, int sensor_id,
                     const std::vector<std::size_t>& taxels, const std::string& out) {
  const Recording rec = read_recording(std::filesystem::path(rec_path));
  ReportOptions opts;
  opts.sensor_id = sensor_id;
  opts.taxels = taxels;
  opts.force_curves = load_curves(curves);
  emit(docs::report_to_json(characterize(rec, load_layout(layout_path), opts)), out);
  return 0;
}

int cmd_reward_eval(const std::string& rec_path, const std::string& actions_path, int sensor_id) {
  const Recording rec = read_recording(std::filesystem::path(rec_path));
  const auto frames = rec.frames(sensor_id);
  if (frames.empty()) throw Error(Errc::InvalidArgument, "no frames for sensor " + std::to_string(sensor_id));
  const Baseline base = capture_baseline(std::span(frames).first(std::min<std::size_t>(30, frames.size())));
  std::ifstream in(actions_path);
  if (!in) throw Error(Errc::Io, "cannot open " + actions_path);

  const RewardConfig cfg;
  ActionSmoother smoother(cfg.ema_alpha);
  std::cout << "ts\tr_force\tr_action\tr_failure\ttotal\tmasked\tcommand\tsmoothed\n";
  std::string line;
  std::size_t lineno = 0, k = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    std::int64_t ts = 0;
    double a_b = 0, a_r = 0;
    int failed = 0;
    if (!(ls >> tag >> ts >> a_b >> a_r >> failed) || tag != "A" || (failed != 0 && failed != 1)) {
      throw Error(Errc::ParseError, actions_path + ":" + std::to_string(lineno) +
                                        ": expected 'A <ts_ms> <a_b> <a_r> <0|1>'");
    }
    while (k + 1 < frames.size() && frames[k + 1].timestamp_ms <= ts) ++k;
    const NormalizedFrame nf = normalize(frames[k], base);
    const RewardBreakdown r = total_reward(nf.values, a_b, a_r, failed == 1, cfg);
    const double command = compose_action(a_b, a_r, cfg);
    std::cout << ts << '\t' << format_double(r.r_force) << '\t' << format_double(r.r_action)
              << '\t' << format_double(r.r_failure) << '\t' << format_double(r.total) << '\t'
              << r.masked_taxels.size() << '\t' << format_double(command) << '\t'
              << format_double(smoother.step(command)) << '\n';
  }
  return 0;
}

int cmd_replay(const std::string& rec_path, double rate, int sensor_id, const std::string& out) {
  const Recording rec = read_recording(std::filesystem::path(rec_path));
  std::ofstream file;
  if (!out.empty() && out != "-") file.open(out, std::ios::binary);
  std::ostream& os = file.is_open() ? static_cast<std::ostream&>(file) : std::cout;
  const auto start = std::chrono::steady_clock::now();
  std::optional<std::int64_t> t0;
  for (const auto& f : rec.frames(sensor_id)) {
    if (rate > 0.0) {
      if (!t0) t0 = f.timestamp_ms;
      std::this_thread::sleep_until(
          start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double, std::milli>((f.timestamp_ms - *t0) / rate)));
    }
    const auto bytes = protocol::encode_frame(f);
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (rate > 0.0) os.flush();
  }
  return 0;
}

// Binary PGM of one frame's dC/C0 grid, scaled so the largest value is white.
int cmd_report_render(const std::string& rec_path, const std::string& layout_path, int sensor_id,
                      long frame_index, int scale, const std::string& out) {
  const Recording rec = read_recording(std::filesystem::path(rec_path));
  const TaxelLayout layout = load_layout(layout_path);
  const auto frames = rec.frames(sensor_id);
  if (frames.empty()) throw Error(Errc::InvalidArgument, "no frames for sensor " + std::to_string(sensor_id));
  const Baseline base = capture_baseline(std::span(frames).first(std::min<std::size_t>(30, frames.size())));
  const std::size_t idx = frame_index < 0 ? frames.size() - 1 : static_cast<std::size_t>(frame_index);
  if (idx >= frames.size()) throw Error(Errc::OutOfBounds, "frame " + std::to_string(idx));
  const HeatmapGrid g = grid_project(normalize(frames[idx], base), layout);
  double top = 0.0;
  for (std::size_t i = 0; i < g.cells.size(); ++i) {
    if (g.mask[i]) top = std::max(top, g.cells[i]);
  }
  std::ofstream os(out, std::ios::binary);
  if (!os) throw Error(Errc::Io, "cannot write " + out);
  os << "P5\n" << g.cols * scale << ' ' << g.rows * scale << "\n255\n";
  for (int r = 0; r < g.rows * scale; ++r) {
    for (int c = 0; c < g.cols * scale; ++c) {
      const int gr = r / scale, gc = c / scale;
      unsigned char px = 0;
      if (g.populated(gr, gc) && top > 0.0) {
        px = static_cast<unsigned char>(std::lround(std::clamp(g.at(gr, gc) / top, 0.0, 1.0) * 255.0));
      }
      os.put(static_cast<char>(px));
    }
  }
  return 0;
}

service::Server* g_server = nullptr;

int cmd_serve(int port, const std::string& host, const std::string& source,
              const std::string& physics_path, const std::string& rig_path,
              const std::string& rec_path, const std::string& bytes_path,
              const std::string& layout_path, const std::string& out_dir, double rate) {
  const TaxelLayout layout = load_layout(layout_path);
  auto config = physics_path.empty() ? docs::SimulationConfig{}
                                     : docs::physics_from_json(docs::read_json_file(physics_path));
  RigProgram program;
  if (!rig_path.empty()) program = docs::rig_from_json(docs::read_json_file(rig_path));

  // Two simulated sensors back calibration sessions: the configured one and a
  // second with a different draw, for transfer checks.
  std::vector<SensorPhysics> sims{docs::build_physics(config, layout)};
  auto second = config;
  second.sensor_id = config.sensor_id + 1;
  second.spec.seed = config.spec.seed + 1;
  sims.push_back(docs::build_physics(second, layout));

  service::Hub hub;
  service::SessionManager sessions(service::simulator_rig_runner(sims, layout, &hub),
                                   out_dir.empty() ? std::nullopt
                                                   : std::optional<std::filesystem::path>(out_dir));
  if (source == "sim") {
    hub.start(std::make_unique<service::SimulatorSource>(sims.front(), program, layout, true));
  } else if (source == "replay") {
    hub.start(std::make_unique<service::ReplaySource>(read_recording(std::filesystem::path(rec_path)),
                                                      rate <= 0.0 ? 1.0 : rate));
  } else {
    std::unique_ptr<std::istream> in;
    if (bytes_path.empty() || bytes_path == "-") {
      in = std::make_unique<std::istream>(std::cin.rdbuf());
    } else {
      in = std::make_unique<std::ifstream>(bytes_path, std::ios::binary);
    }
    hub.start(std::make_unique<service::ByteStreamSource>("bytes", std::move(in)));
  }
  service::Server server(hub, sessions, layout);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::cerr << "listening on " << host << ':' << port << '\n';
  server.run(host, port);
  hub.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DexSkin tactile toolkit"};
  app.require_subcommand(1);

  std::string layout_path, out;
  int sensor_id = 0;
  std::vector<std::size_t> taxels;

  auto* simulate = app.add_subcommand("simulate", "run a rig program on a simulated sensor");
  std::string physics_path, rig_path, wire_out;
  simulate->add_option("--physics", physics_path, "physics document (default: nominal)");
  simulate->add_option("--rig", rig_path, "rig program document")->required();
  simulate->add_option("--layout", layout_path, "layout document");
  simulate->add_option("--out", out, "recording to write")->required();
  simulate->add_option("--wire", wire_out, "also write the frames as wire bytes");

  auto* calibrate = app.add_subcommand("calibrate", "fit per-taxel calibration curves");
  calibrate->require_subcommand(1);
  std::string rec_path;
  for (const char* form : {"force", "pneumatic"}) {
    auto* sub = calibrate->add_subcommand(form, std::string(form) + " curve");
    sub->add_option("--rec", rec_path, "recording")->required();
    sub->add_option("--out", out, "curve document (default stdout)");
    sub->add_option("--sensor", sensor_id, "sensor id");
    sub->add_option("--taxels", taxels, "taxel ids (pneumatic default: all)")->delimiter(',');
  }

  auto* transfer = app.add_subcommand("transfer", "cross-sensor transfer maps");
  transfer->require_subcommand(1);
  std::string src_curves, tgt_curves, map_path;
  auto* tbuild = transfer->add_subcommand("build", "build a map from two pneumatic curve sets");
  tbuild->add_option("--source", src_curves, "source curves")->required();
  tbuild->add_option("--target", tgt_curves, "target curves")->required();
  tbuild->add_option("--out", out, "map document (default stdout)");
  auto* tapply = transfer->add_subcommand("apply", "remap a recording's source frames");
  tapply->add_option("--map", map_path, "transfer map")->required();
  tapply->add_option("--rec", rec_path, "recording")->required();
  tapply->add_option("--out", out, "remapped recording")->required();

  auto* charac = app.add_subcommand("characterize", "hysteresis, drift, crosstalk, uniformity");
  std::vector<std::string> curve_paths;
  charac->add_option("--rec", rec_path, "recording")->required();
  charac->add_option("--curves", curve_paths, "force curve documents");
  charac->add_option("--layout", layout_path, "layout document");
  charac->add_option("--sensor", sensor_id, "sensor id");
  charac->add_option("--taxels", taxels, "taxel ids")->delimiter(',');
  charac->add_option("--out", out, "report document (default stdout)");

  auto* reward = app.add_subcommand("reward", "reward evaluation");
  reward->require_subcommand(1);
  std::string actions_path;
  auto* reval = reward->add_subcommand("eval", "per-step rewards for an action log");
  reval->add_option("--recording", rec_path, "recording")->required();
  reval->add_option("--actions", actions_path, "lines 'A <ts_ms> <a_b> <a_r> <0|1>'")->required();
  reval->add_option("--sensor", sensor_id, "sensor id");

  auto* replay = app.add_subcommand("replay", "encode a recording's frames as wire bytes");
  double rate = 0.0;
  replay->add_option("--rec", rec_path, "recording")->required();
  replay->add_option("--rate", rate, "playback speed factor, 0 = unpaced");
  replay->add_option("--sensor", sensor_id, "sensor id");
  replay->add_option("--out", out, "byte file (default stdout)");

  auto* report = app.add_subcommand("report", "documentation artifacts");
  report->require_subcommand(1);
  long frame_index = -1;
  int scale = 16;
  auto* render = report->add_subcommand("render", "frame heatmap as a PGM image");
  render->add_option("--rec", rec_path, "recording")->required();
  render->add_option("--out", out, "image file")->required();
  render->add_option("--layout", layout_path, "layout document");
  render->add_option("--sensor", sensor_id, "sensor id");
  render->add_option("--frame", frame_index, "frame index (default last)");
  render->add_option("--scale", scale, "pixels per cell")->check(CLI::Range(1, 256));

  auto* serve = app.add_subcommand("serve", "HTTP service over a live source");
  int port = 8080;
  std::string host = "127.0.0.1", source = "sim", bytes_path, out_dir;
  serve->add_option("--port", port, "port");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--source", source, "frame source")->check(CLI::IsMember({"sim", "bytes", "replay"}));
  serve->add_option("--physics", physics_path, "physics document for the simulator");
  serve->add_option("--rig", rig_path, "rig program for the live simulator");
  serve->add_option("--rec", rec_path, "recording for replay");
  serve->add_option("--bytes", bytes_path, "wire byte file, - for stdin");
  serve->add_option("--rate", rate, "replay speed factor");
  serve->add_option("--layout", layout_path, "layout document");
  serve->add_option("--out-dir", out_dir, "where finished sessions write curve files");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return cmd_simulate(physics_path, rig_path, layout_path, out, wire_out);
    if (*calibrate) {
      const CurveForm form = calibrate->got_subcommand("force") ? CurveForm::force : CurveForm::pneumatic;
      return cmd_calibrate(form, rec_path, sensor_id, taxels, out);
    }
    if (*tbuild) return cmd_transfer_build(src_curves, tgt_curves, out);
    if (*tapply) return cmd_transfer_apply(map_path, rec_path, out);
    if (*charac) return cmd_characterize(rec_path, curve_paths, layout_path, sensor_id, taxels, out);
    if (*reval) return cmd_reward_eval(rec_path, actions_path, sensor_id);
    if (*replay) return cmd_replay(rec_path, rate, sensor_id, out);
    if (*render) return cmd_report_render(rec_path, layout_path, sensor_id, frame_index, scale, out);
    if (*serve) {
      if (source == "replay" && rec_path.empty()) throw Error(Errc::InvalidArgument, "--rec required");
      return cmd_serve(port, host, source, physics_path, rig_path, rec_path, bytes_path,
                       layout_path, out_dir, rate);
    }
  } catch (const Error& e) {
    std::cerr << "dexskin: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
