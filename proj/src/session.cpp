#include <algorithm>
#include <string>

#include "dexskin/error.hpp"
#include "dexskin/service/session.hpp"

namespace dexskin::service {

namespace {

[[noreturn]] void illegal(const SessionState& s, Command c, const std::string& why = {}) {
  std::string msg = std::string(to_string(c)) + " not allowed in " + to_string(s.phase);
  if (!why.empty()) msg += ": " + why;
  throw Error(Errc::IllegalTransition, msg);
}

}  // namespace

const char* to_string(SessionMode mode) {
  switch (mode) {
    case SessionMode::force_calibration: return "force_calibration";
    case SessionMode::pneumatic_calibration: return "pneumatic_calibration";
    case SessionMode::transfer_check: return "transfer_check";
  }
  return "?";
}

const char* to_string(SessionPhase phase) {
  switch (phase) {
    case SessionPhase::idle: return "idle";
    case SessionPhase::recording: return "recording";
    case SessionPhase::fitting: return "fitting";
    case SessionPhase::review: return "review";
    case SessionPhase::done: return "done";
  }
  return "?";
}

const char* to_string(Command command) {
  switch (command) {
    case Command::start: return "start";
    case Command::arm_rig: return "arm_rig";
    case Command::mark_noload: return "mark_noload";
    case Command::fit: return "fit";
    case Command::accept: return "accept";
    case Command::reject: return "reject";
    case Command::finish: return "finish";
  }
  return "?";
}

const char* to_string(FitRecord::Status status) {
  switch (status) {
    case FitRecord::Status::pending: return "pending";
    case FitRecord::Status::accepted: return "accepted";
    case FitRecord::Status::rejected: return "rejected";
  }
  return "?";
}

SessionMode parse_mode(const std::string& text) {
  for (auto m : {SessionMode::force_calibration, SessionMode::pneumatic_calibration,
                 SessionMode::transfer_check}) {
    if (text == to_string(m)) return m;
  }
  throw Error(Errc::ParseError, "unknown session mode " + text);
}

Command parse_command(const std::string& text) {
  for (auto c : {Command::start, Command::arm_rig, Command::mark_noload, Command::fit,
                 Command::accept, Command::reject, Command::finish}) {
    if (text == to_string(c)) return c;
  }
  throw Error(Errc::ParseError, "unknown session command " + text);
}

docs::json session_to_json(const SessionState& s) {
  docs::json fits = docs::json::array();
  for (const FitRecord& f : s.fits) {
    docs::json j = {{"taxel", f.taxel}, {"status", to_string(f.status)}};
    j["curve"] = f.curve ? docs::curve_to_json(*f.curve) : docs::json(nullptr);
    if (!f.diagnostics.empty()) j["diagnostics"] = f.diagnostics;
    fits.push_back(j);
  }
  docs::json accepted = docs::json::array();
  for (const CalibrationCurve& c : s.accepted) accepted.push_back(docs::curve_to_json(c));
  std::size_t frames = 0, gauge = 0;
  for (const RecordRow& r : s.recording.rows) {
    (std::holds_alternative<SensorFrame>(r) ? frames : gauge) += 1;
  }
  docs::json j = {{"id", s.id},
                  {"mode", to_string(s.mode)},
                  {"phase", to_string(s.phase)},
                  {"sensor_id", s.sensor_id},
                  {"targets", s.targets},
                  {"noload_marked", s.noload_marked},
                  {"rig_armed", s.rig_armed},
                  {"frames", frames},
                  {"gauge_samples", gauge},
                  {"fit_rounds", s.fit_rounds},
                  {"fits", fits},
                  {"accepted", accepted}};
  j["curve_file"] = s.curve_file ? docs::json(s.curve_file->string()) : docs::json(nullptr);
  return j;
}

SessionManager::SessionManager(RigRunner runner, std::optional<std::filesystem::path> output_dir,
                               CalibrationInput input)
    : runner_(std::move(runner)), output_dir_(std::move(output_dir)), input_(input) {}

std::string SessionManager::create(SessionMode mode, std::vector<std::size_t> targets,
                                   int sensor_id) {
  if (targets.empty()) throw Error(Errc::InvalidArgument, "session needs >= 1 target taxel");
  std::lock_guard lock(mu_);
  SessionState s;
  s.id = "s" + std::to_string(next_id_++);
  s.mode = mode;
  s.targets = std::move(targets);
  s.sensor_id = sensor_id;
  const std::string id = s.id;
  sessions_.emplace(id, std::move(s));
  return id;
}

SessionState& SessionManager::find(const std::string& id) {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(Errc::UnknownSession, "no session " + id);
  return it->second;
}

SessionState SessionManager::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(Errc::UnknownSession, "no session " + id);
  return it->second;
}

std::vector<std::string> SessionManager::ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, s] : sessions_) out.push_back(id);
  return out;
}

void SessionManager::do_fit(SessionState& s) {
  s.phase = SessionPhase::fitting;
  s.fits.clear();
  ++s.fit_rounds;
  for (std::size_t taxel : s.targets) {
    FitRecord rec;
    rec.taxel = taxel;
    try {
      rec.curve = calibrate_taxel(s.recording, s.sensor_id, taxel, input_);
    } catch (const Error& e) {
      rec.diagnostics = e.what();
    }
    s.fits.push_back(std::move(rec));
  }
  s.phase = SessionPhase::review;
}

SessionState SessionManager::apply(const std::string& id, Command command,
                                   const docs::json& args) {
  std::lock_guard lock(mu_);
  SessionState& s = find(id);
  switch (command) {
    case Command::start:
      if (s.phase != SessionPhase::idle) illegal(s, command);
      s.phase = SessionPhase::recording;
      break;

    case Command::mark_noload:
      if (s.phase != SessionPhase::recording) illegal(s, command);
      s.noload_marked = true;
      break;

    case Command::arm_rig: {
      if (s.phase != SessionPhase::recording) illegal(s, command);
      if (!s.noload_marked) illegal(s, command, "mark the no-load baseline first");
      RigProgram program;
      if (args.is_object() && args.contains("rig")) {
        program = docs::rig_from_json(args.at("rig"));
      } else {
        program.kind = s.mode == SessionMode::force_calibration
                           ? RigProgram::Kind::vertical_stage
                           : RigProgram::Kind::pneumatic_chamber;
        if (program.kind == RigProgram::Kind::vertical_stage) {
          program.stage.target_taxel = s.targets.front();
          program.stage.cycles = 4;
        }
      }
      // A fresh capture replaces the previous one; accepted curves are kept.
      s.recording = runner_(program, s.mode, s.sensor_id);
      s.rig_armed = true;
      break;
    }

    case Command::fit:
      if (s.phase != SessionPhase::recording && s.phase != SessionPhase::review) {
        illegal(s, command);
      }
      if (!s.rig_armed) illegal(s, command, "no recording captured");
      do_fit(s);
      break;

    case Command::accept: {
      if (s.phase != SessionPhase::review) illegal(s, command);
      const bool any = std::any_of(s.fits.begin(), s.fits.end(),
                                   [](const FitRecord& f) { return f.curve.has_value(); });
      if (!any) illegal(s, command, "no successful fit to accept");
      for (FitRecord& f : s.fits) {
        if (!f.curve) continue;
        const bool known = std::any_of(s.accepted.begin(), s.accepted.end(),
                                       [&](const CalibrationCurve& c) { return c.taxel == f.taxel; });
        if (known) {
          f.status = FitRecord::Status::rejected;
          f.diagnostics = "taxel already has an accepted curve";
          continue;
        }
        s.accepted.push_back(*f.curve);
        f.status = FitRecord::Status::accepted;
      }
      s.phase = SessionPhase::recording;
      break;
    }

    case Command::reject:
      if (s.phase != SessionPhase::review) illegal(s, command);
      for (FitRecord& f : s.fits) f.status = FitRecord::Status::rejected;
      s.phase = SessionPhase::recording;
      break;

    case Command::finish:
      if (s.phase != SessionPhase::recording && s.phase != SessionPhase::review) {
        illegal(s, command);
      }
      if (s.accepted.empty()) illegal(s, command, "no accepted fit");
      if (output_dir_) {
        const auto path = *output_dir_ / (s.id + ".curves.json");
        docs::write_json_file(path, docs::curves_to_json({s.sensor_id, s.accepted}));
        s.curve_file = path;
      }
      s.phase = SessionPhase::done;
      break;
  }
  return s;
}

}  // namespace dexskin::service
