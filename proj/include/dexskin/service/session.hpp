#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dexskin/calibration.hpp"
#include "dexskin/characterization.hpp"
#include "dexskin/documents.hpp"
#include "dexskin/recording.hpp"
#include "dexskin/simulator.hpp"

namespace dexskin::service {

enum class SessionMode { force_calibration, pneumatic_calibration, transfer_check };
enum class SessionPhase { idle, recording, fitting, review, done };
enum class Command { start, arm_rig, mark_noload, fit, accept, reject, finish };

const char* to_string(SessionMode mode);
const char* to_string(SessionPhase phase);
const char* to_string(Command command);
SessionMode parse_mode(const std::string& text);
Command parse_command(const std::string& text);

struct FitRecord {
  enum class Status { pending, accepted, rejected };
  std::size_t taxel = 0;
  std::optional<CalibrationCurve> curve;
  std::string diagnostics;   // empty when the fit succeeded
  Status status = Status::pending;
};

const char* to_string(FitRecord::Status status);

/// Produces the rows captured while the rig runs.
using RigRunner = std::function<Recording(const RigProgram&, SessionMode, int sensor_id)>;

struct SessionState {
  std::string id;
  SessionMode mode = SessionMode::force_calibration;
  SessionPhase phase = SessionPhase::idle;
  int sensor_id = 0;
  std::vector<std::size_t> targets;
  bool noload_marked = false;
  bool rig_armed = false;
  Recording recording;
  std::vector<FitRecord> fits;                  // the round under review
  std::vector<CalibrationCurve> accepted;       // immutable once accepted
  std::optional<std::filesystem::path> curve_file;
  int fit_rounds = 0;
};

docs::json session_to_json(const SessionState& state);

/// Serialized command application over any number of sessions.
///
///   idle --start--> recording
///   recording: arm_rig, mark_noload
///   recording|review --fit--> fitting --> review   (failures land in review)
///   review --accept|reject--> recording
///   recording|review --finish--> done              (needs >= 1 accepted fit)
///
/// Anything else is IllegalTransition; done accepts nothing.
class SessionManager {
 public:
  SessionManager(RigRunner runner, std::optional<std::filesystem::path> output_dir = {},
                 CalibrationInput input = {});

  std::string create(SessionMode mode, std::vector<std::size_t> targets, int sensor_id = 0);
  SessionState apply(const std::string& id, Command command, const docs::json& args = {});
  SessionState get(const std::string& id) const;
  std::vector<std::string> ids() const;

 private:
  SessionState& find(const std::string& id);
  void do_fit(SessionState& s);

  RigRunner runner_;
  std::optional<std::filesystem::path> output_dir_;
  CalibrationInput input_;
  mutable std::mutex mu_;
  std::map<std::string, SessionState> sessions_;
  std::uint64_t next_id_ = 1;
};

}  // namespace dexskin::service
