#pragma once

#include <string>
#include <sys/types.h>
#include <vector>

#include "metafal/scenario.hpp"
#include "metafal/simulator.hpp"

namespace metafal {

struct ReferenceControllerParams {
  /// Proportional gain from steering error to steer rate.
  double steer_gain = 0.5;
  /// Pure-pursuit look-ahead distance.
  double lookahead = 1.2;
  /// Score penalty per column of distance between a gap's centre and the
  /// image centre.
  double center_weight = 0.5;
  /// Acceleration per unit of (free-depth ratio - brake_ratio).
  double accel_gain = 0.4;
  double brake_ratio = 0.35;
  /// Lateral clearance added around every return before gaps are searched.
  double bubble = 0.25;
  /// Columns within this many rows of the deepest one count as open.
  double depth_slack = 0.0;
};

/// Single-frame gap follower. Widens every return by a safety bubble, aims
/// at the widest run of deepest columns,
/// steers toward it by pure pursuit and speeds up while the view straight
/// ahead is open.
class ReferenceController final : public Controller {
 public:
  explicit ReferenceController(const ScenarioConfig& cfg, ReferenceControllerParams params = {});

  Control act(const Observation& obs) override;

  const ReferenceControllerParams& params() const { return params_; }

 private:
  ScenarioConfig cfg_;
  ReferenceControllerParams params_;
};

/// Controller in a child process speaking the binary frame protocol on its
/// stdin/stdout. Any short read, EOF or malformed value throws
/// ControllerProtocolError.
class ExternalController final : public Controller {
 public:
  explicit ExternalController(std::vector<std::string> argv);
  ~ExternalController() override;

  ExternalController(const ExternalController&) = delete;
  ExternalController& operator=(const ExternalController&) = delete;

  Control act(const Observation& obs) override;

 private:
  void shutdown();

  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
};

}  // namespace metafal
