#pragma once

#include <string>
#include <vector>

#include "keyloco/reward/task_reward.hpp"
#include "keyloco/sim/types.hpp"
#include "keyloco/task_id.hpp"

namespace keyloco::tasks {

// One row per 50 Hz control step. Doubles round-trip the CSV bit-exactly
// (written with max precision), so metrics recomputed from disk match the
// live values.
struct TrajectoryRow {
  double time = 0.0;
  sim::PuppetState state;
  std::vector<sim::SceneObject> objects;
  reward::TaskRewardBreakdown reward;
  std::array<double, 18> action{};
  int binary_cmd = 1;
};

struct TrajectoryLog {
  std::string task;
  double dt = 0.02;
  std::vector<TrajectoryRow> rows;

  double episode_length() const { return dt * static_cast<double>(rows.size()); }

  void save_csv(const std::string& path) const;
  static TrajectoryLog load_csv(const std::string& path);
};

struct EpisodeMetrics {
  double distance = 0.0;     // m, object endpoint displacement (xy)
  double forward = 0.0;      // m, +x component of displacement
  double drift = 0.0;        // m, |y| component of displacement
  double height = 0.0;       // m, max object-bottom height
  bool box_fall = false;     // dropped after being lifted
  double alive = 0.0;        // s
  double velocity = 0.0;     // m/s, mean root speed toward the object
  bool collision = false;    // robot-object interpenetration > 2 cm
  double error = 0.0;        // cm, final hand/foot distance to target
  double finish_time = 0.0;  // s, episode length if never completed
  double force = 0.0;        // N, peak object contact force
};

// Throws std::invalid_argument on an empty or truncated log.
EpisodeMetrics compute_metrics(const TrajectoryLog& log, TaskId task);

// Table row with per-metric mean and std over a batch of episodes.
struct MetricsSummary {
  int episodes = 0;
  EpisodeMetrics mean;
  EpisodeMetrics stddev;
  double box_fall_rate = 0.0;  // booleans summarized as rates in [0,1]
  double collision_rate = 0.0;
};
MetricsSummary summarize(const std::vector<EpisodeMetrics>& episodes);

// Table-I-shaped CSV: header + one row per (task, policy) entry.
std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& task, const std::string& policy,
                            const MetricsSummary& summary);

}  // namespace keyloco::tasks
