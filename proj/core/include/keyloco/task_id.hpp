#pragma once

#include <stdexcept>
#include <string>

namespace keyloco {

enum class TaskId { kPushBox, kKickBox, kLiftBox, kReachBox, kKickBall };

inline const char* task_name(TaskId id) {
  switch (id) {
    case TaskId::kPushBox: return "push_box";
    case TaskId::kKickBox: return "kick_box";
    case TaskId::kLiftBox: return "lift_box";
    case TaskId::kReachBox: return "reach_box";
    case TaskId::kKickBall: return "kick_ball";
  }
  return "unknown";
}

inline TaskId task_from_name(const std::string& name) {
  if (name == "push_box") return TaskId::kPushBox;
  if (name == "kick_box") return TaskId::kKickBox;
  if (name == "lift_box") return TaskId::kLiftBox;
  if (name == "reach_box") return TaskId::kReachBox;
  if (name == "kick_ball") return TaskId::kKickBall;
  throw std::invalid_argument("unknown task id: " + name);
}

}  // namespace keyloco
