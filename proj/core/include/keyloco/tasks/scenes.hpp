#pragma once

#include "keyloco/sim/scene.hpp"
#include "keyloco/task_id.hpp"

namespace keyloco::tasks {

// Scene (object shapes, masses, friction and pose randomization ranges,
// target points) for each task.
sim::SceneSpec make_scene(TaskId task);

}  // namespace keyloco::tasks
