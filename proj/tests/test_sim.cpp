#include <doctest.h>

#include <cmath>

#include "keyloco/sim/world.hpp"
#include "keyloco/tasks/scenes.hpp"

using namespace keyloco;
using namespace keyloco::sim;

namespace {

LowLevelAction zero_action() { return LowLevelAction{}; }

}  // namespace

TEST_CASE("standing state stays upright under zero action") {
  SimConfig cfg;
  PuppetState s = standing_state(cfg);
  std::vector<SceneObject> objs;
  for (int i = 0; i < 100; ++i) {  // 2 s
    ContactReport c = step(s, objs, zero_action(), cfg);
    CHECK(c.supported);
  }
  CHECK(!s.fallen);
  CHECK(s.root_pos.z == doctest::Approx(cfg.rest_height).epsilon(0.05));
  CHECK(s.root_lin_vel.norm() < 0.2);
}

TEST_CASE("feet report ground contact while standing") {
  SimConfig cfg;
  PuppetState s = standing_state(cfg);
  std::vector<SceneObject> objs;
  // Let the feet settle onto the contact springs before sampling forces.
  ContactReport c;
  for (int i = 0; i < 25; ++i) c = step(s, objs, zero_action(), cfg);
  CHECK(c.foot_ground_contact[0]);
  CHECK(c.foot_ground_contact[1]);
  CHECK(c.effector_normal_force[kLeftFoot] > 0.0);
  CHECK(c.effector_normal_force[kRightFoot] > 0.0);
  CHECK(c.effector_normal_force[kHead] == doctest::Approx(0.0));
}

TEST_CASE("unsupported root falls and triggers the fall flag") {
  SimConfig cfg;
  PuppetState s = standing_state(cfg);
  // Lift everything well off the ground: no support, servo off.
  s.root_pos.z = 2.0;
  for (auto& p : s.effector_pos) p.z += 1.2;
  std::vector<SceneObject> objs;
  bool fell = false;
  for (int i = 0; i < 500 && !fell; ++i) {
    step(s, objs, zero_action(), cfg);
    fell = s.fallen;
  }
  CHECK(fell);
}

TEST_CASE("step rejects non-finite and terminal inputs") {
  SimConfig cfg;
  std::vector<SceneObject> objs;
  PuppetState bad = standing_state(cfg);
  bad.root_pos.x = std::nan("");
  CHECK_THROWS_AS(step(bad, objs, zero_action(), cfg), std::invalid_argument);

  PuppetState fallen = standing_state(cfg);
  fallen.fallen = true;
  CHECK_THROWS_AS(step(fallen, objs, zero_action(), cfg), std::invalid_argument);

  PuppetState ok = standing_state(cfg);
  LowLevelAction act;
  act.root_force_x = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(step(ok, objs, act, cfg), std::invalid_argument);
}

TEST_CASE("action bounds clamp") {
  double raw[18];
  for (double& v : raw) v = 10.0;
  LowLevelAction act = LowLevelAction::from_normalized(raw);
  for (const auto& f : act.effector_force) {
    CHECK(std::abs(f.x) <= LowLevelAction::kEffectorForceLimit);
    CHECK(std::abs(f.z) <= LowLevelAction::kEffectorForceLimit);
  }
  CHECK(std::abs(act.root_force_x) <= LowLevelAction::kRootForceLimit);
  CHECK(std::abs(act.root_yaw_torque) <= LowLevelAction::kYawTorqueLimit);
}

TEST_CASE("hand force pushes a box and reports contact force") {
  SimConfig cfg;
  PuppetState s = standing_state(cfg);
  std::vector<SceneObject> objs(1);
  auto& box = objs[0];
  box.shape = ShapeKind::kBox;
  box.half_extents = {0.2, 0.25, 0.5};  // tall enough to meet the raised hand
  box.mass = 2.0;
  box.friction = 0.3;
  // Just in front of the right hand.
  box.pos = {s.effector_pos[kRightHand].x + 0.2 + cfg.effector_radius + 0.24,
             s.effector_pos[kRightHand].y, 0.5};
  double x0 = box.pos.x;

  LowLevelAction act;
  act.effector_force[kRightHand] = {80, 0, 0};
  double max_force = 0.0;
  for (int i = 0; i < 150; ++i) {
    if (s.fallen) break;
    ContactReport c = step(s, objs, act, cfg);
    max_force = std::max(max_force, c.object_normal_force.at(0));
  }
  CHECK(objs[0].pos.x > x0 + 0.02);  // box moved forward
  CHECK(max_force > 1.0);            // robot force was reported
  CHECK(objs[0].contact_force >= 0.0);
}

TEST_CASE("pd_action: zero setpoints hold the standing pose") {
  SimConfig cfg;
  PuppetState s = standing_state(cfg);
  std::vector<SceneObject> objs;
  std::array<double, 18> a{};
  for (int i = 0; i < 150; ++i) {  // 3 s
    LowLevelAction act = pd_action(s, cfg, a.data());
    CHECK(act.finite());
    step(s, objs, act, cfg);
  }
  CHECK(!s.fallen);
  // Every effector stays near its standing offset.
  for (int i = 0; i < kNumEffectors; ++i) {
    double d = (s.effector_pos[i] - (s.root_pos + cfg.stand_offset[i])).norm();
    CHECK(d < 0.08);
  }
  CHECK(s.root_lin_vel.norm() < 0.1);
}

TEST_CASE("pd_action: root velocity setpoint drives the root forward") {
  SimConfig cfg;
  PuppetState s = standing_state(cfg);
  std::vector<SceneObject> objs;
  std::array<double, 18> a{};
  a[15] = 0.5;  // command forward root velocity
  for (int i = 0; i < 100 && !s.fallen; ++i) step(s, objs, pd_action(s, cfg, a.data()), cfg);
  CHECK(s.root_pos.x > 0.3);
  CHECK(std::abs(s.root_pos.y) < 0.1);
}

TEST_CASE("pd_action: targets are norm-clamped inside the reach sphere") {
  SimConfig cfg;
  PuppetState s = standing_state(cfg);
  std::array<double, 18> a{};
  a[3] = a[4] = a[5] = 1.0;  // saturated left-hand target
  LowLevelAction act = pd_action(s, cfg, a.data());
  // The implied target stays within reach: back out target from the PD law.
  Vec3 f = act.effector_force[kLeftHand];
  // Force may clamp; just require finiteness and bound compliance here.
  CHECK(act.finite());
  CHECK(std::abs(f.x) <= LowLevelAction::kEffectorForceLimit);
}

TEST_CASE("ground friction eventually stops a sliding box") {
  SimConfig cfg;
  std::vector<SceneObject> objs(1);
  auto& box = objs[0];
  box.half_extents = {0.2, 0.2, 0.2};
  box.mass = 1.0;
  box.friction = 0.8;
  box.pos = {5, 0, 0.2};
  box.vel = {2.0, 0, 0};
  PuppetState s = standing_state(cfg);  // far from the box
  for (int i = 0; i < 500; ++i) step(s, objs, zero_action(), cfg);
  CHECK(objs[0].vel.norm() < 0.05);
  CHECK(objs[0].pos.x > 5.0);  // slid forward, then stopped
  CHECK(objs[0].pos.z == doctest::Approx(0.2).epsilon(0.1));
}

TEST_CASE("effectors are projected back inside their reach") {
  SimConfig cfg;
  PuppetState s = standing_state(cfg);
  std::vector<SceneObject> objs;
  LowLevelAction act;
  act.effector_force[kRightHand] = {100, 0, 100};  // drag the hand away hard
  for (int i = 0; i < 100 && !s.fallen; ++i) {
    step(s, objs, act, cfg);
    Vec3 center = s.root_pos + yaw_rotate(s.root_yaw, cfg.anchor[kRightHand]);
    double d = (s.effector_pos[kRightHand] - center).norm();
    CHECK(d <= cfg.reach[kRightHand] + 1e-9);
  }
}

TEST_CASE("reset samples objects inside spec ranges without overlap") {
  SimConfig cfg;
  auto scene = tasks::make_scene(TaskId::kPushBox);
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<SceneObject> objs;
    PuppetState s = reset(scene, rng, cfg, objs);
    REQUIRE(objs.size() == 1);
    const auto& spec = scene.objects[0];
    const auto& obj = objs[0];
    CHECK(obj.friction >= spec.friction_lo);
    CHECK(obj.friction <= spec.friction_hi);
    CHECK(obj.pos.x >= spec.pos_lo.x - 1e-12);
    CHECK(obj.pos.x <= spec.pos_hi.x + 1e-12);
    CHECK(obj.yaw >= spec.yaw_lo - 1e-12);
    CHECK(obj.yaw <= spec.yaw_hi + 1e-12);
    CHECK(obj.bottom_z() == doctest::Approx(0.0).epsilon(1e-6));
    // Robot never spawns inside the object.
    CHECK((obj.pos - s.root_pos).norm_xy() >
          obj.bounding_radius() + cfg.root_radius);
    CHECK(!s.fallen);
  }
}

TEST_CASE("determinism: identical seeds give identical trajectories") {
  SimConfig cfg;
  auto scene = tasks::make_scene(TaskId::kKickBall);
  Rng r1(99), r2(99);
  std::vector<SceneObject> o1, o2;
  PuppetState s1 = reset(scene, r1, cfg, o1);
  PuppetState s2 = reset(scene, r2, cfg, o2);
  LowLevelAction act;
  act.effector_force[kLeftFoot] = {30, 5, 0};
  for (int i = 0; i < 50; ++i) {
    step(s1, o1, act, cfg);
    step(s2, o2, act, cfg);
  }
  CHECK(s1.root_pos.x == s2.root_pos.x);
  CHECK(s1.effector_pos[kLeftFoot].y == s2.effector_pos[kLeftFoot].y);
  CHECK(o1[0].pos.x == o2[0].pos.x);
  CHECK(o1[0].vel.y == o2[0].vel.y);
}

TEST_CASE("state stays finite through vigorous random actions") {
  SimConfig cfg;
  Rng rng(3);
  auto scene = tasks::make_scene(TaskId::kKickBox);
  std::vector<SceneObject> objs;
  PuppetState s = reset(scene, rng, cfg, objs);
  for (int i = 0; i < 400; ++i) {
    if (s.fallen) break;
    double raw[18];
    for (double& v : raw) v = rng.uniform(-1, 1);
    LowLevelAction act = LowLevelAction::from_normalized(raw);
    step(s, objs, act, cfg);
    CHECK(s.finite());
    CHECK(objs[0].finite());
  }
}
