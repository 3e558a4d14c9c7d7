// Acceptance gate, fast group: criteria 1-8, 12, 13.
// Each criterion prints exactly one [PASS]/[FAIL] line with its pinned
// tolerance; the exit code is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "keyloco/depth/render.hpp"
#include "keyloco/hms/guard.hpp"
#include "keyloco/motion/reference.hpp"
#include "keyloco/nn/checkpoint.hpp"
#include "keyloco/nn/conv.hpp"
#include "keyloco/nn/mlp.hpp"
#include "keyloco/pipeline/config.hpp"
#include "keyloco/pipeline/stages.hpp"
#include "keyloco/reward/terms.hpp"
#include "keyloco/rl/gae.hpp"
#include "keyloco/rng.hpp"
#include "keyloco/sim/world.hpp"

using namespace keyloco;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& what) {
  std::printf("[%s] criterion-%d %s\n", ok ? "PASS" : "FAIL", criterion, what.c_str());
  if (!ok) ++g_failures;
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b);
  return buf;
}

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

// ---------------------------------------------------------------- criterion 1
// Reward terms vs. independently written closed forms, 1000 random inputs
// per term, max relative error < 1e-9.
void criterion1() {
  Rng rng(101);
  reward::RewardConfig rc;
  rc.f_des = 30.0;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double d1 = rng.uniform(0, 20), d2 = rng.uniform(0, 20);
    // approach: e^{-0.1 d}; pair: harmonic mean of the two singles.
    worst = std::max(worst, rel_err(reward::r_approach_single(d1, rc),
                                    std::exp(-0.1 * d1)));
    double ea = std::exp(-0.1 * d1), eb = std::exp(-0.1 * d2);
    worst = std::max(worst, rel_err(reward::r_approach_pair(d1, d2, rc),
                                    2.0 * ea * eb / (ea + eb)));
    // forward: tanh(10 * max(0, x - running max)), then the max updates.
    reward::RunningExtrema ex;
    double x0 = rng.uniform(-2, 2), x1 = x0 + rng.uniform(-1, 1);
    ex.reset(x0, 0.0);
    double expect = std::tanh(10.0 * std::max(0.0, x1 - x0));
    worst = std::max(worst, rel_err(reward::r_forward(x1, ex, rc), expect));
    // force: e^{-0.1 * max(0, F_des - F)}.
    double f = rng.uniform(0, 60);
    worst = std::max(worst, rel_err(reward::r_force(f, rc.f_des, rc),
                                    std::exp(-0.1 * std::max(0.0, 30.0 - f))));
    // look: -(angle between unit vectors)^2.
    Vec3 a{rng.normal(), rng.normal(), rng.normal()};
    Vec3 b{rng.normal(), rng.normal(), rng.normal()};
    if (a.norm() > 1e-6 && b.norm() > 1e-6) {
      double c = a.dot(b) / (a.norm() * b.norm());
      c = clamp(c, -1.0, 1.0);
      worst = std::max(worst, rel_err(reward::r_look(a, b), -sq(std::acos(c))));
    }
    // drift: -tanh(10 * max(0, |y| - running max |y|)).
    reward::RunningExtrema ey;
    double y0 = rng.uniform(-2, 2), y1 = rng.uniform(-3, 3);
    ey.reset(0.0, y0);
    double dex = std::max(0.0, std::abs(y1) - std::abs(y0));
    worst = std::max(worst, rel_err(reward::r_drift(y1, ey, rc), -std::tanh(10.0 * dex)));
  }
  report(1, worst < 1e-9,
         fmt("reward formulas vs closed-form oracles (max rel err %.2e, tol 1e-9)", worst));
}

// ---------------------------------------------------------------- criterion 2
// Keypoint command vs brute force on 1e4 random frame pairs at 1e-12, plus
// exact translation invariance.
void criterion2() {
  Rng rng(202);
  double worst = 0.0;
  bool invariant = true;
  for (int trial = 0; trial < 10000; ++trial) {
    motion::RefFrame ref;
    sim::PuppetState cur;
    ref.root_pos = {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0.3, 1.2)};
    cur.root_pos = {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0.3, 1.2)};
    for (int i = 0; i < kNumEffectors; ++i) {
      ref.effector_pos[i] = ref.root_pos +
          Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      cur.effector_pos[i] = cur.root_pos +
          Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    }
    auto cmd = motion::keypoint_command(ref, cur).flatten();
    // Brute-force re-derivation, written independently of the library.
    double oracle[kCommandDim];
    oracle[0] = ref.root_pos.x - cur.root_pos.x;
    oracle[1] = ref.root_pos.y - cur.root_pos.y;
    oracle[2] = ref.root_pos.z - cur.root_pos.z;
    for (int i = 0; i < kNumEffectors; ++i) {
      Vec3 r = ref.effector_pos[i] - ref.root_pos;
      Vec3 c = cur.effector_pos[i] - cur.root_pos;
      oracle[3 + 3 * i + 0] = r.x - c.x;
      oracle[3 + 3 * i + 1] = r.y - c.y;
      oracle[3 + 3 * i + 2] = r.z - c.z;
    }
    for (int j = 0; j < kCommandDim; ++j)
      worst = std::max(worst, std::abs(cmd[j] - oracle[j]));

    // Translating both frames by the same offset leaves the command intact.
    if (trial < 500) {
      Vec3 t{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-1, 1)};
      motion::RefFrame ref2 = ref;
      sim::PuppetState cur2 = cur;
      ref2.root_pos += t;
      cur2.root_pos += t;
      for (int i = 0; i < kNumEffectors; ++i) {
        ref2.effector_pos[i] += t;
        cur2.effector_pos[i] += t;
      }
      auto cmd2 = motion::keypoint_command(ref2, cur2).flatten();
      for (int j = 0; j < kCommandDim; ++j)
        if (std::abs(cmd2[j] - cmd[j]) > 1e-12) invariant = false;
    }
  }
  report(2, worst <= 1e-12 && invariant,
         fmt("keypoint command vs brute force (max abs err %.2e, tol 1e-12; "
             "translation invariance ", worst) +
             (invariant ? "holds)" : "VIOLATED)"));
}

// ---------------------------------------------------------------- criterion 3
// Analytic gradients vs central differences (double precision, step 1e-4) on
// 10 random small nets; max relative error < 1e-4 and runtime < 30 s.
void criterion3() {
  auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  Rng rng(303);

  // 8 random MLPs.
  for (int net = 0; net < 8; ++net) {
    std::vector<int> dims{2 + static_cast<int>(rng.uniform(0, 4)),
                          3 + static_cast<int>(rng.uniform(0, 5)),
                          1 + static_cast<int>(rng.uniform(0, 3))};
    nn::Mlp<double> mlp(dims);
    mlp.init(rng);
    std::vector<double> x(dims[0]);
    for (auto& v : x) v = rng.uniform(-1, 1);
    std::vector<double> dy(dims.back());
    for (auto& v : dy) v = rng.uniform(-1, 1);

    nn::Mlp<double>::Cache cache;
    auto grads = mlp.make_grads();
    mlp.forward(x.data(), cache);
    mlp.backward(cache, dy, grads);
    auto views = mlp.params(&grads);

    auto loss = [&]() {
      auto y = mlp.forward(x);
      double s = 0;
      for (size_t i = 0; i < y.size(); ++i) s += dy[i] * y[i];
      return s;
    };
    const double h = 1e-4;
    for (auto& v : views) {
      for (size_t i = 0; i < v.size(); ++i) {
        double keep = v.data[i];
        v.data[i] = keep + h;
        double lp = loss();
        v.data[i] = keep - h;
        double lm = loss();
        v.data[i] = keep;
        worst = std::max(worst, rel_err(v.grad[i], (lp - lm) / (2 * h)));
      }
    }
  }

  // 2 DepthEncoder probes (fixed topology; random params, sampled entries).
  for (int net = 0; net < 2; ++net) {
    nn::DepthEncoder<double> enc;
    enc.init(rng);
    std::vector<double> img(nn::DepthEncoder<double>::kWidth *
                            nn::DepthEncoder<double>::kHeight);
    for (auto& v : img) v = rng.uniform(0, 1);
    std::vector<double> dfeat(nn::DepthEncoder<double>::kFeatures);
    for (auto& v : dfeat) v = rng.uniform(-1, 1);

    nn::DepthEncoder<double>::Cache cache;
    auto grads = enc.make_grads();
    enc.forward(img.data(), cache);
    enc.backward(cache, dfeat, grads);
    auto views = enc.params(&grads);

    auto loss = [&]() {
      nn::DepthEncoder<double>::Cache c;
      const auto& f = enc.forward(img.data(), c);
      double s = 0;
      for (size_t i = 0; i < f.size(); ++i) s += dfeat[i] * f[i];
      return s;
    };
    const double h = 1e-4;
    for (auto& v : views) {
      size_t stride = std::max<size_t>(1, v.size() / 5);  // 5 probes per tensor
      for (size_t i = 0; i < v.size(); i += stride) {
        double keep = v.data[i];
        v.data[i] = keep + h;
        double lp = loss();
        v.data[i] = keep - h;
        double lm = loss();
        v.data[i] = keep;
        worst = std::max(worst, rel_err(v.grad[i], (lp - lm) / (2 * h)));
      }
    }
  }

  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(3, worst < 1e-4 && secs < 30.0,
         fmt("MLP/DepthEncoder gradcheck vs central differences "
             "(max rel err %.2e, tol 1e-4; %.1f s, budget 30 s)", worst, secs));
}

// ---------------------------------------------------------------- criterion 4
// GAE: 3-step hand fixture exact; gamma=0 collapse to r - V on random data.
void criterion4() {
  // Hand-computed with gamma=0.9, lambda=0.8, bootstrap 2.0:
  //   delta_2 = 1.0 + 0.9*2.0 - 0.3        = 2.50         A_2 = 2.50
  //   delta_1 = 0.5 + 0.9*0.3 - 0.2        = 0.57         A_1 = 0.57 + 0.72*2.50 = 2.37
  //   delta_0 = -1.0 + 0.9*0.2 - 0.1       = -0.92        A_0 = -0.92 + 0.72*2.37 = 0.7864
  auto g = rl::compute_gae({-1.0, 0.5, 1.0}, {0.1, 0.2, 0.3}, {0, 0, 0}, 2.0, 0.9, 0.8);
  double fixture_err = std::max({std::abs(g.advantages[0] - 0.7864),
                                 std::abs(g.advantages[1] - 2.37),
                                 std::abs(g.advantages[2] - 2.50)});
  for (int t = 0; t < 3; ++t)
    fixture_err = std::max(fixture_err,
                           std::abs(g.returns[t] - (g.advantages[t] + std::vector<double>{0.1, 0.2, 0.3}[t])));

  Rng rng(404);
  double collapse_err = 0.0;
  for (int trial = 0; trial < 64; ++trial) {
    int n = 4 + static_cast<int>(rng.uniform(0, 12));
    std::vector<double> r(n), v(n);
    std::vector<uint8_t> d(n, 0);
    for (int i = 0; i < n; ++i) {
      r[i] = rng.normal();
      v[i] = rng.normal();
      d[i] = rng.uniform(0, 1) < 0.2 ? 1 : 0;
    }
    auto z = rl::compute_gae(r, v, d, rng.normal(), 0.0, rng.uniform(0, 1));
    for (int i = 0; i < n; ++i)
      collapse_err = std::max(collapse_err, std::abs(z.advantages[i] - (r[i] - v[i])));
  }
  report(4, fixture_err <= 1e-12 && collapse_err <= 1e-12,
         fmt("GAE hand fixture and gamma=0 collapse "
             "(fixture err %.2e, collapse err %.2e, tol 1e-12)", fixture_err, collapse_err));
}

// ---------------------------------------------------------------- criterion 5
// HMS clipping: 1e6 standard-normal draws per dimension; in-bounds fraction
// 0.899 +/- 0.003; clipping is exactly idempotent.
void criterion5() {
  Rng rng(505);
  hms::NormalizerStats stats(kCommandDim);
  std::vector<double> sample(kCommandDim);
  for (int i = 0; i < 200000; ++i) {
    for (auto& v : sample) v = rng.normal();
    stats.update(sample.data());
  }
  hms::HmsBounds bounds(stats);

  long long in = 0, total = 0;
  bool idempotent = true;
  std::vector<double> clipped(kCommandDim), twice(kCommandDim);
  for (int i = 0; i < 1000000 / kCommandDim + 1; ++i) {
    for (auto& v : sample) v = rng.normal();
    for (int j = 0; j < kCommandDim; ++j) {
      ++total;
      if (sample[j] >= bounds.lower[j] && sample[j] <= bounds.upper[j]) ++in;
    }
    clipped = sample;
    hms::clip_to_hms(clipped.data(), bounds);
    twice = clipped;
    hms::clip_to_hms(twice.data(), bounds);
    if (std::memcmp(clipped.data(), twice.data(), sizeof(double) * kCommandDim) != 0)
      idempotent = false;
    for (int j = 0; j < kCommandDim; ++j)
      if (clipped[j] < bounds.lower[j] || clipped[j] > bounds.upper[j]) idempotent = false;
  }
  double frac = static_cast<double>(in) / total;
  report(5, std::abs(frac - 0.899) <= 0.003 && idempotent,
         fmt("HMS clip in-bounds fraction %.4f (target 0.899 +/- 0.003), "
             "idempotence ", frac) + (idempotent ? "exact" : "VIOLATED"));
}

// ---------------------------------------------------------------- criterion 6
// Noise multiplier: 1e6 draws; mean 1.000 +/- 0.005; support within [0.5, 1.5].
void criterion6() {
  Rng rng(606);
  motion::KeypointCommand ones;
  ones.delta_root = {1, 1, 1};
  for (auto& v : ones.delta_kp) v = {1, 1, 1};
  double sum = 0.0;
  long long n = 0;
  bool support_ok = true;
  for (int i = 0; i < 1000000 / kCommandDim + 1; ++i) {
    auto noisy = hms::inject_noise(ones, rng).flatten();
    for (double v : noisy) {
      sum += v;
      ++n;
      if (v < 0.5 || v > 1.5) support_ok = false;
    }
  }
  double mean = sum / n;
  report(6, std::abs(mean - 1.0) <= 0.005 && support_ok,
         fmt("noise multiplier mean %.4f (target 1.000 +/- 0.005), support in "
             "[0.5, 1.5] ", mean) + (support_ok ? "exact" : "VIOLATED"));
}

// ---------------------------------------------------------------- criterion 7
// Mask statistics over 1e5 frames: corner frequency 0.200 +/- 0.010; per-slot
// rectangle frequency 0.100 +/- 0.010; rect geometry <= 30x30; fills in
// [0, 1]; camera perturbations within +/- 5 degrees.
void criterion7() {
  depth::DepthImage base;
  for (auto& v : base.px) v = 0.5f;

  // Corner frequency with rectangles disabled: a frame counts when the
  // bottom-left block is fully white.
  depth::MaskAugmentConfig corner_cfg;
  corner_cfg.p_rect = 0.0;
  Rng rng(707);
  int corner_hits = 0;
  const int kFrames = 100000;
  for (int i = 0; i < kFrames; ++i) {
    auto out = depth::augment_depth(base, corner_cfg, rng);
    bool all_white = true;
    for (int x = 0; x < corner_cfg.corner_w && all_white; ++x)
      for (int y = depth::DepthImage::kHeight - corner_cfg.corner_h;
           y < depth::DepthImage::kHeight; ++y)
        if (out.at(x, y) != 1.0f) { all_white = false; break; }
    if (all_white) ++corner_hits;
  }
  double corner_freq = static_cast<double>(corner_hits) / kFrames;

  // Per-slot frequency via the untouched-frame rate: with the corner off,
  // P(frame unchanged) = (1 - p)^slots; a uniform fill of exactly 0.5 has
  // probability zero.
  depth::MaskAugmentConfig rect_cfg;
  rect_cfg.p_corner = 0.0;
  int untouched = 0;
  for (int i = 0; i < kFrames; ++i) {
    auto out = depth::augment_depth(base, rect_cfg, rng);
    if (std::memcmp(out.px.data(), base.px.data(), sizeof(float) * base.px.size()) == 0)
      ++untouched;
  }
  double p_slot = 1.0 - std::pow(static_cast<double>(untouched) / kFrames,
                                 1.0 / rect_cfg.rect_slots);

  // Geometry and fill legality: one slot, always on; the changed-pixel
  // bounding box is the rectangle itself.
  depth::MaskAugmentConfig one_cfg;
  one_cfg.p_corner = 0.0;
  one_cfg.p_rect = 1.0;
  one_cfg.rect_slots = 1;
  bool geometry_ok = true, fills_ok = true;
  for (int i = 0; i < 2000; ++i) {
    auto out = depth::augment_depth(base, one_cfg, rng);
    int x0 = depth::DepthImage::kWidth, x1 = -1, y0 = depth::DepthImage::kHeight, y1 = -1;
    for (int y = 0; y < depth::DepthImage::kHeight; ++y)
      for (int x = 0; x < depth::DepthImage::kWidth; ++x)
        if (out.at(x, y) != 0.5f) {
          x0 = std::min(x0, x); x1 = std::max(x1, x);
          y0 = std::min(y0, y); y1 = std::max(y1, y);
          if (out.at(x, y) < 0.0f || out.at(x, y) > 1.0f) fills_ok = false;
        }
    if (x1 >= 0 && (x1 - x0 + 1 > one_cfg.rect_max || y1 - y0 + 1 > one_cfg.rect_max))
      geometry_ok = false;
  }

  // Camera perturbation support.
  bool camera_ok = true;
  depth::CameraSpec cam;
  const double kMaxRad = 5.0 * M_PI / 180.0;
  for (int i = 0; i < 100000; ++i) {
    auto p = depth::perturb_camera(cam, rng);
    if (std::abs(p.pitch_perturb) > kMaxRad || std::abs(p.yaw_perturb) > kMaxRad ||
        p.base_pitch != cam.base_pitch)
      camera_ok = false;
  }

  bool ok = std::abs(corner_freq - 0.200) <= 0.010 &&
            std::abs(p_slot - 0.100) <= 0.010 && geometry_ok && fills_ok && camera_ok;
  report(7, ok,
         fmt("mask stats: corner %.3f (0.200 +/- 0.010), per-slot %.3f "
             "(0.100 +/- 0.010), ", corner_freq, p_slot) +
             std::string(geometry_ok ? "rects <= 30x30, " : "RECT GEOMETRY VIOLATED, ") +
             std::string(fills_ok ? "fills in [0,1], " : "FILLS VIOLATED, ") +
             std::string(camera_ok ? "camera within +/- 5 deg" : "CAMERA VIOLATED"));
}

// ---------------------------------------------------------------- criterion 8
// Renderer: five analytic fixtures within 1e-6 (normalized depth).
void criterion8() {
  auto focal = (depth::DepthImage::kWidth / 2.0) / std::tan(87.0 * M_PI / 180.0 / 2.0);
  auto level_ray = [&](int x, int y) {
    double cx = (x + 0.5 - depth::DepthImage::kWidth / 2.0) / focal;
    double cy = (y + 0.5 - depth::DepthImage::kHeight / 2.0) / focal;
    return Vec3{1.0, -cx, -cy}.normalized();
  };
  sim::PuppetState state;
  state.root_pos = {0, 0, 0.8};
  depth::CameraSpec cam;
  cam.base_pitch = 0.0;
  Vec3 origin = state.root_pos + Vec3{0.05, 0.0, 0.55};
  double worst = 0.0;

  // 1: sky at the far clip.
  {
    auto img = depth::render_depth(state, {}, cam);
    for (int x = 0; x < 80; x += 7)
      for (int y = 0; y < 22; y += 5)
        worst = std::max(worst, std::abs(static_cast<double>(img.at(x, y)) - 1.0));
  }
  // 2: ground plane at h*|d|/(-dz).
  {
    auto img = depth::render_depth(state, {}, cam);
    for (int x : {0, 17, 40, 79})
      for (int y : {30, 38, 44}) {
        Vec3 d = level_ray(x, y);
        double t = origin.z / (-d.z);
        double expect = depth::DepthImage::normalize(std::min(t, depth::DepthImage::kFarClip));
        worst = std::max(worst, std::abs(img.at(x, y) - expect));
      }
  }
  // 3: sphere centered on a pixel ray reads D - r.
  {
    Vec3 dir = level_ray(47, 20);
    sim::SceneObject ball;
    ball.shape = sim::ShapeKind::kSphere;
    ball.radius = 0.3;
    ball.pos = origin + dir * 2.3;
    auto img = depth::render_depth(state, {ball}, cam);
    worst = std::max(worst, static_cast<double>(std::abs(img.at(47, 20) - depth::DepthImage::normalize(2.0))));
  }
  // 4: box front face at plane distance 2 / d.x (occludes ground and sky).
  {
    sim::SceneObject box;
    box.shape = sim::ShapeKind::kBox;
    box.half_extents = {0.5, 2.0, 2.0};
    box.pos = {origin.x + 2.5, 0.0, origin.z};
    auto img = depth::render_depth(state, {box}, cam);
    for (int x : {20, 40, 60})
      for (int y : {10, 22, 34}) {
        Vec3 d = level_ray(x, y);
        worst = std::max(worst,
                         static_cast<double>(std::abs(img.at(x, y) - depth::DepthImage::normalize(2.0 / d.x))));
      }
  }
  // 5: surface inside the near clip saturates at zero.
  {
    sim::SceneObject wall;
    wall.shape = sim::ShapeKind::kBox;
    wall.half_extents = {0.01, 3.0, 3.0};
    wall.pos = {origin.x + 0.15, 0.0, origin.z};
    auto img = depth::render_depth(state, {wall}, cam);
    for (int x : {10, 40, 70})
      worst = std::max(worst, static_cast<double>(std::abs(img.at(x, 22))));
  }
  report(8, worst <= 1e-6,
         fmt("renderer fixtures sphere/box/ground/sky/clip (max err %.2e, tol 1e-6)", worst));
}

// --------------------------------------------------------------- criterion 12
// Stage re-run with identical config+seed: byte-equal metrics CSV.
void criterion12() {
  auto slurp = [](const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  std::string out_a = (fs::temp_directory_path() / "keyloco_acc12_a").string();
  std::string out_b = (fs::temp_directory_path() / "keyloco_acc12_b").string();
  fs::remove_all(out_a);
  fs::remove_all(out_b);
  auto make_cfg = [](const std::string& out) {
    auto cfg = pipeline::PipelineConfig::from_json_text(R"({
      "seed": 17,
      "ppo_tracker": {"num_envs": 4, "horizon": 16, "hidden": 16, "total_env_steps": 256},
      "ppo_task": {"num_envs": 2, "horizon": 16, "hidden": 16, "total_env_steps": 128},
      "distill_tracker": {"iterations": 2, "steps_per_iteration": 64,
                           "batch_size": 32, "capacity": 4096},
      "stage1": {"eval_motions": 2, "eval_interval": 50},
      "task": {"episode_length": 1.0},
      "eval": {"rollouts": 2, "seeds": 1}
    })");
    cfg.out_dir = out;
    return cfg;
  };
  bool ok = true;
  std::string detail;
  try {
    auto ca = make_cfg(out_a);
    auto cb = make_cfg(out_b);
    auto s1a = pipeline::train_motion_teacher(ca);
    auto s1b = pipeline::train_motion_teacher(cb);
    if (slurp(s1a.log_csv) != slurp(s1b.log_csv)) { ok = false; detail += " stage1-log-diff"; }
    auto s2a = pipeline::distill_keypoint_tracker(ca, s1a.checkpoint);
    auto s2b = pipeline::distill_keypoint_tracker(cb, s1b.checkpoint);
    if (slurp(s2a.log_csv) != slurp(s2b.log_csv)) { ok = false; detail += " stage2-log-diff"; }
    auto s3a = pipeline::train_task_teacher(ca, s2a.checkpoint);
    auto s3b = pipeline::train_task_teacher(cb, s2b.checkpoint);
    auto eva = pipeline::evaluate_checkpoint(ca, s3a.checkpoint, s2a.checkpoint);
    auto evb = pipeline::evaluate_checkpoint(cb, s3b.checkpoint, s2b.checkpoint);
    if (slurp(eva.csv_path) != slurp(evb.csv_path)) { ok = false; detail += " eval-csv-diff"; }
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string(" exception: ") + e.what();
  }
  fs::remove_all(out_a);
  fs::remove_all(out_b);
  report(12, ok, "identical config+seed re-runs produce byte-equal metrics CSVs" +
                     (ok ? std::string() : " (" + detail + " )"));
}

// --------------------------------------------------------------- criterion 13
// Checkpoint round-trip: parameters and NormalizerStats bit-exact.
void criterion13() {
  std::string path = (fs::temp_directory_path() / "keyloco_acc13.ckpt").string();
  Rng rng(1313);
  nn::Mlp<float> net({9, 12, 5});
  net.init(rng);
  nn::Checkpoint ck;
  ck.kind = "acceptance";
  ck.add_params(net.params(nullptr, "net"));
  ck.stats = hms::NormalizerStats(kCommandDim);
  std::vector<double> x(kCommandDim);
  for (int i = 0; i < 1000; ++i) {
    for (auto& v : x) v = rng.normal() * 3.1 + 0.7;
    ck.stats.update(x.data());
  }
  ck.save(path);
  auto back = nn::Checkpoint::load(path);

  bool ok = back.kind == ck.kind;
  // Parameters: float payload bit-exact.
  auto orig_views = net.params(nullptr, "net");
  for (const auto& v : orig_views) {
    const auto& e = back.find(v.name);
    if (e.data.size() != v.size() ||
        std::memcmp(e.data.data(), v.data, v.size() * sizeof(float)) != 0)
      ok = false;
  }
  // Stats: u64/f64 payloads bit-exact.
  if (back.stats.dims.size() != ck.stats.dims.size()) ok = false;
  for (size_t j = 0; ok && j < ck.stats.dims.size(); ++j) {
    const auto& a = ck.stats.dims[j];
    const auto& b = back.stats.dims[j];
    if (a.n != b.n ||
        std::memcmp(&a.mean, &b.mean, sizeof(double)) != 0 ||
        std::memcmp(&a.m2, &b.m2, sizeof(double)) != 0)
      ok = false;
  }
  // Save-of-load is byte-identical.
  std::string path2 = path + ".2";
  back.save(path2);
  if (nn::file_hash(path) != nn::file_hash(path2)) ok = false;
  fs::remove(path);
  fs::remove(path2);
  report(13, ok, "checkpoint round-trip is bit-exact (params, stats, file hash)");
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion12();
  criterion13();
  if (g_failures) std::printf("%d criterion(s) FAILED\n", g_failures);
  return g_failures;
}
