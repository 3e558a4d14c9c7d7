#include "keyloco/pipeline/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace keyloco::pipeline {

using nlohmann::json;

namespace {

// Strict section reader: every key in `obj` must be consumed via get().
class Section {
 public:
  Section(const json& obj, std::string name) : obj_(obj), name_(std::move(name)) {
    if (!obj_.is_object())
      throw ConfigError("config: section '" + name_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config: bad value for '" + name_ + "." + key + "': " + e.what());
    }
  }

  const json* sub(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key()))
        throw ConfigError("config: unknown key '" + name_ + "." + it.key() + "'");
    }
  }

 private:
  const json& obj_;
  std::string name_;
  std::set<std::string> seen_;
};

void read_ppo(const json* j, const char* name, rl::PpoConfig& cfg) {
  if (!j) return;
  Section s(*j, name);
  s.get("gamma", cfg.gamma);
  s.get("gae_lambda", cfg.gae_lambda);
  s.get("clip_eps", cfg.clip_eps);
  s.get("epochs", cfg.epochs);
  s.get("minibatches", cfg.minibatches);
  s.get("value_coef", cfg.value_coef);
  s.get("entropy_coef", cfg.entropy_coef);
  s.get("horizon", cfg.horizon);
  s.get("num_envs", cfg.num_envs);
  s.get("total_env_steps", cfg.total_env_steps);
  s.get("lr", cfg.lr);
  s.get("max_grad_norm", cfg.max_grad_norm);
  s.get("hidden", cfg.hidden);
  s.get("init_std", cfg.init_std);
  s.finish();
}

void read_distill(const json* j, const char* name, distill::DistillConfig& cfg) {
  if (!j) return;
  Section s(*j, name);
  s.get("iterations", cfg.iterations);
  s.get("steps_per_iteration", cfg.steps_per_iteration);
  s.get("epochs", cfg.epochs);
  s.get("batch_size", cfg.batch_size);
  s.get("lr", cfg.lr);
  s.get("capacity", cfg.capacity);
  s.finish();
}

void read_sim(const json* j, sim::SimConfig& cfg) {
  if (!j) return;
  Section s(*j, "sim");
  s.get("dt_physics", cfg.dt_physics);
  s.get("substeps_per_control", cfg.substeps_per_control);
  s.get("gravity", cfg.gravity);
  s.get("contact_kp", cfg.contact_kp);
  s.get("contact_kd", cfg.contact_kd);
  s.get("contact_kt", cfg.contact_kt);
  s.get("ground_friction", cfg.ground_friction);
  s.get("rest_height", cfg.rest_height);
  s.get("fall_height", cfg.fall_height);
  s.finish();
}

void read_masks(const json* j, PipelineConfig& cfg) {
  if (!j) return;
  Section s(*j, "masks");
  s.get("p_corner", cfg.masks.p_corner);
  s.get("corner_w", cfg.masks.corner_w);
  s.get("corner_h", cfg.masks.corner_h);
  s.get("p_rect", cfg.masks.p_rect);
  s.get("rect_slots", cfg.masks.rect_slots);
  s.get("rect_max", cfg.masks.rect_max);
  s.get("single_gate", cfg.masks.single_gate);
  s.get("augment", cfg.augment_masks);
  s.get("perturb_camera", cfg.perturb_camera);
  s.finish();
}

}  // namespace

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }

  PipelineConfig cfg;
  Section root(j, "root");
  root.get("out_dir", cfg.out_dir);
  root.get("seed", cfg.seed);
  read_sim(root.sub("sim"), cfg.sim);
  read_ppo(root.sub("ppo_tracker"), "ppo_tracker", cfg.ppo_tracker);
  read_ppo(root.sub("ppo_task"), "ppo_task", cfg.ppo_task);
  read_distill(root.sub("distill_tracker"), "distill_tracker", cfg.distill_tracker);
  read_distill(root.sub("distill_vision"), "distill_vision", cfg.distill_vision);

  if (const json* m = root.sub("motion")) {
    Section s(*m, "motion");
    s.get("min_duration", cfg.motion_min_duration);
    s.get("max_duration", cfg.motion_max_duration);
    s.get("max_speed", cfg.motion_max_speed);
    s.get("max_heading", cfg.motion_max_heading);
    s.finish();
  }
  if (const json* h = root.sub("hms")) {
    Section s(*h, "hms");
    s.get("inject_noise", cfg.inject_noise);
    s.get("stats_on_raw", cfg.stats_on_raw);
    s.get("clip_commands", cfg.clip_commands);
    s.finish();
  }
  read_masks(root.sub("masks"), cfg);
  if (const json* t = root.sub("task")) {
    Section s(*t, "task");
    std::string name = task_name(cfg.task);
    s.get("name", name);
    try {
      cfg.task = task_from_name(name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    s.get("large_kick", cfg.large_kick);
    s.get("episode_length", cfg.episode_length);
    s.get("p_execute", cfg.p_execute);
    s.finish();
  }
  if (const json* r = root.sub("reward")) {
    Section s(*r, "reward");
    s.get("f_des", cfg.reward_f_des);
    s.get("w_forward", cfg.reward_w_forward);
    s.finish();
  }
  if (const json* g = root.sub("stage1")) {
    Section s(*g, "stage1");
    s.get("gate_error", cfg.stage1_gate_error);
    s.get("eval_motions", cfg.stage1_eval_motions);
    s.get("eval_interval", cfg.stage1_eval_interval);
    s.finish();
  }
  if (const json* e = root.sub("eval")) {
    Section s(*e, "eval");
    s.get("rollouts", cfg.eval_rollouts);
    s.get("seeds", cfg.eval_seeds);
    s.finish();
  }
  root.finish();

  if (cfg.episode_length <= 0 || cfg.p_execute < 0 || cfg.p_execute > 1)
    throw ConfigError("config: invalid task timing/probability");
  if (cfg.ppo_tracker.num_envs <= 0 || cfg.ppo_task.num_envs <= 0)
    throw ConfigError("config: num_envs must be positive");
  if (cfg.distill_tracker.capacity <= static_cast<size_t>(cfg.distill_tracker.batch_size) ||
      cfg.distill_vision.capacity <= static_cast<size_t>(cfg.distill_vision.batch_size))
    throw ConfigError("config: distill capacity must exceed batch size");
  return cfg;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json_text(ss.str());
}

std::string PipelineConfig::canonical_json() const {
  json j;
  j["out_dir"] = out_dir;
  j["seed"] = seed;
  j["sim"] = {{"dt_physics", sim.dt_physics},
              {"substeps_per_control", sim.substeps_per_control},
              {"gravity", sim.gravity},
              {"contact_kp", sim.contact_kp},
              {"contact_kd", sim.contact_kd},
              {"contact_kt", sim.contact_kt},
              {"ground_friction", sim.ground_friction},
              {"rest_height", sim.rest_height},
              {"fall_height", sim.fall_height}};
  auto ppo_json = [](const rl::PpoConfig& p) {
    return json{{"gamma", p.gamma},         {"gae_lambda", p.gae_lambda},
                {"clip_eps", p.clip_eps},   {"epochs", p.epochs},
                {"minibatches", p.minibatches}, {"value_coef", p.value_coef},
                {"entropy_coef", p.entropy_coef}, {"horizon", p.horizon},
                {"num_envs", p.num_envs},   {"total_env_steps", p.total_env_steps},
                {"lr", p.lr},               {"max_grad_norm", p.max_grad_norm},
                {"hidden", p.hidden},   {"init_std", p.init_std}};
  };
  j["ppo_tracker"] = ppo_json(ppo_tracker);
  j["ppo_task"] = ppo_json(ppo_task);
  auto distill_json = [](const distill::DistillConfig& d) {
    return json{{"iterations", d.iterations},
                {"steps_per_iteration", d.steps_per_iteration},
                {"epochs", d.epochs},
                {"batch_size", d.batch_size},
                {"lr", d.lr},
                {"capacity", d.capacity}};
  };
  j["distill_tracker"] = distill_json(distill_tracker);
  j["distill_vision"] = distill_json(distill_vision);
  j["motion"] = {{"min_duration", motion_min_duration},
                 {"max_duration", motion_max_duration},
                 {"max_speed", motion_max_speed},
                 {"max_heading", motion_max_heading}};
  j["hms"] = {{"inject_noise", inject_noise},
              {"stats_on_raw", stats_on_raw},
              {"clip_commands", clip_commands}};
  j["masks"] = {{"p_corner", masks.p_corner},   {"corner_w", masks.corner_w},
                {"corner_h", masks.corner_h},   {"p_rect", masks.p_rect},
                {"rect_slots", masks.rect_slots}, {"rect_max", masks.rect_max},
                {"single_gate", masks.single_gate}, {"augment", augment_masks},
                {"perturb_camera", perturb_camera}};
  j["task"] = {{"name", task_name(task)},
               {"large_kick", large_kick},
               {"episode_length", episode_length},
               {"p_execute", p_execute}};
  j["reward"] = {{"f_des", reward_f_des}, {"w_forward", reward_w_forward}};
  j["stage1"] = {{"gate_error", stage1_gate_error},
                 {"eval_motions", stage1_eval_motions},
                 {"eval_interval", stage1_eval_interval}};
  j["eval"] = {{"rollouts", eval_rollouts}, {"seeds", eval_seeds}};
  return j.dump(2);
}

uint64_t PipelineConfig::hash() const {
  std::string text = canonical_json();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace keyloco::pipeline
