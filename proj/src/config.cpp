#include "hierctl/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "hierctl/errors.hpp"

namespace hierctl {
namespace {

using nlohmann::json;

Vector to_vector(const json& j, const char* key) {
  if (!j.is_array()) {
    throw InputError(std::string(key) + " must be an array of numbers");
  }
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Eigen::Vector2d to_point(const json& j, const char* key) {
  const Vector v = to_vector(j, key);
  if (v.size() != 2) {
    throw InputError(std::string(key) + " must have two entries");
  }
  return v;
}

std::vector<Circle> to_obstacles(const json& j) {
  std::vector<Circle> out;
  for (const json& c : j) {
    const Vector v = to_vector(c, "obstacle");
    if (v.size() != 3) {
      throw InputError("obstacle must be [x, y, radius]");
    }
    out.push_back({Eigen::Vector2d(v(0), v(1)), v(2)});
  }
  return out;
}

void reject_unknown(const json& section, std::initializer_list<const char*> known, const char* where) {
  if (!section.is_object()) {
    throw InputError(std::string(where) + " must be an object");
  }
  for (auto it = section.begin(); it != section.end(); ++it) {
    bool ok = false;
    for (const char* k : known) {
      ok = ok || it.key() == k;
    }
    if (!ok) {
      throw InputError("unknown key '" + it.key() + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& section, const char* key, T& target) {
  if (section.contains(key)) {
    target = section.at(key).get<T>();
  }
}

Vector default_comfort(std::size_t dof) {
  Vector c = Vector::Constant(static_cast<Eigen::Index>(dof), -std::numbers::pi / 4.0);
  c(0) = std::numbers::pi / 4.0;
  return c;
}

std::vector<TraceScenario> default_trace_scenarios(const ChainParams& chain) {
  const Eigen::Index n = static_cast<Eigen::Index>(chain.dof());
  Vector start = Vector::Constant(n, 0.6);
  start(0) = 0.3;
  const double r = chain.reach();
  TraceScenario free{"free", start, Eigen::Vector2d(0.5 * r, 0.2 * r), {}};
  TraceScenario obstacle{"obstacle", start, Eigen::Vector2d(0.5 * r, 0.2 * r),
                         {{Eigen::Vector2d(0.3115 * r, 0.539 * r), 0.025 * r}}};
  return {free, obstacle};
}

void apply_chain(RunConfig& cfg, const json& j) {
  reject_unknown(j, {"preset", "link_lengths", "point_masses", "com_ratios", "joint_limit_deg", "gravity"},
                 "chain");
  if (j.contains("preset")) {
    const std::string name = j.at("preset").get<std::string>();
    cfg = default_run_config(name);
  }
  ChainParams& c = cfg.chain;
  read(j, "link_lengths", c.link_lengths);
  read(j, "point_masses", c.point_masses);
  read(j, "com_ratios", c.com_ratios);
  if (j.contains("gravity")) {
    c.gravity = to_point(j.at("gravity"), "gravity");
  }
  const std::size_t n = c.link_lengths.size();
  if (j.contains("joint_limit_deg")) {
    const double lim = j.at("joint_limit_deg").get<double>() * std::numbers::pi / 180.0;
    c.joint_limits.assign(n, JointLimit{-lim, lim});
  } else if (c.joint_limits.size() != n && !c.joint_limits.empty()) {
    c.joint_limits.assign(n, c.joint_limits.front());
  }
  if (c.com_ratios.size() != n && !j.contains("com_ratios")) {
    c.com_ratios.assign(n, 0.5);
  }
  c.validate();
}

}  // namespace

ChainParams chain_preset(const std::string& name) {
  if (name == "planar4") {
    return default_benchmark_chain();
  }
  if (name == "planar7") {
    return seven_dof_chain();
  }
  throw InputError("unknown chain preset '" + name + "' (planar4, planar7)");
}

std::vector<std::string> all_preset_names() {
  std::vector<std::string> out;
  for (const auto* list : {&hierarchy_presets(), &closed_form_presets()}) {
    for (const ControllerPreset& p : *list) {
      out.push_back(p.name);
    }
  }
  return out;
}

RunConfig default_run_config(const std::string& chain) {
  RunConfig cfg;
  cfg.chain_name = chain;
  cfg.chain = chain_preset(chain);
  const std::size_t n = cfg.chain.dof();
  cfg.comfort_config = default_comfort(n);
  cfg.benchmark.comfort_config = cfg.comfort_config;
  cfg.benchmark.kappa = cfg.tasks.kappa;
  for (const ControllerPreset& p : hierarchy_presets()) {
    cfg.presets.push_back(p.name);
  }
  cfg.trace_scenarios = default_trace_scenarios(cfg.chain);

  cfg.experiment_start_q = Vector::Constant(static_cast<Eigen::Index>(n), 0.6);
  cfg.experiment_start_q(0) = 0.3;
  const double r = cfg.chain.reach();
  cfg.experiment_goal = Eigen::Vector2d(0.4 * r, 0.4 * r);

  // nearly stretched, base joint close to its limit, obstacle beside the
  // arm: all four stack tasks start with a non-zero importance
  Vector perf_q = Vector::Constant(static_cast<Eigen::Index>(n), 0.006);
  perf_q(0) = 2.85;
  cfg.perf.start_q = perf_q;
  const Eigen::Vector2d along(std::cos(2.86), std::sin(2.86));
  const Eigen::Vector2d side(-along.y(), along.x());
  cfg.perf.goal = 0.6 * r * along - 0.2 * r * side;
  cfg.perf.obstacles = {{0.43 * r * along - 0.095 * r * side, 0.025 * r}};
  return cfg;
}

void RunConfig::validate() const {
  chain.validate();
  tasks.validate();
  const auto n = static_cast<Eigen::Index>(chain.dof());
  if (comfort_config.size() != n || benchmark.comfort_config.size() != n) {
    throw InputError("comfort configuration does not match the chain");
  }
  if (experiment_start_q.size() != n || perf.start_q.size() != n) {
    throw InputError("start configuration does not match the chain");
  }
  for (const TraceScenario& s : trace_scenarios) {
    if (s.start_q.size() != n) {
      throw InputError("trace scenario '" + s.name + "' does not match the chain");
    }
  }
  if (benchmark.scenarios == 0) {
    throw InputError("scenario count must be positive");
  }
  if (!(benchmark.duration > 0.0) || !(experiment_duration > 0.0) || !(trace_max_duration > 0.0)) {
    throw InputError("durations must be positive");
  }
  if (!(benchmark.integration.dt > 0.0) || !(experiment.dt > 0.0)) {
    throw InputError("time steps must be positive");
  }
  for (const std::string& p : presets) {
    if (!find_preset(p)) {
      throw InputError("unknown preset '" + p + "'");
    }
  }
  if (!find_preset(trace_preset)) {
    throw InputError("unknown trace preset '" + trace_preset + "'");
  }
  if (perf.cycles == 0 || perf.repeats == 0) {
    throw InputError("perf cycles and repeats must be positive");
  }
}

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg = default_run_config();
  try {
    reject_unknown(root, {"chain", "tasks", "world", "benchmark", "trace", "experiment", "perf", "output_dir"},
                   "config");
    if (root.contains("chain")) {
      apply_chain(cfg, root.at("chain"));
    }
    if (root.contains("tasks")) {
      const json& t = root.at("tasks");
      reject_unknown(t, {"xdot_max", "d_break", "jla_threshold", "coll_activation", "mnp_low", "mnp_high",
                         "kappa", "start_creep"},
                     "tasks");
      read(t, "xdot_max", cfg.tasks.xdot_max);
      read(t, "d_break", cfg.tasks.d_break);
      read(t, "jla_threshold", cfg.tasks.jla_threshold);
      read(t, "coll_activation", cfg.tasks.coll_activation);
      read(t, "mnp_low", cfg.tasks.mnp_low);
      read(t, "mnp_high", cfg.tasks.mnp_high);
      read(t, "kappa", cfg.tasks.kappa);
      read(t, "start_creep", cfg.tasks.start_creep);
      cfg.benchmark.kappa = cfg.tasks.kappa;
    }
    if (root.contains("world")) {
      const json& w = root.at("world");
      reject_unknown(w, {"comfort_config"}, "world");
      if (w.contains("comfort_config")) {
        cfg.comfort_config = to_vector(w.at("comfort_config"), "comfort_config");
        cfg.benchmark.comfort_config = cfg.comfort_config;
      }
    }
    if (root.contains("benchmark")) {
      const json& b = root.at("benchmark");
      reject_unknown(b, {"scenarios", "seed", "duration", "feedback_gain", "dt", "sample_interval",
                         "command_cap", "presets"},
                     "benchmark");
      read(b, "scenarios", cfg.benchmark.scenarios);
      read(b, "seed", cfg.benchmark.seed);
      read(b, "duration", cfg.benchmark.duration);
      read(b, "feedback_gain", cfg.benchmark.feedback_gain);
      read(b, "dt", cfg.benchmark.integration.dt);
      read(b, "sample_interval", cfg.benchmark.integration.sample_interval);
      read(b, "command_cap", cfg.benchmark.integration.command_cap);
      read(b, "presets", cfg.presets);
    }
    if (root.contains("trace")) {
      const json& t = root.at("trace");
      reject_unknown(t, {"scenario", "preset", "max_duration", "goal_tolerance", "scenarios"}, "trace");
      read(t, "scenario", cfg.trace_scenario);
      read(t, "preset", cfg.trace_preset);
      read(t, "max_duration", cfg.trace_max_duration);
      read(t, "goal_tolerance", cfg.trace_goal_tolerance);
      if (t.contains("scenarios")) {
        for (auto it = t.at("scenarios").begin(); it != t.at("scenarios").end(); ++it) {
          reject_unknown(*it, {"start_q", "goal", "obstacles"}, "trace scenario");
          TraceScenario s{it.key(), to_vector(it->at("start_q"), "start_q"), to_point(it->at("goal"), "goal"),
                          it->contains("obstacles") ? to_obstacles(it->at("obstacles")) : std::vector<Circle>{}};
          std::erase_if(cfg.trace_scenarios, [&](const TraceScenario& o) { return o.name == s.name; });
          cfg.trace_scenarios.push_back(std::move(s));
        }
      }
    }
    if (root.contains("experiment")) {
      const json& e = root.at("experiment");
      reject_unknown(e, {"start_q", "goal", "duration", "dt", "sample_interval"}, "experiment");
      if (e.contains("start_q")) {
        cfg.experiment_start_q = to_vector(e.at("start_q"), "start_q");
      }
      if (e.contains("goal")) {
        cfg.experiment_goal = to_point(e.at("goal"), "goal");
      }
      read(e, "duration", cfg.experiment_duration);
      read(e, "dt", cfg.experiment.dt);
      read(e, "sample_interval", cfg.experiment.sample_interval);
    }
    if (root.contains("perf")) {
      const json& p = root.at("perf");
      reject_unknown(p, {"cycles", "repeats", "start_q", "goal", "obstacles"}, "perf");
      read(p, "cycles", cfg.perf.cycles);
      read(p, "repeats", cfg.perf.repeats);
      if (p.contains("start_q")) {
        cfg.perf.start_q = to_vector(p.at("start_q"), "start_q");
      }
      if (p.contains("goal")) {
        cfg.perf.goal = to_point(p.at("goal"), "goal");
      }
      if (p.contains("obstacles")) {
        cfg.perf.obstacles = to_obstacles(p.at("obstacles"));
      }
    }
    read(root, "output_dir", cfg.output_dir);
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid config value: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read config file " + path);
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

TraceScenario resolve_trace_scenario(const RunConfig& config, const std::string& id) {
  for (const TraceScenario& s : config.trace_scenarios) {
    if (s.name == id) {
      return s;
    }
  }
  std::size_t index = 0;
  const auto [end, ec] = std::from_chars(id.data(), id.data() + id.size(), index);
  if (ec != std::errc() || end != id.data() + id.size()) {
    throw InputError("unknown trace scenario '" + id + "'");
  }
  const std::vector<Scenario> sampled = sample_scenarios(config.chain, index + 1, config.benchmark.seed);
  const Scenario& s = sampled.back();
  return {id, s.start_q, s.goal, {}};
}

}  // namespace hierctl
