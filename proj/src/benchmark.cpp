#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "hierctl/errors.hpp"
#include "hierctl/simulation.hpp"

namespace hierctl {
namespace {

constexpr double kLimitShrink = 0.1;
constexpr double kInnerRadius = 0.1;
constexpr double kOuterRadius = 0.8;
constexpr double kMinTravel = 0.2;
constexpr int kMaxGoalDraws = 100000;

// 53 random bits mapped to [0, 1); the std distributions are not
// reproducible across standard libraries.
double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& gen, double lo, double hi) { return lo + (hi - lo) * uniform01(gen); }

}  // namespace

std::vector<Scenario> sample_scenarios(const ChainParams& chain, std::size_t count, std::uint64_t seed) {
  chain.validate();
  std::mt19937_64 gen(seed);
  const double reach = chain.reach();
  std::vector<Scenario> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    Scenario sc;
    sc.index = s;
    sc.start_q.resize(static_cast<Eigen::Index>(chain.dof()));
    for (std::size_t i = 0; i < chain.dof(); ++i) {
      const JointLimit lim = chain.joint_limits[i];
      const double margin = kLimitShrink * 0.5 * (lim.upper - lim.lower);
      sc.start_q(static_cast<Eigen::Index>(i)) = uniform(gen, lim.lower + margin, lim.upper - margin);
    }
    const Eigen::Vector2d x0 = forward_kinematics(chain, sc.start_q);
    bool found = false;
    for (int draw = 0; draw < kMaxGoalDraws && !found; ++draw) {
      const Eigen::Vector2d g(uniform(gen, -kOuterRadius, kOuterRadius) * reach,
                              uniform(gen, -kOuterRadius, kOuterRadius) * reach);
      const double r = g.norm();
      if (r >= kInnerRadius * reach && r <= kOuterRadius * reach && (g - x0).norm() >= kMinTravel * reach) {
        sc.goal = g;
        found = true;
      }
    }
    if (!found) {
      throw NumericalError("goal sampling did not terminate");
    }
    out.push_back(std::move(sc));
  }
  return out;
}

RunMetrics run_tracking_scenario(const ChainParams& chain, const ControllerPreset& preset,
                                 const Scenario& scenario, const BenchmarkOptions& options,
                                 bool record_trace) {
  if (options.comfort_config.size() != static_cast<Eigen::Index>(chain.dof())) {
    throw InputError("comfort configuration does not match the chain");
  }
  const QuinticTrajectory trajectory(forward_kinematics(chain, scenario.start_q), scenario.goal,
                                     options.duration);
  TrackingPolicy policy(chain, trajectory, preset, options.comfort_config, options.kappa,
                        options.feedback_gain);
  IntegrationOptions integration = options.integration;
  integration.max_duration = options.duration + 1.0;
  integration.record_trace = record_trace;
  integration.comfort_config = options.comfort_config;
  integration.kappa = options.kappa;
  return integrate_velocity_control(chain, policy, scenario.start_q, integration);
}

BenchmarkTable run_benchmark(const ChainParams& chain, std::span<const ControllerPreset> presets,
                             const BenchmarkOptions& options) {
  if (options.scenarios == 0) {
    throw InputError("at least one scenario is required");
  }
  if (presets.empty()) {
    throw InputError("at least one preset is required");
  }
  if (!(options.duration > 0.0)) {
    throw InputError("duration must be positive");
  }
  const std::vector<Scenario> scenarios = sample_scenarios(chain, options.scenarios, options.seed);

  BenchmarkTable table;
  table.seed = options.seed;
  table.scenarios = options.scenarios;
  table.per_scenario.assign(presets.size(), std::vector<ScenarioResult>(scenarios.size()));

  const std::size_t jobs = presets.size() * scenarios.size();
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const std::size_t p = job / scenarios.size();
      const std::size_t s = job % scenarios.size();
      try {
        const RunMetrics m = run_tracking_scenario(chain, presets[p], scenarios[s], options);
        table.per_scenario[p][s] = {m.kinetic_energy, m.comfort_cost, !m.aborted};
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
        next = jobs;
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(jobs)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) {
      pool.emplace_back(worker);
    }
    for (std::thread& t : pool) {
      t.join();
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }

  std::vector<bool> included(scenarios.size(), true);
  for (const auto& results : table.per_scenario) {
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
      included[s] = included[s] && results[s].ok;
    }
  }
  const auto used = static_cast<std::size_t>(std::count(included.begin(), included.end(), true));
  table.excluded = scenarios.size() - used;

  for (std::size_t p = 0; p < presets.size(); ++p) {
    BenchmarkRow row;
    row.preset = presets[p].name;
    row.n_completed = used;
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
      if (included[s]) {
        row.mean_ekin += table.per_scenario[p][s].kinetic_energy;
        row.mean_l += table.per_scenario[p][s].comfort_cost;
      }
    }
    if (used > 0) {
      row.mean_ekin /= static_cast<double>(used);
      row.mean_l /= static_cast<double>(used);
    } else {
      row.mean_ekin = std::nan("");
      row.mean_l = std::nan("");
    }
    row.mean_sum = row.mean_ekin + row.mean_l;
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace hierctl
