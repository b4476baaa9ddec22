#include <cmath>
#include <functional>

#include "hierctl/errors.hpp"
#include "hierctl/simulation.hpp"

namespace hierctl {
namespace {

using Dynamics = std::function<Vector(double, const Vector&)>;

Vector rk4_step(const Dynamics& f, double t, const Vector& s, double h) {
  const Vector k1 = f(t, s);
  const Vector k2 = f(t + 0.5 * h, s + 0.5 * h * k1);
  const Vector k3 = f(t + 0.5 * h, s + 0.5 * h * k2);
  const Vector k4 = f(t + h, s + h * k3);
  return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct SampleGrid {
  std::size_t samples = 0;
  std::size_t substeps = 0;
  double interval = 0.0;
};

SampleGrid make_grid(const QuinticTrajectory& trajectory, const ExperimentOptions& options) {
  if (!(options.dt > 0.0) || !(options.sample_interval >= options.dt)) {
    throw InputError("experiment step and sample interval must be positive, interval >= step");
  }
  SampleGrid g;
  g.substeps = static_cast<std::size_t>(std::llround(options.sample_interval / options.dt));
  g.interval = options.sample_interval;
  g.samples = static_cast<std::size_t>(std::floor(trajectory.duration() / g.interval + 1e-9)) + 1;
  return g;
}

// Integrates s' = f(t, s) and calls `visit(t, s)` at every sample.
template <typename Visit>
void integrate_sampled(const Dynamics& f, Vector s, const SampleGrid& grid, Visit&& visit) {
  const double h = grid.interval / static_cast<double>(grid.substeps);
  for (std::size_t k = 0; k < grid.samples; ++k) {
    const double t0 = static_cast<double>(k) * grid.interval;
    visit(k, t0, s);
    if (k + 1 == grid.samples) {
      break;
    }
    for (std::size_t i = 0; i < grid.substeps; ++i) {
      s = rk4_step(f, t0 + static_cast<double>(i) * h, s, h);
    }
  }
}

Vector stack(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

void check_start(const ChainParams& chain, const Vector& q0) {
  chain.validate();
  if (static_cast<std::size_t>(q0.size()) != chain.dof()) {
    throw InputError("initial configuration does not match the chain");
  }
}

}  // namespace

LabeledTraces energy_mapping_experiment(const ChainParams& chain, const QuinticTrajectory& trajectory,
                                        const Vector& q0, const ExperimentOptions& options) {
  check_start(chain, q0);
  const SampleGrid grid = make_grid(trajectory, options);
  const Eigen::Index n = q0.size();
  const Matrix identity = Matrix::Identity(n, n);

  LabeledTraces out;
  out.labels = {"vel_W=I", "vel_W=M", "acc_W=I", "acc_W=M", "accopt_W=M"};
  out.values.assign(out.labels.size(), std::vector<double>(grid.samples, 0.0));
  out.flagged.assign(grid.samples, false);
  for (std::size_t k = 0; k < grid.samples; ++k) {
    out.time.push_back(static_cast<double>(k) * grid.interval);
  }

  auto record = [&](std::size_t label, std::size_t k, double t, const Vector& q, const Vector& qd) {
    out.values[label][k] = kinetic_energy(chain, q, qd);
    const double residual = (jacobian(chain, q) * qd - trajectory.velocity(t)).norm();
    out.max_constraint_residual = std::max(out.max_constraint_residual, residual);
  };
  auto weight_of = [&](bool use_mass, const Vector& q) -> Matrix {
    return use_mass ? mass_matrix(chain, q) : identity;
  };

  // velocity mapping: state q
  for (const bool use_mass : {false, true}) {
    const std::size_t label = use_mass ? 1 : 0;
    auto velocity = [&](double t, const Vector& q) -> Vector {
      return map_velocity(jacobian(chain, q), weight_of(use_mass, q), trajectory.velocity(t));
    };
    integrate_sampled(velocity, q0, grid, [&](std::size_t k, double t, const Vector& q) {
      record(label, k, t, q, velocity(t, q));
    });
  }

  // acceleration mappings: state (q, qd)
  const Vector qd0_identity = map_velocity(jacobian(chain, q0), identity, trajectory.velocity(0.0));
  const Vector qd0_mass = map_velocity(jacobian(chain, q0), mass_matrix(chain, q0), trajectory.velocity(0.0));
  for (const bool use_mass : {false, true}) {
    const std::size_t label = use_mass ? 3 : 2;
    auto accel = [&](double t, const Vector& s) -> Vector {
      const Vector q = s.head(n);
      const Vector qd = s.tail(n);
      const Vector qdd = map_acceleration(jacobian(chain, q), jacobian_time_derivative(chain, q, qd),
                                          weight_of(use_mass, q), trajectory.acceleration(t), qd);
      return stack(qd, qdd);
    };
    integrate_sampled(accel, stack(q0, use_mass ? qd0_mass : qd0_identity), grid,
                      [&](std::size_t k, double t, const Vector& s) {
                        record(label, k, t, s.head(n), s.tail(n));
                      });
  }

  auto energy_optimal = [&](double t, const Vector& s) -> Vector {
    const Vector q = s.head(n);
    const Vector qd = s.tail(n);
    const Vector qdd = map_acceleration_energy_optimal(
        jacobian(chain, q), jacobian_time_derivative(chain, q, qd), mass_matrix(chain, q),
        mass_matrix_time_derivative(chain, q, qd), trajectory.acceleration(t), qd);
    return stack(qd, qdd);
  };
  integrate_sampled(energy_optimal, stack(q0, qd0_mass), grid,
                    [&](std::size_t k, double t, const Vector& s) {
                      record(4, k, t, s.head(n), s.tail(n));
                    });

  for (std::size_t k = 0; k < grid.samples; ++k) {
    const double bound = out.values[0][k] * (1.0 + 1e-9) + 1e-15;
    out.flagged[k] = out.values[1][k] > bound || out.values[4][k] > bound;
  }
  return out;
}

LabeledTraces consistency_experiment(const ChainParams& chain, const QuinticTrajectory& trajectory,
                                     const Vector& q0, const ExperimentOptions& options) {
  check_start(chain, q0);
  const SampleGrid grid = make_grid(trajectory, options);
  const Eigen::Index n = q0.size();
  const Matrix identity = Matrix::Identity(n, n);
  const Vector unit = Vector::Ones(n);

  LabeledTraces out;
  out.labels = {"torque_W=M", "torque_W=I", "velocity_W=M", "velocity_W=I", "acceleration_W=M",
                "acceleration_W=I"};
  out.values.assign(out.labels.size(), std::vector<double>(grid.samples, 0.0));
  out.flagged.assign(grid.samples, false);

  // the chain follows the trajectory under the mass-weighted velocity mapping
  auto velocity = [&](double t, const Vector& q) -> Vector {
    return map_velocity(jacobian(chain, q), mass_matrix(chain, q), trajectory.velocity(t));
  };
  integrate_sampled(velocity, q0, grid, [&](std::size_t k, double t, const Vector& q) {
    out.time.push_back(t);
    const Matrix j = jacobian(chain, q);
    const Matrix mass = mass_matrix(chain, q);
    const Vector qd = velocity(t, q);
    out.max_constraint_residual =
        std::max(out.max_constraint_residual, (j * qd - trajectory.velocity(t)).norm());
    try {
      const Matrix n_mass = nullspace_projector_velocity(j, mass);
      const Matrix n_identity = nullspace_projector_velocity(j, identity);
      out.values[0][k] = dyncon_metric(DynConMode::kTorque, j, n_mass.transpose(), unit, mass);
      out.values[1][k] = dyncon_metric(DynConMode::kTorque, j, n_identity.transpose(), unit, mass);
      out.values[2][k] = dyncon_metric(DynConMode::kVelocity, j, n_mass, unit, mass);
      out.values[3][k] = dyncon_metric(DynConMode::kVelocity, j, n_identity, unit, mass);
      out.values[4][k] = dyncon_metric(DynConMode::kVelocity, j, n_mass, unit, mass);
      out.values[5][k] = dyncon_metric(DynConMode::kVelocity, j, n_identity, unit, mass);
    } catch (const SingularityError&) {
      out.flagged[k] = true;
    }
  });
  return out;
}

}  // namespace hierctl
