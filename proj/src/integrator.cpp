#include "bfd/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

namespace bfd {

namespace {

struct Evaluation {
  Field q;
  Field loss;
  double entropy_production = 0.0;
};

Evaluation evaluate_rhs(const DistributionState& f, const CollisionKernelSpec& spec,
                        const SphereQuadrature& sphere, bool with_entropy) {
  const auto n = static_cast<Eigen::Index>(f.grid.size());
  if (f.values.maxCoeff() <= 0.0) return {Field::Zero(n), Field::Zero(n), 0.0};
  detail::SweepOutput sweep =
      detail::pair_sweep(f, spec, sphere, {true, with_entropy, spec.gamma});
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(sweep.gain_minus_loss(i))) {
      throw Error("integrator: non-finite collision term at node " + std::to_string(i));
    }
  }
  const Field profile = f.values * (1.0 - f.epsilon * f.values);
  Evaluation e;
  e.q = conservation_correction(sweep.gain_minus_loss, f.grid, profile);
  e.loss = std::move(sweep.loss_rate);
  e.entropy_production = sweep.entropy_production;
  return e;
}

double step_from_loss(const Field& loss, const StepControl& ctl) {
  const double rate = loss.size() > 0 ? loss.maxCoeff() : 0.0;
  const double dt = rate > 0.0 ? 0.1 * ctl.safety / rate : ctl.dt_max;
  return std::clamp(dt, ctl.dt_min, ctl.dt_max);
}

// Returns the index of the worst offender, or -1 when every node lies in
// [-tol, 1/eps + tol]; in-tolerance excursions are clamped.
Eigen::Index enforce_bounds(Field& f, double eps, double tol) {
  const double ceiling = eps > 0.0 ? 1.0 / eps : std::numeric_limits<double>::infinity();
  Eigen::Index worst = -1;
  double worst_excess = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double v = f(i);
    const double excess = !std::isfinite(v) ? std::numeric_limits<double>::infinity()
                                            : std::max(-v, v - ceiling);
    if (excess > tol && excess > worst_excess) {
      worst = i;
      worst_excess = excess;
    }
  }
  if (worst < 0) f = f.max(0.0).min(ceiling);
  return worst;
}

struct Advance {
  DistributionState state;
  double dt;
  int halvings;
};

Advance advance(const DistributionState& f, const Evaluation& stage1, double dt,
                const CollisionKernelSpec& spec, const SphereQuadrature& sphere,
                const StepControl& ctl) {
  Eigen::Index worst = -1;
  for (int halvings = 0; halvings <= ctl.max_halvings; ++halvings) {
    if (dt < ctl.dt_min) break;
    Field f1 = f.values + dt * stage1.q;
    worst = enforce_bounds(f1, f.epsilon, ctl.tol_bound);
    if (worst < 0) {
      const DistributionState s1(f.grid, f1, f.epsilon, f.time + dt);
      const Evaluation stage2 = evaluate_rhs(s1, spec, sphere, false);
      Field f2 = 0.5 * f.values + 0.5 * (f1 + dt * stage2.q);
      worst = enforce_bounds(f2, f.epsilon, ctl.tol_bound);
      if (worst < 0) {
        return {DistributionState(f.grid, std::move(f2), f.epsilon, f.time + dt), dt, halvings};
      }
    }
    dt *= 0.5;
  }
  const Vec3 v = worst >= 0 ? f.grid.node(static_cast<std::size_t>(worst)) : Vec3::Zero();
  throw Error("integrator: positivity/Pauli failure at node " + std::to_string(worst) + " (v = " +
              std::to_string(v.x()) + ", " + std::to_string(v.y()) + ", " +
              std::to_string(v.z()) + ") after exhausting step halvings");
}

double l1_2_norm(const Field& f, const Field& weight, double w) {
  return (f.abs() * weight).sum() * w;
}

}  // namespace

void StepControl::validate() const {
  if (!(dt >= 0.0)) throw Error("step control: dt must be >= 0");
  if (!(dt_min > 0.0) || !(dt_max >= dt_min)) throw Error("step control: need 0 < dt_min <= dt_max");
  if (dt > 0.0 && (dt < dt_min || dt > dt_max)) {
    throw Error("step control: dt outside [dt_min, dt_max]");
  }
  if (!(safety > 0.0)) throw Error("step control: safety must be positive");
  if (!(tol_bound >= 0.0)) throw Error("step control: tol_bound must be >= 0");
  if (max_halvings < 0) throw Error("step control: max_halvings must be >= 0");
}

double initial_time_step(const DistributionState& f, const CollisionKernelSpec& spec,
                         const SphereQuadrature& sphere, const StepControl& ctl) {
  ctl.validate();
  f.validate();
  return step_from_loss(detail::pair_sweep(f, spec, sphere, {true, false, 0.0}).loss_rate, ctl);
}

StepOutcome step_detailed(const DistributionState& f, const CollisionKernelSpec& spec,
                          const SphereQuadrature& sphere, const StepControl& ctl) {
  ctl.validate();
  spec.validate();
  f.validate(ctl.tol_bound);
  if (!(ctl.dt > 0.0)) throw Error("step: dt must be positive");
  const Evaluation stage1 = evaluate_rhs(f, spec, sphere, true);
  Advance a = advance(f, stage1, ctl.dt, spec, sphere, ctl);
  return {std::move(a.state), a.dt, a.halvings, stage1.entropy_production};
}

DistributionState step(const DistributionState& f, const CollisionKernelSpec& spec,
                       const SphereQuadrature& sphere, const StepControl& ctl) {
  return step_detailed(f, spec, sphere, ctl).state;
}

TimeSeries integrate(const DistributionState& f0, const CollisionKernelSpec& spec,
                     const SphereQuadrature& sphere, const IntegrateOptions& options) {
  spec.validate();
  options.control.validate();
  f0.validate(options.control.tol_bound);
  if (!(options.t_end >= 0.0) || !std::isfinite(options.t_end)) {
    throw Error("integrate: T_end must be finite and >= 0");
  }
  const VelocityGrid& grid = f0.grid;

  const GridMoments m0 = grid_moments(f0.values, grid);
  const DistributionState reference =
      options.reference ? *options.reference
      : m0.mass > 0.0   ? discrete_equilibrium(m0, f0.epsilon, grid)
                        : DistributionState(grid, Field::Zero(f0.values.size()), f0.epsilon);
  if (!(reference.grid == grid) || reference.epsilon != f0.epsilon) {
    throw Error("integrate: reference state does not match the initial grid or eps");
  }

  TimeSeries ts;
  ts.epsilon = f0.epsilon;
  ts.gamma = spec.gamma;
  ts.s_values = options.s_values;
  ts.eta_values = options.eta_values;

  auto record = [&](const DistributionState& s, double D, double dt) {
    Record r;
    r.t = s.time;
    const GridMoments gm = grid_moments(s.values, grid);
    r.mass = gm.mass;
    r.momentum = gm.momentum;
    r.energy = gm.energy;
    for (double sv : options.s_values) {
      r.m_s.push_back(moment(s.values, grid, sv).m);
      r.m_s_gamma.push_back(moment(s.values, grid, sv + spec.gamma).m);
    }
    r.M0 = moment(s.values, grid, 0.0).M;
    r.S = entropy_S(s);
    r.H = boltzmann_entropy(s.values.max(0.0), grid);
    r.H_rel = relative_entropy(s, reference);
    r.D_gamma = D;
    for (double eta : options.eta_values) r.D_eta.push_back(entropy_production(s, spec, sphere, eta));
    r.max_f = s.values.maxCoeff();
    r.kappa0 = 1.0 - s.epsilon * r.max_f;
    r.dt = dt;
    const double l1 = (s.values - reference.values).abs().sum() * grid.cell_volume();
    r.l1_dist = l1;
    r.ck_lhs = l1 * l1;
    r.ck_mid = 2.0 * gm.mass * r.H_rel;
    ts.records.push_back(std::move(r));
    if (options.keep_snapshots) ts.snapshots.push_back({s.time, s.values});
  };

  DistributionState state = f0;
  state.time = 0.0;
  Evaluation eval = evaluate_rhs(state, spec, sphere, true);
  double dt_current = options.control.dt > 0.0 ? options.control.dt
                                                : step_from_loss(eval.loss, options.control);
  const double interval =
      options.output_interval > 0.0 ? std::min(options.output_interval, options.t_end)
                                    : options.t_end;
  if (options.t_end > 0.0) {
    // Equal sub-steps inside every output interval so output times are hit exactly.
    const double sub = std::ceil(interval / dt_current - 1e-9);
    dt_current = interval / std::max(1.0, sub);
  }
  record(state, eval.entropy_production, 0.0);

  if (options.t_end > 0.0) {
    const auto n_out = static_cast<std::size_t>(std::ceil(options.t_end / interval - 1e-9));
    for (std::size_t k = 1; k <= n_out; ++k) {
      const double target = k == n_out ? options.t_end : static_cast<double>(k) * interval;
      double last_dt = 0.0;
      while (target - state.time > 1e-12 * std::max(1.0, target)) {
        const double remaining = target - state.time;
        const bool finishes = dt_current >= remaining * (1.0 - 1e-9);
        const double dt_try = finishes ? remaining : dt_current;
        const double s_before = entropy_S(state);
        Advance a = advance(state, eval, dt_try, spec, sphere, options.control);
        ts.steps.push_back({state.time, s_before, eval.entropy_production, a.dt});
        if (a.halvings > 0) dt_current = a.dt;
        last_dt = a.dt;
        state = std::move(a.state);
        if (finishes && a.halvings == 0) state.time = target;
        eval = evaluate_rhs(state, spec, sphere, true);
      }
      record(state, eval.entropy_production, last_dt);
    }
  }
  ts.steps.push_back({state.time, entropy_S(state), eval.entropy_production, 0.0});

  const double h_scale = std::max(std::abs(ts.records.front().H_rel), 1e-300);
  for (std::size_t k = 1; k < ts.records.size(); ++k) {
    if (ts.records[k].H_rel > ts.records[k - 1].H_rel + 1e-10 * h_scale) {
      ts.h_rel_violations.push_back(k);
    }
  }
  ts.final_state = state;
  return ts;
}

Trajectory picard_apply(const Trajectory& f, const DistributionState& f_in,
                        const CollisionKernelSpec& spec, const SphereQuadrature& sphere) {
  if (f.values.size() < 2) throw Error("picard_apply: need at least two time samples");
  if (!(f.delta >= 0.0)) throw Error("picard_apply: delta must be >= 0");
  const double ceiling = f_in.pauli_bound();
  const double tau = f.delta / static_cast<double>(f.values.size() - 1);

  std::vector<Field> q;
  q.reserve(f.values.size());
  for (const Field& values : f.values) {
    if (values.size() != f_in.values.size()) throw Error("picard_apply: size mismatch");
    const DistributionState truncated(f_in.grid, values.abs().min(ceiling), f_in.epsilon);
    q.push_back(evaluate_rhs(truncated, spec, sphere, false).q);
  }
  Trajectory out;
  out.delta = f.delta;
  out.values.push_back(f_in.values);
  for (std::size_t m = 1; m < f.values.size(); ++m) {
    out.values.push_back(out.values.back() + 0.5 * tau * (q[m - 1] + q[m]));
  }
  return out;
}

PicardResult picard_solve(const DistributionState& f_in, double delta, int iterations,
                          const CollisionKernelSpec& spec, const SphereQuadrature& sphere,
                          int sub_samples, double tolerance) {
  if (!(delta >= 0.0)) throw Error("picard_solve: delta must be >= 0");
  if (sub_samples < 1) throw Error("picard_solve: need at least one sub-interval");
  if (iterations < 1) throw Error("picard_solve: need at least one iteration");
  spec.validate();
  f_in.validate();

  const Field weight =
      f_in.grid.evaluate([](const Vec3& v) { return 1.0 + v.squaredNorm(); });
  const double w = f_in.grid.cell_volume();
  const double scale = std::max(l1_2_norm(f_in.values, weight, w), 1e-300);

  PicardResult result;
  result.trajectory.delta = delta;
  result.trajectory.values.assign(static_cast<std::size_t>(sub_samples) + 1, f_in.values);
  int growing = 0;
  for (int k = 0; k < iterations; ++k) {
    Trajectory next = picard_apply(result.trajectory, f_in, spec, sphere);
    double r = 0.0;
    for (std::size_t m = 0; m < next.values.size(); ++m) {
      r = std::max(r, l1_2_norm(next.values[m] - result.trajectory.values[m], weight, w));
    }
    result.trajectory = std::move(next);
    if (!result.differences.empty()) {
      const double ratio = result.differences.back() > 0.0 ? r / result.differences.back() : 0.0;
      result.ratios.push_back(ratio);
      growing = ratio >= 1.0 ? growing + 1 : 0;
    }
    result.differences.push_back(r);
    if (r <= tolerance * scale) {
      result.converged = true;
      break;
    }
    if (growing >= 3) throw Error("picard_solve: iteration diverges, delta too large");
  }
  return result;
}

void write_checkpoint(const std::string& path, const DistributionState& f) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("checkpoint: cannot open " + path + " for writing");
  const std::uint32_t version = 1;
  const double L = f.grid.half_width();
  const auto N = static_cast<std::uint32_t>(f.grid.points_per_axis());
  out.write("BFDCKPT1", 8);
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&L), sizeof L);
  out.write(reinterpret_cast<const char*>(&N), sizeof N);
  out.write(reinterpret_cast<const char*>(&f.epsilon), sizeof f.epsilon);
  out.write(reinterpret_cast<const char*>(&f.time), sizeof f.time);
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!out) throw Error("checkpoint: write failed for " + path);
}

DistributionState read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("checkpoint: cannot open " + path);
  char magic[8];
  std::uint32_t version = 0, N = 0;
  double L = 0.0, eps = 0.0, t = 0.0;
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "BFDCKPT1", 8) != 0) throw Error("checkpoint: bad magic in " + path);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  if (version != 1) throw Error("checkpoint: unsupported version " + std::to_string(version));
  in.read(reinterpret_cast<char*>(&L), sizeof L);
  in.read(reinterpret_cast<char*>(&N), sizeof N);
  in.read(reinterpret_cast<char*>(&eps), sizeof eps);
  in.read(reinterpret_cast<char*>(&t), sizeof t);
  if (!in) throw Error("checkpoint: truncated header in " + path);
  const VelocityGrid grid(L, static_cast<int>(N));
  Field values(static_cast<Eigen::Index>(grid.size()));
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) throw Error("checkpoint: truncated data in " + path);
  return DistributionState(grid, std::move(values), eps, t);
}

}  // namespace bfd
