#include "bfd/collision.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace bfd {

namespace {

std::atomic<bool> g_projection_fault{false};

using Basis = Eigen::Matrix<double, 5, 1>;

Basis invariant_basis(const Vec3& v, double scale) {
  const Vec3 s = v / scale;
  Basis psi;
  psi << 1.0, s.x(), s.y(), s.z(), s.squaredNorm();
  return psi;
}

/// Pair-range partition of [0, n) into `blocks` ranges holding roughly equal
/// numbers of unordered pairs (i, j > i). Independent of the thread count so
/// the floating-point summation order is fixed.
std::vector<std::size_t> pair_blocks(std::size_t n, std::size_t blocks) {
  std::vector<std::size_t> bounds{0};
  const double total = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += static_cast<double>(n - 1 - i);
    if (acc >= total * static_cast<double>(bounds.size()) / static_cast<double>(blocks) &&
        bounds.size() < blocks) {
      bounds.push_back(i + 1);
    }
  }
  if (bounds.back() != n) bounds.push_back(n);
  return bounds;
}

struct HalfRule {
  std::vector<double> sx, sy, sz, weight;
};

HalfRule half_rule(const SphereQuadrature& sphere) {
  HalfRule r;
  for (int k : sphere.half) {
    r.sx.push_back(sphere.directions(0, k));
    r.sy.push_back(sphere.directions(1, k));
    r.sz.push_back(sphere.directions(2, k));
    r.weight.push_back(sphere.weights(k));
  }
  return r;
}

template <bool Quantum, bool Entropy, bool ConstantB>
detail::SweepOutput sweep_impl(const DistributionState& state, const CollisionKernelSpec& spec,
                               const SphereQuadrature& sphere, double eta) {
  const VelocityGrid& grid = state.grid;
  const int n_axis = grid.points_per_axis();
  const std::size_t n = grid.size();
  const double eps = Quantum ? state.epsilon : 0.0;
  const double h = grid.spacing();
  const double w = grid.cell_volume();
  const double* f = state.values.data();

  // Kinetic factors tabulated by the integer squared index distance.
  const int max_d2 = 3 * (n_axis - 1) * (n_axis - 1);
  std::vector<double> phi(max_d2 + 1, 0.0), phi_eta(Entropy ? max_d2 + 1 : 0, 0.0),
      half_radius(max_d2 + 1, 0.0);
  for (int d2 = 1; d2 <= max_d2; ++d2) {
    const double r = h * std::sqrt(static_cast<double>(d2));
    phi[d2] = std::pow(r, spec.gamma);
    if constexpr (Entropy) phi_eta[d2] = std::pow(r, eta);
    half_radius[d2] = 0.5 * std::sqrt(static_cast<double>(d2));
  }

  const HalfRule rule = half_rule(sphere);
  const std::size_t n_dir = rule.weight.size();
  std::vector<double> const_weight(n_dir);
  for (std::size_t k = 0; k < n_dir; ++k) const_weight[k] = 2.0 * spec.angular.b0 * rule.weight[k];

  std::vector<int> ix(n), iy(n), iz(n);
  for (std::size_t p = 0; p < n; ++p) {
    const auto [a, b, c] = grid.unflatten(p);
    ix[p] = a;
    iy[p] = b;
    iz[p] = c;
  }

  const std::size_t n_blocks = std::min<std::size_t>(64, n);
  const std::vector<std::size_t> bounds = pair_blocks(n, n_blocks);
  const std::size_t used_blocks = bounds.size() - 1;
  std::vector<Field> q_blocks(used_blocks), loss_blocks(used_blocks);
  std::vector<double> entropy_blocks(used_blocks, 0.0);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t blk = 0; blk < used_blocks; ++blk) {
    Field q = Field::Zero(static_cast<Eigen::Index>(n));
    Field loss = Field::Zero(static_cast<Eigen::Index>(n));
    std::vector<double> beta(n_dir);
    double entropy_acc = 0.0;

    for (std::size_t i = bounds[blk]; i < bounds[blk + 1]; ++i) {
      const double fi = f[i];
      const double block_i = 1.0 - eps * fi;
      for (std::size_t j = i + 1; j < n; ++j) {
        const int dx = ix[i] - ix[j];
        const int dy = iy[i] - iy[j];
        const int dz = iz[i] - iz[j];
        const int d2 = dx * dx + dy * dy + dz * dz;
        const double fj = f[j];
        const double cx = 0.5 * (ix[i] + ix[j]);
        const double cy = 0.5 * (iy[i] + iy[j]);
        const double cz = 0.5 * (iz[i] + iz[j]);
        const double rad = half_radius[d2];

        const double* weights = const_weight.data();
        if constexpr (!ConstantB) {
          const double inv = 1.0 / (2.0 * rad);
          for (std::size_t k = 0; k < n_dir; ++k) {
            double c = (dx * rule.sx[k] + dy * rule.sy[k] + dz * rule.sz[k]) * inv;
            c = std::clamp(c, -1.0, 1.0);
            beta[k] = rule.weight[k] * (angular_factor(spec, c) + angular_factor(spec, -c));
          }
          weights = beta.data();
        }

        const double fifj = fi * fj;
        const double lambda_ij = block_i * (1.0 - eps * fj);
        double acc = 0.0;
        double loss_acc = 0.0;
        double entropy_pair = 0.0;
        for (std::size_t k = 0; k < n_dir; ++k) {
          const double ox = rad * rule.sx[k];
          const double oy = rad * rule.sy[k];
          const double oz = rad * rule.sz[k];
          const double fp = detail::sample_index_space(f, n_axis, cx + ox, cy + oy, cz + oz);
          const double fq = detail::sample_index_space(f, n_axis, cx - ox, cy - oy, cz - oz);
          double gain, loss_term, blocking;
          if constexpr (Quantum) {
            blocking = (1.0 - eps * fp) * (1.0 - eps * fq);
            gain = fp * fq * lambda_ij;
            loss_term = fifj * blocking;
          } else {
            blocking = 1.0;
            gain = fp * fq;
            loss_term = fifj;
          }
          acc += weights[k] * (gain - loss_term);
          loss_acc += weights[k] * blocking;
          if constexpr (Entropy) {
            if (gain >= detail::log_floor || loss_term >= detail::log_floor) {
              entropy_pair += weights[k] * (gain - loss_term) *
                              std::log(std::max(gain, detail::log_floor) /
                                       std::max(loss_term, detail::log_floor));
            }
          }
        }
        const double scale = w * phi[d2];
        const double c = scale * acc;
        q(static_cast<Eigen::Index>(i)) += c;
        q(static_cast<Eigen::Index>(j)) += c;
        loss(static_cast<Eigen::Index>(i)) += scale * fj * loss_acc;
        loss(static_cast<Eigen::Index>(j)) += scale * fi * loss_acc;
        if constexpr (Entropy) entropy_acc += phi_eta[d2] * entropy_pair;
      }
    }
    q_blocks[blk] = std::move(q);
    loss_blocks[blk] = std::move(loss);
    entropy_blocks[blk] = entropy_acc;
  }

  detail::SweepOutput out;
  out.gain_minus_loss = Field::Zero(static_cast<Eigen::Index>(n));
  out.loss_rate = Field::Zero(static_cast<Eigen::Index>(n));
  double entropy = 0.0;
  for (std::size_t blk = 0; blk < used_blocks; ++blk) {
    out.gain_minus_loss += q_blocks[blk];
    out.loss_rate += loss_blocks[blk];
    entropy += entropy_blocks[blk];
  }
  out.entropy_production = 0.5 * w * w * entropy;
  return out;
}

template <bool Quantum>
detail::SweepOutput dispatch_b(const DistributionState& state, const CollisionKernelSpec& spec,
                               const SphereQuadrature& sphere, const detail::SweepRequest& req) {
  const bool constant = spec.constant_angular();
  if (req.entropy) {
    return constant ? sweep_impl<Quantum, true, true>(state, spec, sphere, req.entropy_eta)
                    : sweep_impl<Quantum, true, false>(state, spec, sphere, req.entropy_eta);
  }
  return constant ? sweep_impl<Quantum, false, true>(state, spec, sphere, 0.0)
                  : sweep_impl<Quantum, false, false>(state, spec, sphere, 0.0);
}

void require_finite(const Field& q, const char* what) {
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    if (!std::isfinite(q(i))) {
      throw Error(std::string(what) + ": non-finite value at node " + std::to_string(i));
    }
  }
}

}  // namespace

namespace testing {
void set_projection_fault(bool enabled) { g_projection_fault = enabled; }
bool projection_fault() { return g_projection_fault; }
}  // namespace testing

namespace detail {

SweepOutput pair_sweep(const DistributionState& f, const CollisionKernelSpec& spec,
                       const SphereQuadrature& sphere, const SweepRequest& request) {
  if (static_cast<std::size_t>(f.values.size()) != f.grid.size()) {
    throw Error("collision: state size does not match its grid");
  }
  return request.quantum ? dispatch_b<true>(f, spec, sphere, request)
                         : dispatch_b<false>(f, spec, sphere, request);
}

}  // namespace detail

ConservationDefects conservation_defects(const Field& q, const VelocityGrid& grid) {
  if (static_cast<std::size_t>(q.size()) != grid.size()) {
    throw Error("conservation_defects: size mismatch");
  }
  ConservationDefects d;
  const double w = grid.cell_volume();
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const Vec3 v = grid.node(p);
    const double value = q(static_cast<Eigen::Index>(p));
    d.mass += value;
    d.momentum += value * v;
    d.energy += value * v.squaredNorm();
  }
  d.mass *= w;
  d.momentum *= w;
  d.energy *= w;
  return d;
}

Field conservation_correction(const Field& q, const VelocityGrid& grid, const Field& profile) {
  if (static_cast<std::size_t>(q.size()) != grid.size() || profile.size() != q.size()) {
    throw Error("conservation_correction: size mismatch");
  }
  require_finite(q, "conservation_correction");
  if (testing::projection_fault()) return q;

  const double scale = grid.half_width();
  const double w = grid.cell_volume();
  Eigen::Matrix<double, 5, 5> gram = Eigen::Matrix<double, 5, 5>::Zero();
  std::vector<Basis> basis(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    basis[p] = invariant_basis(grid.node(p), scale);
    gram.noalias() += w * profile(static_cast<Eigen::Index>(p)) * basis[p] * basis[p].transpose();
  }
  const Eigen::LDLT<Eigen::Matrix<double, 5, 5>> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
    throw Error("conservation_correction: singular Gram matrix");
  }

  Field out = q;
  // Two passes: the second removes the round-off left by the first.
  for (int pass = 0; pass < 2; ++pass) {
    Basis moments = Basis::Zero();
    for (std::size_t p = 0; p < grid.size(); ++p) {
      moments += w * out(static_cast<Eigen::Index>(p)) * basis[p];
    }
    const Basis lambda = ldlt.solve(moments);
    for (std::size_t p = 0; p < grid.size(); ++p) {
      out(static_cast<Eigen::Index>(p)) -= profile(static_cast<Eigen::Index>(p)) * basis[p].dot(lambda);
    }
  }
  return out;
}

Field conservation_correction(const Field& q, const VelocityGrid& grid) {
  return conservation_correction(q, grid, Field::Ones(q.size()));
}

CollisionResult collision_operator(const DistributionState& f, const CollisionKernelSpec& spec,
                                   const SphereQuadrature& sphere, bool correct,
                                   ProjectionWeight weight) {
  spec.validate();
  f.validate();
  detail::SweepOutput sweep = detail::pair_sweep(f, spec, sphere, {true, false, 0.0});
  require_finite(sweep.gain_minus_loss, "collision_operator");

  CollisionResult result;
  result.defects = conservation_defects(sweep.gain_minus_loss, f.grid);
  result.loss_rate = std::move(sweep.loss_rate);
  result.corrected = correct;
  if (!correct) {
    result.values = std::move(sweep.gain_minus_loss);
  } else if (weight == ProjectionWeight::uniform) {
    result.values = conservation_correction(sweep.gain_minus_loss, f.grid);
  } else {
    const Field profile = f.values * (1.0 - f.epsilon * f.values);
    result.values = conservation_correction(sweep.gain_minus_loss, f.grid, profile);
  }
  return result;
}

Field collision_operator_classical(const Field& f, const VelocityGrid& grid,
                                   const CollisionKernelSpec& spec,
                                   const SphereQuadrature& sphere) {
  spec.validate();
  const DistributionState state(grid, f, 0.0);
  state.validate();
  detail::SweepOutput sweep = detail::pair_sweep(state, spec, sphere, {false, false, 0.0});
  require_finite(sweep.gain_minus_loss, "collision_operator_classical");
  return std::move(sweep.gain_minus_loss);
}

double scaling_identity_check(const DistributionState& f, const CollisionKernelSpec& spec,
                              const SphereQuadrature& sphere) {
  const double eps = f.epsilon;
  if (!(eps > 0.0)) throw Error("scaling_identity_check: requires eps > 0");
  const Field q1 = collision_operator(f, spec, sphere, false).values;
  const DistributionState scaled(f.grid, eps * f.values, 1.0, f.time);
  const Field q2 = collision_operator(scaled, scaled_kernel(spec, 1.0 / eps), sphere, false).values;
  const double scale = (eps * q1).abs().maxCoeff();
  const double deviation = (q2 - eps * q1).abs().maxCoeff();
  if (scale == 0.0) return deviation;
  return deviation / scale;
}

namespace {

template <typename Fn>
double adaptive(Fn&& fn, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fn, lo, hi, 20, 1e-13,
                                                                       &error);
}

/// 2 pi int b(cos t) sin t / g^3 * Phi(rho / g) dt with g = sin(t/2) or cos(t/2),
/// restricted to lambda < rho / g <= cutoff.
double reduced_kernel(const CollisionKernelSpec& spec, double rho, double lambda, double cutoff,
                      CancellationIdentity identity) {
  const double pi = std::numbers::pi;
  if (!(rho > 0.0) || rho >= cutoff) return 0.0;
  // g ranges over [rho / cutoff, min(1, rho / lambda)).
  const double g_lo = rho / cutoff;
  const double g_hi = std::min(1.0, rho / lambda);
  if (!(g_hi > g_lo)) return 0.0;
  double t_lo, t_hi;
  if (identity == CancellationIdentity::gain_point) {
    t_lo = 2.0 * std::asin(g_lo);
    t_hi = 2.0 * std::asin(g_hi);
  } else {
    t_lo = 2.0 * std::acos(g_hi);
    t_hi = 2.0 * std::acos(g_lo);
  }
  auto integrand = [&](double t) {
    const double g = identity == CancellationIdentity::gain_point ? std::sin(0.5 * t)
                                                                  : std::cos(0.5 * t);
    if (!(g > 0.0)) return 0.0;
    const double arg = rho / g;
    if (!(arg > lambda && arg <= cutoff)) return 0.0;
    return angular_factor(spec, std::clamp(std::cos(t), -1.0, 1.0)) * std::sin(t) /
           (g * g * g) * std::pow(arg, spec.gamma);
  };
  double total = 0.0;
  const double cut = spec.constant_angular() ? -1.0 : spec.angular.theta_cut;
  if (cut > t_lo && cut < t_hi) {
    total = adaptive(integrand, t_lo, cut) + adaptive(integrand, cut, t_hi);
  } else {
    total = adaptive(integrand, t_lo, t_hi);
  }
  return 2.0 * pi * total;
}

}  // namespace

double cancellation_oracle(const DistributionState& f, const CollisionKernelSpec& spec,
                           const CancellationSetup& setup, CancellationIdentity identity,
                           CancellationSide side) {
  if (!(setup.lambda > 0.0)) throw Error("cancellation_oracle: lambda must be positive");
  spec.validate();
  const double cutoff = setup.cutoff > 0.0 ? setup.cutoff : f.grid.half_width();
  if (!(cutoff > setup.lambda)) throw Error("cancellation_oracle: cutoff must exceed lambda");
  if (setup.radial_points < 2) throw Error("cancellation_oracle: too few radial points");

  const SphereQuadrature sphere = build_sphere_quadrature(setup.sphere_order);
  const GaussLegendre gl = gauss_legendre(setup.radial_points);
  auto sample = [&](const Vec3& p) { return trilinear_sample(f.values, f.grid, p); };

  if (side == CancellationSide::direct) {
    // v_* = probe + r e, so n = -e, v' = probe + r (e + sigma) / 2 and
    // v'_* = probe + r (e - sigma) / 2.
    const double sign = identity == CancellationIdentity::gain_point ? 1.0 : -1.0;
    double total = 0.0;
    for (Eigen::Index a = 0; a < gl.nodes.size(); ++a) {
      const double r = setup.lambda + 0.5 * (gl.nodes(a) + 1.0) * (cutoff - setup.lambda);
      const double jac = 0.5 * (cutoff - setup.lambda) * gl.weights(a);
      double shell = 0.0;
      for (Eigen::Index e = 0; e < sphere.size(); ++e) {
        const Vec3 dir = sphere.directions.col(e);
        double inner = 0.0;
        for (Eigen::Index s = 0; s < sphere.size(); ++s) {
          const Vec3 sigma = sphere.directions.col(s);
          const double cos_theta = std::clamp(-dir.dot(sigma), -1.0, 1.0);
          const Vec3 point = setup.probe + 0.5 * r * (dir + sign * sigma);
          inner += sphere.weights(s) * angular_factor(spec, cos_theta) * sample(point);
        }
        shell += sphere.weights(e) * inner;
      }
      total += jac * r * r * std::pow(r, spec.gamma) * shell;
    }
    return total;
  }

  // Reduced side: shells |w - probe| = rho, split at the kink rho = lambda.
  auto radial = [&](double lo, double hi) {
    double total = 0.0;
    for (Eigen::Index a = 0; a < gl.nodes.size(); ++a) {
      const double rho = lo + 0.5 * (gl.nodes(a) + 1.0) * (hi - lo);
      const double jac = 0.5 * (hi - lo) * gl.weights(a);
      const double kern = reduced_kernel(spec, rho, setup.lambda, cutoff, identity);
      if (kern == 0.0) continue;
      double shell = 0.0;
      for (Eigen::Index e = 0; e < sphere.size(); ++e) {
        shell += sphere.weights(e) * sample(setup.probe + rho * Vec3(sphere.directions.col(e)));
      }
      total += jac * rho * rho * kern * shell;
    }
    return total;
  };
  return radial(0.0, setup.lambda) + radial(setup.lambda, cutoff);
}

}  // namespace bfd
