#include "bfd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/QR>

namespace bfd {

ExponentReport expected_decay_exponent(double s, double gamma) {
  const double g = std::abs(gamma);
  return {(s - 18.0 - 5.0 * g) / (4.0 + 2.0 * g), s > 22.0 + 5.0 * g};
}

double moment_envelope_exponent(double nu) {
  if (!(nu > 0.0)) throw Error("moment envelope: nu must be positive");
  return -3.0 / (2.0 * nu);
}

double MomentEnvelope::operator()(double t) const {
  if (!(t > 0.0)) throw Error("moment envelope: t must be positive");
  return C_s * (t + std::pow(t, moment_envelope_exponent(nu)));
}

double MomentEnvelope::t_min() const {
  return std::pow(3.0 / (2.0 * nu), 2.0 * nu / (2.0 * nu + 3.0));
}

MomentEnvelope moment_growth_envelope(double s, double nu, double gamma, double C_s) {
  if (s < 8.0 + std::abs(gamma)) {
    throw Error("moment envelope: requires s >= 8 + |gamma|, got s = " + std::to_string(s));
  }
  moment_envelope_exponent(nu);
  return {C_s, nu};
}

double linf_mass_exponent(double s, double nu, double gamma) {
  return 3.0 * std::abs(gamma) / (4.0 * nu * s + 3.0 * gamma);
}

double linf_envelope(double s, double nu, double gamma, double t_star, double sup_m_s, double C) {
  if (!(s > 3.0 * std::abs(gamma) / (2.0 * nu))) {
    throw Error("linf envelope: requires s > 3|gamma| / (2 nu)");
  }
  if (!(t_star > 0.0)) throw Error("linf envelope: t_* must be positive");
  const double denom = 4.0 * nu * s + 3.0 * gamma;
  const double time_exponent = -3.0 * s / denom - 3.0 / (4.0 * nu);
  return C * (1.0 + std::pow(t_star, time_exponent)) *
         std::pow(sup_m_s, linf_mass_exponent(s, nu, gamma));
}

double moment_production_constant(const CollisionKernelSpec& spec, double s) {
  return std::pow(2.0, -4.0 - 0.5 * s) * angular_sin3_half_integral(spec);
}

MomentMonitorReport moment_inequality_monitor(const std::vector<double>& times,
                                              const std::vector<double>& m_s,
                                              const std::vector<double>& m_s_gamma,
                                              const CollisionKernelSpec& spec,
                                              const MomentMonitorInput& input) {
  const double s = input.s;
  const double gamma = spec.gamma;
  if (s < std::max(2.0 - gamma, 4.0)) {
    throw Error("moment monitor: requires s >= max(2 - gamma, 4), got s = " + std::to_string(s));
  }
  if (times.empty() || times.size() != m_s.size() || times.size() != m_s_gamma.size()) {
    throw Error("moment monitor: series lengths differ or are empty");
  }
  if (!(input.f_in_l1 > 0.0) || !(input.f_in_l1_2 > 0.0)) {
    throw Error("moment monitor: initial norms must be positive");
  }

  MomentMonitorReport r;
  r.c_s = moment_production_constant(spec, s) * input.f_in_l1;
  const double c1_prime =
      input.c1_prime > 0.0
          ? input.c1_prime
          : std::pow(2.0, -4.5) * 2.0 * std::numbers::pi * spec.angular.b0 * (2.0 / 3.0) *
                input.f_in_l1 / input.f_in_l1_2;
  r.c1 = std::min(c1_prime, 0.5 * std::numbers::pi);
  const double bold_c1 = r.c1 * std::sin(r.c1);
  const double k = s + gamma - 1.0;
  r.C_s = input.f_in_l1_2 * input.f_in_l1_2 * std::pow(bold_c1, -k) * std::pow(2.0, s * k / 2.0) *
          std::pow(s * s + s + 6.0, k);

  double integral = 0.0;
  r.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0) integral += 0.5 * (times[i] - times[i - 1]) * (m_s_gamma[i] + m_s_gamma[i - 1]);
    const double t = times[i] - times.front();
    const double margin = (m_s.front() + r.C_s * t) - (m_s[i] + 0.5 * r.c_s * integral);
    r.margins.push_back(margin);
    r.min_margin = std::min(r.min_margin, margin);
  }
  return r;
}

DecayFit decay_fit(const std::vector<double>& times, const std::vector<double>& values, double t_a,
                   double t_b, double s, double gamma) {
  if (times.size() != values.size()) throw Error("decay_fit: series lengths differ");
  if (!(t_a < t_b)) throw Error("decay_fit: empty window");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_a || times[i] > t_b) continue;
    if (!(values[i] > 0.0)) {
      throw Error("decay_fit: non-positive sample at t = " + std::to_string(times[i]));
    }
    x.push_back(std::log1p(times[i]));
    y.push_back(std::log(values[i]));
  }
  if (x.size() < 2) throw Error("decay_fit: fewer than two samples in the window");

  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = -x[static_cast<std::size_t>(i)];
    rhs(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);

  DecayFit fit;
  fit.amplitude = std::exp(coef(0));
  fit.exponent = coef(1);
  fit.t_a = t_a;
  fit.t_b = t_b;
  fit.samples = x.size();
  fit.residual = std::sqrt((design * coef - rhs).squaredNorm() / static_cast<double>(n));
  const ExponentReport paper = expected_decay_exponent(s, gamma);
  fit.paper_exponent = paper.value;
  fit.paper_hypothesis_ok = paper.hypothesis_ok;
  return fit;
}

double boundary_mass_fraction(const Field& f, const VelocityGrid& grid) {
  if (static_cast<std::size_t>(f.size()) != grid.size()) throw Error("boundary_mass_fraction: size mismatch");
  const int last = grid.points_per_axis() - 1;
  double edge = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto [i, j, k] = grid.unflatten(p);
    if (i == 0 || j == 0 || k == 0 || i == last || j == last || k == last) edge += f(static_cast<Eigen::Index>(p));
  }
  const double total = f.sum();
  return total > 0.0 ? edge / total : 0.0;
}

double nonsaturation_kappa(const std::vector<double>& times, const std::vector<double>& max_f,
                           double eps, double t_min) {
  if (times.size() != max_f.size()) throw Error("nonsaturation_kappa: series lengths differ");
  double sup = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] >= t_min) sup = std::max(sup, max_f[i]);
  }
  if (!std::isfinite(sup)) throw Error("nonsaturation_kappa: empty window");
  return 1.0 - eps * sup;
}

SweepReport compare_sweep(const std::vector<SweepMember>& members, double fit_t_a, double fit_t_b,
                          double tol_bound) {
  SweepReport report;
  for (const SweepMember& member : members) {
    const TimeSeries& ts = member.series;
    if (ts.records.empty()) throw Error("sweep: member without records");
    std::vector<double> times, max_f, h_rel;
    for (const Record& r : ts.records) {
      times.push_back(r.t);
      max_f.push_back(r.max_f);
      h_rel.push_back(r.H_rel);
    }
    SweepRow row;
    row.epsilon = member.epsilon;
    row.kappa0 = nonsaturation_kappa(times, max_f, member.epsilon, times.front());
    row.final_h_rel = h_rel.back();
    row.max_linf = *std::max_element(max_f.begin(), max_f.end());
    try {
      row.fit = decay_fit(times, h_rel, fit_t_a, fit_t_b, 30.0, ts.gamma);
    } catch (const Error&) {
      row.fit = DecayFit{};
    }
    if (member.epsilon > 0.0 && row.max_linf > 1.0 / member.epsilon + tol_bound) {
      report.pauli_respected = false;
    }
    const double t_mid = 0.5 * (times.front() + times.back());
    double first = 0.0, second = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      (times[i] <= t_mid ? first : second) = std::max(times[i] <= t_mid ? first : second, max_f[i]);
    }
    const double early_rise = std::max(first - max_f.front(), 0.0);
    if (second - first > std::max(0.5 * early_rise, 0.01 * first)) report.no_monotone_growth = false;
    report.uniform_linf_bound = std::max(report.uniform_linf_bound, row.max_linf);
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace bfd
