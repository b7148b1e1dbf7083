#include "optfair/theorems.hpp"

#include <algorithm>
#include <cmath>

namespace optfair {

std::vector<double> d_matrix_diag(const NgosSpec& spec, double epsilon) {
  std::vector<double> d(spec.dim());
  for (std::size_t j = 0; j < spec.dim(); ++j) {
    const double denom = spec.p0 * (spec.mu_0[j] * spec.mu_0[j] + spec.theta_0[j] * spec.theta_0[j]) +
                         spec.p1() * (spec.mu_1[j] * spec.mu_1[j] + spec.theta_1[j] * spec.theta_1[j]) +
                         epsilon;
    if (!(denom > 0.0)) throw ValidationError("d_matrix: non-positive denominator");
    d[j] = 1.0 / std::sqrt(denom);
  }
  return d;
}

std::vector<double> v_limit(const NgosSpec& spec) {
  std::vector<double> lim(spec.dim());
  for (std::size_t j = 0; j < spec.dim(); ++j)
    lim[j] = spec.p0 * (spec.mu_0[j] * spec.mu_0[j] + spec.theta_0[j] * spec.theta_0[j]) +
             spec.p1() * (spec.mu_1[j] * spec.mu_1[j] + spec.theta_1[j] * spec.theta_1[j]);
  return lim;
}

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

Theorem2Report check_theorem2(const NgosSpec& spec, double gamma, double epsilon, int steps,
                              long draws, SeededStream& stream) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("theorem2: gamma must be in (0,1)");
  if (steps <= 0 || std::pow(gamma, steps) >= 1e-3)
    throw ValidationError("theorem2: steps too small, gamma^steps must be below 1e-3");
  if (draws <= 0) throw ValidationError("theorem2: draws must be positive");
  const auto rep0 = validate_ngos(spec);
  if (!rep0.all_passed()) throw ValidationError("theorem2: NGOS spec failed validation");

  const std::size_t d = spec.dim();
  Theorem2Report rep;
  rep.d_diag = d_matrix_diag(spec, epsilon);
  rep.condition_met =
      std::all_of(rep.d_diag.begin(), rep.d_diag.end(), [](double x) { return x < 1.0; });
  rep.v_limit = v_limit(spec);
  rep.sample_count = draws;

  // Monte-Carlo distribution of the second-moment accumulator after `steps`
  // iterations, one independent run per draw.
  std::vector<double> mean(d, 0.0), m2(d, 0.0), v(d);
  for (long r = 0; r < draws; ++r) {
    std::fill(v.begin(), v.end(), 0.0);
    for (int k = 0; k < steps; ++k) {
      const auto g = sample_ngos_gradient(spec, stream);
      for (std::size_t j = 0; j < d; ++j)
        v[j] = gamma * v[j] + (1.0 - gamma) * g.grad[j] * g.grad[j];
    }
    for (std::size_t j = 0; j < d; ++j) {
      const double delta = v[j] - mean[j];
      mean[j] += delta / static_cast<double>(r + 1);
      m2[j] += delta * (v[j] - mean[j]);
    }
  }
  rep.v_mean = mean;
  rep.v_stderr.resize(d);
  rep.v_within_tolerance = true;
  for (std::size_t j = 0; j < d; ++j) {
    rep.v_stderr[j] = std::sqrt(m2[j] / static_cast<double>(draws - 1) / static_cast<double>(draws));
    if (std::fabs(rep.v_mean[j] - rep.v_limit[j]) > 3.0 * rep.v_stderr[j])
      rep.v_within_tolerance = false;
  }

  // Operator-norm contraction on paired subgroup draws.
  const double d_max = *std::max_element(rep.d_diag.begin(), rep.d_diag.end());
  NgosSpec only0 = spec, only1 = spec;
  only0.p0 = 1.0;
  only1.p0 = 0.0;
  std::vector<double> diff(d), scaled(d);
  rep.contraction_draws = draws;
  for (long r = 0; r < draws; ++r) {
    const auto g0 = sample_ngos_gradient(only0, stream);
    const auto g1 = sample_ngos_gradient(only1, stream);
    for (std::size_t j = 0; j < d; ++j) {
      diff[j] = g0.grad[j] - g1.grad[j];
      scaled[j] = rep.d_diag[j] * diff[j];
    }
    const double n_diff = norm2(diff);
    const double n_scaled = norm2(scaled);
    const double slack = 1e-12 * std::max(1.0, n_diff);
    bool ok = n_scaled <= d_max * n_diff + slack;
    if (d_max <= 1.0) ok = ok && n_scaled <= n_diff + slack;
    if (!ok) ++rep.contraction_violations;
  }

  rep.satisfied = rep.v_within_tolerance && rep.contraction_violations == 0 &&
                  (!rep.condition_met || d_max < 1.0);
  return rep;
}

Theorem3Report check_theorem3(const QuadraticSubgroups& model, const NgosSpec& d_spec, double w,
                              double eta, double epsilon, long draws, SeededStream& stream) {
  if (draws <= 0) throw ValidationError("theorem3: draws must be positive");
  const double l0 = subgroup_loss(model, 0, w);
  const double l1 = subgroup_loss(model, 1, w);
  if (l0 == l1)
    throw UndefinedValueError("theorem3: subgroup losses coincide at w, gap direction undefined");
  const double phi = l0 > l1 ? 1.0 : -1.0;
  const double dpsi = model.center_1 - model.center_0;  // gradient of L0 - L1

  Theorem3Report rep;
  rep.d_diag = d_matrix_diag(d_spec, epsilon);
  rep.strict =
      std::all_of(rep.d_diag.begin(), rep.d_diag.end(), [](double x) { return x < 1.0; });
  rep.draws = draws;

  const std::size_t d = d_spec.dim();
  const double dim = static_cast<double>(d);
  const double norm_dpsi = std::fabs(dpsi) * std::sqrt(dim);
  double norm_d_dpsi2 = 0.0, sum_d = 0.0;
  for (double djj : rep.d_diag) {
    norm_d_dpsi2 += djj * djj * dpsi * dpsi;
    sum_d += djj;
  }
  const double norm_d_dpsi = std::sqrt(norm_d_dpsi2);

  for (long r = 0; r < draws; ++r) {
    // Scalar warm-up gradient broadcast across the spec's coordinates.
    const auto g = sample_gradient(model, stream, w);
    const double norm_g = std::fabs(g.grad) * std::sqrt(dim);
    if (norm_g == 0.0) {
      ++rep.zero_gradient_draws;
      continue;
    }
    const double sgd_bound = eta * norm_dpsi * norm_g;
    const double rms_bound = eta * norm_d_dpsi * norm_g;
    const double realized_sgd = -eta * phi * dpsi * g.grad * dim;
    const double realized_rms = -eta * phi * dpsi * g.grad * sum_d;
    rep.sgd_bound_mean += sgd_bound;
    rep.rms_bound_mean += rms_bound;
    rep.realized_sgd_mean += realized_sgd;
    rep.realized_rms_mean += realized_rms;

    const double slack = 1e-12 * sgd_bound;
    bool ok = rep.strict ? rms_bound < sgd_bound : rms_bound <= sgd_bound + slack;
    // Realized first-order changes must respect their own bounds.
    ok = ok && std::fabs(realized_sgd) <= sgd_bound + slack &&
         std::fabs(realized_rms) <= rms_bound + slack;
    if (!ok) ++rep.violations;
  }
  const double used = static_cast<double>(draws - rep.zero_gradient_draws);
  if (used > 0) {
    rep.sgd_bound_mean /= used;
    rep.rms_bound_mean /= used;
    rep.realized_sgd_mean /= used;
    rep.realized_rms_mean /= used;
  }
  rep.satisfied = rep.violations == 0;
  return rep;
}

std::vector<VarianceScalingPoint> v_variance_scaling(const NgosSpec& spec,
                                                     std::span<const double> gammas, long draws,
                                                     std::uint64_t master_seed) {
  if (draws < 2) throw ValidationError("variance scaling: need at least 2 draws");
  std::vector<VarianceScalingPoint> out;
  const std::size_t d = spec.dim();
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    const double gamma = gammas[gi];
    if (!(gamma > 0.0 && gamma < 1.0))
      throw ValidationError("variance scaling: gamma must be in (0,1)");
    // Transient decays like gamma^k; 12 relaxation times is plenty.
    const int steps = static_cast<int>(std::ceil(12.0 / (1.0 - gamma)));
    std::vector<double> mean(d, 0.0), m2(d, 0.0), v(d);
    for (long r = 0; r < draws; ++r) {
      SeededStream stream(master_seed, gi * static_cast<std::uint64_t>(draws) + r);
      std::fill(v.begin(), v.end(), 0.0);
      for (int k = 0; k < steps; ++k) {
        const auto g = sample_ngos_gradient(spec, stream);
        for (std::size_t j = 0; j < d; ++j)
          v[j] = gamma * v[j] + (1.0 - gamma) * g.grad[j] * g.grad[j];
      }
      for (std::size_t j = 0; j < d; ++j) {
        const double delta = v[j] - mean[j];
        mean[j] += delta / static_cast<double>(r + 1);
        m2[j] += delta * (v[j] - mean[j]);
      }
    }
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += m2[j] / static_cast<double>(draws - 1);
    out.push_back({gamma, steps, var / static_cast<double>(d)});
  }
  return out;
}

}  // namespace optfair
