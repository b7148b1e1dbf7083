#include "optfair/subgroup.hpp"

#include <algorithm>
#include <cmath>

namespace optfair {

void QuadraticSubgroups::validate() const {
  if (!(p0 > 0.0 && p0 < 1.0)) throw ValidationError("subgroups: p0 must lie in (0,1)");
  if (!std::isfinite(center_0) || !std::isfinite(center_1))
    throw ValidationError("subgroups: centers must be finite");
}

double subgroup_loss(const QuadraticSubgroups& model, int q, double w) {
  if (q != 0 && q != 1) throw ValidationError("subgroup_loss: q must be 0 or 1");
  const double c = q == 0 ? model.center_0 : model.center_1;
  return 0.5 * (w - c) * (w - c);
}

double population_loss(const QuadraticSubgroups& model, double w) {
  return model.p0 * subgroup_loss(model, 0, w) + model.p1() * subgroup_loss(model, 1, w);
}

double population_grad(const QuadraticSubgroups& model, double w) {
  return model.p0 * (w - model.center_0) + model.p1() * (w - model.center_1);
}

SampledGradient sample_gradient(const QuadraticSubgroups& model, SeededStream& stream, double w) {
  const int q = stream.next_bernoulli(model.p0) ? 0 : 1;
  const double c = q == 0 ? model.center_0 : model.center_1;
  return {w - c, q};
}

double dp_gap(const QuadraticSubgroups& model, double w) {
  return std::fabs(subgroup_loss(model, 0, w) - subgroup_loss(model, 1, w));
}

bool NgosSpec::isotropic() const {
  auto uniform = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  return !theta_0.empty() && uniform(theta_0) && uniform(theta_1);
}

void NgosSpec::validate() const {
  const auto report = validate_ngos(*this);
  if (!report.all_passed()) {
    std::string msg = "NGOS spec invalid:";
    for (const auto& c : report.checks)
      if (!c.passed) msg += " [" + c.condition + ": " + c.detail + "]";
    throw ValidationError(msg);
  }
}

NgosSpec NgosSpec::isotropic1d(double mu0, double mu1, double theta0, double theta1, double p0) {
  NgosSpec s;
  s.mu_0 = {mu0};
  s.mu_1 = {mu1};
  s.theta_0 = {theta0};
  s.theta_1 = {theta1};
  s.p0 = p0;
  return s;
}

VectorSample sample_ngos_gradient(const NgosSpec& spec, SeededStream& stream) {
  // Cheap structural check only; callers wanting the full report use validate_ngos.
  // Degenerate mixtures (p0 = 0 or 1) are allowed when sampling.
  if (spec.mu_0.empty() || spec.mu_1.size() != spec.mu_0.size() ||
      spec.theta_0.size() != spec.mu_0.size() || spec.theta_1.size() != spec.mu_0.size() ||
      !(spec.p0 >= 0.0 && spec.p0 <= 1.0))
    throw ValidationError("NGOS spec invalid: dimensions or p0");
  VectorSample out;
  out.subgroup = stream.next_bernoulli(spec.p0) ? 0 : 1;
  const auto& mu = out.subgroup == 0 ? spec.mu_0 : spec.mu_1;
  const auto& theta = out.subgroup == 0 ? spec.theta_0 : spec.theta_1;
  out.grad.resize(spec.dim());
  for (std::size_t j = 0; j < spec.dim(); ++j)
    out.grad[j] = stream.next_gaussian(mu[j], theta[j]);
  return out;
}

namespace {

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

bool NgosValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const NgosCheck& c) { return c.passed; });
}

NgosValidationReport validate_ngos(const NgosSpec& spec) {
  NgosValidationReport rep;

  const bool dims_ok = !spec.mu_0.empty() && spec.mu_1.size() == spec.mu_0.size() &&
                       spec.theta_0.size() == spec.mu_0.size() &&
                       spec.theta_1.size() == spec.mu_0.size();
  rep.checks.push_back({"dimensions", dims_ok, false,
                        dims_ok ? "mu and theta vectors agree" : "vector lengths differ or empty"});

  const bool p_ok = spec.p0 > 0.0 && spec.p0 < 1.0;
  rep.checks.push_back({"sampling-probability", p_ok, false,
                        p_ok ? "p0 in (0,1)" : "p0 outside (0,1)"});

  const bool theta_ok = std::isfinite(spec.theta_global) && spec.theta_global >= 0.0;
  rep.checks.push_back({"scale-parameter", theta_ok, false,
                        theta_ok ? "finite, non-negative" : "negative or non-finite"});

  const bool means_finite = all_finite(spec.mu_0) && all_finite(spec.mu_1);
  rep.checks.push_back({"gradient-lipschitz", means_finite, false,
                        means_finite ? "constant mean field, finite"
                                     : "non-finite mean entry"});

  bool noise_ok = all_finite(spec.theta_0) && all_finite(spec.theta_1);
  double max_scale = 0.0;
  if (noise_ok) {
    for (double t : spec.theta_0) {
      noise_ok = noise_ok && t >= 0.0;
      max_scale = std::max(max_scale, t);
    }
    for (double t : spec.theta_1) {
      noise_ok = noise_ok && t >= 0.0;
      max_scale = std::max(max_scale, t);
    }
  }
  rep.checks.push_back({"covariance-root-bounded", noise_ok, false,
                        noise_ok ? "diagonal root bounded by " + std::to_string(max_scale)
                                 : "negative or non-finite noise scale"});

  // Gaussian family: smoothness, low skewness, and bounded moments hold
  // analytically; reported rather than measured.
  rep.checks.push_back({"derivative-growth", true, true, "polynomial growth (Gaussian)"});
  rep.checks.push_back({"low-skewness", true, true, "zero third moment (Gaussian)"});
  rep.checks.push_back({"bounded-moments", true, true, "all moments finite (Gaussian)"});
  return rep;
}

}  // namespace optfair
