#include "rilco/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rilco/errors.hpp"
#include "rilco/kernels.hpp"

namespace rilco {

TabularPolicy density_matching_optimum(const StateActionDensity& rho_e,
                                       const StateActionDensity& rho_n, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
  const TabularPolicy pi_e = policy_from_density(rho_e);
  const TabularPolicy pi_n = policy_from_density(rho_n);
  const std::size_t ns = rho_e.density.rows();
  const std::size_t na = rho_e.density.cols();
  TabularPolicy out{Table(ns, na)};
  for (std::size_t s = 0; s < ns; ++s) {
    const double me = alpha * kernels::sum(rho_e.density.row(s));
    const double mn = (1.0 - alpha) * kernels::sum(rho_n.density.row(s));
    const double total = me + mn;
    if (total <= 0.0) {
      for (std::size_t a = 0; a < na; ++a) out.probs(s, a) = 1.0 / static_cast<double>(na);
      continue;
    }
    const double w = me / total;
    kernels::lerp(1.0 - w, pi_e.probs.row(s), pi_n.probs.row(s), out.probs.row(s));
  }
  return out;
}

VerificationReport check_inequality_region(double alpha, double kappa, double lambda) {
  VerificationReport r;
  r.check_name = "eq15_point";
  r.observed = alpha - kappa * (1.0 - lambda);
  r.threshold = 0.0;
  r.pass = r.observed > 0.0;
  std::ostringstream d;
  d << "alpha=" << alpha << " kappa=" << kappa << " lambda=" << lambda;
  r.details = d.str();
  return r;
}

InequalitySweep sweep_inequality_region(int n) {
  if (n < 2) throw DomainError("grid needs at least two points per axis");
  InequalitySweep out;
  out.claim_holds = true;
  for (int k = 0; k < n; ++k) {
    const double lambda = static_cast<double>(k) / (n - 1);
    bool all = true;
    for (int i = 0; i < n && all; ++i) {
      const double alpha = 0.5 + 0.5 * static_cast<double>(i + 1) / n;
      for (int j = 0; j < n; ++j) {
        const double kappa = static_cast<double>(j) / (n - 1);
        if (!(alpha - kappa * (1.0 - lambda) > 0.0)) {
          all = false;
          break;
        }
      }
    }
    out.lambdas.push_back(lambda);
    out.pass_everywhere.push_back(all);
    if (all != (lambda >= 0.5)) out.claim_holds = false;
  }
  return out;
}

double theorem1_gap(const Classifier& g_star, const StateActionDensity& rho_e,
                    const StateActionDensity& rho_n) {
  double gap = 0.0;
  const auto s = g_star.scores.flat();
  const auto e = rho_e.density.flat();
  const auto n = rho_n.density.flat();
  for (std::size_t i = 0; i < s.size(); ++i) {
    gap += (e[i] - n[i]) * eval_loss(g_star.loss, -s[i]);
  }
  return gap;
}

KappaEstimate kappa_estimate(const StateActionDensity& rho_pi, const StateActionDensity& rho_e,
                             const StateActionDensity& rho_n) {
  const auto pi = rho_pi.density.flat();
  const auto e = rho_e.density.flat();
  const auto n = rho_n.density.flat();
  std::vector<double> u(e.size()), v(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    u[i] = e[i] - n[i];
    v[i] = pi[i] - n[i];
  }
  const double uu = kernels::dot(u, u);
  if (!(uu > 0.0)) throw DomainError("kappa is undefined when rho_E equals rho_N");
  KappaEstimate k;
  k.kappa = std::clamp(kernels::dot(u, v) / uu, 0.0, 1.0);
  kernels::axpy(-k.kappa, u, v);
  k.residual = std::sqrt(kernels::dot(v, v));
  return k;
}

double total_variation(const Table& a, const Table& b) {
  double tv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) tv += std::fabs(a.flat()[i] - b.flat()[i]);
  return 0.5 * tv;
}

}  // namespace rilco
