#include <algorithm>
#include <cmath>
#include <sstream>

#include "rilco/errors.hpp"
#include "rilco/kernels.hpp"
#include "rilco/rng.hpp"
#include "rilco/verify.hpp"

namespace rilco {
namespace {

constexpr int kStates = 25;
constexpr int kActions = 4;

const LossSpec kSymmetric[] = {
    {LossKind::sigmoid, false}, {LossKind::unhinged, false}, {LossKind::logistic, true},
    {LossKind::hinge, true},    {LossKind::ap, false},
};

MdpSpec default_env() { return make_gridworld(5, 0.1, 0.95); }

StateActionDensity random_density(int ns, int na, Rng& rng) {
  StateActionDensity d{Table(ns, na)};
  for (double& v : d.density.flat()) v = -std::log(1.0 - rng.uniform());
  const double z = kernels::sum(d.density.flat());
  for (double& v : d.density.flat()) v /= z;
  return d;
}

StateActionDensity blend(const StateActionDensity& a, const StateActionDensity& b, double w) {
  // w * a + (1 - w) * b
  StateActionDensity out{Table(a.density.rows(), a.density.cols()), a.mode};
  kernels::lerp(w, b.density.flat(), a.density.flat(), out.density.flat());
  return out;
}

StateActionDensity mean_density(const MdpSpec& mdp, std::span<const TabularPolicy> policies) {
  StateActionDensity out{Table(mdp.n_states(), mdp.n_actions())};
  const double w = 1.0 / static_cast<double>(policies.size());
  for (const auto& p : policies) {
    kernels::axpy(w, occupancy_exact(mdp, p).density.flat(), out.density.flat());
  }
  return out;
}

VerificationReport report(std::string name, bool pass, double observed, double threshold,
                          std::string details) {
  return {std::move(name), pass, observed, threshold, std::move(details)};
}

VerificationReport check_losses(const VerifyContext&) {
  std::vector<double> zs;
  for (int i = -5000; i <= 5000; ++i) zs.push_back(0.01 * i);
  double worst_sym = 0.0;
  double best_nonsym = std::numeric_limits<double>::infinity();
  for (const auto& l : kSymmetric) worst_sym = std::max(worst_sym, symmetry_defect(l, zs));
  for (LossKind k : {LossKind::logistic, LossKind::hinge}) {
    best_nonsym = std::min(best_nonsym, symmetry_defect({k, false}, zs));
  }
  std::ostringstream d;
  d << "max symmetric defect=" << worst_sym << " min non-symmetric defect=" << best_nonsym;
  return report("losses", worst_sym < 1e-9 && best_nonsym > 0.1, worst_sym, 1e-9, d.str());
}

VerificationReport check_lemma1(const VerifyContext& ctx) {
  Rng rng = Rng::stream(ctx.seed, 101);
  double worst = 0.0;
  for (const auto& loss : kSymmetric) {
    for (int draw = 0; draw < 1000; ++draw) {
      Classifier g = Classifier::zeros(kStates, kActions, loss);
      for (double& v : g.scores.flat()) v = -4.0 + 8.0 * rng.uniform();
      const auto rho_e = random_density(kStates, kActions, rng);
      const auto rho_n = random_density(kStates, kActions, rng);
      const double alpha = 0.5 + 0.5 * rng.uniform();
      const double kappa = rng.uniform();
      const double lambda = rng.uniform();
      const auto rho_pi = blend(rho_e, rho_n, kappa);
      const auto sides = lemma1_decompose(g, rho_e, rho_n, rho_pi, alpha, kappa, lambda);
      worst = std::max(worst, std::fabs(sides.lhs - sides.rhs));
    }
  }
  return report("lemma1", worst < 1e-9, worst, 1e-9, "5 symmetric losses x 1000 draws");
}

VerificationReport check_eq7(const VerifyContext& ctx) {
  constexpr double alpha = 0.6;
  double worst_residual = 0.0;
  int ordered = 0;
  int compared = 0;
  bool pass = true;
  auto run = [&](const MdpSpec& mdp) {
    const auto snaps = snapshot_policies(mdp, default_temperatures());
    const auto rho_e = occupancy_exact(mdp, snaps.front());
    const auto rho_n = occupancy_exact(mdp, snaps.back());
    const auto target = blend(rho_e, rho_n, alpha);
    const TabularPolicy opt = density_matching_optimum(rho_e, rho_n, alpha);
    const auto rho_opt = occupancy_exact(mdp, opt);
    worst_residual = std::max(worst_residual, kernels::max_abs_diff(rho_opt.density.flat(),
                                                                    target.density.flat()));
    const double re = expected_return(mdp, snaps.front());
    const double rn = expected_return(mdp, snaps.back());
    const double ro = expected_return(mdp, opt);
    if (std::fabs(re - rn) > 0.01) {
      ++compared;
      const double lo = std::min(re, rn);
      const double hi = std::max(re, rn);
      if (ro > lo + 1e-6 && ro < hi - 1e-6) {
        ++ordered;
      } else {
        pass = false;
      }
    }
  };
  for (int m = 0; m < 50; ++m) {
    run(make_random_mdp(12, 3, 4, 0.9, Rng::stream(ctx.seed, 200 + m).next()));
  }
  run(ctx.env != nullptr ? *ctx.env : default_env());
  pass = pass && worst_residual < 1e-9;
  std::ostringstream d;
  d << "51 MDPs, alpha=0.6, strictly ordered " << ordered << "/" << compared;
  return report("eq7", pass, worst_residual, 1e-9, d.str());
}

VerificationReport check_eq15(const VerifyContext&) {
  const auto sweep = sweep_inequality_region(101);
  const bool points = check_inequality_region(0.51, 1.0, 0.5).pass &&
                      !check_inequality_region(0.6, 1.0, 0.0).pass &&
                      check_inequality_region(0.9, 0.0, 0.0).pass;
  std::size_t passing = 0;
  for (bool b : sweep.pass_everywhere) passing += b ? 1 : 0;
  std::ostringstream d;
  d << "101^3 grid; lambdas passing everywhere: " << passing << "/" << sweep.lambdas.size();
  return report("eq15", sweep.claim_holds && points, sweep.claim_holds ? 1.0 : 0.0, 1.0, d.str());
}

VerificationReport check_gradient(const VerifyContext& ctx) {
  const LossSpec losses[] = {
      {LossKind::logistic, false}, {LossKind::hinge, false}, {LossKind::sigmoid, false},
      {LossKind::unhinged, false}, {LossKind::logistic, true}, {LossKind::hinge, true},
      {LossKind::ap, false},
  };
  Rng rng = Rng::stream(ctx.seed, 300);
  double worst = 0.0;
  constexpr int ns = 6;
  constexpr int na = 3;
  auto draw_batch = [&](std::size_t n) {
    std::vector<StateAction> b(n);
    for (auto& x : b) {
      x = {static_cast<int>(rng.below(ns)), static_cast<int>(rng.below(na))};
    }
    return b;
  };
  for (int trial = 0; trial < 100; ++trial) {
    const LossSpec& loss = losses[trial % std::size(losses)];
    Classifier g = Classifier::zeros(ns, na, loss);
    for (double& v : g.scores.flat()) {
      // Keep clear of the hinge kinks at |g| = 1.
      do {
        v = -3.0 + 6.0 * rng.uniform();
      } while (std::fabs(std::fabs(v) - 1.0) < 1e-2);
    }
    const auto data = draw_batch(1 + rng.below(20));
    const auto pseudo = draw_batch(rng.below(8));
    const auto policy = draw_batch(1 + rng.below(20));
    const double lambda = rng.uniform();
    const double wd = rng.uniform() < 0.5 ? 0.0 : 0.1 * rng.uniform();
    const Table grad = risk_gradient(g, data, pseudo, policy, lambda, wd);
    std::vector<double> fd(grad.size());
    constexpr double h = 1e-6;
    for (std::size_t i = 0; i < fd.size(); ++i) {
      Classifier p = g;
      Classifier m = g;
      p.scores.flat()[i] += h;
      m.scores.flat()[i] -= h;
      fd[i] = (regularized_objective(p, data, pseudo, policy, lambda, wd) -
               regularized_objective(m, data, pseudo, policy, lambda, wd)) /
              (2.0 * h);
    }
    std::vector<double> diff(fd);
    kernels::axpy(-1.0, grad.flat(), diff);
    const double norm = std::sqrt(kernels::dot(grad.flat(), grad.flat()));
    const double err = std::sqrt(kernels::dot(diff, diff)) / std::max(norm, 1e-12);
    worst = std::max(worst, err);
  }
  return report("gradient", worst < 1e-5, worst, 1e-5, "100 configs, central differences h=1e-6");
}

VerificationReport check_occupancy(const VerifyContext& ctx) {
  const MdpSpec base = ctx.env != nullptr ? *ctx.env : default_env();
  const auto snaps = snapshot_policies(base, default_temperatures());
  const TabularPolicy& pi = snaps[2];
  const int ns = base.n_states();
  const int na = base.n_actions();
  const double gamma = base.gamma();

  // Flow conservation: d(s') = (1 - gamma) p1(s') + gamma sum rho(s, a) P(s' | s, a).
  const auto rho = occupancy_exact(base, pi);
  std::vector<double> inflow(ns, 0.0);
  for (int s = 0; s < ns; ++s) {
    for (int a = 0; a < na; ++a) kernels::axpy(gamma * rho.density(s, a), base.transition(s, a), inflow);
  }
  double flow = 0.0;
  for (int s = 0; s < ns; ++s) {
    const double d = kernels::sum(rho.density.row(s));
    flow = std::max(flow, std::fabs(d - (1.0 - gamma) * base.initial()[s] - inflow[s]));
  }

  // Finite horizon with gamma^T < 1e-12 against the linear solve.
  const MdpSpec long_env(ns, na, std::vector<double>(base.transition_flat().begin(),
                                                      base.transition_flat().end()),
                         std::vector<double>(base.initial().begin(), base.initial().end()),
                         base.reward(), gamma, horizon_for(gamma, 1e-12));
  const auto finite = occupancy_exact(long_env, pi, NormalizationMode::finite_horizon);
  const double horizon_gap = kernels::max_abs_diff(finite.density.flat(), rho.density.flat());

  // Monte Carlo: sample means of a few test functions within 3 standard errors.
  const auto target = occupancy_exact(base, pi, NormalizationMode::finite_horizon);
  Rng fn_rng = Rng::stream(ctx.seed, 400);
  std::vector<Table> fns{base.reward()};
  for (int i = 0; i < 4; ++i) {
    Table f(ns, na);
    for (double& v : f.flat()) v = fn_rng.uniform();
    fns.push_back(std::move(f));
  }
  constexpr int n = 100000;
  std::vector<double> sum(fns.size(), 0.0), sq(fns.size(), 0.0);
  Rng rng = Rng::stream(ctx.seed, 401);
  for (int i = 0; i < n; ++i) {
    const StateAction x = sample_occupancy_pair(base, pi, rng);
    for (std::size_t k = 0; k < fns.size(); ++k) {
      const double v = fns[k](x.state, x.action);
      sum[k] += v;
      sq[k] += v * v;
    }
  }
  double worst_z = 0.0;
  for (std::size_t k = 0; k < fns.size(); ++k) {
    const double mean = sum[k] / n;
    const double var = std::max(sq[k] / n - mean * mean, 1e-300);
    const double exact = kernels::dot(target.density.flat(), fns[k].flat());
    worst_z = std::max(worst_z, std::fabs(mean - exact) / std::sqrt(var / n));
  }

  const bool pass = flow < 1e-9 && horizon_gap < 1e-9 && worst_z < 3.0;
  std::ostringstream d;
  d << "flow residual=" << flow << " finite-vs-infinite=" << horizon_gap
    << " monte-carlo max |z|=" << worst_z << " (1e5 draws)";
  return report("occupancy", pass, std::max(flow, horizon_gap), 1e-9, d.str());
}

VerificationReport check_theorem1(const VerifyContext& ctx) {
  Rng rng = Rng::stream(ctx.seed, 500);
  const LossSpec loss{LossKind::ap, false};
  double min_gap = std::numeric_limits<double>::infinity();
  int pairs = 0;
  while (pairs < 20) {
    const auto e = random_density(kStates, kActions, rng);
    const auto n = random_density(kStates, kActions, rng);
    if (total_variation(e.density, n.density) <= 0.1) continue;
    const auto fit = fit_classifier_exact(loss, e, n);
    min_gap = std::min(min_gap, theorem1_gap(fit.g, e, n));
    ++pairs;
  }
  const MdpSpec env = ctx.env != nullptr ? *ctx.env : default_env();
  const auto snaps = snapshot_policies(env, default_temperatures());
  const auto rho_e = occupancy_exact(env, snaps.front());
  const auto rho_n = mean_density(env, std::span(snaps).subspan(1));
  const double env_gap = theorem1_gap(fit_classifier_exact(loss, rho_e, rho_n).g, rho_e, rho_n);
  std::ostringstream d;
  d << "20 random pairs (TV > 0.1), AP loss; benchmark env gap=" << env_gap;
  return report("theorem1", min_gap > 0.0 && env_gap > 0.0, std::min(min_gap, env_gap), 0.0,
                d.str());
}

VerificationReport check_kappa(const VerifyContext& ctx) {
  const MdpSpec env = ctx.env != nullptr ? *ctx.env : default_env();
  const auto snaps = snapshot_policies(env, default_temperatures());
  const auto rho_e = occupancy_exact(env, snaps.front());
  const auto rho_n = mean_density(env, std::span(snaps).subspan(1));
  double worst = 0.0;
  for (double k : {0.0, 0.3, 0.7, 1.0}) {
    const auto est = kappa_estimate(blend(rho_e, rho_n, k), rho_e, rho_n);
    worst = std::max({worst, std::fabs(est.kappa - k), est.residual});
  }
  const auto uniform = occupancy_exact(env, TabularPolicy::uniform(env.n_states(), env.n_actions()));
  const auto est = kappa_estimate(uniform, rho_e, rho_n);
  const bool clipped = est.kappa >= 0.0 && est.kappa <= 1.0 && est.residual >= 0.0;
  std::ostringstream d;
  d << "segment members exact; uniform policy kappa=" << est.kappa
    << " residual=" << est.residual;
  return report("kappa", worst < 1e-12 && clipped, worst, 1e-12, d.str());
}

}  // namespace

const std::vector<RegisteredCheck>& verification_checks() {
  static const std::vector<RegisteredCheck> checks{
      {"losses", "symmetry defect of every loss on [-50, 50]", check_losses},
      {"lemma1", "balanced-risk decomposition, randomized", check_lemma1},
      {"eq7", "density-matching optimum round trip and return ordering", check_eq7},
      {"eq15", "alpha - kappa (1 - lambda) > 0 region sweep", check_eq15},
      {"gradient", "risk gradient against finite differences", check_gradient},
      {"occupancy", "occupancy flow, horizon and Monte Carlo oracles", check_occupancy},
      {"theorem1", "payoff gap of the converged classifier", check_theorem1},
      {"kappa", "kappa projection diagnostic", check_kappa},
  };
  return checks;
}

}  // namespace rilco
