#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rilco/errors.hpp"
#include "rilco/rng.hpp"
#include "rilco/risk.hpp"

using namespace rilco;

namespace {

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

const LossSpec kSymmetric[] = {{LossKind::sigmoid, false}, {LossKind::unhinged, false},
                               {LossKind::logistic, true}, {LossKind::hinge, true},
                               {LossKind::ap, false}};

StateActionDensity random_density(int ns, int na, Rng& rng) {
  StateActionDensity d{Table(ns, na)};
  double sum = 0.0;
  for (double& x : d.density.flat()) sum += (x = -std::log(1.0 - rng.uniform()));
  for (double& x : d.density.flat()) x /= sum;
  return d;
}

Classifier random_classifier(int ns, int na, LossSpec loss, Rng& rng) {
  Classifier g{Table(ns, na), loss};
  for (double& x : g.scores.flat()) x = uniform(rng, -3.0, 3.0);
  return g;
}

std::vector<StateAction> random_batch(int n, int ns, int na, Rng& rng) {
  std::vector<StateAction> out;
  for (int i = 0; i < n; ++i) {
    out.push_back({static_cast<int>(rng.below(ns)), static_cast<int>(rng.below(na))});
  }
  return out;
}

}  // namespace

TEST(Classifier, ZerosAndSymmetryGuard) {
  const Classifier g = Classifier::zeros(3, 2, {LossKind::ap, false}, true);
  EXPECT_EQ(g.max_abs_score(), 0.0);
  EXPECT_THROW(Classifier::zeros(3, 2, {LossKind::logistic, false}, true), DomainError);
  EXPECT_NO_THROW(Classifier::zeros(3, 2, {LossKind::logistic, false}, false));
}

TEST(BalancedRisk, HandExample) {
  // Two cells; g = (1, -1). Positives sit on cell 0, negatives on cell 1.
  Classifier g{Table(1, 2), {LossKind::sigmoid, false}};
  g.scores(0, 0) = 1.0;
  g.scores(0, 1) = -1.0;
  StateActionDensity pos{Table(1, 2)}, neg{Table(1, 2)};
  pos.density(0, 0) = 1.0;
  neg.density(0, 1) = 1.0;
  const double s = 1.0 / (1.0 + std::exp(1.0));  // sigmoid loss at z = 1
  EXPECT_NEAR(balanced_risk_exact(g, pos, neg), s, 1e-15);
  EXPECT_NEAR(balanced_risk_exact(g, neg, pos), 1.0 - s, 1e-15);
  StateActionDensity wrong{Table(2, 2)};
  EXPECT_THROW(balanced_risk_exact(g, pos, wrong), InvariantError);
}

TEST(Mixture, LambdaEndpoints) {
  Rng rng(3);
  const auto n = random_density(4, 3, rng), p = random_density(4, 3, rng);
  EXPECT_EQ(mixture_density_lambda(n, p, 1.0).density, n.density);
  EXPECT_EQ(mixture_density_lambda(n, p, 0.0).density, p.density);
  const auto half = mixture_density_lambda(n, p, 0.25);
  for (int s = 0; s < 4; ++s) {
    for (int a = 0; a < 3; ++a) {
      EXPECT_NEAR(half.density(s, a), 0.25 * n.density(s, a) + 0.75 * p.density(s, a), 1e-16);
    }
  }
  EXPECT_THROW(mixture_density_lambda(n, p, 1.5), DomainError);
}

TEST(Lemma1, IdentityHoldsForSymmetricLosses) {
  Rng rng(11);
  for (const auto& loss : kSymmetric) {
    for (int trial = 0; trial < 50; ++trial) {
      const auto e = random_density(5, 3, rng), n = random_density(5, 3, rng);
      const double kappa = rng.uniform(), alpha = uniform(rng, 0.5, 1.0), lambda = rng.uniform();
      StateActionDensity pi{Table(5, 3)};
      for (std::size_t i = 0; i < pi.density.size(); ++i) {
        pi.density.flat()[i] = kappa * e.density.flat()[i] + (1 - kappa) * n.density.flat()[i];
      }
      const auto sides =
          lemma1_decompose(random_classifier(5, 3, loss, rng), e, n, pi, alpha, kappa, lambda);
      EXPECT_NEAR(sides.lhs, sides.rhs, 1e-12) << loss.token();
    }
  }
}

TEST(Lemma1, BreaksWithoutSymmetry) {
  Rng rng(12);
  const auto e = random_density(5, 3, rng), n = random_density(5, 3, rng);
  const LossSpec logistic{LossKind::logistic, false};
  EXPECT_THROW(lemma1_decompose(random_classifier(5, 3, logistic, rng), e, n, e, 0.8, 1.0, 0.2),
               DomainError);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double kappa = rng.uniform();
    StateActionDensity pi{Table(5, 3)};
    for (std::size_t i = 0; i < pi.density.size(); ++i) {
      pi.density.flat()[i] = kappa * e.density.flat()[i] + (1 - kappa) * n.density.flat()[i];
    }
    const auto sides = lemma1_decompose_unchecked(random_classifier(5, 3, logistic, rng), e, n, pi,
                                                  0.8, kappa, 0.2);
    worst = std::max(worst, std::fabs(sides.lhs - sides.rhs));
  }
  EXPECT_GT(worst, 1e-3);
}

TEST(EmpiricalRisk, HandComputed) {
  const LossSpec loss{LossKind::unhinged, false};  // l(z) = 1 - z
  Classifier g{Table(2, 1), loss};
  g.scores(0, 0) = 0.5;
  g.scores(1, 0) = -2.0;
  const std::vector<StateAction> data{{0, 0}, {1, 0}};
  const std::vector<StateAction> pseudo{{1, 0}};
  const std::vector<StateAction> policy{{0, 0}};
  const RiskReport r = empirical_risk_co(g, data, pseudo, policy, 0.25);
  const double data_term = 0.5 * ((1 - 0.5) + (1 + 2.0)) / 2.0;
  const double pseudo_term = 0.25 / 2.0 * (1 - 2.0);
  const double policy_term = 0.75 / 2.0 * (1 + 0.5);
  EXPECT_NEAR(r.term_data, data_term, 1e-15);
  EXPECT_NEAR(r.term_pseudo, pseudo_term, 1e-15);
  EXPECT_NEAR(r.term_policy, policy_term, 1e-15);
  EXPECT_NEAR(r.total, data_term + pseudo_term + policy_term, 1e-15);
  EXPECT_EQ(r.lambda, 0.25);

  const RiskReport empty = empirical_risk_co(g, data, {}, policy, 0.25);
  EXPECT_EQ(empty.term_pseudo, 0.0);
  EXPECT_NEAR(empty.total, data_term + policy_term, 1e-15);

  const RiskReport same = empirical_risk_pseudo(g, data, pseudo, policy, 0.25);
  EXPECT_EQ(same.total, r.total);

  EXPECT_THROW(empirical_risk_co(g, {}, pseudo, policy, 0.25), DomainError);
  EXPECT_THROW(empirical_risk_co(g, data, pseudo, {}, 0.25), DomainError);
  EXPECT_THROW(empirical_risk_co(g, data, pseudo, policy, -0.1), DomainError);
}

TEST(RiskGradient, MatchesFiniteDifferences) {
  Rng rng(21);
  const LossSpec losses[] = {{LossKind::logistic, false}, {LossKind::hinge, false},
                             {LossKind::sigmoid, false},  {LossKind::unhinged, false},
                             {LossKind::logistic, true},  {LossKind::ap, false}};
  for (const auto& loss : losses) {
    for (int trial = 0; trial < 10; ++trial) {
      Classifier g = random_classifier(4, 3, loss, rng);
      // hinge is not differentiable at z = +-1; keep away from the kinks.
      for (double& x : g.scores.flat()) {
        if (std::fabs(std::fabs(x) - 1.0) < 0.05) x += 0.1;
      }
      const auto data = random_batch(9, 4, 3, rng), pseudo = random_batch(4, 4, 3, rng),
                 policy = random_batch(7, 4, 3, rng);
      const double lambda = rng.uniform(), wd = 0.01;
      const Table grad = risk_gradient(g, data, pseudo, policy, lambda, wd);
      constexpr double h = 1e-6;
      for (std::size_t i = 0; i < g.scores.size(); ++i) {
        Classifier up = g, down = g;
        up.scores.flat()[i] += h;
        down.scores.flat()[i] -= h;
        const double fd = (regularized_objective(up, data, pseudo, policy, lambda, wd) -
                           regularized_objective(down, data, pseudo, policy, lambda, wd)) /
                          (2 * h);
        EXPECT_NEAR(grad.flat()[i], fd, 1e-7) << loss.token() << " entry " << i;
      }
    }
  }
}

TEST(RiskGradient, StepIsPlainDescent) {
  Rng rng(22);
  const Classifier g = random_classifier(3, 2, {LossKind::ap, false}, rng);
  const auto data = random_batch(5, 3, 2, rng), policy = random_batch(5, 3, 2, rng);
  const Table grad = risk_gradient(g, data, {}, policy, 0.5, 1e-3);
  const Classifier next = classifier_grad_step(g, data, {}, policy, 0.5, 0.3, 1e-3);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    EXPECT_DOUBLE_EQ(next.scores.flat()[i], g.scores.flat()[i] - 0.3 * grad.flat()[i]);
  }
  EXPECT_THROW(classifier_grad_step(g, data, {}, policy, 0.5, 0.0, 0.0), DomainError);
  EXPECT_LT(regularized_objective(classifier_grad_step(g, data, {}, policy, 0.5, 1e-3, 1e-3), data,
                                  {}, policy, 0.5, 1e-3),
            regularized_objective(g, data, {}, policy, 0.5, 1e-3));
}

TEST(ExactFit, LogisticReachesLogOdds) {
  Rng rng(31);
  const auto pos = random_density(3, 2, rng), neg = random_density(3, 2, rng);
  const auto fit = fit_classifier_exact({LossKind::logistic, false}, pos, neg);
  EXPECT_LT(fit.grad_norm, 1e-8);
  EXPECT_LT(fit.steps, 100000);
  for (std::size_t i = 0; i < pos.density.size(); ++i) {
    EXPECT_NEAR(fit.g.scores.flat()[i], std::log(pos.density.flat()[i] / neg.density.flat()[i]),
                1e-6);
  }
}

TEST(ExactFit, UnhingedWithDecayClosedForm) {
  Rng rng(32);
  const auto pos = random_density(3, 2, rng), neg = random_density(3, 2, rng);
  ExactFitOptions opt;
  opt.weight_decay = 0.05;
  const auto fit = fit_classifier_exact({LossKind::unhinged, false}, pos, neg, opt);
  // d/dg: -pos/2 + neg/2 + 2 wd g = 0.
  for (std::size_t i = 0; i < pos.density.size(); ++i) {
    EXPECT_NEAR(fit.g.scores.flat()[i],
                (pos.density.flat()[i] - neg.density.flat()[i]) / (4 * opt.weight_decay), 1e-6);
  }
}

TEST(ExactFit, SaturatingLossHitsStepCapButSeparates) {
  Rng rng(33);
  const auto pos = random_density(3, 2, rng), neg = random_density(3, 2, rng);
  ExactFitOptions opt;
  opt.max_steps = 2000;
  const auto fit = fit_classifier_exact({LossKind::sigmoid, false}, pos, neg, opt);
  EXPECT_EQ(fit.steps, 2000);
  for (std::size_t i = 0; i < pos.density.size(); ++i) {
    const double diff = pos.density.flat()[i] - neg.density.flat()[i];
    if (std::fabs(diff) > 1e-3) EXPECT_GT(diff * fit.g.scores.flat()[i], 0.0) << i;
  }
}
