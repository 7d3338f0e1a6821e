#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "rilco/errors.hpp"
#include "rilco/verify.hpp"

using namespace rilco;

namespace {

TabularPolicy random_policy(int ns, int na, Rng& rng) {
  TabularPolicy pi{Table(ns, na)};
  for (int s = 0; s < ns; ++s) {
    double z = 0.0;
    for (int a = 0; a < na; ++a) z += (pi.probs(s, a) = 0.05 + rng.uniform());
    for (int a = 0; a < na; ++a) pi.probs(s, a) /= z;
  }
  return pi;
}

StateActionDensity mix(const StateActionDensity& e, const StateActionDensity& n, double w) {
  StateActionDensity out{Table(e.density.rows(), e.density.cols()), e.mode};
  for (std::size_t i = 0; i < out.density.size(); ++i) {
    out.density.flat()[i] = w * e.density.flat()[i] + (1 - w) * n.density.flat()[i];
  }
  return out;
}

}  // namespace

TEST(DensityMatching, OccupancyIsTheMixture) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const MdpSpec mdp = make_random_mdp(9, 3, 3, 0.9, seed);
    Rng rng(seed);
    const auto pe = random_policy(9, 3, rng), pn = random_policy(9, 3, rng);
    const auto e = occupancy_exact(mdp, pe), n = occupancy_exact(mdp, pn);
    for (double alpha : {1.0, 0.8, 0.55, 0.3}) {
      const auto rho = occupancy_exact(mdp, density_matching_optimum(e, n, alpha));
      const auto target = mix(e, n, alpha);
      for (std::size_t i = 0; i < rho.density.size(); ++i) {
        EXPECT_NEAR(rho.density.flat()[i], target.density.flat()[i], 1e-10);
      }
      // Return is linear in the occupancy.
      EXPECT_NEAR(expected_return(mdp, density_matching_optimum(e, n, alpha)),
                  alpha * expected_return(mdp, pe) + (1 - alpha) * expected_return(mdp, pn), 1e-9);
    }
  }
}

TEST(InequalityRegion, PointsAndSweep) {
  EXPECT_TRUE(check_inequality_region(0.6, 1.0, 0.5).pass);
  EXPECT_NEAR(check_inequality_region(0.6, 1.0, 0.5).observed, 0.1, 1e-15);
  EXPECT_FALSE(check_inequality_region(0.6, 1.0, 0.3).pass);
  EXPECT_FALSE(check_inequality_region(0.6, 1.0, 0.0).pass);
  EXPECT_TRUE(check_inequality_region(0.6, 0.0, 0.0).pass);

  const InequalitySweep s = sweep_inequality_region(21);
  ASSERT_EQ(s.lambdas.size(), 21u);
  EXPECT_TRUE(s.claim_holds);
  for (std::size_t i = 0; i < s.lambdas.size(); ++i) {
    EXPECT_EQ(s.pass_everywhere[i], s.lambdas[i] >= 0.5) << s.lambdas[i];
  }
}

TEST(Kappa, SegmentMembersAndClipping) {
  const MdpSpec mdp = make_gridworld(4, 0.1, 0.9);
  const auto snaps = snapshot_policies(mdp, default_temperatures());
  const auto e = occupancy_exact(mdp, snaps[0]), n = occupancy_exact(mdp, snaps.back());
  for (double k : {0.0, 0.25, 0.5, 1.0}) {
    const auto est = kappa_estimate(mix(e, n, k), e, n);
    EXPECT_NEAR(est.kappa, k, 1e-12);
    EXPECT_NEAR(est.residual, 0.0, 1e-12);
  }
  const auto beyond = kappa_estimate(mix(e, n, 1.3), e, n);
  EXPECT_EQ(beyond.kappa, 1.0);
  EXPECT_GT(beyond.residual, 0.0);
  EXPECT_THROW(kappa_estimate(e, e, e), DomainError);
}

TEST(TotalVariation, Basics) {
  Table a(1, 2), b(1, 2);
  a(0, 0) = 1.0;
  b(0, 1) = 1.0;
  EXPECT_EQ(total_variation(a, b), 1.0);
  EXPECT_EQ(total_variation(a, a), 0.0);
}

TEST(Theorem1, GapPositiveForFittedClassifier) {
  const MdpSpec mdp = make_gridworld(4, 0.1, 0.9);
  const auto snaps = snapshot_policies(mdp, default_temperatures());
  const auto e = occupancy_exact(mdp, snaps[0]), n = occupancy_exact(mdp, snaps.back());
  ExactFitOptions opt;
  opt.max_steps = 5000;
  const auto fit = fit_classifier_exact({LossKind::ap, false}, e, n, opt);
  EXPECT_GT(theorem1_gap(fit.g, e, n), 0.0);
  // The untrained classifier pays the same on both sides.
  EXPECT_NEAR(theorem1_gap(Classifier{Table(16, 4), {LossKind::ap, false}}, e, n), 0.0, 1e-12);
}

TEST(Registry, NamesAndCheapChecksPass) {
  const auto& checks = verification_checks();
  std::set<std::string> names;
  for (const auto& c : checks) names.insert(c.name);
  EXPECT_EQ(names, (std::set<std::string>{"losses", "lemma1", "eq7", "eq15", "gradient",
                                          "occupancy", "theorem1", "kappa"}));
  const VerifyContext ctx;
  for (const auto& c : checks) {
    if (c.name == "theorem1") continue;  // slow; covered by the acceptance run
    const VerificationReport r = c.run(ctx);
    EXPECT_EQ(r.check_name, c.name);
    EXPECT_TRUE(r.pass) << c.name << ": " << r.details;
  }
}
