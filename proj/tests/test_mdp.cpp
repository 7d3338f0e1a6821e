#include <algorithm>
#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "rilco/errors.hpp"
#include "rilco/mdp.hpp"
#include "rilco/rng.hpp"
#include "rilco/verify.hpp"

using namespace rilco;

namespace {

MdpSpec one_state(std::vector<double> reward, double gamma) {
  Table r(1, reward.size());
  for (std::size_t a = 0; a < reward.size(); ++a) r(0, a) = reward[a];
  return MdpSpec(1, static_cast<int>(reward.size()), std::vector<double>(reward.size(), 1.0), {1.0},
                 r, gamma, horizon_for(gamma, 1e-8));
}

TabularPolicy random_policy(int ns, int na, Rng& rng) {
  TabularPolicy pi{Table(ns, na)};
  for (int s = 0; s < ns; ++s) {
    double z = 0.0;
    for (int a = 0; a < na; ++a) z += (pi.probs(s, a) = 0.05 + rng.uniform());
    for (int a = 0; a < na; ++a) pi.probs(s, a) /= z;
  }
  return pi;
}

// Discounted visitation by enumerating every (s, a) path of length L.
Table enumerate_occupancy(const MdpSpec& mdp, const TabularPolicy& pi, int length) {
  Table out(mdp.n_states(), mdp.n_actions());
  const double g = mdp.gamma();
  std::function<void(int, int, double, double)> walk = [&](int t, int s, double prob, double disc) {
    if (t == length || prob == 0.0) return;
    for (int a = 0; a < mdp.n_actions(); ++a) {
      const double pa = prob * pi.probs(s, a);
      if (pa == 0.0) continue;
      out(s, a) += (1.0 - g) * disc * pa;
      const auto next = mdp.transition(s, a);
      for (int s2 = 0; s2 < mdp.n_states(); ++s2) walk(t + 1, s2, pa * next[s2], disc * g);
    }
  };
  for (int s = 0; s < mdp.n_states(); ++s) walk(0, s, mdp.initial()[s], 1.0);
  return out;
}

double table_tv(const Table& a, const Table& b) { return total_variation(a, b); }

}  // namespace

TEST(Mdp, ConstructorNamesViolatedInvariant) {
  Table r(2, 1);
  try {
    MdpSpec(2, 1, {0.5, 0.4, 0.0, 1.0}, {1.0, 0.0}, r, 0.9, 10);
    FAIL() << "expected InvariantError";
  } catch (const InvariantError& e) {
    EXPECT_EQ(e.invariant(), "transition row (0,0) sums to 1");
  }
  try {
    MdpSpec(2, 1, {1.0, 0.0, 0.0, 1.0}, {0.7, 0.7}, r, 0.9, 10);
    FAIL() << "expected InvariantError";
  } catch (const InvariantError& e) {
    EXPECT_EQ(e.invariant(), "initial distribution sums to 1");
  }
  EXPECT_THROW(MdpSpec(2, 1, {1.5, -0.5, 0.0, 1.0}, {1.0, 0.0}, r, 0.9, 10), InvariantError);
  EXPECT_THROW(MdpSpec(2, 1, {1.0, 0.0, 0.0, 1.0}, {1.0, 0.0}, r, 1.0, 10), InvariantError);
  EXPECT_THROW(MdpSpec(2, 1, {1.0, 0.0, 0.0, 1.0}, {1.0, 0.0}, r, 0.9, 0), InvariantError);
}

TEST(Mdp, PolicyValidation) {
  TabularPolicy ok = TabularPolicy::uniform(3, 4);
  EXPECT_NO_THROW(ok.validate());
  ok.probs(1, 2) += 1e-6;
  EXPECT_THROW(ok.validate(), InvariantError);
}

TEST(Occupancy, OneStateUniform) {
  const MdpSpec mdp = one_state({0.0, 0.0}, 0.9);
  const auto rho = occupancy_exact(mdp, TabularPolicy::uniform(1, 2));
  EXPECT_NEAR(rho.density(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(rho.density(0, 1), 0.5, 1e-15);
}

TEST(Occupancy, DeterministicChainMatchesEnumeration) {
  // s0 -a0-> s1, s1 -a0-> s0; action 1 stays put.
  const MdpSpec mdp(2, 2, {0, 1, 1, 0, 1, 0, 0, 1}, {1.0, 0.0}, Table(2, 2), 0.5, 40);
  TabularPolicy pi{Table(2, 2)};
  pi.probs(0, 0) = pi.probs(1, 0) = 1.0;
  const auto rho = occupancy_exact(mdp, pi);
  const Table brute = enumerate_occupancy(mdp, pi, 30);
  for (std::size_t i = 0; i < brute.size(); ++i) {
    EXPECT_NEAR(rho.density.flat()[i], brute.flat()[i], 2.0 * std::pow(0.5, 30));
  }
  // d(s0) = (1 - g) (1 + g^2 + g^4 + ...) = (1 - g) / (1 - g^2)
  EXPECT_NEAR(rho.density(0, 0), 0.5 / 0.75, 1e-12);
}

TEST(Occupancy, StochasticMatchesEnumeration) {
  const MdpSpec mdp = make_random_mdp(2, 2, 2, 0.2, 5);
  Rng rng(3);
  const TabularPolicy pi = random_policy(2, 2, rng);
  const Table brute = enumerate_occupancy(mdp, pi, 10);
  const auto rho = occupancy_exact(mdp, pi);
  for (std::size_t i = 0; i < brute.size(); ++i) {
    EXPECT_NEAR(rho.density.flat()[i], brute.flat()[i], 2.0 * std::pow(0.2, 10));
  }
}

TEST(Occupancy, FiniteHorizonMatchesInfinite) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const MdpSpec base = make_random_mdp(8, 3, 3, 0.9, seed);
    const MdpSpec mdp(8, 3, {base.transition_flat().begin(), base.transition_flat().end()},
                      {base.initial().begin(), base.initial().end()}, base.reward(), 0.9,
                      horizon_for(0.9, 1e-12));
    Rng rng(seed);
    const TabularPolicy pi = random_policy(8, 3, rng);
    const auto inf = occupancy_exact(mdp, pi);
    const auto fin = occupancy_exact(mdp, pi, NormalizationMode::finite_horizon);
    for (std::size_t i = 0; i < inf.density.size(); ++i) {
      EXPECT_NEAR(inf.density.flat()[i], fin.density.flat()[i], 1e-9);
    }
    EXPECT_NEAR(fin.total(), 1.0, 1e-12);
    EXPECT_NEAR(inf.total(), 1.0, 1e-12);
  }
}

TEST(Occupancy, FlowConservation) {
  const MdpSpec mdp = make_random_mdp(10, 3, 4, 0.95, 9);
  Rng rng(9);
  const TabularPolicy pi = random_policy(10, 3, rng);
  const auto rho = occupancy_exact(mdp, pi);
  const auto d = state_occupancy(mdp, pi);
  for (int s2 = 0; s2 < 10; ++s2) {
    double inflow = 0.0;
    for (int s = 0; s < 10; ++s) {
      for (int a = 0; a < 3; ++a) inflow += rho.density(s, a) * mdp.transition(s, a)[s2];
    }
    EXPECT_NEAR(d[s2], (1 - 0.95) * mdp.initial()[s2] + 0.95 * inflow, 1e-9);
  }
}

TEST(Occupancy, ConvexityRoundTrip) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const MdpSpec mdp = make_random_mdp(7, 3, 3, 0.9, 100 + seed);
    Rng rng(seed);
    const auto ra = occupancy_exact(mdp, random_policy(7, 3, rng));
    const auto rb = occupancy_exact(mdp, random_policy(7, 3, rng));
    const double beta = rng.uniform();
    StateActionDensity mix{Table(7, 3)};
    for (std::size_t i = 0; i < mix.density.size(); ++i) {
      mix.density.flat()[i] = beta * ra.density.flat()[i] + (1 - beta) * rb.density.flat()[i];
    }
    const auto back = occupancy_exact(mdp, policy_from_density(mix));
    for (std::size_t i = 0; i < mix.density.size(); ++i) {
      EXPECT_NEAR(back.density.flat()[i], mix.density.flat()[i], 1e-9);
    }
  }
}

TEST(Return, ClosedForms) {
  const MdpSpec ones = make_random_mdp(5, 2, 2, 0.9, 1).with_reward(Table(5, 2, 1.0));
  Rng rng(1);
  EXPECT_NEAR(expected_return(ones, random_policy(5, 2, rng)), 10.0, 1e-10);
  const MdpSpec one = one_state({1.0, 0.0}, 0.5);
  TabularPolicy pi{Table(1, 2)};
  pi.probs(0, 0) = 0.3;
  pi.probs(0, 1) = 0.7;
  EXPECT_NEAR(expected_return(one, pi), 0.6, 1e-14);
}

TEST(Return, MonteCarloAgreement) {
  const MdpSpec mdp = make_random_mdp(4, 2, 3, 0.5, 21);
  Rng prng(21);
  const TabularPolicy pi = random_policy(4, 2, prng);
  const double exact = expected_return(mdp, pi);
  double sum = 0.0, sq = 0.0;
  constexpr int chunks = 10, per = 100000;
  for (int c = 0; c < chunks; ++c) {
    for (const auto& tr : sample_trajectories(mdp, pi, per, 1000 + c)) {
      double ret = 0.0, disc = 1.0;
      for (const auto& x : tr.steps) {
        ret += disc * mdp.reward()(x.state, x.action);
        disc *= mdp.gamma();
      }
      sum += ret;
      sq += ret * ret;
    }
  }
  const double n = chunks * per;
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  EXPECT_LT(std::fabs(mean - exact), 3.0 * se) << "mean=" << mean << " exact=" << exact;
}

TEST(PolicyFromDensity, Examples) {
  StateActionDensity rho{Table(2, 2)};
  rho.density(0, 0) = rho.density(0, 1) = 0.2;
  rho.density(1, 0) = rho.density(1, 1) = 0.3;
  const auto pi = policy_from_density(rho);
  for (double p : pi.probs.flat()) EXPECT_DOUBLE_EQ(p, 0.5);

  StateActionDensity zero{Table(2, 3)};
  zero.density(0, 0) = 0.25;
  zero.density(0, 2) = 0.75;
  const auto pz = policy_from_density(zero);
  EXPECT_DOUBLE_EQ(pz.probs(0, 2), 0.75);
  for (int a = 0; a < 3; ++a) EXPECT_DOUBLE_EQ(pz.probs(1, a), 1.0 / 3.0);
}

TEST(PolicyFromDensity, RoundTrip) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const MdpSpec mdp = make_random_mdp(6, 4, 3, 0.9, seed);
    Rng rng(seed);
    const TabularPolicy pi = random_policy(6, 4, rng);
    const auto rho = occupancy_exact(mdp, pi);
    const auto back = policy_from_density(rho);
    const auto d = state_occupancy(mdp, pi);
    for (int s = 0; s < 6; ++s) {
      if (d[s] <= 1e-12) continue;
      for (int a = 0; a < 4; ++a) EXPECT_NEAR(back.probs(s, a), pi.probs(s, a), 1e-12);
    }
  }
}

TEST(ValueIteration, Examples) {
  const MdpSpec zero = make_random_mdp(5, 3, 2, 0.9, 2).with_reward(Table(5, 3));
  const Table q0 = value_iteration(zero, 1e-10);
  for (double q : q0.flat()) EXPECT_EQ(q, 0.0);

  const MdpSpec one = one_state({1.0, 0.0}, 0.5);
  const Table q = value_iteration(one, 1e-12);
  EXPECT_NEAR(q(0, 0), 2.0, 1e-11);
  EXPECT_NEAR(q(0, 1), 1.0, 1e-11);
  EXPECT_THROW(value_iteration(one, 0.0), DomainError);
}

TEST(ValueIteration, ResidualAndGreedyBeatsRandomPolicies) {
  const MdpSpec mdp = make_random_mdp(12, 4, 3, 0.9, 77);
  const Table q = value_iteration(mdp, 1e-9);
  EXPECT_LE(bellman_residual(mdp, mdp.reward(), q), 1e-9);
  const double best = expected_return(mdp, greedy_policy(q));
  Rng rng(77);
  for (int i = 0; i < 100; ++i) {
    EXPECT_GE(best, expected_return(mdp, random_policy(12, 4, rng)) - 1e-9);
  }
}

TEST(Snapshots, Limits) {
  const MdpSpec mdp = make_gridworld(5, 0.1, 0.95);
  const Table q = value_iteration(mdp, 1e-10);
  const double greedy = expected_return(mdp, greedy_policy(q));
  const double cold = expected_return(mdp, softmax_policy(q, 0.01));
  EXPECT_NEAR(cold, greedy, 0.01 * greedy);
  const TabularPolicy hot = softmax_policy(q, 1e9);
  for (double p : hot.probs.flat()) EXPECT_NEAR(p, 0.25, 1e-6);
}

TEST(Snapshots, DefaultLadderDescends) {
  const MdpSpec mdp = make_gridworld(5, 0.1, 0.95);
  const auto snaps = snapshot_policies(mdp, default_temperatures());
  ASSERT_EQ(snaps.size(), 6u);
  for (std::size_t k = 1; k < snaps.size(); ++k) {
    EXPECT_LT(expected_return(mdp, snaps[k]), expected_return(mdp, snaps[k - 1]));
  }
}

TEST(Snapshots, BadTemperatures) {
  const MdpSpec mdp = make_gridworld(3, 0.1, 0.9);
  const std::vector<double> zero{0.0, 1.0}, descending{2.0, 1.0};
  EXPECT_THROW(snapshot_policies(mdp, zero), DomainError);
  EXPECT_THROW(snapshot_policies(mdp, descending), DomainError);
  EXPECT_THROW(softmax_policy(Table(2, 2), -1.0), DomainError);
}

TEST(Sampling, DeterministicMdpGivesIdenticalTrajectories) {
  const MdpSpec mdp = make_gridworld(4, 0.0, 0.9);
  // greedy_policy splits ties; keep the first maximiser so the policy is deterministic.
  const Table q = value_iteration(mdp, 1e-10);
  TabularPolicy pi{Table(q.rows(), q.cols())};
  for (std::size_t s = 0; s < q.rows(); ++s) {
    const auto row = q.row(s);
    pi.probs(s, std::max_element(row.begin(), row.end()) - row.begin()) = 1.0;
  }
  const auto trajs = sample_trajectories(mdp, pi, 20, 5);
  for (const auto& t : trajs) {
    ASSERT_EQ(static_cast<int>(t.steps.size()), mdp.horizon());
    EXPECT_EQ(t.steps, trajs.front().steps);
  }
}

TEST(Sampling, SameSeedSameOutput) {
  const MdpSpec mdp = make_random_mdp(6, 3, 3, 0.9, 4);
  const auto pi = TabularPolicy::uniform(6, 3);
  const auto a = sample_trajectories(mdp, pi, 50, 99);
  const auto b = sample_trajectories(mdp, pi, 50, 99);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].steps, b[i].steps);
  const auto c = sample_trajectories(mdp, pi, 50, 100);
  bool differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) differ = differ || !(a[i].steps == c[i].steps);
  EXPECT_TRUE(differ);
}

TEST(Sampling, DiscountWeightedFrequenciesMatchOccupancy) {
  const MdpSpec mdp = make_gridworld(5, 0.1, 0.95);
  const auto pi = snapshot_policies(mdp, default_temperatures())[2];
  Table freq(25, 4);
  for (int c = 0; c < 10; ++c) {
    for (const auto& tr : sample_trajectories(mdp, pi, 10000, 500 + c)) {
      double disc = 1.0;
      for (const auto& x : tr.steps) {
        freq(x.state, x.action) += disc;
        disc *= mdp.gamma();
      }
    }
  }
  double z = 0.0;
  for (double v : freq.flat()) z += v;
  for (double& v : freq.flat()) v /= z;
  const auto rho = occupancy_exact(mdp, pi, NormalizationMode::finite_horizon);
  EXPECT_LT(table_tv(freq, rho.density), 0.01);
}

TEST(Sampling, OccupancyPairsMatchDensity) {
  const MdpSpec mdp = make_gridworld(5, 0.1, 0.95);
  const auto pi = snapshot_policies(mdp, default_temperatures())[3];
  Rng rng(8);
  Table freq(25, 4);
  constexpr int n = 200000;
  for (int i = 0; i < n; ++i) {
    const auto x = sample_occupancy_pair(mdp, pi, rng);
    freq(x.state, x.action) += 1.0 / n;
  }
  EXPECT_LT(table_tv(freq, occupancy_exact(mdp, pi, NormalizationMode::finite_horizon).density),
            0.01);
}

TEST(Gridworld, Structure) {
  const MdpSpec g = make_gridworld(5, 0.1, 0.95);
  EXPECT_EQ(g.n_states(), 25);
  EXPECT_EQ(g.n_actions(), 4);
  EXPECT_EQ(g.initial()[0], 1.0);
  EXPECT_TRUE(std::pow(0.95, g.horizon()) < 1e-8);
  for (int a = 0; a < 4; ++a) {
    EXPECT_EQ(g.reward()(24, a), 1.0);
    EXPECT_EQ(g.transition(24, a)[24], 1.0);
    EXPECT_EQ(g.reward()(0, a), 0.0);
  }
  // Action 1 (right) from state 0: 0.9 + 0.1/4 to state 1; up and left bump the wall.
  EXPECT_NEAR(g.transition(0, 1)[1], 0.9 + 0.025, 1e-15);
  EXPECT_NEAR(g.transition(0, 1)[0], 0.05, 1e-15);
  EXPECT_NEAR(g.transition(0, 1)[5], 0.025, 1e-15);
  EXPECT_THROW(make_gridworld(5, 1.5, 0.95), DomainError);
}

TEST(Horizon, ForEpsilon) {
  const int t = horizon_for(0.95, 1e-8);
  EXPECT_LT(std::pow(0.95, t), 1e-8);
  EXPECT_GE(std::pow(0.95, t - 2), 1e-8);
}
