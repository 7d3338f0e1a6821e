#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rilco/rng.hpp"
#include "rilco/table.hpp"

namespace rilco {

/// Finite discounted MDP with dense tables.
///
/// transition(s, a) is the row p(. | s, a) of length n_states. The reward
/// table is the true task reward; training code never reads it, only the
/// evaluation paths (expected_return, planning for snapshots) do.
class MdpSpec {
 public:
  MdpSpec(int n_states, int n_actions, std::vector<double> transition, std::vector<double> initial,
          Table reward, double gamma, int horizon);

  int n_states() const noexcept { return n_states_; }
  int n_actions() const noexcept { return n_actions_; }
  double gamma() const noexcept { return gamma_; }
  int horizon() const noexcept { return horizon_; }

  std::span<const double> transition(int s, int a) const noexcept {
    const auto ns = static_cast<std::size_t>(n_states_);
    return {transition_.data() + (static_cast<std::size_t>(s) * n_actions_ + a) * ns, ns};
  }
  std::span<const double> transition_flat() const noexcept { return transition_; }
  std::span<const double> initial() const noexcept { return initial_; }
  const Table& reward() const noexcept { return reward_; }

  // Same dynamics, different reward table (used for synthetic rewards).
  MdpSpec with_reward(Table reward) const;

 private:
  int n_states_;
  int n_actions_;
  std::vector<double> transition_;
  std::vector<double> initial_;
  Table reward_;
  double gamma_;
  int horizon_;
};

struct TabularPolicy {
  Table probs;  // probs(s, a) = pi(a | s)

  // Throws InvariantError unless every row is a probability vector (1e-12).
  void validate() const;
  static TabularPolicy uniform(int n_states, int n_actions);
};

enum class NormalizationMode { infinite_horizon, finite_horizon };

struct StateActionDensity {
  Table density;
  NormalizationMode mode = NormalizationMode::infinite_horizon;

  double total() const;
};

struct Trajectory {
  std::vector<StateAction> steps;
};

StateActionDensity occupancy_exact(const MdpSpec& mdp, const TabularPolicy& policy,
                                   NormalizationMode mode = NormalizationMode::infinite_horizon);

// State marginal d(s) of the infinite-horizon occupancy (linear solve).
std::vector<double> state_occupancy(const MdpSpec& mdp, const TabularPolicy& policy);

// Sum_{s,a} rho(s,a) r(s,a) / (1 - gamma) using the infinite-horizon occupancy.
double expected_return(const MdpSpec& mdp, const TabularPolicy& policy);

// pi(a|s) = rho(s,a) / rho(s); zero-mass states get the uniform row.
TabularPolicy policy_from_density(const StateActionDensity& rho);

// Optimal Q with sup-norm Bellman residual <= tol. `reward` overrides the
// MDP's reward table; `warm_start` seeds the iteration when non-null.
Table value_iteration(const MdpSpec& mdp, double tol);
Table value_iteration(const MdpSpec& mdp, const Table& reward, double tol,
                      const Table* warm_start = nullptr);

// max_{s,a} |r + gamma P max Q - Q|.
double bellman_residual(const MdpSpec& mdp, const Table& reward, const Table& q);

// Row-wise softmax(q / temperature); temperature must be positive.
TabularPolicy softmax_policy(const Table& q, double temperature);

// Uniform over actions within `tie_tol` of the row maximum.
TabularPolicy greedy_policy(const Table& q, double tie_tol = 1e-9);

// softmax(Q*/t) for each temperature. temperatures must be positive and
// ascending; index 0 is the expert.
std::vector<TabularPolicy> snapshot_policies(const MdpSpec& mdp,
                                             std::span<const double> temperatures);

// The default snapshot ladder {0.01, 0.5, 1, 2, 4, 8}.
std::span<const double> default_temperatures() noexcept;

// `count` trajectories of length mdp.horizon(), deterministic given seed.
std::vector<Trajectory> sample_trajectories(const MdpSpec& mdp, const TabularPolicy& policy,
                                            int count, std::uint64_t rng_seed);

// One (s, a) draw from the finite-horizon-normalized discounted occupancy:
// roll out under the policy and stop at step t with probability
// proportional to gamma^(t-1), t <= horizon.
StateAction sample_occupancy_pair(const MdpSpec& mdp, const TabularPolicy& policy, Rng& rng);

// Horizon T with gamma^T < eps.
int horizon_for(double gamma, double eps);

/// size x size gridworld, 4 actions (up, right, down, left). Start in the
/// top-left corner, goal in the bottom-right corner. The goal is absorbing
/// and pays reward 1 for every action taken there. With probability `slip`
/// the move direction is replaced by a uniformly random one; moves into a
/// wall leave the agent in place. Horizon satisfies gamma^T < 1e-8.
MdpSpec make_gridworld(int size, double slip, double gamma);

// Random dense MDP: each (s, a) row has `branching` random successors with
// Dirichlet(1)-like weights, random initial distribution, rewards in [0, 1).
MdpSpec make_random_mdp(int n_states, int n_actions, int branching, double gamma,
                        std::uint64_t seed);

}  // namespace rilco
