#include "rilco/mdp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "rilco/errors.hpp"
#include "rilco/kernels.hpp"

namespace rilco {
namespace {

constexpr double kRowTol = 1e-12;

void check_probability_vector(std::span<const double> p, const std::string& what) {
  double total = 0.0;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw InvariantError(what + " entries are non-negative", "found " + std::to_string(x));
    }
    total += x;
  }
  if (std::fabs(total - 1.0) > kRowTol) {
    throw InvariantError(what + " sums to 1", "sum is " + std::to_string(total));
  }
}

// P_pi(s_bar -> s) = sum_a pi(a | s_bar) p(s | s_bar, a), row-major [s_bar][s].
std::vector<double> policy_transition(const MdpSpec& mdp, const TabularPolicy& policy) {
  const auto ns = static_cast<std::size_t>(mdp.n_states());
  std::vector<double> p(ns * ns, 0.0);
  for (int s = 0; s < mdp.n_states(); ++s) {
    std::span<double> out(p.data() + s * ns, ns);
    for (int a = 0; a < mdp.n_actions(); ++a) {
      const double w = policy.probs(s, a);
      if (w != 0.0) kernels::axpy(w, mdp.transition(s, a), out);
    }
  }
  return p;
}

void check_shapes(const MdpSpec& mdp, const TabularPolicy& policy) {
  if (policy.probs.rows() != static_cast<std::size_t>(mdp.n_states()) ||
      policy.probs.cols() != static_cast<std::size_t>(mdp.n_actions())) {
    throw InvariantError("policy shape matches MDP", "policy table has wrong dimensions");
  }
}

}  // namespace

MdpSpec::MdpSpec(int n_states, int n_actions, std::vector<double> transition,
                 std::vector<double> initial, Table reward, double gamma, int horizon)
    : n_states_(n_states),
      n_actions_(n_actions),
      transition_(std::move(transition)),
      initial_(std::move(initial)),
      reward_(std::move(reward)),
      gamma_(gamma),
      horizon_(horizon) {
  if (n_states_ <= 0 || n_actions_ <= 0) {
    throw InvariantError("dimensions are positive", "n_states and n_actions must be >= 1");
  }
  const auto ns = static_cast<std::size_t>(n_states_);
  const auto na = static_cast<std::size_t>(n_actions_);
  if (transition_.size() != ns * na * ns) {
    throw InvariantError("transition has S*A*S entries", std::to_string(transition_.size()));
  }
  if (initial_.size() != ns) {
    throw InvariantError("initial has S entries", std::to_string(initial_.size()));
  }
  if (reward_.rows() != ns || reward_.cols() != na) {
    throw InvariantError("reward is S x A", "wrong reward table shape");
  }
  for (double r : reward_.flat()) {
    if (!std::isfinite(r)) throw InvariantError("reward entries are finite", std::to_string(r));
  }
  if (!(gamma_ > 0.0 && gamma_ < 1.0)) {
    throw InvariantError("gamma in (0,1)", std::to_string(gamma_));
  }
  if (horizon_ <= 0) throw InvariantError("horizon is positive", std::to_string(horizon_));
  for (int s = 0; s < n_states_; ++s) {
    for (int a = 0; a < n_actions_; ++a) {
      check_probability_vector(this->transition(s, a),
                               "transition row (" + std::to_string(s) + "," + std::to_string(a) +
                                   ")");
    }
  }
  check_probability_vector(initial_, "initial distribution");
}

MdpSpec MdpSpec::with_reward(Table reward) const {
  return MdpSpec(n_states_, n_actions_, transition_, initial_, std::move(reward), gamma_,
                 horizon_);
}

void TabularPolicy::validate() const {
  for (std::size_t s = 0; s < probs.rows(); ++s) {
    check_probability_vector(probs.row(s), "policy row " + std::to_string(s));
  }
}

TabularPolicy TabularPolicy::uniform(int n_states, int n_actions) {
  return {Table(n_states, n_actions, 1.0 / n_actions)};
}

double StateActionDensity::total() const { return kernels::sum(density.flat()); }

std::vector<double> state_occupancy(const MdpSpec& mdp, const TabularPolicy& policy) {
  check_shapes(mdp, policy);
  const int ns = mdp.n_states();
  const double gamma = mdp.gamma();
  const std::vector<double> p = policy_transition(mdp, policy);

  // (I - gamma P_pi^T) d = (1 - gamma) p1
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(ns, ns);
  for (int sb = 0; sb < ns; ++sb) {
    for (int s = 0; s < ns; ++s) m(s, sb) -= gamma * p[sb * ns + s];
  }
  Eigen::VectorXd rhs(ns);
  for (int s = 0; s < ns; ++s) rhs(s) = (1.0 - gamma) * mdp.initial()[s];

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  if (!std::isfinite(lu.determinant()) || std::fabs(lu.determinant()) < 1e-300) {
    throw NumericError("occupancy flow system is singular");
  }
  const Eigen::VectorXd d = lu.solve(rhs);
  std::vector<double> out(ns);
  for (int s = 0; s < ns; ++s) {
    if (!std::isfinite(d(s))) throw NumericError("occupancy solve produced non-finite values");
    out[s] = std::max(d(s), 0.0);
  }
  return out;
}

StateActionDensity occupancy_exact(const MdpSpec& mdp, const TabularPolicy& policy,
                                   NormalizationMode mode) {
  check_shapes(mdp, policy);
  const int ns = mdp.n_states();
  const int na = mdp.n_actions();
  StateActionDensity rho{Table(ns, na), mode};

  if (mode == NormalizationMode::infinite_horizon) {
    const std::vector<double> d = state_occupancy(mdp, policy);
    for (int s = 0; s < ns; ++s) {
      for (int a = 0; a < na; ++a) rho.density(s, a) = d[s] * policy.probs(s, a);
    }
    return rho;
  }

  // Forward recursion over t = 1..T, weights gamma^(t-1), rescaled so the
  // table sums to one: sum_t gamma^(t-1) = (1 - gamma^T) / (1 - gamma).
  const double gamma = mdp.gamma();
  std::vector<double> dt(mdp.initial().begin(), mdp.initial().end());
  std::vector<double> next(ns);
  double weight = 1.0;
  for (int t = 0; t < mdp.horizon(); ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < ns; ++s) {
      if (dt[s] == 0.0) continue;
      for (int a = 0; a < na; ++a) {
        const double mass = dt[s] * policy.probs(s, a);
        rho.density(s, a) += weight * mass;
        if (mass != 0.0) kernels::axpy(mass, mdp.transition(s, a), next);
      }
    }
    dt.swap(next);
    weight *= gamma;
  }
  const double scale = (1.0 - gamma) / (1.0 - std::pow(gamma, mdp.horizon()));
  for (double& x : rho.density.flat()) x *= scale;
  return rho;
}

double expected_return(const MdpSpec& mdp, const TabularPolicy& policy) {
  const StateActionDensity rho = occupancy_exact(mdp, policy);
  return kernels::dot(rho.density.flat(), mdp.reward().flat()) / (1.0 - mdp.gamma());
}

TabularPolicy policy_from_density(const StateActionDensity& rho) {
  const std::size_t ns = rho.density.rows();
  const std::size_t na = rho.density.cols();
  TabularPolicy pi{Table(ns, na)};
  for (std::size_t s = 0; s < ns; ++s) {
    const double mass = kernels::sum(rho.density.row(s));
    for (std::size_t a = 0; a < na; ++a) {
      pi.probs(s, a) = mass > 0.0 ? rho.density(s, a) / mass : 1.0 / static_cast<double>(na);
    }
  }
  return pi;
}

namespace {

// One Bellman backup: out = reward + gamma * P * max_a q.
void bellman_backup(const MdpSpec& mdp, const Table& reward, const Table& q, std::vector<double>& v,
                    Table& out) {
  const int ns = mdp.n_states();
  const int na = mdp.n_actions();
  for (int s = 0; s < ns; ++s) {
    const auto row = q.row(s);
    v[s] = *std::max_element(row.begin(), row.end());
  }
  for (int s = 0; s < ns; ++s) {
    for (int a = 0; a < na; ++a) {
      out(s, a) = reward(s, a) + mdp.gamma() * kernels::dot(mdp.transition(s, a), v);
    }
  }
}

}  // namespace

Table value_iteration(const MdpSpec& mdp, double tol) {
  return value_iteration(mdp, mdp.reward(), tol);
}

Table value_iteration(const MdpSpec& mdp, const Table& reward, double tol,
                      const Table* warm_start) {
  if (!(tol > 0.0)) throw DomainError("value_iteration tolerance must be positive");
  const int ns = mdp.n_states();
  const int na = mdp.n_actions();
  Table q = warm_start != nullptr ? *warm_start : Table(ns, na);
  Table next(ns, na);
  std::vector<double> v(ns);
  // ||T q' - q'|| <= gamma ||q' - q|| for q' = T q.
  for (;;) {
    bellman_backup(mdp, reward, q, v, next);
    const double change = kernels::max_abs_diff(next.flat(), q.flat());
    std::swap(q, next);
    if (mdp.gamma() * change <= tol) break;
  }
  return q;
}

double bellman_residual(const MdpSpec& mdp, const Table& reward, const Table& q) {
  Table next(q.rows(), q.cols());
  std::vector<double> v(q.rows());
  bellman_backup(mdp, reward, q, v, next);
  return kernels::max_abs_diff(next.flat(), q.flat());
}

TabularPolicy softmax_policy(const Table& q, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw DomainError("softmax temperature must be positive and finite");
  }
  TabularPolicy pi{Table(q.rows(), q.cols())};
  for (std::size_t s = 0; s < q.rows(); ++s) {
    const auto row = q.row(s);
    const double top = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (std::size_t a = 0; a < q.cols(); ++a) {
      const double e = std::exp((row[a] - top) / temperature);
      pi.probs(s, a) = e;
      z += e;
    }
    for (std::size_t a = 0; a < q.cols(); ++a) pi.probs(s, a) /= z;
  }
  return pi;
}

TabularPolicy greedy_policy(const Table& q, double tie_tol) {
  TabularPolicy pi{Table(q.rows(), q.cols())};
  for (std::size_t s = 0; s < q.rows(); ++s) {
    const auto row = q.row(s);
    const double top = *std::max_element(row.begin(), row.end());
    int ties = 0;
    for (double x : row) ties += (x >= top - tie_tol) ? 1 : 0;
    for (std::size_t a = 0; a < q.cols(); ++a) {
      pi.probs(s, a) = row[a] >= top - tie_tol ? 1.0 / ties : 0.0;
    }
  }
  return pi;
}

std::vector<TabularPolicy> snapshot_policies(const MdpSpec& mdp,
                                             std::span<const double> temperatures) {
  if (temperatures.empty()) throw DomainError("snapshot ladder is empty");
  for (std::size_t i = 0; i < temperatures.size(); ++i) {
    if (!(temperatures[i] > 0.0)) throw DomainError("snapshot temperatures must be positive");
    if (i > 0 && !(temperatures[i] > temperatures[i - 1])) {
      throw DomainError("snapshot temperatures must be ascending");
    }
  }
  const Table q = value_iteration(mdp, 1e-10);
  std::vector<TabularPolicy> out;
  out.reserve(temperatures.size());
  for (double t : temperatures) out.push_back(softmax_policy(q, t));
  return out;
}

std::span<const double> default_temperatures() noexcept {
  static constexpr std::array<double, 6> ladder{0.01, 0.5, 1.0, 2.0, 4.0, 8.0};
  return ladder;
}

std::vector<Trajectory> sample_trajectories(const MdpSpec& mdp, const TabularPolicy& policy,
                                            int count, std::uint64_t rng_seed) {
  if (count < 1) throw DomainError("trajectory count must be >= 1");
  check_shapes(mdp, policy);
  Rng rng(rng_seed);
  std::vector<Trajectory> out(static_cast<std::size_t>(count));
  for (auto& traj : out) {
    traj.steps.reserve(mdp.horizon());
    int s = static_cast<int>(rng.categorical(mdp.initial()));
    for (int t = 0; t < mdp.horizon(); ++t) {
      const int a = static_cast<int>(rng.categorical(policy.probs.row(s)));
      traj.steps.push_back({s, a});
      s = static_cast<int>(rng.categorical(mdp.transition(s, a)));
    }
  }
  return out;
}

StateAction sample_occupancy_pair(const MdpSpec& mdp, const TabularPolicy& policy, Rng& rng) {
  // Stop after each step with probability 1 - gamma; a rollout that survives
  // all T steps is redrawn, which truncates the geometric law exactly.
  for (;;) {
    int s = static_cast<int>(rng.categorical(mdp.initial()));
    for (int t = 0; t < mdp.horizon(); ++t) {
      const int a = static_cast<int>(rng.categorical(policy.probs.row(s)));
      if (rng.uniform() >= mdp.gamma()) return {s, a};
      s = static_cast<int>(rng.categorical(mdp.transition(s, a)));
    }
  }
}

int horizon_for(double gamma, double eps) {
  return static_cast<int>(std::ceil(std::log(eps) / std::log(gamma))) + 1;
}

MdpSpec make_gridworld(int size, double slip, double gamma) {
  if (size < 2) throw DomainError("gridworld size must be >= 2");
  if (!(slip >= 0.0 && slip <= 1.0)) throw DomainError("slip must lie in [0, 1]");
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("gamma must lie in (0, 1)");
  const int ns = size * size;
  constexpr int na = 4;
  constexpr std::array<int, 4> dr{-1, 0, 1, 0};
  constexpr std::array<int, 4> dc{0, 1, 0, -1};
  const int goal = ns - 1;

  auto move = [&](int s, int dir) {
    const int r = s / size + dr[dir];
    const int c = s % size + dc[dir];
    if (r < 0 || r >= size || c < 0 || c >= size) return s;
    return r * size + c;
  };

  std::vector<double> transition(static_cast<std::size_t>(ns) * na * ns, 0.0);
  Table reward(ns, na);
  for (int s = 0; s < ns; ++s) {
    for (int a = 0; a < na; ++a) {
      double* row = transition.data() + (static_cast<std::size_t>(s) * na + a) * ns;
      if (s == goal) {
        row[goal] = 1.0;
        reward(s, a) = 1.0;
        continue;
      }
      row[move(s, a)] += 1.0 - slip;
      for (int d = 0; d < na; ++d) row[move(s, d)] += slip / na;
    }
  }
  std::vector<double> initial(ns, 0.0);
  initial[0] = 1.0;
  return MdpSpec(ns, na, std::move(transition), std::move(initial), std::move(reward), gamma,
                 horizon_for(gamma, 1e-8));
}

MdpSpec make_random_mdp(int n_states, int n_actions, int branching, double gamma,
                        std::uint64_t seed) {
  if (n_states < 1 || n_actions < 1) throw DomainError("random MDP dimensions must be >= 1");
  branching = std::clamp(branching, 1, n_states);
  Rng rng(seed);
  const auto ns = static_cast<std::size_t>(n_states);
  std::vector<double> transition(ns * n_actions * ns, 0.0);
  std::vector<int> order(ns);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double* row = transition.data() + (static_cast<std::size_t>(s) * n_actions + a) * ns;
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(order.begin(), order.end());
      double total = 0.0;
      for (int k = 0; k < branching; ++k) {
        const double w = -std::log1p(-rng.uniform());
        row[order[k]] = w;
        total += w;
      }
      if (total == 0.0) {
        row[order[0]] = 1.0;
        total = 1.0;
      }
      for (std::size_t k = 0; k < ns; ++k) row[k] /= total;
      // Renormalize so the row sums to 1 within the 1e-12 invariant.
      double check = 0.0;
      for (std::size_t k = 0; k < ns; ++k) check += row[k];
      row[order[0]] += 1.0 - check;
    }
  }
  std::vector<double> initial(ns);
  double total = 0.0;
  for (auto& x : initial) total += (x = -std::log1p(-rng.uniform()));
  for (auto& x : initial) x /= total;
  double check = 0.0;
  for (double x : initial) check += x;
  initial[0] += 1.0 - check;

  Table reward(n_states, n_actions);
  for (double& r : reward.flat()) r = rng.uniform();
  return MdpSpec(n_states, n_actions, std::move(transition), std::move(initial), std::move(reward),
                 gamma, horizon_for(gamma, 1e-8));
}

}  // namespace rilco
