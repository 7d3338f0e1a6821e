#include "rilco/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "rilco/errors.hpp"
#include "rilco/io.hpp"
#include "rilco/kernels.hpp"
#include "rilco/verify.hpp"

namespace rilco {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kScoreWarning = 1e3;
constexpr double kRlTolerance = 1e-6;

// RNG stream ids derived from cfg.seed.
enum StreamId : std::uint64_t {
  kSplitStream = 1,
  kRolloutStream = 2,
  kBatchUStream = 3,
  kBatchVStream = 4,
  kTrajectoryStream = 5,
};

std::uint64_t stream_seed(std::uint64_t seed, StreamId id) { return Rng::stream(seed, id).next(); }

bool uses_pseudo_labels(Method m) { return m == Method::ril_co || m == Method::ril_p; }

}  // namespace

std::string method_token(Method m) {
  switch (m) {
    case Method::ril_co:
      return "ril-co";
    case Method::ril_p:
      return "ril-p";
    case Method::gail_logistic:
      return "gail-logistic";
    case Method::gail_unhinged:
      return "gail-unhinged";
    case Method::gail_ap:
      return "gail-ap";
    case Method::bc:
      return "bc";
  }
  return "?";
}

Method parse_method(std::string_view token) {
  std::string t(token);
  std::replace(t.begin(), t.end(), '_', '-');
  for (Method m : {Method::ril_co, Method::ril_p, Method::gail_logistic, Method::gail_unhinged,
                   Method::gail_ap, Method::bc}) {
    if (method_token(m) == t) return m;
  }
  throw ConfigError("method is known", "unknown method '" + std::string(token) + "'");
}

std::string rl_mode_token(RlMode m) { return m == RlMode::exact ? "exact" : "reinforce"; }

RlMode parse_rl_mode(std::string_view token) {
  if (token == "exact") return RlMode::exact;
  if (token == "reinforce") return RlMode::reinforce;
  throw ConfigError("rl mode is exact or reinforce", std::string(token));
}

TrainerConfig TrainerConfig::desk() { return TrainerConfig{}; }

TrainerConfig TrainerConfig::paper_faithful() {
  TrainerConfig c;
  c.batch_b = c.batch_u = c.batch_v = 640;
  c.k = 128;
  return c;
}

void validate(const TrainerConfig& cfg) {
  if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0)) {
    throw ConfigError("lambda in [0,1]", format_double(cfg.lambda));
  }
  if (cfg.batch_b < 1 || cfg.batch_u < 1 || cfg.batch_v < 1) {
    throw ConfigError("batch sizes are positive", "B, U and V must be >= 1");
  }
  if (cfg.k < 1 || cfg.k > cfg.batch_u || cfg.k > cfg.batch_v) {
    throw ConfigError("1 <= k <= batch_u", "k=" + std::to_string(cfg.k));
  }
  if (cfg.iterations < 1) throw ConfigError("iterations >= 1", std::to_string(cfg.iterations));
  if (!(cfg.classifier_step > 0.0)) {
    throw ConfigError("classifier_step > 0", format_double(cfg.classifier_step));
  }
  if (!(cfg.weight_decay >= 0.0)) {
    throw ConfigError("weight_decay >= 0", format_double(cfg.weight_decay));
  }
  if (cfg.classifier_steps < 1) {
    throw ConfigError("classifier_steps >= 1", std::to_string(cfg.classifier_steps));
  }
  if (cfg.rl_mode == RlMode::exact && !(cfg.rl_step > 0.0 && cfg.rl_step <= 1.0)) {
    throw ConfigError("rl_step in (0,1] for exact mode", format_double(cfg.rl_step));
  }
  if (cfg.rl_mode == RlMode::reinforce && !(cfg.rl_step > 0.0)) {
    throw ConfigError("rl_step > 0", format_double(cfg.rl_step));
  }
  if (!(cfg.policy_temperature > 0.0)) {
    throw ConfigError("policy_temperature > 0", format_double(cfg.policy_temperature));
  }
  if (cfg.rl_trajectories < 1) {
    throw ConfigError("rl_trajectories >= 1", std::to_string(cfg.rl_trajectories));
  }
  if (cfg.lambda_anneal) {
    const auto& a = *cfg.lambda_anneal;
    if (!(a.start >= 0.0 && a.start <= 1.0 && a.end >= 0.0 && a.end <= 1.0) ||
        a.iterations < 0) {
      throw ConfigError("lambda anneal within [0,1]", "bad anneal schedule");
    }
  }
  if (uses_pseudo_labels(cfg.method) && !cfg.loss.is_symmetric() && !cfg.allow_nonsymmetric) {
    throw ConfigError("RIL-Co requires a symmetric loss",
                      "loss '" + cfg.loss.token() + "' is not symmetric (use --allow-nonsymmetric)");
  }
}

LossSpec effective_loss(const TrainerConfig& cfg) {
  switch (cfg.method) {
    case Method::gail_logistic:
      return {LossKind::logistic, false};
    case Method::gail_unhinged:
      return {LossKind::unhinged, false};
    case Method::gail_ap:
      return {LossKind::ap, false};
    default:
      return cfg.loss;
  }
}

double lambda_at(const TrainerConfig& cfg, int iteration) {
  switch (cfg.method) {
    case Method::gail_logistic:
    case Method::gail_unhinged:
    case Method::gail_ap:
    case Method::bc:
      return 0.0;
    default:
      break;
  }
  if (!cfg.lambda_anneal) return cfg.lambda;
  const auto& a = *cfg.lambda_anneal;
  if (a.iterations <= 0 || iteration >= a.iterations) return a.end;
  const double t = static_cast<double>(iteration) / a.iterations;
  return a.start + t * (a.end - a.start);
}

double TrainRecord::final_mean_return() const {
  if (rows.empty()) return kNaN;
  const std::size_t tail = std::max<std::size_t>(1, (rows.size() + 9) / 10);
  double total = 0.0;
  for (std::size_t i = rows.size() - tail; i < rows.size(); ++i) total += rows[i].true_return;
  return total / static_cast<double>(tail);
}

EvaluationProbe::EvaluationProbe(const MdpSpec& mdp, std::span<const TabularPolicy> snapshots,
                                 const Provenance* provenance)
    : mdp_(mdp) {
  if (!snapshots.empty()) {
    rho_e_ = occupancy_exact(mdp, snapshots[0]);
    rho_n_ = StateActionDensity{Table(mdp.n_states(), mdp.n_actions())};
    if (snapshots.size() > 1) {
      const double w = 1.0 / static_cast<double>(snapshots.size() - 1);
      for (std::size_t k = 1; k < snapshots.size(); ++k) {
        kernels::axpy(w, occupancy_exact(mdp, snapshots[k]).density.flat(),
                      rho_n_.density.flat());
      }
      kappa_defined_ = total_variation(rho_e_.density, rho_n_.density) > 0.0;
    }
  }
  if (provenance != nullptr) tags_ = provenance->tags;
}

double EvaluationProbe::kappa(const TabularPolicy& policy) const {
  if (!kappa_defined_) return kNaN;
  return kappa_estimate(occupancy_exact(mdp_, policy), rho_e_, rho_n_).kappa;
}

double EvaluationProbe::pseudo_precision(std::span<const std::size_t> dataset_indices) const {
  if (tags_.empty() || dataset_indices.empty()) return kNaN;
  std::size_t correct = 0;
  for (std::size_t i : dataset_indices) correct += tags_.at(i) != 0 ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(dataset_indices.size());
}

double synth_reward(const Classifier& g, StateAction x, bool allow_nonsymmetric) {
  if (!allow_nonsymmetric && !g.loss.is_symmetric()) {
    throw DomainError("synthetic reward requires a symmetric loss");
  }
  return eval_loss(g.loss, -g.score(x));
}

Table synth_reward_table(const Classifier& g) {
  Table r(g.scores.rows(), g.scores.cols());
  for (std::size_t i = 0; i < r.size(); ++i) r.flat()[i] = eval_loss(g.loss, -g.scores.flat()[i]);
  return r;
}

TabularPolicy rl_step_exact(const MdpSpec& mdp, const TabularPolicy& policy, const Table& reward,
                            double step, double temperature, Table* q_cache) {
  if (!(step > 0.0 && step <= 1.0)) throw DomainError("exact rl step must lie in (0, 1]");
  const bool warm = q_cache != nullptr && q_cache->rows() == reward.rows() &&
                    q_cache->cols() == reward.cols();
  Table q = value_iteration(mdp, reward, kRlTolerance, warm ? q_cache : nullptr);
  const TabularPolicy target = softmax_policy(q, temperature);
  TabularPolicy out{Table(policy.probs.rows(), policy.probs.cols())};
  kernels::lerp(step, policy.probs.flat(), target.probs.flat(), out.probs.flat());
  // Exact row normalization; lerp of two stochastic rows can drift by an ulp.
  for (std::size_t s = 0; s < out.probs.rows(); ++s) {
    auto row = out.probs.row(s);
    const double z = kernels::sum(row);
    for (double& p : row) p /= z;
  }
  if (q_cache != nullptr) *q_cache = std::move(q);
  return out;
}

TabularPolicy rl_step_reinforce(const TabularPolicy& policy, const Table& reward, double gamma,
                                double step, std::span<const Trajectory> batch) {
  if (!(step > 0.0)) throw DomainError("reinforce step must be positive");
  if (batch.empty()) throw DomainError("reinforce needs at least one trajectory");
  const std::size_t ns = policy.probs.rows();
  const std::size_t na = policy.probs.cols();

  // Discounted returns-to-go G_t and per-state mean baselines.
  std::vector<std::vector<double>> returns(batch.size());
  std::vector<double> base_sum(ns, 0.0);
  std::vector<double> base_count(ns, 0.0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& steps = batch[i].steps;
    returns[i].resize(steps.size());
    double g = 0.0;
    for (std::size_t t = steps.size(); t-- > 0;) {
      g = reward(steps[t].state, steps[t].action) + gamma * g;
      returns[i][t] = g;
      base_sum[steps[t].state] += g;
      base_count[steps[t].state] += 1.0;
    }
  }

  Table grad(ns, na);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& steps = batch[i].steps;
    double discount = 1.0;
    for (std::size_t t = 0; t < steps.size(); ++t) {
      const int s = steps[t].state;
      const double adv = returns[i][t] - base_sum[s] / base_count[s];
      const double w = discount * adv;
      // d log pi(a|s) / d theta(s, .) = e_a - pi(.|s)
      for (std::size_t b = 0; b < na; ++b) grad(s, b) -= w * policy.probs(s, b);
      grad(s, steps[t].action) += w;
      discount *= gamma;
    }
  }

  const double scale = step / static_cast<double>(batch.size());
  TabularPolicy out{Table(ns, na)};
  for (std::size_t s = 0; s < ns; ++s) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < na; ++a) {
      const double logit = std::log(std::max(policy.probs(s, a), 1e-300)) + scale * grad(s, a);
      out.probs(s, a) = logit;
      top = std::max(top, logit);
    }
    double z = 0.0;
    for (std::size_t a = 0; a < na; ++a) z += (out.probs(s, a) = std::exp(out.probs(s, a) - top));
    for (std::size_t a = 0; a < na; ++a) out.probs(s, a) /= z;
  }
  return out;
}

TabularPolicy fit_behavior_cloning(const DemoDataset& dataset, int n_states, int n_actions) {
  Table counts(n_states, n_actions, 1.0);
  for (const auto& x : dataset.samples) {
    if (x.state < 0 || x.state >= n_states || x.action < 0 || x.action >= n_actions) {
      throw InvariantError("dataset indices fit the MDP", "sample out of range");
    }
    counts(x.state, x.action) += 1.0;
  }
  TabularPolicy pi{Table(n_states, n_actions)};
  for (int s = 0; s < n_states; ++s) {
    const double z = kernels::sum(counts.row(s));
    for (int a = 0; a < n_actions; ++a) pi.probs(s, a) = counts(s, a) / z;
  }
  return pi;
}

namespace {

void check_dataset(const MdpSpec& mdp, const DemoDataset& dataset) {
  if (dataset.samples.empty()) throw ConfigError("dataset is non-empty", "no samples");
  for (const auto& x : dataset.samples) {
    if (x.state < 0 || x.state >= mdp.n_states() || x.action < 0 ||
        x.action >= mdp.n_actions()) {
      throw InvariantError("dataset indices fit the MDP",
                           "sample (" + std::to_string(x.state) + "," + std::to_string(x.action) +
                               ") out of range");
    }
  }
}

// State shared by every adversarial trainer: policy, on-policy batch
// collection, the RL step and per-iteration bookkeeping.
class PolicyLoop {
 public:
  PolicyLoop(const MdpSpec& mdp, const TrainerConfig& cfg, const TrainingProbe* probe)
      : mdp_(mdp),
        cfg_(cfg),
        probe_(probe),
        policy_(TabularPolicy::uniform(mdp.n_states(), mdp.n_actions())),
        rollout_rng_(Rng::stream(cfg.seed, kRolloutStream)),
        trajectory_seed_(stream_seed(cfg.seed, kTrajectoryStream)) {}

  // B on-policy (s, a) samples.
  const std::vector<StateAction>& collect(int iteration) {
    batch_.clear();
    batch_.reserve(cfg_.batch_b);
    if (cfg_.rl_mode == RlMode::exact) {
      for (std::size_t i = 0; i < cfg_.batch_b; ++i) {
        batch_.push_back(sample_occupancy_pair(mdp_, policy_, rollout_rng_));
      }
      return batch_;
    }
    trajectories_ = sample_trajectories(mdp_, policy_, cfg_.rl_trajectories,
                                        Rng::stream(trajectory_seed_, iteration).next());
    // Discount-weighted draws from the collected rollouts.
    while (batch_.size() < cfg_.batch_b) {
      const auto& traj = trajectories_[rollout_rng_.below(trajectories_.size())];
      for (const auto& x : traj.steps) {
        if (rollout_rng_.uniform() >= mdp_.gamma()) {
          batch_.push_back(x);
          break;
        }
      }
    }
    return batch_;
  }

  void improve(const Classifier& reward_classifier) {
    const Table reward = synth_reward_table(reward_classifier);
    if (cfg_.rl_mode == RlMode::exact) {
      policy_ = rl_step_exact(mdp_, policy_, reward, cfg_.rl_step, cfg_.policy_temperature,
                              &q_cache_);
    } else {
      policy_ = rl_step_reinforce(policy_, reward, mdp_.gamma(), cfg_.rl_step, trajectories_);
    }
  }

  void record(int iteration, const RiskReport& risk, std::size_t pseudo_size,
              std::span<const std::size_t> pseudo_indices, double max_abs_score) {
    TrainRow row;
    row.iteration = iteration;
    row.true_return = expected_return(mdp_, policy_);
    row.risk = risk;
    row.pseudo_size = pseudo_size;
    row.pseudo_precision = probe_ != nullptr ? probe_->pseudo_precision(pseudo_indices) : kNaN;
    row.kappa_estimate = probe_ != nullptr ? probe_->kappa(policy_) : kNaN;
    row.max_abs_score = max_abs_score;
    if (max_abs_score > kScoreWarning && !score_warned_) {
      score_warned_ = true;
      record_.warnings.push_back("classifier score magnitude exceeded 1e3 at iteration " +
                                 std::to_string(iteration));
    }
    record_.rows.push_back(row);
  }

  TrainResult finish() { return {std::move(policy_), std::move(record_)}; }

  TrainRecord& record_ref() { return record_; }

 private:
  const MdpSpec& mdp_;
  const TrainerConfig& cfg_;
  const TrainingProbe* probe_;
  TabularPolicy policy_;
  Rng rollout_rng_;
  std::uint64_t trajectory_seed_;
  std::vector<StateAction> batch_;
  std::vector<Trajectory> trajectories_;
  Table q_cache_;
  TrainRecord record_;
  bool score_warned_ = false;
};

std::vector<std::size_t> map_indices(std::span<const std::size_t> positions,
                                     std::span<const std::size_t> batch_indices,
                                     std::span<const std::size_t> parent) {
  std::vector<std::size_t> out;
  out.reserve(positions.size());
  for (std::size_t p : positions) {
    const std::size_t i = batch_indices[p];
    out.push_back(parent.empty() ? i : parent[i]);
  }
  return out;
}

std::vector<std::size_t> map_all(std::span<const std::size_t> batch_indices,
                                 std::span<const std::size_t> parent) {
  std::vector<std::size_t> out(batch_indices.begin(), batch_indices.end());
  if (!parent.empty()) {
    for (auto& i : out) i = parent[i];
  }
  return out;
}

void add_lambda_warning(const TrainerConfig& cfg, TrainRecord& record) {
  if (uses_pseudo_labels(cfg.method) && lambda_at(cfg, cfg.iterations) < 0.5) {
    record.warnings.push_back(
        "lambda < 0.5: alpha - kappa (1 - lambda) > 0 is not guaranteed for every kappa");
  }
}

}  // namespace

TrainResult train_ril_co(const MdpSpec& mdp, const DemoDataset& dataset, const TrainerConfig& cfg,
                         const TrainingProbe* probe, const TraceObserver& observer) {
  if (cfg.method != Method::ril_co) throw ConfigError("method is ril-co", method_token(cfg.method));
  validate(cfg);
  check_dataset(mdp, dataset);
  if (dataset.size() < 2) throw ConfigError("dataset has >= 2 samples", "cannot split");

  const LossSpec loss = effective_loss(cfg);
  const SplitDataset split = split_dataset(dataset, stream_seed(cfg.seed, kSplitStream));
  const std::uint64_t seed_u = stream_seed(cfg.seed, kBatchUStream);
  const std::uint64_t seed_v = stream_seed(cfg.seed, kBatchVStream);

  Classifier g1 = Classifier::zeros(mdp.n_states(), mdp.n_actions(), loss);
  Classifier g2 = g1;
  PolicyLoop loop(mdp, cfg, probe);
  add_lambda_warning(cfg, loop.record_ref());

  for (int it = 0; it < cfg.iterations; ++it) {
    const double lambda = lambda_at(cfg, it);
    const std::vector<StateAction>& batch = loop.collect(it);

    // U from D2 is scored by g2 and feeds g1; V from D1 is scored by g1 and feeds g2.
    const Minibatch u = sample_minibatch(split.d2, cfg.batch_u, seed_u, it);
    const Minibatch v = sample_minibatch(split.d1, cfg.batch_v, seed_v, it);
    const PseudoBatch p1 = co_pseudo_label(g2, u, cfg.k, PseudoSource::from_d2,
                                           cfg.relaxed_selection);
    const PseudoBatch p2 = co_pseudo_label(g1, v, cfg.k, PseudoSource::from_d1,
                                           cfg.relaxed_selection);

    const RiskReport risk1 = empirical_risk_co(g1, v.samples, p1.samples, batch, lambda);
    const std::vector<std::size_t> p1_idx = map_indices(p1.candidate_positions, u.indices,
                                                        split.parent2);

    if (observer) {
      const std::vector<std::size_t> v_idx = map_all(v.indices, split.parent1);
      const std::vector<std::size_t> u_idx = map_all(u.indices, split.parent2);
      const std::vector<std::size_t> p2_idx = map_indices(p2.candidate_positions, v.indices,
                                                          split.parent1);
      IterationTrace trace;
      trace.iteration = it + 1;
      trace.lambda = lambda;
      trace.policy_batch = batch;
      trace.feeds.push_back({1, 2, 1, p1.source, v.samples, p1.samples, v_idx, p1_idx});
      trace.feeds.push_back({2, 1, 2, p2.source, u.samples, p2.samples, u_idx, p2_idx});
      trace.reward_classifier = &g1;
      trace.reward_risk = &risk1;
      observer(trace);
    }

    for (int step = 0; step < cfg.classifier_steps; ++step) {
      g1 = classifier_grad_step(g1, v.samples, p1.samples, batch, lambda, cfg.classifier_step,
                                cfg.weight_decay);
      g2 = classifier_grad_step(g2, u.samples, p2.samples, batch, lambda, cfg.classifier_step,
                                cfg.weight_decay);
    }
    // Rewards come from g1 only.
    loop.improve(g1);
    loop.record(it + 1, risk1, p1.samples.size(), p1_idx,
                std::max(g1.max_abs_score(), g2.max_abs_score()));
  }
  return loop.finish();
}

TrainResult train_baseline(const MdpSpec& mdp, const DemoDataset& dataset,
                           const TrainerConfig& cfg, const TrainingProbe* probe,
                           const TraceObserver& observer) {
  if (cfg.method == Method::ril_co) {
    throw ConfigError("method is a baseline", "use train_ril_co for ril-co");
  }
  validate(cfg);
  check_dataset(mdp, dataset);

  if (cfg.method == Method::bc) {
    TrainResult r{fit_behavior_cloning(dataset, mdp.n_states(), mdp.n_actions()), {}};
    TrainRow row;
    row.iteration = 1;
    row.true_return = expected_return(mdp, r.policy);
    row.pseudo_precision = kNaN;
    row.kappa_estimate = probe != nullptr ? probe->kappa(r.policy) : kNaN;
    r.record.rows.push_back(row);
    return r;
  }

  const LossSpec loss = effective_loss(cfg);
  const bool pseudo = cfg.method == Method::ril_p;
  const std::uint64_t seed_u = stream_seed(cfg.seed, kBatchUStream);
  const std::uint64_t seed_v = stream_seed(cfg.seed, kBatchVStream);

  Classifier g = Classifier::zeros(mdp.n_states(), mdp.n_actions(), loss);
  PolicyLoop loop(mdp, cfg, probe);
  add_lambda_warning(cfg, loop.record_ref());

  for (int it = 0; it < cfg.iterations; ++it) {
    const double lambda = lambda_at(cfg, it);
    const std::vector<StateAction>& batch = loop.collect(it);
    const Minibatch u = sample_minibatch(dataset, cfg.batch_u, seed_u, it);

    PseudoBatch p;
    std::vector<std::size_t> p_idx;
    if (pseudo) {
      const Minibatch v = sample_minibatch(dataset, cfg.batch_v, seed_v, it);
      p = self_pseudo_label(g, v, cfg.k, cfg.relaxed_selection);
      p_idx = map_indices(p.candidate_positions, v.indices, {});
    }
    const RiskReport risk = pseudo ? empirical_risk_pseudo(g, u.samples, p.samples, batch, lambda)
                                   : empirical_risk_co(g, u.samples, {}, batch, lambda);
    if (observer) {
      IterationTrace trace;
      trace.iteration = it + 1;
      trace.lambda = lambda;
      trace.policy_batch = batch;
      trace.feeds.push_back(
          {1, pseudo ? 1 : 0, 0, PseudoSource::self, u.samples, p.samples, u.indices, p_idx});
      trace.reward_classifier = &g;
      trace.reward_risk = &risk;
      observer(trace);
    }
    for (int step = 0; step < cfg.classifier_steps; ++step) {
      g = classifier_grad_step(g, u.samples, p.samples, batch, lambda, cfg.classifier_step,
                               cfg.weight_decay);
    }
    loop.improve(g);
    loop.record(it + 1, risk, p.samples.size(), p_idx, g.max_abs_score());
  }
  return loop.finish();
}

TrainResult train(const MdpSpec& mdp, const DemoDataset& dataset, const TrainerConfig& cfg,
                  const TrainingProbe* probe, const TraceObserver& observer) {
  if (cfg.method == Method::ril_co) return train_ril_co(mdp, dataset, cfg, probe, observer);
  return train_baseline(mdp, dataset, cfg, probe, observer);
}

void write_record_csv(std::ostream& out, const TrainRecord& record) {
  out << "iteration,true_return,total,term_data,term_pseudo,term_policy,lambda,pseudo_size,"
         "pseudo_precision,kappa_estimate,max_abs_score\n";
  for (const auto& r : record.rows) {
    out << r.iteration << ',' << format_double(r.true_return) << ','
        << format_double(r.risk.total) << ',' << format_double(r.risk.term_data) << ','
        << format_double(r.risk.term_pseudo) << ',' << format_double(r.risk.term_policy) << ','
        << format_double(r.risk.lambda) << ',' << r.pseudo_size << ','
        << format_double(r.pseudo_precision) << ',' << format_double(r.kappa_estimate) << ','
        << format_double(r.max_abs_score) << '\n';
  }
  out << "summary," << format_double(record.final_mean_return()) << ",,,,,,,,,\n";
}

void write_config(std::ostream& out, const TrainerConfig& cfg) {
  out << "method=" << method_token(cfg.method) << '\n'
      << "loss=" << effective_loss(cfg).token() << '\n'
      << "lambda=" << format_double(cfg.lambda) << '\n'
      << "batch_b=" << cfg.batch_b << '\n'
      << "batch_u=" << cfg.batch_u << '\n'
      << "batch_v=" << cfg.batch_v << '\n'
      << "k=" << cfg.k << '\n'
      << "classifier_step=" << format_double(cfg.classifier_step) << '\n'
      << "weight_decay=" << format_double(cfg.weight_decay) << '\n'
      << "classifier_steps=" << cfg.classifier_steps << '\n'
      << "rl_mode=" << rl_mode_token(cfg.rl_mode) << '\n'
      << "rl_step=" << format_double(cfg.rl_step) << '\n'
      << "policy_temperature=" << format_double(cfg.policy_temperature) << '\n'
      << "rl_trajectories=" << cfg.rl_trajectories << '\n'
      << "iterations=" << cfg.iterations << '\n'
      << "seed=" << cfg.seed << '\n'
      << "allow_nonsymmetric=" << (cfg.allow_nonsymmetric ? "true" : "false") << '\n'
      << "relaxed_selection=" << (cfg.relaxed_selection ? "true" : "false") << '\n';
  if (cfg.lambda_anneal) {
    out << "lambda_anneal_start=" << format_double(cfg.lambda_anneal->start) << '\n'
        << "lambda_anneal_end=" << format_double(cfg.lambda_anneal->end) << '\n'
        << "lambda_anneal_iterations=" << cfg.lambda_anneal->iterations << '\n';
  } else {
    out << "lambda_anneal=none\n";
  }
}

}  // namespace rilco
