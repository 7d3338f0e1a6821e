#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rilco/demo.hpp"
#include "rilco/loss.hpp"
#include "rilco/mdp.hpp"
#include "rilco/pseudo_label.hpp"
#include "rilco/risk.hpp"

namespace rilco {

enum class Method { ril_co, ril_p, gail_logistic, gail_unhinged, gail_ap, bc };
enum class RlMode { exact, reinforce };

std::string method_token(Method m);                 // "ril-co", "gail-logistic", ...
Method parse_method(std::string_view token);        // accepts '-' or '_'; throws ConfigError
std::string rl_mode_token(RlMode m);
RlMode parse_rl_mode(std::string_view token);

struct LambdaAnneal {
  double start = 0.0;
  double end = 0.5;
  int iterations = 0;  // linear ramp length
};

struct TrainerConfig {
  Method method = Method::ril_co;
  double lambda = 0.5;
  // Loss for ril_co / ril_p. The gail_* methods fix their own loss.
  LossSpec loss{LossKind::ap, false};
  std::size_t batch_b = 64;
  std::size_t batch_u = 64;
  std::size_t batch_v = 64;
  std::size_t k = 16;
  double classifier_step = 2.0;
  double weight_decay = 1e-4;
  int classifier_steps = 1;  // gradient steps per classifier per iteration
  RlMode rl_mode = RlMode::exact;
  double rl_step = 0.05;             // exact: mixture weight; reinforce: logit step
  double policy_temperature = 0.05;  // exact: softmax temperature over Q_r
  int rl_trajectories = 16;          // reinforce: rollouts per iteration
  int iterations = 2000;
  std::uint64_t seed = 1;
  std::optional<LambdaAnneal> lambda_anneal;
  bool allow_nonsymmetric = false;
  bool relaxed_selection = false;

  // Desk-scale defaults (the values above).
  static TrainerConfig desk();
  // B = U = V = 640, K = 128.
  static TrainerConfig paper_faithful();
};

// Throws ConfigError naming the first violated invariant.
void validate(const TrainerConfig& cfg);

// Loss actually trained with: fixed for gail_*, cfg.loss otherwise.
LossSpec effective_loss(const TrainerConfig& cfg);
double lambda_at(const TrainerConfig& cfg, int iteration);

struct TrainRow {
  int iteration = 0;
  double true_return = 0.0;  // evaluation only
  RiskReport risk;
  std::size_t pseudo_size = 0;
  double pseudo_precision = 0.0;  // evaluation only; NaN without a probe
  double kappa_estimate = 0.0;    // evaluation only; NaN without a probe
  double max_abs_score = 0.0;
};

struct TrainRecord {
  std::vector<TrainRow> rows;
  std::vector<std::string> warnings;

  // Mean true_return over the last 10% of rows (at least one row).
  double final_mean_return() const;
};

struct TrainResult {
  TabularPolicy policy;
  TrainRecord record;
};

/// Evaluation-side hooks. Training code hands over only what it already
/// has (policies, indices into the dataset it was given); the probe owns any
/// hidden information such as provenance or expert occupancies.
class TrainingProbe {
 public:
  virtual ~TrainingProbe() = default;
  virtual double kappa(const TabularPolicy& policy) const = 0;
  // Fraction of the given dataset samples that are truly non-expert.
  virtual double pseudo_precision(std::span<const std::size_t> dataset_indices) const = 0;
};

class EvaluationProbe final : public TrainingProbe {
 public:
  // provenance may be null; snapshots[0] is the expert.
  EvaluationProbe(const MdpSpec& mdp, std::span<const TabularPolicy> snapshots,
                  const Provenance* provenance);

  double kappa(const TabularPolicy& policy) const override;
  double pseudo_precision(std::span<const std::size_t> dataset_indices) const override;

 private:
  const MdpSpec& mdp_;
  StateActionDensity rho_e_;
  StateActionDensity rho_n_;
  bool kappa_defined_ = false;
  std::vector<int> tags_;
};

/// Which data fed which classifier in one iteration; exposed so tests can
/// check the cross-labeling data flow and the reward/risk duality.
struct ClassifierFeed {
  int consumer = 0;      // 1 or 2 (single-classifier methods use 1)
  int scorer = 0;        // classifier that pseudo-labeled the batch, 0 if none
  int data_half = 0;     // 1, 2, or 0 for the unsplit dataset
  PseudoSource pseudo_source = PseudoSource::self;
  std::span<const StateAction> data;
  std::span<const StateAction> pseudo;
  std::span<const std::size_t> data_dataset_indices;    // indices into the full dataset
  std::span<const std::size_t> pseudo_dataset_indices;  // indices into the full dataset
};

struct IterationTrace {
  int iteration = 0;
  double lambda = 0.0;
  std::span<const StateAction> policy_batch;
  std::vector<ClassifierFeed> feeds;
  const Classifier* reward_classifier = nullptr;  // before this iteration's update
  const RiskReport* reward_risk = nullptr;        // risk of reward_classifier
};

using TraceObserver = std::function<void(const IterationTrace&)>;

// r(x) = l(-g(x)). Throws DomainError for non-symmetric losses unless allowed.
double synth_reward(const Classifier& g, StateAction x, bool allow_nonsymmetric = false);
Table synth_reward_table(const Classifier& g);

/// Exact policy improvement against `reward`: Q_r by value iteration, then
/// pi' = (1 - step) pi + step softmax(Q_r / temperature). step in (0, 1].
/// q_cache, when non-null, warm-starts value iteration and receives Q_r.
TabularPolicy rl_step_exact(const MdpSpec& mdp, const TabularPolicy& policy, const Table& reward,
                            double step, double temperature, Table* q_cache = nullptr);

/// One discounted REINFORCE step on softmax logits log(pi) using only the
/// sampled trajectories, with a per-state mean-return baseline.
TabularPolicy rl_step_reinforce(const TabularPolicy& policy, const Table& reward, double gamma,
                                double step, std::span<const Trajectory> batch);

// Trains any method. probe may be null.
TrainResult train(const MdpSpec& mdp, const DemoDataset& dataset, const TrainerConfig& cfg,
                  const TrainingProbe* probe = nullptr, const TraceObserver& observer = {});

// cfg.method must be ril_co.
TrainResult train_ril_co(const MdpSpec& mdp, const DemoDataset& dataset, const TrainerConfig& cfg,
                         const TrainingProbe* probe = nullptr, const TraceObserver& observer = {});

// cfg.method must be one of the baselines.
TrainResult train_baseline(const MdpSpec& mdp, const DemoDataset& dataset,
                           const TrainerConfig& cfg, const TrainingProbe* probe = nullptr,
                           const TraceObserver& observer = {});

// Maximum-likelihood policy with add-one smoothing; never touches the MDP dynamics.
TabularPolicy fit_behavior_cloning(const DemoDataset& dataset, int n_states, int n_actions);

// CSV with a header row, one row per iteration, then a `summary` row.
void write_record_csv(std::ostream& out, const TrainRecord& record);

// Flat key=value echo of every effective parameter.
void write_config(std::ostream& out, const TrainerConfig& cfg);

}  // namespace rilco
