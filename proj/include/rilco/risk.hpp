#pragma once

#include <span>
#include <utility>

#include "rilco/loss.hpp"
#include "rilco/mdp.hpp"
#include "rilco/table.hpp"

namespace rilco {

/// Tabular classifier g(s, a) with the margin loss it is trained under.
/// g(x) >= 0 predicts "expert", g(x) < 0 predicts "non-expert".
struct Classifier {
  Table scores;
  LossSpec loss;

  // All-zero scores; throws DomainError if `require_symmetric` and the loss is not.
  static Classifier zeros(int n_states, int n_actions, LossSpec loss,
                          bool require_symmetric = false);

  double score(StateAction x) const noexcept { return scores(x.state, x.action); }
  double max_abs_score() const noexcept;
};

struct RiskReport {
  double total = 0.0;
  double term_data = 0.0;
  double term_pseudo = 0.0;
  double term_policy = 0.0;
  double lambda = 0.0;
};

// 1/2 E_pos[l(g)] + 1/2 E_neg[l(-g)].
double balanced_risk_exact(const Classifier& g, const StateActionDensity& rho_pos,
                           const StateActionDensity& rho_neg);

// lambda * rho_n + (1 - lambda) * rho_pi, lambda in [0, 1].
StateActionDensity mixture_density_lambda(const StateActionDensity& rho_n,
                                          const StateActionDensity& rho_pi, double lambda);

struct Lemma1Sides {
  double lhs = 0.0;
  double rhs = 0.0;
};

// lhs = R(g; alpha rho_E + (1 - alpha) rho_N, rho_pi^lambda),
// rhs = (alpha - kappa (1 - lambda)) R(g; rho_E, rho_N) + (1 - alpha + kappa (1 - lambda)) c / 2.
// The caller builds rho_pi = kappa rho_E + (1 - kappa) rho_N. Symmetric losses only.
Lemma1Sides lemma1_decompose(const Classifier& g, const StateActionDensity& rho_e,
                             const StateActionDensity& rho_n, const StateActionDensity& rho_pi,
                             double alpha, double kappa, double lambda);

// Same arithmetic with c taken as 2 l(0) and no symmetry check, for showing
// that the identity breaks without symmetry.
Lemma1Sides lemma1_decompose_unchecked(const Classifier& g, const StateActionDensity& rho_e,
                                       const StateActionDensity& rho_n,
                                       const StateActionDensity& rho_pi, double alpha,
                                       double kappa, double lambda);

/// Empirical co-risk:
///   1/2 mean_data l(g) + lambda/2 mean_pseudo l(-g) + (1-lambda)/2 mean_policy l(-g).
/// An empty pseudo batch contributes 0. Empty data or policy batches throw.
RiskReport empirical_risk_co(const Classifier& g, std::span<const StateAction> data,
                             std::span<const StateAction> pseudo,
                             std::span<const StateAction> policy_batch, double lambda);

// Self-pseudo-labeling risk; same formula, data is the unsplit dataset batch.
RiskReport empirical_risk_pseudo(const Classifier& g, std::span<const StateAction> data,
                                 std::span<const StateAction> pseudo,
                                 std::span<const StateAction> policy_batch, double lambda);

// Empirical risk plus weight_decay * ||g||^2, the objective the gradient step minimizes.
double regularized_objective(const Classifier& g, std::span<const StateAction> data,
                             std::span<const StateAction> pseudo,
                             std::span<const StateAction> policy_batch, double lambda,
                             double weight_decay);

// Gradient of regularized_objective with respect to every score entry.
Table risk_gradient(const Classifier& g, std::span<const StateAction> data,
                    std::span<const StateAction> pseudo, std::span<const StateAction> policy_batch,
                    double lambda, double weight_decay);

// g - step * gradient. step must be positive.
Classifier classifier_grad_step(const Classifier& g, std::span<const StateAction> data,
                                std::span<const StateAction> pseudo,
                                std::span<const StateAction> policy_batch, double lambda,
                                double step_size, double weight_decay);

struct ExactFitOptions {
  // With `precondition`, entry i moves by step_size * grad_i / mass_i where
  // mass_i = (rho_pos_i + rho_neg_i) / 2 + 2 weight_decay.
  bool precondition = true;
  double step_size = 2.0;
  double weight_decay = 0.0;
  int max_steps = 100000;
  double grad_tol = 1e-8;
};

struct ExactFitResult {
  Classifier g;
  int steps = 0;
  double grad_norm = 0.0;
};

// Gradient descent on balanced_risk_exact(., rho_pos, rho_neg) from g = 0,
// until the gradient sup-norm falls below grad_tol or max_steps is hit.
ExactFitResult fit_classifier_exact(const LossSpec& loss, const StateActionDensity& rho_pos,
                                    const StateActionDensity& rho_neg,
                                    const ExactFitOptions& options = {});

}  // namespace rilco
