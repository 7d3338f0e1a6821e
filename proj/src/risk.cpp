#include "rilco/risk.hpp"

#include <algorithm>
#include <cmath>

#include "rilco/errors.hpp"
#include "rilco/kernels.hpp"

namespace rilco {
namespace {

struct LossTables {
  Table pos;  // l(g(x))
  Table neg;  // l(-g(x))
};

LossTables loss_tables(const Classifier& g) {
  LossTables t{Table(g.scores.rows(), g.scores.cols()), Table(g.scores.rows(), g.scores.cols())};
  const auto s = g.scores.flat();
  for (std::size_t i = 0; i < s.size(); ++i) {
    t.pos.flat()[i] = eval_loss(g.loss, s[i]);
    t.neg.flat()[i] = eval_loss(g.loss, -s[i]);
  }
  return t;
}

// Occurrence weights scaled by 1/|batch|.
Table batch_weights(std::span<const StateAction> batch, const Table& shape) {
  Table w(shape.rows(), shape.cols());
  if (batch.empty()) return w;
  const double inc = 1.0 / static_cast<double>(batch.size());
  for (const auto& x : batch) w(x.state, x.action) += inc;
  return w;
}

void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in [0, 1]");
}

void check_batches(std::span<const StateAction> data, std::span<const StateAction> policy_batch) {
  if (data.empty()) throw DomainError("data batch is empty");
  if (policy_batch.empty()) throw DomainError("policy batch is empty");
}

RiskReport empirical_risk(const Classifier& g, std::span<const StateAction> data,
                          std::span<const StateAction> pseudo,
                          std::span<const StateAction> policy_batch, double lambda) {
  check_lambda(lambda);
  check_batches(data, policy_batch);
  const LossTables lt = loss_tables(g);
  RiskReport r;
  r.lambda = lambda;
  r.term_data = 0.5 * kernels::dot(batch_weights(data, g.scores).flat(), lt.pos.flat());
  r.term_pseudo = pseudo.empty() ? 0.0
                                 : 0.5 * lambda *
                                       kernels::dot(batch_weights(pseudo, g.scores).flat(),
                                                    lt.neg.flat());
  r.term_policy = 0.5 * (1.0 - lambda) *
                  kernels::dot(batch_weights(policy_batch, g.scores).flat(), lt.neg.flat());
  r.total = r.term_data + r.term_pseudo + r.term_policy;
  return r;
}

void check_same_shape(const Table& a, const Table& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvariantError("tables share the state-action shape", "shape mismatch");
  }
}

Lemma1Sides lemma1_sides(const Classifier& g, const StateActionDensity& rho_e,
                         const StateActionDensity& rho_n, const StateActionDensity& rho_pi,
                         double alpha, double kappa, double lambda, double c) {
  StateActionDensity rho_prime{Table(rho_e.density.rows(), rho_e.density.cols()), rho_e.mode};
  kernels::lerp(1.0 - alpha, rho_e.density.flat(), rho_n.density.flat(),
                rho_prime.density.flat());
  const StateActionDensity rho_lambda = mixture_density_lambda(rho_n, rho_pi, lambda);
  const double k = kappa * (1.0 - lambda);
  Lemma1Sides out;
  out.lhs = balanced_risk_exact(g, rho_prime, rho_lambda);
  out.rhs = (alpha - k) * balanced_risk_exact(g, rho_e, rho_n) + 0.5 * (1.0 - alpha + k) * c;
  return out;
}

}  // namespace

Classifier Classifier::zeros(int n_states, int n_actions, LossSpec loss, bool require_symmetric) {
  if (require_symmetric && !loss.is_symmetric()) {
    throw DomainError("loss '" + loss.token() + "' is not symmetric");
  }
  return {Table(n_states, n_actions), loss};
}

double Classifier::max_abs_score() const noexcept {
  double m = 0.0;
  for (double x : scores.flat()) m = std::max(m, std::fabs(x));
  return m;
}

double balanced_risk_exact(const Classifier& g, const StateActionDensity& rho_pos,
                           const StateActionDensity& rho_neg) {
  check_same_shape(g.scores, rho_pos.density);
  check_same_shape(g.scores, rho_neg.density);
  const LossTables lt = loss_tables(g);
  return 0.5 * kernels::dot(rho_pos.density.flat(), lt.pos.flat()) +
         0.5 * kernels::dot(rho_neg.density.flat(), lt.neg.flat());
}

StateActionDensity mixture_density_lambda(const StateActionDensity& rho_n,
                                          const StateActionDensity& rho_pi, double lambda) {
  check_lambda(lambda);
  check_same_shape(rho_n.density, rho_pi.density);
  StateActionDensity out{Table(rho_n.density.rows(), rho_n.density.cols()), rho_pi.mode};
  if (lambda == 0.0) return rho_pi;
  if (lambda == 1.0) return rho_n;
  kernels::lerp(1.0 - lambda, rho_n.density.flat(), rho_pi.density.flat(), out.density.flat());
  return out;
}

Lemma1Sides lemma1_decompose(const Classifier& g, const StateActionDensity& rho_e,
                             const StateActionDensity& rho_n, const StateActionDensity& rho_pi,
                             double alpha, double kappa, double lambda) {
  const auto c = g.loss.symmetry_constant();
  if (!c) throw DomainError("the decomposition requires a symmetric loss");
  return lemma1_sides(g, rho_e, rho_n, rho_pi, alpha, kappa, lambda, *c);
}

Lemma1Sides lemma1_decompose_unchecked(const Classifier& g, const StateActionDensity& rho_e,
                                       const StateActionDensity& rho_n,
                                       const StateActionDensity& rho_pi, double alpha,
                                       double kappa, double lambda) {
  return lemma1_sides(g, rho_e, rho_n, rho_pi, alpha, kappa, lambda,
                      2.0 * eval_loss(g.loss, 0.0));
}

RiskReport empirical_risk_co(const Classifier& g, std::span<const StateAction> data,
                             std::span<const StateAction> pseudo,
                             std::span<const StateAction> policy_batch, double lambda) {
  return empirical_risk(g, data, pseudo, policy_batch, lambda);
}

RiskReport empirical_risk_pseudo(const Classifier& g, std::span<const StateAction> data,
                                 std::span<const StateAction> pseudo,
                                 std::span<const StateAction> policy_batch, double lambda) {
  return empirical_risk(g, data, pseudo, policy_batch, lambda);
}

double regularized_objective(const Classifier& g, std::span<const StateAction> data,
                             std::span<const StateAction> pseudo,
                             std::span<const StateAction> policy_batch, double lambda,
                             double weight_decay) {
  const double norm2 = kernels::dot(g.scores.flat(), g.scores.flat());
  return empirical_risk(g, data, pseudo, policy_batch, lambda).total + weight_decay * norm2;
}

Table risk_gradient(const Classifier& g, std::span<const StateAction> data,
                    std::span<const StateAction> pseudo, std::span<const StateAction> policy_batch,
                    double lambda, double weight_decay) {
  check_lambda(lambda);
  check_batches(data, policy_batch);
  const std::size_t n = g.scores.size();
  Table pos_grad(g.scores.rows(), g.scores.cols());  // l'(g)
  Table neg_grad(g.scores.rows(), g.scores.cols());  // -l'(-g) = d/dg l(-g)
  const auto s = g.scores.flat();
  for (std::size_t i = 0; i < n; ++i) {
    pos_grad.flat()[i] = eval_loss_grad(g.loss, s[i]);
    neg_grad.flat()[i] = -eval_loss_grad(g.loss, -s[i]);
  }

  Table pos_w = batch_weights(data, g.scores);
  for (double& w : pos_w.flat()) w *= 0.5;
  Table neg_w = batch_weights(policy_batch, g.scores);
  for (double& w : neg_w.flat()) w *= 0.5 * (1.0 - lambda);
  if (!pseudo.empty()) {
    kernels::axpy(0.5 * lambda, batch_weights(pseudo, g.scores).flat(), neg_w.flat());
  }

  Table grad(g.scores.rows(), g.scores.cols());
  kernels::mul_add(pos_w.flat(), pos_grad.flat(), grad.flat());
  kernels::mul_add(neg_w.flat(), neg_grad.flat(), grad.flat());
  if (weight_decay != 0.0) kernels::axpy(2.0 * weight_decay, g.scores.flat(), grad.flat());
  return grad;
}

Classifier classifier_grad_step(const Classifier& g, std::span<const StateAction> data,
                                std::span<const StateAction> pseudo,
                                std::span<const StateAction> policy_batch, double lambda,
                                double step_size, double weight_decay) {
  if (!(step_size > 0.0)) throw DomainError("classifier step size must be positive");
  const Table grad = risk_gradient(g, data, pseudo, policy_batch, lambda, weight_decay);
  Classifier out = g;
  kernels::axpy(-step_size, grad.flat(), out.scores.flat());
  return out;
}

ExactFitResult fit_classifier_exact(const LossSpec& loss, const StateActionDensity& rho_pos,
                                    const StateActionDensity& rho_neg,
                                    const ExactFitOptions& options) {
  check_same_shape(rho_pos.density, rho_neg.density);
  ExactFitResult r{Classifier{Table(rho_pos.density.rows(), rho_pos.density.cols()), loss}};
  const std::size_t n = r.g.scores.size();
  const auto pos = rho_pos.density.flat();
  const auto neg = rho_neg.density.flat();
  std::vector<double> grad(n);
  // l(z) + l(-z) = c implies l'(z) = l'(-z).
  const bool symmetric = loss.is_symmetric();
  for (r.steps = 0; r.steps < options.max_steps; ++r.steps) {
    auto s = r.g.scores.flat();
    r.grad_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double gp = eval_loss_grad(loss, s[i]);
      const double gn = symmetric ? gp : eval_loss_grad(loss, -s[i]);
      grad[i] = 0.5 * pos[i] * gp - 0.5 * neg[i] * gn + 2.0 * options.weight_decay * s[i];
      r.grad_norm = std::max(r.grad_norm, std::fabs(grad[i]));
    }
    if (r.grad_norm < options.grad_tol) break;
    if (options.precondition) {
      // The exact risk is separable; scale each entry by its density mass.
      for (std::size_t i = 0; i < n; ++i) {
        const double mass = 0.5 * (pos[i] + neg[i]) + 2.0 * options.weight_decay;
        if (mass > 0.0) s[i] -= options.step_size * grad[i] / mass;
      }
    } else {
      kernels::axpy(-options.step_size, grad, s);
    }
  }
  return r;
}

}  // namespace rilco
