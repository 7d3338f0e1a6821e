#include "rilco/loss.hpp"

#include <algorithm>
#include <cmath>

#include "rilco/errors.hpp"

namespace rilco {
namespace {

// 1 / (1 + e^z), evaluated on the side that cannot overflow.
double sigmoid_loss(double z) noexcept {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

// d/dz of 1/(1+e^z) = -s(z) s(-z).
double sigmoid_loss_grad(double z) noexcept { return -sigmoid_loss(z) * sigmoid_loss(-z); }

double logistic(double z) noexcept { return softplus(-z); }
double logistic_grad(double z) noexcept { return -sigmoid_loss(z); }

double hinge(double z) noexcept { return std::max(1.0 - z, 0.0); }
// Right derivative at the kink z = 1.
double hinge_grad(double z) noexcept { return z < 1.0 ? -1.0 : 0.0; }

double base_value(LossKind kind, double z) noexcept;
double base_grad(LossKind kind, double z) noexcept;

// a / (a + b) with a = l(z), b = l(-z); 0/0 resolves to the symmetric limit.
double normalized_value(LossKind kind, double z) noexcept {
  const double a = base_value(kind, z);
  const double b = base_value(kind, -z);
  const double den = a + b;
  if (den == 0.0) return 0.5;
  return a / den;
}

// (a' b - a b') / (a + b)^2 with b' = d/dz l(-z) = -l'(-z).
double normalized_grad(LossKind kind, double z) noexcept {
  const double a = base_value(kind, z);
  const double b = base_value(kind, -z);
  const double den = a + b;
  if (den == 0.0) return 0.0;
  const double da = base_grad(kind, z);
  const double db = -base_grad(kind, -z);
  return (da * b - a * db) / (den * den);
}

double ap_value(double z) noexcept {
  const double a = softplus(-z);
  const double b = softplus(z);
  return 0.5 * a / (a + b) + 0.5 / (1.0 + std::exp(z));
}

double base_value(LossKind kind, double z) noexcept {
  switch (kind) {
    case LossKind::logistic:
      return logistic(z);
    case LossKind::hinge:
      return hinge(z);
    case LossKind::sigmoid:
      return sigmoid_loss(z);
    case LossKind::unhinged:
      return 1.0 - z;
    case LossKind::ap:
      return ap_value(z);
  }
  return 0.0;
}

double base_grad(LossKind kind, double z) noexcept {
  switch (kind) {
    case LossKind::logistic:
      return logistic_grad(z);
    case LossKind::hinge:
      return hinge_grad(z);
    case LossKind::sigmoid:
      return sigmoid_loss_grad(z);
    case LossKind::unhinged:
      return -1.0;
    case LossKind::ap:
      return 0.5 * normalized_grad(LossKind::logistic, z) + 0.5 * sigmoid_loss_grad(z);
  }
  return 0.0;
}

void require_finite(double z) {
  if (!std::isfinite(z)) throw DomainError("loss argument must be finite");
}

}  // namespace

double softplus(double x) noexcept {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

std::optional<double> LossSpec::symmetry_constant() const noexcept {
  if (normalized) return 1.0;
  switch (kind) {
    case LossKind::sigmoid:
    case LossKind::ap:
      return 1.0;
    case LossKind::unhinged:
      return 2.0;
    case LossKind::logistic:
    case LossKind::hinge:
      return std::nullopt;
  }
  return std::nullopt;
}

std::string LossSpec::token() const {
  switch (kind) {
    case LossKind::logistic:
      return normalized ? "nlogistic" : "logistic";
    case LossKind::hinge:
      return normalized ? "nhinge" : "hinge";
    case LossKind::sigmoid:
      return "sigmoid";
    case LossKind::unhinged:
      return "unhinged";
    case LossKind::ap:
      return "ap";
  }
  return "?";
}

LossSpec parse_loss(std::string_view token) {
  if (token == "logistic") return {LossKind::logistic, false};
  if (token == "hinge") return {LossKind::hinge, false};
  if (token == "sigmoid") return {LossKind::sigmoid, false};
  if (token == "unhinged") return {LossKind::unhinged, false};
  if (token == "nlogistic") return normalize(LossKind::logistic);
  if (token == "nhinge") return normalize(LossKind::hinge);
  if (token == "ap") return {LossKind::ap, false};
  throw DomainError("unknown loss '" + std::string(token) + "'");
}

LossSpec normalize(LossKind base) {
  if (base != LossKind::logistic && base != LossKind::hinge) {
    throw DomainError("only logistic and hinge have normalized counterparts");
  }
  return {base, true};
}

double eval_loss(const LossSpec& spec, double z) {
  require_finite(z);
  return spec.normalized ? normalized_value(spec.kind, z) : base_value(spec.kind, z);
}

double eval_loss_grad(const LossSpec& spec, double z) {
  require_finite(z);
  return spec.normalized ? normalized_grad(spec.kind, z) : base_grad(spec.kind, z);
}

double symmetry_defect(const LossSpec& spec, std::span<const double> zs) {
  if (zs.empty()) throw DomainError("symmetry_defect needs at least one point");
  const double c = 2.0 * eval_loss(spec, 0.0);
  double worst = 0.0;
  for (double z : zs) {
    worst = std::max(worst, std::fabs(eval_loss(spec, z) + eval_loss(spec, -z) - c));
  }
  return worst;
}

}  // namespace rilco
