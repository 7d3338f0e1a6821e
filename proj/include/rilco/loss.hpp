#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace rilco {

// Margin losses l(z), z = y * g(x). `normalized` turns a base loss into
// l(z) / (l(z) + l(-z)).
enum class LossKind { logistic, hinge, sigmoid, unhinged, ap };

struct LossSpec {
  LossKind kind = LossKind::ap;
  bool normalized = false;

  // c with l(z) + l(-z) = c for every z, or nullopt for logistic and hinge.
  std::optional<double> symmetry_constant() const noexcept;
  bool is_symmetric() const noexcept { return symmetry_constant().has_value(); }

  // logistic | hinge | sigmoid | unhinged | nlogistic | nhinge | ap
  std::string token() const;

  bool operator==(const LossSpec&) const = default;
};

// Throws DomainError for tokens outside the list above.
LossSpec parse_loss(std::string_view token);

// Normalized counterpart of logistic or hinge. Other kinds are already
// symmetric and are rejected with DomainError.
LossSpec normalize(LossKind base);

// Both throw DomainError for non-finite z.
double eval_loss(const LossSpec& spec, double z);
double eval_loss_grad(const LossSpec& spec, double z);

// max_z |l(z) + l(-z) - 2 l(0)| over zs; zs must be non-empty.
double symmetry_defect(const LossSpec& spec, std::span<const double> zs);

// log(1 + exp(x)) without overflow.
double softplus(double x) noexcept;

}  // namespace rilco
