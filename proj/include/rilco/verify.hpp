#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rilco/mdp.hpp"
#include "rilco/risk.hpp"

namespace rilco {

struct VerificationReport {
  std::string check_name;
  bool pass = false;
  double observed = 0.0;
  double threshold = 0.0;
  std::string details;
};

/// Policy whose occupancy is alpha * rho_e + (1 - alpha) * rho_n: at each
/// state it mixes pi_E and pi_N with weights proportional to the state
/// marginals alpha rho_e(s) and (1 - alpha) rho_n(s). alpha in (0, 1].
TabularPolicy density_matching_optimum(const StateActionDensity& rho_e,
                                       const StateActionDensity& rho_n, double alpha);

// pass iff alpha - kappa (1 - lambda) > 0. observed is that margin.
VerificationReport check_inequality_region(double alpha, double kappa, double lambda);

struct InequalitySweep {
  std::vector<double> lambdas;
  std::vector<bool> pass_everywhere;  // over the (alpha, kappa) grid, per lambda
  bool claim_holds = false;           // pass_everywhere[i] == (lambdas[i] >= 0.5) for all i
};

// n points per axis: alpha in (0.5, 1], kappa in [0, 1], lambda in [0, 1].
InequalitySweep sweep_inequality_region(int n = 101);

// E_rho_e[l(-g)] - E_rho_n[l(-g)].
double theorem1_gap(const Classifier& g_star, const StateActionDensity& rho_e,
                    const StateActionDensity& rho_n);

struct KappaEstimate {
  double kappa = 0.0;     // clipped to [0, 1]
  double residual = 0.0;  // L2 distance from rho_pi to the segment
};

// L2 projection of rho_pi onto {k rho_e + (1 - k) rho_n : k in [0, 1]}.
// Throws DomainError when rho_e == rho_n.
KappaEstimate kappa_estimate(const StateActionDensity& rho_pi, const StateActionDensity& rho_e,
                             const StateActionDensity& rho_n);

// Total variation distance 1/2 sum |a - b|.
double total_variation(const Table& a, const Table& b);

/// Named checks run by `rilco verify`. Each check is self-contained and
/// seeded; `env` is the environment the user passed on the command line.
struct VerifyContext {
  const MdpSpec* env = nullptr;
  std::uint64_t seed = 1;
};

struct RegisteredCheck {
  std::string name;
  std::string summary;
  std::function<VerificationReport(const VerifyContext&)> run;
};

const std::vector<RegisteredCheck>& verification_checks();

}  // namespace rilco
