#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vmpforge/bn/ground.hpp"
#include "vmpforge/expfam/expfamily.hpp"

namespace vmpforge::oracle {

/// Largest observation count two_coin_evidence will enumerate.
inline constexpr std::size_t kMaxTwoCoinObservations = 20;
/// Largest joint latent state space enumerate_discrete will visit.
inline constexpr double kMaxJointStates = 1e7;

struct ExactResult {
  double log_evidence = 0.0;
  /// Per latent categorical variable, one probability row per instance.
  std::map<std::string, std::vector<std::vector<double>>> marginals;
  /// Exact Dirichlet parameters per instance, filled only when every
  /// latent variable is continuous so the posterior stays conjugate.
  std::map<std::string, std::vector<std::vector<double>>> posterior_params;
};

/// Beta(a + H, b + N − H).
expfam::DirichletParams coin_posterior(std::uint64_t heads, std::uint64_t n, double a, double b);

/// Priors indexed by category: entry 1 is the head side.
struct TwoCoinPriors {
  std::vector<double> pi{1.0, 1.0};
  std::vector<double> phi0{1.0, 1.0};
  std::vector<double> phi1{1.0, 1.0};
};

/// Exact evidence and coin-choice marginals of the two-coin model by
/// summing over all 2^N choices. `obs` holds 0/1 outcomes.
ExactResult two_coin_evidence(std::span<const int> obs, const TwoCoinPriors& priors = {});

/// Collapsed enumeration: sums over every latent categorical assignment and
/// integrates Dirichlet variables analytically.
ExactResult enumerate_discrete(const bn::GroundNetwork& net);

}  // namespace vmpforge::oracle
