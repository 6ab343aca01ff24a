#pragma once

#include <span>
#include <vector>

namespace vmpforge::expfam {

/// Dirichlet pseudo-counts. Beta is the two-dimensional case.
struct DirichletParams {
  std::vector<double> alpha;

  DirichletParams() = default;
  explicit DirichletParams(std::vector<double> a);
  static DirichletParams symmetric(double concentration, std::size_t dim);
  static DirichletParams beta(double a, double b) { return DirichletParams({a, b}); }

  std::size_t dim() const { return alpha.size(); }
  friend bool operator==(const DirichletParams&, const DirichletParams&) = default;
};

struct CategoricalPosterior {
  std::vector<double> probs;

  std::size_t dim() const { return probs.size(); }
};

struct ElboAccumulator {
  double expected_log_joint = 0.0;
  double neg_entropy = 0.0;

  double elbo() const { return expected_log_joint - neg_entropy; }
};

/// Throws Error(DomainError) unless every component is finite and positive
/// and there are at least two.
void validate(const DirichletParams& p);

/// ψ(α_k) − ψ(Σα), written into `out`.
void expected_log(std::span<const double> alpha, std::span<double> out);
std::vector<double> expected_log(const DirichletParams& p);

DirichletParams update_dirichlet(const DirichletParams& prior, std::span<const double> responsibilities);

/// Normalises log weights with log-sum-exp. Writes probabilities into `out`.
void update_categorical(std::span<const double> log_weights, std::span<double> out);
CategoricalPosterior update_categorical(std::span<const double> log_weights);

double log_sum_exp(std::span<const double> values);

/// ln B(α) = Σ ln Γ(α_k) − ln Γ(Σ α_k).
double log_multivariate_beta(std::span<const double> alpha);

/// −KL(post ‖ prior).
double elbo_dirichlet_term(std::span<const double> prior, std::span<const double> post);
double elbo_dirichlet_term(const DirichletParams& prior, const DirichletParams& post);

/// Σ_k q_k (expLogParent_k + expLogLik_k − ln q_k), with 0·ln 0 = 0.
double elbo_categorical_terms(std::span<const double> q, std::span<const double> exp_log_parent,
                              std::span<const double> exp_log_lik);
double elbo_categorical_terms(const CategoricalPosterior& q, std::span<const double> exp_log_parent,
                              std::span<const double> exp_log_lik);

}  // namespace vmpforge::expfam
