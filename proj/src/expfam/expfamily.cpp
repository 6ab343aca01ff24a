#include "vmpforge/expfam/expfamily.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vmpforge/error.hpp"
#include "vmpforge/expfam/special.hpp"

namespace vmpforge::expfam {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": dimensions " +
                                                  std::to_string(a) + " and " +
                                                  std::to_string(b) + " differ");
  }
}

}  // namespace

DirichletParams::DirichletParams(std::vector<double> a) : alpha(std::move(a)) { validate(*this); }

DirichletParams DirichletParams::symmetric(double concentration, std::size_t dim) {
  return DirichletParams(std::vector<double>(dim, concentration));
}

void validate(const DirichletParams& p) {
  if (p.alpha.size() < 2) throw Error(ErrorCode::DomainError, "Dirichlet needs dimension >= 2");
  for (double a : p.alpha) {
    if (!(a > 0) || !std::isfinite(a)) {
      throw Error(ErrorCode::DomainError, "Dirichlet pseudo-counts must be finite and positive");
    }
  }
}

void expected_log(std::span<const double> alpha, std::span<double> out) {
  require_same_dim(alpha.size(), out.size(), "expected_log");
  double total = 0.0;
  for (double a : alpha) total += a;
  const double psi_total = digamma(total);
  for (std::size_t k = 0; k < alpha.size(); ++k) out[k] = digamma(alpha[k]) - psi_total;
}

std::vector<double> expected_log(const DirichletParams& p) {
  std::vector<double> out(p.dim());
  expected_log(p.alpha, out);
  return out;
}

DirichletParams update_dirichlet(const DirichletParams& prior,
                                 std::span<const double> responsibilities) {
  require_same_dim(prior.dim(), responsibilities.size(), "update_dirichlet");
  DirichletParams post = prior;
  for (std::size_t k = 0; k < post.alpha.size(); ++k) post.alpha[k] += responsibilities[k];
  return post;
}

double log_sum_exp(std::span<const double> values) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

void update_categorical(std::span<const double> log_weights, std::span<double> out) {
  require_same_dim(log_weights.size(), out.size(), "update_categorical");
  for (double w : log_weights) {
    if (std::isnan(w) || w == std::numeric_limits<double>::infinity()) {
      throw Error(ErrorCode::NonFiniteMessage, "non-finite categorical log weight");
    }
  }
  const double mx = *std::max_element(log_weights.begin(), log_weights.end());
  if (mx == -std::numeric_limits<double>::infinity()) {
    throw Error(ErrorCode::DegenerateDistribution, "all categorical log weights are -inf");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = std::exp(log_weights[k] - mx);
    sum += out[k];
  }
  for (double& p : out) p /= sum;
}

CategoricalPosterior update_categorical(std::span<const double> log_weights) {
  CategoricalPosterior q{std::vector<double>(log_weights.size())};
  update_categorical(log_weights, q.probs);
  return q;
}

double log_multivariate_beta(std::span<const double> alpha) {
  double total = 0.0;
  double sum_lg = 0.0;
  for (double a : alpha) {
    total += a;
    sum_lg += log_gamma(a);
  }
  return sum_lg - log_gamma(total);
}

double elbo_dirichlet_term(std::span<const double> prior, std::span<const double> post) {
  require_same_dim(prior.size(), post.size(), "elbo_dirichlet_term");
  std::vector<double> elog(post.size());
  expected_log(post, elog);
  // E_q[ln p] − E_q[ln q] with both densities written as ln Γ and E[ln θ] terms.
  double out = log_multivariate_beta(post) - log_multivariate_beta(prior);
  for (std::size_t k = 0; k < post.size(); ++k) out += (prior[k] - post[k]) * elog[k];
  return out;
}

double elbo_dirichlet_term(const DirichletParams& prior, const DirichletParams& post) {
  return elbo_dirichlet_term(std::span<const double>(prior.alpha),
                             std::span<const double>(post.alpha));
}

double elbo_categorical_terms(std::span<const double> q, std::span<const double> exp_log_parent,
                              std::span<const double> exp_log_lik) {
  require_same_dim(q.size(), exp_log_parent.size(), "elbo_categorical_terms");
  require_same_dim(q.size(), exp_log_lik.size(), "elbo_categorical_terms");
  double out = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (q[k] == 0.0) continue;
    out += q[k] * (exp_log_parent[k] + exp_log_lik[k] - std::log(q[k]));
  }
  return out;
}

double elbo_categorical_terms(const CategoricalPosterior& q, std::span<const double> exp_log_parent,
                              std::span<const double> exp_log_lik) {
  return elbo_categorical_terms(std::span<const double>(q.probs), exp_log_parent, exp_log_lik);
}

}  // namespace vmpforge::expfam
