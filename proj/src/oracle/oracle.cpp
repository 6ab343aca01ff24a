#include "vmpforge/oracle/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vmpforge::oracle {

namespace {

using expfam::log_multivariate_beta;

void check_prior(std::span<const double> p, const char* what) {
  if (p.size() != 2) throw Error(ErrorCode::DimensionMismatch, std::string(what) + " must have two entries");
  expfam::validate(expfam::DirichletParams({p.begin(), p.end()}));
}

// Running log-sum-exp.
struct LogSum {
  double max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;

  void add(double x) {
    if (x == -std::numeric_limits<double>::infinity()) return;
    if (x <= max) {
      sum += std::exp(x - max);
    } else {
      sum = sum * std::exp(max - x) + 1.0;
      max = x;
    }
  }
  double value() const { return sum == 0.0 ? max : max + std::log(sum); }
};

}  // namespace

expfam::DirichletParams coin_posterior(std::uint64_t heads, std::uint64_t n, double a, double b) {
  if (heads > n) {
    throw Error(ErrorCode::DomainError, "heads " + std::to_string(heads) + " exceed trials " + std::to_string(n));
  }
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw Error(ErrorCode::DomainError, "coin prior parameters must be positive and finite");
  }
  return expfam::DirichletParams::beta(a + static_cast<double>(heads), b + static_cast<double>(n - heads));
}

ExactResult two_coin_evidence(std::span<const int> obs, const TwoCoinPriors& priors) {
  const std::size_t n = obs.size();
  if (n > kMaxTwoCoinObservations) {
    throw Error(ErrorCode::TooLarge, "two-coin enumeration is limited to " +
                                         std::to_string(kMaxTwoCoinObservations) + " observations, got " +
                                         std::to_string(n));
  }
  check_prior(priors.pi, "pi prior");
  check_prior(priors.phi0, "phi0 prior");
  check_prior(priors.phi1, "phi1 prior");
  for (int x : obs) {
    if (x != 0 && x != 1) throw Error(ErrorCode::DomainError, "two-coin outcomes must be 0 or 1");
  }
  const double base = log_multivariate_beta(priors.pi) + log_multivariate_beta(priors.phi0) +
                      log_multivariate_beta(priors.phi1);

  const std::uint64_t total = std::uint64_t{1} << n;
  std::vector<double> terms(total);
  LogSum z;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    double pi[2] = {priors.pi[0], priors.pi[1]};
    double phi[2][2] = {{priors.phi0[0], priors.phi0[1]}, {priors.phi1[0], priors.phi1[1]}};
    for (std::size_t i = 0; i < n; ++i) {
      const int k = static_cast<int>((mask >> i) & 1U);
      pi[k] += 1.0;
      phi[k][obs[i]] += 1.0;
    }
    terms[mask] = log_multivariate_beta(pi) + log_multivariate_beta(phi[0]) +
                  log_multivariate_beta(phi[1]) - base;
    z.add(terms[mask]);
  }
  ExactResult out;
  out.log_evidence = z.value();
  auto& m = out.marginals["z"];
  m.assign(n, std::vector<double>(2, 0.0));
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    const double p = std::exp(terms[mask] - out.log_evidence);
    for (std::size_t i = 0; i < n; ++i) m[i][(mask >> i) & 1U] += p;
  }
  return out;
}

ExactResult enumerate_discrete(const bn::GroundNetwork& net) {
  struct Slot {
    int var;
    std::size_t instance;
    std::size_t dim;
  };
  std::vector<Slot> slots;
  double states = 1.0;
  for (const auto& v : net.vars) {
    if (v.kind == bn::DistKind::Dirichlet) {
      if (v.observed) {
        throw Error(ErrorCode::InvalidArgument, "observed Dirichlet variable '" + v.display_name() + "'");
      }
      continue;
    }
    if (v.observed) continue;
    for (std::size_t i = 0; i < v.count; ++i) {
      slots.push_back({v.id, i, v.dim});
      states *= static_cast<double>(v.dim);
    }
  }
  if (states > kMaxJointStates) {
    throw Error(ErrorCode::TooLarge, "joint latent state space of " + std::to_string(states) +
                                         " exceeds the enumeration limit");
  }

  std::vector<std::vector<std::int32_t>> value(net.vars.size());
  for (const auto& v : net.vars) {
    if (v.kind != bn::DistKind::Categorical) continue;
    value[v.id] = v.observed ? v.values : std::vector<std::int32_t>(v.count, 0);
  }
  std::vector<std::vector<double>> counts(net.vars.size());
  double base = 0.0;
  for (const auto& v : net.vars) {
    if (v.kind != bn::DistKind::Dirichlet) continue;
    counts[v.id].resize(v.count * v.dim);
    base += static_cast<double>(v.count) * log_multivariate_beta(v.prior);
  }

  auto log_joint = [&]() {
    for (auto& c : counts) std::fill(c.begin(), c.end(), 0.0);
    for (const auto& v : net.vars) {
      if (v.kind != bn::DistKind::Categorical) continue;
      const auto& d = net.vars[v.prob_parent];
      for (std::size_t i = 0; i < v.count; ++i) {
        std::size_t k = 0;
        if (v.selector >= 0) k = static_cast<std::size_t>(value[v.selector][net.selector_instance(v.id, i)]);
        const std::size_t parent = net.parent_instance(v.id, i, k);
        counts[d.id][parent * d.dim + static_cast<std::size_t>(value[v.id][i])] += 1.0;
      }
    }
    double total = -base;
    for (const auto& v : net.vars) {
      if (v.kind != bn::DistKind::Dirichlet) continue;
      std::vector<double> post(v.dim);
      for (std::size_t i = 0; i < v.count; ++i) {
        for (std::size_t k = 0; k < v.dim; ++k) post[k] = v.prior[k] + counts[v.id][i * v.dim + k];
        total += log_multivariate_beta(post);
      }
    }
    return total;
  };

  // Visits every assignment in odometer order; returns false once exhausted.
  auto advance = [&]() {
    for (const auto& s : slots) {
      auto& x = value[s.var][s.instance];
      if (static_cast<std::size_t>(++x) < s.dim) return true;
      x = 0;
    }
    return false;
  };
  auto reset = [&]() {
    for (const auto& s : slots) value[s.var][s.instance] = 0;
  };

  LogSum z;
  do {
    z.add(log_joint());
  } while (advance());

  ExactResult out;
  out.log_evidence = z.value();
  if (slots.empty()) {
    log_joint();
    for (const auto& v : net.vars) {
      if (v.kind != bn::DistKind::Dirichlet) continue;
      auto& rows = out.posterior_params[v.display_name()];
      for (std::size_t i = 0; i < v.count; ++i) {
        std::vector<double> row(v.dim);
        for (std::size_t k = 0; k < v.dim; ++k) row[k] = v.prior[k] + counts[v.id][i * v.dim + k];
        rows.push_back(std::move(row));
      }
    }
    return out;
  }

  for (const auto& v : net.vars) {
    if (v.kind == bn::DistKind::Categorical && !v.observed) {
      out.marginals[v.display_name()].assign(v.count, std::vector<double>(v.dim, 0.0));
    }
  }
  reset();
  do {
    const double p = std::exp(log_joint() - out.log_evidence);
    for (const auto& s : slots) {
      const auto& v = net.vars[s.var];
      out.marginals[v.display_name()][s.instance][static_cast<std::size_t>(value[s.var][s.instance])] += p;
    }
  } while (advance());
  return out;
}

}  // namespace vmpforge::oracle
