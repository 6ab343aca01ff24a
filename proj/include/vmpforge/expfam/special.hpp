#pragma once

namespace vmpforge::expfam {

/// ψ(x) for x > 0. Throws Error(DomainError) otherwise.
double digamma(double x);

/// ln Γ(x) for x > 0. Throws Error(DomainError) otherwise.
double log_gamma(double x);

}  // namespace vmpforge::expfam
