#include "vmpforge/expfam/special.hpp"

#include <array>
#include <cmath>
#include <string>

#include "vmpforge/error.hpp"

namespace vmpforge::expfam {

namespace {

void require_positive(double x, const char* fn) {
  if (!(x > 0) || !std::isfinite(x)) {
    throw Error(ErrorCode::DomainError, std::string(fn) + " requires a finite positive argument");
  }
}

}  // namespace

double digamma(double x) {
  require_positive(x, "digamma");
  double shift = 0.0;
  while (x < 6.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  // ψ(x) ~ ln x − 1/(2x) − Σ B_{2n} / (2n x^{2n})
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 -
                                      inv2 * (1.0 / 132 -
                                              inv2 * (691.0 / 32760 -
                                                      inv2 * (1.0 / 12 - inv2 * 3617.0 / 8160)))))));
  return shift + std::log(x) - 0.5 * inv - series;
}

double log_gamma(double x) {
  require_positive(x, "log_gamma");
  if (x < 0.5) return log_gamma(x + 1.0) - std::log(x);
  static constexpr double g = 7.0;
  static constexpr std::array<double, 9> c = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  const double z = x - 1.0;
  double a = c[0];
  const double t = z + g + 0.5;
  for (std::size_t i = 1; i < c.size(); ++i) a += c[i] / (z + static_cast<double>(i));
  return 0.91893853320467274178 + (z + 0.5) * std::log(t) - t + std::log(a);
}

}  // namespace vmpforge::expfam
