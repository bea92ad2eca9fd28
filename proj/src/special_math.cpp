#include "slda/special_math.hpp"

#include <cmath>
#include <stdexcept>

namespace slda {

double digamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("digamma: argument must be positive");
  }
  // Shift upward with psi(x) = psi(x+1) - 1/x until the asymptotic series
  // is accurate, then apply the Bernoulli expansion through the 1/x^12 term.
  double shift = 0.0;
  while (x < 8.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double tail =
      inv2 * (1.0 / 12.0 -
      inv2 * (1.0 / 120.0 -
      inv2 * (1.0 / 252.0 -
      inv2 * (1.0 / 240.0 -
      inv2 * (1.0 / 132.0 -
      inv2 * (691.0 / 32760.0))))));
  return shift + std::log(x) - 0.5 * inv - tail;
}

double log_gamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("log_gamma: argument must be positive");
  }
  return std::lgamma(x);
}

Eigen::VectorXd dirichlet_expected_log(const Eigen::VectorXd& gamma) {
  for (Eigen::Index i = 0; i < gamma.size(); ++i) {
    if (!(gamma[i] > 0.0)) {
      throw std::domain_error("dirichlet_expected_log: nonpositive component");
    }
  }
  const double dig_total = digamma(gamma.sum());
  Eigen::VectorXd out(gamma.size());
  for (Eigen::Index i = 0; i < gamma.size(); ++i) {
    out[i] = digamma(gamma[i]) - dig_total;
  }
  return out;
}

LogSimplex log_normalize(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  LogSimplex out;
  out.log_p = (v.array() - m).cwiseMax(-700.0).matrix();
  Eigen::VectorXd e = out.log_p.array().exp();
  const double total = e.sum();
  out.p = e / total;
  out.log_p.array() -= std::log(total);
  return out;
}

}  // namespace slda
