#pragma once

#include <Eigen/Core>

namespace slda {

// First derivative of log Gamma. Throws std::domain_error for x <= 0.
double digamma(double x);

// log Gamma(x), x > 0. Throws std::domain_error otherwise.
double log_gamma(double x);

// E[log theta_i] under Dirichlet(gamma): digamma(gamma_i) - digamma(sum_j gamma_j).
Eigen::VectorXd dirichlet_expected_log(const Eigen::VectorXd& gamma);

struct LogSimplex {
  Eigen::VectorXd log_p;  // logsumexp(log_p) == 0
  Eigen::VectorXd p;      // exp(log_p), sums to one
};

// Softmax of v via max subtraction. Shifted logits are floored at -700
// before exponentiation so the result never touches denormals.
LogSimplex log_normalize(const Eigen::VectorXd& v);

}  // namespace slda
