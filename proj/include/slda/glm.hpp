#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace slda {

enum class Family { Gaussian, Poisson };

// How the Poisson per-token expectation E[exp{eta^T Z_n / N}] is formed.
// IndicatorExact sums phi_{n,i} exp{eta_i/N}; PaperLiteral adds K-1 to
// each factor and is kept only as a faithfulness switch.
enum class PoissonLogNorm { IndicatorExact, PaperLiteral };

// FixedOne pins the Poisson dispersion at 1; PaperRatio applies the
// ratio update verbatim.
enum class PoissonDispersion { FixedOne, PaperRatio };

struct ResponseFamily {
  Family kind = Family::Gaussian;
  PoissonLogNorm lognorm = PoissonLogNorm::IndicatorExact;
  PoissonDispersion dispersion = PoissonDispersion::FixedOne;
};

struct GlmParams {
  Eigen::VectorXd eta;
  double delta = 1.0;
};

// Per-document inputs retained for the Poisson eta ascent, which must
// re-evaluate product expectations at trial eta values.
struct PoissonDocStats {
  Eigen::MatrixXd phis;  // N x K
  double y = 0.0;
};

struct GlmSuffStats {
  Eigen::MatrixXd ex_rows;    // L x K rows of E[Zbar_d], labeled docs only
  Eigen::MatrixXd exxt_sum;   // K x K sum of E[Zbar_d Zbar_d^T] (Gaussian)
  Eigen::VectorXd responses;  // length L
  std::vector<PoissonDocStats> poisson_docs;

  Eigen::Index num_labeled() const { return ex_rows.rows(); }
};

// E[Zbar Zbar^T] under the factorized posterior. Rows of phis are the
// per-token simplex vectors.
Eigen::MatrixXd expected_zbar_zbar_t(const Eigen::MatrixXd& phis);

// E[A(eta^T Zbar)]: Gaussian quadratic form, Poisson factor product.
double expected_log_normalizer(const Eigen::MatrixXd& phis,
                               const Eigen::VectorXd& eta,
                               const ResponseFamily& family);

// Partial derivative of the expected log normalizer in phi_j.
Eigen::VectorXd lognorm_grad_phi(Eigen::Index j, const Eigen::MatrixXd& phis,
                                 const Eigen::VectorXd& eta,
                                 const ResponseFamily& family);

// E[mu(eta^T Zbar) Zbar], the expected mean response times covariates.
Eigen::VectorXd expected_mu_zbar(const Eigen::MatrixXd& phis,
                                 const Eigen::VectorXd& eta,
                                 const ResponseFamily& family);

// Gaussian: solves the expected normal equations E[X^T X] eta = E[X]^T y,
// with ridge jitter on ill-conditioned systems. Poisson: gradient ascent
// with Armijo backtracking from current.eta, stopping when the gradient
// infinity norm drops below 1e-8 or after 500 iterations.
Eigen::VectorXd mstep_eta(const GlmSuffStats& stats, const ResponseFamily& family,
                          const GlmParams& current,
                          std::vector<std::string>* warnings = nullptr);

double mstep_delta(const GlmSuffStats& stats, const Eigen::VectorXd& eta_new,
                   const ResponseFamily& family,
                   std::vector<std::string>* warnings = nullptr);

// Gaussian expected response from E[Zbar]. Throws for Poisson, which needs
// the full phi list (the mean of exp is not exp of the mean).
double predict_mean(const Eigen::VectorXd& ezbar, const Eigen::VectorXd& eta,
                    const ResponseFamily& family);
double predict_mean(const Eigen::MatrixXd& phis, const Eigen::VectorXd& eta,
                    const ResponseFamily& family);

// E[log p(y | Z_{1:N})] = log h(y, delta) + (eta^T E[Zbar] y - E[A]) / delta.
double response_elbo_term(double y, const Eigen::MatrixXd& phis,
                          const GlmParams& params, const ResponseFamily& family);

// Solves a x = b by LDLT; on a failed or ill-conditioned factorization adds
// ridge jitter lambda = 1e-8 trace/K and retries, reporting a warning.
Eigen::VectorXd solve_with_ridge_fallback(const Eigen::MatrixXd& a,
                                          const Eigen::VectorXd& b,
                                          std::vector<std::string>* warnings,
                                          const std::string& context);

}  // namespace slda
