#include "slda/glm.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "slda/errors.hpp"

namespace slda {

namespace {

Eigen::VectorXd token_exp_eta(const Eigen::VectorXd& eta, Eigen::Index n_tokens) {
  return (eta.array() / static_cast<double>(n_tokens)).exp();
}

// One factor per token: E[exp{eta^T Z_n / N}].
Eigen::VectorXd poisson_factors(const Eigen::MatrixXd& phis,
                                const Eigen::VectorXd& exp_eta_n,
                                const ResponseFamily& family) {
  Eigen::VectorXd f = phis * exp_eta_n;
  if (family.lognorm == PoissonLogNorm::PaperLiteral) {
    f.array() += static_cast<double>(exp_eta_n.size()) - 1.0;
  }
  return f;
}

// Products over all factors but one, built from both ends rather than by
// division so an underflowing factor cannot poison its neighbours.
Eigen::VectorXd leave_one_out_products(const Eigen::VectorXd& f) {
  const Eigen::Index n = f.size();
  Eigen::VectorXd suffix(n + 1);
  suffix[n] = 1.0;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    suffix[i] = suffix[i + 1] * f[i];
  }
  Eigen::VectorXd out(n);
  double prefix = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i] = prefix * suffix[i + 1];
    prefix *= f[i];
  }
  return out;
}

void warn(std::vector<std::string>* warnings, const std::string& message) {
  if (warnings != nullptr) warnings->push_back(message);
}

}  // namespace

Eigen::VectorXd solve_with_ridge_fallback(const Eigen::MatrixXd& a,
                                          const Eigen::VectorXd& b,
                                          std::vector<std::string>* warnings,
                                          const std::string& context) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  Eigen::VectorXd x = ldlt.solve(b);
  bool bad = ldlt.info() != Eigen::Success || !x.allFinite();
  if (!bad) {
    const double resid = (a * x - b).cwiseAbs().maxCoeff();
    const double scale = b.cwiseAbs().maxCoeff() +
                         a.cwiseAbs().maxCoeff() * x.cwiseAbs().maxCoeff();
    bad = resid > 1e-8 * std::max(scale, 1e-12);
  }
  if (bad) {
    double lambda = 1e-8 * a.trace() / static_cast<double>(a.rows());
    if (!(lambda > 0.0)) lambda = 1e-12;
    Eigen::MatrixXd jittered = a;
    jittered.diagonal().array() += lambda;
    x = jittered.ldlt().solve(b);
    warn(warnings, context + ": ill-conditioned system, applied ridge jitter lambda=" +
                       std::to_string(lambda));
  }
  return x;
}

Eigen::MatrixXd expected_zbar_zbar_t(const Eigen::MatrixXd& phis) {
  const double n = static_cast<double>(phis.rows());
  const Eigen::VectorXd s = phis.colwise().sum().transpose();
  Eigen::MatrixXd m = s * s.transpose() - phis.transpose() * phis;
  m.diagonal() += s;
  return m / (n * n);
}

double expected_log_normalizer(const Eigen::MatrixXd& phis,
                               const Eigen::VectorXd& eta,
                               const ResponseFamily& family) {
  if (family.kind == Family::Gaussian) {
    return 0.5 * eta.dot(expected_zbar_zbar_t(phis) * eta);
  }
  return poisson_factors(phis, token_exp_eta(eta, phis.rows()), family).prod();
}

Eigen::VectorXd lognorm_grad_phi(Eigen::Index j, const Eigen::MatrixXd& phis,
                                 const Eigen::VectorXd& eta,
                                 const ResponseFamily& family) {
  const double n = static_cast<double>(phis.rows());
  if (family.kind == Family::Gaussian) {
    const Eigen::VectorXd phi_minus =
        phis.colwise().sum().transpose() - phis.row(j).transpose();
    return (2.0 * eta.dot(phi_minus) * eta + eta.cwiseProduct(eta)) / (2.0 * n * n);
  }
  const Eigen::VectorXd exp_eta_n = token_exp_eta(eta, phis.rows());
  const Eigen::VectorXd f = poisson_factors(phis, exp_eta_n, family);
  return leave_one_out_products(f)[j] * exp_eta_n;
}

Eigen::VectorXd expected_mu_zbar(const Eigen::MatrixXd& phis,
                                 const Eigen::VectorXd& eta,
                                 const ResponseFamily& family) {
  const double n = static_cast<double>(phis.rows());
  if (family.kind == Family::Gaussian) {
    return expected_zbar_zbar_t(phis) * eta;
  }
  const Eigen::VectorXd exp_eta_n = token_exp_eta(eta, phis.rows());
  const Eigen::VectorXd f = poisson_factors(phis, exp_eta_n, family);
  const Eigen::VectorXd acc = phis.transpose() * leave_one_out_products(f);
  return exp_eta_n.cwiseProduct(acc) / n;
}

Eigen::VectorXd mstep_eta(const GlmSuffStats& stats, const ResponseFamily& family,
                          const GlmParams& current,
                          std::vector<std::string>* warnings) {
  if (family.kind == Family::Gaussian) {
    const Eigen::VectorXd b = stats.ex_rows.transpose() * stats.responses;
    return solve_with_ridge_fallback(stats.exxt_sum, b, warnings, "eta m-step");
  }

  // Poisson: ascend the eta-dependent part of the corpus bound.
  const double delta = current.delta;
  Eigen::VectorXd lin = Eigen::VectorXd::Zero(current.eta.size());
  for (const PoissonDocStats& doc : stats.poisson_docs) {
    lin += doc.y * doc.phis.colwise().mean().transpose();
  }
  const auto objective = [&](const Eigen::VectorXd& e) {
    double obj = lin.dot(e);
    for (const PoissonDocStats& doc : stats.poisson_docs) {
      obj -= poisson_factors(doc.phis, token_exp_eta(e, doc.phis.rows()), family).prod();
    }
    return obj / delta;
  };
  const auto gradient = [&](const Eigen::VectorXd& e) {
    Eigen::VectorXd g = lin;
    for (const PoissonDocStats& doc : stats.poisson_docs) {
      g -= expected_mu_zbar(doc.phis, e, family);
    }
    return Eigen::VectorXd((g / delta).eval());
  };

  Eigen::VectorXd eta = current.eta;
  double obj = objective(eta);
  if (!std::isfinite(obj)) {
    throw TrainError("poisson eta m-step: non-finite objective at starting point");
  }
  for (int iter = 0; iter < 500; ++iter) {
    const Eigen::VectorXd g = gradient(eta);
    if (!g.allFinite()) {
      throw TrainError("poisson eta m-step: non-finite gradient");
    }
    if (g.lpNorm<Eigen::Infinity>() < 1e-8) break;
    const double gg = g.squaredNorm();
    double step = 1.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      const Eigen::VectorXd cand = eta + step * g;
      const double cand_obj = objective(cand);
      if (std::isfinite(cand_obj) && cand_obj >= obj + 1e-4 * step * gg) {
        eta = cand;
        obj = cand_obj;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // direction numerically flat
  }
  return eta;
}

double mstep_delta(const GlmSuffStats& stats, const Eigen::VectorXd& eta_new,
                   const ResponseFamily& family,
                   std::vector<std::string>* warnings) {
  if (family.kind == Family::Gaussian) {
    const double count = static_cast<double>(stats.responses.size());
    const double fitted = (stats.ex_rows.transpose() * stats.responses).dot(eta_new);
    const double estimate = (stats.responses.squaredNorm() - fitted) / count;
    if (estimate <= 0.0) {
      warn(warnings, "delta m-step: nonpositive variance estimate " +
                         std::to_string(estimate) + ", floored at 1e-8");
    }
    return std::max(estimate, 1e-8);
  }
  if (family.dispersion == PoissonDispersion::FixedOne) {
    return 1.0;
  }
  double num = 0.0;
  double den = 0.0;
  for (const PoissonDocStats& doc : stats.poisson_docs) {
    num += doc.y * eta_new.dot(doc.phis.colwise().mean().transpose());
    den += poisson_factors(doc.phis, token_exp_eta(eta_new, doc.phis.rows()), family).prod();
  }
  const double ratio = num / den;
  if (!std::isfinite(ratio) || !(ratio > 0.0)) {
    warn(warnings, "delta m-step: nonpositive poisson ratio, falling back to 1.0");
    return 1.0;
  }
  return ratio;
}

double predict_mean(const Eigen::VectorXd& ezbar, const Eigen::VectorXd& eta,
                    const ResponseFamily& family) {
  if (family.kind != Family::Gaussian) {
    throw std::invalid_argument("predict_mean: poisson prediction needs the per-token phis");
  }
  return eta.dot(ezbar);
}

double predict_mean(const Eigen::MatrixXd& phis, const Eigen::VectorXd& eta,
                    const ResponseFamily& family) {
  if (family.kind == Family::Gaussian) {
    return eta.dot(phis.colwise().mean().transpose());
  }
  return poisson_factors(phis, token_exp_eta(eta, phis.rows()), family).prod();
}

double response_elbo_term(double y, const Eigen::MatrixXd& phis,
                          const GlmParams& params, const ResponseFamily& family) {
  const double delta = params.delta;
  if (!(delta > 0.0)) {
    throw std::invalid_argument("response_elbo_term: delta must be positive");
  }
  double log_h = 0.0;
  if (family.kind == Family::Gaussian) {
    log_h = -0.5 * std::log(2.0 * std::numbers::pi * delta) - y * y / (2.0 * delta);
  } else {
    if (y < 0.0 || std::floor(y) != y) {
      throw std::invalid_argument("response_elbo_term: poisson response must be a nonnegative integer");
    }
    log_h = -std::lgamma(y + 1.0);
  }
  const Eigen::VectorXd ezbar = phis.colwise().mean().transpose();
  const double ea = expected_log_normalizer(phis, params.eta, family);
  return log_h + (params.eta.dot(ezbar) * y - ea) / delta;
}

}  // namespace slda
