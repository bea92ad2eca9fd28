#include "slda/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "slda/errors.hpp"
#include "slda/special_math.hpp"

namespace slda {

namespace {

// Unseen-term guard: log beta entries are floored so a term with zero
// probability under some topic keeps logits finite.
const double kLogBetaFloor = std::log(1e-12);

void check_token_ids(const Document& doc, const ModelParams& model) {
  for (int t : doc.tokens) {
    if (t < 0 || t >= model.vocab_size()) {
      throw VocabMismatchError("token id " + std::to_string(t) +
                               " outside vocabulary of size " +
                               std::to_string(model.vocab_size()));
    }
  }
}

Eigen::VectorXd floored_log_beta_col(const ModelParams& model, int term) {
  return model.log_beta.col(term).cwiseMax(kLogBetaFloor);
}

// Tokens visited in ascending (term id, occurrence index) order, for
// run-to-run determinism.
std::vector<int> sweep_order(const Document& doc) {
  std::vector<int> order(doc.tokens.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return doc.tokens[a] < doc.tokens[b];
  });
  return order;
}

void softmax_inplace(Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  double total = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v[i] = std::exp(std::max(v[i] - m, -700.0));
    total += v[i];
  }
  v /= total;
}

void check_logits(const Eigen::VectorXd& logits, Eigen::Index token_index) {
  if (!logits.allFinite()) {
    throw TrainError("non-finite phi logits at token index " +
                     std::to_string(token_index));
  }
}

}  // namespace

Eigen::VectorXd update_gamma(double alpha, const Eigen::MatrixXd& phis) {
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("update_gamma: alpha must be positive");
  }
  return Eigen::VectorXd::Constant(phis.cols(), alpha) +
         phis.colwise().sum().transpose();
}

Eigen::VectorXd update_phi_supervised(Eigen::Index j, const Document& doc,
                                      double y, const DocPosterior& post,
                                      const ModelParams& model) {
  const Eigen::Index n = post.phis.rows();
  if (j < 0 || j >= n) {
    throw std::invalid_argument("update_phi_supervised: token index out of range");
  }
  const Eigen::VectorXd& eta = model.glm.eta;
  const double delta = model.glm.delta;
  Eigen::VectorXd logits = dirichlet_expected_log(post.gamma) +
                           floored_log_beta_col(model, doc.tokens[j]) +
                           (y / (static_cast<double>(n) * delta)) * eta -
                           lognorm_grad_phi(j, post.phis, eta, model.family) / delta;
  check_logits(logits, j);
  softmax_inplace(logits);
  return logits;
}

Eigen::VectorXd update_phi_unsupervised(Eigen::Index j, const Document& doc,
                                        const DocPosterior& post,
                                        const ModelParams& model) {
  if (j < 0 || j >= post.phis.rows()) {
    throw std::invalid_argument("update_phi_unsupervised: token index out of range");
  }
  Eigen::VectorXd logits = dirichlet_expected_log(post.gamma) +
                           floored_log_beta_col(model, doc.tokens[j]);
  check_logits(logits, j);
  softmax_inplace(logits);
  return logits;
}

double compute_elbo(const Document& doc, std::optional<double> y,
                    const DocPosterior& post, const ModelParams& model) {
  const Eigen::Index n = post.phis.rows();
  const Eigen::Index k = post.phis.cols();
  const double alpha = model.alpha;
  const Eigen::VectorXd elog = dirichlet_expected_log(post.gamma);

  // E[log p(theta | alpha)]
  double bound = log_gamma(k * alpha) - k * log_gamma(alpha) +
                 (alpha - 1.0) * elog.sum();

  // sum_n E[log p(z_n | theta)] + E[log p(w_n | z_n, beta)] - E[log q(z_n)]
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd lb = floored_log_beta_col(model, doc.tokens[i]);
    for (Eigen::Index c = 0; c < k; ++c) {
      const double phi = post.phis(i, c);
      bound += phi * (elog[c] + lb[c]);
      if (phi > 0.0) {
        bound -= phi * std::log(phi);
      }
    }
  }

  // -E[log q(theta)]
  bound -= log_gamma(post.gamma.sum());
  for (Eigen::Index c = 0; c < k; ++c) {
    bound += log_gamma(post.gamma[c]) - (post.gamma[c] - 1.0) * elog[c];
  }

  if (y) {
    bound += response_elbo_term(*y, post.phis, model.glm, model.family);
  }
  if (!std::isfinite(bound)) {
    throw TrainError("non-finite ELBO");
  }
  return bound;
}

DocPosterior infer_document(const Document& doc, std::optional<double> y,
                            const ModelParams& model,
                            const InferenceConfig& config,
                            const DocPosterior* warm_start) {
  if (config.max_iters < 1 || !(config.rel_tol > 0.0)) {
    throw std::invalid_argument("infer_document: bad inference configuration");
  }
  const bool supervised = config.mode == InferenceMode::Supervised;
  if (supervised && !y) {
    throw std::invalid_argument("infer_document: supervised mode requires a response");
  }
  const int n = doc.length();
  if (n < 1) {
    throw std::invalid_argument("infer_document: empty document");
  }
  check_token_ids(doc, model);
  const Eigen::Index k = model.num_topics();
  const std::optional<double> y_used = supervised ? y : std::nullopt;

  Eigen::MatrixXd log_beta_rows(n, k);
  for (int i = 0; i < n; ++i) {
    log_beta_rows.row(i) = floored_log_beta_col(model, doc.tokens[i]).transpose();
  }
  const std::vector<int> order = sweep_order(doc);

  DocPosterior post;
  if (warm_start != nullptr && warm_start->phis.rows() == n &&
      warm_start->phis.cols() == k && warm_start->gamma.size() == k) {
    post.phis = warm_start->phis;
    post.gamma = warm_start->gamma;
  } else {
    post.phis = Eigen::MatrixXd::Constant(n, k, 1.0 / static_cast<double>(k));
    post.gamma = Eigen::VectorXd::Constant(
        k, model.alpha + static_cast<double>(n) / static_cast<double>(k));
  }

  const Eigen::VectorXd& eta = model.glm.eta;
  const double delta = model.glm.delta;
  const bool gaussian = model.family.kind == Family::Gaussian;
  const double resp_coef =
      supervised ? *y / (static_cast<double>(n) * delta) : 0.0;
  const double inv_delta = 1.0 / delta;
  const bool paper_literal = model.family.lognorm == PoissonLogNorm::PaperLiteral;

  Eigen::VectorXd exp_eta_n;
  Eigen::VectorXd eta_sq;
  if (supervised) {
    if (gaussian) {
      eta_sq = eta.cwiseProduct(eta);
    } else {
      exp_eta_n = (eta.array() / static_cast<double>(n)).exp();
    }
  }
  const auto poisson_token_factor = [&](Eigen::Index row) {
    double f = post.phis.row(row).dot(exp_eta_n);
    if (paper_literal) f += static_cast<double>(k) - 1.0;
    return f;
  };

  Eigen::VectorXd elog = dirichlet_expected_log(post.gamma);
  double elbo_prev = compute_elbo(doc, y_used, post, model);
  post.elbo = elbo_prev;
  post.elbo_trace.push_back(elbo_prev);

  Eigen::VectorXd logits(k);
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    if (!supervised) {
      for (int idx : order) {
        logits = elog + log_beta_rows.row(idx).transpose();
        check_logits(logits, idx);
        softmax_inplace(logits);
        post.phis.row(idx) = logits.transpose();
      }
    } else if (gaussian) {
      Eigen::VectorXd colsum = post.phis.colwise().sum().transpose();
      for (int idx : order) {
        const Eigen::VectorXd phi_old = post.phis.row(idx).transpose();
        const Eigen::VectorXd phi_minus = colsum - phi_old;
        logits = elog + log_beta_rows.row(idx).transpose() + resp_coef * eta -
                 inv_delta / (2.0 * n * n) *
                     (2.0 * eta.dot(phi_minus) * eta + eta_sq);
        check_logits(logits, idx);
        softmax_inplace(logits);
        post.phis.row(idx) = logits.transpose();
        colsum += logits - phi_old;
      }
    } else {
      // Sequential Poisson sweep: tokens before the cursor already carry
      // new phis, tokens after still carry old ones, so C_{-j} is a fresh
      // prefix times a stale suffix.
      Eigen::VectorXd suffix(n + 1);
      suffix[n] = 1.0;
      for (int i = n - 1; i >= 0; --i) {
        suffix[i] = suffix[i + 1] * poisson_token_factor(order[i]);
      }
      double prefix = 1.0;
      for (int i = 0; i < n; ++i) {
        const int idx = order[i];
        const double c_minus = prefix * suffix[i + 1];
        logits = elog + log_beta_rows.row(idx).transpose() + resp_coef * eta -
                 (c_minus * inv_delta) * exp_eta_n;
        check_logits(logits, idx);
        softmax_inplace(logits);
        post.phis.row(idx) = logits.transpose();
        prefix *= poisson_token_factor(idx);
      }
    }

    post.gamma = update_gamma(model.alpha, post.phis);
    elog = dirichlet_expected_log(post.gamma);

    const double elbo = compute_elbo(doc, y_used, post, model);
    post.elbo = elbo;
    post.elbo_trace.push_back(elbo);
    post.iterations = iter;
    if (elbo < elbo_prev - 1e-9) {
      throw TrainError("per-document ELBO decreased from " +
                       std::to_string(elbo_prev) + " to " + std::to_string(elbo) +
                       " at iteration " + std::to_string(iter));
    }
    const double rel =
        std::abs(elbo - elbo_prev) / std::max(std::abs(elbo_prev), 1e-300);
    elbo_prev = elbo;
    if (rel < config.rel_tol) break;
  }
  return post;
}

}  // namespace slda
