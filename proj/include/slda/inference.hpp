#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "slda/corpus.hpp"
#include "slda/model.hpp"

namespace slda {

// Prediction mode drops every term that involves the response, leaving
// plain unsupervised coordinate ascent.
enum class InferenceMode { Supervised, Prediction };

struct InferenceConfig {
  double rel_tol = 1e-4;  // relative ELBO change that counts as converged
  int max_iters = 100;
  InferenceMode mode = InferenceMode::Supervised;
};

struct DocPosterior {
  Eigen::VectorXd gamma;   // K
  Eigen::MatrixXd phis;    // N x K, rows on the simplex
  double elbo = 0.0;
  int iterations = 0;
  std::vector<double> elbo_trace;  // initial value, then one entry per sweep

  Eigen::VectorXd expected_zbar() const {
    return phis.colwise().mean().transpose();
  }
};

// gamma = alpha 1 + sum_n phi_n.
Eigen::VectorXd update_gamma(double alpha, const Eigen::MatrixXd& phis);

// Exact coordinate update of phi_j holding gamma and the other phis fixed.
// The supervised variant folds in the response terms.
Eigen::VectorXd update_phi_supervised(Eigen::Index j, const Document& doc,
                                      double y, const DocPosterior& post,
                                      const ModelParams& model);
Eigen::VectorXd update_phi_unsupervised(Eigen::Index j, const Document& doc,
                                        const DocPosterior& post,
                                        const ModelParams& model);

// Evidence lower bound at the given variational state; the response term
// is included only when y is present.
double compute_elbo(const Document& doc, std::optional<double> y,
                    const DocPosterior& post, const ModelParams& model);

// Alternates full phi sweeps (ascending term id, then occurrence order)
// with gamma updates until the relative ELBO change falls below rel_tol
// or max_iters sweeps have run. Throws TrainError if the bound decreases
// by more than 1e-9.
DocPosterior infer_document(const Document& doc, std::optional<double> y,
                            const ModelParams& model,
                            const InferenceConfig& config,
                            const DocPosterior* warm_start = nullptr);

}  // namespace slda
