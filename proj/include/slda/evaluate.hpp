#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "slda/corpus.hpp"
#include "slda/train.hpp"

namespace slda {

struct Prediction {
  double transformed = 0.0;  // on the scale the model was fit on
  double original = 0.0;     // training transform inverted
};

// Prediction-mode inference followed by the family's expected response.
Prediction predict_response(const Document& doc, const ModelParams& model,
                            const InferenceConfig& config);

// 1 - sum (y - yhat)^2 / sum (y - ybar)^2.
double predictive_r2(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

// Pearson correlation, clamped to [-1, 1].
double correlation(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

struct FoldMetrics {
  int fold = 0;
  double pr2 = 0.0;
  double corr = 0.0;
  int n_test = 0;
};

struct EvalReport {
  std::vector<FoldMetrics> per_fold;
  double pooled_pr2 = 0.0;   // over the concatenated out-of-fold pairs
  double pooled_corr = 0.0;
  int skipped_unlabeled = 0;
};

// Fit on each training fold, predict the held-out fold, score per fold and
// pooled. Metrics are computed on the transformed (training) scale.
EvalReport cross_validate(const Corpus& corpus, const FitConfig& config,
                          int folds, std::uint64_t seed,
                          std::vector<std::string>* warnings = nullptr);

// Unsupervised fit per fold, then least squares of the responses on the
// document topic proportions (intercept plus the first K-1 components; the
// K simplex features are rank-deficient with an intercept).
EvalReport baseline_lda_regression(const Corpus& corpus, const FitConfig& config,
                                   int folds, std::uint64_t seed,
                                   std::vector<std::string>* warnings = nullptr);

// CSV with header "fold,n_test,pr2,corr" and a final pooled row.
void write_report_csv(const EvalReport& report, std::ostream& out);

}  // namespace slda
