#include "slda/evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "slda/errors.hpp"

namespace slda {

namespace {

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

Eigen::VectorXd to_vector(const std::vector<double>& values) {
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

bool metrics_defined(const std::vector<double>& y, const std::vector<double>& yhat) {
  if (y.size() < 2) return false;
  bool y_varies = false;
  bool yhat_varies = false;
  for (std::size_t i = 1; i < y.size(); ++i) {
    y_varies = y_varies || y[i] != y[0];
    yhat_varies = yhat_varies || yhat[i] != yhat[0];
  }
  return y_varies && yhat_varies;
}

FoldMetrics score_fold(int fold, const std::vector<double>& y,
                       const std::vector<double>& yhat) {
  FoldMetrics metrics;
  metrics.fold = fold;
  metrics.n_test = static_cast<int>(y.size());
  if (metrics_defined(y, yhat)) {
    metrics.pr2 = predictive_r2(to_vector(y), to_vector(yhat));
    metrics.corr = correlation(to_vector(y), to_vector(yhat));
  } else {
    metrics.pr2 = nan_value();
    metrics.corr = nan_value();
  }
  return metrics;
}

using PredictFn = std::function<double(const Document&)>;

// Shared cross-validation loop; `make_predictor` fits on the training fold
// and returns the per-document predictor (transformed scale).
template <typename MakePredictor>
EvalReport run_folds(const Corpus& corpus, int folds, std::uint64_t seed,
                     MakePredictor&& make_predictor) {
  if (corpus.num_labeled() < folds) {
    throw std::invalid_argument("cross-validation: fewer labeled documents than folds");
  }
  const auto splits = split_folds(corpus, folds, seed);
  EvalReport report;
  std::vector<double> pooled_y;
  std::vector<double> pooled_yhat;
  for (int f = 0; f < folds; ++f) {
    const Corpus& train = splits[f].first;
    const Corpus& test = splits[f].second;
    PredictFn predict;
    try {
      predict = make_predictor(train);
    } catch (const TrainError& e) {
      throw TrainError("fold " + std::to_string(f) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("fold " + std::to_string(f) + ": " + e.what());
    }
    std::vector<double> fold_y;
    std::vector<double> fold_yhat;
    for (const Document& doc : test.docs) {
      if (!doc.response) {
        ++report.skipped_unlabeled;
        continue;
      }
      double yhat = 0.0;
      try {
        yhat = predict(doc);
      } catch (const VocabMismatchError& e) {
        throw VocabMismatchError("fold " + std::to_string(f) + ": " + e.what());
      } catch (const TrainError& e) {
        throw TrainError("fold " + std::to_string(f) + ": " + e.what());
      }
      fold_y.push_back(*doc.response);
      fold_yhat.push_back(yhat);
    }
    report.per_fold.push_back(score_fold(f, fold_y, fold_yhat));
    pooled_y.insert(pooled_y.end(), fold_y.begin(), fold_y.end());
    pooled_yhat.insert(pooled_yhat.end(), fold_yhat.begin(), fold_yhat.end());
  }
  report.pooled_pr2 = predictive_r2(to_vector(pooled_y), to_vector(pooled_yhat));
  report.pooled_corr = correlation(to_vector(pooled_y), to_vector(pooled_yhat));
  return report;
}

}  // namespace

Prediction predict_response(const Document& doc, const ModelParams& model,
                            const InferenceConfig& config) {
  InferenceConfig cfg = config;
  cfg.mode = InferenceMode::Prediction;
  const DocPosterior post = infer_document(doc, std::nullopt, model, cfg);
  const double transformed =
      model.family.kind == Family::Gaussian
          ? predict_mean(post.expected_zbar(), model.glm.eta, model.family)
          : predict_mean(post.phis, model.glm.eta, model.family);
  return {transformed, model.transform.invert(transformed)};
}

double predictive_r2(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  if (y.size() != yhat.size() || y.size() < 2) {
    throw std::invalid_argument("predictive_r2: need two aligned samples of length >= 2");
  }
  const double mean = y.mean();
  const double tss = (y.array() - mean).square().sum();
  if (!(tss > 0.0)) {
    throw std::invalid_argument("predictive_r2: undefined pR2 for constant responses");
  }
  const double rss = (y - yhat).squaredNorm();
  return 1.0 - rss / tss;
}

double correlation(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  if (y.size() != yhat.size() || y.size() < 2) {
    throw std::invalid_argument("correlation: need two aligned samples of length >= 2");
  }
  const Eigen::ArrayXd a = y.array() - y.mean();
  const Eigen::ArrayXd b = yhat.array() - yhat.mean();
  const double ssa = (a * a).sum();
  const double ssb = (b * b).sum();
  if (!(ssa > 0.0) || !(ssb > 0.0)) {
    throw std::invalid_argument("correlation: undefined for constant input");
  }
  const double r = (a * b).sum() / std::sqrt(ssa * ssb);
  return std::min(1.0, std::max(-1.0, r));
}

EvalReport cross_validate(const Corpus& corpus, const FitConfig& config,
                          int folds, std::uint64_t seed,
                          std::vector<std::string>* warnings) {
  (void)warnings;
  return run_folds(corpus, folds, seed, [&](const Corpus& train) -> PredictFn {
    FitResult fitted = fit(train, config);
    return [model = std::move(fitted.model), inference = config.inference](
               const Document& doc) {
      return predict_response(doc, model, inference).transformed;
    };
  });
}

EvalReport baseline_lda_regression(const Corpus& corpus, const FitConfig& config,
                                   int folds, std::uint64_t seed,
                                   std::vector<std::string>* warnings) {
  return run_folds(corpus, folds, seed, [&](const Corpus& train) -> PredictFn {
    FitResult fitted = fit(strip_responses(train), config);
    const ModelParams model = std::move(fitted.model);
    const Eigen::Index k = model.num_topics();
    const InferenceConfig inference = config.inference;

    const auto features = [model, inference, k](const Document& doc) {
      InferenceConfig cfg = inference;
      cfg.mode = InferenceMode::Prediction;
      const Eigen::VectorXd zbar =
          infer_document(doc, std::nullopt, model, cfg).expected_zbar();
      Eigen::VectorXd x(k);
      x[0] = 1.0;
      x.tail(k - 1) = zbar.head(k - 1);
      return x;
    };

    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(k);
    for (const Document& doc : train.docs) {
      if (!doc.response) continue;
      const Eigen::VectorXd x = features(doc);
      xtx += x * x.transpose();
      xty += x * *doc.response;
    }
    const Eigen::VectorXd coef =
        solve_with_ridge_fallback(xtx, xty, warnings, "lda-regression baseline");

    return [features, coef](const Document& doc) {
      return coef.dot(features(doc));
    };
  });
}

void write_report_csv(const EvalReport& report, std::ostream& out) {
  const auto decimal = [&out](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  out << "fold,n_test,pr2,corr\n";
  int total = 0;
  for (const FoldMetrics& fold : report.per_fold) {
    out << fold.fold << ',' << fold.n_test << ',';
    decimal(fold.pr2);
    out << ',';
    decimal(fold.corr);
    out << '\n';
    total += fold.n_test;
  }
  out << "pooled," << total << ',';
  decimal(report.pooled_pr2);
  out << ',';
  decimal(report.pooled_corr);
  out << '\n';
}

}  // namespace slda
