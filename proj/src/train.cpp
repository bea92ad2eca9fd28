#include "slda/train.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>
#include <utility>

#include "slda/errors.hpp"
#include "slda/special_math.hpp"

namespace slda {

namespace {

double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

int sample_categorical(const Eigen::VectorXd& probs, std::mt19937_64& eng) {
  const double u = uniform01(eng) * probs.sum();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

template <typename Error>
std::exception_ptr wrap_doc_error(int doc, const std::exception& e) {
  return std::make_exception_ptr(
      Error("document " + std::to_string(doc) + ": " + e.what()));
}

}  // namespace

ModelParams initialize(const Corpus& corpus, const FitConfig& config) {
  const int k = config.num_topics;
  const int v = corpus.vocab_size();
  if (k < 1) throw std::invalid_argument("initialize: need at least one topic");
  if (v < 1 || corpus.num_docs() < 1) {
    throw std::invalid_argument("initialize: empty corpus");
  }
  if (!(config.beta_perturbation >= 0.0)) {
    throw std::invalid_argument("initialize: beta_perturbation must be nonnegative");
  }

  ModelParams model;
  model.family = config.family;
  model.transform = corpus.transform;
  model.alpha = config.alpha_for(k);
  if (!(model.alpha > 0.0)) {
    throw std::invalid_argument("initialize: alpha must be positive");
  }

  std::mt19937_64 eng(config.seed);
  Eigen::MatrixXd beta(k, v);
  const double base = 1.0 / static_cast<double>(v);
  const double scale = config.beta_perturbation / static_cast<double>(v);
  for (int row = 0; row < k; ++row) {
    for (int col = 0; col < v; ++col) {
      beta(row, col) = base + uniform01(eng) * scale;
    }
    beta.row(row) /= beta.row(row).sum();
  }
  model.log_beta = beta.array().log();

  std::vector<double> labeled;
  for (const Document& doc : corpus.docs) {
    if (doc.response) labeled.push_back(*doc.response);
  }

  double delta = 1.0;
  if (config.family.kind == Family::Gaussian) {
    if (labeled.size() == 1) {
      throw std::invalid_argument(
          "initialize: gaussian family needs at least two labeled documents "
          "for the sample-variance start");
    }
    if (labeled.size() >= 2) {
      double mean = 0.0;
      for (double y : labeled) mean += y;
      mean /= static_cast<double>(labeled.size());
      double ss = 0.0;
      for (double y : labeled) ss += (y - mean) * (y - mean);
      delta = std::max(ss / static_cast<double>(labeled.size() - 1), 1e-8);
    }
  }

  Eigen::VectorXd eta = Eigen::VectorXd::Zero(k);
  if (config.init_eta_mode == EtaInit::Grid) {
    for (int i = 0; i < k; ++i) {
      eta[i] = -1.0 + (2.0 * i + 1.0) / static_cast<double>(k);
    }
  }
  model.glm.eta = eta;
  model.glm.delta = delta;
  return model;
}

EStepResult e_step(const Corpus& corpus, const ModelParams& model,
                   const InferenceConfig& inference, int threads,
                   const std::vector<DocPosterior>* warm_start) {
  const int d = corpus.num_docs();
  EStepResult result;
  result.posteriors.resize(d);
  std::vector<std::exception_ptr> failures(d);

  const auto run_one = [&](int i) {
    const Document& doc = corpus.docs[i];
    InferenceConfig cfg = inference;
    cfg.mode = doc.response ? InferenceMode::Supervised : InferenceMode::Prediction;
    const DocPosterior* warm =
        (warm_start != nullptr && warm_start->size() == static_cast<std::size_t>(d))
            ? &(*warm_start)[i]
            : nullptr;
    try {
      result.posteriors[i] = infer_document(doc, doc.response, model, cfg, warm);
    } catch (const VocabMismatchError& e) {
      failures[i] = wrap_doc_error<VocabMismatchError>(i, e);
    } catch (const TrainError& e) {
      failures[i] = wrap_doc_error<TrainError>(i, e);
    } catch (const std::exception& e) {
      failures[i] = wrap_doc_error<TrainError>(i, e);
    }
  };

  if (threads <= 1 || d <= 1) {
    for (int i = 0; i < d; ++i) run_one(i);
  } else {
    std::atomic<int> next{0};
    const int workers = std::min(threads, d);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (int i = next.fetch_add(1); i < d; i = next.fetch_add(1)) {
          run_one(i);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  for (int i = 0; i < d; ++i) {
    if (failures[i]) std::rethrow_exception(failures[i]);
  }
  for (int i = 0; i < d; ++i) {
    result.corpus_elbo += result.posteriors[i].elbo;
    result.total_doc_iterations += result.posteriors[i].iterations;
  }
  return result;
}

Eigen::MatrixXd mstep_topics(const Corpus& corpus,
                             const std::vector<DocPosterior>& posteriors,
                             std::vector<std::string>* warnings) {
  if (posteriors.size() != corpus.docs.size() || posteriors.empty()) {
    throw std::invalid_argument("mstep_topics: posteriors not aligned with corpus");
  }
  const Eigen::Index k = posteriors.front().phis.cols();
  const int v = corpus.vocab_size();
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(k, v);
  for (std::size_t d = 0; d < posteriors.size(); ++d) {
    const Document& doc = corpus.docs[d];
    const Eigen::MatrixXd& phis = posteriors[d].phis;
    for (int n = 0; n < doc.length(); ++n) {
      mass.col(doc.tokens[n]) += phis.row(n).transpose();
    }
  }
  for (Eigen::Index row = 0; row < k; ++row) {
    if (mass.row(row).sum() == 0.0 && warnings != nullptr) {
      warnings->push_back("topic " + std::to_string(row) +
                          " received no mass; row set to uniform");
    }
  }
  mass.array() += 1e-12;
  for (Eigen::Index row = 0; row < k; ++row) {
    mass.row(row) /= mass.row(row).sum();
  }
  return mass;
}

GlmSuffStats collect_glm_stats(const Corpus& corpus,
                               const std::vector<DocPosterior>& posteriors,
                               const ResponseFamily& family) {
  if (posteriors.size() != corpus.docs.size()) {
    throw std::invalid_argument("collect_glm_stats: posteriors not aligned with corpus");
  }
  std::vector<int> labeled;
  for (int i = 0; i < corpus.num_docs(); ++i) {
    if (corpus.docs[i].response) labeled.push_back(i);
  }
  const Eigen::Index k =
      posteriors.empty() ? 0 : posteriors.front().phis.cols();
  GlmSuffStats stats;
  stats.ex_rows.resize(static_cast<Eigen::Index>(labeled.size()), k);
  stats.responses.resize(static_cast<Eigen::Index>(labeled.size()));
  if (family.kind == Family::Gaussian) {
    stats.exxt_sum = Eigen::MatrixXd::Zero(k, k);
  }
  for (std::size_t row = 0; row < labeled.size(); ++row) {
    const int i = labeled[row];
    stats.ex_rows.row(static_cast<Eigen::Index>(row)) =
        posteriors[i].expected_zbar().transpose();
    stats.responses[static_cast<Eigen::Index>(row)] = *corpus.docs[i].response;
    if (family.kind == Family::Gaussian) {
      stats.exxt_sum += expected_zbar_zbar_t(posteriors[i].phis);
    } else {
      stats.poisson_docs.push_back({posteriors[i].phis, *corpus.docs[i].response});
    }
  }
  return stats;
}

FitResult fit(const Corpus& corpus, const FitConfig& config) {
  if (config.em_max_iters < 1 || !(config.em_rel_tol > 0.0)) {
    throw std::invalid_argument("fit: bad EM configuration");
  }
  FitResult result;
  result.model = initialize(corpus, config);
  const bool run_glm = corpus.num_labeled() > 0 && !config.skip_glm_mstep;

  double prev = std::numeric_limits<double>::quiet_NaN();
  std::vector<DocPosterior> warm;
  for (int iter = 1; iter <= config.em_max_iters; ++iter) {
    EStepResult estep =
        e_step(corpus, result.model, config.inference, config.threads,
               config.warm_start_estep && !warm.empty() ? &warm : nullptr);

    EmIterationStats stats;
    stats.corpus_elbo = estep.corpus_elbo;
    stats.total_doc_iterations = estep.total_doc_iterations;
    stats.rel_change = std::isnan(prev)
                           ? std::numeric_limits<double>::quiet_NaN()
                           : std::abs((estep.corpus_elbo - prev) /
                                      std::max(std::abs(prev), 1e-300));
    if (!std::isfinite(estep.corpus_elbo)) {
      throw TrainError("non-finite corpus ELBO");
    }
    if (!std::isnan(prev) && estep.corpus_elbo < prev - 1e-6) {
      throw TrainError("corpus ELBO decreased from " + std::to_string(prev) +
                       " to " + std::to_string(estep.corpus_elbo) +
                       " at EM iteration " + std::to_string(iter));
    }

    Eigen::MatrixXd beta = mstep_topics(corpus, estep.posteriors, &stats.warnings);
    result.model.log_beta = beta.array().log();
    if (run_glm) {
      const GlmSuffStats glm_stats =
          collect_glm_stats(corpus, estep.posteriors, result.model.family);
      result.model.glm.eta =
          mstep_eta(glm_stats, result.model.family, result.model.glm, &stats.warnings);
      result.model.glm.delta =
          mstep_delta(glm_stats, result.model.glm.eta, result.model.family,
                      &stats.warnings);
    }
    if (!result.model.glm.eta.allFinite() ||
        !std::isfinite(result.model.glm.delta) ||
        !result.model.log_beta.allFinite()) {
      throw TrainError("non-finite model parameter after M-step");
    }

    result.trace.iterations.push_back(std::move(stats));
    if (config.warm_start_estep) warm = std::move(estep.posteriors);
    const bool converged =
        !std::isnan(prev) &&
        result.trace.iterations.back().rel_change < config.em_rel_tol;
    prev = estep.corpus_elbo;
    if (converged) break;
  }
  return result;
}

Corpus generate_synthetic(const GenParams& params, std::uint64_t seed) {
  const Eigen::Index k = params.beta.rows();
  const Eigen::Index v = params.beta.cols();
  if (k < 1 || v < 1 || params.num_docs < 1 || params.doc_length < 1 ||
      params.eta.size() != k || !(params.alpha > 0.0) || !(params.delta > 0.0)) {
    throw std::invalid_argument("generate_synthetic: bad generator parameters");
  }
  std::mt19937_64 eng(seed);
  std::gamma_distribution<double> gamma_dist(params.alpha, 1.0);
  std::normal_distribution<double> normal_dist(0.0, 1.0);

  Corpus corpus;
  corpus.vocab = Vocabulary::numbered(static_cast<int>(v));
  corpus.docs.reserve(params.num_docs);
  for (int d = 0; d < params.num_docs; ++d) {
    Eigen::VectorXd theta(k);
    for (Eigen::Index i = 0; i < k; ++i) theta[i] = gamma_dist(eng);
    const double theta_sum = theta.sum();
    if (theta_sum > 0.0) {
      theta /= theta_sum;
    } else {
      theta.setConstant(1.0 / static_cast<double>(k));
    }

    Document doc;
    Eigen::VectorXd zbar = Eigen::VectorXd::Zero(k);
    for (int token = 0; token < params.doc_length; ++token) {
      const int z = sample_categorical(theta, eng);
      zbar[z] += 1.0;
      doc.tokens.push_back(sample_categorical(params.beta.row(z).transpose(), eng));
    }
    zbar /= static_cast<double>(params.doc_length);

    const double mean = params.eta.dot(zbar);
    if (params.family.kind == Family::Gaussian) {
      doc.response = mean + std::sqrt(params.delta) * normal_dist(eng);
    } else {
      std::poisson_distribution<int> poisson_dist(std::exp(mean));
      doc.response = static_cast<double>(poisson_dist(eng));
    }
    corpus.docs.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace slda
