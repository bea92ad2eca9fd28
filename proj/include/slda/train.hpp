#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slda/corpus.hpp"
#include "slda/glm.hpp"
#include "slda/inference.hpp"
#include "slda/model.hpp"

namespace slda {

enum class EtaInit { Grid, Zeros };

struct FitConfig {
  int num_topics = 10;
  std::optional<double> alpha_value;  // empty: 1/K
  double em_rel_tol = 1e-4;
  int em_max_iters = 100;
  InferenceConfig inference;
  std::uint64_t seed = 0;
  EtaInit init_eta_mode = EtaInit::Grid;
  double beta_perturbation = 0.01;
  ResponseFamily family;
  bool warm_start_estep = false;  // carry per-document posteriors across iterations
  bool skip_glm_mstep = false;    // leave eta and delta at their initial values
  int threads = 1;

  double alpha_for(int k) const {
    return alpha_value ? *alpha_value : 1.0 / static_cast<double>(k);
  }
};

struct EmIterationStats {
  double corpus_elbo = 0.0;
  double rel_change = 0.0;  // NaN on the first iteration
  int total_doc_iterations = 0;
  std::vector<std::string> warnings;
};

struct ElboTrace {
  std::vector<EmIterationStats> iterations;
};

struct EStepResult {
  std::vector<DocPosterior> posteriors;
  double corpus_elbo = 0.0;
  int total_doc_iterations = 0;
};

// Randomly perturbed uniform topics; delta from the sample variance of
// the labeled responses (Gaussian) or 1 (Poisson); eta on a grid spanning
// [-1, 1] or zeros.
ModelParams initialize(const Corpus& corpus, const FitConfig& config);

// One inference pass per document: supervised when the document carries a
// response, prediction mode otherwise. Documents are independent, so the
// pass may run on several threads; results are identical either way.
EStepResult e_step(const Corpus& corpus, const ModelParams& model,
                   const InferenceConfig& inference, int threads = 1,
                   const std::vector<DocPosterior>* warm_start = nullptr);

// beta_{k,w} proportional to the expected number of assignments of term w
// to topic k, with an additive 1e-12 floor before normalization.
Eigen::MatrixXd mstep_topics(const Corpus& corpus,
                             const std::vector<DocPosterior>& posteriors,
                             std::vector<std::string>* warnings = nullptr);

// Per-corpus expected design quantities from labeled documents only.
GlmSuffStats collect_glm_stats(const Corpus& corpus,
                               const std::vector<DocPosterior>& posteriors,
                               const ResponseFamily& family);

struct FitResult {
  ModelParams model;
  ElboTrace trace;
};

// Variational EM to a local optimum of the corpus bound. Throws TrainError
// if the bound decreases by more than 1e-6 or any parameter goes non-finite.
FitResult fit(const Corpus& corpus, const FitConfig& config);

void save_model(const ModelParams& model, const std::string& path);
ModelParams load_model(const std::string& path);

struct GenParams {
  double alpha = 1.0;
  Eigen::MatrixXd beta;  // K x V probability rows
  Eigen::VectorXd eta;
  double delta = 1.0;
  ResponseFamily family;
  int num_docs = 0;
  int doc_length = 0;
};

// Ancestral sampling of the generative process; Poisson responses use
// rate exp(eta^T zbar) with unit dispersion.
Corpus generate_synthetic(const GenParams& params, std::uint64_t seed);

}  // namespace slda
