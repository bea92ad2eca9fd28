#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "slda/errors.hpp"
#include "slda/inference.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using slda::compute_elbo;
using slda::DocPosterior;
using slda::Document;
using slda::Family;
using slda::infer_document;
using slda::InferenceConfig;
using slda::InferenceMode;
using slda::ModelParams;
using slda::update_gamma;
using slda::update_phi_supervised;
using slda::update_phi_unsupervised;

namespace {

ModelParams make_model(const MatrixXd& beta, const VectorXd& eta, double delta,
                       double alpha, Family family = Family::Gaussian) {
  ModelParams model;
  model.alpha = alpha;
  model.log_beta = beta.array().log();
  model.glm.eta = eta;
  model.glm.delta = delta;
  model.family.kind = family;
  return model;
}

ModelParams random_model(std::mt19937_64& eng, int k, int v,
                         Family family = Family::Gaussian) {
  MatrixXd beta(k, v);
  for (int row = 0; row < k; ++row) beta.row(row) = oracle::random_simplex(eng, v).transpose();
  return make_model(beta, oracle::random_vector(eng, k, -1.5, 1.5),
                    0.3 + oracle::uniform01(eng), 0.5, family);
}

Document random_document(std::mt19937_64& eng, int n, int v, std::optional<double> y) {
  Document doc;
  for (int i = 0; i < n; ++i) doc.tokens.push_back(static_cast<int>(eng() % v));
  doc.response = y;
  return doc;
}

DocPosterior state_of(const VectorXd& gamma, const MatrixXd& phis) {
  DocPosterior post;
  post.gamma = gamma;
  post.phis = phis;
  return post;
}

InferenceConfig tight_config(InferenceMode mode, int max_iters = 2000) {
  InferenceConfig config;
  config.rel_tol = 1e-12;
  config.max_iters = max_iters;
  config.mode = mode;
  return config;
}

}  // namespace

TEST_CASE("gamma update is alpha plus the phi column sums") {
  MatrixXd phis(2, 2);
  phis << 0.3, 0.7, 0.6, 0.4;
  const VectorXd gamma = update_gamma(0.1, phis);
  CHECK(gamma[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gamma[1] == doctest::Approx(1.2).epsilon(1e-15));

  MatrixXd single(1, 2);
  single << 1.0, 0.0;
  const VectorXd g2 = update_gamma(0.5, single);
  CHECK(g2[0] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(g2[1] == doctest::Approx(0.5).epsilon(1e-15));

  std::mt19937_64 eng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + static_cast<int>(eng() % 7);
    const int k = 2 + static_cast<int>(eng() % 3);
    const double alpha = 0.1 + oracle::uniform01(eng);
    const VectorXd g = update_gamma(alpha, oracle::random_phis(eng, n, k));
    CHECK(g.sum() == doctest::Approx(k * alpha + n).epsilon(1e-12));
  }
}

TEST_CASE("unsupervised phi update follows the beta column under symmetry") {
  MatrixXd beta(2, 2);
  beta << 0.8, 0.2, 0.8, 0.2;  // both topics equal, so E[log theta] dominates
  const ModelParams uniform_model =
      make_model(MatrixXd::Constant(2, 2, 0.5), VectorXd::Zero(2), 1.0, 0.5);
  Document doc;
  doc.tokens = {0, 0};
  const DocPosterior post =
      state_of(VectorXd::Constant(2, 1.5), MatrixXd::Constant(2, 2, 0.5));
  const VectorXd phi_uniform = update_phi_unsupervised(0, doc, post, uniform_model);
  CHECK(phi_uniform[0] == doctest::Approx(0.5).epsilon(1e-14));

  MatrixXd skewed(2, 2);
  skewed << 0.8, 0.2, 0.2, 0.8;  // beta column for term 0 is (0.8, 0.2)
  const ModelParams skewed_model = make_model(skewed, VectorXd::Zero(2), 1.0, 0.5);
  const VectorXd phi = update_phi_unsupervised(0, doc, post, skewed_model);
  CHECK(phi[0] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(phi[1] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("tokens of the same term get the same unsupervised update") {
  std::mt19937_64 eng(21);
  const ModelParams model = random_model(eng, 3, 5);
  Document doc;
  doc.tokens = {2, 4, 2};
  const DocPosterior post = state_of(VectorXd::Constant(3, 1.2),
                                     oracle::random_phis(eng, 3, 3));
  const VectorXd a = update_phi_unsupervised(0, doc, post, model);
  const VectorXd b = update_phi_unsupervised(2, doc, post, model);
  CHECK((a - b).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("supervised phi update with zero coefficients equals unsupervised") {
  std::mt19937_64 eng(33);
  ModelParams model = random_model(eng, 3, 6);
  model.glm.eta = VectorXd::Zero(3);
  const Document doc = random_document(eng, 5, 6, 0.7);
  const DocPosterior post = state_of(update_gamma(model.alpha, oracle::random_phis(eng, 5, 3)),
                                     oracle::random_phis(eng, 5, 3));
  for (int j = 0; j < 5; ++j) {
    const VectorXd sup = update_phi_supervised(j, doc, *doc.response, post, model);
    const VectorXd uns = update_phi_unsupervised(j, doc, post, model);
    CHECK((sup - uns).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("uniform model yields uniform supervised updates") {
  const int k = 3;
  const ModelParams model = make_model(MatrixXd::Constant(k, 4, 0.25),
                                       VectorXd::Zero(k), 1.0, 0.5);
  Document doc;
  doc.tokens = {1, 3};
  const DocPosterior post = state_of(VectorXd::Constant(k, 1.0),
                                     MatrixXd::Constant(2, k, 1.0 / k));
  const VectorXd phi = update_phi_supervised(0, doc, 1.0, post, model);
  for (int c = 0; c < k; ++c) CHECK(phi[c] == doctest::Approx(1.0 / k).epsilon(1e-14));
}

TEST_CASE("supervised phi update maximizes its ELBO coordinate") {
  std::mt19937_64 eng(2718);
  for (Family family : {Family::Gaussian, Family::Poisson}) {
    const int k = 3;
    const int n = 4;
    ModelParams model = random_model(eng, k, 6, family);
    const double y = family == Family::Gaussian
                         ? oracle::uniform01(eng) * 2.0 - 1.0
                         : static_cast<double>(eng() % 4);
    if (family == Family::Poisson) model.glm.delta = 1.0;
    const Document doc = random_document(eng, n, 6, y);
    DocPosterior post = state_of(VectorXd::Zero(k), oracle::random_phis(eng, n, k));
    post.gamma = update_gamma(model.alpha, post.phis);

    const int j = static_cast<int>(eng() % n);
    DocPosterior candidate = post;
    candidate.phis.row(j) = update_phi_supervised(j, doc, y, post, model).transpose();
    const double best = compute_elbo(doc, y, candidate, model);
    for (int probe = 0; probe < 200; ++probe) {
      DocPosterior other = post;
      other.phis.row(j) = oracle::random_simplex(eng, k).transpose();
      CHECK(best >= compute_elbo(doc, y, other, model) - 1e-10);
    }
  }
}

TEST_CASE("K=1 ELBO is the exact log joint") {
  const ModelParams model = make_model(MatrixXd::Constant(1, 3, 1.0 / 3.0),
                                       VectorXd::Constant(1, 0.8), 0.5, 1.0);
  Document doc;
  doc.tokens = {0, 2, 2};
  const double y = 1.3;
  const DocPosterior post = state_of(VectorXd::Constant(1, 4.0),
                                     MatrixXd::Constant(3, 1, 1.0));
  const double exact_words = 3.0 * std::log(1.0 / 3.0);
  const double exact_response = -0.5 * std::log(2.0 * std::numbers::pi * 0.5) -
                                (y - 0.8) * (y - 0.8) / (2.0 * 0.5);
  CHECK(compute_elbo(doc, y, post, model) ==
        doctest::Approx(exact_words + exact_response).epsilon(1e-13));
}

TEST_CASE("dropping the response term recovers the unsupervised ELBO") {
  std::mt19937_64 eng(11);
  const ModelParams model = random_model(eng, 3, 5);
  const Document doc = random_document(eng, 4, 5, 0.4);
  DocPosterior post = state_of(VectorXd::Zero(3), oracle::random_phis(eng, 4, 3));
  post.gamma = update_gamma(model.alpha, post.phis);
  const double with_y = compute_elbo(doc, 0.4, post, model);
  const double without_y = compute_elbo(doc, std::nullopt, post, model);
  const double response = slda::response_elbo_term(0.4, post.phis, model.glm, model.family);
  CHECK(with_y - without_y == doctest::Approx(response).epsilon(1e-12));
}

TEST_CASE("converged ELBO stays below the exact log evidence") {
  std::mt19937_64 eng(505);
  for (int trial = 0; trial < 10; ++trial) {
    const int k = 2;
    const int v = 4;
    const int n = 3;
    const ModelParams model = random_model(eng, k, v);
    const double y = oracle::uniform01(eng) * 2.0 - 1.0;
    const Document doc = random_document(eng, n, v, y);
    const DocPosterior post =
        infer_document(doc, y, model, tight_config(InferenceMode::Supervised));
    const double evidence = oracle::exact_log_evidence_gaussian(
        doc.tokens, y, model.alpha, model.beta(), model.glm.eta, model.glm.delta);
    CHECK(post.elbo <= evidence + 1e-9);
  }
}

TEST_CASE("inference iterates exactly once when asked") {
  std::mt19937_64 eng(99);
  const ModelParams model = random_model(eng, 2, 4);
  const Document doc = random_document(eng, 6, 4, 0.2);
  InferenceConfig config;
  config.max_iters = 1;
  const DocPosterior post = infer_document(doc, 0.2, model, config);
  CHECK(post.iterations == 1);
  CHECK(post.elbo_trace.size() == 2);  // initial state plus one sweep
  CHECK((post.gamma - update_gamma(model.alpha, post.phis)).lpNorm<Eigen::Infinity>() <
        1e-10);
}

TEST_CASE("prediction mode ignores any supplied response") {
  std::mt19937_64 eng(123);
  const ModelParams model = random_model(eng, 3, 5);
  const Document doc = random_document(eng, 7, 5, std::nullopt);
  const auto config = tight_config(InferenceMode::Prediction, 50);
  const DocPosterior a = infer_document(doc, std::nullopt, model, config);
  const DocPosterior b = infer_document(doc, 123.0, model, config);
  CHECK((a.gamma - b.gamma).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(a.elbo == b.elbo);
}

TEST_CASE("supervised mode requires a response") {
  std::mt19937_64 eng(124);
  const ModelParams model = random_model(eng, 2, 4);
  const Document doc = random_document(eng, 3, 4, std::nullopt);
  CHECK_THROWS_AS(infer_document(doc, std::nullopt, model, InferenceConfig{}),
                  std::invalid_argument);
}

TEST_CASE("out-of-vocabulary tokens are rejected") {
  std::mt19937_64 eng(125);
  const ModelParams model = random_model(eng, 2, 4);
  Document doc;
  doc.tokens = {0, 4};
  CHECK_THROWS_AS(
      infer_document(doc, 1.0, model, InferenceConfig{}), slda::VocabMismatchError);
}

TEST_CASE("ELBO trace is monotone and rows stay on the simplex") {
  std::mt19937_64 eng(321);
  for (Family family : {Family::Gaussian, Family::Poisson}) {
    ModelParams model = random_model(eng, 3, 6, family);
    if (family == Family::Poisson) model.glm.delta = 1.0;
    const double y =
        family == Family::Gaussian ? 0.9 : static_cast<double>(eng() % 5);
    const Document doc = random_document(eng, 9, 6, y);
    for (InferenceMode mode : {InferenceMode::Supervised, InferenceMode::Prediction}) {
      const DocPosterior post =
          infer_document(doc, y, model, tight_config(mode, 200));
      for (std::size_t i = 1; i < post.elbo_trace.size(); ++i) {
        CHECK(post.elbo_trace[i] >= post.elbo_trace[i - 1] - 1e-9);
      }
      for (int row = 0; row < post.phis.rows(); ++row) {
        CHECK(std::abs(post.phis.row(row).sum() - 1.0) < 1e-10);
      }
      CHECK((post.gamma - update_gamma(model.alpha, post.phis)).lpNorm<Eigen::Infinity>() <
            1e-10);
    }
  }
}

TEST_CASE("converged state is a fixed point of the coordinate updates") {
  std::mt19937_64 eng(654);
  const ModelParams model = random_model(eng, 3, 6);
  const double y = 0.35;
  const Document doc = random_document(eng, 8, 6, y);
  const DocPosterior post =
      infer_document(doc, y, model, tight_config(InferenceMode::Supervised));

  const VectorXd gamma_again = update_gamma(model.alpha, post.phis);
  CHECK((gamma_again - post.gamma).lpNorm<Eigen::Infinity>() < 1e-6);
  for (int j = 0; j < doc.length(); ++j) {
    const VectorXd phi_again = update_phi_supervised(j, doc, y, post, model);
    CHECK((phi_again - post.phis.row(j).transpose()).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}

TEST_CASE("token permutation leaves converged results unchanged") {
  std::mt19937_64 eng(777);
  for (int trial = 0; trial < 5; ++trial) {
    const ModelParams model = random_model(eng, 3, 6);
    Document doc = random_document(eng, 10, 6, 0.6);
    Document shuffled = doc;
    for (int i = 9; i > 0; --i) {
      std::swap(shuffled.tokens[i], shuffled.tokens[eng() % (i + 1)]);
    }
    const auto config = tight_config(InferenceMode::Supervised, 500);
    const DocPosterior a = infer_document(doc, 0.6, model, config);
    const DocPosterior b = infer_document(shuffled, 0.6, model, config);
    CHECK((a.gamma - b.gamma).lpNorm<Eigen::Infinity>() < 1e-6);
    CHECK((a.expected_zbar() - b.expected_zbar()).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}

TEST_CASE("supervised inference with eta = 0 reduces to unsupervised LDA") {
  std::mt19937_64 eng(888);
  for (Family family : {Family::Gaussian, Family::Poisson}) {
    ModelParams model = random_model(eng, 3, 6, family);
    model.glm.eta = VectorXd::Zero(3);
    model.glm.delta = 1.0;
    const double y = family == Family::Gaussian ? -0.4 : 2.0;
    const Document doc = random_document(eng, 12, 6, y);

    // Fixed sweep count so both runs do identical work; the response terms
    // only shift the ELBO by a constant.
    InferenceConfig config;
    config.rel_tol = 1e-300;
    config.max_iters = 120;
    config.mode = InferenceMode::Supervised;
    const DocPosterior supervised = infer_document(doc, y, model, config);
    config.mode = InferenceMode::Prediction;
    const DocPosterior prediction = infer_document(doc, std::nullopt, model, config);

    CHECK((supervised.gamma - prediction.gamma).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK((supervised.phis - prediction.phis).lpNorm<Eigen::Infinity>() < 1e-8);
  }
}
