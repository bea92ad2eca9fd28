#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "oracles.hpp"
#include "slda/errors.hpp"
#include "slda/train.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using slda::Corpus;
using slda::Document;
using slda::e_step;
using slda::Family;
using slda::fit;
using slda::FitConfig;
using slda::GenParams;
using slda::generate_synthetic;
using slda::initialize;
using slda::load_model;
using slda::ModelParams;
using slda::mstep_topics;
using slda::save_model;

namespace {

Corpus tiny_corpus(int docs, int vocab, std::mt19937_64& eng, bool labeled) {
  Corpus corpus;
  corpus.vocab = slda::Vocabulary::numbered(vocab);
  for (int d = 0; d < docs; ++d) {
    Document doc;
    const int n = 3 + static_cast<int>(eng() % 6);
    for (int i = 0; i < n; ++i) doc.tokens.push_back(static_cast<int>(eng() % vocab));
    if (labeled) doc.response = oracle::uniform01(eng) * 4.0 - 2.0;
    corpus.docs.push_back(doc);
  }
  return corpus;
}

GenParams separated_gen_params(int k, int v, int docs, int length, double delta) {
  GenParams params;
  params.alpha = 1.0 / k;
  params.beta = MatrixXd::Constant(k, v, 1e-4);
  for (int col = 0; col < v; ++col) params.beta(col % k, col) = 1.0;
  for (int row = 0; row < k; ++row) params.beta.row(row) /= params.beta.row(row).sum();
  params.eta.resize(k);
  for (int i = 0; i < k; ++i) {
    params.eta[i] = k == 1 ? 1.0 : -2.0 + 4.0 * i / (k - 1.0);
  }
  params.delta = delta;
  params.num_docs = docs;
  params.doc_length = length;
  return params;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string temp_path(const std::string& name) {
  return std::string("/tmp/slda_test_") + name;
}

}  // namespace

TEST_CASE("initialization follows the documented recipe") {
  std::mt19937_64 eng(1);
  Corpus corpus = tiny_corpus(6, 8, eng, true);
  corpus.docs[0].response = 1.0;
  corpus.docs[1].response = 3.0;
  for (int d = 2; d < 6; ++d) corpus.docs[d].response.reset();

  FitConfig config;
  config.num_topics = 4;
  config.beta_perturbation = 0.0;
  const ModelParams model = initialize(corpus, config);

  SUBCASE("zero perturbation gives exactly uniform topics") {
    const MatrixXd beta = model.beta();
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 8; ++c) CHECK(beta(r, c) == 1.0 / 8.0);
    }
  }
  SUBCASE("alpha defaults to 1/K and delta to the unbiased sample variance") {
    CHECK(model.alpha == 0.25);
    CHECK(model.glm.delta == 2.0);  // responses 1 and 3
  }
  SUBCASE("eta grid spans [-1, 1] in steps of 2/K") {
    CHECK(model.glm.eta[0] == doctest::Approx(-0.75).epsilon(1e-15));
    CHECK(model.glm.eta[1] == doctest::Approx(-0.25).epsilon(1e-15));
    CHECK(model.glm.eta[2] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(model.glm.eta[3] == doctest::Approx(0.75).epsilon(1e-15));
    FitConfig zeros = config;
    zeros.init_eta_mode = slda::EtaInit::Zeros;
    CHECK(initialize(corpus, zeros).glm.eta.norm() == 0.0);
  }
  SUBCASE("same seed reproduces the same parameters") {
    FitConfig jittered = config;
    jittered.beta_perturbation = 0.01;
    const ModelParams a = initialize(corpus, jittered);
    const ModelParams b = initialize(corpus, jittered);
    CHECK((a.log_beta - b.log_beta).lpNorm<Eigen::Infinity>() == 0.0);
    jittered.seed = 9;
    const ModelParams c = initialize(corpus, jittered);
    CHECK((a.log_beta - c.log_beta).lpNorm<Eigen::Infinity>() != 0.0);
  }
}

TEST_CASE("gaussian initialization needs enough labels to estimate variance") {
  std::mt19937_64 eng(2);
  Corpus corpus = tiny_corpus(4, 5, eng, false);
  FitConfig config;
  config.num_topics = 2;

  // No labels at all: delta falls back to an inert 1.0.
  CHECK(initialize(corpus, config).glm.delta == 1.0);

  corpus.docs[0].response = 2.0;
  CHECK_THROWS_AS(initialize(corpus, config), std::invalid_argument);

  FitConfig poisson = config;
  poisson.family.kind = Family::Poisson;
  CHECK(initialize(corpus, poisson).glm.delta == 1.0);
}

TEST_CASE("e_step sums per-document bounds and is additive") {
  std::mt19937_64 eng(3);
  Corpus corpus = tiny_corpus(1, 6, eng, true);
  FitConfig config;
  config.num_topics = 3;
  const ModelParams model = initialize(corpus, config);

  const auto single = e_step(corpus, model, config.inference);
  CHECK(single.corpus_elbo == single.posteriors[0].elbo);

  Corpus doubled = corpus;
  doubled.docs.push_back(corpus.docs[0]);
  const auto two = e_step(doubled, model, config.inference);
  CHECK(two.corpus_elbo == 2.0 * single.corpus_elbo);
}

TEST_CASE("parallel and sequential E-steps agree") {
  std::mt19937_64 eng(4);
  Corpus corpus = tiny_corpus(24, 9, eng, true);
  corpus.docs[5].response.reset();  // mixed labeled and unlabeled
  FitConfig config;
  config.num_topics = 3;
  const ModelParams model = initialize(corpus, config);

  const auto serial = e_step(corpus, model, config.inference, 1);
  const auto parallel = e_step(corpus, model, config.inference, 4);
  CHECK(serial.corpus_elbo == parallel.corpus_elbo);
  for (int d = 0; d < corpus.num_docs(); ++d) {
    CHECK((serial.posteriors[d].gamma - parallel.posteriors[d].gamma)
              .lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((serial.posteriors[d].phis - parallel.posteriors[d].phis)
              .lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("topic M-step accumulates expected counts") {
  SUBCASE("a single token concentrates every row on its term") {
    Corpus corpus;
    corpus.vocab = slda::Vocabulary::numbered(4);
    Document doc;
    doc.tokens = {2};
    corpus.docs.push_back(doc);
    std::vector<slda::DocPosterior> posteriors(1);
    posteriors[0].phis = MatrixXd::Constant(1, 2, 0.5);
    posteriors[0].gamma = VectorXd::Constant(2, 1.0);
    const MatrixXd beta = mstep_topics(corpus, posteriors);
    for (int r = 0; r < 2; ++r) {
      CHECK(beta(r, 2) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(beta(r, 0) < 1e-10);
    }
  }

  SUBCASE("uniform responsibilities recover the empirical term distribution") {
    std::mt19937_64 eng(5);
    Corpus corpus = tiny_corpus(8, 5, eng, false);
    std::vector<slda::DocPosterior> posteriors(corpus.num_docs());
    std::vector<double> counts(5, 0.0);
    double total = 0.0;
    for (int d = 0; d < corpus.num_docs(); ++d) {
      posteriors[d].phis = MatrixXd::Constant(corpus.docs[d].length(), 3, 1.0 / 3.0);
      for (int t : corpus.docs[d].tokens) {
        counts[t] += 1.0;
        total += 1.0;
      }
    }
    const MatrixXd beta = mstep_topics(corpus, posteriors);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 5; ++c) {
        CHECK(beta(r, c) == doctest::Approx(counts[c] / total).epsilon(1e-9));
      }
    }
  }

  SUBCASE("matches an independent token-level accumulation") {
    std::mt19937_64 eng(6);
    Corpus corpus = tiny_corpus(10, 7, eng, false);
    std::vector<slda::DocPosterior> posteriors(corpus.num_docs());
    for (int d = 0; d < corpus.num_docs(); ++d) {
      posteriors[d].phis = oracle::random_phis(eng, corpus.docs[d].length(), 3);
    }
    const MatrixXd beta = mstep_topics(corpus, posteriors);

    MatrixXd reference = MatrixXd::Zero(3, 7);
    for (int k = 0; k < 3; ++k) {
      for (int d = 0; d < corpus.num_docs(); ++d) {
        for (int n = 0; n < corpus.docs[d].length(); ++n) {
          reference(k, corpus.docs[d].tokens[n]) += posteriors[d].phis(n, k);
        }
      }
    }
    reference.array() += 1e-12;
    for (int k = 0; k < 3; ++k) reference.row(k) /= reference.row(k).sum();
    CHECK((beta - reference).lpNorm<Eigen::Infinity>() < 1e-12);
  }

  SUBCASE("a massless topic becomes uniform with a warning") {
    Corpus corpus;
    corpus.vocab = slda::Vocabulary::numbered(3);
    Document doc;
    doc.tokens = {0, 1};
    corpus.docs.push_back(doc);
    std::vector<slda::DocPosterior> posteriors(1);
    posteriors[0].phis.resize(2, 2);
    posteriors[0].phis << 1.0, 0.0, 1.0, 0.0;  // topic 1 never used
    std::vector<std::string> warnings;
    const MatrixXd beta = mstep_topics(corpus, posteriors, &warnings);
    CHECK_FALSE(warnings.empty());
    for (int c = 0; c < 3; ++c) {
      CHECK(beta(1, c) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("glm sufficient statistics cover labeled documents only") {
  std::mt19937_64 eng(7);
  Corpus corpus = tiny_corpus(6, 5, eng, true);
  corpus.docs[2].response.reset();
  FitConfig config;
  config.num_topics = 3;
  const ModelParams model = initialize(corpus, config);
  const auto estep = e_step(corpus, model, config.inference);
  const auto stats = slda::collect_glm_stats(corpus, estep.posteriors, model.family);
  CHECK(stats.num_labeled() == 5);
  for (Eigen::Index r = 0; r < stats.ex_rows.rows(); ++r) {
    CHECK(std::abs(stats.ex_rows.row(r).sum() - 1.0) < 1e-10);
  }
  CHECK((stats.exxt_sum - stats.exxt_sum.transpose()).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("fit runs exactly one EM iteration when capped") {
  std::mt19937_64 eng(8);
  const Corpus corpus = tiny_corpus(5, 6, eng, true);
  FitConfig config;
  config.num_topics = 2;
  config.em_max_iters = 1;
  const auto result = fit(corpus, config);
  CHECK(result.trace.iterations.size() == 1);
}

TEST_CASE("unlabeled fit equals the eta-pinned supervised code path") {
  std::mt19937_64 eng(9);
  Corpus corpus = tiny_corpus(12, 8, eng, true);

  FitConfig config;
  config.num_topics = 3;
  config.init_eta_mode = slda::EtaInit::Zeros;
  config.em_rel_tol = 1e-300;
  config.em_max_iters = 4;
  config.inference.rel_tol = 1e-300;
  config.inference.max_iters = 40;

  FitConfig pinned = config;
  pinned.skip_glm_mstep = true;
  const auto supervised = fit(corpus, pinned);

  const auto unsupervised = fit(strip_responses(corpus), config);

  CHECK((supervised.model.log_beta - unsupervised.model.log_beta)
            .lpNorm<Eigen::Infinity>() < 1e-10);
  // eta and delta stay at their initial values in both runs.
  CHECK(supervised.model.glm.eta.norm() == 0.0);
  CHECK(unsupervised.model.glm.eta.norm() == 0.0);
}

TEST_CASE("fit improves the bound on a synthetic corpus") {
  const GenParams params = separated_gen_params(3, 25, 400, 60, 0.05);
  const Corpus corpus = generate_synthetic(params, 42);
  FitConfig config;
  config.num_topics = 3;
  config.em_max_iters = 20;
  const auto result = fit(corpus, config);
  const auto& iterations = result.trace.iterations;
  REQUIRE(iterations.size() >= 2);
  for (std::size_t i = 1; i < iterations.size(); ++i) {
    CHECK(iterations[i].corpus_elbo >= iterations[i - 1].corpus_elbo - 1e-6);
  }
  CHECK(iterations.back().corpus_elbo > iterations.front().corpus_elbo + 1.0);
}

TEST_CASE("identical seeds give identical traces and parameters") {
  std::mt19937_64 eng(10);
  const Corpus corpus = tiny_corpus(10, 6, eng, true);
  FitConfig config;
  config.num_topics = 3;
  config.em_max_iters = 5;
  config.seed = 77;
  const auto a = fit(corpus, config);
  const auto b = fit(corpus, config);
  REQUIRE(a.trace.iterations.size() == b.trace.iterations.size());
  for (std::size_t i = 0; i < a.trace.iterations.size(); ++i) {
    CHECK(a.trace.iterations[i].corpus_elbo == b.trace.iterations[i].corpus_elbo);
  }
  CHECK((a.model.log_beta - b.model.log_beta).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((a.model.glm.eta - b.model.glm.eta).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(a.model.glm.delta == b.model.glm.delta);
}

TEST_CASE("model files round trip bit-exactly") {
  std::mt19937_64 eng(11);
  Corpus corpus = tiny_corpus(8, 6, eng, true);
  corpus = slda::transform_responses(corpus, slda::TransformKind::ShiftedLog, 5.0);
  FitConfig config;
  config.num_topics = 3;
  config.em_max_iters = 3;
  const auto result = fit(corpus, config);

  const std::string path = temp_path("model.json");
  save_model(result.model, path);
  const ModelParams loaded = load_model(path);

  CHECK(loaded.alpha == result.model.alpha);
  CHECK(loaded.glm.delta == result.model.glm.delta);
  CHECK((loaded.glm.eta - result.model.glm.eta).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((loaded.log_beta - result.model.log_beta).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(loaded.transform.kind == slda::TransformKind::ShiftedLog);
  CHECK(loaded.transform.shift == 5.0);

  const std::string again = temp_path("model_again.json");
  save_model(loaded, again);
  CHECK(read_file(path) == read_file(again));

  const auto before = e_step(corpus, result.model, config.inference);
  const auto after = e_step(corpus, loaded, config.inference);
  CHECK(std::abs(before.corpus_elbo - after.corpus_elbo) <= 1e-12);
}

TEST_CASE("model file validation distinguishes version and schema errors") {
  std::mt19937_64 eng(12);
  const Corpus corpus = tiny_corpus(4, 5, eng, true);
  FitConfig config;
  config.num_topics = 2;
  config.em_max_iters = 1;
  const auto result = fit(corpus, config);
  const std::string path = temp_path("model_tamper.json");
  save_model(result.model, path);
  const std::string contents = read_file(path);

  {
    std::ofstream out(temp_path("model_trunc.json"), std::ios::binary);
    out << contents.substr(0, contents.size() / 2);
  }
  CHECK_THROWS_AS(load_model(temp_path("model_trunc.json")), slda::SchemaError);

  {
    std::string versioned = contents;
    versioned.replace(versioned.find("\"version\": 1"), 12, "\"version\": 2");
    std::ofstream out(temp_path("model_vers.json"), std::ios::binary);
    out << versioned;
  }
  CHECK_THROWS_AS(load_model(temp_path("model_vers.json")), slda::VersionError);

  {
    std::string missing = contents;
    missing.replace(missing.find("\"delta\""), 7, "\"thelta\"");
    std::ofstream out(temp_path("model_missing.json"), std::ios::binary);
    out << missing;
  }
  CHECK_THROWS_AS(load_model(temp_path("model_missing.json")), slda::SchemaError);
  CHECK_THROWS_AS(load_model(temp_path("does_not_exist.json")), std::runtime_error);
}

TEST_CASE("synthetic generation is seeded and follows the model") {
  const GenParams params = separated_gen_params(3, 12, 30, 20, 0.1);
  const Corpus a = generate_synthetic(params, 5);
  const Corpus b = generate_synthetic(params, 5);
  REQUIRE(a.num_docs() == b.num_docs());
  for (int d = 0; d < a.num_docs(); ++d) {
    CHECK(a.docs[d].tokens == b.docs[d].tokens);
    CHECK(a.docs[d].response == b.docs[d].response);
  }
  const Corpus c = generate_synthetic(params, 6);
  bool any_difference = false;
  for (int d = 0; d < a.num_docs(); ++d) {
    any_difference = any_difference || a.docs[d].tokens != c.docs[d].tokens;
  }
  CHECK(any_difference);
}

TEST_CASE("single-topic generation draws from the lone topic") {
  GenParams params = separated_gen_params(1, 6, 4000, 3, 0.04);
  params.eta[0] = 1.5;
  const Corpus corpus = generate_synthetic(params, 13);
  double mean = 0.0;
  for (const Document& doc : corpus.docs) mean += *doc.response;
  mean /= corpus.num_docs();
  // y ~ Normal(eta_1, delta); the mean estimate has sd = 0.2/sqrt(4000).
  CHECK(std::abs(mean - 1.5) < 4.0 * 0.2 / std::sqrt(4000.0));
}

TEST_CASE("generated response means match enumeration for single-token documents") {
  // With N = 1 the marginal of the lone assignment is E[theta] = 1/K for a
  // symmetric Dirichlet, so E[y] is the plain average over topics.
  GenParams params = separated_gen_params(2, 8, 100000, 1, 0.05);
  params.eta << -0.5, 1.0;

  const Corpus gauss = generate_synthetic(params, 99);
  double mean = 0.0;
  double m2 = 0.0;
  int count = 0;
  for (const Document& doc : gauss.docs) {
    ++count;
    const double delta = *doc.response - mean;
    mean += delta / count;
    m2 += delta * (*doc.response - mean);
  }
  const double se = std::sqrt(m2 / (count - 1) / count);
  CHECK(std::abs(mean - 0.25) < 3.0 * se);  // (eta_1 + eta_2) / 2

  params.family.kind = Family::Poisson;
  const Corpus pois = generate_synthetic(params, 100);
  mean = 0.0;
  m2 = 0.0;
  count = 0;
  for (const Document& doc : pois.docs) {
    ++count;
    const double delta = *doc.response - mean;
    mean += delta / count;
    m2 += delta * (*doc.response - mean);
  }
  const double pois_se = std::sqrt(m2 / (count - 1) / count);
  const double expected = 0.5 * (std::exp(-0.5) + std::exp(1.0));
  CHECK(std::abs(mean - expected) < 3.0 * pois_se);
}
