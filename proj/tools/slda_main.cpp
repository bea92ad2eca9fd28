// Command-line front end: corpus pruning, training, prediction, and
// cross-validated evaluation, each emitting a JSON run manifest.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "slda/corpus.hpp"
#include "slda/errors.hpp"
#include "slda/evaluate.hpp"
#include "slda/train.hpp"

namespace {

using nlohmann::json;

// Exit codes: 0 success, 2 parse/input error, 3 empty pruning result,
// 4 training error, 5 vocabulary mismatch, 1 anything else.
constexpr int kExitOther = 1;
constexpr int kExitParse = 2;
constexpr int kExitEmptyPrune = 3;
constexpr int kExitTrain = 4;
constexpr int kExitVocab = 5;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::uint64_t hash = 14695981039346656037ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 1099511628211ull;
    }
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path + suffix;
  }
  return path.substr(0, dot) + suffix + path.substr(dot);
}

struct Manifest {
  json doc;
  std::chrono::steady_clock::time_point start;

  explicit Manifest(const std::string& command)
      : start(std::chrono::steady_clock::now()) {
    doc["command"] = command;
    doc["inputs"] = json::array();
    doc["outputs"] = json::array();
  }

  void add_input(const std::string& path) {
    doc["inputs"].push_back({{"path", path}, {"fnv1a64", hex64(fnv1a64_file(path))}});
  }
  void add_output(const std::string& path) { doc["outputs"].push_back(path); }

  void write(const std::string& path) {
    const auto elapsed = std::chrono::steady_clock::now() - start;
    doc["duration_seconds"] =
        std::chrono::duration_cast<std::chrono::duration<double>>(elapsed).count();
    std::ofstream out = open_output(path);
    out << doc.dump(2) << "\n";
  }
};

slda::TransformKind transform_from_name(const std::string& name) {
  if (name == "none") return slda::TransformKind::None;
  if (name == "log") return slda::TransformKind::Log;
  return slda::TransformKind::ShiftedLog;
}

void print_warnings(const slda::ElboTrace& trace) {
  for (const auto& iteration : trace.iterations) {
    for (const auto& warning : iteration.warnings) {
      std::cerr << "warning: " << warning << "\n";
    }
  }
}

std::string format_decimal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Shared training flags for the train and eval subcommands.
struct TrainOptions {
  std::string docs_path;
  std::string responses_path;
  std::string vocab_path;
  int topics = 10;
  double alpha = 0.0;
  bool alpha_given = false;
  std::string family = "gaussian";
  double em_tol = 1e-4;
  int em_max_iters = 100;
  double doc_tol = 1e-4;
  int doc_max_iters = 100;
  std::uint64_t seed = 0;
  std::string transform = "none";
  double log_shift = 1.0;
  std::string poisson_lognorm = "exact";
  std::string poisson_dispersion = "one";
  std::string eta_init = "grid";
  double beta_perturbation = 0.01;
  bool warm_start_estep = false;
  int threads = 1;
};

void add_train_options(CLI::App* cmd, TrainOptions* opt, bool multi_topics,
                       std::vector<int>* topics_list) {
  cmd->add_option("--docs", opt->docs_path, "Bag-of-words documents file")->required();
  cmd->add_option("--responses", opt->responses_path, "Responses file (one value or NA per line)")
      ->required();
  cmd->add_option("--vocab", opt->vocab_path, "Vocabulary file (one term per line)");
  if (multi_topics) {
    cmd->add_option("--topics", *topics_list, "Topic counts to evaluate")
        ->required()
        ->check(CLI::PositiveNumber);
  } else {
    cmd->add_option("--topics", opt->topics, "Number of topics")
        ->required()
        ->check(CLI::PositiveNumber);
  }
  cmd->add_option("--alpha", opt->alpha, "Dirichlet parameter (default: 1/K)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--family", opt->family, "Response family")
      ->check(CLI::IsMember({"gaussian", "poisson"}));
  cmd->add_option("--em-tol", opt->em_tol, "Relative corpus ELBO change to stop EM")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--em-max-iters", opt->em_max_iters, "Maximum EM iterations")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--doc-tol", opt->doc_tol, "Relative per-document ELBO change to stop inference")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--doc-max-iters", opt->doc_max_iters, "Maximum per-document sweeps")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", opt->seed, "Random seed");
  cmd->add_option("--response-transform", opt->transform, "Response transform")
      ->check(CLI::IsMember({"none", "log", "shifted-log"}));
  cmd->add_option("--log-shift", opt->log_shift, "Shift for shifted-log transform");
  cmd->add_option("--poisson-lognorm", opt->poisson_lognorm,
                  "Poisson per-token expectation form")
      ->check(CLI::IsMember({"exact", "paper"}));
  cmd->add_option("--poisson-dispersion", opt->poisson_dispersion,
                  "Poisson dispersion M-step")
      ->check(CLI::IsMember({"one", "paper"}));
  cmd->add_option("--eta-init", opt->eta_init, "GLM coefficient initialization")
      ->check(CLI::IsMember({"grid", "zeros"}));
  cmd->add_option("--beta-perturbation", opt->beta_perturbation,
                  "Scale of the random perturbation of the uniform topics");
  cmd->add_flag("--warm-start-estep", opt->warm_start_estep,
                "Carry per-document posteriors across EM iterations");
  cmd->add_option("--threads", opt->threads, "E-step worker threads")
      ->check(CLI::PositiveNumber);
}

slda::FitConfig make_fit_config(const TrainOptions& opt, int topics) {
  slda::FitConfig config;
  config.num_topics = topics;
  if (opt.alpha_given) config.alpha_value = opt.alpha;
  config.em_rel_tol = opt.em_tol;
  config.em_max_iters = opt.em_max_iters;
  config.inference.rel_tol = opt.doc_tol;
  config.inference.max_iters = opt.doc_max_iters;
  config.seed = opt.seed;
  config.init_eta_mode = opt.eta_init == "grid" ? slda::EtaInit::Grid : slda::EtaInit::Zeros;
  config.beta_perturbation = opt.beta_perturbation;
  config.family.kind = opt.family == "gaussian" ? slda::Family::Gaussian
                                                : slda::Family::Poisson;
  config.family.lognorm = opt.poisson_lognorm == "exact"
                              ? slda::PoissonLogNorm::IndicatorExact
                              : slda::PoissonLogNorm::PaperLiteral;
  config.family.dispersion = opt.poisson_dispersion == "one"
                                 ? slda::PoissonDispersion::FixedOne
                                 : slda::PoissonDispersion::PaperRatio;
  config.warm_start_estep = opt.warm_start_estep;
  config.threads = opt.threads;
  return config;
}

slda::Corpus load_training_corpus(const TrainOptions& opt, Manifest* manifest) {
  manifest->add_input(opt.docs_path);
  manifest->add_input(opt.responses_path);
  std::ifstream docs = open_input(opt.docs_path);
  std::ifstream responses = open_input(opt.responses_path);
  std::optional<std::ifstream> vocab;
  if (!opt.vocab_path.empty()) {
    manifest->add_input(opt.vocab_path);
    vocab = open_input(opt.vocab_path);
  }
  slda::Corpus corpus =
      slda::parse_corpus(docs, &responses, vocab ? &*vocab : nullptr);
  return slda::transform_responses(corpus, transform_from_name(opt.transform),
                                   opt.log_shift);
}

json train_options_json(const TrainOptions& opt, int topics) {
  json options;
  options["docs"] = opt.docs_path;
  options["responses"] = opt.responses_path;
  options["vocab"] = opt.vocab_path;
  options["topics"] = topics;
  options["alpha_mode"] = opt.alpha_given ? "numeric" : "one-over-K";
  options["alpha"] = opt.alpha_given ? opt.alpha : 1.0 / topics;
  options["family"] = opt.family;
  options["em_tol"] = opt.em_tol;
  options["em_max_iters"] = opt.em_max_iters;
  options["doc_tol"] = opt.doc_tol;
  options["doc_max_iters"] = opt.doc_max_iters;
  options["seed"] = opt.seed;
  options["response_transform"] = opt.transform;
  options["log_shift"] = opt.log_shift;
  options["poisson_lognorm"] = opt.poisson_lognorm;
  options["poisson_dispersion"] = opt.poisson_dispersion;
  options["eta_init"] = opt.eta_init;
  options["beta_perturbation"] = opt.beta_perturbation;
  options["warm_start_estep"] = opt.warm_start_estep;
  options["threads"] = opt.threads;
  return options;
}

json init_summary_json(const slda::Corpus& corpus, const slda::FitConfig& config) {
  const slda::ModelParams init = slda::initialize(corpus, config);
  json summary;
  summary["alpha"] = init.alpha;
  summary["eta_init_mode"] = config.init_eta_mode == slda::EtaInit::Grid ? "grid" : "zeros";
  summary["eta"] = std::vector<double>(init.glm.eta.data(),
                                       init.glm.eta.data() + init.glm.eta.size());
  summary["delta_init"] = init.glm.delta;
  summary["delta_init_rule"] =
      config.family.kind == slda::Family::Gaussian ? "sample-variance" : "one";
  return summary;
}

int cmd_prune(const std::string& docs_path, const std::string& responses_path,
              const std::string& vocab_path, double max_doc_frac, int min_doc_count,
              const std::string& out_docs, const std::string& out_vocab,
              std::string out_responses, std::string report_path,
              std::string manifest_path) {
  Manifest manifest("prune");
  manifest.doc["options"] = {{"docs", docs_path},
                             {"responses", responses_path},
                             {"vocab", vocab_path},
                             {"max_doc_frac", max_doc_frac},
                             {"min_doc_count", min_doc_count}};
  manifest.doc["seed"] = 0;

  manifest.add_input(docs_path);
  std::ifstream docs = open_input(docs_path);
  std::optional<std::ifstream> responses;
  if (!responses_path.empty()) {
    manifest.add_input(responses_path);
    responses = open_input(responses_path);
  }
  std::optional<std::ifstream> vocab;
  if (!vocab_path.empty()) {
    manifest.add_input(vocab_path);
    vocab = open_input(vocab_path);
  }
  const slda::Corpus corpus = slda::parse_corpus(
      docs, responses ? &*responses : nullptr, vocab ? &*vocab : nullptr);
  const slda::PruneReport pruned =
      slda::prune_vocabulary(corpus, max_doc_frac, min_doc_count);

  {
    std::ofstream out = open_output(out_docs);
    slda::write_docs(pruned.corpus, out);
  }
  manifest.add_output(out_docs);
  {
    std::ofstream out = open_output(out_vocab);
    slda::write_vocab(pruned.corpus, out);
  }
  manifest.add_output(out_vocab);
  if (!responses_path.empty()) {
    if (out_responses.empty()) out_responses = out_docs + ".responses";
    std::ofstream out = open_output(out_responses);
    slda::write_responses(pruned.corpus, out);
    manifest.add_output(out_responses);
  }
  if (report_path.empty()) report_path = out_docs + ".drops";
  {
    std::ofstream out = open_output(report_path);
    for (int idx : pruned.dropped_docs) out << idx << '\n';
  }
  manifest.add_output(report_path);

  manifest.doc["summary"] = {
      {"documents_kept", pruned.corpus.num_docs()},
      {"documents_dropped", static_cast<int>(pruned.dropped_docs.size())},
      {"terms_kept", pruned.corpus.vocab_size()},
      {"terms_removed", corpus.vocab_size() - pruned.corpus.vocab_size()}};
  if (manifest_path.empty()) manifest_path = out_docs + ".manifest.json";
  manifest.write(manifest_path);
  std::cout << "kept " << pruned.corpus.num_docs() << " documents, "
            << pruned.corpus.vocab_size() << " terms; dropped "
            << pruned.dropped_docs.size() << " documents\n";
  return 0;
}

int cmd_train(const TrainOptions& opt, const std::string& out_model,
              const std::string& trace_path, std::string manifest_path) {
  Manifest manifest("train");
  manifest.doc["options"] = train_options_json(opt, opt.topics);
  manifest.doc["seed"] = opt.seed;

  const slda::Corpus corpus = load_training_corpus(opt, &manifest);
  const slda::FitConfig config = make_fit_config(opt, opt.topics);
  manifest.doc["init"] = init_summary_json(corpus, config);

  const slda::FitResult result = slda::fit(corpus, config);
  print_warnings(result.trace);

  slda::save_model(result.model, out_model);
  manifest.add_output(out_model);

  if (!trace_path.empty()) {
    std::ofstream out = open_output(trace_path);
    out << "iteration,corpus_elbo,rel_change\n";
    for (std::size_t i = 0; i < result.trace.iterations.size(); ++i) {
      const auto& iteration = result.trace.iterations[i];
      out << (i + 1) << ',' << format_decimal(iteration.corpus_elbo) << ','
          << format_decimal(iteration.rel_change) << '\n';
    }
    manifest.add_output(trace_path);
  }

  manifest.doc["summary"] = {
      {"em_iterations", static_cast<int>(result.trace.iterations.size())},
      {"final_corpus_elbo", result.trace.iterations.back().corpus_elbo},
      {"labeled_documents", corpus.num_labeled()},
      {"documents", corpus.num_docs()},
      {"vocabulary", corpus.vocab_size()}};
  if (manifest_path.empty()) manifest_path = out_model + ".manifest.json";
  manifest.write(manifest_path);
  std::cout << "trained " << opt.topics << "-topic " << opt.family << " model in "
            << result.trace.iterations.size() << " EM iterations; final bound "
            << result.trace.iterations.back().corpus_elbo << "\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& docs_path,
                const std::string& out_path, double doc_tol, int doc_max_iters,
                std::string manifest_path) {
  Manifest manifest("predict");
  manifest.doc["options"] = {{"model", model_path},
                             {"docs", docs_path},
                             {"doc_tol", doc_tol},
                             {"doc_max_iters", doc_max_iters}};
  manifest.doc["seed"] = 0;

  manifest.add_input(model_path);
  const slda::ModelParams model = slda::load_model(model_path);
  manifest.add_input(docs_path);
  std::ifstream docs = open_input(docs_path);
  const slda::Corpus corpus = slda::parse_corpus(docs);

  slda::InferenceConfig config;
  config.rel_tol = doc_tol;
  config.max_iters = doc_max_iters;
  config.mode = slda::InferenceMode::Prediction;

  std::ofstream out = open_output(out_path);
  for (const slda::Document& doc : corpus.docs) {
    const slda::Prediction prediction = slda::predict_response(doc, model, config);
    out << format_decimal(prediction.transformed) << '\t'
        << format_decimal(prediction.original) << '\n';
  }
  manifest.add_output(out_path);

  manifest.doc["summary"] = {{"documents", corpus.num_docs()}};
  if (manifest_path.empty()) manifest_path = out_path + ".manifest.json";
  manifest.write(manifest_path);
  std::cout << "wrote " << corpus.num_docs() << " predictions\n";
  return 0;
}

int cmd_eval(const TrainOptions& opt, const std::vector<int>& topics_list,
             int folds, const std::string& baseline, const std::string& out_path,
             const std::string& fold_report_path, std::string manifest_path) {
  Manifest manifest("eval");
  manifest.doc["options"] = train_options_json(opt, topics_list.front());
  manifest.doc["options"]["topics"] = topics_list;
  manifest.doc["options"]["folds"] = folds;
  manifest.doc["options"]["baseline"] = baseline;
  manifest.doc["seed"] = opt.seed;

  const slda::Corpus corpus = load_training_corpus(opt, &manifest);

  if (!fold_report_path.empty()) {
    const std::vector<int> assignment =
        slda::fold_assignments(corpus.num_docs(), folds, opt.seed);
    std::ofstream out = open_output(fold_report_path);
    for (int fold : assignment) out << fold << '\n';
    manifest.add_output(fold_report_path);
  }

  const bool single_report = topics_list.size() == 1 && baseline == "none";

  std::printf("%-6s %-16s %-8s %-8s %-12s %-12s\n", "K", "method", "fold",
              "n_test", "pR2", "corr");
  json summary = json::array();
  for (int topics : topics_list) {
    const slda::FitConfig config = make_fit_config(opt, topics);
    std::vector<std::pair<std::string, slda::EvalReport>> reports;
    std::vector<std::string> warnings;
    reports.emplace_back("slda",
                         slda::cross_validate(corpus, config, folds, opt.seed, &warnings));
    if (baseline == "lda-regression") {
      reports.emplace_back("lda-regression",
                           slda::baseline_lda_regression(corpus, config, folds,
                                                         opt.seed, &warnings));
    }
    for (const std::string& warning : warnings) {
      std::cerr << "warning: " << warning << "\n";
    }

    for (const auto& [method, report] : reports) {
      for (const slda::FoldMetrics& fold : report.per_fold) {
        std::printf("%-6d %-16s %-8d %-8d %-12.6f %-12.6f\n", topics,
                    method.c_str(), fold.fold, fold.n_test, fold.pr2, fold.corr);
      }
      int total = 0;
      for (const slda::FoldMetrics& fold : report.per_fold) total += fold.n_test;
      std::printf("%-6d %-16s %-8s %-8d %-12.6f %-12.6f\n", topics, method.c_str(),
                  "pooled", total, report.pooled_pr2, report.pooled_corr);

      std::string path = out_path;
      if (!single_report) {
        if (topics_list.size() > 1) {
          path = with_suffix(path, ".k" + std::to_string(topics));
        }
        if (method != "slda") {
          path = with_suffix(path, ".baseline");
        }
      }
      std::ofstream out = open_output(path);
      slda::write_report_csv(report, out);
      manifest.add_output(path);
      summary.push_back({{"topics", topics},
                         {"method", method},
                         {"pooled_pr2", report.pooled_pr2},
                         {"pooled_corr", report.pooled_corr},
                         {"skipped_unlabeled", report.skipped_unlabeled}});
    }
  }

  manifest.doc["summary"] = summary;
  if (manifest_path.empty()) manifest_path = out_path + ".manifest.json";
  manifest.write(manifest_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supervised topic models: variational EM training, response "
               "prediction, and cross-validated evaluation"};
  app.require_subcommand(1);

  // prune
  auto* prune = app.add_subcommand("prune", "Prune a corpus vocabulary by document frequency");
  std::string prune_docs, prune_responses, prune_vocab;
  double max_doc_frac = 0.25;
  int min_doc_count = 5;
  std::string out_docs, out_vocab, out_responses, report_path, prune_manifest;
  prune->add_option("--docs", prune_docs, "Bag-of-words documents file")->required();
  prune->add_option("--responses", prune_responses, "Responses file, copied through the document drops");
  prune->add_option("--vocab", prune_vocab, "Vocabulary file");
  prune->add_option("--max-doc-frac", max_doc_frac,
                    "Remove terms in more than this fraction of documents");
  prune->add_option("--min-doc-count", min_doc_count,
                    "Remove terms in fewer than this many documents");
  prune->add_option("--out-docs", out_docs, "Pruned documents file")->required();
  prune->add_option("--out-vocab", out_vocab, "Pruned vocabulary file")->required();
  prune->add_option("--out-responses", out_responses,
                    "Pruned responses file (default: <out-docs>.responses)");
  prune->add_option("--report", report_path,
                    "Dropped-document report (default: <out-docs>.drops)");
  prune->add_option("--manifest", prune_manifest,
                    "Manifest path (default: <out-docs>.manifest.json)");

  // train
  auto* train = app.add_subcommand("train", "Fit a supervised topic model");
  TrainOptions train_opt;
  std::string out_model, trace_path, train_manifest;
  add_train_options(train, &train_opt, false, nullptr);
  train->add_option("--out", out_model, "Model file to write")->required();
  train->add_option("--trace", trace_path, "ELBO trace CSV");
  train->add_option("--manifest", train_manifest,
                    "Manifest path (default: <out>.manifest.json)");

  // predict
  auto* predict = app.add_subcommand("predict", "Predict responses for new documents");
  std::string model_path, predict_docs, predict_out, predict_manifest;
  double predict_doc_tol = 1e-4;
  int predict_doc_max_iters = 100;
  predict->add_option("--model", model_path, "Model file")->required();
  predict->add_option("--docs", predict_docs, "Documents file")->required();
  predict->add_option("--out", predict_out, "Predictions file (transformed and original scale)")
      ->required();
  predict->add_option("--doc-tol", predict_doc_tol, "Per-document convergence tolerance");
  predict->add_option("--doc-max-iters", predict_doc_max_iters, "Maximum per-document sweeps");
  predict->add_option("--manifest", predict_manifest,
                      "Manifest path (default: <out>.manifest.json)");

  // eval
  auto* eval = app.add_subcommand("eval", "Cross-validated predictive evaluation");
  TrainOptions eval_opt;
  std::vector<int> eval_topics;
  int folds = 5;
  std::string baseline = "none";
  std::string eval_out, fold_report_path, eval_manifest;
  add_train_options(eval, &eval_opt, true, &eval_topics);
  eval->add_option("--folds", folds, "Number of cross-validation folds");
  eval->add_option("--baseline", baseline, "Also evaluate a baseline")
      ->check(CLI::IsMember({"none", "lda-regression"}));
  eval->add_option("--out", eval_out, "Report CSV")->required();
  eval->add_option("--fold-report", fold_report_path,
                   "Write the fold id of each document index");
  eval->add_option("--manifest", eval_manifest,
                   "Manifest path (default: <out>.manifest.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  train_opt.alpha_given = train->count("--alpha") > 0;
  eval_opt.alpha_given = eval->count("--alpha") > 0;

  try {
    if (prune->parsed()) {
      return cmd_prune(prune_docs, prune_responses, prune_vocab, max_doc_frac,
                       min_doc_count, out_docs, out_vocab, out_responses,
                       report_path, prune_manifest);
    }
    if (train->parsed()) {
      return cmd_train(train_opt, out_model, trace_path, train_manifest);
    }
    if (predict->parsed()) {
      return cmd_predict(model_path, predict_docs, predict_out, predict_doc_tol,
                         predict_doc_max_iters, predict_manifest);
    }
    return cmd_eval(eval_opt, eval_topics, folds, baseline, eval_out,
                    fold_report_path, eval_manifest);
  } catch (const slda::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const slda::SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const slda::PruneEmptyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEmptyPrune;
  } catch (const slda::VocabMismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVocab;
  } catch (const slda::TrainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTrain;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
}
