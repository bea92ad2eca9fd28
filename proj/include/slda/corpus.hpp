#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace slda {

struct Vocabulary {
  std::vector<std::string> terms;              // id -> term
  std::unordered_map<std::string, int> index;  // term -> id

  int size() const { return static_cast<int>(terms.size()); }

  // Vocabulary whose terms are the decimal strings "0".."v-1".
  static Vocabulary numbered(int v);
};

struct Document {
  std::vector<int> tokens;  // one term id per token; duplicates allowed
  std::optional<double> response;

  int length() const { return static_cast<int>(tokens.size()); }
};

enum class TransformKind { None, Log, ShiftedLog };

// Response transform applied before fitting; predictions invert it when
// reporting on the original scale.
struct TransformSpec {
  TransformKind kind = TransformKind::None;
  double shift = 0.0;

  double apply(double y) const;
  double invert(double t) const;
};

struct Corpus {
  Vocabulary vocab;
  std::vector<Document> docs;
  TransformSpec transform;

  int num_docs() const { return static_cast<int>(docs.size()); }
  int vocab_size() const { return vocab.size(); }
  int num_labeled() const;
};

// Reads bag-of-words documents, one per line: "M id:count id:count ..."
// where M is the number of id:count pairs. Counts are expanded to
// per-token sequences in line order. responses_text holds one decimal
// literal or "NA" per document (an empty stream means no responses at
// all); vocab_text holds one term per line, line number = id. Without a
// vocabulary the ids are opaque and V = 1 + max id.
Corpus parse_corpus(std::istream& docs_text,
                    std::istream* responses_text = nullptr,
                    std::istream* vocab_text = nullptr);

struct PruneReport {
  Corpus corpus;
  std::vector<int> dropped_docs;  // original indices of emptied documents
  std::vector<int> kept_terms;    // previous id of each re-densified id
};

// Removes terms with document frequency > max_doc_frac * D or < min_doc_count,
// re-densifies ids, and drops documents left empty.
PruneReport prune_vocabulary(const Corpus& corpus, double max_doc_frac,
                             int min_doc_count);

Corpus transform_responses(const Corpus& corpus, TransformKind kind,
                           double shift = 0.0);

// Seeded random partition into k folds; the first (D mod k) folds get one
// extra document. Returns the fold id of each document.
std::vector<int> fold_assignments(int num_docs, int k, std::uint64_t seed);

std::vector<std::pair<Corpus, Corpus>> split_folds(const Corpus& corpus, int k,
                                                   std::uint64_t seed);

Corpus strip_responses(const Corpus& corpus);

void write_docs(const Corpus& corpus, std::ostream& out);
void write_responses(const Corpus& corpus, std::ostream& out);
void write_vocab(const Corpus& corpus, std::ostream& out);

}  // namespace slda
