#include "slda/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "slda/errors.hpp"

namespace slda {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

bool parse_int(const std::string& s, long* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

bool parse_double(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

void format_double(std::ostream& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

Vocabulary Vocabulary::numbered(int v) {
  Vocabulary vocab;
  vocab.terms.reserve(v);
  for (int i = 0; i < v; ++i) {
    vocab.terms.push_back(std::to_string(i));
    vocab.index.emplace(vocab.terms.back(), i);
  }
  return vocab;
}

double TransformSpec::apply(double y) const {
  switch (kind) {
    case TransformKind::None: return y;
    case TransformKind::Log: return std::log(y);
    case TransformKind::ShiftedLog: return std::log(y + shift);
  }
  return y;
}

double TransformSpec::invert(double t) const {
  switch (kind) {
    case TransformKind::None: return t;
    case TransformKind::Log: return std::exp(t);
    case TransformKind::ShiftedLog: return std::exp(t) - shift;
  }
  return t;
}

int Corpus::num_labeled() const {
  int n = 0;
  for (const Document& doc : docs) {
    if (doc.response) ++n;
  }
  return n;
}

Corpus parse_corpus(std::istream& docs_text, std::istream* responses_text,
                    std::istream* vocab_text) {
  Corpus corpus;

  int declared_vocab = -1;
  if (vocab_text != nullptr) {
    std::string line;
    int lineno = 0;
    while (std::getline(*vocab_text, line)) {
      ++lineno;
      const std::string term = trim(line);
      if (term.empty()) {
        throw ParseError(lineno, "vocabulary: empty term");
      }
      if (corpus.vocab.index.count(term) != 0) {
        throw ParseError(lineno, "vocabulary: duplicate term '" + term + "'");
      }
      corpus.vocab.index.emplace(term, static_cast<int>(corpus.vocab.terms.size()));
      corpus.vocab.terms.push_back(term);
    }
    if (corpus.vocab.terms.empty()) {
      throw ParseError(1, "vocabulary: file declares no terms");
    }
    declared_vocab = corpus.vocab.size();
  }

  int max_id = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(docs_text, line)) {
    ++lineno;
    if (trim(line).empty()) {
      throw ParseError(lineno, "blank document line");
    }
    std::istringstream ss(line);
    std::string field;
    ss >> field;
    long declared_terms = 0;
    if (!parse_int(field, &declared_terms) || declared_terms < 1) {
      throw ParseError(lineno, "malformed line: expected a positive leading term count");
    }
    Document doc;
    long pairs = 0;
    while (ss >> field) {
      const auto colon = field.find(':');
      if (colon == std::string::npos) {
        throw ParseError(lineno, "malformed entry '" + field + "': expected id:count");
      }
      long id = 0;
      long count = 0;
      if (!parse_int(field.substr(0, colon), &id) || id < 0 ||
          !parse_int(field.substr(colon + 1), &count)) {
        throw ParseError(lineno, "malformed entry '" + field + "': expected id:count");
      }
      if (count <= 0) {
        throw ParseError(lineno, "nonpositive count in entry '" + field + "'");
      }
      if (declared_vocab >= 0 && id >= declared_vocab) {
        throw ParseError(lineno, "term id " + std::to_string(id) +
                                     " exceeds vocabulary size " +
                                     std::to_string(declared_vocab));
      }
      for (long c = 0; c < count; ++c) {
        doc.tokens.push_back(static_cast<int>(id));
      }
      max_id = std::max(max_id, static_cast<int>(id));
      ++pairs;
    }
    if (pairs != declared_terms) {
      throw ParseError(lineno, "malformed line: declared " +
                                   std::to_string(declared_terms) +
                                   " terms but found " + std::to_string(pairs));
    }
    corpus.docs.push_back(std::move(doc));
  }
  if (corpus.docs.empty()) {
    throw ParseError(1, "documents file declares no documents");
  }
  if (vocab_text == nullptr) {
    corpus.vocab = Vocabulary::numbered(max_id + 1);
  }

  if (responses_text != nullptr) {
    std::vector<std::optional<double>> responses;
    std::string rline;
    int rlineno = 0;
    while (std::getline(*responses_text, rline)) {
      ++rlineno;
      const std::string value = trim(rline);
      if (value == "NA") {
        responses.push_back(std::nullopt);
        continue;
      }
      double y = 0.0;
      if (!parse_double(value, &y)) {
        throw ParseError(rlineno, "responses: '" + value + "' is not a decimal literal");
      }
      responses.push_back(y);
    }
    // An empty responses stream means no responses at all.
    if (!responses.empty()) {
      if (responses.size() != corpus.docs.size()) {
        throw ParseError(static_cast<int>(std::min(responses.size(), corpus.docs.size())) + 1,
                         "response count mismatch: " + std::to_string(responses.size()) +
                             " responses for " + std::to_string(corpus.docs.size()) +
                             " documents");
      }
      for (std::size_t i = 0; i < responses.size(); ++i) {
        corpus.docs[i].response = responses[i];
      }
    }
  }
  return corpus;
}

PruneReport prune_vocabulary(const Corpus& corpus, double max_doc_frac,
                             int min_doc_count) {
  if (!(max_doc_frac > 0.0 && max_doc_frac <= 1.0)) {
    throw std::invalid_argument("prune_vocabulary: max_doc_frac must lie in (0, 1]");
  }
  if (min_doc_count < 0) {
    throw std::invalid_argument("prune_vocabulary: min_doc_count must be nonnegative");
  }
  const int v = corpus.vocab_size();
  const int d = corpus.num_docs();

  std::vector<int> doc_freq(v, 0);
  std::vector<int> last_doc(v, -1);
  for (int i = 0; i < d; ++i) {
    for (int t : corpus.docs[i].tokens) {
      if (last_doc[t] != i) {
        last_doc[t] = i;
        ++doc_freq[t];
      }
    }
  }

  const double max_df = max_doc_frac * d;
  std::vector<int> new_id(v, -1);
  PruneReport report;
  for (int t = 0; t < v; ++t) {
    if (doc_freq[t] > max_df || doc_freq[t] < min_doc_count) continue;
    new_id[t] = static_cast<int>(report.kept_terms.size());
    report.kept_terms.push_back(t);
  }
  if (report.kept_terms.empty()) {
    throw PruneEmptyError("empty vocabulary after pruning");
  }

  report.corpus.transform = corpus.transform;
  for (int t : report.kept_terms) {
    const std::string& term = corpus.vocab.terms[t];
    report.corpus.vocab.index.emplace(term, static_cast<int>(report.corpus.vocab.terms.size()));
    report.corpus.vocab.terms.push_back(term);
  }
  for (int i = 0; i < d; ++i) {
    Document doc;
    doc.response = corpus.docs[i].response;
    for (int t : corpus.docs[i].tokens) {
      if (new_id[t] >= 0) doc.tokens.push_back(new_id[t]);
    }
    if (doc.tokens.empty()) {
      report.dropped_docs.push_back(i);
    } else {
      report.corpus.docs.push_back(std::move(doc));
    }
  }
  return report;
}

Corpus transform_responses(const Corpus& corpus, TransformKind kind, double shift) {
  Corpus out = corpus;
  if (kind == TransformKind::None) {
    return out;
  }
  if (corpus.transform.kind != TransformKind::None) {
    throw std::invalid_argument("transform_responses: responses already transformed");
  }
  const double s = kind == TransformKind::ShiftedLog ? shift : 0.0;
  for (std::size_t i = 0; i < out.docs.size(); ++i) {
    if (!out.docs[i].response) continue;
    const double arg = *out.docs[i].response + s;
    if (!(arg > 0.0)) {
      throw std::invalid_argument("transform_responses: nonpositive log argument at document " +
                                  std::to_string(i));
    }
    out.docs[i].response = std::log(arg);
  }
  out.transform.kind = kind;
  out.transform.shift = s;
  return out;
}

std::vector<int> fold_assignments(int num_docs, int k, std::uint64_t seed) {
  if (k < 2) {
    throw std::invalid_argument("fold_assignments: need at least 2 folds");
  }
  if (k > num_docs) {
    throw std::invalid_argument("fold_assignments: more folds than documents");
  }
  std::vector<int> perm(num_docs);
  std::iota(perm.begin(), perm.end(), 0);
  // Fisher-Yates with explicit draws; std::shuffle's stream is
  // implementation-defined.
  std::mt19937_64 eng(seed);
  for (int i = num_docs - 1; i > 0; --i) {
    const int j = static_cast<int>(eng() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[i], perm[j]);
  }
  std::vector<int> fold(num_docs, -1);
  const int base = num_docs / k;
  const int extra = num_docs % k;
  int pos = 0;
  for (int f = 0; f < k; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    for (int s = 0; s < size; ++s) {
      fold[perm[pos++]] = f;
    }
  }
  return fold;
}

std::vector<std::pair<Corpus, Corpus>> split_folds(const Corpus& corpus, int k,
                                                   std::uint64_t seed) {
  const std::vector<int> fold = fold_assignments(corpus.num_docs(), k, seed);
  std::vector<std::pair<Corpus, Corpus>> out(k);
  for (int f = 0; f < k; ++f) {
    out[f].first.vocab = corpus.vocab;
    out[f].first.transform = corpus.transform;
    out[f].second.vocab = corpus.vocab;
    out[f].second.transform = corpus.transform;
  }
  for (int i = 0; i < corpus.num_docs(); ++i) {
    for (int f = 0; f < k; ++f) {
      if (fold[i] == f) {
        out[f].second.docs.push_back(corpus.docs[i]);
      } else {
        out[f].first.docs.push_back(corpus.docs[i]);
      }
    }
  }
  return out;
}

Corpus strip_responses(const Corpus& corpus) {
  Corpus out = corpus;
  for (Document& doc : out.docs) {
    doc.response.reset();
  }
  return out;
}

void write_docs(const Corpus& corpus, std::ostream& out) {
  for (const Document& doc : corpus.docs) {
    // Group counts by first appearance so a parse round trip reproduces
    // the token sequence of parsed corpora exactly.
    std::vector<std::pair<int, int>> counts;
    std::unordered_map<int, std::size_t> at;
    for (int t : doc.tokens) {
      auto it = at.find(t);
      if (it == at.end()) {
        at.emplace(t, counts.size());
        counts.emplace_back(t, 1);
      } else {
        ++counts[it->second].second;
      }
    }
    out << counts.size();
    for (const auto& [id, count] : counts) {
      out << ' ' << id << ':' << count;
    }
    out << '\n';
  }
}

void write_responses(const Corpus& corpus, std::ostream& out) {
  for (const Document& doc : corpus.docs) {
    if (doc.response) {
      format_double(out, *doc.response);
    } else {
      out << "NA";
    }
    out << '\n';
  }
}

void write_vocab(const Corpus& corpus, std::ostream& out) {
  for (const std::string& term : corpus.vocab.terms) {
    out << term << '\n';
  }
}

}  // namespace slda
