#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "deidkit/alignment.hpp"
#include "deidkit/text.hpp"

namespace deidkit {

enum class MatchingMode {
  /// Any change to a gold-sensitive token is a true positive.
  Generous,
  /// A gold span is a true positive only if every one of its tokens changed; otherwise all of its
  /// tokens are false negatives.
  Conservative,
};

struct SchemaConfig {
  bool include_provider_pii = false;
  MatchingMode matching_mode = MatchingMode::Generous;
};

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    tn += o.tn;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Empty optional means Undefined (zero denominator).
using Ratio = std::optional<double>;

struct MetricsReport {
  Ratio accuracy, precision, recall, f1, fnr, fpr;

  bool all_undefined() const { return !accuracy && !precision && !recall && !f1 && !fnr && !fpr; }
};

struct TokenVerdict {
  std::size_t token_index = 0;
  bool gold_sensitive = false;
  /// Changed by the system, after the matching-mode rule has been applied.
  bool predicted_sensitive = false;
  /// Changed or deleted by the system, regardless of matching mode.
  bool altered = false;
  std::string original_text;
  /// Empty when the token was deleted.
  std::string deid_text;
};

/// One verdict per token of doc. Throws InputError if the alignment's original side does not
/// reproduce doc.tokens.
std::vector<TokenVerdict> classify_tokens(const AnnotatedDocument& doc, const AlignmentPair& alignment,
                                          const SchemaConfig& schema);

ConfusionCounts count(std::span<const TokenVerdict> verdicts);

MetricsReport compute_metrics(const ConfusionCounts& c);

struct LengthBin {
  std::size_t lower = 0;  // inclusive token count
  std::optional<std::size_t> upper;  // inclusive; empty for the overflow bin
  ConfusionCounts counts;
  MetricsReport metrics;
};

/// Bins are [0,e0], (e0,e1], ..., (e_last, inf). Throws InputError unless edges are strictly increasing.
std::vector<LengthBin> bin_by_length(std::span<const AnnotatedDocument> docs,
                                     std::span<const std::vector<TokenVerdict>> verdicts,
                                     std::span<const std::size_t> bin_edges);

/// A gold document paired with the system's rewritten text.
struct ScoringInput {
  const AnnotatedDocument* gold = nullptr;
  std::string deid_text;
};

struct CorpusScore {
  ConfusionCounts counts;
  std::vector<std::vector<TokenVerdict>> verdicts;  // parallel to the input order
};

/// Tokenize + align + classify every document, then pool the counts. Documents are processed with
/// OpenMP; results do not depend on thread count.
CorpusScore score_corpus(std::span<const ScoringInput> inputs, const SchemaConfig& schema,
                         const AlignmentParams& params = {});

/// Single-threaded reference for score_corpus.
CorpusScore score_corpus_serial(std::span<const ScoringInput> inputs, const SchemaConfig& schema,
                                const AlignmentParams& params = {});

nlohmann::json metrics_to_json(const ConfusionCounts& c, const MetricsReport& m);

/// Column layout of the classic TP/TN/FP/FN/A/R/P/F1 table. Undefined prints as "-".
std::string format_metrics_table(std::span<const std::pair<std::string, ConfusionCounts>> rows);

/// CSV with header bin_start,bin_end,tp,tn,fp,fn,f1.
std::string bins_to_csv(std::span<const LengthBin> bins);

}  // namespace deidkit
