#include "deidkit/scoring.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "deidkit/errors.hpp"

namespace deidkit {

namespace {

Ratio ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

bool overlaps(const Token& t, const PiiSpan& s) { return t.start < s.end && s.start < t.end; }

std::string fmt2(const Ratio& r) {
  if (!r) return "-";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", *r);
  return buf;
}

}  // namespace

std::vector<TokenVerdict> classify_tokens(const AnnotatedDocument& doc, const AlignmentPair& alignment,
                                          const SchemaConfig& schema) {
  if (alignment.aligned_original.size() != alignment.aligned_deid.size()) {
    throw InputError("document '" + doc.doc_id + "': alignment sides differ in length");
  }
  std::vector<TokenVerdict> verdicts;
  verdicts.reserve(doc.tokens.size());
  for (std::size_t k = 0; k < alignment.size(); ++k) {
    const auto& orig = alignment.aligned_original[k];
    if (!orig) continue;
    const std::size_t idx = verdicts.size();
    if (idx >= doc.tokens.size() || !(*orig == doc.tokens[idx])) {
      throw InputError("document '" + doc.doc_id + "': alignment does not match the document tokens");
    }
    const auto& deid = alignment.aligned_deid[k];
    TokenVerdict v;
    v.token_index = idx;
    v.original_text = orig->text;
    v.deid_text = deid ? deid->text : std::string();
    v.altered = !deid || deid->text != orig->text;
    v.predicted_sensitive = v.altered;
    verdicts.push_back(std::move(v));
  }
  if (verdicts.size() != doc.tokens.size()) {
    throw InputError("document '" + doc.doc_id + "': alignment does not match the document tokens");
  }

  std::vector<const PiiSpan*> spans;
  for (const auto& s : doc.gold_spans) {
    if (!s.is_provider || schema.include_provider_pii) spans.push_back(&s);
  }
  std::vector<std::vector<std::size_t>> span_tokens(spans.size());
  for (std::size_t si = 0; si < spans.size(); ++si) {
    for (const Token& t : doc.tokens) {
      if (t.start >= spans[si]->end) break;
      if (overlaps(t, *spans[si])) {
        verdicts[t.index].gold_sensitive = true;
        span_tokens[si].push_back(t.index);
      }
    }
  }
  if (schema.matching_mode == MatchingMode::Conservative) {
    for (const auto& members : span_tokens) {
      const bool complete = std::all_of(members.begin(), members.end(), [&](std::size_t i) { return verdicts[i].altered; });
      if (!complete) {
        for (std::size_t i : members) verdicts[i].predicted_sensitive = false;
      }
    }
  }
  return verdicts;
}

ConfusionCounts count(std::span<const TokenVerdict> verdicts) {
  ConfusionCounts c;
  for (const auto& v : verdicts) {
    if (v.gold_sensitive) {
      (v.predicted_sensitive ? c.tp : c.fn)++;
    } else {
      (v.predicted_sensitive ? c.fp : c.tn)++;
    }
  }
  return c;
}

MetricsReport compute_metrics(const ConfusionCounts& c) {
  MetricsReport m;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  if (m.precision && m.recall && (*m.precision + *m.recall) > 0) {
    m.f1 = 2 * *m.precision * *m.recall / (*m.precision + *m.recall);
  }
  m.fnr = ratio(c.fn, c.fn + c.tp);
  m.fpr = ratio(c.fp, c.fp + c.tn);
  return m;
}

std::vector<LengthBin> bin_by_length(std::span<const AnnotatedDocument> docs,
                                     std::span<const std::vector<TokenVerdict>> verdicts,
                                     std::span<const std::size_t> bin_edges) {
  if (docs.size() != verdicts.size()) throw InputError("bin_by_length: one verdict list per document required");
  for (std::size_t i = 1; i < bin_edges.size(); ++i) {
    if (bin_edges[i] <= bin_edges[i - 1]) throw InputError("bin_by_length: bin edges must be strictly increasing");
  }
  std::vector<LengthBin> bins(bin_edges.size() + 1);
  for (std::size_t b = 0; b < bins.size(); ++b) {
    bins[b].lower = b == 0 ? 0 : bin_edges[b - 1] + 1;
    if (b < bin_edges.size()) bins[b].upper = bin_edges[b];
  }
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const std::size_t n = docs[d].tokens.size();
    const auto it = std::lower_bound(bin_edges.begin(), bin_edges.end(), n);
    bins[static_cast<std::size_t>(it - bin_edges.begin())].counts += count(verdicts[d]);
  }
  for (auto& b : bins) b.metrics = compute_metrics(b.counts);
  return bins;
}

namespace {

CorpusScore score_one_by_one(std::span<const ScoringInput> inputs, const SchemaConfig& schema,
                             const AlignmentParams& params, bool parallel) {
  validate(params);
  CorpusScore out;
  out.verdicts.resize(inputs.size());
  const auto n = static_cast<std::ptrdiff_t>(inputs.size());
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
  // Exceptions must not escape an OpenMP region; the first one is rethrown afterwards.
  std::vector<std::exception_ptr> errors(inputs.size());

#pragma omp parallel for schedule(dynamic) reduction(+ : tp, tn, fp, fn) if (parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const auto& in = inputs[static_cast<std::size_t>(i)];
      const auto deid_tokens = tokenize(in.deid_text);
      const auto pair = align(in.gold->tokens, deid_tokens, params);
      auto verdicts = classify_tokens(*in.gold, pair, schema);
      const ConfusionCounts c = count(verdicts);
      tp += c.tp;
      tn += c.tn;
      fp += c.fp;
      fn += c.fn;
      out.verdicts[static_cast<std::size_t>(i)] = std::move(verdicts);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  out.counts = {tp, tn, fp, fn};
  return out;
}

}  // namespace

CorpusScore score_corpus(std::span<const ScoringInput> inputs, const SchemaConfig& schema,
                         const AlignmentParams& params) {
  return score_one_by_one(inputs, schema, params, true);
}

CorpusScore score_corpus_serial(std::span<const ScoringInput> inputs, const SchemaConfig& schema,
                                const AlignmentParams& params) {
  return score_one_by_one(inputs, schema, params, false);
}

nlohmann::json metrics_to_json(const ConfusionCounts& c, const MetricsReport& m) {
  auto r = [](const Ratio& x) { return x ? nlohmann::json(*x) : nlohmann::json(nullptr); };
  return {{"tp", c.tp},
          {"tn", c.tn},
          {"fp", c.fp},
          {"fn", c.fn},
          {"accuracy", r(m.accuracy)},
          {"precision", r(m.precision)},
          {"recall", r(m.recall)},
          {"f1", r(m.f1)},
          {"fnr", r(m.fnr)},
          {"fpr", r(m.fpr)}};
}

std::string format_metrics_table(std::span<const std::pair<std::string, ConfusionCounts>> rows) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Model", "TP", "TN", "FP", "FN", "A", "R", "P", "F1"});
  for (const auto& [name, c] : rows) {
    const MetricsReport m = compute_metrics(c);
    cells.push_back({name, std::to_string(c.tp), std::to_string(c.tn), std::to_string(c.fp), std::to_string(c.fn),
                     fmt2(m.accuracy), fmt2(m.recall), fmt2(m.precision), fmt2(m.f1)});
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells) {
    for (std::size_t k = 0; k < row.size(); ++k) width[k] = std::max(width[k], row[k].size());
  }
  std::ostringstream out;
  for (const auto& row : cells) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k == 0) {
        out << row[k] << std::string(width[k] - row[k].size(), ' ');
      } else {
        out << "  " << std::string(width[k] - row[k].size(), ' ') << row[k];
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string bins_to_csv(std::span<const LengthBin> bins) {
  std::ostringstream out;
  out << "bin_start,bin_end,tp,tn,fp,fn,f1\n";
  for (const auto& b : bins) {
    out << b.lower << ',' << (b.upper ? std::to_string(*b.upper) : std::string("inf")) << ',' << b.counts.tp << ','
        << b.counts.tn << ',' << b.counts.fp << ',' << b.counts.fn << ',';
    if (b.metrics.f1) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f", *b.metrics.f1);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace deidkit
