#include "deidkit/cire.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <thread>

#include "deidkit/errors.hpp"

namespace deidkit {

std::string default_prompt_template() {
  return "You are a physician reviewing a clinical note before and after de-identification.\n"
         "Compare the two chunks below. De-identification may legitimately replace or remove names, dates,\n"
         "addresses, phone numbers, identifiers and similar personal information.\n"
         "Decide whether the de-identified chunk has altered any clinically meaningful information\n"
         "(medications, doses, results, history, procedures, findings, negations).\n"
         "Answer with a single word: Yes if clinically meaningful information was altered, otherwise No.\n\n"
         "original: {original_chunk}\n"
         "deid: {deid_chunk}\n";
}

namespace {

ChunkPair make_chunk(const AlignmentPair& pair, std::size_t index, std::size_t begin, std::size_t end) {
  ChunkPair c;
  c.index = index;
  c.begin = begin;
  c.end = end;
  for (std::size_t k = begin; k < end; ++k) {
    if (pair.aligned_original[k]) c.original_tokens.push_back(pair.aligned_original[k]->text);
    if (pair.aligned_deid[k]) c.deid_tokens.push_back(pair.aligned_deid[k]->text);
  }
  return c;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

template <typename E>
[[noreturn]] void rethrow_with_chunk(const E& e, std::size_t chunk) {
  throw E("chunk " + std::to_string(chunk) + ": " + e.what());
}

}  // namespace

std::vector<ChunkPair> chunk_alignment(const AlignmentPair& pair, std::size_t size) {
  if (size == 0) throw InputError("chunk size must be at least 1");
  std::vector<ChunkPair> chunks;
  for (std::size_t begin = 0; begin < pair.size(); begin += size) {
    chunks.push_back(make_chunk(pair, chunks.size(), begin, std::min(begin + size, pair.size())));
  }
  return chunks;
}

std::vector<ChunkPair> chunk_alignment_by_sentence(const AlignmentPair& pair) {
  std::vector<ChunkPair> chunks;
  std::size_t begin = 0;
  for (std::size_t k = 0; k < pair.size(); ++k) {
    const auto& t = pair.aligned_original[k];
    if (t && (t->text == "." || t->text == "!" || t->text == "?")) {
      chunks.push_back(make_chunk(pair, chunks.size(), begin, k + 1));
      begin = k + 1;
    }
  }
  if (begin < pair.size()) chunks.push_back(make_chunk(pair, chunks.size(), begin, pair.size()));
  return chunks;
}

std::string fill_prompt(std::string_view tmpl, const ChunkPair& pair) {
  // Fill both slots in one pass so a chunk containing a literal slot name is not substituted twice.
  const std::string original = join(pair.original_tokens);
  const std::string deid = join(pair.deid_tokens);
  constexpr std::string_view kOrig = "{original_chunk}";
  constexpr std::string_view kDeid = "{deid_chunk}";
  std::string out;
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl.substr(i, kOrig.size()) == kOrig) {
      out += original;
      i += kOrig.size();
    } else if (tmpl.substr(i, kDeid.size()) == kDeid) {
      out += deid;
      i += kDeid.size();
    } else {
      out.push_back(tmpl[i++]);
    }
  }
  return out;
}

std::optional<bool> parse_judge_answer(std::string_view response) {
  std::size_t i = 0;
  while (i < response.size()) {
    while (i < response.size() && !std::isalnum(static_cast<unsigned char>(response[i]))) ++i;
    const std::size_t start = i;
    while (i < response.size() && std::isalnum(static_cast<unsigned char>(response[i]))) ++i;
    if (i == start) break;
    std::string word(response.substr(start, i - start));
    std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) { return std::tolower(c); });
    if (word == "yes") return true;
    if (word == "no") return false;
  }
  return std::nullopt;
}

JudgeDecision judge_chunk_pair(const ChunkPair& pair, JudgeBackend& judge, const CireConfig& cfg,
                               const std::set<std::string, std::less<>>* pii_terms) {
  JudgeRequest request{pair.index, pair.original_tokens, pair.deid_tokens, fill_prompt(cfg.prompt_template, pair),
                       pii_terms};
  const int attempts = std::max(cfg.max_parse_attempts, 1);
  std::string reply;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    try {
      reply = judge.complete(request);
    } catch (const ProtocolError& e) {
      throw ProtocolError("chunk " + std::to_string(pair.index) + ": " + e.what(), e.status());
    } catch (const BackendError& e) {
      rethrow_with_chunk(e, pair.index);
    }
    if (auto verdict = parse_judge_answer(reply)) return {pair.index, *verdict, reply};
  }
  throw ProtocolError("chunk " + std::to_string(pair.index) + ": judge reply has no yes/no after " +
                      std::to_string(attempts) + " attempts: " + reply.substr(0, 200));
}

CireScore cire_score(const AnnotatedDocument& original, std::string_view deid_text, const CireConfig& cfg,
                     JudgeBackend& judge) {
  const auto deid_tokens = tokenize(deid_text);
  const AlignmentPair pair = align(original.tokens, deid_tokens, cfg.alignment);
  const std::vector<ChunkPair> chunks =
      cfg.split_mode == SplitMode::Sentence ? chunk_alignment_by_sentence(pair) : chunk_alignment(pair, cfg.chunk_size);

  std::set<std::string, std::less<>> pii_terms;
  for (const Token& t : original.tokens) {
    for (const PiiSpan& s : original.gold_spans) {
      if (t.start < s.end && s.start < t.end) {
        pii_terms.insert(t.text);
        break;
      }
    }
  }

  CireScore score;
  score.doc_id = original.doc_id;
  score.n_chunks = chunks.size();
  score.decisions.resize(chunks.size());
  std::vector<std::exception_ptr> errors(chunks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < chunks.size(); i = next++) {
      try {
        score.decisions[i] = judge_chunk_pair(chunks[i], judge, cfg, &pii_terms);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(cfg.parallelism, 1, std::max<std::size_t>(chunks.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (const auto& d : score.decisions) score.n_altered += d.altered ? 1 : 0;
  if (score.n_chunks > 0) {
    score.retention = 1.0 - static_cast<double>(score.n_altered) / static_cast<double>(score.n_chunks);
  }
  return score;
}

nlohmann::json cire_to_json(const CireScore& score) {
  nlohmann::json decisions = nlohmann::json::array();
  for (const auto& d : score.decisions) decisions.push_back({{"index", d.chunk_index}, {"altered", d.altered}});
  return {{"doc_id", score.doc_id},
          {"retention", score.retention ? nlohmann::json(*score.retention) : nlohmann::json(nullptr)},
          {"n_chunks", score.n_chunks},
          {"n_altered", score.n_altered},
          {"decisions", decisions}};
}

}  // namespace deidkit
