#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "deidkit/alignment.hpp"
#include "deidkit/backends.hpp"
#include "deidkit/text.hpp"

namespace deidkit {

enum class SplitMode { FixedChunk, Sentence };

/// The built-in judge prompt. Slots: {original_chunk} and {deid_chunk}.
std::string default_prompt_template();

struct CireConfig {
  std::size_t chunk_size = 20;
  SplitMode split_mode = SplitMode::FixedChunk;
  std::string prompt_template = default_prompt_template();
  /// Judge calls per chunk while the reply contains neither "yes" nor "no".
  int max_parse_attempts = 3;
  /// Chunk judgments in flight at once.
  std::size_t parallelism = 1;
  AlignmentParams alignment;
};

struct ChunkPair {
  std::size_t index = 0;
  /// Window of aligned positions [begin, end).
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<std::string> original_tokens;
  std::vector<std::string> deid_tokens;
};

struct JudgeDecision {
  std::size_t chunk_index = 0;
  bool altered = false;
  std::string raw_response;
};

/// Emitted score is retention: 1 means nothing clinically meaningful was altered.
struct CireScore {
  std::string doc_id;
  std::optional<double> retention;
  std::size_t n_chunks = 0;
  std::size_t n_altered = 0;
  std::vector<JudgeDecision> decisions;
};

/// Consecutive windows of `size` aligned positions, the last one holding the remainder. Gaps are
/// stripped after windowing. Throws InputError if size == 0.
std::vector<ChunkPair> chunk_alignment(const AlignmentPair& pair, std::size_t size);

/// Windows that end after each position whose original-side token is '.', '!' or '?'.
std::vector<ChunkPair> chunk_alignment_by_sentence(const AlignmentPair& pair);

/// Substitutes both slots with the space-joined chunk tokens.
std::string fill_prompt(std::string_view tmpl, const ChunkPair& pair);

/// true for "yes", false for "no": whichever standalone word (case-insensitive) comes first.
std::optional<bool> parse_judge_answer(std::string_view response);

/// Asks the judge, re-asking while the answer is unparseable. Backend failures are rethrown with
/// the chunk index in the message; an unparseable final answer throws ProtocolError.
JudgeDecision judge_chunk_pair(const ChunkPair& pair, JudgeBackend& judge, const CireConfig& cfg,
                               const std::set<std::string, std::less<>>* pii_terms = nullptr);

/// Tokenize, align, chunk, judge every chunk, and average. Token texts under the document's gold
/// spans are passed to the judge as PII terms.
CireScore cire_score(const AnnotatedDocument& original, std::string_view deid_text, const CireConfig& cfg,
                     JudgeBackend& judge);

/// {doc_id, retention, n_chunks, n_altered, decisions:[{index, altered}]}
nlohmann::json cire_to_json(const CireScore& score);

}  // namespace deidkit
