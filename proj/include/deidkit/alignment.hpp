#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "deidkit/text.hpp"

namespace deidkit {

struct AlignmentParams {
  int match_score = 2;
  int mismatch_penalty = -1;
  int gap_penalty = -2;
};

/// Throws InputError unless match_score > mismatch_penalty and gap_penalty < 0.
void validate(const AlignmentParams& params);

/// An empty optional is a gap.
using AlignedToken = std::optional<Token>;

struct AlignmentPair {
  std::vector<AlignedToken> aligned_original;
  std::vector<AlignedToken> aligned_deid;

  std::size_t size() const { return aligned_original.size(); }
};

/// Global (Needleman-Wunsch) alignment on token text. Among equal-score alignments, reading from
/// the start, each step prefers diagonal, then a gap in the deid side, then a gap in the original side.
AlignmentPair align(std::span<const Token> original, std::span<const Token> deid,
                    const AlignmentParams& params = {});

/// Score of an existing alignment under params.
std::int64_t alignment_score(const AlignmentPair& pair, const AlignmentParams& params = {});

/// The tokens of one side with gaps removed.
std::vector<Token> degap(std::span<const AlignedToken> side);

}  // namespace deidkit
