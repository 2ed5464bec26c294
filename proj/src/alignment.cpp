#include "deidkit/alignment.hpp"

#include <algorithm>
#include <limits>

#include "deidkit/errors.hpp"

namespace deidkit {

namespace {

enum Move : std::uint8_t { kDiag = 1, kUp = 2, kLeft = 4 };

}  // namespace

void validate(const AlignmentParams& p) {
  if (p.match_score <= p.mismatch_penalty) throw InputError("alignment: match_score must exceed mismatch_penalty");
  if (p.gap_penalty >= 0) throw InputError("alignment: gap_penalty must be negative");
}

AlignmentPair align(std::span<const Token> original, std::span<const Token> deid, const AlignmentParams& params) {
  validate(params);
  const std::size_t n = original.size();
  const std::size_t m = deid.size();
  const std::size_t cols = m + 1;

  // Suffix formulation: cell (i, j) scores original[i..] against deid[j..]. Tracing forward from
  // (0, 0) applies the tie preference in reading order, so a substitution pairs with the earliest
  // candidate. Scores are kept one row at a time; the matrix only stores the optimal moves.
  std::vector<std::uint8_t> moves((n + 1) * cols, 0);
  std::vector<std::int64_t> below(cols), cur(cols);
  for (std::size_t j = m + 1; j-- > 0;) {
    below[j] = static_cast<std::int64_t>(m - j) * params.gap_penalty;
    moves[n * cols + j] = j == m ? 0 : kLeft;
  }
  for (std::size_t i = n; i-- > 0;) {
    cur[m] = static_cast<std::int64_t>(n - i) * params.gap_penalty;
    moves[i * cols + m] = kUp;
    const std::string& a = original[i].text;
    for (std::size_t j = m; j-- > 0;) {
      const std::int64_t diag = below[j + 1] + (a == deid[j].text ? params.match_score : params.mismatch_penalty);
      const std::int64_t up = below[j] + params.gap_penalty;
      const std::int64_t left = cur[j + 1] + params.gap_penalty;
      const std::int64_t best = std::max({diag, up, left});
      cur[j] = best;
      moves[i * cols + j] = static_cast<std::uint8_t>((diag == best ? kDiag : 0) | (up == best ? kUp : 0) |
                                                      (left == best ? kLeft : 0));
    }
    std::swap(below, cur);
  }

  AlignmentPair out;
  out.aligned_original.reserve(n + m);
  out.aligned_deid.reserve(n + m);
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    const std::uint8_t mv = moves[i * cols + j];
    if (mv & kDiag) {
      out.aligned_original.emplace_back(original[i++]);
      out.aligned_deid.emplace_back(deid[j++]);
    } else if (mv & kUp) {
      out.aligned_original.emplace_back(original[i++]);
      out.aligned_deid.emplace_back(std::nullopt);
    } else {
      out.aligned_original.emplace_back(std::nullopt);
      out.aligned_deid.emplace_back(deid[j++]);
    }
  }
  return out;
}

std::int64_t alignment_score(const AlignmentPair& pair, const AlignmentParams& params) {
  std::int64_t score = 0;
  for (std::size_t k = 0; k < pair.size(); ++k) {
    const auto& a = pair.aligned_original[k];
    const auto& b = pair.aligned_deid[k];
    if (a && b) {
      score += a->text == b->text ? params.match_score : params.mismatch_penalty;
    } else {
      score += params.gap_penalty;
    }
  }
  return score;
}

std::vector<Token> degap(std::span<const AlignedToken> side) {
  std::vector<Token> out;
  for (const auto& t : side) {
    if (t) out.push_back(*t);
  }
  return out;
}

}  // namespace deidkit
