#pragma once

#include <cctype>
#include <random>
#include <string>
#include <vector>

#include "deidkit/text.hpp"

namespace fixtures {

inline std::vector<deidkit::Token> toks(const std::vector<std::string>& texts) {
  std::vector<deidkit::Token> out;
  std::size_t pos = 0;
  for (const auto& t : texts) {
    out.push_back({t, pos, pos + t.size(), out.size()});
    pos += t.size() + 1;
  }
  return out;
}

inline std::string random_word(std::mt19937_64& rng, std::size_t max_len, const std::string& alphabet) {
  std::size_t len = rng() % (max_len + 1);
  std::string s;
  for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
  return s;
}

inline std::vector<std::string> random_sequence(std::mt19937_64& rng, std::size_t max_len, const std::string& alphabet) {
  std::vector<std::string> out(rng() % (max_len + 1));
  for (auto& s : out) s = std::string(1, alphabet[rng() % alphabet.size()]);
  return out;
}

/// Equal, or one digit substitution, or one adjacent transposition: the edits noise may apply.
inline bool within_one_permitted_edit(const std::string& clean, const std::string& noised) {
  if (clean == noised) return true;
  if (clean.size() != noised.size()) return false;
  std::vector<std::size_t> diff;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    if (clean[i] != noised[i]) diff.push_back(i);
  }
  if (diff.size() == 1) return std::isdigit(static_cast<unsigned char>(clean[diff[0]])) &&
                               std::isdigit(static_cast<unsigned char>(noised[diff[0]]));
  return diff.size() == 2 && diff[1] == diff[0] + 1 && clean[diff[0]] == noised[diff[1]] &&
         clean[diff[1]] == noised[diff[0]];
}

}  // namespace fixtures
