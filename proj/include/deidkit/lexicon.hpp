#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>

namespace deidkit {

/// Case-insensitive set of clinical terms (drugs, findings, procedures, units).
class ClinicalLexicon {
 public:
  ClinicalLexicon() = default;
  explicit ClinicalLexicon(std::set<std::string> terms);

  /// Built-in list shipped with the tool (also in data/clinical_lexicon.txt).
  static ClinicalLexicon builtin();
  /// One term per line; '#' starts a comment.
  static ClinicalLexicon load(const std::filesystem::path& path);

  bool contains(std::string_view token) const;
  std::size_t size() const { return terms_.size(); }
  const std::set<std::string, std::less<>>& terms() const { return terms_; }

 private:
  std::set<std::string, std::less<>> terms_;
};

std::string to_lower_ascii(std::string_view s);

/// Integer or decimal number, e.g. "81", "0.5".
bool is_numeric_token(std::string_view token);

}  // namespace deidkit
