#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deidkit {

/// A token of a document. Offsets are UTF-8 byte offsets into the document text, end exclusive.
struct Token {
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t index = 0;

  bool operator==(const Token&) const = default;
};

enum class PiiCategory {
  Name,
  Date,
  Age,
  Address,
  PostalCode,
  Phone,
  HealthNumber,
  Id,
  Location,
  Hospital,
  Other,
};

std::string_view to_string(PiiCategory c);
std::optional<PiiCategory> parse_category(std::string_view s);

struct PiiSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  PiiCategory category = PiiCategory::Other;
  bool is_provider = false;

  bool operator==(const PiiSpan&) const = default;
};

struct AnnotatedDocument {
  std::string doc_id;
  std::string text;
  std::vector<Token> tokens;
  std::vector<PiiSpan> gold_spans;
};

/// Splits on Unicode whitespace; every ASCII punctuation character becomes its own token.
std::vector<Token> tokenize(std::string_view text);

/// Unit-cost edit distance over Unicode code points.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// Builds a document, tokenizes it and checks the span invariants. Throws InputError.
AnnotatedDocument make_document(std::string doc_id, std::string text, std::vector<PiiSpan> gold_spans);

/// Checks token and span invariants of an existing document. Throws InputError.
void validate(const AnnotatedDocument& doc);

/// Decodes UTF-8 into code points; invalid bytes decode as U+FFFD one byte at a time.
std::u32string decode_utf8(std::string_view s);

}  // namespace deidkit
