#include "deidkit/text.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "deidkit/errors.hpp"

namespace deidkit {

namespace {

constexpr std::array<std::string_view, 11> kCategoryNames = {
    "Name", "Date", "Age", "Address", "PostalCode", "Phone", "HealthNumber", "Id", "Location", "Hospital", "Other",
};

// Decodes one code point starting at s[i]; returns it and its byte length.
std::pair<char32_t, std::size_t> decode_at(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) return {b0, 1};
  if ((b0 & 0xE0) == 0xC0 && b0 >= 0xC2) {
    const int c1 = cont(1);
    if (c1 >= 0) return {static_cast<char32_t>(((b0 & 0x1F) << 6) | c1), 2};
  } else if ((b0 & 0xF0) == 0xE0) {
    const int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) {
      const char32_t cp = ((b0 & 0x0F) << 12) | (c1 << 6) | c2;
      if (cp >= 0x800 && (cp < 0xD800 || cp > 0xDFFF)) return {cp, 3};
    }
  } else if ((b0 & 0xF8) == 0xF0) {
    const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
      const char32_t cp = ((b0 & 0x07) << 18) | (c1 << 12) | (c2 << 6) | c3;
      if (cp >= 0x10000 && cp <= 0x10FFFF) return {cp, 4};
    }
  }
  return {0xFFFD, 1};
}

bool is_space(char32_t c) {
  switch (c) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool is_punct(char32_t c) {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
         (c >= 0x7B && c <= 0x7E);
}

}  // namespace

std::string_view to_string(PiiCategory c) { return kCategoryNames[static_cast<std::size_t>(c)]; }

std::optional<PiiCategory> parse_category(std::string_view s) {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
    if (kCategoryNames[i] == s) return static_cast<PiiCategory>(i);
  }
  return std::nullopt;
}

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    auto [cp, len] = decode_at(s, i);
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t word_start = std::string_view::npos;
  auto flush = [&](std::size_t end) {
    if (word_start != std::string_view::npos) {
      tokens.push_back({std::string(text.substr(word_start, end - word_start)), word_start, end, tokens.size()});
      word_start = std::string_view::npos;
    }
  };
  for (std::size_t i = 0; i < text.size();) {
    auto [cp, len] = decode_at(text, i);
    if (is_space(cp)) {
      flush(i);
    } else if (is_punct(cp)) {
      flush(i);
      tokens.push_back({std::string(text.substr(i, len)), i, i + len, tokens.size()});
    } else if (word_start == std::string_view::npos) {
      word_start = i;
    }
    i += len;
  }
  flush(text.size());
  return tokens;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  const std::u32string s = decode_utf8(a);
  const std::u32string t = decode_utf8(b);
  if (s.empty()) return t.size();
  if (t.empty()) return s.size();
  std::vector<std::size_t> row(t.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= s.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= t.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (s[i - 1] == t[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[t.size()];
}

void validate(const AnnotatedDocument& doc) {
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    const Token& t = doc.tokens[i];
    if (t.end <= t.start || t.end > doc.text.size() || t.index != i ||
        doc.text.compare(t.start, t.end - t.start, t.text) != 0) {
      throw InputError("document '" + doc.doc_id + "': token " + std::to_string(i) + " is inconsistent with the text");
    }
    if (i > 0 && t.start < doc.tokens[i - 1].end) {
      throw InputError("document '" + doc.doc_id + "': tokens overlap at index " + std::to_string(i));
    }
  }
  std::vector<PiiSpan> spans = doc.gold_spans;
  std::sort(spans.begin(), spans.end(), [](const PiiSpan& x, const PiiSpan& y) { return x.start < y.start; });
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const PiiSpan& s = spans[i];
    if (s.end <= s.start || s.end > doc.text.size()) {
      throw InputError("document '" + doc.doc_id + "': gold span [" + std::to_string(s.start) + "," +
                       std::to_string(s.end) + ") is out of range");
    }
    if (i > 0 && s.start < spans[i - 1].end) {
      throw InputError("document '" + doc.doc_id + "': gold spans overlap at offset " + std::to_string(s.start));
    }
    const bool covered = std::any_of(doc.tokens.begin(), doc.tokens.end(),
                                     [&](const Token& t) { return t.start < s.end && s.start < t.end; });
    if (!covered) {
      throw InputError("document '" + doc.doc_id + "': gold span at offset " + std::to_string(s.start) +
                       " covers no token");
    }
  }
}

AnnotatedDocument make_document(std::string doc_id, std::string text, std::vector<PiiSpan> gold_spans) {
  AnnotatedDocument doc{std::move(doc_id), std::move(text), {}, std::move(gold_spans)};
  doc.tokens = tokenize(doc.text);
  validate(doc);
  return doc;
}

}  // namespace deidkit
