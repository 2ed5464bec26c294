#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "deidkit/text.hpp"

namespace deidkit {

/// One corpus line: {doc_id, text, gold_spans:[{start,end,category,is_provider}]}.
AnnotatedDocument document_from_json(const nlohmann::json& j);
nlohmann::json document_to_json(const AnnotatedDocument& doc);

/// True for the `{"_meta": ...}` header line that tool outputs start with.
bool is_meta_record(const nlohmann::json& j);

/// Reads a whole JSONL corpus. Throws InputError naming the file and line on malformed input.
std::vector<AnnotatedDocument> read_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path, const std::vector<AnnotatedDocument>& docs);

/// Byte-offset index of a JSONL file keyed by doc_id, so documents can be visited in any order
/// without holding the corpus in memory.
class JsonlIndex {
 public:
  explicit JsonlIndex(std::filesystem::path path);

  const std::filesystem::path& path() const { return path_; }
  const std::map<std::string, std::uint64_t>& offsets() const { return offsets_; }
  bool contains(const std::string& doc_id) const { return offsets_.count(doc_id) != 0; }

  nlohmann::json read(const std::string& doc_id) const;

 private:
  std::filesystem::path path_;
  std::map<std::string, std::uint64_t> offsets_;
  mutable std::ifstream in_;
};

/// Ids present in exactly one of the two indexes, prefixed by "-" (left only) or "+" (right only).
std::vector<std::string> doc_id_difference(const JsonlIndex& left, const JsonlIndex& right);

}  // namespace deidkit
