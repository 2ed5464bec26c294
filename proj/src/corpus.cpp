#include "deidkit/corpus.hpp"

#include "deidkit/errors.hpp"

namespace deidkit {

using nlohmann::json;

AnnotatedDocument document_from_json(const json& j) {
  if (!j.is_object() || !j.contains("doc_id") || !j.contains("text")) {
    throw InputError("corpus record needs doc_id and text");
  }
  std::vector<PiiSpan> spans;
  if (j.contains("gold_spans")) {
    for (const auto& s : j.at("gold_spans")) {
      const std::string cat = s.at("category").get<std::string>();
      auto parsed = parse_category(cat);
      if (!parsed) throw InputError("unknown PII category '" + cat + "'");
      spans.push_back({s.at("start").get<std::size_t>(), s.at("end").get<std::size_t>(), *parsed,
                       s.value("is_provider", false)});
    }
  }
  return make_document(j.at("doc_id").get<std::string>(), j.at("text").get<std::string>(), std::move(spans));
}

json document_to_json(const AnnotatedDocument& doc) {
  json spans = json::array();
  for (const auto& s : doc.gold_spans) {
    spans.push_back({{"start", s.start}, {"end", s.end}, {"category", to_string(s.category)},
                     {"is_provider", s.is_provider}});
  }
  return {{"doc_id", doc.doc_id}, {"text", doc.text}, {"gold_spans", spans}};
}

bool is_meta_record(const json& j) { return j.is_object() && j.contains("_meta"); }

std::vector<AnnotatedDocument> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<AnnotatedDocument> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      if (is_meta_record(j)) continue;
      docs.push_back(document_from_json(j));
    } catch (const std::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return docs;
}

void write_corpus(const std::filesystem::path& path, const std::vector<AnnotatedDocument>& docs) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  for (const auto& d : docs) out << document_to_json(d).dump() << '\n';
}

JsonlIndex::JsonlIndex(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw InputError("cannot open " + path_.string());
  std::string line;
  std::uint64_t offset = 0;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::uint64_t here = offset;
    offset += line.size() + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw InputError(path_.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (is_meta_record(j)) continue;
    if (!j.contains("doc_id") || !j["doc_id"].is_string()) {
      throw InputError(path_.string() + ":" + std::to_string(lineno) + ": record has no doc_id");
    }
    if (!offsets_.emplace(j["doc_id"].get<std::string>(), here).second) {
      throw InputError(path_.string() + ":" + std::to_string(lineno) + ": duplicate doc_id '" +
                       j["doc_id"].get<std::string>() + "'");
    }
  }
  in_.open(path_, std::ios::binary);
}

json JsonlIndex::read(const std::string& doc_id) const {
  auto it = offsets_.find(doc_id);
  if (it == offsets_.end()) throw NotFoundError("doc_id '" + doc_id + "' not in " + path_.string());
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(it->second));
  std::string line;
  std::getline(in_, line);
  return json::parse(line);
}

std::vector<std::string> doc_id_difference(const JsonlIndex& left, const JsonlIndex& right) {
  std::vector<std::string> diff;
  for (const auto& [id, _] : left.offsets()) {
    if (!right.contains(id)) diff.push_back("-" + id);
  }
  for (const auto& [id, _] : right.offsets()) {
    if (!left.contains(id)) diff.push_back("+" + id);
  }
  return diff;
}

}  // namespace deidkit
