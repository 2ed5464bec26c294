#include "deidkit/annotation_store.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "deidkit/errors.hpp"

namespace deidkit {

std::string SampleKey::to_string() const { return file_name + "#" + std::to_string(ordinal); }

std::optional<SampleKey> SampleKey::parse(std::string_view s) {
  const auto hash = s.rfind('#');
  if (hash == std::string_view::npos || hash + 1 == s.size()) return std::nullopt;
  const std::string_view num = s.substr(hash + 1);
  if (!std::all_of(num.begin(), num.end(), [](char c) { return c >= '0' && c <= '9'; })) return std::nullopt;
  try {
    return SampleKey{std::string(s.substr(0, hash)), std::stoull(std::string(num))};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

SampleFilter SampleFilter::parse(std::string_view s) {
  if (s.empty() || s == "all") return {};
  if (s == "unannotated") return {Kind::Unannotated, FpCategory::Unknown};
  if (auto c = parse_fp_category(s)) return {Kind::Category, *c};
  throw ValidationError("unknown filter '" + std::string(s) + "'");
}

AnnotationStore::AnnotationStore(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw InputError("cannot open " + path_.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  std::map<std::string, std::size_t> ordinals;
  for (auto& s : parse_annotation_csv(ss.str())) {
    SampleKey key{s.file_name, ordinals[s.file_name]++};
    samples_.push_back({std::move(key), std::move(s), 0});
  }
}

SamplePage AnnotationStore::list(const SampleFilter& filter, std::size_t page, std::size_t page_size) const {
  if (page == 0) throw RangeError("page numbers start at 1");
  if (page_size == 0 || page_size > 1000) throw RangeError("page_size must lie in [1, 1000]");
  std::shared_lock lock(mu_);
  SamplePage out;
  out.page = page;
  out.page_size = page_size;
  out.total = samples_.size();
  std::vector<const StoredSample*> matching;
  std::vector<const StoredSample*> ordered;
  for (const auto& s : samples_) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(), [](const StoredSample* a, const StoredSample* b) {
    return std::tie(a->key.file_name, a->key.ordinal) < std::tie(b->key.file_name, b->key.ordinal);
  });
  for (const StoredSample* sp : ordered) {
    const StoredSample& s = *sp;
    const bool annotated = s.sample.category != FpCategory::Unknown;
    out.annotated += annotated ? 1 : 0;
    const bool keep = filter.kind == SampleFilter::Kind::All ||
                      (filter.kind == SampleFilter::Kind::Unannotated && !annotated) ||
                      (filter.kind == SampleFilter::Kind::Category && s.sample.category == filter.category);
    if (keep) matching.push_back(&s);
  }
  out.total_matching = matching.size();
  const std::size_t pages = std::max<std::size_t>(1, (matching.size() + page_size - 1) / page_size);
  if (page > pages) throw RangeError("page " + std::to_string(page) + " is past the last page (" + std::to_string(pages) + ")");
  const std::size_t begin = (page - 1) * page_size;
  for (std::size_t i = begin; i < std::min(begin + page_size, matching.size()); ++i) out.items.push_back(*matching[i]);
  return out;
}

StoredSample AnnotationStore::annotate(const SampleKey& key, FpCategory category, Severity severity) {
  if (category == FpCategory::ClinicallyRelevant && severity == Severity::NotApplicable) {
    throw ValidationError("clinically relevant changes need a severity of High or Low");
  }
  if (category != FpCategory::ClinicallyRelevant && severity != Severity::NotApplicable) {
    throw ValidationError("severity is only accepted for clinically relevant changes");
  }
  std::unique_lock lock(mu_);
  auto it = std::find_if(samples_.begin(), samples_.end(), [&](const StoredSample& s) { return s.key == key; });
  if (it == samples_.end()) throw NotFoundError("no sample " + key.to_string());
  const StoredSample before = *it;
  it->sample.category = category;
  it->sample.severity = severity;
  ++it->version;
  try {
    persist_locked();
  } catch (...) {
    *it = before;
    throw;
  }
  return *it;
}

std::string AnnotationStore::export_csv() const {
  std::shared_lock lock(mu_);
  std::vector<FpSample> rows;
  for (const auto& s : samples_) rows.push_back(s.sample);
  return annotation_csv(rows);
}

AnnotationTally AnnotationStore::tally() const {
  std::shared_lock lock(mu_);
  std::vector<FpSample> rows;
  for (const auto& s : samples_) rows.push_back(s.sample);
  return tally_annotations(rows);
}

std::size_t AnnotationStore::size() const {
  std::shared_lock lock(mu_);
  return samples_.size();
}

void AnnotationStore::persist_locked() const {
  std::vector<FpSample> rows;
  for (const auto& s : samples_) rows.push_back(s.sample);
  const std::string csv = annotation_csv(rows);
  std::filesystem::path tmp = path_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << csv;
    out.flush();
    if (!out) throw InputError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path_);
}

nlohmann::json stored_sample_to_json(const StoredSample& s) {
  return {{"key", s.key.to_string()},
          {"file_name", s.sample.file_name},
          {"ordinal", s.key.ordinal},
          {"version", s.version},
          {"edit_distance", s.sample.edit_distance},
          {"original_token", s.sample.original_token},
          {"deid_token", s.sample.deid_token},
          {"context", s.sample.context},
          {"category", category_id(s.sample.category)},
          {"severity", s.sample.severity == Severity::NotApplicable ? std::string("NotApplicable")
                                                                     : std::string(severity_label(s.sample.severity))}};
}

}  // namespace deidkit
