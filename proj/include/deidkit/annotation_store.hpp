#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "deidkit/analysis.hpp"

namespace deidkit {

/// Identifies a sample: its file name and its ordinal among that file's samples.
struct SampleKey {
  std::string file_name;
  std::size_t ordinal = 0;

  /// "file_name#ordinal"
  std::string to_string() const;
  static std::optional<SampleKey> parse(std::string_view s);
  bool operator==(const SampleKey&) const = default;
};

struct StoredSample {
  SampleKey key;
  FpSample sample;
  /// Bumped on every accepted annotation; in-memory only.
  std::uint64_t version = 0;
};

struct SampleFilter {
  enum class Kind { All, Unannotated, Category } kind = Kind::All;
  FpCategory category = FpCategory::Unknown;

  /// "all", "unannotated", or a category (label or id). Throws ValidationError.
  static SampleFilter parse(std::string_view s);
};

struct SamplePage {
  std::vector<StoredSample> items;
  std::size_t total_matching = 0;
  std::size_t total = 0;
  std::size_t annotated = 0;
  std::size_t page = 1;
  std::size_t page_size = 50;
};

/// Annotation CSV backed store. Every accepted write is persisted (temp file + rename) before it is
/// acknowledged. Reads run concurrently; writes are serialised.
class AnnotationStore {
 public:
  /// Loads path if it exists, otherwise starts empty (and creates it on first write).
  explicit AnnotationStore(std::filesystem::path path);

  /// Ordered by (file_name, ordinal). Pages are 1-based. Throws RangeError for page 0, page_size outside [1, 1000], or a page past the end.
  SamplePage list(const SampleFilter& filter, std::size_t page, std::size_t page_size) const;

  /// Severity is accepted only for ClinicallyRelevant, where it is required. Throws NotFoundError or
  /// ValidationError. Last write wins; the returned version lets callers detect overwrites.
  StoredSample annotate(const SampleKey& key, FpCategory category, Severity severity);

  std::string export_csv() const;
  AnnotationTally tally() const;
  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  void persist_locked() const;

  std::filesystem::path path_;
  mutable std::shared_mutex mu_;
  std::vector<StoredSample> samples_;  // file order, so an untouched export is byte-identical
};

nlohmann::json stored_sample_to_json(const StoredSample& s);

}  // namespace deidkit
