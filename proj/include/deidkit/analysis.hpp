#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "deidkit/scoring.hpp"

namespace deidkit {

// ---------------------------------------------------------------------------
// Ground truth and correlation

struct GroundTruthLabel {
  std::string doc_id;
  std::size_t sentence_index = 0;
  bool clinically_changed = false;
};

/// Unchanged sentence pairs over all sentence pairs. Throws InputError when labels is empty.
double ground_truth_cir(std::span<const GroundTruthLabel> labels);

/// Sample Pearson coefficient. Empty when either vector is constant. Throws InputError on length
/// mismatch or fewer than two points.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// 1-based ranks; tied values share the mean of their ranks.
std::vector<double> average_ranks(std::span<const double> v);

/// Pearson of average ranks.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

struct CorrelationReport {
  std::string metric;
  std::optional<double> pearson_r;
  std::optional<double> spearman_rho;
  std::size_t n = 0;
};

/// Pairs scores by doc_id. Throws InputError listing the symmetric difference when the id sets differ.
CorrelationReport correlate(const std::string& metric, const std::map<std::string, double>& scores,
                            const std::map<std::string, double>& truth);

nlohmann::json correlation_to_json(const CorrelationReport& r);

// ---------------------------------------------------------------------------
// False-positive triage

enum class FpCategory {
  ClinicallyRelevant,
  ClinicallyIrrelevant,
  ProviderClinicInfo,
  InsensitiveIdentifier,
  CorrectDeidMissedByHuman,
  Unknown,
};
inline constexpr std::array<FpCategory, 6> kAllFpCategories = {
    FpCategory::ClinicallyRelevant,    FpCategory::ClinicallyIrrelevant,      FpCategory::ProviderClinicInfo,
    FpCategory::InsensitiveIdentifier, FpCategory::CorrectDeidMissedByHuman, FpCategory::Unknown,
};

enum class Severity { High, Low, NotApplicable };

/// Spreadsheet label, e.g. "Clinically Relevant Changes".
std::string_view category_label(FpCategory c);
/// Identifier form, e.g. "ClinicallyRelevant".
std::string_view category_id(FpCategory c);
/// Accepts either form.
std::optional<FpCategory> parse_fp_category(std::string_view s);

/// "High", "Low", or "" for NotApplicable.
std::string_view severity_label(Severity s);
/// Accepts "High", "Low", "", "NotApplicable".
std::optional<Severity> parse_severity(std::string_view s);

struct FpSample {
  std::string file_name;
  std::size_t edit_distance = 0;
  std::string original_token;
  std::string deid_token;
  std::string context;
  FpCategory category = FpCategory::Unknown;
  Severity severity = Severity::NotApplicable;

  bool operator==(const FpSample&) const = default;
};

/// Severity is High or Low exactly when the category is ClinicallyRelevant.
bool severity_consistent(FpCategory category, Severity severity);

/// "… / t-2 / t-1 / original / deid / t+1 / t+2 / …" with neighbours from the original side.
/// Neighbours past a document edge are dropped together with their separator.
std::string build_context(std::span<const TokenVerdict> verdicts, std::size_t i);

struct DocumentVerdicts {
  std::string file_name;
  std::vector<TokenVerdict> verdicts;
};

struct FpSampling {
  std::vector<FpSample> samples;
  /// Set when the corpus has no false positives at all.
  bool no_false_positives = false;
};

/// Token indices that are false positives (predicted but not gold sensitive).
std::vector<std::size_t> false_positive_indices(std::span<const TokenVerdict> verdicts);

FpSample make_fp_sample(const std::string& file_name, std::span<const TokenVerdict> verdicts, std::size_t i);

/// Sorted ordinals of the false positives to keep, out of `total` numbered in corpus order.
/// Lets a caller sample in two passes without holding every verdict.
std::vector<std::size_t> pick_false_positives(std::size_t total, std::size_t n, std::uint64_t seed);

/// Uniform sample without replacement of min(n, #FP) false positives, returned in corpus order.
FpSampling sample_false_positives(std::span<const DocumentVerdicts> corpus, std::size_t n, std::uint64_t seed);

struct AnnotationTally {
  std::map<FpCategory, std::size_t> per_category;
  std::size_t total = 0;
  std::size_t low = 0;
  std::size_t high = 0;

  std::size_t crc() const;
  /// CRC share of all samples in whole percent, rounded half away from zero.
  long crc_percent() const;
  /// e.g. "89 (18)"
  std::string crc_string() const;
};

AnnotationTally tally_annotations(std::span<const FpSample> samples);
nlohmann::json tally_to_json(const AnnotationTally& t);

/// Header: file_name,edit_distance,original_token,deid_token,context,category,severity
inline constexpr std::string_view kAnnotationCsvHeader =
    "file_name,edit_distance,original_token,deid_token,context,category,severity";

std::string annotation_csv(std::span<const FpSample> samples);
/// Throws InputError on a bad header, unknown category/severity, or an inconsistent severity.
std::vector<FpSample> parse_annotation_csv(std::string_view text);

}  // namespace deidkit
