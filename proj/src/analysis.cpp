#include "deidkit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "deidkit/csv.hpp"
#include "deidkit/errors.hpp"
#include "deidkit/random.hpp"

namespace deidkit {

double ground_truth_cir(std::span<const GroundTruthLabel> labels) {
  if (labels.empty()) throw InputError("ground truth CIR needs at least one sentence label");
  const auto unchanged = std::count_if(labels.begin(), labels.end(), [](const auto& l) { return !l.clinically_changed; });
  return static_cast<double>(unchanged) / static_cast<double>(labels.size());
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("pearson: vectors differ in length");
  if (x.size() < 2) throw InputError("pearson: need at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("spearman: vectors differ in length");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

CorrelationReport correlate(const std::string& metric, const std::map<std::string, double>& scores,
                            const std::map<std::string, double>& truth) {
  std::vector<std::string> diff;
  for (const auto& [id, _] : scores) {
    if (!truth.count(id)) diff.push_back(id);
  }
  for (const auto& [id, _] : truth) {
    if (!scores.count(id)) diff.push_back(id);
  }
  if (!diff.empty()) {
    std::string msg = "correlate: doc_id sets differ:";
    for (const auto& d : diff) msg += " " + d;
    throw InputError(msg);
  }
  std::vector<double> x, y;
  for (const auto& [id, s] : scores) {
    x.push_back(s);
    y.push_back(truth.at(id));
  }
  return {metric, pearson(x, y), spearman(x, y), x.size()};
}

nlohmann::json correlation_to_json(const CorrelationReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"metric", r.metric}, {"pearson", opt(r.pearson_r)}, {"spearman", opt(r.spearman_rho)}, {"n", r.n}};
}

// ---------------------------------------------------------------------------

namespace {

struct CategoryNames {
  FpCategory category;
  std::string_view label;
  std::string_view id;
};

constexpr std::array<CategoryNames, 6> kCategoryNames = {{
    {FpCategory::ClinicallyRelevant, "Clinically Relevant Changes", "ClinicallyRelevant"},
    {FpCategory::ClinicallyIrrelevant, "Clinically Irrelevant Changes", "ClinicallyIrrelevant"},
    {FpCategory::ProviderClinicInfo, "Provider/Clinic Information", "ProviderClinicInfo"},
    {FpCategory::InsensitiveIdentifier, "Insensitive Identifier", "InsensitiveIdentifier"},
    {FpCategory::CorrectDeidMissedByHuman, "Correct De-identification Missed by Human", "CorrectDeidMissedByHuman"},
    {FpCategory::Unknown, "Unknown", "Unknown"},
}};

constexpr std::string_view kEllipsis = "\xE2\x80\xA6";  // U+2026

}  // namespace

std::string_view category_label(FpCategory c) { return kCategoryNames[static_cast<std::size_t>(c)].label; }
std::string_view category_id(FpCategory c) { return kCategoryNames[static_cast<std::size_t>(c)].id; }

std::optional<FpCategory> parse_fp_category(std::string_view s) {
  for (const auto& n : kCategoryNames) {
    if (n.label == s || n.id == s) return n.category;
  }
  return std::nullopt;
}

std::string_view severity_label(Severity s) {
  switch (s) {
    case Severity::High: return "High";
    case Severity::Low: return "Low";
    case Severity::NotApplicable: return "";
  }
  return "";
}

std::optional<Severity> parse_severity(std::string_view s) {
  if (s == "High") return Severity::High;
  if (s == "Low") return Severity::Low;
  if (s.empty() || s == "NotApplicable") return Severity::NotApplicable;
  return std::nullopt;
}

bool severity_consistent(FpCategory category, Severity severity) {
  return (category == FpCategory::ClinicallyRelevant) == (severity != Severity::NotApplicable);
}

std::string build_context(std::span<const TokenVerdict> verdicts, std::size_t i) {
  if (i >= verdicts.size()) throw RangeError("build_context: index out of range");
  std::string out(kEllipsis);
  auto slot = [&](std::string_view s) {
    out += " / ";
    out += s;
  };
  for (std::size_t back = 2; back >= 1; --back) {
    if (i >= back) slot(verdicts[i - back].original_text);
  }
  slot(verdicts[i].original_text);
  slot(verdicts[i].deid_text);
  for (std::size_t fwd = 1; fwd <= 2; ++fwd) {
    if (i + fwd < verdicts.size()) slot(verdicts[i + fwd].original_text);
  }
  out += " / ";
  out += kEllipsis;
  return out;
}

std::vector<std::size_t> false_positive_indices(std::span<const TokenVerdict> verdicts) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    if (!verdicts[i].gold_sensitive && verdicts[i].predicted_sensitive) out.push_back(i);
  }
  return out;
}

FpSample make_fp_sample(const std::string& file_name, std::span<const TokenVerdict> verdicts, std::size_t i) {
  if (i >= verdicts.size()) throw RangeError("token index out of range");
  FpSample s;
  s.file_name = file_name;
  s.original_token = verdicts[i].original_text;
  s.deid_token = verdicts[i].deid_text;
  s.edit_distance = levenshtein(s.original_token, s.deid_token);
  s.context = build_context(verdicts, i);
  return s;
}

std::vector<std::size_t> pick_false_positives(std::size_t total, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InputError("sample size must be at least 1");
  SeededRng rng(seed);
  auto picked = rng.sample_indices(total, n);
  std::sort(picked.begin(), picked.end());
  return picked;
}

FpSampling sample_false_positives(std::span<const DocumentVerdicts> corpus, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InputError("sample size must be at least 1");
  std::vector<std::pair<std::size_t, std::size_t>> fps;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (std::size_t i : false_positive_indices(corpus[d].verdicts)) fps.emplace_back(d, i);
  }
  FpSampling out;
  if (fps.empty()) {
    out.no_false_positives = true;
    return out;
  }
  for (std::size_t k : pick_false_positives(fps.size(), n, seed)) {
    const auto [d, i] = fps[k];
    out.samples.push_back(make_fp_sample(corpus[d].file_name, corpus[d].verdicts, i));
  }
  return out;
}

std::size_t AnnotationTally::crc() const {
  auto it = per_category.find(FpCategory::ClinicallyRelevant);
  return it == per_category.end() ? 0 : it->second;
}

long AnnotationTally::crc_percent() const {
  if (total == 0) return 0;
  return std::lround(100.0 * static_cast<double>(crc()) / static_cast<double>(total));
}

std::string AnnotationTally::crc_string() const {
  return std::to_string(crc()) + " (" + std::to_string(crc_percent()) + ")";
}

AnnotationTally tally_annotations(std::span<const FpSample> samples) {
  AnnotationTally t;
  for (FpCategory c : kAllFpCategories) t.per_category[c] = 0;
  for (const auto& s : samples) {
    ++t.per_category[s.category];
    ++t.total;
    if (s.category == FpCategory::ClinicallyRelevant) {
      if (s.severity == Severity::High) ++t.high;
      if (s.severity == Severity::Low) ++t.low;
    }
  }
  return t;
}

nlohmann::json tally_to_json(const AnnotationTally& t) {
  nlohmann::json cats = nlohmann::json::object();
  for (const auto& [c, n] : t.per_category) cats[std::string(category_id(c))] = n;
  return {{"total", t.total}, {"categories", cats},      {"crc", t.crc()},
          {"crc_percent", t.crc_percent()}, {"crc_string", t.crc_string()}, {"low", t.low}, {"high", t.high}};
}

std::string annotation_csv(std::span<const FpSample> samples) {
  std::string out(kAnnotationCsvHeader);
  out.push_back('\n');
  for (const auto& s : samples) {
    out += csv_row({s.file_name, std::to_string(s.edit_distance), s.original_token, s.deid_token, s.context,
                    std::string(category_label(s.category)), std::string(severity_label(s.severity))});
  }
  return out;
}

std::vector<FpSample> parse_annotation_csv(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  auto rows = parse_csv(text);
  if (rows.empty()) throw InputError("annotation CSV is empty");
  if (csv_row(rows.front()) != std::string(kAnnotationCsvHeader) + "\n") {
    throw InputError("annotation CSV header must be: " + std::string(kAnnotationCsvHeader));
  }
  std::vector<FpSample> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() == 1 && f[0].empty()) continue;
    const std::string where = "annotation CSV row " + std::to_string(r + 1);
    if (f.size() != 7) throw InputError(where + ": expected 7 fields");
    FpSample s;
    s.file_name = f[0];
    try {
      std::size_t used = 0;
      s.edit_distance = std::stoull(f[1], &used);
      if (used != f[1].size()) throw std::invalid_argument(f[1]);
    } catch (const std::exception&) {
      throw InputError(where + ": edit_distance is not a non-negative integer");
    }
    s.original_token = f[2];
    s.deid_token = f[3];
    s.context = f[4];
    auto cat = parse_fp_category(f[5]);
    if (!cat) throw InputError(where + ": unknown category '" + f[5] + "'");
    auto sev = parse_severity(f[6]);
    if (!sev) throw InputError(where + ": unknown severity '" + f[6] + "'");
    if (!severity_consistent(*cat, *sev)) {
      throw InputError(where + ": severity must be High/Low exactly for clinically relevant changes");
    }
    s.category = *cat;
    s.severity = *sev;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace deidkit
