#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "deidkit/random.hpp"
#include "deidkit/text.hpp"

namespace deidkit {

struct SurrogateConfig {
  std::uint64_t seed = 0;
  /// Fraction of replaced surrogates that receive one edit.
  double noise_rate = 0.0;
  /// Opaque generator options. Recognised: "postal" = "ca" | "us".
  std::map<std::string, std::string> locale;
};

/// Placeholders look like `[TAG]` or `[TAG:identity]`. TAG is upper-case letters and underscores;
/// a `PROVIDER_` prefix marks provider identifiers. Bracketed text that is not upper-case is left alone.
struct PlaceholderGrammar {
  char open = '[';
  char close = ']';
  std::map<std::string, PiiCategory, std::less<>> tags = default_tags();

  static std::map<std::string, PiiCategory, std::less<>> default_tags();
};

struct Replacement {
  /// Placeholder location in the source text.
  std::size_t start = 0;
  std::size_t end = 0;
  std::string placeholder;
  PiiCategory category = PiiCategory::Other;
  bool is_provider = false;
  /// Surrogate as drawn, before noise.
  std::string clean_surrogate;
  /// Surrogate written to the output text.
  std::string surrogate;
  bool noised = false;
};

using ReplacementMap = std::vector<Replacement>;

/// Draws surrogates for each category from one seeded stream.
class SurrogateGenerator {
 public:
  SurrogateGenerator(std::uint64_t seed, std::map<std::string, std::string> locale = {});

  std::string draw(PiiCategory category);

 private:
  SeededRng rng_;
  std::map<std::string, std::string> locale_;
};

struct SurrogateResult {
  std::string text;
  ReplacementMap map;
  std::vector<PiiSpan> gold_spans;
};

/// Replaces every placeholder with a surrogate of its category. Surrogates are drawn in text order;
/// a repeated placeholder reuses its first surrogate. Throws InputError on an unknown tag.
SurrogateResult replace_placeholders(std::string_view text, const SurrogateConfig& cfg,
                                     const PlaceholderGrammar& grammar = {});

/// Applies one edit to floor(noise_rate * map.size()) surrogates picked by a seeded draw.
ReplacementMap inject_noise(ReplacementMap map, const SurrogateConfig& cfg);

/// Rewrites source_text with the map's current surrogates and returns the matching gold spans.
SurrogateResult render(std::string_view source_text, ReplacementMap map);

/// Full per-document build: placeholders, noise, pre-existing spans shifted to the new offsets.
/// The document seed is derive_seed(cfg.seed, doc_id).
struct SurrogateDocument {
  AnnotatedDocument doc;
  ReplacementMap map;
};
SurrogateDocument build_surrogate_document(const AnnotatedDocument& source, const SurrogateConfig& cfg,
                                           const PlaceholderGrammar& grammar = {});

/// OpenMP over documents; output order follows input order.
std::vector<SurrogateDocument> build_surrogate_corpus(const std::vector<AnnotatedDocument>& sources,
                                                      const SurrogateConfig& cfg,
                                                      const PlaceholderGrammar& grammar = {});
std::vector<SurrogateDocument> build_surrogate_corpus_serial(const std::vector<AnnotatedDocument>& sources,
                                                             const SurrogateConfig& cfg,
                                                             const PlaceholderGrammar& grammar = {});

nlohmann::json replacement_map_to_json(const std::string& doc_id, const ReplacementMap& map);

}  // namespace deidkit
