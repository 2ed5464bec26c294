#include "deidkit/surrogate.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <exception>

#include "deidkit/errors.hpp"
#include "deidkit/hashing.hpp"

namespace deidkit {

namespace {

constexpr std::array<std::string_view, 24> kGivenNames = {
    "James", "Mary", "Robert", "Patricia", "John", "Jennifer", "Michael", "Linda",
    "David", "Elizabeth", "William", "Barbara", "Richard", "Susan", "Joseph", "Jessica",
    "Thomas", "Sarah", "Charles", "Karen", "Daniel", "Nancy", "Matthew", "Lisa",
};
constexpr std::array<std::string_view, 24> kFamilyNames = {
    "Smith", "Johnson", "Williams", "Brown", "Jones", "Garcia", "Miller", "Davis",
    "Rodriguez", "Martinez", "Hernandez", "Lopez", "Wilson", "Anderson", "Thomas", "Taylor",
    "Moore", "Jackson", "Martin", "Lee", "Thompson", "White", "Harris", "Clark",
};
constexpr std::array<std::string_view, 12> kStreets = {
    "Maple", "Oak", "Cedar", "Elm", "Pine", "Birch", "Willow", "Spruce", "Aspen", "Poplar", "Lakeview", "Hillcrest",
};
constexpr std::array<std::string_view, 6> kStreetKinds = {"Street", "Avenue", "Road", "Drive", "Crescent", "Way"};
constexpr std::array<std::string_view, 12> kCities = {
    "Calgary", "Edmonton", "Lethbridge", "Red Deer", "Medicine Hat", "Airdrie",
    "Springfield", "Riverside", "Fairview", "Georgetown", "Madison", "Clinton",
};
constexpr std::array<std::string_view, 4> kHospitalKinds = {"General Hospital", "Medical Centre", "Regional Hospital",
                                                            "Community Health Centre"};
constexpr std::array<std::string_view, 12> kMonths = {"January", "February", "March",     "April",   "May",      "June",
                                                      "July",    "August",   "September", "October", "November", "December"};
constexpr std::string_view kPostalLetters = "ABCEGHJKLMNPRSTVXY";

template <std::size_t N>
std::string_view pick(SeededRng& rng, const std::array<std::string_view, N>& items) {
  return items[rng.below(N)];
}

std::string digits(SeededRng& rng, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(static_cast<char>('0' + rng.below(10)));
  return s;
}

std::string two(std::int64_t v) { return (v < 10 ? "0" : "") + std::to_string(v); }

bool is_tag_char(char c) { return (c >= 'A' && c <= 'Z') || c == '_'; }

}  // namespace

std::map<std::string, PiiCategory, std::less<>> PlaceholderGrammar::default_tags() {
  return {
      {"NAME", PiiCategory::Name},       {"DATE", PiiCategory::Date},
      {"AGE", PiiCategory::Age},         {"ADDRESS", PiiCategory::Address},
      {"POSTAL_CODE", PiiCategory::PostalCode}, {"PHONE", PiiCategory::Phone},
      {"HEALTH_NUMBER", PiiCategory::HealthNumber}, {"ID", PiiCategory::Id},
      {"LOCATION", PiiCategory::Location}, {"HOSPITAL", PiiCategory::Hospital},
      {"OTHER", PiiCategory::Other},
  };
}

SurrogateGenerator::SurrogateGenerator(std::uint64_t seed, std::map<std::string, std::string> locale)
    : rng_(seed), locale_(std::move(locale)) {}

std::string SurrogateGenerator::draw(PiiCategory category) {
  SeededRng& r = rng_;
  switch (category) {
    case PiiCategory::Name:
      return std::string(pick(r, kGivenNames)) + " " + std::string(pick(r, kFamilyNames));
    case PiiCategory::Date: {
      const std::int64_t year = r.between(1950, 2023);
      const std::int64_t month = r.between(1, 12);
      const std::int64_t day = r.between(1, 28);
      switch (r.below(3)) {
        case 0: return std::to_string(year) + "-" + two(month) + "-" + two(day);
        case 1: return two(month) + "/" + two(day) + "/" + std::to_string(year);
        default: return std::string(kMonths[static_cast<std::size_t>(month - 1)]) + " " + std::to_string(day) + ", " +
                        std::to_string(year);
      }
    }
    case PiiCategory::Age:
      return std::to_string(r.between(18, 95));
    case PiiCategory::Address:
      return std::to_string(r.between(10, 9999)) + " " + std::string(pick(r, kStreets)) + " " +
             std::string(pick(r, kStreetKinds));
    case PiiCategory::PostalCode: {
      auto it = locale_.find("postal");
      if (it != locale_.end() && it->second == "us") return digits(r, 5);
      std::string s;
      for (int i = 0; i < 6; ++i) {
        if (i == 3) s.push_back(' ');
        s.push_back(i % 2 == 0 ? kPostalLetters[r.below(kPostalLetters.size())] : static_cast<char>('0' + r.below(10)));
      }
      return s;
    }
    case PiiCategory::Phone:
      return "(" + std::to_string(r.between(200, 999)) + ") " + digits(r, 3) + "-" + digits(r, 4);
    case PiiCategory::HealthNumber:
      return digits(r, 5) + "-" + digits(r, 4);
    case PiiCategory::Id:
      return digits(r, 8);
    case PiiCategory::Location:
      return std::string(pick(r, kCities));
    case PiiCategory::Hospital:
      return std::string(pick(r, kCities)) + " " + std::string(pick(r, kHospitalKinds));
    case PiiCategory::Other: {
      std::string s = "X";
      s += digits(r, 5);
      return s;
    }
  }
  return {};
}

SurrogateResult replace_placeholders(std::string_view text, const SurrogateConfig& cfg,
                                     const PlaceholderGrammar& grammar) {
  SurrogateGenerator gen(cfg.seed, cfg.locale);
  ReplacementMap map;
  std::map<std::string, std::string, std::less<>> seen;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != grammar.open) continue;
    const std::size_t close = text.find(grammar.close, i + 1);
    if (close == std::string_view::npos) break;
    const std::string_view body = text.substr(i + 1, close - i - 1);
    const std::size_t colon = body.find(':');
    std::string_view tag = body.substr(0, colon);
    if (tag.empty() || !std::all_of(tag.begin(), tag.end(), is_tag_char)) continue;
    bool provider = false;
    if (tag.starts_with("PROVIDER_")) {
      provider = true;
      tag.remove_prefix(9);
    }
    const auto known = grammar.tags.find(tag);
    if (known == grammar.tags.end()) {
      throw InputError("unknown placeholder tag '" + std::string(body.substr(0, colon)) + "' at offset " +
                       std::to_string(i));
    }
    Replacement rep;
    rep.start = i;
    rep.end = close + 1;
    rep.placeholder = std::string(text.substr(i, close + 1 - i));
    rep.category = known->second;
    rep.is_provider = provider;
    auto prior = seen.find(rep.placeholder);
    if (prior == seen.end()) prior = seen.emplace(rep.placeholder, gen.draw(rep.category)).first;
    rep.clean_surrogate = prior->second;
    rep.surrogate = prior->second;
    map.push_back(std::move(rep));
    i = close;
  }
  return render(text, std::move(map));
}

SurrogateResult render(std::string_view source_text, ReplacementMap map) {
  SurrogateResult out;
  std::size_t cursor = 0;
  for (const auto& rep : map) {
    out.text.append(source_text.substr(cursor, rep.start - cursor));
    const std::size_t begin = out.text.size();
    out.text.append(rep.surrogate);
    out.gold_spans.push_back({begin, out.text.size(), rep.category, rep.is_provider});
    cursor = rep.end;
  }
  out.text.append(source_text.substr(cursor));
  out.map = std::move(map);
  return out;
}

ReplacementMap inject_noise(ReplacementMap map, const SurrogateConfig& cfg) {
  if (cfg.noise_rate < 0.0 || cfg.noise_rate > 1.0) throw InputError("noise_rate must lie in [0,1]");
  const auto k = static_cast<std::size_t>(std::floor(cfg.noise_rate * static_cast<double>(map.size())));
  if (k == 0) return map;
  SeededRng rng(splitmix64(cfg.seed ^ 0x6e6f697365ULL));
  for (std::size_t idx : rng.sample_indices(map.size(), k)) {
    Replacement& rep = map[idx];
    std::string& s = rep.surrogate;
    std::vector<std::size_t> digit_pos, swap_pos;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (std::isdigit(static_cast<unsigned char>(s[i]))) digit_pos.push_back(i);
      if (i + 1 < s.size() && std::isalpha(static_cast<unsigned char>(s[i])) &&
          std::isalpha(static_cast<unsigned char>(s[i + 1])) && s[i] != s[i + 1]) {
        swap_pos.push_back(i);
      }
    }
    if (!digit_pos.empty()) {
      const std::size_t p = digit_pos[rng.below(digit_pos.size())];
      const int old = s[p] - '0';
      s[p] = static_cast<char>('0' + (old + 1 + static_cast<int>(rng.below(9))) % 10);
    } else if (!swap_pos.empty()) {
      const std::size_t p = swap_pos[rng.below(swap_pos.size())];
      std::swap(s[p], s[p + 1]);
    } else {
      throw InputError("surrogate '" + s + "' has no digit or letter pair to perturb");
    }
    rep.noised = true;
  }
  return map;
}

SurrogateDocument build_surrogate_document(const AnnotatedDocument& source, const SurrogateConfig& cfg,
                                           const PlaceholderGrammar& grammar) {
  SurrogateConfig doc_cfg = cfg;
  doc_cfg.seed = derive_seed(cfg.seed, source.doc_id);
  SurrogateResult replaced = replace_placeholders(source.text, doc_cfg, grammar);
  SurrogateResult noised = render(source.text, inject_noise(std::move(replaced.map), doc_cfg));

  // Shift annotations that were already present in the source.
  std::vector<PiiSpan> spans = noised.gold_spans;
  for (const PiiSpan& s : source.gold_spans) {
    std::ptrdiff_t delta = 0;
    for (const auto& rep : noised.map) {
      if (rep.start < s.end && s.start < rep.end) {
        throw InputError("document '" + source.doc_id + "': gold span at offset " + std::to_string(s.start) +
                         " overlaps placeholder " + rep.placeholder);
      }
      if (rep.end <= s.start) {
        delta += static_cast<std::ptrdiff_t>(rep.surrogate.size()) - static_cast<std::ptrdiff_t>(rep.end - rep.start);
      }
    }
    spans.push_back({static_cast<std::size_t>(static_cast<std::ptrdiff_t>(s.start) + delta),
                     static_cast<std::size_t>(static_cast<std::ptrdiff_t>(s.end) + delta), s.category, s.is_provider});
  }
  std::sort(spans.begin(), spans.end(), [](const PiiSpan& a, const PiiSpan& b) { return a.start < b.start; });
  return {make_document(source.doc_id, std::move(noised.text), std::move(spans)), std::move(noised.map)};
}

namespace {

std::vector<SurrogateDocument> build_all(const std::vector<AnnotatedDocument>& sources, const SurrogateConfig& cfg,
                                         const PlaceholderGrammar& grammar, bool parallel) {
  std::vector<SurrogateDocument> out(sources.size());
  std::vector<std::exception_ptr> errors(sources.size());
  const auto n = static_cast<std::ptrdiff_t>(sources.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = build_surrogate_document(sources[k], cfg, grammar);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace

std::vector<SurrogateDocument> build_surrogate_corpus(const std::vector<AnnotatedDocument>& sources,
                                                      const SurrogateConfig& cfg, const PlaceholderGrammar& grammar) {
  return build_all(sources, cfg, grammar, true);
}

std::vector<SurrogateDocument> build_surrogate_corpus_serial(const std::vector<AnnotatedDocument>& sources,
                                                             const SurrogateConfig& cfg,
                                                             const PlaceholderGrammar& grammar) {
  return build_all(sources, cfg, grammar, false);
}

nlohmann::json replacement_map_to_json(const std::string& doc_id, const ReplacementMap& map) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& r : map) {
    items.push_back({{"start", r.start},
                     {"end", r.end},
                     {"placeholder", r.placeholder},
                     {"category", to_string(r.category)},
                     {"is_provider", r.is_provider},
                     {"clean_surrogate", r.clean_surrogate},
                     {"surrogate", r.surrogate},
                     {"noised", r.noised}});
  }
  return {{"doc_id", doc_id}, {"replacements", items}};
}

}  // namespace deidkit
