#include "deidkit/backends.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "deidkit/errors.hpp"
#include "deidkit/hashing.hpp"
#include "deidkit/text.hpp"

namespace deidkit {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Transport

std::chrono::milliseconds RetryPolicy::backoff(int retry) const {
  if (retry < 1) return std::chrono::milliseconds{0};
  const double raw = static_cast<double>(initial_backoff.count()) * std::pow(std::max(multiplier, 1.0), retry - 1);
  const double capped = std::min(raw, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds{static_cast<std::int64_t>(std::max(capped, 0.0))};
}

HttpPoster::HttpPoster(HttpEndpoint endpoint, RetryPolicy policy, std::size_t max_in_flight, Sleeper sleeper)
    : endpoint_(std::move(endpoint)),
      policy_(policy),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      in_flight_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(max_in_flight, 1, 1024))) {
  if (policy_.max_attempts < 1) throw InputError("retry.max_attempts must be at least 1");
}

HttpPoster::~HttpPoster() = default;

std::size_t HttpPoster::attempts_made() const {
  std::lock_guard lock(mu_);
  return attempts_;
}

std::string HttpPoster::post(const std::string& body, const std::string& content_type) {
  httplib::Headers headers;
  for (const auto& [k, v] : endpoint_.headers) headers.emplace(k, v);

  std::string last_failure;
  for (int attempt = 1; attempt <= policy_.max_attempts; ++attempt) {
    std::chrono::milliseconds floor{0};
    {
      in_flight_.acquire();
      struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
      } release{in_flight_};
      {
        std::lock_guard lock(mu_);
        ++attempts_;
      }
      httplib::Client client(endpoint_.base_url);
      client.set_connection_timeout(endpoint_.timeout);
      client.set_read_timeout(endpoint_.timeout);
      client.set_write_timeout(endpoint_.timeout);
      auto res = client.Post(endpoint_.path, headers, body, content_type);
      if (!res) {
        last_failure = "transport failure: " + httplib::to_string(res.error());
      } else if (res->status >= 200 && res->status < 300) {
        return res->body;
      } else if (res->status == 429 || res->status >= 500) {
        last_failure = "status " + std::to_string(res->status);
        if (res->has_header("Retry-After")) {
          try {
            floor = std::chrono::seconds{std::stoll(res->get_header_value("Retry-After"))};
          } catch (const std::exception&) {
            // HTTP-date form is not supported; fall back to the policy backoff.
          }
        }
      } else {
        throw ProtocolError(endpoint_.base_url + endpoint_.path + " answered status " + std::to_string(res->status),
                            res->status);
      }
    }
    if (attempt < policy_.max_attempts) sleeper_(std::max(policy_.backoff(attempt), floor));
  }
  throw BackendError(endpoint_.base_url + endpoint_.path + " failed after " + std::to_string(policy_.max_attempts) +
                     " attempts (" + last_failure + ")");
}

namespace {

HttpEndpoint with_credentials(HttpEndpoint ep, const std::string& env_name) {
  if (!env_name.empty()) {
    const char* key = std::getenv(env_name.c_str());
    if (key == nullptr || *key == '\0') throw InputError("environment variable " + env_name + " is not set");
    ep.headers["Authorization"] = std::string("Bearer ") + key;
  }
  return ep;
}

}  // namespace

// ---------------------------------------------------------------------------
// Judges

RemoteChatJudge::RemoteChatJudge(RemoteChatConfig cfg, Sleeper sleeper)
    : cfg_(std::move(cfg)),
      poster_(with_credentials(cfg_.endpoint, cfg_.api_key_env), cfg_.retry, cfg_.max_in_flight, std::move(sleeper)) {}

std::string RemoteChatJudge::complete(const JudgeRequest& request) {
  json body = cfg_.passthrough.is_object() ? cfg_.passthrough : json::object();
  if (!cfg_.model.empty()) body["model"] = cfg_.model;
  body["messages"] = json::array({{{"role", "user"}, {"content", request.prompt}}});
  std::string reply = poster_.post(body.dump());
  if (cfg_.response_pointer.empty()) return reply;
  try {
    const json parsed = json::parse(reply);
    const json& v = parsed.at(json::json_pointer(cfg_.response_pointer));
    return v.is_string() ? v.get<std::string>() : v.dump();
  } catch (const std::exception& e) {
    throw ProtocolError("judge response lacks " + cfg_.response_pointer + ": " + e.what());
  }
}

std::string oracle_judge(std::span<const std::string> original_chunk, std::span<const std::string> deid_chunk,
                         const ClinicalLexicon& lexicon, const std::set<std::string, std::less<>>& pii_tags,
                         const std::set<std::string, std::less<>>* pii_terms) {
  std::multiset<std::string_view> remaining(deid_chunk.begin(), deid_chunk.end());
  for (const std::string& t : original_chunk) {
    auto it = remaining.find(t);
    if (it != remaining.end()) {
      remaining.erase(it);
      continue;
    }
    if (pii_tags.count(t) || (pii_terms && pii_terms->count(t))) continue;
    if (lexicon.contains(t) || is_numeric_token(t)) return "yes";
  }
  return "no";
}

std::string OracleJudge::complete(const JudgeRequest& r) {
  return oracle_judge(r.original_tokens, r.deid_tokens, lexicon_, pii_tags_, r.pii_terms);
}

std::string prompt_key(const std::string& prompt) { return to_hex(fnv1a(prompt)); }

namespace {

std::map<std::string, std::string> read_fixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open replay fixture " + path.string());
  json j;
  try {
    j = json::parse(in);
    return j.at("responses").get<std::map<std::string, std::string>>();
  } catch (const std::exception& e) {
    throw InputError("malformed replay fixture " + path.string() + ": " + e.what());
  }
}

}  // namespace

ReplayJudge::ReplayJudge(const std::filesystem::path& fixture) : responses_(read_fixture(fixture)) {}

std::string ReplayJudge::complete(const JudgeRequest& request) {
  const std::string key = prompt_key(request.prompt);
  auto it = responses_.find(key);
  if (it == responses_.end()) throw BackendError("no recorded judge response for prompt " + key);
  return it->second;
}

std::string RecordingJudge::complete(const JudgeRequest& request) {
  std::string answer = inner_->complete(request);
  std::lock_guard lock(mu_);
  recorded_[prompt_key(request.prompt)] = answer;
  return answer;
}

void RecordingJudge::save() const {
  std::map<std::string, std::string> merged;
  if (std::filesystem::exists(fixture_)) merged = read_fixture(fixture_);
  {
    std::lock_guard lock(mu_);
    for (const auto& [k, v] : recorded_) merged[k] = v;
  }
  std::ofstream out(fixture_);
  if (!out) throw InputError("cannot write replay fixture " + fixture_.string());
  out << json{{"responses", merged}}.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// ICD

std::vector<CodePrediction> stub_icd_predict(const std::string& text, std::span<const std::string> vocabulary,
                                             std::uint64_t seed, const ClinicalLexicon& lexicon) {
  std::vector<std::string> clinical;
  for (const Token& t : tokenize(text)) {
    if (lexicon.contains(t.text)) clinical.push_back(to_lower_ascii(t.text));
  }
  std::sort(clinical.begin(), clinical.end());

  std::vector<CodePrediction> out;
  out.reserve(vocabulary.size());
  if (clinical.empty()) {
    for (const auto& code : vocabulary) out.push_back({code, 0.0});
    return out;
  }
  std::uint64_t base = fnv1a(std::string_view(reinterpret_cast<const char*>(&seed), sizeof seed));
  for (const auto& t : clinical) {
    base = fnv1a(t, base);
    base = fnv1a("\x1f", base);
  }
  for (const auto& code : vocabulary) {
    const std::uint64_t h = splitmix64(fnv1a(code, base));
    const double unit = static_cast<double>(h >> 11) * 0x1.0p-53;
    out.push_back({code, unit * 8.0 - 4.0});
  }
  return out;
}

StubIcd::StubIcd(std::vector<std::string> vocabulary, std::uint64_t seed, ClinicalLexicon lexicon)
    : vocabulary_(std::move(vocabulary)), seed_(seed), lexicon_(std::move(lexicon)) {
  if (vocabulary_.empty()) throw InputError("stub ICD vocabulary is empty");
  std::set<std::string> unique(vocabulary_.begin(), vocabulary_.end());
  if (unique.size() != vocabulary_.size()) throw InputError("stub ICD vocabulary has duplicate codes");
}

std::vector<CodePrediction> StubIcd::predict(const std::string& text) {
  return stub_icd_predict(text, vocabulary_, seed_, lexicon_);
}

std::vector<std::string> default_icd_vocabulary() {
  return {"E11.9", "I10", "I21.9", "I48.91", "J18.9", "J44.9", "J45.909", "N17.9", "N18.9", "A41.9",
          "D64.9", "E78.5", "F17.210", "I50.9", "K21.9", "M54.5", "R07.9", "R50.9", "Z79.4", "Z79.01"};
}

RemoteIcd::RemoteIcd(RemoteIcdConfig cfg, Sleeper sleeper)
    : cfg_(std::move(cfg)),
      poster_(with_credentials(cfg_.endpoint, cfg_.api_key_env), cfg_.retry, cfg_.max_in_flight, std::move(sleeper)) {}

std::vector<CodePrediction> RemoteIcd::predict(const std::string& text) {
  const std::string reply = poster_.post(json{{"text", text}}.dump());
  try {
    const json j = json::parse(reply);
    const auto codes = j.at("codes").get<std::vector<std::string>>();
    const auto logits = j.at("logits").get<std::vector<double>>();
    if (codes.size() != logits.size()) throw std::runtime_error("codes and logits differ in length");
    std::vector<CodePrediction> out;
    for (std::size_t i = 0; i < codes.size(); ++i) out.push_back({codes[i], logits[i]});
    return out;
  } catch (const std::exception& e) {
    throw ProtocolError(std::string("malformed ICD response: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Factories

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(item.substr(b, item.find_last_not_of(" \t") - b + 1));
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

HttpEndpoint endpoint_from(const KeyValueConfig& cfg, const std::string& prefix) {
  HttpEndpoint ep;
  auto base = cfg.get(prefix + "endpoint");
  if (!base) throw InputError(prefix + "endpoint is required");
  ep.base_url = *base;
  ep.path = cfg.get_or(prefix + "path", "/");
  ep.timeout = std::chrono::seconds{cfg.get_int(prefix + "timeout_s", 60)};
  return ep;
}

ClinicalLexicon lexicon_from(const KeyValueConfig& cfg, const std::string& key, const std::filesystem::path& base) {
  auto path = cfg.get(key);
  return path ? ClinicalLexicon::load(resolve(base, *path)) : ClinicalLexicon::builtin();
}

}  // namespace

RetryPolicy retry_policy_from(const KeyValueConfig& cfg) {
  RetryPolicy p;
  p.max_attempts = static_cast<int>(cfg.get_int("retry.max_attempts", p.max_attempts));
  p.initial_backoff = std::chrono::milliseconds{cfg.get_int("retry.initial_backoff_ms", p.initial_backoff.count())};
  p.multiplier = cfg.get_double("retry.multiplier", p.multiplier);
  p.max_backoff = std::chrono::milliseconds{cfg.get_int("retry.max_backoff_ms", p.max_backoff.count())};
  if (p.max_attempts < 1) throw InputError("retry.max_attempts must be at least 1");
  if (p.initial_backoff.count() < 0 || p.max_backoff.count() < 0) throw InputError("retry backoff must be >= 0");
  return p;
}

std::unique_ptr<JudgeBackend> make_judge(const KeyValueConfig& cfg, const std::filesystem::path& base_dir) {
  const std::string kind = cfg.get_or("judge.kind", "oracle");
  std::unique_ptr<JudgeBackend> judge;
  if (kind == "oracle") {
    std::set<std::string, std::less<>> tags;
    for (auto& t : split_list(cfg.get_or("judge.pii_tags", ""))) tags.insert(t);
    judge = std::make_unique<OracleJudge>(lexicon_from(cfg, "judge.lexicon", base_dir), std::move(tags));
  } else if (kind == "replay") {
    auto fixture = cfg.get("judge.fixture");
    if (!fixture) throw InputError("judge.fixture is required for judge.kind = replay");
    judge = std::make_unique<ReplayJudge>(resolve(base_dir, *fixture));
  } else if (kind == "remote") {
    RemoteChatConfig rc;
    rc.endpoint = endpoint_from(cfg, "judge.");
    rc.model = cfg.get_or("judge.model", "");
    rc.api_key_env = cfg.get_or("judge.api_key_env", "");
    rc.response_pointer = cfg.get_or("judge.response_pointer", "");
    rc.max_in_flight = static_cast<std::size_t>(cfg.get_int("judge.max_in_flight", 4));
    rc.retry = retry_policy_from(cfg);
    for (const auto& [k, v] : cfg.with_prefix("judge.option.")) {
      rc.passthrough[k] = json::accept(v) ? json::parse(v) : json(v);
    }
    judge = std::make_unique<RemoteChatJudge>(std::move(rc));
  } else {
    throw InputError("unknown judge.kind '" + kind + "' (expected oracle, remote or replay)");
  }
  if (auto record = cfg.get("judge.record")) {
    judge = std::make_unique<RecordingJudge>(std::move(judge), resolve(base_dir, *record));
  }
  return judge;
}

std::unique_ptr<IcdBackend> make_icd(const KeyValueConfig& cfg, const std::filesystem::path& base_dir) {
  const std::string kind = cfg.get_or("icd.kind", "stub");
  if (kind == "stub") {
    auto vocab = cfg.get("icd.vocabulary") ? split_list(*cfg.get("icd.vocabulary")) : default_icd_vocabulary();
    return std::make_unique<StubIcd>(std::move(vocab), static_cast<std::uint64_t>(cfg.get_int("icd.seed", 0)),
                                     lexicon_from(cfg, "icd.lexicon", base_dir));
  }
  if (kind == "remote") {
    RemoteIcdConfig rc;
    rc.endpoint = endpoint_from(cfg, "icd.");
    rc.api_key_env = cfg.get_or("icd.api_key_env", "");
    rc.max_in_flight = static_cast<std::size_t>(cfg.get_int("icd.max_in_flight", 4));
    rc.retry = retry_policy_from(cfg);
    return std::make_unique<RemoteIcd>(std::move(rc));
  }
  throw InputError("unknown icd.kind '" + kind + "' (expected stub or remote)");
}

}  // namespace deidkit
