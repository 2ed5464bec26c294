#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "deidkit/config.hpp"
#include "deidkit/lexicon.hpp"

namespace deidkit {

// ---------------------------------------------------------------------------
// Transport

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{10'000};

  /// Wait before retry number `retry` (1-based). Non-decreasing in retry.
  std::chrono::milliseconds backoff(int retry) const;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct HttpEndpoint {
  /// scheme://host[:port]
  std::string base_url;
  std::string path = "/";
  std::map<std::string, std::string> headers;
  std::chrono::seconds timeout{60};
};

/// POSTs a body, retrying on transport failures, 429 and 5xx. Retry-After (seconds) is honoured
/// as a lower bound on the wait. Other non-2xx statuses throw ProtocolError; running out of
/// attempts throws BackendError.
class HttpPoster {
 public:
  HttpPoster(HttpEndpoint endpoint, RetryPolicy policy, std::size_t max_in_flight = 4, Sleeper sleeper = {});
  ~HttpPoster();
  HttpPoster(const HttpPoster&) = delete;
  HttpPoster& operator=(const HttpPoster&) = delete;

  std::string post(const std::string& body, const std::string& content_type = "application/json");

  /// Number of HTTP requests issued so far (all attempts).
  std::size_t attempts_made() const;

 private:
  HttpEndpoint endpoint_;
  RetryPolicy policy_;
  Sleeper sleeper_;
  std::counting_semaphore<1024> in_flight_;
  mutable std::mutex mu_;
  std::size_t attempts_ = 0;
};

// ---------------------------------------------------------------------------
// Judge

struct JudgeRequest {
  std::size_t chunk_index = 0;
  std::vector<std::string> original_tokens;
  std::vector<std::string> deid_tokens;
  /// Template filled with both chunk texts.
  std::string prompt;
  /// Token texts known to be PII in this document (surrogates); may be null.
  const std::set<std::string, std::less<>>* pii_terms = nullptr;
};

/// Returns the judge's raw text answer. Implementations must be safe for concurrent calls.
class JudgeBackend {
 public:
  virtual ~JudgeBackend() = default;
  virtual std::string complete(const JudgeRequest& request) = 0;
};

struct RemoteChatConfig {
  HttpEndpoint endpoint;
  std::string model;
  /// Name of the environment variable holding a bearer token; empty for none.
  std::string api_key_env;
  /// Extra request fields (temperature, max_tokens, ...), passed through untouched.
  nlohmann::json passthrough = nlohmann::json::object();
  /// JSON pointer into a JSON response body; empty means the body is the answer text.
  std::string response_pointer;
  RetryPolicy retry;
  std::size_t max_in_flight = 4;
};

/// Single-turn text-in/text-out chat endpoint. Request body:
/// {"model": ..., "messages": [{"role": "user", "content": prompt}], ...passthrough}.
class RemoteChatJudge : public JudgeBackend {
 public:
  explicit RemoteChatJudge(RemoteChatConfig cfg, Sleeper sleeper = {});
  std::string complete(const JudgeRequest& request) override;
  const HttpPoster& transport() const { return poster_; }

 private:
  RemoteChatConfig cfg_;
  HttpPoster poster_;
};

/// "yes" iff a token of original_chunk that is missing from deid_chunk (multiset difference) is a
/// lexicon term or a number, ignoring tokens listed in pii_tags or pii_terms.
std::string oracle_judge(std::span<const std::string> original_chunk, std::span<const std::string> deid_chunk,
                         const ClinicalLexicon& lexicon, const std::set<std::string, std::less<>>& pii_tags,
                         const std::set<std::string, std::less<>>* pii_terms = nullptr);

class OracleJudge : public JudgeBackend {
 public:
  OracleJudge(ClinicalLexicon lexicon, std::set<std::string, std::less<>> pii_tags = {})
      : lexicon_(std::move(lexicon)), pii_tags_(std::move(pii_tags)) {}
  std::string complete(const JudgeRequest& request) override;

 private:
  ClinicalLexicon lexicon_;
  std::set<std::string, std::less<>> pii_tags_;
};

/// Fixture key for a filled prompt.
std::string prompt_key(const std::string& prompt);

/// Answers from a recorded fixture {"responses": {prompt_key: answer}}. Never touches the network;
/// a prompt without a recording throws BackendError.
class ReplayJudge : public JudgeBackend {
 public:
  explicit ReplayJudge(const std::filesystem::path& fixture);
  explicit ReplayJudge(std::map<std::string, std::string> responses) : responses_(std::move(responses)) {}
  std::string complete(const JudgeRequest& request) override;

 private:
  std::map<std::string, std::string> responses_;
};

/// Forwards to another judge and records every answer for later replay.
class RecordingJudge : public JudgeBackend {
 public:
  RecordingJudge(std::unique_ptr<JudgeBackend> inner, std::filesystem::path fixture)
      : inner_(std::move(inner)), fixture_(std::move(fixture)) {}
  std::string complete(const JudgeRequest& request) override;
  /// Writes the fixture, merged with any recordings already in the file.
  void save() const;

 private:
  std::unique_ptr<JudgeBackend> inner_;
  std::filesystem::path fixture_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> recorded_;
};

// ---------------------------------------------------------------------------
// ICD predictor

struct CodePrediction {
  std::string code;
  double logit = 0.0;

  bool operator==(const CodePrediction&) const = default;
};

class IcdBackend {
 public:
  virtual ~IcdBackend() = default;
  virtual std::vector<CodePrediction> predict(const std::string& text) = 0;
};

/// Logit per code is a hash of (sorted lower-cased lexicon tokens of text, code, seed) mapped to
/// [-4, 4]. Text without lexicon tokens gives all-zero logits.
std::vector<CodePrediction> stub_icd_predict(const std::string& text, std::span<const std::string> vocabulary,
                                             std::uint64_t seed, const ClinicalLexicon& lexicon);

class StubIcd : public IcdBackend {
 public:
  StubIcd(std::vector<std::string> vocabulary, std::uint64_t seed, ClinicalLexicon lexicon);
  std::vector<CodePrediction> predict(const std::string& text) override;
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }

 private:
  std::vector<std::string> vocabulary_;
  std::uint64_t seed_;
  ClinicalLexicon lexicon_;
};

/// A small fixed ICD-10 vocabulary for the stub.
std::vector<std::string> default_icd_vocabulary();

struct RemoteIcdConfig {
  HttpEndpoint endpoint;
  std::string api_key_env;
  RetryPolicy retry;
  std::size_t max_in_flight = 4;
};

/// POST {"text": ...} -> {"codes": [...], "logits": [...]}.
class RemoteIcd : public IcdBackend {
 public:
  explicit RemoteIcd(RemoteIcdConfig cfg, Sleeper sleeper = {});
  std::vector<CodePrediction> predict(const std::string& text) override;

 private:
  RemoteIcdConfig cfg_;
  HttpPoster poster_;
};

// ---------------------------------------------------------------------------
// Construction from a key/value config file

RetryPolicy retry_policy_from(const KeyValueConfig& cfg);
std::unique_ptr<JudgeBackend> make_judge(const KeyValueConfig& cfg, const std::filesystem::path& base_dir = {});
std::unique_ptr<IcdBackend> make_icd(const KeyValueConfig& cfg, const std::filesystem::path& base_dir = {});

}  // namespace deidkit
