#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <random>

#include "deidkit/cire.hpp"
#include "deidkit/errors.hpp"
#include "support/fixtures.hpp"

using namespace deidkit;

namespace {

AlignmentPair identity_alignment(std::size_t n) {
  AlignmentPair p;
  for (std::size_t i = 0; i < n; ++i) {
    Token t{"t" + std::to_string(i), i * 4, i * 4 + 2, i};
    p.aligned_original.push_back(t);
    p.aligned_deid.push_back(t);
  }
  return p;
}

// n_chunks windows of 20 filler tokens; the windows listed in `altered` have their 10th token
// "aspirin" replaced (same length, so every chunk stays registered).
std::pair<AnnotatedDocument, std::string> planted(std::size_t n_chunks, const std::set<std::size_t>& altered) {
  std::string text, deid;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    for (std::size_t k = 0; k < 20; ++k) {
      const std::string w = k == 9 ? "aspirin" : "word";
      const std::string d = k == 9 && altered.count(c) ? "REDACT" : w;
      text += (text.empty() ? "" : " ") + w;
      deid += (deid.empty() ? "" : " ") + d;
    }
  }
  return {make_document("planted", text, {}), deid};
}

class ScriptedJudge : public JudgeBackend {
 public:
  explicit ScriptedJudge(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string complete(const JudgeRequest&) override {
    const std::size_t i = calls_++;
    return replies_[std::min(i, replies_.size() - 1)];
  }
  std::size_t calls() const { return calls_; }

 private:
  std::vector<std::string> replies_;
  std::atomic<std::size_t> calls_{0};
};

class FailingJudge : public JudgeBackend {
 public:
  std::string complete(const JudgeRequest&) override { throw BackendError("connection refused"); }
};

OracleJudge oracle() { return OracleJudge(ClinicalLexicon::builtin()); }

}  // namespace

TEST(Chunk, WindowCounts) {
  EXPECT_EQ(chunk_alignment(identity_alignment(40), 20).size(), 2u);
  const auto c = chunk_alignment(identity_alignment(45), 20);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[2].end - c[2].begin, 5u);
  EXPECT_EQ(c[2].original_tokens.size(), 5u);
  EXPECT_TRUE(chunk_alignment({}, 20).empty());
  EXPECT_THROW(chunk_alignment(identity_alignment(3), 0), InputError);
}

TEST(Chunk, GapsStrippedAfterWindowing) {
  auto p = identity_alignment(30);
  p.aligned_deid[2].reset();
  p.aligned_deid[7].reset();
  p.aligned_deid[19].reset();
  const auto c = chunk_alignment(p, 20);
  EXPECT_EQ(c[0].original_tokens.size(), 20u);
  EXPECT_EQ(c[0].deid_tokens.size(), 17u);
  EXPECT_EQ(c[1].deid_tokens.size(), 10u);
}

TEST(Chunk, PartitionProperty) {
  std::mt19937_64 rng(31);
  for (int iter = 0; iter < 500; ++iter) {
    const auto a = fixtures::toks(fixtures::random_sequence(rng, 60, "abcd"));
    const auto b = fixtures::toks(fixtures::random_sequence(rng, 60, "abcd"));
    const auto pair = align(a, b);
    const std::size_t size = 1 + rng() % 25;
    const auto chunks = chunk_alignment(pair, size);
    std::size_t covered = 0;
    std::vector<std::string> orig, deid;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      ASSERT_EQ(chunks[i].index, i);
      ASSERT_EQ(chunks[i].begin, covered);
      ASSERT_LE(chunks[i].end - chunks[i].begin, size);
      covered = chunks[i].end;
      orig.insert(orig.end(), chunks[i].original_tokens.begin(), chunks[i].original_tokens.end());
      deid.insert(deid.end(), chunks[i].deid_tokens.begin(), chunks[i].deid_tokens.end());
    }
    ASSERT_EQ(covered, pair.size());
    std::vector<std::string> expect_orig, expect_deid;
    for (const auto& t : a) expect_orig.push_back(t.text);
    for (const auto& t : b) expect_deid.push_back(t.text);
    ASSERT_EQ(orig, expect_orig);
    ASSERT_EQ(deid, expect_deid);
  }
}

TEST(Chunk, SentenceMode) {
  const auto orig = tokenize("Pt stable. Start aspirin! Follow up");
  const auto deid = tokenize("Pt stable. Start aspirin! Follow up");
  const auto chunks = chunk_alignment_by_sentence(align(orig, deid));
  ASSERT_EQ(chunks.size(), 3u);
  EXPECT_EQ(chunks[0].original_tokens, (std::vector<std::string>{"Pt", "stable", "."}));
  EXPECT_EQ(chunks[2].original_tokens, (std::vector<std::string>{"Follow", "up"}));
}

TEST(Prompt, FillsBothSlotsOnce) {
  ChunkPair c;
  c.original_tokens = {"take", "{deid_chunk}"};
  c.deid_tokens = {"take", "X"};
  EXPECT_EQ(fill_prompt("original: {original_chunk}\ndeid: {deid_chunk}\n", c),
            "original: take {deid_chunk}\ndeid: take X\n");
  const std::string def = default_prompt_template();
  EXPECT_NE(def.find("original: {original_chunk}"), std::string::npos);
  EXPECT_NE(def.find("deid: {deid_chunk}"), std::string::npos);
}

TEST(Prompt, AnswerParsing) {
  EXPECT_EQ(parse_judge_answer("Yes"), true);
  EXPECT_EQ(parse_judge_answer("no."), false);
  EXPECT_EQ(parse_judge_answer("  NO, nothing changed"), false);
  EXPECT_EQ(parse_judge_answer("Answer: yes - the dose changed; no other change"), true);
  EXPECT_EQ(parse_judge_answer("Nope"), std::nullopt);
  EXPECT_EQ(parse_judge_answer("eyes know nothing"), std::nullopt);
  EXPECT_EQ(parse_judge_answer(""), std::nullopt);
}

TEST(Judge, OracleDecisions) {
  auto judge = oracle();
  const CireConfig cfg;
  ChunkPair same;
  same.original_tokens = same.deid_tokens = {"start", "insulin", "now"};
  EXPECT_FALSE(judge_chunk_pair(same, judge, cfg).altered);

  ChunkPair lost = same;
  lost.deid_tokens = {"start", "now"};
  EXPECT_TRUE(judge_chunk_pair(lost, judge, cfg).altered);

  ChunkPair renamed;
  renamed.original_tokens = {"seen", "by", "Charles", "Taylor"};
  renamed.deid_tokens = {"seen", "by", "Linda", "Lopez"};
  const std::set<std::string, std::less<>> pii{"Charles", "Taylor"};
  EXPECT_FALSE(judge_chunk_pair(renamed, judge, cfg, &pii).altered);
}

TEST(Judge, RetriesUnparseableThenAccepts) {
  ScriptedJudge judge({"hmm", "maybe", "YES"});
  ChunkPair c;
  const auto d = judge_chunk_pair(c, judge, CireConfig{});
  EXPECT_TRUE(d.altered);
  EXPECT_EQ(d.raw_response, "YES");
  EXPECT_EQ(judge.calls(), 3u);
}

TEST(Judge, UnparseableAfterLimitIsProtocolError) {
  ScriptedJudge judge({"perhaps"});
  ChunkPair c;
  c.index = 4;
  CireConfig cfg;
  cfg.max_parse_attempts = 2;
  try {
    judge_chunk_pair(c, judge, cfg);
    FAIL() << "expected ProtocolError";
  } catch (const ProtocolError& e) {
    EXPECT_NE(std::string(e.what()).find("chunk 4"), std::string::npos);
  }
  EXPECT_EQ(judge.calls(), 2u);
}

TEST(Judge, BackendErrorCarriesChunkIndex) {
  FailingJudge judge;
  ChunkPair c;
  c.index = 3;
  try {
    judge_chunk_pair(c, judge, CireConfig{});
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    EXPECT_NE(std::string(e.what()).find("chunk 3"), std::string::npos);
  }
}

TEST(Score, IdentityIsFullRetention) {
  auto judge = oracle();
  const auto doc = make_document("d", "Start aspirin 81 mg daily. Seen by Charles Taylor.", {});
  const auto s = cire_score(doc, doc.text, CireConfig{}, judge);
  EXPECT_EQ(s.retention, 1.0);
  EXPECT_EQ(s.n_altered, 0u);
}

TEST(Score, EmptyIsUndefined) {
  auto judge = oracle();
  const auto s = cire_score(make_document("e", "", {}), "", CireConfig{}, judge);
  EXPECT_EQ(s.n_chunks, 0u);
  EXPECT_FALSE(s.retention);
  EXPECT_TRUE(cire_to_json(s)["retention"].is_null());
}

TEST(Score, EveryChunkAltered) {
  auto judge = oracle();
  const auto [doc, deid] = planted(4, {0, 1, 2, 3});
  const auto s = cire_score(doc, deid, CireConfig{}, judge);
  EXPECT_EQ(s.n_chunks, 4u);
  EXPECT_EQ(s.retention, 0.0);
}

TEST(Score, TwoOfTenAltered) {
  auto judge = oracle();
  const auto [doc, deid] = planted(10, {3, 7});
  const auto s = cire_score(doc, deid, CireConfig{}, judge);
  EXPECT_EQ(s.n_chunks, 10u);
  EXPECT_EQ(s.n_altered, 2u);
  EXPECT_DOUBLE_EQ(*s.retention, 0.8);
  EXPECT_TRUE(s.decisions[3].altered);
  EXPECT_TRUE(s.decisions[7].altered);
  EXPECT_FALSE(s.decisions[4].altered);
}

TEST(Score, NameSurrogatesAreNotAlterations) {
  auto judge = oracle();
  const auto doc = make_document("n", "Seen by Charles Taylor for chest pain.", {{8, 22, PiiCategory::Name, false}});
  const auto s = cire_score(doc, "Seen by Linda Lopez for chest pain.", CireConfig{}, judge);
  EXPECT_EQ(s.retention, 1.0);
}

TEST(Score, MonotoneInAlteredChunks) {
  auto judge = oracle();
  std::set<std::size_t> altered;
  double previous = 1.0;
  for (std::size_t k = 0; k < 8; ++k) {
    altered.insert(k);
    const auto [doc, deid] = planted(8, altered);
    const double r = *cire_score(doc, deid, CireConfig{}, judge).retention;
    EXPECT_NEAR(previous - r, 1.0 / 8.0, 1e-12);
    previous = r;
  }
}

TEST(Score, ParallelismDoesNotChangeOutput) {
  auto judge = oracle();
  const auto [doc, deid] = planted(25, {1, 4, 9, 16, 24});
  CireConfig serial, parallel;
  parallel.parallelism = 6;
  EXPECT_EQ(cire_to_json(cire_score(doc, deid, serial, judge)).dump(),
            cire_to_json(cire_score(doc, deid, parallel, judge)).dump());
}

TEST(Score, ErrorsNameTheChunk) {
  FailingJudge judge;
  const auto [doc, deid] = planted(2, {});
  EXPECT_THROW(cire_score(doc, deid, CireConfig{}, judge), BackendError);
}

TEST(Score, JsonShape) {
  auto judge = oracle();
  const auto [doc, deid] = planted(2, {1});
  const auto j = cire_to_json(cire_score(doc, deid, CireConfig{}, judge));
  EXPECT_EQ(j.dump(),
            R"({"decisions":[{"altered":false,"index":0},{"altered":true,"index":1}],"doc_id":"planted","n_altered":1,"n_chunks":2,"retention":0.5})");
}

TEST(Prompt, ShippedFileMatchesBuiltin) {
  std::ifstream in(std::filesystem::path(DEIDKIT_SOURCE_DIR) / "data" / "cire_prompt.txt", std::ios::binary);
  ASSERT_TRUE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), default_prompt_template());
}
