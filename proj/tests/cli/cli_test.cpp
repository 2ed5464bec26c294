#include <gtest/gtest.h>
#include <httplib.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "deidkit/analysis.hpp"
#include "deidkit/corpus.hpp"
#include "deidkit/scoring.hpp"
#include "support/mock_server.hpp"
#include "support/process.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = DEIDKIT_CLI;

const std::string kNote = "Pt John Smith, 64 yo, seen at Foothills for chest pain; aspirin 81 mg daily today.";
const std::string kNoteDeid = "Pt REDACTED Smith, REDACTED yo, seen at Foothills for chest pain; REDACTED 81 mg daily.";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("deidkit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  std::string write(const std::string& name, const std::string& contents) const {
    std::ofstream(path(name), std::ios::binary) << contents;
    return path(name).string();
  }

  proc::Result cli(std::vector<std::string> args) const { return proc::run(kCli, std::move(args), dir_); }

  std::string note_gold() const {
    json doc = {{"doc_id", "note"},
                {"text", kNote},
                {"gold_spans",
                 {{{"start", 3}, {"end", 13}, {"category", "Name"}},
                  {{"start", 15}, {"end", 17}, {"category", "Age"}},
                  {{"start", 30}, {"end", 39}, {"category", "Hospital"}, {"is_provider", true}}}}};
    return write("gold.jsonl", doc.dump() + "\n");
  }
  std::string note_system() const {
    return write("system.jsonl", json{{"doc_id", "note"}, {"text", kNoteDeid}}.dump() + "\n");
  }

  fs::path dir_;
};

json read_json(const fs::path& p) { return json::parse(proc::slurp(p)); }

std::vector<json> read_jsonl(const fs::path& p) {
  std::vector<json> out;
  std::istringstream in(proc::slurp(p));
  for (std::string line; std::getline(in, line);) out.push_back(json::parse(line));
  return out;
}

/// Everything after the provenance line.
std::string body_of(const fs::path& p) {
  const std::string s = proc::slurp(p);
  return s.substr(s.find('\n') + 1);
}

}  // namespace

TEST_F(CliTest, ScoreOnRedactedGoldIsPerfect) {
  const auto gold = write("gold.jsonl", json{{"doc_id", "a"},
                                             {"text", "Seen by Dr Brown today."},
                                             {"gold_spans", {{{"start", 11}, {"end", 16}, {"category", "Name"}}}}}
                                                .dump() +
                                            "\n");
  const auto sys = write("sys.jsonl", R"({"doc_id":"a","text":"Seen by Dr REDACTED today."})" "\n");
  const auto r = cli({"score", "--gold", gold, "--system", sys, "--out-dir", path("out").string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const json m = read_json(path("out/metrics.json"));
  EXPECT_EQ(m["metrics"]["precision"], 1.0);
  EXPECT_EQ(m["metrics"]["recall"], 1.0);
  EXPECT_EQ(m["metrics"]["f1"], 1.0);
  EXPECT_EQ(m["provenance"]["tool_version"], DEIDKIT_VERSION);
  EXPECT_EQ(m["provenance"]["seed"], 0);
}

TEST_F(CliTest, ScoreMatchesHandTally) {
  const auto r = cli({"score", "--gold", note_gold(), "--system", note_system(), "--out-dir", path("out").string(),
                      "--name", "fixture", "--bins", "10,100"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const json m = read_json(path("out/metrics.json"))["metrics"];
  EXPECT_EQ(m["tp"], 2);
  EXPECT_EQ(m["tn"], 15);
  EXPECT_EQ(m["fp"], 2);
  EXPECT_EQ(m["fn"], 1);
  const std::string table = proc::slurp(path("out/metrics.txt"));
  EXPECT_NE(table.find("fixture   2  15   2   1  0.85  0.67  0.50  0.57"), std::string::npos) << table;
  EXPECT_NE(table.find("# tool_version="), std::string::npos);
  EXPECT_EQ(proc::slurp(path("out/bins.csv")),
            "bin_start,bin_end,tp,tn,fp,fn,f1\n0,10,0,0,0,0,\n11,100,2,15,2,1,0.571429\n101,inf,0,0,0,0,\n");
  EXPECT_EQ(read_json(path("out/bins.csv.provenance.json"))["provenance"]["seed"], 0);
  EXPECT_TRUE(fs::exists(path("out/run.log")));
}

TEST_F(CliTest, ScoreRerunsAreIdentical) {
  const auto gold = note_gold();
  const auto sys = note_system();
  ASSERT_EQ(cli({"score", "--gold", gold, "--system", sys, "--out-dir", path("a").string(), "--seed", "4"}).exit_code, 0);
  ASSERT_EQ(cli({"score", "--gold", gold, "--system", sys, "--out-dir", path("b").string(), "--seed", "4", "--jobs", "3"})
                .exit_code,
            0);
  for (const char* f : {"metrics.json", "metrics.txt", "bins.csv", "bins.csv.provenance.json"}) {
    EXPECT_EQ(proc::slurp(path("a") / f), proc::slurp(path("b") / f)) << f;
  }
}

TEST_F(CliTest, ConfigOverridesFlags) {
  const auto cfg = write("run.kv", "run.mode = conservative\nrun.include-provider = true\nrun.seed = 9\n");
  const auto r = cli({"score", "--gold", note_gold(), "--system", note_system(), "--out-dir", path("out").string(),
                      "--mode", "generous", "--seed", "1", "--config", cfg});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const json m = read_json(path("out/metrics.json"));
  EXPECT_EQ(m["matching_mode"], "conservative");
  EXPECT_EQ(m["provenance"]["seed"], 9);
  EXPECT_EQ(m["metrics"]["tp"], 1);
  EXPECT_EQ(m["metrics"]["tn"], 14);
  EXPECT_EQ(m["metrics"]["fp"], 2);
  EXPECT_EQ(m["metrics"]["fn"], 3);
}

TEST_F(CliTest, ConfigHashFollowsConfig) {
  const auto gold = note_gold();
  const auto sys = note_system();
  const auto a = write("a.kv", "judge.kind = oracle\n");
  const auto b = write("b.kv", "judge.kind = oracle\njudge.pii_tags = REDACTED\n");
  ASSERT_EQ(cli({"score", "--gold", gold, "--system", sys, "--out-dir", path("a").string(), "--config", a}).exit_code, 0);
  ASSERT_EQ(cli({"score", "--gold", gold, "--system", sys, "--out-dir", path("b").string(), "--config", b}).exit_code, 0);
  EXPECT_NE(read_json(path("a/metrics.json"))["provenance"]["config_hash"],
            read_json(path("b/metrics.json"))["provenance"]["config_hash"]);
}

TEST_F(CliTest, UnknownConfigKeyIsAnInputError) {
  const auto cfg = write("bad.kv", "run.no-such-flag = 1\n");
  const auto r = cli({"score", "--gold", note_gold(), "--system", note_system(), "--out-dir", path("o").string(),
                      "--config", cfg});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("run.no-such-flag"), std::string::npos);
}

TEST_F(CliTest, MissingFileExitsTwoNamingThePath) {
  const auto missing = path("nowhere.jsonl").string();
  const auto r = cli({"score", "--gold", missing, "--system", note_system(), "--out-dir", path("o").string()});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find(missing), std::string::npos) << r.err;
}

TEST_F(CliTest, DocIdMismatchListsTheDifference) {
  const auto sys = write("sys.jsonl", R"({"doc_id":"other","text":"x"})" "\n");
  const auto r = cli({"score", "--gold", note_gold(), "--system", sys, "--out-dir", path("o").string()});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("-note"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("+other"), std::string::npos) << r.err;
}

TEST_F(CliTest, EmptyCorpusHasOnlyUndefinedMetrics) {
  const auto gold = write("gold.jsonl", "");
  const auto sys = write("sys.jsonl", "");
  const auto r = cli({"score", "--gold", gold, "--system", sys, "--out-dir", path("o").string()});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_TRUE(read_json(path("o/metrics.json"))["metrics"]["f1"].is_null());
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(cli({}).exit_code, 2);
  EXPECT_EQ(cli({"score"}).exit_code, 2);
  EXPECT_EQ(cli({"frobnicate"}).exit_code, 2);
  EXPECT_EQ(cli({"--help"}).exit_code, 0);
  const auto help = cli({"cire", "--help"});
  EXPECT_EQ(help.exit_code, 0);
  EXPECT_NE(help.out.find("--chunk-size"), std::string::npos);
}

TEST_F(CliTest, CireReplayIsByteIdenticalAcrossRuns) {
  const auto gold = note_gold();
  const auto sys = note_system();
  const auto record = write("record.kv", "judge.kind = oracle\njudge.record = fixture.json\n");
  ASSERT_EQ(cli({"cire", "--gold", gold, "--system", sys, "--out", path("live.jsonl").string(), "--config", record})
                .exit_code,
            0);
  ASSERT_TRUE(fs::exists(path("fixture.json")));
  const auto replay = write("replay.kv", "judge.kind = replay\njudge.fixture = fixture.json\n");
  ASSERT_EQ(cli({"cire", "--gold", gold, "--system", sys, "--out", path("r1.jsonl").string(), "--config", replay})
                .exit_code,
            0);
  ASSERT_EQ(cli({"cire", "--gold", gold, "--system", sys, "--out", path("r2.jsonl").string(), "--config", replay,
                 "--jobs", "2"})
                .exit_code,
            0);
  EXPECT_EQ(proc::slurp(path("r1.jsonl")), proc::slurp(path("r2.jsonl")));
  EXPECT_EQ(body_of(path("r1.jsonl")), body_of(path("live.jsonl")));
  const auto rows = read_jsonl(path("r1.jsonl"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(rows[0].contains("_meta"));
  EXPECT_EQ(rows[1]["doc_id"], "note");
}

TEST_F(CliTest, CireRemoteJudgeRecoversFromRateLimits) {
  mock::ScriptedServer server({{429, "", ""}, {429, "", ""}, {200, "No", ""}});
  const auto cfg = write("remote.kv", "judge.kind = remote\njudge.endpoint = " + server.url() +
                                          "\njudge.path = /v1/chat\nretry.max_attempts = 3\nretry.initial_backoff_ms = 1\n");
  const auto gold = write("gold.jsonl", R"({"doc_id":"a","text":"aspirin 81 mg"})" "\n");
  const auto sys = write("sys.jsonl", R"({"doc_id":"a","text":"aspirin 81 mg"})" "\n");
  const auto r = cli({"cire", "--gold", gold, "--system", sys, "--out", path("c.jsonl").string(), "--config", cfg});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(server.hits(), 3u);
  EXPECT_EQ(read_jsonl(path("c.jsonl"))[1]["retention"], 1.0);
}

TEST_F(CliTest, CireRemoteJudgeServerErrorsExitThree) {
  mock::ScriptedServer server({{500, "", ""}, {500, "", ""}});
  const auto cfg = write("remote.kv", "judge.kind = remote\njudge.endpoint = " + server.url() +
                                          "\nretry.max_attempts = 2\nretry.initial_backoff_ms = 1\n");
  const auto gold = write("gold.jsonl", R"({"doc_id":"a","text":"aspirin 81 mg"})" "\n");
  const auto r = cli({"cire", "--gold", gold, "--system", gold, "--out", path("c.jsonl").string(), "--config", cfg});
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_EQ(server.hits(), 2u);
  EXPECT_FALSE(fs::exists(path("c.jsonl")));
}

TEST_F(CliTest, IcdWritesPerDocumentScores) {
  const auto gold = note_gold();
  const auto r = cli({"icd", "--gold", gold, "--system", gold, "--out", path("i.jsonl").string(), "--scale", "percent"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto rows = read_jsonl(path("i.jsonl"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1]["jsc"], 100.0);
  EXPECT_EQ(rows[1]["nsdcg"], 100.0);
}

TEST_F(CliTest, SurrogateIsDeterministicAndIndependentOfJobs) {
  std::string src;
  for (int i = 0; i < 40; ++i) {
    src += json{{"doc_id", "doc" + std::to_string(i)}, {"text", "Seen by [NAME] on [DATE], call [PHONE] re [ID:a]."}}.dump() + "\n";
  }
  const auto in = write("src.jsonl", src);
  ASSERT_EQ(cli({"surrogate", "--in", in, "--seed", "5", "--noise-rate", "0.5", "--out", path("a.jsonl").string()})
                .exit_code,
            0);
  ASSERT_EQ(cli({"surrogate", "--in", in, "--seed", "5", "--noise-rate", "0.5", "--out", path("b.jsonl").string(),
                 "--jobs", "4"})
                .exit_code,
            0);
  EXPECT_EQ(proc::slurp(path("a.jsonl")), proc::slurp(path("b.jsonl")));
  const auto docs = deidkit::read_corpus(path("a.jsonl"));
  ASSERT_EQ(docs.size(), 40u);
  std::size_t maps = 0;
  for (const auto& e : fs::directory_iterator(path("a.jsonl.maps"))) {
    const json m = read_json(e.path());
    EXPECT_EQ(m["provenance"]["seed"], 5);
    EXPECT_EQ(m["replacements"].size(), 4u);
    ++maps;
  }
  EXPECT_EQ(maps, 40u);
  for (const auto& d : docs) EXPECT_EQ(d.gold_spans.size(), 4u);
}

TEST_F(CliTest, SampleFpsMatchesInMemorySampling) {
  std::mt19937 rng(12);
  const std::vector<std::string> words{"aspirin", "daily", "the", "pt", "mg", "81", "seen", "Smith", "today", "pain"};
  std::string gold, sys;
  std::vector<deidkit::AnnotatedDocument> docs;
  std::vector<std::string> deid;
  for (int d = 0; d < 40; ++d) {
    std::string text, out;
    std::vector<deidkit::PiiSpan> spans;
    for (int w = 0; w < 30; ++w) {
      const std::string& word = words[rng() % words.size()];
      if (!text.empty()) {
        text += ' ';
        out += ' ';
      }
      const bool pii = word == "Smith";
      if (pii) spans.push_back({text.size(), text.size() + word.size(), deidkit::PiiCategory::Name, false});
      text += word;
      out += (pii || rng() % 7 == 0) ? "REDACTED" : word;
    }
    char id[16];
    std::snprintf(id, sizeof id, "d%02d", (d * 17) % 40);
    docs.push_back(deidkit::make_document(id, text, spans));
    deid.push_back(out);
    gold += deidkit::document_to_json(docs.back()).dump() + "\n";
    sys += json{{"doc_id", id}, {"text", out}}.dump() + "\n";
  }
  const auto g = write("gold.jsonl", gold);
  const auto s = write("sys.jsonl", sys);

  std::vector<std::size_t> order(docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return docs[a].doc_id < docs[b].doc_id; });
  std::vector<deidkit::ScoringInput> inputs;
  for (std::size_t i : order) inputs.push_back({&docs[i], deid[i]});
  const auto scored = deidkit::score_corpus_serial(inputs, {});
  std::vector<deidkit::DocumentVerdicts> corpus;
  for (std::size_t k = 0; k < order.size(); ++k) corpus.push_back({docs[order[k]].doc_id, scored.verdicts[k]});
  const auto expected = deidkit::sample_false_positives(corpus, 25, 77);
  ASSERT_EQ(expected.samples.size(), 25u);

  for (const char* jobs : {"1", "3"}) {
    const auto out = path(std::string("fps") + jobs + ".csv");
    const auto r = cli({"sample-fps", "--gold", g, "--system", s, "--n", "25", "--seed", "77", "--jobs", jobs, "--out",
                        out.string()});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_EQ(proc::slurp(out), deidkit::annotation_csv(expected.samples)) << "jobs " << jobs;
  }
}

TEST_F(CliTest, SampleFpsWarnsWhenThereAreNone) {
  const auto gold = note_gold();
  const auto r = cli({"sample-fps", "--gold", gold, "--system", gold, "--out", path("f.csv").string()});
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.err.find("no false positives"), std::string::npos);
  EXPECT_EQ(proc::slurp(path("f.csv")), std::string(deidkit::kAnnotationCsvHeader) + "\n");
}

TEST_F(CliTest, CorrelateOnMatchingFixtureReportsOne) {
  // Ground-truth CIR per doc: a 1.0, b 0.5, c 0.25, d 0.0.
  const auto labels = write("labels.csv",
                            "doc_id,sentence_index,clinically_changed\n"
                            "a,0,0\na,1,0\nb,0,1\nb,1,0\nc,0,1\nc,1,1\nc,2,1\nc,3,0\nd,0,true\n");
  const auto metric = write("metric.jsonl",
                            R"({"_meta":{"seed":0}})" "\n"
                            R"({"doc_id":"a","retention":1.0})" "\n"
                            R"({"doc_id":"b","retention":0.5})" "\n"
                            R"({"doc_id":"c","retention":0.25})" "\n"
                            R"({"doc_id":"d","retention":0.0})" "\n"
                            R"({"doc_id":"e","retention":null})" "\n");
  const auto r = cli({"correlate", "--metric", "cire=" + metric + ":retention", "--truth", labels, "--out",
                      path("corr.json").string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const json rep = read_json(path("corr.json"));
  ASSERT_EQ(rep["correlations"].size(), 1u);
  EXPECT_NEAR(rep["correlations"][0]["pearson"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(rep["correlations"][0]["spearman"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(rep["correlations"][0]["n"], 4);
  EXPECT_EQ(rep["correlations"][0]["skipped_undefined"], 1);
  EXPECT_NE(r.out.find("cire\t4\t1.0000\t1.0000"), std::string::npos) << r.out;
}

TEST_F(CliTest, CorrelateRejectsMalformedMetricSpec) {
  const auto labels = write("labels.csv", "doc_id,sentence_index,clinically_changed\na,0,0\n");
  const auto r = cli({"correlate", "--metric", "nofield", "--truth", labels, "--out", path("c.json").string()});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("NAME=PATH:FIELD"), std::string::npos);
}

TEST_F(CliTest, ServeAnswersSampleListing) {
  deidkit::FpSample s;
  s.file_name = "a.txt";
  s.edit_distance = 8;
  s.original_token = "aspirin";
  s.deid_token = "REDACTED";
  s.context = "… / on / aspirin / REDACTED / 81 / …";
  const std::vector<deidkit::FpSample> rows{s};
  const auto csv = write("ann.csv", deidkit::annotation_csv(rows));

  proc::Child child(kCli, {"serve", "--annotations", csv, "--port", "0"});
  ASSERT_TRUE(child.started());
  const std::string line = child.read_line();
  ASSERT_EQ(line.rfind("listening on 127.0.0.1:", 0), 0u) << line;
  const int port = std::stoi(line.substr(line.rfind(':') + 1));

  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/samples?page=1&page_size=10");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const json body = json::parse(res->body);
  ASSERT_EQ(body["items"].size(), 1u);
  EXPECT_EQ(body["items"][0]["key"], "a.txt#0");
  EXPECT_EQ(body["items"][0]["original_token"], "aspirin");
  EXPECT_EQ(child.stop(SIGTERM), 0);
}
