#include "commands.hpp"

#include <omp.h>
#include <pthread.h>

#include <csignal>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "deidkit/analysis.hpp"
#include "deidkit/annotation_server.hpp"
#include "deidkit/annotation_store.hpp"
#include "deidkit/backends.hpp"
#include "deidkit/cire.hpp"
#include "deidkit/csv.hpp"
#include "deidkit/errors.hpp"
#include "deidkit/hashing.hpp"
#include "deidkit/icd.hpp"
#include "deidkit/scoring.hpp"
#include "deidkit/surrogate.hpp"

namespace deidkit::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  fs::path out = p;
  out += suffix;
  return out;
}

void write_sidecar(const fs::path& artifact, const Provenance& prov) {
  write_json(with_suffix(artifact, ".provenance.json"), {{"artifact", artifact.filename().string()},
                                                         {"provenance", prov.to_json()}});
}

SchemaConfig schema_from(const std::string& mode, bool include_provider) {
  SchemaConfig s;
  s.include_provider_pii = include_provider;
  s.matching_mode = mode == "conservative" ? MatchingMode::Conservative : MatchingMode::Generous;
  return s;
}

void add_schema_options(CLI::App& sub, std::string& mode, bool& include_provider) {
  sub.add_option("--mode", mode, "Token matching mode")
      ->check(CLI::IsMember({"generous", "conservative"}))
      ->capture_default_str();
  sub.add_flag("--include-provider", include_provider, "Count provider and clinic identifiers as PII");
}

struct ScoredBatch {
  std::vector<AnnotatedDocument> docs;
  CorpusScore score;
};

/// Scores the listed documents with the OpenMP kernel.
ScoredBatch score_batch(const JsonlIndex& gold, const JsonlIndex& system, const std::vector<std::string>& ids,
                        const SchemaConfig& schema) {
  ScoredBatch b;
  b.docs.reserve(ids.size());
  std::vector<ScoringInput> inputs;
  inputs.reserve(ids.size());
  for (const auto& id : ids) b.docs.push_back(document_from_json(gold.read(id)));
  for (std::size_t i = 0; i < ids.size(); ++i) inputs.push_back({&b.docs[i], system_text(system, ids[i])});
  b.score = score_corpus(inputs, schema);
  return b;
}

template <class Fn>
void for_each_id_batch(const std::vector<std::string>& ids, std::size_t jobs, Fn fn) {
  const std::size_t batch = std::max<std::size_t>(1, jobs) * 16;
  for (std::size_t b = 0; b < ids.size(); b += batch) {
    fn(std::vector<std::string>(ids.begin() + static_cast<std::ptrdiff_t>(b),
                                ids.begin() + static_cast<std::ptrdiff_t>(std::min(ids.size(), b + batch))));
  }
}

struct DocPair {
  AnnotatedDocument gold;
  std::string deid;
};

// ---------------------------------------------------------------------------

class ScoreCommand : public Command {
 public:
  std::string gold, system, out_dir, name = "system", mode = "generous";
  bool include_provider = false;
  std::vector<std::size_t> bins{250, 500, 1000, 2000, 4000};

  explicit ScoreCommand(CLI::App& parent) {
    app = parent.add_subcommand("score", "Token-level confusion counts, metrics and length bins");
    app->add_option("--gold", gold, "Gold corpus (JSONL)")->required()->check(CLI::ExistingFile);
    app->add_option("--system", system, "System output (JSONL of doc_id, text)")->required()->check(CLI::ExistingFile);
    app->add_option("--out-dir", out_dir, "Writes metrics.json, metrics.txt, bins.csv and run.log here")
        ->required()
        ->configurable(false);
    app->add_option("--name", name, "Row label in the metrics table")->capture_default_str();
    add_schema_options(*app, mode, include_provider);
    app->add_option("--bins", bins, "Comma-separated token-count bin edges")->delimiter(',')->capture_default_str();
    add_common_options(*app, common);
  }

  int run(const RunContext& ctx) override {
    const fs::path dir(out_dir);
    auto log = open_run_log(dir / "run.log");
    JsonlIndex g(gold), s(system);
    require_same_ids(g, s);
    const SchemaConfig schema = schema_from(mode, include_provider);
    omp_set_num_threads(static_cast<int>(common.jobs));
    log->info("score: {} documents, mode={}, include_provider={}", g.offsets().size(), mode, include_provider);

    ConfusionCounts total;
    std::vector<LengthBin> pooled;
    for_each_id_batch(sorted_ids(g), common.jobs, [&](const std::vector<std::string>& ids) {
      auto b = score_batch(g, s, ids, schema);
      total += b.score.counts;
      auto part = bin_by_length(b.docs, b.score.verdicts, bins);
      if (pooled.empty()) {
        pooled = std::move(part);
      } else {
        for (std::size_t i = 0; i < pooled.size(); ++i) pooled[i].counts += part[i].counts;
      }
    });
    if (pooled.empty()) {
      pooled = bin_by_length(std::span<const AnnotatedDocument>{}, std::span<const std::vector<TokenVerdict>>{}, bins);
    }
    for (auto& b : pooled) b.metrics = compute_metrics(b.counts);
    const MetricsReport m = compute_metrics(total);

    json jbins = json::array();
    for (const auto& b : pooled) {
      json row = metrics_to_json(b.counts, b.metrics);
      row["bin_start"] = b.lower;
      row["bin_end"] = b.upper ? json(*b.upper) : json("inf");
      jbins.push_back(row);
    }
    write_json(dir / "metrics.json", {{"provenance", ctx.provenance.to_json()},
                                      {"name", name},
                                      {"matching_mode", mode},
                                      {"include_provider_pii", include_provider},
                                      {"documents", g.offsets().size()},
                                      {"metrics", metrics_to_json(total, m)},
                                      {"bins", jbins}});
    const std::vector<std::pair<std::string, ConfusionCounts>> rows{{name, total}};
    write_file(dir / "metrics.txt", format_metrics_table(rows) + ctx.provenance.comment_line() + "\n");
    write_file(dir / "bins.csv", bins_to_csv(pooled));
    write_sidecar(dir / "bins.csv", ctx.provenance);
    log->info("score: tp={} tn={} fp={} fn={}", total.tp, total.tn, total.fp, total.fn);
    if (m.all_undefined()) {
      std::cerr << "deidkit: every metric is undefined (no tokens scored)\n";
      return 1;
    }
    return 0;
  }
};

// ---------------------------------------------------------------------------

class CireCommand : public Command {
 public:
  std::string gold, system, out, split = "chunk", prompt_path;
  std::size_t chunk_size = 20, parallelism = 1;

  explicit CireCommand(CLI::App& parent) {
    app = parent.add_subcommand("cire", "Clinical information retention judged chunk by chunk");
    app->add_option("--gold", gold, "Original corpus (JSONL)")->required()->check(CLI::ExistingFile);
    app->add_option("--system", system, "De-identified output (JSONL of doc_id, text)")
        ->required()
        ->check(CLI::ExistingFile);
    app->add_option("--out", out, "Per-document scores (JSONL)")->required()->configurable(false);
    app->add_option("--chunk-size", chunk_size, "Aligned tokens per chunk")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--split", split, "chunk: fixed windows; sentence: windows end at . ! ?")
        ->check(CLI::IsMember({"chunk", "sentence"}))
        ->capture_default_str();
    app->add_option("--prompt", prompt_path, "Prompt template with {original_chunk} and {deid_chunk}")
        ->check(CLI::ExistingFile);
    app->add_option("--parallelism", parallelism, "Judge calls in flight per document")
        ->check(CLI::Range(1, 256))
        ->configurable(false);
    add_common_options(*app, common);
  }

  int run(const RunContext& ctx) override {
    auto log = open_run_log(with_suffix(out, ".run.log"));
    JsonlIndex g(gold), s(system);
    require_same_ids(g, s);
    CireConfig cc;
    cc.chunk_size = chunk_size;
    cc.split_mode = split == "sentence" ? SplitMode::Sentence : SplitMode::FixedChunk;
    if (!prompt_path.empty()) cc.prompt_template = read_text(prompt_path);
    cc.parallelism = parallelism;
    auto judge = make_judge(ctx.config, ctx.config_dir);
    log->info("cire: {} documents, judge.kind={}", g.offsets().size(), ctx.config.get_or("judge.kind", "oracle"));

    JsonlWriter w(out, ctx.provenance);
    std::size_t defined = 0;
    double sum = 0;
    run_in_order(
        sorted_ids(g), common.jobs,
        [&](const std::string& id) { return DocPair{document_from_json(g.read(id)), system_text(s, id)}; },
        [&](DocPair& p) { return cire_score(p.gold, p.deid, cc, *judge); },
        [&](CireScore&& score) {
          if (score.retention) {
            ++defined;
            sum += *score.retention;
          }
          w.write(cire_to_json(score));
        });
    w.close();
    if (auto* rec = dynamic_cast<RecordingJudge*>(judge.get())) rec->save();
    if (defined == 0) {
      log->warn("cire: no document produced a retention score");
      std::cerr << "deidkit: no document produced a retention score\n";
      return 1;
    }
    log->info("cire: mean retention {:.6f} over {} documents", sum / static_cast<double>(defined), defined);
    return 0;
  }
};

// ---------------------------------------------------------------------------

class IcdCommand : public Command {
 public:
  std::string gold, system, out, scale = "unit";
  double threshold = 0.5;

  explicit IcdCommand(CLI::App& parent) {
    app = parent.add_subcommand("icd", "ICD-code overlap (JSC) and ranking agreement (NSDCG)");
    app->add_option("--gold", gold, "Original corpus (JSONL)")->required()->check(CLI::ExistingFile);
    app->add_option("--system", system, "De-identified output (JSONL of doc_id, text)")
        ->required()
        ->check(CLI::ExistingFile);
    app->add_option("--out", out, "Per-document scores (JSONL)")->required()->configurable(false);
    app->add_option("--threshold", threshold, "Probability threshold for JSC binarization")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app->add_option("--scale", scale, "Report scale")->check(CLI::IsMember({"unit", "percent"}))->capture_default_str();
    add_common_options(*app, common);
  }

  int run(const RunContext& ctx) override {
    auto log = open_run_log(with_suffix(out, ".run.log"));
    JsonlIndex g(gold), s(system);
    require_same_ids(g, s);
    IcdConfig ic;
    ic.binarization_threshold = threshold;
    ic.report_scale = scale == "percent" ? ReportScale::Percent : ReportScale::Unit;
    KeyValueConfig cfg = ctx.config;
    if (!cfg.get("icd.seed")) cfg.set("icd.seed", std::to_string(ctx.provenance.seed));
    auto backend = make_icd(cfg, ctx.config_dir);
    log->info("icd: {} documents, icd.kind={}", g.offsets().size(), cfg.get_or("icd.kind", "stub"));

    JsonlWriter w(out, ctx.provenance);
    run_in_order(
        sorted_ids(g), common.jobs,
        [&](const std::string& id) { return DocPair{document_from_json(g.read(id)), system_text(s, id)}; },
        [&](DocPair& p) {
          const auto orig = predict_codes(p.gold.text, *backend);
          const auto deid = predict_codes(p.deid, *backend);
          return json{{"doc_id", p.gold.doc_id}, {"jsc", scaled(jsc(orig, deid, ic), ic)},
                      {"nsdcg", scaled(nsdcg(orig, deid), ic)}};
        },
        [&](json&& row) { w.write(row); });
    w.close();
    log->info("icd: done");
    return 0;
  }
};

// ---------------------------------------------------------------------------

std::string map_file_name(const std::string& doc_id) {
  std::string safe;
  for (char c : doc_id) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '.' ||
                    c == '_' || c == '-';
    safe += ok ? c : '_';
  }
  if (safe != doc_id || safe.empty() || safe == "." || safe == "..") safe += "-" + to_hex(fnv1a(doc_id));
  return safe + ".json";
}

class SurrogateCommand : public Command {
 public:
  std::string in, out, postal = "ca";
  double noise_rate = 0.0;

  explicit SurrogateCommand(CLI::App& parent) {
    app = parent.add_subcommand("surrogate", "Replace PII placeholders with seeded surrogates");
    app->add_option("--in", in, "Corpus with [TAG] placeholders (JSONL)")->required()->check(CLI::ExistingFile);
    app->add_option("--out", out, "Surrogate corpus (JSONL); maps go to <out>.maps/")->required()->configurable(false);
    app->add_option("--noise-rate", noise_rate, "Fraction of surrogates given one edit")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app->add_option("--postal", postal, "Postal code format")->check(CLI::IsMember({"ca", "us"}))->capture_default_str();
    add_common_options(*app, common);
  }

  int run(const RunContext& ctx) override {
    auto log = open_run_log(with_suffix(out, ".run.log"));
    JsonlIndex source(in);
    SurrogateConfig sc;
    sc.seed = ctx.provenance.seed;
    sc.noise_rate = noise_rate;
    sc.locale["postal"] = postal;
    const fs::path maps = with_suffix(out, ".maps");
    fs::create_directories(maps);
    log->info("surrogate: {} documents, noise_rate={}", source.offsets().size(), noise_rate);

    JsonlWriter w(out, ctx.provenance);
    std::size_t replaced = 0, noised = 0;
    run_in_order(
        sorted_ids(source), common.jobs, [&](const std::string& id) { return document_from_json(source.read(id)); },
        [&](AnnotatedDocument& doc) { return build_surrogate_document(doc, sc); },
        [&](SurrogateDocument&& sd) {
          w.write(document_to_json(sd.doc));
          json m = replacement_map_to_json(sd.doc.doc_id, sd.map);
          m["provenance"] = ctx.provenance.to_json();
          write_json(maps / map_file_name(sd.doc.doc_id), m);
          replaced += sd.map.size();
          for (const auto& r : sd.map) noised += r.noised ? 1 : 0;
        });
    w.close();
    log->info("surrogate: {} placeholders replaced, {} noised", replaced, noised);
    return 0;
  }
};

// ---------------------------------------------------------------------------

class SampleFpsCommand : public Command {
 public:
  std::string gold, system, out, mode = "generous";
  bool include_provider = false;
  std::size_t n = 500;

  explicit SampleFpsCommand(CLI::App& parent) {
    app = parent.add_subcommand("sample-fps", "Sample false positives into an annotation CSV");
    app->add_option("--gold", gold, "Gold corpus (JSONL)")->required()->check(CLI::ExistingFile);
    app->add_option("--system", system, "System output (JSONL of doc_id, text)")->required()->check(CLI::ExistingFile);
    app->add_option("--out", out, "Annotation CSV")->required()->configurable(false);
    app->add_option("--n", n, "Samples to draw")->check(CLI::PositiveNumber)->capture_default_str();
    add_schema_options(*app, mode, include_provider);
    add_common_options(*app, common);
  }

  int run(const RunContext& ctx) override {
    auto log = open_run_log(with_suffix(out, ".run.log"));
    JsonlIndex g(gold), s(system);
    require_same_ids(g, s);
    const SchemaConfig schema = schema_from(mode, include_provider);
    omp_set_num_threads(static_cast<int>(common.jobs));
    const auto ids = sorted_ids(g);

    // First pass counts false positives per document; the second rescores only documents that
    // hold a picked one. Ordinals run over documents in doc_id order.
    std::vector<std::size_t> per_doc;
    per_doc.reserve(ids.size());
    for_each_id_batch(ids, common.jobs, [&](const std::vector<std::string>& batch) {
      auto b = score_batch(g, s, batch, schema);
      for (const auto& v : b.score.verdicts) per_doc.push_back(false_positive_indices(v).size());
    });
    std::size_t total = 0;
    for (std::size_t c : per_doc) total += c;

    std::vector<FpSample> samples;
    if (total == 0) {
      std::cerr << "deidkit: warning: no false positives in the corpus; the sample is empty\n";
      log->warn("sample-fps: no false positives");
    } else {
      const auto picked = pick_false_positives(total, n, ctx.provenance.seed);
      std::map<std::size_t, std::vector<std::size_t>> wanted;  // doc position -> local FP ordinals
      std::size_t first = 0, k = 0;
      for (std::size_t d = 0; d < per_doc.size() && k < picked.size(); ++d) {
        while (k < picked.size() && picked[k] < first + per_doc[d]) wanted[d].push_back(picked[k++] - first);
        first += per_doc[d];
      }
      std::vector<std::string> wanted_ids;
      for (const auto& [d, _] : wanted) wanted_ids.push_back(ids[d]);
      auto it = wanted.begin();
      for_each_id_batch(wanted_ids, common.jobs, [&](const std::vector<std::string>& batch) {
        auto b = score_batch(g, s, batch, schema);
        for (std::size_t i = 0; i < batch.size(); ++i, ++it) {
          const auto fps = false_positive_indices(b.score.verdicts[i]);
          for (std::size_t local : it->second) samples.push_back(make_fp_sample(batch[i], b.score.verdicts[i], fps[local]));
        }
      });
    }
    write_file(out, annotation_csv(samples));
    write_sidecar(out, ctx.provenance);
    log->info("sample-fps: {} of {} false positives sampled", samples.size(), total);
    return 0;
  }
};

// ---------------------------------------------------------------------------

struct MetricSpec {
  std::string name;
  std::string path;
  std::string field;
};

MetricSpec parse_metric_spec(const std::string& spec) {
  const auto eq = spec.find('=');
  const auto colon = spec.rfind(':');
  if (eq == std::string::npos || eq == 0 || colon == std::string::npos || colon < eq + 2 || colon + 1 == spec.size()) {
    throw InputError("--metric expects NAME=PATH:FIELD, got '" + spec + "'");
  }
  return {spec.substr(0, eq), spec.substr(eq + 1, colon - eq - 1), spec.substr(colon + 1)};
}

bool parse_bool_cell(const std::string& v) {
  std::string l;
  for (char c : v) l += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (l == "1" || l == "true" || l == "yes") return true;
  if (l == "0" || l == "false" || l == "no") return false;
  throw InputError("clinically_changed must be true/false or 1/0, got '" + v + "'");
}

std::map<std::string, double> truth_by_doc(const fs::path& path) {
  const auto rows = parse_csv(read_text(path));
  const std::vector<std::string> header{"doc_id", "sentence_index", "clinically_changed"};
  if (rows.empty() || rows[0] != header) {
    throw InputError(path.string() + ": header must be doc_id,sentence_index,clinically_changed");
  }
  std::map<std::string, std::vector<GroundTruthLabel>> labels;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 3) throw InputError(path.string() + ": row " + std::to_string(r + 1) + " needs 3 fields");
    try {
      labels[rows[r][0]].push_back({rows[r][0], std::stoul(rows[r][1]), parse_bool_cell(rows[r][2])});
    } catch (const std::logic_error&) {
      throw InputError(path.string() + ": row " + std::to_string(r + 1) + ": bad sentence_index");
    }
  }
  std::map<std::string, double> out;
  for (const auto& [id, ls] : labels) out[id] = ground_truth_cir(ls);
  return out;
}

class CorrelateCommand : public Command {
 public:
  std::vector<std::string> metrics;
  std::string truth, out;

  explicit CorrelateCommand(CLI::App& parent) {
    app = parent.add_subcommand("correlate", "Pearson and Spearman of metric scores against ground-truth CIR");
    app->add_option("--metric", metrics, "NAME=PATH:FIELD, where PATH is a per-document JSONL output")
        ->required()
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    app->add_option("--truth", truth, "Sentence labels CSV: doc_id,sentence_index,clinically_changed")
        ->required()
        ->check(CLI::ExistingFile);
    app->add_option("--out", out, "Report (JSON)")->required()->configurable(false);
    add_common_options(*app, common);
  }

  int run(const RunContext& ctx) override {
    auto log = open_run_log(with_suffix(out, ".run.log"));
    const auto truth_scores = truth_by_doc(truth);
    json reports = json::array();
    bool any_defined = false;
    std::ostringstream table;
    table << "metric\tn\tpearson\tspearman\n";
    for (const auto& spec_text : metrics) {
      const MetricSpec spec = parse_metric_spec(spec_text);
      std::map<std::string, double> scores;
      std::map<std::string, double> t = truth_scores;
      std::size_t skipped = 0;
      std::ifstream in(spec.path);
      if (!in) throw InputError("cannot open " + spec.path);
      std::string line;
      for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
          j = json::parse(line);
        } catch (const json::exception& e) {
          throw InputError(spec.path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (is_meta_record(j)) continue;
        if (!j.contains("doc_id") || !j.contains(spec.field)) {
          throw InputError(spec.path + ":" + std::to_string(lineno) + ": needs doc_id and " + spec.field);
        }
        const std::string id = j["doc_id"].get<std::string>();
        if (j[spec.field].is_null()) {
          // Undefined scores carry no information; drop the document from this comparison.
          ++skipped;
          t.erase(id);
          continue;
        }
        if (!j[spec.field].is_number()) throw InputError(spec.path + ":" + std::to_string(lineno) + ": not a number");
        scores[id] = j[spec.field].get<double>();
      }
      const CorrelationReport r = correlate(spec.name, scores, t);
      any_defined = any_defined || r.pearson_r || r.spearman_rho;
      json jr = correlation_to_json(r);
      jr["skipped_undefined"] = skipped;
      reports.push_back(jr);
      auto cell = [](const std::optional<double>& v) {
        char buf[32];
        if (!v) return std::string("-");
        std::snprintf(buf, sizeof buf, "%.4f", *v);
        return std::string(buf);
      };
      table << r.metric << '\t' << r.n << '\t' << cell(r.pearson_r) << '\t' << cell(r.spearman_rho) << '\n';
      log->info("correlate: {} n={} skipped={}", r.metric, r.n, skipped);
    }
    write_json(out, {{"provenance", ctx.provenance.to_json()}, {"correlations", reports}});
    std::cout << table.str();
    if (!any_defined) {
      std::cerr << "deidkit: every correlation is undefined\n";
      return 1;
    }
    return 0;
  }
};

// ---------------------------------------------------------------------------

class ServeCommand : public Command {
 public:
  std::string annotations, bind_address = "127.0.0.1", static_dir;
  int port = 8080;

  explicit ServeCommand(CLI::App& parent) {
    app = parent.add_subcommand("serve", "Serve the annotation API over an annotation CSV");
    app->add_option("--annotations", annotations, "Annotation CSV, rewritten after every accepted write")
        ->required()
        ->check(CLI::ExistingFile)
        ->configurable(false);
    app->add_option("--port", port, "TCP port; 0 picks a free one")->check(CLI::Range(0, 65535))->capture_default_str();
    app->add_option("--bind", bind_address, "Bind address")->capture_default_str();
    app->add_option("--static-dir", static_dir, "UI assets served at /")->check(CLI::ExistingDirectory);
    add_common_options(*app, common);
  }

  int run(const RunContext&) override {
    // Signals are taken synchronously on this thread so the server threads never see them.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    auto log = open_run_log(with_suffix(annotations, ".run.log"));
    AnnotationStore store(annotations);
    std::optional<fs::path> assets;
    if (!static_dir.empty()) assets = static_dir;
    AnnotationServer server(store, assets);
    const int bound = server.bind(bind_address, port);
    if (bound < 0) throw InputError("cannot bind " + bind_address + ":" + std::to_string(port));
    std::thread worker([&] { server.run(); });
    server.wait_until_ready();
    std::cout << "listening on " << bind_address << ":" << bound << std::endl;
    log->info("serve: {} samples on {}:{}", store.size(), bind_address, bound);

    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
    worker.join();
    log->info("serve: stopped by signal {}", sig);
    return 0;
  }
};

}  // namespace

std::vector<std::unique_ptr<Command>> register_commands(CLI::App& app) {
  std::vector<std::unique_ptr<Command>> cmds;
  cmds.push_back(std::make_unique<ScoreCommand>(app));
  cmds.push_back(std::make_unique<CireCommand>(app));
  cmds.push_back(std::make_unique<IcdCommand>(app));
  cmds.push_back(std::make_unique<SurrogateCommand>(app));
  cmds.push_back(std::make_unique<SampleFpsCommand>(app));
  cmds.push_back(std::make_unique<CorrelateCommand>(app));
  cmds.push_back(std::make_unique<ServeCommand>(app));
  return cmds;
}

}  // namespace deidkit::cli
