#include "run_support.hpp"

#include <spdlog/sinks/basic_file_sink.h>

#include "deidkit/errors.hpp"
#include "deidkit/hashing.hpp"

namespace deidkit::cli {

using nlohmann::json;

json Provenance::to_json() const {
  return {{"tool_version", tool_version}, {"seed", seed}, {"config_hash", config_hash}};
}

std::string Provenance::comment_line() const {
  return "# tool_version=" + tool_version + " seed=" + std::to_string(seed) + " config_hash=" + config_hash;
}

std::string config_hash(const CLI::App& sub, const KeyValueConfig& cfg) {
  std::string text = sub.get_name() + "\n" + sub.config_to_str(true, false);
  for (const auto& [k, v] : cfg.values()) text += k + "=" + v + "\n";
  return to_hex(fnv1a(text));
}

void add_common_options(CLI::App& sub, CommonOptions& opts) {
  sub.add_option("--config", opts.config_path,
                 "Key/value config file; its run.<flag> entries override command-line flags")
      ->check(CLI::ExistingFile)
      ->configurable(false);
  sub.add_option("--seed", opts.seed, "Seed for every random draw of the run");
  sub.add_option("--jobs", opts.jobs, "Documents processed in parallel")->check(CLI::Range(1, 1024))->configurable(false);
}

KeyValueConfig load_config(const CommonOptions& opts) {
  return opts.config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(opts.config_path);
}

std::shared_ptr<spdlog::logger> open_run_log(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto sink = std::make_shared<spdlog::sinks::basic_file_sink_mt>(path.string(), true);
  auto log = std::make_shared<spdlog::logger>("run", sink);
  log->set_pattern("%Y-%m-%dT%H:%M:%S.%e %l %v");
  log->flush_on(spdlog::level::info);
  return log;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw InputError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_json(const std::filesystem::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

JsonlWriter::JsonlWriter(std::filesystem::path path, const Provenance& prov) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  tmp_ = path_;
  tmp_ += ".tmp";
  out_.open(tmp_, std::ios::binary | std::ios::trunc);
  if (!out_) throw InputError("cannot write " + tmp_.string());
  write(json{{"_meta", prov.to_json()}});
}

JsonlWriter::~JsonlWriter() {
  if (!out_.is_open()) return;
  out_.close();
  std::error_code ec;
  std::filesystem::remove(tmp_, ec);
}

void JsonlWriter::write(const json& record) { out_ << record.dump() << '\n'; }

void JsonlWriter::close() {
  if (!out_.flush()) throw InputError("write failed for " + tmp_.string());
  out_.close();
  std::filesystem::rename(tmp_, path_);
}

std::string system_text(const JsonlIndex& system, const std::string& doc_id) {
  const json j = system.read(doc_id);
  if (!j.contains("text") || !j["text"].is_string()) {
    throw InputError(system.path().string() + ": record '" + doc_id + "' has no text");
  }
  return j["text"].get<std::string>();
}

void require_same_ids(const JsonlIndex& gold, const JsonlIndex& system) {
  const auto diff = doc_id_difference(gold, system);
  if (diff.empty()) return;
  std::string msg = "gold and system corpora hold different doc_ids (- gold only, + system only):";
  for (const auto& d : diff) msg += "\n  " + d;
  throw InputError(msg);
}

std::vector<std::string> sorted_ids(const JsonlIndex& index) {
  std::vector<std::string> ids;
  ids.reserve(index.offsets().size());
  for (const auto& [id, _] : index.offsets()) ids.push_back(id);
  return ids;
}

}  // namespace deidkit::cli
