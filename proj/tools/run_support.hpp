#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/logger.h>

#include "deidkit/config.hpp"
#include "deidkit/corpus.hpp"

namespace deidkit::cli {

/// Stamped into every artifact so a result can be traced to the run that produced it.
struct Provenance {
  std::string tool_version;
  std::uint64_t seed = 0;
  std::string config_hash;

  nlohmann::json to_json() const;
  /// `# tool_version=... seed=... config_hash=...`
  std::string comment_line() const;
};

/// Hash over the effective values of the subcommand's result-affecting options and every entry
/// of the config file.
std::string config_hash(const CLI::App& sub, const KeyValueConfig& cfg);

/// Options shared by every subcommand.
struct CommonOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

void add_common_options(CLI::App& sub, CommonOptions& opts);

/// Loaded config file, or an empty one.
KeyValueConfig load_config(const CommonOptions& opts);

/// Timestamped log next to the artifacts. Timestamps never go into the artifacts themselves.
std::shared_ptr<spdlog::logger> open_run_log(const std::filesystem::path& path);

/// Writes through a temp file then renames, so a failed run never leaves half an artifact.
void write_file(const std::filesystem::path& path, const std::string& contents);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Buffered JSONL writer whose first line is the provenance record.
class JsonlWriter {
 public:
  JsonlWriter(std::filesystem::path path, const Provenance& prov);
  /// Drops the temp file unless close() succeeded.
  ~JsonlWriter();
  void write(const nlohmann::json& record);
  void close();

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
};

/// Text of a system-output record, which needs only doc_id and text.
std::string system_text(const JsonlIndex& system, const std::string& doc_id);

/// Fails with a listing when the two corpora do not hold the same doc_ids.
void require_same_ids(const JsonlIndex& gold, const JsonlIndex& system);

std::vector<std::string> sorted_ids(const JsonlIndex& index);

/// Loads batches serially, computes each batch with up to `jobs` threads, then emits results in
/// id order. Only one batch is resident at a time.
template <class Load, class Compute, class Emit>
void run_in_order(const std::vector<std::string>& ids, std::size_t jobs, Load load, Compute compute, Emit emit) {
  using In = decltype(load(ids.front()));
  using Out = decltype(compute(std::declval<In&>()));
  jobs = std::max<std::size_t>(1, jobs);
  const std::size_t batch = jobs * 16;
  for (std::size_t b = 0; b < ids.size(); b += batch) {
    const std::size_t e = std::min(ids.size(), b + batch);
    std::vector<In> inputs;
    inputs.reserve(e - b);
    for (std::size_t i = b; i < e; ++i) inputs.push_back(load(ids[i]));
    std::vector<std::optional<Out>> outs(inputs.size());
    std::vector<std::exception_ptr> errors(inputs.size());
    const auto n = static_cast<std::ptrdiff_t>(inputs.size());
#pragma omp parallel for schedule(dynamic) num_threads(static_cast<int>(jobs))
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      try {
        outs[static_cast<std::size_t>(k)] = compute(inputs[static_cast<std::size_t>(k)]);
      } catch (...) {
        errors[static_cast<std::size_t>(k)] = std::current_exception();
      }
    }
    for (std::size_t k = 0; k < outs.size(); ++k) {
      if (errors[k]) std::rethrow_exception(errors[k]);
      emit(std::move(*outs[k]));
    }
  }
}

}  // namespace deidkit::cli
