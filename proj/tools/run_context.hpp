#ifndef USCRL_TOOLS_RUN_CONTEXT_HPP_
#define USCRL_TOOLS_RUN_CONTEXT_HPP_

#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "uscrl/serialize.hpp"

namespace uscrl::cli {

struct GlobalOptions {
  std::filesystem::path config;
  std::filesystem::path out = ".";
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
};

std::string sha256_hex(const std::string& bytes);
std::string utc_timestamp();

Json read_config(const std::filesystem::path& path);

/// Bookkeeping for one invocation: the canonical config and its digest, the
/// output directory and the files written so far. finish() writes
/// manifest.json next to the outputs.
class RunContext {
 public:
  RunContext(std::string subcommand, Json config, const GlobalOptions& opts);

  const Json& config() const noexcept { return config_; }
  const std::string& config_hash() const noexcept { return hash_; }
  const std::filesystem::path& out_dir() const noexcept { return out_; }
  std::size_t jobs() const noexcept { return jobs_; }

  // Path for an output file; the file is listed in the manifest.
  std::filesystem::path output(const std::string& name);
  void record_seeds(std::vector<std::uint64_t> seeds) { seeds_ = std::move(seeds); }
  void write_json(const std::string& name, Json body);
  void finish();

 private:
  std::string subcommand_;
  Json config_;
  std::string hash_;
  std::filesystem::path out_;
  std::size_t jobs_;
  std::string started_;
  std::vector<std::string> outputs_;
  std::vector<std::uint64_t> seeds_;
};

inline constexpr const char* kManifestName = "manifest.json";

// Materializes a dataset, going through USCRL_CACHE_DIR when it is set.
LabeledDataset load_dataset(const DatasetSource& src, const Json& source_json);

// Runs fn(0..count-1) on up to `jobs` threads. The first failing job (by
// index) is rethrown with its index prepended, keeping the error category.
void run_jobs(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn);

}  // namespace uscrl::cli

#endif  // USCRL_TOOLS_RUN_CONTEXT_HPP_
