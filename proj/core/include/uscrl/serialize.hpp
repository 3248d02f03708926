#ifndef USCRL_SERIALIZE_HPP_
#define USCRL_SERIALIZE_HPP_

#include <filesystem>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "uscrl/bounds.hpp"
#include "uscrl/dataset.hpp"
#include "uscrl/experiments.hpp"
#include "uscrl/loss.hpp"
#include "uscrl/risk.hpp"
#include "uscrl/trainer.hpp"
#include "uscrl/tuples.hpp"

namespace uscrl {

using Json = nlohmann::json;

inline constexpr int kCsvSchemaVersion = 1;

// Shortest round-trip decimal for a double ("%.17g"), used in every CSV.
std::string format_double(double x);

Json to_json(const RiskEstimate& e);
Json to_json(const BoundReport& r);
Json to_json(const LossSpec& l);
Json to_json(const TrainReport& r, bool include_timing);
Json to_json(const ComplexityResult& r);

std::string tuple_jsonl_line(const TupleView& t);
void write_tuples_jsonl(std::ostream& os, const TupleSet& tset);

extern const char* const kRegimeCsvHeader;
extern const char* const kComplexityCsvHeader;
extern const char* const kBoundCsvHeader;

// `config_hash` ties each row to the run manifest that produced it.
void write_regime_csv(std::ostream& os, std::span<const RegimeRow> rows,
                      std::string_view config_hash);
// One row per (configuration, seed).
void write_complexity_csv(std::ostream& os, std::span<const ComplexityResult> results,
                          std::string_view config_hash);
// `sweep_value` is the swept parameter at this grid point.
void write_bound_csv_row(std::ostream& os, const std::string& sweep_param, double sweep_value,
                         const BoundReport& r, std::string_view config_hash);

// Config parsing. Every error is a ConfigError naming the JSON path.

// Rejects any key of object `j` that is not in `allowed`.
void check_config_keys(const Json& j, const std::string& path,
                       std::initializer_list<std::string_view> allowed);
LossSpec parse_loss(const Json& j, const std::string& path, std::size_t k);
ModelConfig parse_model(const Json& j, const std::string& path);
TrainConfig parse_train(const Json& j, const std::string& path);
GaussianSpec parse_gaussian(const Json& j, const std::string& path);
BoundInputs parse_bound_inputs(const Json& j, const std::string& path);
RegimeOptions parse_regime_options(const Json& j, const std::string& path);
ComplexityOptions parse_complexity_options(const Json& j, const std::string& path);

/// A dataset described in a config: a Gaussian draw, an IDX pair, or an
/// inline toy pool.
struct DatasetSource {
  std::string kind;  // "gaussian", "idx" or "inline"
  std::optional<GaussianSpec> spec;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::filesystem::path images;
  std::filesystem::path labels;
  std::size_t limit = 0;  // idx: keep the first `limit` samples (0 = all)
  Json inline_data;
};

DatasetSource parse_dataset_source(const Json& j, const std::string& path);
LabeledDataset materialize(const DatasetSource& src);

}  // namespace uscrl

#endif  // USCRL_SERIALIZE_HPP_
