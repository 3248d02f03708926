#ifndef USCRL_CHECKPOINT_HPP_
#define USCRL_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "uscrl/model.hpp"

namespace uscrl {

inline constexpr char kWeightMagic[9] = "USCRLW01";
inline constexpr std::uint32_t kWeightVersion = 1;

// Layer shapes, activations and caps. Infinite caps are written as null.
nlohmann::json checkpoint_metadata(const RepresentationModel& f, const std::string& blob_name);

// Weight blob: 8-byte magic, u32 version, u32 layer count, then every
// weight matrix row-major as little-endian float64.
std::string encode_weights(const RepresentationModel& f);
void decode_weights(const std::string& blob, RepresentationModel& f);

// Writes `<path>` (JSON) and `<path without extension>.bin`.
void save_checkpoint(const RepresentationModel& f, const std::filesystem::path& json_path);
RepresentationModel load_checkpoint(const std::filesystem::path& json_path);

}  // namespace uscrl

#endif  // USCRL_CHECKPOINT_HPP_
