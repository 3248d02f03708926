#ifndef USCRL_IDX_HPP_
#define USCRL_IDX_HPP_

#include <cstdint>
#include <filesystem>
#include <span>

#include "uscrl/dataset.hpp"

namespace uscrl {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

// Reads an IDX image/label pair (MNIST layout). Pixels are scaled to [0, 1]
// and each image is flattened row-major into a vector of rows*cols entries.
// Labels must lie in [0, 10); the dataset always has 10 classes.
LabeledDataset load_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path);

void write_idx_images(const std::filesystem::path& path, std::uint32_t count,
                      std::uint32_t rows, std::uint32_t cols,
                      std::span<const std::uint8_t> pixels);
void write_idx_labels(const std::filesystem::path& path,
                      std::span<const std::uint8_t> labels);

}  // namespace uscrl

#endif  // USCRL_IDX_HPP_
