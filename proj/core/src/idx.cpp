#include "uscrl/idx.hpp"

#include <array>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "uscrl/error.hpp"

namespace uscrl {
namespace {

constexpr std::size_t kNumDigits = 10;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("idx: cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& buf, std::size_t offset,
                        const std::string& field, const std::filesystem::path& path) {
  if (buf.size() < offset + 4) {
    throw FormatError("idx: " + path.string() + ": truncated header, missing " + field);
  }
  return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
         (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

void write_be32(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                              static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b.data(), 4);
}

}  // namespace

LabeledDataset load_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path) {
  const auto images = read_file(images_path);
  const auto labels = read_file(labels_path);

  const std::uint32_t img_magic = read_be32(images, 0, "magic", images_path);
  if (img_magic != kIdxImagesMagic) {
    throw FormatError("idx: " + images_path.string() + ": magic 0x" +
                      (std::ostringstream() << std::hex << img_magic).str() +
                      " is not the image magic 0x00000803");
  }
  const std::uint32_t img_count = read_be32(images, 4, "count", images_path);
  const std::uint32_t rows = read_be32(images, 8, "rows", images_path);
  const std::uint32_t cols = read_be32(images, 12, "cols", images_path);

  const std::uint32_t lbl_magic = read_be32(labels, 0, "magic", labels_path);
  if (lbl_magic != kIdxLabelsMagic) {
    throw FormatError("idx: " + labels_path.string() + ": magic 0x" +
                      (std::ostringstream() << std::hex << lbl_magic).str() +
                      " is not the label magic 0x00000801");
  }
  const std::uint32_t lbl_count = read_be32(labels, 4, "count", labels_path);

  if (img_count == 0 || lbl_count == 0) {
    throw FormatError("idx: count: empty " + std::string(img_count == 0 ? "image" : "label") +
                      " file");
  }
  if (img_count != lbl_count) {
    throw FormatError("idx: count: " + std::to_string(img_count) + " images but " +
                      std::to_string(lbl_count) + " labels");
  }
  const std::size_t pixels = std::size_t{rows} * cols;
  if (pixels == 0) throw FormatError("idx: rows/cols: zero-sized images");
  if (images.size() < 16 + pixels * img_count) {
    throw FormatError("idx: " + images_path.string() + ": truncated payload, expected " +
                      std::to_string(pixels * img_count) + " pixel bytes, found " +
                      std::to_string(images.size() - 16));
  }
  if (labels.size() < 8 + std::size_t{lbl_count}) {
    throw FormatError("idx: " + labels_path.string() + ": truncated payload, expected " +
                      std::to_string(lbl_count) + " label bytes, found " +
                      std::to_string(labels.size() - 8));
  }

  Eigen::MatrixXd feats(static_cast<Eigen::Index>(pixels), static_cast<Eigen::Index>(img_count));
  std::vector<ClassId> ys(img_count);
  for (std::size_t i = 0; i < img_count; ++i) {
    const std::uint8_t y = labels[8 + i];
    if (y >= kNumDigits) {
      throw FormatError("idx: label: value " + std::to_string(y) + " at index " +
                        std::to_string(i) + " outside [0, 10)");
    }
    ys[i] = y;
    const std::uint8_t* src = images.data() + 16 + i * pixels;
    for (std::size_t p = 0; p < pixels; ++p) {
      feats(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(i)) = src[p] / 255.0;
    }
  }
  return LabeledDataset(std::move(feats), std::move(ys), kNumDigits);
}

void write_idx_images(const std::filesystem::path& path, std::uint32_t count,
                      std::uint32_t rows, std::uint32_t cols,
                      std::span<const std::uint8_t> pixels) {
  if (pixels.size() != std::size_t{count} * rows * cols) {
    throw PreconditionError("write_idx_images: pixel buffer size mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("idx: cannot write " + path.string());
  write_be32(out, kIdxImagesMagic);
  write_be32(out, count);
  write_be32(out, rows);
  write_be32(out, cols);
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
}

void write_idx_labels(const std::filesystem::path& path,
                      std::span<const std::uint8_t> labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("idx: cannot write " + path.string());
  write_be32(out, kIdxLabelsMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
}

}  // namespace uscrl
