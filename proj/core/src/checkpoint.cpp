#include "uscrl/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "uscrl/error.hpp"

namespace uscrl {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f64(std::string& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_le(const std::string& in, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + static_cast<std::size_t>(i)])) << (8 * i);
  }
  return v;
}

nlohmann::json cap_json(double cap) {
  return std::isfinite(cap) ? nlohmann::json(cap) : nlohmann::json(nullptr);
}

double cap_from_json(const nlohmann::json& j, const std::string& field) {
  if (j.is_null()) return kInf;
  if (!j.is_number()) throw FormatError("checkpoint field '" + field + "' must be a number or null");
  return j.get<double>();
}

}  // namespace

nlohmann::json checkpoint_metadata(const RepresentationModel& f, const std::string& blob_name) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : f.layers()) {
    layers.push_back({{"rows", l.weight.rows()},
                      {"cols", l.weight.cols()},
                      {"activation", std::string(to_string(l.activation))},
                      {"spectral_cap", cap_json(l.spectral_cap)}});
  }
  return {{"format", "uscrl-checkpoint"},
          {"version", kWeightVersion},
          {"family", std::string(to_string(f.family()))},
          {"norm21_cap", cap_json(f.norm21_cap())},
          {"blob", blob_name},
          {"layers", layers}};
}

std::string encode_weights(const RepresentationModel& f) {
  std::string out(kWeightMagic, 8);
  put_u32(out, kWeightVersion);
  put_u32(out, static_cast<std::uint32_t>(f.num_layers()));
  for (const auto& l : f.layers()) {
    for (Eigen::Index i = 0; i < l.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < l.weight.cols(); ++j) put_f64(out, l.weight(i, j));
    }
  }
  return out;
}

void decode_weights(const std::string& blob, RepresentationModel& f) {
  if (blob.size() < 16) throw FormatError("weight blob: header truncated");
  if (std::memcmp(blob.data(), kWeightMagic, 8) != 0) throw FormatError("weight blob: bad magic");
  const auto version = static_cast<std::uint32_t>(get_le(blob, 8, 4));
  if (version != kWeightVersion) {
    throw FormatError("weight blob: unsupported version " + std::to_string(version));
  }
  const auto count = static_cast<std::uint32_t>(get_le(blob, 12, 4));
  if (count != f.num_layers()) {
    throw FormatError("weight blob: layer count " + std::to_string(count) +
                      " does not match metadata (" + std::to_string(f.num_layers()) + ")");
  }
  std::size_t expected = 16;
  for (const auto& l : f.layers()) expected += 8 * static_cast<std::size_t>(l.weight.size());
  if (blob.size() != expected) {
    throw FormatError("weight blob: payload is " + std::to_string(blob.size()) +
                      " bytes, expected " + std::to_string(expected));
  }
  std::size_t pos = 16;
  for (std::size_t l = 0; l < f.num_layers(); ++l) {
    auto& w = f.layer(l).weight;
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        w(i, j) = std::bit_cast<double>(get_le(blob, pos, 8));
        pos += 8;
      }
    }
  }
}

void save_checkpoint(const RepresentationModel& f, const std::filesystem::path& json_path) {
  auto blob_path = json_path;
  blob_path.replace_extension(".bin");
  {
    std::ofstream js(json_path);
    if (!js) throw Error("cannot write " + json_path.string());
    js << checkpoint_metadata(f, blob_path.filename().string()).dump(2) << '\n';
  }
  std::ofstream bs(blob_path, std::ios::binary);
  if (!bs) throw Error("cannot write " + blob_path.string());
  const std::string blob = encode_weights(f);
  bs.write(blob.data(), static_cast<std::streamsize>(blob.size()));
}

RepresentationModel load_checkpoint(const std::filesystem::path& json_path) {
  std::ifstream js(json_path);
  if (!js) throw FormatError("cannot open checkpoint " + json_path.string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(js);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint " + json_path.string() + ": " + e.what());
  }
  try {
    const auto family = model_family_from_string(meta.at("family").get<std::string>());
    std::vector<Layer> layers;
    for (const auto& lj : meta.at("layers")) {
      Layer l;
      l.weight = Eigen::MatrixXd::Zero(lj.at("rows").get<Eigen::Index>(), lj.at("cols").get<Eigen::Index>());
      l.activation = activation_from_string(lj.at("activation").get<std::string>());
      l.spectral_cap = cap_from_json(lj.at("spectral_cap"), "layers[].spectral_cap");
      layers.push_back(std::move(l));
    }
    RepresentationModel f;
    if (family == ModelFamily::Linear) {
      if (layers.size() != 1) throw FormatError("linear checkpoint must have exactly one layer");
      f = RepresentationModel::linear(layers[0].weight, cap_from_json(meta.at("norm21_cap"), "norm21_cap"),
                                      layers[0].spectral_cap);
    } else {
      f = RepresentationModel::mlp(std::move(layers));
    }
    const auto blob_path = json_path.parent_path() / meta.at("blob").get<std::string>();
    std::ifstream bs(blob_path, std::ios::binary);
    if (!bs) throw FormatError("cannot open weight blob " + blob_path.string());
    std::ostringstream buf;
    buf << bs.rdbuf();
    decode_weights(buf.str(), f);
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint " + json_path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw FormatError("checkpoint " + json_path.string() + ": " + e.what());
  }
}

}  // namespace uscrl
