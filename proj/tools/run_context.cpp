#include "run_context.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "uscrl/error.hpp"

namespace uscrl::cli {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 digest failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: invalid JSON in " + path.string() + ": " + e.what());
  }
}

RunContext::RunContext(std::string subcommand, Json config, const GlobalOptions& opts)
    : subcommand_(std::move(subcommand)),
      config_(std::move(config)),
      out_(opts.out),
      jobs_(std::max<std::size_t>(1, opts.jobs)),
      started_(utc_timestamp()) {
  // nlohmann objects are key-sorted, so dump() is already canonical.
  hash_ = "sha256:" + sha256_hex(config_.dump());
  std::error_code ec;
  fs::create_directories(out_, ec);
  if (ec) throw ConfigError("--out: cannot create " + out_.string() + ": " + ec.message());
}

fs::path RunContext::output(const std::string& name) {
  if (std::find(outputs_.begin(), outputs_.end(), name) == outputs_.end()) {
    outputs_.push_back(name);
  }
  return out_ / name;
}

void RunContext::write_json(const std::string& name, Json body) {
  body["manifest"] = kManifestName;
  body["config_hash"] = hash_;
  std::ofstream os(output(name));
  os << body.dump(2) << '\n';
  if (!os) throw Error("cannot write " + (out_ / name).string());
}

void RunContext::finish() {
  Json m = {{"subcommand", subcommand_},
            {"config_hash", hash_},
            {"config", config_},
            {"seeds", seeds_},
            {"tool_version", USCRL_VERSION},
            {"csv_schema_version", kCsvSchemaVersion},
            {"started_at", started_},
            {"finished_at", utc_timestamp()},
            {"outputs", outputs_}};
  std::ofstream os(out_ / kManifestName);
  os << m.dump(2) << '\n';
  if (!os) throw Error("cannot write manifest in " + out_.string());
}

namespace {

constexpr char kCacheMagic[8] = {'U', 'S', 'C', 'R', 'L', 'D', 'S', '1'};

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
bool get(std::istream& is, T& v) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof v));
}

std::optional<LabeledDataset> read_cache(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  char magic[8];
  std::uint64_t n = 0, dim = 0, classes = 0;
  if (!is.read(magic, 8) || !std::equal(magic, magic + 8, kCacheMagic)) return std::nullopt;
  if (!get(is, n) || !get(is, dim) || !get(is, classes)) return std::nullopt;
  std::vector<ClassId> labels(n);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
  if (!is.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(n * sizeof(ClassId))) ||
      !is.read(reinterpret_cast<char*>(x.data()), static_cast<std::streamsize>(n * dim * sizeof(double)))) {
    return std::nullopt;
  }
  return LabeledDataset(std::move(x), std::move(labels), classes);
}

void write_cache(const fs::path& path, const LabeledDataset& ds) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) return;
    os.write(kCacheMagic, 8);
    put<std::uint64_t>(os, ds.size());
    put<std::uint64_t>(os, ds.dim());
    put<std::uint64_t>(os, ds.num_classes());
    os.write(reinterpret_cast<const char*>(ds.labels().data()),
             static_cast<std::streamsize>(ds.size() * sizeof(ClassId)));
    os.write(reinterpret_cast<const char*>(ds.features().data()),
             static_cast<std::streamsize>(ds.size() * ds.dim() * sizeof(double)));
    if (!os) return;
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
}

}  // namespace

LabeledDataset load_dataset(const DatasetSource& src, const Json& source_json) {
  const char* dir = std::getenv("USCRL_CACHE_DIR");
  if (dir == nullptr || *dir == '\0' || src.kind == "inline") return materialize(src);

  Json key = source_json;
  if (src.kind == "idx") {
    // Key on file identity as well as the paths.
    for (const fs::path& p : {src.images, src.labels}) {
      std::error_code ec;
      key["_sizes"].push_back(fs::file_size(p, ec));
      key["_mtimes"].push_back(
          ec ? 0 : static_cast<std::int64_t>(fs::last_write_time(p, ec).time_since_epoch().count()));
    }
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path path = fs::path(dir) / (sha256_hex(key.dump()) + ".ds");
  if (auto cached = read_cache(path)) return std::move(*cached);
  LabeledDataset ds = materialize(src);
  write_cache(path, ds);
  return ds;
}

namespace {

[[noreturn]] void rethrow_with_index(std::size_t job, std::exception_ptr ep) {
  const std::string prefix = "job " + std::to_string(job) + ": ";
  try {
    std::rethrow_exception(ep);
  } catch (const SizeError& e) {
    throw SizeError(prefix + e.what(), e.exact_count());
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const FormatError& e) {
    throw FormatError(prefix + e.what());
  } catch (const PreconditionError& e) {
    throw PreconditionError(prefix + e.what());
  } catch (const NumericError& e) {
    throw NumericError(prefix + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(prefix + e.what());
  }
}

}  // namespace

void run_jobs(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(1, jobs), count);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (errors[i]) rethrow_with_index(i, errors[i]);
  }
}

}  // namespace uscrl::cli
