#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "support.hpp"
#include "uscrl/checkpoint.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

class Sandbox {
 public:
  Sandbox() {
    root_ = fs::temp_directory_path() / ("uscrl_cli_" + std::to_string(::getpid()) + "_" +
                                         std::to_string(counter_++));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  ~Sandbox() { fs::remove_all(root_); }

  fs::path path(const std::string& name) const { return root_ / name; }

  fs::path write(const std::string& name, const json& j) const {
    std::ofstream(path(name)) << j.dump(2);
    return path(name);
  }

  Result run(const std::string& args) const {
    const std::string cmd = std::string(USCRL_CLI_PATH) + " " + args + " 2>" +
                            (root_ / "stderr.txt").string();
    Result r;
    FILE* p = ::popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
  }

  std::string err() const { return slurp(root_ / "stderr.txt"); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

 private:
  fs::path root_;
  static inline int counter_ = 0;
};

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

// Toy pool with class sizes {3, 3, 2}: 72 tuples for k = 1.
json toy_pool() {
  json features = json::array();
  for (int i = 0; i < 8; ++i) features.push_back({0.1 * i, 1.0 - 0.2 * i});
  return {{"source", "inline"},
          {"features", features},
          {"labels", {0, 0, 0, 1, 1, 1, 2, 2}},
          {"num_classes", 3}};
}

json gaussian_pool(int n, int classes = 3) {
  return {{"source", "gaussian"},
          {"n", n},
          {"seed", 1},
          {"spec", {{"num_classes", classes}, {"dim", 4}, {"sigma", 0.3}, {"center_scale", 3.0}}}};
}

json small_train() {
  return {{"model", {{"hidden", {8}}, {"output_dim", 4}}},
          {"k", 2},
          {"m_tuples", 200},
          {"epochs", 2},
          {"batch", 16},
          {"eval_draws", 1000},
          {"probe_samples", 100}};
}

void write_be32(std::ofstream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

TEST_CASE("sample") {
  Sandbox sb;
  const auto cfg = sb.write("c.json", {{"dataset", toy_pool()}, {"regime", "all"}, {"k", 1}});
  const auto r = sb.run("sample --config " + cfg.string() + " --out " + sb.path("o").string());
  REQUIRE(r.code == 0);
  CHECK(r.out.find("tuples=72") != std::string::npos);
  const std::string lines = Sandbox::slurp(sb.path("o/tuples.jsonl"));
  CHECK(count_lines(lines) == 72);
  CHECK(json::parse(lines.substr(0, lines.find('\n'))).contains("negatives"));
  CHECK(fs::exists(sb.path("o/manifest.json")));

  const auto empty = sb.write("e.json", {{"dataset", toy_pool()}, {"regime", "sub"}, {"m_tuples", 0}});
  REQUIRE(sb.run("sample --config " + empty.string() + " --out " + sb.path("e").string()).code == 0);
  CHECK(fs::file_size(sb.path("e/tuples.jsonl")) == 0);

  std::ofstream(sb.path("bad.json")) << "{ not json";
  CHECK(sb.run("sample --config " + sb.path("bad.json").string() + " --out " + sb.path("b").string()).code == 2);
  const auto typo = sb.write("t.json", {{"dataset", toy_pool()}, {"regmie", "sub"}});
  CHECK(sb.run("sample --config " + typo.string() + " --out " + sb.path("t").string()).code == 2);
  CHECK(sb.err().find("regmie") != std::string::npos);
  CHECK(sb.run("sample --out " + sb.path("n").string()).code == 2);
}

TEST_CASE("estimate") {
  Sandbox sb;
  const json model = {{"family", "linear"}, {"output_dim", 2}, {"spectral_cap", 2.0}};
  const auto exact = sb.write("x.json", {{"dataset", toy_pool()}, {"model", model}, {"k", 1},
                                         {"estimator", "ustat_exact"}});
  const auto enumr = sb.write("y.json", {{"dataset", toy_pool()}, {"model", model}, {"k", 1},
                                         {"estimator", "enumeration_mean"}});
  REQUIRE(sb.run("estimate --config " + exact.string() + " --out " + sb.path("x").string()).code == 0);
  REQUIRE(sb.run("estimate --config " + enumr.string() + " --out " + sb.path("y").string()).code == 0);
  const auto jx = json::parse(Sandbox::slurp(sb.path("x/estimate.json")));
  const auto jy = json::parse(Sandbox::slurp(sb.path("y/estimate.json")));
  CHECK(std::abs(jx["value"].get<double>() - jy["value"].get<double>()) < 1e-12);
  CHECK(jx["n_terms"] == 72);
  const auto mx = json::parse(Sandbox::slurp(sb.path("x/manifest.json")));
  CHECK(jx["config_hash"] == mx["config_hash"]);

  // A zero-weight checkpoint scores every tuple at log(1 + k).
  auto f = uscrl::test::random_linear(2, 2, 1);
  f.set_zero();
  uscrl::save_checkpoint(f, sb.path("zero.json"));
  const auto zc = sb.write("z.json", {{"dataset", toy_pool()}, {"checkpoint", "zero.json"}, {"k", 1},
                                      {"estimator", "ustat_exact"}, {"loss", {{"clip", nullptr}}}});
  REQUIRE(sb.run("estimate --config " + zc.string() + " --out " + sb.path("z").string()).code == 0);
  const auto jz = json::parse(Sandbox::slurp(sb.path("z/estimate.json")));
  CHECK(std::abs(jz["value"].get<double>() - std::log(2.0)) < 1e-15);

  const auto pop = sb.write("p.json", {{"dataset", gaussian_pool(30)}, {"model", model},
                                       {"estimator", "population_mc"}, {"draws", 500}});
  CHECK(sb.run("estimate --config " + pop.string() + " --out " + sb.path("p").string()).code == 0);

  // population_mc needs a generator; an IDX pool has none.
  {
    std::ofstream im(sb.path("img.idx"), std::ios::binary), lb(sb.path("lab.idx"), std::ios::binary);
    write_be32(im, 0x00000803);
    write_be32(im, 6);
    write_be32(im, 2);
    write_be32(im, 2);
    write_be32(lb, 0x00000801);
    write_be32(lb, 6);
    for (int i = 0; i < 24; ++i) im.put(static_cast<char>(i * 10));
    for (int i = 0; i < 6; ++i) lb.put(static_cast<char>(i % 2));
  }
  const json idx = {{"source", "idx"}, {"images", "img.idx"}, {"labels", "lab.idx"}};
  const auto pidx = sb.write("q.json", {{"dataset", idx}, {"model", model}, {"estimator", "population_mc"}});
  CHECK(sb.run("estimate --config " + pidx.string() + " --out " + sb.path("q").string()).code == 3);
  CHECK(sb.err().find("unsupported") != std::string::npos);
  const auto uidx = sb.write("u.json", {{"dataset", idx}, {"model", model}, {"k", 1}});
  CHECK(sb.run("estimate --config " + uidx.string() + " --out " + sb.path("u").string()).code == 0);

  const auto big = sb.write("c.json", {{"dataset", gaussian_pool(200)}, {"model", model}, {"cap", 10}});
  CHECK(sb.run("estimate --config " + big.string() + " --out " + sb.path("c").string()).code == 3);
}

TEST_CASE("bounds") {
  Sandbox sb;
  const json inputs = {{"n", 1000}, {"k", 3}, {"num_classes", 10}, {"k_per_class", std::vector<double>(10, 0.0)}};
  const auto one = sb.write("a.json", {{"theorem", "basic"}, {"inputs", inputs}});
  REQUIRE(sb.run("bounds --config " + one.string() + " --out " + sb.path("a").string()).code == 0);
  const auto j = json::parse(Sandbox::slurp(sb.path("a/bounds.json")));
  CHECK(std::abs(j["total"].get<double>() - 44 * std::sqrt(std::log(800.0) / 100)) < 1e-12);

  const auto sweep = sb.write("s.json", {{"theorem", "basic"}, {"inputs", inputs},
                                         {"sweep", {{"param", "k"}, {"start", 2}, {"stop", 50}}}});
  REQUIRE(sb.run("bounds --config " + sweep.string() + " --out " + sb.path("s").string()).code == 0);
  const std::string csv = Sandbox::slurp(sb.path("s/bounds.csv"));
  CHECK(count_lines(csv) == 50);  // header + 49 rows

  json bad = inputs;
  bad["delta"] = 1.5;
  const auto d = sb.write("d.json", {{"theorem", "basic"}, {"inputs", bad}});
  CHECK(sb.run("bounds --config " + d.string() + " --out " + sb.path("d").string()).code == 2);
  CHECK(sb.err().find("delta") != std::string::npos);
  const auto t = sb.write("t.json", {{"theorem", "magic"}, {"inputs", inputs}});
  CHECK(sb.run("bounds --config " + t.string() + " --out " + sb.path("t").string()).code == 2);
}

TEST_CASE("train") {
  Sandbox sb;
  const auto cfg = sb.write("c.json", {{"dataset", gaussian_pool(60)}, {"train", small_train()}});
  REQUIRE(sb.run("train --config " + cfg.string() + " --out " + sb.path("a").string()).code == 0);
  REQUIRE(sb.run("train --config " + cfg.string() + " --out " + sb.path("b").string()).code == 0);
  for (const char* f : {"model.json", "model.bin", "report.json"}) {
    CHECK(Sandbox::slurp(sb.path("a") / f) == Sandbox::slurp(sb.path("b") / f));
  }
  const auto m = json::parse(Sandbox::slurp(sb.path("a/manifest.json")));
  CHECK(m["subcommand"] == "train");
  CHECK(m["config_hash"].get<std::string>().rfind("sha256:", 0) == 0);

  // The trained checkpoint loads back for estimation.
  const auto est = sb.write("e.json", {{"dataset", gaussian_pool(60)}, {"checkpoint", "a/model.json"},
                                       {"estimator", "ustat_mc"}, {"draws", 100}});
  CHECK(sb.run("estimate --config " + est.string() + " --out " + sb.path("e").string()).code == 0);

  REQUIRE(sb.run("train --config " + cfg.string() + " --seed 5 --out " + sb.path("c").string()).code == 0);
  CHECK(Sandbox::slurp(sb.path("a/model.bin")) != Sandbox::slurp(sb.path("c/model.bin")));
}

TEST_CASE("experiment regimes") {
  Sandbox sb;
  json train = small_train();
  train["epochs"] = 1;
  const auto cfg = sb.write(
      "c.json", {{"dataset", gaussian_pool(150)},
                 {"train", train},
                 {"regimes", {{"n_disjoint", 5}, {"m_grid", {20}}, {"seeds", {0, 1, 2, 3, 4}},
                              {"include_all", false}}}});
  REQUIRE(sb.run("experiment regimes --config " + cfg.string() + " --out " + sb.path("a").string()).code == 0);
  const std::string a = Sandbox::slurp(sb.path("a/regimes.csv"));
  CHECK(count_lines(a) == 11);
  REQUIRE(sb.run("experiment regimes --config " + cfg.string() + " --out " + sb.path("b").string()).code == 0);
  CHECK(Sandbox::slurp(sb.path("b/regimes.csv")) == a);
  REQUIRE(sb.run("experiment regimes --jobs 3 --config " + cfg.string() + " --out " + sb.path("j").string()).code == 0);
  CHECK(Sandbox::slurp(sb.path("j/regimes.csv")) == a);
}

TEST_CASE("experiment complexity") {
  Sandbox sb;
  json train = small_train();
  train["epochs"] = 1;
  train["m_tuples"] = 50;
  const auto cfg = sb.write(
      "c.json", {{"spec", {{"num_classes", 3}, {"dim", 4}, {"sigma", 0.3}, {"center_scale", 3.0}}},
                 {"train", train},
                 {"complexity", {{"epsilon", 0.5}, {"lo", 20}, {"hi", 40}, {"search_tol", 10},
                                 {"seeds", {0, 1, 2}}, {"ref_multiplier", 1}, {"ref_epoch_factor", 1},
                                 {"m_equals_n_squared", false}}},
                 {"configs", {{{"k", 2}}, {{"k", 4}}, {{"k", 8}}}}});
  REQUIRE(sb.run("experiment complexity --config " + cfg.string() + " --out " + sb.path("a").string()).code == 0);
  const std::string a = Sandbox::slurp(sb.path("a/complexity.csv"));
  CHECK(count_lines(a) == 10);
  REQUIRE(sb.run("experiment complexity --jobs 2 --config " + cfg.string() + " --out " + sb.path("b").string()).code == 0);
  CHECK(Sandbox::slurp(sb.path("b/complexity.csv")) == a);
  CHECK(fs::exists(sb.path("a/complexity.json")));
}

TEST_CASE("dataset cache") {
  Sandbox sb;
  const auto cfg = sb.write("c.json", {{"dataset", gaussian_pool(80)}, {"regime", "sub"}, {"m_tuples", 30}});
  ::setenv("USCRL_CACHE_DIR", sb.path("cache").c_str(), 1);
  REQUIRE(sb.run("sample --config " + cfg.string() + " --out " + sb.path("a").string()).code == 0);
  REQUIRE(sb.run("sample --config " + cfg.string() + " --out " + sb.path("b").string()).code == 0);
  ::unsetenv("USCRL_CACHE_DIR");
  REQUIRE(sb.run("sample --config " + cfg.string() + " --out " + sb.path("c").string()).code == 0);
  CHECK(!fs::is_empty(sb.path("cache")));
  const std::string a = Sandbox::slurp(sb.path("a/tuples.jsonl"));
  CHECK(a == Sandbox::slurp(sb.path("b/tuples.jsonl")));
  CHECK(a == Sandbox::slurp(sb.path("c/tuples.jsonl")));
}
