#include "membrane/cli.hpp"

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "membrane/io.hpp"

using namespace membrane;
namespace fs = std::filesystem;

namespace {

std::string tmp_dir(const std::string& name) {
  const std::string p = (fs::temp_directory_path() / name).string();
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

int run_argv(std::vector<std::string> args) {
  std::vector<char*> argv;
  args.insert(args.begin(), "membrane-lab");
  for (auto& a : args) argv.push_back(a.data());
  return run_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("usage errors exit with code 1") {
  RunConfig cfg;
  cfg.subcommand = "no-such-command";
  CHECK(run(cfg) == 1);

  cfg.subcommand = "green";
  cfg.N = 5;  // odd
  CHECK(run(cfg) == 1);

  cfg.N = 8;
  cfg.d = 0;
  CHECK(run(cfg) == 1);
}

TEST_CASE("green command writes column and profile") {
  RunConfig cfg;
  cfg.subcommand = "green";
  cfg.d = 2;
  cfg.N = 8;
  cfg.distances = {1, 2, 3};
  cfg.out = tmp_dir("mlab_green");
  REQUIRE(run(cfg) == 0);
  CHECK(fs::exists(cfg.out + "/column.csv"));
  CHECK(fs::exists(cfg.out + "/ratio_profile.csv"));
  CHECK(fs::exists(cfg.out + "/manifest.json"));

  const auto manifest = nlohmann::json::parse(slurp(cfg.out + "/manifest.json"));
  // Manifest completeness: every file in the output dir is named in it.
  for (const auto& entry : fs::directory_iterator(cfg.out)) {
    const std::string name = entry.path().filename().string();
    if (name == "manifest.json") continue;
    CHECK(manifest["outputs"].contains(name));
  }
  for (const auto& [name, hash] : manifest["outputs"].items())
    CHECK(fs::exists(cfg.out + "/" + name));
}

TEST_CASE("pin-enumerate and pin-sample") {
  RunConfig cfg;
  cfg.subcommand = "pin-enumerate";
  cfg.d = 1;
  cfg.N = 4;
  cfg.eps = 1.0;
  cfg.out = tmp_dir("mlab_enum");
  REQUIRE(run(cfg) == 0);
  CHECK(fs::exists(cfg.out + "/zeta.csv"));

  RunConfig cs;
  cs.subcommand = "pin-sample";
  cs.d = 1;
  cs.N = 6;
  cs.eps = 1.0;
  cs.n = 10;
  cs.burn_in = 20;
  cs.thinning = 1;
  cs.out = tmp_dir("mlab_sample");
  REQUIRE(run(cs) == 0);
  CHECK(fs::exists(cs.out + "/ensemble.bin"));
  CHECK(fs::exists(cs.out + "/ensemble.csv"));
}

TEST_CASE("percolation and decay commands") {
  RunConfig cp;
  cp.subcommand = "percolation";
  cp.d = 2;
  cp.rho = 0.7;
  cp.t = 8;
  cp.k = 12;
  cp.xi = 0.2;
  cp.trials = 400;
  cp.out = tmp_dir("mlab_perc");
  REQUIRE(run(cp) == 0);
  CHECK(fs::exists(cp.out + "/percolation.json"));
  CHECK(fs::exists(cp.out + "/ak_trials.csv"));
  CHECK(fs::exists(cp.out + "/distance_trials.csv"));

  RunConfig cd;
  cd.subcommand = "decay";
  cd.d = 2;
  cd.N = 12;
  cd.eps = 1.0;
  cd.n = 8;
  cd.burn_in = 30;
  cd.thinning = 1;
  cd.distances = {2, 3, 4};
  cd.out = tmp_dir("mlab_decay");
  REQUIRE(run(cd) == 0);
  CHECK(fs::exists(cd.out + "/profile.csv"));
  CHECK(fs::exists(cd.out + "/ensemble.bin"));
}

TEST_CASE("certificate command") {
  RunConfig cfg;
  cfg.subcommand = "certificate";
  cfg.d = 2;
  cfg.N = 12;
  cfg.tube_width = 3;
  cfg.out = tmp_dir("mlab_cert");
  REQUIRE(run(cfg) == 0);
  const auto cert = nlohmann::json::parse(slurp(cfg.out + "/certificate.json"));
  CHECK(cert["s_fit"].get<double>() > 0.0);
  CHECK(!cert["degenerate"].get<bool>());
}

TEST_CASE("validate passes and is byte-deterministic") {
  RunConfig a;
  a.subcommand = "validate";
  a.seed = 17;
  a.out = tmp_dir("mlab_validate_a");
  REQUIRE(run(a) == 0);

  RunConfig b = a;
  b.out = tmp_dir("mlab_validate_b");
  REQUIRE(run(b) == 0);

  CHECK(slurp(a.out + "/validate_checks.csv") == slurp(b.out + "/validate_checks.csv"));
}

TEST_CASE("config file with flag override") {
  const std::string dir = tmp_dir("mlab_config");
  const std::string cfg_path = dir + "/run.cfg";
  {
    std::ofstream out(cfg_path);
    out << "d=1\nN=4\neps=1.0\nout=" << dir << "/out_from_file\n";
  }
  REQUIRE(run_argv({"pin-enumerate", "--config", cfg_path}) == 0);
  CHECK(fs::exists(dir + "/out_from_file/zeta.csv"));

  // Flag overrides the file.
  REQUIRE(run_argv({"pin-enumerate", "--config", cfg_path, "--out", dir + "/out_override"}) == 0);
  CHECK(fs::exists(dir + "/out_override/zeta.csv"));

  CHECK(run_argv({"bogus-subcommand"}) == 1);
}

TEST_CASE("tube complement geometry") {
  const Box box(2, 8);
  const Region a = tube_complement(box, 3);
  for (const auto& p : a) CHECK(std::abs(p.c[1]) > 1);
  const Region e = box_sites(box).set_difference(a);
  CHECK(e.size() == 9 * 3);  // 9 sites along e1, width 3
  CHECK_THROWS_AS(tube_complement(box, 2), std::invalid_argument);
}
