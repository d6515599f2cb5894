#include "doctest.h"

#include "kaclab/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args)
{
  args.insert(args.begin(), "kaclab");
  std::vector<const char*> argv;
  for (const auto& a : args)
    argv.push_back(a.c_str());
  return kaclab::cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name)
{
  const auto dir = fs::temp_directory_path() / "kaclab_cli_test";
  fs::create_directories(dir);
  const auto p = dir / name;
  fs::remove(p);
  return p;
}

} // namespace

TEST_CASE("unknown flags and bad values exit 1 without output")
{
  const auto out = scratch("bad.csv");
  CHECK(run({ "gap", "--bogus", "1", "--out", out.string() }) == 1);
  CHECK_FALSE(fs::exists(out));
  CHECK(run({ "dsmall", "--deltas", "0.7", "--out", out.string() }) == 1);
  CHECK_FALSE(fs::exists(out));
  CHECK(run({ "gap", "--n", "1", "--out", out.string() }) == 1);
  CHECK(run({ "gap", "--samples", "abc", "--out", out.string() }) == 1);
  CHECK(run({ "gap", "--workers", "0", "--out", out.string() }) == 1);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("numerical failures exit 2")
{
  const auto out = scratch("num.csv");
  CHECK(run({ "lclt", "--density", "uniform", "--ns", "2", "--out", out.string() }) == 2);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("output carries a JSON header and is reproducible")
{
  const auto a = scratch("gap_a.csv"), b = scratch("gap_b.csv");
  for (int workers : { 1, 2 }) {
    const std::string w = std::to_string(workers);
    REQUIRE(run({ "gap", "--n", "5", "--samples", "2000", "--seed", "4", "--workers", w, "--out", a.string() }) == 0);
    REQUIRE(run({ "gap", "--n", "5", "--samples", "2000", "--seed", "4", "--workers", w, "--out", b.string() }) == 0);
    const auto text = slurp(a);
    CHECK(text == slurp(b));
    CHECK(text.rfind("# {", 0) == 0);
    CHECK(text.find("\"seed\":4") != std::string::npos);
    CHECK(text.find("\"workers\":" + w) != std::string::npos);
  }
}

TEST_CASE("config files with flag precedence")
{
  const auto cfg_json = scratch("cfg.json"), cfg_kv = scratch("cfg.txt");
  std::ofstream(cfg_json) << R"({"n": 7, "samples": 1000, "seed": 3})";
  std::ofstream(cfg_kv) << "# comment\nn = 7\nsamples = 1000\nseed = 3\n";
  const auto a = scratch("cfg_a.csv"), b = scratch("cfg_b.csv"), c = scratch("cfg_c.csv");
  REQUIRE(run({ "gap", "--config", cfg_json.string(), "--workers", "1", "--out", a.string() }) == 0);
  REQUIRE(run({ "gap", "--config", cfg_kv.string(), "--workers", "1", "--out", b.string() }) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).find("\"n\":7") != std::string::npos);
  REQUIRE(run({ "gap", "--config", cfg_json.string(), "--n", "9", "--workers", "1", "--out", c.string() }) == 0);
  CHECK(slurp(c).find("\"n\":9") != std::string::npos);
  CHECK(run({ "gap", "--config", scratch("missing.json").string() }) == 1);
}

TEST_CASE("output directory from the environment")
{
  const auto dir = fs::temp_directory_path() / "kaclab_cli_env";
  fs::remove_all(dir);
  ::setenv(kaclab::cli::kOutputDirEnv, dir.string().c_str(), 1);
  const int code = run({ "dsmall", "--deltas", "0.1", "--workers", "1" });
  ::unsetenv(kaclab::cli::kOutputDirEnv);
  REQUIRE(code == 0);
  const auto text = slurp(dir / "dsmall.csv");
  CHECK(text.find("\"command\":\"dsmall\"") != std::string::npos);
}
