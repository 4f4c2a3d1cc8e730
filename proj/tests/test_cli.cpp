#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "ckl/cli.hpp"

using namespace ckl;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "ckl_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("unknown subcommand exits with usage") {
  const auto r = invoke({"frobnicate"});
  CHECK(r.code == cli::kExitError);
  CHECK_FALSE(r.err.empty());
  CHECK(invoke({}).code == cli::kExitError);
}

TEST_CASE("gradcheck passes") {
  const auto r = invoke({"gradcheck", "--draws", "50"});
  CHECK(r.code == cli::kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["passed"] == true);
  CHECK(j["max_rel_error"].get<double>() < 1e-6);
}

TEST_CASE("bounds passes for s up to two") {
  const auto r = invoke({"bounds", "--samples", "2000", "--s-max", "2", "--seed", "7"});
  CHECK(r.code == cli::kExitOk);
  CHECK(nlohmann::json::parse(r.out)["violations"] == 0);
}

TEST_CASE("weights and curves csv") {
  const auto w = invoke({"weights"});
  CHECK(w.code == cli::kExitOk);
  CHECK(w.out.rfind("doc_index,kind,q,weight\n", 0) == 0);
  const auto c = invoke({"curves", "--q-grid", "0.1,0.5"});
  CHECK(c.code == cli::kExitOk);
  CHECK(c.out.rfind("branch,pq_ratio,q,g_ckl,g_bkl\n", 0) == 0);
}

TEST_CASE("invalid values are validation errors") {
  CHECK(invoke({"weights", "--gamma", "5", "--alpha", "6"}).code == cli::kExitError);
  CHECK(invoke({"bounds", "--samples", "0"}).code == cli::kExitError);
  CHECK(invoke({"train", "--loss", "nope"}).code == cli::kExitError);
  CHECK(invoke({"weights", "--instances", "/nonexistent.jsonl"}).code == cli::kExitError);
}

TEST_CASE("config files reject unknown keys") {
  nlohmann::json good = {{"hp", {{"gamma", 3.0}, {"alpha", 1.0}}}, {"bounds", {{"samples", 10}}}};
  cli::RunConfig cfg;
  cli::apply_config(good, cfg);
  CHECK(cfg.hp.gamma == 3.0);
  CHECK(cfg.bounds.samples == 10);

  cli::RunConfig other;
  CHECK_THROWS(cli::apply_config(nlohmann::json{{"hp", {{"gama", 3.0}}}}, other));
  CHECK_THROWS(cli::apply_config(nlohmann::json{{"plots", {}}}, other));

  const auto path = scratch("bad_config.json");
  std::ofstream(path) << R"({"hp": {"unknown": 1}})";
  CHECK(invoke({"weights", "--config", path.string()}).code == cli::kExitError);
}

TEST_CASE("flags override the config file") {
  const auto path = scratch("samples.json");
  std::ofstream(path) << R"({"bounds": {"samples": 5, "seed": 3}})";
  const auto r = invoke({"bounds", "--config", path.string(), "--samples", "7"});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(nlohmann::json::parse(r.out)["samples_tested"] == 7);
}

TEST_CASE("outputs are written atomically and reruns are identical") {
  const auto out = scratch("curves.csv");
  fs::remove(out);
  REQUIRE(invoke({"curves", "--out", out.string()}).code == cli::kExitOk);
  const auto first = slurp(out);
  CHECK_FALSE(first.empty());
  CHECK_FALSE(fs::exists(out.string() + ".tmp"));
  REQUIRE(invoke({"curves", "--out", out.string()}).code == cli::kExitOk);
  CHECK(slurp(out) == first);

  const auto log = scratch("trainlog.csv");
  const auto summary = scratch("summary.json");
  const std::vector<std::string> args{"train", "--queries", "40", "--epochs", "2", "--loss", "ckl",
                                      "--out", log.string(), "--summary", summary.string()};
  REQUIRE(invoke(args).code == cli::kExitOk);
  const auto log1 = slurp(log);
  const auto sum1 = slurp(summary);
  REQUIRE(invoke(args).code == cli::kExitOk);
  CHECK(slurp(log) == log1);
  CHECK(slurp(summary) == sum1);
}

TEST_CASE("compare emits one row per loss") {
  const auto r = invoke({"compare", "--queries", "30", "--epochs", "1", "--seeds", "1", "2", "--losses",
                         "kl", "ckl", "nll"});
  REQUIRE(r.code == cli::kExitOk);
  std::istringstream in(r.out);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
}
