#include <filesystem>
#include <sstream>

#include "json.hpp"

#include "doctest.h"
#include "envdiff/io.hpp"

using namespace envdiff;
using namespace envdiff::io;
namespace fs = std::filesystem;

namespace {

std::map<std::string, std::string> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_key_values(in);
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("envdiff-test-" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("key value parsing") {
  auto kv = parse("# comment\nrule = 110\n\n  seed=0101 # trailing\nstrategy = Fresh\n");
  CHECK(kv.size() == 3);
  CHECK(kv["rule"] == "110");
  CHECK(kv["seed"] == "0101");
  CHECK(error_of([] { parse("rule = 1\nrule = 2\n"); }).find("line 2") != std::string::npos);
  CHECK(error_of([] { parse("rule 110\n"); }).find("line 1") != std::string::npos);
  CHECK(error_of([] { parse(" = 3\n"); }).find("empty key") != std::string::npos);
}

TEST_CASE("config validation") {
  CHECK(error_of([] { config_from_map({{"strategy", "Fresh"}}); }).find("'rule'") != std::string::npos);
  CHECK(error_of([] { config_from_map({{"rule", "110"}}); }).find("'strategy'") != std::string::npos);
  CHECK_NOTHROW(config_from_map({{"rule", "110"}}, false));
  CHECK(error_of([] { config_from_map({{"rule", "110"}, {"strategy", "Fresh"}, {"colour", "red"}}); })
            .find("unknown key 'colour'") != std::string::npos);
  CHECK(error_of([] { config_from_map({{"rule", "300"}, {"strategy", "Fresh"}}); }).find("rule") !=
        std::string::npos);
  CHECK(error_of([] { config_from_map({{"rule", "x"}, {"strategy", "Fresh"}}); }).find("'rule'") !=
        std::string::npos);
  CHECK(error_of([] { config_from_map({{"rule", "110"}, {"strategy", "Sometimes"}}); }).find("strategy") !=
        std::string::npos);
  CHECK(error_of([] { config_from_map({{"rule", "110"}, {"strategy", "Fresh"}, {"reps", "0"}}); })
            .find("'reps'") != std::string::npos);
  CHECK(error_of([] { config_from_map({{"rule", "110"}, {"strategy", "Fresh"}, {"seed", "012"}}); }) != "");
}

TEST_CASE("config round trip") {
  auto cfg = config_from_map({{"rule", "184"},
                              {"strategy", "Chained"},
                              {"n_policies", "60"},
                              {"random_walk_frac", "0.1"},
                              {"rng_seed", "99"},
                              {"reps", "50"},
                              {"n_estimator", "Mean"}});
  CHECK(cfg.experiment.env.rule.rule_number == 184);
  CHECK(cfg.experiment.n_policies == 60);
  CHECK(cfg.reps == 50);
  CHECK(cfg.n_estimator == curves::NEstimator::Mean);
  std::istringstream in(format_config(cfg));
  auto back = config_from_map(parse_key_values(in));
  CHECK(config_to_map(back) == config_to_map(cfg));
  for (const auto& [key, value] : config_to_map(cfg)) {
    CHECK(std::find(config_keys().begin(), config_keys().end(), key) != config_keys().end());
  }
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("atomic writes") {
  auto dir = scratch("atomic");
  write_file_atomic(dir / "sub" / "a.txt", "hello");
  CHECK(read_file(dir / "sub" / "a.txt") == "hello");
  write_file_atomic(dir / "sub" / "a.txt", "bye");
  CHECK(read_file(dir / "sub" / "a.txt") == "bye");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "sub")) ++entries;
  CHECK(entries == 1);
  CHECK_THROWS(read_file(dir / "missing"));
  fs::remove_all(dir);
}

TEST_CASE("manifest") {
  auto dir = scratch("manifest");
  Manifest m("evaluate", {{"rule", "110"}});
  m.emit(dir, "a.csv", "x,y\n");
  m.set_extra("note", "1");
  m.write(dir);
  auto j = nlohmann::json::parse(read_file(dir / "manifest.json"));
  CHECK(j["tool"] == kToolName);
  CHECK(j["version"] == kToolVersion);
  CHECK(j["command"] == "evaluate");
  CHECK(j["config"]["rule"] == "110");
  CHECK(j["compressor"]["empty_baseline"] == 8);
  REQUIRE(j["files"].size() == 1);
  CHECK(j["files"][0]["path"] == "a.csv");
  CHECK(j["files"][0]["bytes"] == 4);
  CHECK(j["files"][0]["sha256"] == sha256_hex("x,y\n"));
  fs::remove_all(dir);
}
