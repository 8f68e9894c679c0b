#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

fs::path work_dir() {
  const auto p = fs::temp_directory_path() / "onnsim-cli-test";
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ONNSIM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("retrieve succeeds with stock settings and writes its outputs") {
  const auto out = work_dir() / "retrieve-ok";
  fs::remove_all(out);
  REQUIRE(run_cli("retrieve --out " + out.string()) == 0);
  REQUIRE(fs::exists(out / "waveforms.csv"));
  REQUIRE(fs::exists(out / "report.csv"));
  REQUIRE(fs::exists(out / "manifest.json"));
  REQUIRE(slurp(out / "report.csv").find("pattern_matched,1") != std::string::npos);
  fs::remove_all(out);
}

TEST_CASE("usage and configuration mistakes exit with code one") {
  REQUIRE(run_cli("") != 0);
  REQUIRE(run_cli("retrieve --no-such-flag") == 1);
  REQUIRE(run_cli("retrieve --pattern nosuch --out " + (work_dir() / "x1").string()) == 1);

  const auto bad = work_dir() / "bad.json";
  write_file(bad, "this is not json");
  REQUIRE(run_cli("retrieve --config " + bad.string()) == 1);
  REQUIRE(run_cli("retrieve --config /nonexistent/config.json") == 1);
  fs::remove(bad);
}

TEST_CASE("an exhausted pulse budget exits with code three") {
  const auto cfg = work_dir() / "starved.json";
  write_file(cfg, R"({"device": {"formed_conductance_s": 5e-5, "program_pulse_budget": 10}})");
  REQUIRE(run_cli("retrieve --config " + cfg.string() + " --out " + (work_dir() / "x3").string()) == 3);
  fs::remove(cfg);
}

TEST_CASE("a diverging integration exits with code four") {
  const auto cfg = work_dir() / "coarse.json";
  write_file(cfg, R"({"sim": {"dt_s": 5e-5}})");
  REQUIRE(run_cli("retrieve --config " + cfg.string() + " --out " + (work_dir() / "x4").string()) == 4);
  fs::remove(cfg);
}

TEST_CASE("a failed readout exits with code two") {
  const auto cfg = work_dir() / "mismatch.json";
  write_file(cfg, R"({
    "patterns": {"custom": [1, -1, -1, -1]},
    "retrieval": {"init_phase_jitter_deg": 40.0, "duration_periods": 20.0}
  })");
  const auto out = work_dir() / "x2";
  REQUIRE(run_cli("retrieve --pattern custom --config " + cfg.string() + " --out " + out.string()) == 2);
  fs::remove(cfg);
  fs::remove_all(out);
}

TEST_CASE("the config can arrive through the environment") {
  const auto cfg = work_dir() / "env.json";
  write_file(cfg, R"({"characterize": {"forming_draws": 500}})");
  const auto out = work_dir() / "env-out";
  fs::remove_all(out);
  REQUIRE(setenv("ONNSIM_CONFIG", cfg.string().c_str(), 1) == 0);
  const int code = run_cli("characterize --bundle --out " + out.string());
  REQUIRE(unsetenv("ONNSIM_CONFIG") == 0);
  REQUIRE(code == 0);
  REQUIRE(slurp(out / "config.json").find("\"forming_draws\": 500") != std::string::npos);
  const std::string forming = slurp(out / "forming.csv");
  REQUIRE(std::count(forming.begin(), forming.end(), '\n') == 501);
  fs::remove(cfg);
  fs::remove_all(out);
}

TEST_CASE("toggle and characterize run clean end to end") {
  const auto out_t = work_dir() / "toggle-out";
  fs::remove_all(out_t);
  REQUIRE(run_cli("toggle --out " + out_t.string()) == 0);
  REQUIRE(slurp(out_t / "report.csv").find("recovered,1") != std::string::npos);
  fs::remove_all(out_t);

  const auto out_c = work_dir() / "char-out";
  fs::remove_all(out_c);
  REQUIRE(run_cli("characterize --out " + out_c.string()) == 0);
  REQUIRE(fs::exists(out_c / "iv.csv"));
  REQUIRE(fs::exists(out_c / "retention.csv"));
  fs::remove_all(out_c);
}
