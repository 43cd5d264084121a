#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <sys/wait.h>

#include "driftbandit/experiment.hpp"

namespace fs = std::filesystem;
using namespace driftbandit;

namespace {

struct Outcome {
  int code = -1;
  std::string output;
};

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("driftbandit_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome invoke(const std::string& binary, const std::string& args, const fs::path& dir, const std::string& env = "") {
  const auto log = dir / "stdout.txt";
  const std::string cmd = env + " '" + binary + "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.output = slurp(log);
  return o;
}

Outcome run_cli(const std::string& args, const fs::path& dir, const std::string& env = "") {
  return invoke(DRIFTBANDIT_CLI, args, dir, env);
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

const char* kSingleton = R"(experiment:
  seeds: 2
  horizons: [50]
environment:
  kind: constant
  dim: 1
  theta: [0.5]
  noise_sd: 0.1
policies:
  - name: only
    kind: sw_ucb
    window_length: 5
checks:
  instances: 10
  trials: 100
  blockreward_runs: 2
  blockreward_horizon: 100
)";

}  // namespace

TEST_CASE("cli usage errors exit 2") {
  const auto dir = scratch("usage");
  CHECK(run_cli("", dir).code != 0);
  CHECK(run_cli("bogus", dir).code == 2);
  CHECK(run_cli("check nonsense", dir).code == 2);
  CHECK(run_cli("run --preset fig9", dir).code == 2);
  CHECK(run_cli("run --seeds 0", dir).code == 2);
  CHECK(run_cli("run --config /nonexistent/x.yaml", dir).code == 2);

  auto text = std::string(kSingleton);
  text.replace(text.find("  seeds: 2"), 10, "  seeds: 2\n  color: red");
  write(dir / "bad.yaml", text);
  const auto o = run_cli("run --config '" + (dir / "bad.yaml").string() + "'", dir);
  CHECK(o.code == 2);
  CHECK(o.output.find("line 3") != std::string::npos);
}

TEST_CASE("cli run on a singleton decision set") {
  const auto dir = scratch("singleton");
  write(dir / "cfg.yaml", kSingleton);
  const auto o = run_cli("run --config '" + (dir / "cfg.yaml").string() + "' --out '" + (dir / "out").string() + "'", dir);
  REQUIRE(o.code == 0);
  for (int s = 0; s < 2; ++s) {
    std::istringstream trace(slurp(dir / "out" / ("trace_only_T50_seed" + std::to_string(s) + ".csv")));
    std::string line;
    std::getline(trace, line);
    CHECK(line == "t,action,reward,inst_regret,cum_regret");
    int rows = 0;
    while (std::getline(trace, line)) {
      ++rows;
      CHECK(line.substr(line.size() - 4) == ",0,0");
    }
    CHECK(rows == 50);
  }
  CHECK(slurp(dir / "out" / "final_regret.csv") == "policy,T,seed,final_regret\nonly,50,0,0\nonly,50,1,0\n");
}

TEST_CASE("cli run agrees with replicate") {
  const auto dir = scratch("replicate");
  const auto o = run_cli("run --preset fig1 --horizons 3000 --seeds 3 --master-seed 8 --out '" + (dir / "out").string() + "'", dir);
  REQUIRE(o.code == 0);
  auto cfg = parse_experiment(preset_text("fig1"));
  SweepResult r;
  for (const auto& p : cfg.policies) r.rows.push_back(replicate(cfg.environment, make_policy(p), 3000, 3, 8));
  const auto got = slurp(dir / "out" / "final_regret.csv");
  std::ostringstream want;
  write_final_regret_csv(r, want);
  CHECK(got == want.str());
}

TEST_CASE("cli sweep writes one row per policy and horizon") {
  const auto dir = scratch("sweep");
  const auto o = run_cli("sweep --preset fig2 --horizons 2000,4000 --seeds 2 --workers 2", dir,
                         "DRIFTBANDIT_OUT='" + (dir / "env_out").string() + "'");
  REQUIRE(o.code == 0);
  const auto summary = nlohmann::json::parse(slurp(dir / "env_out" / "summary.json"));
  CHECK(summary["seeds"] == 2);
  CHECK(summary["horizons"] == nlohmann::json::array({2000, 4000}));
  REQUIRE(summary["policies"].size() == 2);
  for (const auto& p : summary["policies"]) {
    CHECK(p["rows"].size() == 2);
    CHECK(p["slope_fit"].is_object());
  }
  std::istringstream csv(slurp(dir / "env_out" / "final_regret.csv"));
  std::string line;
  int n = 0;
  while (std::getline(csv, line)) ++n;
  CHECK(n == 1 + 2 * 2 * 2);
}

TEST_CASE("cli check") {
  const auto dir = scratch("check");
  write(dir / "cfg.yaml", kSingleton);
  const auto cfg = "--config '" + (dir / "cfg.yaml").string() + "'";
  const auto good = run_cli("check all " + cfg, dir);
  CHECK(good.code == 0);
  CHECK(good.output.find("PASS bias") != std::string::npos);
  CHECK(good.output.find("PASS blockreward") != std::string::npos);
  CHECK(good.output.find("FAIL") == std::string::npos);

  const auto faulty = invoke(DRIFTBANDIT_CLI_FAULTY, "check all " + cfg, dir);
  CHECK(faulty.code == 1);
  CHECK(faulty.output.find("FAIL bias") != std::string::npos);
}
