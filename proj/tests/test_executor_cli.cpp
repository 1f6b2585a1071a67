#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "fixtures.hpp"
#include "json.hpp"
#include "semplan/executor.hpp"
#include "semplan/scenario.hpp"

using namespace semplan;
using namespace semplan::testing;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("semplan_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

const std::string kScenarios = SEMPLAN_SCENARIO_DIR;

const char* kMinimal = R"({
  "schema_version": 1,
  "name": "minimal",
  "time_step": 0.5,
  "workspace": {"bounds": [0, 0, 5, 5]},
  "classes": ["thing"],
  "confusion": [[1.0]],
  "robots": [{"pose": [1, 1, 0], "sensors": [{"kind": "range", "range": 1.0}]}],
  "landmarks": [{"mean": [3, 3], "cov": [[0.1, 0], [0, 0.1]], "class_belief": [1.0]}],
  "predicates": [{"name": "near", "kind": "proximity", "robot": 0, "landmark": 0, "radius": 0.5, "delta": 0.25}],
  "task": "F near"
})";

}  // namespace

TEST_CASE("minimal scenario loads") {
  const Scenario s = parse_scenario(kMinimal);
  CHECK(s.robots.size() == 1);
  CHECK(s.robots[0].controls.size() == 50);
  CHECK(s.landmarks[0].true_position == Eigen::Vector2d(3.0, 3.0));
  CompiledScenario cs(s);
  CHECK(cs.dfa().num_states() == 2);
}

TEST_CASE("scenario errors name the culprit") {
  auto j = nlohmann::json::parse(kMinimal);
  j["landmarks"][0]["class_belief"] = {0.9};
  try {
    parse_scenario(j.dump());
    FAIL("expected an error");
  } catch (const ScenarioError& e) {
    CHECK(std::string(e.what()).find("landmark 0") != std::string::npos);
  }
  j = nlohmann::json::parse(kMinimal);
  j["task"] = "F near & F ghost";
  try {
    CompiledScenario cs(parse_scenario(j.dump()));
    FAIL("expected an error");
  } catch (const ScenarioError& e) {
    CHECK(std::string(e.what()).find("ghost") != std::string::npos);
  }
  j = nlohmann::json::parse(kMinimal);
  j["schema_version"] = 7;
  CHECK_THROWS_AS(parse_scenario(j.dump()), ScenarioError);
  j = nlohmann::json::parse(kMinimal);
  j["landmarks"][0]["cov"] = {{1.0, 0.5}, {0.4, 1.0}};
  CHECK_THROWS_AS(parse_scenario(j.dump()), ScenarioError);
  j = nlohmann::json::parse(kMinimal);
  j["predicates"][0]["landmark"] = 4;
  CHECK_THROWS_AS(parse_scenario(j.dump()), ScenarioError);
}

TEST_CASE("shipped scenarios load and round trip") {
  int n = 0;
  for (const auto& e : fs::directory_iterator(kScenarios)) {
    if (e.path().extension() != ".json") continue;
    CAPTURE(e.path().string());
    const Scenario s = load_scenario(e.path().string());
    CompiledScenario cs(s);
    const Scenario again = parse_scenario(scenario_to_json(s));
    CHECK(scenario_to_json(again) == scenario_to_json(s));
    ++n;
  }
  CHECK(n >= 5);
}

TEST_CASE("zero noise with correct priors needs no replanning") {
  CompiledScenario cs(replanning_benchmark(0.0, false));
  const MissionTrace tr = execute(cs.mission(), cs.scenario().executor, cs.scenario().planner, 0);
  CHECK(tr.status == MissionStatus::Success);
  CHECK(tr.replans == 0);
  CHECK(tr.plan_calls == 1);
  CHECK(tr.records.back().dfa_state == *cs.dfa().accepting);
}

TEST_CASE("wrong priors force replanning") {
  CompiledScenario cs(replanning_benchmark(10.0, true));
  const MissionTrace tr = execute(cs.mission(), cs.scenario().executor, cs.scenario().planner, 1);
  CHECK(tr.success());
  CHECK(tr.replans >= 1);
  CHECK(tr.replans == tr.plan_calls - 1);
  int flagged = 0;
  for (const auto& r : tr.records) flagged += r.replanned;
  // the first plan is flagged too
  CHECK(flagged == tr.plan_calls);

  ExecutorParams none = cs.scenario().executor;
  none.max_replans = 0;
  const MissionTrace stuck = execute(cs.mission(), none, cs.scenario().planner, 1);
  CHECK(stuck.status == MissionStatus::FailedReplanBudget);
}

TEST_CASE("lookahead check") {
  Scenario s = open_scenario("F a");
  CompiledScenario cs(s);
  Planner planner(cs.problem(), cs.scenario().planner);
  const PlanResult r = planner.plan(cs.start());
  REQUIRE(r.solution);
  const auto& st = cs.start();
  const int H = r.solution->horizon;
  CHECK(lookahead_feasible(cs.problem(), st.means, st.covs, st.classes, st.dfa_state, 0, *r.solution, 0, H + 10));
  CHECK(lookahead_feasible(cs.problem(), st.means, st.covs, st.classes, st.dfa_state, 0, *r.solution, 0, 1));
  auto moved = st.means;
  moved[0] += Eigen::Vector2d(0.0, 5.0);
  CHECK_FALSE(lookahead_feasible(cs.problem(), moved, st.covs, st.classes, st.dfa_state, 0, *r.solution, 0, H + 10));
  CHECK_THROWS(lookahead_feasible(cs.problem(), st.means, st.covs, st.classes, st.dfa_state, 0, *r.solution, 0, 0));
}

TEST_CASE("identical variants give identical summaries") {
  CompiledScenario cs(replanning_benchmark(4.0, true));
  const std::vector<MissionVariant> v = {{"one", &cs.mission()}, {"two", &cs.mission()}};
  const std::vector<std::uint64_t> seeds = {0, 1, 2};
  const auto rows = compare_replanning_frequency(v, seeds, cs.scenario().executor, cs.scenario().planner);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].replans == rows[1].replans);
  CHECK(rows[0].success == rows[1].success);
  const std::string csv = replanning_report_csv(rows);
  CHECK(csv.rfind("variant,runs,mean_replans,success_rate,mean_plan_seconds\n", 0) == 0);
}

TEST_CASE("trace export") {
  CompiledScenario cs(replanning_benchmark(0.0, false));
  const MissionTrace tr = execute(cs.mission(), cs.scenario().executor, cs.scenario().planner, 0);
  const std::string csv = tr.to_csv(cs.dfa(), cs.scenario().classes);
  const auto lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == static_cast<long>(tr.records.size()) + 1);
  CHECK(csv.rfind("step,robot_0_x", 0) == 0);
  const std::string plot = tr.to_plot_csv(cs.dfa(), cs.scenario().classes, 5);
  CHECK(std::count(plot.begin(), plot.end(), '\n') < lines);
  // same seed, same trace apart from timing
  const MissionTrace again = execute(cs.mission(), cs.scenario().executor, cs.scenario().planner, 0);
  CHECK(again.to_csv(cs.dfa(), cs.scenario().classes) == csv);
}

TEST_CASE("cli exit codes") {
  const fs::path dir = scratch("cli");
  const std::string zero = kScenarios + "/zero_noise.json";
  std::string text;
  CHECK(run_cli({"--scenario", zero, "--out", dir.string(), "plan", "--n-max", "0"}) == cli::kNoSolution);
  CHECK(run_cli({"--scenario", zero, "--out", dir.string(), "plan"}) == cli::kOk);
  CHECK(fs::exists(dir / "plan.csv"));
  CHECK(fs::exists(dir / "plan_stats.json"));
  CHECK(run_cli({"--scenario", zero, "--out", dir.string(), "simulate"}) == cli::kOk);
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary["replans"] == 0);
  CHECK(summary["status"] == "SUCCESS");
  CHECK(run_cli({"--scenario", "/nonexistent.json", "plan"}) == cli::kUsage);
  CHECK(run_cli({"plan"}) == cli::kUsage);
  CHECK(run_cli({"--scenario", zero, "bogus"}) == cli::kUsage);
  CHECK(run_cli({"--scenario", zero, "--out", dir.string(), "compile-dfa", "--task", "F (a & b"}) == cli::kUsage);
}

TEST_CASE("cli compile-dfa and eval-predicate") {
  const fs::path dir = scratch("dfa");
  const std::string zero = kScenarios + "/zero_noise.json";
  std::string text;
  CHECK(run_cli({"--scenario", zero, "--out", dir.string(), "compile-dfa"}, &text) == cli::kOk);
  CHECK(text.find("states: 4") != std::string::npos);
  CHECK(fs::exists(dir / "dfa.txt"));
  CHECK(run_cli({"--scenario", zero, "--out", dir.string(), "eval-predicate", "--pose", "0:8,2,0"}) == cli::kOk);
  const std::string csv = slurp(dir / "predicates.csv");
  CHECK(csv.rfind("predicate,kind,value,threshold,holds\n", 0) == 0);
  CHECK(csv.find("a,proximity") != std::string::npos);
}

TEST_CASE("cli scalability sweep table") {
  const fs::path dir = scratch("sweep");
  CHECK(run_cli({"--out", dir.string(), "sweep", "--kind", "scalability", "--robots", "1,5", "--landmarks", "5,15",
             "--seeds", "0", "--oracle"}) == cli::kOk);
  const std::string table = slurp(dir / "sweep.csv");
  CHECK(table.rfind("N,M,seed,found,H,cost,iterations,runtime_s\n", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 5);
  const std::string report = slurp(dir / "oracle_report.csv");
  CHECK(report.rfind("case_id,oracle,implementation,tolerance,pass\n", 0) == 0);
  CHECK(report.find(",0\n") == std::string::npos);
}
