#include "cli.hpp"

#include <Eigen/LU>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "semplan/scenario.hpp"
#ifdef SEMPLAN_HAVE_ORACLES
#include "semplan/oracles.hpp"
#endif

namespace semplan::cli {

namespace {

using json = nlohmann::ordered_json;

struct Globals {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int workers = 1;
  bool uniform = false;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void write_file(const Globals& g, const std::string& name, const std::string& text) {
  if (g.out_dir.empty()) return;
  std::filesystem::create_directories(g.out_dir);
  const auto path = std::filesystem::path(g.out_dir) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

Scenario load(const Globals& g) {
  if (g.scenario.empty()) throw CLI::ValidationError("--scenario", "a scenario file is required");
  Scenario s = load_scenario(g.scenario);
  if (g.seed) s.seed = *g.seed;
  return s;
}

PlannerParams planner_params(const Scenario& s, const Globals& g) {
  PlannerParams p = s.planner;
  p.seed = s.seed;
  p.workers = g.workers;
  if (g.uniform) p.mode = SamplingMode::Uniform;
  return p;
}

std::string labels_of(const Dfa& dfa, Symbol s) {
  std::string out;
  for (const auto& a : dfa.names_of(s)) out += (out.empty() ? "" : ";") + a;
  return out;
}

const char* kind_name(PredicateKind k) {
  switch (k) {
    case PredicateKind::Proximity: return "proximity";
    case PredicateKind::ClassProximity: return "class_proximity";
    case PredicateKind::Uncertainty: return "uncertainty";
    case PredicateKind::RelaxedClassProximity: return "relaxed_class_proximity";
  }
  return "unknown";
}

int cmd_compile_dfa(const Globals& g, const std::string& task, std::ostream& out) {
  Dfa dfa;
  std::optional<PrunedDfaIndex> pruned;
  if (!task.empty()) {
    dfa = compile_to_dfa(parse_cosafe_ltl(task));
  } else {
    CompiledScenario cs(load(g));
    dfa = cs.dfa();
    pruned = cs.pruned();
  }
  std::string text = "atoms:";
  for (const auto& a : dfa.atoms) text += " " + a;
  text += "\nstates: " + std::to_string(dfa.num_states());
  text += "\ncomplete_states: " + std::to_string(dfa.complete_state_count());
  text += "\ninitial: " + std::to_string(dfa.initial);
  text += "\naccepting: " + (dfa.accepting ? std::to_string(*dfa.accepting) : std::string("none"));
  text += "\ntransitions:\n" + dfa.dump();
  const PrunedDfaIndex idx = pruned ? *pruned : unpruned_index(dfa);
  text += "pruning:\n";
  text += "  pruned: " + std::string(pruned ? "yes" : "no (no predicate metadata)") + "\n";
  text += "  removed_transitions: " + std::to_string(idx.removed_transitions()) + "\n";
  text += "  feasible: " + std::string(idx.feasible() ? "yes" : "no") + "\n";
  const auto d = idx.distance_to_accept(dfa.initial);
  text += "  initial_distance: " + (d ? std::to_string(*d) : std::string("inf")) + "\n";
  out << text;
  write_file(g, "dfa.txt", text);
  return kOk;
}

std::string solution_csv(const Solution& s, const Dfa& dfa) {
  std::string h = "step";
  for (std::size_t j = 0; j < s.poses.front().size(); ++j)
    for (const char* f : {"x", "y", "theta"}) h += ",robot_" + std::to_string(j) + "_" + f;
  h += ",dfa_state,label\n";
  for (std::size_t k = 0; k < s.poses.size(); ++k) {
    h += std::to_string(k);
    for (const auto& p : s.poses[k]) h += fmt(",%.6f", p.x) + fmt(",%.6f", p.y) + fmt(",%.6f", p.theta);
    h += "," + std::to_string(s.dfa_states[k]) + "," + labels_of(dfa, s.labels[k]) + "\n";
  }
  return h;
}

int cmd_plan(const Globals& g, std::optional<std::size_t> n_max, std::ostream& out,
             std::ostream& err) {
  Scenario sc = load(g);
  if (n_max) sc.planner.n_max = *n_max;
  CompiledScenario cs(std::move(sc));
  Planner planner(cs.problem(), planner_params(cs.scenario(), g));
  const PlanResult r = planner.plan(cs.start());
  if (r.stats.unpruned_fallback)
    err << "warning: the pruned automaton has no path to acceptance; using unpruned distances\n";
  json st;
  st["found"] = r.solution.has_value();
  st["horizon"] = r.solution ? r.solution->horizon : -1;
  st["cost"] = r.solution ? r.solution->cost : -1.0;
  st["iterations"] = r.stats.iterations;
  st["first_solution_iteration"] =
      r.stats.first_solution_iteration ? static_cast<long>(*r.stats.first_solution_iteration) : -1L;
  st["tree_size"] = r.stats.tree_size;
  st["buckets"] = r.stats.buckets;
  st["goal_nodes"] = r.stats.goal_nodes;
  st["rejected_collision"] = r.stats.rejected_collision;
  st["rejected_violation"] = r.stats.rejected_violation;
  st["unpruned_fallback"] = r.stats.unpruned_fallback;
  st["seconds"] = r.stats.seconds;
  out << st.dump(2) << "\n";
  write_file(g, "plan_stats.json", st.dump(2) + "\n");
  if (!r.solution) return kNoSolution;
  write_file(g, "plan.csv", solution_csv(*r.solution, cs.dfa()));
  return kOk;
}

int cmd_simulate(const Globals& g, int stride, std::ostream& out) {
  CompiledScenario cs(load(g));
  const auto& sc = cs.scenario();
  const MissionTrace tr = execute(cs.mission(), sc.executor, planner_params(sc, g), sc.seed);
  write_file(g, "trace.csv", tr.to_csv(cs.dfa(), sc.classes));
  write_file(g, "trace_plot.csv", tr.to_plot_csv(cs.dfa(), sc.classes, stride));
  json s;
  s["status"] = to_string(tr.status);
  s["success"] = tr.success();
  s["steps"] = tr.records.empty() ? 0 : tr.records.back().step - tr.records.front().step;
  s["plan_calls"] = tr.plan_calls;
  s["replans"] = tr.replans;
  s["initial_cost"] = tr.initial_cost;
  s["plan_seconds"] = tr.plan_seconds;
  s["wall_seconds"] = tr.wall_seconds;
  out << s.dump(2) << "\n";
  write_file(g, "summary.json", s.dump(2) + "\n");
  switch (tr.status) {
    case MissionStatus::Success: return kOk;
    case MissionStatus::Violated: return kViolation;
    default: return kNoSolution;
  }
}

// Raw quantity each predicate compares against its threshold.
double raw_value(const PredicateDef& d, const TeamState& team, const MapView& map) {
  const Eigen::Vector2d p = team[d.robot].position();
  switch (d.kind) {
    case PredicateKind::Proximity:
      return prob_within_radius(map.means[d.landmark], map.covs[d.landmark], p, d.radius);
    case PredicateKind::Uncertainty: return map.covs[d.landmark].determinant();
    case PredicateKind::ClassProximity: {
      double best = 0.0;
      for (std::size_t i = 0; i < map.means.size(); ++i)
        best = std::max(best, prob_within_radius(map.means[i], map.covs[i], p, d.radius) *
                                  map.classes[i][d.class_index]);
      return best;
    }
    case PredicateKind::RelaxedClassProximity: {
      double best = 0.0;
      for (std::size_t i = 0; i < map.means.size(); ++i)
        if (argmax_class(map.classes[i]) == d.class_index)
          best = std::max(best, prob_within_radius(map.means[i], map.covs[i], p, d.radius));
      return best;
    }
  }
  return 0.0;
}

int cmd_eval_predicate(const Globals& g, const std::vector<std::string>& poses, std::ostream& out) {
  CompiledScenario cs(load(g));
  const auto& sc = cs.scenario();
  TeamState team = cs.start().team;
  for (const auto& spec : poses) {
    // j:x,y,deg
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--pose", "expected j:x,y,deg");
    const int j = std::stoi(spec.substr(0, colon));
    const auto v = split(spec.substr(colon + 1), ',');
    if (j < 0 || j >= static_cast<int>(team.size()) || v.size() != 3)
      throw CLI::ValidationError("--pose", "expected j:x,y,deg with a valid robot index");
    team[j] = {std::stod(v[0]), std::stod(v[1]), wrap_angle(std::stod(v[2]) * std::numbers::pi / 180.0)};
  }
  const MapView map{cs.start().means, cs.start().covs, cs.start().classes};
  std::string text = "predicate,kind,value,threshold,holds\n";
  for (const auto& d : sc.predicates) {
    const double v = raw_value(d, team, map);
    const double thr = d.kind == PredicateKind::Uncertainty ? d.delta : 1.0 - d.delta;
    text += d.name + "," + kind_name(d.kind) + fmt(",%.9f", v) + fmt(",%.6f", thr) + "," +
            (eval_predicate(d, team, map) ? "1" : "0") + "\n";
  }
  out << text;
  write_file(g, "predicates.csv", text);
  return kOk;
}

std::vector<double> numbers_of(const std::string& s) {
  std::vector<double> out;
  for (const auto& x : split(s, ',')) out.push_back(std::stod(x));
  return out;
}

#ifdef SEMPLAN_HAVE_ORACLES
// Disk mass at the final pose and the last covariance step of a solution,
// both checked against the reference oracles.
void oracle_rows(const CompiledScenario& cs, const Solution& s, const std::string& cell,
                 std::uint64_t seed, std::vector<oracle::OracleReport>& rows) {
  const auto& team = s.poses.back();
  const auto& covs = s.covs.back();
  const auto& means = cs.start().means;  // static landmarks in the sweep
  Rng rng(seed * 31 + 7);
  for (std::size_t a = 0; a < cs.labeler().size(); ++a) {
    const auto& d = cs.labeler().def(static_cast<int>(a));
    if (d.kind != PredicateKind::Proximity) continue;
    const auto p = team[d.robot].position();
    const auto mc = oracle::mc_disk_mass(means[d.landmark], covs[d.landmark], p, d.radius, 200000, rng);
    rows.push_back(oracle::make_report(cell + "/mass/" + d.name, mc.p,
                                       prob_within_radius(means[d.landmark], covs[d.landmark], p, d.radius),
                                       0.01));
  }
  if (s.poses.size() < 2) return;
  const auto& prev = s.covs[s.covs.size() - 2];
  for (std::size_t i = 0; i < means.size(); ++i) {
    const auto& dyn = cs.problem().dynamics[i];
    std::vector<oracle::KfObservation> obs;
    for (std::size_t j = 0; j < team.size(); ++j)
      for (const auto& sensor : cs.problem().sensors[j]) {
        if (!in_gate(sensor, team[j], means[i], cs.workspace())) continue;
        if (sensor.kind == SensorKind::Position)
          obs.push_back(oracle::position_observation(sensor.position_noise));
        else
          obs.push_back(oracle::range_observation(team[j].position(), means[i],
                                                  sensor.range_base_std +
                                                      sensor.range_slope * (means[i] - team[j].position()).norm()));
      }
    const Eigen::Matrix2d ref = oracle::kf_covariance(prev[i], dyn.A, dyn.process_noise, obs);
    const double scale = std::max(1.0, std::abs(ref.determinant()));
    rows.push_back(oracle::make_report(cell + "/kf_det/lm" + std::to_string(i), ref.determinant(),
                                       covs[i].determinant(), 1e-9 * scale));
  }
}
#endif

int cmd_sweep(const Globals& g, const std::string& kind, const std::string& robots,
              const std::string& landmarks, const std::string& offsets, const std::string& seeds_arg,
              int seed_count, bool with_oracle, std::ostream& out, std::ostream& err) {
  std::vector<std::uint64_t> seeds;
  if (!seeds_arg.empty()) {
    for (double s : numbers_of(seeds_arg)) seeds.push_back(static_cast<std::uint64_t>(s));
  } else {
    const std::uint64_t base = g.seed.value_or(0);
    for (int k = 0; k < seed_count; ++k) seeds.push_back(base + k);
  }
#ifndef SEMPLAN_HAVE_ORACLES
  if (with_oracle) {
    err << "this build has no oracles (configure with SEMPLAN_BUILD_ORACLES=ON)\n";
    return kUsage;
  }
#else
  (void)err;
#endif
  bool all_found = true;
  std::string table;
  if (kind == "scalability") {
    table = "N,M,seed,found,H,cost,iterations,runtime_s\n";
#ifdef SEMPLAN_HAVE_ORACLES
    std::vector<oracle::OracleReport> rows;
#endif
    for (double n : numbers_of(robots))
      for (double m : numbers_of(landmarks))
        for (std::uint64_t seed : seeds) {
          CompiledScenario cs(scalability_benchmark({static_cast<int>(n), static_cast<int>(m), seed}));
          PlannerParams p = planner_params(cs.scenario(), g);
          p.seed = seed;
          Planner planner(cs.problem(), p);
          const PlanResult r = planner.plan(cs.start());
          all_found = all_found && r.solution.has_value();
          table += std::to_string(static_cast<int>(n)) + "," + std::to_string(static_cast<int>(m)) + "," +
                   std::to_string(seed) + "," + (r.solution ? "1" : "0") + "," +
                   std::to_string(r.solution ? r.solution->horizon : -1) +
                   fmt(",%.6f", r.solution ? r.solution->cost : -1.0) + "," +
                   std::to_string(r.stats.iterations) + fmt(",%.3f\n", r.stats.seconds);
#ifdef SEMPLAN_HAVE_ORACLES
          if (with_oracle && r.solution)
            oracle_rows(cs, *r.solution,
                        "N" + std::to_string(static_cast<int>(n)) + "_M" + std::to_string(static_cast<int>(m)) +
                            "_s" + std::to_string(seed),
                        seed, rows);
#endif
        }
#ifdef SEMPLAN_HAVE_ORACLES
    if (with_oracle) {
      const std::string csv = oracle::to_csv(rows);
      write_file(g, "oracle_report.csv", csv);
      out << csv;
      for (const auto& r : rows)
        if (!r.pass) all_found = false;
    }
#endif
  } else if (kind == "replanning") {
    std::vector<std::unique_ptr<CompiledScenario>> scs;
    std::vector<MissionVariant> variants;
    for (double off : numbers_of(offsets)) {
      scs.push_back(std::make_unique<CompiledScenario>(replanning_benchmark(off, true)));
      variants.push_back({scs.back()->scenario().name, &scs.back()->mission()});
    }
    if (variants.empty()) throw CLI::ValidationError("--offsets", "no offsets given");
    PlannerParams p = planner_params(scs.front()->scenario(), g);
    const auto rows = compare_replanning_frequency(variants, seeds, scs.front()->scenario().executor, p);
    table = replanning_report_csv(rows);
    for (const auto& r : rows) all_found = all_found && r.success_rate > 0.0;
  } else if (kind == "feasibility") {
    table = "seed,sampling,found,first_solution_iteration,runtime_s\n";
    CompiledScenario cs(feasibility_benchmark());
    for (std::uint64_t seed : seeds) {
      PlannerParams p = planner_params(cs.scenario(), g);
      p.seed = seed;
      Planner planner(cs.problem(), p);
      const PlanResult r = planner.plan(cs.start());
      all_found = all_found && r.solution.has_value();
      const long first = r.stats.first_solution_iteration ? static_cast<long>(*r.stats.first_solution_iteration) : -1L;
      table += std::to_string(seed) + "," + (g.uniform ? "uniform" : "biased") + "," +
               (r.solution ? "1" : "0") + "," + std::to_string(first) + fmt(",%.3f\n", r.stats.seconds);
    }
  } else {
    throw CLI::ValidationError("--kind", "expected scalability, replanning or feasibility");
  }
  if (!with_oracle) out << table;
  write_file(g, "sweep.csv", table);
  return all_found ? kOk : kNoSolution;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semantic-map temporal logic planner"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--scenario", g.scenario, "scenario JSON file");
  app.add_option("--seed", g.seed, "override the scenario seed");
  app.add_option("--out", g.out_dir, "directory for emitted files");
  app.add_option("--workers", g.workers, "planner worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--uniform-sampling", g.uniform, "uniform bucket and control sampling");
  app.fallthrough();

  std::string task;
  auto* dfa = app.add_subcommand("compile-dfa", "dump the task automaton and pruning report");
  dfa->add_option("--task", task, "formula to compile instead of the scenario task");

  std::optional<std::size_t> n_max;
  auto* plan = app.add_subcommand("plan", "plan from the scenario's initial state");
  plan->add_option("--n-max", n_max, "iteration budget");

  int stride = 5;
  auto* sim = app.add_subcommand("simulate", "closed-loop mission with replanning");
  sim->add_option("--plot-stride", stride, "row stride of the plot export")->check(CLI::PositiveNumber);

  std::vector<std::string> poses;
  auto* ev = app.add_subcommand("eval-predicate", "predicate values at the initial state");
  ev->add_option("--pose", poses, "override a robot pose, j:x,y,deg");

  std::string kind = "scalability", robots = "1,5", landmarks = "5,15", offsets = "0,4,10", seed_list;
  int seed_count = 1;
  bool with_oracle = false;
  auto* sw = app.add_subcommand("sweep", "benchmark grid");
  sw->add_option("--kind", kind, "scalability, replanning or feasibility");
  sw->add_option("--robots", robots, "comma-separated N values");
  sw->add_option("--landmarks", landmarks, "comma-separated M values");
  sw->add_option("--offsets", offsets, "comma-separated prior offsets (replanning)");
  sw->add_option("--seeds", seed_list, "comma-separated seeds");
  sw->add_option("--runs", seed_count, "number of consecutive seeds from --seed")->check(CLI::PositiveNumber);
  sw->add_flag("--oracle", with_oracle, "emit an oracle report");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  try {
    if (dfa->parsed()) return cmd_compile_dfa(g, task, out);
    if (plan->parsed()) return cmd_plan(g, n_max, out, err);
    if (sim->parsed()) return cmd_simulate(g, stride, out);
    if (ev->parsed()) return cmd_eval_predicate(g, poses, out);
    if (sw->parsed())
      return cmd_sweep(g, kind, robots, landmarks, offsets, seed_list, seed_count, with_oracle, out, err);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace semplan::cli
