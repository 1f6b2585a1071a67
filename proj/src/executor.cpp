#include "semplan/executor.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>

namespace semplan {

std::string to_string(MissionStatus s) {
  switch (s) {
    case MissionStatus::Success: return "SUCCESS";
    case MissionStatus::Violated: return "VIOLATED";
    case MissionStatus::FailedReplanBudget: return "FAILED_REPLAN_BUDGET";
    case MissionStatus::FailedStepBudget: return "FAILED_STEP_BUDGET";
    case MissionStatus::NoPlan: return "NO_PLAN";
  }
  return "UNKNOWN";
}

namespace {

void append(std::string& out, const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  out += buf;
}

std::string csv_header(const TraceRecord& r) {
  std::string h = "step";
  for (std::size_t j = 0; j < r.team.size(); ++j)
    for (const char* f : {"x", "y", "theta"}) h += ",robot_" + std::to_string(j) + "_" + f;
  for (std::size_t i = 0; i < r.truth.size(); ++i)
    for (const char* f : {"true_x", "true_y", "est_x", "est_y", "det_cov", "top_class"})
      h += ",lm_" + std::to_string(i) + "_" + f;
  h += ",dfa_state,replanned,label\n";
  return h;
}

std::string csv_row(const TraceRecord& r, const Dfa& dfa, const std::vector<std::string>& names) {
  std::string s = std::to_string(r.step);
  for (const auto& p : r.team) {
    append(s, ",%.6f", p.x);
    append(s, ",%.6f", p.y);
    append(s, ",%.6f", p.theta);
  }
  for (std::size_t i = 0; i < r.truth.size(); ++i) {
    append(s, ",%.6f", r.truth[i].x());
    append(s, ",%.6f", r.truth[i].y());
    append(s, ",%.6f", r.means[i].x());
    append(s, ",%.6f", r.means[i].y());
    append(s, ",%.6e", r.covs[i].determinant());
    const int c = argmax_class(r.classes[i]);
    s += "," + (c < static_cast<int>(names.size()) ? names[c] : std::to_string(c));
  }
  s += "," + std::to_string(r.dfa_state) + "," + (r.replanned ? "1" : "0") + ",";
  bool first = true;
  for (const auto& a : dfa.names_of(r.label)) {
    if (!first) s += ";";
    s += a;
    first = false;
  }
  s += "\n";
  return s;
}

std::vector<Eigen::Vector2d> means_of(const std::vector<GaussianBelief>& m) {
  std::vector<Eigen::Vector2d> out;
  for (const auto& b : m) out.push_back(b.mean);
  return out;
}
std::vector<Eigen::Matrix2d> covs_of(const std::vector<GaussianBelief>& m) {
  std::vector<Eigen::Matrix2d> out;
  for (const auto& b : m) out.push_back(b.cov);
  return out;
}

}  // namespace

std::string MissionTrace::to_csv(const Dfa& dfa, const std::vector<std::string>& names) const {
  return to_plot_csv(dfa, names, 1);
}

std::string MissionTrace::to_plot_csv(const Dfa& dfa, const std::vector<std::string>& names,
                                      int stride) const {
  if (records.empty()) return "step,dfa_state,replanned,label\n";
  if (stride < 1) stride = 1;
  std::string out = csv_header(records.front());
  for (std::size_t k = 0; k < records.size(); ++k)
    if (k % stride == 0 || k + 1 == records.size()) out += csv_row(records[k], dfa, names);
  return out;
}

bool lookahead_feasible(const PlanningProblem& problem, std::span<const Eigen::Vector2d> means,
                        std::span<const Eigen::Matrix2d> covs,
                        std::span<const ClassBelief> classes, int q, int t, const Solution& plan,
                        std::size_t k, int T) {
  if (T < 1) throw std::invalid_argument("lookahead must be at least 1");
  const auto& dfa = *problem.dfa;
  const std::size_t H = plan.controls.size();
  if (k > H) return false;
  std::vector<Eigen::Vector2d> m(means.begin(), means.end());
  std::vector<Eigen::Matrix2d> c(covs.begin(), covs.end());
  const std::size_t end = std::min(H + 1, k + static_cast<std::size_t>(T));
  for (std::size_t pos = k; pos < end; ++pos) {
    const Symbol l = problem.labeler->symbol(plan.poses[pos], MapView{m, c, classes});
    const auto next = next_state(dfa, q, l);
    if (!next) return false;
    if (dfa.accepting && *next == *dfa.accepting) return true;
    const int expected = pos < H ? plan.dfa_states[pos + 1] : (dfa.accepting ? *dfa.accepting : -1);
    if (*next != expected) return false;
    q = *next;
    if (pos + 1 >= end) break;
    const int step = t + static_cast<int>(pos - k);
    for (std::size_t i = 0; i < m.size(); ++i) {
      const GaussianBelief b{m[i], c[i]};
      m[i] = predict_mean(b, problem.dynamics[i], step);
      c[i] = propagate_covariance(b, problem.dynamics[i], step, plan.poses[pos + 1], problem.sensors,
                                  *problem.ws);
    }
  }
  return true;
}

MissionTrace execute(const Mission& mission, const ExecutorParams& exec,
                     const PlannerParams& planner_params, std::uint64_t seed) {
  const auto wall0 = std::chrono::steady_clock::now();
  const PlanningProblem& problem = mission.problem;
  const auto& dfa = *problem.dfa;
  const std::size_t nm = problem.num_landmarks();
  Rng rng(seed);

  MissionTrace trace;
  TeamState team = mission.start.team;
  std::vector<Eigen::Vector2d> truth = mission.truth.positions;
  std::vector<GaussianBelief> map(nm);
  for (std::size_t i = 0; i < nm; ++i) map[i] = {mission.start.means[i], mission.start.covs[i]};
  std::vector<ClassBelief> classes = mission.start.classes;
  int q = mission.start.dfa_state;
  int t = mission.start.step;

  std::optional<Solution> plan;
  std::size_t k = 0;
  bool replanned_now = false;
  int measured = 0;
  planner_params.validate();

  for (;;) {
    const auto means = means_of(map);
    const auto covs = covs_of(map);
    const Symbol l = problem.labeler->symbol(team, MapView{means, covs, classes});
    const auto after = next_state(dfa, q, l);
    const int shown = after ? *after : -1;  // records hold the state after reading l

    bool need_plan = !plan || k >= plan->controls.size() ||
                     !lookahead_feasible(problem, means, covs, classes, q, t, *plan, k,
                                         exec.lookahead);
    if (after && dfa.accepting && *after == *dfa.accepting) need_plan = false;
    if (need_plan && after) {
      if (trace.plan_calls > exec.max_replans) {
        trace.records.push_back({t, team, truth, means, covs, classes, shown, false, l, measured});
        trace.status = MissionStatus::FailedReplanBudget;
        break;
      }
      PlannerParams pp = planner_params;
      pp.seed = planner_params.seed * 0x9E3779B97F4A7C15ULL + seed * 1000003ULL +
                static_cast<std::uint64_t>(trace.plan_calls);
      Planner p(problem, pp);
      PlanStart start{team, means, covs, classes, q, t};
      PlanResult res = p.plan(start);
      ++trace.plan_calls;
      trace.plan_seconds += res.stats.seconds;
      replanned_now = true;
      if (!res.solution) {
        trace.records.push_back({t, team, truth, means, covs, classes, shown, true, l, measured});
        trace.status = trace.plan_calls == 1 ? MissionStatus::NoPlan : MissionStatus::FailedReplanBudget;
        break;
      }
      if (trace.plan_calls == 1) trace.initial_cost = res.solution->cost;
      plan = std::move(res.solution);
      k = 0;
    }

    trace.records.push_back({t, team, truth, means, covs, classes, shown, replanned_now, l, measured});
    replanned_now = false;
    if (!after) {
      trace.status = MissionStatus::Violated;
      break;
    }
    if (dfa.accepting && *after == *dfa.accepting) {
      trace.status = MissionStatus::Success;
      break;
    }
    if (t - mission.start.step >= exec.max_steps || k >= plan->controls.size()) {
      trace.status = MissionStatus::FailedStepBudget;
      break;
    }

    const TeamState next_team = step_team(team, plan->controls[k], problem.controls);
    ++k;
    std::vector<Eigen::Vector2d> next_truth(nm);
    for (std::size_t i = 0; i < nm; ++i)
      next_truth[i] = ground_truth_step(truth[i], problem.dynamics[i], t, rng);

    measured = 0;
    std::vector<std::vector<Measurement>> per_landmark(nm);
    if (exec.sensing) {
      for (std::size_t j = 0; j < next_team.size(); ++j)
        for (std::size_t i = 0; i < nm; ++i) {
          bool seen = false;
          for (const auto& s : problem.sensors[j]) {
            auto m = sense(s, next_team[j], next_truth[i], *problem.ws, rng);
            if (!m) continue;
            m->robot = static_cast<int>(j);
            m->landmark = static_cast<int>(i);
            m->step = t + 1;
            per_landmark[i].push_back(*m);
            seen = true;
          }
          if (seen && mission.confusion.size() > 0 && i < mission.truth.classes.size()) {
            const int y = classify(mission.truth.classes[i], mission.confusion, rng);
            classes[i] = class_belief_update(classes[i], y, mission.confusion).belief;
          }
        }
    }
    for (std::size_t i = 0; i < nm; ++i) {
      measured += static_cast<int>(per_landmark[i].size());
      map[i] = posterior_position_update(map[i], problem.dynamics[i], t, per_landmark[i], next_team,
                                         problem.sensors);
    }
    team = next_team;
    truth = std::move(next_truth);
    q = *after;
    ++t;
  }
  trace.replans = std::max(0, trace.plan_calls - 1);
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return trace;
}

std::vector<VariantSummary> compare_replanning_frequency(std::span<const MissionVariant> variants,
                                                         std::span<const std::uint64_t> seeds,
                                                         const ExecutorParams& exec,
                                                         const PlannerParams& planner) {
  std::vector<VariantSummary> out;
  for (const auto& v : variants) {
    VariantSummary s;
    s.name = v.name;
    double secs = 0.0;
    for (std::uint64_t seed : seeds) {
      PlannerParams pp = planner;
      pp.seed = seed;
      const MissionTrace tr = execute(*v.mission, exec, pp, seed);
      s.replans.push_back(tr.replans);
      s.success.push_back(tr.success());
      secs += tr.plan_seconds;
    }
    const double n = static_cast<double>(std::max<std::size_t>(1, seeds.size()));
    s.mean_replans = std::accumulate(s.replans.begin(), s.replans.end(), 0.0) / n;
    s.success_rate = std::count(s.success.begin(), s.success.end(), true) / n;
    s.mean_plan_seconds = secs / n;
    out.push_back(std::move(s));
  }
  return out;
}

std::string replanning_report_csv(std::span<const VariantSummary> rows) {
  std::string out = "variant,runs,mean_replans,success_rate,mean_plan_seconds\n";
  for (const auto& r : rows) {
    out += r.name + "," + std::to_string(r.replans.size());
    append(out, ",%.4f", r.mean_replans);
    append(out, ",%.4f", r.success_rate);
    append(out, ",%.4f\n", r.mean_plan_seconds);
  }
  return out;
}

}  // namespace semplan
