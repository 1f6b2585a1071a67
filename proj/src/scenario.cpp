#include "semplan/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include "json.hpp"

namespace semplan {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ScenarioError(path, what);
}

const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing field");
  return *it;
}

double num(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double num_or(const json& j, const std::string& key, double def, const std::string& path) {
  auto it = j.find(key);
  return it == j.end() ? def : num(*it, path + "." + key);
}

int int_of(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::string str(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(num(j[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

Eigen::Vector2d vec2(const json& j, const std::string& path) {
  const auto v = numbers(j, path);
  if (v.size() != 2) fail(path, "expected two numbers");
  return {v[0], v[1]};
}

Eigen::Matrix2d mat2(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected a 2x2 matrix");
  Eigen::Matrix2d m;
  for (int r = 0; r < 2; ++r) {
    const auto row = numbers(j[r], path + "[" + std::to_string(r) + "]");
    if (row.size() != 2) fail(path, "expected a 2x2 matrix");
    m(r, 0) = row[0];
    m(r, 1) = row[1];
  }
  return m;
}

void check_psd(const Eigen::Matrix2d& m, const std::string& path) {
  if (!m.allFinite()) fail(path, "matrix must be finite");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) fail(path, "matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
  if (es.eigenvalues().minCoeff() < -1e-10) fail(path, "matrix must be positive semidefinite");
}

json to_json(const Eigen::Vector2d& v) { return json::array({v.x(), v.y()}); }
json to_json(const Eigen::Matrix2d& m) {
  return json::array({json::array({m(0, 0), m(0, 1)}), json::array({m(1, 0), m(1, 1)})});
}

int class_index(const std::vector<std::string>& classes, const std::string& name,
                const std::string& path) {
  for (std::size_t c = 0; c < classes.size(); ++c)
    if (classes[c] == name) return static_cast<int>(c);
  fail(path, "unknown class '" + name + "'");
}

ControlSchedule parse_schedule(const json& j, const std::string& path, double dt) {
  ControlSchedule s;
  s.dt = dt;
  const std::string kind = str(require(j, "kind", path), path + ".kind");
  if (kind == "static") {
    s.kind = ScheduleKind::Static;
  } else if (kind == "constant_velocity") {
    s.kind = ScheduleKind::ConstantVelocity;
    s.velocity = vec2(require(j, "velocity", path), path + ".velocity");
  } else if (kind == "oscillation") {
    s.kind = ScheduleKind::Oscillation;
    s.start = vec2(require(j, "start", path), path + ".start");
    s.end = vec2(require(j, "end", path), path + ".end");
    s.speed = num(require(j, "speed", path), path + ".speed");
  } else if (kind == "circular") {
    s.kind = ScheduleKind::Circular;
    s.center = vec2(require(j, "center", path), path + ".center");
    s.radius = num(require(j, "radius", path), path + ".radius");
    s.angular_speed = num(require(j, "angular_speed_deg", path), path + ".angular_speed_deg") * kDeg;
    s.phase = num_or(j, "phase_deg", 0.0, path) * kDeg;
  } else {
    fail(path + ".kind", "unknown schedule kind '" + kind + "'");
  }
  return s;
}

json schedule_json(const ControlSchedule& s) {
  switch (s.kind) {
    case ScheduleKind::Static: return {{"kind", "static"}};
    case ScheduleKind::ConstantVelocity: return {{"kind", "constant_velocity"}, {"velocity", to_json(s.velocity)}};
    case ScheduleKind::Oscillation:
      return {{"kind", "oscillation"}, {"start", to_json(s.start)}, {"end", to_json(s.end)}, {"speed", s.speed}};
    case ScheduleKind::Circular:
      return {{"kind", "circular"},         {"center", to_json(s.center)},
              {"radius", s.radius},         {"angular_speed_deg", s.angular_speed / kDeg},
              {"phase_deg", s.phase / kDeg}};
  }
  return {};
}

SensorModel parse_sensor(const json& j, const std::string& path) {
  SensorModel s;
  const std::string kind = str(require(j, "kind", path), path + ".kind");
  if (kind == "range") s.kind = SensorKind::Range;
  else if (kind == "position") s.kind = SensorKind::Position;
  else fail(path + ".kind", "unknown sensor kind '" + kind + "'");
  s.range_limit = num(require(j, "range", path), path + ".range");
  if (auto it = j.find("fov"); it != j.end()) {
    const std::string fov = str(*it, path + ".fov");
    if (fov == "disk") {
      s.fov = FovKind::Disk;
    } else if (fov == "rectangle") {
      s.fov = FovKind::Rectangle;
      s.fov_width = num(require(j, "fov_width", path), path + ".fov_width");
      s.fov_height = num(require(j, "fov_height", path), path + ".fov_height");
    } else {
      fail(path + ".fov", "unknown field of view '" + fov + "'");
    }
  }
  s.range_base_std = num_or(j, "noise_base_std", 0.0, path);
  s.range_slope = num_or(j, "noise_slope", s.kind == SensorKind::Range ? 0.5 : 0.0, path);
  if (auto it = j.find("noise_cov"); it != j.end()) s.position_noise = mat2(*it, path + ".noise_cov");
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  return s;
}

}  // namespace

void Scenario::validate() const {
  if (!(bounds.xmax > bounds.xmin && bounds.ymax > bounds.ymin)) fail("workspace.bounds", "empty bounds");
  if (!(resolution > 0.0)) fail("workspace.resolution", "must be positive");
  if (!(time_step > 0.0)) fail("time_step", "must be positive");
  if (classes.empty()) fail("classes", "at least one class is required");
  if (confusion.rows() != static_cast<Eigen::Index>(classes.size()))
    fail("confusion", "must be a square matrix over the class set");
  try {
    validate_confusion(confusion);
  } catch (const std::invalid_argument& e) {
    fail("confusion", e.what());
  }
  if (robots.empty()) fail("robots", "at least one robot is required");
  for (std::size_t j = 0; j < robots.size(); ++j) {
    const std::string p = "robots[" + std::to_string(j) + "]";
    if (robots[j].controls.size() == 0) fail(p + ".controls", "empty control set");
  }
  for (std::size_t i = 0; i < landmarks.size(); ++i) {
    const std::string p = "landmarks[" + std::to_string(i) + "]";
    const auto& lm = landmarks[i];
    check_psd(lm.cov, p + ".cov");
    if (lm.class_belief.size() != classes.size())
      fail(p + ".class_belief", "needs one probability per class");
    double sum = 0.0;
    for (double v : lm.class_belief) {
      if (v < 0.0) fail(p + ".class_belief", "negative probability");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      fail(p + ".class_belief", "landmark " + std::to_string(i) + " class belief sums to " +
                                    std::to_string(sum) + ", not 1");
    check_psd(lm.dynamics.process_noise, p + ".dynamics.process_noise");
    if (lm.true_class < 0 || lm.true_class >= static_cast<int>(classes.size()))
      fail(p + ".true_class", "unknown class");
  }
  for (std::size_t k = 0; k < predicates.size(); ++k) {
    try {
      predicates[k].validate(robots.size(), landmarks.size(), classes.size());
    } catch (const PredicateError& e) {
      fail("predicates[" + std::to_string(k) + "]", e.what());
    }
  }
  if (task.empty()) fail("task", "missing task formula");
  try {
    planner.validate();
  } catch (const std::invalid_argument& e) {
    fail("planner", e.what());
  }
  if (executor.lookahead < 1) fail("executor.lookahead", "must be at least 1");
}

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail("", std::string("parse error: ") + e.what());
  }
  Scenario s;
  const int version = int_of(require(root, "schema_version", ""), "schema_version");
  if (version != kScenarioSchemaVersion)
    fail("schema_version", "unsupported version " + std::to_string(version));
  if (auto it = root.find("name"); it != root.end()) s.name = str(*it, "name");
  s.time_step = num_or(root, "time_step", s.time_step, "");
  if (auto it = root.find("seed"); it != root.end()) {
    if (!it->is_number_unsigned() && !it->is_number_integer()) fail("seed", "expected an integer");
    s.seed = it->get<std::uint64_t>();
  }

  const json& ws = require(root, "workspace", "");
  {
    const auto b = numbers(require(ws, "bounds", "workspace"), "workspace.bounds");
    if (b.size() != 4) fail("workspace.bounds", "expected [xmin, ymin, xmax, ymax]");
    s.bounds = {b[0], b[1], b[2], b[3]};
    s.resolution = num_or(ws, "resolution", s.resolution, "workspace");
    if (auto it = ws.find("obstacles"); it != ws.end()) {
      if (!it->is_array()) fail("workspace.obstacles", "expected an array");
      for (std::size_t k = 0; k < it->size(); ++k) {
        const std::string p = "workspace.obstacles[" + std::to_string(k) + "]";
        const json& o = (*it)[k];
        if (!o.is_array() || o.size() < 3) fail(p, "expected at least three vertices");
        Polygon poly;
        for (std::size_t v = 0; v < o.size(); ++v)
          poly.vertices.push_back(vec2(o[v], p + "[" + std::to_string(v) + "]"));
        s.obstacles.push_back(std::move(poly));
      }
    }
  }

  {
    const json& cl = require(root, "classes", "");
    if (!cl.is_array()) fail("classes", "expected an array");
    for (std::size_t c = 0; c < cl.size(); ++c) s.classes.push_back(str(cl[c], "classes[" + std::to_string(c) + "]"));
    const std::size_t nc = s.classes.size();
    if (auto it = root.find("confusion"); it != root.end()) {
      if (!it->is_array() || it->size() != nc) fail("confusion", "expected one row per class");
      s.confusion.resize(nc, nc);
      for (std::size_t r = 0; r < nc; ++r) {
        const auto row = numbers((*it)[r], "confusion[" + std::to_string(r) + "]");
        if (row.size() != nc) fail("confusion[" + std::to_string(r) + "]", "expected one entry per class");
        for (std::size_t c = 0; c < nc; ++c) s.confusion(r, c) = row[c];
      }
    } else {
      s.confusion = Eigen::MatrixXd::Identity(nc, nc);
    }
  }

  const json& robots = require(root, "robots", "");
  if (!robots.is_array()) fail("robots", "expected an array");
  for (std::size_t j = 0; j < robots.size(); ++j) {
    const std::string p = "robots[" + std::to_string(j) + "]";
    const json& r = robots[j];
    RobotSpec spec;
    const auto pose = numbers(require(r, "pose", p), p + ".pose");
    if (pose.size() != 3) fail(p + ".pose", "expected [x, y, theta_deg]");
    spec.pose = {pose[0], pose[1], wrap_angle(pose[2] * kDeg)};
    spec.controls = ControlSet::default_set(s.time_step);
    if (auto it = r.find("controls"); it != r.end()) {
      spec.controls.linear = numbers(require(*it, "linear", p + ".controls"), p + ".controls.linear");
      spec.controls.angular.clear();
      for (double d : numbers(require(*it, "angular_deg", p + ".controls"), p + ".controls.angular_deg"))
        spec.controls.angular.push_back(d * kDeg);
    }
    if (auto it = r.find("sensors"); it != r.end()) {
      if (!it->is_array()) fail(p + ".sensors", "expected an array");
      for (std::size_t k = 0; k < it->size(); ++k)
        spec.sensors.push_back(parse_sensor((*it)[k], p + ".sensors[" + std::to_string(k) + "]"));
    }
    s.robots.push_back(std::move(spec));
  }

  const json& lms = require(root, "landmarks", "");
  if (!lms.is_array()) fail("landmarks", "expected an array");
  for (std::size_t i = 0; i < lms.size(); ++i) {
    const std::string p = "landmarks[" + std::to_string(i) + "]";
    const json& l = lms[i];
    LandmarkSpec lm;
    lm.mean = vec2(require(l, "mean", p), p + ".mean");
    lm.cov = mat2(require(l, "cov", p), p + ".cov");
    const json& cb = require(l, "class_belief", p);
    if (cb.is_object()) {
      lm.class_belief.assign(s.classes.size(), 0.0);
      for (auto it = cb.begin(); it != cb.end(); ++it)
        lm.class_belief[class_index(s.classes, it.key(), p + ".class_belief")] =
            num(it.value(), p + ".class_belief." + it.key());
    } else {
      lm.class_belief = numbers(cb, p + ".class_belief");
    }
    lm.true_position = lm.mean;
    if (auto it = l.find("true_position"); it != l.end()) lm.true_position = vec2(*it, p + ".true_position");
    lm.true_class = lm.class_belief.empty() ? 0 : argmax_class(lm.class_belief);
    if (auto it = l.find("true_class"); it != l.end())
      lm.true_class = class_index(s.classes, str(*it, p + ".true_class"), p + ".true_class");
    lm.dynamics.schedule.dt = s.time_step;
    if (auto it = l.find("dynamics"); it != l.end()) {
      const std::string dp = p + ".dynamics";
      if (auto a = it->find("A"); a != it->end()) lm.dynamics.A = mat2(*a, dp + ".A");
      if (auto b = it->find("B"); b != it->end()) lm.dynamics.B = mat2(*b, dp + ".B");
      if (auto sc = it->find("schedule"); sc != it->end())
        lm.dynamics.schedule = parse_schedule(*sc, dp + ".schedule", s.time_step);
      if (auto r = it->find("process_noise"); r != it->end())
        lm.dynamics.process_noise = mat2(*r, dp + ".process_noise");
    }
    s.landmarks.push_back(std::move(lm));
  }

  const json& preds = require(root, "predicates", "");
  if (!preds.is_array()) fail("predicates", "expected an array");
  for (std::size_t k = 0; k < preds.size(); ++k) {
    const std::string p = "predicates[" + std::to_string(k) + "]";
    const json& d = preds[k];
    PredicateDef def;
    def.name = str(require(d, "name", p), p + ".name");
    const std::string kind = str(require(d, "kind", p), p + ".kind");
    if (kind == "proximity") def.kind = PredicateKind::Proximity;
    else if (kind == "class_proximity") def.kind = PredicateKind::ClassProximity;
    else if (kind == "uncertainty") def.kind = PredicateKind::Uncertainty;
    else if (kind == "relaxed_class_proximity") def.kind = PredicateKind::RelaxedClassProximity;
    else fail(p + ".kind", "unknown predicate kind '" + kind + "'");
    def.robot = int_of(require(d, "robot", p), p + ".robot");
    if (auto it = d.find("landmark"); it != d.end()) def.landmark = int_of(*it, p + ".landmark");
    def.radius = num_or(d, "radius", def.radius, p);
    def.delta = num_or(d, "delta", def.delta, p);
    if (auto it = d.find("class"); it != d.end())
      def.class_index = class_index(s.classes, str(*it, p + ".class"), p + ".class");
    s.predicates.push_back(std::move(def));
  }

  s.task = str(require(root, "task", ""), "task");

  if (auto it = root.find("planner"); it != root.end()) {
    const json& pl = *it;
    auto& P = s.planner;
    if (auto v = pl.find("n_max"); v != pl.end()) P.n_max = static_cast<std::size_t>(int_of(*v, "planner.n_max"));
    P.p_rand = num_or(pl, "p_rand", P.p_rand, "planner");
    P.p_new = num_or(pl, "p_new", P.p_new, "planner");
    P.quant_xy = num_or(pl, "quant_xy", P.quant_xy, "planner");
    P.quant_theta = num_or(pl, "quant_theta_deg", P.quant_theta / kDeg, "planner") * kDeg;
    if (auto v = pl.find("warmup"); v != pl.end()) P.warmup = static_cast<std::size_t>(int_of(*v, "planner.warmup"));
    if (auto v = pl.find("bucket_subsample"); v != pl.end())
      P.bucket_subsample = static_cast<std::size_t>(int_of(*v, "planner.bucket_subsample"));
    if (auto v = pl.find("sampling"); v != pl.end()) {
      const std::string m = str(*v, "planner.sampling");
      if (m == "biased") P.mode = SamplingMode::Biased;
      else if (m == "uniform") P.mode = SamplingMode::Uniform;
      else fail("planner.sampling", "expected 'biased' or 'uniform'");
    }
    if (auto v = pl.find("stop_at_first_solution"); v != pl.end()) {
      if (!v->is_boolean()) fail("planner.stop_at_first_solution", "expected a boolean");
      P.stop_at_first_solution = v->get<bool>();
    }
    if (auto v = pl.find("bound_by_best_cost"); v != pl.end()) {
      if (!v->is_boolean()) fail("planner.bound_by_best_cost", "expected a boolean");
      P.bound_by_best_cost = v->get<bool>();
    }
    if (auto v = pl.find("max_tree_nodes"); v != pl.end())
      P.max_tree_nodes = static_cast<std::size_t>(int_of(*v, "planner.max_tree_nodes"));
    P.obstacle_confidence = num_or(pl, "obstacle_confidence", P.obstacle_confidence, "planner");
  }
  if (auto it = root.find("executor"); it != root.end()) {
    const json& ex = *it;
    auto& E = s.executor;
    if (auto v = ex.find("lookahead"); v != ex.end()) E.lookahead = int_of(*v, "executor.lookahead");
    if (auto v = ex.find("max_replans"); v != ex.end()) E.max_replans = int_of(*v, "executor.max_replans");
    if (auto v = ex.find("max_steps"); v != ex.end()) E.max_steps = int_of(*v, "executor.max_steps");
    if (auto v = ex.find("sensing"); v != ex.end()) {
      if (!v->is_boolean()) fail("executor.sensing", "expected a boolean");
      E.sensing = v->get<bool>();
    }
  }
  s.planner.seed = s.seed;
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path, "cannot open scenario file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string scenario_to_json(const Scenario& s) {
  json root;
  root["schema_version"] = kScenarioSchemaVersion;
  root["name"] = s.name;
  root["seed"] = s.seed;
  root["time_step"] = s.time_step;
  json obstacles = json::array();
  for (const auto& o : s.obstacles) {
    json poly = json::array();
    for (const auto& v : o.vertices) poly.push_back(to_json(v));
    obstacles.push_back(poly);
  }
  root["workspace"] = {{"bounds", {s.bounds.xmin, s.bounds.ymin, s.bounds.xmax, s.bounds.ymax}},
                       {"resolution", s.resolution},
                       {"obstacles", obstacles}};
  root["classes"] = s.classes;
  json conf = json::array();
  for (Eigen::Index r = 0; r < s.confusion.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < s.confusion.cols(); ++c) row.push_back(s.confusion(r, c));
    conf.push_back(row);
  }
  root["confusion"] = conf;
  json robots = json::array();
  for (const auto& r : s.robots) {
    json sensors = json::array();
    for (const auto& se : r.sensors) {
      json js = {{"kind", se.kind == SensorKind::Range ? "range" : "position"},
                 {"range", se.range_limit},
                 {"noise_base_std", se.range_base_std},
                 {"noise_slope", se.range_slope},
                 {"noise_cov", to_json(se.position_noise)}};
      if (se.fov == FovKind::Rectangle) {
        js["fov"] = "rectangle";
        js["fov_width"] = se.fov_width;
        js["fov_height"] = se.fov_height;
      }
      sensors.push_back(js);
    }
    json ang = json::array();
    for (double a : r.controls.angular) ang.push_back(a / kDeg);
    robots.push_back({{"pose", {r.pose.x, r.pose.y, r.pose.theta / kDeg}},
                      {"controls", {{"linear", r.controls.linear}, {"angular_deg", ang}}},
                      {"sensors", sensors}});
  }
  root["robots"] = robots;
  json lms = json::array();
  for (const auto& l : s.landmarks)
    lms.push_back({{"mean", to_json(l.mean)},
                   {"cov", to_json(l.cov)},
                   {"class_belief", l.class_belief},
                   {"true_position", to_json(l.true_position)},
                   {"true_class", s.classes[l.true_class]},
                   {"dynamics",
                    {{"A", to_json(l.dynamics.A)},
                     {"B", to_json(l.dynamics.B)},
                     {"schedule", schedule_json(l.dynamics.schedule)},
                     {"process_noise", to_json(l.dynamics.process_noise)}}}});
  root["landmarks"] = lms;
  json preds = json::array();
  for (const auto& d : s.predicates) {
    static const char* kinds[] = {"proximity", "class_proximity", "uncertainty", "relaxed_class_proximity"};
    json jd = {{"name", d.name},
               {"kind", kinds[static_cast<int>(d.kind)]},
               {"robot", d.robot},
               {"radius", d.radius},
               {"delta", d.delta}};
    if (d.landmark >= 0) jd["landmark"] = d.landmark;
    if (d.class_index >= 0) jd["class"] = s.classes[d.class_index];
    preds.push_back(jd);
  }
  root["predicates"] = preds;
  root["task"] = s.task;
  const auto& P = s.planner;
  root["planner"] = {{"n_max", P.n_max},
                     {"p_rand", P.p_rand},
                     {"p_new", P.p_new},
                     {"quant_xy", P.quant_xy},
                     {"quant_theta_deg", P.quant_theta / kDeg},
                     {"warmup", P.warmup},
                     {"bucket_subsample", P.bucket_subsample},
                     {"sampling", P.mode == SamplingMode::Biased ? "biased" : "uniform"},
                     {"stop_at_first_solution", P.stop_at_first_solution},
                     {"bound_by_best_cost", P.bound_by_best_cost},
                     {"max_tree_nodes", P.max_tree_nodes},
                     {"obstacle_confidence", P.obstacle_confidence}};
  const auto& E = s.executor;
  root["executor"] = {{"lookahead", E.lookahead},
                      {"max_replans", E.max_replans},
                      {"max_steps", E.max_steps},
                      {"sensing", E.sensing}};
  return root.dump(2) + "\n";
}

CompiledScenario::CompiledScenario(Scenario s) : sc_(std::move(s)) {
  sc_.validate();
  ws_ = Workspace(sc_.bounds, sc_.obstacles, sc_.resolution);
  std::set<std::string> names;
  for (const auto& d : sc_.predicates) names.insert(d.name);
  Formula f;
  try {
    f = parse_cosafe_ltl(sc_.task, names);
  } catch (const LtlParseError& e) {
    fail("task", e.what());
  }
  dfa_ = compile_to_dfa(f);
  labeler_ = Labeler(sc_.predicates, dfa_.atoms);
  pruned_ = prune_dfa(dfa_, labeler_.meta());
  unpruned_ = unpruned_index(dfa_);

  PlanningProblem& pb = mission_.problem;
  pb.ws = &ws_;
  pb.dfa = &dfa_;
  pb.labeler = &labeler_;
  pb.pruned = &pruned_;
  pb.unpruned = &unpruned_;
  for (auto& r : sc_.robots) {
    r.controls.period = sc_.time_step;
    pb.controls.push_back(r.controls);
    pb.sensors.push_back(r.sensors);
  }
  PlanStart& st = mission_.start;
  for (const auto& r : sc_.robots) st.team.push_back(r.pose);
  for (const auto& l : sc_.landmarks) {
    TargetDynamics dyn = l.dynamics;
    dyn.schedule.dt = sc_.time_step;
    pb.dynamics.push_back(dyn);
    st.means.push_back(l.mean);
    st.covs.push_back(l.cov);
    st.classes.push_back(l.class_belief);
    mission_.truth.positions.push_back(l.true_position);
    mission_.truth.classes.push_back(l.true_class);
  }
  st.dfa_state = dfa_.initial;
  st.step = 0;
  mission_.confusion = sc_.confusion;
  mission_.class_names = sc_.classes;
}

}  // namespace semplan
