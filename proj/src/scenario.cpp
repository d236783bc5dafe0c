#include "pplan/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "pplan/errors.hpp"

namespace pplan {

using nlohmann::json;

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::Explore:
      return "explore";
    case Mode::Verify:
      return "verify";
    case Mode::Refine:
      return "refine";
  }
  return "explore";
}

Mode parse_mode(const std::string& text) {
  if (text == "explore" || text == "explore-only") return Mode::Explore;
  if (text == "verify") return Mode::Verify;
  if (text == "refine") return Mode::Refine;
  throw ParseError("field 'mode': unknown mode '" + text + "'");
}

NoiseModel Scenario::noise() const {
  return {mc.sigma_imu.value_or(0.0), mc.sigma_vis.value_or(0.0)};
}

VehicleModel Scenario::vehicle() const { return {dt_sim(), mc.u_max}; }

VerifyParams Scenario::verify_params() const {
  return {mc.trials, mc.delta_xhat.value_or(0.0), mc.alpha.value_or(0.0), mc.rng_seed};
}

namespace {

// Field-aware accessors: every failure names the dotted path it came from.
class Reader {
 public:
  Reader(const json& node, std::string where) : node_(node), where_(std::move(where)) {
    if (!node_.is_object()) fail("expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, _] : node_.items()) {
      if (!allowed.count(key)) throw ParseError("unknown key '" + path(key) + "'");
    }
  }

  bool has(const char* key) const { return node_.contains(key); }
  const json& raw(const char* key) const { return node_.at(key); }
  std::string path(const std::string& key) const {
    return where_.empty() ? key : where_ + "." + key;
  }

  const json& required(const char* key) const {
    if (!has(key)) throw ParseError("missing field '" + path(key) + "'");
    return node_.at(key);
  }

  double number(const char* key) const { return as_number(required(key), path(key)); }
  std::optional<double> opt_number(const char* key) const {
    if (!has(key)) return std::nullopt;
    return as_number(node_.at(key), path(key));
  }
  std::size_t count(const char* key) const { return as_count(required(key), path(key)); }
  std::string text(const char* key) const {
    const auto& v = required(key);
    if (!v.is_string()) throw ParseError("field '" + path(key) + "': expected a string");
    return v.get<std::string>();
  }
  Vec3 vec3(const char* key) const { return as_vec3(required(key), path(key)); }

  static double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ParseError("field '" + where + "': expected a number");
    return v.get<double>();
  }
  static std::size_t as_count(const json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw ParseError("field '" + where + "': expected a non-negative integer");
    }
    return v.get<std::size_t>();
  }
  static Vec3 as_vec3(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) {
      throw ParseError("field '" + where + "': expected [x, y, z]");
    }
    Vec3 out;
    for (int i = 0; i < 3; ++i) out[i] = as_number(v[i], where + "[" + std::to_string(i) + "]");
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("field '" + (where_.empty() ? std::string("<root>") : where_) + "': " + msg);
  }

  const json& node_;
  std::string where_;
};

Box read_box(const json& node, const std::string& where) {
  Reader r(node, where);
  r.allow({"lo", "hi"});
  return {r.vec3("lo"), r.vec3("hi")};
}

double read_beta(const json& v, const std::string& where) {
  if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity")) {
    return std::numeric_limits<double>::infinity();
  }
  return Reader::as_number(v, where);
}

json write_beta(double beta) {
  if (std::isinf(beta)) return "inf";
  return beta;
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json to_json(const Box& b) { return {{"lo", to_json(b.lo)}, {"hi", to_json(b.hi)}}; }

void require(bool ok, const std::string& invariant) {
  if (!ok) throw ValidationError(invariant);
}

bool box_inside(const Box& inner, const Box& outer) {
  return (inner.lo.array() >= outer.lo.array()).all() &&
         (inner.hi.array() <= outer.hi.array()).all();
}

}  // namespace

Scenario scenario_from_json(const json& doc, const std::filesystem::path& base_dir) {
  Scenario s;
  s.base_dir = base_dir;
  Reader root(doc, "");
  root.allow({"mode", "workspace", "obstacles", "features", "start", "goal", "planner", "heuristic",
              "mc"});

  if (root.has("mode")) s.mode = parse_mode(root.text("mode"));
  s.env.workspace = read_box(root.required("workspace"), "workspace");

  if (root.has("obstacles")) {
    const auto& list = root.raw("obstacles");
    if (!list.is_array()) throw ParseError("field 'obstacles': expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      s.env.obstacles.push_back(read_box(list[i], "obstacles[" + std::to_string(i) + "]"));
    }
  }
  if (root.has("features")) {
    const auto& list = root.raw("features");
    if (!list.is_array()) throw ParseError("field 'features': expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      s.env.features.push_back(Reader::as_vec3(list[i], "features[" + std::to_string(i) + "]"));
    }
  }

  {
    Reader r(root.required("start"), "start");
    r.allow({"position", "yaw"});
    s.start.position = r.vec3("position");
    s.start.yaw = wrap_angle(r.opt_number("yaw").value_or(0.0));
  }
  s.goal = read_box(root.required("goal"), "goal");

  {
    Reader r(root.required("planner"), "planner");
    r.allow({"n", "r_n", "epsilon", "beta", "beta_max", "n_f", "dt", "nominal_speed",
             "fov_half_angle", "max_range"});
    auto& p = s.planner;
    p.n = r.count("n");
    p.r_n = r.number("r_n");
    p.epsilon = r.opt_number("epsilon").value_or(0.5);
    if (r.has("beta")) p.beta = read_beta(r.raw("beta"), r.path("beta"));
    p.beta_max = r.opt_number("beta_max");
    p.heuristic.n_f = r.has("n_f") ? r.count("n_f") : 12;
    p.heuristic.dt = r.opt_number("dt").value_or(0.1);
    p.heuristic.nominal_speed = r.opt_number("nominal_speed").value_or(1.0);
    p.visibility.fov_half_angle = r.opt_number("fov_half_angle").value_or(std::numbers::pi / 4.0);
    p.visibility.max_range = r.opt_number("max_range").value_or(s.env.diagonal());
  }

  if (root.has("heuristic")) {
    Reader r(root.raw("heuristic"), "heuristic");
    r.allow({"source", "path", "k_nn", "w_yaw"});
    auto& h = s.heuristic;
    const std::string source = r.has("source") ? r.text("source") : "feature-count";
    if (source == "feature-count") {
      h.source = HeuristicSource::FeatureCount;
    } else if (source == "map") {
      h.source = HeuristicSource::Map;
      h.path = r.text("path");
    } else {
      throw ParseError("field 'heuristic.source': expected 'feature-count' or 'map'");
    }
    if (r.has("k_nn")) h.k_nn = r.count("k_nn");
    h.w_yaw = r.opt_number("w_yaw").value_or(1.0);
  }

  if (root.has("mc")) {
    Reader r(root.raw("mc"), "mc");
    r.allow({"trials", "delta_xhat", "alpha", "sigma_imu", "sigma_vis", "dt_sim", "rng_seed",
             "u_max", "Q", "R", "max_iters"});
    auto& m = s.mc;
    if (r.has("trials")) m.trials = r.count("trials");
    m.delta_xhat = r.opt_number("delta_xhat");
    m.alpha = r.opt_number("alpha");
    m.sigma_imu = r.opt_number("sigma_imu");
    m.sigma_vis = r.opt_number("sigma_vis");
    m.dt_sim = r.opt_number("dt_sim");
    if (r.has("rng_seed")) m.rng_seed = r.count("rng_seed");
    if (r.has("u_max")) {
      const auto& u = r.raw("u_max");
      m.u_max = u.is_array() ? Reader::as_vec3(u, "mc.u_max")
                             : Vec3::Constant(Reader::as_number(u, "mc.u_max"));
    }
    if (r.has("Q")) {
      const auto& q = r.raw("Q");
      if (!q.is_array() || q.size() != 2 || !q[0].is_array() || q[0].size() != 2 ||
          !q[1].is_array() || q[1].size() != 2) {
        throw ParseError("field 'mc.Q': expected [[q11, q12], [q21, q22]]");
      }
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m.Q(i, j) = Reader::as_number(q[i][j], "mc.Q");
    }
    if (r.has("R")) m.R = r.number("R");
    if (r.has("max_iters")) m.max_iters = r.count("max_iters");
  }

  validate(s, s.mode);
  return s;
}

void validate(const Scenario& s, Mode mode) {
  const auto& env = s.env;
  require(env.workspace.well_formed(), "workspace bounds: lo < hi required");
  for (const auto& o : env.obstacles) {
    require(o.well_formed(), "obstacle bounds: lo < hi required");
    require(box_inside(o, env.workspace), "obstacle bounds: obstacle must lie inside workspace");
  }
  for (const auto& f : env.features) {
    require(env.workspace.contains(f), "feature position: must lie inside workspace");
    require(std::none_of(env.obstacles.begin(), env.obstacles.end(),
                         [&](const Obstacle& o) { return o.contains(f); }),
            "feature position: must not lie inside an obstacle");
  }
  require(s.goal.well_formed(), "goal bounds: lo < hi required");
  require((s.goal.lo.array() <= env.workspace.hi.array()).all() &&
              (s.goal.hi.array() >= env.workspace.lo.array()).all(),
          "goal bounds: goal must intersect the workspace");
  require(std::none_of(env.obstacles.begin(), env.obstacles.end(),
                       [&](const Obstacle& o) { return box_inside(s.goal, o); }),
          "goal bounds: goal must intersect free space");
  require(point_free(s.start.position, env), "start: must be in free space");

  const auto& p = s.planner;
  require(p.n >= 1, "planner.n: must be >= 1");
  require(p.r_n > 0.0, "planner.r_n: must be positive");
  require(p.epsilon > 0.0 && p.epsilon <= 1.0, "planner.epsilon: must lie in (0, 1]");
  require(p.beta >= 0.0, "planner.beta: must be non-negative");
  require(p.heuristic.dt > 0.0, "planner.dt: must be positive");
  require(p.heuristic.n_f >= 1, "planner.n_f: must be >= 1");
  require(p.heuristic.nominal_speed > 0.0, "planner.nominal_speed: must be positive");
  require(p.visibility.fov_half_angle > 0.0 && p.visibility.fov_half_angle <= std::numbers::pi,
          "planner.fov_half_angle: must lie in (0, pi]");
  require(p.visibility.max_range > 0.0, "planner.max_range: must be positive");
  require(s.heuristic.k_nn >= 1, "heuristic.k_nn: must be >= 1");
  require(s.heuristic.w_yaw >= 0.0, "heuristic.w_yaw: must be non-negative");

  const auto& m = s.mc;
  require(m.trials >= 1, "mc.trials: must be >= 1");
  require(s.dt_sim() > 0.0, "mc.dt_sim: must be positive");
  require((m.u_max.array() > 0.0).all(), "mc.u_max: limits must be positive");
  require(m.R > 0.0, "mc.R: must be positive");
  require(m.max_iters >= 1, "mc.max_iters: must be >= 1");
  if (m.delta_xhat) require(*m.delta_xhat > 0.0, "mc.delta_xhat: must be positive");
  if (m.alpha) require(*m.alpha > 0.0 && *m.alpha < 1.0, "mc.alpha: must lie in (0, 1)");
  if (m.sigma_imu) require(*m.sigma_imu >= 0.0, "mc.sigma_imu: must be non-negative");
  if (m.sigma_vis) require(*m.sigma_vis >= 0.0, "mc.sigma_vis: must be non-negative");

  if (mode == Mode::Verify || mode == Mode::Refine) {
    const std::string tag = std::string(" required in ") + to_string(mode) + " mode";
    require(m.delta_xhat.has_value(), "mc.delta_xhat:" + tag);
    require(m.alpha.has_value(), "mc.alpha:" + tag);
    require(m.sigma_imu.has_value(), "mc.sigma_imu:" + tag);
    require(m.sigma_vis.has_value(), "mc.sigma_vis:" + tag);
  }
  if (mode == Mode::Refine) {
    require(p.beta_max.has_value(), "planner.beta_max: required in refine mode");
    require(*p.beta_max >= 0.0 && std::isfinite(*p.beta_max),
            "planner.beta_max: must be finite and non-negative");
  }
}

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t offset = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(),
                                     text.begin() + static_cast<std::ptrdiff_t>(
                                                        offset > 0 ? offset - 1 : 0),
                                     '\n');
    throw ParseError("line " + std::to_string(line) + ": " + e.what());
  }
  return scenario_from_json(doc, base_dir);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path.parent_path());
}

json scenario_to_json(const Scenario& s) {
  json doc;
  doc["mode"] = to_string(s.mode);
  doc["workspace"] = to_json(s.env.workspace);
  doc["obstacles"] = json::array();
  for (const auto& o : s.env.obstacles) doc["obstacles"].push_back(to_json(o));
  doc["features"] = json::array();
  for (const auto& f : s.env.features) doc["features"].push_back(to_json(f));
  doc["start"] = {{"position", to_json(s.start.position)}, {"yaw", s.start.yaw}};
  doc["goal"] = to_json(s.goal);

  const auto& p = s.planner;
  json planner = {{"n", p.n},
                  {"r_n", p.r_n},
                  {"epsilon", p.epsilon},
                  {"beta", write_beta(p.beta)},
                  {"n_f", p.heuristic.n_f},
                  {"dt", p.heuristic.dt},
                  {"nominal_speed", p.heuristic.nominal_speed},
                  {"fov_half_angle", p.visibility.fov_half_angle},
                  {"max_range", p.visibility.max_range}};
  if (p.beta_max) planner["beta_max"] = *p.beta_max;
  doc["planner"] = planner;

  json heuristic = {{"k_nn", s.heuristic.k_nn}, {"w_yaw", s.heuristic.w_yaw}};
  if (s.heuristic.source == HeuristicSource::Map) {
    heuristic["source"] = "map";
    heuristic["path"] = s.heuristic.path;
  } else {
    heuristic["source"] = "feature-count";
  }
  doc["heuristic"] = heuristic;

  const auto& m = s.mc;
  json mc = {{"trials", m.trials},
             {"rng_seed", m.rng_seed},
             {"u_max", to_json(m.u_max)},
             {"Q", json::array({json::array({m.Q(0, 0), m.Q(0, 1)}),
                                json::array({m.Q(1, 0), m.Q(1, 1)})})},
             {"R", m.R},
             {"max_iters", m.max_iters}};
  if (m.delta_xhat) mc["delta_xhat"] = *m.delta_xhat;
  if (m.alpha) mc["alpha"] = *m.alpha;
  if (m.sigma_imu) mc["sigma_imu"] = *m.sigma_imu;
  if (m.sigma_vis) mc["sigma_vis"] = *m.sigma_vis;
  if (m.dt_sim) mc["dt_sim"] = *m.dt_sim;
  doc["mc"] = mc;
  return doc;
}

void write_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  out << scenario_to_json(s).dump(2) << '\n';
}

HeuristicMap load_heuristic_map(const std::filesystem::path& path, std::size_t k_nn,
                                double w_yaw) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open heuristic map " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw ParseError(path.string() + ": expected an array of records");

  HeuristicMap map;
  map.k_nn = k_nn;
  map.w_yaw = w_yaw;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string where = "records[" + std::to_string(i) + "]";
    Reader r(doc[i], where);
    r.allow({"position", "velocity", "yaw", "rate"});
    map.records.push_back({r.vec3("position"), r.vec3("velocity"), r.number("yaw"),
                           r.number("rate")});
  }
  if (map.records.empty()) throw ValidationError("heuristic map: must not be empty");
  return map;
}

}  // namespace pplan
