#include "mpf/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <unistd.h>

#include "mpf/errors.hpp"

namespace mpf::io {

namespace {

// Read-only view of a JSON node that knows its own key path, so every failure can
// name the offending field.
class Field {
 public:
  Field(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return *j_; }

  bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

  Field at(const std::string& key) const {
    object();
    if (!j_->contains(key)) throw SchemaError(child(key), "missing required field");
    return Field(j_->at(key), child(key));
  }

  std::optional<Field> find(const std::string& key) const {
    object();
    if (!j_->contains(key) || j_->at(key).is_null()) return std::nullopt;
    return Field(j_->at(key), child(key));
  }

  Field operator[](std::size_t i) const { return Field((*j_)[i], path_ + "[" + std::to_string(i) + "]"); }

  std::size_t size() const {
    if (!j_->is_array()) throw SchemaError(path_, "expected an array");
    return j_->size();
  }

  void object() const {
    if (!j_->is_object()) throw SchemaError(path_, "expected an object");
  }

  // Rejects keys outside `allowed`; catches typos in hand-written files.
  void only(std::initializer_list<std::string_view> allowed) const {
    object();
    for (auto it = j_->begin(); it != j_->end(); ++it) {
      if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
        throw SchemaError(child(it.key()), "unknown field");
      }
    }
  }

  double number() const {
    if (!j_->is_number()) throw SchemaError(path_, "expected a number");
    const double v = j_->get<double>();
    if (!std::isfinite(v)) throw SchemaError(path_, "must be finite");
    return v;
  }

  std::int64_t integer() const {
    if (!j_->is_number_integer()) throw SchemaError(path_, "expected an integer");
    return j_->get<std::int64_t>();
  }

  std::uint64_t unsigned_integer() const {
    if (!j_->is_number_unsigned() && !(j_->is_number_integer() && j_->get<std::int64_t>() >= 0)) {
      throw SchemaError(path_, "expected a non-negative integer");
    }
    return j_->get<std::uint64_t>();
  }

  bool boolean() const {
    if (!j_->is_boolean()) throw SchemaError(path_, "expected true or false");
    return j_->get<bool>();
  }

  std::string string() const {
    if (!j_->is_string()) throw SchemaError(path_, "expected a string");
    return j_->get<std::string>();
  }

  void read(const std::string& key, double& v) const {
    if (auto f = find(key)) v = f->number();
  }
  void read(const std::string& key, int& v) const {
    if (auto f = find(key)) v = static_cast<int>(f->integer());
  }
  void read(const std::string& key, std::uint64_t& v) const {
    if (auto f = find(key)) v = f->unsigned_integer();
  }
  void read(const std::string& key, bool& v) const {
    if (auto f = find(key)) v = f->boolean();
  }
  void read(const std::string& key, std::string& v) const {
    if (auto f = find(key)) v = f->string();
  }

 private:
  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* j_;
  std::string path_;
};

void check_schema(const Field& f, std::string_view expected) {
  if (!f.has("schema")) return;
  const std::string got = f.at("schema").string();
  if (got != expected) {
    throw SchemaError(f.at("schema").path(), "expected '" + std::string(expected) + "', got '" + got + "'");
  }
}

Eigen::Vector3d vector3(const Field& f) {
  if (f.size() != 3) throw SchemaError(f.path(), "expected 3 numbers");
  return {f[0].number(), f[1].number(), f[2].number()};
}

geometry::BoundingBox box_from(const Field& f) {
  if (f.size() != 4) throw SchemaError(f.path(), "expected [u_tl, v_tl, u_br, v_br]");
  return {f[0].number(), f[1].number(), f[2].number(), f[3].number()};
}

json box_json(const geometry::BoundingBox& b) { return json::array({b.u_tl, b.v_tl, b.u_br, b.v_br}); }

// Rigid transform {"R": [9] row-major | "rpy": [3], "t": [3]}.
std::pair<Eigen::Matrix3d, Eigen::Vector3d> rigid_from(const Field& f) {
  f.only({"R", "rpy", "t"});
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  if (f.has("R") && f.has("rpy")) throw SchemaError(f.path(), "give either R or rpy, not both");
  if (auto r = f.find("R")) {
    if (r->size() != 9) throw SchemaError(r->path(), "expected 9 numbers (row-major)");
    for (int i = 0; i < 9; ++i) R(i / 3, i % 3) = (*r)[static_cast<std::size_t>(i)].number();
  } else if (auto rpy = f.find("rpy")) {
    const Eigen::Vector3d a = vector3(*rpy);
    R = geometry::rotation_from_rpy(a.x(), a.y(), a.z());
  }
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  if (auto tf = f.find("t")) t = vector3(*tf);
  return {R, t};
}

json rigid_json(const Eigen::Matrix3d& R, const Eigen::Vector3d& t) {
  json r = json::array();
  for (int i = 0; i < 9; ++i) r.push_back(R(i / 3, i % 3));
  return json{{"R", r}, {"t", json::array({t.x(), t.y(), t.z()})}};
}

geometry::CameraIntrinsics intrinsics_from(const Field& f) {
  f.only({"fx", "fy", "cx", "cy", "width", "height"});
  geometry::CameraIntrinsics in;
  f.read("fx", in.fx);
  f.read("fy", in.fy);
  f.read("cx", in.cx);
  f.read("cy", in.cy);
  f.read("width", in.image_width);
  f.read("height", in.image_height);
  return in;
}

json to_json(const geometry::CameraIntrinsics& in) {
  return json{{"fx", in.fx}, {"fy", in.fy}, {"cx", in.cx}, {"cy", in.cy},
              {"width", in.image_width}, {"height", in.image_height}};
}

geometry::CameraMount mount_from(const Field& f) {
  f.only({"forward", "lateral", "height"});
  geometry::CameraMount m;
  f.read("forward", m.forward);
  f.read("lateral", m.lateral);
  f.read("height", m.height);
  return m;
}

json to_json(const geometry::CameraMount& m) {
  return json{{"forward", m.forward}, {"lateral", m.lateral}, {"height", m.height}};
}

geometry::Pose2D pose_from(const Field& f) {
  f.only({"x", "y", "yaw"});
  geometry::Pose2D p;
  f.read("x", p.x);
  f.read("y", p.y);
  f.read("yaw", p.yaw);
  return p;
}

json to_json(const geometry::Pose2D& p) { return json{{"x", p.x}, {"y", p.y}, {"yaw", p.yaw}}; }

geometry::Calibration calibration_from(const Field& f) {
  f.only({"schema", "intrinsics", "extrinsics", "mount", "robot_pose"});
  check_schema(f, kCalibrationSchema);
  geometry::Calibration c;
  if (auto in = f.find("intrinsics")) c.intrinsics = intrinsics_from(*in);
  if (f.has("extrinsics") && f.has("mount")) throw SchemaError(f.path(), "give either extrinsics or mount, not both");
  if (auto e = f.find("extrinsics")) {
    e->only({"world_to_robot", "robot_to_camera"});
    if (auto w = e->find("world_to_robot")) std::tie(c.extrinsics.R_world_robot, c.extrinsics.t_world_robot) = rigid_from(*w);
    std::tie(c.extrinsics.R_robot_cam, c.extrinsics.t_robot_cam) = rigid_from(e->at("robot_to_camera"));
  } else {
    const geometry::CameraMount mount = f.has("mount") ? mount_from(f.at("mount")) : geometry::CameraMount{};
    const geometry::Pose2D pose = f.has("robot_pose") ? pose_from(f.at("robot_pose")) : geometry::Pose2D{};
    c.extrinsics = geometry::make_extrinsics(pose, mount);
  }
  c.intrinsics.validate();
  c.extrinsics.validate();
  return c;
}

control::PidGains gains_from(const Field& f) {
  f.only({"linear", "angular", "integral_limit", "v_max", "w_max", "x_setpoint"});
  control::PidGains g;
  for (auto [key, axis] : {std::pair{"linear", &g.linear}, std::pair{"angular", &g.angular}}) {
    if (auto a = f.find(key)) {
      a->only({"kp", "ki", "kd"});
      a->read("kp", axis->kp);
      a->read("ki", axis->ki);
      a->read("kd", axis->kd);
    }
  }
  f.read("integral_limit", g.integral_limit);
  f.read("v_max", g.v_max);
  f.read("w_max", g.w_max);
  f.read("x_setpoint", g.x_setpoint);
  return g;
}

json to_json(const control::PidGains& g) {
  auto axis = [](const control::AxisGains& a) { return json{{"kp", a.kp}, {"ki", a.ki}, {"kd", a.kd}}; };
  return json{{"linear", axis(g.linear)},         {"angular", axis(g.angular)}, {"integral_limit", g.integral_limit},
              {"v_max", g.v_max},                 {"w_max", g.w_max},           {"x_setpoint", g.x_setpoint}};
}

sim::RobotMode robot_mode_from(const Field& f) {
  const std::string s = f.string();
  if (s == "fixed") return sim::RobotMode::fixed;
  if (s == "scripted") return sim::RobotMode::scripted;
  if (s == "follow") return sim::RobotMode::follow;
  throw SchemaError(f.path(), "expected fixed, scripted or follow, got '" + s + "'");
}

std::string to_string(sim::RobotMode m) {
  switch (m) {
    case sim::RobotMode::fixed: return "fixed";
    case sim::RobotMode::scripted: return "scripted";
    case sim::RobotMode::follow: return "follow";
  }
  return "fixed";
}

void tracker_from(const Field& f, tracking::TrackerConfig& t) {
  f.only({"delta_iou", "process_noise_pos", "process_noise_vel", "measurement_noise", "gate_distance",
          "max_missed", "body_radius", "confirm_hits", "init_pos_std", "init_vel_std", "default_dt"});
  f.read("delta_iou", t.delta_iou);
  f.read("process_noise_pos", t.process_noise_pos);
  f.read("process_noise_vel", t.process_noise_vel);
  f.read("measurement_noise", t.measurement_noise);
  f.read("gate_distance", t.gate_distance);
  f.read("max_missed", t.max_missed);
  f.read("body_radius", t.body_radius);
  f.read("confirm_hits", t.confirm_hits);
  f.read("init_pos_std", t.init_pos_std);
  f.read("init_vel_std", t.init_vel_std);
  f.read("default_dt", t.default_dt);
}

json to_json(const tracking::TrackerConfig& t) {
  return json{{"delta_iou", t.delta_iou},
              {"process_noise_pos", t.process_noise_pos},
              {"process_noise_vel", t.process_noise_vel},
              {"measurement_noise", t.measurement_noise},
              {"gate_distance", t.gate_distance},
              {"max_missed", t.max_missed},
              {"body_radius", t.body_radius},
              {"confirm_hits", t.confirm_hits},
              {"init_pos_std", t.init_pos_std},
              {"init_vel_std", t.init_vel_std},
              {"default_dt", t.default_dt}};
}

void reid_from(const Field& f, reid::ReidConfig& r) {
  f.only({"delta_switch", "delta_id", "n_id", "lambda", "capacity", "mode", "long_term_fraction",
          "retrain_period", "max_negatives", "descriptor_dim", "extractor"});
  f.read("delta_switch", r.delta_switch);
  f.read("delta_id", r.delta_id);
  f.read("n_id", r.n_id);
  f.read("lambda", r.lambda);
  f.read("capacity", r.capacity);
  if (auto m = f.find("mode")) {
    try {
      r.mode = reid::sampling_mode_from_string(m->string());
    } catch (const SchemaError&) {
      throw SchemaError(m->path(), "expected ST or SLT");
    }
  }
  f.read("long_term_fraction", r.long_term_fraction);
  f.read("retrain_period", r.retrain_period);
  f.read("max_negatives", r.max_negatives);
  f.read("descriptor_dim", r.descriptor_dim);
  f.read("extractor", r.extractor);
}

json to_json(const reid::ReidConfig& r) {
  return json{{"delta_switch", r.delta_switch},
              {"delta_id", r.delta_id},
              {"n_id", r.n_id},
              {"lambda", r.lambda},
              {"capacity", r.capacity},
              {"mode", std::string(reid::to_string(r.mode))},
              {"long_term_fraction", r.long_term_fraction},
              {"retrain_period", r.retrain_period},
              {"max_negatives", r.max_negatives},
              {"descriptor_dim", r.descriptor_dim},
              {"extractor", r.extractor}};
}

void pipeline_from(const Field& f, eval::PipelineConfig& p) {
  f.only({"tracker", "reid", "controller", "reid_enabled", "controller_enabled", "async_training"});
  if (auto t = f.find("tracker")) tracker_from(*t, p.tracker);
  if (auto r = f.find("reid")) reid_from(*r, p.reid);
  if (auto c = f.find("controller")) p.controller = gains_from(*c);
  f.read("reid_enabled", p.reid_enabled);
  f.read("controller_enabled", p.controller_enabled);
  f.read("async_training", p.async_training);
}

// Six decimals keep unit-norm descriptors compact without affecting classification.
double compact(double v) { return std::round(v * 1e6) / 1e6; }

std::string fixed(double v, int decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

// Left-aligned columns separated by two spaces.
std::string table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      line += r[c];
      if (c + 1 < r.size()) line += std::string(width[c] - r[c].size() + 2, ' ');
    }
    out += line + "\n";
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

geometry::Calibration calibration_from_json(const json& j) { return calibration_from(Field(j, "")); }

json to_json(const geometry::Calibration& c) {
  return json{{"schema", kCalibrationSchema},
              {"intrinsics", to_json(c.intrinsics)},
              {"extrinsics",
               {{"world_to_robot", rigid_json(c.extrinsics.R_world_robot, c.extrinsics.t_world_robot)},
                {"robot_to_camera", rigid_json(c.extrinsics.R_robot_cam, c.extrinsics.t_robot_cam)}}}};
}

sim::Scenario scenario_from_json(const json& j) {
  const Field f(j, "");
  f.only({"schema", "name", "duration", "frame_rate", "camera", "mount", "robot", "noise", "occlusion_coverage",
          "appearance", "target_id", "pedestrians", "events"});
  check_schema(f, kScenarioSchema);
  sim::Scenario s;
  f.read("name", s.name);
  f.read("duration", s.duration);
  f.read("frame_rate", s.frame_rate);
  if (auto c = f.find("camera")) s.camera = intrinsics_from(*c);
  if (auto m = f.find("mount")) s.mount = mount_from(*m);
  if (auto r = f.find("robot")) {
    r->only({"mode", "initial_pose", "trajectory", "gains"});
    if (auto m = r->find("mode")) s.robot.mode = robot_mode_from(*m);
    if (auto p = r->find("initial_pose")) s.robot.initial_pose = pose_from(*p);
    if (auto t = r->find("trajectory")) {
      for (std::size_t k = 0; k < t->size(); ++k) {
        const Field w = (*t)[k];
        w.only({"t", "x", "y", "yaw"});
        sim::RobotWaypoint rw;
        rw.t = w.at("t").number();
        w.read("x", rw.x);
        w.read("y", rw.y);
        w.read("yaw", rw.yaw);
        s.robot.trajectory.push_back(rw);
      }
    }
    if (auto g = r->find("gains")) s.robot.gains = gains_from(*g);
  }
  if (auto n = f.find("noise")) {
    n->only({"box_px", "descriptor"});
    n->read("box_px", s.box_noise_px);
    n->read("descriptor", s.appearance.noise);
  }
  f.read("occlusion_coverage", s.occlusion_coverage);
  if (auto a = f.find("appearance")) {
    a->only({"dim", "clusters", "similarity", "lower_similarity", "drift", "seed"});
    a->read("dim", s.appearance.dim);
    a->read("clusters", s.appearance.clusters);
    a->read("similarity", s.appearance.similarity);
    a->read("lower_similarity", s.appearance.lower_similarity);
    a->read("drift", s.appearance.drift);
    a->read("seed", s.appearance.seed);
  }
  f.read("target_id", s.target_id);
  const Field peds = f.at("pedestrians");
  for (std::size_t i = 0; i < peds.size(); ++i) {
    const Field p = peds[i];
    p.only({"id", "radius", "height", "cluster", "appearance_seed", "waypoints"});
    sim::PedestrianSpec spec;
    spec.id = static_cast<int>(p.at("id").integer());
    p.read("radius", spec.radius);
    p.read("height", spec.height);
    p.read("cluster", spec.cluster);
    p.read("appearance_seed", spec.appearance_seed);
    const Field wps = p.at("waypoints");
    for (std::size_t k = 0; k < wps.size(); ++k) {
      const Field w = wps[k];
      w.only({"t", "x", "y"});
      spec.waypoints.push_back({w.at("t").number(), w.at("x").number(), w.at("y").number()});
    }
    s.pedestrians.push_back(std::move(spec));
  }
  if (auto evs = f.find("events")) {
    for (std::size_t i = 0; i < evs->size(); ++i) {
      const Field e = (*evs)[i];
      e.only({"type", "pedestrians", "first_frame", "last_frame", "ramp_frames"});
      sim::Event ev;
      const Field type = e.at("type");
      try {
        ev.type = sim::event_type_from_string(type.string());
      } catch (const SchemaError&) {
        throw SchemaError(type.path(), "expected occlusion, out_of_view, partial_view or crossing");
      }
      const Field who = e.at("pedestrians");
      for (std::size_t k = 0; k < who.size(); ++k) ev.pedestrians.push_back(static_cast<int>(who[k].integer()));
      ev.first_frame = e.at("first_frame").integer();
      ev.last_frame = e.at("last_frame").integer();
      e.read("ramp_frames", ev.ramp_frames);
      s.events.push_back(std::move(ev));
    }
  }
  s.validate();
  return s;
}

json to_json(const sim::Scenario& s) {
  json robot{{"mode", to_string(s.robot.mode)}, {"initial_pose", to_json(s.robot.initial_pose)}};
  if (!s.robot.trajectory.empty()) {
    json traj = json::array();
    for (const auto& w : s.robot.trajectory) traj.push_back({{"t", w.t}, {"x", w.x}, {"y", w.y}, {"yaw", w.yaw}});
    robot["trajectory"] = traj;
  }
  robot["gains"] = to_json(s.robot.gains);

  json peds = json::array();
  for (const auto& p : s.pedestrians) {
    json wps = json::array();
    for (const auto& w : p.waypoints) wps.push_back({{"t", w.t}, {"x", w.x}, {"y", w.y}});
    peds.push_back({{"id", p.id},
                    {"radius", p.radius},
                    {"height", p.height},
                    {"cluster", p.cluster},
                    {"appearance_seed", p.appearance_seed},
                    {"waypoints", wps}});
  }
  json events = json::array();
  for (const auto& e : s.events) {
    events.push_back({{"type", sim::to_string(e.type)},
                      {"pedestrians", e.pedestrians},
                      {"first_frame", e.first_frame},
                      {"last_frame", e.last_frame},
                      {"ramp_frames", e.ramp_frames}});
  }
  return json{{"schema", kScenarioSchema},
              {"name", s.name},
              {"duration", s.duration},
              {"frame_rate", s.frame_rate},
              {"camera", to_json(s.camera)},
              {"mount", to_json(s.mount)},
              {"robot", robot},
              {"noise", {{"box_px", s.box_noise_px}, {"descriptor", s.appearance.noise}}},
              {"occlusion_coverage", s.occlusion_coverage},
              {"appearance",
               {{"dim", s.appearance.dim},
                {"clusters", s.appearance.clusters},
                {"similarity", s.appearance.similarity},
                {"lower_similarity", s.appearance.lower_similarity},
                {"drift", s.appearance.drift},
                {"seed", s.appearance.seed}}},
              {"target_id", s.target_id},
              {"pedestrians", peds},
              {"events", events}};
}

RunConfig run_config_from_json(const json& j, RunConfig base) {
  const Field f(j, "");
  f.only({"schema", "calibration", "scenario", "pipeline", "seed", "output_dir"});
  check_schema(f, kConfigSchema);
  if (auto c = f.find("calibration")) base.calibration = c->string();
  if (auto s = f.find("scenario")) base.scenario = s->string();
  if (auto p = f.find("pipeline")) pipeline_from(*p, base.pipeline);
  f.read("seed", base.seed);
  f.read("output_dir", base.output_dir);
  base.pipeline.validate();
  return base;
}

json to_json(const eval::PipelineConfig& p) {
  return json{{"reid_enabled", p.reid_enabled},
              {"controller_enabled", p.controller_enabled},
              {"async_training", p.async_training},
              {"tracker", to_json(p.tracker)},
              {"reid", to_json(p.reid)},
              {"controller", to_json(p.controller)}};
}

json to_json(const RunConfig& cfg) {
  json j{{"schema", kConfigSchema}};
  j["calibration"] = cfg.calibration ? json(*cfg.calibration) : json(nullptr);
  j["scenario"] = cfg.scenario ? json(*cfg.scenario) : json(nullptr);
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["pipeline"] = to_json(cfg.pipeline);
  return j;
}

json parse_json(std::string_view text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(source, std::string("invalid JSON: ") + e.what());
  }
}

json load_json(const std::filesystem::path& path) { return parse_json(read_file(path), path.string()); }

namespace {

// Prefixes field errors with the file they came from.
template <class Fn>
auto with_source(const std::string& source, Fn&& fn) {
  try {
    return fn();
  } catch (const SchemaError& e) {
    throw SchemaError(source, e.what());
  }
}

}  // namespace

geometry::Calibration load_calibration(const std::filesystem::path& path) {
  const json j = load_json(path);
  return with_source(path.string(), [&] { return calibration_from_json(j); });
}

sim::Scenario load_scenario(const std::filesystem::path& path) {
  const json j = load_json(path);
  return with_source(path.string(), [&] { return scenario_from_json(j); });
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  const json j = load_json(path);
  return with_source(path.string(), [&] { return run_config_from_json(j, base); });
}

// ---------------------------------------------------------------------------
// Sequences

void write_sequence(std::ostream& out, const Sequence& seq) {
  json header{{"schema", kSequenceSchema},
              {"scenario", seq.header.scenario},
              {"frame_rate", seq.header.frame_rate},
              {"descriptor_dim", seq.header.descriptor_dim}};
  if (seq.header.target_id) header["target_id"] = *seq.header.target_id;
  if (seq.header.body_radius) header["body_radius"] = *seq.header.body_radius;
  if (seq.header.calibration) header["calibration"] = to_json(*seq.header.calibration);
  out << header.dump() << '\n';

  for (const auto& f : seq.frames) {
    json frame{{"frame_index", f.frame_index}, {"timestamp", f.timestamp}};
    if (f.robot_pose) frame["robot_pose"] = to_json(*f.robot_pose);
    json dets = json::array();
    for (const auto& d : f.detections) {
      json dj{{"box", box_json(d.box)}};
      if (d.person_id) dj["person_id"] = *d.person_id;
      if (d.truth_box) dj["truth_box"] = box_json(*d.truth_box);
      if (d.descriptor) {
        json desc = json::array();
        for (Eigen::Index k = 0; k < d.descriptor->size(); ++k) desc.push_back(compact((*d.descriptor)[k]));
        dj["descriptor"] = std::move(desc);
      }
      dets.push_back(std::move(dj));
    }
    frame["detections"] = std::move(dets);
    if (!f.people.empty()) {
      json people = json::array();
      for (const auto& p : f.people) people.push_back({{"id", p.id}, {"x", p.x}, {"y", p.y}, {"detected", p.detected}});
      frame["people"] = std::move(people);
    }
    out << frame.dump() << '\n';
  }
}

Sequence read_sequence(std::istream& in, const std::string& source) {
  Sequence seq;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::optional<std::int64_t> last_index;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    with_source(where, [&] {
      const json j = parse_json(line, "");
      const Field f(j, "");
      if (!have_header) {
        f.only({"schema", "scenario", "frame_rate", "descriptor_dim", "target_id", "body_radius", "calibration"});
        if (!f.has("schema")) throw SchemaError("schema", "missing; the first line must be the sequence header");
        check_schema(f, kSequenceSchema);
        f.read("scenario", seq.header.scenario);
        f.read("frame_rate", seq.header.frame_rate);
        f.read("descriptor_dim", seq.header.descriptor_dim);
        if (auto t = f.find("target_id")) seq.header.target_id = static_cast<int>(t->integer());
        if (auto r = f.find("body_radius")) seq.header.body_radius = r->number();
        if (auto c = f.find("calibration")) seq.header.calibration = calibration_from(*c);
        if (!(seq.header.frame_rate > 0.0)) throw SchemaError("frame_rate", "must be > 0");
        if (seq.header.descriptor_dim < 0) throw SchemaError("descriptor_dim", "must be >= 0");
        have_header = true;
        return 0;
      }
      f.only({"frame_index", "timestamp", "robot_pose", "detections", "people"});
      FrameRecord rec;
      rec.frame_index = f.at("frame_index").integer();
      if (last_index && rec.frame_index <= *last_index) throw SchemaError("frame_index", "must increase");
      last_index = rec.frame_index;
      rec.timestamp = f.has("timestamp") ? f.at("timestamp").number()
                                         : static_cast<double>(rec.frame_index) / seq.header.frame_rate;
      if (auto p = f.find("robot_pose")) rec.robot_pose = pose_from(*p);
      const Field dets = f.at("detections");
      for (std::size_t i = 0; i < dets.size(); ++i) {
        const Field d = dets[i];
        d.only({"box", "person_id", "truth_box", "descriptor"});
        Detection det;
        det.box = box_from(d.at("box"));
        if (auto p = d.find("person_id")) det.person_id = static_cast<int>(p->integer());
        if (auto t = d.find("truth_box")) det.truth_box = box_from(*t);
        if (auto desc = d.find("descriptor")) {
          const std::size_t n = desc->size();
          if (seq.header.descriptor_dim > 0 && n != static_cast<std::size_t>(seq.header.descriptor_dim)) {
            throw SchemaError(desc->path(), "expected " + std::to_string(seq.header.descriptor_dim) + " values, got " +
                                                std::to_string(n));
          }
          Eigen::VectorXd v(static_cast<Eigen::Index>(n));
          for (std::size_t k = 0; k < n; ++k) v[static_cast<Eigen::Index>(k)] = (*desc)[k].number();
          det.descriptor = std::move(v);
        }
        rec.detections.push_back(std::move(det));
      }
      if (auto people = f.find("people")) {
        for (std::size_t i = 0; i < people->size(); ++i) {
          const Field p = (*people)[i];
          p.only({"id", "x", "y", "detected"});
          PersonTruth t;
          t.id = static_cast<int>(p.at("id").integer());
          t.x = p.at("x").number();
          t.y = p.at("y").number();
          p.read("detected", t.detected);
          rec.people.push_back(t);
        }
      }
      seq.frames.push_back(std::move(rec));
      return 0;
    });
  }
  if (!have_header) throw SchemaError(source, "empty sequence: no header line");
  return seq;
}

Sequence load_sequence(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, "cannot open '" + path.string() + "'");
  return read_sequence(in, path.string());
}

std::string sequence_text(const Sequence& seq) {
  std::ostringstream out;
  write_sequence(out, seq);
  return out.str();
}

// ---------------------------------------------------------------------------
// Run outputs

std::string tracks_text(const eval::RunResult& run) {
  std::string out = json{{"schema", kTracksSchema}, {"scenario", run.scenario}, {"label", run.label}}.dump() + "\n";
  for (const auto& f : run.outputs) {
    for (const auto& t : f.tracks) {
      if (!t.confirmed) continue;
      json row{{"frame_index", f.frame_index},
               {"track_id", t.id},
               {"x", t.position.x()},
               {"y", t.position.y()},
               {"box", box_json(t.box)}};
      out += row.dump() + "\n";
    }
  }
  return out;
}

std::string trace_text(const eval::RunResult& run) {
  std::string out = json{{"schema", kTraceSchema}, {"scenario", run.scenario}, {"label", run.label}}.dump() + "\n";
  auto point = [](const std::optional<Eigen::Vector2d>& p) {
    return p ? json::array({p->x(), p->y()}) : json(nullptr);
  };
  for (const auto& r : run.trace) {
    json row{{"frame_index", r.frame_index}, {"timestamp", r.timestamp}};
    row["mode"] = r.mode ? json(std::string(reid::to_string(*r.mode))) : json(nullptr);
    row["target"] = r.target ? json(*r.target) : json(nullptr);
    row["target_person"] = r.target_person ? json(*r.target_person) : json(nullptr);
    row["score"] = r.target_score ? json(*r.target_score) : json(nullptr);
    row["estimated_center"] = point(r.estimated_center);
    row["truth_center"] = point(r.truth_center);
    row["success"] = r.success;
    if (r.command) row["command"] = {{"linear", r.command->linear_velocity}, {"angular", r.command->angular_velocity}};
    out += row.dump() + "\n";
  }
  return out;
}

std::string metrics_text(const eval::ExperimentReport& report) {
  std::string out = "# " + std::string(kMetricsSchema) + "\n";
  out += "experiment=" + report.name + "\n";
  out += "seed=" + std::to_string(report.seed) + "\n";
  out += "runs=" + std::to_string(report.runs.size()) + "\n";
  out += "primary_metric=precision_at_" + fixed(eval::kDefaultThresholdPx, 0) + "px\n";
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    const auto& r = report.runs[i];
    const std::string p = "run." + std::to_string(i) + ".";
    out += p + "label=" + r.label + "\n";
    out += p + "scenario=" + r.scenario + "\n";
    if (r.reid) {
      out += p + "precision_at_50px=" + fixed(r.reid->precision_at_50px) + "\n";
      out += p + "mean_precision_over_thresholds=" + fixed(r.reid->mean_precision_over_thresholds) + "\n";
      out += p + "evaluated_frames=" + std::to_string(r.reid->evaluated_frames) + "\n";
    }
    out += p + "range_samples=" + std::to_string(r.range_samples) + "\n";
  }

  const bool any_reid = std::any_of(report.runs.begin(), report.runs.end(), [](const auto& r) { return r.reid; });
  if (any_reid) {
    out += "\n[table reid]\n";
    std::vector<std::vector<std::string>> rows{
        {"scenario", "label", "precision@50px", "mean_precision_1_50px", "frames"}};
    for (const auto& r : report.runs) {
      if (!r.reid) continue;
      rows.push_back({r.scenario, r.label, fixed(r.reid->precision_at_50px), fixed(r.reid->mean_precision_over_thresholds),
                      std::to_string(r.reid->evaluated_frames)});
    }
    out += table(rows);

    out += "\n[table precision_curve]\n";
    std::vector<std::vector<std::string>> curve{{"threshold_px"}};
    for (const auto& r : report.runs) {
      if (r.reid) curve[0].push_back(r.scenario + "/" + r.label);
    }
    for (std::size_t k = 0; k < eval::default_thresholds().size(); ++k) {
      std::vector<std::string> row{fixed(eval::default_thresholds()[k], 0)};
      for (const auto& r : report.runs) {
        if (r.reid) row.push_back(fixed(r.reid->precision[k]));
      }
      curve.push_back(std::move(row));
    }
    out += table(curve);
  }

  const bool any_range = std::any_of(report.runs.begin(), report.runs.end(), [](const auto& r) { return r.range_samples; });
  if (any_range) {
    out += "\n[table range_error]\n";
    std::vector<std::vector<std::string>> rows{
        {"scenario", "label", "bin_m", "count", "mean_abs_error_m", "variance", "q1", "median", "q3"}};
    for (const auto& r : report.runs) {
      if (r.range_samples == 0) continue;
      for (const auto& b : r.range.bins) {
        rows.push_back({r.scenario, r.label, "[" + fixed(b.lower, 1) + "," + fixed(b.upper, 1) + ")",
                        std::to_string(b.count), fixed(b.mean_abs_error), fixed(b.variance), fixed(b.q1),
                        fixed(b.median), fixed(b.q3)});
      }
    }
    out += table(rows);
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCategory::io, "cannot create '" + path.parent_path().string() + "': " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCategory::io, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCategory::io, "write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCategory::io, "cannot move into '" + path.string() + "': " + ec.message());
  }
}

}  // namespace mpf::io
