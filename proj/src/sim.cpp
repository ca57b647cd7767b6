#include "mpf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "mpf/errors.hpp"

namespace mpf::sim {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double wrap_angle(double a) {
  return std::remainder(a, 2.0 * std::numbers::pi);
}

bool event_active(const Event& e, std::int64_t frame) {
  return frame >= e.first_frame && frame <= e.last_frame;
}

bool lists(const Event& e, int id) {
  return std::find(e.pedestrians.begin(), e.pedestrians.end(), id) != e.pedestrians.end();
}

geometry::Pose2D interpolate_pose(const std::vector<RobotWaypoint>& path, double t) {
  if (t <= path.front().t) return {path.front().x, path.front().y, path.front().yaw};
  if (t >= path.back().t) return {path.back().x, path.back().y, path.back().yaw};
  const auto hi = std::upper_bound(path.begin(), path.end(), t,
                                   [](double v, const RobotWaypoint& w) { return v < w.t; });
  const auto lo = hi - 1;
  const double a = (t - lo->t) / (hi->t - lo->t);
  return {lo->x + a * (hi->x - lo->x), lo->y + a * (hi->y - lo->y),
          lo->yaw + a * wrap_angle(hi->yaw - lo->yaw)};
}

}  // namespace

std::string to_string(EventType type) {
  switch (type) {
    case EventType::occlusion: return "occlusion";
    case EventType::out_of_view: return "out_of_view";
    case EventType::partial_view: return "partial_view";
    case EventType::crossing: return "crossing";
  }
  return "occlusion";
}

EventType event_type_from_string(const std::string& name) {
  if (name == "occlusion") return EventType::occlusion;
  if (name == "out_of_view") return EventType::out_of_view;
  if (name == "partial_view") return EventType::partial_view;
  if (name == "crossing") return EventType::crossing;
  throw SchemaError("events[].type", "unknown event type '" + name + "'");
}

void Scenario::validate() const {
  if (!(duration > 0.0)) throw SchemaError("duration", "must be > 0");
  if (!(frame_rate > 0.0)) throw SchemaError("frame_rate", "must be > 0");
  camera.validate();
  if (!(box_noise_px >= 0.0)) throw SchemaError("noise.box_px", "must be >= 0");
  if (!(occlusion_coverage > 0.0 && occlusion_coverage <= 1.0)) {
    throw SchemaError("occlusion_coverage", "must be in (0, 1]");
  }
  appearance.validate();
  if (pedestrians.empty()) throw SchemaError("pedestrians", "at least one pedestrian is required");

  std::set<int> ids;
  for (std::size_t i = 0; i < pedestrians.size(); ++i) {
    const auto& p = pedestrians[i];
    const std::string field = "pedestrians[" + std::to_string(i) + "]";
    if (!ids.insert(p.id).second) throw SchemaError(field + ".id", "duplicate id " + std::to_string(p.id));
    if (!(p.radius > 0.0)) throw SchemaError(field + ".radius", "must be > 0");
    if (!(p.height > 0.0)) throw SchemaError(field + ".height", "must be > 0");
    if (p.cluster < 0 || p.cluster >= appearance.clusters) {
      throw SchemaError(field + ".cluster", "must be in [0, appearance.clusters)");
    }
    if (p.waypoints.empty()) throw SchemaError(field + ".waypoints", "at least one waypoint is required");
    for (std::size_t k = 1; k < p.waypoints.size(); ++k) {
      if (!(p.waypoints[k].t > p.waypoints[k - 1].t)) {
        throw SchemaError(field + ".waypoints[" + std::to_string(k) + "].t", "waypoint times must increase");
      }
    }
  }
  if (!ids.contains(target_id)) throw SchemaError("target_id", "does not name a pedestrian");

  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    const std::string field = "events[" + std::to_string(i) + "]";
    if (e.last_frame < e.first_frame) throw SchemaError(field + ".frames", "last frame precedes first");
    if (e.first_frame < 0) throw SchemaError(field + ".frames", "must be >= 0");
    if (e.pedestrians.empty()) throw SchemaError(field + ".pedestrians", "must not be empty");
    for (int id : e.pedestrians) {
      if (!ids.contains(id)) throw SchemaError(field + ".pedestrians", "unknown pedestrian " + std::to_string(id));
    }
    if (e.type == EventType::crossing && e.pedestrians.size() < 2) {
      throw SchemaError(field + ".pedestrians", "a crossing involves at least two pedestrians");
    }
    if (e.ramp_frames < 0) throw SchemaError(field + ".ramp_frames", "must be >= 0");
  }

  if (robot.mode == RobotMode::scripted) {
    if (robot.trajectory.empty()) throw SchemaError("robot.trajectory", "scripted mode needs a trajectory");
    for (std::size_t k = 1; k < robot.trajectory.size(); ++k) {
      if (!(robot.trajectory[k].t > robot.trajectory[k - 1].t)) {
        throw SchemaError("robot.trajectory[" + std::to_string(k) + "].t", "times must increase");
      }
    }
  }
  if (robot.mode == RobotMode::follow) robot.gains.validate();
}

std::int64_t Scenario::frame_count() const {
  return static_cast<std::int64_t>(std::llround(duration * frame_rate));
}

double Scenario::body_radius() const {
  for (const auto& p : pedestrians) {
    if (p.id == target_id) return p.radius;
  }
  return pedestrians.empty() ? PedestrianSpec{}.radius : pedestrians.front().radius;
}

const PedestrianSpec& Scenario::pedestrian(int id) const {
  for (const auto& p : pedestrians) {
    if (p.id == id) return p;
  }
  throw SchemaError("pedestrians", "no pedestrian with id " + std::to_string(id));
}

Eigen::Vector2d pedestrian_position(const PedestrianSpec& p, double t) {
  const auto& w = p.waypoints;
  if (t <= w.front().t) return {w.front().x, w.front().y};
  if (t >= w.back().t) return {w.back().x, w.back().y};
  const auto hi = std::upper_bound(w.begin(), w.end(), t, [](double v, const Waypoint& q) { return v < q.t; });
  const auto lo = hi - 1;
  const double a = (t - lo->t) / (hi->t - lo->t);
  return {lo->x + a * (hi->x - lo->x), lo->y + a * (hi->y - lo->y)};
}

double pedestrian_heading(const PedestrianSpec& p, double t) {
  const auto& w = p.waypoints;
  double heading = 0.0;
  for (std::size_t k = 1; k < w.size(); ++k) {
    if (w[k - 1].t > t) break;
    const double dx = w[k].x - w[k - 1].x;
    const double dy = w[k].y - w[k - 1].y;
    if (std::hypot(dx, dy) > 1e-9) heading = std::atan2(dy, dx);
  }
  return heading;
}

geometry::Pose2D step_plant(const geometry::Pose2D& pose, const control::ControlCommand& cmd, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCategory::invalid_argument, "step_plant: dt must be > 0");
  const double v = cmd.linear_velocity;
  const double w = cmd.angular_velocity;
  geometry::Pose2D next = pose;
  if (std::abs(w) < 1e-12) {
    next.x += v * dt * std::cos(pose.yaw);
    next.y += v * dt * std::sin(pose.yaw);
  } else {
    const double yaw_end = pose.yaw + w * dt;
    next.x += v / w * (std::sin(yaw_end) - std::sin(pose.yaw));
    next.y -= v / w * (std::cos(yaw_end) - std::cos(pose.yaw));
    next.yaw = wrap_angle(yaw_end);
  }
  return next;
}

Simulator::Simulator(Scenario scenario, std::uint64_t seed)
    : scenario_(std::move(scenario)),
      seed_(seed),
      extractor_((scenario_.validate(), scenario_.appearance)),
      box_rng_(mix(seed, 0x626f78ULL)) {
  pose_ = scenario_.robot.mode == RobotMode::scripted ? interpolate_pose(scenario_.robot.trajectory, 0.0)
                                                      : scenario_.robot.initial_pose;
}

geometry::Extrinsics Simulator::extrinsics() const {
  return geometry::make_extrinsics(pose_, scenario_.mount);
}

double Simulator::upper_visibility(int pedestrian_id, std::int64_t frame) const {
  double vis = 1.0;
  for (const auto& e : scenario_.events) {
    if (e.type != EventType::partial_view || !lists(e, pedestrian_id)) continue;
    const double ramp = std::max(1, e.ramp_frames);
    double v = 1.0;
    if (event_active(e, frame)) {
      v = e.ramp_frames == 0 ? 0.0 : 1.0 - std::clamp(static_cast<double>(frame - e.first_frame) / ramp, 0.0, 1.0);
    } else if (frame > e.last_frame && e.ramp_frames > 0) {
      v = std::clamp(static_cast<double>(frame - e.last_frame) / ramp, 0.0, 1.0);
    }
    vis = std::min(vis, v);
  }
  return vis;
}

bool Simulator::suppressed_by_directive(int pedestrian_id, std::int64_t frame) const {
  for (const auto& e : scenario_.events) {
    if ((e.type == EventType::occlusion || e.type == EventType::out_of_view) && event_active(e, frame) &&
        lists(e, pedestrian_id)) {
      return true;
    }
  }
  return false;
}

FrameRecord Simulator::render() {
  const double t = time();
  const geometry::Extrinsics extr = extrinsics();

  FrameRecord rec;
  rec.frame_index = frame_;
  rec.timestamp = t;
  rec.robot_pose = pose_;

  struct Candidate {
    const PedestrianSpec* spec;
    geometry::BoundingBox box;
    double depth;
    double bearing;
  };
  std::vector<Candidate> candidates;
  for (const auto& p : scenario_.pedestrians) {
    const Eigen::Vector2d pos = pedestrian_position(p, t);
    rec.people.push_back({p.id, pos.x(), pos.y(), false});
    if (suppressed_by_directive(p.id, frame_)) continue;
    const Eigen::Vector3d world(pos.x(), pos.y(), 0.0);
    const auto box = geometry::project_person(world, p.radius, p.height, scenario_.camera, extr);
    if (!box) continue;
    const Eigen::Vector3d cam = extr.world_to_camera(world);
    candidates.push_back({&p, *box, cam.z(), std::atan2(pos.y() - pose_.y, pos.x() - pose_.x)});
  }

  for (const auto& c : candidates) {
    bool hidden = false;
    for (const auto& other : candidates) {
      if (&other == &c || other.depth >= c.depth) continue;
      if (geometry::coverage(c.box, other.box) > scenario_.occlusion_coverage) {
        hidden = true;
        break;
      }
    }
    if (hidden) continue;

    Detection det;
    det.truth_box = c.box;
    det.person_id = c.spec->id;
    geometry::BoundingBox noisy = c.box;
    if (scenario_.box_noise_px > 0.0) {
      std::normal_distribution<double> noise(0.0, scenario_.box_noise_px);
      noisy.u_tl += noise(box_rng_);
      noisy.v_tl += noise(box_rng_);
      noisy.u_br += noise(box_rng_);
      noisy.v_br += noise(box_rng_);
      if (noisy.u_br < noisy.u_tl + 1.0) noisy.u_br = noisy.u_tl + 1.0;
      if (noisy.v_br < noisy.v_tl + 1.0) noisy.v_br = noisy.v_tl + 1.0;
    }
    det.box = noisy;

    reid::AppearanceObservation obs;
    obs.cluster = c.spec->cluster;
    obs.viewpoint = wrap_angle(pedestrian_heading(*c.spec, t) - c.bearing);
    obs.upper_visibility = upper_visibility(c.spec->id, frame_);
    obs.noise_key = mix(mix(seed_, c.spec->appearance_seed),
                        mix(static_cast<std::uint64_t>(frame_), static_cast<std::uint64_t>(c.spec->id)));
    det.descriptor = extractor_.extract(obs).values();

    for (auto& person : rec.people) {
      if (person.id == c.spec->id) person.detected = true;
    }
    rec.detections.push_back(std::move(det));
  }
  return rec;
}

void Simulator::advance(const std::optional<control::ControlCommand>& command) {
  const double dt = 1.0 / scenario_.frame_rate;
  if (command) {
    pose_ = step_plant(pose_, *command, dt);
  } else {
    switch (scenario_.robot.mode) {
      case RobotMode::fixed:
        break;
      case RobotMode::scripted:
        pose_ = interpolate_pose(scenario_.robot.trajectory, time() + dt);
        break;
      case RobotMode::follow: {
        const PedestrianSpec& target = scenario_.pedestrian(scenario_.target_id);
        const Eigen::Vector2d p = pedestrian_position(target, time());
        const double c = std::cos(pose_.yaw), s = std::sin(pose_.yaw);
        const Eigen::Vector2d rel(c * (p.x() - pose_.x) + s * (p.y() - pose_.y),
                                  -s * (p.x() - pose_.x) + c * (p.y() - pose_.y));
        auto [cmd, next] = control::compute_command(rel, dt, scenario_.robot.gains, follow_state_);
        follow_state_ = next;
        pose_ = step_plant(pose_, cmd, dt);
        break;
      }
    }
  }
  ++frame_;
}

SequenceHeader make_header(const Scenario& scenario) {
  SequenceHeader h;
  h.scenario = scenario.name;
  h.frame_rate = scenario.frame_rate;
  h.descriptor_dim = scenario.appearance.dim;
  h.target_id = scenario.target_id;
  h.body_radius = scenario.body_radius();
  const geometry::Pose2D start = scenario.robot.mode == RobotMode::scripted && !scenario.robot.trajectory.empty()
                                     ? geometry::Pose2D{scenario.robot.trajectory.front().x,
                                                        scenario.robot.trajectory.front().y,
                                                        scenario.robot.trajectory.front().yaw}
                                     : scenario.robot.initial_pose;
  h.calibration = geometry::Calibration{scenario.camera, geometry::make_extrinsics(start, scenario.mount)};
  return h;
}

Sequence generate(const Scenario& scenario, std::uint64_t seed) {
  Simulator sim(scenario, seed);
  Sequence seq;
  seq.header = make_header(sim.scenario());
  seq.frames.reserve(static_cast<std::size_t>(scenario.frame_count()));
  while (!sim.done()) {
    seq.frames.push_back(sim.render());
    sim.advance();
  }
  return seq;
}

}  // namespace mpf::sim
