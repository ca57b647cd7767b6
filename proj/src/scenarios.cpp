#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mpf/errors.hpp"
#include "mpf/sim.hpp"

namespace mpf::sim {

namespace {

constexpr double kRate = 30.0;

std::int64_t frame_at(double seconds) { return static_cast<std::int64_t>(std::llround(seconds * kRate)); }

Scenario base(const std::string& name, double duration) {
  Scenario s;
  s.name = name;
  s.duration = duration;
  s.frame_rate = kRate;
  s.box_noise_px = 1.0;
  s.appearance.dim = 512;
  s.appearance.clusters = 2;
  s.appearance.drift = 0.12;
  s.appearance.noise = 0.12;
  s.appearance.similarity = 0.3;
  s.appearance.lower_similarity = 0.95;
  s.appearance.seed = 17;
  s.target_id = 1;
  return s;
}

PedestrianSpec person(int id, int cluster, std::vector<Waypoint> path) {
  PedestrianSpec p;
  p.id = id;
  p.cluster = cluster;
  p.appearance_seed = static_cast<std::uint64_t>(1000 + id);
  p.waypoints = std::move(path);
  return p;
}

/// A companion walking alongside `leader`, `ahead` metres further along x and at lateral `y`.
std::vector<Waypoint> escort(const std::vector<Waypoint>& leader, double ahead_a, double ahead_b,
                             double y_a, double y_b) {
  std::vector<Waypoint> out;
  for (std::size_t k = 0; k < leader.size(); ++k) {
    const bool even = k % 2 == 0;
    out.push_back({leader[k].t, leader[k].x + (even ? ahead_a : ahead_b), even ? y_a : y_b});
  }
  return out;
}

Event directive(EventType type, std::vector<int> who, double from_s, double to_s, int ramp = 0) {
  return Event{type, std::move(who), frame_at(from_s), frame_at(to_s), ramp};
}

RobotSpec follower() {
  RobotSpec r;
  r.mode = RobotMode::follow;
  r.initial_pose = {0.0, 0.0, 0.0};
  return r;
}

// Severe long-term occlusion. Before the second occlusion the target is seen for a long
// stretch with only its lower body in view, which is poorly discriminative.
Scenario corridor1_like() {
  Scenario s = base("corridor1_like", 70.0);
  s.robot = follower();
  std::vector<Waypoint> target = {{0, 1.6, 0.0},   {10, 9.6, 0.2},   {13, 9.6, 0.2},  {25, 19.2, -0.2},
                                  {30, 22.2, 0.0}, {40, 30.2, 0.2},  {44, 30.2, 0.2}, {56, 40.2, 0.0},
                                  {70, 50.0, 0.1}};
  s.pedestrians.push_back(person(1, 0, target));
  s.pedestrians.push_back(person(2, 1, escort(target, 1.8, 2.2, -0.9, -1.1)));
  s.events.push_back(directive(EventType::occlusion, {1}, 12.0, 16.0));
  s.events.push_back(directive(EventType::partial_view, {1}, 18.0, 42.0, 90));
  s.events.push_back(directive(EventType::occlusion, {1}, 42.0, 52.0));
  return s;
}

// Mutual crossing close to the robot plus one long-term occlusion; strong distance change.
Scenario corridor2_like() {
  Scenario s = base("corridor2_like", 60.0);
  s.appearance.clusters = 3;
  s.robot = follower();
  std::vector<Waypoint> target = {{0, 1.6, 0.0},    {6, 9.4, 0.0},    {9, 9.4, 0.0},    {15, 17.2, 0.1},
                                  {18, 17.2, 0.1},  {24, 25.0, -0.1}, {28, 25.0, -0.1}, {34, 32.8, 0.0},
                                  {38, 32.8, 0.1},  {46, 43.2, 0.0},  {50, 43.2, 0.0},  {60, 56.2, 0.0}};
  s.pedestrians.push_back(person(1, 0, target));
  // crosses from left to right between the robot and the stopped target
  s.pedestrians.push_back(person(2, 1, {{0, 14.0, 4.0}, {15.5, 16.5, 2.0}, {18.5, 16.5, -2.0},
                                        {24, 24.0, -1.6}, {40, 40.0, -1.6}, {60, 62.0, -1.6}}));
  s.pedestrians.push_back(person(3, 2, escort(target, 2.0, 2.6, -0.9, -1.0)));
  s.events.push_back(directive(EventType::crossing, {1, 2}, 15.5, 18.5));
  s.events.push_back(directive(EventType::occlusion, {1}, 40.0, 46.0));
  return s;
}

// One long-term occlusion and a crossing; moderate distance change.
Scenario lab_corridor_like() {
  Scenario s = base("lab_corridor_like", 50.0);
  s.appearance.clusters = 3;
  s.robot = follower();
  std::vector<Waypoint> target = {{0, 1.6, 0.0},   {8, 8.8, 0.0},   {12, 8.8, 0.0},  {20, 16.0, 0.1},
                                  {24, 17.6, 0.1}, {32, 24.8, 0.0}, {36, 24.8, 0.0}, {50, 37.4, 0.0}};
  s.pedestrians.push_back(person(1, 0, target));
  s.pedestrians.push_back(person(2, 1, {{0, 6.0, 4.0}, {9.5, 8.0, 2.0}, {12.5, 8.0, -2.0},
                                        {20, 14.0, -2.5}, {50, 40.0, -2.5}}));
  s.pedestrians.push_back(person(3, 2, escort(target, 1.9, 2.4, -1.0, -0.8)));
  s.events.push_back(directive(EventType::crossing, {1, 2}, 9.5, 12.5));
  s.events.push_back(directive(EventType::occlusion, {1}, 26.0, 31.0));
  return s;
}

// Static camera in a room, target and distractor dressed alike, two long-term occlusions.
Scenario room_like() {
  Scenario s = base("room_like", 60.0);
  s.appearance.similarity = 0.9;
  s.robot.mode = RobotMode::fixed;
  s.pedestrians.push_back(person(1, 0, {{0, 2.0, 0.6},   {6, 3.5, 1.2},   {10, 3.5, 1.2},  {16, 2.0, 0.8},
                                        {22, 1.5, 0.4},  {28, 3.0, 1.4},  {34, 4.0, 1.0},  {40, 2.5, 0.5},
                                        {48, 1.8, 0.9},  {54, 3.2, 1.3},  {60, 2.4, 0.7}}));
  s.pedestrians.push_back(person(2, 1, {{0, 3.5, -1.2},  {8, 4.5, -1.8},  {16, 3.0, -1.0}, {24, 4.0, -0.6},
                                        {32, 5.0, -1.5}, {40, 3.5, -1.4}, {50, 4.5, -0.8}, {60, 3.8, -1.6}}));
  s.events.push_back(directive(EventType::occlusion, {1}, 14.0, 19.0));
  s.events.push_back(directive(EventType::occlusion, {1}, 36.0, 43.0));
  return s;
}

// Single person walking back and forth between 0.5 m and 7 m from a static robot with
// random lateral offsets; used for the range-accuracy study.
Scenario range_sweep() {
  Scenario s = base("range_sweep", 1.0);
  s.appearance.clusters = 1;
  s.appearance.dim = 64;
  s.robot.mode = RobotMode::fixed;

  std::mt19937_64 rng(20220915);
  std::uniform_real_distribution<double> lateral(-1.0, 1.0);
  constexpr double kNear = 0.55, kFar = 6.9, kSpeed = 0.8, kStep = 0.5;
  std::vector<Waypoint> path;
  double t = 0.0;
  Eigen::Vector2d last(kNear, 0.0);
  path.push_back({t, last.x(), last.y()});
  for (int leg = 0; leg < 4; ++leg) {
    const bool outward = leg % 2 == 0;
    const int steps = static_cast<int>(std::ceil((kFar - kNear) / kStep));
    for (int k = 1; k <= steps; ++k) {
      const double x = outward ? std::min(kFar, kNear + k * kStep) : std::max(kNear, kFar - k * kStep);
      const double y = (x < 1.0 ? 0.05 : 0.1) * x * lateral(rng);
      const Eigen::Vector2d next(x, y);
      t += (next - last).norm() / kSpeed;
      path.push_back({t, x, y});
      last = next;
    }
  }
  s.duration = std::floor(t) + 1.0;
  s.pedestrians.push_back(person(1, 0, path));
  return s;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
  return {"corridor1_like", "corridor2_like", "lab_corridor_like", "room_like", "range_sweep"};
}

std::map<std::string, Scenario> builtin_scenarios() {
  std::map<std::string, Scenario> all;
  for (const auto& name : builtin_scenario_names()) all.emplace(name, builtin_scenario(name));
  return all;
}

Scenario builtin_scenario(const std::string& name) {
  if (name == "corridor1_like") return corridor1_like();
  if (name == "corridor2_like") return corridor2_like();
  if (name == "lab_corridor_like") return lab_corridor_like();
  if (name == "room_like") return room_like();
  if (name == "range_sweep") return range_sweep();
  throw SchemaError("scenario", "unknown built-in scenario '" + name + "'");
}

}  // namespace mpf::sim
