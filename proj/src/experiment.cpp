#include "mpf/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "mpf/errors.hpp"

namespace mpf::eval {

RunResult run_sequence(const Sequence& sequence, PipelineConfig cfg,
                       const std::optional<geometry::Calibration>& calibration) {
  const auto calib = calibration ? calibration : sequence.header.calibration;
  if (!calib) throw Error(ErrorCategory::invalid_argument, "sequence has no calibration and none was given");
  if (sequence.header.body_radius) cfg.tracker.body_radius = *sequence.header.body_radius;
  if (sequence.header.descriptor_dim > 0) cfg.reid.descriptor_dim = sequence.header.descriptor_dim;

  FollowPipeline pipeline(*calib, cfg);
  RunResult run;
  run.scenario = sequence.header.scenario;
  run.label = cfg.reid_enabled ? config_label(cfg.reid) : "tracking_only";
  const std::optional<int> target_id = sequence.header.target_id;

  std::vector<ReidFrame> reid_frames;
  std::vector<RangeSample> range;
  for (const auto& frame : sequence.frames) {
    FrameOutput out = pipeline.process(frame);

    TraceRow row;
    row.frame_index = frame.frame_index;
    row.timestamp = frame.timestamp;
    row.mode = out.mode;
    row.target = out.target;
    row.target_person = out.target_person;
    row.command = out.command;
    if (out.target_box) row.estimated_center = Eigen::Vector2d(out.target_box->center_u(), out.target_box->center_v());

    if (target_id) {
      const geometry::Pose2D robot = frame.robot_pose.value_or(geometry::Pose2D{});
      for (std::size_t i = 0; i < frame.detections.size(); ++i) {
        const Detection& det = frame.detections[i];
        if (det.person_id != target_id) continue;
        const geometry::BoundingBox& truth = det.truth_box ? *det.truth_box : det.box;
        row.truth_center = Eigen::Vector2d(truth.center_u(), truth.center_v());

        const PersonTruth* person = frame.person(*target_id);
        for (const auto& t : out.tracks) {
          if (t.detection_index != i || !t.confirmed || person == nullptr) continue;
          const double estimated = std::hypot(t.position.x() - robot.x, t.position.y() - robot.y);
          const double truth_range = std::hypot(person->x - robot.x, person->y - robot.y);
          range.push_back({truth_range, estimated});
        }
      }
    }
    if (out.target) {
      for (const auto& t : out.tracks) {
        if (t.id == *out.target) row.target_score = t.score;
      }
    }
    const ReidFrame rf{frame.frame_index, row.estimated_center, row.truth_center};
    row.success = frame_success(rf, kDefaultThresholdPx);
    reid_frames.push_back(rf);
    run.trace.push_back(row);
    run.outputs.push_back(std::move(out));
  }

  const bool any_truth = std::any_of(reid_frames.begin(), reid_frames.end(),
                                     [](const ReidFrame& f) { return f.truth_center.has_value(); });
  if (cfg.reid_enabled && any_truth) run.reid = summarize_reid(reid_frames);
  run.range = range_error_stats(range);
  run.range_samples = range.size();
  return run;
}

RunResult run_scenario(const sim::Scenario& scenario, std::uint64_t seed, const PipelineConfig& cfg) {
  return run_sequence(sim::generate(scenario, seed), cfg);
}

const TraceRow* first_report_after(const RunResult& run, std::int64_t frame) {
  for (const auto& row : run.trace) {
    if (row.frame_index > frame && row.target) return &row;
  }
  return nullptr;
}

std::string config_label(const reid::ReidConfig& cfg) {
  return "GRR_" + std::string(reid::to_string(cfg.mode)) + "_" + std::to_string(cfg.capacity);
}

std::vector<std::string> experiment_names() {
  return {"range-accuracy", "slt-vs-st", "sample-sweep", "crossing", "room", "table2"};
}

namespace {

RunSpec variant(const std::string& scenario, const PipelineConfig& base, reid::SamplingMode mode,
                std::size_t capacity) {
  PipelineConfig cfg = base;
  cfg.reid_enabled = true;
  cfg.reid.mode = mode;
  cfg.reid.capacity = capacity;
  return {config_label(cfg.reid), scenario, cfg};
}

}  // namespace

std::vector<RunSpec> experiment_plan(const std::string& name, const PipelineConfig& base) {
  using reid::SamplingMode;
  std::vector<RunSpec> plan;
  if (name == "range-accuracy") {
    PipelineConfig cfg = base;
    cfg.reid_enabled = false;
    plan.push_back({"tracking_only", "range_sweep", cfg});
  } else if (name == "slt-vs-st") {
    plan.push_back(variant("corridor1_like", base, SamplingMode::short_term, 64));
    plan.push_back(variant("corridor1_like", base, SamplingMode::short_long_term, 64));
  } else if (name == "sample-sweep") {
    for (SamplingMode mode : {SamplingMode::short_term, SamplingMode::short_long_term}) {
      for (std::size_t n : {16, 32, 64, 128}) plan.push_back(variant("room_like", base, mode, n));
    }
  } else if (name == "crossing") {
    plan.push_back(variant("corridor2_like", base, SamplingMode::short_long_term, 64));
  } else if (name == "room") {
    plan.push_back(variant("room_like", base, SamplingMode::short_long_term, 64));
  } else if (name == "table2") {
    for (const char* s : {"corridor1_like", "corridor2_like", "lab_corridor_like", "room_like"}) {
      for (SamplingMode mode : {SamplingMode::short_term, SamplingMode::short_long_term}) {
        plan.push_back(variant(s, base, mode, 64));
      }
    }
  } else {
    throw Error(ErrorCategory::invalid_argument, "unknown experiment '" + name + "'");
  }
  return plan;
}

ExperimentReport run_experiment(const std::string& name, std::uint64_t seed, const PipelineConfig& base) {
  const std::vector<RunSpec> plan = experiment_plan(name, base);
  for (const auto& spec : plan) spec.cfg.validate();

  std::vector<std::string> scenarios;
  for (const auto& spec : plan) {
    if (std::find(scenarios.begin(), scenarios.end(), spec.scenario) == scenarios.end()) {
      scenarios.push_back(spec.scenario);
    }
  }

  std::vector<Sequence> sequences(scenarios.size());
  std::vector<std::exception_ptr> errors(std::max(scenarios.size(), plan.size()));
  const auto n_scen = static_cast<int>(scenarios.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_scen; ++i) {
    try {
      sequences[i] = sim::generate(sim::builtin_scenario(scenarios[i]), seed);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ExperimentReport report;
  report.name = name;
  report.seed = seed;
  report.runs.resize(plan.size());
  const auto n_runs = static_cast<int>(plan.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_runs; ++i) {
    try {
      const auto k = std::find(scenarios.begin(), scenarios.end(), plan[i].scenario) - scenarios.begin();
      PipelineConfig cfg = plan[i].cfg;
      cfg.seed = seed;
      report.runs[i] = run_sequence(sequences[k], cfg);
      report.runs[i].label = plan[i].label;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return report;
}

}  // namespace mpf::eval
