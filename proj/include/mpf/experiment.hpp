#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mpf/metrics.hpp"
#include "mpf/pipeline.hpp"
#include "mpf/sequence.hpp"
#include "mpf/sim.hpp"

namespace mpf::eval {

/// One row of the per-frame decision trace.
struct TraceRow {
  std::int64_t frame_index = 0;
  double timestamp = 0.0;
  std::optional<reid::FollowMode> mode;
  std::optional<tracking::TrackId> target;
  std::optional<int> target_person;
  std::optional<Eigen::Vector2d> estimated_center;
  std::optional<Eigen::Vector2d> truth_center;
  std::optional<double> target_score;
  std::optional<control::ControlCommand> command;
  bool success = false;  // at the default threshold
};

struct RunResult {
  std::string label;
  std::string scenario;
  std::optional<ReidSummary> reid;  // absent with re-identification off or no target ground truth
  RangeErrorStats range;
  std::size_t range_samples = 0;
  std::vector<TraceRow> trace;
  std::vector<FrameOutput> outputs;
};

/// Runs the pipeline over a sequence. The calibration comes from the header unless one is
/// given; a header body radius and descriptor dimension override the configuration.
///
/// Re-identification ground truth is the noise-free box centre of the detection belonging to
/// the header's target person; frames where that person is not detected are not evaluated.
/// Range error compares the confirmed track matched to the target person's detection with
/// the true ground-contact distance, both measured from the robot base.
RunResult run_sequence(const Sequence& sequence, PipelineConfig cfg,
                       const std::optional<geometry::Calibration>& calibration = std::nullopt);

RunResult run_scenario(const sim::Scenario& scenario, std::uint64_t seed, const PipelineConfig& cfg);

/// First frame after `frame` at which a target is reported, or nullptr.
const TraceRow* first_report_after(const RunResult& run, std::int64_t frame);

/// A labelled variant of the base configuration run on one built-in scenario.
struct RunSpec {
  std::string label;
  std::string scenario;
  PipelineConfig cfg;
};

struct ExperimentReport {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<RunResult> runs;
};

/// range-accuracy, slt-vs-st, sample-sweep, crossing, room, table2.
std::vector<std::string> experiment_names();

/// The runs an experiment consists of. Throws Error(invalid_argument) for an unknown name.
std::vector<RunSpec> experiment_plan(const std::string& name, const PipelineConfig& base);

/// Generates each scenario once and executes the runs in parallel. Output order follows
/// the plan and does not depend on the thread count.
ExperimentReport run_experiment(const std::string& name, std::uint64_t seed, const PipelineConfig& base);

/// Label used for a re-identification configuration, e.g. "GRR_SLT_64".
std::string config_label(const reid::ReidConfig& cfg);

}  // namespace mpf::eval
