#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "mpf/experiment.hpp"
#include "mpf/geometry.hpp"
#include "mpf/pipeline.hpp"
#include "mpf/sequence.hpp"
#include "mpf/sim.hpp"

namespace mpf::io {

using json = nlohmann::ordered_json;

inline constexpr std::string_view kCalibrationSchema = "mpf.calibration/1";
inline constexpr std::string_view kScenarioSchema = "mpf.scenario/1";
inline constexpr std::string_view kConfigSchema = "mpf.config/1";
inline constexpr std::string_view kSequenceSchema = "mpf.sequence/1";
inline constexpr std::string_view kTracksSchema = "mpf.tracks/1";
inline constexpr std::string_view kTraceSchema = "mpf.trace/1";
inline constexpr std::string_view kMetricsSchema = "mpf.metrics/1";

// Calibration: {"schema", "intrinsics": {...}, "extrinsics": {"world_to_robot": {R|rpy, t},
// "robot_to_camera": {R|rpy, t}}} or "mount": {forward, lateral, height} in place of
// "robot_to_camera". R is a row-major 9-vector, rpy in radians.
geometry::Calibration calibration_from_json(const json& j);
json to_json(const geometry::Calibration& calib);

sim::Scenario scenario_from_json(const json& j);
json to_json(const sim::Scenario& scenario);

/// Parameters of a track / experiment run. Every field has a default.
struct RunConfig {
  std::optional<std::string> calibration;  // path
  std::optional<std::string> scenario;     // built-in name or path
  eval::PipelineConfig pipeline;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
};

/// Keys absent from `j` keep the values already in `base`.
RunConfig run_config_from_json(const json& j, RunConfig base = {});
json to_json(const RunConfig& cfg);
json to_json(const eval::PipelineConfig& cfg);

/// Parses a JSON document; syntax errors become SchemaError naming `source`.
json parse_json(std::string_view text, const std::string& source);
json load_json(const std::filesystem::path& path);

geometry::Calibration load_calibration(const std::filesystem::path& path);
sim::Scenario load_scenario(const std::filesystem::path& path);
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

/// Line-delimited sequence: one header object, then one object per frame.
void write_sequence(std::ostream& out, const Sequence& seq);
/// Errors name the offending line as "<source>:<line>".
Sequence read_sequence(std::istream& in, const std::string& source);
Sequence load_sequence(const std::filesystem::path& path);
std::string sequence_text(const Sequence& seq);

/// One object per confirmed track per frame: frame_index, track_id, x, y, box.
std::string tracks_text(const eval::RunResult& run);
/// Per-frame decisions: mode, target, score, estimated and ground-truth centres, success.
std::string trace_text(const eval::RunResult& run);

/// Flat key=value summary followed by whitespace-aligned tables. Numbers use fixed
/// formatting so reruns are byte-identical.
std::string metrics_text(const eval::ExperimentReport& report);

/// Writes through a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace mpf::io
