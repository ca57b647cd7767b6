#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "mpf/errors.hpp"
#include "mpf/experiment.hpp"
#include "mpf/io.hpp"
#include "mpf/sim.hpp"

using namespace mpf;
namespace fs = std::filesystem;

namespace {

const fs::path kData = MPF_TEST_DATA_DIR;

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mpf_io_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string expect_schema_error(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const SchemaError& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected SchemaError";
  return "";
}

}  // namespace

TEST(Io, CalibrationRoundTrip) {
  const auto c = io::load_calibration(kData / "calibration.json");
  EXPECT_DOUBLE_EQ(c.intrinsics.fx, 910.0);
  EXPECT_EQ(c.intrinsics.image_width, 1280);
  EXPECT_TRUE(c.extrinsics.R_robot_cam.isApprox(geometry::forward_looking_camera_rotation()));
  const auto again = io::calibration_from_json(io::to_json(c));
  EXPECT_TRUE(again.extrinsics.R_robot_cam.isApprox(c.extrinsics.R_robot_cam, 1e-15));
  EXPECT_TRUE(again.extrinsics.t_robot_cam.isApprox(c.extrinsics.t_robot_cam, 1e-15));
  EXPECT_EQ(again.intrinsics.cx, c.intrinsics.cx);
}

TEST(Io, CalibrationRejectsBadValues) {
  auto j = io::load_json(kData / "calibration.json");
  j["intrinsics"]["fx"] = -1.0;
  EXPECT_NE(expect_schema_error([&] { io::calibration_from_json(j); }).find("fx"), std::string::npos);
  auto k = io::load_json(kData / "calibration.json");
  k["extrinsics"]["robot_to_camera"]["R"] = {1, 0, 0, 0, 1, 0, 0, 0, 2};
  EXPECT_THROW(io::calibration_from_json(k), SchemaError);
}

TEST(Io, UnknownFieldRejected) {
  auto j = io::load_json(kData / "good_config.json");
  j["pipeline"]["reid"]["capcity"] = 3;
  EXPECT_NE(expect_schema_error([&] { io::run_config_from_json(j); }).find("capcity"), std::string::npos);
}

TEST(Io, ConfigKeepsBaseForAbsentKeys) {
  io::RunConfig base;
  base.pipeline.reid.lambda = 0.5;
  const auto cfg = io::load_run_config(kData / "good_config.json", base);
  EXPECT_EQ(cfg.seed, 3u);
  EXPECT_EQ(cfg.pipeline.reid.capacity, 32u);
  EXPECT_EQ(cfg.pipeline.reid.mode, reid::SamplingMode::short_term);
  EXPECT_DOUBLE_EQ(cfg.pipeline.reid.lambda, 0.5);
  const auto again = io::run_config_from_json(io::to_json(cfg));
  EXPECT_EQ(io::to_json(again), io::to_json(cfg));
}

TEST(Io, ScenarioRoundTripAndFieldPath) {
  for (const auto& name : sim::builtin_scenario_names()) {
    const auto s = sim::builtin_scenario(name);
    const auto j = io::to_json(s);
    EXPECT_EQ(io::to_json(io::scenario_from_json(j)), j) << name;
  }
  const std::string msg = expect_schema_error([] { io::load_scenario(kData / "bad_scenario.json"); });
  EXPECT_NE(msg.find("pedestrians[1].waypoints[1].t"), std::string::npos) << msg;
  EXPECT_NE(msg.find("bad_scenario.json"), std::string::npos) << msg;
}

TEST(Io, SequenceRoundTrip) {
  sim::Scenario s = sim::builtin_scenario("room_like");
  s.duration = 2.0;
  s.appearance.dim = 16;
  const Sequence seq = sim::generate(s, 1);
  std::stringstream buf;
  io::write_sequence(buf, seq);
  const Sequence back = io::read_sequence(buf, "mem");
  EXPECT_EQ(back.header.scenario, "room_like");
  EXPECT_EQ(back.header.descriptor_dim, 16);
  EXPECT_EQ(back.header.target_id, 1);
  EXPECT_DOUBLE_EQ(*back.header.body_radius, 0.25);
  ASSERT_EQ(back.frames.size(), seq.frames.size());
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    const auto& a = seq.frames[i];
    const auto& b = back.frames[i];
    EXPECT_EQ(a.frame_index, b.frame_index);
    ASSERT_EQ(a.detections.size(), b.detections.size());
    for (std::size_t k = 0; k < a.detections.size(); ++k) {
      EXPECT_EQ(a.detections[k].box, b.detections[k].box);
      EXPECT_EQ(a.detections[k].person_id, b.detections[k].person_id);
      EXPECT_LE((*a.detections[k].descriptor - *b.detections[k].descriptor).cwiseAbs().maxCoeff(), 5e-7);
    }
  }
  // writing what was read reproduces the text
  EXPECT_EQ(io::sequence_text(back), buf.str());
}

TEST(Io, SequenceErrorsNameTheLine) {
  const std::string msg = expect_schema_error([] { io::load_sequence(kData / "malformed_sequence.jsonl"); });
  EXPECT_NE(msg.find("malformed_sequence.jsonl:3"), std::string::npos) << msg;

  std::stringstream dup(io::sequence_text(sim::generate([] {
    sim::Scenario s = sim::builtin_scenario("room_like");
    s.duration = 0.1;
    s.appearance.dim = 16;
    return s;
  }(), 0)));
  std::string header, first, second;
  std::getline(dup, header);
  std::getline(dup, first);
  std::getline(dup, second);
  std::stringstream bad(header + "\n" + second + "\n" + first + "\n");
  const std::string order = expect_schema_error([&] { io::read_sequence(bad, "seq"); });
  EXPECT_NE(order.find("seq:3"), std::string::npos) << order;
}

TEST(Io, MissingFileIsIoError) {
  try {
    io::load_sequence(kData / "does_not_exist.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::io);
  }
}

TEST(Io, AtomicWriteReplacesWholeFile) {
  const fs::path dir = scratch_dir("atomic");
  const fs::path target = dir / "nested" / "metrics.txt";
  io::write_file_atomic(target, "first version, longer than the second\n");
  io::write_file_atomic(target, "second\n");
  std::ifstream in(target);
  std::stringstream got;
  got << in.rdbuf();
  EXPECT_EQ(got.str(), "second\n");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(target.parent_path())) ++files;
  EXPECT_EQ(files, 1u);  // no temporary left behind
}

TEST(Io, MetricsTextDeterministic) {
  eval::PipelineConfig cfg;
  cfg.reid.descriptor_dim = 64;
  sim::Scenario s = sim::builtin_scenario("room_like");
  s.duration = 8.0;
  s.appearance.dim = 64;
  const Sequence seq = sim::generate(s, 2);
  auto report = [&] {
    eval::ExperimentReport r;
    r.name = "unit";
    r.seed = 2;
    r.runs.push_back(eval::run_sequence(seq, cfg));
    return io::metrics_text(r);
  };
  const std::string a = report();
  EXPECT_EQ(a, report());
  EXPECT_NE(a.find("run.0.label=GRR_SLT_64"), std::string::npos);
  EXPECT_NE(a.find("[table range_error]"), std::string::npos);
}

TEST(Io, TraceAndTracksAreJsonLines) {
  eval::PipelineConfig cfg;
  cfg.reid.descriptor_dim = 16;
  sim::Scenario s = sim::builtin_scenario("room_like");
  s.duration = 3.0;
  s.appearance.dim = 16;
  const auto run = eval::run_sequence(sim::generate(s, 2), cfg);
  for (const std::string& text : {io::trace_text(run), io::tracks_text(run)}) {
    std::stringstream in(text);
    std::string line;
    std::getline(in, line);
    EXPECT_TRUE(io::parse_json(line, "header").contains("schema"));
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      EXPECT_TRUE(io::parse_json(line, "row").contains("frame_index"));
      ++rows;
    }
    EXPECT_GT(rows, 0u);
  }
}
