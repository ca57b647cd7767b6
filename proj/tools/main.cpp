// mpf: simulate, track, and evaluate monocular person following.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mpf/errors.hpp"
#include "mpf/experiment.hpp"
#include "mpf/io.hpp"
#include "mpf/sim.hpp"

namespace fs = std::filesystem;
using namespace mpf;

namespace {

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::invalid_argument: return 2;
    case ErrorCategory::invalid_detection: return 3;
    case ErrorCategory::schema: return 4;
    case ErrorCategory::io: return 5;
    case ErrorCategory::untrained: return 6;
    case ErrorCategory::runtime: return 7;
  }
  return 7;
}

int fail(ErrorCategory c, const std::string& msg) {
  std::cerr << "error[" << to_string(c) << "]: " << msg << "\n";
  return exit_code(c);
}

// Flags that override individual pipeline parameters; unset flags leave the config alone.
struct Overrides {
  std::optional<double> delta_iou, delta_switch, delta_id, lambda;
  std::optional<int> n_id, descriptor_dim;
  std::optional<std::size_t> capacity;
  std::optional<std::string> mode, extractor;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool no_reid = false;
  bool controller = false;
  bool async_training = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--delta-iou", delta_iou, "IoU above which overlapping detections are dropped (default 0.5)");
    cmd->add_option("--delta-switch", delta_switch, "target score below which re-identification starts (default 0.35)");
    cmd->add_option("--delta-id", delta_id, "candidate score needed during re-identification (default 0.60)");
    cmd->add_option("--n-id", n_id, "consecutive frames a candidate must pass (default 5)");
    cmd->add_option("--lambda", lambda, "ridge regularisation (default 0.01)");
    cmd->add_option("--capacity", capacity, "sample-set size N (default 64)");
    cmd->add_option("--mode", mode, "sample-set strategy: ST or SLT (default SLT)");
    cmd->add_option("--descriptor-dim", descriptor_dim, "descriptor dimension (default 512)");
    cmd->add_option("--extractor", extractor, "descriptor extractor: passthrough or synthetic");
    cmd->add_option("--seed", seed, "random seed (default 0)");
    cmd->add_option("--out-dir", out_dir, "output directory (default: $MPF_OUTPUT_DIR, else ./out)");
    cmd->add_flag("--no-reid", no_reid, "track only; emit no target decisions");
    cmd->add_flag("--controller", controller, "compute velocity commands toward the target");
    cmd->add_flag("--async-training", async_training, "train the classifier on a worker thread");
  }

  void apply(io::RunConfig& cfg) const {
    auto& p = cfg.pipeline;
    if (delta_iou) p.tracker.delta_iou = *delta_iou;
    if (delta_switch) p.reid.delta_switch = *delta_switch;
    if (delta_id) p.reid.delta_id = *delta_id;
    if (lambda) p.reid.lambda = *lambda;
    if (n_id) p.reid.n_id = *n_id;
    if (descriptor_dim) p.reid.descriptor_dim = *descriptor_dim;
    if (capacity) p.reid.capacity = *capacity;
    if (mode) p.reid.mode = reid::sampling_mode_from_string(*mode);
    if (extractor) p.reid.extractor = *extractor;
    if (seed) cfg.seed = *seed;
    if (no_reid) p.reid_enabled = false;
    if (controller) p.controller_enabled = true;
    if (async_training) p.async_training = true;
    if (out_dir) cfg.output_dir = *out_dir;
    p.validate();
  }
};

// defaults < config file < MPF_OUTPUT_DIR < flags
io::RunConfig resolve(const std::string& config_path, const Overrides& o) {
  io::RunConfig cfg;
  if (!config_path.empty()) cfg = io::load_run_config(config_path, cfg);
  if (const char* env = std::getenv("MPF_OUTPUT_DIR"); env != nullptr && *env != '\0') cfg.output_dir = env;
  o.apply(cfg);
  return cfg;
}

sim::Scenario scenario_by_name_or_path(const std::string& s) {
  const auto names = sim::builtin_scenario_names();
  if (std::find(names.begin(), names.end(), s) != names.end()) return sim::builtin_scenario(s);
  if (!fs::exists(s)) {
    throw Error(ErrorCategory::invalid_argument, "'" + s + "' is neither a built-in scenario nor a file");
  }
  return io::load_scenario(s);
}

void print_config(const io::RunConfig& cfg) { std::cout << io::to_json(cfg).dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monocular person following: simulator, tracker, re-identification and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  bool print_cfg = false;
  app.add_flag("--print-config", print_cfg, "print the fully resolved configuration and exit");

  // generate
  auto* gen = app.add_subcommand("generate", "simulate a scenario and write a sequence file");
  std::string gen_scenario;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--scenario", gen_scenario, "built-in name or scenario file")->required();
  gen->add_option("--seed", gen_seed, "random seed (default 0)");
  gen->add_option("--out", gen_out, "output file (default <out-dir>/<scenario>_seed<N>.jsonl)");

  // track
  auto* track = app.add_subcommand("track", "run tracking (+ re-identification) over a sequence file");
  std::string track_seq, track_config, track_calib;
  Overrides track_o;
  track->add_option("--sequence", track_seq, "sequence file")->required();
  track->add_option("--config", track_config, "run config file");
  track->add_option("--calibration", track_calib, "calibration file (default: the sequence header's)");
  track_o.add_to(track);

  // experiment
  auto* exp = app.add_subcommand("experiment", "run a named experiment on built-in scenarios");
  std::string exp_name, exp_config;
  Overrides exp_o;
  exp->add_option("name", exp_name, "range-accuracy | slt-vs-st | sample-sweep | crossing | room | table2")->required();
  exp->add_option("--config", exp_config, "run config file (pipeline parameters)");
  exp_o.add_to(exp);

  // validate-config
  auto* val = app.add_subcommand("validate-config", "check a config, scenario or calibration file");
  std::string val_path, val_kind = "auto";
  val->add_option("file", val_path, "file to check")->required();
  val->add_option("--kind", val_kind, "config | scenario | calibration | auto (use the schema field)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(ErrorCategory::invalid_argument, e.what());
  }

  try {
    if (*gen) {
      io::RunConfig cfg = resolve("", Overrides{});
      const sim::Scenario scenario = scenario_by_name_or_path(gen_scenario);
      if (print_cfg) {
        std::cout << io::to_json(scenario).dump(2) << "\n";
        return 0;
      }
      const fs::path out = gen_out.empty()
                               ? fs::path(cfg.output_dir) / (scenario.name + "_seed" + std::to_string(gen_seed) + ".jsonl")
                               : fs::path(gen_out);
      const Sequence seq = sim::generate(scenario, gen_seed);
      io::write_file_atomic(out, io::sequence_text(seq));
      std::cout << "wrote " << seq.frames.size() << " frames to " << out.string() << "\n";
      return 0;
    }

    if (*track) {
      io::RunConfig cfg = resolve(track_config, track_o);
      if (!track_calib.empty()) cfg.calibration = track_calib;
      if (print_cfg) {
        print_config(cfg);
        return 0;
      }
      std::optional<geometry::Calibration> calib;
      if (cfg.calibration) calib = io::load_calibration(*cfg.calibration);
      const Sequence seq = io::load_sequence(track_seq);
      eval::PipelineConfig pipeline = cfg.pipeline;
      pipeline.seed = cfg.seed;
      eval::ExperimentReport report;
      report.name = "track";
      report.seed = cfg.seed;
      report.runs.push_back(eval::run_sequence(seq, pipeline, calib));
      const fs::path dir(cfg.output_dir);
      io::write_file_atomic(dir / "tracks.jsonl", io::tracks_text(report.runs[0]));
      io::write_file_atomic(dir / "trace.jsonl", io::trace_text(report.runs[0]));
      const std::string metrics = io::metrics_text(report);
      io::write_file_atomic(dir / "metrics.txt", metrics);
      std::cout << metrics;
      return 0;
    }

    if (*exp) {
      io::RunConfig cfg = resolve(exp_config, exp_o);
      if (print_cfg) {
        print_config(cfg);
        return 0;
      }
      const eval::ExperimentReport report = eval::run_experiment(exp_name, cfg.seed, cfg.pipeline);
      const fs::path dir = fs::path(cfg.output_dir) / exp_name;
      const std::string metrics = io::metrics_text(report);
      io::write_file_atomic(dir / "metrics.txt", metrics);
      for (std::size_t i = 0; i < report.runs.size(); ++i) {
        const auto& r = report.runs[i];
        io::write_file_atomic(dir / ("trace_" + std::to_string(i) + "_" + r.scenario + "_" + r.label + ".jsonl"),
                              io::trace_text(r));
      }
      std::cout << metrics;
      return 0;
    }

    if (*val) {
      const io::json j = io::load_json(val_path);
      std::string kind = val_kind;
      if (kind == "auto") {
        const std::string schema = j.is_object() && j.contains("schema") && j["schema"].is_string()
                                       ? j["schema"].get<std::string>()
                                       : "";
        if (schema == io::kConfigSchema) kind = "config";
        else if (schema == io::kScenarioSchema) kind = "scenario";
        else if (schema == io::kCalibrationSchema) kind = "calibration";
        else throw SchemaError("schema", "cannot infer the file kind; set a schema field or pass --kind");
      }
      if (kind == "config") {
        const io::RunConfig cfg = io::load_run_config(val_path);
        if (print_cfg) print_config(cfg);
        if (cfg.calibration && !fs::exists(*cfg.calibration)) {
          throw SchemaError("calibration", "file '" + *cfg.calibration + "' does not exist");
        }
        if (cfg.scenario) scenario_by_name_or_path(*cfg.scenario);
      } else if (kind == "scenario") {
        io::load_scenario(val_path);
      } else if (kind == "calibration") {
        io::load_calibration(val_path);
      } else {
        throw Error(ErrorCategory::invalid_argument, "--kind must be config, scenario, calibration or auto");
      }
      std::cout << "ok: " << val_path << " (" << kind << ")\n";
      return 0;
    }
  } catch (const Error& e) {
    return fail(e.category(), e.what());
  } catch (const std::exception& e) {
    return fail(ErrorCategory::runtime, e.what());
  }
  return 0;
}
