#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pirtrack/io.hpp"

namespace pirtrack {

// Everything loaded from the files a PipelineConfig points at.
struct PipelineSetup {
    ZoneLayout layout;
    SensorParams params;
    double sample_rate = 100.0;
    std::vector<SensorPose> poses;  // theta_c filled from the layout where absent
    TrackerConfig tracker;          // period overridden by the pipeline period
    double noise_std = 0.0;         // resolved (auto rule applied)
};

PipelineSetup load_setup(const PipelineConfig& cfg);

struct RunOptions {
    std::size_t n_sensors = 0;          // 0: all poses; otherwise the first n
    std::filesystem::path persist_dir;  // empty: keep intermediates in memory only
    bool block_inverse = false;         // overlap-add inverse instead of whole-trace
};

struct PipelineResult {
    Trajectory truth;
    std::vector<SensorPose> poses;
    std::vector<SignalTrace> outputs;
    std::vector<SignalTrace> dhf;
    std::vector<double> thresholds;
    std::vector<std::vector<AzimuthObservation>> observations;  // per sensor
    std::vector<TrackPoint> track;
    EvalReport report;
};

// synth -> recover_dhf -> windowed_azimuth -> track -> evaluate. Room
// scenarios use the configured poses, the others a single sensor at the
// origin. Errors keep their category and gain the failing stage's name.
PipelineResult run_pipeline(const PipelineConfig& cfg, const PipelineSetup& setup, const std::string& scenario,
                            const RunOptions& opts = {});
PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& scenario, const RunOptions& opts = {});

// Single-sensor azimuth check: per-window |theta_hat - theta_true|.
struct AzimuthReport {
    std::string scenario;
    std::vector<double> abs_errors;  // rad
    double mean_abs_error = 0.0;     // rad
    std::size_t windows = 0;
};

AzimuthReport run_azimuth_scenario(const PipelineConfig& cfg, const PipelineSetup& setup,
                                   const std::string& scenario);

enum class SweepParameter { Period, NSensors };

struct SweepPoint {
    double value = 0.0;
    std::vector<std::string> scenarios;
    std::vector<EvalReport> reports;  // one per scenario
    double mean_error = 0.0;          // average of per-scenario means
};

// Each value re-runs every scenario with the same seed.
std::vector<SweepPoint> sweep(const PipelineConfig& cfg, const std::vector<std::string>& scenarios,
                              SweepParameter parameter, const std::vector<double>& values);

// "room" expands to the six room scenarios.
std::vector<std::string> expand_scenarios(const std::string& spec);

}  // namespace pirtrack
