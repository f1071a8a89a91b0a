#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pirtrack/azimuth.hpp"
#include "pirtrack/dhf_recovery.hpp"
#include "pirtrack/lens_optics.hpp"
#include "pirtrack/scenario.hpp"
#include "pirtrack/sensor_dynamics.hpp"
#include "pirtrack/tracker.hpp"

namespace pirtrack {

// ---- CSV ----------------------------------------------------------------

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;  // DataError if absent
};

// 17 significant digits: reads back bit-exactly.
std::string format_double(double v);
double parse_double(const std::string& s);

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Two columns t_s,v with header.
SignalTrace read_trace(const std::filesystem::path& path);
void write_trace(const std::filesystem::path& path, const SignalTrace& trace, const std::string& value_name = "v");

void write_observations(const std::filesystem::path& path, const std::vector<AzimuthObservation>& obs);
std::vector<AzimuthObservation> read_observations(const std::filesystem::path& path);

void write_truth(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_truth(const std::filesystem::path& path);

void write_track(const std::filesystem::path& path, const std::vector<TrackPoint>& track);
std::vector<EstimatePoint> read_estimates(const std::filesystem::path& path);

void write_report(const std::filesystem::path& path, const EvalReport& rep);
void write_cdf(const std::filesystem::path& path, const EvalReport& rep);

// ---- configuration files (JSON text) -------------------------------------

LensConfig load_lens_config(const std::filesystem::path& path);
SensorParams load_sensor_config(const std::filesystem::path& path, double* sample_rate = nullptr);
// theta_c_deg may be omitted; such poses get theta_c = 0 and are filled from
// the lens layout by the caller.
std::vector<SensorPose> load_poses(const std::filesystem::path& path);
TrackerConfig load_tracker_config(const std::filesystem::path& path);

struct PipelineConfig {
    std::filesystem::path lens_path;
    std::filesystem::path sensor_path;
    std::filesystem::path poses_path;
    std::filesystem::path tracker_path;  // empty: built-in defaults
    double period = 0.5;
    double reg_lambda = 1e-3;
    ProminencePolicy prominence;
    double turning_ratio = 0.5;
    std::uint64_t seed = 1;
    double speed = 1.0;
    int repeats = 5;
    double burn_in = 2.0;
    double noise_std = -1.0;  // < 0: reference rule (2% of median output)
    BodyModel body;
    double sample_rate = 100.0;
};

PipelineConfig load_pipeline_config(const std::filesystem::path& path);

}  // namespace pirtrack
