#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pirtrack/lens_optics.hpp"
#include "pirtrack/sensor_dynamics.hpp"
#include "pirtrack/signal.hpp"
#include "pirtrack/tracker.hpp"

namespace pirtrack {

struct Trajectory {
    std::vector<double> t, x, y;
    double dt = 0.01;
    std::string tag;

    std::size_t size() const { return t.size(); }
    double duration() const { return t.empty() ? 0.0 : t.back() - t.front(); }
    // Linear interpolation, clamped to the ends.
    void position_at(double time, double& px, double& py) const;
};

// How the body's angular extent spreads its emission: evenly, or tapered
// towards the edges (raised cosine).
enum class BodyProfile { Uniform, RaisedCosine };

struct BodyModel {
    double radius = 0.2;    // m
    double emission = 1.0;  // flux units at 1 m
    BodyProfile profile = BodyProfile::RaisedCosine;
};

struct NoiseModel {
    double output_noise_std = 0.0;
    std::uint64_t seed = 0;
};

// Path primitives traversed at constant speed.
struct Segment {
    enum class Kind { Line, Arc } kind = Kind::Line;
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;      // line
    double cx = 0, cy = 0, r = 0, a0 = 0, a1 = 0;  // arc, angles in rad
    double length() const;
    void point_at(double s, double& px, double& py) const;
    Segment reversed() const;
};

struct ScenarioSpec {
    std::string family;
    int trace = 1;    // 1-based, for families with several traces
    int repeats = 5;  // round trips (open paths) or laps (closed paths)
};

// "square", "arcs:2", "turns:3", ...
ScenarioSpec parse_scenario(const std::string& name, int repeats = 5);

std::vector<std::string> scenario_families();
// Families whose geometry is the 7 m x 7 m room with corner sensors.
bool is_room_scenario(const std::string& family);
int trace_count(const std::string& family);

// One-way path of a scenario before repetition.
std::vector<Segment> scenario_path(const ScenarioSpec& spec, bool& closed);

Trajectory trajectory_from_segments(const std::vector<Segment>& one_way, bool closed, int repeats, double speed,
                                    double dt, const std::string& tag);

Trajectory make_trajectory(const ScenarioSpec& spec, double speed, double dt = 0.01);

// Straight-leg walk with a standstill: used for the pseudo-edge check.
// Returns the trajectory; t_stop receives the time the walker halts.
Trajectory make_stop_trajectory(double range, double speed, double stop_azimuth, double walk_seconds,
                                double still_seconds, double dt, double& t_stop);

// Sensor at the origin looking along +x; used by single-sensor families.
SensorPose origin_pose(double theta_c);
// Four corners of the room, boresights towards the centre.
std::vector<SensorPose> room_poses(double theta_c, double side = 7.0);

// Angular sweep rate of the rotating-source family and its radius.
inline constexpr double kRotatingRadius = 0.5;
inline constexpr double kRotatingRateDeg = 15.0;
// The rotating plate carries a small heat source, not a person. About half a
// zone wide at 0.5 m, so each zone gives one rounded peak rather than a flat top.
inline constexpr double kRotatingSourceRadius = 0.015;

SignalTrace synth_dhf(const Trajectory& traj, const SensorPose& pose, const ZoneLayout& layout, const BodyModel& body);

struct SensorSetup {
    SensorPose pose;
    ZoneLayout layout;
    SensorParams params;
};

std::vector<SignalTrace> synth_outputs(const Trajectory& traj, const std::vector<SensorSetup>& sensors,
                                       const BodyModel& body, const NoiseModel& noise);

struct TruthWindow {
    double t_start = 0.0;
    double t_end = 0.0;
    double theta = 0.0;
};

std::vector<TruthWindow> true_azimuth_series(const Trajectory& traj, const SensorPose& pose, double period);

// 2% of the median |output| of a 1 m/s tangential walk at 3 m.
double reference_noise_std(const ZoneLayout& layout, const SensorParams& params, const BodyModel& body,
                           double fraction = 0.02, double sample_rate = 100.0);

struct EstimatePoint {
    double t = 0.0, x = 0.0, y = 0.0;
};

struct EvalReport {
    double mean_error = 0.0;
    double std_error = 0.0;
    std::vector<std::pair<double, double>> cdf;  // (error m, cumulative probability)
    double accuracy_rate = 0.0;                  // same 1 m x 1 m cell as truth
    double submeter = 0.0;                       // P(error <= 1 m)
    std::size_t count = 0;
    std::vector<double> errors;
};

EvalReport evaluate(const std::vector<EstimatePoint>& estimates, const Trajectory& truth, double burn_in = 2.0);

}  // namespace pirtrack
