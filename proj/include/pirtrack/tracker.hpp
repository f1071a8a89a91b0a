#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pirtrack/azimuth.hpp"

namespace pirtrack {

struct MotionState {
    double x = 0.0;
    double y = 0.0;
    double vx = 0.0;
    double vy = 0.0;
};

struct ParticleSet {
    std::vector<MotionState> states;
    std::vector<double> weights;
    std::uint64_t rng_seed = 0;
    std::uint64_t draws = 0;  // stochastic steps taken so far; keys the next random stream
};

struct SensorPose {
    std::string sensor_id;
    double a = 0.0;  // m
    double b = 0.0;  // m
    double orientation = 0.0;  // rad, boresight
    double theta_c = 0.0;      // rad
};

struct AreaBounds {
    double x_min = 0.0, x_max = 7.0, y_min = 0.0, y_max = 7.0;
    bool contains(double x, double y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }
};

struct ProcessNoise {
    double sigma_pos = 0.02;  // m per step
    double sigma_vel = 0.1;   // m/s per step
    // With probability jump_prob a particle redraws its velocity from
    // N(0, jump_sigma^2) before moving. 0 gives the plain constant-velocity model.
    double jump_prob = 0.1;
    double jump_sigma = 0.8;
};

enum class Likelihood { Cosine, Angle };

struct TrackerConfig {
    std::size_t n_particles = 5000;
    double period = 0.5;  // s
    ProcessNoise noise;
    Likelihood likelihood = Likelihood::Angle;
    double sigma_n = 0.05;  // std of the cos residual (Cosine likelihood)
    double sigma_theta = 0.03490658503988659;  // rad, std of the angle residual (Angle likelihood)
    double resample_ess_fraction = 0.5;
    AreaBounds area;
    double init_vel_sigma = 0.7;  // m/s per axis
    // Soft support constraints: factors applied to particles outside the area
    // or above max_speed. 1 disables them.
    double outside_factor = 1e-12;
    double max_speed = 2.0;
    double overspeed_factor = 1e-12;
};

void validate(const TrackerConfig& cfg);

inline constexpr double kLikelihoodFloor = 1e-12;

ParticleSet init_particles(const TrackerConfig& cfg, std::uint64_t seed);

ParticleSet propagate(const ParticleSet& ps, double T, const ProcessNoise& noise);

// Law of cosines on ap = |prev - P|, bp = |curr - P|, ab = T |v|, with
// prev = curr - T v. Throws DegenerateGeometry when ap or bp < 1e-6 m.
double expected_cos_theta(const MotionState& s, const SensorPose& pose, double T);

// Per-sensor likelihood factor for one particle (floored).
double likelihood_factor(const MotionState& s, const AzimuthObservation& obs, const SensorPose& pose,
                         const TrackerConfig& cfg);

ParticleSet weight_update(const ParticleSet& ps, const std::vector<AzimuthObservation>& observations,
                          const std::vector<SensorPose>& poses, const TrackerConfig& cfg);

// Cosine-residual update with an explicit sigma_n.
ParticleSet weight_update(const ParticleSet& ps, const std::vector<AzimuthObservation>& observations,
                          const std::vector<SensorPose>& poses, double sigma_n);

ParticleSet apply_constraints(const ParticleSet& ps, const TrackerConfig& cfg);

double effective_sample_size(const std::vector<double>& w);

ParticleSet resample_if_needed(const ParticleSet& ps, double ess_fraction);

MotionState estimate(const ParticleSet& ps);

struct TrackPoint {
    double t = 0.0;
    MotionState state;
};

std::vector<TrackPoint> track(const std::vector<std::vector<AzimuthObservation>>& stream,
                              const std::vector<SensorPose>& poses, const TrackerConfig& cfg, std::uint64_t seed);

// Regroup per-sensor observation lists into per-window lists.
std::vector<std::vector<AzimuthObservation>> group_by_window(
    const std::vector<std::vector<AzimuthObservation>>& per_sensor);

}  // namespace pirtrack
