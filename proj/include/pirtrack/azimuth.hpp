#pragma once

#include <string>
#include <vector>

#include "pirtrack/signal.hpp"

namespace pirtrack {

enum class ExtremumKind { Peak, Trough };

struct Extremum {
    double time = 0.0;
    double value = 0.0;
    double prominence = 0.0;
    ExtremumKind kind = ExtremumKind::Peak;
    std::size_t index = 0;  // sample index in the source trace
};

struct AzimuthObservation {
    std::string sensor_id;
    double window_start = 0.0;
    double window_end = 0.0;
    double theta = 0.0;  // rad, unsigned
    int n_extrema = 0;
    bool turning_detected = false;
};

// Topographic prominence of each sample index in `peaks` (all must be local
// maxima of x): height above the higher of the two minima reached before a
// strictly higher sample on either side.
std::vector<double> peak_prominences(const std::vector<double>& x, const std::vector<std::size_t>& peaks);

// Interior local maxima; flat tops report their middle sample.
std::vector<std::size_t> local_maxima(const std::vector<double>& x);

std::vector<Extremum> detect_extrema(const SignalTrace& dhf, double min_prominence);

std::vector<std::size_t> detect_turning_points(const std::vector<Extremum>& extrema, double ratio = 0.5);

double azimuth_change(const std::vector<Extremum>& extrema, const std::vector<std::size_t>& turning, double theta_c);

// Adaptive threshold: k times a robust noise estimate taken from the quietest
// background window, floored at a fraction of the signal's 99th percentile.
struct ProminencePolicy {
    double multiplier = 6.0;
    double background_seconds = 5.0;
    double hop_seconds = 1.0;
    double floor_fraction = 0.02;
    double fixed = 0.0;  // > 0 overrides the adaptive rule
};

double noise_floor(const SignalTrace& dhf, const ProminencePolicy& policy = {});
double min_prominence(const SignalTrace& dhf, const ProminencePolicy& policy = {});

std::vector<AzimuthObservation> windowed_azimuth(const SignalTrace& dhf, double period, double theta_c,
                                                 double min_prominence, const std::string& sensor_id,
                                                 double turning_ratio = 0.5);

}  // namespace pirtrack
