#pragma once

#include <array>
#include <complex>
#include <vector>

#include "pirtrack/signal.hpp"

namespace pirtrack {

// G(s) = A s / (B s^2 + C s + 1)
struct SensorParams {
    double a_gain = 1.0;
    double b_coef = 0.01;
    double c_coef = 0.2;
};

struct DigitalFilter {
    std::array<double, 3> feedforward{};
    std::array<double, 3> feedback{1.0, 0.0, 0.0};

    // Response at normalized angular frequency w in [0, pi] (rad/sample).
    std::complex<double> response(double w) const;
};

// Throws UnstableParams when a continuous pole has non-negative real part,
// ConfigError when A is zero or a value is not finite.
void validate(const SensorParams& p);

std::complex<double> analog_response(const SensorParams& p, double omega);

// Bilinear transform. With prewarp the frequency 1/sqrt(B) maps exactly.
DigitalFilter discretize(const SensorParams& p, double sample_rate, bool prewarp = false);

std::vector<double> apply_filter(const DigitalFilter& f, const std::vector<double>& x);

SignalTrace simulate_output(const SignalTrace& dhf, const SensorParams& p);

SignalTrace step_response(const SensorParams& p, double duration, double sample_rate);

struct IdentifyOptions {
    int max_iterations = 2000;
    double size_tolerance = 1e-10;  // simplex size in (A, log B, log C)
};

struct IdentifyResult {
    SensorParams params;
    double residual_rms = 0.0;
    int iterations = 0;
};

IdentifyResult identify_params(const std::vector<SignalTrace>& step_traces, const SensorParams& initial_guess,
                               const IdentifyOptions& opts = {});

// First index whose value exceeds k times the pre-onset noise std (estimated
// over the first `baseline` samples). Returns 0 if none.
std::size_t detect_onset(const std::vector<double>& v, std::size_t baseline = 50, double k = 5.0);

}  // namespace pirtrack
