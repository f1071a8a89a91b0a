#pragma once

#include "pirtrack/sensor_dynamics.hpp"
#include "pirtrack/signal.hpp"

namespace pirtrack {

struct InverseFilterSpec {
    SensorParams params;
    double reg_lambda = 1e-3;  // relative to max |H|^2
    double sample_rate = 100.0;
    double block_seconds = 4.0;  // mean padding on each side; block length in streaming mode
};

void validate(const InverseFilterSpec& spec);

// Whole-trace Tikhonov inverse: Hinv = conj(H) / (|H|^2 + lambda max|H|^2),
// H the discretized sensor response, DC bin zeroed.
SignalTrace recover_dhf(const SignalTrace& output, const InverseFilterSpec& spec);

// Bounded-latency variant: 50% overlapped Hann blocks, each zero padded by
// four blocks, inverted, and overlap-added. Latency is about five blocks.
SignalTrace recover_dhf_blocks(const SignalTrace& output, const InverseFilterSpec& spec);

// max over frequency of |Hinv|, the white-noise gain bound K(lambda).
double inverse_gain_bound(const InverseFilterSpec& spec);

}  // namespace pirtrack
