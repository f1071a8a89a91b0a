#pragma once

#include <cstddef>
#include <vector>

namespace pirtrack {

// Uniformly sampled scalar series: a PIR output voltage or a DHF.
struct SignalTrace {
    std::vector<double> samples;
    double sample_rate = 100.0;
    double t0 = 0.0;

    std::size_t size() const { return samples.size(); }
    double time(std::size_t i) const { return t0 + static_cast<double>(i) / sample_rate; }
    double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

// Throws DataError when the trace breaks its invariants.
void validate(const SignalTrace& trace);

}  // namespace pirtrack
