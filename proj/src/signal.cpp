#include "pirtrack/signal.hpp"

#include <cmath>

#include "pirtrack/errors.hpp"

namespace pirtrack {

void validate(const SignalTrace& trace) {
    if (!(trace.sample_rate > 0.0) || !std::isfinite(trace.sample_rate))
        throw DataError("trace sample_rate must be > 0");
    if (trace.samples.empty()) throw DataError("trace has no samples");
    for (double v : trace.samples)
        if (!std::isfinite(v)) throw DataError("trace contains a non-finite sample");
}

}  // namespace pirtrack
