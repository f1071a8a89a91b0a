#include "pirtrack/dhf_recovery.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <numeric>

#include "pirtrack/errors.hpp"

namespace pirtrack {

namespace {

// The FFTW planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// Peak of |G(jw)| for A s / (B s^2 + C s + 1) is |A| / C at w = 1/sqrt(B); the
// bilinear map keeps magnitudes, so the digital peak is the same.
double peak_gain(const SensorParams& p) { return std::abs(p.a_gain) / p.c_coef; }

std::vector<double> tikhonov_inverse(const std::vector<double>& padded, const DigitalFilter& filt, double lambda_abs) {
    const int n = static_cast<int>(padded.size());
    const int nc = n / 2 + 1;
    std::vector<double> buf(padded);
    std::vector<std::complex<double>> spec(static_cast<std::size_t>(nc));
    auto* cspec = reinterpret_cast<fftw_complex*>(spec.data());

    fftw_plan fwd, inv;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fwd = fftw_plan_dft_r2c_1d(n, buf.data(), cspec, FFTW_ESTIMATE);
        inv = fftw_plan_dft_c2r_1d(n, cspec, buf.data(), FFTW_ESTIMATE);
    }
    fftw_execute(fwd);
    spec[0] = 0.0;
    for (int k = 1; k < nc; ++k) {
        const double w = 2.0 * std::numbers::pi * k / n;
        const std::complex<double> h = filt.response(w);
        spec[static_cast<std::size_t>(k)] *= std::conj(h) / (std::norm(h) + lambda_abs);
    }
    fftw_execute(inv);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(inv);
    }
    for (double& v : buf) v /= n;
    return buf;
}

std::vector<double> recover_segment(const std::vector<double>& y, const DigitalFilter& filt, double lambda_abs,
                                    std::size_t pad) {
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    std::vector<double> padded(y.size() + 2 * pad, mean);
    std::copy(y.begin(), y.end(), padded.begin() + static_cast<std::ptrdiff_t>(pad));
    auto x = tikhonov_inverse(padded, filt, lambda_abs);
    return {x.begin() + static_cast<std::ptrdiff_t>(pad), x.begin() + static_cast<std::ptrdiff_t>(pad + y.size())};
}

}  // namespace

void validate(const InverseFilterSpec& spec) {
    if (!(spec.reg_lambda > 0.0)) throw ConfigError("inverse filter lambda must be > 0");
    if (!(spec.block_seconds > 0.0)) throw ConfigError("inverse filter block length must be > 0");
    validate(spec.params);
}

double inverse_gain_bound(const InverseFilterSpec& spec) {
    validate(spec);
    // max over u in [0, M] of u / (u^2 + lambda M^2), attained at u = sqrt(lambda) M
    return 1.0 / (2.0 * std::sqrt(spec.reg_lambda) * peak_gain(spec.params));
}

SignalTrace recover_dhf(const SignalTrace& output, const InverseFilterSpec& spec) {
    validate(spec);
    if (output.size() < 16) throw TraceTooShort("recover_dhf needs at least 16 samples");
    validate(output);
    if (output.sample_rate != spec.sample_rate)
        throw DataError("trace sample rate does not match the inverse filter sample rate");

    const DigitalFilter filt = discretize(spec.params, spec.sample_rate);
    const double m = peak_gain(spec.params);
    const auto pad = static_cast<std::size_t>(std::llround(spec.block_seconds * spec.sample_rate));
    auto x = recover_segment(output.samples, filt, spec.reg_lambda * m * m, pad);

    // zero-mean contract on the returned span
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    for (double& v : x) v -= mean;
    return {std::move(x), output.sample_rate, output.t0};
}

SignalTrace recover_dhf_blocks(const SignalTrace& output, const InverseFilterSpec& spec) {
    validate(spec);
    if (output.size() < 16) throw TraceTooShort("recover_dhf needs at least 16 samples");
    validate(output);
    if (output.sample_rate != spec.sample_rate)
        throw DataError("trace sample rate does not match the inverse filter sample rate");

    const DigitalFilter filt = discretize(spec.params, spec.sample_rate);
    const double m = peak_gain(spec.params);
    const double lam = spec.reg_lambda * m * m;
    const auto block = std::max<std::size_t>(16, static_cast<std::size_t>(std::llround(spec.block_seconds * spec.sample_rate)) / 2 * 2);
    const std::size_t hop = block / 2;
    // room for the inverse filter's slow tail on either side of a block
    const std::size_t pad = 4 * block;
    const auto n = static_cast<long long>(output.size());
    const double global_mean = std::accumulate(output.samples.begin(), output.samples.end(), 0.0) / static_cast<double>(n);

    // periodic Hann: shifted copies at half-block hops sum to one, so the
    // windowed blocks add back up to the input and, the inverse being linear,
    // their inverses add up to the inverse of the whole trace
    std::vector<double> win(block);
    for (std::size_t i = 0; i < block; ++i)
        win[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(block));

    std::vector<double> acc(output.size(), 0.0);
    std::vector<double> padded(block + 2 * pad);
    for (long long start = -static_cast<long long>(hop); start < n; start += static_cast<long long>(hop)) {
        std::fill(padded.begin(), padded.end(), 0.0);
        for (std::size_t i = 0; i < block; ++i) {
            const long long j = start + static_cast<long long>(i);
            const double v = (j >= 0 && j < n) ? output.samples[static_cast<std::size_t>(j)] : global_mean;
            padded[pad + i] = win[i] * (v - global_mean);
        }
        const auto x = tikhonov_inverse(padded, filt, lam);
        for (std::size_t i = 0; i < padded.size(); ++i) {
            const long long j = start + static_cast<long long>(i) - static_cast<long long>(pad);
            if (j >= 0 && j < n) acc[static_cast<std::size_t>(j)] += x[i];
        }
    }
    const double mean = std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
    for (double& v : acc) v -= mean;
    return {std::move(acc), output.sample_rate, output.t0};
}

}  // namespace pirtrack
