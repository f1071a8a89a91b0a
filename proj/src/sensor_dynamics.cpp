#include "pirtrack/sensor_dynamics.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "pirtrack/errors.hpp"

namespace pirtrack {

void validate(const SensorParams& p) {
    if (!std::isfinite(p.a_gain) || !std::isfinite(p.b_coef) || !std::isfinite(p.c_coef))
        throw ConfigError("sensor parameters must be finite");
    if (p.a_gain == 0.0) throw ConfigError("sensor a_gain must be non-zero");
    // Roots of B s^2 + C s + 1 lie in the open left half plane iff B, C > 0.
    if (!(p.b_coef > 0.0) || !(p.c_coef > 0.0))
        throw UnstableParams("sensor poles not in the left half plane (need b_coef > 0 and c_coef > 0), got B=" +
                             std::to_string(p.b_coef) + " C=" + std::to_string(p.c_coef));
}

std::complex<double> analog_response(const SensorParams& p, double omega) {
    const std::complex<double> s(0.0, omega);
    return p.a_gain * s / (p.b_coef * s * s + p.c_coef * s + 1.0);
}

std::complex<double> DigitalFilter::response(double w) const {
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = z1 * z1;
    return (feedforward[0] + feedforward[1] * z1 + feedforward[2] * z2) /
           (feedback[0] + feedback[1] * z1 + feedback[2] * z2);
}

DigitalFilter discretize(const SensorParams& p, double sample_rate, bool prewarp) {
    validate(p);
    if (!(sample_rate >= 20.0)) throw ConfigError("sample_rate must be >= 20 Hz");
    double k = 2.0 * sample_rate;
    if (prewarp) {
        const double w0 = 1.0 / std::sqrt(p.b_coef);
        k = w0 / std::tan(w0 / (2.0 * sample_rate));
    }
    // s -> k (1 - z^-1) / (1 + z^-1)
    const double bk2 = p.b_coef * k * k;
    const double ck = p.c_coef * k;
    const double a0 = bk2 + ck + 1.0;
    DigitalFilter f;
    f.feedforward = {p.a_gain * k / a0, 0.0, -p.a_gain * k / a0};
    f.feedback = {1.0, (2.0 - 2.0 * bk2) / a0, (bk2 - ck + 1.0) / a0};
    return f;
}

std::vector<double> apply_filter(const DigitalFilter& f, const std::vector<double>& x) {
    const auto& b = f.feedforward;
    const auto& a = f.feedback;
    std::vector<double> y(x.size());
    // transposed direct form II, zero initial state
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double yi = b[0] * x[i] + s1;
        s1 = b[1] * x[i] - a[1] * yi + s2;
        s2 = b[2] * x[i] - a[2] * yi;
        y[i] = yi;
    }
    return y;
}

SignalTrace simulate_output(const SignalTrace& dhf, const SensorParams& p) {
    validate(dhf);
    const DigitalFilter f = discretize(p, dhf.sample_rate);
    return {apply_filter(f, dhf.samples), dhf.sample_rate, dhf.t0};
}

SignalTrace step_response(const SensorParams& p, double duration, double sample_rate) {
    if (!(duration > 0.0)) throw ConfigError("step_response duration must be > 0");
    const auto n = static_cast<std::size_t>(std::max<long long>(1, std::llround(duration * sample_rate)));
    const DigitalFilter f = discretize(p, sample_rate);
    return {apply_filter(f, std::vector<double>(n, 1.0)), sample_rate, 0.0};
}

namespace {

struct FitData {
    const std::vector<SignalTrace>* traces;
    std::size_t n_samples;
};

SensorParams unpack(const gsl_vector* v) {
    return {gsl_vector_get(v, 0), std::exp(gsl_vector_get(v, 1)), std::exp(gsl_vector_get(v, 2))};
}

double sse(const SensorParams& p, const std::vector<SignalTrace>& traces) {
    double total = 0.0;
    for (const auto& tr : traces) {
        const DigitalFilter f = discretize(p, tr.sample_rate);
        const auto model = apply_filter(f, std::vector<double>(tr.size(), 1.0));
        for (std::size_t i = 0; i < tr.size(); ++i) {
            const double r = model[i] - tr.samples[i];
            total += r * r;
        }
    }
    return total;
}

double objective(const gsl_vector* v, void* params) {
    const auto* data = static_cast<const FitData*>(params);
    const SensorParams p = unpack(v);
    if (p.a_gain == 0.0 || !std::isfinite(p.b_coef) || !std::isfinite(p.c_coef) || p.b_coef <= 0.0 ||
        p.c_coef <= 0.0)
        return GSL_POSINF;
    return sse(p, *data->traces);
}

}  // namespace

IdentifyResult identify_params(const std::vector<SignalTrace>& step_traces, const SensorParams& initial_guess,
                               const IdentifyOptions& opts) {
    if (step_traces.empty()) throw DataError("identify_params needs at least one trace");
    for (const auto& t : step_traces) {
        validate(t);
        if (t.sample_rate != step_traces.front().sample_rate)
            throw DataError("identify_params traces must share a sample rate");
    }
    validate(initial_guess);

    FitData data{&step_traces, 0};
    for (const auto& t : step_traces) data.n_samples += t.size();

    gsl_set_error_handler_off();
    gsl_multimin_function fn{&objective, 3, &data};

    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(3), &gsl_vector_free);
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> step(gsl_vector_alloc(3), &gsl_vector_free);
    gsl_vector_set(x.get(), 0, initial_guess.a_gain);
    gsl_vector_set(x.get(), 1, std::log(initial_guess.b_coef));
    gsl_vector_set(x.get(), 2, std::log(initial_guess.c_coef));
    gsl_vector_set(step.get(), 0, 0.2 * std::abs(initial_guess.a_gain));
    gsl_vector_set(step.get(), 1, 0.3);
    gsl_vector_set(step.get(), 2, 0.3);

    std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> solver(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3), &gsl_multimin_fminimizer_free);
    gsl_multimin_fminimizer_set(solver.get(), &fn, x.get(), step.get());

    int iter = 0;
    int status = GSL_CONTINUE;
    while (status == GSL_CONTINUE && iter < opts.max_iterations) {
        ++iter;
        if (gsl_multimin_fminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
        status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver.get()), opts.size_tolerance);
    }
    const double fmin = gsl_multimin_fminimizer_minimum(solver.get());
    // A simplex that collapsed onto a zero-residual fit is done even if the size test lags.
    const bool exact = fmin <= 1e-20 * static_cast<double>(data.n_samples);
    if (status != GSL_SUCCESS && !exact)
        throw NoConvergence("simplex did not converge within " + std::to_string(opts.max_iterations) +
                            " iterations (objective " + std::to_string(fmin) + ")");

    IdentifyResult res;
    res.params = unpack(gsl_multimin_fminimizer_x(solver.get()));
    try {
        validate(res.params);
    } catch (const ConfigError& e) {
        throw UnstableParams(std::string("identified parameters are not physical: ") + e.what());
    }
    res.residual_rms = std::sqrt(fmin / static_cast<double>(data.n_samples));
    res.iterations = iter;
    return res;
}

std::size_t detect_onset(const std::vector<double>& v, std::size_t baseline, double k) {
    if (v.size() <= baseline || baseline < 2) return 0;
    double mean = 0.0;
    for (std::size_t i = 0; i < baseline; ++i) mean += v[i];
    mean /= static_cast<double>(baseline);
    double var = 0.0;
    for (std::size_t i = 0; i < baseline; ++i) var += (v[i] - mean) * (v[i] - mean);
    const double sd = std::sqrt(var / static_cast<double>(baseline - 1));
    for (std::size_t i = baseline; i < v.size(); ++i)
        if (std::abs(v[i] - mean) > k * sd) return i;
    return 0;
}

}  // namespace pirtrack
