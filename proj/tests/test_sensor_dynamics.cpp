#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "pirtrack/errors.hpp"
#include "pirtrack/rng.hpp"
#include "pirtrack/sensor_dynamics.hpp"

using namespace pirtrack;

namespace {

const SensorParams kRef{1.0, 0.01, 0.2};
// same C/B ratio family but underdamped: poles at -10 +- j 9.95
const SensorParams kUnder{1.0, 0.005025, 0.1005};

// Impulse response of A / (B s^2 + C s + 1), i.e. the step response of G.
double analytic_step(const SensorParams& p, double t) {
    const double sigma = p.c_coef / (2.0 * p.b_coef);
    const double disc = 1.0 / p.b_coef - sigma * sigma;
    if (std::abs(disc) < 1e-9) return p.a_gain / p.b_coef * t * std::exp(-sigma * t);
    const double wd = std::sqrt(disc);
    return p.a_gain / (p.b_coef * wd) * std::exp(-sigma * t) * std::sin(wd * t);
}

double rel_rms(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("digital filter has zero DC gain") {
    for (const auto& p : {kRef, kUnder, SensorParams{-2.0, 0.3, 0.05}}) {
        const auto f = discretize(p, 100.0);
        CHECK(std::abs(f.response(0.0)) < 1e-15);
        CHECK(f.feedback[0] == 1.0);
    }
}

TEST_CASE("bilinear response matches G(jw) at warped frequencies") {
    const double fs = 100.0;
    const auto f = discretize(kRef, fs);
    for (double w = 0.5; w <= 2.0 * std::numbers::pi * fs / 10.0; w += 0.5) {
        const double wd = 2.0 * std::atan(w / (2.0 * fs));
        const double g = std::abs(analog_response(kRef, w));
        CHECK(std::abs(std::abs(f.response(wd)) - g) <= 0.01 * g);
    }
}

TEST_CASE("pre-warped discretization is exact at the natural frequency") {
    const double w0 = 1.0 / std::sqrt(kUnder.b_coef);
    const auto f = discretize(kUnder, 20.0, true);
    const double g = std::abs(analog_response(kUnder, w0));
    CHECK(std::abs(f.response(w0 / 20.0)) == doctest::Approx(g).epsilon(1e-9));
}

TEST_CASE("unstable or invalid parameters are rejected") {
    CHECK_THROWS_AS(discretize({1.0, 0.01, -0.2}, 100.0), UnstableParams);
    CHECK_THROWS_AS(discretize({1.0, -0.01, 0.2}, 100.0), UnstableParams);
    CHECK_THROWS_AS(discretize({0.0, 0.01, 0.2}, 100.0), ConfigError);
    CHECK_THROWS_AS(discretize(kRef, 10.0), ConfigError);
}

TEST_CASE("zero input gives zero output, constant input decays") {
    SignalTrace z{std::vector<double>(500, 0.0), 100.0, 0.0};
    for (double v : simulate_output(z, kRef).samples) CHECK(v == 0.0);

    SignalTrace c{std::vector<double>(1000, 3.0), 100.0, 1.5};
    const auto y = simulate_output(c, kRef);
    CHECK(y.t0 == 1.5);
    CHECK(y.size() == c.size());
    CHECK(std::abs(y.samples.back()) < 1e-6);
}

TEST_CASE("step response equals the closed-form impulse response of A/(Bs^2+Cs+1)") {
    // The bilinear map integrates the input trapezoidally, so a sampled step
    // rises over the interval before sample 0: it acts as a step at -T/2.
    for (const auto& p : {kRef, kUnder}) {
        const auto s = step_response(p, 3.0, 100.0);
        std::vector<double> exact(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) exact[i] = analytic_step(p, s.time(i) + 0.005);
        CHECK(rel_rms(s.samples, exact) < 0.02);
    }
    // without the alignment the mismatch shrinks with the step size
    for (const auto& p : {kRef, kUnder}) {
        const auto s = step_response(p, 3.0, 1000.0);
        std::vector<double> exact(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) exact[i] = analytic_step(p, s.time(i));
        CHECK(rel_rms(s.samples, exact) < 0.02);
    }
}

TEST_CASE("step response peak time and value") {
    // critically damped: peak at t = 1/sigma, value A/(B sigma e)
    {
        const auto s = step_response(kRef, 2.0, 1000.0);
        std::size_t k = 0;
        for (std::size_t i = 1; i < s.size(); ++i)
            if (s.samples[i] > s.samples[k]) k = i;
        CHECK(s.time(k) == doctest::Approx(0.1).epsilon(0.02));
        CHECK(s.samples[k] == doctest::Approx(100.0 * 0.1 * std::exp(-1.0)).epsilon(0.02));
    }
    // underdamped: tan(wd t) = wd / sigma
    {
        const double sigma = 10.0, wd = std::sqrt(1.0 / kUnder.b_coef - 100.0);
        const double tp = std::atan(wd / sigma) / wd;
        const auto s = step_response(kUnder, 2.0, 1000.0);
        std::size_t k = 0;
        for (std::size_t i = 1; i < s.size(); ++i)
            if (s.samples[i] > s.samples[k]) k = i;
        CHECK(s.time(k) == doctest::Approx(tp).epsilon(0.02));
        CHECK(s.samples[k] == doctest::Approx(analytic_step(kUnder, tp)).epsilon(0.02));
    }
}

TEST_CASE("step response decays and is linear in A") {
    const auto s = step_response(kRef, 5.0, 100.0);
    CHECK(std::abs(s.samples.back()) < 1e-10);
    const auto d = step_response({2.0, 0.01, 0.2}, 5.0, 100.0);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(d.samples[i] == 2.0 * s.samples[i]);
}

TEST_CASE("identification recovers noiseless parameters within 1%") {
    const auto tr = step_response(kRef, 2.0, 100.0);
    const auto r = identify_params({tr}, {0.5, 0.005, 0.1});
    CHECK(r.params.a_gain == doctest::Approx(1.0).epsilon(0.01));
    CHECK(r.params.b_coef == doctest::Approx(0.01).epsilon(0.01));
    CHECK(r.params.c_coef == doctest::Approx(0.2).epsilon(0.01));
    CHECK(r.residual_rms < 1e-6);
}

TEST_CASE("identification from 10 noisy traces within 5%") {
    const auto clean = step_response(kRef, 2.0, 100.0);
    double peak = 0.0;
    for (double v : clean.samples) peak = std::max(peak, std::abs(v));
    std::vector<SignalTrace> traces;
    for (std::uint64_t k = 0; k < 10; ++k) {
        auto t = clean;
        Stream s(2024, {k});
        for (double& v : t.samples) v += 0.05 * peak * s.normal();
        traces.push_back(t);
    }
    const auto r = identify_params(traces, {0.5, 0.005, 0.1});
    CHECK(r.params.a_gain == doctest::Approx(1.0).epsilon(0.05));
    CHECK(r.params.b_coef == doctest::Approx(0.01).epsilon(0.05));
    CHECK(r.params.c_coef == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("identification started at the truth stays there") {
    const auto tr = step_response(kUnder, 2.0, 100.0);
    const auto r = identify_params({tr}, kUnder);
    CHECK(r.params.a_gain == doctest::Approx(kUnder.a_gain).epsilon(1e-6));
    CHECK(r.params.b_coef == doctest::Approx(kUnder.b_coef).epsilon(1e-6));
    CHECK(r.params.c_coef == doctest::Approx(kUnder.c_coef).epsilon(1e-6));
}

TEST_CASE("identification errors") {
    CHECK_THROWS_AS(identify_params({}, kRef), DataError);
    const auto a = step_response(kRef, 1.0, 100.0);
    const auto b = step_response(kRef, 1.0, 200.0);
    CHECK_THROWS_AS(identify_params({a, b}, kRef), DataError);
    IdentifyOptions few;
    few.max_iterations = 3;
    CHECK_THROWS_AS(identify_params({a}, {0.5, 0.005, 0.1}, few), NoConvergence);
}

TEST_CASE("onset detection") {
    std::vector<double> v(200, 0.0);
    Stream s(5, {});
    for (double& x : v) x = 0.01 * s.normal();
    for (std::size_t i = 120; i < v.size(); ++i) v[i] += 1.0;
    CHECK(detect_onset(v) == 120);
    CHECK(detect_onset(std::vector<double>(20, 0.0)) == 0);
}
