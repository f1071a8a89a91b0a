#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "pirtrack/azimuth.hpp"
#include "pirtrack/errors.hpp"
#include "pirtrack/rng.hpp"
#include "pirtrack/scenario.hpp"

using namespace pirtrack;
using testing::kDeg;

namespace {

std::vector<Extremum> with_prominences(std::initializer_list<double> p) {
    std::vector<Extremum> out;
    bool peak = true;
    for (double v : p) {
        out.push_back({0.0, 0.0, v, peak ? ExtremumKind::Peak : ExtremumKind::Trough, 0});
        peak = !peak;
    }
    return out;
}

SignalTrace noiseless_dhf(const Trajectory& traj, const BodyModel& body = {}) {
    return synth_dhf(traj, origin_pose(testing::reference_layout().theta_c), testing::reference_layout(), body);
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST_CASE("constant trace has no extrema") {
    CHECK(detect_extrema({std::vector<double>(300, 2.5), 100.0, 0.0}, 1e-6).empty());
    CHECK_THROWS_AS(detect_extrema({std::vector<double>(10, 0.0), 100.0, 0.0}, 0.0), ConfigError);
}

TEST_CASE("two-period sinusoid: two peaks and two troughs, alternating") {
    const double amp = 3.0;
    SignalTrace s{std::vector<double>(401), 100.0, 0.0};
    for (std::size_t i = 0; i < s.size(); ++i) s.samples[i] = amp * std::sin(2.0 * std::numbers::pi * i / 200.0);
    const auto e = detect_extrema(s, 0.1);
    REQUIRE(e.size() == 4);
    CHECK(e[0].kind == ExtremumKind::Peak);
    CHECK(e[1].kind == ExtremumKind::Trough);
    CHECK(e[2].kind == ExtremumKind::Peak);
    CHECK(e[3].kind == ExtremumKind::Trough);
    CHECK(e[0].index == 50);
    CHECK(e[3].index == 350);
    // interior extrema drop to the opposite swing on both sides
    CHECK(e[1].prominence == doctest::Approx(2.0 * amp));
    CHECK(e[2].prominence == doctest::Approx(2.0 * amp));
    // the outer ones only reach the trace's end value (0) on their open side
    CHECK(e[0].prominence == doctest::Approx(amp));
}

TEST_CASE("prominence on a hand-made profile") {
    //                     0  1  2  3  4  5  6  7  8
    const std::vector<double> x{0, 5, 1, 3, 2, 8, 0, 4, 0};
    const auto pk = local_maxima(x);
    REQUIRE(pk == std::vector<std::size_t>{1, 3, 5, 7});
    const auto p = peak_prominences(x, pk);
    CHECK(p[0] == 4.0);  // towards 8 the lowest point is 1, left side reaches 0
    CHECK(p[1] == 1.0);  // saddle 2 towards 8, 1 towards 5
    CHECK(p[2] == 8.0);  // global max: both ends reach 0
    CHECK(p[3] == 4.0);
}

TEST_CASE("flat tops report their middle sample") {
    const std::vector<double> x{0, 1, 2, 2, 2, 1, 0, 3, 3, 0};
    CHECK(local_maxima(x) == std::vector<std::size_t>{3, 7});
}

TEST_CASE("turning points by prominence ratio") {
    CHECK(detect_turning_points(with_prominences({10, 9, 4, 9}), 0.5) == std::vector<std::size_t>{2});
    // the final extremum's prominence is cut short by the trace end
    CHECK(detect_turning_points(with_prominences({10, 9, 4}), 0.5).empty());
    CHECK(detect_turning_points({}, 0.5).empty());
    CHECK(detect_turning_points(with_prominences({3}), 0.5).empty());
    CHECK_THROWS_AS(detect_turning_points({}, 1.0), ConfigError);
}

TEST_CASE("azimuth change from counts") {
    const double thc = 4.9 * kDeg;
    CHECK(azimuth_change(with_prominences({1, 1, 1, 1, 1, 1, 1, 1}), {}, thc) / kDeg == doctest::Approx(39.2));
    // 4 extrema, the turning extremum, 4 more
    CHECK(azimuth_change(with_prominences({1, 1, 1, 1, 0.2, 1, 1, 1, 1}), {4}, thc) == 0.0);
    CHECK(azimuth_change({}, {}, thc) == 0.0);
    // two turns: sections 3 | 1 | 2 -> |(3 + 2) - 1| = 4
    CHECK(azimuth_change(with_prominences({1, 1, 1, 0.1, 1, 0.1, 1, 1}), {3, 5}, thc) / kDeg == doctest::Approx(4 * 4.9));
    CHECK_THROWS_AS(azimuth_change({}, {}, 0.0), ConfigError);
}

TEST_CASE("rotating source crosses 20 zones: 10 peaks and 10 troughs") {
    const auto traj = make_trajectory(parse_scenario("rotating", 1), 1.0, 0.01);
    const auto d = noiseless_dhf(traj, {kRotatingSourceRadius, 1.0, BodyProfile::RaisedCosine});
    const auto e = detect_extrema(d, 0.05 * max_abs(d.samples));
    int peaks = 0, troughs = 0;
    for (const auto& x : e) (x.kind == ExtremumKind::Peak ? peaks : troughs)++;
    CHECK(peaks == 10);
    CHECK(troughs == 10);
}

TEST_CASE("arc crossing exactly two zones per window") {
    const auto& z = testing::reference_layout();
    const double thc = z.theta_c;
    // zone axes sit at 2.45 + 4.9 k deg, so windows spanning [-29.4 + 9.8 k,
    // -19.6 + 9.8 k] deg each hold two axes
    const double r = 3.0;
    const double omega = 2.0 * thc / 0.5;
    Segment arc;
    arc.kind = Segment::Kind::Arc;
    arc.r = r;
    arc.a0 = -6.0 * thc;
    arc.a1 = 6.0 * thc;
    const auto walk = trajectory_from_segments({arc}, true, 1, r * omega, 0.01, "arc2");
    const auto d = noiseless_dhf(walk);
    const auto obs = windowed_azimuth(d, 0.5, thc, 0.05 * max_abs(d.samples), "s1");
    REQUIRE(obs.size() == 6);
    for (const auto& o : obs) {
        CHECK(o.theta == doctest::Approx(2.0 * thc));
        CHECK(o.n_extrema == 2);
        CHECK(o.window_end - o.window_start == doctest::Approx(0.5));
    }
}

TEST_CASE("pure noise under a high threshold gives zero everywhere") {
    SignalTrace s{std::vector<double>(1000), 100.0, 0.0};
    Stream r(4, {});
    for (double& v : s.samples) v = 0.01 * r.normal();
    for (const auto& o : windowed_azimuth(s, 0.5, 4.9 * kDeg, 1.0, "s1")) CHECK(o.theta == 0.0);
}

TEST_CASE("noiseless monotone arcs: per-window error within one zone") {
    const auto& z = testing::reference_layout();
    for (double r : {1.5, 3.0, 4.5}) {
        for (double v : {0.6, 1.0, 1.4}) {
            Segment arc;
            arc.kind = Segment::Kind::Arc;
            arc.r = r;
            arc.a0 = -40.0 * kDeg;
            arc.a1 = 40.0 * kDeg;
            const auto walk = trajectory_from_segments({arc}, true, 1, v, 0.01, "mono");
            const auto pose = origin_pose(z.theta_c);
            const auto d = synth_dhf(walk, pose, z, {});
            const auto obs = windowed_azimuth(d, 0.5, z.theta_c, 0.05 * max_abs(d.samples), "s1");
            const auto truth = true_azimuth_series(walk, pose, 0.5);
            REQUIRE(obs.size() == truth.size());
            for (std::size_t k = 0; k < obs.size(); ++k) CHECK(std::abs(obs[k].theta - truth[k].theta) <= z.theta_c + 1e-12);
        }
    }
}

TEST_CASE("V-turn: one turning point at the turn, whole-trace theta 0") {
    const auto& z = testing::reference_layout();
    const auto traj = make_trajectory(parse_scenario("vturn", 1), 1.0, 0.01);
    const double t_turn = traj.duration() / 2.0;
    const auto d = noiseless_dhf(traj);
    const auto e = detect_extrema(d, 0.05 * max_abs(d.samples));
    const auto turns = detect_turning_points(e);
    REQUIRE(turns.size() == 1);
    CHECK(std::abs(e[turns[0]].time - t_turn) <= 0.2);
    CHECK(azimuth_change(e, turns, z.theta_c) == 0.0);
}

TEST_CASE("threshold policy") {
    SignalTrace s{std::vector<double>(2000), 100.0, 0.0};
    Stream r(8, {});
    for (double& v : s.samples) v = 0.1 * r.normal();
    // white noise: the differenced MAD estimate recovers sigma
    CHECK(noise_floor(s) == doctest::Approx(0.1).epsilon(0.15));
    ProminencePolicy p;
    CHECK(min_prominence(s, p) == doctest::Approx(6.0 * noise_floor(s, p)));
    p.fixed = 0.42;
    CHECK(min_prominence(s, p) == 0.42);
}
