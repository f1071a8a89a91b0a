#include <doctest.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>

#include "helpers.hpp"
#include "pirtrack/errors.hpp"
#include "pirtrack/io.hpp"

using namespace pirtrack;
namespace fs = std::filesystem;

namespace {

void put(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p) << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

bool message_mentions(const std::function<void()>& f, const std::string& needle) {
    try {
        f();
    } catch (const Error& e) {
        return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
}

}  // namespace

TEST_CASE("doubles survive text") {
    for (double v : {0.0, -0.0, 1.0 / 3.0, 1e-300, -2.5e300, std::numeric_limits<double>::denorm_min(), 0.1 + 0.2,
                     std::numbers::pi})
        CHECK(parse_double(format_double(v)) == v);
    CHECK(parse_double("+2.5") == 2.5);
    CHECK_THROWS_AS(parse_double("abc"), DataError);
    CHECK_THROWS_AS(parse_double("1.5x"), DataError);
    CHECK_THROWS_AS(parse_double(""), DataError);
}

TEST_CASE("trace CSV round trip is bit-exact") {
    const auto dir = testing::scratch_dir("io_trace");
    SignalTrace s{{0.1, -1.0 / 7.0, 3e-17, 12345.678901234567}, 100.0, 2.0};
    write_trace(dir / "sub" / "a.csv", s, "volts");
    const auto r = read_trace(dir / "sub" / "a.csv");
    CHECK(r.samples == s.samples);
    CHECK(r.sample_rate == 100.0);
    CHECK(r.t0 == 2.0);
    const auto text = slurp(dir / "sub" / "a.csv");
    CHECK(text.rfind("t_s,volts\n", 0) == 0);
    CHECK(text.find('\r') == std::string::npos);
}

TEST_CASE("malformed CSVs are data errors") {
    const auto dir = testing::scratch_dir("io_bad");
    put(dir / "ragged.csv", "t_s,v\n0,1\n0.01\n");
    CHECK_THROWS_AS(read_csv(dir / "ragged.csv"), DataError);
    put(dir / "uneven.csv", "t_s,v\n0,1\n0.01,2\n0.03,3\n");
    CHECK_THROWS_AS(read_trace(dir / "uneven.csv"), DataError);
    put(dir / "text.csv", "t_s,v\n0,1\n0.01,hello\n");
    CHECK_THROWS_AS(read_trace(dir / "text.csv"), DataError);
    CHECK(message_mentions([&] { read_csv(dir / "nope.csv"); }, "nope.csv"));
}

TEST_CASE("observation, truth and track files") {
    const auto dir = testing::scratch_dir("io_obs");
    std::vector<AzimuthObservation> obs(2);
    obs[0] = {"s1", 0.0, 0.5, 0.0855, 1, false};
    obs[1] = {"s2", 0.5, 1.0, 0.171, 2, true};
    write_observations(dir / "obs.csv", obs);
    const auto back = read_observations(dir / "obs.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[1].sensor_id == "s2");
    CHECK(back[1].turning_detected);
    CHECK(back[1].n_extrema == 2);
    // stored in degrees, read back to radians
    CHECK(back[0].theta == doctest::Approx(0.0855).epsilon(1e-12));
    CHECK(read_csv(dir / "obs.csv").header ==
          std::vector<std::string>{"sensor_id", "t_start", "t_end", "theta_deg", "n_extrema", "turning"});

    const auto truth = make_trajectory(parse_scenario("lines", 1), 1.0, 0.01);
    write_truth(dir / "truth.csv", truth);
    const auto t2 = read_truth(dir / "truth.csv");
    CHECK(t2.x == truth.x);
    CHECK(t2.y == truth.y);

    std::vector<TrackPoint> tr{{0.5, {1, 2, 3, 4}}, {1.0, {1.5, 2.5, 3.5, 4.5}}};
    write_track(dir / "track.csv", tr);
    const auto est = read_estimates(dir / "track.csv");
    REQUIRE(est.size() == 2);
    CHECK(est[1].x == 1.5);
    CHECK(read_csv(dir / "track.csv").header == std::vector<std::string>{"t", "x", "y", "vx", "vy"});
}

TEST_CASE("report and cdf files") {
    const auto dir = testing::scratch_dir("io_report");
    EvalReport r;
    r.mean_error = 0.5;
    r.cdf = {{0.0, 0.0}, {0.05, 0.5}, {0.1, 1.0}};
    write_report(dir / "report.csv", r);
    write_cdf(dir / "cdf.csv", r);
    const auto c = read_csv(dir / "cdf.csv");
    CHECK(c.header == std::vector<std::string>{"error_m", "cum_prob"});
    CHECK(parse_double(c.rows.back()[1]) == 1.0);
    const auto rep = read_csv(dir / "report.csv");
    REQUIRE(rep.rows.size() == 5);
    CHECK(rep.rows[0][rep.column("metric")] == "mean_error_m");
    CHECK(parse_double(rep.rows[0][rep.column("value")]) == 0.5);
    CHECK_THROWS_AS(rep.column("nope"), DataError);
}

TEST_CASE("shipped configs load") {
    const auto lens = load_lens_config(testing::config_path("reference_lens.cfg"));
    CHECK(lens.lenses.size() == 10);
    double fs_hz = 0.0;
    const auto p = load_sensor_config(testing::config_path("reference_sensor.cfg"), &fs_hz);
    CHECK(p.a_gain == 1.0);
    CHECK(p.b_coef == 0.01);
    CHECK(fs_hz == 100.0);
    const auto poses = load_poses(testing::config_path("room_poses.cfg"));
    REQUIRE(poses.size() == 4);
    CHECK(poses[2].a == 7.0);
    CHECK(poses[2].orientation == doctest::Approx(-135.0 * testing::kDeg));
    const auto tc = load_tracker_config(testing::config_path("tracker.cfg"));
    CHECK(tc.n_particles >= 100);
    const auto cfg = load_pipeline_config(testing::config_path("pipeline.cfg"));
    CHECK(cfg.lens_path == testing::config_path("reference_lens.cfg"));
    CHECK(cfg.noise_std < 0.0);
}

TEST_CASE("config errors name the offending file or key") {
    const auto dir = testing::scratch_dir("io_cfg");
    put(dir / "unknown.cfg", R"({"a_gain": 1, "b_coef": 0.01, "c_coef": 0.2, "sample_rate_hz": 100, "colour": "red"})");
    CHECK_THROWS_AS(load_sensor_config(dir / "unknown.cfg"), ConfigError);
    CHECK(message_mentions([&] { load_sensor_config(dir / "unknown.cfg"); }, "colour"));

    put(dir / "broken.cfg", "{ not json");
    CHECK(message_mentions([&] { load_sensor_config(dir / "broken.cfg"); }, "broken.cfg"));

    CHECK_THROWS_AS(load_poses(dir / "missing.cfg"), ConfigError);
    CHECK(message_mentions([&] { load_poses(dir / "missing.cfg"); }, "missing.cfg"));

    put(dir / "dup.cfg", R"({"sensors": [{"sensor_id": "a", "a_m": 0, "b_m": 0, "orientation_deg": 0},
                                       {"sensor_id": "a", "a_m": 1, "b_m": 0, "orientation_deg": 0}]})");
    CHECK_THROWS_AS(load_poses(dir / "dup.cfg"), ConfigError);

    put(dir / "wrongtype.cfg", R"({"a_gain": "one", "b_coef": 0.01, "c_coef": 0.2, "sample_rate_hz": 100})");
    CHECK_THROWS_AS(load_sensor_config(dir / "wrongtype.cfg"), ConfigError);

    // a pipeline config pointing at a sensor file that is not there
    auto text = slurp(testing::config_path("pipeline.cfg"));
    const auto at = text.find("reference_sensor.cfg");
    text.replace(at, std::string("reference_sensor.cfg").size(), "no_such_sensor.cfg");
    for (const char* f : {"reference_lens.cfg", "room_poses.cfg", "tracker.cfg"})
        fs::copy_file(testing::config_path(f), dir / f, fs::copy_options::overwrite_existing);
    put(dir / "pipeline.cfg", text);
    CHECK_THROWS_AS(load_pipeline_config(dir / "pipeline.cfg"), ConfigError);
    CHECK(message_mentions([&] { load_pipeline_config(dir / "pipeline.cfg"); }, "no_such_sensor.cfg"));
}
