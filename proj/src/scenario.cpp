#include "pirtrack/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pirtrack/errors.hpp"
#include "pirtrack/rng.hpp"

namespace pirtrack {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Segment line(double x0, double y0, double x1, double y1) {
    Segment s;
    s.kind = Segment::Kind::Line;
    s.x0 = x0, s.y0 = y0, s.x1 = x1, s.y1 = y1;
    return s;
}

Segment arc(double cx, double cy, double r, double a0_deg, double a1_deg) {
    Segment s;
    s.kind = Segment::Kind::Arc;
    s.cx = cx, s.cy = cy, s.r = r, s.a0 = a0_deg * kDeg, s.a1 = a1_deg * kDeg;
    return s;
}

Segment polar_line(double r0, double a0_deg, double r1, double a1_deg) {
    return line(r0 * std::cos(a0_deg * kDeg), r0 * std::sin(a0_deg * kDeg), r1 * std::cos(a1_deg * kDeg),
                r1 * std::sin(a1_deg * kDeg));
}

std::vector<Segment> polyline(const std::vector<std::pair<double, double>>& pts) {
    std::vector<Segment> out;
    for (std::size_t i = 1; i < pts.size(); ++i)
        out.push_back(line(pts[i - 1].first, pts[i - 1].second, pts[i].first, pts[i].second));
    return out;
}

double wrap_pi(double a) {
    a = std::fmod(a + std::numbers::pi, 2.0 * std::numbers::pi);
    if (a < 0) a += 2.0 * std::numbers::pi;
    return a - std::numbers::pi;
}

// Mass of the body's emission falling in [lo, hi] when the body spans
// [c - h, c + h].
double overlap_fraction(double c, double h, double lo, double hi, BodyProfile profile) {
    const double a = std::max(lo, c - h);
    const double b = std::min(hi, c + h);
    if (b <= a) return 0.0;
    if (a == c - h && b == c + h) return 1.0;
    if (profile == BodyProfile::Uniform) return (b - a) / (2.0 * h);
    auto cdf = [&](double u) {
        const double z = (u - c) / h;
        return 0.5 * (z + 1.0) + std::sin(std::numbers::pi * z) / (2.0 * std::numbers::pi);
    };
    return cdf(b) - cdf(a);
}

}  // namespace

double Segment::length() const {
    if (kind == Kind::Line) return std::hypot(x1 - x0, y1 - y0);
    return r * std::abs(a1 - a0);
}

void Segment::point_at(double s, double& px, double& py) const {
    const double len = length();
    const double f = len > 0.0 ? std::clamp(s / len, 0.0, 1.0) : 0.0;
    if (kind == Kind::Line) {
        px = x0 + f * (x1 - x0);
        py = y0 + f * (y1 - y0);
    } else {
        const double a = a0 + f * (a1 - a0);
        px = cx + r * std::cos(a);
        py = cy + r * std::sin(a);
    }
}

Segment Segment::reversed() const {
    Segment s = *this;
    std::swap(s.x0, s.x1);
    std::swap(s.y0, s.y1);
    std::swap(s.a0, s.a1);
    return s;
}

void Trajectory::position_at(double time, double& px, double& py) const {
    if (t.empty()) throw DataError("empty trajectory");
    if (time <= t.front()) {
        px = x.front(), py = y.front();
        return;
    }
    if (time >= t.back()) {
        px = x.back(), py = y.back();
        return;
    }
    const double f = (time - t.front()) / dt;
    auto i = static_cast<std::size_t>(std::floor(f));
    i = std::min(i, t.size() - 2);
    const double w = std::clamp(f - static_cast<double>(i), 0.0, 1.0);
    px = x[i] + w * (x[i + 1] - x[i]);
    py = y[i] + w * (y[i + 1] - y[i]);
}

std::vector<std::string> scenario_families() {
    return {"arcs",   "parallel", "turns",  "lines",  "square",   "zshape",
            "mshape", "hsnake",   "vsnake", "rotating", "vturn", "fastwalk"};
}

bool is_room_scenario(const std::string& f) {
    return f == "lines" || f == "square" || f == "zshape" || f == "mshape" || f == "hsnake" || f == "vsnake";
}

int trace_count(const std::string& f) { return (f == "arcs" || f == "parallel" || f == "turns") ? 3 : 1; }

ScenarioSpec parse_scenario(const std::string& name, int repeats) {
    ScenarioSpec spec;
    spec.repeats = repeats;
    const auto colon = name.find(':');
    spec.family = name.substr(0, colon);
    if (colon != std::string::npos) {
        try {
            spec.trace = std::stoi(name.substr(colon + 1));
        } catch (const std::exception&) {
            throw UnknownScenario("bad trace index in scenario '" + name + "'");
        }
    }
    const auto fams = scenario_families();
    if (std::find(fams.begin(), fams.end(), spec.family) == fams.end())
        throw UnknownScenario("unknown scenario '" + name + "'");
    if (spec.trace < 1 || spec.trace > trace_count(spec.family))
        throw UnknownScenario("scenario '" + spec.family + "' has no trace " + std::to_string(spec.trace));
    if (repeats < 1) throw ConfigError("scenario repeats must be >= 1");
    return spec;
}

std::vector<Segment> scenario_path(const ScenarioSpec& spec, bool& closed) {
    closed = false;
    const std::string& f = spec.family;
    const int k = spec.trace;

    // single sensor at the origin, boresight +x
    if (f == "arcs") {
        const double r[] = {1.5, 3.0, 4.5};
        return {arc(0, 0, r[k - 1], -35.0, 35.0)};
    }
    if (f == "parallel") {
        // nearly radial legs; the middle one hardly changes azimuth
        if (k == 1) return {polar_line(1.5, -20.0, 5.5, -12.0)};
        if (k == 2) return {polar_line(1.5, 5.0, 5.5, 5.5)};
        return {polar_line(1.5, 22.0, 5.5, 32.0)};
    }
    if (f == "turns") {
        // A -> B is a chord at about 3 m; at B the walker turns to C_k
        const double ax = 3.0 * std::cos(-25.0 * kDeg), ay = 3.0 * std::sin(-25.0 * kDeg);
        const double bx = 3.0, by = 0.0;
        const double ux = (bx - ax) / std::hypot(bx - ax, by - ay), uy = (by - ay) / std::hypot(bx - ax, by - ay);
        const double turn_deg[] = {150.0, -90.0, 45.0};
        const double a = turn_deg[k - 1] * kDeg;
        const double cx = bx + 1.3 * (ux * std::cos(a) - uy * std::sin(a));
        const double cy = by + 1.3 * (ux * std::sin(a) + uy * std::cos(a));
        return {line(ax, ay, bx, by), line(bx, by, cx, cy)};
    }
    if (f == "rotating") return {arc(0, 0, kRotatingRadius, -60.0, 60.0)};
    if (f == "vturn") {
        // out across four zones of the reference layout and back, turning
        // halfway between the fourth and fifth zone axes
        return {arc(0, 0, 3.0, -24.5, -4.9)};
    }
    if (f == "fastwalk") return {polar_line(5.0, -30.0, 5.0, 30.0)};

    // 7 m x 7 m room
    if (f == "lines") return polyline({{1.0, 3.5}, {6.0, 3.5}});
    if (f == "square") {
        closed = true;
        return polyline({{1.5, 1.5}, {5.5, 1.5}, {5.5, 5.5}, {1.5, 5.5}, {1.5, 1.5}});
    }
    if (f == "zshape") return polyline({{1.5, 5.5}, {5.5, 5.5}, {1.5, 1.5}, {5.5, 1.5}});
    if (f == "mshape") return polyline({{1.5, 1.5}, {1.5, 5.5}, {3.5, 3.0}, {5.5, 5.5}, {5.5, 1.5}});
    const double r1 = 1.5, r2 = 1.5 + 4.0 / 3.0, r3 = 1.5 + 8.0 / 3.0, r4 = 5.5;
    if (f == "hsnake")
        return polyline({{1.5, r1}, {5.5, r1}, {5.5, r2}, {1.5, r2}, {1.5, r3}, {5.5, r3}, {5.5, r4}, {1.5, r4}});
    if (f == "vsnake")
        return polyline({{r1, 1.5}, {r1, 5.5}, {r2, 5.5}, {r2, 1.5}, {r3, 1.5}, {r3, 5.5}, {r4, 5.5}, {r4, 1.5}});
    throw UnknownScenario("unknown scenario '" + f + "'");
}

Trajectory trajectory_from_segments(const std::vector<Segment>& one_way, bool closed, int repeats, double speed,
                                    double dt, const std::string& tag) {
    if (!(speed > 0.0)) throw ConfigError("speed must be > 0");
    if (!(dt > 0.0) || dt > 0.02) throw ConfigError("dt must lie in (0, 0.02] s");
    if (one_way.empty()) throw ConfigError("scenario path is empty");

    std::vector<Segment> path;
    for (int r = 0; r < repeats; ++r) {
        for (const auto& s : one_way) path.push_back(s);
        if (!closed)
            for (auto it = one_way.rbegin(); it != one_way.rend(); ++it) path.push_back(it->reversed());
    }
    std::vector<double> cum(path.size() + 1, 0.0);
    for (std::size_t i = 0; i < path.size(); ++i) cum[i + 1] = cum[i] + path[i].length();
    const double total = cum.back();

    Trajectory tr;
    tr.dt = dt;
    tr.tag = tag;
    const auto n = static_cast<std::size_t>(std::floor(total / speed / dt + 1e-9)) + 1;
    tr.t.resize(n), tr.x.resize(n), tr.y.resize(n);
    std::size_t seg = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        const double s = std::min(total, speed * t);
        while (seg + 1 < path.size() && s > cum[seg + 1]) ++seg;
        tr.t[i] = t;
        path[seg].point_at(s - cum[seg], tr.x[i], tr.y[i]);
    }
    return tr;
}

Trajectory make_trajectory(const ScenarioSpec& spec, double speed, double dt) {
    bool closed = false;
    const auto path = scenario_path(spec, closed);
    std::string tag = spec.family;
    if (trace_count(spec.family) > 1) tag += ":" + std::to_string(spec.trace);
    if (spec.family == "rotating") {
        // the plate turns at a fixed angular rate, once
        const double v = kRotatingRadius * kRotatingRateDeg * kDeg;
        return trajectory_from_segments(path, true, 1, v, dt, tag);
    }
    if (spec.family == "vturn") return trajectory_from_segments(path, false, 1, speed, dt, tag);
    // the azimuth families are single A -> B walks; repeats are separate walks
    if (spec.family == "arcs" || spec.family == "parallel" || spec.family == "turns")
        return trajectory_from_segments(path, true, 1, speed, dt, tag);
    return trajectory_from_segments(path, closed, spec.repeats, speed, dt, tag);
}

Trajectory make_stop_trajectory(double range, double speed, double stop_azimuth, double walk_seconds,
                                double still_seconds, double dt, double& t_stop) {
    if (!(walk_seconds > 0.0) || !(still_seconds >= 0.0)) throw ConfigError("bad stop trajectory timing");
    const double a1 = stop_azimuth;
    const double a0 = a1 - speed * walk_seconds / range;
    Trajectory tr = trajectory_from_segments({arc(0, 0, range, a0 / kDeg, a1 / kDeg)}, true, 1, speed, dt, "stop");
    t_stop = tr.t.back();
    const auto extra = static_cast<std::size_t>(std::llround(still_seconds / dt));
    const double xs = tr.x.back(), ys = tr.y.back();
    for (std::size_t i = 1; i <= extra; ++i) {
        tr.t.push_back(t_stop + static_cast<double>(i) * dt);
        tr.x.push_back(xs);
        tr.y.push_back(ys);
    }
    return tr;
}

SensorPose origin_pose(double theta_c) { return {"s1", 0.0, 0.0, 0.0, theta_c}; }

std::vector<SensorPose> room_poses(double theta_c, double side) {
    return {{"s1", 0.0, 0.0, 45.0 * kDeg, theta_c},
            {"s2", side, 0.0, 135.0 * kDeg, theta_c},
            {"s3", side, side, -135.0 * kDeg, theta_c},
            {"s4", 0.0, side, -45.0 * kDeg, theta_c}};
}

SignalTrace synth_dhf(const Trajectory& traj, const SensorPose& pose, const ZoneLayout& layout,
                      const BodyModel& body) {
    if (!(body.radius > 0.0) || !(body.emission > 0.0)) throw ConfigError("body radius and emission must be > 0");
    if (traj.size() == 0) throw DataError("empty trajectory");
    SignalTrace out;
    out.sample_rate = 1.0 / traj.dt;
    out.t0 = traj.t.front();
    out.samples.assign(traj.size(), 0.0);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double dx = traj.x[i] - pose.a;
        const double dy = traj.y[i] - pose.b;
        const double d = std::hypot(dx, dy);
        if (d < 1e-9) continue;
        const double alpha = wrap_pi(std::atan2(dy, dx) - pose.orientation);
        const double half = std::atan(body.radius / d);
        double acc = 0.0;
        for (const auto& s : layout.sectors) {
            const int sign = polarity_sign(s.polarity);
            if (sign == 0 || s.end <= alpha - half || s.start >= alpha + half) continue;
            acc += sign * overlap_fraction(alpha, half, s.start, s.end, body.profile);
        }
        out.samples[i] = body.emission / (d * d) * acc;
    }
    return out;
}

std::vector<SignalTrace> synth_outputs(const Trajectory& traj, const std::vector<SensorSetup>& sensors,
                                       const BodyModel& body, const NoiseModel& noise) {
    if (noise.output_noise_std < 0.0) throw ConfigError("output noise std must be >= 0");
    std::vector<SignalTrace> out;
    for (std::size_t k = 0; k < sensors.size(); ++k) {
        const auto dhf = synth_dhf(traj, sensors[k].pose, sensors[k].layout, body);
        auto y = simulate_output(dhf, sensors[k].params);
        if (noise.output_noise_std > 0.0) {
            Stream s(noise.seed, {0x6e6f697365ULL, k});
            for (double& v : y.samples) v += noise.output_noise_std * s.normal();
        }
        out.push_back(std::move(y));
    }
    return out;
}

std::vector<TruthWindow> true_azimuth_series(const Trajectory& traj, const SensorPose& pose, double period) {
    if (!(period > 0.0)) throw ConfigError("period must be > 0");
    std::vector<TruthWindow> out;
    if (traj.size() < 2) return out;
    const double span = static_cast<double>(traj.size() - 1) * traj.dt;
    const auto n = static_cast<std::size_t>(std::floor(span / period + 1e-9));
    for (std::size_t k = 0; k < n; ++k) {
        const auto i0 = static_cast<std::size_t>(std::llround(static_cast<double>(k) * period / traj.dt));
        const auto i1 = std::min(traj.size() - 1, static_cast<std::size_t>(std::llround(static_cast<double>(k + 1) * period / traj.dt)));
        const double ux = traj.x[i0] - pose.a, uy = traj.y[i0] - pose.b;
        const double vx = traj.x[i1] - pose.a, vy = traj.y[i1] - pose.b;
        if (std::hypot(ux, uy) < 1e-9 || std::hypot(vx, vy) < 1e-9)
            throw DegenerateGeometry("window endpoint coincides with sensor " + pose.sensor_id);
        const double theta = std::abs(std::atan2(ux * vy - uy * vx, ux * vx + uy * vy));
        out.push_back({traj.t.front() + static_cast<double>(k) * period, traj.t.front() + static_cast<double>(k + 1) * period, theta});
    }
    return out;
}

double reference_noise_std(const ZoneLayout& layout, const SensorParams& params, const BodyModel& body,
                           double fraction, double sample_rate) {
    const Trajectory walk =
        trajectory_from_segments({arc(0, 0, 3.0, -40.0, 40.0)}, true, 1, 1.0, 1.0 / sample_rate, "reference");
    const auto y = simulate_output(synth_dhf(walk, origin_pose(layout.theta_c), layout, body), params);
    std::vector<double> a(y.samples.size());
    std::transform(y.samples.begin(), y.samples.end(), a.begin(), [](double v) { return std::abs(v); });
    auto mid = a.begin() + static_cast<std::ptrdiff_t>(a.size() / 2);
    std::nth_element(a.begin(), mid, a.end());
    return fraction * *mid;
}

EvalReport evaluate(const std::vector<EstimatePoint>& estimates, const Trajectory& truth, double burn_in) {
    if (burn_in < 0.0) throw ConfigError("burn_in must be >= 0");
    if (truth.size() == 0) throw DataError("empty truth trajectory");
    EvalReport rep;
    const double t_first = truth.t.front();
    const double t_last = truth.t.back();
    std::size_t same_cell = 0;
    for (const auto& e : estimates) {
        if (e.t < t_first - 1e-9 || e.t > t_last + 1e-9)
            throw DataError("estimate at t=" + std::to_string(e.t) + " lies outside the truth time range");
        if (e.t <= t_first + burn_in + 1e-9) continue;
        double tx, ty;
        truth.position_at(e.t, tx, ty);
        rep.errors.push_back(std::hypot(e.x - tx, e.y - ty));
        if (std::floor(e.x) == std::floor(tx) && std::floor(e.y) == std::floor(ty)) ++same_cell;
    }
    if (rep.errors.empty()) throw EmptyAfterBurnIn("no estimates remain after the burn-in period");

    const double n = static_cast<double>(rep.errors.size());
    rep.count = rep.errors.size();
    double sum = 0.0;
    for (double e : rep.errors) sum += e;
    rep.mean_error = sum / n;
    double var = 0.0;
    for (double e : rep.errors) var += (e - rep.mean_error) * (e - rep.mean_error);
    rep.std_error = std::sqrt(var / n);
    rep.accuracy_rate = static_cast<double>(same_cell) / n;

    std::vector<double> sorted(rep.errors);
    std::sort(sorted.begin(), sorted.end());
    const double step = 0.05;
    const auto bins = static_cast<std::size_t>(std::ceil(sorted.back() / step - 1e-12));
    std::size_t j = 0;
    for (std::size_t b = 0; b <= bins; ++b) {
        const double edge = static_cast<double>(b) * step;
        while (j < sorted.size() && sorted[j] <= edge + 1e-12) ++j;
        rep.cdf.emplace_back(edge, static_cast<double>(j) / n);
    }
    rep.cdf.back().second = 1.0;
    rep.submeter = static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), 1.0) - sorted.begin()) / n;
    return rep;
}

}  // namespace pirtrack
