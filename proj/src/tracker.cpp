#include "pirtrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "pirtrack/errors.hpp"
#include "pirtrack/rng.hpp"

namespace pirtrack {

namespace {

enum StreamTag : std::uint64_t { kInit = 1, kPropagate = 2, kResample = 3 };

void normalize_log(std::vector<double>& logw, std::vector<double>& w) {
    const double mx = *std::max_element(logw.begin(), logw.end());
    if (!std::isfinite(mx)) throw AllWeightsZero("all particle weights vanished");
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = std::exp(logw[i] - mx);
        sum += w[i];
    }
    for (double& v : w) v /= sum;
}

}  // namespace

void validate(const TrackerConfig& cfg) {
    if (cfg.n_particles < 100) throw ConfigError("tracker needs n_particles >= 100");
    if (!(cfg.period > 0.0)) throw ConfigError("tracker period must be > 0");
    if (!(cfg.sigma_n > 0.0)) throw ConfigError("tracker sigma_n must be > 0");
    if (!(cfg.sigma_theta > 0.0)) throw ConfigError("tracker sigma_theta must be > 0");
    if (!(cfg.resample_ess_fraction > 0.0 && cfg.resample_ess_fraction <= 1.0))
        throw ConfigError("resample_ess_fraction must lie in (0, 1]");
    if (!(cfg.area.x_max > cfg.area.x_min && cfg.area.y_max > cfg.area.y_min))
        throw ConfigError("area bounds are empty");
    if (cfg.noise.sigma_pos < 0.0 || cfg.noise.sigma_vel < 0.0 || cfg.noise.jump_sigma < 0.0)
        throw ConfigError("process noise must be non-negative");
    if (cfg.noise.jump_prob < 0.0 || cfg.noise.jump_prob > 1.0) throw ConfigError("jump_prob must lie in [0, 1]");
    if (!(cfg.outside_factor > 0.0 && cfg.outside_factor <= 1.0) ||
        !(cfg.overspeed_factor > 0.0 && cfg.overspeed_factor <= 1.0))
        throw ConfigError("constraint factors must lie in (0, 1]");
    if (cfg.init_vel_sigma < 0.0) throw ConfigError("init_vel_sigma must be non-negative");
}

ParticleSet init_particles(const TrackerConfig& cfg, std::uint64_t seed) {
    validate(cfg);
    ParticleSet ps;
    ps.rng_seed = seed;
    ps.states.resize(cfg.n_particles);
    ps.weights.assign(cfg.n_particles, 1.0 / static_cast<double>(cfg.n_particles));
    for (std::size_t i = 0; i < cfg.n_particles; ++i) {
        Stream s(seed, {kInit, i});
        auto& st = ps.states[i];
        st.x = s.uniform(cfg.area.x_min, cfg.area.x_max);
        st.y = s.uniform(cfg.area.y_min, cfg.area.y_max);
        st.vx = s.normal(0.0, cfg.init_vel_sigma);
        st.vy = s.normal(0.0, cfg.init_vel_sigma);
    }
    return ps;
}

ParticleSet propagate(const ParticleSet& ps, double T, const ProcessNoise& noise) {
    if (!(T > 0.0)) throw ConfigError("propagate needs T > 0");
    ParticleSet out = ps;
    out.draws = ps.draws + 1;
    for (std::size_t i = 0; i < out.states.size(); ++i) {
        Stream s(ps.rng_seed, {kPropagate, out.draws, i});
        auto& st = out.states[i];
        if (noise.jump_prob > 0.0 && s.uniform() < noise.jump_prob) {
            st.vx = s.normal(0.0, noise.jump_sigma);
            st.vy = s.normal(0.0, noise.jump_sigma);
        }
        st.x += T * st.vx + noise.sigma_pos * s.normal();
        st.y += T * st.vy + noise.sigma_pos * s.normal();
        st.vx += noise.sigma_vel * s.normal();
        st.vy += noise.sigma_vel * s.normal();
    }
    return out;
}

double expected_cos_theta(const MotionState& s, const SensorPose& pose, double T) {
    const double px = s.x - T * s.vx - pose.a;
    const double py = s.y - T * s.vy - pose.b;
    const double cx = s.x - pose.a;
    const double cy = s.y - pose.b;
    const double ap = std::hypot(px, py);
    const double bp = std::hypot(cx, cy);
    if (ap < 1e-6 || bp < 1e-6) throw DegenerateGeometry("particle coincides with sensor " + pose.sensor_id);
    const double ab = T * std::hypot(s.vx, s.vy);
    const double c = (ap * ap + bp * bp - ab * ab) / (2.0 * ap * bp);
    return std::clamp(c, -1.0, 1.0);
}

double likelihood_factor(const MotionState& s, const AzimuthObservation& obs, const SensorPose& pose,
                         const TrackerConfig& cfg) {
    double c;
    try {
        c = expected_cos_theta(s, pose, cfg.period);
    } catch (const DegenerateGeometry&) {
        return kLikelihoodFloor;
    }
    double r;
    if (cfg.likelihood == Likelihood::Cosine)
        r = (std::cos(obs.theta) - c) / cfg.sigma_n;
    else
        r = (obs.theta - std::acos(c)) / cfg.sigma_theta;
    return std::max(std::exp(-0.5 * r * r), kLikelihoodFloor);
}

ParticleSet weight_update(const ParticleSet& ps, const std::vector<AzimuthObservation>& observations,
                          const std::vector<SensorPose>& poses, const TrackerConfig& cfg) {
    ParticleSet out = ps;
    if (observations.empty()) return out;

    std::unordered_map<std::string, const SensorPose*> by_id;
    for (const auto& p : poses) by_id[p.sensor_id] = &p;
    std::vector<std::pair<const AzimuthObservation*, const SensorPose*>> pairs;
    for (const auto& o : observations) {
        auto it = by_id.find(o.sensor_id);
        if (it == by_id.end()) throw DataError("observation for unknown sensor '" + o.sensor_id + "'");
        pairs.emplace_back(&o, it->second);
    }

    std::vector<double> logw(ps.weights.size());
    for (std::size_t i = 0; i < ps.states.size(); ++i) {
        double lw = std::log(ps.weights[i]);
        for (const auto& [o, pose] : pairs) lw += std::log(likelihood_factor(ps.states[i], *o, *pose, cfg));
        logw[i] = lw;
    }
    normalize_log(logw, out.weights);
    return out;
}

ParticleSet weight_update(const ParticleSet& ps, const std::vector<AzimuthObservation>& observations,
                          const std::vector<SensorPose>& poses, double sigma_n) {
    TrackerConfig cfg;
    cfg.likelihood = Likelihood::Cosine;
    cfg.sigma_n = sigma_n;
    return weight_update(ps, observations, poses, cfg);
}

ParticleSet apply_constraints(const ParticleSet& ps, const TrackerConfig& cfg) {
    ParticleSet out = ps;
    if (cfg.outside_factor >= 1.0 && cfg.overspeed_factor >= 1.0) return out;
    std::vector<double> logw(ps.weights.size());
    const double lo_out = std::log(cfg.outside_factor);
    const double lo_fast = std::log(cfg.overspeed_factor);
    for (std::size_t i = 0; i < ps.states.size(); ++i) {
        const auto& s = ps.states[i];
        double lw = std::log(ps.weights[i]);
        if (!cfg.area.contains(s.x, s.y)) lw += lo_out;
        if (std::hypot(s.vx, s.vy) > cfg.max_speed) lw += lo_fast;
        logw[i] = lw;
    }
    normalize_log(logw, out.weights);
    return out;
}

double effective_sample_size(const std::vector<double>& w) {
    double s = 0.0;
    for (double v : w) s += v * v;
    return s > 0.0 ? 1.0 / s : 0.0;
}

ParticleSet resample_if_needed(const ParticleSet& ps, double ess_fraction) {
    const std::size_t n = ps.states.size();
    if (effective_sample_size(ps.weights) >= ess_fraction * static_cast<double>(n)) return ps;

    ParticleSet out;
    out.rng_seed = ps.rng_seed;
    out.draws = ps.draws + 1;
    out.states.resize(n);
    out.weights.assign(n, 1.0 / static_cast<double>(n));

    Stream s(ps.rng_seed, {kResample, out.draws});
    const double u0 = s.uniform() / static_cast<double>(n);
    double cum = ps.weights[0];
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = u0 + static_cast<double>(i) / static_cast<double>(n);
        while (u > cum && j + 1 < n) cum += ps.weights[++j];
        out.states[i] = ps.states[j];
    }
    return out;
}

MotionState estimate(const ParticleSet& ps) {
    MotionState m;
    for (std::size_t i = 0; i < ps.states.size(); ++i) {
        const double w = ps.weights[i];
        m.x += w * ps.states[i].x;
        m.y += w * ps.states[i].y;
        m.vx += w * ps.states[i].vx;
        m.vy += w * ps.states[i].vy;
    }
    return m;
}

std::vector<TrackPoint> track(const std::vector<std::vector<AzimuthObservation>>& stream,
                              const std::vector<SensorPose>& poses, const TrackerConfig& cfg, std::uint64_t seed) {
    std::vector<TrackPoint> out;
    if (stream.empty()) return out;
    ParticleSet ps = init_particles(cfg, seed);
    double t = 0.0;
    for (const auto& window : stream) {
        t = window.empty() ? t + cfg.period : window.front().window_end;
        ps = propagate(ps, cfg.period, cfg.noise);
        ps = weight_update(ps, window, poses, cfg);
        ps = apply_constraints(ps, cfg);
        ps = resample_if_needed(ps, cfg.resample_ess_fraction);
        out.push_back({t, estimate(ps)});
    }
    return out;
}

std::vector<std::vector<AzimuthObservation>> group_by_window(
    const std::vector<std::vector<AzimuthObservation>>& per_sensor) {
    std::size_t n = 0;
    for (const auto& s : per_sensor) n = std::max(n, s.size());
    std::vector<std::vector<AzimuthObservation>> out(n);
    for (const auto& s : per_sensor)
        for (std::size_t k = 0; k < s.size(); ++k) out[k].push_back(s[k]);
    return out;
}

}  // namespace pirtrack
