#include "pirtrack/pipeline.hpp"

#include <cmath>
#include <numbers>

#include "pirtrack/errors.hpp"
#include "pirtrack/rng.hpp"

namespace pirtrack {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void rethrow_with_stage(const std::string& stage, const Error& e) {
    const std::string msg = stage + ": " + e.what();
    switch (e.code()) {
        case ExitCode::Config: throw ConfigError(msg);
        case ExitCode::Data: throw DataError(msg);
        default: throw NumericalError(msg);
    }
}

template <typename F>
auto in_stage(const std::string& stage, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        rethrow_with_stage(stage, e);
    }
}

std::vector<SensorSetup> setups_for(const PipelineSetup& setup, const std::vector<SensorPose>& poses) {
    std::vector<SensorSetup> out;
    for (const auto& p : poses) out.push_back({p, setup.layout, setup.params});
    return out;
}

}  // namespace

PipelineSetup load_setup(const PipelineConfig& cfg) {
    return in_stage("config", [&] {
        PipelineSetup s;
        s.layout = sweep_zones(load_lens_config(cfg.lens_path));
        s.params = load_sensor_config(cfg.sensor_path, &s.sample_rate);
        if (s.sample_rate != cfg.sample_rate)
            throw ConfigError("sensor config sample rate differs from the pipeline sample rate");
        s.poses = load_poses(cfg.poses_path);
        for (auto& p : s.poses)
            if (p.theta_c == 0.0) p.theta_c = s.layout.theta_c;
        if (!cfg.tracker_path.empty()) s.tracker = load_tracker_config(cfg.tracker_path);
        s.tracker.period = cfg.period;
        validate(s.tracker);
        s.noise_std = cfg.noise_std >= 0.0
                          ? cfg.noise_std
                          : reference_noise_std(s.layout, s.params, cfg.body, 0.02, cfg.sample_rate);
        return s;
    });
}

PipelineResult run_pipeline(const PipelineConfig& cfg, const PipelineSetup& setup, const std::string& scenario,
                            const RunOptions& opts) {
    if (!(cfg.period > 0.0)) throw ConfigError("config: period must be > 0");
    PipelineResult r;
    const ScenarioSpec spec = in_stage("scenario", [&] { return parse_scenario(scenario, cfg.repeats); });
    if (!is_room_scenario(spec.family))
        throw ConfigError("scenario: '" + scenario + "' is a single-sensor azimuth scenario; tracking needs a room scenario");

    r.poses = setup.poses;
    if (opts.n_sensors > 0) {
        if (opts.n_sensors > r.poses.size())
            throw ConfigError("config: asked for " + std::to_string(opts.n_sensors) + " sensors, poses file has " +
                              std::to_string(r.poses.size()));
        r.poses.resize(opts.n_sensors);
    }

    r.truth = in_stage("synth", [&] { return make_trajectory(spec, cfg.speed, 1.0 / cfg.sample_rate); });
    r.outputs = in_stage("synth", [&] {
        return synth_outputs(r.truth, setups_for(setup, r.poses), cfg.body, {setup.noise_std, cfg.seed});
    });

    InverseFilterSpec inv{setup.params, cfg.reg_lambda, cfg.sample_rate};
    for (std::size_t k = 0; k < r.poses.size(); ++k) {
        r.dhf.push_back(in_stage("recover_dhf", [&] {
            return opts.block_inverse ? recover_dhf_blocks(r.outputs[k], inv) : recover_dhf(r.outputs[k], inv);
        }));
        r.thresholds.push_back(in_stage("azimuth", [&] { return min_prominence(r.dhf[k], cfg.prominence); }));
        r.observations.push_back(in_stage("azimuth", [&] {
            return windowed_azimuth(r.dhf[k], cfg.period, r.poses[k].theta_c, r.thresholds[k], r.poses[k].sensor_id,
                                    cfg.turning_ratio);
        }));
    }

    r.track = in_stage("track", [&] { return track(group_by_window(r.observations), r.poses, setup.tracker, cfg.seed); });

    std::vector<EstimatePoint> est;
    for (const auto& p : r.track) est.push_back({p.t, p.state.x, p.state.y});
    r.report = in_stage("evaluate", [&] { return evaluate(est, r.truth, cfg.burn_in); });

    if (!opts.persist_dir.empty()) {
        in_stage("persist", [&] {
            const fs::path d = opts.persist_dir;
            write_truth(d / "truth.csv", r.truth);
            std::vector<AzimuthObservation> all;
            for (std::size_t k = 0; k < r.poses.size(); ++k) {
                write_trace(d / ("output_" + r.poses[k].sensor_id + ".csv"), r.outputs[k]);
                write_trace(d / ("dhf_" + r.poses[k].sensor_id + ".csv"), r.dhf[k]);
                all.insert(all.end(), r.observations[k].begin(), r.observations[k].end());
            }
            write_observations(d / "observations.csv", all);
            write_track(d / "track.csv", r.track);
            write_report(d / "report.csv", r.report);
            write_cdf(d / "cdf.csv", r.report);
            return 0;
        });
    }
    return r;
}

PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& scenario, const RunOptions& opts) {
    return run_pipeline(cfg, load_setup(cfg), scenario, opts);
}

AzimuthReport run_azimuth_scenario(const PipelineConfig& cfg, const PipelineSetup& setup,
                                   const std::string& scenario) {
    const ScenarioSpec spec = in_stage("scenario", [&] { return parse_scenario(scenario, cfg.repeats); });
    if (is_room_scenario(spec.family))
        throw ConfigError("scenario: '" + scenario + "' is a room scenario; azimuth checks use single-sensor scenarios");
    const SensorPose pose = origin_pose(setup.layout.theta_c);
    const Trajectory traj = in_stage("synth", [&] { return make_trajectory(spec, cfg.speed, 1.0 / cfg.sample_rate); });
    BodyModel body = cfg.body;
    if (spec.family == "rotating") body.radius = kRotatingSourceRadius;
    const InverseFilterSpec inv{setup.params, cfg.reg_lambda, cfg.sample_rate};
    const auto truth = in_stage("evaluate", [&] { return true_azimuth_series(traj, pose, cfg.period); });

    AzimuthReport rep;
    rep.scenario = scenario;
    // each repeat is a fresh walk along the same path with its own noise
    for (int w = 0; w < std::max(1, cfg.repeats); ++w) {
        const NoiseModel noise{setup.noise_std, derive_key(cfg.seed, {static_cast<std::uint64_t>(w)})};
        const auto outputs =
            in_stage("synth", [&] { return synth_outputs(traj, {{pose, setup.layout, setup.params}}, body, noise); });
        const SignalTrace dhf = in_stage("recover_dhf", [&] { return recover_dhf(outputs[0], inv); });
        const auto obs = in_stage("azimuth", [&] {
            return windowed_azimuth(dhf, cfg.period, pose.theta_c, min_prominence(dhf, cfg.prominence),
                                    pose.sensor_id, cfg.turning_ratio);
        });
        const std::size_t n = std::min(obs.size(), truth.size());
        for (std::size_t k = 0; k < n; ++k) rep.abs_errors.push_back(std::abs(obs[k].theta - truth[k].theta));
    }
    rep.windows = rep.abs_errors.size();
    if (rep.windows == 0) throw DataError("evaluate: scenario '" + scenario + "' produced no windows");
    double sum = 0.0;
    for (double e : rep.abs_errors) sum += e;
    rep.mean_abs_error = sum / static_cast<double>(rep.windows);
    return rep;
}

std::vector<SweepPoint> sweep(const PipelineConfig& cfg, const std::vector<std::string>& scenarios,
                              SweepParameter parameter, const std::vector<double>& values) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    if (scenarios.empty()) throw ConfigError("sweep needs at least one scenario");
    const PipelineSetup base = load_setup(cfg);
    std::vector<SweepPoint> out;
    for (double v : values) {
        PipelineConfig c = cfg;
        PipelineSetup s = base;
        RunOptions opts;
        if (parameter == SweepParameter::Period) {
            if (!(v > 0.0)) throw ConfigError("sweep: period values must be > 0");
            c.period = v;
            s.tracker.period = v;
        } else {
            if (v < 1.0 || v != std::floor(v)) throw ConfigError("sweep: sensor counts must be positive integers");
            opts.n_sensors = static_cast<std::size_t>(v);
        }
        SweepPoint pt;
        pt.value = v;
        pt.scenarios = scenarios;
        double sum = 0.0;
        for (const auto& name : scenarios) {
            pt.reports.push_back(run_pipeline(c, s, name, opts).report);
            sum += pt.reports.back().mean_error;
        }
        pt.mean_error = sum / static_cast<double>(scenarios.size());
        out.push_back(std::move(pt));
    }
    return out;
}

std::vector<std::string> expand_scenarios(const std::string& spec) {
    if (spec == "room") {
        std::vector<std::string> out;
        for (const auto& f : scenario_families())
            if (is_room_scenario(f)) out.push_back(f);
        return out;
    }
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const auto comma = spec.find(',', pos);
        const auto item = spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError("no scenarios given");
    return out;
}

}  // namespace pirtrack
