#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>

#include "pirtrack/errors.hpp"
#include "pirtrack/pipeline.hpp"

namespace fs = std::filesystem;
using namespace pirtrack;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Globals {
    std::optional<std::uint64_t> seed;
    bool verbose = false;
    std::string out_dir = ".";
};

void say(const Globals& g, const std::string& msg) {
    if (g.verbose) std::cerr << msg << '\n';
}

fs::path out_path(const Globals& g, const std::string& name) {
    fs::create_directories(g.out_dir);
    return fs::path(g.out_dir) / name;
}

// --out names the main output file directly; otherwise it lands in --out-dir.
fs::path primary_path(const Globals& g, const std::string& out_file, const std::string& name) {
    if (out_file.empty()) return out_path(g, name);
    const fs::path p(out_file);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
}

PipelineConfig pipeline_config(const std::string& path, const Globals& g) {
    PipelineConfig c = load_pipeline_config(path);
    if (g.seed) c.seed = *g.seed;
    return c;
}

void print_report(const EvalReport& r) {
    std::printf("mean_error_m %.4f\nstd_error_m %.4f\nsubmeter %.4f\naccuracy_rate %.4f\nn %zu\n", r.mean_error,
                r.std_error, r.submeter, r.accuracy_rate, r.count);
}

std::vector<double> parse_values(const std::string& s) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = s.find(',', pos);
        const auto item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!item.empty()) {
            try {
                out.push_back(parse_double(item));
            } catch (const DataError&) {
                throw ConfigError("bad sweep value '" + item + "'");
            }
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError("no sweep values given");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pirtrack: PIR-based device-free localization toolkit"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "RNG seed (overrides config files)");
    app.add_flag("--verbose,-v", g.verbose, "progress messages on stderr");
    app.add_option("--out-dir", g.out_dir, "directory for output files")->capture_default_str();
    std::string out_file;
    std::optional<double> speed;

    // layout
    auto* layout = app.add_subcommand("layout", "sweep a lens config into zones");
    std::string lens_path;
    std::size_t render_n = 0;
    double render_range = 5.0;
    layout->add_option("--lens", lens_path, "lens config")->required();
    layout->add_option("--render", render_n, "also scatter N labelled points over the wedge");
    layout->add_option("--range", render_range, "render range in m")->capture_default_str();
    layout->add_option("--out", out_file, "sector table CSV (default <out-dir>/layout.csv)");

    // identify
    auto* identify = app.add_subcommand("identify", "fit (A, B, C) to step-response traces");
    std::vector<std::string> step_paths;
    std::vector<double> guess{1.0, 0.01, 0.2};
    identify->add_option("--traces", step_paths, "step-response CSVs (t_s,v)")->required();
    identify->add_option("--guess", guess, "initial A B C")->expected(3)->delimiter(',')->capture_default_str();
    identify->add_option("--out", out_file, "identified sensor config (default <out-dir>/identified_sensor.cfg)");

    // synth
    auto* synth = app.add_subcommand("synth", "simulate truth, DHF and sensor outputs for a scenario");
    std::string cfg_path, scenario;
    std::size_t n_sensors = 0;
    synth->add_option("--config", cfg_path, "pipeline config")->required();
    synth->add_option("--scenario", scenario, "scenario name, e.g. square or arcs:2")->required();
    synth->add_option("--speed", speed, "walking speed in m/s (overrides config)");

    // dhf
    auto* dhf = app.add_subcommand("dhf", "recover the DHF from a sensor output trace");
    std::string sensor_path, input_path;
    double lambda = 1e-3;
    bool blocks = false;
    dhf->add_option("--sensor", sensor_path, "sensor dynamics config")->required();
    dhf->add_option("--input,--in", input_path, "output trace CSV")->required();
    dhf->add_option("--out", out_file, "DHF CSV (default <out-dir>/dhf.csv)");
    dhf->add_option("--lambda", lambda, "Tikhonov weight")->capture_default_str();
    dhf->add_flag("--blocks", blocks, "overlap-add block inverse");

    // azimuth
    auto* azimuth = app.add_subcommand("azimuth", "windowed azimuth-change observations from a DHF trace");
    double theta_c_deg = 0.0, period = 0.5, prominence = 0.0, turning_ratio = 0.5;
    std::string sensor_id = "s1";
    azimuth->add_option("--input,--in", input_path, "DHF trace CSV")->required();
    azimuth->add_option("--out", out_file, "observations CSV (default <out-dir>/observations.csv)");
    auto* az_lens = azimuth->add_option("--lens", lens_path, "lens config (gives theta_c)");
    auto* az_thc = azimuth->add_option("--theta-c", theta_c_deg, "zone angle in degrees");
    az_lens->excludes(az_thc);
    azimuth->add_option("--period", period, "estimation period in s")->capture_default_str();
    azimuth->add_option("--prominence", prominence, "fixed prominence threshold (default adaptive)");
    azimuth->add_option("--turning-ratio", turning_ratio)->capture_default_str();
    azimuth->add_option("--sensor-id", sensor_id)->capture_default_str();

    // track
    auto* trk = app.add_subcommand("track", "particle-filter track from observations");
    std::string poses_path, tracker_path, obs_path;
    trk->add_option("--poses,--sensors", poses_path, "sensor poses config")->required();
    trk->add_option("--out", out_file, "track CSV (default <out-dir>/track.csv)");
    trk->add_option("--obs", obs_path, "observations CSV")->required();
    trk->add_option("--tracker,--config", tracker_path, "tracker config (default built-in)");
    trk->add_option("--lens", lens_path, "lens config, fills theta_c missing from poses");

    // run
    auto* run = app.add_subcommand("run", "full pipeline on one scenario");
    bool persist = true;
    run->add_option("--config", cfg_path, "pipeline config")->required();
    run->add_option("--scenario", scenario, "scenario name")->required();
    run->add_option("--sensors", n_sensors, "use only the first N poses");
    run->add_flag("--blocks", blocks, "overlap-add block inverse");
    run->add_flag("!--no-persist", persist, "do not write intermediates");

    // sweep
    auto* swp = app.add_subcommand("sweep", "re-run scenarios over a parameter");
    std::string param, values_s, scenarios_s = "room";
    swp->add_option("--config", cfg_path, "pipeline config")->required();
    swp->add_option("--scenarios", scenarios_s, "comma list, or 'room' for the six room scenarios")
        ->capture_default_str();
    swp->add_option("--param", param, "period | n_sensors")->required()->check(CLI::IsMember({"period", "n_sensors"}));
    swp->add_option("--values", values_s, "comma-separated values")->required();

    // eval
    auto* ev = app.add_subcommand("eval", "score estimates against truth");
    std::string truth_path, est_path;
    double burn_in = 2.0;
    ev->add_option("--truth", truth_path, "truth CSV (t,x,y)")->required();
    ev->add_option("--estimates", est_path, "estimates CSV (t,x,y,...)")->required();
    ev->add_option("--burn-in", burn_in)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(ExitCode::Config);
    }
    if (*seed_opt) g.seed = seed_value;

    try {
        if (*layout) {
            const auto z = sweep_zones(load_lens_config(lens_path));
            CsvTable t;
            t.header = {"start_deg", "end_deg", "polarity"};
            for (const auto& s : z.sectors)
                t.rows.push_back({format_double(s.start / kDeg), format_double(s.end / kDeg), to_string(s.polarity)});
            write_csv(primary_path(g, out_file, "layout.csv"), t);
            CsvTable a;
            a.header = {"axis_deg", "polarity"};
            for (const auto& ax : z.axes) a.rows.push_back({format_double(ax.angle / kDeg), to_string(ax.polarity)});
            write_csv(out_path(g, "zone_axes.csv"), a);
            const auto nb = neighbor_angles(z);
            CsvTable n;
            n.header = {"index", "neighbor_deg"};
            for (std::size_t i = 0; i < nb.size(); ++i) n.rows.push_back({std::to_string(i), format_double(nb[i] / kDeg)});
            write_csv(out_path(g, "neighbor_angles.csv"), n);
            if (render_n > 0) {
                const auto pts = render_layout(z, render_range, render_n, g.seed.value_or(1));
                CsvTable r;
                r.header = {"x", "y", "polarity"};
                for (const auto& p : pts) r.rows.push_back({format_double(p.x), format_double(p.y), to_string(p.polarity)});
                write_csv(out_path(g, "layout_points.csv"), r);
            }
            std::printf("zones %zu\ntheta_c_deg %.4f\n", z.axes.size(), z.theta_c / kDeg);
        } else if (*identify) {
            std::vector<SignalTrace> traces;
            for (const auto& p : step_paths) traces.push_back(read_trace(p));
            const auto r = identify_params(traces, {guess[0], guess[1], guess[2]});
            std::ofstream o(primary_path(g, out_file, "identified_sensor.cfg"));
            o << "{\n  \"description\": \"identified from step responses\",\n  \"a_gain\": "
              << format_double(r.params.a_gain) << ",\n  \"b_coef\": " << format_double(r.params.b_coef)
              << ",\n  \"c_coef\": " << format_double(r.params.c_coef) << ",\n  \"sample_rate_hz\": "
              << format_double(traces.front().sample_rate) << "\n}\n";
            std::printf("A %.6g\nB %.6g\nC %.6g\nresidual_rms %.3g\niterations %d\n", r.params.a_gain,
                        r.params.b_coef, r.params.c_coef, r.residual_rms, r.iterations);
        } else if (*synth) {
            auto cfg = pipeline_config(cfg_path, g);
            if (speed) {
                if (!(*speed > 0.0)) throw ConfigError("--speed must be > 0");
                cfg.speed = *speed;
            }
            const auto setup = load_setup(cfg);
            const auto spec = parse_scenario(scenario, cfg.repeats);
            const auto traj = make_trajectory(spec, cfg.speed, 1.0 / cfg.sample_rate);
            std::vector<SensorPose> poses =
                is_room_scenario(spec.family) ? setup.poses : std::vector<SensorPose>{origin_pose(setup.layout.theta_c)};
            BodyModel body = cfg.body;
            if (spec.family == "rotating") body.radius = kRotatingSourceRadius;
            std::vector<SensorSetup> sensors;
            for (const auto& p : poses) sensors.push_back({p, setup.layout, setup.params});
            const auto outs = synth_outputs(traj, sensors, body, {setup.noise_std, cfg.seed});
            write_truth(out_path(g, "truth.csv"), traj);
            for (std::size_t k = 0; k < poses.size(); ++k) {
                write_trace(out_path(g, "dhf_true_" + poses[k].sensor_id + ".csv"),
                            synth_dhf(traj, poses[k], setup.layout, body), "dhf");
                write_trace(out_path(g, "output_" + poses[k].sensor_id + ".csv"), outs[k]);
            }
            say(g, "noise std " + format_double(setup.noise_std));
            std::printf("samples %zu\nsensors %zu\n", traj.size(), poses.size());
        } else if (*dhf) {
            double fs = 100.0;
            const auto params = load_sensor_config(sensor_path, &fs);
            const auto y = read_trace(input_path);
            const InverseFilterSpec spec{params, lambda, y.sample_rate};
            const auto d = blocks ? recover_dhf_blocks(y, spec) : recover_dhf(y, spec);
            write_trace(primary_path(g, out_file, "dhf.csv"), d, "dhf");
            say(g, "inverse gain bound " + format_double(inverse_gain_bound(spec)));
        } else if (*azimuth) {
            double thc = theta_c_deg * kDeg;
            if (!lens_path.empty()) thc = sweep_zones(load_lens_config(lens_path)).theta_c;
            if (!(thc > 0.0)) throw ConfigError("azimuth needs --lens or a positive --theta-c");
            const auto d = read_trace(input_path);
            ProminencePolicy pol;
            pol.fixed = prominence;
            const double mp = min_prominence(d, pol);
            const auto obs = windowed_azimuth(d, period, thc, mp, sensor_id, turning_ratio);
            write_observations(primary_path(g, out_file, "observations.csv"), obs);
            std::printf("windows %zu\nmin_prominence %.6g\n", obs.size(), mp);
        } else if (*trk) {
            auto poses = load_poses(poses_path);
            if (!lens_path.empty()) {
                const double thc = sweep_zones(load_lens_config(lens_path)).theta_c;
                for (auto& p : poses)
                    if (p.theta_c == 0.0) p.theta_c = thc;
            }
            for (const auto& p : poses)
                if (p.theta_c == 0.0) throw ConfigError("pose " + p.sensor_id + " has no theta_c; pass --lens");
            const TrackerConfig tc = tracker_path.empty() ? TrackerConfig{} : load_tracker_config(tracker_path);
            const auto obs = read_observations(obs_path);
            std::map<std::string, std::vector<AzimuthObservation>> by_sensor;
            for (const auto& o : obs) by_sensor[o.sensor_id].push_back(o);
            std::vector<std::vector<AzimuthObservation>> per_sensor;
            for (auto& [id, v] : by_sensor) per_sensor.push_back(std::move(v));
            const auto tr = track(group_by_window(per_sensor), poses, tc, g.seed.value_or(1));
            write_track(primary_path(g, out_file, "track.csv"), tr);
            std::printf("estimates %zu\n", tr.size());
        } else if (*run) {
            const auto cfg = pipeline_config(cfg_path, g);
            const auto setup = load_setup(cfg);
            const auto spec = parse_scenario(scenario, cfg.repeats);
            if (is_room_scenario(spec.family)) {
                RunOptions opts;
                opts.n_sensors = n_sensors;
                opts.block_inverse = blocks;
                if (persist) opts.persist_dir = g.out_dir;
                const auto r = run_pipeline(cfg, setup, scenario, opts);
                for (std::size_t k = 0; k < r.poses.size(); ++k)
                    say(g, r.poses[k].sensor_id + " prominence threshold " + format_double(r.thresholds[k]));
                print_report(r.report);
            } else {
                const auto r = run_azimuth_scenario(cfg, setup, scenario);
                CsvTable t;
                t.header = {"window", "abs_error_deg"};
                for (std::size_t k = 0; k < r.abs_errors.size(); ++k)
                    t.rows.push_back({std::to_string(k), format_double(r.abs_errors[k] / kDeg)});
                if (persist) write_csv(out_path(g, "azimuth_errors.csv"), t);
                std::printf("windows %zu\nmean_abs_error_deg %.4f\n", r.windows, r.mean_abs_error / kDeg);
            }
        } else if (*swp) {
            const auto cfg = pipeline_config(cfg_path, g);
            const auto scen = expand_scenarios(scenarios_s);
            const auto pts = sweep(cfg, scen, param == "period" ? SweepParameter::Period : SweepParameter::NSensors,
                                   parse_values(values_s));
            CsvTable t;
            t.header = {param, "scenario", "mean_error_m", "std_error_m", "submeter"};
            for (const auto& p : pts) {
                for (std::size_t i = 0; i < p.scenarios.size(); ++i)
                    t.rows.push_back({format_double(p.value), p.scenarios[i], format_double(p.reports[i].mean_error),
                                      format_double(p.reports[i].std_error), format_double(p.reports[i].submeter)});
                t.rows.push_back({format_double(p.value), "mean", format_double(p.mean_error), "", ""});
                std::printf("%s %g mean_error_m %.4f\n", param.c_str(), p.value, p.mean_error);
            }
            write_csv(out_path(g, "sweep_" + param + ".csv"), t);
        } else if (*ev) {
            const auto truth = read_truth(truth_path);
            const auto rep = evaluate(read_estimates(est_path), truth, burn_in);
            write_report(out_path(g, "report.csv"), rep);
            write_cdf(out_path(g, "cdf.csv"), rep);
            print_report(rep);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.code());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::Data);
    }
    return 0;
}
