#include "pirtrack/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "pirtrack/errors.hpp"

namespace pirtrack {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

json load_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse config file '" + path.string() + "': " + e.what());
    }
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <typename T>
T get(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + ": key '" + key + "' has the wrong type");
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& where) {
    return j.contains(key) ? get<T>(j, key, where) : fallback;
}

fs::path resolve(const fs::path& base_file, const std::string& p) {
    fs::path q(p);
    return q.is_absolute() ? q : base_file.parent_path() / q;
}

}  // namespace

// ---- CSV ----------------------------------------------------------------

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw DataError("CSV has no column '" + name + "'");
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) throw DataError("not a number: '" + s + "'");
    return v;
}

CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open CSV file '" + path.string() + "'");
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw DataError("CSV file '" + path.string() + "' is empty");
    t.header = split(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split(line);
        if (cells.size() != t.header.size())
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(t.header.size()) + " fields, got " + std::to_string(cells.size()));
        t.rows.push_back(std::move(cells));
    }
    return t;
}

void write_csv(const fs::path& path, const CsvTable& table) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    auto put = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    };
    put(table.header);
    for (const auto& r : table.rows) put(r);
}

SignalTrace read_trace(const fs::path& path) {
    const auto t = read_csv(path);
    if (t.header.size() != 2) throw DataError("trace CSV '" + path.string() + "' must have two columns t_s,v");
    if (t.rows.size() < 2) throw DataError("trace CSV '" + path.string() + "' needs at least two samples");
    SignalTrace tr;
    std::vector<double> ts;
    for (const auto& r : t.rows) {
        ts.push_back(parse_double(r[0]));
        tr.samples.push_back(parse_double(r[1]));
    }
    const double dt = (ts.back() - ts.front()) / static_cast<double>(ts.size() - 1);
    if (!(dt > 0.0)) throw DataError("trace CSV '" + path.string() + "' timestamps are not increasing");
    for (std::size_t i = 1; i < ts.size(); ++i)
        if (std::abs(ts[i] - ts[i - 1] - dt) > 1e-6 * dt + 1e-9)
            throw DataError("trace CSV '" + path.string() + "' is not uniformly sampled");
    tr.t0 = ts.front();
    tr.sample_rate = 1.0 / dt;
    // snap to a round rate when the file was written from one
    const double r = std::round(tr.sample_rate);
    if (std::abs(tr.sample_rate - r) < 1e-6 * r) tr.sample_rate = r;
    return tr;
}

void write_trace(const fs::path& path, const SignalTrace& trace, const std::string& value_name) {
    CsvTable t;
    t.header = {"t_s", value_name};
    for (std::size_t i = 0; i < trace.size(); ++i)
        t.rows.push_back({format_double(trace.time(i)), format_double(trace.samples[i])});
    write_csv(path, t);
}

void write_observations(const fs::path& path, const std::vector<AzimuthObservation>& obs) {
    CsvTable t;
    t.header = {"sensor_id", "t_start", "t_end", "theta_deg", "n_extrema", "turning"};
    for (const auto& o : obs)
        t.rows.push_back({o.sensor_id, format_double(o.window_start), format_double(o.window_end),
                          format_double(o.theta / kDeg), std::to_string(o.n_extrema), o.turning_detected ? "1" : "0"});
    write_csv(path, t);
}

std::vector<AzimuthObservation> read_observations(const fs::path& path) {
    const auto t = read_csv(path);
    const auto c_id = t.column("sensor_id"), c_a = t.column("t_start"), c_b = t.column("t_end"),
               c_th = t.column("theta_deg");
    std::vector<AzimuthObservation> out;
    for (const auto& r : t.rows) {
        AzimuthObservation o;
        o.sensor_id = r[c_id];
        o.window_start = parse_double(r[c_a]);
        o.window_end = parse_double(r[c_b]);
        o.theta = parse_double(r[c_th]) * kDeg;
        if (o.theta < 0.0) throw DataError("negative theta in '" + path.string() + "'");
        for (std::size_t i = 0; i < t.header.size(); ++i) {
            if (t.header[i] == "n_extrema") o.n_extrema = static_cast<int>(parse_double(r[i]));
            if (t.header[i] == "turning") o.turning_detected = parse_double(r[i]) != 0.0;
        }
        out.push_back(o);
    }
    return out;
}

void write_truth(const fs::path& path, const Trajectory& traj) {
    CsvTable t;
    t.header = {"t", "x", "y"};
    for (std::size_t i = 0; i < traj.size(); ++i)
        t.rows.push_back({format_double(traj.t[i]), format_double(traj.x[i]), format_double(traj.y[i])});
    write_csv(path, t);
}

Trajectory read_truth(const fs::path& path) {
    const auto t = read_csv(path);
    const auto ct = t.column("t"), cx = t.column("x"), cy = t.column("y");
    Trajectory tr;
    for (const auto& r : t.rows) {
        tr.t.push_back(parse_double(r[ct]));
        tr.x.push_back(parse_double(r[cx]));
        tr.y.push_back(parse_double(r[cy]));
    }
    if (tr.size() < 2) throw DataError("truth CSV '" + path.string() + "' needs at least two rows");
    tr.dt = (tr.t.back() - tr.t.front()) / static_cast<double>(tr.size() - 1);
    for (std::size_t i = 1; i < tr.size(); ++i)
        if (std::abs(tr.t[i] - tr.t[i - 1] - tr.dt) > 1e-6 * tr.dt + 1e-9)
            throw DataError("truth CSV '" + path.string() + "' is not uniformly sampled");
    tr.tag = path.stem().string();
    return tr;
}

void write_track(const fs::path& path, const std::vector<TrackPoint>& track) {
    CsvTable t;
    t.header = {"t", "x", "y", "vx", "vy"};
    for (const auto& p : track)
        t.rows.push_back({format_double(p.t), format_double(p.state.x), format_double(p.state.y),
                          format_double(p.state.vx), format_double(p.state.vy)});
    write_csv(path, t);
}

std::vector<EstimatePoint> read_estimates(const fs::path& path) {
    const auto t = read_csv(path);
    const auto ct = t.column("t"), cx = t.column("x"), cy = t.column("y");
    std::vector<EstimatePoint> out;
    for (const auto& r : t.rows) out.push_back({parse_double(r[ct]), parse_double(r[cx]), parse_double(r[cy])});
    return out;
}

void write_report(const fs::path& path, const EvalReport& rep) {
    CsvTable t;
    t.header = {"metric", "value"};
    t.rows = {{"mean_error_m", format_double(rep.mean_error)},
              {"std_error_m", format_double(rep.std_error)},
              {"submeter_probability", format_double(rep.submeter)},
              {"accuracy_rate", format_double(rep.accuracy_rate)},
              {"n_estimates", std::to_string(rep.count)}};
    write_csv(path, t);
}

void write_cdf(const fs::path& path, const EvalReport& rep) {
    CsvTable t;
    t.header = {"error_m", "cum_prob"};
    for (const auto& [e, p] : rep.cdf) t.rows.push_back({format_double(e), format_double(p)});
    write_csv(path, t);
}

// ---- configuration --------------------------------------------------------

LensConfig load_lens_config(const fs::path& path) {
    const json j = load_json(path);
    const std::string w = path.string();
    check_keys(j, {"description", "lenses", "geometry", "fov_half_width_deg", "angular_resolution_rad"}, w);
    LensConfig cfg;
    const json lenses = get<json>(j, "lenses", w);
    if (!lenses.is_array() || lenses.empty()) throw ConfigError(w + ": 'lenses' must be a non-empty list");
    for (const auto& l : lenses) {
        check_keys(l, {"axis_angle_deg", "aperture_width_m", "focal_length_m"}, w + " lens");
        LensElement e;
        e.axis_angle = get<double>(l, "axis_angle_deg", w) * kDeg;
        e.aperture_width = get<double>(l, "aperture_width_m", w);
        e.focal_length = get<double>(l, "focal_length_m", w);
        validate(e);
        cfg.lenses.push_back(e);
    }
    const json g = get<json>(j, "geometry", w);
    check_keys(g, {"element_width_m", "element_gap_m", "positive_side"}, w + " geometry");
    cfg.geometry.element_width = get<double>(g, "element_width_m", w);
    cfg.geometry.element_gap = get<double>(g, "element_gap_m", w);
    const auto side = get_or<std::string>(g, "positive_side", "left", w);
    if (side == "left")
        cfg.geometry.positive_side = Side::Left;
    else if (side == "right")
        cfg.geometry.positive_side = Side::Right;
    else
        throw ConfigError(w + ": positive_side must be 'left' or 'right'");
    validate(cfg.geometry);
    cfg.fov_half_width = get_or<double>(j, "fov_half_width_deg", 60.0, w) * kDeg;
    cfg.angular_resolution = get_or<double>(j, "angular_resolution_rad", 0.0002, w);
    return cfg;
}

SensorParams load_sensor_config(const fs::path& path, double* sample_rate) {
    const json j = load_json(path);
    const std::string w = path.string();
    check_keys(j, {"description", "a_gain", "b_coef", "c_coef", "sample_rate_hz"}, w);
    SensorParams p{get<double>(j, "a_gain", w), get<double>(j, "b_coef", w), get<double>(j, "c_coef", w)};
    validate(p);
    const double fs_hz = get_or<double>(j, "sample_rate_hz", 100.0, w);
    if (!(fs_hz >= 20.0)) throw ConfigError(w + ": sample_rate_hz must be >= 20");
    if (sample_rate) *sample_rate = fs_hz;
    return p;
}

std::vector<SensorPose> load_poses(const fs::path& path) {
    const json j = load_json(path);
    const std::string w = path.string();
    check_keys(j, {"description", "sensors"}, w);
    const json list = get<json>(j, "sensors", w);
    if (!list.is_array() || list.empty()) throw ConfigError(w + ": 'sensors' must be a non-empty list");
    std::vector<SensorPose> out;
    std::set<std::string> ids;
    for (const auto& s : list) {
        check_keys(s, {"sensor_id", "a_m", "b_m", "orientation_deg", "theta_c_deg"}, w + " sensor");
        SensorPose p;
        p.sensor_id = get<std::string>(s, "sensor_id", w);
        if (!ids.insert(p.sensor_id).second) throw ConfigError(w + ": duplicate sensor_id '" + p.sensor_id + "'");
        p.a = get<double>(s, "a_m", w);
        p.b = get<double>(s, "b_m", w);
        p.orientation = get<double>(s, "orientation_deg", w) * kDeg;
        p.theta_c = get_or<double>(s, "theta_c_deg", 0.0, w) * kDeg;
        if (p.theta_c < 0.0) throw ConfigError(w + ": theta_c_deg must be > 0");
        out.push_back(p);
    }
    return out;
}

TrackerConfig load_tracker_config(const fs::path& path) {
    const json j = load_json(path);
    const std::string w = path.string();
    check_keys(j,
               {"description", "n_particles", "period_s", "sigma_pos_m", "sigma_vel_mps", "jump_prob", "jump_sigma_mps",
                "likelihood", "sigma_n", "sigma_theta_deg", "resample_ess_fraction", "area_bounds_m",
                "init_vel_sigma_mps", "outside_factor", "max_speed_mps", "overspeed_factor"},
               w);
    TrackerConfig c;
    c.n_particles = get_or<std::size_t>(j, "n_particles", c.n_particles, w);
    c.period = get_or<double>(j, "period_s", c.period, w);
    c.noise.sigma_pos = get_or<double>(j, "sigma_pos_m", c.noise.sigma_pos, w);
    c.noise.sigma_vel = get_or<double>(j, "sigma_vel_mps", c.noise.sigma_vel, w);
    c.noise.jump_prob = get_or<double>(j, "jump_prob", c.noise.jump_prob, w);
    c.noise.jump_sigma = get_or<double>(j, "jump_sigma_mps", c.noise.jump_sigma, w);
    const auto lik = get_or<std::string>(j, "likelihood", "angle", w);
    if (lik == "angle")
        c.likelihood = Likelihood::Angle;
    else if (lik == "cosine")
        c.likelihood = Likelihood::Cosine;
    else
        throw ConfigError(w + ": likelihood must be 'angle' or 'cosine'");
    c.sigma_n = get_or<double>(j, "sigma_n", c.sigma_n, w);
    c.sigma_theta = get_or<double>(j, "sigma_theta_deg", c.sigma_theta / kDeg, w) * kDeg;
    c.resample_ess_fraction = get_or<double>(j, "resample_ess_fraction", c.resample_ess_fraction, w);
    if (j.contains("area_bounds_m")) {
        const auto b = get<std::vector<double>>(j, "area_bounds_m", w);
        if (b.size() != 4) throw ConfigError(w + ": area_bounds_m must be [x_min, x_max, y_min, y_max]");
        c.area = {b[0], b[1], b[2], b[3]};
    }
    c.init_vel_sigma = get_or<double>(j, "init_vel_sigma_mps", c.init_vel_sigma, w);
    c.outside_factor = get_or<double>(j, "outside_factor", c.outside_factor, w);
    c.max_speed = get_or<double>(j, "max_speed_mps", c.max_speed, w);
    c.overspeed_factor = get_or<double>(j, "overspeed_factor", c.overspeed_factor, w);
    validate(c);
    return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
    const json j = load_json(path);
    const std::string w = path.string();
    check_keys(j,
               {"description", "lens", "sensor", "poses", "tracker", "period_s", "lambda", "prominence",
                "turning_ratio", "seed", "speed_mps", "repeats", "burn_in_s", "noise_std", "body", "sample_rate_hz"},
               w);
    PipelineConfig c;
    c.lens_path = resolve(path, get<std::string>(j, "lens", w));
    c.sensor_path = resolve(path, get<std::string>(j, "sensor", w));
    c.poses_path = resolve(path, get<std::string>(j, "poses", w));
    if (j.contains("tracker")) c.tracker_path = resolve(path, get<std::string>(j, "tracker", w));
    for (const auto& p : {c.lens_path, c.sensor_path, c.poses_path, c.tracker_path})
        if (!p.empty() && !fs::exists(p)) throw ConfigError(w + ": referenced file '" + p.string() + "' does not exist");
    c.period = get_or<double>(j, "period_s", c.period, w);
    if (!(c.period > 0.0)) throw ConfigError(w + ": period_s must be > 0");
    c.reg_lambda = get_or<double>(j, "lambda", c.reg_lambda, w);
    if (j.contains("prominence")) {
        const json p = j.at("prominence");
        check_keys(p, {"multiplier", "background_s", "hop_s", "floor_fraction", "fixed"}, w + " prominence");
        c.prominence.multiplier = get_or<double>(p, "multiplier", c.prominence.multiplier, w);
        c.prominence.background_seconds = get_or<double>(p, "background_s", c.prominence.background_seconds, w);
        c.prominence.hop_seconds = get_or<double>(p, "hop_s", c.prominence.hop_seconds, w);
        c.prominence.floor_fraction = get_or<double>(p, "floor_fraction", c.prominence.floor_fraction, w);
        c.prominence.fixed = get_or<double>(p, "fixed", c.prominence.fixed, w);
    }
    c.turning_ratio = get_or<double>(j, "turning_ratio", c.turning_ratio, w);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed, w);
    c.speed = get_or<double>(j, "speed_mps", c.speed, w);
    c.repeats = get_or<int>(j, "repeats", c.repeats, w);
    c.burn_in = get_or<double>(j, "burn_in_s", c.burn_in, w);
    if (j.contains("noise_std") && !(j.at("noise_std").is_string() && j.at("noise_std") == "auto"))
        c.noise_std = get<double>(j, "noise_std", w);
    if (j.contains("body")) {
        const json b = j.at("body");
        check_keys(b, {"radius_m", "emission", "profile"}, w + " body");
        c.body.radius = get_or<double>(b, "radius_m", c.body.radius, w);
        c.body.emission = get_or<double>(b, "emission", c.body.emission, w);
        const auto prof = get_or<std::string>(b, "profile", "raised_cosine", w);
        if (prof == "raised_cosine")
            c.body.profile = BodyProfile::RaisedCosine;
        else if (prof == "uniform")
            c.body.profile = BodyProfile::Uniform;
        else
            throw ConfigError(w + ": body profile must be 'raised_cosine' or 'uniform'");
    }
    c.sample_rate = get_or<double>(j, "sample_rate_hz", c.sample_rate, w);
    return c;
}

}  // namespace pirtrack
