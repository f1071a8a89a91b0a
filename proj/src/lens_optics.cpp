#include "pirtrack/lens_optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pirtrack/errors.hpp"
#include "pirtrack/rng.hpp"

namespace pirtrack {

void validate(const LensElement& lens) {
    if (!(lens.focal_length > 0.0)) throw ConfigError("lens focal_length must be > 0");
    if (!(lens.aperture_width > 0.0)) throw ConfigError("lens aperture_width must be > 0");
    if (!(std::abs(lens.axis_angle) < std::numbers::pi / 2))
        throw ConfigError("lens axis_angle must lie in (-90, 90) degrees");
}

void validate(const SensingGeometry& geom) {
    if (!(geom.element_width > 0.0)) throw ConfigError("element_width must be > 0");
    if (!(geom.element_gap >= geom.element_width))
        throw ConfigError("element_gap must be >= element_width (elements would overlap)");
}

int polarity_sign(Polarity p) {
    switch (p) {
        case Polarity::Positive: return 1;
        case Polarity::Negative: return -1;
        default: return 0;
    }
}

const char* to_string(Polarity p) {
    switch (p) {
        case Polarity::Positive: return "positive";
        case Polarity::Negative: return "negative";
        default: return "gap";
    }
}

Polarity classify_angle(double source_azimuth, const std::vector<LensElement>& lenses,
                        const SensingGeometry& geom) {
    const LensElement* best = nullptr;
    double best_dev = 0.0;
    for (const auto& lens : lenses) {
        const double dev = std::abs(source_azimuth - lens.axis_angle);
        const double half = std::atan(lens.aperture_width / (2.0 * lens.focal_length));
        if (dev > half) continue;
        if (!best || dev < best_dev) {
            best = &lens;
            best_dev = dev;
        }
    }
    if (!best) return Polarity::Gap;

    const double offset = best->focal_length * std::tan(source_azimuth - best->axis_angle);
    const double pos_center = geom.positive_side == Side::Left ? geom.element_gap / 2 : -geom.element_gap / 2;
    const double half_w = geom.element_width / 2;
    if (std::abs(offset - pos_center) <= half_w) return Polarity::Positive;
    if (std::abs(offset + pos_center) <= half_w) return Polarity::Negative;
    return Polarity::Gap;
}

std::vector<double> neighbor_angles(const ZoneLayout& layout) {
    if (layout.axes.size() < 2) throw DegenerateLayout("layout has fewer than 2 zones; theta_c undefined");
    std::vector<double> out;
    out.reserve(layout.axes.size() - 1);
    for (std::size_t i = 1; i < layout.axes.size(); ++i)
        out.push_back(layout.axes[i].angle - layout.axes[i - 1].angle);
    return out;
}

static double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

ZoneLayout sweep_zones(const std::vector<LensElement>& lenses, const SensingGeometry& geom,
                       double angular_resolution, double fov_half_width) {
    if (!(angular_resolution > 0.0) || angular_resolution > 0.0005)
        throw ConfigError("angular_resolution must be in (0, 0.0005] rad");
    if (!(fov_half_width > 0.0) || fov_half_width >= std::numbers::pi / 2)
        throw ConfigError("field of view half-width must be in (0, 90) degrees");
    for (const auto& l : lenses) validate(l);
    validate(geom);

    const auto n = static_cast<std::size_t>(std::llround(2.0 * fov_half_width / angular_resolution));
    const double step = 2.0 * fov_half_width / static_cast<double>(n);
    const double lo = -fov_half_width;

    ZoneLayout layout;
    Polarity run = classify_angle(lo + 0.5 * step, lenses, geom);
    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        const Polarity p = i < n ? classify_angle(lo + (static_cast<double>(i) + 0.5) * step, lenses, geom) : run;
        if (i == n || p != run) {
            layout.sectors.push_back({lo + static_cast<double>(run_start) * step, lo + static_cast<double>(i) * step, run});
            run = p;
            run_start = i;
        }
    }
    for (const auto& s : layout.sectors)
        if (s.polarity != Polarity::Gap) layout.axes.push_back({0.5 * (s.start + s.end), s.polarity});

    layout.theta_c = mean_of(neighbor_angles(layout));
    return layout;
}

ZoneLayout sweep_zones(const LensConfig& cfg) {
    return sweep_zones(cfg.lenses, cfg.geometry, cfg.angular_resolution, cfg.fov_half_width);
}

Polarity ZoneLayout::polarity_at(double azimuth) const {
    if (sectors.empty() || azimuth < sectors.front().start || azimuth >= sectors.back().end) return Polarity::Gap;
    auto it = std::upper_bound(sectors.begin(), sectors.end(), azimuth,
                               [](double a, const Sector& s) { return a < s.start; });
    return std::prev(it)->polarity;
}

std::vector<LabeledPoint> render_layout(const ZoneLayout& layout, double range, std::size_t n_points,
                                        std::uint64_t seed) {
    if (n_points == 0) throw ConfigError("render_layout needs n_points > 0");
    if (!(range > 0.0)) throw ConfigError("render_layout needs range > 0");
    const double a0 = layout.fov_min();
    const double a1 = layout.fov_max();
    std::vector<LabeledPoint> pts(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        Stream s(seed, {i});
        const double r = range * std::sqrt(s.uniform());
        const double a = s.uniform(a0, a1);
        pts[i] = {r * std::cos(a), r * std::sin(a), layout.polarity_at(a)};
    }
    return pts;
}

}  // namespace pirtrack
