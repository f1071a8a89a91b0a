#pragma once

#include <cstdint>
#include <vector>

namespace pirtrack {

struct LensElement {
    double axis_angle = 0.0;  // rad, sensor frame
    double aperture_width = 0.0;  // m
    double focal_length = 0.0;  // m
};

enum class Side { Left, Right };

struct SensingGeometry {
    double element_width = 0.0;  // m
    double element_gap = 0.0;    // m, center to center
    Side positive_side = Side::Left;
};

enum class Polarity { Positive, Negative, Gap };

struct Sector {
    double start = 0.0;
    double end = 0.0;
    Polarity polarity = Polarity::Gap;
};

struct ZoneAxis {
    double angle = 0.0;
    Polarity polarity = Polarity::Gap;
};

struct ZoneLayout {
    std::vector<Sector> sectors;
    std::vector<ZoneAxis> axes;
    double theta_c = 0.0;

    // Polarity at an azimuth by lookup in the merged sectors.
    Polarity polarity_at(double azimuth) const;
    double fov_min() const { return sectors.empty() ? 0.0 : sectors.front().start; }
    double fov_max() const { return sectors.empty() ? 0.0 : sectors.back().end; }
};

// Everything a lens config file describes.
struct LensConfig {
    std::vector<LensElement> lenses;
    SensingGeometry geometry;
    double fov_half_width = 1.0471975511965976;  // rad (60 deg)
    double angular_resolution = 0.0002;          // rad
};

void validate(const LensElement& lens);
void validate(const SensingGeometry& geom);

// Left means positive landing offsets (counter-clockwise of the lens axis)
// hit the positive element.
Polarity classify_angle(double source_azimuth, const std::vector<LensElement>& lenses,
                        const SensingGeometry& geom);

ZoneLayout sweep_zones(const std::vector<LensElement>& lenses, const SensingGeometry& geom,
                       double angular_resolution = 0.0002, double fov_half_width = 1.0471975511965976);

ZoneLayout sweep_zones(const LensConfig& cfg);

std::vector<double> neighbor_angles(const ZoneLayout& layout);

struct LabeledPoint {
    double x = 0.0;
    double y = 0.0;
    Polarity polarity = Polarity::Gap;
};

// Points scattered uniformly (by area) over the sensing wedge of the layout.
std::vector<LabeledPoint> render_layout(const ZoneLayout& layout, double range, std::size_t n_points,
                                        std::uint64_t seed);

int polarity_sign(Polarity p);
const char* to_string(Polarity p);

}  // namespace pirtrack
