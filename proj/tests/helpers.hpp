#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>

#include "pirtrack/io.hpp"

namespace testing {

inline constexpr double kDeg = std::numbers::pi / 180.0;

inline std::filesystem::path config_path(const std::string& name) {
    return std::filesystem::path(PIRTRACK_CONFIG_DIR) / name;
}

inline const pirtrack::ZoneLayout& reference_layout() {
    static const pirtrack::ZoneLayout layout = pirtrack::sweep_zones(pirtrack::load_lens_config(config_path("reference_lens.cfg")));
    return layout;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto d = std::filesystem::temp_directory_path() / ("pirtrack_test_" + name);
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
}

}  // namespace testing
