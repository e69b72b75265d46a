#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "gfmlab/ringdown.hpp"
#include "gfmlab/simulator.hpp"

namespace gfmlab {

/// Everything one scenario file describes.
struct RunConfig {
    Scenario scenario;
    SimConfig sim;
    ClassifyOptions analysis;
    double f1_hz = 50.0;   ///< nominal fundamental used by the resonance bands
    std::string out_dir;   ///< empty: derived from the file name

    bool operator==(const RunConfig&) const = default;
};

/// Strict INI parser. Unknown, duplicate or inapplicable keys throw ConfigError
/// naming the source and line.
RunConfig parse_config(std::istream& in, const std::string& source = "<input>");
RunConfig load_config(const std::filesystem::path& path);

/// Canonical form: every applicable key, SI base, p.u. impedances, rad/s rates,
/// full precision. parse_config(dump_config(c)) == c.
std::string dump_config(const RunConfig& cfg);

}  // namespace gfmlab
