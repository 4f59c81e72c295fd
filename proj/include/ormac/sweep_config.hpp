#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ormac/schemes.hpp"

namespace ormac {

// One "[sweep]" section: an axis name, its values, and an optional per-section
// trial count (-1 means inherit the file-level / CLI trial count).
struct SweepSection {
    std::string axis;
    std::vector<double> values;
    std::int64_t trials = -1;
};

// Parsed sweep configuration. Flat "key = value" lines before the first
// section set the run mode, trial budget, seed, thread count, and base
// scenario inputs; each "[sweep]" section then names one axis to vary.
struct SweepConfig {
    Mode mode = Mode::mac;
    bool mode_set = false;
    std::int64_t trials = 1000;
    bool trials_set = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
    Scenario base;
    std::vector<SweepSection> sections;
};

// Parses config text. Diagnostics carry 1-based line numbers; any problem
// throws std::invalid_argument.
SweepConfig parse_sweep_config(const std::string& text);

// Reads and parses a config file; unreadable files throw io_error.
SweepConfig load_sweep_config(const std::filesystem::path& path);

}  // namespace ormac
