#pragma once

#include <stdexcept>
#include <string>

namespace qgem {

// Thrown when a physical value violates a kernel's domain (negative mass,
// overlapping branches, witness below the certifiable threshold, ...).
struct value_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown on malformed unit expressions or dimension mismatches.
struct unit_error : value_error {
    using value_error::value_error;
};

// Thrown on malformed config files, unknown keys, or unknown parameter paths.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace qgem
