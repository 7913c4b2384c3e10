#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "qfsim/errors.hpp"

namespace qfsim {

enum class Boundary : std::uint8_t { periodic, absorb };

inline const char* to_string(Boundary b) {
    return b == Boundary::periodic ? "periodic" : "absorb";
}

// Run parameters the model itself leaves open. Everything here is plain data;
// validate() is the single gate for value domains.
struct SimConfig {
    std::vector<std::int64_t> dims{16, 16, 16};
    double spacing = 1.0;     // lattice constant, natural units
    double timestep = 1.0;    // global step, natural units
    std::uint64_t seed = 1;
    double fluct_rate = 0.0;  // per cell-pair, per step base probability scale
    double volatile_prob = 0.0;
    int max_paths = 64;
    int graining = 16;        // angular bins per axis for split outcomes
    int max_steps = 100;
    Boundary boundary = Boundary::periodic;
    // Exponent on the normalized |amp1|^2 |amp2|^2 product in fluctuation
    // firing. 1 is the plain Born product.
    double fluct_exponent = 1.0;
    double alpha = 1.0 / 137.035999;
    double onshell_tol = 1e-9;       // relative to e^2
    double prune_threshold = 1e-14;  // on |amplitude| after channel merging
    int workers = 1;

    double coupling_e() const { return std::sqrt(4.0 * std::numbers::pi * alpha); }

    void validate() const {
        if (dims.empty()) throw ConfigError("dims must have at least one axis");
        for (auto d : dims)
            if (d < 1) throw ConfigError("every lattice dimension must be >= 1");
        if (!(spacing > 0.0)) throw ConfigError("spacing must be > 0");
        if (!(timestep > 0.0)) throw ConfigError("timestep must be > 0");
        if (fluct_rate < 0.0) throw ConfigError("fluct_rate must be >= 0");
        if (volatile_prob < 0.0 || volatile_prob > 1.0)
            throw ConfigError("volatile_prob must lie in [0,1]");
        if (max_paths < 1) throw ConfigError("max_paths must be >= 1");
        if (graining < 1) throw ConfigError("graining must be >= 1");
        if (max_steps < 0) throw ConfigError("max_steps must be >= 0");
        if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
        if (!(onshell_tol > 0.0)) throw ConfigError("onshell_tol must be > 0");
        if (prune_threshold < 0.0) throw ConfigError("prune_threshold must be >= 0");
        if (workers < 1) throw ConfigError("workers must be >= 1");
    }
};

} // namespace qfsim
