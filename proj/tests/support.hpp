#pragma once

#include <random>

#include "magbeam/model.hpp"

namespace magbeam::testing {

/// Five-TX bench setup: 0.336 ohm coils, 50 ohm load, 6.78e6 rad/s, peak
/// limits 30*sqrt(2) V and 5*sqrt(2) A per TX.
SystemParams bench5_params(bool with_limits = true);
SystemModel bench5_model(bool with_limits = true);

/// Single-TX unit system: omega = 1, r1 = 1, r_p0 = 0, r_l0 = 1, M = 1.
SystemParams unit1_params();
SystemModel unit1_model();

struct RandomInstance {
    SystemParams params;
    double beta0 = 0.0;
    VectorXcd feasible_point;  // strictly feasible by construction
};

/// Seeded random system with a known feasible point; peak limits are drawn
/// so each is active at that point with probability about one half.
RandomInstance random_feasible_instance(std::mt19937_64& rng, bool with_limits = true);

double uniform(std::mt19937_64& rng, double lo, double hi);

} // namespace magbeam::testing
