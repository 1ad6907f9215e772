#pragma once

#include <cstdint>

#include "magbeam/model.hpp"

namespace magbeam {

struct OracleConfig {
    int restarts = 50;
    int max_iters = 400;      // inner projected-gradient iterations per outer round
    int outer_iters = 30;     // multiplier / penalty updates
    double step_tol = 1e-12;  // relative step-size stopping threshold
    std::uint64_t seed = 1;
};

/// Uncoordinated benchmark: every TX carries the same in-phase current,
/// scaled to just meet the load-power target. Status is Infeasible when
/// that scaling breaks a peak limit.
CurrentSolution equal_current_min_power(const SystemModel& model, double beta0);

/// Largest load power the equal-current scheme can deliver under the peak
/// limits, with the limiting solution.
std::pair<double, CurrentSolution> equal_current_max_power(const SystemModel& model);

/// Independent local-search oracle: multistart projected-gradient descent
/// with augmented-Lagrangian handling of the load-power and peak-voltage
/// constraints (peak-current limits are enforced by projection).
/// Deterministic for a fixed seed; ties between restarts are broken by the
/// lowest restart index.
CurrentSolution multistart_qcqp(const SystemModel& model, double beta0,
                                const OracleConfig& config = {});

} // namespace magbeam
