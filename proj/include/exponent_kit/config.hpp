#pragma once

#include <cstddef>

namespace exponent_kit {

// Central numeric tolerances. Every module reads these instead of
// scattering magic constants.
struct Tolerances {
    double simplex_sum = 1e-12;       // mass must sum to 1 within this
    double descent_slack = 1e-12;     // allowed uphill noise in traces
    double agreement = 1e-7;          // cross-algorithm agreement
    double chain_rule = 1e-10;        // KL chain-rule identity
    double branch_consistency = 1e-10; // T1/T2 (T3/T4) closed-form overlap
};

inline constexpr Tolerances kTol{};

// Termination control for iterative runs.
struct StoppingRule {
    double rel_tol = 1e-10;   // stop when |delta| < rel_tol * max(1,|value|)
    std::size_t max_iters = 10000;
    double kkt_tol = 1e-8;    // source runs may stop on KKT residual

    static StoppingRule tight() { return StoppingRule{1e-13, 20000, 1e-10}; }
};

} // namespace exponent_kit
