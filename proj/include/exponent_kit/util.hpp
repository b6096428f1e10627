#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace exponent_kit {

// log(sum_i exp(v_i)); entries may be -inf (empty terms). Returns -inf only
// if every entry is -inf.
double log_sum_exp(const std::vector<double>& v);

struct ScalarOpt {
    double arg = 0.0;
    double value = 0.0;
};

// Golden-section maximization of f on [lo, hi]; f is assumed unimodal there.
ScalarOpt golden_max(const std::function<double(double)>& f, double lo, double hi,
                     double arg_tol = 1e-9, std::size_t max_iter = 200);

// sup_{nu >= 0} f(nu). Coarse grid on [0, nu_max] to bracket the maximum
// (robust when unimodality is in doubt), golden-section refinement between
// the bracketing neighbors, and doubling of nu_max while f still increases
// at the right end.
ScalarOpt maximize_over_nu(const std::function<double(double)>& f,
                           double nu_max = 50.0, std::size_t grid_points = 33);

// inf_{nu >= 0} f(nu), same scheme.
ScalarOpt minimize_over_nu(const std::function<double(double)>& f,
                           double nu_max = 50.0, std::size_t grid_points = 33);

// Parallel map over [0, n): runs body(i) on up to EXPONENT_KIT_THREADS
// threads (default: hardware concurrency). Falls back to serial for small n.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

std::size_t thread_cap();

} // namespace exponent_kit
