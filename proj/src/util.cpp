#include "exponent_kit/util.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

namespace exponent_kit {

double log_sum_exp(const std::vector<double>& v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v)
        if (std::isfinite(x)) s += std::exp(x - m);
    return m + std::log(s);
}

ScalarOpt golden_max(const std::function<double(double)>& f, double lo, double hi,
                     double arg_tol, std::size_t max_iter) {
    const double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (std::size_t it = 0; it < max_iter && (b - a) > arg_tol; ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    double mid = 0.5 * (a + b);
    return {mid, f(mid)};
}

ScalarOpt maximize_over_nu(const std::function<double(double)>& f,
                           double nu_max, std::size_t grid_points) {
    double hi = nu_max;
    // Expand while the right edge keeps winning.
    for (int round = 0; round < 6; ++round) {
        if (f(hi) > f(0.75 * hi) && f(hi) > f(0.0)) hi *= 2.0;
        else break;
    }
    std::vector<double> grid(grid_points), vals(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i) {
        grid[i] = hi * static_cast<double>(i) / static_cast<double>(grid_points - 1);
        vals[i] = f(grid[i]);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid_points; ++i)
        if (vals[i] > vals[best]) best = i;
    double lo = grid[best == 0 ? 0 : best - 1];
    double up = grid[best + 1 < grid_points ? best + 1 : best];
    if (up <= lo) return {grid[best], vals[best]};
    ScalarOpt refined = golden_max(f, lo, up, 1e-10 * std::max(1.0, up));
    if (refined.value >= vals[best]) return refined;
    return {grid[best], vals[best]};
}

ScalarOpt minimize_over_nu(const std::function<double(double)>& f,
                           double nu_max, std::size_t grid_points) {
    ScalarOpt r = maximize_over_nu([&](double nu) { return -f(nu); }, nu_max, grid_points);
    return {r.arg, -r.value};
}

std::size_t thread_cap() {
    std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("EXPONENT_KIT_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) hw = std::min<std::size_t>(hw, static_cast<std::size_t>(v));
    }
    return hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    std::size_t workers = std::min(thread_cap(), n);
    if (workers <= 1 || n < 64) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                body(i);
            }
        });
    for (auto& th : pool) th.join();
}

} // namespace exponent_kit
