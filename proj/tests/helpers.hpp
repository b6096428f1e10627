#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "exponent_kit/channel.hpp"
#include "exponent_kit/source.hpp"

namespace ek = exponent_kit;

inline double binary_entropy_nats(double p) {
    auto xlx = [](double v) { return v > 0.0 ? v * std::log(v) : 0.0; };
    return -xlx(p) - xlx(1.0 - p);
}

inline ek::ChannelProblem bsc(double p) {
    return ek::ChannelProblem::uncosted(ek::Kernel(2, 2, {1.0 - p, p, p, 1.0 - p}));
}

// W(y|x) = r(y) for every x: the output ignores the input.
inline ek::ChannelProblem useless_channel(const std::vector<double>& r) {
    std::vector<double> flat;
    for (int i = 0; i < 2; ++i) flat.insert(flat.end(), r.begin(), r.end());
    return ek::ChannelProblem::uncosted(ek::Kernel(2, r.size(), flat));
}

inline ek::SourceProblem binary_hamming_source(double p0) {
    return ek::SourceProblem(ek::ProbVec({p0, 1.0 - p0}), 2, {0, 1, 1, 0});
}

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen);
    }

    // Strictly positive random distribution (Dirichlet-ish via exponentials).
    ek::ProbVec prob_vec(std::size_t n) {
        std::vector<double> w(n);
        for (auto& v : w) v = 0.05 + std::exponential_distribution<double>(1.0)(gen);
        return ek::ProbVec(std::move(w));
    }

    ek::Kernel kernel(std::size_t n_in, std::size_t n_out) {
        std::vector<ek::ProbVec> rows;
        for (std::size_t i = 0; i < n_in; ++i) rows.push_back(prob_vec(n_out));
        return ek::Kernel(std::move(rows));
    }

    ek::JointDist joint(std::size_t nx, std::size_t ny) {
        std::vector<double> m(nx * ny);
        for (auto& v : m) v = 0.05 + std::exponential_distribution<double>(1.0)(gen);
        return ek::JointDist(nx, ny, std::move(m));
    }

    ek::ChannelProblem channel(std::size_t nx, std::size_t ny, double max_cost = 0.0) {
        std::vector<double> cost(nx, 0.0);
        if (max_cost > 0.0)
            for (auto& c : cost) c = uniform(0.0, max_cost);
        return ek::ChannelProblem(kernel(nx, ny), std::move(cost));
    }

    // Random source with a zero-distortion reproduction for every symbol.
    ek::SourceProblem source(std::size_t nx, std::size_t ny, double max_d = 1.0) {
        std::vector<double> d(nx * ny);
        for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t y = 0; y < ny; ++y)
                d[x * ny + y] = (y == x % ny) ? 0.0 : uniform(0.1, max_d);
        return ek::SourceProblem(prob_vec(nx), ny, std::move(d));
    }
};
