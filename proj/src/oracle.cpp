#include "exponent_kit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "exponent_kit/util.hpp"

namespace exponent_kit {

GridSpec::GridSpec(unsigned n, unsigned cells) : resolution(n), max_cells(cells) {
    if (n < 2) throw std::invalid_argument("GridSpec: resolution must be >= 2");
}

namespace {

// Evaluate Theta (channel) on raw lattice masses without constructing a
// JointDist. counts sum to resolution.
double theta_lattice_channel(double lambda, double mu, const std::vector<unsigned>& counts,
                             unsigned n, const ChannelProblem& prob) {
    std::size_t nx = prob.nx(), ny = prob.ny();
    double inv = 1.0 / static_cast<double>(n);
    double val = 0.0;
    std::vector<double> qx(nx, 0.0), qy(ny, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) {
            double m = counts[x * ny + y] * inv;
            qx[x] += m;
            qy[y] += m;
        }
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) {
            double m = counts[x * ny + y] * inv;
            if (m == 0.0) continue;
            if (prob.w(x, y) == 0.0) return kInf;
            val += m * ((1.0 - lambda) * std::log(m / qx[x]) + lambda * std::log(qy[y]) -
                        std::log(prob.w(x, y)) + mu * prob.cost[x]);
        }
    return val;
}

double theta_lattice_source(double lambda, double mu, const std::vector<unsigned>& counts,
                            unsigned n, const SourceProblem& prob) {
    std::size_t nx = prob.nx(), ny = prob.ny();
    double inv = 1.0 / static_cast<double>(n);
    double val = 0.0;
    std::vector<double> qx(nx, 0.0), qy(ny, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) {
            double m = counts[x * ny + y] * inv;
            qx[x] += m;
            qy[y] += m;
        }
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) {
            double m = counts[x * ny + y] * inv;
            if (m == 0.0) continue;
            if (prob.px[x] == 0.0) return kInf;
            val += m * ((1.0 - lambda) * std::log(qx[x]) + lambda * std::log(m / qy[y]) -
                        std::log(prob.px[x]) + mu * prob.d(x, y));
        }
    return val;
}

struct LatticeBest {
    double value = kInf;
    std::vector<unsigned> counts;

    // Lexicographic tie-break on exact equality keeps determinism.
    void offer(double v, const std::vector<unsigned>& c) {
        if (counts.empty() || v < value) {
            value = v;
            counts = c;
        } else if (v == value && c < counts) {
            counts = c;
        }
    }
};

template <typename Eval>
GridMinimum grid_minimize(std::size_t nx, std::size_t ny, const GridSpec& grid,
                          Eval&& eval) {
    std::size_t cells = nx * ny;
    if (cells > grid.max_cells)
        throw std::invalid_argument("grid_minimize: alphabet exceeds the cell guard");
    unsigned n = grid.resolution;

    // Parallel over the first cell's count; each worker enumerates the rest
    // recursively. Chunk results merge in first-count order, so the combined
    // argmin is deterministic.
    std::vector<LatticeBest> per_first(n + 1);
    parallel_for(n + 1, [&](std::size_t first) {
        LatticeBest best;
        std::vector<unsigned> counts(cells, 0);
        counts[0] = static_cast<unsigned>(first);
        unsigned rem = n - static_cast<unsigned>(first);
        // enumerate counts[1..cells-1] summing to rem, lexicographically
        auto recurse = [&](auto&& self, std::size_t idx, unsigned left) -> void {
            if (idx == cells - 1) {
                counts[idx] = left;
                double v = eval(counts);
                if (std::isfinite(v)) best.offer(v, counts);
                return;
            }
            for (unsigned k = 0; k <= left; ++k) {
                counts[idx] = k;
                self(self, idx + 1, left - k);
            }
        };
        if (cells == 1) {
            counts[0] = n;
            double v = eval(counts);
            if (std::isfinite(v)) best.offer(v, counts);
        } else {
            recurse(recurse, 1, rem);
        }
        per_first[first] = std::move(best);
    });

    LatticeBest overall;
    for (const auto& b : per_first) {
        if (b.counts.empty()) continue;
        if (b.value < overall.value) {
            overall = b;
        } else if (b.value == overall.value && !overall.counts.empty() &&
                   b.counts < overall.counts) {
            overall = b;
        }
    }
    if (overall.counts.empty())
        throw std::domain_error("grid_minimize: every lattice point is infeasible");
    std::vector<double> mass(cells);
    for (std::size_t i = 0; i < cells; ++i)
        mass[i] = static_cast<double>(overall.counts[i]) / static_cast<double>(n);
    return GridMinimum{overall.value, JointDist(nx, ny, std::move(mass))};
}

} // namespace

GridMinimum grid_min_theta_channel(const SlopeParams& params, const ChannelProblem& prob,
                                   const GridSpec& grid) {
    return grid_minimize(prob.nx(), prob.ny(), grid, [&](const std::vector<unsigned>& c) {
        return theta_lattice_channel(params.lambda, params.mu(), c, grid.resolution, prob);
    });
}

GridMinimum grid_min_theta_source(const SlopeParams& params, const SourceProblem& prob,
                                  const GridSpec& grid) {
    return grid_minimize(prob.nx(), prob.ny(), grid, [&](const std::vector<unsigned>& c) {
        return theta_lattice_source(params.lambda, params.mu(), c, grid.resolution, prob);
    });
}

namespace {

AgreementRow make_row(double lambda, double nu,
                      std::vector<std::pair<std::string, double>> values) {
    double lo = kInf, hi = -kInf;
    for (const auto& [name, v] : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return AgreementRow{lambda, nu, std::move(values), hi - lo};
}

} // namespace

AgreementReport channel_agreement_report(const ChannelProblem& prob,
                                         const std::vector<SlopeParams>& grid,
                                         const StoppingRule& stop, double tolerance) {
    AgreementReport report;
    report.tolerance = tolerance;
    for (const SlopeParams& p : grid) {
        std::vector<std::pair<std::string, double>> vals;
        if (p.lambda == 0.0) {
            vals.emplace_back("closed_lambda0", theta_min_closed_lambda0(p.mu(), prob));
        } else if (p.lambda == 1.0) {
            vals.emplace_back("closed_lambda1", theta_min_closed_lambda1(p.mu(), prob));
        } else {
            JointDist init = JointDist::uniform_on_support(prob.w);
            vals.emplace_back("tz", run_tz(p, prob, stop).value);
            vals.emplace_back("algB", run_alg_b(p, prob, stop).value);
            vals.emplace_back("jo", run_jo_channel(p, prob, stop).value);
            vals.emplace_back(
                "family_t1",
                run_family(p, FamilyWeights::tz(), prob, init, stop).value);
            vals.emplace_back(
                "family_t2",
                run_family(p, FamilyWeights::alg_b(p.lambda), prob, init, stop).value);
            vals.emplace_back(
                "family_t1t2",
                run_family(p, FamilyWeights::jo(p.lambda), prob, init, stop).value);
            vals.emplace_back("arimoto",
                              run_arimoto_channel(-p.lambda, p.nu, prob, stop).value);
        }
        report.rows.push_back(make_row(p.lambda, p.nu, std::move(vals)));
    }
    report.max_deviation = 0.0;
    for (const auto& r : report.rows)
        report.max_deviation = std::max(report.max_deviation, r.max_deviation);
    report.pass = report.max_deviation <= tolerance;
    return report;
}

AgreementReport source_agreement_report(const SourceProblem& prob,
                                        const std::vector<SlopeParams>& grid,
                                        const StoppingRule& stop, double tolerance) {
    AgreementReport report;
    report.tolerance = tolerance;
    for (const SlopeParams& p : grid) {
        std::vector<std::pair<std::string, double>> vals;
        if (p.lambda == 0.0) {
            vals.emplace_back("closed_lambda0", theta_s_min_closed_lambda0());
        } else if (p.lambda == 1.0) {
            vals.emplace_back("closed_lambda1", theta_s_min_closed_lambda1(p.mu(), prob));
        } else {
            JointDist init = JointDist::uniform(prob.nx(), prob.ny());
            vals.emplace_back("gck1", run_gck1(p, prob, stop).value);
            vals.emplace_back("gck2", run_gck2(p, prob, stop).value);
            vals.emplace_back("jo", run_jo_source(p, prob, stop).value);
            vals.emplace_back(
                "family_t3",
                run_source_family(p, FamilyWeights::gck1(p.lambda), prob, init, stop).value);
            vals.emplace_back(
                "family_t4",
                run_source_family(p, FamilyWeights::gck2(), prob, init, stop).value);
            vals.emplace_back(
                "family_t3t4",
                run_source_family(p, FamilyWeights::jo_source(p.lambda), prob, init, stop)
                    .value);
            vals.emplace_back("arimoto",
                              run_arimoto_source(-p.lambda, p.nu, prob, stop).value);
        }
        report.rows.push_back(make_row(p.lambda, p.nu, std::move(vals)));
    }
    report.max_deviation = 0.0;
    for (const auto& r : report.rows)
        report.max_deviation = std::max(report.max_deviation, r.max_deviation);
    report.pass = report.max_deviation <= tolerance;
    return report;
}

bool descent_audit(const IterationTrace& trace) {
    for (std::size_t i = 1; i < trace.objective.size(); ++i)
        if (trace.objective[i] > trace.objective[i - 1] + kTol.descent_slack) return false;
    return true;
}

} // namespace exponent_kit
