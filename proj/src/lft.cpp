#include "exponent_kit/lft.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "exponent_kit/util.hpp"

namespace exponent_kit {

SampledFunction::SampledFunction(std::vector<double> p, std::vector<double> v)
    : params(std::move(p)), values(std::move(v)) {
    if (params.empty() || params.size() != values.size())
        throw std::invalid_argument("SampledFunction: empty or mismatched grids");
    for (std::size_t i = 1; i < params.size(); ++i)
        if (!(params[i] > params[i - 1]))
            throw std::invalid_argument("SampledFunction: params must be strictly increasing");
}

std::vector<LftPoint> lft_1d(const SampledFunction& f, const std::vector<double>& y_grid) {
    if (y_grid.empty()) throw std::invalid_argument("lft_1d: empty target grid");
    std::vector<LftPoint> out;
    out.reserve(y_grid.size());
    for (double y : y_grid) {
        double best = -kInf, arg = f.params.front();
        for (std::size_t i = 0; i < f.params.size(); ++i) {
            if (!std::isfinite(f.values[i])) continue; // +inf samples never support
            double v = f.params[i] * y - f.values[i];
            if (v > best) {
                best = v;
                arg = f.params[i];
            }
        }
        out.push_back(LftPoint{best, arg});
    }
    return out;
}

namespace {

struct SlopePoint {
    double slope;
    double nu_star;
    double intercept; // supporting-line value at R = 0
};

ExponentCurve assemble_curve(const std::vector<double>& r_grid,
                             const std::vector<SlopePoint>& lines, double sign) {
    // sign = +1: exponent = max_j (slope_j * R + intercept_j)   (strong converse)
    // sign = -1: exponent = max_j (-slope_j * R + intercept_j)  (error mode)
    ExponentCurve curve;
    curve.rate = r_grid;
    curve.exponent.resize(r_grid.size());
    curve.lambda_star.resize(r_grid.size());
    curve.nu_star.resize(r_grid.size());
    curve.intercept.resize(r_grid.size());
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        double best = -kInf;
        std::size_t arg = 0;
        for (std::size_t j = 0; j < lines.size(); ++j) {
            double v = sign * lines[j].slope * r_grid[i] + lines[j].intercept;
            if (v > best) {
                best = v;
                arg = j;
            }
        }
        curve.exponent[i] = best;
        curve.lambda_star[i] = lines[arg].slope;
        curve.nu_star[i] = lines[arg].nu_star;
        curve.intercept[i] = lines[arg].intercept;
    }
    return curve;
}

std::vector<double> uniform_slopes(std::size_t n) {
    std::vector<double> s(n);
    for (std::size_t j = 0; j < n; ++j)
        s[j] = static_cast<double>(j) / static_cast<double>(n - 1);
    return s;
}

} // namespace

ScalarOpt channel_gdk_slope(double lambda, double gamma, const ChannelProblem& prob,
                            const CurveOptions& opts) {
    if (lambda == 0.0) return ScalarOpt{0.0, 0.0};
    auto objective = [&](double nu) {
        if (lambda == 1.0) return -lambda * nu * gamma + theta_min_closed_lambda1(nu, prob);
        SlopeParams p(lambda, nu);
        return -lambda * nu * gamma + theta_min(p, prob, opts.stop);
    };
    return maximize_over_nu(objective, opts.nu_max);
}

ScalarOpt source_gck_slope(double lambda, double delta, const SourceProblem& prob,
                           const CurveOptions& opts, SourceCurveBackend backend) {
    if (lambda == 0.0) return ScalarOpt{0.0, 0.0};
    auto objective = [&](double nu) {
        if (lambda == 1.0)
            return theta_s_min_closed_lambda1(nu, prob) - lambda * nu * delta;
        SlopeParams p(lambda, nu);
        double tmin;
        if (backend == SourceCurveBackend::family) {
            JointDist init = JointDist::uniform(prob.nx(), prob.ny());
            tmin = run_source_family(p, FamilyWeights::jo_source(lambda), prob, init,
                                     opts.stop)
                       .value;
        } else {
            tmin = run_arimoto_source(-lambda, nu, prob, opts.stop).value;
        }
        return tmin - lambda * nu * delta;
    };
    return maximize_over_nu(objective, opts.nu_max);
}

ExponentCurve channel_exponent_curve(const ChannelProblem& prob, double gamma,
                                     const std::vector<double>& r_grid, CurveMode mode,
                                     const CurveOptions& opts) {
    if (gamma < prob.gamma_min())
        throw std::invalid_argument("channel_exponent_curve: gamma below minimum cost");
    std::vector<double> slopes = uniform_slopes(opts.slope_points);
    std::vector<SlopePoint> lines(slopes.size());
    if (mode == CurveMode::strong_converse) {
        parallel_for(slopes.size(), [&](std::size_t j) {
            ScalarOpt o = channel_gdk_slope(slopes[j], gamma, prob, opts);
            lines[j] = SlopePoint{slopes[j], o.arg, o.value};
        });
        return assemble_curve(r_grid, lines, +1.0);
    }
    parallel_for(slopes.size(), [&](std::size_t j) {
        double rho = slopes[j];
        if (rho == 0.0) {
            lines[j] = SlopePoint{0.0, 0.0, 0.0};
            return;
        }
        auto objective = [&](double nu) {
            return rho * nu * gamma + run_arimoto_channel(rho, nu, prob, opts.stop).value;
        };
        ScalarOpt o = minimize_over_nu(objective, opts.nu_max);
        lines[j] = SlopePoint{rho, o.arg, o.value};
    });
    return assemble_curve(r_grid, lines, -1.0);
}

ExponentCurve source_exponent_curve(const SourceProblem& prob, double delta,
                                    const std::vector<double>& r_grid, CurveMode mode,
                                    const CurveOptions& opts, SourceCurveBackend backend) {
    if (mode == CurveMode::strong_converse) {
        std::vector<double> slopes = uniform_slopes(opts.slope_points);
        std::vector<SlopePoint> lines(slopes.size());
        parallel_for(slopes.size(), [&](std::size_t j) {
            ScalarOpt o = source_gck_slope(slopes[j], delta, prob, opts, backend);
            lines[j] = SlopePoint{slopes[j], o.arg, o.value};
        });
        // Source strong-converse curve decreases in R: slope enters as -lambda.
        return assemble_curve(r_grid, lines, -1.0);
    }
    // Blahut error exponent: rho in {0} u logspace(1e-3, rho_max).
    std::vector<double> slopes;
    slopes.push_back(0.0);
    std::size_t n = opts.slope_points > 1 ? opts.slope_points - 1 : 1;
    for (std::size_t j = 0; j < n; ++j) {
        double f = n == 1 ? 0.0
                          : static_cast<double>(j) / static_cast<double>(n - 1);
        slopes.push_back(1e-3 * std::pow(opts.rho_max / 1e-3, f));
    }
    std::vector<SlopePoint> lines(slopes.size());
    parallel_for(slopes.size(), [&](std::size_t j) {
        double rho = slopes[j];
        if (rho == 0.0) {
            lines[j] = SlopePoint{0.0, 0.0, 0.0};
            return;
        }
        // E_B^{(rho)} = inf_nu [rho nu Delta - min_py E0s(rho, nu)]
        auto objective = [&](double nu) {
            return rho * nu * delta - run_arimoto_source(rho, nu, prob, opts.stop).value;
        };
        ScalarOpt o = minimize_over_nu(objective, opts.nu_max);
        lines[j] = SlopePoint{rho, o.arg, o.value};
    });
    return assemble_curve(r_grid, lines, +1.0);
}

double cutoff_rate_channel(double lambda, double gamma, const ChannelProblem& prob,
                           const CurveOptions& opts) {
    if (lambda <= 0.0 || lambda > 1.0)
        throw std::invalid_argument("cutoff_rate_channel: lambda must lie in (0,1]");
    return -channel_gdk_slope(lambda, gamma, prob, opts).value / lambda;
}

} // namespace exponent_kit
