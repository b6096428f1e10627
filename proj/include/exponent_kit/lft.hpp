#pragma once

#include <cstddef>
#include <vector>

#include "exponent_kit/channel.hpp"
#include "exponent_kit/source.hpp"
#include "exponent_kit/util.hpp"

namespace exponent_kit {

/// A function sampled on a strictly increasing grid. +inf values are
/// tolerated and skipped by the transform.
struct SampledFunction {
    std::vector<double> params;
    std::vector<double> values;

    SampledFunction(std::vector<double> p, std::vector<double> v);
};

struct LftPoint {
    double value;
    double witness; // the sample x attaining sup(x*y - F(x))
};

// Discrete Legendre-Fenchel transform: F*(y) = max over samples of x*y - F(x).
std::vector<LftPoint> lft_1d(const SampledFunction& f, const std::vector<double>& y_grid);

/// Exponent-versus-rate curve with per-point supporting-line witnesses.
/// Re-evaluating the line slope*R + intercept at (lambda_star, nu_star)
/// reproduces the curve value.
struct ExponentCurve {
    std::vector<double> rate;
    std::vector<double> exponent;
    std::vector<double> lambda_star; // optimal slope (lambda or rho per mode)
    std::vector<double> nu_star;
    std::vector<double> intercept;   // value of the supporting line at R = 0
};

enum class CurveMode { strong_converse, error };

struct CurveOptions {
    std::size_t slope_points = 33;
    double nu_max = 50.0;
    double rho_max = 20.0; // cap for the source error-exponent sweep
    StoppingRule stop{};
};

// Backend for the per-slope optimum of the source strong-converse curve.
enum class SourceCurveBackend { family, arimoto };

// G_DK slope point: sup_nu { -lambda nu Gamma + Theta^{(lambda, lambda nu)}(W) }.
ScalarOpt channel_gdk_slope(double lambda, double gamma, const ChannelProblem& prob,
                            const CurveOptions& opts = {});
// G_CK slope point: sup_nu { Theta_s^{(lambda, lambda nu)}(P) - lambda nu Delta }.
ScalarOpt source_gck_slope(double lambda, double delta, const SourceProblem& prob,
                           const CurveOptions& opts = {},
                           SourceCurveBackend backend = SourceCurveBackend::family);

ExponentCurve channel_exponent_curve(const ChannelProblem& prob, double gamma,
                                     const std::vector<double>& r_grid, CurveMode mode,
                                     const CurveOptions& opts = {});

ExponentCurve source_exponent_curve(const SourceProblem& prob, double delta,
                                    const std::vector<double>& r_grid, CurveMode mode,
                                    const CurveOptions& opts = {},
                                    SourceCurveBackend backend = SourceCurveBackend::family);

// Generalized cutoff rate: R-axis intercept of the slope-lambda supporting
// line, -G_DK^{(lambda)}(Gamma|W) / lambda.
double cutoff_rate_channel(double lambda, double gamma, const ChannelProblem& prob,
                           const CurveOptions& opts = {});

} // namespace exponent_kit
