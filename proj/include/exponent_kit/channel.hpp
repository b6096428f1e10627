#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "exponent_kit/config.hpp"
#include "exponent_kit/prob.hpp"

namespace exponent_kit {

/// DMC with an input cost: W(y|x) row-stochastic, c(x) >= 0.
struct ChannelProblem {
    Kernel w;
    std::vector<double> cost; // one entry per input symbol

    ChannelProblem(Kernel w_, std::vector<double> cost_);
    static ChannelProblem uncosted(Kernel w_);

    std::size_t nx() const { return w.num_inputs(); }
    std::size_t ny() const { return w.num_outputs(); }
    double gamma_min() const;
};

/// Slope pair (lambda, nu) with mu = lambda*nu. Strong-converse mode keeps
/// lambda in [0,1]; error-exponent checks use the signed twin lambda = -rho.
struct SlopeParams {
    double lambda = 0.0;
    double nu = 0.0;

    SlopeParams(double lambda_, double nu_);
    static SlopeParams signed_slope(double lambda_, double nu_); // lambda in [-1,1]

    double mu() const { return lambda * nu; }
};

/// Four nonnegative divergence weights selecting a member of the algorithm
/// family. The closed-form manifolds depend on lambda.
struct FamilyWeights {
    double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;

    FamilyWeights(double a, double b, double c, double d);

    bool in_t1() const;                    // t1 = t2 + 1
    bool in_t2(double lambda) const;       // t4 = t3 + lambda/(1-lambda)
    bool in_t3(double lambda) const;       // t3 = t4 + lambda/(1-lambda)  (source)
    bool in_t4() const;                    // t2 = t1 + 1                  (source)

    static FamilyWeights tz() { return {1, 0, 0, 0}; }
    static FamilyWeights alg_b(double lambda) { return {0, 0, 0, lambda / (1.0 - lambda)}; }
    static FamilyWeights jo(double lambda) { return {1, 0, 0, lambda / (1.0 - lambda)}; }
    static FamilyWeights gck1(double lambda) { return {0, 0, lambda / (1.0 - lambda), 0}; }
    static FamilyWeights gck2() { return {0, 1, 0, 0}; }
    static FamilyWeights jo_source(double lambda) { return {0, 1, lambda / (1.0 - lambda), 0}; }
};

enum class Termination { tolerance_met, max_iters, stalled };

std::string to_string(Termination t);

/// Objective values recorded after every half-step of an alternating run.
/// The sequence is always in minimization sense (non-increasing up to
/// 1e-12 slack); error-exponent runs record the negated Gallager chain.
struct IterationTrace {
    std::vector<double> objective;
    std::size_t iterations = 0;
    Termination termination = Termination::max_iters;

    double final_value() const { return objective.back(); }
};

struct RunResult {
    IterationTrace trace;
    JointDist q;   // converged joint on X x Y (or the joint implied by it)
    double value;  // converged optimum in the operation's canonical sense
};

// ---- objective functionals -------------------------------------------------

// Gallager E0 with cost tilt: -log sum_y [sum_x p {W e^{rho nu c}}^{1/(1+rho)}]^{1+rho}
double e0(double rho, double nu, const ProbVec& px, const ChannelProblem& prob);
// lim_{rho->0} (1/rho) E0 = I(p,W) - nu E_p[c]
double e0_slope_limit(double nu, const ProbVec& px, const ChannelProblem& prob);
// Arimoto A: rho log sum_x e^{-nu c} [sum_y phat^{-rho} W]^{-1/rho}; phat rows indexed by y
double a_func(double rho, double nu, const Kernel& p_hat_xy, const ChannelProblem& prob);
// Arimoto F: -(1/rho) log sum_{x,y} p^{1+rho} phat^{-rho} W e^{rho nu c}
double f_ar(double rho, double nu, const ProbVec& px, const Kernel& p_hat_xy,
            const ChannelProblem& prob);
// rho->0 limit of F: sum p W log(phat e^{-nu c} / p)
double f_ar_limit(double nu, const ProbVec& px, const Kernel& p_hat_xy,
                  const ChannelProblem& prob);

// Theta = D(q_{Y|X}||W|q_X) - lambda I + mu E_q[c]; +inf off the support of W.
// Accepts the extended range lambda in [-1,1].
double theta(double lambda, double mu, const JointDist& q, const ChannelProblem& prob);
double theta(const SlopeParams& params, const JointDist& q, const ChannelProblem& prob);

double theta_min_closed_lambda0(double mu, const ChannelProblem& prob); // mu * Gamma_min
// -log sum_y max_x W e^{-mu c}; ties in the max broken by lowest input index
double theta_min_closed_lambda1(double mu, const ChannelProblem& prob);

// Weighted divergence penalty D_t between two joints.
double d_t(const FamilyWeights& t, const JointDist& q, const JointDist& p);
// Family surrogate J_t = Theta^{(lambda, lambda nu)}(q) + (1-lambda) D_t(q,p)
double j_t(const SlopeParams& params, const FamilyWeights& t, const JointDist& q,
           const JointDist& p, const ChannelProblem& prob);

// ---- alternating-minimization steps and runs -------------------------------

// Closed-form branch selection for weights lying in both manifolds.
enum class FamilyBranch { auto_select, first, second };

// argmin_q J_t(q, p_prev): closed form on T1 or T2, error elsewhere.
JointDist family_update(const SlopeParams& params, const FamilyWeights& t,
                        const JointDist& p_prev, const ChannelProblem& prob,
                        FamilyBranch branch = FamilyBranch::auto_select);
RunResult run_family(const SlopeParams& params, const FamilyWeights& t,
                     const ChannelProblem& prob, const JointDist& init,
                     const StoppingRule& stop = {});

struct TzStep {
    Kernel q_x_given_y; // rows indexed by y
    ProbVec q_y;
    ProbVec px_next;
};
TzStep tz_step(const SlopeParams& params, const ProbVec& px_prev,
               const ChannelProblem& prob);
RunResult run_tz(const SlopeParams& params, const ChannelProblem& prob,
                 const StoppingRule& stop = {});

struct AlgBStep {
    Kernel q_y_given_x; // rows indexed by x
    ProbVec q_x;
    Kernel p_hat_next;  // rows indexed by y
};
AlgBStep alg_b_step(const SlopeParams& params, const Kernel& p_hat_prev,
                    const ChannelProblem& prob);
RunResult run_alg_b(const SlopeParams& params, const ChannelProblem& prob,
                    const StoppingRule& stop = {});

struct ArimotoChannelStep {
    Kernel p_hat;    // rows indexed by y
    ProbVec px_next;
};
ArimotoChannelStep arimoto_channel_step(double rho, double nu, const ProbVec& px_prev,
                                        const ChannelProblem& prob);
// value: converged E0 (max_p E0 for rho>0, min_p E0 for rho in (-1,0)).
RunResult run_arimoto_channel(double rho, double nu, const ChannelProblem& prob,
                              const StoppingRule& stop = {});

JointDist jo_channel_step(const SlopeParams& params, const JointDist& q_prev,
                          const ChannelProblem& prob);
RunResult run_jo_channel(const SlopeParams& params, const ChannelProblem& prob,
                         const StoppingRule& stop = {});

struct ParameterizedArimotoStep {
    JointDist p_hat;
    JointDist p_next;
};
ParameterizedArimotoStep parameterized_arimoto_step(double lambda, double nu, double t2,
                                                    double t3, const JointDist& p,
                                                    const ChannelProblem& prob);
RunResult run_parameterized_arimoto(double lambda, double nu, double t2, double t3,
                                    const ChannelProblem& prob,
                                    const StoppingRule& stop = {});

// Objective forms of the parameterized algorithm (reduce to E0 / A at t=0).
double e0_t2(double lambda, double nu, double t2, const JointDist& p,
             const ChannelProblem& prob);
double a_t3(double lambda, double nu, double t3, const JointDist& p_hat,
            const ChannelProblem& prob);

// ---- optimizer formulas shared by Arimoto's algorithm and the gap lemma ----

// phat*_{X|Y}(p_X): backward channel proportional to p {W e^{rho nu c}}^{1/(1+rho)}
Kernel optimal_backward_channel(double rho, double nu, const ProbVec& px,
                                const ChannelProblem& prob);
// phat*_Y(p_X): output law proportional to [sum_x p {W e^{rho nu c}}^{1/(1+rho)}]^{1+rho}
ProbVec optimal_output_dist(double rho, double nu, const ProbVec& px,
                            const ChannelProblem& prob);
// p*_X(phat): input law proportional to [sum_y phat^{-rho} W e^{rho nu c}]^{-1/rho}
ProbVec optimal_input_dist(double rho, double nu, const Kernel& p_hat_xy,
                           const ChannelProblem& prob);

/// Both Renyi-divergence decompositions of F_AR; residuals are the
/// two-sided evaluation errors and vanish identically in exact arithmetic.
struct RenyiGaps {
    double gap1;       // (1/rho) E0 - F_AR
    double gap2;       // (1/rho) A  - F_AR
    double residual1;  // |gap1 - D_{1+rho}(phat*(p) || phat | phatY*(p))|
    double residual2;  // |gap2 - D_{1+rho}(p || p*(phat))|
};
RenyiGaps renyi_gap_identities(double rho, double nu, const ProbVec& px,
                               const Kernel& p_hat_xy, const ChannelProblem& prob);

// max_{q_X} min_{q_{Y|X}} Theta^{(-rho,-rho nu)} evaluated at the saddle
// reached by the error-mode Arimoto iteration plus the explicit inner
// minimizer q*_{Y|X}(phat).
double minimax_theta_saddle(double rho, double nu, const ChannelProblem& prob,
                            const StoppingRule& stop = {});

// ---- lambda -> 0 branch -----------------------------------------------------

struct CapacityResult {
    double value; // max_p I(p,W) - nu E_p[c]
    ProbVec px;
};
CapacityResult arimoto_blahut_capacity(double nu, const ChannelProblem& prob,
                                       const StoppingRule& stop = {});
// C(Gamma|W) = inf_nu { nu Gamma + max_p [I - nu E c] }
double capacity_cost(double gamma, const ChannelProblem& prob,
                     const StoppingRule& stop = {}, double nu_max = 50.0);

// min_q Theta^{(lambda, lambda nu)}: closed forms at the lambda endpoints,
// iterative run otherwise.
double theta_min(const SlopeParams& params, const ChannelProblem& prob,
                 const StoppingRule& stop = {});

} // namespace exponent_kit
