#pragma once

#include <cstddef>
#include <vector>

#include "exponent_kit/channel.hpp" // FamilyWeights, SlopeParams, IterationTrace
#include "exponent_kit/config.hpp"
#include "exponent_kit/prob.hpp"

namespace exponent_kit {

/// DMS with a distortion measure: source law P_X and d(x,y) >= 0.
/// Every source symbol is expected to have a zero-distortion reproduction;
/// construction warns (or throws in strict mode) when that fails.
struct SourceProblem {
    ProbVec px;
    std::vector<double> distortion; // row-major |X| x |Y|
    std::size_t ny_ = 0;

    SourceProblem(ProbVec px_, std::size_t ny, std::vector<double> d, bool strict = false);

    std::size_t nx() const { return px.size(); }
    std::size_t ny() const { return ny_; }
    double d(std::size_t x, std::size_t y) const { return distortion[x * ny_ + y]; }
    double max_distortion() const;
    bool has_zero_distortion_rows() const;
};

// ---- objective functionals ---------------------------------------------------

// E0s = log sum_x P [sum_y py e^{-nu d}]^{-rho}
double e0s(double rho, double nu, const ProbVec& py, const SourceProblem& prob);
// As = (1+rho) log sum_y [sum_x P e^{rho nu d} p_{Y|X}^{1+rho}]^{1/(1+rho)}
double a_s(double rho, double nu, const Kernel& pyx, const SourceProblem& prob);
// F_ARs = (1/rho) log sum_{x,y} P e^{rho nu d} py^{-rho} p_{Y|X}^{1+rho}
double f_ar_s(double rho, double nu, const ProbVec& py, const Kernel& pyx,
              const SourceProblem& prob);
// rho->0 limit: sum P p_{Y|X} (log(p_{Y|X}/py) + nu d)
double f_ar_s_limit(double nu, const ProbVec& py, const Kernel& pyx,
                    const SourceProblem& prob);

// Theta_s = D(q_X||P) + lambda I(q) + mu E_q[d]; +inf when q_X leaves supp(P).
double theta_s(double lambda, double mu, const JointDist& q, const SourceProblem& prob);
double theta_s(const SlopeParams& params, const JointDist& q, const SourceProblem& prob);

double theta_s_min_closed_lambda0(); // always 0
// -log max_y sum_x P e^{-mu d(x,y)}
double theta_s_min_closed_lambda1(double mu, const SourceProblem& prob);

// J_{s,t} = Theta_s^{(lambda, lambda nu)}(q) + (1-lambda) D_t(q,p)
double j_st(const SlopeParams& params, const FamilyWeights& t, const JointDist& q,
            const JointDist& p, const SourceProblem& prob);

// ---- family and special cases -------------------------------------------------

// argmin_q J_{s,t}(q, p_prev): closed form on T3 or T4.
JointDist source_family_update(const SlopeParams& params, const FamilyWeights& t,
                               const JointDist& p_prev, const SourceProblem& prob,
                               FamilyBranch branch = FamilyBranch::auto_select);
RunResult run_source_family(const SlopeParams& params, const FamilyWeights& t,
                            const SourceProblem& prob, const JointDist& init,
                            const StoppingRule& stop = {});

struct Gck1Step {
    Kernel q_y_given_x; // rows indexed by x
    ProbVec q_x;
    ProbVec py_next;
};
Gck1Step gck1_step(const SlopeParams& params, const ProbVec& py_prev,
                   const SourceProblem& prob);
RunResult run_gck1(const SlopeParams& params, const SourceProblem& prob,
                   const StoppingRule& stop = {});

struct Gck2Step {
    Kernel q_x_given_y; // rows indexed by y
    ProbVec q_y;
    Kernel pyx_next;    // rows indexed by x
};
Gck2Step gck2_step(const SlopeParams& params, const Kernel& pyx_prev,
                   const SourceProblem& prob);
RunResult run_gck2(const SlopeParams& params, const SourceProblem& prob,
                   const StoppingRule& stop = {});

JointDist jo_source_step(const SlopeParams& params, const JointDist& q_prev,
                         const SourceProblem& prob);
RunResult run_jo_source(const SlopeParams& params, const SourceProblem& prob,
                        const StoppingRule& stop = {});

struct ArimotoSourceStep {
    Kernel p_y_given_x; // rows indexed by x
    ProbVec py_next;
};
ArimotoSourceStep arimoto_source_step(double rho, double nu, const ProbVec& py_prev,
                                      const SourceProblem& prob);
// value: min_py E0s for rho > 0 (Blahut objective); min Theta_s estimate
// (-E0s at the optimum) for rho in (-1,0).
RunResult run_arimoto_source(double rho, double nu, const SourceProblem& prob,
                             const StoppingRule& stop = {});

// ---- optimizer formulas used by the gap lemma ---------------------------------

// p*_{Y|X}(py): tilted test channel proportional to py e^{-nu d}
Kernel tilted_test_channel(double nu, const ProbVec& py, const SourceProblem& prob);
// py*(p_{Y|X}): output law proportional to [sum_x P e^{rho nu d} p^{1+rho}]^{1/(1+rho)}
ProbVec optimal_output_dist_source(double rho, double nu, const Kernel& pyx,
                                   const SourceProblem& prob);
// p*_X(py): tilted source law proportional to P [sum_y py e^{-nu d}]^{-rho}
ProbVec tilted_source_dist(double rho, double nu, const ProbVec& py,
                           const SourceProblem& prob);

struct SourceRenyiGaps {
    double gap1;      // F_ARs - (1/rho) E0s
    double gap2;      // F_ARs - (1/rho) As
    double residual1; // |gap1 - D_{1+rho}(p_{Y|X} || p*_{Y|X} | p*_X)|
    double residual2; // |gap2 - D_{1+rho}(py* || py)|
};
SourceRenyiGaps renyi_gap_source(double rho, double nu, const ProbVec& py,
                                 const Kernel& pyx, const SourceProblem& prob);

// Max violation of the stationarity conditions characterizing the optimal
// output law, referenced to -E0s(py). Support points are weighted by their
// mass so boundary optima certify cleanly.
double kkt_residual_source(double lambda, double nu, const ProbVec& py,
                           const SourceProblem& prob);

// ---- lambda -> 0 branch and derived exponents ----------------------------------

struct BlahutResult {
    double value; // min_py [-sum_x P log sum_y py e^{-nu d}]
    ProbVec py;
};
BlahutResult blahut_rd_lagrangian(double nu, const SourceProblem& prob,
                                  const StoppingRule& stop = {});
// R(Delta) = sup_nu [Lagrangian(nu) - nu Delta]
double rate_distortion(double delta, const SourceProblem& prob,
                       const StoppingRule& stop = {}, double nu_max = 50.0);

// min_q Theta_s^{(lambda, lambda nu)}: closed endpoints, gck1 otherwise.
double theta_s_min(const SlopeParams& params, const SourceProblem& prob,
                   const StoppingRule& stop = {});

struct NuSearch {
    double nu_max = 50.0;
    std::size_t grid_points = 33;
};

// Arikan-Merhav guessing exponent = -E_B^{(rho)}(Delta) computed as
// sup_nu [min_py E0s(rho,nu) - rho nu Delta] with the inner minimum from the
// Arimoto source iteration.
double guessing_exponent(double rho, double delta, const SourceProblem& prob,
                         const NuSearch& nu_search = {}, const StoppingRule& stop = {});

struct SourceCutoffRate {
    double value;       // (1/lambda) sup_nu { Theta_s min - lambda nu Delta }
    double cross_check; // same quantity from the converged (nu*, py*) witness
    double nu_star;
};
SourceCutoffRate cutoff_rate_source(double lambda, double delta, const SourceProblem& prob,
                                    const NuSearch& nu_search = {},
                                    const StoppingRule& stop = {});

} // namespace exponent_kit
