#include "exponent_kit/source.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "exponent_kit/util.hpp"

namespace exponent_kit {

namespace {

double safe_log(double x) { return x > 0.0 ? std::log(x) : -kInf; }
double ml(double coef, double logv) { return coef == 0.0 ? 0.0 : coef * logv; }

std::vector<double> dist_from_log(std::vector<double> logw, const char* who) {
    double lse = log_sum_exp(logw);
    if (!std::isfinite(lse)) throw std::domain_error(std::string(who) + ": empty support");
    for (double& v : logw) v = std::isfinite(v) ? std::exp(v - lse) : 0.0;
    return logw;
}

struct TraceDriver {
    IterationTrace trace;
    StoppingRule stop;
    double prev_key = kInf;

    explicit TraceDriver(const StoppingRule& s) : stop(s) {}

    bool step(double key) {
        if (std::isfinite(prev_key)) {
            double delta = prev_key - key;
            if (delta < -kTol.descent_slack) {
                trace.termination = Termination::stalled;
                return true;
            }
            if (std::abs(delta) < stop.rel_tol * std::max(1.0, std::abs(key))) {
                trace.termination = Termination::tolerance_met;
                return true;
            }
        }
        prev_key = key;
        ++trace.iterations;
        if (trace.iterations >= stop.max_iters) {
            trace.termination = Termination::max_iters;
            return true;
        }
        return false;
    }
};

} // namespace

SourceProblem::SourceProblem(ProbVec px_, std::size_t ny, std::vector<double> d,
                             bool strict)
    : px(std::move(px_)), distortion(std::move(d)), ny_(ny) {
    if (ny_ == 0 || distortion.size() != px.size() * ny_)
        throw std::invalid_argument("SourceProblem: distortion shape mismatch");
    for (double v : distortion)
        if (v < 0.0 || !std::isfinite(v))
            throw std::invalid_argument("SourceProblem: distortion must be finite and >= 0");
    if (!has_zero_distortion_rows()) {
        if (strict)
            throw std::invalid_argument(
                "SourceProblem: some source symbol has no zero-distortion reproduction");
        std::fprintf(stderr,
                     "warning: some source symbol has no zero-distortion reproduction\n");
    }
}

double SourceProblem::max_distortion() const {
    return *std::max_element(distortion.begin(), distortion.end());
}

bool SourceProblem::has_zero_distortion_rows() const {
    for (std::size_t x = 0; x < nx(); ++x) {
        bool ok = false;
        for (std::size_t y = 0; y < ny_; ++y)
            if (d(x, y) == 0.0) { ok = true; break; }
        if (!ok) return false;
    }
    return true;
}

// ---- objective functionals -----------------------------------------------------

double e0s(double rho, double nu, const ProbVec& py, const SourceProblem& prob) {
    if (py.size() != prob.ny()) throw std::invalid_argument("e0s: dimension mismatch");
    if (rho == 0.0) return 0.0;
    std::vector<double> per_x(prob.nx()), inner(prob.ny());
    for (std::size_t x = 0; x < prob.nx(); ++x) {
        for (std::size_t y = 0; y < prob.ny(); ++y)
            inner[y] = safe_log(py[y]) - nu * prob.d(x, y);
        per_x[x] = safe_log(prob.px[x]) - rho * log_sum_exp(inner);
    }
    return log_sum_exp(per_x);
}

double a_s(double rho, double nu, const Kernel& pyx, const SourceProblem& prob) {
    if (!(rho > -1.0)) throw std::invalid_argument("a_s: rho must be > -1");
    if (pyx.num_inputs() != prob.nx() || pyx.num_outputs() != prob.ny())
        throw std::invalid_argument("a_s: dimension mismatch");
    std::vector<double> per_y(prob.ny()), col(prob.nx());
    for (std::size_t y = 0; y < prob.ny(); ++y) {
        for (std::size_t x = 0; x < prob.nx(); ++x)
            col[x] = safe_log(prob.px[x]) + rho * nu * prob.d(x, y) +
                     (1.0 + rho) * safe_log(pyx(x, y));
        per_y[y] = log_sum_exp(col) / (1.0 + rho);
    }
    return (1.0 + rho) * log_sum_exp(per_y);
}

double f_ar_s(double rho, double nu, const ProbVec& py, const Kernel& pyx,
              const SourceProblem& prob) {
    if (rho == 0.0) throw std::invalid_argument("f_ar_s: rho = 0 (use f_ar_s_limit)");
    if (!(rho > -1.0)) throw std::invalid_argument("f_ar_s: rho must be > -1");
    std::vector<double> terms;
    terms.reserve(prob.nx() * prob.ny());
    for (std::size_t x = 0; x < prob.nx(); ++x)
        for (std::size_t y = 0; y < prob.ny(); ++y) {
            double lp = safe_log(pyx(x, y));
            if (!std::isfinite(lp) || prob.px[x] == 0.0) {
                terms.push_back(-kInf);
                continue;
            }
            terms.push_back(safe_log(prob.px[x]) + rho * nu * prob.d(x, y) -
                            rho * safe_log(py[y]) + (1.0 + rho) * lp);
        }
    return log_sum_exp(terms) / rho;
}

double f_ar_s_limit(double nu, const ProbVec& py, const Kernel& pyx,
                    const SourceProblem& prob) {
    double s = 0.0;
    for (std::size_t x = 0; x < prob.nx(); ++x) {
        if (prob.px[x] == 0.0) continue;
        for (std::size_t y = 0; y < prob.ny(); ++y) {
            if (pyx(x, y) == 0.0) continue;
            if (py[y] == 0.0) return kInf;
            s += prob.px[x] * pyx(x, y) *
                 (std::log(pyx(x, y) / py[y]) + nu * prob.d(x, y));
        }
    }
    return s;
}

double theta_s(double lambda, double mu, const JointDist& q, const SourceProblem& prob) {
    if (q.nx() != prob.nx() || q.ny() != prob.ny())
        throw std::invalid_argument("theta_s: dimension mismatch");
    ProbVec qx = q.marginal_x();
    ProbVec qy = q.marginal_y();
    double val = 0.0;
    for (std::size_t x = 0; x < q.nx(); ++x)
        for (std::size_t y = 0; y < q.ny(); ++y) {
            double m = q(x, y);
            if (m == 0.0) continue;
            if (prob.px[x] == 0.0) return kInf;
            // log [ q_X^{1-lambda} q_{X|Y}^{lambda} / (P e^{-mu d}) ]
            double log_qx = std::log(qx[x]);
            double log_qxy = std::log(m / qy[y]);
            val += m * ((1.0 - lambda) * log_qx + lambda * log_qxy -
                        std::log(prob.px[x]) + mu * prob.d(x, y));
        }
    return val;
}

double theta_s(const SlopeParams& params, const JointDist& q, const SourceProblem& prob) {
    return theta_s(params.lambda, params.mu(), q, prob);
}

double theta_s_min_closed_lambda0() { return 0.0; }

double theta_s_min_closed_lambda1(double mu, const SourceProblem& prob) {
    double best = 0.0;
    for (std::size_t y = 0; y < prob.ny(); ++y) {
        double s = 0.0;
        for (std::size_t x = 0; x < prob.nx(); ++x)
            s += prob.px[x] * std::exp(-mu * prob.d(x, y));
        best = std::max(best, s);
    }
    return -std::log(best);
}

double j_st(const SlopeParams& params, const FamilyWeights& t, const JointDist& q,
            const JointDist& p, const SourceProblem& prob) {
    return theta_s(params, q, prob) + (1.0 - params.lambda) * d_t(t, q, p);
}

// ---- family update ---------------------------------------------------------------

namespace {

// T3 closed form: builds (q_{Y|X}, q_X).
JointDist source_family_update_t3(double lambda, double nu, const FamilyWeights& t,
                                  const JointDist& p, const SourceProblem& prob) {
    std::size_t nx = prob.nx(), ny = prob.ny();
    ProbVec px = p.marginal_x();
    ProbVec py = p.marginal_y();
    Kernel pyx = p.conditional_y_given_x();
    double b3 = lambda + (1.0 - lambda) * (t.t2 + t.t4);
    double a3 = 1.0 + (1.0 - lambda) * (t.t1 + t.t4);

    std::vector<double> lw(nx * ny), k3(nx), qx_log(nx);
    for (std::size_t x = 0; x < nx; ++x) {
        std::vector<double> row(ny);
        for (std::size_t y = 0; y < ny; ++y) {
            row[y] = (-lambda * nu * prob.d(x, y) +
                      ml((1.0 - lambda) * (t.t2 + t.t4), safe_log(pyx(x, y))) +
                      lambda * safe_log(py[y])) /
                     b3;
            lw[x * ny + y] = row[y];
        }
        k3[x] = log_sum_exp(row);
        qx_log[x] = std::isfinite(k3[x])
                        ? (safe_log(prob.px[x]) +
                           ml((1.0 - lambda) * (t.t1 + t.t4), safe_log(px[x])) +
                           b3 * k3[x]) /
                              a3
                        : -kInf;
    }
    std::vector<double> qx = dist_from_log(qx_log, "source_family_update");
    std::vector<double> mass(nx * ny, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
        if (qx[x] == 0.0) continue;
        for (std::size_t y = 0; y < ny; ++y) {
            double l = lw[x * ny + y];
            mass[x * ny + y] = std::isfinite(l) ? qx[x] * std::exp(l - k3[x]) : 0.0;
        }
    }
    return JointDist(nx, ny, std::move(mass));
}

// T4 closed form: builds (q_{X|Y}, q_Y).
JointDist source_family_update_t4(double lambda, double nu, const FamilyWeights& t,
                                  const JointDist& p, const SourceProblem& prob) {
    std::size_t nx = prob.nx(), ny = prob.ny();
    ProbVec py = p.marginal_y();
    Kernel pyx = p.conditional_y_given_x();
    Kernel pxy = p.conditional_x_given_y();
    double b4 = 1.0 + (1.0 - lambda) * (t.t1 + t.t4);
    double g4 = (1.0 - lambda) * (1.0 + t.t1 + t.t3);

    std::vector<double> lw(nx * ny), k4(ny), qy_log(ny);
    for (std::size_t y = 0; y < ny; ++y) {
        std::vector<double> col(nx);
        for (std::size_t x = 0; x < nx; ++x) {
            col[x] = (safe_log(prob.px[x]) - lambda * nu * prob.d(x, y) +
                      (1.0 - lambda) * safe_log(pyx(x, y)) +
                      ml((1.0 - lambda) * (t.t1 + t.t4), safe_log(pxy(y, x)))) /
                     b4;
            lw[x * ny + y] = col[x];
        }
        k4[y] = log_sum_exp(col);
        qy_log[y] = std::isfinite(k4[y])
                        ? (ml((1.0 - lambda) * (t.t1 + t.t3), safe_log(py[y])) +
                           b4 * k4[y]) /
                              g4
                        : -kInf;
    }
    std::vector<double> qy = dist_from_log(qy_log, "source_family_update");
    std::vector<double> mass(nx * ny, 0.0);
    for (std::size_t y = 0; y < ny; ++y) {
        if (qy[y] == 0.0) continue;
        for (std::size_t x = 0; x < nx; ++x) {
            double l = lw[x * ny + y];
            mass[x * ny + y] = std::isfinite(l) ? qy[y] * std::exp(l - k4[y]) : 0.0;
        }
    }
    return JointDist(nx, ny, std::move(mass));
}

} // namespace

JointDist source_family_update(const SlopeParams& params, const FamilyWeights& t,
                               const JointDist& p_prev, const SourceProblem& prob,
                               FamilyBranch branch) {
    double lambda = params.lambda;
    if (!(lambda > 0.0 && lambda < 1.0))
        throw std::invalid_argument("source_family_update: lambda must lie in (0,1)");
    bool ok3 = t.in_t3(lambda), ok4 = t.in_t4();
    if (branch == FamilyBranch::first && !ok3)
        throw std::invalid_argument("source_family_update: weights are not in T3");
    if (branch == FamilyBranch::second && !ok4)
        throw std::invalid_argument("source_family_update: weights are not in T4");
    if (ok3 && branch != FamilyBranch::second)
        return source_family_update_t3(lambda, params.nu, t, p_prev, prob);
    if (ok4) return source_family_update_t4(lambda, params.nu, t, p_prev, prob);
    throw std::invalid_argument(
        "source_family_update: weights outside T3 u T4 have no closed form");
}

RunResult run_source_family(const SlopeParams& params, const FamilyWeights& t,
                            const SourceProblem& prob, const JointDist& init,
                            const StoppingRule& stop) {
    TraceDriver drv(stop);
    JointDist p = init;
    JointDist q = init;
    for (;;) {
        q = source_family_update(params, t, p, prob);
        drv.trace.objective.push_back(j_st(params, t, q, p, prob));
        double th = theta_s(params, q, prob);
        drv.trace.objective.push_back(th);
        p = q; // full-joint copy
        if (drv.step(th)) break;
    }
    double value = theta_s(params, q, prob);
    return RunResult{std::move(drv.trace), std::move(q), value};
}

// ---- GCK1 --------------------------------------------------------------------------

Gck1Step gck1_step(const SlopeParams& params, const ProbVec& py_prev,
                   const SourceProblem& prob) {
    double lambda = params.lambda, nu = params.nu;
    if (lambda > 1.0) throw std::invalid_argument("gck1_step: lambda must lie in [0,1]");
    std::size_t nx = prob.nx(), ny = prob.ny();
    std::vector<ProbVec> rows;
    rows.reserve(nx);
    std::vector<double> qx_log(nx);
    for (std::size_t x = 0; x < nx; ++x) {
        std::vector<double> row(ny);
        for (std::size_t y = 0; y < ny; ++y)
            row[y] = safe_log(py_prev[y]) - nu * prob.d(x, y);
        double s = log_sum_exp(row);
        std::vector<double> r(ny, 0.0);
        for (std::size_t y = 0; y < ny; ++y)
            if (std::isfinite(row[y])) r[y] = std::exp(row[y] - s);
        rows.emplace_back(std::move(r));
        qx_log[x] = safe_log(prob.px[x]) + ml(lambda, s);
    }
    ProbVec qx(dist_from_log(qx_log, "gck1_step"));
    std::vector<double> nxt(ny, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) nxt[y] += qx[x] * rows[x][y];
    return Gck1Step{Kernel(std::move(rows)), std::move(qx), ProbVec(std::move(nxt))};
}

RunResult run_gck1(const SlopeParams& params, const SourceProblem& prob,
                   const StoppingRule& stop) {
    if (params.lambda == 0.0) {
        // Blahut rate-distortion branch.
        BlahutResult b = blahut_rd_lagrangian(params.nu, prob, stop);
        IterationTrace trace;
        trace.objective.push_back(b.value);
        trace.iterations = 1;
        trace.termination = Termination::tolerance_met;
        JointDist q = compose(prob.px, tilted_test_channel(params.nu, b.py, prob));
        return RunResult{std::move(trace), std::move(q), b.value};
    }
    TraceDriver drv(stop);
    ProbVec py = ProbVec::uniform(prob.ny());
    JointDist q = JointDist::uniform(prob.nx(), prob.ny());
    for (;;) {
        drv.trace.objective.push_back(-e0s(-params.lambda, params.nu, py, prob));
        Gck1Step s = gck1_step(params, py, prob);
        q = compose(s.q_x, s.q_y_given_x);
        double th = theta_s(params, q, prob);
        drv.trace.objective.push_back(th);
        py = s.py_next;
        if (drv.step(th)) break;
    }
    return RunResult{std::move(drv.trace), std::move(q),
                     -e0s(-params.lambda, params.nu, py, prob)};
}

// ---- GCK2 --------------------------------------------------------------------------

Gck2Step gck2_step(const SlopeParams& params, const Kernel& pyx_prev,
                   const SourceProblem& prob) {
    double lambda = params.lambda, nu = params.nu;
    if (lambda >= 1.0)
        throw std::invalid_argument("gck2_step: the update degenerates at lambda = 1");
    std::size_t nx = prob.nx(), ny = prob.ny();
    std::vector<ProbVec> back;
    back.reserve(ny);
    std::vector<double> qy_log(ny);
    for (std::size_t y = 0; y < ny; ++y) {
        std::vector<double> col(nx);
        for (std::size_t x = 0; x < nx; ++x)
            col[x] = safe_log(prob.px[x]) - lambda * nu * prob.d(x, y) +
                     (1.0 - lambda) * safe_log(pyx_prev(x, y));
        double k = log_sum_exp(col);
        std::vector<double> r(nx, 1.0);
        if (std::isfinite(k))
            for (std::size_t x = 0; x < nx; ++x)
                r[x] = std::isfinite(col[x]) ? std::exp(col[x] - k) : 0.0;
        back.emplace_back(std::move(r));
        qy_log[y] = std::isfinite(k) ? k / (1.0 - lambda) : -kInf;
    }
    ProbVec qy(dist_from_log(qy_log, "gck2_step"));
    // pyx_next is the forward conditional of the joint (q_Y, q_{X|Y}).
    std::vector<ProbVec> fwd;
    fwd.reserve(nx);
    for (std::size_t x = 0; x < nx; ++x) {
        std::vector<double> row(ny);
        double tot = 0.0;
        for (std::size_t y = 0; y < ny; ++y) {
            row[y] = qy[y] * back[y][x];
            tot += row[y];
        }
        if (tot == 0.0) row.assign(ny, 1.0);
        fwd.emplace_back(std::move(row));
    }
    return Gck2Step{Kernel(std::move(back)), std::move(qy), Kernel(std::move(fwd))};
}

RunResult run_gck2(const SlopeParams& params, const SourceProblem& prob,
                   const StoppingRule& stop) {
    if (params.lambda == 0.0)
        throw std::invalid_argument("run_gck2: lambda = 0 is the rate-distortion branch; "
                                    "use blahut_rd_lagrangian");
    TraceDriver drv(stop);
    Kernel pyx = Kernel::uniform(prob.nx(), prob.ny());
    JointDist q = JointDist::uniform(prob.nx(), prob.ny());
    for (;;) {
        drv.trace.objective.push_back(-a_s(-params.lambda, params.nu, pyx, prob));
        Gck2Step s = gck2_step(params, pyx, prob);
        std::vector<double> mass(prob.nx() * prob.ny());
        for (std::size_t x = 0; x < prob.nx(); ++x)
            for (std::size_t y = 0; y < prob.ny(); ++y)
                mass[x * prob.ny() + y] = s.q_y[y] * s.q_x_given_y(y, x);
        q = JointDist(prob.nx(), prob.ny(), std::move(mass));
        double th = theta_s(params, q, prob);
        drv.trace.objective.push_back(th);
        pyx = s.pyx_next;
        if (drv.step(th)) break;
    }
    return RunResult{std::move(drv.trace), std::move(q),
                     -a_s(-params.lambda, params.nu, pyx, prob)};
}

// ---- JO (source) --------------------------------------------------------------------

JointDist jo_source_step(const SlopeParams& params, const JointDist& q_prev,
                         const SourceProblem& prob) {
    double lambda = params.lambda, nu = params.nu;
    if (!(lambda > 0.0 && lambda < 1.0))
        throw std::invalid_argument("jo_source_step: lambda must lie in (0,1)");
    ProbVec qy = q_prev.marginal_y();
    Kernel qyx = q_prev.conditional_y_given_x();
    std::size_t nx = prob.nx(), ny = prob.ny();
    std::vector<double> logw(nx * ny);
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y)
            logw[x * ny + y] = safe_log(prob.px[x]) - lambda * nu * prob.d(x, y) +
                               lambda * safe_log(qy[y]) +
                               (1.0 - lambda) * safe_log(qyx(x, y));
    return JointDist(nx, ny, dist_from_log(std::move(logw), "jo_source_step"));
}

RunResult run_jo_source(const SlopeParams& params, const SourceProblem& prob,
                        const StoppingRule& stop) {
    TraceDriver drv(stop);
    JointDist q = JointDist::uniform(prob.nx(), prob.ny());
    for (;;) {
        JointDist nxt = jo_source_step(params, q, prob);
        double th = theta_s(params, nxt, prob);
        drv.trace.objective.push_back(th);
        q = std::move(nxt);
        if (drv.step(th)) break;
    }
    double th = theta_s(params, q, prob);
    return RunResult{std::move(drv.trace), std::move(q), th};
}

// ---- Arimoto (source) ----------------------------------------------------------------

Kernel tilted_test_channel(double nu, const ProbVec& py, const SourceProblem& prob) {
    std::vector<ProbVec> rows;
    rows.reserve(prob.nx());
    for (std::size_t x = 0; x < prob.nx(); ++x) {
        std::vector<double> row(prob.ny());
        for (std::size_t y = 0; y < prob.ny(); ++y)
            row[y] = safe_log(py[y]) - nu * prob.d(x, y);
        double s = log_sum_exp(row);
        std::vector<double> r(prob.ny(), 0.0);
        for (std::size_t y = 0; y < prob.ny(); ++y)
            if (std::isfinite(row[y])) r[y] = std::exp(row[y] - s);
        rows.emplace_back(std::move(r));
    }
    return Kernel(std::move(rows));
}

ProbVec optimal_output_dist_source(double rho, double nu, const Kernel& pyx,
                                   const SourceProblem& prob) {
    std::vector<double> logw(prob.ny()), col(prob.nx());
    for (std::size_t y = 0; y < prob.ny(); ++y) {
        for (std::size_t x = 0; x < prob.nx(); ++x)
            col[x] = safe_log(prob.px[x]) + rho * nu * prob.d(x, y) +
                     (1.0 + rho) * safe_log(pyx(x, y));
        double k = log_sum_exp(col);
        logw[y] = std::isfinite(k) ? k / (1.0 + rho) : -kInf;
    }
    return ProbVec(dist_from_log(logw, "optimal_output_dist_source"));
}

ProbVec tilted_source_dist(double rho, double nu, const ProbVec& py,
                           const SourceProblem& prob) {
    std::vector<double> logw(prob.nx()), inner(prob.ny());
    for (std::size_t x = 0; x < prob.nx(); ++x) {
        for (std::size_t y = 0; y < prob.ny(); ++y)
            inner[y] = safe_log(py[y]) - nu * prob.d(x, y);
        logw[x] = safe_log(prob.px[x]) - rho * log_sum_exp(inner);
    }
    return ProbVec(dist_from_log(logw, "tilted_source_dist"));
}

ArimotoSourceStep arimoto_source_step(double rho, double nu, const ProbVec& py_prev,
                                      const SourceProblem& prob) {
    if (!(rho > -1.0)) throw std::invalid_argument("arimoto_source_step: rho must be > -1");
    Kernel pyx = tilted_test_channel(nu, py_prev, prob);
    if (rho == 0.0) {
        // Blahut rate-distortion branch: output marginal update.
        std::vector<double> nxt(prob.ny(), 0.0);
        for (std::size_t x = 0; x < prob.nx(); ++x)
            for (std::size_t y = 0; y < prob.ny(); ++y)
                nxt[y] += prob.px[x] * pyx(x, y);
        return ArimotoSourceStep{std::move(pyx), ProbVec(std::move(nxt))};
    }
    ProbVec py_next = optimal_output_dist_source(rho, nu, pyx, prob);
    return ArimotoSourceStep{std::move(pyx), std::move(py_next)};
}

RunResult run_arimoto_source(double rho, double nu, const SourceProblem& prob,
                             const StoppingRule& stop) {
    if (rho == 0.0)
        throw std::invalid_argument("run_arimoto_source: rho = 0 is the rate-distortion "
                                    "branch; use blahut_rd_lagrangian");
    TraceDriver drv(stop);
    ProbVec py = ProbVec::uniform(prob.ny());
    Kernel pyx = Kernel::uniform(prob.nx(), prob.ny());
    // Alternating minimization of F_ARs; the chain itself is the trace.
    for (;;) {
        drv.trace.objective.push_back(e0s(rho, nu, py, prob) / rho);
        ArimotoSourceStep s = arimoto_source_step(rho, nu, py, prob);
        pyx = s.p_y_given_x;
        drv.trace.objective.push_back(a_s(rho, nu, pyx, prob) / rho);
        py = s.py_next;
        if (drv.step(drv.trace.objective.back())) break;
    }
    JointDist q = compose(tilted_source_dist(rho, nu, py, prob),
                          tilted_test_channel(nu, py, prob));
    double value = rho > 0.0 ? e0s(rho, nu, py, prob) : -e0s(rho, nu, py, prob);
    return RunResult{std::move(drv.trace), std::move(q), value};
}

// ---- gaps, KKT, derived quantities ----------------------------------------------------

SourceRenyiGaps renyi_gap_source(double rho, double nu, const ProbVec& py,
                                 const Kernel& pyx, const SourceProblem& prob) {
    double f = f_ar_s(rho, nu, py, pyx, prob);
    double gap1 = f - e0s(rho, nu, py, prob) / rho;
    double gap2 = f - a_s(rho, nu, pyx, prob) / rho;
    Kernel opt_channel = tilted_test_channel(nu, py, prob);
    ProbVec tilted_px = tilted_source_dist(rho, nu, py, prob);
    double rhs1 = conditional_renyi(pyx, opt_channel, tilted_px, 1.0 + rho);
    ProbVec opt_out = optimal_output_dist_source(rho, nu, pyx, prob);
    double rhs2 = renyi_divergence(opt_out, py, 1.0 + rho);
    return SourceRenyiGaps{gap1, gap2, std::abs(gap1 - rhs1), std::abs(gap2 - rhs2)};
}

double kkt_residual_source(double lambda, double nu, const ProbVec& py,
                           const SourceProblem& prob) {
    // T(y) = -log sum_x P e^{-nu d(x,y)} [sum_y' py e^{-nu d(x,y')}]^{lambda-1}
    double theta_ref = -e0s(-lambda, nu, py, prob);
    std::vector<double> s(prob.nx()), inner(prob.ny());
    for (std::size_t x = 0; x < prob.nx(); ++x) {
        for (std::size_t y = 0; y < prob.ny(); ++y)
            inner[y] = safe_log(py[y]) - nu * prob.d(x, y);
        s[x] = log_sum_exp(inner);
    }
    double worst = 0.0;
    std::vector<double> terms(prob.nx());
    for (std::size_t y = 0; y < prob.ny(); ++y) {
        for (std::size_t x = 0; x < prob.nx(); ++x)
            terms[x] = safe_log(prob.px[x]) - nu * prob.d(x, y) + (lambda - 1.0) * s[x];
        double t_y = -log_sum_exp(terms);
        // complementary slackness on the support, dual feasibility everywhere
        worst = std::max(worst, py[y] * std::abs(t_y - theta_ref));
        worst = std::max(worst, theta_ref - t_y);
    }
    return worst;
}

BlahutResult blahut_rd_lagrangian(double nu, const SourceProblem& prob,
                                  const StoppingRule& stop) {
    ProbVec py = ProbVec::uniform(prob.ny());
    double prev = kInf;
    for (std::size_t it = 0; it < stop.max_iters; ++it) {
        ArimotoSourceStep s = arimoto_source_step(0.0, nu, py, prob);
        py = s.py_next;
        std::vector<double> inner(prob.ny());
        double val = 0.0;
        for (std::size_t x = 0; x < prob.nx(); ++x) {
            for (std::size_t y = 0; y < prob.ny(); ++y)
                inner[y] = safe_log(py[y]) - nu * prob.d(x, y);
            val -= prob.px[x] * log_sum_exp(inner);
        }
        if (std::isfinite(prev) &&
            std::abs(val - prev) < stop.rel_tol * std::max(1.0, std::abs(val)))
            return BlahutResult{val, py};
        prev = val;
    }
    return BlahutResult{prev, py};
}

double rate_distortion(double delta, const SourceProblem& prob, const StoppingRule& stop,
                       double nu_max) {
    auto supporting = [&](double nu) {
        return blahut_rd_lagrangian(nu, prob, stop).value - nu * delta;
    };
    double r = maximize_over_nu(supporting, nu_max).value;
    return std::max(0.0, r);
}

double theta_s_min(const SlopeParams& params, const SourceProblem& prob,
                   const StoppingRule& stop) {
    if (params.lambda == 0.0) return theta_s_min_closed_lambda0();
    if (params.lambda == 1.0) return theta_s_min_closed_lambda1(params.mu(), prob);
    return run_gck1(params, prob, stop).value;
}

double guessing_exponent(double rho, double delta, const SourceProblem& prob,
                         const NuSearch& nu_search, const StoppingRule& stop) {
    if (rho < 0.0) throw std::invalid_argument("guessing_exponent: rho must be >= 0");
    if (rho == 0.0) return 0.0;
    auto objective = [&](double nu) {
        double e0s_min = run_arimoto_source(rho, nu, prob, stop).value;
        return e0s_min - rho * nu * delta;
    };
    double v = maximize_over_nu(objective, nu_search.nu_max, nu_search.grid_points).value;
    return std::max(0.0, v);
}

SourceCutoffRate cutoff_rate_source(double lambda, double delta, const SourceProblem& prob,
                                    const NuSearch& nu_search, const StoppingRule& stop) {
    if (lambda <= 0.0 || lambda > 1.0)
        throw std::invalid_argument("cutoff_rate_source: lambda must lie in (0,1]");
    auto objective = [&](double nu) {
        SlopeParams p(lambda, nu);
        return theta_s_min(p, prob, stop) - lambda * nu * delta;
    };
    ScalarOpt best = maximize_over_nu(objective, nu_search.nu_max, nu_search.grid_points);
    double value = best.value / lambda;

    // Cross-check from the converged witness (nu*, py*).
    double nu_star = best.arg;
    double cross;
    if (lambda == 1.0) {
        cross = (theta_s_min_closed_lambda1(nu_star, prob) - nu_star * delta) / lambda;
    } else {
        SlopeParams p(lambda, nu_star);
        RunResult r = run_gck1(p, prob, stop);
        ProbVec py_star = r.q.marginal_y();
        std::vector<double> terms(prob.nx()), inner(prob.ny());
        for (std::size_t x = 0; x < prob.nx(); ++x) {
            for (std::size_t y = 0; y < prob.ny(); ++y)
                inner[y] = safe_log(py_star[y]) - nu_star * (prob.d(x, y) - delta);
            terms[x] = safe_log(prob.px[x]) + lambda * log_sum_exp(inner);
        }
        cross = -log_sum_exp(terms) / lambda;
    }
    return SourceCutoffRate{value, cross, nu_star};
}

} // namespace exponent_kit
