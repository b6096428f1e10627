#include "exponent_kit/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "exponent_kit/util.hpp"

namespace exponent_kit {

namespace {

double safe_log(double x) { return x > 0.0 ? std::log(x) : -kInf; }

// coef * log(v) with the 0 * (-inf) = 0 convention used by zero weights.
double ml(double coef, double logv) { return coef == 0.0 ? 0.0 : coef * logv; }

// Normalize log-weights into a distribution. Throws if all weights vanish.
std::vector<double> dist_from_log(std::vector<double> logw, const char* who) {
    double lse = log_sum_exp(logw);
    if (!std::isfinite(lse)) throw std::domain_error(std::string(who) + ": empty support");
    for (double& v : logw) v = std::isfinite(v) ? std::exp(v - lse) : 0.0;
    return logw;
}

bool weights_close(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

// Shared driver: records `values` per iteration (already minimization
// sense), stops on the relative change of the per-iteration key value.
struct TraceDriver {
    IterationTrace trace;
    StoppingRule stop;
    double prev_key = kInf;
    bool done = false;

    explicit TraceDriver(const StoppingRule& s) : stop(s) {}

    // Returns true when iteration should halt; key is the convergence monitor.
    bool step(double key) {
        if (std::isfinite(prev_key)) {
            double delta = prev_key - key;
            if (delta < -kTol.descent_slack) {
                trace.termination = Termination::stalled;
                done = true;
                return true;
            }
            if (std::abs(delta) < stop.rel_tol * std::max(1.0, std::abs(key))) {
                trace.termination = Termination::tolerance_met;
                done = true;
                return true;
            }
        }
        prev_key = key;
        ++trace.iterations;
        if (trace.iterations >= stop.max_iters) {
            trace.termination = Termination::max_iters;
            done = true;
            return true;
        }
        return false;
    }
};

} // namespace

ChannelProblem::ChannelProblem(Kernel w_, std::vector<double> cost_)
    : w(std::move(w_)), cost(std::move(cost_)) {
    if (cost.size() != w.num_inputs())
        throw std::invalid_argument("ChannelProblem: cost length must match input alphabet");
    for (double c : cost)
        if (c < 0.0 || !std::isfinite(c))
            throw std::invalid_argument("ChannelProblem: costs must be finite and >= 0");
}

ChannelProblem ChannelProblem::uncosted(Kernel w_) {
    std::size_t n = w_.num_inputs();
    return ChannelProblem(std::move(w_), std::vector<double>(n, 0.0));
}

double ChannelProblem::gamma_min() const {
    return *std::min_element(cost.begin(), cost.end());
}

SlopeParams::SlopeParams(double lambda_, double nu_) : lambda(lambda_), nu(nu_) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("SlopeParams: lambda must lie in [0,1]");
    if (!(nu >= 0.0)) throw std::invalid_argument("SlopeParams: nu must be >= 0");
}

SlopeParams SlopeParams::signed_slope(double lambda_, double nu_) {
    if (!(lambda_ >= -1.0 && lambda_ <= 1.0))
        throw std::invalid_argument("SlopeParams: signed lambda must lie in [-1,1]");
    SlopeParams p(0.0, nu_);
    p.lambda = lambda_;
    return p;
}

FamilyWeights::FamilyWeights(double a, double b, double c, double d)
    : t1(a), t2(b), t3(c), t4(d) {
    if (t1 < 0 || t2 < 0 || t3 < 0 || t4 < 0)
        throw std::invalid_argument("FamilyWeights: weights must be >= 0");
}

bool FamilyWeights::in_t1() const { return weights_close(t1, t2 + 1.0); }
bool FamilyWeights::in_t2(double lambda) const {
    return lambda < 1.0 && weights_close(t4, t3 + lambda / (1.0 - lambda));
}
bool FamilyWeights::in_t3(double lambda) const {
    return lambda < 1.0 && weights_close(t3, t4 + lambda / (1.0 - lambda));
}
bool FamilyWeights::in_t4() const { return weights_close(t2, t1 + 1.0); }

std::string to_string(Termination t) {
    switch (t) {
        case Termination::tolerance_met: return "tolerance_met";
        case Termination::max_iters: return "max_iters";
        case Termination::stalled: return "stalled";
    }
    return "unknown";
}

// ---- objective functionals -------------------------------------------------

double e0(double rho, double nu, const ProbVec& px, const ChannelProblem& prob) {
    if (!(rho > -1.0)) throw std::invalid_argument("e0: rho must be > -1");
    if (px.size() != prob.nx()) throw std::invalid_argument("e0: dimension mismatch");
    if (rho == 0.0) return 0.0;
    std::vector<double> per_y(prob.ny());
    std::vector<double> inner(prob.nx());
    for (std::size_t y = 0; y < prob.ny(); ++y) {
        for (std::size_t x = 0; x < prob.nx(); ++x)
            inner[x] = safe_log(px[x]) +
                       (safe_log(prob.w(x, y)) + rho * nu * prob.cost[x]) / (1.0 + rho);
        per_y[y] = (1.0 + rho) * log_sum_exp(inner);
    }
    return -log_sum_exp(per_y);
}

double e0_slope_limit(double nu, const ProbVec& px, const ChannelProblem& prob) {
    double ec = 0.0;
    for (std::size_t x = 0; x < prob.nx(); ++x) ec += px[x] * prob.cost[x];
    return mutual_information(px, prob.w) - nu * ec;
}

double a_func(double rho, double nu, const Kernel& p_hat_xy, const ChannelProblem& prob) {
    if (rho == 0.0 || std::abs(rho) > 1.0)
        throw std::invalid_argument("a_func: rho must satisfy 0 < |rho| <= 1");
    if (p_hat_xy.num_inputs() != prob.ny() || p_hat_xy.num_outputs() != prob.nx())
        throw std::invalid_argument("a_func: dimension mismatch");
    std::vector<double> per_x(prob.nx());
    std::vector<double> inner(prob.ny());
    for (std::size_t x = 0; x < prob.nx(); ++x) {
        for (std::size_t y = 0; y < prob.ny(); ++y) {
            double lw = safe_log(prob.w(x, y));
            inner[y] = std::isfinite(lw) ? -rho * safe_log(p_hat_xy(y, x)) + lw : -kInf;
        }
        double il = log_sum_exp(inner);
        per_x[x] = -nu * prob.cost[x] - il / rho;
    }
    return rho * log_sum_exp(per_x);
}

double f_ar(double rho, double nu, const ProbVec& px, const Kernel& p_hat_xy,
            const ChannelProblem& prob) {
    if (rho == 0.0 || rho <= -1.0 || rho > 1.0)
        throw std::invalid_argument("f_ar: rho must lie in (-1,0) u (0,1]");
    if (px.size() != prob.nx() || p_hat_xy.num_inputs() != prob.ny() ||
        p_hat_xy.num_outputs() != prob.nx())
        throw std::invalid_argument("f_ar: dimension mismatch");
    std::vector<double> terms;
    terms.reserve(prob.nx() * prob.ny());
    for (std::size_t x = 0; x < prob.nx(); ++x)
        for (std::size_t y = 0; y < prob.ny(); ++y) {
            double lw = safe_log(prob.w(x, y));
            if (!std::isfinite(lw) || px[x] == 0.0) {
                terms.push_back(-kInf);
                continue;
            }
            terms.push_back((1.0 + rho) * safe_log(px[x]) -
                            rho * safe_log(p_hat_xy(y, x)) + lw +
                            rho * nu * prob.cost[x]);
        }
    return -log_sum_exp(terms) / rho;
}

double f_ar_limit(double nu, const ProbVec& px, const Kernel& p_hat_xy,
                  const ChannelProblem& prob) {
    double s = 0.0;
    for (std::size_t x = 0; x < prob.nx(); ++x) {
        if (px[x] == 0.0) continue;
        for (std::size_t y = 0; y < prob.ny(); ++y) {
            if (prob.w(x, y) == 0.0) continue;
            if (p_hat_xy(y, x) == 0.0) return -kInf;
            s += px[x] * prob.w(x, y) *
                 (std::log(p_hat_xy(y, x)) - nu * prob.cost[x] - std::log(px[x]));
        }
    }
    return s;
}

double theta(double lambda, double mu, const JointDist& q, const ChannelProblem& prob) {
    if (q.nx() != prob.nx() || q.ny() != prob.ny())
        throw std::invalid_argument("theta: dimension mismatch");
    ProbVec qx = q.marginal_x();
    ProbVec qy = q.marginal_y();
    double val = 0.0;
    for (std::size_t x = 0; x < q.nx(); ++x)
        for (std::size_t y = 0; y < q.ny(); ++y) {
            double m = q(x, y);
            if (m == 0.0) continue;
            if (prob.w(x, y) == 0.0) return kInf;
            double log_cond = std::log(m / qx[x]);
            val += m * ((1.0 - lambda) * log_cond + lambda * std::log(qy[y]) -
                        std::log(prob.w(x, y)) + mu * prob.cost[x]);
        }
    return val;
}

double theta(const SlopeParams& params, const JointDist& q, const ChannelProblem& prob) {
    return theta(params.lambda, params.mu(), q, prob);
}

double theta_min_closed_lambda0(double mu, const ChannelProblem& prob) {
    return mu * prob.gamma_min();
}

double theta_min_closed_lambda1(double mu, const ChannelProblem& prob) {
    double total = 0.0;
    for (std::size_t y = 0; y < prob.ny(); ++y) {
        double best = 0.0;
        for (std::size_t x = 0; x < prob.nx(); ++x) {
            double v = prob.w(x, y) * std::exp(-mu * prob.cost[x]);
            if (v > best) best = v; // strict >: ties keep the lowest index
        }
        total += best;
    }
    return -std::log(total);
}

double d_t(const FamilyWeights& t, const JointDist& q, const JointDist& p) {
    if (q.nx() != p.nx() || q.ny() != p.ny())
        throw std::invalid_argument("d_t: dimension mismatch");
    double val = 0.0;
    if (t.t1 > 0) val += t.t1 * kl_divergence(q.marginal_x(), p.marginal_x());
    if (t.t2 > 0)
        val += t.t2 * conditional_kl(q.conditional_y_given_x(), p.conditional_y_given_x(),
                                     q.marginal_x());
    if (t.t3 > 0) val += t.t3 * kl_divergence(q.marginal_y(), p.marginal_y());
    if (t.t4 > 0)
        val += t.t4 * conditional_kl(q.conditional_x_given_y(), p.conditional_x_given_y(),
                                     q.marginal_y());
    return val;
}

double j_t(const SlopeParams& params, const FamilyWeights& t, const JointDist& q,
           const JointDist& p, const ChannelProblem& prob) {
    return theta(params, q, prob) + (1.0 - params.lambda) * d_t(t, q, p);
}

// ---- family update ----------------------------------------------------------

namespace {

// T1 closed form: builds (q_{X|Y}, q_Y) from the previous joint.
JointDist family_update_t1(double lambda, double nu, const FamilyWeights& t,
                           const JointDist& p, const ChannelProblem& prob) {
    std::size_t nx = prob.nx(), ny = prob.ny();
    ProbVec px = p.marginal_x();
    ProbVec py = p.marginal_y();
    Kernel pxy = p.conditional_x_given_y();
    double b1 = 1.0 + t.t2 + t.t4;
    double a = (1.0 - lambda) * (t.t2 + t.t3);
    double g1 = 1.0 + a;

    std::vector<double> lw(nx * ny), k1(ny), qy_log(ny);
    for (std::size_t y = 0; y < ny; ++y) {
        std::vector<double> col(nx);
        for (std::size_t x = 0; x < nx; ++x) {
            col[x] = (safe_log(px[x]) + ml(t.t2 + t.t4, safe_log(pxy(y, x))) +
                      (safe_log(prob.w(x, y)) - lambda * nu * prob.cost[x]) /
                          (1.0 - lambda)) /
                     b1;
            lw[x * ny + y] = col[x];
        }
        k1[y] = log_sum_exp(col);
        qy_log[y] = std::isfinite(k1[y])
                        ? (ml(a, safe_log(py[y])) + (1.0 - lambda) * b1 * k1[y]) / g1
                        : -kInf;
    }
    std::vector<double> qy = dist_from_log(qy_log, "family_update");
    std::vector<double> mass(nx * ny, 0.0);
    for (std::size_t y = 0; y < ny; ++y) {
        if (qy[y] == 0.0) continue;
        for (std::size_t x = 0; x < nx; ++x) {
            double l = lw[x * ny + y];
            mass[x * ny + y] = std::isfinite(l) ? qy[y] * std::exp(l - k1[y]) : 0.0;
        }
    }
    return JointDist(nx, ny, std::move(mass));
}

// T2 closed form: builds (q_{Y|X}, q_X).
JointDist family_update_t2(double lambda, double nu, const FamilyWeights& t,
                           const JointDist& p, const ChannelProblem& prob) {
    std::size_t nx = prob.nx(), ny = prob.ny();
    ProbVec px = p.marginal_x();
    Kernel pyx = p.conditional_y_given_x();
    Kernel pxy = p.conditional_x_given_y();
    double b2 = 1.0 + (1.0 - lambda) * (t.t2 + t.t3);
    double g2 = lambda + (1.0 - lambda) * (t.t1 + t.t3);

    std::vector<double> lw(nx * ny), k2(nx), qx_log(nx);
    for (std::size_t x = 0; x < nx; ++x) {
        std::vector<double> row(ny);
        for (std::size_t y = 0; y < ny; ++y) {
            row[y] = (ml((1.0 - lambda) * (t.t2 + t.t3), safe_log(pyx(x, y))) +
                      lambda * safe_log(pxy(y, x)) + safe_log(prob.w(x, y)) -
                      lambda * nu * prob.cost[x]) /
                     b2;
            lw[x * ny + y] = row[y];
        }
        k2[x] = log_sum_exp(row);
        qx_log[x] = std::isfinite(k2[x])
                        ? (ml((1.0 - lambda) * (t.t1 + t.t3), safe_log(px[x])) +
                           b2 * k2[x]) /
                              g2
                        : -kInf;
    }
    std::vector<double> qx = dist_from_log(qx_log, "family_update");
    std::vector<double> mass(nx * ny, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
        if (qx[x] == 0.0) continue;
        for (std::size_t y = 0; y < ny; ++y) {
            double l = lw[x * ny + y];
            mass[x * ny + y] = std::isfinite(l) ? qx[x] * std::exp(l - k2[x]) : 0.0;
        }
    }
    return JointDist(nx, ny, std::move(mass));
}

} // namespace

JointDist family_update(const SlopeParams& params, const FamilyWeights& t,
                        const JointDist& p_prev, const ChannelProblem& prob,
                        FamilyBranch branch) {
    double lambda = params.lambda;
    if (!(lambda > 0.0 && lambda < 1.0))
        throw std::invalid_argument("family_update: lambda must lie in (0,1)");
    bool ok1 = t.in_t1(), ok2 = t.in_t2(lambda);
    if (branch == FamilyBranch::first && !ok1)
        throw std::invalid_argument("family_update: weights are not in T1");
    if (branch == FamilyBranch::second && !ok2)
        throw std::invalid_argument("family_update: weights are not in T2");
    if (ok1 && branch != FamilyBranch::second)
        return family_update_t1(lambda, params.nu, t, p_prev, prob);
    if (ok2) return family_update_t2(lambda, params.nu, t, p_prev, prob);
    throw std::invalid_argument("family_update: weights outside T1 u T2 have no closed form");
}

RunResult run_family(const SlopeParams& params, const FamilyWeights& t,
                     const ChannelProblem& prob, const JointDist& init,
                     const StoppingRule& stop) {
    TraceDriver drv(stop);
    JointDist p = init;
    JointDist q = init;
    for (;;) {
        q = family_update(params, t, p, prob);
        drv.trace.objective.push_back(j_t(params, t, q, p, prob));
        double th = theta(params, q, prob);
        drv.trace.objective.push_back(th);
        p = q; // full-joint copy
        if (drv.step(th)) break;
    }
    double value = theta(params, q, prob);
    return RunResult{std::move(drv.trace), std::move(q), value};
}

// ---- Tridenski-Zamir --------------------------------------------------------

TzStep tz_step(const SlopeParams& params, const ProbVec& px_prev,
               const ChannelProblem& prob) {
    double lambda = params.lambda, nu = params.nu;
    if (!(lambda > 0.0 && lambda < 1.0))
        throw std::invalid_argument("tz_step: lambda must lie in (0,1); the update degenerates at the endpoints");
    std::size_t nx = prob.nx(), ny = prob.ny();
    std::vector<ProbVec> rows;
    rows.reserve(ny);
    std::vector<double> qy_log(ny);
    for (std::size_t y = 0; y < ny; ++y) {
        std::vector<double> col(nx);
        for (std::size_t x = 0; x < nx; ++x)
            col[x] = safe_log(px_prev[x]) +
                     (safe_log(prob.w(x, y)) - lambda * nu * prob.cost[x]) / (1.0 - lambda);
        double k = log_sum_exp(col);
        qy_log[y] = std::isfinite(k) ? (1.0 - lambda) * k : -kInf;
        std::vector<double> r(nx, 0.0);
        for (std::size_t x = 0; x < nx; ++x)
            if (std::isfinite(col[x])) r[x] = std::exp(col[x] - k);
        if (!std::isfinite(k)) r.assign(nx, 1.0);
        rows.emplace_back(std::move(r));
    }
    ProbVec qy(dist_from_log(qy_log, "tz_step"));
    std::vector<double> nxt(nx, 0.0);
    for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t x = 0; x < nx; ++x) nxt[x] += qy[y] * rows[y][x];
    return TzStep{Kernel(std::move(rows)), std::move(qy), ProbVec(std::move(nxt))};
}

RunResult run_tz(const SlopeParams& params, const ChannelProblem& prob,
                 const StoppingRule& stop) {
    TraceDriver drv(stop);
    ProbVec px = ProbVec::uniform(prob.nx());
    JointDist q = JointDist::uniform(prob.nx(), prob.ny());
    for (;;) {
        drv.trace.objective.push_back(e0(-params.lambda, params.nu, px, prob));
        TzStep s = tz_step(params, px, prob);
        std::vector<double> mass(prob.nx() * prob.ny());
        for (std::size_t x = 0; x < prob.nx(); ++x)
            for (std::size_t y = 0; y < prob.ny(); ++y)
                mass[x * prob.ny() + y] = s.q_y[y] * s.q_x_given_y(y, x);
        q = JointDist(prob.nx(), prob.ny(), std::move(mass));
        double th = theta(params.lambda, params.mu(), q, prob);
        drv.trace.objective.push_back(th);
        px = s.px_next;
        if (drv.step(th)) break;
    }
    return RunResult{std::move(drv.trace), std::move(q),
                     e0(-params.lambda, params.nu, px, prob)};
}

// ---- Algorithm B ------------------------------------------------------------

AlgBStep alg_b_step(const SlopeParams& params, const Kernel& p_hat_prev,
                    const ChannelProblem& prob) {
    double lambda = params.lambda, nu = params.nu;
    if (lambda >= 1.0)
        throw std::invalid_argument("alg_b_step: the update degenerates at lambda = 1");
    std::size_t nx = prob.nx(), ny = prob.ny();

    std::vector<ProbVec> qyx_rows;
    qyx_rows.reserve(nx);
    std::vector<double> qx_log(nx);
    if (lambda == 0.0) {
        // Arimoto-Blahut capacity branch: geometric-mean input update.
        for (std::size_t x = 0; x < nx; ++x) {
            std::vector<double> r(ny);
            for (std::size_t y = 0; y < ny; ++y) r[y] = prob.w(x, y);
            qyx_rows.emplace_back(std::move(r));
            double g = -nu * prob.cost[x];
            for (std::size_t y = 0; y < ny; ++y)
                if (prob.w(x, y) > 0.0) g += prob.w(x, y) * safe_log(p_hat_prev(y, x));
            qx_log[x] = g;
        }
    } else {
        for (std::size_t x = 0; x < nx; ++x) {
            std::vector<double> row(ny);
            for (std::size_t y = 0; y < ny; ++y)
                row[y] = lambda * safe_log(p_hat_prev(y, x)) + safe_log(prob.w(x, y));
            double k = log_sum_exp(row);
            std::vector<double> r(ny, 0.0);
            for (std::size_t y = 0; y < ny; ++y)
                if (std::isfinite(row[y])) r[y] = std::exp(row[y] - k);
            qyx_rows.emplace_back(std::move(r));
            qx_log[x] = -nu * prob.cost[x] + k / lambda;
        }
    }
    ProbVec qx(dist_from_log(qx_log, "alg_b_step"));

    // p_hat_next is the backward conditional of (q_X, q_{Y|X}).
    std::vector<ProbVec> back;
    back.reserve(ny);
    for (std::size_t y = 0; y < ny; ++y) {
        std::vector<double> col(nx);
        double tot = 0.0;
        for (std::size_t x = 0; x < nx; ++x) {
            col[x] = qx[x] * qyx_rows[x][y];
            tot += col[x];
        }
        if (tot == 0.0) col.assign(nx, 1.0);
        back.emplace_back(std::move(col));
    }
    return AlgBStep{Kernel(std::move(qyx_rows)), std::move(qx), Kernel(std::move(back))};
}

RunResult run_alg_b(const SlopeParams& params, const ChannelProblem& prob,
                    const StoppingRule& stop) {
    if (params.lambda == 0.0)
        throw std::invalid_argument("run_alg_b: lambda = 0 is the capacity branch; "
                                    "use arimoto_blahut_capacity");
    TraceDriver drv(stop);
    Kernel p_hat = Kernel::uniform(prob.ny(), prob.nx());
    JointDist q = JointDist::uniform(prob.nx(), prob.ny());
    for (;;) {
        drv.trace.objective.push_back(a_func(-params.lambda, params.nu, p_hat, prob));
        AlgBStep s = alg_b_step(params, p_hat, prob);
        q = compose(s.q_x, s.q_y_given_x);
        double th = theta(params.lambda, params.mu(), q, prob);
        drv.trace.objective.push_back(th);
        p_hat = s.p_hat_next;
        if (drv.step(th)) break;
    }
    return RunResult{std::move(drv.trace), std::move(q),
                     a_func(-params.lambda, params.nu, p_hat, prob)};
}

// ---- Arimoto ----------------------------------------------------------------

Kernel optimal_backward_channel(double rho, double nu, const ProbVec& px,
                                const ChannelProblem& prob) {
    std::size_t nx = prob.nx(), ny = prob.ny();
    std::vector<ProbVec> rows;
    rows.reserve(ny);
    for (std::size_t y = 0; y < ny; ++y) {
        std::vector<double> col(nx);
        for (std::size_t x = 0; x < nx; ++x)
            col[x] = safe_log(px[x]) +
                     (safe_log(prob.w(x, y)) + rho * nu * prob.cost[x]) / (1.0 + rho);
        double k = log_sum_exp(col);
        std::vector<double> r(nx, 1.0);
        if (std::isfinite(k))
            for (std::size_t x = 0; x < nx; ++x)
                r[x] = std::isfinite(col[x]) ? std::exp(col[x] - k) : 0.0;
        rows.emplace_back(std::move(r));
    }
    return Kernel(std::move(rows));
}

ProbVec optimal_output_dist(double rho, double nu, const ProbVec& px,
                            const ChannelProblem& prob) {
    std::vector<double> logw(prob.ny());
    std::vector<double> col(prob.nx());
    for (std::size_t y = 0; y < prob.ny(); ++y) {
        for (std::size_t x = 0; x < prob.nx(); ++x)
            col[x] = safe_log(px[x]) +
                     (safe_log(prob.w(x, y)) + rho * nu * prob.cost[x]) / (1.0 + rho);
        double k = log_sum_exp(col);
        logw[y] = std::isfinite(k) ? (1.0 + rho) * k : -kInf;
    }
    return ProbVec(dist_from_log(logw, "optimal_output_dist"));
}

ProbVec optimal_input_dist(double rho, double nu, const Kernel& p_hat_xy,
                           const ChannelProblem& prob) {
    std::vector<double> logw(prob.nx());
    std::vector<double> inner(prob.ny());
    for (std::size_t x = 0; x < prob.nx(); ++x) {
        for (std::size_t y = 0; y < prob.ny(); ++y) {
            double lw = safe_log(prob.w(x, y));
            inner[y] = std::isfinite(lw)
                           ? -rho * safe_log(p_hat_xy(y, x)) + lw + rho * nu * prob.cost[x]
                           : -kInf;
        }
        double k = log_sum_exp(inner);
        logw[x] = -k / rho;
    }
    return ProbVec(dist_from_log(logw, "optimal_input_dist"));
}

ArimotoChannelStep arimoto_channel_step(double rho, double nu, const ProbVec& px_prev,
                                        const ChannelProblem& prob) {
    if (!(rho > -1.0)) throw std::invalid_argument("arimoto_channel_step: rho must be > -1");
    if (rho == 0.0) {
        // Classic capacity iteration: posterior then geometric-mean input.
        Kernel p_hat = compose(px_prev, prob.w).conditional_x_given_y();
        std::vector<double> logw(prob.nx());
        for (std::size_t x = 0; x < prob.nx(); ++x) {
            double g = -nu * prob.cost[x];
            for (std::size_t y = 0; y < prob.ny(); ++y)
                if (prob.w(x, y) > 0.0) g += prob.w(x, y) * safe_log(p_hat(y, x));
            logw[x] = g;
        }
        return ArimotoChannelStep{std::move(p_hat),
                                  ProbVec(dist_from_log(logw, "arimoto_channel_step"))};
    }
    Kernel p_hat = optimal_backward_channel(rho, nu, px_prev, prob);
    ProbVec px_next = optimal_input_dist(rho, nu, p_hat, prob);
    return ArimotoChannelStep{std::move(p_hat), std::move(px_next)};
}

RunResult run_arimoto_channel(double rho, double nu, const ChannelProblem& prob,
                              const StoppingRule& stop) {
    if (rho == 0.0)
        throw std::invalid_argument("run_arimoto_channel: rho = 0 is the capacity branch; "
                                    "use arimoto_blahut_capacity");
    TraceDriver drv(stop);
    ProbVec px = ProbVec::uniform(prob.nx());
    Kernel p_hat = Kernel::uniform(prob.ny(), prob.nx());
    // Maximization of F_AR; the trace records the negated chain.
    for (;;) {
        drv.trace.objective.push_back(-e0(rho, nu, px, prob) / rho);
        ArimotoChannelStep s = arimoto_channel_step(rho, nu, px, prob);
        p_hat = s.p_hat;
        drv.trace.objective.push_back(-a_func(rho, nu, p_hat, prob) / rho);
        px = s.px_next;
        if (drv.step(drv.trace.objective.back())) break;
    }
    // Implied joint: q_X = px with the tilted conditional q*_{Y|X}(p_hat).
    std::vector<ProbVec> rows;
    rows.reserve(prob.nx());
    for (std::size_t x = 0; x < prob.nx(); ++x) {
        std::vector<double> row(prob.ny());
        for (std::size_t y = 0; y < prob.ny(); ++y) {
            double lw = safe_log(prob.w(x, y));
            row[y] = std::isfinite(lw) ? -rho * safe_log(p_hat(y, x)) + lw : -kInf;
        }
        double k = log_sum_exp(row);
        std::vector<double> r(prob.ny(), 1.0);
        if (std::isfinite(k))
            for (std::size_t y = 0; y < prob.ny(); ++y)
                r[y] = std::isfinite(row[y]) ? std::exp(row[y] - k) : 0.0;
        rows.emplace_back(std::move(r));
    }
    JointDist q = compose(px, Kernel(std::move(rows)));
    return RunResult{std::move(drv.trace), std::move(q), e0(rho, nu, px, prob)};
}

// ---- JO ---------------------------------------------------------------------

JointDist jo_channel_step(const SlopeParams& params, const JointDist& q_prev,
                          const ChannelProblem& prob) {
    double lambda = params.lambda, nu = params.nu;
    if (!(lambda > 0.0 && lambda < 1.0))
        throw std::invalid_argument("jo_channel_step: lambda must lie in (0,1)");
    ProbVec qx = q_prev.marginal_x();
    Kernel qxy = q_prev.conditional_x_given_y();
    std::size_t nx = prob.nx(), ny = prob.ny();
    std::vector<double> logw(nx * ny);
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y)
            logw[x * ny + y] = (1.0 - lambda) * safe_log(qx[x]) +
                               lambda * safe_log(qxy(y, x)) + safe_log(prob.w(x, y)) -
                               lambda * nu * prob.cost[x];
    return JointDist(nx, ny, dist_from_log(std::move(logw), "jo_channel_step"));
}

RunResult run_jo_channel(const SlopeParams& params, const ChannelProblem& prob,
                         const StoppingRule& stop) {
    TraceDriver drv(stop);
    JointDist q = JointDist::uniform_on_support(prob.w);
    for (;;) {
        JointDist nxt = jo_channel_step(params, q, prob);
        double th = theta(params.lambda, params.mu(), nxt, prob);
        drv.trace.objective.push_back(th);
        q = std::move(nxt);
        if (drv.step(th)) break;
    }
    double th = theta(params.lambda, params.mu(), q, prob);
    return RunResult{std::move(drv.trace), std::move(q), th};
}

// ---- parameterized Arimoto (two-joint updates) -------------------------------

double e0_t2(double lambda, double nu, double t2, const JointDist& p,
             const ChannelProblem& prob) {
    ProbVec px = p.marginal_x();
    Kernel pyx = p.conditional_y_given_x();
    double denom = (1.0 - lambda) * (1.0 + t2);
    std::vector<double> per_y(prob.ny()), col(prob.nx());
    for (std::size_t y = 0; y < prob.ny(); ++y) {
        for (std::size_t x = 0; x < prob.nx(); ++x)
            col[x] = safe_log(px[x]) + ml(t2 / (1.0 + t2), safe_log(pyx(x, y))) +
                     (safe_log(prob.w(x, y)) - lambda * nu * prob.cost[x]) / denom;
        double h = log_sum_exp(col);
        per_y[y] = std::isfinite(h)
                       ? h * (1.0 - lambda) * (1.0 + t2) / (1.0 + (1.0 - lambda) * t2)
                       : -kInf;
    }
    return -(1.0 + (1.0 - lambda) * t2) * log_sum_exp(per_y);
}

double a_t3(double lambda, double nu, double t3, const JointDist& p_hat,
            const ChannelProblem& prob) {
    ProbVec py = p_hat.marginal_y();
    Kernel pxy = p_hat.conditional_x_given_y();
    double b = 1.0 + (1.0 - lambda) * t3;
    double g = lambda + (1.0 - lambda) * t3;
    std::vector<double> per_x(prob.nx()), row(prob.ny());
    for (std::size_t x = 0; x < prob.nx(); ++x) {
        for (std::size_t y = 0; y < prob.ny(); ++y)
            row[y] = (ml((1.0 - lambda) * t3, safe_log(py[y])) +
                      (lambda + (1.0 - lambda) * t3) * safe_log(pxy(y, x)) +
                      safe_log(prob.w(x, y)) - lambda * nu * prob.cost[x]) /
                     b;
        double l = log_sum_exp(row);
        per_x[x] = std::isfinite(l) ? l * b / g : -kInf;
    }
    return -g * log_sum_exp(per_x);
}

ParameterizedArimotoStep parameterized_arimoto_step(double lambda, double nu, double t2,
                                                    double t3, const JointDist& p,
                                                    const ChannelProblem& prob) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw std::invalid_argument("parameterized_arimoto_step: lambda must lie in (0,1)");
    if (t2 < 0.0 || t3 < 0.0)
        throw std::invalid_argument("parameterized_arimoto_step: t2, t3 must be >= 0");
    std::size_t nx = prob.nx(), ny = prob.ny();
    ProbVec px = p.marginal_x();
    Kernel pyx = p.conditional_y_given_x();

    // hat p_{X|Y} and hat p_Y from the current p.
    double denom = (1.0 - lambda) * (1.0 + t2);
    std::vector<double> lw(nx * ny), hlog(ny), py_log(ny);
    for (std::size_t y = 0; y < ny; ++y) {
        std::vector<double> col(nx);
        for (std::size_t x = 0; x < nx; ++x) {
            col[x] = safe_log(px[x]) + ml(t2 / (1.0 + t2), safe_log(pyx(x, y))) +
                     (safe_log(prob.w(x, y)) - lambda * nu * prob.cost[x]) / denom;
            lw[x * ny + y] = col[x];
        }
        hlog[y] = log_sum_exp(col);
        py_log[y] = std::isfinite(hlog[y])
                        ? hlog[y] * (1.0 - lambda) * (1.0 + t2) / (1.0 + (1.0 - lambda) * t2)
                        : -kInf;
    }
    std::vector<double> hat_py = dist_from_log(py_log, "parameterized_arimoto_step");
    std::vector<double> hat_mass(nx * ny, 0.0);
    for (std::size_t y = 0; y < ny; ++y) {
        if (hat_py[y] == 0.0) continue;
        for (std::size_t x = 0; x < nx; ++x) {
            double l = lw[x * ny + y];
            hat_mass[x * ny + y] = std::isfinite(l) ? hat_py[y] * std::exp(l - hlog[y]) : 0.0;
        }
    }
    JointDist p_hat(nx, ny, std::move(hat_mass));

    // p_X and p_{Y|X} from hat p.
    ProbVec hpy = p_hat.marginal_y();
    Kernel hpxy = p_hat.conditional_x_given_y();
    double b = 1.0 + (1.0 - lambda) * t3;
    double g = lambda + (1.0 - lambda) * t3;
    std::vector<double> lw2(nx * ny), llog(nx), px_log(nx);
    for (std::size_t x = 0; x < nx; ++x) {
        std::vector<double> row(ny);
        for (std::size_t y = 0; y < ny; ++y) {
            row[y] = (ml((1.0 - lambda) * t3, safe_log(hpy[y])) +
                      (lambda + (1.0 - lambda) * t3) * safe_log(hpxy(y, x)) +
                      safe_log(prob.w(x, y)) - lambda * nu * prob.cost[x]) /
                     b;
            lw2[x * ny + y] = row[y];
        }
        llog[x] = log_sum_exp(row);
        px_log[x] = std::isfinite(llog[x]) ? llog[x] * b / g : -kInf;
    }
    std::vector<double> px_next = dist_from_log(px_log, "parameterized_arimoto_step");
    std::vector<double> next_mass(nx * ny, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
        if (px_next[x] == 0.0) continue;
        for (std::size_t y = 0; y < ny; ++y) {
            double l = lw2[x * ny + y];
            next_mass[x * ny + y] = std::isfinite(l) ? px_next[x] * std::exp(l - llog[x]) : 0.0;
        }
    }
    return ParameterizedArimotoStep{std::move(p_hat),
                                    JointDist(nx, ny, std::move(next_mass))};
}

RunResult run_parameterized_arimoto(double lambda, double nu, double t2, double t3,
                                    const ChannelProblem& prob,
                                    const StoppingRule& stop) {
    TraceDriver drv(stop);
    JointDist p = JointDist::uniform_on_support(prob.w);
    for (;;) {
        drv.trace.objective.push_back(e0_t2(lambda, nu, t2, p, prob));
        ParameterizedArimotoStep s = parameterized_arimoto_step(lambda, nu, t2, t3, p, prob);
        double av = a_t3(lambda, nu, t3, s.p_hat, prob);
        drv.trace.objective.push_back(av);
        p = s.p_next;
        if (drv.step(av)) break;
    }
    double v = e0_t2(lambda, nu, t2, p, prob);
    return RunResult{std::move(drv.trace), std::move(p), v};
}

// ---- Renyi gaps and minimax -------------------------------------------------

RenyiGaps renyi_gap_identities(double rho, double nu, const ProbVec& px,
                               const Kernel& p_hat_xy, const ChannelProblem& prob) {
    double f = f_ar(rho, nu, px, p_hat_xy, prob);
    double gap1 = e0(rho, nu, px, prob) / rho - f;
    double gap2 = a_func(rho, nu, p_hat_xy, prob) / rho - f;
    Kernel opt_back = optimal_backward_channel(rho, nu, px, prob);
    ProbVec opt_out = optimal_output_dist(rho, nu, px, prob);
    double rhs1 = conditional_renyi(opt_back, p_hat_xy, opt_out, 1.0 + rho);
    ProbVec opt_in = optimal_input_dist(rho, nu, p_hat_xy, prob);
    double rhs2 = renyi_divergence(px, opt_in, 1.0 + rho);
    return RenyiGaps{gap1, gap2, std::abs(gap1 - rhs1), std::abs(gap2 - rhs2)};
}

double minimax_theta_saddle(double rho, double nu, const ChannelProblem& prob,
                            const StoppingRule& stop) {
    if (!(rho > 0.0 && rho <= 1.0))
        throw std::invalid_argument("minimax_theta_saddle: rho must lie in (0,1]");
    RunResult r = run_arimoto_channel(rho, nu, prob, stop);
    // r.q is (q_X*, q*_{Y|X}(p_hat*)); evaluate Theta at the saddle directly.
    return theta(-rho, -rho * nu, r.q, prob);
}

// ---- lambda -> 0 branch -------------------------------------------------------

CapacityResult arimoto_blahut_capacity(double nu, const ChannelProblem& prob,
                                       const StoppingRule& stop) {
    ProbVec px = ProbVec::uniform(prob.nx());
    double prev = -kInf;
    for (std::size_t it = 0; it < stop.max_iters; ++it) {
        ArimotoChannelStep s = arimoto_channel_step(0.0, nu, px, prob);
        px = s.px_next;
        double val = e0_slope_limit(nu, px, prob);
        if (std::isfinite(prev) &&
            std::abs(val - prev) < stop.rel_tol * std::max(1.0, std::abs(val)))
            return CapacityResult{val, px};
        prev = val;
    }
    return CapacityResult{prev, px};
}

double capacity_cost(double gamma, const ChannelProblem& prob, const StoppingRule& stop,
                     double nu_max) {
    if (gamma < prob.gamma_min())
        throw std::invalid_argument("capacity_cost: gamma below the minimum cost is infeasible");
    auto dual = [&](double nu) {
        return nu * gamma + arimoto_blahut_capacity(nu, prob, stop).value;
    };
    return minimize_over_nu(dual, nu_max).value;
}

double theta_min(const SlopeParams& params, const ChannelProblem& prob,
                 const StoppingRule& stop) {
    if (params.lambda == 0.0) return theta_min_closed_lambda0(params.mu(), prob);
    if (params.lambda == 1.0) return theta_min_closed_lambda1(params.mu(), prob);
    return run_jo_channel(params, prob, stop).value;
}

} // namespace exponent_kit
