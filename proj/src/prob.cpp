#include "exponent_kit/prob.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace exponent_kit {

double xlogx_over_y(double x, double y) {
    if (x == 0.0) return 0.0;
    if (y == 0.0) return kInf;
    return x * std::log(x / y);
}

ProbVec::ProbVec(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty()) throw std::invalid_argument("ProbVec: empty weight vector");
    double sum = 0.0;
    for (double v : w_) {
        if (v < 0.0 || !std::isfinite(v))
            throw std::invalid_argument("ProbVec: entries must be finite and >= 0");
        sum += v;
    }
    if (sum <= 0.0) throw std::invalid_argument("ProbVec: total mass must be positive");
    // keep already-normalized weights bit-stable (round-trip contract)
    if (std::abs(sum - 1.0) > 1e-13)
        for (double& v : w_) v /= sum;
}

ProbVec ProbVec::uniform(std::size_t n) {
    return ProbVec(std::vector<double>(n, 1.0));
}

ProbVec ProbVec::point_mass(std::size_t n, std::size_t at) {
    std::vector<double> w(n, 0.0);
    w.at(at) = 1.0;
    return ProbVec(std::move(w));
}

Kernel::Kernel(std::vector<ProbVec> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) throw std::invalid_argument("Kernel: no rows");
    for (const auto& r : rows_)
        if (r.size() != rows_[0].size())
            throw std::invalid_argument("Kernel: ragged rows");
}

Kernel::Kernel(std::size_t n_in, std::size_t n_out, const std::vector<double>& flat)
    : rows_() {
    if (flat.size() != n_in * n_out)
        throw std::invalid_argument("Kernel: flat size mismatch");
    rows_.reserve(n_in);
    for (std::size_t i = 0; i < n_in; ++i)
        rows_.emplace_back(std::vector<double>(flat.begin() + i * n_out,
                                               flat.begin() + (i + 1) * n_out));
}

Kernel Kernel::uniform(std::size_t n_in, std::size_t n_out) {
    return Kernel(std::vector<ProbVec>(n_in, ProbVec::uniform(n_out)));
}

JointDist::JointDist(std::size_t nx, std::size_t ny, std::vector<double> mass)
    : nx_(nx), ny_(ny), m_(std::move(mass)) {
    if (nx_ == 0 || ny_ == 0 || m_.size() != nx_ * ny_)
        throw std::invalid_argument("JointDist: shape mismatch");
    double sum = 0.0;
    for (double v : m_) {
        if (v < 0.0 || !std::isfinite(v))
            throw std::invalid_argument("JointDist: entries must be finite and >= 0");
        sum += v;
    }
    if (sum <= 0.0) throw std::invalid_argument("JointDist: total mass must be positive");
    if (std::abs(sum - 1.0) > 1e-13)
        for (double& v : m_) v /= sum;
}

JointDist JointDist::uniform(std::size_t nx, std::size_t ny) {
    return JointDist(nx, ny, std::vector<double>(nx * ny, 1.0));
}

JointDist JointDist::uniform_on_support(const Kernel& k) {
    std::vector<double> m(k.num_inputs() * k.num_outputs(), 0.0);
    for (std::size_t x = 0; x < k.num_inputs(); ++x)
        for (std::size_t y = 0; y < k.num_outputs(); ++y)
            if (k(x, y) > 0.0) m[x * k.num_outputs() + y] = 1.0;
    return JointDist(k.num_inputs(), k.num_outputs(), std::move(m));
}

ProbVec JointDist::marginal_x() const {
    std::vector<double> w(nx_, 0.0);
    for (std::size_t x = 0; x < nx_; ++x)
        for (std::size_t y = 0; y < ny_; ++y) w[x] += (*this)(x, y);
    return ProbVec(std::move(w));
}

ProbVec JointDist::marginal_y() const {
    std::vector<double> w(ny_, 0.0);
    for (std::size_t x = 0; x < nx_; ++x)
        for (std::size_t y = 0; y < ny_; ++y) w[y] += (*this)(x, y);
    return ProbVec(std::move(w));
}

Kernel JointDist::conditional_y_given_x() const {
    std::vector<ProbVec> rows;
    rows.reserve(nx_);
    for (std::size_t x = 0; x < nx_; ++x) {
        std::vector<double> r(ny_);
        double mx = 0.0;
        for (std::size_t y = 0; y < ny_; ++y) mx += (*this)(x, y);
        if (mx > 0.0)
            for (std::size_t y = 0; y < ny_; ++y) r[y] = (*this)(x, y) / mx;
        else
            r.assign(ny_, 1.0 / static_cast<double>(ny_));
        rows.emplace_back(std::move(r));
    }
    return Kernel(std::move(rows));
}

Kernel JointDist::conditional_x_given_y() const {
    std::vector<ProbVec> rows;
    rows.reserve(ny_);
    for (std::size_t y = 0; y < ny_; ++y) {
        std::vector<double> r(nx_);
        double my = 0.0;
        for (std::size_t x = 0; x < nx_; ++x) my += (*this)(x, y);
        if (my > 0.0)
            for (std::size_t x = 0; x < nx_; ++x) r[x] = (*this)(x, y) / my;
        else
            r.assign(nx_, 1.0 / static_cast<double>(nx_));
        rows.emplace_back(std::move(r));
    }
    return Kernel(std::move(rows));
}

JointDist compose(const ProbVec& px, const Kernel& k) {
    if (px.size() != k.num_inputs())
        throw std::invalid_argument("compose: dimension mismatch");
    std::vector<double> m(px.size() * k.num_outputs());
    for (std::size_t x = 0; x < px.size(); ++x)
        for (std::size_t y = 0; y < k.num_outputs(); ++y)
            m[x * k.num_outputs() + y] = px[x] * k(x, y);
    return JointDist(px.size(), k.num_outputs(), std::move(m));
}

JointDist product(const ProbVec& px, const ProbVec& py) {
    std::vector<double> m(px.size() * py.size());
    for (std::size_t x = 0; x < px.size(); ++x)
        for (std::size_t y = 0; y < py.size(); ++y)
            m[x * py.size() + y] = px[x] * py[y];
    return JointDist(px.size(), py.size(), std::move(m));
}

double kl_divergence(const ProbVec& p, const ProbVec& q) {
    if (p.size() != q.size())
        throw std::invalid_argument("kl_divergence: dimension mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double t = xlogx_over_y(p[i], q[i]);
        if (t == kInf) return kInf;
        d += t;
    }
    return d;
}

double conditional_kl(const Kernel& pyx, const Kernel& qyx, const ProbVec& px) {
    if (pyx.num_inputs() != qyx.num_inputs() ||
        pyx.num_outputs() != qyx.num_outputs() || px.size() != pyx.num_inputs())
        throw std::invalid_argument("conditional_kl: dimension mismatch");
    double d = 0.0;
    for (std::size_t x = 0; x < px.size(); ++x) {
        if (px[x] == 0.0) continue;
        double row = kl_divergence(pyx.row(x), qyx.row(x));
        if (row == kInf) return kInf;
        d += px[x] * row;
    }
    return d;
}

double renyi_divergence(const ProbVec& p, const ProbVec& q, double alpha) {
    if (p.size() != q.size())
        throw std::invalid_argument("renyi_divergence: dimension mismatch");
    if (!(alpha > 0.0) || alpha == 1.0)
        throw std::invalid_argument("renyi_divergence: alpha must be > 0 and != 1 (use kl_divergence at 1)");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) {
            // p^a * q^{1-a}: +inf for a>1; contributes 0 for a<1
            if (alpha > 1.0) return kInf;
            continue;
        }
        s += std::pow(p[i], alpha) * std::pow(q[i], 1.0 - alpha);
    }
    if (s <= 0.0) return kInf;
    return std::log(s) / (alpha - 1.0);
}

double conditional_renyi(const Kernel& p_cond, const Kernel& q_cond,
                         const ProbVec& py, double alpha) {
    if (p_cond.num_inputs() != q_cond.num_inputs() ||
        p_cond.num_outputs() != q_cond.num_outputs() ||
        py.size() != p_cond.num_inputs())
        throw std::invalid_argument("conditional_renyi: dimension mismatch");
    if (!(alpha > 0.0) || alpha == 1.0)
        throw std::invalid_argument("conditional_renyi: alpha must be > 0 and != 1");
    // (1/(a-1)) log sum_y py(y) sum_x p^a q^{1-a}
    double s = 0.0;
    for (std::size_t y = 0; y < py.size(); ++y) {
        if (py[y] == 0.0) continue;
        double inner = 0.0;
        for (std::size_t x = 0; x < p_cond.num_outputs(); ++x) {
            double p = p_cond(y, x), q = q_cond(y, x);
            if (p == 0.0) continue;
            if (q == 0.0) {
                if (alpha > 1.0) return kInf;
                continue;
            }
            inner += std::pow(p, alpha) * std::pow(q, 1.0 - alpha);
        }
        s += py[y] * inner;
    }
    if (s <= 0.0) return kInf;
    return std::log(s) / (alpha - 1.0);
}

double mutual_information(const ProbVec& px, const Kernel& pyx) {
    if (px.size() != pyx.num_inputs())
        throw std::invalid_argument("mutual_information: dimension mismatch");
    std::vector<double> py(pyx.num_outputs(), 0.0);
    for (std::size_t x = 0; x < px.size(); ++x)
        for (std::size_t y = 0; y < pyx.num_outputs(); ++y)
            py[y] += px[x] * pyx(x, y);
    double mi = 0.0;
    for (std::size_t x = 0; x < px.size(); ++x) {
        if (px[x] == 0.0) continue;
        for (std::size_t y = 0; y < pyx.num_outputs(); ++y) {
            if (pyx(x, y) == 0.0) continue;
            mi += px[x] * pyx(x, y) * std::log(pyx(x, y) / py[y]);
        }
    }
    return mi;
}

double mutual_information(const JointDist& q) {
    return mutual_information(q.marginal_x(), q.conditional_y_given_x());
}

} // namespace exponent_kit
