#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "exponent_kit/config.hpp"

namespace exponent_kit {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// x*log(x/y) with the 0*log conventions: 0*log(0/0)=0, 0*log(0/y)=0,
// x*log(x/0)=+inf for x>0.
double xlogx_over_y(double x, double y);

/// A point on a finite probability simplex. The constructor normalizes and
/// rejects negative entries or non-positive total mass.
class ProbVec {
  public:
    explicit ProbVec(std::vector<double> weights);

    static ProbVec uniform(std::size_t n);
    static ProbVec point_mass(std::size_t n, std::size_t at);

    std::size_t size() const { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    const std::vector<double>& weights() const { return w_; }

  private:
    std::vector<double> w_;
};

/// A row-stochastic matrix: one ProbVec per conditioning symbol.
class Kernel {
  public:
    explicit Kernel(std::vector<ProbVec> rows);
    Kernel(std::size_t n_in, std::size_t n_out, const std::vector<double>& flat);

    static Kernel uniform(std::size_t n_in, std::size_t n_out);

    std::size_t num_inputs() const { return rows_.size(); }
    std::size_t num_outputs() const { return rows_.empty() ? 0 : rows_[0].size(); }
    double operator()(std::size_t i, std::size_t j) const { return rows_[i][j]; }
    const ProbVec& row(std::size_t i) const { return rows_[i]; }

  private:
    std::vector<ProbVec> rows_;
};

/// A joint distribution on X x Y with derived marginals and conditionals.
/// Conditionals given a zero-mass symbol are returned uniform; they never
/// enter any expectation with positive weight.
class JointDist {
  public:
    JointDist(std::size_t nx, std::size_t ny, std::vector<double> mass);

    static JointDist uniform(std::size_t nx, std::size_t ny);
    // Uniform over the support of a kernel (zero exactly where k is zero).
    static JointDist uniform_on_support(const Kernel& k);

    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    double operator()(std::size_t x, std::size_t y) const { return m_[x * ny_ + y]; }

    ProbVec marginal_x() const;
    ProbVec marginal_y() const;
    Kernel conditional_y_given_x() const; // rows indexed by x
    Kernel conditional_x_given_y() const; // rows indexed by y

    const std::vector<double>& mass() const { return m_; }

  private:
    std::size_t nx_, ny_;
    std::vector<double> m_;
};

// mass(x,y) = px(x) * k(y|x)
JointDist compose(const ProbVec& px, const Kernel& k);
// mass(x,y) = px(x) * py(y)
JointDist product(const ProbVec& px, const ProbVec& py);

// Divergences and information measures, natural log throughout.
// All return +inf on support violations, never NaN.
double kl_divergence(const ProbVec& p, const ProbVec& q);
double conditional_kl(const Kernel& pyx, const Kernel& qyx, const ProbVec& px);
double renyi_divergence(const ProbVec& p, const ProbVec& q, double alpha);
double conditional_renyi(const Kernel& p_cond, const Kernel& q_cond,
                         const ProbVec& py, double alpha);
double mutual_information(const ProbVec& px, const Kernel& pyx);
double mutual_information(const JointDist& q);

} // namespace exponent_kit
