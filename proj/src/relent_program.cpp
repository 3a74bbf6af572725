#include "disent/relent_program.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "disent/sdp.hpp"

namespace disent {

ComplexMatrix AffineHermitian::at(const Eigen::VectorXd& x) const {
  ComplexMatrix out = constant;
  for (std::size_t a = 0; a < coeffs.size(); ++a) out += x(static_cast<Eigen::Index>(a)) * coeffs[a];
  return out;
}

double log_divided_difference(double a, double b) {
  const double m = 0.5 * (a + b);
  const double d = a - b;
  if (std::abs(d) <= 1e-5 * m) return (1.0 + d * d / (12.0 * m * m)) / m;
  return std::log1p(d / b) / d;
}

namespace {

double log_second_divided_difference(double a, double b, double c) {
  double lo = std::min({a, b, c}), hi = std::max({a, b, c});
  const double mid = a + b + c - lo - hi;
  const double m = (a + b + c) / 3.0;
  if (hi - lo <= 1e-5 * m) return -0.5 / (m * m);
  return (log_divided_difference(lo, mid) - log_divided_difference(mid, hi)) / (lo - hi);
}

constexpr double kLn2 = std::numbers::ln2;

struct Evaluation {
  bool feasible = false;
  double objective = 0;  // −Tr ρ log2 σ
  EigenSystem sigma_eig;
  std::vector<ComplexMatrix> block_inv;
  double barrier = 0;
};

class BarrierSolver {
 public:
  BarrierSolver(const RelEntropyProblem& p, double reg) : p_(p), m_(static_cast<int>(p.argument.coeffs.size())), reg_(reg) {
    d_ = static_cast<int>(p.rho.rows());
    for (const auto& k : p.constraints) nu_ += static_cast<double>(k.constant.rows());
    if (p.nonnegative) nu_ += static_cast<double>(p.nonnegative->constant.size());
  }

  double nu() const { return nu_; }

  ComplexMatrix sigma_at(const Eigen::VectorXd& x) const {
    ComplexMatrix s = p_.argument.at(x);
    if (reg_ > 0) s = (1.0 - reg_) * s + reg_ * s.trace().real() / d_ * ComplexMatrix::Identity(d_, d_);
    return hermitian_part(s);
  }

  Evaluation evaluate(const Eigen::VectorXd& x, bool need_inverses) const {
    Evaluation ev;
    ev.block_inv.reserve(p_.constraints.size());
    for (const auto& k : p_.constraints) {
      Eigen::LLT<ComplexMatrix> llt(hermitian_part(k.at(x)));
      if (llt.info() != Eigen::Success) return ev;
      const ComplexMatrix l = llt.matrixL();
      double logdet = 0;
      for (Eigen::Index i = 0; i < l.rows(); ++i) {
        const double di = l(i, i).real();
        if (!(di > 0)) return ev;
        logdet += 2 * std::log(di);
      }
      ev.barrier -= logdet;
      if (need_inverses) ev.block_inv.push_back(llt.solve(ComplexMatrix::Identity(l.rows(), l.rows())));
    }
    if (p_.nonnegative) {
      const Eigen::VectorXd w = p_.nonnegative->constant + p_.nonnegative->coeffs * x;
      if (!(w.minCoeff() > 0)) return ev;
      ev.barrier -= w.array().log().sum();
    }
    ev.sigma_eig = hermitian_eig(sigma_at(x));
    if (ev.sigma_eig.values.minCoeff() <= 0) return ev;
    const ComplexMatrix rt = ev.sigma_eig.vectors.adjoint() * p_.rho * ev.sigma_eig.vectors;
    double acc = 0;
    for (int i = 0; i < d_; ++i) acc -= rt(i, i).real() * std::log2(ev.sigma_eig.values(i));
    ev.objective = acc;
    ev.feasible = true;
    return ev;
  }

  /// Objective gradient and Hessian in x.
  void objective_derivatives(const Evaluation& ev, Eigen::VectorXd& g, Eigen::MatrixXd& h) const {
    const auto& u = ev.sigma_eig.vectors;
    const auto& lam = ev.sigma_eig.values;
    const ComplexMatrix rt = u.adjoint() * p_.rho * u;
    const double shrink = reg_ > 0 ? 1.0 - reg_ : 1.0;
    std::vector<ComplexMatrix> at(m_);
    for (int a = 0; a < m_; ++a) {
      ComplexMatrix coeff = p_.argument.coeffs[a];
      if (reg_ > 0) coeff = shrink * coeff + reg_ * coeff.trace().real() / d_ * ComplexMatrix::Identity(d_, d_);
      at[a] = u.adjoint() * coeff * u;
    }
    ComplexMatrix l1(d_, d_);
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) l1(i, j) = log_divided_difference(lam(i), lam(j));
    const ComplexMatrix grad_mat = l1.cwiseProduct(rt);  // Dlog(σ)[ρ] in the eigenbasis
    g.resize(m_);
    for (int a = 0; a < m_; ++a) g(a) = -(at[a].cwiseProduct(grad_mat.transpose())).sum().real() / kLn2;

    std::vector<double> t(static_cast<std::size_t>(d_) * d_ * d_);
    auto tidx = [&](int i, int j, int k) { return (static_cast<std::size_t>(i) * d_ + j) * d_ + k; };
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j)
        for (int k = 0; k < d_; ++k) t[tidx(i, j, k)] = log_second_divided_difference(lam(i), lam(j), lam(k));
    h.resize(m_, m_);
    ComplexMatrix nb(d_, d_), pb(d_, d_);
    for (int b = 0; b < m_; ++b) {
      const auto& ab = at[b];
      nb.setZero();
      pb.setZero();
      for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j)
          for (int k = 0; k < d_; ++k) {
            const double tv = t[tidx(i, j, k)];
            nb(i, j) += tv * ab(j, k) * rt(k, i);
            pb(j, k) += tv * rt(k, i) * ab(i, j);
          }
      const ComplexMatrix s = nb + pb;
      for (int a = 0; a < m_; ++a) h(a, b) = -(at[a].cwiseProduct(s)).sum().real() / kLn2;
    }
    h = 0.5 * (h + h.transpose());
  }

  void barrier_derivatives(const Evaluation& ev, const Eigen::VectorXd& x, Eigen::VectorXd& g,
                           Eigen::MatrixXd& h) const {
    g = Eigen::VectorXd::Zero(m_);
    h = Eigen::MatrixXd::Zero(m_, m_);
    if (p_.nonnegative) {
      const auto& e = p_.nonnegative->coeffs;
      const Eigen::VectorXd inv = (p_.nonnegative->constant + e * x).cwiseInverse();
      g -= e.transpose() * inv;
      h += e.transpose() * inv.cwiseAbs2().asDiagonal() * e;
    }
    for (std::size_t k = 0; k < p_.constraints.size(); ++k) {
      std::vector<ComplexMatrix> w(m_);
      for (int a = 0; a < m_; ++a) {
        w[a] = ev.block_inv[k] * p_.constraints[k].coeffs[a];
        g(a) -= w[a].trace().real();
      }
      for (int a = 0; a < m_; ++a)
        for (int b = a; b < m_; ++b) {
          const double v = (w[a].cwiseProduct(w[b].transpose())).sum().real();
          h(a, b) += v;
          if (a != b) h(b, a) += v;
        }
    }
  }

  RelEntropyResult run(double tol, bool certify) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m_);
    Evaluation ev = evaluate(x, true);
    if (!ev.feasible) throw Error(ErrorCode::SolverFailure, "starting point is not strictly feasible");
    double t = 1.0;
    const double target = 0.05 * tol;
    int newton = 0;
    const int newton_cap = 2000;
    while (true) {
      // centering
      for (int inner = 0; inner < 100 && newton < newton_cap; ++inner, ++newton) {
        Eigen::VectorXd gf, gb;
        Eigen::MatrixXd hf, hb;
        objective_derivatives(ev, gf, hf);
        barrier_derivatives(ev, x, gb, hb);
        const Eigen::VectorXd grad = t * gf + gb;
        Eigen::MatrixXd hess = t * hf + hb;
        Eigen::LLT<Eigen::MatrixXd> llt(hess);
        if (llt.info() != Eigen::Success) {
          hess.diagonal().array() += 1e-12 * hess.diagonal().cwiseAbs().maxCoeff();
          llt.compute(hess);
        }
        const Eigen::VectorXd step = -llt.solve(grad);
        const double decrement = -grad.dot(step);
        if (!(decrement >= 0) || decrement / 2 < 1e-10) break;
        const double phi0 = t * ev.objective + ev.barrier;
        double alpha = 1.0;
        Evaluation next;
        for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
          next = evaluate(x + alpha * step, true);
          if (next.feasible && t * next.objective + next.barrier <= phi0 - 0.25 * alpha * decrement) break;
          next.feasible = false;
        }
        if (!next.feasible) break;
        x += alpha * step;
        ev = std::move(next);
      }
      if (nu_ / t <= target || newton >= newton_cap) break;
      t *= 8.0;
    }

    RelEntropyResult res;
    res.x = x;
    res.sigma = sigma_at(x);
    res.iterations = newton;
    res.regularization = reg_;
    double entropy = 0;
    {
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(p_.rho), Eigen::EigenvaluesOnly);
      for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double v = es.eigenvalues()(i);
        if (v > 1e-300) entropy -= v * std::log2(v);
      }
    }
    res.value_bits = std::max(0.0, ev.objective - entropy);
    if (!certify) {
      res.gap = std::numeric_limits<double>::infinity();
      res.lower_bound_bits = -res.gap;
      return res;
    }

    // Frank–Wolfe gap: f(x) − min f ≤ g·x − min_{x'} g·x'.
    Eigen::VectorXd gf;
    Eigen::MatrixXd hf;
    objective_derivatives(ev, gf, hf);
    sdp::Problem lmo;
    for (int a = 0; a < m_; ++a) lmo.add_variable(gf(a));
    for (const auto& k : p_.constraints) {
      const int blk = lmo.add_block(static_cast<int>(k.constant.rows()));
      lmo.add_constant(blk, k.constant);
      for (int a = 0; a < m_; ++a) lmo.add_coefficient(blk, a, k.coeffs[a]);
    }
    if (p_.nonnegative) {
      const auto& nn = *p_.nonnegative;
      const auto n = nn.constant.size();
      const int blk = lmo.add_block(static_cast<int>(n));
      lmo.add_constant(blk, nn.constant.cast<cplx>().asDiagonal().toDenseMatrix());
      for (int a = 0; a < m_; ++a)
        lmo.add_coefficient(blk, a, nn.coeffs.col(a).cast<cplx>().asDiagonal().toDenseMatrix());
    }
    sdp::Options opt;
    opt.gap_tol = std::min(1e-9, 0.01 * tol);
    const auto sol = sdp::solve(lmo, opt);
    const double lower_lin = std::min(sol.dual_objective, sol.primal_objective);
    res.gap = std::max(0.0, gf.dot(x) - lower_lin);
    res.lower_bound_bits = res.value_bits - res.gap;
    res.converged = res.gap <= tol;
    return res;
  }

 private:
  const RelEntropyProblem& p_;
  int m_;
  int d_ = 0;
  double nu_ = 0;
  double reg_ = 0;
};

}  // namespace

ComplexMatrix log_frechet(const EigenSystem& sigma, const ComplexMatrix& h) {
  const auto& u = sigma.vectors;
  const auto n = sigma.values.size();
  ComplexMatrix ht = u.adjoint() * h * u;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) ht(i, j) *= log_divided_difference(sigma.values(i), sigma.values(j));
  return u * ht * u.adjoint();
}

RelEntropyResult minimize_relative_entropy(const RelEntropyProblem& problem, double tol, bool certify) {
  if (problem.rho.rows() != problem.argument.constant.rows())
    throw Error(ErrorCode::DimMismatch, "argument map does not match the state dimension");
  for (const auto& k : problem.constraints)
    if (k.coeffs.size() != problem.argument.coeffs.size())
      throw Error(ErrorCode::DimMismatch, "constraint and argument maps use different variables");
  if (problem.nonnegative &&
      (problem.nonnegative->coeffs.cols() != static_cast<Eigen::Index>(problem.argument.coeffs.size()) ||
       problem.nonnegative->coeffs.rows() != problem.nonnegative->constant.size()))
    throw Error(ErrorCode::DimMismatch, "nonnegativity map does not match the variables");
  // σ(0) singular: mix a little identity in so the objective stays finite.
  const double lo = min_eigenvalue(problem.argument.constant);
  const double reg = lo < 1e-10 ? 1e-10 : 0.0;
  BarrierSolver solver(problem, reg);
  return solver.run(tol, certify);
}

}  // namespace disent
