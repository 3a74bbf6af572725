#include "disent/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace disent::sdp {

ComplexMatrix HermitianVar::value(const std::vector<double>& y) const {
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  for (std::size_t a = 0; a < ids.size(); ++a) out += y[ids[a]] * basis[a];
  return out;
}

ComplexMatrix ComplexVar::value(const std::vector<double>& y) const {
  ComplexMatrix out = ComplexMatrix::Zero(rows, cols);
  for (std::size_t a = 0; a < ids.size(); ++a) out += y[ids[a]] * basis[a];
  return out;
}

// ---------------------------------------------------------------------------
// Problem construction

int Problem::add_variable(double cost) {
  cost_.push_back(cost);
  return static_cast<int>(cost_.size()) - 1;
}

std::vector<ComplexMatrix> hermitian_basis(int dim, bool traceless) {
  std::vector<ComplexMatrix> basis;
  if (traceless) {
    for (int k = 1; k < dim; ++k) {
      ComplexMatrix b = ComplexMatrix::Zero(dim, dim);
      for (int j = 0; j < k; ++j) b(j, j) = 1.0;
      b(k, k) = -static_cast<double>(k);
      basis.push_back(b / std::sqrt(static_cast<double>(k) * (k + 1)));
    }
  } else {
    for (int i = 0; i < dim; ++i) {
      ComplexMatrix b = ComplexMatrix::Zero(dim, dim);
      b(i, i) = 1.0;
      basis.push_back(std::move(b));
    }
  }
  const double s = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      ComplexMatrix re = ComplexMatrix::Zero(dim, dim);
      re(i, j) = re(j, i) = s;
      basis.push_back(std::move(re));
      ComplexMatrix im = ComplexMatrix::Zero(dim, dim);
      im(i, j) = cplx(0, s);
      im(j, i) = cplx(0, -s);
      basis.push_back(std::move(im));
    }
  return basis;
}

HermitianVar Problem::add_hermitian(int dim, bool traceless) {
  HermitianVar v;
  v.dim = dim;
  v.basis = hermitian_basis(dim, traceless);
  for (std::size_t a = 0; a < v.basis.size(); ++a) v.ids.push_back(add_variable());
  return v;
}

ComplexVar Problem::add_complex(int rows, int cols) {
  ComplexVar v;
  v.rows = rows;
  v.cols = cols;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      for (cplx unit : {cplx(1, 0), cplx(0, 1)}) {
        ComplexMatrix b = ComplexMatrix::Zero(rows, cols);
        b(i, j) = unit;
        v.ids.push_back(add_variable());
        v.basis.push_back(std::move(b));
      }
    }
  return v;
}

int Problem::add_block(int size) {
  sizes_.push_back(size);
  constants_.push_back(ComplexMatrix::Zero(size, size));
  coeffs_.emplace_back();
  return static_cast<int>(sizes_.size()) - 1;
}

void Problem::add_cost(const HermitianVar& var, const ComplexMatrix& g, double scale) {
  for (std::size_t a = 0; a < var.ids.size(); ++a) cost_[var.ids[a]] += scale * (g * var.basis[a]).trace().real();
}

void Problem::add_trace_cost(const ComplexVar& var, double scale) {
  for (std::size_t a = 0; a < var.ids.size(); ++a) cost_[var.ids[a]] += scale * var.basis[a].trace().real();
}

namespace {

std::vector<Entry> place(const ComplexMatrix& m, int row, int col, int block_size) {
  if (row + m.rows() > block_size || col + m.cols() > block_size)
    throw Error(ErrorCode::DimMismatch, "coefficient does not fit its block");
  std::vector<Entry> out;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      const cplx v = m(i, j);
      if (std::abs(v) < 1e-15) continue;
      out.push_back({row + i, col + j, v});
      if (row != col) out.push_back({col + j, row + i, std::conj(v)});
    }
  return out;
}

}  // namespace

void Problem::add_constant(int block, const ComplexMatrix& m, int row, int col) {
  for (const auto& e : place(m, row, col, sizes_[block])) constants_[block](e.row, e.col) += e.value;
}

void Problem::add_coefficient(int block, int var, const ComplexMatrix& m, int row, int col) {
  auto entries = place(m, row, col, sizes_[block]);
  if (entries.empty()) return;
  coeffs_[block].emplace_back(var, std::move(entries));
}

void Problem::add_term(int block, const HermitianVar& var, double scale, const LinearMap& map, int row, int col) {
  for (std::size_t a = 0; a < var.ids.size(); ++a)
    add_coefficient(block, var.ids[a], scale * (map ? map(var.basis[a]) : var.basis[a]), row, col);
}

void Problem::add_term(int block, const ComplexVar& var, double scale, int row, int col) {
  for (std::size_t a = 0; a < var.ids.size(); ++a) add_coefficient(block, var.ids[a], scale * var.basis[a], row, col);
}

void Problem::add_trace_term(int block, const ComplexVar& var, double scale) {
  for (std::size_t a = 0; a < var.ids.size(); ++a) {
    const double t = var.basis[a].trace().real();
    if (t != 0) add_coefficient(block, var.ids[a], ComplexMatrix::Constant(1, 1, scale * t));
  }
}

void Problem::add_trace_term(int block, const HermitianVar& var, double scale) {
  for (std::size_t a = 0; a < var.ids.size(); ++a) {
    const double t = var.basis[a].trace().real();
    if (std::abs(t) > 1e-15) add_coefficient(block, var.ids[a], ComplexMatrix::Constant(1, 1, scale * t));
  }
}

// ---------------------------------------------------------------------------
// Solver

namespace {

struct Coef {
  int var;
  std::vector<Entry> entries;
};

struct BlockData {
  int size;
  ComplexMatrix constant;
  std::vector<Coef> coefs;  // one per variable, merged
};

double inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  // Re Tr(A B) for Hermitian A, B = Re Σ conj(a_ij) b_ij
  return (a.array().conjugate() * b.array()).real().sum();
}

double sparse_inner(const std::vector<Entry>& f, const ComplexMatrix& m) {
  // Re Tr(F M) = Re Σ F(p,q) M(q,p)
  double acc = 0;
  for (const auto& e : f) acc += (e.value * m(e.col, e.row)).real();
  return acc;
}

void add_sparse(ComplexMatrix& m, const std::vector<Entry>& f, double scale) {
  for (const auto& e : f) m(e.row, e.col) += scale * e.value;
}

/// Largest alpha ≤ cap with X + alpha·dX ⪰ 0.
double max_step(const ComplexMatrix& x, const ComplexMatrix& dx) {
  Eigen::LLT<ComplexMatrix> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const ComplexMatrix l = llt.matrixL();
  ComplexMatrix t = l.triangularView<Eigen::Lower>().solve(dx);
  ComplexMatrix m = l.triangularView<Eigen::Lower>().solve(t.adjoint()).adjoint();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  return lo < 0 ? -1.0 / lo : std::numeric_limits<double>::infinity();
}

class Solver {
 public:
  Solver(const Problem& p, const Options& o) : opt_(o), m_(p.num_variables()), c_(p.cost()) {
    for (int k = 0; k < p.num_blocks(); ++k) {
      BlockData b{p.block_size(k), p.constant(k), {}};
      std::vector<int> slot(m_, -1);
      for (const auto& [var, entries] : p.coefficients()[k]) {
        if (slot[var] < 0) {
          slot[var] = static_cast<int>(b.coefs.size());
          b.coefs.push_back({var, {}});
        }
        auto& dst = b.coefs[slot[var]].entries;
        dst.insert(dst.end(), entries.begin(), entries.end());
      }
      blocks_.push_back(std::move(b));
    }
  }

  Solution run() {
    const int nb = static_cast<int>(blocks_.size());
    double scale = 1.0;
    for (double v : c_) scale = std::max(scale, std::abs(v));
    for (const auto& b : blocks_) {
      if (b.constant.size() > 0) scale = std::max(scale, b.constant.cwiseAbs().maxCoeff());
      for (const auto& cf : b.coefs)
        for (const auto& e : cf.entries) scale = std::max(scale, std::abs(e.value));
    }
    const double xi = 10.0 * scale;
    std::vector<double> y(m_, 0.0);
    std::vector<ComplexMatrix> x(nb), z(nb);
    int ntot = 0;
    for (int k = 0; k < nb; ++k) {
      x[k] = xi * ComplexMatrix::Identity(blocks_[k].size, blocks_[k].size);
      z[k] = x[k];
      ntot += blocks_[k].size;
    }
    double cnorm = 0;
    for (double v : c_) cnorm = std::max(cnorm, std::abs(v));
    double cmax = 0;
    for (const auto& b : blocks_)
      if (b.constant.size() > 0) cmax = std::max(cmax, b.constant.cwiseAbs().maxCoeff());

    Solution best;
    best.status = Status::numerical_error;
    double best_score = std::numeric_limits<double>::infinity();
    int stalls = 0;

    for (int it = 0; it <= opt_.max_iter; ++it) {
      // residuals
      std::vector<ComplexMatrix> zy(nb), d(nb);
      double dinf = 0;
      for (int k = 0; k < nb; ++k) {
        zy[k] = blocks_[k].constant;
        for (const auto& cf : blocks_[k].coefs) add_sparse(zy[k], cf.entries, y[cf.var]);
        d[k] = zy[k] - z[k];
        if (d[k].size() > 0) dinf = std::max(dinf, d[k].cwiseAbs().maxCoeff());
      }
      std::vector<double> r(c_);
      for (int k = 0; k < nb; ++k)
        for (const auto& cf : blocks_[k].coefs) r[cf.var] -= sparse_inner(cf.entries, x[k]);
      double pinf = 0;
      for (double v : r) pinf = std::max(pinf, std::abs(v));
      double pobj = 0, dobj = 0, xz = 0;
      for (int i = 0; i < m_; ++i) pobj += c_[i] * y[i];
      for (int k = 0; k < nb; ++k) {
        dobj -= inner(blocks_[k].constant, x[k]);
        xz += inner(x[k], z[k]);
      }
      const double mu = xz / ntot;
      const double gap = pobj - dobj;

      Solution cur;
      cur.y = y;
      cur.x = x;
      cur.z = zy;
      cur.primal_objective = pobj;
      cur.dual_objective = dobj;
      cur.gap = gap;
      cur.primal_infeasibility = dinf / (1.0 + cmax);
      cur.dual_infeasibility = pinf / (1.0 + cnorm);
      cur.iterations = it;
      const double tol_gap = opt_.gap_tol * std::max(1.0, std::abs(pobj));
      const bool done = std::abs(gap) <= tol_gap && std::abs(xz) <= 10 * tol_gap &&
                        cur.primal_infeasibility <= opt_.feas_tol && cur.dual_infeasibility <= opt_.feas_tol;
      const double score = std::max({std::abs(gap) / tol_gap, cur.primal_infeasibility / opt_.feas_tol,
                                     cur.dual_infeasibility / opt_.feas_tol});
      if (score < best_score) {
        best_score = score;
        best = cur;
        best.status = Status::max_iter;
      }
      if (done) {
        cur.status = Status::optimal;
        return cur;
      }
      if (it == opt_.max_iter) break;

      // Schur complement
      std::vector<ComplexMatrix> zinv(nb);
      bool broken = false;
      for (int k = 0; k < nb; ++k) {
        Eigen::LLT<ComplexMatrix> llt(z[k]);
        if (llt.info() != Eigen::Success) {
          broken = true;
          break;
        }
        zinv[k] = llt.solve(ComplexMatrix::Identity(z[k].rows(), z[k].cols()));
      }
      if (broken) break;
      Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(m_, m_);
      for (int k = 0; k < nb; ++k) accumulate_schur(blocks_[k], x[k], zinv[k], schur);
      schur = 0.5 * (schur + schur.transpose());
      Eigen::LLT<Eigen::MatrixXd> chol(schur);
      Eigen::LDLT<Eigen::MatrixXd> ldlt;
      const bool use_llt = chol.info() == Eigen::Success;
      if (!use_llt) {
        ldlt.compute(schur);
        if (ldlt.info() != Eigen::Success) break;
      }
      auto solve_schur = [&](const Eigen::VectorXd& rhs) -> Eigen::VectorXd {
        return use_llt ? Eigen::VectorXd(chol.solve(rhs)) : Eigen::VectorXd(ldlt.solve(rhs));
      };

      // returns (dy, dX, dZ) for complementarity targets R_k
      auto direction = [&](const std::vector<ComplexMatrix>& target, std::vector<double>& dy,
                           std::vector<ComplexMatrix>& dx, std::vector<ComplexMatrix>& dz) {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
        for (int i = 0; i < m_; ++i) rhs(i) = -r[i];
        for (int k = 0; k < nb; ++k) {
          const ComplexMatrix g = target[k] - x[k] * d[k] * zinv[k];
          for (const auto& cf : blocks_[k].coefs) rhs(cf.var) += sparse_inner(cf.entries, g);
        }
        const Eigen::VectorXd sol = solve_schur(rhs);
        dy.assign(sol.data(), sol.data() + m_);
        dx.resize(nb);
        dz.resize(nb);
        for (int k = 0; k < nb; ++k) {
          dz[k] = d[k];
          for (const auto& cf : blocks_[k].coefs) add_sparse(dz[k], cf.entries, dy[cf.var]);
          dz[k] = hermitian_part(dz[k]);
          dx[k] = hermitian_part(target[k] - x[k] * dz[k] * zinv[k]);
        }
      };
      auto steps = [&](const std::vector<ComplexMatrix>& dx, const std::vector<ComplexMatrix>& dz) {
        double ap = std::numeric_limits<double>::infinity(), ad = ap;
        for (int k = 0; k < nb; ++k) {
          ap = std::min(ap, max_step(x[k], dx[k]));
          ad = std::min(ad, max_step(z[k], dz[k]));
        }
        return std::pair{ap, ad};
      };

      std::vector<ComplexMatrix> target(nb);
      for (int k = 0; k < nb; ++k) target[k] = -x[k];
      std::vector<double> dy_aff;
      std::vector<ComplexMatrix> dx_aff, dz_aff;
      direction(target, dy_aff, dx_aff, dz_aff);
      auto [ap_aff, ad_aff] = steps(dx_aff, dz_aff);
      ap_aff = std::min(1.0, ap_aff);
      ad_aff = std::min(1.0, ad_aff);
      double mu_aff = 0;
      for (int k = 0; k < nb; ++k)
        mu_aff += inner(x[k] + ap_aff * dx_aff[k], z[k] + ad_aff * dz_aff[k]);
      mu_aff /= ntot;
      const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / std::max(mu, 1e-300), 3.0), 0.0, 1.0);

      for (int k = 0; k < nb; ++k)
        target[k] = sigma * mu * zinv[k] - x[k] - dx_aff[k] * dz_aff[k] * zinv[k];
      std::vector<double> dy;
      std::vector<ComplexMatrix> dx, dz;
      direction(target, dy, dx, dz);
      auto [ap, ad] = steps(dx, dz);
      ap = std::min(1.0, opt_.step_fraction * ap);
      ad = std::min(1.0, opt_.step_fraction * ad);
      if (ap < 1e-12 && ad < 1e-12) {
        if (++stalls > 3) break;
      }
      for (int k = 0; k < nb; ++k) {
        x[k] = hermitian_part(x[k] + ap * dx[k]);
        z[k] = hermitian_part(z[k] + ad * dz[k]);
      }
      for (int i = 0; i < m_; ++i) y[i] += ad * dy[i];
    }
    return best;
  }

 private:
  void accumulate_schur(const BlockData& b, const ComplexMatrix& x, const ComplexMatrix& zinv,
                        Eigen::MatrixXd& schur) const {
    const int n = b.size;
    ComplexMatrix t(n, n);
    for (const auto& fb : b.coefs) {
      const double sparse_cost = static_cast<double>(fb.entries.size()) * n * n;
      const double dense_cost = 2.0 * n * n * n;
      if (sparse_cost <= dense_cost) {
        t.setZero();
        for (const auto& e : fb.entries) t.noalias() += e.value * x.col(e.row) * zinv.row(e.col);
      } else {
        ComplexMatrix f = ComplexMatrix::Zero(n, n);
        add_sparse(f, fb.entries, 1.0);
        t.noalias() = x * f * zinv;
      }
      for (const auto& fa : b.coefs) schur(fa.var, fb.var) += sparse_inner(fa.entries, t);
    }
  }

  Options opt_;
  int m_;
  std::vector<double> c_;
  std::vector<BlockData> blocks_;
};

}  // namespace

Solution solve(const Problem& problem, const Options& options) {
  if (problem.num_blocks() == 0) throw Error(ErrorCode::BadParameter, "SDP without blocks");
  return Solver(problem, options).run();
}

}  // namespace disent::sdp
