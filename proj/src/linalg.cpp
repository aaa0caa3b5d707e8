#include "chns/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace chns {

void DirectSolver::factorize(const SpMat& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("DirectSolver: matrix must be square");
  Eigen::SparseMatrix<double> ac(a);
  ac.makeCompressed();
  const bool same_pattern =
      analyzed_ && ac.rows() == pat_rows_ &&
      ac.nonZeros() == Eigen::Index(pat_inner_.size()) &&
      std::equal(pat_outer_.begin(), pat_outer_.end(), ac.outerIndexPtr()) &&
      std::equal(pat_inner_.begin(), pat_inner_.end(), ac.innerIndexPtr());
  if (!same_pattern) {
    lu_.analyzePattern(ac);
    pat_rows_ = ac.rows();
    pat_outer_.assign(ac.outerIndexPtr(), ac.outerIndexPtr() + ac.outerSize() + 1);
    pat_inner_.assign(ac.innerIndexPtr(), ac.innerIndexPtr() + ac.nonZeros());
    analyzed_ = true;
  }
  lu_.factorize(ac);
  if (lu_.info() != Eigen::Success)
    throw SingularMatrixError("sparse LU factorization failed (singular or ill-posed matrix)");
  factorized_ = true;
}

Vec DirectSolver::solve(const Vec& b) const {
  if (!factorized_) throw std::logic_error("DirectSolver: solve before factorize");
  Vec x = lu_.solve(b);
  if (lu_.info() != Eigen::Success)
    throw SingularMatrixError("sparse LU solve failed");
  return x;
}

Vec lu_solve(const SpMat& a, const Vec& b) {
  DirectSolver solver;
  solver.factorize(a);
  return solver.solve(b);
}

IterStats fgmres(const SpMat& a, const Vec& b, Vec& x,
                 const Preconditioner& precond, double target_reduction,
                 int restart, int max_iterations) {
  if (a.rows() != a.cols() || a.rows() != b.size())
    throw std::invalid_argument("fgmres: dimension mismatch");
  if (restart < 1) throw std::invalid_argument("fgmres: restart must be >= 1");
  IterStats stats;

  if (x.size() != b.size()) x = Vec::Zero(b.size());
  if (b.norm() == 0.0) {
    x.setZero();
    stats.converged = true;
    stats.rel_residual = 0.0;
    stats.residual_history = {0.0};
    return stats;
  }

  Vec r = b - a * x;
  const double beta0 = r.norm();
  stats.residual_history.push_back(beta0);
  if (beta0 == 0.0) {
    stats.converged = true;
    stats.rel_residual = 0.0;
    return stats;
  }
  const double tol_abs = target_reduction * beta0;

  const int n = static_cast<int>(b.size());
  const int m = std::min(restart, n);
  Eigen::MatrixXd v(n, m + 1); // Arnoldi basis
  Eigen::MatrixXd z(n, m);     // preconditioned directions (flexible)
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
  Vec cs(m), sn(m), g(m + 1);

  while (stats.iterations < max_iterations) {
    r = b - a * x;
    double beta = r.norm();
    if (beta <= tol_abs) {
      stats.converged = true;
      break;
    }
    v.col(0) = r / beta;
    g.setZero();
    g(0) = beta;

    int j = 0;
    bool cycle_done = false;
    for (; j < m && stats.iterations < max_iterations && !cycle_done; ++j) {
      z.col(j) = precond(v.col(j));
      Vec w = a * z.col(j);
      // Modified Gram-Schmidt.
      for (int i = 0; i <= j; ++i) {
        h(i, j) = w.dot(v.col(i));
        w -= h(i, j) * v.col(i);
      }
      h(j + 1, j) = w.norm();
      if (h(j + 1, j) > 0.0) v.col(j + 1) = w / h(j + 1, j);

      // Givens rotations keep the least-squares residual explicit.
      for (int i = 0; i < j; ++i) {
        const double t = cs(i) * h(i, j) + sn(i) * h(i + 1, j);
        h(i + 1, j) = -sn(i) * h(i, j) + cs(i) * h(i + 1, j);
        h(i, j) = t;
      }
      const double denom = std::hypot(h(j, j), h(j + 1, j));
      if (denom == 0.0) {
        // Hard breakdown: the new column carries no least-squares progress.
        stats.breakdown = true;
        break; // keep the j complete columns
      }
      cs(j) = h(j, j) / denom;
      sn(j) = h(j + 1, j) / denom;
      h(j, j) = denom;
      h(j + 1, j) = 0.0;
      g(j + 1) = -sn(j) * g(j);
      g(j) = cs(j) * g(j);

      ++stats.iterations;
      stats.residual_history.push_back(std::abs(g(j + 1)));
      if (std::abs(g(j + 1)) <= tol_abs) cycle_done = true;
    }

    const int k = j; // columns assembled in this cycle
    if (k > 0) {
      Vec y = h.topLeftCorner(k, k)
                  .triangularView<Eigen::Upper>()
                  .solve(g.head(k));
      x += z.leftCols(k) * y;
    }
    const double true_res = (b - a * x).norm();
    if (true_res <= tol_abs) {
      stats.converged = true;
      break;
    }
    if (stats.breakdown || k == 0) break; // no further progress possible
  }

  stats.rel_residual = (b - a * x).norm() / beta0;
  if (stats.rel_residual <= target_reduction) stats.converged = true;
  return stats;
}

Ilu0::Ilu0(const SpMat& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("Ilu0: matrix must be square");
  lu_ = a;
  lu_.makeCompressed();
  const int n = static_cast<int>(lu_.rows());
  diag_.assign(n, -1);

  const int* row_ptr = lu_.outerIndexPtr();
  const int* col = lu_.innerIndexPtr();
  double* val = lu_.valuePtr();

  double max_abs = 0.0;
  for (int k = 0; k < lu_.nonZeros(); ++k) max_abs = std::max(max_abs, std::abs(val[k]));
  const double pivot_floor = std::max(1e-12 * max_abs, 1e-300);

  for (int i = 0; i < n; ++i) {
    for (int idx = row_ptr[i]; idx < row_ptr[i + 1]; ++idx)
      if (col[idx] == i) diag_[i] = idx;
    if (diag_[i] < 0)
      throw std::invalid_argument("Ilu0: structural diagonal entry missing");
  }

  for (int i = 0; i < n; ++i) {
    for (int kk = row_ptr[i]; kk < row_ptr[i + 1] && col[kk] < i; ++kk) {
      const int k = col[kk];
      double pivot = val[diag_[k]];
      if (std::abs(pivot) < pivot_floor) {
        pivot = pivot >= 0.0 ? pivot_floor : -pivot_floor;
        val[diag_[k]] = pivot;
        shifted_ = true;
      }
      const double lik = val[kk] / pivot;
      val[kk] = lik;
      // row_i -= lik * row_k restricted to columns > k present in row i.
      int p = diag_[k] + 1;
      int q = kk + 1;
      while (p < row_ptr[k + 1] && q < row_ptr[i + 1]) {
        if (col[p] < col[q]) {
          ++p;
        } else if (col[p] > col[q]) {
          ++q;
        } else {
          val[q] -= lik * val[p];
          ++p;
          ++q;
        }
      }
    }
    if (std::abs(val[diag_[i]]) < pivot_floor) {
      val[diag_[i]] = val[diag_[i]] >= 0.0 ? pivot_floor : -pivot_floor;
      shifted_ = true;
    }
  }
}

Vec Ilu0::apply(const Vec& r) const {
  const int n = static_cast<int>(lu_.rows());
  const int* row_ptr = lu_.outerIndexPtr();
  const int* col = lu_.innerIndexPtr();
  const double* val = lu_.valuePtr();

  Vec y(n);
  for (int i = 0; i < n; ++i) {
    double s = r(i);
    for (int idx = row_ptr[i]; idx < diag_[i]; ++idx) s -= val[idx] * y(col[idx]);
    y(i) = s; // unit lower-triangular factor
  }
  Vec x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = y(i);
    for (int idx = diag_[i] + 1; idx < row_ptr[i + 1]; ++idx)
      s -= val[idx] * x(col[idx]);
    x(i) = s / val[diag_[i]];
  }
  return x;
}

SimplePrecond::SimplePrecond(const SpMat& a, int n_first) : n1_(n_first) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("SimplePrecond: matrix must be square");
  if (n_first <= 0 || n_first >= a.rows())
    throw std::invalid_argument("SimplePrecond: block split out of range");
  const int n2 = static_cast<int>(a.rows()) - n_first;

  const SpMat a11 = a.topLeftCorner(n_first, n_first);
  a12_ = a.topRightCorner(n_first, n2);
  a21_ = a.bottomLeftCorner(n2, n_first);
  const SpMat a22 = a.bottomRightCorner(n2, n2);

  inv_d1_ = Vec::Zero(n_first);
  for (int i = 0; i < n_first; ++i) {
    const double d = a11.coeff(i, i);
    if (d == 0.0)
      throw std::invalid_argument("SimplePrecond: leading block has a zero diagonal");
    inv_d1_(i) = 1.0 / d;
  }

  SpMat schur = a22 - SpMat(a21_ * SpMat(inv_d1_.asDiagonal() * a12_));
  schur_.factorize(schur);
}

Vec SimplePrecond::apply(const Vec& r) const {
  const Vec r1 = r.head(n1_);
  const Vec r2 = r.tail(r.size() - n1_);
  // Predictor on the leading block, Schur correction, back-substitution.
  const Vec y1 = inv_d1_.asDiagonal() * r1;
  const Vec y2 = schur_.solve(r2 - a21_ * y1);
  const Vec x1 = y1 - inv_d1_.asDiagonal() * (a12_ * y2);
  Vec out(r.size());
  out << x1, y2;
  return out;
}

double cond1_exact(const SpMat& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("cond1_exact: matrix must be square");
  if (a.rows() > 2000)
    throw std::invalid_argument("cond1_exact: guarded to systems of at most 2000 unknowns");
  const Eigen::MatrixXd dense(a);
  const double norm_a = dense.cwiseAbs().colwise().sum().maxCoeff();

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(dense);
  const Eigen::VectorXd u_diag = lu.matrixLU().diagonal();
  const double max_u = u_diag.cwiseAbs().maxCoeff();
  if (max_u == 0.0 || u_diag.cwiseAbs().minCoeff() < 1e-14 * max_u)
    return std::numeric_limits<double>::infinity();

  const Eigen::MatrixXd inv = lu.inverse();
  if (!inv.allFinite()) return std::numeric_limits<double>::infinity();
  const double norm_inv = inv.cwiseAbs().colwise().sum().maxCoeff();
  return norm_a * norm_inv;
}

void write_matrix_market(const SpMat& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_matrix_market: cannot open " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << " " << a.cols() << " " << a.nonZeros() << "\n";
  out.precision(17);
  for (int i = 0; i < a.outerSize(); ++i)
    for (SpMat::InnerIterator it(a, i); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

} // namespace chns
