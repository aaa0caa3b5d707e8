// Sparse linear algebra kernels for the coupled solver.
//
// Matrices use compressed row storage (row offsets, sorted column indices,
// values) via Eigen's RowMajor sparse type. Direct solves go through a
// sparse LU; the iterative path is flexible GMRES with either a zero-fill
// incomplete factorization (saddle-point flow block) or a SIMPLE-style block
// preconditioner (phase-field block).
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chns {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sparse direct solve. The symbolic analysis is reused across factorize
// calls as long as the sparsity pattern is unchanged, and redone otherwise.
class DirectSolver {
 public:
  void factorize(const SpMat& a);
  Vec solve(const Vec& b) const;
  bool ready() const { return factorized_; }

 private:
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  std::vector<int> pat_outer_, pat_inner_;
  Eigen::Index pat_rows_ = -1;
  bool analyzed_ = false;
  bool factorized_ = false;
};

// One-shot convenience wrapper around DirectSolver.
Vec lu_solve(const SpMat& a, const Vec& b);

struct IterStats {
  int iterations = 0;
  double rel_residual = 1.0;
  bool converged = false;
  bool breakdown = false; // happy breakdown: exact solution inside a cycle
  std::vector<double> residual_history;
};

using Preconditioner = std::function<Vec(const Vec&)>;

// Right-preconditioned flexible GMRES(restart). Converges when the true
// residual drops below target_reduction * ||b - A x0||; x holds the iterate
// on return. A zero right-hand side short-circuits to x = 0.
IterStats fgmres(const SpMat& a, const Vec& b, Vec& x,
                 const Preconditioner& precond, double target_reduction,
                 int restart, int max_iterations);

// Zero-fill incomplete LU on the matrix pattern. Every row must hold a
// structural diagonal entry (assembly inserts explicit zeros for saddle
// blocks). Vanishing pivots are replaced by a small shift and flagged.
class Ilu0 {
 public:
  explicit Ilu0(const SpMat& a);
  Vec apply(const Vec& r) const;
  bool shifted() const { return shifted_; }

 private:
  SpMat lu_;              // L (unit diagonal, below) and U (diagonal and above)
  std::vector<int> diag_; // value index of the diagonal in each row
  bool shifted_ = false;
};

// SIMPLE-type block preconditioner over the splitting [first n_first rows |
// rest]: diagonal approximation of the leading block, exact factorization of
// the resulting approximate Schur complement, then back-substitution.
class SimplePrecond {
 public:
  SimplePrecond(const SpMat& a, int n_first);
  Vec apply(const Vec& r) const;

 private:
  int n1_ = 0;
  Vec inv_d1_;
  SpMat a12_, a21_;
  DirectSolver schur_;
};

// Exact 1-norm condition number via dense factorization; guarded to small
// systems. Singular input reports infinity.
double cond1_exact(const SpMat& a);

// MatrixMarket coordinate format, general real, 1-based indices.
void write_matrix_market(const SpMat& a, const std::string& path);

} // namespace chns
