#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <limits>
#include <utility>
#include <vector>

#include "bdfem/assembly.hpp"
#include "bdfem/errors.hpp"
#include "bdfem/mesh.hpp"
#include "bdfem/spaces.hpp"

namespace bdfem {

/// Discrete velocity/pressure coefficient pair over a mixed space.
struct SolutionPair {
  Eigen::VectorXd u;
  Eigen::VectorXd p;
  MixedSpace space;
};

struct PicardReport {
  int iterations = 0;
  double final_increment = 0.0;
  bool converged = false;
  std::vector<double> increments;
};

/// Direct solver for the augmented saddle systems (and for plain square
/// systems, used by fixtures).
///
/// The mean-constraint multiplier couples every pressure dof, and that one
/// dense row/column ruins the fill-reducing ordering of a sparse LU. The
/// solver therefore factorizes only the sparse core K with one pressure
/// diagonal entry shifted (K + sigma e_r e_r^T, which removes the
/// constant-pressure kernel) and recovers the exact bordered solution with a
/// Sherman-Morrison step. The core is Ruiz-equilibrated (rows and columns to
/// unit infinity norm) before factorization.
///
/// A factorization is reused across calls as a defect-correction
/// preconditioner: the Picard iteration re-solves slowly varying matrices,
/// so most iterations need a few triangular solves instead of a new
/// factorization. Every returned solution is verified to a 1e-10 relative
/// residual; singular systems fail that bound (kernel contamination blows
/// the residual up) and raise SingularSystemError.
class SaddleSolver {
 public:
  Eigen::VectorXd solve(const AugmentedSystem& sys) {
    const int n = static_cast<int>(sys.M.rows());
    if (sys.rhs.size() != n)
      throw ArgumentError("solve: right-hand side size mismatch");
    const bool bordered =
        n > 1 && sys.n_velocity + sys.n_pressure + 1 == n;

    Eigen::VectorXd x;
    if (ready_ && n_ == n && bordered_ == bordered &&
        defect_solve(sys, x))
      return x;

    factorize(sys, bordered);
    if (!defect_solve(sys, x))
      throw SingularSystemError(
          "linear solve residual exceeds 1e-10 after refactorization; "
          "system is singular or severely ill-conditioned");
    return x;
  }

 private:
  void factorize(const AugmentedSystem& sys, bool bordered) {
    n_ = static_cast<int>(sys.M.rows());
    bordered_ = bordered;
    core_n_ = bordered ? n_ - 1 : n_;
    ready_ = false;

    // split core block, border column c, and border row d
    std::vector<Triplet> core;
    core.reserve(static_cast<std::size_t>(sys.M.nonZeros()));
    border_col_ = Eigen::VectorXd::Zero(core_n_);
    border_row_ = Eigen::VectorXd::Zero(core_n_);
    for (int k = 0; k < sys.M.outerSize(); ++k)
      for (SparseMat::InnerIterator it(sys.M, k); it; ++it) {
        const int i = static_cast<int>(it.row());
        const int j = static_cast<int>(it.col());
        if (i < core_n_ && j < core_n_)
          core.emplace_back(i, j, it.value());
        else if (i < core_n_ && j == core_n_)
          border_col_[i] = it.value();
        else if (i == core_n_ && j < core_n_)
          border_row_[j] = it.value();
      }

    SparseMat K(core_n_, core_n_);
    K.setFromTriplets(core.begin(), core.end());

    // Ruiz equilibration: rows and columns to unit infinity norm. Deep local
    // refinement spreads the entry scales over many orders of magnitude;
    // two-sided scaling keeps the factorized core well conditioned.
    row_scale_ = Eigen::VectorXd::Ones(core_n_);
    col_scale_ = Eigen::VectorXd::Ones(core_n_);
    for (int sweep = 0; sweep < 3; ++sweep) {
      Eigen::VectorXd rmax = Eigen::VectorXd::Zero(core_n_);
      Eigen::VectorXd cmax = Eigen::VectorXd::Zero(core_n_);
      for (int k = 0; k < K.outerSize(); ++k)
        for (SparseMat::InnerIterator it(K, k); it; ++it) {
          const double a = std::abs(it.value());
          rmax[it.row()] = std::max(rmax[it.row()], a);
          cmax[it.col()] = std::max(cmax[it.col()], a);
        }
      for (int i = 0; i < core_n_; ++i) {
        rmax[i] = rmax[i] > 0.0 ? 1.0 / std::sqrt(rmax[i]) : 1.0;
        cmax[i] = cmax[i] > 0.0 ? 1.0 / std::sqrt(cmax[i]) : 1.0;
      }
      for (int k = 0; k < K.outerSize(); ++k)
        for (SparseMat::InnerIterator it(K, k); it; ++it)
          it.valueRef() *= rmax[it.row()] * cmax[it.col()];
      row_scale_.array() *= rmax.array();
      col_scale_.array() *= cmax.array();
    }
    if (bordered_) {
      // shift the last pressure diagonal; removes the constant-pressure
      // kernel of the unconstrained core
      pin_ = core_n_ - 1;
      K.coeffRef(pin_, pin_) += sigma_;
      scaled_border_row_ =
          (col_scale_.array() * border_row_.array()).matrix();
      border_row_scale_ = scaled_border_row_.cwiseAbs().maxCoeff();
      border_row_scale_ =
          border_row_scale_ > 0.0 ? 1.0 / border_row_scale_ : 1.0;
    }

    if (!analyzed_ || analyzed_rows_ != core_n_) {
      lu_.analyzePattern(K);
      analyzed_ = true;
      analyzed_rows_ = core_n_;
    }
    lu_.factorize(K);
    if (lu_.info() != Eigen::Success)
      throw SingularSystemError("sparse LU factorization failed: " +
                                lu_.lastErrorMessage());
    // Rank deficiency that survives the factorization (tiny pivots) is not
    // probed here: kernel contamination blows up the verified residual, so
    // defect_solve rejects such systems. The residual bound is the arbiter.

    if (bordered_) {
      Eigen::VectorXd er = Eigen::VectorXd::Zero(core_n_);
      er[pin_] = 1.0;
      w_pin_ = lu_.solve(er);
      w_col_ = lu_.solve(
          Eigen::VectorXd(row_scale_.asDiagonal() * border_col_));
      const double a11 = 1.0 - sigma_ * w_pin_[pin_];
      const double a12 = w_col_[pin_];
      const double a21 =
          sigma_ * border_row_scale_ * scaled_border_row_.dot(w_pin_);
      const double a22 = -border_row_scale_ * scaled_border_row_.dot(w_col_);
      border_det_ = a11 * a22 - a12 * a21;
      border_a11_ = a11;
      border_a12_ = a12;
      border_a21_ = a21;
      border_a22_ = a22;
      if (!(std::abs(border_det_) > 1e-14))
        throw SingularSystemError(
            "pressure mean constraint is degenerate on this system");
    }
    ready_ = true;
  }

  // One application of the factorized (approximate) inverse. The core solve
  // runs in the scaled variables: K-hat y = Rs r, core solution = Cs y.
  Eigen::VectorXd apply(const Eigen::VectorXd& r) const {
    if (!bordered_) {
      const Eigen::VectorXd y =
          lu_.solve(Eigen::VectorXd(row_scale_.asDiagonal() * r));
      return col_scale_.asDiagonal() * y;
    }
    const Eigen::VectorXd wb = lu_.solve(
        Eigen::VectorXd(row_scale_.asDiagonal() * r.head(core_n_)));
    const double rhs1 = wb[pin_];
    const double rhs2 = border_row_scale_ * r[core_n_] -
                        border_row_scale_ * scaled_border_row_.dot(wb);
    const double s = (rhs1 * border_a22_ - border_a12_ * rhs2) / border_det_;
    const double mu = (border_a11_ * rhs2 - border_a21_ * rhs1) / border_det_;
    Eigen::VectorXd x(n_);
    x.head(core_n_) =
        col_scale_.asDiagonal() * (wb + sigma_ * s * w_pin_ - mu * w_col_);
    x[core_n_] = mu;
    return x;
  }

  // Defect correction against the current matrix; exact (one or two steps)
  // when the factorization matches, a cheap fixed point when it is stale.
  bool defect_solve(const AugmentedSystem& sys, Eigen::VectorXd& x) const {
    const double bnorm = sys.rhs.norm();
    if (bnorm == 0.0) {
      x = Eigen::VectorXd::Zero(n_);
      return true;
    }
    x = apply(sys.rhs);
    double rel_prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 20; ++k) {
      const Eigen::VectorXd residual = sys.rhs - sys.M * x;
      const double rel = residual.norm() / bnorm;
      if (!(rel < 1e80)) return false;  // diverged (stale factorization)
      if (rel <= 1e-12) return true;
      if (rel > 0.5 * rel_prev) return rel <= 1e-10;  // stagnated
      rel_prev = rel;
      x += apply(residual);
    }
    return false;
  }

  Eigen::SparseLU<SparseMat> lu_;
  bool analyzed_ = false;
  int analyzed_rows_ = 0;
  bool ready_ = false;
  bool bordered_ = false;
  int n_ = 0, core_n_ = 0, pin_ = -1;
  const double sigma_ = 1.0;
  Eigen::VectorXd row_scale_, col_scale_;
  Eigen::VectorXd border_col_, border_row_, scaled_border_row_;
  double border_row_scale_ = 1.0;
  Eigen::VectorXd w_pin_, w_col_;
  double border_det_ = 0.0;
  double border_a11_ = 0.0, border_a12_ = 0.0, border_a21_ = 0.0,
         border_a22_ = 0.0;
};

inline Eigen::VectorXd solve_linear(const AugmentedSystem& sys) {
  SaddleSolver solver;
  return solver.solve(sys);
}

struct ProblemData {
  std::vector<std::pair<Vec2, Vec2>> dirac_sources;  // (z, F)
  std::function<Vec2(Vec2)> smooth_forcing;          // optional
  DirichletData dirichlet = DirichletData::zero();
  bool nonlinear = true;
};

/// Picard iteration: each step solves the Brinkman system with the convective
/// and Forchheimer terms linearized at the previous iterate, starting from
/// the zero pair, until the Euclidean norm of the stacked coefficient
/// increment drops to tol.
inline std::pair<SolutionPair, PicardReport> picard_solve(
    const Mesh& mesh, const MixedSpace& sp, const ProblemData& data,
    double tol = 1e-8, int max_iter = 100) {
  const BrinkmanBlocks blocks = assemble_brinkman(mesh, sp);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(sp.n_velocity);
  if (!data.dirac_sources.empty())
    load += assemble_dirac_load(sp, mesh, data.dirac_sources);
  if (data.smooth_forcing)
    load += assemble_smooth_load(sp, mesh, data.smooth_forcing);

  SolutionPair sol;
  sol.u = Eigen::VectorXd::Zero(sp.n_velocity);
  sol.p = Eigen::VectorXd::Zero(sp.n_pressure);
  sol.space = sp;

  PicardReport report;
  SaddleSolver solver;  // factorizations are recycled across iterations
  for (int i = 1; i <= max_iter; ++i) {
    SparseMat A = blocks.A0 + blocks.A1;
    if (data.nonlinear) {
      A += assemble_convection(mesh, sp, sol.u);
      A += assemble_forchheimer(mesh, sp, sol.u);
    }
    SaddleSystem sys =
        make_system(mesh, sp, std::move(A), blocks.B, blocks.m, load);
    sys = apply_dirichlet(std::move(sys), mesh, sp, data.dirichlet);
    const Eigen::VectorXd x = solver.solve(build_saddle(sys));

    Eigen::VectorXd u_new = x.head(sp.n_velocity);
    Eigen::VectorXd p_new = x.segment(sp.n_velocity, sp.n_pressure);
    const double increment = std::sqrt((u_new - sol.u).squaredNorm() +
                                       (p_new - sol.p).squaredNorm());
    sol.u = std::move(u_new);
    sol.p = std::move(p_new);
    report.iterations = i;
    report.final_increment = increment;
    report.increments.push_back(increment);
    // The pressure scale near a point source grows like 1/h_min, so on
    // deeply refined meshes the absolute tolerance can fall below what
    // double precision can represent for the iterate; convergence is then
    // accepted at the machine floor for the iterate's own scale.
    const double machine_floor =
        128.0 * std::numeric_limits<double>::epsilon() *
        std::sqrt(sol.u.squaredNorm() + sol.p.squaredNorm());
    if (increment <= std::max(tol, machine_floor)) {
      report.converged = true;
      return {std::move(sol), std::move(report)};
    }
  }
  throw PicardDivergenceError(
      "Picard iteration did not reach tol within " +
          std::to_string(max_iter) + " iterations",
      report.increments);
}

}  // namespace bdfem
