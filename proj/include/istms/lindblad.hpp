#pragma once

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "fock.hpp"
#include "params.hpp"

namespace istms {

struct DensityMatrix {
  Eigen::MatrixXcd mat;

  int dim() const { return static_cast<int>(mat.rows()); }
  double trace_error() const { return std::abs(mat.trace() - cplx(1.0, 0.0)); }
  double hermiticity_error() const {
    return (mat - mat.adjoint()).cwiseAbs().maxCoeff();
  }
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es((mat + mat.adjoint()) * 0.5);
    return es.eigenvalues().minCoeff();
  }
};

struct DensityMatrixCheck {
  double trace_error = 0.0;
  double hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  bool pass = false;
};

inline DensityMatrixCheck check_density_matrix(const DensityMatrix& rho) {
  DensityMatrixCheck c;
  c.trace_error = rho.trace_error();
  c.hermiticity_error = rho.hermiticity_error();
  c.min_eigenvalue = rho.min_eigenvalue();
  c.pass = c.trace_error < 1e-9 && c.hermiticity_error < 1e-9 && c.min_eigenvalue >= -1e-8;
  return c;
}

// column-stacking vectorization: rhodot = L vec(rho)
inline SpMat liouvillian(const SpMat& h, const std::vector<std::pair<double, SpMat>>& collapse) {
  if (h.rows() != h.cols()) throw domain_error("liouvillian: H must be square");
  const int d = static_cast<int>(h.rows());
  const SpMat id = identity(d);
  const cplx mi(0.0, -1.0);
  SpMat l = mi * (tensor(id, h) - tensor(SpMat(h.transpose()), id));
  for (const auto& [rate, c] : collapse) {
    if (c.rows() != d || c.cols() != d) throw domain_error("liouvillian: dimension mismatch");
    const SpMat cdc = SpMat(c.adjoint()) * c;
    l = l + cplx(rate, 0.0) * (tensor(SpMat(c.conjugate()), c) -
                               cplx(0.5, 0.0) * tensor(id, cdc) -
                               cplx(0.5, 0.0) * tensor(SpMat(cdc.transpose()), id));
  }
  l.makeCompressed();
  return l;
}

// replace row 0 by the trace constraint; safe because vec(I)^T L = 0
inline SpMat trace_replaced(const SpMat& l, int d) {
  std::vector<SpTriplet> t;
  t.reserve(static_cast<std::size_t>(l.nonZeros()) + d);
  for (int k = 0; k < l.outerSize(); ++k)
    for (SpMat::InnerIterator it(l, k); it; ++it)
      if (it.row() != 0) t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int k = 0; k < d; ++k) t.emplace_back(0, k * (d + 1), cplx(1.0, 0.0));
  SpMat lt(l.rows(), l.cols());
  lt.setFromTriplets(t.begin(), t.end());
  return lt;
}

struct SteadyStateOptions {
  Eigen::Index direct_limit = 200000;  // max rows for the sparse direct tier
  bool allow_iterative = true;         // preconditioned Krylov tier
  double precond_dt = 2.0;             // resolvent shift used by that tier
  double dt = 3.0;                     // implicit-evolution step
  double tol_residual = 1e-10;         // implicit-evolution stop on ||rhodot||
  double accept_residual = 1e-8;
  int max_steps = 5000;
  int krylov_max_iters = 600;
  double ilut_droptol = 1e-4;
  int ilut_fill = 10;
  bool check_uniqueness = false;
  Eigen::VectorXcd x0;  // optional vectorized initial state for the implicit tier
};

struct SteadyStateResult {
  DensityMatrix rho;
  double residual = 0.0;
  std::string method;
  int iterations = 0;
};

namespace detail {

// ILUT of (I - dt L), used as a resolvent preconditioner for solving L x = b
class ShiftInvertILUT {
 public:
  ShiftInvertILUT() = default;

  void prepare(const SpMat& shifted, double droptol, int fillfactor) {
    ilut_.setDroptol(droptol);
    ilut_.setFillfactor(fillfactor);
    ilut_.compute(shifted);
    ready_ = ilut_.info() == Eigen::Success;
  }
  template <typename MatrixType>
  ShiftInvertILUT& analyzePattern(const MatrixType&) {
    return *this;
  }
  template <typename MatrixType>
  ShiftInvertILUT& factorize(const MatrixType&) {
    return *this;
  }
  template <typename MatrixType>
  ShiftInvertILUT& compute(const MatrixType&) {
    return *this;
  }
  template <typename Rhs>
  const Eigen::Solve<Eigen::IncompleteLUT<cplx>, Rhs> solve(const Rhs& b) const {
    return ilut_.solve(b);
  }
  Eigen::ComputationInfo info() const {
    return ready_ ? Eigen::Success : Eigen::NumericalIssue;
  }
  bool ready() const { return ready_; }

 private:
  Eigen::IncompleteLUT<cplx> ilut_;
  bool ready_ = false;
};

inline cplx vec_trace(const Eigen::VectorXcd& x, int d) {
  cplx t = 0.0;
  for (int k = 0; k < d; ++k) t += x(static_cast<Eigen::Index>(k) * (d + 1));
  return t;
}

inline void normalize_trace(Eigen::VectorXcd& x, int d) {
  const cplx t = vec_trace(x, d);
  if (std::abs(t) < 1e-300) throw convergence_error("steady_state: vanishing trace");
  x /= t;
}

// hermitize, clip small negative eigenvalues, renormalize
inline DensityMatrix finish_state(const Eigen::VectorXcd& x, int d) {
  Eigen::MatrixXcd m = Eigen::Map<const Eigen::MatrixXcd>(x.data(), d, d);
  m = ((m + m.adjoint()) * 0.5).eval();
  m /= m.trace().real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -1e-8)
    throw convergence_error("steady_state: negativity beyond tolerance (" +
                            std::to_string(min_eig) + ")");
  if (min_eig < 0.0) {
    Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0);
    m = es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
    m /= m.trace().real();
  }
  return DensityMatrix{std::move(m)};
}

}  // namespace detail

inline SteadyStateResult steady_state(const SpMat& l, const SteadyStateOptions& opts = {}) {
  const Eigen::Index n = l.rows();
  if (n != l.cols()) throw domain_error("steady_state: L must be square");
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (static_cast<Eigen::Index>(d) * d != n)
    throw domain_error("steady_state: L dimension is not a perfect square");

  auto residual_of = [&l](const Eigen::VectorXcd& v) { return (l * v).norm(); };

  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  rhs(0) = 1.0;

  std::optional<SpMat> lt;
  auto trace_form = [&]() -> const SpMat& {
    if (!lt) lt = trace_replaced(l, d);
    return *lt;
  };

  Eigen::VectorXcd x;
  std::string method;
  int iterations = 0;

  if (n <= opts.direct_limit) {
    try {
      Eigen::SparseLU<SpMat> lu;
      lu.compute(trace_form());
      if (lu.info() == Eigen::Success) {
        Eigen::VectorXcd y = lu.solve(rhs);
        if (lu.info() == Eigen::Success && y.allFinite()) {
          detail::normalize_trace(y, d);
          if (residual_of(y) < opts.accept_residual) {
            x = std::move(y);
            method = "direct";
            iterations = 1;
          }
        }
      }
    } catch (const std::exception&) {
      // fall through to the iterative tiers
    }
  }

  if (x.size() == 0 && opts.allow_iterative) try {
    SpMat shifted = identity(static_cast<int>(n));
    shifted = shifted - cplx(opts.precond_dt, 0.0) * l;
    shifted.makeCompressed();
    Eigen::BiCGSTAB<SpMat, detail::ShiftInvertILUT> krylov;
    krylov.preconditioner().prepare(shifted, opts.ilut_droptol, opts.ilut_fill);
    if (krylov.preconditioner().ready()) {
      krylov.setMaxIterations(opts.krylov_max_iters);
      krylov.setTolerance(1e-13);
      krylov.compute(trace_form());
      Eigen::VectorXcd y = krylov.solve(rhs);
      bool ok = false;
      if (y.allFinite()) {
        detail::normalize_trace(y, d);
        ok = residual_of(y) < opts.accept_residual;
      }
      if (ok) {
        x = std::move(y);
        method = "krylov";
        iterations = static_cast<int>(krylov.iterations());
      } else {
        Eigen::GMRES<SpMat, detail::ShiftInvertILUT> gmres;
        gmres.preconditioner().prepare(shifted, opts.ilut_droptol, opts.ilut_fill);
        gmres.set_restart(120);
        gmres.setMaxIterations(opts.krylov_max_iters);
        gmres.setTolerance(1e-13);
        gmres.compute(trace_form());
        y = gmres.solve(rhs);
        if (y.allFinite()) {
          detail::normalize_trace(y, d);
          if (residual_of(y) < opts.accept_residual) {
            x = std::move(y);
            method = "krylov";
            iterations = static_cast<int>(gmres.iterations());
          }
        }
      }
    }
  } catch (const std::exception&) {
    // fall through to the implicit tier
  }

  if (x.size() == 0) {
    // implicit (backward-Euler) evolution: fixed point solves L x = 0 exactly
    SpMat a = identity(static_cast<int>(n));
    a = a - cplx(opts.dt, 0.0) * l;
    a.makeCompressed();
    Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<cplx>> stepper;
    stepper.preconditioner().setDroptol(opts.ilut_droptol);
    stepper.preconditioner().setFillfactor(opts.ilut_fill);
    stepper.setTolerance(1e-12);
    stepper.setMaxIterations(400);
    stepper.compute(a);
    if (stepper.info() != Eigen::Success)
      throw convergence_error("steady_state: implicit-step factorization failed");

    auto evolve = [&](Eigen::VectorXcd v) {
      detail::normalize_trace(v, d);
      double res = std::numeric_limits<double>::infinity();
      int step = 0;
      for (; step < opts.max_steps; ++step) {
        Eigen::VectorXcd w = stepper.solveWithGuess(v, v);
        if (!w.allFinite())
          throw convergence_error("steady_state: implicit step diverged");
        detail::normalize_trace(w, d);
        v = std::move(w);
        res = residual_of(v);
        if (res < opts.tol_residual) break;
      }
      if (res >= opts.tol_residual)
        throw convergence_error("steady_state: implicit evolution did not converge (residual " +
                                std::to_string(res) + ")");
      return std::pair<Eigen::VectorXcd, int>(std::move(v), step + 1);
    };

    Eigen::VectorXcd v0;
    if (opts.x0.size() == n) {
      v0 = opts.x0;
    } else {
      v0 = Eigen::VectorXcd::Zero(n);
      v0(0) = 1.0;  // vacuum (x) |g>
    }
    auto [v, steps] = evolve(v0);
    if (opts.check_uniqueness) {
      Eigen::VectorXcd v1 = Eigen::VectorXcd::Zero(n);
      for (int k = 0; k < d; ++k) v1(static_cast<Eigen::Index>(k) * (d + 1)) = 1.0 / d;
      auto [w, steps2] = evolve(v1);
      (void)steps2;
      if ((v - w).norm() > 1e-6)
        throw nonunique_nullspace_error("steady_state: steady state depends on initial condition");
    }
    x = std::move(v);
    method = "implicit";
    iterations = steps;
  }

  SteadyStateResult result;
  result.rho = detail::finish_state(x, d);
  Eigen::Map<const Eigen::VectorXcd> xv(result.rho.mat.data(),
                                        static_cast<Eigen::Index>(d) * d);
  result.residual = (l * xv).norm();
  result.method = method;
  result.iterations = iterations;
  if (result.residual >= opts.accept_residual)
    throw convergence_error("steady_state: residual " + std::to_string(result.residual) +
                            " above acceptance threshold");
  return result;
}

inline double expect(const DensityMatrix& rho, const SpMat& op) {
  if (rho.dim() != op.rows() || op.rows() != op.cols())
    throw domain_error("expect: dimension mismatch");
  cplx s = 0.0;
  for (int k = 0; k < op.outerSize(); ++k)
    for (SpMat::InnerIterator it(op, k); it; ++it) s += it.value() * rho.mat(it.col(), it.row());
  return s.real();
}

inline Eigen::Matrix2cd partial_trace_qubit(const DensityMatrix& rho, const HilbertConfig& h) {
  if (rho.dim() != h.dim()) throw domain_error("partial_trace_qubit: dimension mismatch");
  Eigen::Matrix2cd pt = Eigen::Matrix2cd::Zero();
  const int cd = h.cavity_dim();
  for (int q = 0; q < 2; ++q)
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < cd; ++c) pt(q, r) += rho.mat(2 * c + q, 2 * c + r);
  return pt;
}

inline double qubit_excited_population(const DensityMatrix& rho, const HilbertConfig& h) {
  const double p = partial_trace_qubit(rho, h)(1, 1).real();
  if (p < -1e-8 || p > 1.0 + 1e-8)
    throw domain_error("qubit_excited_population: population outside [0,1]");
  return std::clamp(p, 0.0, 1.0);
}

// Uhlmann fidelity via Hermitian eigendecompositions
inline double state_fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw domain_error("state_fidelity: dimension mismatch");
  const Eigen::MatrixXcd ma = ((a.mat + a.mat.adjoint()) * 0.5).eval();
  const Eigen::MatrixXcd mb = ((b.mat + b.mat.adjoint()) * 0.5).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ea(ma);
  if (ea.eigenvalues().minCoeff() < -1e-8)
    throw domain_error("state_fidelity: first argument is not PSD within tolerance");
  const Eigen::MatrixXcd sq = ea.eigenvectors() *
                              ea.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                              ea.eigenvectors().adjoint();
  const Eigen::MatrixXcd m = sq * mb * sq;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> em(((m + m.adjoint()) * 0.5).eval());
  if (em.eigenvalues().minCoeff() < -1e-8)
    throw domain_error("state_fidelity: second argument is not PSD within tolerance");
  double f = 0.0;
  for (int i = 0; i < em.eigenvalues().size(); ++i)
    f += std::sqrt(std::max(em.eigenvalues()(i), 0.0));
  return std::clamp(f, 0.0, 1.0);
}

inline SpMat build_h_dispersive(const SystemParams& p, const HilbertConfig& h) {
  const double chi = effective_chi(p);
  const SpMat ae = a_even(h), ao = a_odd(h);
  const SpMat ne = SpMat(ae.adjoint()) * ae;
  const SpMat no = SpMat(ao.adjoint()) * ao;
  const SpMat diff = ne - no;
  const SpMat x = ae * ao;
  SpMat ham = cplx(p.j, 0.0) * diff + cplx(chi, 0.0) * (diff * sigma_z(h)) +
              cplx(0.0, -p.lambda) * (x - SpMat(x.adjoint()));
  ham.makeCompressed();
  return ham;
}

inline SpMat build_h_jc(const SystemParams& p, const HilbertConfig& h) {
  const SpMat ae = a_even(h), ao = a_odd(h);
  const SpMat sm = sigma_minus(h), sp = sigma_plus(h);
  const SpMat ne = SpMat(ae.adjoint()) * ae;
  const SpMat no = SpMat(ao.adjoint()) * ao;
  const SpMat x = ae * ao;
  const double gq = p.g / std::sqrt(2.0);
  SpMat ham = cplx(p.j, 0.0) * (ne - no) + cplx(0.0, -p.lambda) * (x - SpMat(x.adjoint())) +
              cplx(gq, 0.0) * (SpMat(ae.adjoint()) * sm + sp * ae + SpMat(ao.adjoint()) * sm +
                               sp * ao);
  ham.makeCompressed();
  return ham;
}

// cavity-only dispersive Hamiltonian with sigma_z frozen to an eigenvalue
inline SpMat build_h_dispersive_cavity(const SystemParams& p, const HilbertConfig& h,
                                       double sigma_z_value = -1.0) {
  const double chi = effective_chi(p);
  const SpMat ae = a_even_cavity(h), ao = a_odd_cavity(h);
  const SpMat ne = SpMat(ae.adjoint()) * ae;
  const SpMat no = SpMat(ao.adjoint()) * ao;
  const SpMat x = ae * ao;
  SpMat ham = cplx(p.j + chi * sigma_z_value, 0.0) * (ne - no) +
              cplx(0.0, -p.lambda) * (x - SpMat(x.adjoint()));
  ham.makeCompressed();
  return ham;
}

struct JcComparison {
  double lambda = 0.0;
  double full_error = 0.0;
  double qubit_error = 0.0;
  double p_e = 0.0;
  double mean_n_even = 0.0;
  double mean_n_odd = 0.0;
  double residual_jc = 0.0;
  double residual_disp = 0.0;
  std::string method;
  int iterations = 0;
};

inline SteadyStateResult steady_state_jc(const SystemParams& p, const HilbertConfig& h,
                                         const SteadyStateOptions& opts = {}) {
  const SpMat hjc = build_h_jc(p, h);
  const std::vector<std::pair<double, SpMat>> cops{{p.kappa, a_even(h)}, {p.kappa, a_odd(h)}};
  // qubit-cavity coupling destroys the excitation-difference block structure,
  // so direct factorization fills in catastrophically beyond small systems
  SteadyStateOptions o = opts;
  o.direct_limit = std::min<Eigen::Index>(o.direct_limit, 20000);
  return steady_state(liouvillian(hjc, cops), o);
}

inline SteadyStateResult steady_state_dispersive_cavity(const SystemParams& p,
                                                        const HilbertConfig& h,
                                                        const SteadyStateOptions& opts = {}) {
  const SpMat hc = build_h_dispersive_cavity(p, h, -1.0);
  const std::vector<std::pair<double, SpMat>> cops{{p.kappa, a_even_cavity(h)},
                                                   {p.kappa, a_odd_cavity(h)}};
  SteadyStateOptions o = opts;
  o.x0.resize(0);
  return steady_state(liouvillian(hc, cops), o);
}

inline JcComparison jc_vs_dispersive_error(const SystemParams& p, const HilbertConfig& h,
                                           const SteadyStateOptions& opts = {}) {
  const auto jc = steady_state_jc(p, h, opts);
  const auto disp = steady_state_dispersive_cavity(p, h, opts);

  const int cd = h.cavity_dim();
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(2 * cd, 2 * cd);
  for (int i = 0; i < cd; ++i)
    for (int j = 0; j < cd; ++j) full(2 * i, 2 * j) = disp.rho.mat(i, j);
  const DensityMatrix rho_d{std::move(full)};

  JcComparison out;
  out.lambda = p.lambda;
  out.full_error = 1.0 - state_fidelity(rho_d, jc.rho);
  out.p_e = qubit_excited_population(jc.rho, h);
  out.qubit_error = 1.0 - std::sqrt(1.0 - out.p_e);
  const SpMat ae = a_even(h), ao = a_odd(h);
  out.mean_n_even = expect(jc.rho, SpMat(SpMat(ae.adjoint()) * ae));
  out.mean_n_odd = expect(jc.rho, SpMat(SpMat(ao.adjoint()) * ao));
  out.residual_jc = jc.residual;
  out.residual_disp = disp.residual;
  out.method = jc.method;
  out.iterations = jc.iterations;
  return out;
}

struct TmsMoments {
  double mean_n_even = 0.0;
  double mean_n_odd = 0.0;
  double residual = 0.0;
  std::string method;
};

// pure two-mode-squeezing steady state (no qubit), cavity-only space
inline TmsMoments tms_mean_photons(const SystemParams& p, const HilbertConfig& h,
                                   const SteadyStateOptions& opts = {}) {
  const auto ss = steady_state_dispersive_cavity(p, h, opts);
  const SpMat ae = a_even_cavity(h), ao = a_odd_cavity(h);
  TmsMoments m;
  m.mean_n_even = expect(ss.rho, SpMat(SpMat(ae.adjoint()) * ae));
  m.mean_n_odd = expect(ss.rho, SpMat(SpMat(ao.adjoint()) * ao));
  m.residual = ss.residual;
  m.method = ss.method;
  return m;
}

// text dump: dimension header, then row,col,re,im for each significant entry
inline void dump_density_matrix(std::ostream& out, const DensityMatrix& rho,
                                double threshold = 1e-14) {
  char buf[80];
  out << "dim " << rho.dim() << "\n";
  for (int c = 0; c < rho.dim(); ++c)
    for (int r = 0; r < rho.dim(); ++r) {
      const cplx v = rho.mat(r, c);
      if (std::abs(v) <= threshold) continue;
      std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g", r, c, v.real(), v.imag());
      out << buf << "\n";
    }
}

inline DensityMatrix parse_density_matrix(std::istream& in) {
  std::string tag;
  int d = 0;
  if (!(in >> tag >> d) || tag != "dim" || d < 1)
    throw domain_error("parse_density_matrix: bad header");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int r = 0, c = 0;
    double re = 0.0, im = 0.0;
    if (std::sscanf(line.c_str(), "%d,%d,%lg,%lg", &r, &c, &re, &im) != 4)
      throw domain_error("parse_density_matrix: bad entry line");
    if (r < 0 || c < 0 || r >= d || c >= d)
      throw domain_error("parse_density_matrix: index out of range");
    m(r, c) = cplx(re, im);
  }
  return DensityMatrix{std::move(m)};
}

}  // namespace istms
