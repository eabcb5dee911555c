#pragma once

#include <Eigen/Sparse>
#include <cmath>
#include <complex>
#include <vector>

#include "errors.hpp"

namespace istms {

using cplx = std::complex<double>;
using SpMat = Eigen::SparseMatrix<cplx>;
using SpTriplet = Eigen::Triplet<cplx>;

// tensor order fixed as even (x) odd (x) qubit, qubit basis (|g>, |e>)
struct HilbertConfig {
  int n_max_even = 16;
  int n_max_odd = 16;

  int dim() const { return (n_max_even + 1) * (n_max_odd + 1) * 2; }
  int cavity_dim() const { return (n_max_even + 1) * (n_max_odd + 1); }
  int index(int ne, int no, int q) const { return (ne * (n_max_odd + 1) + no) * 2 + q; }
  void check() const {
    if (n_max_even < 1 || n_max_odd < 1) throw domain_error("HilbertConfig: n_max must be >= 1");
  }
};

inline SpMat ladder(int n_max) {
  if (n_max < 1) throw domain_error("ladder: n_max must be >= 1");
  const int d = n_max + 1;
  SpMat a(d, d);
  std::vector<SpTriplet> t;
  t.reserve(n_max);
  for (int n = 1; n <= n_max; ++n) t.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

inline SpMat identity(int dim) {
  if (dim < 1) throw domain_error("identity: dim must be >= 1");
  SpMat id(dim, dim);
  id.setIdentity();
  return id;
}

inline SpMat tensor(const SpMat& a, const SpMat& b) {
  SpMat out(a.rows() * b.rows(), a.cols() * b.cols());
  std::vector<SpTriplet> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros()) * b.nonZeros());
  for (int ka = 0; ka < a.outerSize(); ++ka)
    for (SpMat::InnerIterator ia(a, ka); ia; ++ia)
      for (int kb = 0; kb < b.outerSize(); ++kb)
        for (SpMat::InnerIterator ib(b, kb); ib; ++ib)
          t.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                         ia.value() * ib.value());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

inline SpMat qubit_sigma_minus() {
  SpMat s(2, 2);
  s.insert(0, 1) = 1.0;  // |g><e|
  s.makeCompressed();
  return s;
}

inline SpMat qubit_sigma_plus() {
  SpMat s(2, 2);
  s.insert(1, 0) = 1.0;
  s.makeCompressed();
  return s;
}

inline SpMat qubit_sigma_z() {
  SpMat s(2, 2);
  s.insert(0, 0) = -1.0;  // sigma_z |g> = -|g>
  s.insert(1, 1) = 1.0;
  s.makeCompressed();
  return s;
}

inline SpMat qubit_projector_e() {
  SpMat s(2, 2);
  s.insert(1, 1) = 1.0;
  s.makeCompressed();
  return s;
}

// full-space mode operators
inline SpMat a_even(const HilbertConfig& h) {
  h.check();
  return tensor(tensor(ladder(h.n_max_even), identity(h.n_max_odd + 1)), identity(2));
}

inline SpMat a_odd(const HilbertConfig& h) {
  h.check();
  return tensor(tensor(identity(h.n_max_even + 1), ladder(h.n_max_odd)), identity(2));
}

inline SpMat sigma_minus(const HilbertConfig& h) {
  h.check();
  return tensor(identity(h.cavity_dim()), qubit_sigma_minus());
}

inline SpMat sigma_plus(const HilbertConfig& h) {
  h.check();
  return tensor(identity(h.cavity_dim()), qubit_sigma_plus());
}

inline SpMat sigma_z(const HilbertConfig& h) {
  h.check();
  return tensor(identity(h.cavity_dim()), qubit_sigma_z());
}

inline SpMat projector_e(const HilbertConfig& h) {
  h.check();
  return tensor(identity(h.cavity_dim()), qubit_projector_e());
}

// cavity-only (even (x) odd) operators, used by the dispersive reference
inline SpMat a_even_cavity(const HilbertConfig& h) {
  h.check();
  return tensor(ladder(h.n_max_even), identity(h.n_max_odd + 1));
}

inline SpMat a_odd_cavity(const HilbertConfig& h) {
  h.check();
  return tensor(identity(h.n_max_even + 1), ladder(h.n_max_odd));
}

}  // namespace istms
