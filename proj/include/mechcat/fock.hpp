// Copyright 2026 The mechcat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Truncated Fock-space linear algebra. Every operator is a dense complex
// matrix in the number basis, index n = excitation number (ascending). For
// several modes the basis is the Kronecker product in mode order, the first
// mode being the most significant index.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "mechcat/errors.hpp"

namespace mechcat::fock {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr cplx kI{0.0, 1.0};

/// Tolerances attached to the state invariants.
struct Tolerance {
  static constexpr double ket_norm = 1e-12;
  static constexpr double hermiticity = 1e-10;
  static constexpr double trace = 1e-8;
  static constexpr double min_eigenvalue = -1e-6;
};

class HilbertSpace {
 public:
  HilbertSpace() : dims_{1} {}
  explicit HilbertSpace(std::vector<int> mode_dims) : dims_(std::move(mode_dims)) {
    if (dims_.empty()) throw DimensionError("HilbertSpace needs at least one mode");
    for (int d : dims_) {
      if (d < 1) throw DimensionError("mode dimension must be >= 1, got " + std::to_string(d));
    }
  }
  static HilbertSpace single(int dim) { return HilbertSpace({dim}); }

  const std::vector<int>& mode_dims() const { return dims_; }
  int num_modes() const { return static_cast<int>(dims_.size()); }
  int mode_dim(int mode) const { return dims_.at(static_cast<std::size_t>(mode)); }
  int total_dim() const {
    return std::accumulate(dims_.begin(), dims_.end(), 1, std::multiplies<>());
  }

  friend bool operator==(const HilbertSpace&, const HilbertSpace&) = default;

  std::string to_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(dims_[i]);
    }
    return s + "]";
  }

 private:
  std::vector<int> dims_;
};

inline void require_same_space(const HilbertSpace& a, const HilbertSpace& b, const char* what) {
  if (!(a == b)) {
    throw DimensionError(std::string(what) + ": space mismatch " + a.to_string() + " vs " +
                         b.to_string());
  }
}

inline void require_square(const Matrix& m, int dim, const char* what) {
  if (m.rows() != dim || m.cols() != dim) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(dim) + "x" +
                         std::to_string(dim) + " matrix, got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
}

class Operator {
 public:
  Operator(HilbertSpace space, Matrix matrix) : space_(std::move(space)), m_(std::move(matrix)) {
    require_square(m_, space_.total_dim(), "Operator");
  }

  static Operator identity(const HilbertSpace& space) {
    const int n = space.total_dim();
    return Operator(space, Matrix::Identity(n, n));
  }
  static Operator zero(const HilbertSpace& space) {
    const int n = space.total_dim();
    return Operator(space, Matrix::Zero(n, n));
  }

  const HilbertSpace& space() const { return space_; }
  const Matrix& matrix() const { return m_; }
  int dim() const { return space_.total_dim(); }

  Operator adjoint() const { return Operator(space_, m_.adjoint()); }

  Vector apply(const Vector& v) const {
    if (v.size() != dim()) throw DimensionError("Operator::apply: vector size mismatch");
    return m_ * v;
  }

  /// Largest elementwise |A - A^dagger|.
  double hermiticity_error() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }

  friend Operator operator+(const Operator& a, const Operator& b) {
    require_same_space(a.space_, b.space_, "Operator +");
    return Operator(a.space_, a.m_ + b.m_);
  }
  friend Operator operator-(const Operator& a, const Operator& b) {
    require_same_space(a.space_, b.space_, "Operator -");
    return Operator(a.space_, a.m_ - b.m_);
  }
  friend Operator operator*(const Operator& a, const Operator& b) {
    require_same_space(a.space_, b.space_, "Operator *");
    return Operator(a.space_, a.m_ * b.m_);
  }
  friend Operator operator*(cplx s, const Operator& a) { return Operator(a.space_, s * a.m_); }
  friend Operator operator*(const Operator& a, cplx s) { return s * a; }

 private:
  HilbertSpace space_;
  Matrix m_;
};

/// Unit-norm state vector. The constructor normalizes its input.
class Ket {
 public:
  Ket(HilbertSpace space, Vector amplitudes) : space_(std::move(space)), v_(std::move(amplitudes)) {
    if (v_.size() != space_.total_dim()) throw DimensionError("Ket: amplitude count mismatch");
    const double n = v_.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw InvalidStateError("Ket: zero or non-finite norm");
    v_ /= n;
  }

  const HilbertSpace& space() const { return space_; }
  const Vector& amplitudes() const { return v_; }
  int dim() const { return space_.total_dim(); }

  cplx inner(const Ket& other) const {
    require_same_space(space_, other.space_, "Ket::inner");
    return v_.dot(other.v_);  // conjugates *this
  }

 private:
  HilbertSpace space_;
  Vector v_;
};

/// Hermitian, unit-trace, positive semidefinite operator (within Tolerance).
class DensityMatrix {
 public:
  DensityMatrix(HilbertSpace space, Matrix matrix, bool check_positivity = true)
      : space_(std::move(space)), m_(std::move(matrix)) {
    require_square(m_, space_.total_dim(), "DensityMatrix");
    const double herm = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    if (!(herm <= Tolerance::hermiticity)) {
      throw InvalidStateError("DensityMatrix: not hermitian (max |rho - rho^+| = " +
                              std::to_string(herm) + ")");
    }
    const cplx tr = m_.trace();
    if (!(std::abs(tr - 1.0) <= Tolerance::trace)) {
      throw InvalidStateError("DensityMatrix: trace " + std::to_string(tr.real()) + " != 1");
    }
    if (check_positivity) {
      const double lo = min_eigenvalue();
      if (lo < Tolerance::min_eigenvalue) {
        throw InvalidStateError("DensityMatrix: negative eigenvalue " + std::to_string(lo));
      }
    }
  }

  explicit DensityMatrix(const Ket& psi)
      : space_(psi.space()), m_(psi.amplitudes() * psi.amplitudes().adjoint()) {}

  const HilbertSpace& space() const { return space_; }
  const Matrix& matrix() const { return m_; }
  int dim() const { return space_.total_dim(); }

  double min_eigenvalue() const {
    const Matrix h = 0.5 * (m_ + m_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
  double purity() const { return (m_.cwiseProduct(m_.transpose())).sum().real(); }

 private:
  HilbertSpace space_;
  Matrix m_;
};

// ---------------------------------------------------------------------------
// Single-mode operators

inline void require_dim(int dim, int min, const char* what) {
  if (dim < min) {
    throw DimensionError(std::string(what) + ": dimension must be >= " + std::to_string(min) +
                         ", got " + std::to_string(dim));
  }
}

inline Operator annihilation(int dim) {
  require_dim(dim, 2, "annihilation");
  Matrix b = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) b(n - 1, n) = std::sqrt(static_cast<double>(n));
  return Operator(HilbertSpace::single(dim), std::move(b));
}

inline Operator creation(int dim) { return annihilation(dim).adjoint(); }

inline Operator number(int dim) {
  require_dim(dim, 1, "number");
  Matrix n = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return Operator(HilbertSpace::single(dim), std::move(n));
}

/// (-1)^{b^dagger b}
inline Operator parity(int dim) {
  require_dim(dim, 1, "parity");
  Matrix p = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
  return Operator(HilbertSpace::single(dim), std::move(p));
}

/// exp(A) by scaling and squaring with a Pade approximant.
inline Matrix matrix_exponential(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("matrix_exponential: matrix not square");
  return a.exp();
}

inline Operator matrix_exponential(const Operator& a) {
  return Operator(a.space(), matrix_exponential(a.matrix()));
}

/// Heuristic support of a coherent amplitude: mean plus four standard deviations.
inline double coherent_support(double abs_amplitude) {
  return abs_amplitude * abs_amplitude + 4.0 * abs_amplitude + 4.0;
}

/// D(alpha) = exp(alpha b^dagger - alpha^* b), exponentiated in the truncated space.
inline Operator displacement(cplx alpha, int dim) {
  require_dim(dim, 2, "displacement");
  if (coherent_support(std::abs(alpha)) > dim) {
    warn("displacement: |alpha| = " + std::to_string(std::abs(alpha)) +
         " approaches the truncation edge at dim " + std::to_string(dim));
  }
  const Matrix b = annihilation(dim).matrix();
  const Matrix gen = alpha * b.adjoint() - std::conj(alpha) * b;
  return Operator(HilbertSpace::single(dim), matrix_exponential(gen));
}

/// S(s) = exp[(s/2) b^dagger^2 - (s^*/2) b^2].
inline Operator squeeze(cplx s, int dim) {
  require_dim(dim, 2, "squeeze");
  const double sh = std::sinh(std::abs(s));
  if (coherent_support(sh) > dim) {
    warn("squeeze: |s| = " + std::to_string(std::abs(s)) +
         " approaches the truncation edge at dim " + std::to_string(dim));
  }
  const Matrix b = annihilation(dim).matrix();
  const Matrix b2 = b * b;
  const Matrix gen = 0.5 * s * b2.adjoint() - 0.5 * std::conj(s) * b2;
  return Operator(HilbertSpace::single(dim), matrix_exponential(gen));
}

// ---------------------------------------------------------------------------
// States

inline Ket fock_ket(int n, int dim) {
  require_dim(dim, 1, "fock_ket");
  if (n < 0 || n >= dim) throw DimensionError("fock_ket: level outside truncation");
  Vector v = Vector::Zero(dim);
  v(n) = 1.0;
  return Ket(HilbertSpace::single(dim), std::move(v));
}

namespace detail {
// e^{-|beta|^2/2} beta^n / sqrt(n!) for n < dim, without normalization.
inline Vector coherent_amplitudes(cplx beta, int dim) {
  Vector v(dim);
  v(0) = std::exp(-0.5 * std::norm(beta));
  for (int n = 1; n < dim; ++n) v(n) = v(n - 1) * beta / std::sqrt(static_cast<double>(n));
  return v;
}

inline void check_support(cplx beta, int dim, const char* what) {
  if (coherent_support(std::abs(beta)) > dim) {
    warn(std::string(what) + ": support of |beta| = " + std::to_string(std::abs(beta)) +
         " overflows truncation dim " + std::to_string(dim));
  }
}
}  // namespace detail

inline Ket coherent(cplx beta, int dim) {
  require_dim(dim, 1, "coherent");
  detail::check_support(beta, dim, "coherent");
  return Ket(HilbertSpace::single(dim), detail::coherent_amplitudes(beta, dim));
}

/// (|beta> + |-beta>)/N. Odd amplitudes are exactly zero.
inline Ket cat_even(cplx beta, int dim) {
  require_dim(dim, 1, "cat_even");
  detail::check_support(beta, dim, "cat_even");
  Vector v = detail::coherent_amplitudes(beta, dim);
  for (int n = 1; n < dim; n += 2) v(n) = 0.0;
  return Ket(HilbertSpace::single(dim), std::move(v));
}

/// (|beta> - |-beta>)/N. Even amplitudes are exactly zero.
inline Ket cat_odd(cplx beta, int dim) {
  require_dim(dim, 2, "cat_odd");
  if (beta == cplx{}) throw InvalidStateError("cat_odd: beta = 0 has no odd component");
  detail::check_support(beta, dim, "cat_odd");
  Vector v = detail::coherent_amplitudes(beta, dim);
  for (int n = 0; n < dim; n += 2) v(n) = 0.0;
  return Ket(HilbertSpace::single(dim), std::move(v));
}

// ---------------------------------------------------------------------------
// Multi-mode algebra

inline HilbertSpace tensor(const HilbertSpace& a, const HilbertSpace& b) {
  std::vector<int> dims = a.mode_dims();
  dims.insert(dims.end(), b.mode_dims().begin(), b.mode_dims().end());
  return HilbertSpace(std::move(dims));
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Operator tensor(const Operator& a, const Operator& b) {
  return Operator(tensor(a.space(), b.space()), kron(a.matrix(), b.matrix()));
}

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(tensor(a.space(), b.space()), kron(a.matrix(), b.matrix()), false);
}

inline Operator dagger(const Operator& a) { return a.adjoint(); }

/// Lifts a single-mode operator onto `mode` of `space` (identity elsewhere).
inline Operator embed(const Operator& local, const HilbertSpace& space, int mode) {
  if (mode < 0 || mode >= space.num_modes()) throw DimensionError("embed: mode out of range");
  if (local.space().num_modes() != 1 || local.dim() != space.mode_dim(mode)) {
    throw DimensionError("embed: local operator dimension does not match mode " +
                         std::to_string(mode));
  }
  Matrix out = Matrix::Identity(1, 1);
  for (int k = 0; k < space.num_modes(); ++k) {
    const int d = space.mode_dim(k);
    out = kron(out, k == mode ? local.matrix() : Matrix::Identity(d, d));
  }
  return Operator(space, std::move(out));
}

namespace detail {
// Trace over all modes except `keep` for a raw matrix on `space`.
inline Matrix partial_trace_matrix(const Matrix& m, const HilbertSpace& space, int keep) {
  const int dk = space.mode_dim(keep);
  int outer = 1;
  int inner = 1;
  for (int k = 0; k < keep; ++k) outer *= space.mode_dim(k);
  for (int k = keep + 1; k < space.num_modes(); ++k) inner *= space.mode_dim(k);
  Matrix r = Matrix::Zero(dk, dk);
  for (int i = 0; i < dk; ++i) {
    for (int j = 0; j < dk; ++j) {
      cplx acc = 0.0;
      for (int o = 0; o < outer; ++o) {
        for (int n = 0; n < inner; ++n) {
          acc += m((o * dk + i) * inner + n, (o * dk + j) * inner + n);
        }
      }
      r(i, j) = acc;
    }
  }
  return r;
}
}  // namespace detail

/// Reduced state of mode `keep`.
inline DensityMatrix partial_trace(const DensityMatrix& rho, int keep) {
  const HilbertSpace& s = rho.space();
  if (keep < 0 || keep >= s.num_modes()) throw DimensionError("partial_trace: mode out of range");
  return DensityMatrix(HilbertSpace::single(s.mode_dim(keep)),
                       detail::partial_trace_matrix(rho.matrix(), s, keep), false);
}

/// Tr(rho A)
inline cplx expect(const DensityMatrix& rho, const Operator& a) {
  require_same_space(rho.space(), a.space(), "expect");
  return (rho.matrix().cwiseProduct(a.matrix().transpose())).sum();
}

inline cplx expect(const Ket& psi, const Operator& a) {
  require_same_space(psi.space(), a.space(), "expect");
  return psi.amplitudes().dot(a.matrix() * psi.amplitudes());
}

/// Tr(A B) for raw matrices, O(n^2).
inline cplx trace_product(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.cols() || a.cols() != b.rows()) {
    throw DimensionError("trace_product: shape mismatch");
  }
  return (a.cwiseProduct(b.transpose())).sum();
}

}  // namespace mechcat::fock
