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

// Lindblad master equations in the convention
//
//   d rho/dt = -i[H, rho] + sum_k rate_k D(C_k) rho,
//   D(C) rho  = 2 C rho C^+ - C^+ C rho - rho C^+ C,
//
// with hbar = 1 (H in rad/s) and every rate applied exactly as supplied.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>

#include "mechcat/errors.hpp"
#include "mechcat/fock.hpp"

namespace mechcat::lindblad {

using fock::cplx;
using fock::Matrix;
using SparseMatrix = Eigen::SparseMatrix<cplx>;

struct LindbladTerm {
  double rate = 0.0;
  fock::Operator collapse;
  std::string label;
};

class LindbladModel {
 public:
  LindbladModel(fock::Operator hamiltonian, std::vector<LindbladTerm> terms)
      : h_(std::move(hamiltonian)), terms_(std::move(terms)) {
    if (h_.hermiticity_error() >= 1e-10) {
      throw DimensionError("LindbladModel: Hamiltonian is not hermitian (error " +
                           std::to_string(h_.hermiticity_error()) + ")");
    }
    for (const auto& t : terms_) {
      if (!(t.rate >= 0.0) || !std::isfinite(t.rate)) {
        throw ParameterError("LindbladModel: term '" + t.label + "' has invalid rate " +
                             std::to_string(t.rate));
      }
      fock::require_same_space(h_.space(), t.collapse.space(), "LindbladModel term");
    }
  }

  const fock::Operator& hamiltonian() const { return h_; }
  const std::vector<LindbladTerm>& terms() const { return terms_; }
  const fock::HilbertSpace& space() const { return h_.space(); }
  int dim() const { return h_.dim(); }

  /// Rough magnitude of the fastest rate in the generator (rad/s), with a label.
  std::pair<double, std::string> stiffest_rate() const {
    auto norm1 = [](const Matrix& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); };
    std::pair<double, std::string> best{2.0 * norm1(h_.matrix()), "Hamiltonian"};
    for (const auto& t : terms_) {
      const Matrix& c = t.collapse.matrix();
      const double r = 2.0 * t.rate * norm1(c.adjoint() * c);
      if (r > best.first) best = {r, t.label.empty() ? "dissipator" : t.label};
    }
    return best;
  }

 private:
  fock::Operator h_;
  std::vector<LindbladTerm> terms_;
};

inline void require_state_shape(const LindbladModel& model, const Matrix& rho, const char* what) {
  fock::require_square(rho, model.dim(), what);
}

/// 2 C rho C^+ - C^+ C rho - rho C^+ C
inline Matrix dissipator(const fock::Operator& c, const Matrix& rho) {
  fock::require_square(rho, c.dim(), "dissipator");
  const Matrix& cm = c.matrix();
  const Matrix cdc = cm.adjoint() * cm;
  return 2.0 * cm * rho * cm.adjoint() - cdc * rho - rho * cdc;
}

/// Dense reference evaluation of the master-equation right-hand side.
inline Matrix rhs(const LindbladModel& model, const Matrix& rho) {
  require_state_shape(model, rho, "rhs");
  const Matrix& h = model.hamiltonian().matrix();
  Matrix out = -fock::kI * (h * rho - rho * h);
  for (const auto& t : model.terms()) out += t.rate * dissipator(t.collapse, rho);
  return out;
}

/// Superoperator L with vec(rhs(rho)) = L vec(rho), column-major vec. Built by
/// applying rhs() to the matrix units, so it is independent of the sparse
/// Kronecker assembly used by the implicit integrator.
inline Matrix liouvillian_matrix(const LindbladModel& model, int max_dim = 8) {
  const int n = model.dim();
  if (n > max_dim) {
    throw DimensionError("liouvillian_matrix: total dim " + std::to_string(n) +
                         " exceeds guard " + std::to_string(max_dim));
  }
  Matrix l(n * n, n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      Matrix unit = Matrix::Zero(n, n);
      unit(i, j) = 1.0;
      const Matrix col = rhs(model, unit);
      l.col(j * n + i) = Eigen::Map<const Eigen::VectorXcd>(col.data(), n * n);
    }
  }
  return l;
}

namespace detail {

inline SparseMatrix to_sparse(const Matrix& m) {
  SparseMatrix s = m.sparseView(cplx{0.0}, 0.0);
  s.makeCompressed();
  return s;
}

/// Sparse assembly of the Liouvillian, column-major vec:
///   vec(A X B) = (B^T kron A) vec(X).
inline SparseMatrix sparse_liouvillian(const LindbladModel& model) {
  const int n = model.dim();
  SparseMatrix id(n, n);
  id.setIdentity();
  const SparseMatrix h = to_sparse(model.hamiltonian().matrix());
  SparseMatrix l = cplx{0.0, -1.0} * SparseMatrix(Eigen::kroneckerProduct(id, h)) +
                   cplx{0.0, 1.0} * SparseMatrix(Eigen::kroneckerProduct(SparseMatrix(h.transpose()), id));
  for (const auto& t : model.terms()) {
    if (t.rate == 0.0) continue;
    const SparseMatrix c = to_sparse(t.collapse.matrix());
    const SparseMatrix cdc = SparseMatrix(c.adjoint()) * c;
    l += (2.0 * t.rate) * SparseMatrix(Eigen::kroneckerProduct(SparseMatrix(c.conjugate()), c));
    l -= t.rate * SparseMatrix(Eigen::kroneckerProduct(id, cdc));
    l -= t.rate * SparseMatrix(Eigen::kroneckerProduct(SparseMatrix(cdc.transpose()), id));
  }
  l.prune(cplx{0.0}, 0.0);
  l.makeCompressed();
  return l;
}

/// rhs(rho) = -(K rho + rho K^+) + sum_k 2 r_k C_k rho C_k^+, K = iH + sum_k r_k C_k^+ C_k,
/// with all operators held sparse.
class CompiledRhs {
 public:
  explicit CompiledRhs(const LindbladModel& model) : n_(model.dim()) {
    Matrix k = fock::kI * model.hamiltonian().matrix();
    for (const auto& t : model.terms()) {
      if (t.rate == 0.0) continue;
      const Matrix& c = t.collapse.matrix();
      k += t.rate * (c.adjoint() * c);
      jumps_.push_back({2.0 * t.rate, to_sparse(c), to_sparse(c.adjoint())});
    }
    k_ = to_sparse(k);
    k_adj_ = to_sparse(k.adjoint());
  }

  void operator()(const Matrix& rho, Matrix& out) const {
    out.noalias() = -(k_ * rho);
    out.noalias() -= rho * k_adj_;
    for (const auto& j : jumps_) {
      tmp_.noalias() = j.c * rho;
      out.noalias() += j.weight * (tmp_ * j.c_adj);
    }
  }

  int dim() const { return n_; }

 private:
  struct Jump {
    double weight;
    SparseMatrix c;
    SparseMatrix c_adj;
  };
  int n_;
  SparseMatrix k_;
  SparseMatrix k_adj_;
  std::vector<Jump> jumps_;
  mutable Matrix tmp_;
};

}  // namespace detail

enum class Method { automatic, rk45, sdirk4 };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::automatic: return "auto";
    case Method::rk45: return "rk45";
    case Method::sdirk4: return "sdirk4";
  }
  return "?";
}

struct IntegratorConfig {
  double rtol = 1e-8;
  double atol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 0.0;
  double initial_step = 0.0;  // 0: automatic
  long max_steps = 20'000'000;
  std::vector<double> snapshot_times;
  Method method = Method::automatic;
  // Automatic selection switches to the implicit method above this many
  // estimated explicit steps, provided dim^2 stays below sdirk_max_vec_dim.
  double stiff_step_threshold = 1e4;
  int sdirk_max_vec_dim = 12'000;
};

/// Called at each reported time with the current state.
struct Observer {
  std::string name;
  std::function<double(double t, const Matrix& rho)> fn;
};

struct Snapshot {
  double t = 0.0;
  fock::DensityMatrix state;
  double min_eigenvalue = 0.0;
};

struct StepStats {
  long accepted = 0;
  long rejected = 0;
  long factorizations = 0;
  Method method = Method::rk45;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> records;  // records[i][c] at times[i]
  std::vector<Snapshot> snapshots;
  std::vector<double> trace_error;        // |Tr rho - 1| per reported time
  std::vector<double> hermiticity_error;  // max |rho - rho^+| per reported time
  StepStats stats;

  std::vector<double> column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw Error("Trajectory: no column '" + name + "'");
    const auto c = static_cast<std::size_t>(it - columns.begin());
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r[c]);
    return out;
  }
  bool has_column(const std::string& name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
  }
};

namespace detail {

inline double error_norm(const Matrix& err, const Matrix& y0, const Matrix& y1, double atol,
                         double rtol) {
  double acc = 0.0;
  const Eigen::Index n = err.size();
  const cplx* e = err.data();
  const cplx* a = y0.data();
  const cplx* b = y1.data();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sc = atol + rtol * std::max(std::abs(a[i]), std::abs(b[i]));
    acc += std::norm(e[i]) / (sc * sc);
  }
  return std::sqrt(acc / static_cast<double>(n));
}

// Merges the requested grid and snapshot times into one strictly increasing list.
inline std::vector<double> output_times(std::span<const double> grid,
                                        const std::vector<double>& snaps) {
  std::vector<double> all(grid.begin(), grid.end());
  all.insert(all.end(), snaps.begin(), snaps.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

class Recorder {
 public:
  Recorder(const fock::HilbertSpace& space, const std::vector<Observer>& observers,
           const std::vector<double>& snapshot_times, Trajectory& traj)
      : space_(space), observers_(observers), snaps_(snapshot_times), traj_(traj) {
    for (const auto& o : observers_) traj_.columns.push_back(o.name);
    std::sort(snaps_.begin(), snaps_.end());
  }

  void record(double t, const Matrix& rho) {
    traj_.times.push_back(t);
    std::vector<double> row;
    row.reserve(observers_.size());
    for (const auto& o : observers_) row.push_back(o.fn(t, rho));
    traj_.records.push_back(std::move(row));
    traj_.trace_error.push_back(std::abs(rho.trace() - 1.0));
    traj_.hermiticity_error.push_back((rho - rho.adjoint()).cwiseAbs().maxCoeff());
    if (std::binary_search(snaps_.begin(), snaps_.end(), t)) {
      // Positivity is reported, not enforced, so a drifting state is still visible.
      // The snapshot keeps the hermitian part; the raw asymmetry, which explicit
      // steps near their stability edge let grow to about atol, stays in
      // hermiticity_error.
      fock::DensityMatrix dm(space_, Matrix(0.5 * (rho + rho.adjoint())), false);
      const double lo = dm.min_eigenvalue();
      traj_.snapshots.push_back({t, std::move(dm), lo});
    }
  }

 private:
  const fock::HilbertSpace& space_;
  const std::vector<Observer>& observers_;
  std::vector<double> snaps_;
  Trajectory& traj_;
};

[[noreturn]] inline void fail_stiff(const LindbladModel& model, double t, double h,
                                    const char* reason) {
  const auto [rate, label] = model.stiffest_rate();
  throw IntegrationError(std::string(reason) + " at t = " + std::to_string(t) +
                         " s (step " + std::to_string(h) + " s); limiting rate ~" +
                         std::to_string(rate) + " rad/s from " + label);
}

// Dormand-Prince 5(4) with PI step-size control.
inline void integrate_rk45(const LindbladModel& model, Matrix rho, const std::vector<double>& outs,
                           const IntegratorConfig& cfg, Recorder& rec, StepStats& stats) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2; (void)c3; (void)c4; (void)c5;  // autonomous system

  const CompiledRhs f(model);
  const int n = model.dim();
  Matrix k1(n, n), k2(n, n), k3(n, n), k4(n, n), k5(n, n), k6(n, n), k7(n, n);
  Matrix y(n, n), ynew(n, n), err(n, n);

  double t = outs.front();
  rec.record(t, rho);
  if (outs.size() == 1) return;
  const double t_end = outs.back();

  f(rho, k1);
  double h = cfg.initial_step;
  if (!(h > 0.0)) {
    // Hairer's initial guess from the first derivative scale.
    const double d0 = error_norm(rho, rho, rho, cfg.atol, cfg.rtol);
    const double d1 = error_norm(k1, rho, rho, cfg.atol, cfg.rtol);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * (t_end - t) : 0.01 * d0 / d1;
  }
  h = std::min({h, cfg.max_step, t_end - t});

  double err_old = 1e-4;
  bool last_rejected = false;
  std::size_t next = 1;
  while (next < outs.size()) {
    const double target = outs[next];
    const double h_min = std::max(cfg.min_step, 16.0 * std::numeric_limits<double>::epsilon() *
                                                    std::max(1.0, std::abs(t)));
    if (h < h_min) fail_stiff(model, t, h, "step size underflow");
    if (stats.accepted + stats.rejected >= cfg.max_steps) {
      fail_stiff(model, t, h, "step budget exhausted (problem too stiff for rk45)");
    }
    bool hits = false;
    double step = h;
    if (t + step >= target || target - (t + step) <= 1e-10 * step) {
      step = target - t;
      hits = true;
    }

    y = rho + step * a21 * k1;
    f(y, k2);
    y = rho + step * (a31 * k1 + a32 * k2);
    f(y, k3);
    y = rho + step * (a41 * k1 + a42 * k2 + a43 * k3);
    f(y, k4);
    y = rho + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(y, k5);
    y = rho + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(y, k6);
    ynew = rho + step * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    f(ynew, k7);
    err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double e = error_norm(err, rho, ynew, cfg.atol, cfg.rtol);
    if (!std::isfinite(e)) fail_stiff(model, t, step, "non-finite error estimate");

    if (e <= 1.0) {
      ++stats.accepted;
      t = hits ? target : t + step;
      rho.swap(ynew);
      k1.swap(k7);
      double fac = 0.9 * std::pow(std::max(e, 1e-10), -0.17) * std::pow(err_old, 0.04);
      fac = std::clamp(fac, 0.2, 10.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      err_old = std::max(e, 1e-4);
      last_rejected = false;
      // A step shortened to land on an output time does not shrink the next one.
      h = std::min(std::max(h, step) * fac, cfg.max_step);
      if (hits) {
        rec.record(t, rho);
        ++next;
      }
      if (next < outs.size()) h = std::min(h, outs.back() - t);
    } else {
      ++stats.rejected;
      last_rejected = true;
      h = step * std::max(0.2, 0.9 * std::pow(e, -0.2));
    }
  }
}

// Five-stage, stiffly accurate, L-stable SDIRK of order 4 with an embedded
// order-3 solution (gamma = 1/4). The Liouvillian is linear and autonomous,
// so every stage solves with the same factorized (I - h gamma L).
inline void integrate_sdirk4(const LindbladModel& model, const Matrix& rho0,
                             const std::vector<double>& outs, const IntegratorConfig& cfg,
                             Recorder& rec, StepStats& stats) {
  static constexpr double g = 0.25;
  static constexpr double a[5][4] = {
      {0, 0, 0, 0},
      {1.0 / 2, 0, 0, 0},
      {17.0 / 50, -1.0 / 25, 0, 0},
      {371.0 / 1360, -137.0 / 2720, 15.0 / 544, 0},
      {25.0 / 24, -49.0 / 48, 125.0 / 16, -85.0 / 12},
  };
  static constexpr double b[5] = {25.0 / 24, -49.0 / 48, 125.0 / 16, -85.0 / 12, 1.0 / 4};
  static constexpr double bhat[5] = {59.0 / 48, -17.0 / 96, 225.0 / 32, -85.0 / 12, 0.0};

  const int n = model.dim();
  const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
  const SparseMatrix l = sparse_liouvillian(model);
  SparseMatrix id(nn, nn);
  id.setIdentity();

  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  double lu_h = -1.0;
  auto factorize = [&](double h) {
    SparseMatrix m = id - (h * g) * l;
    m.makeCompressed();
    if (!analyzed) {
      lu.analyzePattern(m);
      analyzed = true;
    }
    lu.factorize(m);
    if (lu.info() != Eigen::Success) throw IntegrationError("sdirk4: sparse LU factorization failed");
    lu_h = h;
    ++stats.factorizations;
  };

  using Vec = Eigen::VectorXcd;
  Vec y = Eigen::Map<const Vec>(rho0.data(), nn);
  Vec k[5];
  Vec rhs_v(nn), ynew(nn), errv(nn);
  Matrix view_y(n, n), view_new(n, n);

  auto as_matrix = [n](const Vec& v) { return Eigen::Map<const Matrix>(v.data(), n, n); };

  double t = outs.front();
  rec.record(t, rho0);
  if (outs.size() == 1) return;
  const double t_end = outs.back();

  double h = cfg.initial_step;
  if (!(h > 0.0)) {
    const Vec f0 = l * y;
    const double scale = f0.cwiseAbs().maxCoeff();
    h = scale > 0.0 ? 1e-3 / scale : 1e-3 * (t_end - t);
  }
  h = std::min({h, cfg.max_step, t_end - t});

  std::size_t next = 1;
  bool last_rejected = false;
  while (next < outs.size()) {
    const double target = outs[next];
    const double h_min = std::max(cfg.min_step, 16.0 * std::numeric_limits<double>::epsilon() *
                                                    std::max(1.0, std::abs(t)));
    if (h < h_min) fail_stiff(model, t, h, "step size underflow");
    if (stats.accepted + stats.rejected >= cfg.max_steps) {
      fail_stiff(model, t, h, "step budget exhausted");
    }
    bool hits = false;
    double step = h;
    if (t + step >= target || target - (t + step) <= 1e-10 * step) {
      step = target - t;
      hits = true;
    }
    if (step != lu_h) factorize(step);

    for (int i = 0; i < 5; ++i) {
      rhs_v = y;
      for (int j = 0; j < i; ++j) rhs_v += (step * a[i][j]) * k[j];
      const Vec stage = lu.solve(rhs_v);
      k[i] = l * stage;
      if (i == 4) ynew = stage;  // stiffly accurate
    }
    errv.setZero();
    for (int i = 0; i < 5; ++i) errv += (step * (b[i] - bhat[i])) * k[i];
    errv = lu.solve(errv);  // damps the estimate on stiff components
    view_y = as_matrix(y);
    view_new = as_matrix(ynew);
    const double e = error_norm(as_matrix(errv), view_y, view_new, cfg.atol, cfg.rtol);
    if (!std::isfinite(e)) fail_stiff(model, t, step, "non-finite error estimate");

    if (e <= 1.0) {
      ++stats.accepted;
      t = hits ? target : t + step;
      y.swap(ynew);
      double fac = std::clamp(0.9 * std::pow(std::max(e, 1e-10), -0.25), 0.2, 5.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      last_rejected = false;
      const double base = std::max(h, step);
      // Keep the factorization when the proposed change is small.
      double h_new = (fac >= 1.0 && fac <= 1.3) ? base : base * fac;
      h = std::min(h_new, cfg.max_step);
      if (hits) {
        view_y = as_matrix(y);
        rec.record(t, view_y);
        ++next;
      }
      if (next < outs.size()) h = std::min(h, outs.back() - t);
    } else {
      ++stats.rejected;
      last_rejected = true;
      h = step * std::max(0.2, 0.9 * std::pow(e, -0.25));
    }
  }
}

}  // namespace detail

/// Picks rk45 unless the explicit step count estimated from the stiffest rate
/// exceeds the configured threshold and the vectorized problem stays small.
inline Method choose_method(const LindbladModel& model, double horizon,
                            const IntegratorConfig& cfg) {
  if (cfg.method != Method::automatic) return cfg.method;
  const double explicit_steps = model.stiffest_rate().first * horizon / 3.0;
  const long vec_dim = static_cast<long>(model.dim()) * model.dim();
  if (explicit_steps > cfg.stiff_step_threshold && vec_dim <= cfg.sdirk_max_vec_dim) {
    return Method::sdirk4;
  }
  return Method::rk45;
}

/// Integrates the master equation, reporting observers at every time in
/// `t_grid` and in `cfg.snapshot_times`; full states are kept only at the
/// snapshot times.
inline Trajectory evolve(const LindbladModel& model, const fock::DensityMatrix& rho0,
                         std::span<const double> t_grid, const IntegratorConfig& cfg,
                         const std::vector<Observer>& observers = {}) {
  fock::require_same_space(model.space(), rho0.space(), "evolve");
  if (!(cfg.rtol > 0.0) || !(cfg.atol > 0.0)) throw ParameterError("evolve: tolerances must be > 0");
  if (cfg.min_step > cfg.max_step) throw ParameterError("evolve: min_step > max_step");
  if (t_grid.empty()) throw ParameterError("evolve: empty time grid");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) throw ParameterError("evolve: time grid not increasing");
  }
  for (double s : cfg.snapshot_times) {
    if (s < t_grid.front() || s > t_grid.back()) {
      throw ParameterError("evolve: snapshot time " + std::to_string(s) + " outside grid");
    }
  }

  const std::vector<double> outs = detail::output_times(t_grid, cfg.snapshot_times);
  Trajectory traj;
  detail::Recorder rec(model.space(), observers, cfg.snapshot_times, traj);
  const Method m = choose_method(model, outs.back() - outs.front(), cfg);
  traj.stats.method = m;
  if (m == Method::sdirk4) {
    detail::integrate_sdirk4(model, rho0.matrix(), outs, cfg, rec, traj.stats);
  } else {
    detail::integrate_rk45(model, rho0.matrix(), outs, cfg, rec, traj.stats);
  }
  return traj;
}

}  // namespace mechcat::lindblad
