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

// Diagnostics of mechanical states: Hilbert-Schmidt fidelity, Wigner
// function, the decohering-cat approximation, the quantum non-Gaussianity
// witness, and exponential decay fits.
//
// Phase-space convention: alpha = x + i p, W(alpha) = (2/pi) Tr[rho D(alpha) P D(alpha)^+],
// normalized as  integral W dx dp = 1  (vacuum: W(0) = 2/pi).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mechcat/errors.hpp"
#include "mechcat/fock.hpp"
#include "mechcat/lindblad.hpp"

namespace mechcat::analysis {

using fock::cplx;
using fock::Matrix;

inline constexpr double kTwoOverPi = 0.63661977236758134308;

// ---------------------------------------------------------------------------
// Fidelity and simple observables

/// |Tr(rho0 rho1)| / sqrt(Tr rho0^2 Tr rho1^2)
inline double hs_fidelity(const Matrix& rho0, const Matrix& rho1) {
  if (rho0.rows() != rho1.rows() || rho0.cols() != rho1.cols()) {
    throw DimensionError("hs_fidelity: shape mismatch");
  }
  const double p0 = fock::trace_product(rho0, rho0).real();
  const double p1 = fock::trace_product(rho1, rho1).real();
  if (!(p0 > 0.0) || !(p1 > 0.0)) throw InvalidStateError("hs_fidelity: zero-purity input");
  const double f = std::abs(fock::trace_product(rho0, rho1)) / std::sqrt(p0 * p1);
  return std::min(f, 1.0);
}

inline double hs_fidelity(const fock::DensityMatrix& rho0, const fock::DensityMatrix& rho1) {
  fock::require_same_space(rho0.space(), rho1.space(), "hs_fidelity");
  return hs_fidelity(rho0.matrix(), rho1.matrix());
}

/// 1 - F(rho, rho_app)
inline double distance(const Matrix& rho, const Matrix& rho_app) { return 1.0 - hs_fidelity(rho, rho_app); }

inline double distance(const fock::DensityMatrix& rho, const fock::DensityMatrix& rho_app) {
  return 1.0 - hs_fidelity(rho, rho_app);
}

struct Observables {
  double mean_phonon = 0.0;
  double purity = 0.0;
  double parity = 0.0;
};

inline Observables observables(const Matrix& rho) {
  Observables o;
  for (Eigen::Index n = 0; n < rho.rows(); ++n) {
    const double p = rho(n, n).real();
    o.mean_phonon += static_cast<double>(n) * p;
    o.parity += (n % 2 == 0) ? p : -p;
  }
  o.purity = fock::trace_product(rho, rho).real();
  return o;
}

inline Observables observables(const fock::DensityMatrix& rho) {
  if (rho.space().num_modes() != 1) throw DimensionError("observables: single-mode state expected");
  return observables(rho.matrix());
}

/// |<beta| rho |-beta>|
inline double cat_coherence(const Matrix& rho, cplx beta) {
  const int d = static_cast<int>(rho.rows());
  const fock::Ket plus = fock::coherent(beta, d);
  const fock::Ket minus = fock::coherent(-beta, d);
  return std::abs(plus.amplitudes().dot(rho * minus.amplitudes()));
}

// ---------------------------------------------------------------------------
// Wigner function

namespace detail {

inline const std::vector<double>& half_log_factorials(int n) {
  thread_local std::vector<double> table;
  if (static_cast<int>(table.size()) < n) {
    table.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) table[static_cast<std::size_t>(i)] = 0.5 * std::lgamma(i + 1.0);
  }
  return table;
}

}  // namespace detail

/// W(alpha) = (2/pi) Tr[rho D(2 alpha) P], using the closed-form number-basis
/// matrix elements of D (generalized Laguerre polynomials). Exact for any
/// state supported on the truncated space; no truncation of D is involved.
inline double wigner_value(const Matrix& rho, cplx alpha) {
  const int d = static_cast<int>(rho.rows());
  const cplx g = 2.0 * alpha;
  const double x = std::norm(g);
  if (x == 0.0) {
    double acc = 0.0;
    for (int m = 0; m < d; ++m) acc += (m % 2 == 0 ? 1.0 : -1.0) * rho(m, m).real();
    return kTwoOverPi * acc;
  }
  const double log_r = 0.5 * std::log(x);
  const double phi = std::arg(g);
  const auto& lf = detail::half_log_factorials(d);
  double acc = 0.0;
  for (int k = 0; k < d; ++k) {
    const cplx phase = std::polar(1.0, k * phi);
    double l_prev = 0.0;
    double l = 1.0;
    for (int m = 0; m + k < d; ++m) {
      if (m == 1) {
        l_prev = 1.0;
        l = 1.0 + k - x;
      } else if (m >= 2) {
        const double next = ((2.0 * (m - 1) + 1.0 + k - x) * l - (m - 1.0 + k) * l_prev) / m;
        l_prev = l;
        l = next;
      }
      const double f = std::exp(lf[static_cast<std::size_t>(m)] - lf[static_cast<std::size_t>(m + k)] +
                                k * log_r - 0.5 * x) * l;
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      if (k == 0) {
        acc += sign * f * rho(m, m).real();
      } else {
        acc += 2.0 * sign * f * (phase * rho(m, m + k)).real();
      }
    }
  }
  return kTwoOverPi * acc;
}

/// (2/pi) Tr[rho P]
inline double wigner_at_origin(const Matrix& rho) { return kTwoOverPi * observables(rho).parity; }

inline double wigner_at_origin(const fock::DensityMatrix& rho) { return wigner_at_origin(rho.matrix()); }

struct WignerGridSpec {
  double x_min = -5.0;
  double x_max = 5.0;
  int nx = 201;
  double p_min = -5.0;
  double p_max = 5.0;
  int np = 201;

  double dx() const { return nx > 1 ? (x_max - x_min) / (nx - 1) : 0.0; }
  double dp() const { return np > 1 ? (p_max - p_min) / (np - 1) : 0.0; }
  double x(int i) const { return x_min + i * dx(); }
  double p(int j) const { return p_min + j * dp(); }
};

struct WignerGrid {
  WignerGridSpec spec;
  std::vector<double> values;  // values[i * np + j] at (x(i), p(j))

  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * spec.np + j]; }
  double min() const { return *std::min_element(values.begin(), values.end()); }
  double max() const { return *std::max_element(values.begin(), values.end()); }
  /// Riemann sum of W dx dp.
  double normalization() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * spec.dx() * spec.dp();
  }
};

/// Evaluates W on the grid; rows are split over `threads` workers, each grid
/// point independently, so the result does not depend on the thread count.
inline WignerGrid wigner(const Matrix& rho, const WignerGridSpec& spec, int threads = 1) {
  if (spec.nx < 2 || spec.np < 2 || !(spec.x_max > spec.x_min) || !(spec.p_max > spec.p_min)) {
    throw ParameterError("wigner: degenerate grid");
  }
  const int d = static_cast<int>(rho.rows());
  const double reach = std::max({std::abs(spec.x_min), std::abs(spec.x_max), std::abs(spec.p_min),
                                 std::abs(spec.p_max)});
  if (fock::coherent_support(reach) > 2.0 * d) {
    warn("wigner: grid reaches |alpha| = " + std::to_string(reach) +
         ", well beyond the state truncation dim " + std::to_string(d));
  }
  WignerGrid grid{spec, std::vector<double>(static_cast<std::size_t>(spec.nx) * spec.np)};
  auto rows = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      for (int j = 0; j < spec.np; ++j) {
        grid.values[static_cast<std::size_t>(i) * spec.np + j] = wigner_value(rho, cplx(spec.x(i), spec.p(j)));
      }
    }
  };
  const int workers = std::clamp(threads, 1, spec.nx);
  if (workers == 1) {
    rows(0, spec.nx);
  } else {
    std::vector<std::jthread> pool;
    const int chunk = (spec.nx + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int b = w * chunk;
      const int e = std::min(spec.nx, b + chunk);
      if (b < e) pool.emplace_back(rows, b, e);
    }
  }
  return grid;
}

inline WignerGrid wigner(const fock::DensityMatrix& rho, const WignerGridSpec& spec, int threads = 1) {
  if (rho.space().num_modes() != 1) throw DimensionError("wigner: single-mode state expected");
  return wigner(rho.matrix(), spec, threads);
}

// ---------------------------------------------------------------------------
// Decohering cat approximation

/// N(t)^{-1} { |b><b| + |-b><-b| + e^{-(1+2n)g(t-t0)} (|b><-b| + |-b><b|) },
/// N(t) = 2 [1 + e^{-2|b|^2} e^{-(1+2n) g (t - t0)}].
inline fock::DensityMatrix rho_app(double t, double t0, cplx beta, double n_bar, double gamma_m, int dim) {
  if (t < t0) throw ParameterError("rho_app: t < t0");
  const double c = std::exp(-(1.0 + 2.0 * n_bar) * gamma_m * (t - t0));
  const double norm = 2.0 * (1.0 + std::exp(-2.0 * std::norm(beta)) * c);
  const fock::Ket plus = fock::coherent(beta, dim);
  const fock::Ket minus = fock::coherent(-beta, dim);
  const auto& u = plus.amplitudes();
  const auto& v = minus.amplitudes();
  Matrix m = u * u.adjoint() + v * v.adjoint() + c * (u * v.adjoint() + v * u.adjoint());
  m /= norm;
  return fock::DensityMatrix(fock::HilbertSpace::single(dim), std::move(m), false);
}

// ---------------------------------------------------------------------------
// Non-Gaussianity witness

/// (2/pi) exp[-2 n (n + 1)]
inline double gaussian_bound(double mean_n) { return kTwoOverPi * std::exp(-2.0 * mean_n * (mean_n + 1.0)); }

/// NG = W[E(rho)](0) - (2/pi) exp[-2<n_E>(<n_E>+1)], E(rho) = D(a)S(s) rho S(s)^+ D(a)^+.
/// E(rho) is formed explicitly in a space enlarged by `margin` levels.
inline double ng_witness(const Matrix& rho, cplx alpha, cplx s, int margin = 24) {
  const int d = static_cast<int>(rho.rows());
  const int big = d + margin;
  Matrix r = Matrix::Zero(big, big);
  r.topLeftCorner(d, d) = rho;
  const Matrix u = fock::displacement(alpha, big).matrix() * fock::squeeze(s, big).matrix();
  const Matrix e = u * r * u.adjoint();
  const Observables o = observables(e);
  double edge = 0.0;
  for (int n = big - 2; n < big; ++n) edge += e(n, n).real();
  if (edge > 1e-8) {
    warn("ng_witness: transformed state reaches the truncation edge (population " + std::to_string(edge) + ")");
  }
  return kTwoOverPi * o.parity - gaussian_bound(o.mean_phonon);
}

inline double ng_witness(const fock::DensityMatrix& rho, cplx alpha, cplx s, int margin = 24) {
  return ng_witness(rho.matrix(), alpha, s, margin);
}

/// Moments <b>, <b^2>, <b^+ b> of a single-mode state.
struct Moments {
  cplx b{};
  cplx b2{};
  double n = 0.0;
};

inline Moments moments(const Matrix& rho) {
  Moments mo;
  const int d = static_cast<int>(rho.rows());
  for (int n = 1; n < d; ++n) {
    mo.b += std::sqrt(static_cast<double>(n)) * rho(n, n - 1);
    if (n >= 2) mo.b2 += std::sqrt(static_cast<double>(n) * (n - 1)) * rho(n, n - 2);
    mo.n += n * rho(n, n).real();
  }
  return mo;
}

/// Same witness via Gaussian phase-space covariance: W[E(rho)](0) = W[rho](z) with
/// z = -(alpha cosh r - alpha^* e^{i theta} sinh r), s = r e^{i theta}, and <n_E>
/// from the first and second moments of rho. Exact, no enlarged space.
inline double ng_witness_phase_space(const Matrix& rho, const Moments& mo, cplx alpha, cplx s) {
  const double r = std::abs(s);
  const double mu = std::cosh(r);
  const cplx nu = std::polar(std::sinh(r), std::arg(s));
  const cplx z = -(alpha * mu - std::conj(alpha) * nu);
  const cplx mean_n = mu * mu * mo.n + mu * nu * std::conj(mo.b2) + mu * alpha * std::conj(mo.b) +
                      mu * std::conj(nu) * mo.b2 + std::norm(nu) * (mo.n + 1.0) +
                      std::conj(nu) * alpha * mo.b + std::conj(alpha) * mu * mo.b +
                      std::conj(alpha) * nu * std::conj(mo.b) + std::norm(alpha);
  return wigner_value(rho, z) - gaussian_bound(mean_n.real());
}

inline double ng_witness_phase_space(const Matrix& rho, cplx alpha, cplx s) {
  return ng_witness_phase_space(rho, moments(rho), alpha, s);
}

/// Gaussian unitary parameters: displacement alpha and real squeezing s.
struct NgPoint {
  cplx alpha{};
  double s = 0.0;
};

struct NgResult {
  double value = 0.0;
  cplx alpha{};
  double s = 0.0;
  int evaluations = 0;
};

/// The fixed point (0.35i, 0.01), the origin, and copies rotated to the phase
/// of the state's <b^2>.
inline std::vector<NgPoint> default_ng_starts(const Matrix& rho) {
  const Moments mo = moments(rho);
  const double phi = std::abs(mo.b2) > 1e-12 ? 0.5 * std::arg(mo.b2) : 0.0;
  const cplx a0{0.0, 0.35};
  const cplx rot = std::polar(1.0, phi);
  return {
      {cplx{}, 0.0},
      {a0, 0.01},
      {-a0, 0.01},
      {a0 * rot, 0.01 * std::cos(2.0 * phi)},
      {-a0 * rot, 0.01 * std::cos(2.0 * phi)},
  };
}

struct NgSearchOptions {
  double initial_step = 0.05;
  double tolerance = 1e-6;  // simplex diameter
  int max_evaluations = 4000;
};

/// Nelder-Mead over (Re alpha, Im alpha, s) from each start; returns the best.
inline NgResult ng_minimize(const Matrix& rho, const std::vector<NgPoint>& starts,
                            const NgSearchOptions& opt = {}) {
  if (starts.empty()) throw ParameterError("ng_minimize: no starting points");
  const Moments mo = moments(rho);
  using P = std::array<double, 3>;
  int evals = 0;
  auto f = [&](const P& p) {
    ++evals;
    return ng_witness_phase_space(rho, mo, cplx(p[0], p[1]), cplx(p[2], 0.0));
  };

  // Simplex edges along M^k e_i with M (a, b, s) = (b, -a, -s), the action of a
  // quarter-turn phase rotation; using all four k keeps the search equivariant.
  auto descend = [&](const P& start, int k, int budget) {
    std::array<P, 4> x;
    std::array<double, 4> fx;
    x[0] = start;
    for (int i = 1; i < 4; ++i) {
      P e{0.0, 0.0, 0.0};
      e[i - 1] = opt.initial_step;
      for (int r = 0; r < k; ++r) e = {e[1], -e[0], -e[2]};
      x[i] = x[0];
      for (int c = 0; c < 3; ++c) x[i][c] += e[c];
    }
    for (int i = 0; i < 4; ++i) fx[i] = f(x[i]);
    budget += evals;
    while (evals < budget) {
      std::array<int, 4> idx{0, 1, 2, 3};
      std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fx[a] < fx[b]; });
      std::array<P, 4> xs;
      std::array<double, 4> fs;
      for (int i = 0; i < 4; ++i) {
        xs[i] = x[idx[i]];
        fs[i] = fx[idx[i]];
      }
      x = xs;
      fx = fs;
      double diam = 0.0;
      for (int i = 1; i < 4; ++i) {
        for (int k = 0; k < 3; ++k) diam = std::max(diam, std::abs(x[i][k] - x[0][k]));
      }
      if (diam < opt.tolerance) break;

      P centroid{0, 0, 0};
      for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) centroid[k] += x[i][k] / 3.0;
      }
      auto along = [&](double t) {
        P p;
        for (int k = 0; k < 3; ++k) p[k] = centroid[k] + t * (x[3][k] - centroid[k]);
        return p;
      };
      const P xr = along(-1.0);
      const double fr = f(xr);
      if (fr < fx[0]) {
        const P xe = along(-2.0);
        const double fe = f(xe);
        if (fe < fr) {
          x[3] = xe;
          fx[3] = fe;
        } else {
          x[3] = xr;
          fx[3] = fr;
        }
      } else if (fr < fx[2]) {
        x[3] = xr;
        fx[3] = fr;
      } else {
        const bool outside = fr < fx[3];
        const P xc = along(outside ? -0.5 : 0.5);
        const double fc = f(xc);
        if (fc < (outside ? fr : fx[3])) {
          x[3] = xc;
          fx[3] = fc;
        } else {
          for (int i = 1; i < 4; ++i) {
            for (int k = 0; k < 3; ++k) x[i][k] = x[0][k] + 0.5 * (x[i][k] - x[0][k]);
            fx[i] = f(x[i]);
          }
        }
      }
    }
    const auto it = std::min_element(fx.begin(), fx.end());
    return std::pair{x[static_cast<std::size_t>(it - fx.begin())], *it};
  };

  // A collapsed simplex can stall short of the minimum; restart it in place
  // until a restart no longer helps.
  NgResult best{std::numeric_limits<double>::infinity(), {}, 0.0, 0};
  for (const auto& st : starts) {
    for (int k = 0; k < 4; ++k) {
      const int budget = evals + opt.max_evaluations;
      auto [xb, fb] = descend({st.alpha.real(), st.alpha.imag(), st.s}, k, opt.max_evaluations);
      while (evals < budget) {
        auto [xn, fn] = descend(xb, k, budget - evals);
        const bool improved = fn < fb - 1e-12;
        if (fn < fb) {
          xb = xn;
          fb = fn;
        }
        if (!improved) break;
      }
      if (fb < best.value) best = {fb, cplx(xb[0], xb[1]), xb[2], 0};
    }
  }
  best.evaluations = evals;
  return best;
}

inline NgResult ng_minimize(const Matrix& rho) { return ng_minimize(rho, default_ng_starts(rho)); }

// ---------------------------------------------------------------------------
// Decay-rate fits

struct FitWindow {
  double begin = 0.0;
  double end = std::numeric_limits<double>::infinity();
};

struct DecoherenceFit {
  double rate = 0.0;       // y ~ amplitude * exp(-rate t)
  double amplitude = 0.0;
  double residual = 0.0;   // RMS of the log-residuals
  FitWindow window;
  int samples = 0;
  std::optional<double> reference_rate;
  /// (rate - reference) / reference, when a reference is given.
  std::optional<double> relative_deviation() const {
    if (!reference_rate || *reference_rate == 0.0) return std::nullopt;
    return (rate - *reference_rate) / *reference_rate;
  }
};

/// Log-linear least squares on the samples inside the window.
inline DecoherenceFit fit_exponential_decay(std::span<const double> t, std::span<const double> y,
                                            FitWindow window,
                                            std::optional<double> reference_rate = std::nullopt) {
  if (t.size() != y.size()) throw DimensionError("fit_exponential_decay: size mismatch");
  std::vector<double> ts;
  std::vector<double> ls;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window.begin || t[i] > window.end) continue;
    if (!(y[i] > 0.0)) {
      throw ParameterError("fit_exponential_decay: non-positive sample at t = " + std::to_string(t[i]));
    }
    ts.push_back(t[i]);
    ls.push_back(std::log(y[i]));
  }
  if (ts.size() < 8) {
    throw ParameterError("fit_exponential_decay: " + std::to_string(ts.size()) +
                         " samples in window, need at least 8");
  }
  const double n = static_cast<double>(ts.size());
  double mt = 0.0, ml = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    ml += ls[i];
  }
  mt /= n;
  ml /= n;
  double stt = 0.0, stl = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    stl += (ts[i] - mt) * (ls[i] - ml);
  }
  const double slope = stl / stt;
  const double intercept = ml - slope * mt;
  if (!(slope < 0.0)) throw ParameterError("fit_exponential_decay: non-decaying signal");
  double ss = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = ls[i] - (intercept + slope * ts[i]);
    ss += r * r;
  }
  DecoherenceFit fit;
  fit.rate = -slope;
  fit.amplitude = std::exp(intercept);
  fit.residual = std::sqrt(ss / n);
  fit.window = window;
  fit.samples = static_cast<int>(ts.size());
  fit.reference_rate = reference_rate;
  return fit;
}

enum class DecaySignal { ng, cat_coherence };

/// Fits -NG (column "ng_fixed") or the cat coherence column of a trajectory.
inline DecoherenceFit fit_decoherence_rate(const lindblad::Trajectory& traj, DecaySignal signal,
                                           FitWindow window,
                                           std::optional<double> reference_rate = std::nullopt) {
  std::vector<double> y;
  if (signal == DecaySignal::ng) {
    y = traj.column("ng_fixed");
    for (double& v : y) v = -v;
  } else {
    y = traj.column("cat_coherence");
  }
  return fit_exponential_decay(traj.times, y, window, reference_rate);
}

/// [2/Gamma, min(100/Gamma, 3/gamma_dec)]
inline FitWindow default_fit_window(double gamma, double gamma_dec) {
  return {2.0 / gamma, std::min(100.0 / gamma, 3.0 / gamma_dec)};
}

}  // namespace mechcat::analysis
