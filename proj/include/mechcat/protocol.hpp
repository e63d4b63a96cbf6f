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

// Experimental parameters -> engineered-reservoir quantities, and the two
// master-equation models (cavity + mechanics, and mechanics alone after the
// cavity fluctuations are eliminated).

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mechcat/errors.hpp"
#include "mechcat/fock.hpp"
#include "mechcat/lindblad.hpp"

namespace mechcat::protocol {

using fock::cplx;

inline constexpr double kHbar = 1.054571817e-34;     // J s
inline constexpr double kBoltzmann = 1.380649e-23;   // J/K
inline constexpr double kPi = 3.14159265358979323846;

/// Ratio used to decide that a "much greater than" condition holds.
inline constexpr double kValidityRatio = 5.0;

/// Inputs in SI units; every frequency and rate in rad/s.
struct PhysicalParams {
  double omega_m = 0.0;
  double Q_m = 0.0;
  std::optional<double> mass;        // kg
  std::optional<double> g2;          // quadratic coupling
  std::optional<double> theta;       // transverse overlap
  std::optional<double> d2wc_dz2;    // rad/s/m^2
  double omega_L = 0.0;
  double P0 = 0.0;                   // W
  std::optional<double> P1;          // W
  std::optional<double> E1;          // overrides the P1 formula when set
  double kappa_T = 0.0;
  double kappa_0 = 0.0;
  std::optional<double> temperature; // K
  std::optional<double> n_bar;       // overrides the temperature when set
};

/// Values quoted for the membrane-in-the-middle setup (rad/s reading of the
/// quoted frequencies).
inline PhysicalParams paper_params(double n_bar = 100.0) {
  PhysicalParams p;
  p.omega_m = 1e7;
  p.Q_m = 1e8;
  p.mass = 1e-12;
  p.g2 = 5.0;
  p.d2wc_dz2 = 2.0 * kPi * 20e9 / 1e-18;
  p.omega_L = 1.77e15;
  p.P0 = 40e-3;
  p.E1 = 1e5;
  p.kappa_T = 1e5;
  p.kappa_0 = 5e4;
  p.n_bar = n_bar;
  return p;
}

struct SelfConsistent {
  double damping = 0.5;
  int max_iterations = 200;
  double tolerance = 1e-9;
};
struct FixedDetuning {
  double delta0 = 0.0;
};
/// Pins |alpha_s| to the quoted intracavity amplitude; the phase still
/// follows E0/(kappa_T + i Delta0) with Delta0 = 2 omega_m_tilde.
struct PaperMode {
  double alpha_s_abs = 3.45e3;
};
using DerivationMode = std::variant<SelfConsistent, FixedDetuning, PaperMode>;

struct DerivedParams {
  double E0 = 0.0;
  double E1 = 0.0;
  double Delta0 = 0.0;
  double Omega = 0.0;
  cplx alpha_s{};
  double omega_m_tilde = 0.0;
  double Gamma = 0.0;
  cplx beta{};
  double n_bar = 0.0;
  double gamma_m = 0.0;
  double omega_c = 0.0;
  double g2 = 0.0;
  double kappa_T = 0.0;
  std::vector<std::string> warnings;

  /// 2 gamma_m |beta|^2 (2 n_bar + 1)
  double gamma_dec() const { return 2.0 * gamma_m * std::norm(beta) * (2.0 * n_bar + 1.0); }
};

inline double thermal_occupation(double omega, double temperature) {
  if (!(temperature > 0.0)) return 0.0;
  return 1.0 / std::expm1(kHbar * omega / (kBoltzmann * temperature));
}

/// Theta (d^2 omega_c / dz^2) hbar / (2 m omega_m)
inline double g2_from_geometry(double theta, double d2wc_dz2, double mass, double omega_m) {
  if (theta < 0.0 || !(d2wc_dz2 > 0.0) || !(mass > 0.0) || !(omega_m > 0.0)) {
    throw ParameterError("g2_from_geometry: inputs must be positive");
  }
  return theta * d2wc_dz2 * kHbar / (2.0 * mass * omega_m);
}

/// Overlap Theta that reproduces a given g2 from the same geometry.
inline double implied_theta(double g2, double d2wc_dz2, double mass, double omega_m) {
  return g2 / g2_from_geometry(1.0, d2wc_dz2, mass, omega_m);
}

/// sqrt(2 P kappa_0 / (hbar omega))
inline double drive_amplitude(double power, double kappa_0, double omega) {
  return std::sqrt(2.0 * power * kappa_0 / (kHbar * omega));
}

namespace detail {

inline void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ParameterError(std::string("derive_params: ") + name + " must be positive");
  }
}

inline void check_ratio(std::vector<std::string>& out, double ratio, const std::string& what) {
  if (!(ratio >= kValidityRatio)) {
    out.push_back(what + " (ratio " + std::to_string(ratio) + " < " +
                  std::to_string(kValidityRatio) + ")");
  }
}

}  // namespace detail

/// Validity conditions of the engineered reservoir; returns one message per violation.
inline std::vector<std::string> validity_warnings(const DerivedParams& d) {
  std::vector<std::string> w;
  const double coupling = d.g2 * std::abs(d.alpha_s);
  detail::check_ratio(w, std::abs(d.alpha_s), "|alpha_s| >> 1 violated");
  if (coupling > 0.0) {
    detail::check_ratio(w, d.omega_m_tilde / coupling, "RWA condition g2|alpha_s| << omega_m_tilde violated");
    detail::check_ratio(w, d.kappa_T / coupling, "bad-cavity condition kappa_T >> g2|alpha_s| violated");
  }
  const double thermal = d.gamma_m * d.n_bar;
  if (thermal > 0.0) {
    detail::check_ratio(w, d.Gamma / thermal, "Gamma >> gamma_m n_bar violated");
  }
  return w;
}

inline DerivedParams derive_params(const PhysicalParams& p, const DerivationMode& mode = PaperMode{}) {
  detail::require_positive(p.omega_m, "omega_m");
  detail::require_positive(p.Q_m, "Q_m");
  detail::require_positive(p.omega_L, "omega_L");
  detail::require_positive(p.P0, "P0");
  detail::require_positive(p.kappa_T, "kappa_T");
  detail::require_positive(p.kappa_0, "kappa_0");
  if (p.kappa_0 > p.kappa_T) throw ParameterError("derive_params: kappa_0 > kappa_T");

  DerivedParams d;
  d.gamma_m = p.omega_m / p.Q_m;
  d.kappa_T = p.kappa_T;

  if (p.n_bar) {
    if (*p.n_bar < 0.0) throw ParameterError("derive_params: n_bar must be >= 0");
    d.n_bar = *p.n_bar;
  } else if (p.temperature) {
    d.n_bar = thermal_occupation(p.omega_m, *p.temperature);
  } else {
    throw ParameterError("derive_params: neither n_bar nor temperature given");
  }

  if (p.g2) {
    d.g2 = *p.g2;
  } else if (p.theta && p.d2wc_dz2 && p.mass) {
    d.g2 = g2_from_geometry(*p.theta, *p.d2wc_dz2, *p.mass, p.omega_m);
  } else {
    throw ParameterError("derive_params: g2 missing and no geometry (theta, d2wc_dz2, mass) given");
  }
  detail::require_positive(d.g2, "g2");

  d.E0 = drive_amplitude(p.P0, p.kappa_0, p.omega_L);
  const double g2 = d.g2;
  const double kt = p.kappa_T;

  if (const auto* sc = std::get_if<SelfConsistent>(&mode)) {
    // Delta0 = 2 (omega_m + 2 g2 E0^2 / (kappa_T^2 + Delta0^2)), damped iteration.
    auto map = [&](double delta) {
      return 2.0 * (p.omega_m + 2.0 * g2 * d.E0 * d.E0 / (kt * kt + delta * delta));
    };
    double delta = 2.0 * p.omega_m;
    double residual = 0.0;
    bool converged = false;
    for (int it = 0; it < sc->max_iterations; ++it) {
      const double next = (1.0 - sc->damping) * map(delta) + sc->damping * delta;
      residual = std::abs(next - delta) / std::abs(next);
      delta = next;
      if (residual <= sc->tolerance) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw ParameterError("derive_params: self-consistent detuning did not converge (last Delta0 = " +
                           std::to_string(delta) + ", relative residual " + std::to_string(residual) + ")");
    }
    d.Delta0 = delta;
    d.alpha_s = d.E0 / cplx(kt, d.Delta0);
    d.omega_m_tilde = p.omega_m + 2.0 * g2 * std::norm(d.alpha_s);
  } else if (const auto* fd = std::get_if<FixedDetuning>(&mode)) {
    d.Delta0 = fd->delta0;
    d.alpha_s = d.E0 / cplx(kt, d.Delta0);
    d.omega_m_tilde = p.omega_m + 2.0 * g2 * std::norm(d.alpha_s);
    if (std::abs(d.Delta0 - 2.0 * d.omega_m_tilde) > 1e-6 * std::abs(d.Delta0)) {
      d.warnings.push_back("resonance condition Delta0 = 2 omega_m_tilde not met (Delta0 = " +
                           std::to_string(d.Delta0) + ", 2 omega_m_tilde = " +
                           std::to_string(2.0 * d.omega_m_tilde) + ")");
    }
  } else {
    const auto& pm = std::get<PaperMode>(mode);
    detail::require_positive(pm.alpha_s_abs, "alpha_s_abs");
    d.omega_m_tilde = p.omega_m + 2.0 * g2 * pm.alpha_s_abs * pm.alpha_s_abs;
    d.Delta0 = 2.0 * d.omega_m_tilde;
    d.alpha_s = std::polar(pm.alpha_s_abs, std::arg(1.0 / cplx(kt, d.Delta0)));
  }
  d.Omega = d.Delta0;
  d.omega_c = p.omega_L + d.Delta0;

  if (p.E1) {
    if (*p.E1 < 0.0) throw ParameterError("derive_params: E1 must be >= 0");
    d.E1 = *p.E1;
  } else if (p.P1) {
    if (*p.P1 < 0.0) throw ParameterError("derive_params: P1 must be >= 0");
    d.E1 = drive_amplitude(*p.P1, p.kappa_0, p.omega_L + d.Omega);
  } else {
    throw ParameterError("derive_params: neither E1 nor P1 given");
  }
  if (p.P1 && *p.P1 >= p.P0) d.warnings.push_back("P1 >= P0: weak-tone assumption violated");

  d.Gamma = g2 * g2 * std::norm(d.alpha_s) / kt;
  d.beta = std::sqrt(d.E1 / (fock::kI * g2 * d.alpha_s));

  for (auto& w : validity_warnings(d)) d.warnings.push_back(std::move(w));
  for (const auto& w : d.warnings) warn(w);
  return d;
}

struct ModelDims {
  int cavity = 4;
  int mech = 40;
};

inline void require_mech_dim(const DerivedParams& d, int mech, const char* what) {
  fock::require_dim(mech, 2, what);
  if (fock::coherent_support(std::abs(d.beta)) > mech) {
    throw DimensionError(std::string(what) + ": mechanical dim " + std::to_string(mech) +
                         " does not hold the support of |beta| = " + std::to_string(std::abs(d.beta)));
  }
}

inline std::vector<lindblad::LindbladTerm> thermal_terms(const DerivedParams& d, const fock::Operator& b) {
  return {
      {0.5 * d.gamma_m * (d.n_bar + 1.0), b, "thermal emission"},
      {0.5 * d.gamma_m * d.n_bar, b.adjoint(), "thermal absorption"},
  };
}

/// Cavity fluctuations (x) mechanics with
///   H_eff = g2 alpha_s^* da (b^+^2 - i E1 / (g2 alpha_s^*)) + h.c.
inline lindblad::LindbladModel build_bipartite_model(const DerivedParams& d, ModelDims dims = {}) {
  fock::require_dim(dims.cavity, 3, "build_bipartite_model (cavity)");
  require_mech_dim(d, dims.mech, "build_bipartite_model");
  const fock::HilbertSpace space({dims.cavity, dims.mech});
  const fock::Operator a = fock::embed(fock::annihilation(dims.cavity), space, 0);
  const fock::Operator b = fock::embed(fock::annihilation(dims.mech), space, 1);
  const fock::Operator bd = b.adjoint();

  const fock::Operator half = (d.g2 * std::conj(d.alpha_s)) * (a * bd * bd) - (fock::kI * d.E1) * a;
  const fock::Operator h = half + half.adjoint();

  std::vector<lindblad::LindbladTerm> terms{{d.kappa_T, a, "cavity decay"}};
  for (auto& t : thermal_terms(d, b)) terms.push_back(std::move(t));
  return lindblad::LindbladModel(h, std::move(terms));
}

/// C = b^2 - beta^2
inline fock::Operator jump_operator(cplx beta, int dim) {
  const fock::Operator b = fock::annihilation(dim);
  return b * b - (beta * beta) * fock::Operator::identity(b.space());
}

/// Mechanics alone: Gamma D(b^2 - beta^2) plus the thermal bath.
inline lindblad::LindbladModel build_reduced_model(const DerivedParams& d, int dim = 40) {
  require_mech_dim(d, dim, "build_reduced_model");
  const fock::HilbertSpace space = fock::HilbertSpace::single(dim);
  std::vector<lindblad::LindbladTerm> terms{{d.Gamma, jump_operator(d.beta, dim), "engineered two-phonon"}};
  for (auto& t : thermal_terms(d, fock::annihilation(dim))) terms.push_back(std::move(t));
  return lindblad::LindbladModel(fock::Operator::zero(space), std::move(terms));
}

struct Ground {};
/// Mixture left by two-phonon cooling: rho11 = 1/(4 + 1/n_bar), rho00 = 1 - rho11.
struct TwoPhononCooled {
  double n_bar = 0.0;
};
struct Thermal {
  double n_bar = 0.0;
};
struct Custom {
  fock::DensityMatrix state;
};
using InitialStateKind = std::variant<Ground, TwoPhononCooled, Thermal, Custom>;

/// Excited-state population of the two-phonon cooled mixture.
inline double two_phonon_cooled_population(double n_bar) {
  if (!(n_bar > 0.0)) return 0.0;
  return 1.0 / (4.0 + 1.0 / n_bar);
}

inline fock::DensityMatrix thermal_state(double n_bar, int dim) {
  fock::require_dim(dim, 1, "thermal_state");
  if (n_bar < 0.0) throw ParameterError("thermal_state: n_bar must be >= 0");
  fock::Matrix m = fock::Matrix::Zero(dim, dim);
  const double q = n_bar / (n_bar + 1.0);
  double p = 1.0 - q;
  double kept = 0.0;
  for (int n = 0; n < dim; ++n) {
    m(n, n) = p;
    kept += p;
    p *= q;
  }
  if (1.0 - kept > 1e-6) {
    warn("thermal_state: truncation at dim " + std::to_string(dim) + " drops " +
         std::to_string(1.0 - kept) + " of the trace for n_bar = " + std::to_string(n_bar));
  }
  m /= kept;
  return fock::DensityMatrix(fock::HilbertSpace::single(dim), std::move(m));
}

inline fock::DensityMatrix initial_state(const InitialStateKind& kind, int dim) {
  fock::require_dim(dim, 2, "initial_state");
  const auto space = fock::HilbertSpace::single(dim);
  return std::visit(
      [&](const auto& k) -> fock::DensityMatrix {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Ground>) {
          return fock::DensityMatrix(fock::fock_ket(0, dim));
        } else if constexpr (std::is_same_v<K, TwoPhononCooled>) {
          const double p1 = two_phonon_cooled_population(k.n_bar);
          fock::Matrix m = fock::Matrix::Zero(dim, dim);
          m(0, 0) = 1.0 - p1;
          m(1, 1) = p1;
          return fock::DensityMatrix(space, std::move(m));
        } else if constexpr (std::is_same_v<K, Thermal>) {
          return thermal_state(k.n_bar, dim);
        } else {
          if (!(k.state.space() == space)) throw DimensionError("initial_state: custom state dim mismatch");
          return k.state;
        }
      },
      kind);
}

/// |0><0| on the cavity (x) the mechanical state.
inline fock::DensityMatrix with_cavity_vacuum(const fock::DensityMatrix& mech, int cavity_dim) {
  return fock::tensor(fock::DensityMatrix(fock::fock_ket(0, cavity_dim)), mech);
}

/// |psi_inf><psi_inf| for the even cat of amplitude beta.
inline fock::DensityMatrix target_state(cplx beta, int dim) {
  return fock::DensityMatrix(fock::cat_even(beta, dim));
}

}  // namespace mechcat::protocol
