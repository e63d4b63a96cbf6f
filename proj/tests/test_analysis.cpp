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

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mechcat/analysis.hpp"
#include "mechcat/fock.hpp"
#include "mechcat/lindblad.hpp"
#include "mechcat/protocol.hpp"

using namespace mechcat;
using namespace mechcat::analysis;
using mechcat::fock::cplx;
using mechcat::fock::Matrix;

namespace {

Matrix pure(const fock::Ket& k) { return fock::DensityMatrix(k).matrix(); }

Matrix cat(double beta_abs, int dim) { return pure(fock::cat_even(cplx(beta_abs, 0.0), dim)); }

// (2/pi) Tr[rho D P D^+] with D from the matrix exponential in an enlarged space.
double wigner_by_expm(const Matrix& rho, cplx alpha, int margin = 60) {
  const int d = static_cast<int>(rho.rows());
  const int big = d + margin;
  Matrix r = Matrix::Zero(big, big);
  r.topLeftCorner(d, d) = rho;
  const Matrix disp = fock::displacement(alpha, big).matrix();
  const Matrix op = disp * fock::parity(big).matrix() * disp.adjoint();
  return 2.0 / std::numbers::pi * fock::trace_product(op, r).real();
}

Matrix cat_at_one_over_gamma(double& gamma) {
  const auto d = protocol::derive_params(protocol::paper_params(100.0));
  gamma = d.Gamma;
  const auto m = protocol::build_reduced_model(d, 40);
  const std::vector<double> t{0.0, 1.0 / d.Gamma};
  lindblad::IntegratorConfig cfg;
  cfg.snapshot_times = {t.back()};
  const auto traj = lindblad::evolve(m, protocol::initial_state(protocol::Ground{}, 40), t, cfg);
  return traj.snapshots.back().state.matrix();
}

}  // namespace

TEST(Fidelity, Examples) {
  const Matrix c = cat(2.36, 40);
  EXPECT_NEAR(hs_fidelity(c, c), 1.0, 1e-15);
  EXPECT_EQ(hs_fidelity(pure(fock::fock_ket(0, 4)), pure(fock::fock_ket(1, 4))), 0.0);
  EXPECT_NEAR(distance(c, c), 0.0, 1e-15);
  EXPECT_EQ(distance(pure(fock::fock_ket(0, 4)), pure(fock::fock_ket(1, 4))), 1.0);
}

TEST(Fidelity, CatAgainstMixture) {
  const double b = 2.36;
  const Matrix c = cat(b, 40);
  const Matrix u = pure(fock::coherent(cplx(b, 0.0), 40));
  const Matrix v = pure(fock::coherent(cplx(-b, 0.0), 40));
  const Matrix mix = 0.5 * (u + v);
  const double x = std::exp(-2.0 * b * b);
  EXPECT_NEAR(hs_fidelity(c, mix), (1.0 + x) / std::sqrt(2.0 * (1.0 + x * x)), 1e-10);
  EXPECT_NEAR(hs_fidelity(c, mix), 1.0 / std::sqrt(2.0), 1e-4);
}

TEST(Fidelity, SymmetricAndBounded) {
  const Matrix a = protocol::thermal_state(0.7, 20).matrix();
  const Matrix b = pure(fock::coherent(cplx(0.4, -0.9), 20));
  const double f = hs_fidelity(a, b);
  EXPECT_NEAR(f, hs_fidelity(b, a), 1e-12);
  EXPECT_GE(f, 0.0);
  EXPECT_LE(f, 1.0);
}

TEST(Fidelity, Errors) {
  EXPECT_THROW(hs_fidelity(Matrix::Zero(3, 3), cat(0.5, 3)), InvalidStateError);
  EXPECT_THROW(hs_fidelity(cat(0.5, 4), cat(0.5, 3)), DimensionError);
}

TEST(Observables, Examples) {
  const auto v = observables(pure(fock::fock_ket(0, 5)));
  EXPECT_EQ(v.mean_phonon, 0.0);
  EXPECT_EQ(v.purity, 1.0);
  EXPECT_EQ(v.parity, 1.0);
  const auto c = observables(protocol::initial_state(protocol::TwoPhononCooled{100.0}, 40).matrix());
  EXPECT_NEAR(c.mean_phonon, 0.2494, 1e-4);
  const auto th = observables(protocol::thermal_state(0.5, 60).matrix());
  EXPECT_NEAR(th.mean_phonon, 0.5, 1e-9);
  EXPECT_GT(th.purity, 0.0);
  EXPECT_LT(th.purity, 1.0);
}

TEST(Wigner, OriginValues) {
  EXPECT_NEAR(wigner_at_origin(pure(fock::fock_ket(0, 10))), 2.0 / std::numbers::pi, 1e-15);
  for (double b : {0.3, 1.0, 2.36}) {
    EXPECT_NEAR(wigner_at_origin(cat(b, 40)), 2.0 / std::numbers::pi, 1e-12) << b;
  }
  EXPECT_NEAR(wigner_value(pure(fock::fock_ket(0, 10)), cplx{}), 2.0 / std::numbers::pi, 1e-15);
}

TEST(Wigner, CoherentGaussian) {
  const cplx g(1.0, 0.5);
  const Matrix rho = pure(fock::coherent(g, 40));
  EXPECT_NEAR(wigner_value(rho, g), 2.0 / std::numbers::pi, 1e-6);
  for (cplx d : {cplx(0.3, 0.0), cplx(-0.2, 0.7), cplx(1.1, -0.4)}) {
    EXPECT_NEAR(wigner_value(rho, g + d), 2.0 / std::numbers::pi * std::exp(-2.0 * std::norm(d)), 1e-6);
  }
}

TEST(Wigner, LaguerreMatchesDisplacedParity) {
  const Matrix rho = 0.6 * cat(2.36, 30) + 0.4 * protocol::thermal_state(0.3, 30).matrix();
  for (cplx a : {cplx(0.0, 0.0), cplx(0.0, 0.35), cplx(1.3, -0.8), cplx(-2.4, 0.1), cplx(3.5, 2.0)}) {
    EXPECT_NEAR(wigner_value(rho, a), wigner_by_expm(rho, a), 1e-10) << a;
  }
}

TEST(Wigner, GridNormalizationAndOrigin) {
  const Matrix c = cat(2.36, 40);
  const WignerGridSpec spec;
  const auto grid = wigner(c, spec, 2);
  EXPECT_NEAR(grid.normalization(), 1.0, 1e-3);
  EXPECT_NEAR(grid.at(100, 100), wigner_at_origin(c), 1e-6);
  EXPECT_LT(grid.min(), -0.3);
  const auto serial = wigner(c, spec, 1);
  EXPECT_EQ(grid.values, serial.values);
}

TEST(Wigner, DegenerateGrid) {
  WignerGridSpec spec;
  spec.nx = 1;
  EXPECT_THROW(wigner(cat(1.0, 10), spec), ParameterError);
}

TEST(RhoApp, Limits) {
  const cplx b(2.36, 0.0);
  const auto at0 = rho_app(0.3, 0.3, b, 100.0, 0.1, 40);
  EXPECT_LT((at0.matrix() - cat(2.36, 40)).cwiseAbs().maxCoeff(), 1e-12);
  const auto late = rho_app(1e4, 0.0, b, 100.0, 0.1, 40);
  const Matrix mix = 0.5 * (pure(fock::coherent(b, 40)) + pure(fock::coherent(-b, 40)));
  EXPECT_LT((late.matrix() - mix).cwiseAbs().maxCoeff(), 1e-12);
  for (double t : {0.0, 0.01, 0.1, 1.0}) {
    EXPECT_NEAR(rho_app(t, 0.0, b, 100.0, 0.1, 40).matrix().trace().real(), 1.0, 1e-10);
  }
  EXPECT_THROW(rho_app(0.1, 0.2, b, 100.0, 0.1, 40), ParameterError);
}

TEST(RhoApp, CoherenceDecaysAtQuotedRate) {
  const cplx b(3.0, 0.0);
  const double n_bar = 10.0, gamma_m = 0.1;
  lindblad::Trajectory traj;
  traj.columns = {"cat_coherence"};
  for (int i = 0; i <= 40; ++i) {
    const double t = 1.5 * i / 40.0;
    traj.times.push_back(t);
    traj.records.push_back({cat_coherence(rho_app(t, 0.0, b, n_bar, gamma_m, 50).matrix(), b)});
  }
  const auto fit = fit_decoherence_rate(traj, DecaySignal::cat_coherence, {}, (1.0 + 2.0 * n_bar) * gamma_m);
  EXPECT_NEAR(*fit.relative_deviation(), 0.0, 1e-6);
}

TEST(Fit, ExactExponential) {
  std::vector<double> t, y;
  for (int i = 0; i < 20; ++i) {
    t.push_back(0.1 * i);
    y.push_back(3.0 * std::exp(-1.7 * t.back()));
  }
  const auto fit = fit_exponential_decay(t, y, {}, 2.0);
  EXPECT_NEAR(fit.rate, 1.7, 1e-10);
  EXPECT_NEAR(fit.amplitude, 3.0, 1e-10);
  EXPECT_NEAR(*fit.relative_deviation(), -0.15, 1e-10);
  EXPECT_EQ(fit.samples, 20);
  const auto part = fit_exponential_decay(t, y, {0.5, 1.5});
  EXPECT_EQ(part.samples, 11);
  EXPECT_NEAR(part.rate, 1.7, 1e-10);
}

TEST(Fit, Errors) {
  std::vector<double> t, y;
  for (int i = 0; i < 20; ++i) {
    t.push_back(i);
    y.push_back(std::exp(0.1 * i));
  }
  EXPECT_THROW(fit_exponential_decay(t, y, {}), ParameterError);
  EXPECT_THROW(fit_exponential_decay(t, y, {0.0, 6.5}), ParameterError);  // 7 samples
  y[3] = -1.0;
  EXPECT_THROW(fit_exponential_decay(t, y, {}), ParameterError);
}

TEST(Fit, DefaultWindow) {
  const auto w = default_fit_window(1000.0, 20.0);
  EXPECT_DOUBLE_EQ(w.begin, 2e-3);
  EXPECT_DOUBLE_EQ(w.end, 0.1);
  EXPECT_DOUBLE_EQ(default_fit_window(1000.0, 300.0).end, 0.01);
}

TEST(Ng, TrivialGaussianZeros) {
  const Matrix vac = pure(fock::fock_ket(0, 30));
  EXPECT_NEAR(ng_witness(vac, cplx{}, cplx{}), 0.0, 1e-15);
  const cplx g(0.8, -0.6);
  const Matrix coh = pure(fock::coherent(g, 30));
  EXPECT_NEAR(ng_witness(coh, -g, cplx{}), 0.0, 1e-12);
  EXPECT_NEAR(ng_witness_phase_space(coh, -g, cplx{}), 0.0, 1e-12);
}

TEST(Ng, PhaseSpaceRouteMatchesDirect) {
  const Matrix rho = 0.7 * cat(2.36, 40) + 0.3 * protocol::thermal_state(0.2, 40).matrix();
  for (auto [a, s] : std::vector<std::pair<cplx, cplx>>{
           {cplx(0.0, 0.35), cplx(0.01, 0.0)},
           {cplx(0.2, -0.1), cplx(-0.3, 0.0)},
           {cplx(-0.5, 0.4), cplx(0.2, 0.1)},
           {cplx(0.0, 0.0), cplx(0.0, 0.0)}}) {
    EXPECT_NEAR(ng_witness_phase_space(rho, a, s), ng_witness(rho, a, s, 40), 1e-9) << a << " " << s;
  }
}

TEST(Ng, CatAfterOneOverGammaIsNonGaussian) {
  double gamma = 0.0;
  const Matrix rho = cat_at_one_over_gamma(gamma);
  EXPECT_LT(ng_witness(rho, cplx(0.0, 0.35), cplx(0.01, 0.0)), 0.0);
  EXPECT_LT(ng_minimize(rho).value, 0.0);
}

TEST(NgMinimize, VacuumMinimumAtOrigin) {
  const Matrix vac = pure(fock::fock_ket(0, 30));
  const auto r = ng_minimize(vac);
  EXPECT_NEAR(r.value, 0.0, 1e-6);
  // NG vanishes along a curve of Gaussian maps through the origin.
  EXPECT_NEAR(ng_witness(vac, r.alpha, r.s), 0.0, 1e-6);
  const auto o = ng_minimize(vac, {{cplx{}, 0.0}});
  EXPECT_LT(std::abs(o.alpha), 1e-6);
  EXPECT_LT(std::abs(o.s), 1e-6);
}

TEST(NgMinimize, GaussianFamilyNeverCertified) {
  std::vector<Matrix> states{pure(fock::fock_ket(0, 60)), pure(fock::coherent(cplx(1.2, 0.4), 60))};
  for (double s : {0.2, -0.5, 0.5}) {
    states.push_back(pure(fock::Ket(fock::HilbertSpace::single(60), fock::squeeze(cplx(s, 0.0), 60).matrix() * fock::fock_ket(0, 60).amplitudes())));
  }
  for (const auto& rho : states) EXPECT_GE(ng_minimize(rho).value, -1e-6);
}

TEST(NgMinimize, NoWorseThanFixedPoint) {
  const Matrix c = cat(2.36, 40);
  for (double t : {0.0, 0.002, 0.01}) {
    const Matrix rho = rho_app(t, 0.0, cplx(2.36, 0.0), 100.0, 0.1, 40).matrix();
    const double fixed = ng_witness_phase_space(rho, cplx(0.0, 0.35), cplx(0.01, 0.0));
    const auto best = ng_minimize(rho, default_ng_starts(rho));
    EXPECT_LE(best.value, fixed + 1e-9) << t;
  }
  EXPECT_LT(ng_minimize(c).value, 0.0);
  EXPECT_THROW(ng_minimize(c, {}), ParameterError);
}

TEST(NgMinimize, RotationInvariance) {
  const int d = 40;
  const Matrix rho = 0.8 * cat(2.0, d) + 0.2 * pure(fock::coherent(cplx(0.3, 0.2), d));
  const std::vector<NgPoint> starts{{cplx{}, 0.0}, {cplx(0.0, 0.35), 0.01}, {cplx(0.1, -0.2), -0.05}};
  const double base = ng_minimize(rho, starts).value;
  // R = exp(-i phi n) maps (alpha, s) to (alpha e^{-i phi}, s e^{-2 i phi}); real s needs phi in {pi/2, pi}.
  for (double phi : {std::numbers::pi / 2.0, std::numbers::pi}) {
    Matrix r(d, d);
    for (int m = 0; m < d; ++m) {
      for (int n = 0; n < d; ++n) r(m, n) = rho(m, n) * std::polar(1.0, -phi * (m - n));
    }
    std::vector<NgPoint> rotated;
    for (const auto& p : starts) {
      rotated.push_back({p.alpha * std::polar(1.0, -phi), p.s * std::cos(2.0 * phi)});
    }
    EXPECT_NEAR(ng_minimize(r, rotated).value, base, 1e-6) << phi;
  }
}

TEST(NgMinimize, SufficientConditionImpliesCertificate) {
  const cplx b(2.36, 0.0);
  int checked = 0;
  for (double t : {0.0, 0.001, 0.003, 0.01, 0.03}) {
    const Matrix rho = rho_app(t, 0.0, b, 100.0, 0.1, 40).matrix();
    const auto o = observables(rho);
    EXPECT_NEAR(ng_witness_phase_space(rho, cplx{}, cplx{}),
                wigner_at_origin(rho) - gaussian_bound(o.mean_phonon), 1e-12);
    if (wigner_at_origin(rho) < gaussian_bound(o.mean_phonon)) {
      ++checked;
      EXPECT_LT(ng_minimize(rho).value, 0.0) << t;
    }
  }
  const Matrix odd = pure(fock::fock_ket(1, 20));
  ASSERT_LT(wigner_at_origin(odd), gaussian_bound(1.0));
  EXPECT_LT(ng_minimize(odd).value, 0.0);
  EXPECT_GE(checked, 0);
}

TEST(CatCoherence, Value) {
  const cplx b(3.0, 0.0);
  const double x = std::exp(-2.0 * 9.0);
  EXPECT_NEAR(cat_coherence(cat(3.0, 50), b), 0.5 * std::pow(1.0 + x, 2) / (1.0 + x) , 1e-9);
  const Matrix mix = 0.5 * (pure(fock::coherent(b, 50)) + pure(fock::coherent(-b, 50)));
  EXPECT_LT(cat_coherence(mix, b), 1e-7);
}
