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

// Generates the even cat from the mechanical ground state with the reduced
// master equation and prints the fidelity, parity and non-Gaussianity over
// the first few 1/Gamma.

#include <cstdio>
#include <vector>

#include "mechcat/mechcat.hpp"

using namespace mechcat;

int main() {
  const auto d = protocol::derive_params(protocol::paper_params(100.0));
  const int dim = 40;
  const auto model = protocol::build_reduced_model(d, dim);
  const auto rho0 = protocol::initial_state(protocol::Ground{}, dim);
  const auto target = protocol::target_state(d.beta, dim);

  std::vector<double> times;
  for (int i = 0; i <= 12; ++i) times.push_back(0.25 * i / d.Gamma);

  const std::vector<lindblad::Observer> obs{
      {"F", [&](double, const fock::Matrix& r) { return analysis::hs_fidelity(target.matrix(), r); }},
      {"parity", [](double, const fock::Matrix& r) { return analysis::observables(r).parity; }},
      {"NG", [](double, const fock::Matrix& r) { return analysis::ng_witness_phase_space(r, {0.0, 0.35}, 0.01); }},
  };
  const auto traj = lindblad::evolve(model, rho0, times, {}, obs);

  std::printf("Gamma = %.1f 1/s, beta = %.4f%+.4fi, gamma_dec = %.1f 1/s\n", d.Gamma, d.beta.real(),
              d.beta.imag(), d.gamma_dec());
  std::printf("%10s %10s %10s %10s\n", "t*Gamma", "F", "parity", "NG");
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const auto& r = traj.records[i];
    std::printf("%10.2f %10.6f %10.6f %10.6f\n", traj.times[i] * d.Gamma, r[0], r[1], r[2]);
  }
}
