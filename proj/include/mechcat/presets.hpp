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

// Named run configurations reproducing the published figures, plus the
// two-phonon cooling run and long non-Gaussianity decay runs.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "mechcat/run_config.hpp"

namespace mechcat::runner {

struct Preset {
  std::string name;
  std::string description;
  RunConfig config;
};

namespace detail {

inline RunConfig base_run(std::string name, double n_bar, InitKind init, double t_max_gamma) {
  RunConfig c;
  c.preset = std::move(name);
  c.params = protocol::paper_params(n_bar);
  c.init.kind = init;
  c.t_max = Duration::g(t_max_gamma);
  c.convergence_check = true;
  return c;
}

inline RunConfig with_snapshots(RunConfig c, std::vector<Duration> snaps) {
  c.snapshots = std::move(snaps);
  return c;
}

inline RunConfig with_ng(RunConfig c) {
  c.columns.ng_min = true;
  c.columns.cat_coherence = true;
  return c;
}

inline std::vector<Preset> build_presets() {
  using D = Duration;
  std::vector<Preset> out;
  auto add = [&](std::string desc, RunConfig c) {
    const std::string name = *c.preset;
    out.push_back({name, std::move(desc), std::move(c)});
  };
  const auto ground = InitKind::ground;
  const auto cooled = InitKind::cooled;

  // Both 0.71/Gamma and 1/Gamma are kept for the first cat snapshot.
  add("Wigner snapshots, ground start, n=100",
      with_snapshots(base_run("fig1", 100, ground, 100), {D::g(0), D::g(0.71), D::g(1), D::g(100)}));
  add("fidelity to the target cat, ground start, n=100",
      with_snapshots(base_run("fig2-ground-n100", 100, ground, 100), {D::g(1), D::g(100)}));
  add("Wigner snapshots, two-phonon cooled start, n=10",
      with_snapshots(base_run("fig3-cooled-n10", 10, cooled, 1000), {D::g(0), D::g(1), D::g(1000)}));
  add("Wigner snapshots, two-phonon cooled start, n=100",
      with_snapshots(base_run("fig4-cooled-n100", 100, cooled, 100), {D::g(0), D::g(1), D::g(100)}));
  add("distance to the decohering cat, ground start, n=100",
      with_snapshots(base_run("fig5a-ground-n100", 100, ground, 100), {D::g(1), D::g(100)}));
  add("distance to the decohering cat, cooled start, n=10",
      with_snapshots(base_run("fig5b-cooled-n10", 10, cooled, 100), {D::g(1), D::g(100)}));
  add("distance to the decohering cat, cooled start, n=100",
      with_snapshots(base_run("fig5c-cooled-n100", 100, cooled, 100), {D::g(1), D::g(100)}));
  add("fidelity to the target cat, cooled start, n=10",
      with_snapshots(base_run("fig6a-cooled-n10", 10, cooled, 100), {D::g(1), D::g(100)}));
  add("fidelity to the target cat, cooled start, n=100",
      with_snapshots(base_run("fig6b-cooled-n100", 100, cooled, 100), {D::g(1), D::g(100)}));
  add("non-Gaussianity decay, ground start, n=100",
      with_ng(with_snapshots(base_run("fig7a-ground-n100", 100, ground, 100), {D::g(1), D::g(100)})));
  add("non-Gaussianity decay, cooled start, n=10",
      with_ng(with_snapshots(base_run("fig7b-cooled-n10", 10, cooled, 1000), {D::g(1), D::g(1000)})));
  add("non-Gaussianity decay, cooled start, n=100",
      with_ng(with_snapshots(base_run("fig7c-cooled-n100", 100, cooled, 100), {D::g(1), D::g(100)})));

  {
    // E1 = 0 turns the weak tone off, so beta = 0 and the jump is b^2.
    RunConfig c = base_run("cooling-n10", 10, InitKind::thermal, 0.0);
    c.params.E1 = 0.0;
    c.dims.mech = 80;
    c.t_max = D::s(3.0);
    c.samples = 301;
    c.columns.rho11 = true;
    c.snapshots = {D::s(0.0), D::s(3.0)};
    c.grid = {-4.0, 4.0, 161, -4.0, 4.0, 161};
    add("two-phonon cooling from a thermal state, n=10, E1=0", std::move(c));
  }
  add("non-Gaussianity and coherence decay, ground start, n=10",
      with_ng(with_snapshots(base_run("ng-decay-n10", 10, ground, 1000), {D::g(1), D::g(1000)})));
  add("non-Gaussianity and coherence decay, ground start, n=100",
      with_ng(with_snapshots(base_run("ng-decay-n100", 100, ground, 100), {D::g(1), D::g(100)})));
  return out;
}

}  // namespace detail

inline const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = detail::build_presets();
  return all;
}

inline std::optional<RunConfig> find_preset(const std::string& name) {
  const auto& all = presets();
  const auto it = std::find_if(all.begin(), all.end(), [&](const Preset& p) { return p.name == name; });
  if (it == all.end()) return std::nullopt;
  return it->config;
}

}  // namespace mechcat::runner
