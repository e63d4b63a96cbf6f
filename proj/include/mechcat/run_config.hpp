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

// Run configuration shared by the CLI, presets and sweeps. Times are either
// seconds or multiples of 1/Gamma, resolved once the derived parameters exist.

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"
#include "mechcat/analysis.hpp"
#include "mechcat/errors.hpp"
#include "mechcat/lindblad.hpp"
#include "mechcat/protocol.hpp"

namespace mechcat::runner {

using Json = nlohmann::json;
using fock::cplx;

enum class ModelKind { reduced, bipartite };

inline const char* to_string(ModelKind m) { return m == ModelKind::reduced ? "reduced" : "bipartite"; }

struct Duration {
  double value = 0.0;
  bool per_gamma = false;  // value is in units of 1/Gamma

  double seconds(double gamma) const { return per_gamma ? value / gamma : value; }
  static Duration s(double v) { return {v, false}; }
  static Duration g(double v) { return {v, true}; }
};

enum class InitKind { ground, cooled, thermal };

inline const char* to_string(InitKind k) {
  switch (k) {
    case InitKind::ground: return "ground";
    case InitKind::cooled: return "cooled";
    case InitKind::thermal: return "thermal";
  }
  return "?";
}

struct InitSpec {
  InitKind kind = InitKind::ground;
  std::optional<double> n_bar;  // defaults to the bath occupation
};

struct Columns {
  bool ng_fixed = true;
  bool ng_min = false;
  bool cat_coherence = false;
  bool rho11 = false;
};

struct RunConfig {
  std::optional<std::string> preset;
  protocol::PhysicalParams params = protocol::paper_params();
  protocol::DerivationMode derivation = protocol::PaperMode{};
  ModelKind model = ModelKind::reduced;
  InitSpec init;
  protocol::ModelDims dims;
  Duration t_max = Duration::g(100.0);
  int samples = 401;
  int early_samples = 61;  // extra points on [0, min(3/Gamma, t_max)]
  std::vector<Duration> snapshots;
  Columns columns;
  bool wigner = true;
  analysis::WignerGridSpec grid;
  std::optional<Duration> t0;  // start of the decohering-cat comparison; 1/Gamma if unset
  cplx ng_alpha{0.0, 0.35};
  double ng_s = 0.01;
  lindblad::Method method = lindblad::Method::automatic;
  double rtol = 1e-8;
  double atol = 1e-10;
  bool convergence_check = false;
  std::filesystem::path out_dir;
  int jobs = 1;
};

inline void validate(const RunConfig& c) {
  if (!(c.t_max.value > 0.0)) throw ConfigError("t_max must be > 0");
  if (c.samples < 2) throw ConfigError("samples must be >= 2");
  if (c.early_samples < 0) throw ConfigError("early_samples must be >= 0");
  if (c.dims.mech < 2) throw ConfigError("mech_dim must be >= 2");
  if (c.model == ModelKind::bipartite && c.dims.cavity < 3) throw ConfigError("cavity_dim must be >= 3");
  if (c.jobs < 1) throw ConfigError("jobs must be >= 1");
  if (!(c.rtol > 0.0) || !(c.atol > 0.0)) throw ConfigError("tolerances must be > 0");
  if (c.grid.nx < 2 || c.grid.np < 2 || !(c.grid.x_max > c.grid.x_min) || !(c.grid.p_max > c.grid.p_min)) {
    throw ConfigError("invalid wigner grid");
  }
  for (const auto& s : c.snapshots) {
    if (s.value < 0.0) throw ConfigError("snapshot times must be >= 0");
  }
}

namespace detail {

inline Json duration_json(const Duration& d) { return {{"value", d.value}, {"unit", d.per_gamma ? "1/Gamma" : "s"}}; }

template <class T>
Json opt_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace detail

inline Json params_json(const protocol::PhysicalParams& p) {
  using detail::opt_json;
  return {{"omega_m", p.omega_m}, {"Q_m", p.Q_m},         {"mass", opt_json(p.mass)},
          {"g2", opt_json(p.g2)},  {"theta", opt_json(p.theta)}, {"d2wc_dz2", opt_json(p.d2wc_dz2)},
          {"omega_L", p.omega_L},  {"P0", p.P0},           {"P1", opt_json(p.P1)},
          {"E1", opt_json(p.E1)},  {"kappa_T", p.kappa_T}, {"kappa_0", p.kappa_0},
          {"temperature", opt_json(p.temperature)},        {"n_bar", opt_json(p.n_bar)}};
}

inline Json derivation_json(const protocol::DerivationMode& m) {
  return std::visit(
      [](const auto& v) -> Json {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, protocol::PaperMode>) {
          return {{"mode", "paper"}, {"alpha_s_abs", v.alpha_s_abs}};
        } else if constexpr (std::is_same_v<V, protocol::FixedDetuning>) {
          return {{"mode", "fixed_detuning"}, {"delta0", v.delta0}};
        } else {
          return {{"mode", "self_consistent"},
                  {"damping", v.damping},
                  {"max_iterations", v.max_iterations},
                  {"tolerance", v.tolerance}};
        }
      },
      m);
}

/// Everything that affects numeric output. Output location and parallelism
/// are excluded so they do not change the hash.
inline Json canonical_json(const RunConfig& c) {
  Json snaps = Json::array();
  for (const auto& s : c.snapshots) snaps.push_back(detail::duration_json(s));
  return {
      {"preset", detail::opt_json(c.preset)},
      {"params", params_json(c.params)},
      {"derivation", derivation_json(c.derivation)},
      {"model", to_string(c.model)},
      {"init", {{"kind", to_string(c.init.kind)}, {"n_bar", detail::opt_json(c.init.n_bar)}}},
      {"dims", {{"mech", c.dims.mech}, {"cavity", c.dims.cavity}}},
      {"t_max", detail::duration_json(c.t_max)},
      {"samples", c.samples},
      {"early_samples", c.early_samples},
      {"snapshots", snaps},
      {"columns",
       {{"ng_fixed", c.columns.ng_fixed},
        {"ng_min", c.columns.ng_min},
        {"cat_coherence", c.columns.cat_coherence},
        {"rho11", c.columns.rho11}}},
      {"wigner", c.wigner},
      {"grid",
       {{"x_min", c.grid.x_min},
        {"x_max", c.grid.x_max},
        {"nx", c.grid.nx},
        {"p_min", c.grid.p_min},
        {"p_max", c.grid.p_max},
        {"np", c.grid.np}}},
      {"t0", c.t0 ? detail::duration_json(*c.t0) : Json(nullptr)},
      {"ng_point", {{"alpha_re", c.ng_alpha.real()}, {"alpha_im", c.ng_alpha.imag()}, {"s", c.ng_s}}},
      {"integrator",
       {{"method", lindblad::to_string(c.method)}, {"rtol", c.rtol}, {"atol", c.atol}}},
      {"convergence_check", c.convergence_check},
  };
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256: digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

inline std::string config_hash(const RunConfig& c) { return sha256_hex(canonical_json(c).dump()); }

}  // namespace mechcat::runner
