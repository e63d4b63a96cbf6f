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

// INI configuration. Sections [run], [params], [output], [analysis]; see the
// README for the key reference. Frequencies in [params] are rad/s unless
// `angular = false`, in which case they are read as Hz and scaled by 2 pi.

#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mechcat/presets.hpp"
#include "mechcat/run_config.hpp"

namespace mechcat::runner {

using Ptree = boost::property_tree::ptree;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: '" + text + "'");
  }
  if (used != t.size() || !std::isfinite(v)) throw ConfigError(key + ": not a number: '" + text + "'");
  return v;
}

inline int parse_int(const std::string& key, const std::string& text) {
  const double v = parse_double(key, text);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key + ": not an integer: '" + text + "'");
  return static_cast<int>(v);
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_double(key, item));
  }
  return out;
}

inline const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> k{
      {"run",
       {"preset", "model", "init", "init_n_bar", "t_max", "t_max_gamma", "samples", "early_samples", "snapshots",
        "snapshots_gamma", "mech_dim", "cavity_dim", "method", "rtol", "atol", "jobs", "convergence_check"}},
      {"params",
       {"base", "angular", "omega_m", "Q_m", "mass", "g2", "theta", "d2wc_dz2", "omega_L", "P0", "P1", "E1",
        "kappa_T", "kappa_0", "temperature", "n_bar", "derivation", "alpha_s_abs", "delta0"}},
      {"output", {"dir", "ng_fixed", "ng_min", "cat_coherence", "rho11", "wigner"}},
      {"analysis",
       {"t0", "t0_gamma", "ng_alpha_re", "ng_alpha_im", "ng_s", "wigner_x_min", "wigner_x_max", "wigner_nx",
        "wigner_p_min", "wigner_p_max", "wigner_np"}},
  };
  return k;
}

inline void check_keys(const Ptree& tree) {
  const auto& known = known_keys();
  for (const auto& [section, body] : tree) {
    const auto it = known.find(section);
    if (it == known.end()) {
      if (body.empty()) throw ConfigError("key '" + section + "' outside of a section");
      throw ConfigError("unknown section [" + section + "]");
    }
    for (const auto& [key, _] : body) {
      if (!it->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
    }
  }
}

class Section {
 public:
  Section(const Ptree& tree, const std::string& name) : name_(name) {
    if (auto child = tree.get_child_optional(name)) node_ = &*child;
  }
  bool empty() const { return node_ == nullptr || node_->empty(); }
  std::optional<std::string> str(const std::string& key) const {
    if (!node_) return std::nullopt;
    auto v = node_->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return trim(*v);
  }
  std::optional<double> num(const std::string& key) const {
    auto s = str(key);
    if (!s) return std::nullopt;
    return parse_double(full(key), *s);
  }
  std::optional<int> integer(const std::string& key) const {
    auto s = str(key);
    if (!s) return std::nullopt;
    return parse_int(full(key), *s);
  }
  std::optional<bool> flag(const std::string& key) const {
    auto s = str(key);
    if (!s) return std::nullopt;
    return parse_bool(full(key), *s);
  }
  std::optional<std::vector<double>> list(const std::string& key) const {
    auto s = str(key);
    if (!s) return std::nullopt;
    return parse_list(full(key), *s);
  }
  std::string full(const std::string& key) const { return name_ + "." + key; }

 private:
  std::string name_;
  const Ptree* node_ = nullptr;
};

inline protocol::PhysicalParams parse_params(const Section& s) {
  const std::string base = s.str("base").value_or("none");
  protocol::PhysicalParams p;
  if (base == "paper") {
    p = protocol::paper_params();
  } else if (base != "none") {
    throw ConfigError("params.base: expected paper or none, got '" + base + "'");
  }
  const bool angular = s.flag("angular").value_or(true);
  const double scale = angular ? 1.0 : 2.0 * protocol::kPi;
  auto freq = [&](const char* key, double& dst) {
    if (auto v = s.num(key)) dst = *v * scale;
  };
  auto freq_opt = [&](const char* key, std::optional<double>& dst) {
    if (auto v = s.num(key)) dst = *v * scale;
  };
  auto plain_opt = [&](const char* key, std::optional<double>& dst) {
    if (auto v = s.num(key)) dst = *v;
  };
  freq("omega_m", p.omega_m);
  if (auto v = s.num("Q_m")) p.Q_m = *v;
  plain_opt("mass", p.mass);
  freq_opt("g2", p.g2);
  plain_opt("theta", p.theta);
  freq_opt("d2wc_dz2", p.d2wc_dz2);
  freq("omega_L", p.omega_L);
  if (auto v = s.num("P0")) p.P0 = *v;
  plain_opt("P1", p.P1);
  freq_opt("E1", p.E1);
  freq("kappa_T", p.kappa_T);
  freq("kappa_0", p.kappa_0);
  plain_opt("temperature", p.temperature);
  plain_opt("n_bar", p.n_bar);
  // An explicit n_bar wins over a temperature; a temperature alone replaces the base n_bar.
  if (s.num("temperature") && !s.num("n_bar")) p.n_bar.reset();
  if (s.num("P1") && !s.num("E1")) p.E1.reset();
  return p;
}

inline protocol::DerivationMode parse_derivation(const Section& s, protocol::DerivationMode current) {
  const bool angular = s.flag("angular").value_or(true);
  const double scale = angular ? 1.0 : 2.0 * protocol::kPi;
  const auto mode = s.str("derivation");
  if (!mode && !s.num("alpha_s_abs") && !s.num("delta0")) return current;
  const std::string m = mode.value_or("paper");
  if (m == "paper") {
    protocol::PaperMode pm;
    if (auto v = s.num("alpha_s_abs")) pm.alpha_s_abs = *v;
    return pm;
  }
  if (m == "self_consistent") return protocol::SelfConsistent{};
  if (m == "fixed_detuning") {
    auto d = s.num("delta0");
    if (!d) throw ConfigError("params.delta0 is required for derivation = fixed_detuning");
    return protocol::FixedDetuning{*d * scale};
  }
  throw ConfigError("params.derivation: expected paper, self_consistent or fixed_detuning, got '" + m + "'");
}

inline std::optional<Duration> parse_duration(const Section& s, const std::string& sec_key,
                                              const std::string& gamma_key) {
  const auto a = s.num(sec_key);
  const auto b = s.num(gamma_key);
  if (a && b) throw ConfigError(s.full(sec_key) + " and " + s.full(gamma_key) + " are mutually exclusive");
  if (a) return Duration::s(*a);
  if (b) return Duration::g(*b);
  return std::nullopt;
}

}  // namespace detail

inline Ptree read_ini_string(const std::string& text) {
  std::istringstream in(text);
  Ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return tree;
}

inline Ptree read_ini_file(const std::filesystem::path& path) {
  Ptree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return tree;
}

/// Builds a RunConfig from an INI tree. A preset supplies the starting point
/// and cannot be combined with a [params] section.
inline RunConfig parse_config(const Ptree& tree) {
  using detail::Section;
  detail::check_keys(tree);
  const Section run(tree, "run");
  const Section params(tree, "params");
  const Section output(tree, "output");
  const Section an(tree, "analysis");

  RunConfig c;
  if (auto name = run.str("preset")) {
    if (!params.empty()) throw ConfigError("run.preset and a [params] section are mutually exclusive");
    auto p = find_preset(*name);
    if (!p) throw ConfigError("unknown preset '" + *name + "'");
    c = *p;
  } else {
    if (params.empty()) throw ConfigError("config needs either run.preset or a [params] section");
    c.params = detail::parse_params(params);
    c.derivation = detail::parse_derivation(params, protocol::PaperMode{});
    c.preset.reset();
  }

  if (auto m = run.str("model")) {
    if (*m == "reduced") {
      c.model = ModelKind::reduced;
    } else if (*m == "bipartite") {
      c.model = ModelKind::bipartite;
    } else {
      throw ConfigError("run.model: expected reduced or bipartite, got '" + *m + "'");
    }
  }
  if (auto k = run.str("init")) {
    if (*k == "ground") {
      c.init.kind = InitKind::ground;
    } else if (*k == "cooled") {
      c.init.kind = InitKind::cooled;
    } else if (*k == "thermal") {
      c.init.kind = InitKind::thermal;
    } else {
      throw ConfigError("run.init: expected ground, cooled or thermal, got '" + *k + "'");
    }
  }
  if (auto v = run.num("init_n_bar")) {
    if (*v < 0.0) throw ConfigError("run.init_n_bar must be >= 0");
    c.init.n_bar = *v;
  }
  if (auto d = detail::parse_duration(run, "t_max", "t_max_gamma")) c.t_max = *d;
  if (auto v = run.integer("samples")) c.samples = *v;
  if (auto v = run.integer("early_samples")) c.early_samples = *v;
  {
    const auto secs = run.list("snapshots");
    const auto gams = run.list("snapshots_gamma");
    if (secs || gams) {
      c.snapshots.clear();
      for (double t : secs.value_or(std::vector<double>{})) c.snapshots.push_back(Duration::s(t));
      for (double t : gams.value_or(std::vector<double>{})) c.snapshots.push_back(Duration::g(t));
    }
  }
  if (auto v = run.integer("mech_dim")) c.dims.mech = *v;
  if (auto v = run.integer("cavity_dim")) c.dims.cavity = *v;
  if (auto m = run.str("method")) {
    if (*m == "auto") {
      c.method = lindblad::Method::automatic;
    } else if (*m == "rk45") {
      c.method = lindblad::Method::rk45;
    } else if (*m == "sdirk4") {
      c.method = lindblad::Method::sdirk4;
    } else {
      throw ConfigError("run.method: expected auto, rk45 or sdirk4, got '" + *m + "'");
    }
  }
  if (auto v = run.num("rtol")) c.rtol = *v;
  if (auto v = run.num("atol")) c.atol = *v;
  if (auto v = run.integer("jobs")) c.jobs = *v;
  if (auto v = run.flag("convergence_check")) c.convergence_check = *v;

  if (auto d = output.str("dir")) c.out_dir = *d;
  if (auto v = output.flag("ng_fixed")) c.columns.ng_fixed = *v;
  if (auto v = output.flag("ng_min")) c.columns.ng_min = *v;
  if (auto v = output.flag("cat_coherence")) c.columns.cat_coherence = *v;
  if (auto v = output.flag("rho11")) c.columns.rho11 = *v;
  if (auto v = output.flag("wigner")) c.wigner = *v;

  if (auto d = detail::parse_duration(an, "t0", "t0_gamma")) c.t0 = *d;
  if (auto v = an.num("ng_alpha_re")) c.ng_alpha.real(*v);
  if (auto v = an.num("ng_alpha_im")) c.ng_alpha.imag(*v);
  if (auto v = an.num("ng_s")) c.ng_s = *v;
  if (auto v = an.num("wigner_x_min")) c.grid.x_min = *v;
  if (auto v = an.num("wigner_x_max")) c.grid.x_max = *v;
  if (auto v = an.integer("wigner_nx")) c.grid.nx = *v;
  if (auto v = an.num("wigner_p_min")) c.grid.p_min = *v;
  if (auto v = an.num("wigner_p_max")) c.grid.p_max = *v;
  if (auto v = an.integer("wigner_np")) c.grid.np = *v;

  validate(c);
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_ini_file(path)); }

}  // namespace mechcat::runner
