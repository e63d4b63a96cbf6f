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

// Experiment driver: resolves a RunConfig, integrates, evaluates observables
// and writes manifest.json, timeseries.csv, wigner_*.csv and summary.json.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "mechcat/analysis.hpp"
#include "mechcat/config.hpp"
#include "mechcat/errors.hpp"
#include "mechcat/fock.hpp"
#include "mechcat/lindblad.hpp"
#include "mechcat/protocol.hpp"
#include "mechcat/run_config.hpp"
#include "mechcat/version.hpp"

namespace mechcat::runner {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIntegration = 3;
inline constexpr int kExitIo = 4;

/// Maps an exception to the documented exit status.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const IntegrationError*>(&e)) return kExitIntegration;
  if (dynamic_cast<const Error*>(&e)) return kExitConfig;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kExitIo;
  return 1;
}

/// Times and state preparation fixed by the derived parameters.
struct ResolvedRun {
  protocol::DerivedParams derived;
  std::vector<double> times;
  std::vector<double> snapshot_times;
  double t_max = 0.0;
  double t0 = 0.0;
};

namespace detail {

// Merges b into a, snapping values closer than tol onto the existing entry.
inline std::vector<double> merge_times(std::vector<double> a, const std::vector<double>& b, double tol,
                                       std::vector<double>* snapped = nullptr) {
  std::sort(a.begin(), a.end());
  for (double t : b) {
    const auto it = std::lower_bound(a.begin(), a.end(), t - tol);
    if (it != a.end() && std::abs(*it - t) <= tol) {
      if (snapped) snapped->push_back(*it);
      continue;
    }
    a.insert(it, t);
    if (snapped) snapped->push_back(t);
  }
  return a;
}

}  // namespace detail

inline ResolvedRun resolve(const RunConfig& cfg, protocol::DerivedParams derived) {
  validate(cfg);
  ResolvedRun r;
  r.derived = std::move(derived);
  const double g = r.derived.Gamma;
  r.t_max = cfg.t_max.seconds(g);
  if (!(r.t_max > 0.0) || !std::isfinite(r.t_max)) throw ConfigError("t_max resolves to a non-positive time");
  r.t0 = cfg.t0 ? cfg.t0->seconds(g) : 1.0 / g;

  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(cfg.samples + cfg.early_samples));
  for (int i = 0; i < cfg.samples; ++i) grid.push_back(r.t_max * i / (cfg.samples - 1));
  const double tol = 1e-9 * r.t_max;
  if (cfg.early_samples > 1) {
    const double early = std::min(3.0 / g, r.t_max);
    std::vector<double> extra;
    for (int i = 0; i < cfg.early_samples; ++i) extra.push_back(early * i / (cfg.early_samples - 1));
    grid = detail::merge_times(std::move(grid), extra, tol);
  }
  std::vector<double> snaps;
  for (const auto& s : cfg.snapshots) {
    const double t = s.seconds(g);
    if (t > r.t_max * (1.0 + 1e-12)) {
      throw ConfigError(fmt::format("snapshot at {:.6g} s lies beyond t_max = {:.6g} s", t, r.t_max));
    }
    snaps.push_back(std::min(t, r.t_max));
  }
  r.times = detail::merge_times(std::move(grid), snaps, tol, &r.snapshot_times);
  std::sort(r.snapshot_times.begin(), r.snapshot_times.end());
  r.snapshot_times.erase(std::unique(r.snapshot_times.begin(), r.snapshot_times.end()), r.snapshot_times.end());
  return r;
}

inline double init_n_bar(const RunConfig& cfg, const protocol::DerivedParams& d) {
  return cfg.init.n_bar.value_or(d.n_bar);
}

inline fock::DensityMatrix prepare_initial_state(const RunConfig& cfg, const protocol::DerivedParams& d) {
  protocol::InitialStateKind kind = protocol::Ground{};
  switch (cfg.init.kind) {
    case InitKind::ground: break;
    case InitKind::cooled: kind = protocol::TwoPhononCooled{init_n_bar(cfg, d)}; break;
    case InitKind::thermal: kind = protocol::Thermal{init_n_bar(cfg, d)}; break;
  }
  fock::DensityMatrix mech = protocol::initial_state(kind, cfg.dims.mech);
  if (cfg.model == ModelKind::bipartite) return protocol::with_cavity_vacuum(mech, cfg.dims.cavity);
  return mech;
}

inline lindblad::LindbladModel build_model(const RunConfig& cfg, const protocol::DerivedParams& d) {
  if (cfg.model == ModelKind::bipartite) return protocol::build_bipartite_model(d, cfg.dims);
  return protocol::build_reduced_model(d, cfg.dims.mech);
}

/// Column names in output order.
inline std::vector<std::string> column_names(const Columns& c) {
  std::vector<std::string> n{"fidelity_target", "purity", "mean_phonon", "parity", "distance_rho_app"};
  if (c.ng_fixed) n.push_back("ng_fixed");
  if (c.ng_min) n.push_back("ng_min");
  if (c.cat_coherence) n.push_back("cat_coherence");
  if (c.rho11) n.push_back("rho11");
  return n;
}

namespace detail {

// Reduced mechanical state, computed once per reported time and shared by
// all observers.
class MechView {
 public:
  MechView(const fock::HilbertSpace& space, bool bipartite) : space_(space), bipartite_(bipartite) {}

  const fock::Matrix& operator()(double t, const fock::Matrix& rho) {
    if (!bipartite_) return rho;
    if (!valid_ || t != t_) {
      mech_ = fock::detail::partial_trace_matrix(rho, space_, 1);
      t_ = t;
      valid_ = true;
    }
    return mech_;
  }

 private:
  fock::HilbertSpace space_;
  bool bipartite_;
  bool valid_ = false;
  double t_ = 0.0;
  fock::Matrix mech_;
};

}  // namespace detail

/// Observers for the timeseries columns.
inline std::vector<lindblad::Observer> make_observers(const RunConfig& cfg, const ResolvedRun& r,
                                                      const fock::HilbertSpace& space) {
  const auto& d = r.derived;
  const int dim = cfg.dims.mech;
  auto view = std::make_shared<detail::MechView>(space, cfg.model == ModelKind::bipartite);
  auto target = std::make_shared<fock::Matrix>(protocol::target_state(d.beta, dim).matrix());
  auto obs = std::make_shared<std::pair<double, analysis::Observables>>(-1.0, analysis::Observables{});
  auto observe = [view, obs](double t, const fock::Matrix& rho) -> const analysis::Observables& {
    if (obs->first != t) {
      obs->second = analysis::observables((*view)(t, rho));
      obs->first = t;
    }
    return obs->second;
  };

  std::vector<lindblad::Observer> out;
  out.push_back({"fidelity_target", [view, target](double t, const fock::Matrix& rho) {
                   return analysis::hs_fidelity(*target, (*view)(t, rho));
                 }});
  out.push_back({"purity", [observe](double t, const fock::Matrix& rho) { return observe(t, rho).purity; }});
  out.push_back(
      {"mean_phonon", [observe](double t, const fock::Matrix& rho) { return observe(t, rho).mean_phonon; }});
  out.push_back({"parity", [observe](double t, const fock::Matrix& rho) { return observe(t, rho).parity; }});
  const double t0 = r.t0;
  out.push_back({"distance_rho_app", [view, t0, d, dim](double t, const fock::Matrix& rho) {
                   if (t < t0) return std::numeric_limits<double>::quiet_NaN();
                   const auto app = analysis::rho_app(t, t0, d.beta, d.n_bar, d.gamma_m, dim);
                   return analysis::distance((*view)(t, rho), app.matrix());
                 }});
  if (cfg.columns.ng_fixed) {
    const cplx a = cfg.ng_alpha;
    const double s = cfg.ng_s;
    out.push_back({"ng_fixed", [view, a, s](double t, const fock::Matrix& rho) {
                     return analysis::ng_witness_phase_space((*view)(t, rho), a, s);
                   }});
  }
  if (cfg.columns.ng_min) {
    const analysis::NgPoint fixed{cfg.ng_alpha, cfg.ng_s};
    out.push_back({"ng_min", [view, fixed](double t, const fock::Matrix& rho) {
                     const auto& m = (*view)(t, rho);
                     auto starts = analysis::default_ng_starts(m);
                     starts.push_back(fixed);
                     return analysis::ng_minimize(m, starts).value;
                   }});
  }
  if (cfg.columns.cat_coherence) {
    const cplx beta = d.beta;
    out.push_back({"cat_coherence", [view, beta](double t, const fock::Matrix& rho) {
                     return analysis::cat_coherence((*view)(t, rho), beta);
                   }});
  }
  if (cfg.columns.rho11) {
    out.push_back({"rho11", [view](double t, const fock::Matrix& rho) { return (*view)(t, rho)(1, 1).real(); }});
  }
  return out;
}

struct WignerSnapshot {
  double t = 0.0;
  analysis::WignerGrid grid;
};

struct RunSummary {
  double f_max = 0.0;
  double t_f_max = 0.0;
  double f_final = 0.0;
  double gamma_dec = 0.0;
  std::optional<analysis::DecoherenceFit> ng_fit;
  std::optional<analysis::DecoherenceFit> coherence_fit;
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_snapshot_eigenvalue = std::numeric_limits<double>::infinity();
  std::optional<double> convergence_drift;
  std::vector<std::string> warnings;

  std::optional<double> fitted_rate() const {
    if (ng_fit) return ng_fit->rate;
    if (coherence_fit) return coherence_fit->rate;
    return std::nullopt;
  }
};

struct RunResult {
  RunConfig config;
  std::string hash;
  ResolvedRun resolved;
  lindblad::Trajectory trajectory;
  std::vector<WignerSnapshot> wigner;
  RunSummary summary;
};

inline lindblad::IntegratorConfig integrator_config(const RunConfig& cfg, const ResolvedRun& r) {
  lindblad::IntegratorConfig ic;
  ic.rtol = cfg.rtol;
  ic.atol = cfg.atol;
  ic.method = cfg.method;
  ic.snapshot_times = r.snapshot_times;
  return ic;
}

// ---------------------------------------------------------------------------
// Output files

namespace detail {

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.17g}", v);
}

inline std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + p.string() + " for writing");
  return f;
}

inline void close_out(std::ofstream& f, const fs::path& p) {
  f.flush();
  if (!f) throw IoError("write failed: " + p.string());
}

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

inline Json fit_json(const std::optional<analysis::DecoherenceFit>& f) {
  if (!f) return nullptr;
  Json j{{"rate", f->rate},
         {"amplitude", f->amplitude},
         {"log_residual_rms", f->residual},
         {"window", {f->window.begin, f->window.end}},
         {"samples", f->samples}};
  if (auto dev = f->relative_deviation()) j["relative_deviation"] = *dev;
  return j;
}

}  // namespace detail

inline Json derived_json(const protocol::DerivedParams& d) {
  return {{"E0", d.E0},
          {"E1", d.E1},
          {"Delta0", d.Delta0},
          {"Omega", d.Omega},
          {"alpha_s", {d.alpha_s.real(), d.alpha_s.imag()}},
          {"alpha_s_abs", std::abs(d.alpha_s)},
          {"omega_m_tilde", d.omega_m_tilde},
          {"omega_c", d.omega_c},
          {"Gamma", d.Gamma},
          {"beta", {d.beta.real(), d.beta.imag()}},
          {"beta_abs", std::abs(d.beta)},
          {"n_bar", d.n_bar},
          {"gamma_m", d.gamma_m},
          {"gamma_dec", d.gamma_dec()},
          {"g2", d.g2},
          {"kappa_T", d.kappa_T}};
}

inline Json conventions_json() {
  return {{"hbar", 1},
          {"units", "SI; frequencies and rates in rad/s, times in s"},
          {"dissipator", "D(C) rho = 2 C rho C^+ - C^+ C rho - rho C^+ C, multiplied by the listed rate"},
          {"tensor_order", "cavity (x) mechanics"},
          {"beta_phase", "principal square root of E1 / (i g2 alpha_s)"},
          {"wigner", "alpha = x + i p, W = (2/pi) Tr[rho D(alpha) P D(alpha)^+], integral W dx dp = 1"},
          {"squeeze", "S(s) = exp[(s/2) b^+^2 - (s^*/2) b^2], s real"},
          {"fidelity", "Hilbert-Schmidt: |Tr rho0 rho1| / sqrt(Tr rho0^2 Tr rho1^2)"}};
}

inline Json manifest_json(const RunConfig& cfg, const std::string& hash, const ResolvedRun& r,
                          const std::vector<std::string>& warnings) {
  return {{"version", kVersion},
          {"config_hash", hash},
          {"preset", cfg.preset ? Json(*cfg.preset) : Json(nullptr)},
          {"config", canonical_json(cfg)},
          {"derived", derived_json(r.derived)},
          {"conventions", conventions_json()},
          {"resolved", {{"t_max", r.t_max}, {"t0", r.t0}, {"samples", r.times.size()},
                        {"snapshot_times", r.snapshot_times}}},
          {"warnings", warnings}};
}

inline void write_json(const fs::path& p, const Json& j) {
  auto f = detail::open_out(p);
  f << j.dump(2) << '\n';
  detail::close_out(f, p);
}

inline void write_timeseries(const fs::path& p, const lindblad::Trajectory& traj, const std::string& hash) {
  auto f = detail::open_out(p);
  f << "# config_hash=" << hash << '\n';
  f << "t_seconds";
  for (const auto& c : traj.columns) f << ',' << c;
  f << '\n';
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    f << detail::num(traj.times[i]);
    for (double v : traj.records[i]) f << ',' << detail::num(v);
    f << '\n';
  }
  detail::close_out(f, p);
}

inline void write_wigner(const fs::path& p, const analysis::WignerGrid& g, double t, const std::string& hash) {
  auto f = detail::open_out(p);
  const auto& s = g.spec;
  f << fmt::format("# grid x_min={} x_max={} nx={} p_min={} p_max={} np={}\n", detail::num(s.x_min),
                   detail::num(s.x_max), s.nx, detail::num(s.p_min), detail::num(s.p_max), s.np);
  f << "# t_seconds=" << detail::num(t) << '\n';
  f << "# config_hash=" << hash << '\n';
  for (int i = 0; i < s.nx; ++i) {
    for (int j = 0; j < s.np; ++j) {
      f << detail::num(s.x(i)) << ',' << detail::num(s.p(j)) << ',' << detail::num(g.at(i, j)) << '\n';
    }
  }
  detail::close_out(f, p);
}

inline Json summary_json(const RunResult& r) {
  const auto& s = r.summary;
  Json snaps = Json::array();
  for (const auto& sn : r.trajectory.snapshots) snaps.push_back({{"t", sn.t}, {"min_eigenvalue", sn.min_eigenvalue}});
  Json wig = Json::array();
  for (std::size_t k = 0; k < r.wigner.size(); ++k) {
    wig.push_back({{"file", fmt::format("wigner_{:03d}.csv", k)},
                   {"t", r.wigner[k].t},
                   {"min", r.wigner[k].grid.min()},
                   {"max", r.wigner[k].grid.max()},
                   {"normalization", r.wigner[k].grid.normalization()}});
  }
  const auto& st = r.trajectory.stats;
  return {{"config_hash", r.hash},
          {"F_max", s.f_max},
          {"t_F_max", s.t_f_max},
          {"F_final", s.f_final},
          {"gamma_dec", s.gamma_dec},
          {"ng_fit", detail::fit_json(s.ng_fit)},
          {"coherence_fit", detail::fit_json(s.coherence_fit)},
          {"max_trace_error", s.max_trace_error},
          {"max_hermiticity_error", s.max_hermiticity_error},
          {"snapshots", snaps},
          {"wigner", wig},
          {"convergence_drift", s.convergence_drift ? Json(*s.convergence_drift) : Json(nullptr)},
          {"integrator",
           {{"method", lindblad::to_string(st.method)},
            {"accepted", st.accepted},
            {"rejected", st.rejected},
            {"factorizations", st.factorizations}}},
          {"warnings", s.warnings}};
}

// ---------------------------------------------------------------------------
// Running

/// Observable drift tolerated between dim and dim + 8.
inline constexpr double kConvergenceTolerance = 1e-4;

namespace detail {

inline RunSummary summarize(const RunConfig& cfg, const ResolvedRun& r, const lindblad::Trajectory& traj) {
  RunSummary s;
  const auto f = traj.column("fidelity_target");
  const auto it = std::max_element(f.begin(), f.end());
  s.f_max = *it;
  s.t_f_max = traj.times[static_cast<std::size_t>(it - f.begin())];
  s.f_final = f.back();
  s.gamma_dec = r.derived.gamma_dec();
  for (double e : traj.trace_error) s.max_trace_error = std::max(s.max_trace_error, e);
  for (double e : traj.hermiticity_error) s.max_hermiticity_error = std::max(s.max_hermiticity_error, e);
  for (const auto& sn : traj.snapshots) s.min_snapshot_eigenvalue = std::min(s.min_snapshot_eigenvalue, sn.min_eigenvalue);

  if (s.gamma_dec > 0.0 && r.derived.Gamma > 0.0) {
    const auto window = analysis::default_fit_window(r.derived.Gamma, s.gamma_dec);
    auto try_fit = [&](analysis::DecaySignal sig, const char* what) -> std::optional<analysis::DecoherenceFit> {
      try {
        return analysis::fit_decoherence_rate(traj, sig, window, s.gamma_dec);
      } catch (const Error& e) {
        s.warnings.push_back(std::string(what) + " fit skipped: " + e.what());
        return std::nullopt;
      }
    };
    if (cfg.columns.ng_fixed) s.ng_fit = try_fit(analysis::DecaySignal::ng, "NG");
    if (cfg.columns.cat_coherence) s.coherence_fit = try_fit(analysis::DecaySignal::cat_coherence, "coherence");
  }
  return s;
}

// Re-runs at mech dim + 8 and returns the largest change of the basic observables.
inline double convergence_drift(const RunConfig& cfg, const ResolvedRun& r, const lindblad::Trajectory& traj) {
  RunConfig big = cfg;
  big.dims.mech += 8;
  big.columns = Columns{false, false, false, false};
  const auto model = build_model(big, r.derived);
  const auto rho0 = prepare_initial_state(big, r.derived);
  auto ic = integrator_config(big, r);
  ic.snapshot_times.clear();
  const auto obs = make_observers(big, r, model.space());
  const auto other = lindblad::evolve(model, rho0, r.times, ic, obs);
  double drift = 0.0;
  for (const char* name : {"fidelity_target", "purity", "mean_phonon", "parity"}) {
    const auto a = traj.column(name);
    const auto b = other.column(name);
    for (std::size_t i = 0; i < a.size(); ++i) drift = std::max(drift, std::abs(a[i] - b[i]));
  }
  return drift;
}

}  // namespace detail

struct RunOptions {
  bool write_files = true;
  int wigner_threads = 0;  // 0: config jobs
  std::vector<lindblad::Observer> extra_observers;  // appended after the configured columns
};

/// Runs one configuration. Files are written to cfg.out_dir when requested;
/// the manifest is on disk before integration starts.
inline RunResult run(const RunConfig& cfg, const RunOptions& opt = {}) {
  validate(cfg);
  WarningCapture capture;
  RunResult res;
  res.config = cfg;
  res.hash = config_hash(cfg);

  protocol::DerivedParams derived = protocol::derive_params(cfg.params, cfg.derivation);
  res.resolved = resolve(cfg, std::move(derived));
  const auto& r = res.resolved;
  const auto model = build_model(cfg, r.derived);
  const auto rho0 = prepare_initial_state(cfg, r.derived);

  const bool files = opt.write_files && !cfg.out_dir.empty();
  if (files) {
    detail::ensure_dir(cfg.out_dir);
    write_json(cfg.out_dir / "manifest.json", manifest_json(cfg, res.hash, r, capture.messages()));
  }

  auto obs = make_observers(cfg, r, model.space());
  obs.insert(obs.end(), opt.extra_observers.begin(), opt.extra_observers.end());
  res.trajectory = lindblad::evolve(model, rho0, r.times, integrator_config(cfg, r), obs);
  res.summary = detail::summarize(cfg, r, res.trajectory);

  if (cfg.wigner) {
    const int threads = opt.wigner_threads > 0 ? opt.wigner_threads : cfg.jobs;
    for (const auto& sn : res.trajectory.snapshots) {
      fock::Matrix mech = cfg.model == ModelKind::bipartite
                              ? fock::detail::partial_trace_matrix(sn.state.matrix(), sn.state.space(), 1)
                              : sn.state.matrix();
      res.wigner.push_back({sn.t, analysis::wigner(mech, cfg.grid, threads)});
    }
  }
  if (cfg.convergence_check) {
    const double drift = detail::convergence_drift(cfg, r, res.trajectory);
    res.summary.convergence_drift = drift;
    if (drift >= kConvergenceTolerance) {
      warn(fmt::format("convergence check: observables drift by {:.3g} between mech dim {} and {}", drift,
                       cfg.dims.mech, cfg.dims.mech + 8));
    }
  }
  for (const auto& w : capture.messages()) res.summary.warnings.push_back(w);

  if (files) {
    write_timeseries(cfg.out_dir / "timeseries.csv", res.trajectory, res.hash);
    for (std::size_t k = 0; k < res.wigner.size(); ++k) {
      write_wigner(cfg.out_dir / fmt::format("wigner_{:03d}.csv", k), res.wigner[k].grid, res.wigner[k].t,
                   res.hash);
    }
    write_json(cfg.out_dir / "summary.json", summary_json(res));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Sweeps

struct Axis {
  std::string key;  // section.key
  std::vector<std::string> values;
};

/// Parses "section.key=v1,v2,...". An empty value list is allowed.
inline Axis parse_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("axis '" + text + "': expected key=v1,v2,...");
  Axis a;
  a.key = detail::trim(text.substr(0, eq));
  const auto dot = a.key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == a.key.size()) {
    throw ConfigError("axis key '" + a.key + "': expected section.key");
  }
  std::stringstream ss(text.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = detail::trim(item);
    if (!item.empty()) a.values.push_back(item);
  }
  return a;
}

struct SweepPoint {
  int index = 0;
  std::vector<std::string> values;
  fs::path dir;
  bool ok = false;
  int exit_code = 0;
  std::string error;
  std::string hash;
  protocol::DerivedParams derived;
  RunSummary summary;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  int failures() const {
    return static_cast<int>(std::count_if(points.begin(), points.end(), [](const auto& p) { return !p.ok; }));
  }
  int exit_code() const {
    for (const auto& p : points) {
      if (!p.ok) return p.exit_code;
    }
    return kExitOk;
  }
};

/// Cartesian product over the axes. Each point runs in out/run_NNN; a
/// summary.csv row is written per point and failures.csv lists the failed ones.
inline SweepResult sweep(const Ptree& tmpl, const std::vector<Axis>& axes, const fs::path& out, int jobs) {
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  detail::check_keys(tmpl);
  for (const auto& a : axes) {
    Ptree probe = tmpl;
    probe.put(Ptree::path_type(a.key, '.'), "0");
    detail::check_keys(probe);
  }
  detail::ensure_dir(out);

  std::size_t total = 1;
  for (const auto& a : axes) total *= a.values.size();
  if (axes.empty()) total = 1;

  SweepResult res;
  res.points.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    auto& p = res.points[i];
    p.index = static_cast<int>(i);
    std::size_t rest = i;
    p.values.resize(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
      const auto n = axes[k].values.size();
      p.values[k] = axes[k].values[rest % n];
      rest /= n;
    }
    p.dir = out / fmt::format("run_{:03d}", i);
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      auto& p = res.points[i];
      try {
        Ptree t = tmpl;
        for (std::size_t k = 0; k < axes.size(); ++k) t.put(Ptree::path_type(axes[k].key, '.'), p.values[k]);
        RunConfig cfg = parse_config(t);
        cfg.out_dir = p.dir;
        cfg.jobs = 1;
        const RunResult r = run(cfg);
        p.hash = r.hash;
        p.derived = r.resolved.derived;
        p.summary = r.summary;
        p.ok = true;
      } catch (const std::exception& e) {
        p.error = e.what();
        p.exit_code = exit_code_for(e);
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const int n = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), total));
    for (int w = 0; w < n; ++w) pool.emplace_back(worker);
  }

  const fs::path sp = out / "summary.csv";
  auto f = detail::open_out(sp);
  f << "run";
  for (const auto& a : axes) f << ',' << a.key;
  f << ",status,config_hash,Gamma,beta_re,beta_im,beta_abs,n_bar,F_max,t_F_max,fitted_rate,gamma_dec\n";
  for (const auto& p : res.points) {
    f << p.dir.filename().string();
    for (const auto& v : p.values) f << ',' << v;
    if (!p.ok) {
      f << ",failed,,,,,,,,,,\n";
      continue;
    }
    const auto& d = p.derived;
    const auto rate = p.summary.fitted_rate();
    f << ",ok," << p.hash << ',' << detail::num(d.Gamma) << ',' << detail::num(d.beta.real()) << ','
      << detail::num(d.beta.imag()) << ',' << detail::num(std::abs(d.beta)) << ',' << detail::num(d.n_bar) << ','
      << detail::num(p.summary.f_max) << ',' << detail::num(p.summary.t_f_max) << ','
      << (rate ? detail::num(*rate) : std::string("nan")) << ',' << detail::num(d.gamma_dec()) << '\n';
  }
  detail::close_out(f, sp);

  const fs::path fp = out / "failures.csv";
  auto ff = detail::open_out(fp);
  ff << "run,exit_code,error\n";
  for (const auto& p : res.points) {
    if (p.ok) continue;
    std::string msg = p.error;
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::replace(msg.begin(), msg.end(), '"', '\'');
    ff << p.dir.filename().string() << ',' << p.exit_code << ",\"" << msg << "\"\n";
  }
  detail::close_out(ff, fp);
  return res;
}

}  // namespace mechcat::runner
