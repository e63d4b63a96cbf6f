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

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mechcat/config.hpp"
#include "mechcat/presets.hpp"
#include "mechcat/runner.hpp"
#include "mechcat/version.hpp"

namespace mc = mechcat::runner;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

struct RunArgs {
  std::string preset;
  std::string config;
  std::string out;
  std::string model;
  std::string dims;
  double tmax = 0.0;
  std::string snapshots;
  int jobs = 0;
};

struct SweepArgs {
  std::string tmpl;
  std::vector<std::string> axes;
  std::string out;
  int jobs = 0;
};

// Command-line flags are applied on top of the INI tree so that they follow
// the same validation path as file keys.
mc::Ptree build_tree(const RunArgs& a) {
  mc::Ptree t;
  if (!a.config.empty()) t = mc::read_ini_file(a.config);
  if (!a.preset.empty()) t.put("run.preset", a.preset);
  if (!a.model.empty()) t.put("run.model", a.model);
  if (!a.dims.empty()) {
    const auto parts = split(a.dims, ',');
    if (parts.empty() || parts.size() > 2) throw mechcat::ConfigError("--dims: expected M[,C]");
    t.put("run.mech_dim", parts[0]);
    if (parts.size() == 2) t.put("run.cavity_dim", parts[1]);
  }
  if (a.tmax > 0.0) {
    if (auto run = t.get_child_optional("run")) run->erase("t_max_gamma");
    t.put("run.t_max", std::to_string(a.tmax));
  }
  if (!a.snapshots.empty()) {
    if (auto run = t.get_child_optional("run")) run->erase("snapshots_gamma");
    t.put("run.snapshots", a.snapshots);
  }
  if (a.jobs > 0) t.put("run.jobs", std::to_string(a.jobs));
  if (!a.out.empty()) t.put("output.dir", a.out);
  return t;
}

int do_run(const RunArgs& a) {
  mc::RunConfig cfg = mc::parse_config(build_tree(a));
  if (cfg.out_dir.empty()) cfg.out_dir = cfg.preset ? "runs/" + *cfg.preset : "runs/custom";
  const auto r = mc::run(cfg);
  const auto& s = r.summary;
  std::cout << "config_hash " << r.hash << '\n'
            << "output " << cfg.out_dir.string() << '\n'
            << "Gamma " << r.resolved.derived.Gamma << " 1/s, |beta| " << std::abs(r.resolved.derived.beta) << '\n'
            << "F_max " << s.f_max << " at t = " << s.t_f_max << " s, final F " << s.f_final << '\n';
  if (auto rate = s.fitted_rate()) std::cout << "fitted decay rate " << *rate << " 1/s, gamma_dec " << s.gamma_dec << '\n';
  if (s.convergence_drift) std::cout << "convergence drift (dim+8) " << *s.convergence_drift << '\n';
  return mc::kExitOk;
}

int do_sweep(const SweepArgs& a) {
  const mc::Ptree tmpl = mc::read_ini_file(a.tmpl);
  std::vector<mc::Axis> axes;
  for (const auto& s : a.axes) axes.push_back(mc::parse_axis(s));
  int jobs = a.jobs;
  if (jobs <= 0) jobs = tmpl.get<int>("run.jobs", 1);
  const auto res = mc::sweep(tmpl, axes, a.out, jobs);
  std::cout << res.points.size() << " runs, " << res.failures() << " failed; summary in "
            << (std::filesystem::path(a.out) / "summary.csv").string() << '\n';
  for (const auto& p : res.points) {
    if (!p.ok) std::cerr << p.dir.filename().string() << ": " << p.error << '\n';
  }
  return res.exit_code();
}

int do_presets() {
  for (const auto& p : mc::presets()) std::cout << p.name << "\t" << p.description << '\n';
  return mc::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cat-state generation in a quadratically coupled optomechanical system"};
  app.set_version_flag("--version", std::string(mechcat::kVersion));
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "integrate one configuration and write its outputs");
  auto* src = run->add_option_group("source");
  src->add_option("--preset", ra.preset, "named preset (see `presets --list`)");
  src->add_option("--config", ra.config, "INI configuration file");
  src->require_option(1);
  run->add_option("--out", ra.out, "output directory");
  run->add_option("--model", ra.model, "reduced | bipartite");
  run->add_option("--dims", ra.dims, "mechanical[,cavity] truncation");
  run->add_option("--tmax", ra.tmax, "final time in seconds");
  run->add_option("--snapshots", ra.snapshots, "comma-separated snapshot times in seconds");
  run->add_option("--jobs", ra.jobs, "threads for the Wigner grids");

  SweepArgs sa;
  auto* sw = app.add_subcommand("sweep", "run a Cartesian grid of configurations");
  sw->add_option("--template", sa.tmpl, "INI template")->required();
  sw->add_option("--axis", sa.axes, "section.key=v1,v2,... (repeatable)");
  sw->add_option("--out", sa.out, "output directory")->required();
  sw->add_option("--jobs", sa.jobs, "parallel runs (default: run.jobs of the template)");

  bool list = false;
  auto* pr = app.add_subcommand("presets", "show the preset catalog");
  pr->add_flag("--list", list, "list presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : mc::kExitConfig;
  }

  try {
    if (*run) return do_run(ra);
    if (*sw) return do_sweep(sa);
    return do_presets();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return mc::exit_code_for(e);
  }
}
