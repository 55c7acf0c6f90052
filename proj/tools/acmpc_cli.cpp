// Command-line harness: identification, validation, open-loop simulation,
// closed-loop runs, the speed sweep and the two-case comparison.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acmpc/errors.hpp"
#include "acmpc/harness.hpp"
#include "acmpc/io.hpp"

namespace fs = std::filesystem;
using namespace acmpc;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kSolverCap = 3;

struct Common {
  std::string scenario;
  std::string params;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App *sub, Common &c, bool needs_params) {
  sub->add_option("--scenario", c.scenario, "scenario JSON file")->required();
  auto *p = sub->add_option("--params", c.params, "model parameter JSON file");
  if (needs_params)
    p->required();
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--seed", c.seed, "override the scenario seed");
}

Scenario load(const Common &c) {
  Scenario sc = load_scenario(c.scenario);
  if (c.seed) {
    sc.seed = *c.seed;
    if (sc.excitation)
      sc.excitation->seed = *c.seed;
  }
  return sc;
}

fs::path out_dir(const Common &c) {
  fs::path d(c.out);
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec)
    throw InputError("cannot create output directory " + d.string());
  return d;
}

template <class F> std::string to_string(F &&write) {
  std::ostringstream os;
  os.precision(17);
  write(os);
  return os.str();
}

bool capped(const Trace &tr) {
  const std::size_t n = tr.solved_steps();
  return n > 0 && 100 * tr.capped_steps() >= n;
}

void summarize(std::ostream &os, const char *label, const Trace &tr) {
  const EnergyTotals e = energy_account(tr);
  double ms = 0.0;
  std::size_t solved = 0;
  for (const auto &r : tr.rows)
    if (r.iters > 0) {
      ms += r.solve_ms;
      ++solved;
    }
  os << label << ": steps=" << tr.rows.size() << " energy_MJ=" << e.energy_MJ
     << " capped=" << tr.capped_steps();
  if (solved)
    os << " mean_solve_ms=" << ms / static_cast<double>(solved);
  os << '\n';
}

int cmd_identify(const Common &c) {
  const Scenario sc = load(c);
  const IdentifyResult r = identify(sc);
  const fs::path d = out_dir(c);
  save_params(d / "params.json", r.params);
  write_file_atomic(d / "identification.csv",
                    to_string([&](std::ostream &os) { write_dataset_csv(os, r.data); }));
  std::cout << "samples=" << r.data.size() << " rms(cabin,evap,inlet)=" << r.fit.residual_rms[0]
            << ',' << r.fit.residual_rms[1] << ',' << r.fit.residual_rms[2]
            << " eta_cop=" << r.eta_cop << '\n';
  if (!r.blower.convex)
    std::cerr << "warning: fitted blower curve is not convex (beta1 <= 0)\n";
  return kOk;
}

int cmd_validate(const Common &c) {
  const Scenario sc = load(c);
  const ModelSet p = load_params(c.params);
  IdDataset rec;
  const ValidationReport rep = validate(sc, p.model, &rec);
  const fs::path d = out_dir(c);
  write_file_atomic(d / "validation_errors.csv", to_string([&](std::ostream &os) {
    os << "start,step,e_T_cab,e_T_evap,e_T_ain\n";
    for (std::size_t s = 0; s < rep.starts.size(); ++s)
      for (std::size_t j = 0; j < rep.horizon; ++j)
        os << rep.starts[s] << ',' << j << ',' << rep.errors[0][s][j] << ','
           << rep.errors[1][s][j] << ',' << rep.errors[2][s][j] << '\n';
  }));
  const char *names[] = {"T_cab", "T_evap", "T_ain"};
  const double tol = sc.validation->tolerance;
  for (int k = 0; k < 3; ++k)
    std::cout << names[k] << ": max_abs=" << rep.max_abs[k] << " rms=" << rep.rms[k]
              << " within_" << tol << "=" << rep.fraction_within(static_cast<Signal>(k), tol)
              << '\n';
  return kOk;
}

int cmd_simulate(const Common &c) {
  const Scenario sc = load(c);
  const ModelSet p = load_params(c.params);
  const IdDataset data = simulate_model(sc, p);
  write_file_atomic(out_dir(c) / "simulation.csv",
                    to_string([&](std::ostream &os) { write_dataset_csv(os, data); }));
  return kOk;
}

int cmd_run(const Common &c, const std::string &controller, const std::string &plant) {
  const Scenario sc = load(c);
  const ControllerKind ck = controller == "pi" ? ControllerKind::Pi : ControllerKind::Nmpc;
  const PlantKind pk = plant == "model" ? PlantKind::Model : PlantKind::Surrogate;
  ModelSet p;
  if (ck == ControllerKind::Nmpc || pk == PlantKind::Model) {
    if (c.params.empty())
      throw InputError("run: --params is required for this controller and plant");
    p = load_params(c.params);
  }
  const Trace tr = run_closed_loop(sc, ck, pk, p, sc.solver);
  write_file_atomic(out_dir(c) / (sc.name + "_" + controller + "_" + plant + ".csv"),
                    to_string([&](std::ostream &os) { write_trace_csv(os, tr); }));
  summarize(std::cout, sc.name.c_str(), tr);
  return capped(tr) ? kSolverCap : kOk;
}

int cmd_sweep(const Common &c, const std::vector<double> &speeds) {
  const Scenario sc = load(c);
  const auto rows = speed_sensitivity_sweep(speeds, sc);
  const std::string csv = to_string([&](std::ostream &os) { write_sweep_csv(os, rows); });
  write_file_atomic(out_dir(c) / "sweep.csv", csv);
  std::cout << csv;
  return kOk;
}

int cmd_compare(const Common &c) {
  const Scenario sc = load(c);
  const ModelSet p = load_params(c.params);
  const CaseComparison r = compare_cases(sc, p, sc.solver);
  const fs::path d = out_dir(c);
  write_file_atomic(d / "case1.csv",
                    to_string([&](std::ostream &os) { write_trace_csv(os, r.case1); }));
  write_file_atomic(d / "case2.csv",
                    to_string([&](std::ostream &os) { write_trace_csv(os, r.case2); }));
  const std::string summary = to_string([&](std::ostream &os) {
    os << "E_case1_MJ=" << r.E_case1_MJ << " E_case2_MJ=" << r.E_case2_MJ
       << " saving_pct=" << 100.0 * r.saving << " constant_bound=" << r.constant_bound
       << '\n';
  });
  write_file_atomic(d / "comparison.txt", summary);
  std::cout << summary;
  return capped(r.case1) || capped(r.case2) ? kSolverCap : kOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Predictive A/C climate control harness"};
  app.require_subcommand(1);

  Common c;
  std::string controller = "nmpc", plant = "surrogate";
  std::vector<double> speeds{0, 5, 10, 15, 20, 25};

  auto *identify = app.add_subcommand("identify", "excite the plant, fit and write params");
  add_common(identify, c, false);
  auto *validate = app.add_subcommand("validate", "multi-step prediction error report");
  add_common(validate, c, true);
  auto *simulate = app.add_subcommand("simulate", "open-loop model response");
  add_common(simulate, c, true);
  auto *run = app.add_subcommand("run", "closed-loop run");
  add_common(run, c, false);
  run->add_option("--controller", controller)->check(CLI::IsMember({"nmpc", "pi"}));
  run->add_option("--plant", plant)->check(CLI::IsMember({"surrogate", "model"}));
  auto *sweep = app.add_subcommand("sweep-speed", "PI cool-down at constant speeds");
  add_common(sweep, c, false);
  sweep->add_option("--speeds", speeds, "speeds [m/s]");
  auto *compare = app.add_subcommand("compare-cases", "speed-coordinated vs constant bound");
  add_common(compare, c, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*identify)
      return cmd_identify(c);
    if (*validate)
      return cmd_validate(c);
    if (*simulate)
      return cmd_simulate(c);
    if (*run)
      return cmd_run(c, controller, plant);
    if (*sweep)
      return cmd_sweep(c, speeds);
    if (*compare)
      return cmd_compare(c);
  } catch (const InputError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const RankDeficientError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kOk;
}
