// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "acmpc/harness.hpp"
#include "acmpc/io.hpp"
#include "acmpc/model.hpp"
#include "acmpc/nmpc.hpp"
#include "acmpc/qcqp.hpp"
#include "acmpc/sysid.hpp"
#include "support.hpp"

using namespace acmpc;
using acmpc::testing::fixture;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string &what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double solve_ms_sum = 0.0;
std::size_t solve_count = 0;

Outcome formula_fixtures() {
  Outcome o;
  const ModelParams P = ModelParams::reference();
  const PowerParams Q = PowerParams::reference();
  auto near = [&](double got, double want, const char *what) {
    o.check(std::abs(got - want) <= 1e-6, what);
  };
  near(inlet_air_temperature(0.0, 0.0, P), 154.4995, "inlet(0, 0)");
  near(inlet_air_temperature(5.0, 0.1, P), 160.27179, "inlet(5, 0.1)");
  near(inlet_air_temperature(10.0, 0.05, P), 160.800395, "inlet(10, 0.05)");
  const State n = model_step({30.0, 5.0}, {0.1, 5.0}, {30.0, 30.0, 30.0}, P);
  near(n.T_cab, 30.0 + 1.2999 * 0.1 * (160.27179 - 30.0) - 0.1842, "step T_cab");
  o.check(std::abs(n.T_cab - 46.7498) < 5e-5, "step T_cab rounded");
  near(n.T_evap, 3.7009, "step T_evap");
  near(model_step({0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0, 0.0}, P).T_evap, -1.3226, "step origin");
  near(evaporator_fixed_point(10.0, P), 3.8534 / 0.5129, "fixed point 10");
  near(evaporator_fixed_point(3.0, P), 0.2302 / 0.5129, "fixed point 3");
  o.check(std::abs(evaporator_fixed_point(10.0, P) - 7.51297) < 5e-6, "fixed point 10 rounded");
  near(blower_power(0.0, Q), 49.318, "P_bl(0)");
  near(blower_power(0.05, Q), 10.998, "P_bl(0.05)");
  near(blower_power(0.1, Q), 93.458, "P_bl(0.1)");
  near(blower_power(0.15, Q), 296.698, "P_bl(0.15)");
  near(compressor_power(0.0, 5.0, 30.0, P, Q), 0.0, "P_c(W=0)");
  near(compressor_power(0.1, 5.0, 30.0, P, Q), 288.0 * 0.1 * (30.0 - 160.27179), "P_c");
  o.detail << "fixed point(10) = " << evaporator_fixed_point(10.0, P)
           << ", P_bl(0.1) = " << blower_power(0.1, Q);
  return o;
}

Outcome qcqp_equivalence() {
  Outcome o;
  const acmpc::testing::RefParams r;
  const QcqpMatrices m = build_qcqp_matrices(ModelParams::reference());
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> T(-10.0, 50.0), W(0.0, 0.2);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const State x{T(rng), T(rng)};
    const ControlInput u{W(rng), T(rng)};
    const double Ti = T(rng), Tsh = T(rng);
    const State nx{acmpc::testing::ref_cab_next(r, x.T_cab, x.T_evap, u.W_bl, Ti, Tsh),
                   acmpc::testing::ref_evap_next(r, x.T_evap, u.T_evap_set)};
    for (double v : m.residuals(stack(nx, x, u, Ti, Tsh,
                                      acmpc::testing::ref_inlet(r, x.T_evap, u.W_bl))))
      worst = std::max(worst, std::abs(v));
  }
  o.check(worst < 1e-10, "residuals");
  o.check((m.C - m.C.transpose()).cwiseAbs().maxCoeff() == 0.0, "symmetry");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 9, 9>> es(m.C);
  const double lmax = es.eigenvalues().maxCoeff(), lmin = es.eigenvalues().minCoeff();
  o.check(lmax > 0.0 && lmin < 0.0, "indefinite");
  o.detail << "max residual " << worst << ", eigenvalues in [" << lmin << ", " << lmax << "]";
  return o;
}

Outcome identification_recovery() {
  Outcome o;
  const ModelParams P = ModelParams::reference();
  const PowerParams Q = PowerParams::reference();
  ModelSource src(P, Q, {28.0, 6.0}, {}, 17);
  ExcitationConfig cfg;
  cfg.duration = 2000 * 5.0;
  cfg.seed = 3;
  const IdDataset d = generate_excitation(cfg, src);
  o.check(d.size() == 2000, "sample count");
  const ModelFit f = fit_model_params(d, 5.0);
  double worst = 0.0;
  for (int i = 0; i < 7; ++i)
    worst = std::max(worst, std::abs(f.params.gamma[i] - P.gamma[i]) / std::abs(P.gamma[i]));
  for (int i = 0; i < 3; ++i)
    worst = std::max(worst, std::abs(f.params.tau[i] - P.tau[i]) / std::abs(P.tau[i]));
  const PowerFit pf = fit_power_params(d);
  double worst_b = 0.0;
  for (int i = 0; i < 3; ++i)
    worst_b = std::max(worst_b, std::abs(pf.beta[i] - Q.beta[i]) / std::abs(Q.beta[i]));
  o.check(worst < 1e-8, "gamma/tau");
  o.check(worst_b < 1e-10, "beta");
  o.detail << "worst relative error gamma/tau " << worst << ", beta " << worst_b;
  return o;
}

Outcome surrogate_validation() {
  Outcome o;
  const Scenario sc = load_scenario(fixture("identify.json"));
  const IdentifyResult id = identify(sc);
  const ValidationReport r = validate(sc, id.params.model);
  o.check(r.starts.size() == 60 && r.horizon == 300, "60 starts x 300 steps");
  const char *names[3] = {"T_cab", "T_evap", "T_ain"};
  for (int s = 0; s < 3; ++s) {
    const double f = r.fraction_within(static_cast<Signal>(s), 2.5);
    o.check(f >= 0.9, names[s]);
    o.detail << names[s] << " " << 100.0 * f << "% (max " << r.max_abs[s] << ")  ";
  }
  return o;
}

Outcome solver_oracle() {
  Outcome o;
  const ModelSet ms = load_params(fixture("params_surrogate.json"));
  std::mt19937_64 rng(2);
  std::vector<OcpInstance> cases;
  for (int k = 0; k < 20; ++k) {
    OcpInstance inst = acmpc::testing::random_instance(rng, k < 10 ? 1 : 2);
    inst.model = ms.model;
    inst.power = ms.power;
    cases.push_back(inst);
  }
  // instance A: one move from (26, 8) under a 25 degC ceiling
  cases[0].x0 = {26.0, 8.0};
  cases[0].w = {30.0, 30.0, 30.0};
  for (auto &h : cases[0].schedule.x_hi) h.T_cab = 25.0;

  double worst_cost = 0.0, worst_W = 0.0, worst_T = 0.0;
  int off_cell = 0, off_cell_cheaper = 0;
  for (const auto &inst : cases) {
    const SolveResult s = solve_ocp(inst);
    const BruteForceResult bf = brute_force_ocp(inst);
    const double rc = (s.cost - bf.cost) / std::abs(bf.cost);
    worst_cost = std::max(worst_cost, std::abs(rc));
    bool off = false;
    for (std::size_t m = 0; m < s.U.size(); ++m) {
      const double dW = std::abs(s.U[m].W_bl - bf.U[m].W_bl);
      const double dT = std::abs(s.U[m].T_evap_set - bf.U[m].T_evap_set);
      off = off || dW > 0.001 + 1e-12 || dT > 0.05 + 1e-12;
      worst_W = std::max(worst_W, dW);
      worst_T = std::max(worst_T, dT);
    }
    if (off) {
      ++off_cell;
      if (s.cost < bf.cost) ++off_cell_cheaper;
    }
  }
  o.check(worst_cost <= 1e-3, "cost");
  o.check(worst_W <= 0.001 + 1e-12, "blower argmin");
  o.check(worst_T <= 0.05 + 1e-12, "set-point argmin");
  o.detail << "worst cost gap " << 100.0 * worst_cost << "%, argmin gap (" << worst_W << ", "
           << worst_T << ")";
  if (off_cell > 0)
    o.detail << ", " << off_cell << " instance(s) off by more than a cell, " << off_cell_cheaper
             << " of them cheaper than the grid optimum";
  return o;
}

Outcome gradient_check() {
  Outcome o;
  std::mt19937_64 rng(4);
  int done = 0, skipped = 0;
  double worst = 0.0;
  while (done < 100) {
    const OcpInstance inst = acmpc::testing::random_instance(rng, 1 + done % 6);
    const InputSequence U = acmpc::testing::random_inputs(rng, inst.horizon.Nu);
    const Rollout ro = rollout(inst, U);
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= inst.horizon.Nc; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      const auto &x = ro.x[ii];
      const auto &lo = inst.schedule.x_lo[ii];
      const auto &hi = inst.schedule.x_hi[ii];
      d = std::min({d, std::abs(x.T_cab - lo.T_cab), std::abs(x.T_cab - hi.T_cab),
                    std::abs(x.T_evap - lo.T_evap), std::abs(x.T_evap - hi.T_evap)});
    }
    if (d < 1e-2) {
      ++skipped;
      continue;
    }
    const Eigen::VectorXd g = evaluate_nlp(inst, U).gradient;
    const Eigen::VectorXd z = pack(U);
    Eigen::VectorXd f(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double h = (i % 2 == 0) ? 1e-7 : 1e-5;
      Eigen::VectorXd a = z, b = z;
      a[i] += h;
      b[i] -= h;
      f[i] = (evaluate_nlp(inst, unpack(a)).cost - evaluate_nlp(inst, unpack(b)).cost) / (2 * h);
    }
    worst = std::max(worst, (g - f).lpNorm<Eigen::Infinity>() /
                                std::max(1.0, g.lpNorm<Eigen::Infinity>()));
    ++done;
  }
  o.check(worst < 1e-5, "relative gradient error");
  o.detail << "worst relative error " << worst << " over 100 instances (" << skipped
           << " near a kink redrawn)";
  return o;
}

Outcome closed_loop_model() {
  Outcome o;
  const ModelSet ms = load_params(fixture("params_surrogate.json"));
  for (const char *f : {"fig7_30.json", "fig7_35.json"}) {
    const Scenario sc = load_scenario(fixture(f));
    const Trace tr = run_closed_loop(sc, ControllerKind::Nmpc, PlantKind::Model, ms, sc.solver);
    const TraceRow &last = tr.rows.back();
    o.check(last.slack_lo < 1e-6 && last.slack_hi < 1e-6, std::string(f) + " final slack");
    double settle = 0.0;
    for (const auto &r : tr.rows) {
      if (r.t >= 100.0 - 1e-9) settle = std::max(settle, std::abs(r.T_cab - r.T_cab_ub));
      const bool inside = r.W_bl >= sc.u_lo.W_bl && r.W_bl <= sc.u_hi.W_bl &&
                          r.T_evap_set >= sc.u_lo.T_evap_set &&
                          r.T_evap_set <= sc.u_hi.T_evap_set;
      o.check(inside, std::string(f) + " input bounds at t=" + std::to_string(r.t));
      if (r.iters > 0 || r.solve_ms > 0.0) {
        solve_ms_sum += r.solve_ms;
        ++solve_count;
      }
    }
    o.check(settle <= 0.5, std::string(f) + " steady-state distance to bound");
    o.check(tr.capped_steps() == 0, std::string(f) + " capped steps");
    o.detail << f << ": final T_cab " << last.T_cab << " (bound " << last.T_cab_ub
             << "), max |T_cab - bound| after 100 s " << settle << "  ";
  }
  return o;
}

Outcome speed_sensitivity() {
  Outcome o;
  const Scenario sc = load_scenario(fixture("sweep.json"));
  const auto rows = speed_sensitivity_sweep({0.0, 5.0, 10.0, 15.0, 20.0, 25.0}, sc);
  for (std::size_t k = 1; k < rows.size(); ++k)
    o.check(rows[k].totals.energy_MJ < rows[k - 1].totals.energy_MJ, "strictly decreasing");
  const double ratio = rows.back().totals.energy_MJ / rows.front().totals.energy_MJ;
  o.check(ratio >= 0.75 && ratio <= 0.85, "E(25)/E(0)");
  o.check(!rows.front().totals.MJ_per_km, "no per-distance value at standstill");
  for (const auto &r : rows) {
    if (r.V <= 0.0) continue;
    const double want = r.totals.energy_MJ / (r.V * sc.duration / 1000.0);
    o.check(r.totals.MJ_per_km &&
                std::abs(*r.totals.MJ_per_km - want) <= 1e-12 * want,
            "MJ/km identity");
  }
  const double a = *per_distance(1.23, 5.0 * 600.0 / 1000.0);
  const double b = *per_distance(1.10, 20.0 * 600.0 / 1000.0);
  o.check(std::abs(a - 0.410) < 5e-4 && std::abs(b - 0.092) < 5e-4, "table values");
  o.detail << "E(MJ) =";
  for (const auto &r : rows) o.detail << " " << r.totals.energy_MJ;
  o.detail << ", E(25)/E(0) = " << ratio << ", 1.23 MJ @5 m/s -> " << a
           << " MJ/km, 1.10 MJ @20 m/s -> " << b << " MJ/km";
  return o;
}

Outcome case_study() {
  Outcome o;
  const Scenario sc = load_scenario(fixture("stop_and_go.json"));
  const ModelSet ms = load_params(fixture("params_surrogate.json"));
  const CaseComparison c = compare_cases(sc, ms, sc.solver);
  o.check(c.saving > 0.0, "positive saving");
  o.detail << "Case 1 " << c.E_case1_MJ << " MJ, Case 2 " << c.E_case2_MJ << " MJ, saving "
           << 100.0 * c.saving << "% (target >= 3%: " << (c.saving >= 0.03 ? "met" : "missed")
           << "), constant bound " << c.constant_bound;
  return o;
}

Outcome realtime_margin() {
  Outcome o;
  const double mean = solve_count ? solve_ms_sum / static_cast<double>(solve_count) : 0.0;
  o.check(solve_count > 0, "solver steps recorded");
  o.check(mean < 625.0, "mean solve time");
  o.detail << "mean solve time " << mean << " ms over " << solve_count << " steps";
  return o;
}

} // namespace

int main() {
  struct Item {
    const char *name;
    std::function<Outcome()> run;
  };
  const std::vector<Item> items = {
      {"formula fixtures", formula_fixtures},
      {"QCQP equivalence", qcqp_equivalence},
      {"identification recovery", identification_recovery},
      {"surrogate multi-step validation", surrogate_validation},
      {"solver vs brute-force oracle", solver_oracle},
      {"gradient vs finite differences", gradient_check},
      {"closed loop on the prediction model", closed_loop_model},
      {"speed sensitivity", speed_sensitivity},
      {"stop-and-go case study", case_study},
      {"real-time margin", realtime_margin},
  };
  int failed = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = items[i].run();
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2zu %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, items[i].name, s,
                o.detail.str().c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed ? 1 : 0;
}
