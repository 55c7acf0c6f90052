#include "acmpc/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

#include "acmpc/errors.hpp"

namespace acmpc {
namespace {

long whole_multiple(double a, double b, const char *what) {
  const double n = a / b;
  const long r = std::lround(n);
  if (std::abs(n - static_cast<double>(r)) > 1e-9 * std::max(1.0, n)) {
    std::ostringstream os;
    os << "scenario: " << what;
    throw InputError(os.str());
  }
  return r;
}

void put(std::ostream &os, double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  os.write(buf, r.ptr - buf);
}

} // namespace

double SpeedProfile::at(double t) const {
  if (points.empty())
    return 0.0;
  if (t <= points.front().first)
    return points.front().second;
  if (t >= points.back().first)
    return points.back().second;
  auto it = std::upper_bound(points.begin(), points.end(), t,
                             [](double v, const auto &p) { return v < p.first; });
  const auto &b = *it;
  const auto &a = *(it - 1);
  if (b.first <= a.first)
    return b.second;
  return a.second + (b.second - a.second) * (t - a.first) / (b.first - a.first);
}

double UpperBoundSpec::at(double t, const SpeedProfile &speed) const {
  switch (kind) {
  case Kind::Constant:
    return value;
  case Kind::Steps: {
    double v = steps.empty() ? value : steps.front().second;
    for (const auto &[ts, b] : steps)
      if (t >= ts - 1e-9)
        v = b;
    return v;
  }
  case Kind::Speed: {
    const double V = speed.at(t);
    return bound_schedule_from_speed(std::span<const double>(&V, 1), band).front();
  }
  }
  return value;
}

void check_scenario(const Scenario &sc) {
  if (!(sc.Ts > 0.0) || !(sc.dt > 0.0))
    throw InputError("scenario: Ts and dt must be positive");
  if (!(sc.duration >= 0.0))
    throw InputError("scenario: duration must be non-negative");
  whole_multiple(sc.duration, sc.Ts, "duration is not a multiple of Ts");
  whole_multiple(sc.Ts, sc.dt, "Ts is not a multiple of dt");
  if (std::abs(sc.plant.dt - sc.dt) > 1e-12)
    throw InputError("scenario: plant dt differs from scenario dt");
  check_plant_params(sc.plant);
  for (const auto &p : sc.speed.points)
    if (p.second < 0.0)
      throw InputError("scenario: negative vehicle speed");
  for (std::size_t i = 1; i < sc.speed.points.size(); ++i)
    if (sc.speed.points[i].first < sc.speed.points[i - 1].first)
      throw InputError("scenario: speed breakpoints must be sorted in time");
  if (sc.T_cab_ub.kind == UpperBoundSpec::Kind::Speed)
    check_band(sc.T_cab_ub.band, sc.x_lo.T_cab);
  if (sc.comparison_window) {
    const auto [a, b] = *sc.comparison_window;
    if (!(a < b) || a < 0.0 || b > sc.duration + 1e-9)
      throw InputError("scenario: comparison window outside the scenario");
  }
  if (!(sc.u_lo.W_bl <= sc.u_hi.W_bl) || !(sc.u_lo.T_evap_set <= sc.u_hi.T_evap_set))
    throw InputError("scenario: inverted input bounds");
  if (!(sc.a_sl[0] >= 0.0 && sc.a_sl[1] >= 0.0))
    throw InputError("scenario: slack weights must be non-negative");
}

std::size_t Trace::capped_steps() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const TraceRow &r) { return r.solver_capped; }));
}

std::size_t Trace::solved_steps() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const TraceRow &r) { return r.iters > 0; }));
}

void write_trace_csv(std::ostream &os, const Trace &tr) {
  os << kTraceCsvHeader << '\n';
  for (const auto &r : tr.rows) {
    for (double v : {r.t, r.T_cab, r.T_evap, r.T_ain, r.T_int, r.T_shell, r.T_amb,
                     r.W_bl, r.T_evap_set, r.T_cab_ub, r.P_c, r.P_bl, r.E_cum,
                     r.V_veh, r.slack_lo, r.slack_hi}) {
      put(os, v);
      os << ',';
    }
    os << r.iters << ',';
    put(os, r.solve_ms);
    os << '\n';
  }
}

void accumulate_energy(Trace &tr) {
  double E = 0.0;
  for (std::size_t k = 0; k < tr.rows.size(); ++k) {
    tr.rows[k].E_cum = E;
    if (k + 1 < tr.rows.size())
      E += (tr.rows[k].P_c + tr.rows[k].P_bl) * (tr.rows[k + 1].t - tr.rows[k].t);
  }
}

EnergyTotals energy_account(const Trace &tr) {
  if (tr.rows.empty())
    throw InputError("energy_account: empty trace");
  Trace copy = tr;
  accumulate_energy(copy);
  EnergyTotals e;
  e.energy_MJ = copy.rows.back().E_cum * 1e-6;
  double dist = 0.0;
  for (std::size_t k = 1; k < tr.rows.size(); ++k)
    dist += 0.5 * (tr.rows[k].V_veh + tr.rows[k - 1].V_veh) *
            (tr.rows[k].t - tr.rows[k - 1].t);
  e.distance_km = dist * 1e-3;
  e.MJ_per_km = per_distance(e.energy_MJ, e.distance_km);
  return e;
}

std::optional<double> per_distance(double energy_MJ, double distance_km) {
  if (!(distance_km > 0.0))
    return std::nullopt;
  return energy_MJ / distance_km;
}

double energy_between(const Trace &tr, double t0, double t1) {
  Trace copy = tr;
  accumulate_energy(copy);
  auto find = [&](double t) -> const TraceRow & {
    for (const auto &r : copy.rows)
      if (std::abs(r.t - t) <= 1e-9 * std::max(1.0, std::abs(t)))
        return r;
    std::ostringstream os;
    os << "energy_between: no trace sample at t = " << t;
    throw InputError(os.str());
  };
  return (find(t1).E_cum - find(t0).E_cum) * 1e-6;
}

Trace run_closed_loop(const Scenario &sc, ControllerKind controller, PlantKind plant,
                      const ModelSet &params, const SolverOptions &opt) {
  check_scenario(sc);
  const long N = whole_multiple(sc.duration, sc.Ts, "duration is not a multiple of Ts");
  const long sub = whole_multiple(sc.Ts, sc.dt, "Ts is not a multiple of dt");
  if (controller == ControllerKind::Nmpc) {
    if (std::abs(params.model.Ts - sc.Ts) > 1e-9)
      throw InputError("scenario: controller period differs from the model Ts");
    HorizonConfig h = sc.horizon;
    h.Ts = sc.Ts;
    if (!(h.Np >= 1 && h.Nu >= 1 && h.Nu <= h.Np && h.Nc >= 1 && h.Nc <= h.Np))
      throw InputError("scenario: inconsistent horizons");
  }

  ShutoffSchedule shutoff(static_cast<std::size_t>(N) + 1, sc.Ts);
  for (const auto &[a, b] : sc.shutoff)
    shutoff.add_interval(a, b);

  PlantState s = sc.initial;
  const Exogenous model_w{sc.model_exogenous ? sc.model_exogenous->first : sc.initial.T_int,
                          sc.model_exogenous ? sc.model_exogenous->second : sc.initial.T_shell,
                          sc.T_amb};
  State xm{sc.initial.T_cab, sc.initial.T_evap};

  OcpInstance inst;
  inst.model = params.model;
  inst.power = params.power;
  inst.horizon = sc.horizon;
  inst.horizon.Ts = sc.Ts;
  inst.schedule = ConstraintSchedule::uniform(inst.horizon, sc.x_lo, sc.x_hi, sc.u_lo,
                                              sc.u_hi, sc.a_sl);

  std::optional<SolveResult> previous;
  ControlInput last_u{sc.u_lo.W_bl, sc.u_hi.T_evap_set};
  Trace tr;
  tr.rows.reserve(static_cast<std::size_t>(N) + 1);

  for (long k = 0; k <= N; ++k) {
    const double t = static_cast<double>(k) * sc.Ts;
    TraceRow row;
    row.t = t;
    row.V_veh = sc.speed.at(t);
    row.T_amb = sc.T_amb;
    row.T_cab_ub = sc.T_cab_ub.at(t, sc.speed);
    if (plant == PlantKind::Surrogate) {
      row.T_cab = s.T_cab;
      row.T_evap = s.T_evap;
      row.T_int = s.T_int;
      row.T_shell = s.T_shell;
    } else {
      row.T_cab = xm.T_cab;
      row.T_evap = xm.T_evap;
      row.T_int = model_w.T_int;
      row.T_shell = model_w.T_shell;
    }

    PlantCommand cmd;
    if (shutoff.is_off(static_cast<std::size_t>(k))) {
      cmd = {sc.u_lo.W_bl, last_u.T_evap_set, false};
      row.slack_lo = std::max({0.0, sc.x_lo.T_cab - row.T_cab, sc.x_lo.T_evap - row.T_evap});
      row.slack_hi = std::max({0.0, row.T_cab - row.T_cab_ub, row.T_evap - sc.x_hi.T_evap});
    } else if (controller == ControllerKind::Nmpc) {
      inst.x0 = {row.T_cab, row.T_evap};
      inst.u_prev = last_u;
      inst.w = {row.T_int, row.T_shell, sc.T_amb};
      for (int i = 0; i <= inst.horizon.Nc; ++i)
        inst.schedule.x_hi[static_cast<std::size_t>(i)].T_cab =
            sc.T_cab_ub.at(t + i * sc.Ts, sc.speed);
      MpcStepResult r = mpc_step(inst, previous, opt);
      cmd = {r.applied.W_bl, r.applied.T_evap_set, true};
      for (std::size_t i = 0; i < r.solve.slack_lo.size(); ++i) {
        row.slack_lo = std::max({row.slack_lo, r.solve.slack_lo[i].T_cab,
                                 r.solve.slack_lo[i].T_evap});
        row.slack_hi = std::max({row.slack_hi, r.solve.slack_hi[i].T_cab,
                                 r.solve.slack_hi[i].T_evap});
      }
      row.iters = r.solve.iterations;
      row.solve_ms = r.solve.wall_ms;
      row.solver_capped = !r.solve.converged;
      previous = std::move(r.solve);
    } else {
      const PiStepResult r = nominal_pi_step(s.pi, sc.pi_setpoints, row.T_cab, row.T_evap,
                                             sc.pi, sc.Ts);
      s.pi = r.state;
      cmd = r.command;
      row.slack_lo = std::max({0.0, sc.x_lo.T_cab - row.T_cab, sc.x_lo.T_evap - row.T_evap});
      row.slack_hi = std::max({0.0, row.T_cab - row.T_cab_ub, row.T_evap - sc.x_hi.T_evap});
    }
    row.W_bl = cmd.W_bl;
    row.T_evap_set = cmd.T_evap_set;
    row.compressor_on = cmd.compressor_on;
    last_u = {cmd.W_bl, cmd.T_evap_set};

    if (plant == PlantKind::Surrogate) {
      const PlantOutputs o = plant_outputs(s, cmd, {sc.T_amb, row.V_veh}, sc.plant);
      row.T_ain = o.T_ain;
      if (k == N) {
        row.P_c = o.P_c;
        row.P_bl = o.P_bl;
      } else {
        double E_c = 0.0, E_bl = 0.0;
        for (long j = 0; j < sub; ++j) {
          const double tj = t + static_cast<double>(j) * sc.dt;
          const Environment env{sc.T_amb, sc.speed.at(tj + 0.5 * sc.dt)};
          const PlantStepResult st = plant_step(s, cmd, env, sc.plant);
          E_c += st.E_c;
          E_bl += st.E_bl;
          s.T_cab = st.state.T_cab;
          s.T_int = st.state.T_int;
          s.T_shell = st.state.T_shell;
          s.T_evap = st.state.T_evap;
        }
        row.P_c = E_c / sc.Ts;
        row.P_bl = E_bl / sc.Ts;
      }
    } else {
      const ControlInput u{cmd.W_bl, cmd.T_evap_set};
      row.T_ain = inlet_air_temperature(xm.T_evap, u.W_bl, params.model);
      row.P_c = cmd.compressor_on
                    ? compressor_power(u.W_bl, xm.T_evap, sc.T_amb, params.model, params.power)
                    : 0.0;
      row.P_bl = blower_power(u.W_bl, params.power);
      if (k < N)
        xm = model_step(xm, u, model_w, params.model);
    }
    tr.rows.push_back(row);
  }
  accumulate_energy(tr);
  return tr;
}

std::vector<SweepRow> speed_sensitivity_sweep(const std::vector<double> &speeds,
                                              const Scenario &base) {
  if (speeds.empty())
    throw InputError("speed_sensitivity_sweep: no speeds given");
  std::vector<SweepRow> out;
  out.reserve(speeds.size());
  for (double V : speeds) {
    if (V < 0.0)
      throw InputError("speed_sensitivity_sweep: negative speed");
    Scenario sc = base;
    sc.speed = SpeedProfile::constant(V);
    sc.shutoff.clear();
    const Trace tr = run_closed_loop(sc, ControllerKind::Pi, PlantKind::Surrogate, {});
    out.push_back({V, energy_account(tr)});
  }
  return out;
}

void write_sweep_csv(std::ostream &os, const std::vector<SweepRow> &rows) {
  os << "V_veh,energy_MJ,distance_km,MJ_per_km\n";
  for (const auto &r : rows) {
    put(os, r.V);
    os << ',';
    put(os, r.totals.energy_MJ);
    os << ',';
    put(os, r.totals.distance_km);
    os << ',';
    if (r.totals.MJ_per_km)
      put(os, *r.totals.MJ_per_km);
    else
      os << "NA";
    os << '\n';
  }
}

CaseComparison compare_traces(Trace case1, Trace case2, std::pair<double, double> window) {
  CaseComparison c;
  c.E_case1_MJ = energy_between(case1, window.first, window.second);
  c.E_case2_MJ = energy_between(case2, window.first, window.second);
  c.saving = c.E_case2_MJ != 0.0 ? (c.E_case2_MJ - c.E_case1_MJ) / c.E_case2_MJ : 0.0;
  c.case1 = std::move(case1);
  c.case2 = std::move(case2);
  return c;
}

CaseComparison compare_cases(const Scenario &sc, const ModelSet &params,
                             const SolverOptions &opt) {
  if (!sc.comparison_window)
    throw InputError("compare_cases: scenario has no comparison window");
  if (sc.T_cab_ub.kind != UpperBoundSpec::Kind::Speed)
    throw InputError("compare_cases: scenario needs a speed-coordinated comfort band");
  check_scenario(sc);
  const auto window = *sc.comparison_window;

  Trace t1 = run_closed_loop(sc, ControllerKind::Nmpc, PlantKind::Surrogate, params, opt);

  std::vector<double> time, cab;
  for (const auto &r : t1.rows) {
    time.push_back(r.t);
    cab.push_back(r.T_cab);
  }
  Scenario sc2 = sc;
  sc2.shutoff.clear();
  sc2.T_cab_ub.kind = UpperBoundSpec::Kind::Constant;
  sc2.T_cab_ub.value = constant_setpoint(time, cab, window.first, window.second);
  Trace t2 = run_closed_loop(sc2, ControllerKind::Nmpc, PlantKind::Surrogate, params, opt);

  CaseComparison c = compare_traces(std::move(t1), std::move(t2), window);
  c.constant_bound = sc2.T_cab_ub.value;
  return c;
}

} // namespace acmpc

namespace acmpc {
namespace {

InputBox box_of(const Scenario &sc) {
  return {sc.u_lo.W_bl, sc.u_hi.W_bl, sc.u_lo.T_evap_set, sc.u_hi.T_evap_set};
}

IdDataset plant_record(const Scenario &sc, const ExcitationConfig &cfg) {
  PlantSource src(sc.plant, sc.initial, {sc.T_amb, sc.speed.at(0.0)});
  return generate_excitation(cfg, src, box_of(sc));
}

} // namespace

IdentifyResult identify(const Scenario &sc) {
  check_scenario(sc);
  if (!sc.excitation)
    throw InputError("identify: scenario has no excitation block");
  IdentifyResult r;
  r.data = plant_record(sc, *sc.excitation);
  r.fit = fit_model_params(r.data, sc.excitation->sample_period);
  r.blower = fit_power_params(r.data);
  r.eta_cop = fit_compressor_cop(r.data, sc.plant.c_p);
  r.params.model = r.fit.params;
  r.params.power.beta = r.blower.beta;
  r.params.power.c_p = sc.plant.c_p;
  r.params.power.eta_cop = r.eta_cop;
  return r;
}

ValidationReport validate(const Scenario &sc, const ModelParams &model,
                          IdDataset *record) {
  check_scenario(sc);
  if (!sc.validation)
    throw InputError("validate: scenario has no validation block");
  const ValidationConfig &v = *sc.validation;
  if (std::abs(v.excitation.sample_period - model.Ts) > 1e-9)
    throw InputError("validate: sample period differs from the model Ts");
  IdDataset data = plant_record(sc, v.excitation);
  const auto starts = evenly_spaced_starts(data.size(), v.horizon, v.starts);
  ValidationReport rep = validate_multistep(model, data, v.horizon, starts);
  if (record)
    *record = std::move(data);
  return rep;
}

IdDataset simulate_model(const Scenario &sc, const ModelSet &params) {
  check_scenario(sc);
  if (!sc.excitation)
    throw InputError("simulate: scenario has no excitation block");
  if (std::abs(sc.excitation->sample_period - params.model.Ts) > 1e-9)
    throw InputError("simulate: sample period differs from the model Ts");
  ModelSource::ExogenousExcitation exo;
  const double T_int = sc.model_exogenous ? sc.model_exogenous->first : sc.initial.T_int;
  const double T_shell = sc.model_exogenous ? sc.model_exogenous->second : sc.initial.T_shell;
  exo.T_int_min = exo.T_int_max = T_int;
  exo.T_shell_min = exo.T_shell_max = T_shell;
  exo.hold = sc.excitation->duration + sc.excitation->warmup + 1.0;
  exo.T_amb = sc.T_amb;
  ModelSource src(params.model, params.power, {sc.initial.T_cab, sc.initial.T_evap}, exo,
                  sc.excitation->seed);
  return generate_excitation(*sc.excitation, src, box_of(sc));
}

} // namespace acmpc
