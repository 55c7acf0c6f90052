#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "acmpc/errors.hpp"
#include "acmpc/harness.hpp"
#include "acmpc/icm.hpp"
#include "acmpc/io.hpp"
#include "acmpc/model.hpp"
#include "acmpc/nmpc.hpp"
#include "acmpc/qcqp.hpp"

namespace py = pybind11;
using namespace acmpc;

namespace {

// Column-oriented view of a trace, keyed like the CSV header.
py::dict trace_columns(const Trace &tr) {
  std::vector<double> t, T_cab, T_evap, T_ain, T_int, T_shell, T_amb, W_bl, T_set, ub, P_c,
      P_bl, E_cum, V, s_lo, s_hi, ms;
  std::vector<int> iters;
  for (const TraceRow &r : tr.rows) {
    t.push_back(r.t);
    T_cab.push_back(r.T_cab);
    T_evap.push_back(r.T_evap);
    T_ain.push_back(r.T_ain);
    T_int.push_back(r.T_int);
    T_shell.push_back(r.T_shell);
    T_amb.push_back(r.T_amb);
    W_bl.push_back(r.W_bl);
    T_set.push_back(r.T_evap_set);
    ub.push_back(r.T_cab_ub);
    P_c.push_back(r.P_c);
    P_bl.push_back(r.P_bl);
    E_cum.push_back(r.E_cum);
    V.push_back(r.V_veh);
    s_lo.push_back(r.slack_lo);
    s_hi.push_back(r.slack_hi);
    iters.push_back(r.iters);
    ms.push_back(r.solve_ms);
  }
  py::dict d;
  d["t"] = t;
  d["T_cab"] = T_cab;
  d["T_evap"] = T_evap;
  d["T_ain"] = T_ain;
  d["T_int"] = T_int;
  d["T_shell"] = T_shell;
  d["T_amb"] = T_amb;
  d["W_bl"] = W_bl;
  d["T_evap_set"] = T_set;
  d["T_cab_ub"] = ub;
  d["P_c"] = P_c;
  d["P_bl"] = P_bl;
  d["E_cum"] = E_cum;
  d["V_veh"] = V;
  d["slack_lo"] = s_lo;
  d["slack_hi"] = s_hi;
  d["iters"] = iters;
  d["solve_ms"] = ms;
  d["capped_steps"] = tr.capped_steps();
  return d;
}

ControllerKind controller_from(const std::string &s) {
  if (s == "nmpc") return ControllerKind::Nmpc;
  if (s == "pi") return ControllerKind::Pi;
  throw InputError("controller must be 'nmpc' or 'pi', got '" + s + "'");
}

PlantKind plant_from(const std::string &s) {
  if (s == "surrogate") return PlantKind::Surrogate;
  if (s == "model") return PlantKind::Model;
  throw InputError("plant must be 'surrogate' or 'model', got '" + s + "'");
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "A/C energy-optimal NMPC: model, identification, solver and harness";

  py::register_exception<RankDeficientError>(m, "RankDeficientError", PyExc_RuntimeError);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_readwrite("gamma", &ModelParams::gamma)
      .def_readwrite("tau", &ModelParams::tau)
      .def_readwrite("Ts", &ModelParams::Ts)
      .def_static("reference", &ModelParams::reference);

  py::class_<PowerParams>(m, "PowerParams")
      .def(py::init<>())
      .def_readwrite("beta", &PowerParams::beta)
      .def_readwrite("c_p", &PowerParams::c_p)
      .def_readwrite("eta_cop", &PowerParams::eta_cop)
      .def_static("reference", &PowerParams::reference);

  py::class_<ModelSet>(m, "ModelSet")
      .def(py::init<>())
      .def(py::init([](ModelParams p, PowerParams q) { return ModelSet{p, q}; }),
           py::arg("model"), py::arg("power"))
      .def_readwrite("model", &ModelSet::model)
      .def_readwrite("power", &ModelSet::power);

  py::class_<State>(m, "State")
      .def(py::init<>())
      .def(py::init([](double c, double e) { return State{c, e}; }), py::arg("T_cab"),
           py::arg("T_evap"))
      .def_readwrite("T_cab", &State::T_cab)
      .def_readwrite("T_evap", &State::T_evap)
      .def("__repr__", [](const State &s) {
        std::ostringstream os;
        os << "State(T_cab=" << s.T_cab << ", T_evap=" << s.T_evap << ")";
        return os.str();
      });

  py::class_<ControlInput>(m, "ControlInput")
      .def(py::init<>())
      .def(py::init([](double w, double t) { return ControlInput{w, t}; }), py::arg("W_bl"),
           py::arg("T_evap_set"))
      .def_readwrite("W_bl", &ControlInput::W_bl)
      .def_readwrite("T_evap_set", &ControlInput::T_evap_set)
      .def("__repr__", [](const ControlInput &u) {
        std::ostringstream os;
        os << "ControlInput(W_bl=" << u.W_bl << ", T_evap_set=" << u.T_evap_set << ")";
        return os.str();
      });

  py::class_<Exogenous>(m, "Exogenous")
      .def(py::init<>())
      .def(py::init([](double i, double s, double a) { return Exogenous{i, s, a}; }),
           py::arg("T_int"), py::arg("T_shell"), py::arg("T_amb"))
      .def_readwrite("T_int", &Exogenous::T_int)
      .def_readwrite("T_shell", &Exogenous::T_shell)
      .def_readwrite("T_amb", &Exogenous::T_amb);

  m.def("inlet_air_temperature", &inlet_air_temperature, py::arg("T_evap"), py::arg("W_bl"),
        py::arg("params"));
  m.def("model_step", &model_step, py::arg("x"), py::arg("u"), py::arg("w"), py::arg("params"));
  m.def("evaporator_fixed_point", &evaporator_fixed_point, py::arg("T_evap_set"),
        py::arg("params"));
  m.def("blower_power", &blower_power, py::arg("W_bl"), py::arg("power"));
  m.def("compressor_power", &compressor_power, py::arg("W_bl"), py::arg("T_evap"),
        py::arg("T_amb"), py::arg("params"), py::arg("power"));
  m.def("stage_cost", &stage_cost, py::arg("x"), py::arg("u"), py::arg("T_amb"),
        py::arg("params"), py::arg("power"));
  m.def(
      "simulate_open_loop",
      [](const State &x0, const std::vector<ControlInput> &u, const std::vector<Exogenous> &w,
         const ModelParams &p) {
        const OpenLoopTrajectory tr = simulate_open_loop(x0, u, w, p);
        return py::make_tuple(tr.states, tr.T_ain);
      },
      py::arg("x0"), py::arg("u"), py::arg("w"), py::arg("params"),
      "Returns (states, T_ain); states has one more entry than the inputs.");

  py::class_<HorizonConfig>(m, "HorizonConfig")
      .def(py::init<>())
      .def(py::init([](int Np, int Nu, int Nc, double Ts) { return HorizonConfig{Np, Nu, Nc, Ts}; }),
           py::arg("Np"), py::arg("Nu"), py::arg("Nc"), py::arg("Ts"))
      .def_readwrite("Np", &HorizonConfig::Np)
      .def_readwrite("Nu", &HorizonConfig::Nu)
      .def_readwrite("Nc", &HorizonConfig::Nc)
      .def_readwrite("Ts", &HorizonConfig::Ts);

  py::class_<ConstraintSchedule>(m, "ConstraintSchedule")
      .def(py::init<>())
      .def_readwrite("x_lo", &ConstraintSchedule::x_lo)
      .def_readwrite("x_hi", &ConstraintSchedule::x_hi)
      .def_readwrite("u_lo", &ConstraintSchedule::u_lo)
      .def_readwrite("u_hi", &ConstraintSchedule::u_hi)
      .def_readwrite("a_sl", &ConstraintSchedule::a_sl)
      .def_static("uniform", &ConstraintSchedule::uniform, py::arg("horizon"), py::arg("x_lo"),
                  py::arg("x_hi"), py::arg("u_lo"), py::arg("u_hi"), py::arg("a_sl"));

  py::class_<OcpInstance>(m, "OcpInstance")
      .def(py::init<>())
      .def_readwrite("x0", &OcpInstance::x0)
      .def_readwrite("u_prev", &OcpInstance::u_prev)
      .def_readwrite("w", &OcpInstance::w)
      .def_readwrite("model", &OcpInstance::model)
      .def_readwrite("power", &OcpInstance::power)
      .def_readwrite("horizon", &OcpInstance::horizon)
      .def_readwrite("schedule", &OcpInstance::schedule);

  py::class_<SolverOptions>(m, "SolverOptions")
      .def(py::init<>())
      .def_readwrite("max_iterations", &SolverOptions::max_iterations)
      .def_readwrite("tolerance", &SolverOptions::tolerance)
      .def_readwrite("smoothing_start", &SolverOptions::smoothing_start)
      .def_readwrite("warm_smoothing_start", &SolverOptions::warm_smoothing_start)
      .def_readwrite("smoothing_final", &SolverOptions::smoothing_final)
      .def_readwrite("smoothing_factor", &SolverOptions::smoothing_factor);

  py::class_<SolveResult>(m, "SolveResult")
      .def_readonly("U", &SolveResult::U)
      .def_readonly("x_pred", &SolveResult::x_pred)
      .def_readonly("slack", &SolveResult::slack)
      .def_readonly("cost", &SolveResult::cost)
      .def_readonly("power_cost", &SolveResult::power_cost)
      .def_readonly("penalty_cost", &SolveResult::penalty_cost)
      .def_readonly("iterations", &SolveResult::iterations)
      .def_readonly("residual", &SolveResult::residual)
      .def_readonly("converged", &SolveResult::converged)
      .def_readonly("wall_ms", &SolveResult::wall_ms);

  py::class_<GridResolution>(m, "GridResolution")
      .def(py::init<>())
      .def(py::init([](double w, double t) { return GridResolution{w, t}; }), py::arg("W_bl"),
           py::arg("T_evap_set"))
      .def_readwrite("W_bl", &GridResolution::W_bl)
      .def_readwrite("T_evap_set", &GridResolution::T_evap_set);

  py::class_<BruteForceResult>(m, "BruteForceResult")
      .def_readonly("U", &BruteForceResult::U)
      .def_readonly("cost", &BruteForceResult::cost)
      .def_readonly("evaluations", &BruteForceResult::evaluations);

  m.def("check_instance", &check_instance, py::arg("instance"));
  m.def(
      "evaluate_nlp",
      [](const OcpInstance &inst, const InputSequence &U) {
        const NlpEvaluation e = evaluate_nlp(inst, U);
        return py::make_tuple(e.cost, e.gradient);
      },
      py::arg("instance"), py::arg("U"), "Returns (cost, gradient) for a move sequence.");
  m.def(
      "solve_ocp",
      [](const OcpInstance &inst, std::optional<InputSequence> warm, const SolverOptions &opt) {
        py::gil_scoped_release release;
        return solve_ocp(inst, warm, opt);
      },
      py::arg("instance"), py::arg("warm") = std::nullopt, py::arg("options") = SolverOptions{});
  m.def(
      "brute_force_ocp",
      [](const OcpInstance &inst, const GridResolution &grid) {
        py::gil_scoped_release release;
        return brute_force_ocp(inst, grid);
      },
      py::arg("instance"), py::arg("grid") = GridResolution{});

  m.def(
      "qcqp_matrices",
      [](const ModelParams &p) {
        const QcqpMatrices q = build_qcqp_matrices(p);
        return py::make_tuple(Eigen::MatrixXd(q.C), Eigen::MatrixXd(q.A1),
                              Eigen::MatrixXd(q.A2), q.c);
      },
      py::arg("params"), "Returns (C, A1, A2, c) of the stacked one-step dynamics.");

  m.def(
      "bound_schedule_from_speed",
      [](const std::vector<double> &V, double T_hi, double T_lo, double V_ref) {
        return bound_schedule_from_speed(V, ComfortBand{T_hi, T_lo, V_ref});
      },
      py::arg("speed"), py::arg("T_hi") = 26.0, py::arg("T_lo") = 22.0,
      py::arg("V_ref") = 20.0);

  py::class_<Scenario>(m, "Scenario")
      .def_readwrite("name", &Scenario::name)
      .def_readwrite("duration", &Scenario::duration)
      .def_readwrite("Ts", &Scenario::Ts)
      .def_readwrite("T_amb", &Scenario::T_amb)
      .def_readwrite("horizon", &Scenario::horizon)
      .def_readwrite("solver", &Scenario::solver)
      .def_readwrite("seed", &Scenario::seed);

  m.def("load_params", &load_params, py::arg("path"));
  m.def("save_params", &save_params, py::arg("path"), py::arg("params"));
  m.def("load_scenario", &load_scenario, py::arg("path"));

  m.def(
      "identify",
      [](const Scenario &sc) {
        py::gil_scoped_release release;
        return identify(sc).params;
      },
      py::arg("scenario"), "Excite the surrogate plant and fit model and power parameters.");
  m.def(
      "validate",
      [](const Scenario &sc, const ModelParams &p) {
        const ValidationReport r = validate(sc, p);
        const double tol = sc.validation ? sc.validation->tolerance : 2.5;
        py::dict d;
        d["tolerance"] = tol;
        d["starts"] = r.starts.size();
        d["horizon"] = r.horizon;
        d["max_abs"] = r.max_abs;
        d["fraction_within"] = std::vector<double>{r.fraction_within(Signal::T_cab, tol),
                                                   r.fraction_within(Signal::T_evap, tol),
                                                   r.fraction_within(Signal::T_ain, tol)};
        return d;
      },
      py::arg("scenario"), py::arg("params"));
  m.def(
      "run_closed_loop",
      [](const Scenario &sc, const std::string &controller, const std::string &plant,
         const ModelSet &params) {
        Trace tr;
        {
          py::gil_scoped_release release;
          tr = run_closed_loop(sc, controller_from(controller), plant_from(plant), params,
                               sc.solver);
        }
        const EnergyTotals e = energy_account(tr);
        py::dict d = trace_columns(tr);
        d["energy_MJ"] = e.energy_MJ;
        d["distance_km"] = e.distance_km;
        d["MJ_per_km"] = e.MJ_per_km;
        return d;
      },
      py::arg("scenario"), py::arg("controller") = "nmpc", py::arg("plant") = "surrogate",
      py::arg("params"), "Closed-loop run; returns trace columns and energy totals.");
  m.def(
      "sweep_speed",
      [](const std::vector<double> &speeds, const Scenario &base) {
        std::vector<SweepRow> rows;
        {
          py::gil_scoped_release release;
          rows = speed_sensitivity_sweep(speeds, base);
        }
        py::list out;
        for (const SweepRow &r : rows) {
          py::dict d;
          d["V"] = r.V;
          d["energy_MJ"] = r.totals.energy_MJ;
          d["distance_km"] = r.totals.distance_km;
          d["MJ_per_km"] = r.totals.MJ_per_km;
          out.append(d);
        }
        return out;
      },
      py::arg("speeds"), py::arg("scenario"));
  m.def(
      "compare_cases",
      [](const Scenario &sc, const ModelSet &params) {
        CaseComparison c;
        {
          py::gil_scoped_release release;
          c = compare_cases(sc, params, sc.solver);
        }
        py::dict d;
        d["E_case1_MJ"] = c.E_case1_MJ;
        d["E_case2_MJ"] = c.E_case2_MJ;
        d["saving"] = c.saving;
        d["constant_bound"] = c.constant_bound;
        return d;
      },
      py::arg("scenario"), py::arg("params"));
}
