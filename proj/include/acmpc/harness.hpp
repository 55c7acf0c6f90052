#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "acmpc/icm.hpp"
#include "acmpc/model.hpp"
#include "acmpc/nmpc.hpp"
#include "acmpc/plant.hpp"
#include "acmpc/sysid.hpp"

namespace acmpc {

/// Piecewise-linear speed profile, held constant outside its breakpoints.
struct SpeedProfile {
  std::vector<std::pair<double, double>> points; //!< (t [s], V [m/s])

  static SpeedProfile constant(double V) { return {{{0.0, V}}}; }
  double at(double t) const;
};

/// Source of the time-varying cabin upper bound.
struct UpperBoundSpec {
  enum class Kind { Constant, Steps, Speed };
  Kind kind = Kind::Constant;
  double value = 0.0;                              //!< Constant
  std::vector<std::pair<double, double>> steps;    //!< Steps: (t_start, bound)
  ComfortBand band;                                //!< Speed

  double at(double t, const SpeedProfile &speed) const;
};

struct ModelSet {
  ModelParams model;
  PowerParams power;
};

/// Fresh-data multi-step check run after identification.
struct ValidationConfig {
  ExcitationConfig excitation;
  std::size_t starts = 0;
  std::size_t horizon = 0;
  double tolerance = 0.0;       //!< [degC]
  double required_fraction = 0.0;
};

struct Scenario {
  std::string name;
  double duration = 0.0;
  double Ts = 5.0;
  double dt = 0.01;
  double T_amb = 30.0;
  SpeedProfile speed;
  PlantState initial;
  HorizonConfig horizon;
  State x_lo, x_hi;      //!< x_hi.T_cab is replaced by the bound schedule
  ControlInput u_lo, u_hi;
  std::array<double, 2> a_sl{};
  UpperBoundSpec T_cab_ub;
  std::vector<std::pair<double, double>> shutoff;
  std::optional<std::pair<double, double>> comparison_window;
  PiSetpoints pi_setpoints;
  /// Interior and shell temperatures for runs against the prediction model;
  /// the initial plant values are used when absent.
  std::optional<std::pair<double, double>> model_exogenous;
  PlantParams plant;
  PiParams pi;
  std::optional<ExcitationConfig> excitation;
  std::optional<ValidationConfig> validation;
  SolverOptions solver;
  std::uint64_t seed = 0;
};

/// Throws InputError when the duration is not a multiple of Ts, Ts not a
/// multiple of dt, or any parameter block is invalid.
void check_scenario(const Scenario &sc);

enum class ControllerKind { Nmpc, Pi };
enum class PlantKind { Surrogate, Model };

struct TraceRow {
  double t = 0.0;
  double T_cab = 0.0, T_evap = 0.0, T_ain = 0.0, T_int = 0.0, T_shell = 0.0,
         T_amb = 0.0;
  double W_bl = 0.0, T_evap_set = 0.0;
  double T_cab_ub = 0.0;
  double P_c = 0.0, P_bl = 0.0; //!< mean power over [t, t + Ts); instantaneous on the last row
  double E_cum = 0.0;           //!< energy consumed before t [J]
  double V_veh = 0.0;
  double slack_lo = 0.0, slack_hi = 0.0;
  int iters = 0;
  double solve_ms = 0.0;
  bool compressor_on = true;
  bool solver_capped = false;
};

struct Trace {
  std::vector<TraceRow> rows;

  std::size_t capped_steps() const;
  std::size_t solved_steps() const;
};

inline constexpr const char *kTraceCsvHeader =
    "t,T_cab,T_evap,T_ain,T_int,T_shell,T_amb,W_bl,T_evap_set,T_cab_ub,P_c,P_bl,"
    "E_cum,V_veh,slack_lo,slack_hi,iters,solve_ms";

void write_trace_csv(std::ostream &os, const Trace &tr);

Trace run_closed_loop(const Scenario &sc, ControllerKind controller,
                      PlantKind plant, const ModelSet &params,
                      const SolverOptions &opt = {});

/// Fills E_cum by integrating each row's power over its interval.
void accumulate_energy(Trace &tr);

struct EnergyTotals {
  double energy_MJ = 0.0;
  double distance_km = 0.0;
  std::optional<double> MJ_per_km; //!< undefined when the distance is zero
};

EnergyTotals energy_account(const Trace &tr);

/// Energy consumed between two trace instants [MJ].
double energy_between(const Trace &tr, double t0, double t1);

/// Energy per distance; nullopt for zero distance.
std::optional<double> per_distance(double energy_MJ, double distance_km);

struct SweepRow {
  double V = 0.0;
  EnergyTotals totals;
};

/// PI-baseline runs of `base` on the surrogate plant at each constant speed.
std::vector<SweepRow> speed_sensitivity_sweep(const std::vector<double> &speeds,
                                              const Scenario &base);

void write_sweep_csv(std::ostream &os, const std::vector<SweepRow> &rows);

struct CaseComparison {
  double E_case1_MJ = 0.0;
  double E_case2_MJ = 0.0;
  double saving = 0.0; //!< (E2 - E1) / E2
  double constant_bound = 0.0;
  Trace case1, case2;
};

/// Comparison-window energies and relative saving of two traces.
CaseComparison compare_traces(Trace case1, Trace case2,
                              std::pair<double, double> window);

/// Case 1: speed-coordinated bound plus the scenario's shut-off windows.
/// Case 2: constant bound equal to Case 1's mean cabin temperature over the
/// comparison window, no shut-off. Both run the NMPC against the plant.
CaseComparison compare_cases(const Scenario &sc, const ModelSet &params,
                             const SolverOptions &opt = {});

struct IdentifyResult {
  ModelFit fit;
  PowerFit blower;
  double eta_cop = 0.0;
  ModelSet params;
  IdDataset data;
};

/// Excites the surrogate plant with the scenario's excitation block (constant
/// speed taken at t = 0) and fits model and power parameters.
IdentifyResult identify(const Scenario &sc);

/// Multi-step validation of `model` on a fresh plant record generated from the
/// scenario's validation block.
ValidationReport validate(const Scenario &sc, const ModelParams &model,
                          IdDataset *record = nullptr);

/// Open-loop response of the prediction model to the scenario's excitation
/// inputs with interior and shell temperatures held constant.
IdDataset simulate_model(const Scenario &sc, const ModelSet &params);

} // namespace acmpc
