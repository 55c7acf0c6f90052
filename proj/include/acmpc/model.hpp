#pragma once

/*
 * Control-oriented A/C prediction model.
 *
 * Two states (cabin air and evaporator wall temperature), two inputs (blower
 * mass flow and evaporator wall set-point) and three measured exogenous
 * temperatures. The cabin update is bilinear in blower flow and inlet air
 * temperature; everything else is affine. Temperatures are in degC
 * throughout: only differences enter the formulas.
 */

#include <array>
#include <span>
#include <vector>

namespace acmpc {

struct ModelParams {
  std::array<double, 7> gamma{};
  std::array<double, 3> tau{};
  double Ts = 0.0; //!< sampling period [s]

  /// Identified parameter set reported for the reference vehicle, Ts = 5 s.
  static ModelParams reference();
};

/// Electrical power model coefficients.
struct PowerParams {
  std::array<double, 3> beta{}; //!< blower: beta1*W^2 + beta2*W + beta3 [W]
  double c_p = 0.0;             //!< specific heat of air [J/(kg K)]
  double eta_cop = 0.0;         //!< coefficient of performance [-]

  static PowerParams reference();
};

struct State {
  double T_cab = 0.0;
  double T_evap = 0.0;
};

struct ControlInput {
  double W_bl = 0.0;       //!< blower mass flow [kg/s]
  double T_evap_set = 0.0; //!< evaporator wall set-point [degC]
};

/// Measured temperatures treated as inputs over a prediction.
struct Exogenous {
  double T_int = 0.0;
  double T_shell = 0.0;
  double T_amb = 0.0;
};

/// Throws InputError unless Ts > 0, the evaporator map is a contraction and
/// the cabin map is a contraction for every blower flow in [W_min, W_max].
void check_model_params(const ModelParams &p, double W_min, double W_max);

/// Throws InputError unless c_p > 0, eta_cop > 0 and beta1 > 0.
void check_power_params(const PowerParams &q);

double inlet_air_temperature(double T_evap, double W_bl, const ModelParams &p);

State model_step(const State &x, const ControlInput &u, const Exogenous &w,
                 const ModelParams &p);

struct OpenLoopTrajectory {
  std::vector<State> states;    //!< N+1 entries, states[0] = x0
  std::vector<double> T_ain;    //!< N entries
};

OpenLoopTrajectory simulate_open_loop(const State &x0,
                                      std::span<const ControlInput> u_seq,
                                      std::span<const Exogenous> w_seq,
                                      const ModelParams &p);

/// Steady state of the evaporator recursion for a constant set-point.
double evaporator_fixed_point(double T_evap_set, const ModelParams &p);

/// Compressor power (c_p/eta) W (T_amb - T_ain). Not clamped: it turns
/// negative whenever the modelled inlet air is warmer than ambient.
double compressor_power(double W_bl, double T_evap, double T_amb,
                        const ModelParams &p, const PowerParams &q);

double blower_power(double W_bl, const PowerParams &q);

/// Electrical power drawn at one prediction step.
double stage_cost(const State &x, const ControlInput &u, double T_amb,
                  const ModelParams &p, const PowerParams &q);

} // namespace acmpc
