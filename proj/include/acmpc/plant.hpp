#pragma once

/*
 * Lumped four-temperature cabin/A-C plant used as the high-fidelity stand-in
 * for identification and closed-loop testing.
 *
 *   C_cab   dT_cab/dt   = h_ci (T_int - T_cab) + h_cs (T_shell - T_cab)
 *                         + W c_p (T_ain - T_cab)
 *   C_int   dT_int/dt   = h_ci (T_cab - T_int) + Q_sun_int
 *   C_shell dT_shell/dt = h_cs (T_cab - T_shell) + (h_sa + h_sv V)(T_amb - T_shell)
 *                         + Q_sun_shell
 *
 * Inlet air is a recirculation mix of cabin and ambient air cooled across the
 * evaporator wall with effectiveness 1 - exp(-UA / (W c_p)). While the
 * compressor runs, the wall relaxes toward its set-point with a first-order
 * lag but never faster than the air load can warm it (the compressor cannot
 * heat). With the compressor off the wall is warmed by the air stream only.
 * Compressor electrical power is the heat pumped out of the wall divided by a
 * speed-dependent COP.
 */

#include <array>

namespace acmpc {

struct PlantParams {
  double C_cab = 0.0;   //!< cabin air + fast surfaces [J/K]
  double C_int = 0.0;   //!< interior mass [J/K]
  double C_shell = 0.0; //!< shell [J/K]
  double C_evap = 0.0;  //!< evaporator wall [J/K]

  double h_cab_int = 0.0;             //!< [W/K]
  double h_cab_shell = 0.0;           //!< [W/K]
  double h_shell_amb = 0.0;           //!< at standstill [W/K]
  double h_shell_amb_per_speed = 0.0; //!< [W/K per m/s]

  double Q_sun_int = 0.0;   //!< solar gain absorbed by the interior [W]
  double Q_sun_shell = 0.0; //!< solar gain absorbed by the shell [W]

  double UA_evap = 0.0;           //!< air-side evaporator conductance [W/K]
  double tau_evap = 0.0;          //!< wall tracking time constant [s]
  double tau_evap_per_flow = 0.0; //!< added lag per unit blower flow [s per kg/s]

  double cop_base = 0.0; //!< COP at standstill [-]
  double kappa_v = 0.0;  //!< COP gain per m/s of vehicle speed

  double recirc_gain = 0.0; //!< per degC of (T_amb - T_cab)
  double recirc_bias = 0.0;
  double recirc_min = 0.0;
  double recirc_max = 1.0;

  double c_p = 0.0;
  std::array<double, 3> beta{}; //!< blower power coefficients
  double dt = 0.0;              //!< integration step [s]
};

/// Nominal two-loop PI controller configuration.
struct PiParams {
  double Kp_blower = 0.0; //!< [kg/s per K]
  double Ki_blower = 0.0; //!< [kg/s per K s]
  double W_ff = 0.0;      //!< blower feedforward [kg/s]
  double Kp_evap = 0.0;   //!< [-]
  double Ki_evap = 0.0;   //!< [1/s]
  double K_aw = 0.0;      //!< back-calculation gain [1/s]
  double integ_limit_blower = 0.0;
  double integ_limit_evap = 0.0;
  double hysteresis = 0.0; //!< on-off latch half width [K]
  double W_min = 0.0, W_max = 0.0;
  double T_set_min = 0.0, T_set_max = 0.0;
};

struct PiState {
  double integ_blower = 0.0;
  double integ_evap = 0.0;
  bool ac_on = true;
};

struct PlantState {
  double T_cab = 0.0;
  double T_int = 0.0;
  double T_shell = 0.0;
  double T_evap = 0.0;
  PiState pi;
};

struct Environment {
  double T_amb = 0.0;
  double V_veh = 0.0; //!< [m/s]
};

struct PlantCommand {
  double W_bl = 0.0;
  double T_evap_set = 0.0;
  bool compressor_on = true;
};

struct PlantOutputs {
  double T_ain = 0.0;
  double P_c = 0.0;
  double P_bl = 0.0;
  double Q_air = 0.0;  //!< heat taken from the air stream [W]
  double Q_comp = 0.0; //!< heat pumped by the compressor [W]
  double alpha_recirc = 0.0;
};

struct PlantStepResult {
  PlantState state;
  PlantOutputs outputs; //!< evaluated at the new state
  double E_c = 0.0;     //!< compressor electrical energy over the step [J]
  double E_bl = 0.0;    //!< blower electrical energy over the step [J]
  double Q_air = 0.0;   //!< heat removed from the air over the step [J]
  double Q_comp = 0.0;  //!< heat pumped over the step [J]
};

/// Throws InputError on non-positive capacitances, conductances, time
/// constants, dt outside (0, 0.1] or negative kappa_v.
void check_plant_params(const PlantParams &p);

double speed_cop_multiplier(double V, const PlantParams &p);

double recirculation_rate(double T_cab, double T_amb, const PlantParams &p);

/// Algebraic outputs for a given state and command.
PlantOutputs plant_outputs(const PlantState &s, const PlantCommand &cmd,
                           const Environment &env, const PlantParams &p);

/// One RK4 step of length p.dt; energies integrated alongside the states.
PlantStepResult plant_step(const PlantState &s, const PlantCommand &cmd,
                           const Environment &env, const PlantParams &p);

struct PiSetpoints {
  double T_cab_set = 0.0;
  double T_evap_set = 0.0;
};

struct PiStepResult {
  PlantCommand command;
  PiState state;
};

/// One sample of the nominal controller: a blower loop tracking cabin
/// temperature, an evaporator loop trimming the wall set-point command and a
/// hysteresis latch that drops the compressor when the wall gets too cold.
PiStepResult nominal_pi_step(const PiState &s, const PiSetpoints &sp,
                             double T_cab_meas, double T_evap_meas,
                             const PiParams &p, double sample_period);

} // namespace acmpc
