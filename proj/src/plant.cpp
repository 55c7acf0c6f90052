#include "acmpc/plant.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "acmpc/errors.hpp"

namespace acmpc {
namespace {

// Integrated quantities: 4 temperatures + 4 energy accumulators.
using Vec8 = std::array<double, 8>;

struct Derivative {
  Vec8 d{};
  PlantOutputs out;
};

double evaporator_effectiveness(double W, const PlantParams &p) {
  if (W <= 0.0)
    return 1.0;
  return 1.0 - std::exp(-p.UA_evap / (W * p.c_p));
}

Derivative rhs(double T_cab, double T_int, double T_shell, double T_evap,
               const PlantCommand &cmd, const Environment &env,
               const PlantParams &p) {
  Derivative r;
  PlantOutputs &o = r.out;
  const double W = std::max(cmd.W_bl, 0.0);

  o.alpha_recirc = recirculation_rate(T_cab, env.T_amb, p);
  const double T_mix = o.alpha_recirc * T_cab + (1.0 - o.alpha_recirc) * env.T_amb;
  const double eps = evaporator_effectiveness(W, p);
  o.T_ain = T_mix - eps * (T_mix - T_evap);
  o.Q_air = W * p.c_p * (T_mix - o.T_ain);

  double dT_evap = o.Q_air / p.C_evap;
  if (cmd.compressor_on) {
    const double tau = p.tau_evap + p.tau_evap_per_flow * W;
    dT_evap = std::min((cmd.T_evap_set - T_evap) / tau, dT_evap);
    o.Q_comp = o.Q_air - p.C_evap * dT_evap;
  } else {
    o.Q_comp = 0.0;
  }
  o.P_c = o.Q_comp / (p.cop_base * speed_cop_multiplier(env.V_veh, p));
  o.P_bl = (p.beta[0] * W + p.beta[1]) * W + p.beta[2];

  const double h_sa = p.h_shell_amb + p.h_shell_amb_per_speed * env.V_veh;
  r.d[0] = (p.h_cab_int * (T_int - T_cab) + p.h_cab_shell * (T_shell - T_cab) +
            W * p.c_p * (o.T_ain - T_cab)) /
           p.C_cab;
  r.d[1] = (p.h_cab_int * (T_cab - T_int) + p.Q_sun_int) / p.C_int;
  r.d[2] = (p.h_cab_shell * (T_cab - T_shell) + h_sa * (env.T_amb - T_shell) +
            p.Q_sun_shell) /
           p.C_shell;
  r.d[3] = dT_evap;
  r.d[4] = o.P_c;
  r.d[5] = o.P_bl;
  r.d[6] = o.Q_air;
  r.d[7] = o.Q_comp;
  return r;
}

void require_positive(double v, const char *name) {
  if (!(v > 0.0)) {
    std::ostringstream os;
    os << "plant params: " << name << " must be positive (got " << v << ")";
    throw InputError(os.str());
  }
}

} // namespace

void check_plant_params(const PlantParams &p) {
  require_positive(p.C_cab, "C_cab");
  require_positive(p.C_int, "C_int");
  require_positive(p.C_shell, "C_shell");
  require_positive(p.C_evap, "C_evap");
  require_positive(p.h_cab_int, "h_cab_int");
  require_positive(p.h_cab_shell, "h_cab_shell");
  require_positive(p.h_shell_amb, "h_shell_amb");
  require_positive(p.UA_evap, "UA_evap");
  require_positive(p.tau_evap, "tau_evap");
  require_positive(p.cop_base, "cop_base");
  require_positive(p.c_p, "c_p");
  if (p.Q_sun_int < 0.0 || p.Q_sun_shell < 0.0)
    throw InputError("plant params: solar gains must be >= 0");
  if (p.h_shell_amb_per_speed < 0.0 || p.tau_evap_per_flow < 0.0)
    throw InputError("plant params: speed and flow dependencies must be >= 0");
  if (!(p.dt > 0.0 && p.dt <= 0.1))
    throw InputError("plant params: dt must lie in (0, 0.1]");
  if (!(p.kappa_v >= 0.0))
    throw InputError("plant params: kappa_v must be >= 0");
  if (!(p.recirc_min >= 0.0 && p.recirc_min <= p.recirc_max &&
        p.recirc_max <= 1.0))
    throw InputError("plant params: recirculation limits must satisfy "
                     "0 <= min <= max <= 1");
}

double speed_cop_multiplier(double V, const PlantParams &p) {
  return 1.0 + p.kappa_v * V;
}

double recirculation_rate(double T_cab, double T_amb, const PlantParams &p) {
  const double a = p.recirc_gain * (T_amb - T_cab) + p.recirc_bias;
  return std::clamp(a, p.recirc_min, p.recirc_max);
}

PlantOutputs plant_outputs(const PlantState &s, const PlantCommand &cmd,
                           const Environment &env, const PlantParams &p) {
  return rhs(s.T_cab, s.T_int, s.T_shell, s.T_evap, cmd, env, p).out;
}

PlantStepResult plant_step(const PlantState &s, const PlantCommand &cmd,
                           const Environment &env, const PlantParams &p) {
  const double h = p.dt;
  const Vec8 y0{s.T_cab, s.T_int, s.T_shell, s.T_evap, 0.0, 0.0, 0.0, 0.0};

  auto eval = [&](const Vec8 &y) {
    return rhs(y[0], y[1], y[2], y[3], cmd, env, p).d;
  };
  auto axpy = [](const Vec8 &y, double a, const Vec8 &k) {
    Vec8 r;
    for (std::size_t i = 0; i < r.size(); ++i)
      r[i] = y[i] + a * k[i];
    return r;
  };

  const Vec8 k1 = eval(y0);
  const Vec8 k2 = eval(axpy(y0, 0.5 * h, k1));
  const Vec8 k3 = eval(axpy(y0, 0.5 * h, k2));
  const Vec8 k4 = eval(axpy(y0, h, k3));
  Vec8 y1;
  for (std::size_t i = 0; i < y1.size(); ++i)
    y1[i] = y0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

  PlantStepResult r;
  r.state = s;
  r.state.T_cab = y1[0];
  r.state.T_int = y1[1];
  r.state.T_shell = y1[2];
  r.state.T_evap = y1[3];
  r.E_c = y1[4];
  r.E_bl = y1[5];
  r.Q_air = y1[6];
  r.Q_comp = y1[7];
  r.outputs = plant_outputs(r.state, cmd, env, p);
  return r;
}

PiStepResult nominal_pi_step(const PiState &s, const PiSetpoints &sp,
                             double T_cab_meas, double T_evap_meas,
                             const PiParams &p, double sample_period) {
  PiStepResult r;
  r.state = s;
  PiState &n = r.state;

  // Blower: positive error means the cabin is too warm.
  const double e_bl = T_cab_meas - sp.T_cab_set;
  const double v_bl = p.W_ff + p.Kp_blower * e_bl + s.integ_blower;
  const double W = std::clamp(v_bl, p.W_min, p.W_max);
  n.integ_blower += sample_period * (p.Ki_blower * e_bl + p.K_aw * (W - v_bl));
  n.integ_blower =
      std::clamp(n.integ_blower, -p.integ_limit_blower, p.integ_limit_blower);

  // Evaporator: positive error means the wall is colder than requested.
  const double e_ev = sp.T_evap_set - T_evap_meas;
  const double v_ev = sp.T_evap_set + p.Kp_evap * e_ev + s.integ_evap;
  const double T_cmd = std::clamp(v_ev, p.T_set_min, p.T_set_max);
  n.integ_evap += sample_period * (p.Ki_evap * e_ev + p.K_aw * (T_cmd - v_ev));
  n.integ_evap = std::clamp(n.integ_evap, -p.integ_limit_evap, p.integ_limit_evap);

  if (s.ac_on && T_evap_meas < sp.T_evap_set - p.hysteresis)
    n.ac_on = false;
  else if (!s.ac_on && T_evap_meas > sp.T_evap_set + p.hysteresis)
    n.ac_on = true;

  r.command = {W, T_cmd, n.ac_on};
  return r;
}

} // namespace acmpc
