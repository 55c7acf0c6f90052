#include "acmpc/model.hpp"

#include <cmath>
#include <sstream>

#include "acmpc/errors.hpp"

namespace acmpc {

ModelParams ModelParams::reference() {
  ModelParams p;
  p.gamma = {0.2451, 0.0867, 1.2999, 1.0047, -0.5176, 0.4553, 34.9579};
  p.tau = {-0.1842, -1.3226, 154.4995};
  p.Ts = 5.0;
  return p;
}

PowerParams PowerParams::reference() {
  PowerParams q;
  q.beta = {24156.0, -1974.2, 49.318};
  q.c_p = 1008.0;
  q.eta_cop = 3.5;
  return q;
}

void check_model_params(const ModelParams &p, double W_min, double W_max) {
  if (!(p.Ts > 0.0))
    throw InputError("model params: Ts must be positive");
  const double evap = p.gamma[3] + p.gamma[4];
  if (!(std::abs(evap) < 1.0)) {
    std::ostringstream os;
    os << "model params: evaporator map not a contraction (gamma4+gamma5 = "
       << evap << ")";
    throw InputError(os.str());
  }
  // Affine in W, so checking the interval ends is enough.
  for (double W : {W_min, W_max}) {
    const double a = 1.0 - p.gamma[0] - p.gamma[1] - p.gamma[2] * W;
    if (!(std::abs(a) < 1.0)) {
      std::ostringstream os;
      os << "model params: cabin map not a contraction at W_bl = " << W
         << " (coefficient " << a << ")";
      throw InputError(os.str());
    }
  }
}

void check_power_params(const PowerParams &q) {
  if (!(q.c_p > 0.0))
    throw InputError("power params: c_p must be positive");
  if (!(q.eta_cop > 0.0))
    throw InputError("power params: eta_cop must be positive");
  if (!(q.beta[0] > 0.0))
    throw InputError("power params: beta1 must be positive");
}

double inlet_air_temperature(double T_evap, double W_bl, const ModelParams &p) {
  return p.gamma[5] * T_evap + p.gamma[6] * W_bl + p.tau[2];
}

State model_step(const State &x, const ControlInput &u, const Exogenous &w,
                 const ModelParams &p) {
  const auto &g = p.gamma;
  const double T_ain = inlet_air_temperature(x.T_evap, u.W_bl, p);
  State next;
  next.T_cab = x.T_cab + g[0] * (w.T_int - x.T_cab) +
               g[1] * (w.T_shell - x.T_cab) +
               g[2] * (T_ain - x.T_cab) * u.W_bl + p.tau[0];
  next.T_evap =
      g[3] * x.T_evap + g[4] * (x.T_evap - u.T_evap_set) + p.tau[1];
  return next;
}

OpenLoopTrajectory simulate_open_loop(const State &x0,
                                      std::span<const ControlInput> u_seq,
                                      std::span<const Exogenous> w_seq,
                                      const ModelParams &p) {
  if (u_seq.size() != w_seq.size()) {
    std::ostringstream os;
    os << "simulate_open_loop: input sequence has " << u_seq.size()
       << " entries but exogenous sequence has " << w_seq.size();
    throw InputError(os.str());
  }
  OpenLoopTrajectory out;
  out.states.reserve(u_seq.size() + 1);
  out.T_ain.reserve(u_seq.size());
  out.states.push_back(x0);
  for (std::size_t k = 0; k < u_seq.size(); ++k) {
    const State &x = out.states.back();
    out.T_ain.push_back(inlet_air_temperature(x.T_evap, u_seq[k].W_bl, p));
    out.states.push_back(model_step(x, u_seq[k], w_seq[k], p));
  }
  return out;
}

double evaporator_fixed_point(double T_evap_set, const ModelParams &p) {
  const double denom = 1.0 - p.gamma[3] - p.gamma[4];
  if (std::abs(denom) < 1e-12)
    throw InputError("evaporator_fixed_point: gamma4 + gamma5 == 1, no "
                     "unique steady state");
  return (-p.gamma[4] * T_evap_set + p.tau[1]) / denom;
}

double compressor_power(double W_bl, double T_evap, double T_amb,
                        const ModelParams &p, const PowerParams &q) {
  return q.c_p / q.eta_cop * W_bl *
         (T_amb - inlet_air_temperature(T_evap, W_bl, p));
}

double blower_power(double W_bl, const PowerParams &q) {
  return (q.beta[0] * W_bl + q.beta[1]) * W_bl + q.beta[2];
}

double stage_cost(const State &x, const ControlInput &u, double T_amb,
                  const ModelParams &p, const PowerParams &q) {
  return compressor_power(u.W_bl, x.T_evap, T_amb, p, q) +
         blower_power(u.W_bl, q);
}

} // namespace acmpc
