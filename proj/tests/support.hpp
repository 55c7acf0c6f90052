#pragma once

// Independent re-statements of the model equations and shared generators.
// Nothing here calls the library code it is used to check.

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "acmpc/nmpc.hpp"

namespace acmpc::testing {

inline std::filesystem::path fixture(const std::string &name) {
  return std::filesystem::path(ACMPC_FIXTURE_DIR) / name;
}

struct RefParams {
  double g[7] = {0.2451, 0.0867, 1.2999, 1.0047, -0.5176, 0.4553, 34.9579};
  double tau[3] = {-0.1842, -1.3226, 154.4995};
  double beta[3] = {24156.0, -1974.2, 49.318};
  double c_p = 1008.0, eta = 3.5;
};

inline double ref_inlet(const RefParams &r, double T_evap, double W) {
  return r.g[5] * T_evap + r.g[6] * W + r.tau[2];
}

inline double ref_cab_next(const RefParams &r, double T_cab, double T_evap,
                           double W, double T_int, double T_shell) {
  const double T_ain = ref_inlet(r, T_evap, W);
  return T_cab + r.g[0] * (T_int - T_cab) + r.g[1] * (T_shell - T_cab) +
         r.g[2] * (T_ain - T_cab) * W + r.tau[0];
}

inline double ref_evap_next(const RefParams &r, double T_evap, double T_set) {
  return r.g[3] * T_evap + r.g[4] * (T_evap - T_set) + r.tau[1];
}

inline double ref_blower(const RefParams &r, double W) {
  return r.beta[0] * W * W + r.beta[1] * W + r.beta[2];
}

inline ModelParams to_model(const RefParams &r) {
  ModelParams p;
  for (int i = 0; i < 7; ++i) p.gamma[i] = r.g[i];
  for (int i = 0; i < 3; ++i) p.tau[i] = r.tau[i];
  p.Ts = 5.0;
  return p;
}

inline PowerParams to_power(const RefParams &r) {
  PowerParams q;
  for (int i = 0; i < 3; ++i) q.beta[i] = r.beta[i];
  q.c_p = r.c_p;
  q.eta_cop = r.eta;
  return q;
}

/// Parameters with cool inlet air and positive compressor power, close to the
/// set identified from the surrogate plant.
inline ModelParams cooling_model() {
  ModelParams p;
  p.gamma = {0.13, 0.07, 1.08, 1.0, -0.45, 0.935, 25.3};
  p.tau = {-0.06, -0.02, -0.92};
  p.Ts = 5.0;
  return p;
}

inline PowerParams cooling_power() {
  PowerParams q;
  q.beta = {24156.0, -1974.2, 49.318};
  q.c_p = 1008.0;
  q.eta_cop = 5.5;
  return q;
}

/// Random instance with Table II style bounds and a random cabin ceiling.
inline OcpInstance random_instance(std::mt19937_64 &rng, int N) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  OcpInstance inst;
  inst.model = cooling_model();
  inst.power = cooling_power();
  inst.x0 = {22.0 + 8.0 * U(rng), 2.0 + 9.0 * U(rng)};
  inst.u_prev = {0.1, 6.0};
  inst.w = {26.0 + 8.0 * U(rng), 27.0 + 10.0 * U(rng), 30.0};
  inst.horizon = {N, N, N, 5.0};
  const double ub = 22.0 + 6.0 * U(rng);
  inst.schedule = ConstraintSchedule::uniform(inst.horizon, {20.0, 0.0}, {ub, 12.0},
                                              {0.05, 3.0}, {0.15, 10.0},
                                              {1e5, 1e5});
  return inst;
}

inline InputSequence random_inputs(std::mt19937_64 &rng, int Nu) {
  std::uniform_real_distribution<double> W(0.05, 0.15), T(3.0, 10.0);
  InputSequence U(Nu);
  for (auto &u : U) u = {W(rng), T(rng)};
  return U;
}

} // namespace acmpc::testing
