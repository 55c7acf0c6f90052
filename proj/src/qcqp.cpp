#include "acmpc/qcqp.hpp"

namespace acmpc {

QcqpMatrices build_qcqp_matrices(const ModelParams &p) {
  const auto &g = p.gamma;
  QcqpMatrices m;
  m.C.setZero();
  m.A1.setZero();
  m.A2.setZero();

  // Bilinear part of the cabin equation: -g3 * W * (T_ain - T_cab).
  m.C(kBlower, kInlet) = m.C(kInlet, kBlower) = -0.5 * g[2];
  m.C(kBlower, kCab) = m.C(kCab, kBlower) = 0.5 * g[2];

  m.A1(kCabNext) = 1.0;
  m.A1(kCab) = -1.0 + g[0] + g[1];
  m.A1(kInt) = -g[0];
  m.A1(kShell) = -g[1];
  m.c[0] = -p.tau[0];

  m.A2(0, kEvapNext) = 1.0;
  m.A2(0, kEvap) = -(g[3] + g[4]);
  m.A2(0, kEvapSet) = g[4];
  m.c[1] = -p.tau[1];

  m.A2(1, kInlet) = 1.0;
  m.A2(1, kEvap) = -g[5];
  m.A2(1, kBlower) = -g[6];
  m.c[2] = -p.tau[2];
  return m;
}

std::array<double, 3> QcqpMatrices::residuals(const Eigen::Matrix<double, 9, 1> &z) const {
  const Eigen::Vector2d lin = A2 * z;
  return {z.dot(C * z) + (A1 * z)(0) + c[0], lin[0] + c[1], lin[1] + c[2]};
}

Eigen::Matrix<double, 9, 1> stack(const State &next, const State &x,
                                  const ControlInput &u, double T_int,
                                  double T_shell, double T_ain) {
  Eigen::Matrix<double, 9, 1> z;
  z << next.T_cab, next.T_evap, x.T_cab, x.T_evap, u.W_bl, u.T_evap_set, T_int,
      T_shell, T_ain;
  return z;
}

} // namespace acmpc
