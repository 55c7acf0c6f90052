#pragma once

#include <array>

#include <Eigen/Core>

#include "acmpc/model.hpp"

namespace acmpc {

/// Index of each entry of the stacked vector z = [x(i+1); x(i); u(i); v(i)].
enum QcqpSlot : int {
  kCabNext = 0,
  kEvapNext = 1,
  kCab = 2,
  kEvap = 3,
  kBlower = 4,
  kEvapSet = 5,
  kInt = 6,
  kShell = 7,
  kInlet = 8,
};

/// Stacked one-step dynamics as a quadratic and two affine residuals:
///   r1(z) = z' C z + A1 z + c1   (cabin)
///   r2(z) = A2.row(0) z + c2     (evaporator)
///   r3(z) = A2.row(1) z + c3     (inlet air)
/// Each residual is "next value minus model prediction", so it vanishes
/// exactly when the corresponding model equation holds.
struct QcqpMatrices {
  Eigen::Matrix<double, 9, 9> C;
  Eigen::Matrix<double, 1, 9> A1;
  Eigen::Matrix<double, 2, 9> A2;
  std::array<double, 3> c{};

  std::array<double, 3> residuals(const Eigen::Matrix<double, 9, 1> &z) const;
};

QcqpMatrices build_qcqp_matrices(const ModelParams &p);

Eigen::Matrix<double, 9, 1> stack(const State &next, const State &x,
                                  const ControlInput &u, double T_int,
                                  double T_shell, double T_ain);

} // namespace acmpc
