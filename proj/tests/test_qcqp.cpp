#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "acmpc/nmpc.hpp"
#include "acmpc/qcqp.hpp"
#include "support.hpp"

using namespace acmpc;

namespace {

const ModelParams P = ModelParams::reference();

TEST(Qcqp, ResidualsVanishOnConsistentTuples) {
  const QcqpMatrices m = build_qcqp_matrices(P);
  const acmpc::testing::RefParams r;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> T(-10.0, 50.0), W(0.0, 0.2);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const State x{T(rng), T(rng)};
    const ControlInput u{W(rng), T(rng)};
    const double Ti = T(rng), Tsh = T(rng);
    // next state and inlet air from the hand-written equations
    const State nx{acmpc::testing::ref_cab_next(r, x.T_cab, x.T_evap, u.W_bl, Ti, Tsh),
                   acmpc::testing::ref_evap_next(r, x.T_evap, u.T_evap_set)};
    const double Ta = acmpc::testing::ref_inlet(r, x.T_evap, u.W_bl);
    const auto res = m.residuals(stack(nx, x, u, Ti, Tsh, Ta));
    for (double v : res) worst = std::max(worst, std::abs(v));
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(Qcqp, SymmetricAndIndefinite) {
  const QcqpMatrices m = build_qcqp_matrices(P);
  EXPECT_EQ((m.C - m.C.transpose()).cwiseAbs().maxCoeff(), 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 9, 9>> es(m.C);
  EXPECT_GT(es.eigenvalues().maxCoeff(), 1e-6);
  EXPECT_LT(es.eigenvalues().minCoeff(), -1e-6);
  // Rank-two coupling of W with (T_cab - T_ain): eigenvalues +-g3/sqrt(2).
  EXPECT_NEAR(es.eigenvalues().maxCoeff(), P.gamma[2] / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(es.eigenvalues().minCoeff(), -P.gamma[2] / std::sqrt(2.0), 1e-12);
}

TEST(Qcqp, OnlyBlowerCouplingsAreQuadratic) {
  const QcqpMatrices m = build_qcqp_matrices(P);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) {
      const bool wi = (i == kBlower && (j == kInlet || j == kCab)) ||
                      (j == kBlower && (i == kInlet || i == kCab));
      if (!wi) EXPECT_EQ(m.C(i, j), 0.0) << i << "," << j;
    }
  EXPECT_EQ(m.C(kBlower, kInlet), -P.gamma[2] / 2.0);
  EXPECT_EQ(m.C(kBlower, kCab), P.gamma[2] / 2.0);
}

TEST(Qcqp, PerturbingNextCabinShiftsResidualByItsCoefficient) {
  const QcqpMatrices m = build_qcqp_matrices(P);
  const State x{28.0, 6.0};
  const ControlInput u{0.1, 5.0};
  const State nx = model_step(x, u, {30.0, 31.0, 30.0}, P);
  const double Ta = inlet_air_temperature(x.T_evap, u.W_bl, P);
  auto z = stack(nx, x, u, 30.0, 31.0, Ta);
  const double r0 = m.residuals(z)[0];
  z(kCabNext) += 1.0;
  EXPECT_NEAR(m.residuals(z)[0] - r0, m.A1(kCabNext), 1e-12);
}

TEST(Qcqp, AgreesWithRolloutTrajectories) {
  const QcqpMatrices m = build_qcqp_matrices(P);
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    OcpInstance inst = acmpc::testing::random_instance(rng, 6);
    inst.model = P;
    const InputSequence U = acmpc::testing::random_inputs(rng, 6);
    const Rollout ro = rollout(inst, U);
    for (int i = 0; i < 6; ++i) {
      const auto z = stack(ro.x[i + 1], ro.x[i], U[i], inst.w.T_int, inst.w.T_shell,
                           ro.T_ain[i]);
      for (double v : m.residuals(z)) EXPECT_LT(std::abs(v), 1e-10);
    }
  }
}

} // namespace
