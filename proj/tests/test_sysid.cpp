#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "acmpc/errors.hpp"
#include "acmpc/sysid.hpp"
#include "support.hpp"

using namespace acmpc;

namespace {

const ModelParams P = ModelParams::reference();
const PowerParams Q = PowerParams::reference();

ExcitationConfig excitation(double duration, std::uint64_t seed, double noise = 0.0) {
  ExcitationConfig c;
  c.duration = duration;
  c.seed = seed;
  c.noise_std = noise;
  return c;
}

IdDataset model_record(double duration, std::uint64_t seed, double noise = 0.0,
                       ModelSource::ExogenousExcitation exo = {}) {
  ModelSource src(P, Q, {28.0, 6.0}, exo, seed + 100);
  return generate_excitation(excitation(duration, seed, noise), src);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

TEST(Sysid, SameSeedSameDataset) {
  const IdDataset a = model_record(500.0, 3), b = model_record(500.0, 3);
  ASSERT_EQ(a.size(), 100u);
  EXPECT_EQ(a.T_cab, b.T_cab);
  EXPECT_EQ(a.W_bl, b.W_bl);
  EXPECT_EQ(a.T_int, b.T_int);
}

TEST(Sysid, HoldEqualToDurationGivesOneLevel) {
  ModelSource src(P, Q, {28.0, 6.0}, {}, 1);
  ExcitationConfig c = excitation(200.0, 4);
  c.hold_time = 200.0;
  const IdDataset d = generate_excitation(c, src);
  for (std::size_t k = 1; k < d.size(); ++k) {
    EXPECT_EQ(d.W_bl[k], d.W_bl[0]);
    EXPECT_EQ(d.T_evap_set[k], d.T_evap_set[0]);
  }
}

TEST(Sysid, ExcitationRangeChecks) {
  ModelSource src(P, Q, {28.0, 6.0}, {}, 1);
  ExcitationConfig c = excitation(100.0, 1);
  c.W_max = 0.2;
  EXPECT_THROW(generate_excitation(c, src), InputError);
  c = excitation(100.0, 1);
  c.hold_time = 7.0;
  EXPECT_THROW(generate_excitation(c, src), InputError);
  c = excitation(100.0, 1);
  c.T_set_min = 9.0;
  c.T_set_max = 4.0;
  EXPECT_THROW(generate_excitation(c, src), InputError);
}

TEST(Sysid, ExactRecoveryFromModelData) {
  const IdDataset d = model_record(10000.0, 5);
  ASSERT_EQ(d.size(), 2000u);
  const ModelFit f = fit_model_params(d, 5.0);
  for (int i = 0; i < 7; ++i) EXPECT_LT(rel(f.params.gamma[i], P.gamma[i]), 1e-8) << i;
  for (int i = 0; i < 3; ++i) EXPECT_LT(rel(f.params.tau[i], P.tau[i]), 1e-8) << i;
  EXPECT_TRUE(std::isfinite(f.condition[0]));
  const PowerFit pf = fit_power_params(d);
  for (int i = 0; i < 3; ++i) EXPECT_LT(rel(pf.beta[i], Q.beta[i]), 1e-10) << i;
  EXPECT_TRUE(pf.convex);
}

TEST(Sysid, NoisyRecoveryWithinFivePercent) {
  const IdDataset d = model_record(10000.0, 6, 0.05);
  const ModelFit f = fit_model_params(d, 5.0);
  for (int i = 0; i < 7; ++i) EXPECT_LT(rel(f.params.gamma[i], P.gamma[i]), 0.05) << i;
  for (int i = 0; i < 3; ++i) EXPECT_LT(rel(f.params.tau[i], P.tau[i]), 0.05) << i;
}

TEST(Sysid, ConstantInputsAreRankDeficient) {
  ModelSource::ExogenousExcitation exo;
  exo.T_int_min = exo.T_int_max = 30.0;
  exo.T_shell_min = exo.T_shell_max = 30.0;
  ModelSource src(P, Q, {28.0, 6.0}, exo, 1);
  ExcitationConfig c = excitation(1000.0, 2);
  c.hold_time = 1000.0;
  const IdDataset d = generate_excitation(c, src);
  try {
    fit_model_params(d, 5.0);
    FAIL() << "expected a rank deficiency";
  } catch (const RankDeficientError &e) {
    EXPECT_FALSE(e.equation().empty());
  }
}

TEST(Sysid, OlsResidualOrthogonalToRegressors) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd X(200, 4);
  Eigen::VectorXd y(200);
  for (int r = 0; r < 200; ++r) {
    for (int c = 0; c < 4; ++c) X(r, c) = n(rng) * (c + 1);
    y[r] = X.row(r).sum() + n(rng);
  }
  const LinearFit f = ols(X, y, "test");
  for (int c = 0; c < 4; ++c)
    EXPECT_LT(std::abs(X.col(c).dot(f.residual)),
              1e-8 * X.col(c).norm() * y.norm());
}

TEST(Sysid, FitIgnoresTimeOrigin) {
  IdDataset d = model_record(2000.0, 9, 0.02);
  const ModelFit a = fit_model_params(d, 5.0);
  for (double &t : d.t) t += 12345.0;
  const ModelFit b = fit_model_params(d, 5.0);
  for (int i = 0; i < 7; ++i) EXPECT_EQ(a.params.gamma[i], b.params.gamma[i]);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(a.params.tau[i], b.params.tau[i]);
}

TEST(Sysid, DuplicatedRecordLeavesFitUnchanged) {
  // The same record appended twice: every transition appears twice and
  // one spurious transition joins the copies.
  const IdDataset d = model_record(2000.0, 10, 0.02);
  const PowerFit a = fit_power_params(d);
  IdDataset dd;
  for (std::size_t k = 0; k < d.size(); ++k)
    for (int rep = 0; rep < 2; ++rep) {
      dd.t.push_back(d.t[k]);
      dd.W_bl.push_back(d.W_bl[k]);
      dd.P_bl.push_back(d.P_bl[k]);
      dd.T_cab.push_back(0);
      dd.T_evap.push_back(0);
      dd.T_ain.push_back(0);
      dd.T_int.push_back(0);
      dd.T_shell.push_back(0);
      dd.T_amb.push_back(0);
      dd.T_evap_set.push_back(0);
      dd.P_c.push_back(0);
      dd.V_veh.push_back(0);
    }
  const PowerFit b = fit_power_params(dd);
  for (int i = 0; i < 3; ++i)
    EXPECT_NEAR(a.beta[i], b.beta[i], 1e-12 * std::abs(a.beta[i]));
}

TEST(Sysid, DuplicatedRegressionRowsLeaveOlsUnchanged) {
  std::mt19937_64 rng(18);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd X(100, 3), X2(200, 3);
  Eigen::VectorXd y(100), y2(200);
  for (int r = 0; r < 100; ++r) {
    for (int c = 0; c < 3; ++c) X(r, c) = n(rng);
    y[r] = 2 * X(r, 0) - X(r, 2) + 0.1 * n(rng);
    X2.row(2 * r) = X2.row(2 * r + 1) = X.row(r);
    y2[2 * r] = y2[2 * r + 1] = y[r];
  }
  const Eigen::VectorXd a = ols(X, y, "a").coef, b = ols(X2, y2, "b").coef;
  EXPECT_LT((a - b).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Sysid, PowerFitThroughTableFlows) {
  IdDataset d;
  for (double W : {0.0, 0.05, 0.15}) {
    d.t.push_back(d.t.size() * 5.0);
    d.W_bl.push_back(W);
    d.P_bl.push_back(blower_power(W, Q));
    for (auto *c : {&d.T_cab, &d.T_evap, &d.T_ain, &d.T_int, &d.T_shell, &d.T_amb,
                    &d.T_evap_set, &d.P_c, &d.V_veh})
      c->push_back(0.0);
  }
  const PowerFit f = fit_power_params(d);
  PowerParams q = Q;
  q.beta = f.beta;
  EXPECT_NEAR(blower_power(0.0, q), 49.318, 1e-8);
  EXPECT_NEAR(blower_power(0.05, q), 10.998, 1e-8);
  EXPECT_NEAR(blower_power(0.15, q), 296.698, 1e-8);
}

TEST(Sysid, PowerFitNeedsThreeLevels) {
  IdDataset d;
  for (int k = 0; k < 20; ++k) {
    const double W = k % 2 ? 0.05 : 0.1;
    d.t.push_back(k * 5.0);
    d.W_bl.push_back(W);
    d.P_bl.push_back(blower_power(W, Q));
    for (auto *c : {&d.T_cab, &d.T_evap, &d.T_ain, &d.T_int, &d.T_shell, &d.T_amb,
                    &d.T_evap_set, &d.P_c, &d.V_veh})
      c->push_back(0.0);
  }
  EXPECT_THROW(fit_power_params(d), InputError);
}

TEST(Sysid, ConcaveBlowerFitIsFlaggedNotRejected) {
  IdDataset d;
  for (int k = 0; k < 30; ++k) {
    const double W = 0.05 + 0.1 * k / 29.0;
    d.t.push_back(k * 5.0);
    d.W_bl.push_back(W);
    d.P_bl.push_back(-5000.0 * W * W + 1000.0 * W);
    for (auto *c : {&d.T_cab, &d.T_evap, &d.T_ain, &d.T_int, &d.T_shell, &d.T_amb,
                    &d.T_evap_set, &d.P_c, &d.V_veh})
      c->push_back(0.0);
  }
  const PowerFit f = fit_power_params(d);
  EXPECT_FALSE(f.convex);
}

TEST(Sysid, CopRecoveredFromModelData) {
  ModelSource src(acmpc::testing::cooling_model(), acmpc::testing::cooling_power(),
                  {28.0, 6.0}, {}, 4);
  const IdDataset d = generate_excitation(excitation(2000.0, 4), src);
  EXPECT_NEAR(fit_compressor_cop(d, 1008.0), 5.5, 1e-9);
}

TEST(Sysid, SelfValidationIsExact) {
  ModelSource::ExogenousExcitation exo;
  exo.T_int_min = exo.T_int_max = 31.0;
  exo.T_shell_min = exo.T_shell_max = 33.0;
  const IdDataset d = model_record(3000.0, 12, 0.0, exo);
  const auto starts = evenly_spaced_starts(d.size(), 300, 60);
  const ValidationReport r = validate_multistep(P, d, 300, starts);
  for (double m : r.max_abs) EXPECT_LT(m, 1e-9);
  EXPECT_EQ(r.fraction_within(Signal::T_cab, 1e-9), 1.0);
  EXPECT_EQ(r.errors[0].size(), 60u);
  EXPECT_EQ(r.errors[0][0].size(), 300u);
}

TEST(Sysid, ZeroHorizonValidation) {
  const IdDataset d = model_record(500.0, 13);
  const ValidationReport r = validate_multistep(P, d, 0, {0, 10});
  for (const auto &sig : r.errors)
    for (const auto &seq : sig) EXPECT_TRUE(seq.empty());
}

TEST(Sysid, ValidationStartOutOfRange) {
  const IdDataset d = model_record(500.0, 14);
  EXPECT_THROW(validate_multistep(P, d, 50, {60}), InputError);
  EXPECT_THROW(evenly_spaced_starts(10, 20, 3), InputError);
}

TEST(Sysid, EvenlySpacedStartsCoverTheRecord) {
  const auto s = evenly_spaced_starts(600, 300, 60);
  ASSERT_EQ(s.size(), 60u);
  EXPECT_EQ(s.front(), 0u);
  EXPECT_EQ(s.back(), 299u);
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_GE(s[i], s[i - 1]);
}

TEST(Sysid, DatasetCsvRoundTrip) {
  const IdDataset d = model_record(100.0, 15);
  std::stringstream ss;
  write_dataset_csv(ss, d);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "t,T_cab,T_evap,T_ain,T_int,T_shell,T_amb,W_bl,T_evap_set,P_c,P_bl,V_veh");
  ss.seekg(0);
  const IdDataset e = read_dataset_csv(ss);
  EXPECT_EQ(e.T_cab, d.T_cab);
  EXPECT_EQ(e.P_bl, d.P_bl);
  EXPECT_EQ(e.t, d.t);
}

TEST(Sysid, DatasetCsvRejectsBadHeader) {
  std::stringstream ss("t,T_cab\n0,1\n");
  EXPECT_THROW(read_dataset_csv(ss), InputError);
}

TEST(Sysid, InconsistentColumns) {
  IdDataset d = model_record(100.0, 16);
  d.T_ain.pop_back();
  EXPECT_THROW(d.check_consistent(), InputError);
}

} // namespace
