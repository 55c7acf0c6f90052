#pragma once

/*
 * Receding-horizon energy minimisation over the control-oriented model.
 *
 * Single-shooting transcription: the decision vector is the sequence of Nu
 * input moves (W_bl, T_evap_set) laid out move by move; states are eliminated
 * by the model recursion and moves past Nu-1 repeat the last one. State bounds
 * are softened with per-step slack vectors penalised linearly; for
 * non-negative weights the optimal slack is the positive part of the bound
 * violation, so the penalty is carried in that closed form.
 */

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "acmpc/model.hpp"

namespace acmpc {

struct HorizonConfig {
  int Np = 0; //!< prediction horizon [steps]
  int Nu = 0; //!< control horizon [steps]
  int Nc = 0; //!< constraint horizon [steps]
  double Ts = 0.0;
};

struct ConstraintSchedule {
  std::vector<State> x_lo, x_hi;        //!< Nc + 1 entries, i = 0..Nc
  std::vector<ControlInput> u_lo, u_hi; //!< Nu entries
  std::array<double, 2> a_sl{};         //!< slack weights (T_cab, T_evap)

  /// Same bounds at every step.
  static ConstraintSchedule uniform(const HorizonConfig &h, State x_lo, State x_hi,
                                    ControlInput u_lo, ControlInput u_hi,
                                    std::array<double, 2> a_sl);
};

struct OcpInstance {
  State x0;
  ControlInput u_prev; //!< input applied over the previous interval
  Exogenous w;         //!< frozen over the horizon
  ModelParams model;
  PowerParams power;
  HorizonConfig horizon;
  ConstraintSchedule schedule;
};

/// Throws InputError on inconsistent horizons, schedule lengths, inverted
/// bounds or negative slack weights.
void check_instance(const OcpInstance &inst);

using InputSequence = std::vector<ControlInput>;

Eigen::VectorXd pack(const InputSequence &U);
InputSequence unpack(const Eigen::VectorXd &z);

struct Rollout {
  std::vector<State> x;        //!< Np + 1 predicted states
  std::vector<double> T_ain;   //!< Np + 1 inlet air temperatures (step i uses u(i))
  /// Row 2i holds dT_cab(i)/dU, row 2i+1 holds dT_evap(i)/dU.
  Eigen::MatrixXd dx;
};

Rollout rollout(const OcpInstance &inst, const InputSequence &U);

struct NlpEvaluation {
  double cost = 0.0;
  double power_cost = 0.0;
  double penalty_cost = 0.0;
  Eigen::VectorXd gradient;
  std::vector<State> slack_lo; //!< lower-bound excess per step i = 0..Nc
  std::vector<State> slack_hi; //!< upper-bound excess per step i = 0..Nc
  std::vector<State> slack;    //!< optimal slack, slack_lo + slack_hi
};

NlpEvaluation evaluate_nlp(const OcpInstance &inst, const InputSequence &U);

struct SolverOptions {
  int max_iterations = 200;
  double tolerance = 1e-6;
  double smoothing_start = 1e-1; //!< [degC]
  double warm_smoothing_start = 1e-3; //!< used when a warm start is given
  double smoothing_final = 1e-9; //!< [degC]
  double smoothing_factor = 0.1;
};

struct SolveResult {
  InputSequence U;
  std::vector<State> x_pred;
  std::vector<State> slack, slack_lo, slack_hi;
  double cost = 0.0;
  double power_cost = 0.0;
  double penalty_cost = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  double wall_ms = 0.0;
};

SolveResult solve_ocp(const OcpInstance &inst,
                      const std::optional<InputSequence> &warm = std::nullopt,
                      const SolverOptions &opt = {});

struct GridResolution {
  double W_bl = 0.001;
  double T_evap_set = 0.05;
};

struct BruteForceResult {
  InputSequence U;
  double cost = 0.0;
  std::size_t evaluations = 0;
};

/// Exhaustive search over the tensor grid of each move's input box. Refuses
/// control horizons above 2.
BruteForceResult brute_force_ocp(const OcpInstance &inst,
                                 const GridResolution &grid = {});

struct MpcStepResult {
  ControlInput applied;
  SolveResult solve;
};

/// Warm-starts from the previous solution shifted by one move (last move
/// repeated), or from the middle of the input box when there is none.
MpcStepResult mpc_step(const OcpInstance &inst,
                       const std::optional<SolveResult> &previous = std::nullopt,
                       const SolverOptions &opt = {});

} // namespace acmpc
