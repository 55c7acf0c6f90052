#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "acmpc/model.hpp"
#include "acmpc/plant.hpp"

namespace acmpc {

/// Time-aligned identification record sampled on a uniform grid.
struct IdDataset {
  std::vector<double> t, T_cab, T_evap, T_ain, T_int, T_shell, T_amb, W_bl,
      T_evap_set, P_c, P_bl, V_veh;

  std::size_t size() const { return t.size(); }
  void reserve(std::size_t n);
  /// Throws InputError when column lengths differ.
  void check_consistent() const;
};

inline constexpr const char *kDatasetCsvHeader =
    "t,T_cab,T_evap,T_ain,T_int,T_shell,T_amb,W_bl,T_evap_set,P_c,P_bl,V_veh";

void write_dataset_csv(std::ostream &os, const IdDataset &data);
IdDataset read_dataset_csv(std::istream &is);

/// One measurement taken from a data source at the current instant, with the
/// given command already applied.
struct Sample {
  double T_cab = 0.0, T_evap = 0.0, T_ain = 0.0, T_int = 0.0, T_shell = 0.0,
         T_amb = 0.0, P_c = 0.0, P_bl = 0.0, V_veh = 0.0;
};

class DataSource {
public:
  virtual ~DataSource() = default;
  virtual Sample measure(const ControlInput &u) = 0;
  /// Hold u for the given duration.
  virtual void advance(const ControlInput &u, double seconds) = 0;
};

/// Surrogate plant with constant environment, compressor always enabled.
class PlantSource final : public DataSource {
public:
  PlantSource(PlantParams params, PlantState initial, Environment env);
  Sample measure(const ControlInput &u) override;
  void advance(const ControlInput &u, double seconds) override;
  const PlantState &state() const { return state_; }

private:
  PlantParams params_;
  PlantState state_;
  Environment env_;
};

/// The prediction model itself. Interior and shell temperatures are drawn as
/// independent piecewise-constant random levels so their regressors are not
/// collinear with the cabin temperature.
class ModelSource final : public DataSource {
public:
  struct ExogenousExcitation {
    double T_int_min = 25.0, T_int_max = 35.0;
    double T_shell_min = 25.0, T_shell_max = 40.0;
    double hold = 60.0; //!< [s]
    double T_amb = 30.0;
  };

  ModelSource(ModelParams model, PowerParams power, State initial,
              ExogenousExcitation exo, std::uint64_t seed);
  Sample measure(const ControlInput &u) override;
  void advance(const ControlInput &u, double seconds) override;

private:
  void redraw_exogenous();

  ModelParams model_;
  PowerParams power_;
  State x_;
  ExogenousExcitation exo_;
  std::mt19937_64 rng_;
  Exogenous w_;
  double since_draw_ = 0.0;
};

struct ExcitationConfig {
  double duration = 0.0;
  double sample_period = 5.0;
  double W_min = 0.05, W_max = 0.15;
  double T_set_min = 3.0, T_set_max = 10.0;
  double hold_time = 25.0;
  std::uint64_t seed = 0;
  double warmup = 0.0;    //!< settle time at mid-range inputs before recording [s]
  double noise_std = 0.0; //!< additive measurement noise on temperatures [degC]
};

/// Input box the excitation ranges must stay within.
struct InputBox {
  double W_min = 0.05, W_max = 0.15;
  double T_set_min = 3.0, T_set_max = 10.0;
};

/// Piecewise-constant uniform random excitation; deterministic in cfg.seed.
IdDataset generate_excitation(const ExcitationConfig &cfg, DataSource &source,
                              const InputBox &box = {});

struct LinearFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd residual;
  double residual_rms = 0.0;
  double condition = 0.0; //!< of the column-normalised regressor matrix
};

/// Ordinary least squares. Throws RankDeficientError naming `equation` when the
/// column-normalised regressor matrix is numerically rank deficient.
LinearFit ols(const Eigen::MatrixXd &X, const Eigen::VectorXd &y,
              const std::string &equation);

struct ModelFit {
  ModelParams params;
  std::array<double, 3> residual_rms{}; //!< cabin, evaporator, inlet-air equations
  std::array<double, 3> condition{};
};

/// Three independent OLS fits, one per model equation.
ModelFit fit_model_params(const IdDataset &data, double Ts);

struct PowerFit {
  std::array<double, 3> beta{};
  double residual_rms = 0.0;
  bool convex = true; //!< false flags beta1 <= 0
};

PowerFit fit_power_params(const IdDataset &data);

/// Effective COP from P_c = (c_p / eta) W (T_amb - T_ain), fit through the
/// origin. Throws InputError unless the fitted eta is positive.
double fit_compressor_cop(const IdDataset &data, double c_p);

enum class Signal { T_cab = 0, T_evap = 1, T_ain = 2 };

struct ValidationReport {
  std::size_t horizon = 0;
  std::vector<std::size_t> starts;
  /// errors[signal][start][step], predicted minus actual.
  std::array<std::vector<std::vector<double>>, 3> errors;
  std::array<double, 3> max_abs{};
  std::array<double, 3> rms{};

  /// Share of all predicted steps of a signal with |error| <= tol.
  double fraction_within(Signal s, double tol) const;
};

ValidationReport validate_multistep(const ModelParams &p, const IdDataset &data,
                                    std::size_t horizon,
                                    const std::vector<std::size_t> &starts);

/// `count` start indices spread evenly over the usable part of the record.
std::vector<std::size_t> evenly_spaced_starts(std::size_t data_size,
                                              std::size_t horizon,
                                              std::size_t count);

} // namespace acmpc
