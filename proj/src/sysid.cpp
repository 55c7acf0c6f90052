#include "acmpc/sysid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "acmpc/errors.hpp"

namespace acmpc {
namespace {

// Column order of the CSV record.
std::array<std::vector<double> *, 12> columns(IdDataset &d) {
  return {&d.t,     &d.T_cab,   &d.T_evap, &d.T_ain,      &d.T_int, &d.T_shell,
          &d.T_amb, &d.W_bl,    &d.T_evap_set, &d.P_c,    &d.P_bl,  &d.V_veh};
}

std::array<const std::vector<double> *, 12> columns(const IdDataset &d) {
  return {&d.t,     &d.T_cab,   &d.T_evap, &d.T_ain,      &d.T_int, &d.T_shell,
          &d.T_amb, &d.W_bl,    &d.T_evap_set, &d.P_c,    &d.P_bl,  &d.V_veh};
}

long steps_of(double span, double period, const char *what) {
  const double n = span / period;
  const long r = std::lround(n);
  if (std::abs(n - static_cast<double>(r)) > 1e-9 * std::max(1.0, n)) {
    std::ostringstream os;
    os << what << " (" << span << " s) is not a multiple of the sample period ("
       << period << " s)";
    throw InputError(os.str());
  }
  return r;
}

} // namespace

void IdDataset::reserve(std::size_t n) {
  for (auto *c : columns(*this))
    c->reserve(n);
}

void IdDataset::check_consistent() const {
  for (const auto *c : columns(*this))
    if (c->size() != t.size())
      throw InputError("dataset: columns have different lengths");
}

void write_dataset_csv(std::ostream &os, const IdDataset &data) {
  data.check_consistent();
  os << kDatasetCsvHeader << '\n';
  const auto cols = columns(data);
  char buf[64];
  for (std::size_t k = 0; k < data.size(); ++k) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      auto res = std::to_chars(buf, buf + sizeof(buf), (*cols[c])[k]);
      if (c)
        os << ',';
      os.write(buf, res.ptr - buf);
    }
    os << '\n';
  }
}

IdDataset read_dataset_csv(std::istream &is) {
  std::string line;
  if (!std::getline(is, line))
    throw InputError("dataset csv: empty input");
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  if (line != kDatasetCsvHeader)
    throw InputError("dataset csv: unexpected header '" + line + "'");

  IdDataset d;
  auto cols = columns(d);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    const char *p = line.data();
    const char *end = p + line.size();
    for (std::size_t c = 0; c < cols.size(); ++c) {
      double v = 0.0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) {
        std::ostringstream os;
        os << "dataset csv: bad number on line " << lineno << ", column " << c + 1;
        throw InputError(os.str());
      }
      cols[c]->push_back(v);
      p = res.ptr;
      if (c + 1 < cols.size()) {
        if (p == end || *p != ',') {
          std::ostringstream os;
          os << "dataset csv: too few columns on line " << lineno;
          throw InputError(os.str());
        }
        ++p;
      }
    }
    if (p != end) {
      std::ostringstream os;
      os << "dataset csv: trailing data on line " << lineno;
      throw InputError(os.str());
    }
  }
  return d;
}

// --- data sources -----------------------------------------------------------

PlantSource::PlantSource(PlantParams params, PlantState initial, Environment env)
    : params_(params), state_(initial), env_(env) {
  check_plant_params(params_);
}

Sample PlantSource::measure(const ControlInput &u) {
  const PlantCommand cmd{u.W_bl, u.T_evap_set, true};
  const PlantOutputs o = plant_outputs(state_, cmd, env_, params_);
  Sample s;
  s.T_cab = state_.T_cab;
  s.T_evap = state_.T_evap;
  s.T_ain = o.T_ain;
  s.T_int = state_.T_int;
  s.T_shell = state_.T_shell;
  s.T_amb = env_.T_amb;
  s.P_c = o.P_c;
  s.P_bl = o.P_bl;
  s.V_veh = env_.V_veh;
  return s;
}

void PlantSource::advance(const ControlInput &u, double seconds) {
  const PlantCommand cmd{u.W_bl, u.T_evap_set, true};
  const long n = std::lround(seconds / params_.dt);
  for (long i = 0; i < n; ++i)
    state_ = plant_step(state_, cmd, env_, params_).state;
}

ModelSource::ModelSource(ModelParams model, PowerParams power, State initial,
                         ExogenousExcitation exo, std::uint64_t seed)
    : model_(model), power_(power), x_(initial), exo_(exo), rng_(seed) {
  w_.T_amb = exo_.T_amb;
  redraw_exogenous();
}

void ModelSource::redraw_exogenous() {
  std::uniform_real_distribution<double> Tint(exo_.T_int_min, exo_.T_int_max);
  std::uniform_real_distribution<double> Tsh(exo_.T_shell_min, exo_.T_shell_max);
  w_.T_int = Tint(rng_);
  w_.T_shell = Tsh(rng_);
  since_draw_ = 0.0;
}

Sample ModelSource::measure(const ControlInput &u) {
  Sample s;
  s.T_cab = x_.T_cab;
  s.T_evap = x_.T_evap;
  s.T_ain = inlet_air_temperature(x_.T_evap, u.W_bl, model_);
  s.T_int = w_.T_int;
  s.T_shell = w_.T_shell;
  s.T_amb = w_.T_amb;
  s.P_c = compressor_power(u.W_bl, x_.T_evap, w_.T_amb, model_, power_);
  s.P_bl = blower_power(u.W_bl, power_);
  return s;
}

void ModelSource::advance(const ControlInput &u, double seconds) {
  const long n = steps_of(seconds, model_.Ts, "model source advance");
  for (long i = 0; i < n; ++i) {
    x_ = model_step(x_, u, w_, model_);
    since_draw_ += model_.Ts;
    if (since_draw_ >= exo_.hold - 1e-9)
      redraw_exogenous();
  }
}

// --- excitation -------------------------------------------------------------

IdDataset generate_excitation(const ExcitationConfig &cfg, DataSource &source,
                              const InputBox &box) {
  if (!(cfg.sample_period > 0.0))
    throw InputError("excitation: sample period must be positive");
  if (!(cfg.duration >= 0.0))
    throw InputError("excitation: duration must be non-negative");
  if (!(cfg.W_min <= cfg.W_max) || !(cfg.T_set_min <= cfg.T_set_max))
    throw InputError("excitation: empty input range");
  if (cfg.W_min < box.W_min - 1e-12 || cfg.W_max > box.W_max + 1e-12 ||
      cfg.T_set_min < box.T_set_min - 1e-12 || cfg.T_set_max > box.T_set_max + 1e-12)
    throw InputError("excitation: input range outside the actuator box");
  if (!(cfg.hold_time > 0.0))
    throw InputError("excitation: hold time must be positive");
  const long hold_steps = steps_of(cfg.hold_time, cfg.sample_period, "hold time");
  if (hold_steps < 1)
    throw InputError("excitation: hold time shorter than the sample period");
  const long n = steps_of(cfg.duration, cfg.sample_period, "duration");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> W_dist(cfg.W_min, cfg.W_max);
  std::uniform_real_distribution<double> T_dist(cfg.T_set_min, cfg.T_set_max);
  std::normal_distribution<double> noise(0.0, 1.0);

  if (cfg.warmup > 0.0) {
    const ControlInput mid{0.5 * (cfg.W_min + cfg.W_max),
                           0.5 * (cfg.T_set_min + cfg.T_set_max)};
    source.advance(mid, cfg.warmup);
  }

  IdDataset d;
  d.reserve(static_cast<std::size_t>(n));
  ControlInput u;
  for (long k = 0; k < n; ++k) {
    if (k % hold_steps == 0) {
      u.W_bl = W_dist(rng);
      u.T_evap_set = T_dist(rng);
    }
    Sample s = source.measure(u);
    if (cfg.noise_std > 0.0) {
      for (double *v : {&s.T_cab, &s.T_evap, &s.T_ain, &s.T_int, &s.T_shell})
        *v += cfg.noise_std * noise(rng);
    }
    d.t.push_back(static_cast<double>(k) * cfg.sample_period);
    d.T_cab.push_back(s.T_cab);
    d.T_evap.push_back(s.T_evap);
    d.T_ain.push_back(s.T_ain);
    d.T_int.push_back(s.T_int);
    d.T_shell.push_back(s.T_shell);
    d.T_amb.push_back(s.T_amb);
    d.W_bl.push_back(u.W_bl);
    d.T_evap_set.push_back(u.T_evap_set);
    d.P_c.push_back(s.P_c);
    d.P_bl.push_back(s.P_bl);
    d.V_veh.push_back(s.V_veh);
    source.advance(u, cfg.sample_period);
  }
  return d;
}

// --- fitting ----------------------------------------------------------------

LinearFit ols(const Eigen::MatrixXd &X, const Eigen::VectorXd &y,
              const std::string &equation) {
  if (X.rows() != y.size())
    throw InputError("ols: regressor and target row counts differ");
  if (X.rows() < X.cols())
    throw RankDeficientError(equation, equation + ": fewer samples than parameters");

  Eigen::VectorXd norms = X.colwise().norm().transpose();
  for (Eigen::Index c = 0; c < norms.size(); ++c) {
    if (!(norms[c] > 0.0))
      throw RankDeficientError(equation, equation + ": regressor column " +
                                             std::to_string(c + 1) + " is zero");
  }
  const Eigen::MatrixXd Xn = X * norms.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Xn);
  const auto &sv = svd.singularValues();
  const double cond = sv[0] / sv[sv.size() - 1];
  if (!(sv[sv.size() - 1] > 1e-9 * sv[0])) {
    std::ostringstream os;
    os << equation << ": regressor matrix is rank deficient (condition number "
       << cond << ")";
    throw RankDeficientError(equation, os.str());
  }

  LinearFit f;
  f.coef = Xn.colPivHouseholderQr().solve(y).cwiseQuotient(norms);
  f.residual = y - X * f.coef;
  f.residual_rms = std::sqrt(f.residual.squaredNorm() / static_cast<double>(y.size()));
  f.condition = cond;
  return f;
}

ModelFit fit_model_params(const IdDataset &data, double Ts) {
  data.check_consistent();
  if (!(Ts > 0.0))
    throw InputError("fit_model_params: Ts must be positive");
  const std::size_t n = data.size();
  if (n < 41)
    throw InputError("fit_model_params: need at least 41 samples (10 per "
                     "parameter of the largest regression)");

  const Eigen::Index m = static_cast<Eigen::Index>(n - 1);
  Eigen::MatrixXd X1(m, 4), X2(m, 3), X3(static_cast<Eigen::Index>(n), 3);
  Eigen::VectorXd y1(m), y2(m), y3(static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double Tc = data.T_cab[i];
    X1(k, 0) = data.T_int[i] - Tc;
    X1(k, 1) = data.T_shell[i] - Tc;
    X1(k, 2) = (data.T_ain[i] - Tc) * data.W_bl[i];
    X1(k, 3) = 1.0;
    y1[k] = data.T_cab[i + 1] - Tc;

    X2(k, 0) = data.T_evap[i];
    X2(k, 1) = data.T_evap[i] - data.T_evap_set[i];
    X2(k, 2) = 1.0;
    y2[k] = data.T_evap[i + 1];
  }
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n); ++k) {
    const auto i = static_cast<std::size_t>(k);
    X3(k, 0) = data.T_evap[i];
    X3(k, 1) = data.W_bl[i];
    X3(k, 2) = 1.0;
    y3[k] = data.T_ain[i];
  }

  const LinearFit f1 = ols(X1, y1, "cabin equation");
  const LinearFit f2 = ols(X2, y2, "evaporator equation");
  const LinearFit f3 = ols(X3, y3, "inlet air equation");

  ModelFit r;
  r.params.gamma = {f1.coef[0], f1.coef[1], f1.coef[2], f2.coef[0],
                    f2.coef[1], f3.coef[0], f3.coef[1]};
  r.params.tau = {f1.coef[3], f2.coef[2], f3.coef[2]};
  r.params.Ts = Ts;
  r.residual_rms = {f1.residual_rms, f2.residual_rms, f3.residual_rms};
  r.condition = {f1.condition, f2.condition, f3.condition};
  return r;
}

PowerFit fit_power_params(const IdDataset &data) {
  data.check_consistent();
  std::vector<double> levels = data.W_bl;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  if (levels.size() < 3)
    throw InputError("fit_power_params: need at least 3 distinct blower flow "
                     "levels");

  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double W = data.W_bl[static_cast<std::size_t>(k)];
    X(k, 0) = W * W;
    X(k, 1) = W;
    X(k, 2) = 1.0;
    y[k] = data.P_bl[static_cast<std::size_t>(k)];
  }
  const LinearFit f = ols(X, y, "blower power");
  PowerFit r;
  r.beta = {f.coef[0], f.coef[1], f.coef[2]};
  r.residual_rms = f.residual_rms;
  r.convex = r.beta[0] > 0.0;
  return r;
}

double fit_compressor_cop(const IdDataset &data, double c_p) {
  data.check_consistent();
  if (!(c_p > 0.0))
    throw InputError("fit_compressor_cop: c_p must be positive");
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const double x = data.W_bl[k] * (data.T_amb[k] - data.T_ain[k]);
    sxx += x * x;
    sxy += x * data.P_c[k];
  }
  if (!(sxx > 0.0) || !(sxy > 0.0))
    throw InputError("fit_compressor_cop: compressor power does not follow "
                     "the inlet air load");
  return c_p * sxx / sxy;
}

// --- validation -------------------------------------------------------------

double ValidationReport::fraction_within(Signal s, double tol) const {
  std::size_t total = 0, ok = 0;
  for (const auto &seq : errors[static_cast<std::size_t>(s)]) {
    for (double e : seq) {
      ++total;
      if (std::abs(e) <= tol)
        ++ok;
    }
  }
  return total ? static_cast<double>(ok) / static_cast<double>(total) : 1.0;
}

ValidationReport validate_multistep(const ModelParams &p, const IdDataset &data,
                                    std::size_t horizon,
                                    const std::vector<std::size_t> &starts) {
  data.check_consistent();
  for (std::size_t s : starts) {
    if (s + horizon >= data.size()) {
      std::ostringstream os;
      os << "validate_multistep: start " << s << " with horizon " << horizon
         << " exceeds the record (" << data.size() << " samples)";
      throw InputError(os.str());
    }
  }

  ValidationReport r;
  r.horizon = horizon;
  r.starts = starts;
  std::array<double, 3> sumsq{};
  std::size_t count = 0;
  for (auto &e : r.errors)
    e.reserve(starts.size());

  for (std::size_t s : starts) {
    const Exogenous w{data.T_int[s], data.T_shell[s], data.T_amb[s]};
    State x{data.T_cab[s], data.T_evap[s]};
    std::array<std::vector<double>, 3> err;
    for (auto &e : err)
      e.reserve(horizon);
    for (std::size_t j = 0; j < horizon; ++j) {
      const ControlInput u{data.W_bl[s + j], data.T_evap_set[s + j]};
      err[2].push_back(inlet_air_temperature(x.T_evap, u.W_bl, p) -
                       data.T_ain[s + j]);
      x = model_step(x, u, w, p);
      err[0].push_back(x.T_cab - data.T_cab[s + j + 1]);
      err[1].push_back(x.T_evap - data.T_evap[s + j + 1]);
    }
    for (std::size_t k = 0; k < 3; ++k) {
      for (double e : err[k]) {
        r.max_abs[k] = std::max(r.max_abs[k], std::abs(e));
        sumsq[k] += e * e;
      }
      r.errors[k].push_back(std::move(err[k]));
    }
    count += horizon;
  }
  for (std::size_t k = 0; k < 3; ++k)
    r.rms[k] = count ? std::sqrt(sumsq[k] / static_cast<double>(count)) : 0.0;
  return r;
}

std::vector<std::size_t> evenly_spaced_starts(std::size_t data_size,
                                              std::size_t horizon,
                                              std::size_t count) {
  if (count == 0)
    return {};
  if (data_size <= horizon)
    throw InputError("evenly_spaced_starts: record shorter than the horizon");
  const std::size_t last = data_size - horizon - 1;
  std::vector<std::size_t> s;
  s.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    s.push_back(static_cast<std::size_t>(std::llround(f * static_cast<double>(last))));
  }
  return s;
}

} // namespace acmpc
