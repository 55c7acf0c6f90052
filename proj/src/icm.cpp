#include "acmpc/icm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "acmpc/errors.hpp"

namespace acmpc {

void check_band(const ComfortBand &band, double T_cab_min) {
  if (!(band.T_lo < band.T_hi))
    throw InputError("comfort band: T_lo must be below T_hi");
  if (band.T_lo < T_cab_min)
    throw InputError("comfort band: bounds must not drop below the cabin "
                     "lower limit");
  if (!(band.V_ref > 0.0))
    throw InputError("comfort band: V_ref must be positive");
}

std::vector<double> bound_schedule_from_speed(std::span<const double> speed,
                                              const ComfortBand &band) {
  std::vector<double> out;
  out.reserve(speed.size());
  for (double V : speed) {
    const double s = std::clamp(V / band.V_ref, 0.0, 1.0);
    out.push_back(band.T_hi - (band.T_hi - band.T_lo) * s);
  }
  return out;
}

double constant_setpoint(std::span<const double> t, std::span<const double> trace,
                         double t0, double t1) {
  if (t.size() != trace.size())
    throw InputError("constant_setpoint: time and trace lengths differ");
  if (t.empty() || !(t0 <= t1))
    throw InputError("constant_setpoint: empty window");
  const double tol = 1e-9 * std::max(1.0, std::abs(t1));
  if (t0 < t.front() - tol || t1 > t.back() + tol)
    throw InputError("constant_setpoint: window outside the trace span");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] >= t0 - tol && t[k] <= t1 + tol) {
      sum += trace[k];
      ++n;
    }
  }
  if (n == 0)
    throw InputError("constant_setpoint: empty window");
  return sum / static_cast<double>(n);
}

std::vector<double> constant_setpoint_schedule(std::span<const double> t,
                                               std::span<const double> trace,
                                               double t0, double t1,
                                               std::size_t length) {
  return std::vector<double>(length, constant_setpoint(t, trace, t0, t1));
}

ShutoffSchedule::ShutoffSchedule(std::size_t steps, double Ts)
    : off_(steps, false), Ts_(Ts) {
  if (!(Ts > 0.0))
    throw InputError("shutoff schedule: Ts must be positive");
}

void ShutoffSchedule::add_interval(double t_a, double t_b) {
  if (!(t_a < t_b))
    return;
  intervals_.emplace_back(t_a, t_b);
  const double tol = 1e-9 * std::max(1.0, std::abs(t_b));
  for (std::size_t k = 0; k < off_.size(); ++k) {
    const double t = static_cast<double>(k) * Ts_;
    if (t >= t_a - tol && t < t_b - tol)
      off_[k] = true;
  }
}

bool ShutoffSchedule::is_off(std::size_t step) const {
  return step < off_.size() && off_[step];
}

ShutoffSchedule shutoff_window(const ShutoffSchedule &schedule, double t_a,
                               double t_b) {
  ShutoffSchedule s = schedule;
  s.add_interval(t_a, t_b);
  return s;
}

} // namespace acmpc
