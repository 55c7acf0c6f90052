#pragma once

/*
 * Constraint management from a previewed vehicle speed profile.
 *
 * The cabin upper bound is lowered while the vehicle is fast (A/C efficiency is
 * high) and relaxed while it is slow, so cooling is shifted toward the cheap
 * periods. The speed-to-bound law is a saturated affine map.
 */

#include <span>
#include <utility>
#include <vector>

namespace acmpc {

struct ComfortBand {
  double T_hi = 26.0; //!< bound at standstill [degC]
  double T_lo = 22.0; //!< bound at and above V_ref [degC]
  double V_ref = 20.0; //!< [m/s]
};

/// Throws InputError unless T_lo < T_hi, both >= T_cab_min and V_ref > 0.
void check_band(const ComfortBand &band, double T_cab_min = 20.0);

/// Per-sample upper cabin bound T_hi - (T_hi - T_lo) min(V / V_ref, 1).
std::vector<double> bound_schedule_from_speed(std::span<const double> speed,
                                              const ComfortBand &band);

/// Mean of trace samples whose time lies in [t0, t1]; throws InputError when
/// the window holds no samples or extends past the trace.
double constant_setpoint(std::span<const double> t, std::span<const double> trace,
                         double t0, double t1);

/// `constant_setpoint` repeated over `length` steps.
std::vector<double> constant_setpoint_schedule(std::span<const double> t,
                                               std::span<const double> trace,
                                               double t0, double t1,
                                               std::size_t length);

/// Controller steps during which the compressor is forced off.
class ShutoffSchedule {
public:
  ShutoffSchedule() = default;
  ShutoffSchedule(std::size_t steps, double Ts);

  /// Flags every step k whose start time k*Ts lies in [t_a, t_b). Overlapping
  /// intervals merge; an empty interval changes nothing.
  void add_interval(double t_a, double t_b);

  bool is_off(std::size_t step) const;
  std::size_t size() const { return off_.size(); }
  double period() const { return Ts_; }
  const std::vector<std::pair<double, double>> &intervals() const { return intervals_; }

private:
  std::vector<bool> off_;
  double Ts_ = 0.0;
  std::vector<std::pair<double, double>> intervals_;
};

/// Returns a copy of `schedule` with [t_a, t_b) forced off.
ShutoffSchedule shutoff_window(const ShutoffSchedule &schedule, double t_a, double t_b);

} // namespace acmpc
