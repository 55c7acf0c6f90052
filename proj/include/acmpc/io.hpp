#pragma once

/*
 * JSON parameter and scenario files.
 *
 * Every field is required unless listed as optional below; a missing or
 * mistyped field raises InputError naming it. Plant and PI blocks inside a
 * scenario are either inline objects or paths relative to the scenario file.
 *
 *   params:   { Ts, gamma[7], tau[3], beta[3], c_p, eta_cop }
 *   scenario: { name, duration, Ts, dt, T_amb, seed,
 *               speed: [[t, V], ...],
 *               initial: { T_cab, T_int, T_shell, T_evap },
 *               horizon: { Np, Nu, Nc },
 *               bounds: { T_cab_lo, T_evap: [lo, hi], W_bl: [lo, hi],
 *                         T_evap_set: [lo, hi] },
 *               a_sl[2],
 *               T_cab_ub: { constant } | { steps: [[t, ub], ...] }
 *                         | { band: { T_hi, T_lo, V_ref } },
 *               pi_setpoints: { T_cab_set, T_evap_set },
 *               plant, pi,
 *               optional: shutoff [[t_a, t_b], ...], comparison_window [t0, t1],
 *                         model_exogenous { T_int, T_shell }, excitation,
 *                         validation, solver }
 */

#include <filesystem>
#include <string>

#include "acmpc/harness.hpp"

namespace acmpc {

ModelSet params_from_json_text(const std::string &text);
std::string params_to_json_text(const ModelSet &params);
ModelSet load_params(const std::filesystem::path &path);
void save_params(const std::filesystem::path &path, const ModelSet &params);

PlantParams load_plant(const std::filesystem::path &path);
PiParams load_pi(const std::filesystem::path &path);

/// `base_dir` resolves relative plant and PI paths.
Scenario scenario_from_json_text(const std::string &text,
                                 const std::filesystem::path &base_dir);
Scenario load_scenario(const std::filesystem::path &path);

std::string read_text_file(const std::filesystem::path &path);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path &path, const std::string &content);

} // namespace acmpc
