#include "acmpc/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "acmpc/errors.hpp"

namespace acmpc {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string &where, const std::string &what) {
  throw InputError(where + ": " + what);
}

const json &field(const json &j, const char *key, const std::string &where) {
  if (!j.is_object())
    fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end())
    fail(where, std::string("missing field '") + key + "'");
  return *it;
}

double num(const json &j, const char *key, const std::string &where) {
  const json &v = field(j, key, where);
  if (!v.is_number())
    fail(where, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

double num(const json &v, const std::string &where) {
  if (!v.is_number())
    fail(where, "expected a number");
  return v.get<double>();
}

int integer(const json &j, const char *key, const std::string &where) {
  const json &v = field(j, key, where);
  if (!v.is_number_integer())
    fail(where, std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

std::uint64_t seed_of(const json &j, const char *key, const std::string &where) {
  const json &v = field(j, key, where);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    fail(where, std::string("field '") + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

template <std::size_t N>
std::array<double, N> fixed(const json &j, const char *key, const std::string &where) {
  const json &v = field(j, key, where);
  if (!v.is_array() || v.size() != N)
    fail(where, std::string("field '") + key + "' must be an array of " +
                    std::to_string(N) + " numbers");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i)
    out[i] = num(v[i], where + "." + key);
  return out;
}

std::vector<std::pair<double, double>> pairs(const json &v, const std::string &where) {
  if (!v.is_array())
    fail(where, "expected an array of pairs");
  std::vector<std::pair<double, double>> out;
  for (const auto &e : v) {
    if (!e.is_array() || e.size() != 2)
      fail(where, "expected an array of pairs");
    out.emplace_back(num(e[0], where), num(e[1], where));
  }
  return out;
}

json parse(const std::string &text, const std::string &where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    fail(where, e.what());
  }
}

ModelSet params_from_json(const json &j) {
  const std::string w = "params";
  ModelSet p;
  p.model.Ts = num(j, "Ts", w);
  p.model.gamma = fixed<7>(j, "gamma", w);
  p.model.tau = fixed<3>(j, "tau", w);
  p.power.beta = fixed<3>(j, "beta", w);
  p.power.c_p = num(j, "c_p", w);
  p.power.eta_cop = num(j, "eta_cop", w);
  if (!(p.model.Ts > 0.0))
    fail(w, "Ts must be positive");
  check_power_params(p.power);
  return p;
}

PlantParams plant_from_json(const json &j) {
  const std::string w = "plant";
  PlantParams p;
  p.C_cab = num(j, "C_cab", w);
  p.C_int = num(j, "C_int", w);
  p.C_shell = num(j, "C_shell", w);
  p.C_evap = num(j, "C_evap", w);
  p.h_cab_int = num(j, "h_cab_int", w);
  p.h_cab_shell = num(j, "h_cab_shell", w);
  p.h_shell_amb = num(j, "h_shell_amb", w);
  p.h_shell_amb_per_speed = num(j, "h_shell_amb_per_speed", w);
  p.Q_sun_int = num(j, "Q_sun_int", w);
  p.Q_sun_shell = num(j, "Q_sun_shell", w);
  p.UA_evap = num(j, "UA_evap", w);
  p.tau_evap = num(j, "tau_evap", w);
  p.tau_evap_per_flow = num(j, "tau_evap_per_flow", w);
  p.cop_base = num(j, "cop_base", w);
  p.kappa_v = num(j, "kappa_v", w);
  p.recirc_gain = num(j, "recirc_gain", w);
  p.recirc_bias = num(j, "recirc_bias", w);
  p.recirc_min = num(j, "recirc_min", w);
  p.recirc_max = num(j, "recirc_max", w);
  p.c_p = num(j, "c_p", w);
  p.beta = fixed<3>(j, "beta", w);
  p.dt = num(j, "dt", w);
  check_plant_params(p);
  return p;
}

PiParams pi_from_json(const json &j) {
  const std::string w = "pi";
  PiParams p;
  p.Kp_blower = num(j, "Kp_blower", w);
  p.Ki_blower = num(j, "Ki_blower", w);
  p.W_ff = num(j, "W_ff", w);
  p.Kp_evap = num(j, "Kp_evap", w);
  p.Ki_evap = num(j, "Ki_evap", w);
  p.K_aw = num(j, "K_aw", w);
  p.integ_limit_blower = num(j, "integ_limit_blower", w);
  p.integ_limit_evap = num(j, "integ_limit_evap", w);
  p.hysteresis = num(j, "hysteresis", w);
  const auto W = fixed<2>(j, "W_bl", w);
  const auto T = fixed<2>(j, "T_evap_set", w);
  p.W_min = W[0];
  p.W_max = W[1];
  p.T_set_min = T[0];
  p.T_set_max = T[1];
  if (!(p.W_min <= p.W_max) || !(p.T_set_min <= p.T_set_max))
    fail(w, "inverted input range");
  return p;
}

const json resolve(const json &v, const std::filesystem::path &base, const std::string &w) {
  if (v.is_string()) {
    const std::filesystem::path p = base / v.get<std::string>();
    return parse(read_text_file(p), p.string());
  }
  if (!v.is_object())
    fail(w, "expected an object or a file path");
  return v;
}

ExcitationConfig excitation_from_json(const json &j, const std::string &w) {
  ExcitationConfig c;
  c.duration = num(j, "duration", w);
  c.sample_period = num(j, "sample_period", w);
  const auto W = fixed<2>(j, "W_bl", w);
  const auto T = fixed<2>(j, "T_evap_set", w);
  c.W_min = W[0];
  c.W_max = W[1];
  c.T_set_min = T[0];
  c.T_set_max = T[1];
  c.hold_time = num(j, "hold_time", w);
  c.seed = seed_of(j, "seed", w);
  c.warmup = num(j, "warmup", w);
  c.noise_std = num(j, "noise_std", w);
  return c;
}

} // namespace

std::string read_text_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path &path, const std::string &content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw InputError("cannot write " + tmp.string());
    out << content;
    if (!out.flush())
      throw InputError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ModelSet params_from_json_text(const std::string &text) {
  return params_from_json(parse(text, "params"));
}

std::string params_to_json_text(const ModelSet &p) {
  json j;
  j["Ts"] = p.model.Ts;
  j["gamma"] = p.model.gamma;
  j["tau"] = p.model.tau;
  j["beta"] = p.power.beta;
  j["c_p"] = p.power.c_p;
  j["eta_cop"] = p.power.eta_cop;
  return j.dump(2) + "\n";
}

ModelSet load_params(const std::filesystem::path &path) {
  return params_from_json(parse(read_text_file(path), path.string()));
}

void save_params(const std::filesystem::path &path, const ModelSet &params) {
  write_file_atomic(path, params_to_json_text(params));
}

PlantParams load_plant(const std::filesystem::path &path) {
  return plant_from_json(parse(read_text_file(path), path.string()));
}

PiParams load_pi(const std::filesystem::path &path) {
  return pi_from_json(parse(read_text_file(path), path.string()));
}

Scenario scenario_from_json_text(const std::string &text,
                                 const std::filesystem::path &base_dir) {
  const std::string w = "scenario";
  const json j = parse(text, w);
  Scenario sc;
  const json &name = field(j, "name", w);
  if (!name.is_string())
    fail(w, "field 'name' must be a string");
  sc.name = name.get<std::string>();
  sc.duration = num(j, "duration", w);
  sc.Ts = num(j, "Ts", w);
  sc.dt = num(j, "dt", w);
  sc.T_amb = num(j, "T_amb", w);
  sc.seed = seed_of(j, "seed", w);
  sc.speed.points = pairs(field(j, "speed", w), w + ".speed");
  if (sc.speed.points.empty())
    fail(w, "speed profile needs at least one breakpoint");

  const json &ini = field(j, "initial", w);
  sc.initial.T_cab = num(ini, "T_cab", w + ".initial");
  sc.initial.T_int = num(ini, "T_int", w + ".initial");
  sc.initial.T_shell = num(ini, "T_shell", w + ".initial");
  sc.initial.T_evap = num(ini, "T_evap", w + ".initial");

  const json &hz = field(j, "horizon", w);
  sc.horizon.Np = integer(hz, "Np", w + ".horizon");
  sc.horizon.Nu = integer(hz, "Nu", w + ".horizon");
  sc.horizon.Nc = integer(hz, "Nc", w + ".horizon");
  sc.horizon.Ts = sc.Ts;

  const json &b = field(j, "bounds", w);
  const std::string wb = w + ".bounds";
  const auto Te = fixed<2>(b, "T_evap", wb);
  const auto Wb = fixed<2>(b, "W_bl", wb);
  const auto Ts = fixed<2>(b, "T_evap_set", wb);
  sc.x_lo = {num(b, "T_cab_lo", wb), Te[0]};
  sc.x_hi = {std::numeric_limits<double>::infinity(), Te[1]};
  sc.u_lo = {Wb[0], Ts[0]};
  sc.u_hi = {Wb[1], Ts[1]};
  sc.a_sl = fixed<2>(j, "a_sl", w);

  const json &ub = field(j, "T_cab_ub", w);
  const std::string wu = w + ".T_cab_ub";
  if (!ub.is_object() || ub.size() != 1)
    fail(wu, "expected exactly one of 'constant', 'steps' or 'band'");
  if (ub.contains("constant")) {
    sc.T_cab_ub.kind = UpperBoundSpec::Kind::Constant;
    sc.T_cab_ub.value = num(ub, "constant", wu);
  } else if (ub.contains("steps")) {
    sc.T_cab_ub.kind = UpperBoundSpec::Kind::Steps;
    sc.T_cab_ub.steps = pairs(ub["steps"], wu + ".steps");
    if (sc.T_cab_ub.steps.empty())
      fail(wu, "steps must not be empty");
  } else if (ub.contains("band")) {
    sc.T_cab_ub.kind = UpperBoundSpec::Kind::Speed;
    const json &band = ub["band"];
    sc.T_cab_ub.band = {num(band, "T_hi", wu), num(band, "T_lo", wu),
                        num(band, "V_ref", wu)};
  } else {
    fail(wu, "expected exactly one of 'constant', 'steps' or 'band'");
  }

  const json &sp = field(j, "pi_setpoints", w);
  sc.pi_setpoints = {num(sp, "T_cab_set", w + ".pi_setpoints"),
                     num(sp, "T_evap_set", w + ".pi_setpoints")};

  sc.plant = plant_from_json(resolve(field(j, "plant", w), base_dir, w + ".plant"));
  sc.pi = pi_from_json(resolve(field(j, "pi", w), base_dir, w + ".pi"));
  if (std::abs(sc.plant.dt - sc.dt) > 1e-12)
    fail(w, "plant dt differs from scenario dt");

  if (j.contains("shutoff"))
    sc.shutoff = pairs(j["shutoff"], w + ".shutoff");
  if (j.contains("comparison_window")) {
    const auto cw = fixed<2>(j, "comparison_window", w);
    sc.comparison_window = std::make_pair(cw[0], cw[1]);
  }
  if (j.contains("model_exogenous")) {
    const json &m = j["model_exogenous"];
    sc.model_exogenous = std::make_pair(num(m, "T_int", w + ".model_exogenous"),
                                        num(m, "T_shell", w + ".model_exogenous"));
  }
  if (j.contains("excitation"))
    sc.excitation = excitation_from_json(j["excitation"], w + ".excitation");
  if (j.contains("validation")) {
    const json &v = j["validation"];
    const std::string wv = w + ".validation";
    ValidationConfig vc;
    vc.excitation = excitation_from_json(field(v, "excitation", wv), wv + ".excitation");
    vc.starts = static_cast<std::size_t>(integer(v, "starts", wv));
    vc.horizon = static_cast<std::size_t>(integer(v, "horizon", wv));
    vc.tolerance = num(v, "tolerance", wv);
    vc.required_fraction = num(v, "required_fraction", wv);
    sc.validation = vc;
  }
  if (j.contains("solver")) {
    const json &s = j["solver"];
    const std::string ws = w + ".solver";
    sc.solver.max_iterations = integer(s, "max_iterations", ws);
    sc.solver.tolerance = num(s, "tolerance", ws);
    sc.solver.smoothing_start = num(s, "smoothing_start", ws);
    sc.solver.warm_smoothing_start = num(s, "warm_smoothing_start", ws);
    sc.solver.smoothing_final = num(s, "smoothing_final", ws);
    sc.solver.smoothing_factor = num(s, "smoothing_factor", ws);
  }
  check_scenario(sc);
  return sc;
}

Scenario load_scenario(const std::filesystem::path &path) {
  return scenario_from_json_text(read_text_file(path), path.parent_path());
}

} // namespace acmpc
