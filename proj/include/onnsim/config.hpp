#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "onnsim/coupling.hpp"
#include "onnsim/device.hpp"
#include "onnsim/engine.hpp"
#include "onnsim/netlist.hpp"
#include "onnsim/oscillator.hpp"
#include "onnsim/phase.hpp"
#include "onnsim/random.hpp"

namespace onnsim {

struct ExperimentConfig {
  std::uint64_t seed = 20260822;
  RingParams ring;
  DeviceParams device;
  CouplingParams coupling;
  double dt_s = 2.5e-7;
  std::size_t max_samples = 1'000'000;
  GateScope gate_scope = GateScope::all_cells;
  LockCriteria lock;

  double retrieval_duration_periods = 12.0;
  double retrieval_measure_periods = 6.0;
  double init_phase_jitter_deg = 0.0;

  double toggle_coupled_periods = 6.0;
  double toggle_free_periods = 10.0;

  int forming_draws = 1000;
  int sweep_pulses = 300;
  double retention_horizon_s = 5'184'000.0;  // sixty days

  std::map<std::string, std::vector<int>> patterns = {
      {"horizontal", {1, 1, -1, -1}},
      {"vertical", {1, -1, 1, -1}},
      {"diagonal", {1, -1, -1, 1}},
  };
};

namespace detail {

template <typename T>
void get_if_present(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  detail::get_if_present(j, "seed", c.seed);
  if (auto it = j.find("ring"); it != j.end()) {
    const auto& r = *it;
    detail::get_if_present(r, "n_stages", c.ring.n_stages);
    detail::get_if_present(r, "v_dd", c.ring.v_dd);
    detail::get_if_present(r, "gain", c.ring.gain);
    detail::get_if_present(r, "stage_time_constant_s", c.ring.stage_time_constant_s);
    detail::get_if_present(r, "stage_resistance_ohm", c.ring.stage_resistance_ohm);
    detail::get_if_present(r, "tap_stages", c.ring.tap_stages);
    detail::get_if_present(r, "output_stage", c.ring.output_stage);
  }
  if (auto it = j.find("device"); it != j.end()) {
    const auto& d = *it;
    detail::get_if_present(d, "forming_mean_v", c.device.forming_mean_v);
    detail::get_if_present(d, "forming_sd_v", c.device.forming_sd_v);
    detail::get_if_present(d, "forming_clamp_lo_v", c.device.forming_clamp_lo_v);
    detail::get_if_present(d, "forming_clamp_hi_v", c.device.forming_clamp_hi_v);
    detail::get_if_present(d, "unformed_conductance_s", c.device.unformed_conductance_s);
    detail::get_if_present(d, "formed_conductance_s", c.device.formed_conductance_s);
    detail::get_if_present(d, "g_min_s", c.device.g_min_s);
    detail::get_if_present(d, "g_max_s", c.device.g_max_s);
    detail::get_if_present(d, "eta_set", c.device.eta_set);
    detail::get_if_present(d, "eta_reset", c.device.eta_reset);
    detail::get_if_present(d, "program_threshold_v", c.device.program_threshold_v);
    detail::get_if_present(d, "set_pulse_amplitude_v", c.device.set_pulse_amplitude_v);
    detail::get_if_present(d, "reset_pulse_amplitude_v", c.device.reset_pulse_amplitude_v);
    detail::get_if_present(d, "pulse_width_s", c.device.pulse_width_s);
    detail::get_if_present(d, "program_verify_fraction", c.device.program_verify_fraction);
    detail::get_if_present(d, "program_pulse_budget", c.device.program_pulse_budget);
    detail::get_if_present(d, "disturb_threshold_v", c.device.disturb_threshold_v);
    detail::get_if_present(d, "nonlinearity_alpha_per_v", c.device.nonlinearity_alpha_per_v);
    detail::get_if_present(d, "retention_drift_per_decade", c.device.retention_drift_per_decade);
    detail::get_if_present(d, "retention_t0_s", c.device.retention_t0_s);
    detail::get_if_present(d, "switch_on_resistance_ohm", c.device.switch_on_resistance_ohm);
  }
  if (auto it = j.find("coupling"); it != j.end()) {
    detail::get_if_present(*it, "series_resistance_ohm", c.coupling.series_resistance_ohm);
    detail::get_if_present(*it, "gate_on_voltage_v", c.coupling.gate_on_voltage_v);
  }
  if (auto it = j.find("sim"); it != j.end()) {
    detail::get_if_present(*it, "dt_s", c.dt_s);
    detail::get_if_present(*it, "max_samples", c.max_samples);
    std::string scope;
    detail::get_if_present(*it, "gate_scope", scope);
    if (!scope.empty()) {
      if (scope == "all_cells") c.gate_scope = GateScope::all_cells;
      else if (scope == "coupled_cells") c.gate_scope = GateScope::coupled_cells;
      else throw std::invalid_argument("config: unknown gate_scope '" + scope + "'");
    }
  }
  if (auto it = j.find("lock"); it != j.end()) {
    detail::get_if_present(*it, "freq_tolerance_rel", c.lock.freq_tolerance_rel);
    detail::get_if_present(*it, "phase_tolerance_deg", c.lock.phase_tolerance_deg);
    detail::get_if_present(*it, "window_periods", c.lock.window_periods);
  }
  if (auto it = j.find("retrieval"); it != j.end()) {
    detail::get_if_present(*it, "duration_periods", c.retrieval_duration_periods);
    detail::get_if_present(*it, "measure_periods", c.retrieval_measure_periods);
    detail::get_if_present(*it, "init_phase_jitter_deg", c.init_phase_jitter_deg);
  }
  if (auto it = j.find("toggle"); it != j.end()) {
    detail::get_if_present(*it, "coupled_periods", c.toggle_coupled_periods);
    detail::get_if_present(*it, "free_periods", c.toggle_free_periods);
  }
  if (auto it = j.find("characterize"); it != j.end()) {
    detail::get_if_present(*it, "forming_draws", c.forming_draws);
    detail::get_if_present(*it, "sweep_pulses", c.sweep_pulses);
    detail::get_if_present(*it, "retention_horizon_s", c.retention_horizon_s);
  }
  if (auto it = j.find("patterns"); it != j.end()) {
    for (const auto& [name, px] : it->items()) c.patterns[name] = px.get<std::vector<int>>();
  }
  return c;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  j["ring"] = {
      {"n_stages", c.ring.n_stages},
      {"v_dd", c.ring.v_dd},
      {"gain", c.ring.gain},
      {"stage_time_constant_s", c.ring.stage_time_constant_s},
      {"stage_resistance_ohm", c.ring.stage_resistance_ohm},
      {"tap_stages", c.ring.tap_stages},
      {"output_stage", c.ring.output_stage},
  };
  j["device"] = {
      {"forming_mean_v", c.device.forming_mean_v},
      {"forming_sd_v", c.device.forming_sd_v},
      {"forming_clamp_lo_v", c.device.forming_clamp_lo_v},
      {"forming_clamp_hi_v", c.device.forming_clamp_hi_v},
      {"unformed_conductance_s", c.device.unformed_conductance_s},
      {"formed_conductance_s", c.device.formed_conductance_s},
      {"g_min_s", c.device.g_min_s},
      {"g_max_s", c.device.g_max_s},
      {"eta_set", c.device.eta_set},
      {"eta_reset", c.device.eta_reset},
      {"program_threshold_v", c.device.program_threshold_v},
      {"set_pulse_amplitude_v", c.device.set_pulse_amplitude_v},
      {"reset_pulse_amplitude_v", c.device.reset_pulse_amplitude_v},
      {"pulse_width_s", c.device.pulse_width_s},
      {"program_verify_fraction", c.device.program_verify_fraction},
      {"program_pulse_budget", c.device.program_pulse_budget},
      {"disturb_threshold_v", c.device.disturb_threshold_v},
      {"nonlinearity_alpha_per_v", c.device.nonlinearity_alpha_per_v},
      {"retention_drift_per_decade", c.device.retention_drift_per_decade},
      {"retention_t0_s", c.device.retention_t0_s},
      {"switch_on_resistance_ohm", c.device.switch_on_resistance_ohm},
  };
  j["coupling"] = {
      {"series_resistance_ohm", c.coupling.series_resistance_ohm},
      {"gate_on_voltage_v", c.coupling.gate_on_voltage_v},
  };
  j["sim"] = {
      {"dt_s", c.dt_s},
      {"max_samples", c.max_samples},
      {"gate_scope", c.gate_scope == GateScope::coupled_cells ? "coupled_cells" : "all_cells"},
  };
  j["lock"] = {
      {"freq_tolerance_rel", c.lock.freq_tolerance_rel},
      {"phase_tolerance_deg", c.lock.phase_tolerance_deg},
      {"window_periods", c.lock.window_periods},
  };
  j["retrieval"] = {
      {"duration_periods", c.retrieval_duration_periods},
      {"measure_periods", c.retrieval_measure_periods},
      {"init_phase_jitter_deg", c.init_phase_jitter_deg},
  };
  j["toggle"] = {
      {"coupled_periods", c.toggle_coupled_periods},
      {"free_periods", c.toggle_free_periods},
  };
  j["characterize"] = {
      {"forming_draws", c.forming_draws},
      {"sweep_pulses", c.sweep_pulses},
      {"retention_horizon_s", c.retention_horizon_s},
  };
  j["patterns"] = c.patterns;
  return j;
}

inline void validate(const ExperimentConfig& c) {
  validate(c.ring);
  if (!(c.dt_s > 0.0)) throw std::invalid_argument("config: dt_s must be positive");
  if (c.max_samples < 2) throw std::invalid_argument("config: max_samples must be at least 2");
  if (!(c.device.g_min_s > 0.0) || !(c.device.g_max_s > c.device.g_min_s))
    throw std::invalid_argument("config: conductance window must satisfy 0 < g_min < g_max");
  if (!(c.device.program_verify_fraction > 0.0) || c.device.program_verify_fraction > 1.0)
    throw std::invalid_argument("config: program_verify_fraction must be in (0, 1]");
  if (c.device.program_pulse_budget < 1) throw std::invalid_argument("config: pulse budget must be positive");
  if (!(c.coupling.series_resistance_ohm >= 0.0))
    throw std::invalid_argument("config: series resistance must be non-negative");
  if (!(c.retrieval_duration_periods > 0.0) || !(c.retrieval_measure_periods > 0.0) ||
      c.retrieval_measure_periods > c.retrieval_duration_periods)
    throw std::invalid_argument("config: retrieval window must fit inside the run");
  if (c.forming_draws < 2) throw std::invalid_argument("config: forming_draws must be at least 2");
  if (c.sweep_pulses < 1) throw std::invalid_argument("config: sweep_pulses must be positive");
  if (!(c.retention_horizon_s >= 0.0)) throw std::invalid_argument("config: retention horizon must be non-negative");
  for (const auto& [name, px] : c.patterns) {
    if (px.empty()) throw std::invalid_argument("config: pattern '" + name + "' is empty");
    for (int v : px)
      if (v != 1 && v != -1)
        throw std::invalid_argument("config: pattern '" + name + "' must hold only +1/-1 pixels");
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  ExperimentConfig c = config_from_json(j);
  validate(c);
  return c;
}

inline void save_config(const std::string& path, const ExperimentConfig& c) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write " + path);
  out << config_to_json(c).dump(2) << "\n";
}

// Stable digest of the fully resolved configuration; lands in the run
// manifest so outputs can be traced back to their inputs.
inline std::uint64_t config_fingerprint(const ExperimentConfig& c) {
  return fnv1a64(config_to_json(c).dump());
}

}  // namespace onnsim
