#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "onnsim/random.hpp"

namespace onnsim {

// Behavioral constants for the CMO/HfOx ReRAM cell and its access switch.
// Everything here is overridable from the experiment config.
struct DeviceParams {
  double forming_mean_v = 2.84;
  double forming_sd_v = 0.13;
  double forming_clamp_lo_v = 2.0;
  double forming_clamp_hi_v = 3.7;

  double unformed_conductance_s = 1e-7;  // ~10 MOhm, never formed
  double formed_conductance_s = 5e-4;    // ~2 kOhm, post-forming state
  double g_min_s = 5e-5;                 // programmable window
  double g_max_s = 5e-4;

  double eta_set = 0.03;    // soft-bound step fraction per set pulse
  double eta_reset = 0.03;  // and per reset pulse
  double program_threshold_v = 1.0;
  double set_pulse_amplitude_v = 1.6;
  double reset_pulse_amplitude_v = -2.3;
  double pulse_width_s = 60e-9;
  double program_verify_fraction = 0.95;
  int program_pulse_budget = 1000;

  double disturb_threshold_v = 1.2;
  double nonlinearity_alpha_per_v = 0.2;

  double retention_drift_per_decade = 0.005;
  double retention_t0_s = 1.0;

  double switch_on_resistance_ohm = 1e3;
};

// One resistive cell. Plain value type; operations below are pure state
// transitions except check_disturb, which bumps the bookkeeping counter.
struct ReRamCell {
  bool formed = false;
  double forming_voltage_v = 0.0;
  double conductance_base_s = 1e-7;  // zero-bias conductance G0
  double g_min_s = 5e-5;
  double g_max_s = 5e-4;
  int disturb_count = 0;
  double nonlinearity_alpha_per_v = 0.2;
};

struct PulseSpec {
  double amplitude_v = 0.0;  // positive: set, negative: reset
  double width_s = 60e-9;
};

// 1T1R branch element: the transistor gates access to the cell.
struct OneT1R {
  ReRamCell cell;
  bool gate_on = false;
  double switch_on_resistance_ohm = 1e3;
};

struct DisturbEvent {
  double time_s = 0.0;
  std::string cell_id;
  double voltage_across_v = 0.0;
};

// Draw from Normal(2.84 V, 0.13 V), clamped to exclude nonphysical tails.
inline double sample_forming_voltage(const DeviceParams& p, Rng& rng) {
  double v = p.forming_mean_v;
  if (p.forming_sd_v > 0.0) {
    std::normal_distribution<double> dist(p.forming_mean_v, p.forming_sd_v);
    v = dist(rng);
  }
  return std::clamp(v, p.forming_clamp_lo_v, p.forming_clamp_hi_v);
}

inline ReRamCell make_cell(const DeviceParams& p, Rng& rng) {
  ReRamCell c;
  c.formed = false;
  c.forming_voltage_v = sample_forming_voltage(p, rng);
  c.conductance_base_s = p.unformed_conductance_s;
  c.g_min_s = p.g_min_s;
  c.g_max_s = p.g_max_s;
  c.nonlinearity_alpha_per_v = p.nonlinearity_alpha_per_v;
  return c;
}

// Forming succeeds iff the applied voltage reaches the cell's own threshold
// (boundary inclusive). Double-forming signals a harness bug.
inline ReRamCell form(const ReRamCell& cell, double applied_v, const DeviceParams& p) {
  if (cell.formed) throw std::logic_error("form: cell is already formed");
  ReRamCell out = cell;
  if (applied_v >= cell.forming_voltage_v) {
    out.formed = true;
    out.conductance_base_s = p.formed_conductance_s;
  }
  return out;
}

// Soft-bounded conductance update: set pulses close a fixed fraction of the
// gap to g_max, reset pulses a fixed fraction of the gap to g_min. Pulses
// below the programming threshold do nothing.
inline ReRamCell apply_pulse(const ReRamCell& cell, const PulseSpec& pulse, const DeviceParams& p) {
  if (!cell.formed) throw std::logic_error("apply_pulse: cell is unformed");
  if (!(pulse.width_s > 0.0)) throw std::invalid_argument("apply_pulse: pulse width must be positive");
  ReRamCell out = cell;
  if (std::abs(pulse.amplitude_v) < p.program_threshold_v) return out;
  double g = cell.conductance_base_s;
  if (pulse.amplitude_v > 0.0) {
    g = g + p.eta_set * (cell.g_max_s - g);
  } else {
    g = g - p.eta_reset * (g - cell.g_min_s);
  }
  out.conductance_base_s = std::clamp(g, cell.g_min_s, cell.g_max_s);
  return out;
}

// Voltage-dependent conductance G(V) = G0 * (1 + alpha * |V|). Unformed
// cells stay at the unformed conductance regardless of bias.
inline double conductance_at(const ReRamCell& cell, double v_across) {
  if (!cell.formed) return cell.conductance_base_s;
  return cell.conductance_base_s * (1.0 + cell.nonlinearity_alpha_per_v * std::abs(v_across));
}

// Detection only: flags bias beyond the disturb threshold on a formed cell
// and counts it. The electrical state is untouched.
inline std::optional<DisturbEvent> check_disturb(ReRamCell& cell, double v_across, double now_s,
                                                 const std::string& cell_id, const DeviceParams& p) {
  if (!cell.formed || std::abs(v_across) < p.disturb_threshold_v) return std::nullopt;
  ++cell.disturb_count;
  return DisturbEvent{now_s, cell_id, v_across};
}

// Log-time drift law, clamped so a programmed cell never projects below its
// window floor. At elapsed = 0 this is exactly G0.
inline double retention_project(const ReRamCell& cell, double elapsed_s, const DeviceParams& p) {
  if (elapsed_s < 0.0) throw std::invalid_argument("retention_project: elapsed must be non-negative");
  const double drift = p.retention_drift_per_decade * std::log10(1.0 + elapsed_s / p.retention_t0_s);
  const double g = cell.conductance_base_s * (1.0 - drift);
  const double floor = std::min(cell.g_min_s, cell.conductance_base_s);
  return std::max(g, floor);
}

}  // namespace onnsim
