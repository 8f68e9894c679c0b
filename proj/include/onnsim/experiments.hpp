#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "onnsim/config.hpp"
#include "onnsim/coupling.hpp"
#include "onnsim/csv.hpp"
#include "onnsim/engine.hpp"
#include "onnsim/phase.hpp"

namespace onnsim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRetrievalMismatch = 2;
inline constexpr int kExitProgramming = 3;
inline constexpr int kExitSolver = 4;

// The probe slot: a pattern under this name can seed the oscillators but
// never trains the weights.
inline constexpr const char* kProbePatternName = "custom";

inline std::vector<std::vector<int>> stored_patterns(const ExperimentConfig& c) {
  std::vector<std::vector<int>> out;
  for (const auto& [name, px] : c.patterns)
    if (name != kProbePatternName) out.push_back(px);
  return out;
}

inline std::vector<double> phases_from_pattern(const std::vector<int>& pixels) {
  std::vector<double> ph;
  ph.reserve(pixels.size());
  for (int v : pixels) ph.push_back(v > 0 ? 0.0 : 180.0);
  return ph;
}

struct OscillatorReading {
  int oscillator_id = 0;
  double frequency_hz = 0.0;
  double relative_phase_deg = 0.0;  // against oscillator 0
  Pixel pixel = Pixel::unresolved;
};

struct RetrievalResult {
  std::string pattern_name;
  std::vector<int> target;
  std::vector<OscillatorReading> readings;
  std::optional<double> lock_onset_s;
  double lock_deadline_s = 0.0;  // three reference periods into the run
  double ref_period_s = 0.0;
  bool matched = false;
  WaveformSet waves;
  ProgramReport programming;
  CrossbarLayout layout;
  CrossbarArray array_after;
  std::uint64_t fingerprint = 0;
};

namespace detail {

// Crossing trains restricted to a time window, one per channel.
inline std::vector<std::vector<double>> window_crossings(const WaveformSet& w, double threshold,
                                                         double t_lo, double t_hi) {
  std::size_t i_lo = 0, i_hi = w.times.size();
  while (i_lo < w.times.size() && w.times[i_lo] < t_lo) ++i_lo;
  while (i_hi > i_lo && w.times[i_hi - 1] > t_hi) --i_hi;
  std::vector<std::vector<double>> out;
  out.reserve(w.channels.size());
  for (const auto& ch : w.channels) {
    out.push_back(rising_crossings(std::span(w.times).subspan(i_lo, i_hi - i_lo),
                                   std::span(ch).subspan(i_lo, i_hi - i_lo), threshold));
  }
  return out;
}

}  // namespace detail

// Store the configured patterns in the array, seed the rings with the
// chosen pattern's phases, and let the network settle. The readout
// compares classified pixels against the target up to a global flip:
// oscillator 0 is the phase reference, so the target is normalised to
// make its first pixel white.
inline RetrievalResult run_retrieval(const ExperimentConfig& c, const std::string& pattern_name) {
  validate(c);
  const auto pattern_it = c.patterns.find(pattern_name);
  if (pattern_it == c.patterns.end())
    throw std::invalid_argument("retrieval: pattern '" + pattern_name + "' is not configured");
  const std::vector<int>& probe = pattern_it->second;

  const auto stored = stored_patterns(c);
  const CouplingMatrix weights = hebbian_weights(stored);
  if (static_cast<int>(probe.size()) != weights.n)
    throw std::invalid_argument("retrieval: pattern length does not match the stored set");

  RetrievalResult res;
  res.pattern_name = pattern_name;
  res.target = probe;
  res.fingerprint = config_fingerprint(c);
  res.layout = map_to_crossbar(weights, c.ring.tap_stages);

  Rng array_rng = make_rng(c.seed, "array");
  CrossbarArray arr = make_crossbar_array(res.layout.rows, res.layout.cols, c.device, array_rng);
  res.programming = program_layout(arr, res.layout, c.device);

  std::vector<double> phases = phases_from_pattern(probe);
  if (c.init_phase_jitter_deg > 0.0) {
    Rng init_rng = make_rng(c.seed, "init");
    std::uniform_real_distribution<double> jitter(-c.init_phase_jitter_deg, c.init_phase_jitter_deg);
    for (double& ph : phases) ph += jitter(init_rng);
  }
  const std::vector<double> y0 = initial_state_from_phases(c.ring, phases);

  const double period_s = 1.0 / intrinsic_frequency_hz(c.ring);
  res.ref_period_s = period_s;
  res.lock_deadline_s = 3.0 * period_s;

  SimParams sim;
  sim.dt_s = c.dt_s;
  sim.duration_s = c.retrieval_duration_periods * period_s;
  sim.max_samples = c.max_samples;
  std::vector<GateEvent> events{{0.0, true, c.gate_scope, {}}};
  res.waves = simulate(c.ring, c.device, res.layout, arr, c.coupling, std::move(events), y0, sim);
  res.array_after = std::move(arr);

  const double mid = 0.5 * c.ring.v_dd;
  const auto full = detail::window_crossings(res.waves, mid, 0.0, sim.duration_s);
  res.lock_onset_s = detect_lock(full, c.lock);

  const double t_hi = sim.duration_s;
  const double t_lo = t_hi - c.retrieval_measure_periods * period_s;
  const auto tail = detail::window_crossings(res.waves, mid, t_lo, t_hi);

  std::vector<int> normalized = probe;
  if (normalized[0] < 0)
    for (int& v : normalized) v = -v;

  res.matched = res.lock_onset_s.has_value();
  for (std::size_t k = 0; k < tail.size(); ++k) {
    OscillatorReading r;
    r.oscillator_id = static_cast<int>(k);
    r.frequency_hz = estimate_frequency(tail[k]);
    r.relative_phase_deg = relative_phase(tail[0], tail[k]).mean_deg;
    r.pixel = classify_pixel(r.relative_phase_deg);
    const Pixel want = normalized[k] > 0 ? Pixel::white : Pixel::black;
    if (r.pixel != want) res.matched = false;
    res.readings.push_back(r);
  }
  return res;
}

struct ToggleResult {
  double intrinsic_hz = 0.0;
  double gate_off_time_s = 0.0;
  std::vector<double> coupled_hz;  // per oscillator, window just before gate-off
  std::vector<double> free_hz;     // per oscillator, recovery window after gate-off
  bool recovered = false;          // every ring back within 1% of intrinsic
  WaveformSet waves;
  std::uint64_t fingerprint = 0;
};

// Coupled run with the gates dropped mid-flight: the network first locks on
// a stored pattern, then every ring must drift back to its own frequency.
inline ToggleResult run_coupling_toggle(const ExperimentConfig& c) {
  validate(c);
  const auto stored = stored_patterns(c);
  const CouplingMatrix weights = hebbian_weights(stored);
  const CrossbarLayout layout = map_to_crossbar(weights, c.ring.tap_stages);

  Rng array_rng = make_rng(c.seed, "array");
  CrossbarArray arr = make_crossbar_array(layout.rows, layout.cols, c.device, array_rng);
  program_layout(arr, layout, c.device);

  ToggleResult res;
  res.fingerprint = config_fingerprint(c);
  res.intrinsic_hz = intrinsic_frequency_hz(c.ring);
  const double period_s = 1.0 / res.intrinsic_hz;
  res.gate_off_time_s = c.toggle_coupled_periods * period_s;

  const std::vector<int>& probe = stored.front();
  const std::vector<double> y0 = initial_state_from_phases(c.ring, phases_from_pattern(probe));

  SimParams sim;
  sim.dt_s = c.dt_s;
  sim.duration_s = (c.toggle_coupled_periods + c.toggle_free_periods) * period_s;
  sim.max_samples = c.max_samples;
  std::vector<GateEvent> events{
      {0.0, true, c.gate_scope, {}},
      {res.gate_off_time_s, false, GateScope::all_cells, {}},
  };
  res.waves = simulate(c.ring, c.device, layout, arr, c.coupling, std::move(events), y0, sim);

  const double mid = 0.5 * c.ring.v_dd;
  const auto coupled = detail::window_crossings(res.waves, mid, res.gate_off_time_s - 3.0 * period_s,
                                                res.gate_off_time_s);
  const auto free_run = detail::window_crossings(res.waves, mid, res.gate_off_time_s + 2.0 * period_s,
                                                 res.gate_off_time_s + 5.0 * period_s);
  res.recovered = true;
  for (std::size_t k = 0; k < res.waves.channels.size(); ++k) {
    res.coupled_hz.push_back(estimate_frequency(coupled[k]));
    res.free_hz.push_back(estimate_frequency(free_run[k]));
    if (std::abs(res.free_hz.back() - res.intrinsic_hz) > 0.01 * res.intrinsic_hz) res.recovered = false;
  }
  return res;
}

struct CharacterizationResult {
  std::vector<double> forming_draws_v;
  double forming_mean_v = 0.0;
  double forming_sd_v = 0.0;
  std::vector<double> set_sweep_g;    // conductance after each set pulse, from g_min
  std::vector<double> reset_sweep_g;  // conductance after each reset pulse, from g_max
  std::vector<std::pair<double, double>> retention;       // (elapsed_s, conductance)
  std::vector<std::tuple<double, double, double>> iv;     // (v_applied, current_a, v_device)
  std::uint64_t fingerprint = 0;
};

// Bench-style device sweeps: forming statistics, analog programming in
// both directions, projected retention, and the branch current-voltage
// curve through the full series chain.
inline CharacterizationResult run_device_characterization(const ExperimentConfig& c) {
  validate(c);
  CharacterizationResult res;
  res.fingerprint = config_fingerprint(c);

  Rng rng = make_rng(c.seed, "forming-stats");
  res.forming_draws_v.reserve(static_cast<std::size_t>(c.forming_draws));
  double acc = 0.0;
  for (int i = 0; i < c.forming_draws; ++i) {
    const double v = sample_forming_voltage(c.device, rng);
    res.forming_draws_v.push_back(v);
    acc += v;
  }
  res.forming_mean_v = acc / static_cast<double>(c.forming_draws);
  double ss = 0.0;
  for (double v : res.forming_draws_v) {
    const double d = v - res.forming_mean_v;
    ss += d * d;
  }
  res.forming_sd_v = std::sqrt(ss / static_cast<double>(c.forming_draws - 1));

  Rng cell_rng = make_rng(c.seed, "characterize-cell");
  ReRamCell up = make_cell(c.device, cell_rng);
  up = form(up, c.device.forming_clamp_hi_v, c.device);
  up.conductance_base_s = c.device.g_min_s;
  const PulseSpec set_pulse{c.device.set_pulse_amplitude_v, c.device.pulse_width_s};
  for (int i = 0; i < c.sweep_pulses; ++i) {
    up = apply_pulse(up, set_pulse, c.device);
    res.set_sweep_g.push_back(up.conductance_base_s);
  }
  ReRamCell down = up;
  down.conductance_base_s = c.device.g_max_s;
  const PulseSpec reset_pulse{c.device.reset_pulse_amplitude_v, c.device.pulse_width_s};
  for (int i = 0; i < c.sweep_pulses; ++i) {
    down = apply_pulse(down, reset_pulse, c.device);
    res.reset_sweep_g.push_back(down.conductance_base_s);
  }

  ReRamCell keeper = down;
  keeper.conductance_base_s = c.device.g_max_s;
  const int kRetentionPoints = 61;
  for (int i = 0; i < kRetentionPoints; ++i) {
    const double t = c.retention_horizon_s * static_cast<double>(i) / (kRetentionPoints - 1);
    res.retention.emplace_back(t, retention_project(keeper, t, c.device));
  }

  const double series = 2.0 * c.coupling.series_resistance_ohm + c.device.switch_on_resistance_ohm;
  for (int i = -100; i <= 100; ++i) {
    const double v = c.ring.v_dd * static_cast<double>(i) / 100.0;
    const BranchSolution sol = solve_branch(v, keeper, series);
    res.iv.emplace_back(v, sol.current_a, sol.v_device);
  }
  return res;
}

inline void write_manifest(const std::filesystem::path& path, const nlohmann::json& extra,
                           const ExperimentConfig& c) {
  nlohmann::json j = extra;
  char fp[32];
  std::snprintf(fp, sizeof(fp), "%016llx", static_cast<unsigned long long>(config_fingerprint(c)));
  j["config_fingerprint"] = fp;
  j["seed"] = c.seed;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

inline void write_retrieval_outputs(const RetrievalResult& res, const ExperimentConfig& c,
                                    const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);
  {
    std::ofstream os(outdir / "waveforms.csv");
    write_waveforms_csv(os, res.waves);
  }
  {
    std::ofstream os(outdir / "layout.csv");
    write_layout_csv(os, res.layout);
  }
  {
    std::ofstream os(outdir / "programming.csv");
    write_programming_csv(os, res.programming);
  }
  {
    std::ofstream os(outdir / "cells.csv");
    write_cells_csv(os, res.array_after);
  }
  {
    std::ofstream os(outdir / "disturb.csv");
    write_disturb_csv(os, res.waves.disturb_events);
  }
  {
    std::ofstream os(outdir / "report.csv");
    os << "oscillator_id,frequency,relative_phase,pixel\n";
    for (const auto& r : res.readings)
      os << r.oscillator_id << ',' << csv_num(r.frequency_hz) << ',' << csv_num(r.relative_phase_deg)
         << ',' << to_string(r.pixel) << "\n";
    os << "locked," << (res.lock_onset_s ? 1 : 0) << ",,\n";
    os << "lock_onset_s," << (res.lock_onset_s ? csv_num(*res.lock_onset_s) : "") << ",,\n";
    os << "lock_deadline_s," << csv_num(res.lock_deadline_s) << ",,\n";
    os << "pattern_matched," << (res.matched ? 1 : 0) << ",,\n";
  }
  write_manifest(outdir / "manifest.json",
                 {
                     {"experiment", "retrieve"},
                     {"pattern", res.pattern_name},
                     {"matched", res.matched},
                     {"locked", res.lock_onset_s.has_value()},
                     {"lock_onset_s", res.lock_onset_s ? nlohmann::json(*res.lock_onset_s) : nlohmann::json()},
                     {"max_formed_device_voltage_v", res.waves.max_formed_device_voltage_v},
                     {"disturb_events", res.waves.disturb_events.size()},
                 },
                 c);
}

inline void write_toggle_outputs(const ToggleResult& res, const ExperimentConfig& c,
                                 const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);
  {
    std::ofstream os(outdir / "waveforms.csv");
    write_waveforms_csv(os, res.waves);
  }
  {
    std::ofstream os(outdir / "report.csv");
    os << "oscillator_id,coupled_frequency,free_frequency,intrinsic_frequency\n";
    for (std::size_t k = 0; k < res.free_hz.size(); ++k)
      os << k << ',' << csv_num(res.coupled_hz[k]) << ',' << csv_num(res.free_hz[k]) << ','
         << csv_num(res.intrinsic_hz) << "\n";
    os << "recovered," << (res.recovered ? 1 : 0) << ",,\n";
  }
  write_manifest(outdir / "manifest.json",
                 {
                     {"experiment", "toggle"},
                     {"gate_off_time_s", res.gate_off_time_s},
                     {"recovered", res.recovered},
                 },
                 c);
}

inline void write_characterization_outputs(const CharacterizationResult& res, const ExperimentConfig& c,
                                           const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);
  {
    std::ofstream os(outdir / "forming.csv");
    os << "draw,voltage\n";
    for (std::size_t i = 0; i < res.forming_draws_v.size(); ++i)
      os << i << ',' << csv_num(res.forming_draws_v[i]) << "\n";
  }
  {
    std::ofstream os(outdir / "programming_sweep.csv");
    os << "pulse,direction,conductance\n";
    for (std::size_t i = 0; i < res.set_sweep_g.size(); ++i)
      os << (i + 1) << ",set," << csv_num(res.set_sweep_g[i]) << "\n";
    for (std::size_t i = 0; i < res.reset_sweep_g.size(); ++i)
      os << (i + 1) << ",reset," << csv_num(res.reset_sweep_g[i]) << "\n";
  }
  {
    std::ofstream os(outdir / "retention.csv");
    os << "elapsed_s,conductance\n";
    for (const auto& [t, g] : res.retention) os << csv_num(t) << ',' << csv_num(g) << "\n";
  }
  {
    std::ofstream os(outdir / "iv.csv");
    os << "v_applied,current,v_device\n";
    for (const auto& [v, i, vd] : res.iv)
      os << csv_num(v) << ',' << csv_num(i) << ',' << csv_num(vd) << "\n";
  }
  write_manifest(outdir / "manifest.json",
                 {
                     {"experiment", "characterize"},
                     {"forming_mean_v", res.forming_mean_v},
                     {"forming_sd_v", res.forming_sd_v},
                 },
                 c);
}

}  // namespace onnsim
