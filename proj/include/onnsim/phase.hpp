#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace onnsim {

// Times at which the signal crosses the threshold going up, linearly
// interpolated between samples. A sample exactly on the threshold counts
// as already above it.
inline std::vector<double> rising_crossings(std::span<const double> times,
                                            std::span<const double> values, double threshold) {
  if (times.size() != values.size()) throw std::invalid_argument("rising_crossings: size mismatch");
  std::vector<double> out;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double v0 = values[i - 1];
    const double v1 = values[i];
    if (v0 < threshold && v1 >= threshold) {
      const double frac = (threshold - v0) / (v1 - v0);
      out.push_back(times[i - 1] + frac * (times[i] - times[i - 1]));
    }
  }
  return out;
}

// Mean frequency over a crossing train. Three crossings (two full periods)
// is the floor for calling it a frequency at all.
inline double estimate_frequency(std::span<const double> crossings) {
  if (crossings.size() < 3) throw std::invalid_argument("estimate_frequency: need at least 3 crossings");
  const double span_s = crossings.back() - crossings.front();
  if (!(span_s > 0.0)) throw std::invalid_argument("estimate_frequency: crossings must advance in time");
  return static_cast<double>(crossings.size() - 1) / span_s;
}

inline double wrap_degrees(double deg) {
  double d = std::fmod(deg, 360.0);
  if (d < 0.0) d += 360.0;
  return d;
}

// Shortest angular separation, in [0, 180].
inline double circular_distance_deg(double a_deg, double b_deg) {
  const double d = wrap_degrees(a_deg - b_deg);
  return std::min(d, 360.0 - d);
}

struct PhaseStat {
  double mean_deg = 0.0;   // circular mean, in [0, 360)
  double resultant = 0.0;  // mean resultant length, 1 means perfectly tight
  std::size_t count = 0;
};

inline double circular_mean_deg(std::span<const double> phases_deg) {
  if (phases_deg.empty()) throw std::invalid_argument("circular_mean_deg: empty input");
  constexpr double kRad = std::numbers::pi / 180.0;
  double s = 0.0, c = 0.0;
  for (double p : phases_deg) {
    s += std::sin(p * kRad);
    c += std::cos(p * kRad);
  }
  return wrap_degrees(std::atan2(s, c) / kRad);
}

// Phase of each channel crossing within the reference period that contains
// it: 0 degrees at the reference crossing, growing to 360 at the next one.
inline std::vector<double> crossing_phases_deg(std::span<const double> ref,
                                               std::span<const double> channel) {
  std::vector<double> out;
  if (ref.size() < 2) return out;
  for (double t : channel) {
    if (t < ref.front() || t >= ref.back()) continue;
    const auto it = std::upper_bound(ref.begin(), ref.end(), t);
    const double t1 = *it;
    const double t0 = *(it - 1);
    out.push_back(360.0 * (t - t0) / (t1 - t0));
  }
  return out;
}

// Average phase offset of a channel against the reference train.
inline PhaseStat relative_phase(std::span<const double> ref, std::span<const double> channel) {
  const auto phases = crossing_phases_deg(ref, channel);
  if (phases.empty()) throw std::invalid_argument("relative_phase: no channel crossings inside the reference span");
  constexpr double kRad = std::numbers::pi / 180.0;
  double s = 0.0, c = 0.0;
  for (double p : phases) {
    s += std::sin(p * kRad);
    c += std::cos(p * kRad);
  }
  PhaseStat st;
  st.count = phases.size();
  st.mean_deg = wrap_degrees(std::atan2(s, c) / kRad);
  st.resultant = std::sqrt(s * s + c * c) / static_cast<double>(phases.size());
  return st;
}

enum class Pixel { white, black, unresolved };

inline const char* to_string(Pixel p) {
  switch (p) {
    case Pixel::white: return "white";
    case Pixel::black: return "black";
    default: return "unresolved";
  }
}

// In-phase oscillators read as white pixels, anti-phase as black; the
// bands are inclusive at their 60-degree edges.
inline Pixel classify_pixel(double phase_deg, double band_half_width_deg = 60.0) {
  if (circular_distance_deg(phase_deg, 0.0) <= band_half_width_deg) return Pixel::white;
  if (circular_distance_deg(phase_deg, 180.0) <= band_half_width_deg) return Pixel::black;
  return Pixel::unresolved;
}

struct LockCriteria {
  double freq_tolerance_rel = 0.005;  // pairwise frequency spread
  double phase_tolerance_deg = 15.0;  // per-channel scatter around its own mean
  int window_periods = 3;             // reference periods per test window
};

// Earliest reference crossing from which every channel holds a common
// frequency and a steady phase for a full window. Channel 0 is the
// reference; returns the lock onset time, or nothing if no window passes.
inline std::optional<double> detect_lock(const std::vector<std::vector<double>>& crossings,
                                         const LockCriteria& crit = {}) {
  if (crossings.empty()) throw std::invalid_argument("detect_lock: no channels");
  const auto& ref = crossings.front();
  const auto w = static_cast<std::size_t>(crit.window_periods);
  if (ref.size() < w + 1) return std::nullopt;

  for (std::size_t k = 0; k + w < ref.size(); ++k) {
    const double t_lo = ref[k];
    const double t_hi = ref[k + w];
    const std::vector<double> window_ref(ref.begin() + static_cast<std::ptrdiff_t>(k),
                                         ref.begin() + static_cast<std::ptrdiff_t>(k + w + 1));
    bool ok = true;
    double f_min = 0.0, f_max = 0.0;
    for (const auto& ch : crossings) {
      const auto lo = std::lower_bound(ch.begin(), ch.end(), t_lo);
      const auto hi = std::upper_bound(ch.begin(), ch.end(), t_hi);
      const auto m = static_cast<std::size_t>(hi - lo);
      if (m < 3) {
        ok = false;
        break;
      }
      const double f = static_cast<double>(m - 1) / (*(hi - 1) - *lo);
      if (f_min == 0.0) {
        f_min = f_max = f;
      } else {
        f_min = std::min(f_min, f);
        f_max = std::max(f_max, f);
      }
      const std::vector<double> window_ch(lo, hi);
      const auto phases = crossing_phases_deg(window_ref, window_ch);
      if (phases.empty()) {
        ok = false;
        break;
      }
      const double mean = circular_mean_deg(phases);
      for (double p : phases) {
        if (circular_distance_deg(p, mean) > crit.phase_tolerance_deg) {
          ok = false;
          break;
        }
      }
      if (!ok) break;
    }
    if (ok && (f_max - f_min) <= crit.freq_tolerance_rel * (0.5 * (f_max + f_min))) return t_lo;
  }
  return std::nullopt;
}

}  // namespace onnsim
