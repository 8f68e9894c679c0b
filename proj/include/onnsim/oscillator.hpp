#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "onnsim/rk4.hpp"

namespace onnsim {

// Measured period of the free-running 9-stage ring in units of the stage
// time constant. Used only for picking run lengths and default step sizes;
// the limit-cycle cache below recomputes the exact value on demand.
inline constexpr double kApproxPeriodPerTau = 12.596;

struct RingParams {
  int n_stages = 9;
  double v_dd = 5.0;
  double gain = 10.0;
  double stage_time_constant_s = 9.6062e-6;  // puts the default coupled network at 8.6 kHz
  double stage_resistance_ohm = 10e3;
  std::array<int, 2> tap_stages{7, 8};  // 1-based, behind the output stage
  int output_stage = 9;                 // 1-based

  double stage_capacitance_f() const { return stage_time_constant_s / stage_resistance_ohm; }
  int output_index() const { return output_stage - 1; }
  int tap_index(int which) const { return tap_stages.at(static_cast<std::size_t>(which)) - 1; }
};

inline void validate(const RingParams& p) {
  if (p.n_stages < 3 || p.n_stages % 2 == 0)
    throw std::invalid_argument("ring needs an odd stage count of at least 3");
  if (!(p.stage_time_constant_s > 0.0)) throw std::invalid_argument("stage time constant must be positive");
  if (!(p.stage_resistance_ohm > 0.0)) throw std::invalid_argument("stage resistance must be positive");
  if (!(p.v_dd > 0.0)) throw std::invalid_argument("v_dd must be positive");
  if (!(p.gain > 0.0)) throw std::invalid_argument("inverter gain must be positive");
  for (int s : p.tap_stages)
    if (s < 1 || s > p.n_stages) throw std::invalid_argument("tap stage out of range");
  if (p.output_stage < 1 || p.output_stage > p.n_stages)
    throw std::invalid_argument("output stage out of range");
}

// Smooth inverter characteristic: full swing between 0 and v_dd with a
// tanh transition centred at v_dd/2.
inline double inverter_transfer(double v, const RingParams& p) {
  return 0.5 * p.v_dd * (1.0 - std::tanh(p.gain * (2.0 * v / p.v_dd - 1.0)));
}

inline double inverter_transfer_deriv(double v, const RingParams& p) {
  const double u = p.gain * (2.0 * v / p.v_dd - 1.0);
  const double sech = 1.0 / std::cosh(u);
  return -p.gain * sech * sech;
}

// Ring ODE. Each stage is a first-order lag chasing the previous stage's
// inverter output; injected currents (A, positive into the node) model the
// coupling fabric.
inline void ring_derivative(const RingParams& p, std::span<const double> y,
                            std::span<const double> injected_current_a, std::span<double> dydt) {
  const int n = p.n_stages;
  const double inv_tau = 1.0 / p.stage_time_constant_s;
  const double inv_c = 1.0 / p.stage_capacitance_f();
  for (int i = 0; i < n; ++i) {
    const int prev = (i + n - 1) % n;
    double d = (inverter_transfer(y[static_cast<std::size_t>(prev)], p) - y[static_cast<std::size_t>(i)]) * inv_tau;
    if (!injected_current_a.empty()) d += injected_current_a[static_cast<std::size_t>(i)] * inv_c;
    dydt[static_cast<std::size_t>(i)] = d;
  }
}

// One period of the free-running ring, sampled densely at unit time
// constant. The waveform shape is independent of the time constant (the
// whole vector field scales as 1/tau), so a single cache entry per
// (n_stages, gain, v_dd) serves every configuration.
class LimitCycle {
 public:
  // Period of the free-running ring in units of the stage time constant.
  double period_per_tau() const { return period_tau1_; }

  // Full state vector at the given phase of the cycle. Phase 0 is the
  // rising half-supply crossing of the output stage; phase grows with time.
  std::vector<double> state_at_phase(double phase_deg) const {
    double ph = std::fmod(phase_deg, 360.0);
    if (ph < 0.0) ph += 360.0;
    const double x = ph / 360.0 * static_cast<double>(samples_.size() - 1);
    const auto lo = static_cast<std::size_t>(std::min(x, static_cast<double>(samples_.size() - 2)));
    const double frac = x - static_cast<double>(lo);
    const std::size_t n = samples_[0].size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = samples_[lo][i] + frac * (samples_[lo + 1][i] - samples_[lo][i]);
    return out;
  }

  static const LimitCycle& get(const RingParams& p) {
    static std::mutex mu;
    static std::map<std::tuple<int, double, double>, LimitCycle> cache;
    std::scoped_lock lock(mu);
    const auto key = std::make_tuple(p.n_stages, p.gain, p.v_dd);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, compute(p)).first;
    return it->second;
  }

 private:
  static LimitCycle compute(const RingParams& ring) {
    validate(ring);
    RingParams p = ring;
    p.stage_time_constant_s = 1.0;
    p.stage_resistance_ohm = 1.0;
    const auto n = static_cast<std::size_t>(p.n_stages);
    const auto out_idx = static_cast<std::size_t>(p.output_index());
    const double mid = 0.5 * p.v_dd;
    const double dt = kApproxPeriodPerTau / 4096.0;

    Rk4Stepper stepper(n);
    auto deriv = [&p](double, std::span<const double> yy, std::span<double> dd) {
      ring_derivative(p, yy, {}, dd);
    };

    // A single RK4 step of size h never misses the transition: the stage
    // voltages are monotone over spans much shorter than a period.
    auto bisect_crossing = [&](const std::vector<double>& before, double t_before) {
      double lo = 0.0, hi = dt;
      std::vector<double> probe;
      for (int b = 0; b < 60; ++b) {
        const double h = 0.5 * (lo + hi);
        probe = before;
        stepper.step(deriv, t_before, h, probe);
        (probe[out_idx] >= mid ? hi : lo) = h;
      }
      std::vector<double> at = before;
      stepper.step(deriv, t_before, hi, at);
      return std::pair<std::vector<double>, double>(std::move(at), t_before + hi);
    };

    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = p.v_dd * static_cast<double>(i) / static_cast<double>(n);

    double t = 0.0;
    const int settle_steps = static_cast<int>(30.0 * kApproxPeriodPerTau / dt);
    for (int s = 0; s < settle_steps; ++s) {
      stepper.step(deriv, t, dt, y);
      t += dt;
    }

    // Land exactly on a rising crossing of the output stage.
    bool anchored = false;
    for (int guard = 0; guard < 10 * 4096 && !anchored; ++guard) {
      const std::vector<double> before = y;
      const double prev = y[out_idx];
      stepper.step(deriv, t, dt, y);
      t += dt;
      if (prev < mid && y[out_idx] >= mid) {
        std::tie(y, t) = bisect_crossing(before, t - dt);
        anchored = true;
      }
    }
    if (!anchored) throw std::runtime_error("limit cycle: output stage never crossed half supply");

    // Record a bit over one revolution from the anchor, then locate the
    // next rising crossing inside the recording to measure the period.
    const double t0 = t;
    std::vector<std::vector<double>> raw{y};
    std::vector<double> raw_t{t};
    const int record_steps = static_cast<int>(1.3 * kApproxPeriodPerTau / dt);
    for (int s = 0; s < record_steps; ++s) {
      stepper.step(deriv, t, dt, y);
      t += dt;
      raw.push_back(y);
      raw_t.push_back(t);
    }

    double period = 0.0;
    for (std::size_t j = 1; j + 1 < raw.size(); ++j) {
      if (raw_t[j] - t0 > 0.5 * kApproxPeriodPerTau && raw[j][out_idx] < mid && raw[j + 1][out_idx] >= mid) {
        period = bisect_crossing(raw[j], raw_t[j]).second - t0;
        break;
      }
    }
    if (period <= 0.0) throw std::runtime_error("limit cycle: failed to close the revolution");

    LimitCycle lc;
    lc.period_tau1_ = period;

    // Resample onto a uniform grid closed at both ends.
    constexpr std::size_t kGrid = 2048;
    lc.samples_.resize(kGrid + 1);
    std::size_t j = 0;
    for (std::size_t g = 0; g <= kGrid; ++g) {
      const double tg = t0 + period * static_cast<double>(g) / static_cast<double>(kGrid);
      while (j + 2 < raw_t.size() && raw_t[j + 1] < tg) ++j;
      const double span_t = raw_t[j + 1] - raw_t[j];
      const double frac = span_t > 0.0 ? std::clamp((tg - raw_t[j]) / span_t, 0.0, 1.0) : 0.0;
      std::vector<double> s(n);
      for (std::size_t i = 0; i < n; ++i) s[i] = raw[j][i] + frac * (raw[j + 1][i] - raw[j][i]);
      lc.samples_[g] = std::move(s);
    }
    lc.samples_.back() = lc.samples_.front();
    return lc;
  }

  std::vector<std::vector<double>> samples_;
  double period_tau1_ = 0.0;
};

// Free-running frequency implied by the cached limit cycle.
inline double intrinsic_frequency_hz(const RingParams& p) {
  return 1.0 / (LimitCycle::get(p).period_per_tau() * p.stage_time_constant_s);
}

}  // namespace onnsim
