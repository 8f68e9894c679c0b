#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "onnsim/device.hpp"
#include "onnsim/random.hpp"

using namespace onnsim;

TEST_CASE("forming voltage statistics land on the published distribution") {
  DeviceParams p;
  Rng rng = make_rng(99, "forming");
  const int n = 1000;
  std::vector<double> draws;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    draws.push_back(sample_forming_voltage(p, rng));
    acc += draws.back();
  }
  const double mean = acc / n;
  double ss = 0.0;
  for (double v : draws) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1));
  REQUIRE(mean == Catch::Approx(2.84).margin(0.02));
  REQUIRE(sd == Catch::Approx(0.13).margin(0.02));
}

TEST_CASE("forming draws respect the clamp window") {
  DeviceParams p;
  p.forming_sd_v = 10.0;  // absurd spread, the clamp has to do all the work
  Rng rng = make_rng(7, "clamp");
  bool hit_lo = false, hit_hi = false;
  for (int i = 0; i < 200; ++i) {
    const double v = sample_forming_voltage(p, rng);
    REQUIRE(v >= p.forming_clamp_lo_v);
    REQUIRE(v <= p.forming_clamp_hi_v);
    hit_lo = hit_lo || v == p.forming_clamp_lo_v;
    hit_hi = hit_hi || v == p.forming_clamp_hi_v;
  }
  REQUIRE(hit_lo);
  REQUIRE(hit_hi);
}

TEST_CASE("zero spread collapses to the mean") {
  DeviceParams p;
  p.forming_sd_v = 0.0;
  Rng rng = make_rng(1, "x");
  REQUIRE(sample_forming_voltage(p, rng) == p.forming_mean_v);
}

TEST_CASE("same seed and tag reproduce the same draws") {
  DeviceParams p;
  Rng a = make_rng(42, "array");
  Rng b = make_rng(42, "array");
  Rng c = make_rng(42, "other");
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 50; ++i) {
    const double va = sample_forming_voltage(p, a);
    all_equal = all_equal && va == sample_forming_voltage(p, b);
    any_diff = any_diff || va != sample_forming_voltage(p, c);
  }
  REQUIRE(all_equal);
  REQUIRE(any_diff);
}

TEST_CASE("forming flips the cell at its own threshold") {
  DeviceParams p;
  Rng rng = make_rng(5, "cell");
  ReRamCell c = make_cell(p, rng);
  REQUIRE_FALSE(c.formed);
  REQUIRE(c.conductance_base_s == p.unformed_conductance_s);

  const ReRamCell still = form(c, c.forming_voltage_v - 0.01, p);
  REQUIRE_FALSE(still.formed);

  const ReRamCell done = form(c, c.forming_voltage_v, p);
  REQUIRE(done.formed);
  REQUIRE(done.conductance_base_s == p.formed_conductance_s);

  REQUIRE_THROWS_AS(form(done, 5.0, p), std::logic_error);
}

TEST_CASE("pulse arithmetic matches the soft-bound recurrence exactly") {
  DeviceParams p;
  ReRamCell c;
  c.formed = true;
  c.conductance_base_s = p.g_min_s;
  const PulseSpec set{p.set_pulse_amplitude_v, p.pulse_width_s};
  const PulseSpec reset{p.reset_pulse_amplitude_v, p.pulse_width_s};

  double g = p.g_min_s;
  for (int i = 0; i < 300; ++i) {
    c = apply_pulse(c, set, p);
    g = std::clamp(g + p.eta_set * (c.g_max_s - g), c.g_min_s, c.g_max_s);
    REQUIRE(c.conductance_base_s == g);
  }
  for (int i = 0; i < 300; ++i) {
    c = apply_pulse(c, reset, p);
    g = std::clamp(g - p.eta_reset * (g - c.g_min_s), c.g_min_s, c.g_max_s);
    REQUIRE(c.conductance_base_s == g);
  }
}

TEST_CASE("single set pulse from the window floor") {
  DeviceParams p;
  ReRamCell c;
  c.formed = true;
  c.conductance_base_s = p.g_min_s;
  c = apply_pulse(c, {p.set_pulse_amplitude_v, p.pulse_width_s}, p);
  REQUIRE(c.conductance_base_s == Catch::Approx(6.35e-5).epsilon(1e-12));
}

TEST_CASE("ninety-five pulses clear program-verify from the floor") {
  DeviceParams p;
  ReRamCell c;
  c.formed = true;
  c.conductance_base_s = p.g_min_s;
  const double target = p.program_verify_fraction * p.g_max_s;
  int pulses = 0;
  while (c.conductance_base_s < target) {
    c = apply_pulse(c, {p.set_pulse_amplitude_v, p.pulse_width_s}, p);
    ++pulses;
  }
  REQUIRE(pulses == 95);
}

TEST_CASE("three hundred set pulses traverse almost the whole window") {
  DeviceParams p;
  ReRamCell c;
  c.formed = true;
  c.conductance_base_s = p.g_min_s;
  for (int i = 0; i < 300; ++i) c = apply_pulse(c, {p.set_pulse_amplitude_v, p.pulse_width_s}, p);
  const double traversed = (c.conductance_base_s - p.g_min_s) / (p.g_max_s - p.g_min_s);
  REQUIRE(traversed >= 0.99);
  REQUIRE(traversed == Catch::Approx(0.9998924723189512).epsilon(1e-9));
}

TEST_CASE("three hundred reset pulses return close to the floor") {
  DeviceParams p;
  ReRamCell c;
  c.formed = true;
  c.conductance_base_s = p.g_max_s;
  for (int i = 0; i < 300; ++i) c = apply_pulse(c, {p.reset_pulse_amplitude_v, p.pulse_width_s}, p);
  REQUIRE(std::abs(c.conductance_base_s - p.g_min_s) <= 0.05 * p.g_min_s);
}

TEST_CASE("sub-threshold pulses do nothing") {
  DeviceParams p;
  ReRamCell c;
  c.formed = true;
  c.conductance_base_s = 2e-4;
  REQUIRE(apply_pulse(c, {0.99, 60e-9}, p).conductance_base_s == 2e-4);
  REQUIRE(apply_pulse(c, {-0.99, 60e-9}, p).conductance_base_s == 2e-4);
  REQUIRE(apply_pulse(c, {1.0, 60e-9}, p).conductance_base_s > 2e-4);
}

TEST_CASE("pulses on an unformed cell or with zero width are rejected") {
  DeviceParams p;
  ReRamCell c;
  REQUIRE_THROWS_AS(apply_pulse(c, {1.6, 60e-9}, p), std::logic_error);
  c.formed = true;
  REQUIRE_THROWS_AS(apply_pulse(c, {1.6, 0.0}, p), std::invalid_argument);
}

TEST_CASE("random pulse trains stay inside the window and move monotonically") {
  DeviceParams p;
  Rng rng = make_rng(12, "pulse-train");
  std::uniform_real_distribution<double> g0(p.g_min_s, p.g_max_s);
  std::bernoulli_distribution coin(0.5);
  for (int rep = 0; rep < 20; ++rep) {
    ReRamCell c;
    c.formed = true;
    c.conductance_base_s = g0(rng);
    for (int i = 0; i < 100; ++i) {
      const bool set = coin(rng);
      const double before = c.conductance_base_s;
      c = apply_pulse(c, {set ? p.set_pulse_amplitude_v : p.reset_pulse_amplitude_v, p.pulse_width_s}, p);
      if (set) REQUIRE(c.conductance_base_s >= before);
      else REQUIRE(c.conductance_base_s <= before);
      REQUIRE(c.conductance_base_s >= p.g_min_s);
      REQUIRE(c.conductance_base_s <= p.g_max_s);
    }
  }
}

TEST_CASE("conductance grows linearly with bias magnitude on formed cells") {
  ReRamCell c;
  c.formed = true;
  c.conductance_base_s = 5e-4;
  REQUIRE(conductance_at(c, 0.0) == 5e-4);
  REQUIRE(conductance_at(c, 1.0) == Catch::Approx(6e-4).epsilon(1e-15));
  REQUIRE(conductance_at(c, -1.0) == conductance_at(c, 1.0));

  ReRamCell raw;
  REQUIRE(conductance_at(raw, 3.0) == raw.conductance_base_s);
}

TEST_CASE("disturb detection counts threshold crossings on formed cells only") {
  DeviceParams p;
  ReRamCell c;
  c.formed = true;
  REQUIRE_FALSE(check_disturb(c, 1.19, 0.0, "r0c0", p).has_value());
  REQUIRE(c.disturb_count == 0);

  auto ev = check_disturb(c, 1.2, 2.5e-7, "r0c0", p);
  REQUIRE(ev.has_value());
  REQUIRE(ev->cell_id == "r0c0");
  REQUIRE(ev->time_s == 2.5e-7);
  REQUIRE(ev->voltage_across_v == 1.2);
  REQUIRE(c.disturb_count == 1);

  REQUIRE(check_disturb(c, -1.5, 0.0, "r0c0", p).has_value());
  REQUIRE(c.disturb_count == 2);

  ReRamCell raw;
  REQUIRE_FALSE(check_disturb(raw, 4.9, 0.0, "r1c1", p).has_value());
  REQUIRE(raw.disturb_count == 0);
}

TEST_CASE("retention follows the log-time drift law") {
  DeviceParams p;
  ReRamCell c;
  c.formed = true;
  c.conductance_base_s = 5e-4;
  REQUIRE(retention_project(c, 0.0, p) == 5e-4);
  REQUIRE(retention_project(c, 9.0, p) == Catch::Approx(4.975e-4).epsilon(1e-12));
  REQUIRE(retention_project(c, 5'184'000.0, p) == Catch::Approx(4.8321333730840383e-4).epsilon(1e-12));
  REQUIRE_THROWS_AS(retention_project(c, -1.0, p), std::invalid_argument);
}

TEST_CASE("retention never projects below the window floor") {
  DeviceParams p;
  p.retention_drift_per_decade = 0.2;
  ReRamCell c;
  c.formed = true;
  c.conductance_base_s = 6e-5;
  REQUIRE(retention_project(c, 1e6, p) == c.g_min_s);
}
