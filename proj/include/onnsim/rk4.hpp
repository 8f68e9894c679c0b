#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace onnsim {

// Classic fixed-step fourth-order Runge-Kutta over a flat state vector.
// Slope buffers are members and reused across steps, so the inner loop
// allocates nothing. The derivative callback has the signature
//   deriv(double t, std::span<const double> y, std::span<double> dydt)
class Rk4Stepper {
 public:
  explicit Rk4Stepper(std::size_t dim)
      : k1_(dim), k2_(dim), k3_(dim), k4_(dim), trial_(dim) {}

  std::size_t dim() const { return k1_.size(); }

  template <typename Deriv>
  void step(Deriv&& deriv, double t, double dt, std::span<double> y) {
    const std::size_t n = y.size();
    const std::span<const double> yc(y.data(), n);

    deriv(t, yc, std::span<double>(k1_));
    for (std::size_t i = 0; i < n; ++i) trial_[i] = y[i] + 0.5 * dt * k1_[i];
    deriv(t + 0.5 * dt, std::span<const double>(trial_), std::span<double>(k2_));
    for (std::size_t i = 0; i < n; ++i) trial_[i] = y[i] + 0.5 * dt * k2_[i];
    deriv(t + 0.5 * dt, std::span<const double>(trial_), std::span<double>(k3_));
    for (std::size_t i = 0; i < n; ++i) trial_[i] = y[i] + dt * k3_[i];
    deriv(t + dt, std::span<const double>(trial_), std::span<double>(k4_));

    const double w = dt / 6.0;
    for (std::size_t i = 0; i < n; ++i)
      y[i] += w * (k1_[i] + 2.0 * (k2_[i] + k3_[i]) + k4_[i]);
  }

 private:
  std::vector<double> k1_, k2_, k3_, k4_;
  std::vector<double> trial_;
};

}  // namespace onnsim
