#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "onnsim/rk4.hpp"

using onnsim::Rk4Stepper;

namespace {

double circle_error(double dt_request) {
  Rk4Stepper st(2);
  std::vector<double> y{1.0, 0.0};
  const double t_end = 2.0 * std::numbers::pi;
  const auto n = std::llround(t_end / dt_request);
  const double dt = t_end / static_cast<double>(n);
  auto f = [](double, std::span<const double> yy, std::span<double> d) {
    d[0] = yy[1];
    d[1] = -yy[0];
  };
  double t = 0.0;
  for (long long i = 0; i < n; ++i) {
    st.step(f, t, dt, y);
    t += dt;
  }
  return std::hypot(y[0] - 1.0, y[1]);
}

}  // namespace

TEST_CASE("cubic polynomial integrates exactly") {
  Rk4Stepper st(1);
  std::vector<double> y{0.0};
  auto f = [](double t, std::span<const double>, std::span<double> d) { d[0] = t * t * t; };
  double t = 0.0;
  for (int i = 0; i < 4; ++i) {
    st.step(f, t, 0.25, y);
    t += 0.25;
  }
  REQUIRE(y[0] == Catch::Approx(0.25).margin(1e-14));
}

TEST_CASE("exponential decay one step matches the series") {
  Rk4Stepper st(1);
  std::vector<double> y{1.0};
  auto f = [](double, std::span<const double> yy, std::span<double> d) { d[0] = -yy[0]; };
  const double h = 0.1;
  st.step(f, 0.0, h, y);
  const double z = -h;
  const double expected = 1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
  REQUIRE(y[0] == Catch::Approx(expected).margin(1e-15));
}

TEST_CASE("fourth-order convergence on the circle") {
  const double e1 = circle_error(0.1);
  const double e2 = circle_error(0.05);
  REQUIRE(e1 < 1e-5);
  REQUIRE(e1 / e2 == Catch::Approx(16.0).margin(4.0));
}

TEST_CASE("time dependence reaches the stage evaluations") {
  // y' = 2t has exact quadrature; the stages sample t, t+h/2, t+h.
  Rk4Stepper st(1);
  std::vector<double> y{0.0};
  auto f = [](double t, std::span<const double>, std::span<double> d) { d[0] = 2.0 * t; };
  st.step(f, 3.0, 0.5, y);
  REQUIRE(y[0] == Catch::Approx(3.5 * 3.5 - 3.0 * 3.0).margin(1e-14));
}

TEST_CASE("dimension is fixed at construction") {
  Rk4Stepper st(3);
  REQUIRE(st.dim() == 3);
}
