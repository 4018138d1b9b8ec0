#include "spdesign/testfns.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "spdesign/core.hpp"

namespace spd {

namespace {

double exponential3(std::span<const double> x) {
  return 100.0 * (std::exp(-2.0 / std::pow(x[0], 1.75)) + std::exp(-2.0 / std::pow(x[1], 1.5)) +
                  std::exp(-2.0 / std::pow(x[2], 1.25)));
}

double friedman(std::span<const double> x) {
  return 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] +
         5.0 * x[4];
}

double eightdim(std::span<const double> x) {
  const double a = x[0] - 2.0 + 8.0 * x[1] - 8.0 * x[1] * x[1];
  double f = 4.0 * a * a + (3.0 - 4.0 * x[1]) * (3.0 - 4.0 * x[1]) +
             16.0 * std::sqrt(x[2] + 1.0) * (2.0 * x[2] - 1.0) * (2.0 * x[2] - 1.0);
  double partial = x[2];
  for (int i = 4; i <= 8; ++i) {
    partial += x[static_cast<std::size_t>(i - 1)];
    f += i * std::log(1.0 + partial);
  }
  return f;
}

// Physical ranges of the wing weight inputs, in input order.
constexpr std::array<std::array<double, 2>, 10> kWingRanges{{
    {150.0, 200.0},   // Sw, wing area (ft^2)
    {220.0, 300.0},   // Wfw, fuel weight in the wing (lb)
    {6.0, 10.0},      // A, aspect ratio
    {-10.0, 10.0},    // Lambda, quarter-chord sweep (degrees)
    {16.0, 45.0},     // q, dynamic pressure at cruise (lb/ft^2)
    {0.5, 1.0},       // lambda, taper ratio
    {0.08, 0.18},     // tc, aerofoil thickness to chord ratio
    {2.5, 6.0},       // Nz, ultimate load factor
    {1700.0, 2500.0}, // Wdg, flight design gross weight (lb)
    {0.025, 0.08},    // Wp, paint weight (lb/ft^2)
}};

double wingweight(std::span<const double> u) {
  std::array<double, 10> v{};
  for (std::size_t k = 0; k < 10; ++k) v[k] = kWingRanges[k][0] + u[k] * (kWingRanges[k][1] - kWingRanges[k][0]);
  const auto [sw, wfw, A, sweep_deg, q, taper, tc, nz, wdg, wp] = v;
  const double c = std::cos(sweep_deg * std::numbers::pi / 180.0);
  return 0.036 * std::pow(sw, 0.758) * std::pow(wfw, 0.0035) * std::pow(A / (c * c), 0.6) * std::pow(q, 0.006) *
             std::pow(taper, 0.04) * std::pow(100.0 * tc / c, -0.3) * std::pow(nz * wdg, 0.49) +
         sw * wp;
}

std::vector<TestFunction> build_registry() {
  return {
      {"runge", 1, [](std::span<const double> x) { return eval_runge(x[0]); }, "scaled Runge function"},
      {"step", 1, [](std::span<const double> x) { return eval_step(x[0]); }, "modified step function, a=0.4, b=0.6"},
      {"exponential", 3, exponential3, "Dette & Pepelyshev (2010), exponential function"},
      {"friedman", 5, friedman, "Friedman, Grosse & Stuetzle (1983)"},
      {"friedman10", 10, friedman, "Friedman function with five inert inputs"},
      {"eightdim", 8, eightdim, "Dette & Pepelyshev (2010), 8-dimensional function"},
      {"wingweight", 10, wingweight, "Forrester, Sobester & Keane (2008), wing weight; inputs rescaled to [0,1]"},
  };
}

}  // namespace

double eval_runge(double x) { return 1.0 / (1.0 + 100.0 * (x - 0.5) * (x - 0.5)); }

double eval_step(double x) {
  constexpr double a = 0.4, b = 0.6;
  if (x < a) return 0.25;
  if (x < b) return 0.25 + 0.5 * (x - a) / (b - a);
  return 0.75;
}

const std::vector<TestFunction>& test_functions() {
  static const std::vector<TestFunction> registry = build_registry();
  return registry;
}

const TestFunction& find_test_function(std::string_view name) {
  for (const auto& f : test_functions()) {
    if (f.name == name) return f;
  }
  throw InputError("unknown test function: " + std::string(name));
}

double eval_benchmark(std::string_view name, std::span<const double> x) {
  const TestFunction& f = find_test_function(name);
  if (static_cast<int>(x.size()) != f.p) {
    throw InputError(f.name + " expects " + std::to_string(f.p) + " inputs, got " + std::to_string(x.size()));
  }
  return f.eval(x);
}

}  // namespace spd
