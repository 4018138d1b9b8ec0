#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spd {

struct TestFunction {
  std::string name;
  int p = 0;
  std::function<double(std::span<const double>)> eval;
  std::string source;
};

/// 1 / (1 + 100 (x - 0.5)^2)
double eval_runge(double x);

/// 0.25 below a = 0.4, linear ramp to 0.75 on [a, b = 0.6), 0.75 from b on.
double eval_step(double x);

/// Evaluates a registered function; throws InputError for unknown names or a
/// wrong input dimension.
double eval_benchmark(std::string_view name, std::span<const double> x);

/// runge, step, exponential, friedman, friedman10, eightdim, wingweight.
const std::vector<TestFunction>& test_functions();
const TestFunction& find_test_function(std::string_view name);

}  // namespace spd
