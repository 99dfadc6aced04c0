#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace qsceom {

enum class OptimizerMethod {
  gradient,         // L-BFGS
  derivative_free,  // Powell with Brent line minimization
};

OptimizerMethod parse_optimizer_method(const std::string& name);
std::string to_string(OptimizerMethod m);

enum class OptimizeStatus { converged, budget_exhausted, failed };

struct OptimizeOptions {
  OptimizerMethod method = OptimizerMethod::gradient;
  int max_evaluations = 5000;
  double gradient_tolerance = 1e-8;  // L-BFGS: max |g_i|
  double value_tolerance = 1e-12;    // relative decrease that counts as stalled
  double fd_step = 1e-5;             // central differences when no gradient is given
  double initial_step = 0.1;         // Powell: initial bracket width
  std::uint64_t seed = 0;
};

struct OptimizeResult {
  std::vector<double> x;
  double value = 0.0;
  OptimizeStatus status = OptimizeStatus::failed;
  int evaluations = 0;
};

using Objective = std::function<double(std::span<const double>)>;
/// Returns f(x) and writes df/dx into `grad`.
using ObjectiveWithGradient = std::function<double(std::span<const double>, std::span<double>)>;

/// Minimizes `f` from `initial`. The returned point is the best one evaluated,
/// so value <= f(initial). The gradient method uses `grad` when provided and
/// central finite differences of `f` otherwise.
OptimizeResult optimize(const Objective& f, std::vector<double> initial, const OptimizeOptions& options,
                        const ObjectiveWithGradient& grad = nullptr);

}  // namespace qsceom
