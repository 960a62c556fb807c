#pragma once

#include "cmoe/types.hpp"

#include <functional>

namespace cmoe {

/// Per-coordinate bounds; lo[i] == hi[i] pins a coordinate.
struct Box {
  Vec lo;
  Vec hi;

  Vec clamp(const Vec& x) const { return x.cwiseMax(lo).cwiseMin(hi); }
};

struct MinimizeOptions {
  int max_iter = 100;
  double grad_tol = 1e-8;     // on the projected gradient norm
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
};

struct MinimizeResult {
  Vec x;
  double value = 0.0;
  double projected_grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;
};

/// BFGS with backtracking Armijo line search, projected into a box.
/// `value_and_grad(x, g)` must fill g and return the objective. The result is
/// the best point seen, so the value never exceeds the starting value.
MinimizeResult minimize(const std::function<double(const Vec&, Vec&)>& value_and_grad,
                        const Vec& x0, const Box& box, const MinimizeOptions& options);

}  // namespace cmoe
