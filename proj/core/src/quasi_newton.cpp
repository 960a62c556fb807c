#include "cmoe/quasi_newton.hpp"

#include <cmath>

namespace cmoe {

namespace {

// Zero out gradient components that push against an active bound.
Vec projected_gradient(const Vec& x, const Vec& g, const Box& box) {
  Vec pg = g;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const bool at_lo = x[i] <= box.lo[i] && g[i] > 0.0;
    const bool at_hi = x[i] >= box.hi[i] && g[i] < 0.0;
    if (at_lo || at_hi) pg[i] = 0.0;
  }
  return pg;
}

}  // namespace

MinimizeResult minimize(const std::function<double(const Vec&, Vec&)>& value_and_grad,
                        const Vec& x0, const Box& box, const MinimizeOptions& options) {
  const Eigen::Index dim = x0.size();
  if (box.lo.size() != dim || box.hi.size() != dim) {
    throw std::invalid_argument("minimize: box dimensions do not match x0");
  }

  MinimizeResult result;
  Vec x = box.clamp(x0);
  Vec g(dim);
  double f = value_and_grad(x, g);

  Vec best_x = x;
  double best_f = f;

  Mat h_inv = Mat::Identity(dim, dim);

  for (int iter = 0; iter < options.max_iter; ++iter) {
    result.iterations = iter;
    const Vec pg = projected_gradient(x, g, box);
    result.projected_grad_norm = pg.norm();
    if (result.projected_grad_norm < options.grad_tol) {
      result.converged = true;
      break;
    }

    Vec dir = -(h_inv * g);
    if (dir.dot(g) >= -1e-14 * dir.norm() * g.norm()) {
      h_inv.setIdentity();
      dir = -pg;
    }

    // Backtracking with projection of each trial point into the box.
    double alpha = 1.0;
    bool accepted = false;
    Vec x_new(dim), g_new(dim);
    double f_new = f;
    for (int bt = 0; bt < options.max_backtracks; ++bt) {
      x_new = box.clamp(x + alpha * dir);
      const Vec step = x_new - x;
      if (step.norm() == 0.0) break;
      const double slope = g.dot(step);
      f_new = value_and_grad(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + options.armijo_c1 * std::min(slope, 0.0)) {
        accepted = true;
        break;
      }
      alpha *= options.backtrack;
    }
    if (!accepted) {
      result.line_search_failed = true;
      break;
    }

    const Vec s = x_new - x;
    const Vec y = g_new - g;
    const bool clipped = (x_new - (x + alpha * dir)).norm() > 0.0;
    const double sy = s.dot(y);
    if (clipped || sy <= 1e-12 * s.norm() * y.norm()) {
      h_inv.setIdentity();
    } else {
      const double rho = 1.0 / sy;
      const Mat outer = s * y.transpose();
      h_inv = h_inv - rho * (outer * h_inv + h_inv * outer.transpose()) +
              rho * (rho * y.dot(h_inv * y) + 1.0) * (s * s.transpose());
    }

    x = x_new;
    g = g_new;
    f = f_new;
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
  }

  result.x = best_x;
  result.value = best_f;
  return result;
}

}  // namespace cmoe
