#pragma once

#include "cmoe/types.hpp"

namespace cmoe {

/// Scalar activation value together with its first two derivatives.
struct ActivationDerivs {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

ActivationDerivs evaluate_activation(Activation act, double z);

/// h(x, eta). For Linear kinds the inner argument is eta^T x; for
/// AffineInner it is a^T x + b with eta = (a, b).
double expert_mean(const ExpertMeanKind& kind, const Vec& eta, const Vec& x);

/// Gradient of h with respect to eta (length q).
Vec expert_mean_grad(const ExpertMeanKind& kind, const Vec& eta, const Vec& x);

/// Hessian of h with respect to eta (q x q). ReLU's second derivative is
/// taken to be 0 at the kink, so the ReLU Hessian vanishes everywhere.
Mat expert_mean_hess(const ExpertMeanKind& kind, const Vec& eta, const Vec& x);

}  // namespace cmoe
