#include "cmoe/expert.hpp"

#include <cmath>

namespace cmoe {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;
constexpr double kInvSqrt2 = 0.7071067811865475244;

double stable_logistic(double s) {
  if (s >= 0.0) {
    return 1.0 / (1.0 + std::exp(-s));
  }
  const double e = std::exp(s);
  return e / (1.0 + e);
}

double inner_argument(const ExpertMeanKind& kind, const Vec& eta, const Vec& x) {
  const int d = static_cast<int>(x.size());
  if (kind.form == ExpertForm::AffineInner) {
    if (eta.size() != d + 1) {
      throw std::invalid_argument("expert_mean: affine expert needs dim(eta) == d + 1");
    }
    return eta.head(d).dot(x) + eta[d];
  }
  if (eta.size() != d) {
    throw std::invalid_argument("expert_mean: dim(eta) != dim(x)");
  }
  return eta.dot(x);
}

// d/d eta of the inner argument: x for Linear, (x, 1) for AffineInner.
Vec inner_gradient(const ExpertMeanKind& kind, const Vec& x) {
  if (kind.form == ExpertForm::Linear) return x;
  Vec g(x.size() + 1);
  g.head(x.size()) = x;
  g[x.size()] = 1.0;
  return g;
}

}  // namespace

ActivationDerivs evaluate_activation(Activation act, double z) {
  ActivationDerivs out;
  switch (act) {
    case Activation::Tanh: {
      const double t = std::tanh(z);
      out.value = t;
      out.d1 = 1.0 - t * t;
      out.d2 = -2.0 * t * out.d1;
      break;
    }
    case Activation::Sigmoid: {
      const double s = stable_logistic(z);
      out.value = s;
      out.d1 = s * (1.0 - s);
      out.d2 = out.d1 * (1.0 - 2.0 * s);
      break;
    }
    case Activation::Gelu: {
      // GELU(z) = z * Phi(z) with the exact Gaussian CDF.
      const double cdf = 0.5 * std::erfc(-z * kInvSqrt2);
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * z * z);
      out.value = z * cdf;
      out.d1 = cdf + z * pdf;
      out.d2 = pdf * (2.0 - z * z);
      break;
    }
    case Activation::Relu: {
      out.value = z > 0.0 ? z : 0.0;
      out.d1 = z > 0.0 ? 1.0 : 0.0;
      out.d2 = 0.0;
      break;
    }
  }
  return out;
}

double expert_mean(const ExpertMeanKind& kind, const Vec& eta, const Vec& x) {
  return evaluate_activation(kind.activation, inner_argument(kind, eta, x)).value;
}

Vec expert_mean_grad(const ExpertMeanKind& kind, const Vec& eta, const Vec& x) {
  const double z = inner_argument(kind, eta, x);
  const double d1 = evaluate_activation(kind.activation, z).d1;
  return d1 * inner_gradient(kind, x);
}

Mat expert_mean_hess(const ExpertMeanKind& kind, const Vec& eta, const Vec& x) {
  const double z = inner_argument(kind, eta, x);
  const double d2 = evaluate_activation(kind.activation, z).d2;
  const Vec g = inner_gradient(kind, x);
  return d2 * g * g.transpose();
}

}  // namespace cmoe
