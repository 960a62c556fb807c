#include "cmoe/identifiability.hpp"

#include "cmoe/expert.hpp"
#include "cmoe/model.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace cmoe {

const char* to_string(IdentCondition c) {
  switch (c) {
    case IdentCondition::FirstOrderGating: return "FirstOrderGating";
    case IdentCondition::GradientProduct: return "GradientProduct";
    case IdentCondition::MixedSecondOrder: return "MixedSecondOrder";
    case IdentCondition::Distinguishability: return "Distinguishability";
  }
  return "?";
}

double min_singular_value_normalized(const Mat& columns) {
  Mat m = columns;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double norm = m.col(c).norm();
    if (norm > 0.0) m.col(c) /= norm;
  }
  Eigen::BDCSVD<Mat> svd(m);
  return svd.singularValues().minCoeff();
}

namespace {

int upper_triangle_count(int q) { return q * (q + 1) / 2; }

IdentVerdict make_verdict(IdentCondition cond, double min_sv, double threshold, int m) {
  IdentVerdict v;
  v.condition = cond;
  v.min_singular_value = min_sv;
  v.threshold = threshold;
  v.pass = min_sv > threshold;
  v.sample_size = m;
  return v;
}

}  // namespace

std::array<IdentVerdict, 3> strong_identifiability_check(const ExpertMeanKind& kind,
                                                         const Vec& beta, const Vec& eta,
                                                         const Mat& x_samples, double threshold) {
  const int m = static_cast<int>(x_samples.rows());
  const int d = static_cast<int>(x_samples.cols());
  if (beta.size() != d) throw std::invalid_argument("identifiability: dim(beta) != d");
  const int q = kind.param_dim(d);
  if (eta.size() != q) throw std::invalid_argument("identifiability: dim(eta) != q");

  const int pairs = upper_triangle_count(q);
  const int cols1 = 2 * q;
  const int cols2 = 2 + d + 2 * pairs;
  const int cols3 = 2 * q + q * d + 2 * pairs;
  const int largest = std::max({cols1, cols2, cols3});
  if (m < 4 * largest) {
    throw std::invalid_argument("identifiability: need at least 4x as many samples as functions");
  }

  Mat c1(m, cols1), c2(m, cols2), c3(m, cols3);
  for (int i = 0; i < m; ++i) {
    const Vec x = x_samples.row(i);
    const double gate = std::exp(beta.dot(x));
    const Vec grad = expert_mean_grad(kind, eta, x);
    const Mat hess = expert_mean_hess(kind, eta, x);

    // Set 1: { dh/du, e^{b.x} dh/du }.
    for (int u = 0; u < q; ++u) {
      c1(i, u) = grad[u];
      c1(i, q + u) = gate * grad[u];
    }

    // Set 2: { 1, x_w, e^{b.x}, dh/du dh/dv, e^{b.x} dh/du dh/dv }.
    int col = 0;
    c2(i, col++) = 1.0;
    for (int w = 0; w < d; ++w) c2(i, col++) = x[w];
    c2(i, col++) = gate;
    for (int u = 0; u < q; ++u)
      for (int v = u; v < q; ++v) c2(i, col++) = grad[u] * grad[v];
    for (int u = 0; u < q; ++u)
      for (int v = u; v < q; ++v) c2(i, col++) = gate * grad[u] * grad[v];

    // Set 3: { dh/du, e^{b.x} dh/du, x_w dh/du, d2h/dudv, e^{b.x} d2h/dudv }.
    col = 0;
    for (int u = 0; u < q; ++u) c3(i, col++) = grad[u];
    for (int u = 0; u < q; ++u) c3(i, col++) = gate * grad[u];
    for (int u = 0; u < q; ++u)
      for (int w = 0; w < d; ++w) c3(i, col++) = x[w] * grad[u];
    for (int u = 0; u < q; ++u)
      for (int v = u; v < q; ++v) c3(i, col++) = hess(u, v);
    for (int u = 0; u < q; ++u)
      for (int v = u; v < q; ++v) c3(i, col++) = gate * hess(u, v);
  }

  return {make_verdict(IdentCondition::FirstOrderGating, min_singular_value_normalized(c1),
                       threshold, m),
          make_verdict(IdentCondition::GradientProduct, min_singular_value_normalized(c2),
                       threshold, m),
          make_verdict(IdentCondition::MixedSecondOrder, min_singular_value_normalized(c3),
                       threshold, m)};
}

IdentVerdict distinguishability_check(const ModelSpec& spec,
                                      const std::vector<DistinguishProbe>& probes,
                                      const Mat& x_samples, const YGridSpec& y_grid,
                                      double threshold) {
  validate_spec(spec);
  if (probes.empty()) throw std::invalid_argument("distinguishability: no probe pairs");
  if (y_grid.points < 8) throw std::invalid_argument("distinguishability: degenerate y grid");
  const int q = spec.prompt_param_dim();
  for (const auto& p : probes) {
    if (p.eta1.size() != q || p.eta2.size() != q || !(p.nu1 > 0.0) || !(p.nu2 > 0.0)) {
      throw std::invalid_argument("distinguishability: malformed probe pair");
    }
    if (p.eta1 == p.eta2 && p.nu1 == p.nu2) {
      throw std::invalid_argument("distinguishability: probe pairs must be distinct");
    }
  }

  const int m = static_cast<int>(x_samples.rows());
  double min_sv = std::numeric_limits<double>::infinity();
  Mat cols(y_grid.points, 5);

  for (const auto& probe : probes) {
    for (int i = 0; i < m; ++i) {
      const Vec x = x_samples.row(i);
      const double m0 = expert_mean(spec.pretrained.mean, spec.pretrained.eta0, x);
      const double m1 = expert_mean(spec.prompt_mean, probe.eta1, x);
      const double m2 = expert_mean(spec.prompt_mean, probe.eta2, x);
      const double sd = std::sqrt(std::max({spec.pretrained.nu0, probe.nu1, probe.nu2}));
      const double lo = std::min({m0, m1, m2}) - y_grid.halfwidth_sds * sd;
      const double hi = std::max({m0, m1, m2}) + y_grid.halfwidth_sds * sd;
      const double step = (hi - lo) / (y_grid.points - 1);

      for (int k = 0; k < y_grid.points; ++k) {
        const double y = lo + k * step;
        const double f2 = component_density(DensityFamily::Gaussian, m2, probe.nu2, y);
        const double r2 = y - m2;
        cols(k, 0) = component_density(spec.pretrained.family, m0, spec.pretrained.nu0, y);
        cols(k, 1) = component_density(DensityFamily::Gaussian, m1, probe.nu1, y);
        cols(k, 2) = f2;
        cols(k, 3) = f2 * r2 / probe.nu2;                                 // mean direction
        cols(k, 4) = f2 * (0.5 * r2 * r2 / (probe.nu2 * probe.nu2) - 0.5 / probe.nu2);  // variance
      }
      min_sv = std::min(min_sv, min_singular_value_normalized(cols));
    }
  }
  return make_verdict(IdentCondition::Distinguishability, min_sv, threshold, m);
}

}  // namespace cmoe
