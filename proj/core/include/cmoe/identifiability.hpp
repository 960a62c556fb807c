#pragma once

#include "cmoe/types.hpp"

#include <array>
#include <vector>

namespace cmoe {

enum class IdentCondition { FirstOrderGating, GradientProduct, MixedSecondOrder, Distinguishability };

const char* to_string(IdentCondition c);

/// Default cutoff separating the pass and fail fixtures by several orders of
/// magnitude.
inline constexpr double kIdentThreshold = 1e-6;

struct IdentVerdict {
  IdentCondition condition;
  double min_singular_value = 0.0;
  double threshold = kIdentThreshold;
  bool pass = false;
  int sample_size = 0;
};

/// Smallest singular value after normalizing each nonzero column to unit
/// Euclidean norm. Identically zero columns are kept as zero, so a vanishing
/// function in the family yields a zero singular value.
double min_singular_value_normalized(const Mat& columns);

/// Evaluate the three strong-identifiability function families on the sampled
/// covariates and report the smallest singular value of each column-normalized
/// evaluation matrix. Requires at least 4x as many samples as the largest
/// family has functions.
std::array<IdentVerdict, 3> strong_identifiability_check(const ExpertMeanKind& kind,
                                                         const Vec& beta, const Vec& eta,
                                                         const Mat& x_samples,
                                                         double threshold = kIdentThreshold);

/// A probe pair of distinct prompt parameter settings (eta1, nu1), (eta2, nu2).
struct DistinguishProbe {
  Vec eta1;
  double nu1 = 1.0;
  Vec eta2;
  double nu2 = 1.0;
};

struct YGridSpec {
  int points = 512;
  double halfwidth_sds = 6.0;
};

/// For each probe and sampled x, evaluate {f0, f at (eta1, nu1), f at
/// (eta2, nu2), the mean-direction derivative of f, and the variance
/// derivative of f} on a y grid covering both families' effective support,
/// and report the minimum over (x, probe) of the smallest singular value.
IdentVerdict distinguishability_check(const ModelSpec& spec,
                                      const std::vector<DistinguishProbe>& probes,
                                      const Mat& x_samples, const YGridSpec& y_grid,
                                      double threshold = kIdentThreshold);

}  // namespace cmoe
