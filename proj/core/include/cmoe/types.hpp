#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>

namespace cmoe {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Scalar activation used inside an expert mean function.
enum class Activation { Tanh, Sigmoid, Gelu, Relu };

/// Inner form of the expert mean. Linear is s(eta^T x) with q = d;
/// AffineInner is s(a^T x + b) with eta = (a, b), so q = d + 1.
enum class ExpertForm { Linear, AffineInner };

struct ExpertMeanKind {
  Activation activation = Activation::Tanh;
  ExpertForm form = ExpertForm::Linear;

  int param_dim(int d) const { return form == ExpertForm::AffineInner ? d + 1 : d; }
};

inline ExpertMeanKind tanh_expert() { return {Activation::Tanh, ExpertForm::Linear}; }
inline ExpertMeanKind sigmoid_expert() { return {Activation::Sigmoid, ExpertForm::Linear}; }
inline ExpertMeanKind gelu_expert() { return {Activation::Gelu, ExpertForm::Linear}; }
inline ExpertMeanKind relu_expert() { return {Activation::Relu, ExpertForm::Linear}; }
inline ExpertMeanKind affine_expert(Activation act = Activation::Sigmoid) {
  return {act, ExpertForm::AffineInner};
}

enum class DensityFamily { Gaussian, Laplace };

/// The trainable parameter vector G = (beta, tau, eta, nu).
/// nu is a variance, never a standard deviation.
struct PromptParams {
  Vec beta;
  double tau = 0.0;
  Vec eta;
  double nu = 1.0;

  int gating_dim() const { return static_cast<int>(beta.size()); }
  int expert_dim() const { return static_cast<int>(eta.size()); }
};

/// The frozen expert f0: density family, mean function and its fixed parameters.
struct PretrainedSpec {
  DensityFamily family = DensityFamily::Gaussian;
  ExpertMeanKind mean;
  Vec eta0;
  double nu0 = 1.0;
};

/// Model layout: covariate dimension, the frozen expert, and the prompt's
/// mean kind. The prompt density itself is always Gaussian.
struct ModelSpec {
  int d = 0;
  PretrainedSpec pretrained;
  ExpertMeanKind prompt_mean;

  int prompt_param_dim() const { return prompt_mean.param_dim(d); }
};

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Gelu: return "gelu";
    case Activation::Relu: return "relu";
  }
  return "?";
}

inline const char* to_string(DensityFamily f) {
  return f == DensityFamily::Gaussian ? "gaussian" : "laplace";
}

/// Throws std::invalid_argument unless params dimensions match (d, q) and
/// entries are finite with nu > 0.
void validate_params(const PromptParams& params, int d, int q);

/// Throws std::invalid_argument on an inconsistent spec.
void validate_spec(const ModelSpec& spec);

/// I/O failures surfaced by dataset/result readers and writers.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cmoe
