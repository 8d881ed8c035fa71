#pragma once

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>

namespace hawking {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat2 = Eigen::Matrix2d;

/// T[a](i, j): first index is the derivative / leading slot.
using Tensor3 = std::array<Mat3, 3>;

/// Rank-4 tensor on R^3, flat storage, index (i, j, k, l) -> 27i + 9j + 3k + l.
struct Tensor4 {
  std::array<double, 81> v{};
  double& operator()(int i, int j, int k, int l) { return v[27 * i + 9 * j + 3 * k + l]; }
  double operator()(int i, int j, int k, int l) const { return v[27 * i + 9 * j + 3 * k + l]; }
};

enum class ErrorCode {
  ChartExceeded,
  DegenerateMetric,
  UnknownPreset,
  InvalidParams,
  StepSizeUnderflow,
  NonEmbedded,
  DegenerateInducedMetric,
  NotOrthogonal,
  UnsupportedDegree,
  NonConvergence,
  DegenerateHessian,
  ContinuationBroken,
  NoRoot,
  GaussEquationViolated,
  InvalidCurvature,
};

const char* to_string(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hawking
