#pragma once

#include "hawking/taylor.hpp"
#include "hawking/types.hpp"

#include <memory>
#include <string>
#include <vector>

namespace hawking {

/// Packed symmetric 3x3 storage order: 00, 01, 02, 11, 12, 22.
inline constexpr int sym_index(int i, int j) {
  constexpr int t[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
  return t[i][j];
}

template <int D>
using SymJet = std::array<Taylor<D>, 6>;

/// Closed-form fields (g, k) on a coordinate chart. Implementations supply
/// Taylor expansions of both fields about any chart point.
class FieldModel {
 public:
  virtual ~FieldModel() = default;
  virtual void eval(const Vec3& x, Mat3& g, Mat3& k) const = 0;
  virtual void jet1(const Vec3& x, SymJet<1>& g, SymJet<1>& k) const = 0;
  virtual void jet2(const Vec3& x, SymJet<2>& g, SymJet<2>& k) const = 0;
  virtual void jet4(const Vec3& x, SymJet<4>& g, SymJet<4>& k) const = 0;
  /// Chart validity (includes the chart radius).
  virtual bool in_domain(const Vec3& x) const = 0;
  virtual double chart_radius() const = 0;
};

/// Adapter turning a model with a templated `fields<T>(x, g, k)` into a FieldModel.
template <class Derived>
class AnalyticModel : public FieldModel {
 public:
  void eval(const Vec3& x, Mat3& g, Mat3& k) const override {
    std::array<double, 3> xs{x[0], x[1], x[2]};
    std::array<double, 6> gs{}, ks{};
    self().fields(xs, gs, ks);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        g(i, j) = gs[sym_index(i, j)];
        k(i, j) = ks[sym_index(i, j)];
      }
  }
  void jet1(const Vec3& x, SymJet<1>& g, SymJet<1>& k) const override { jet(x, g, k); }
  void jet2(const Vec3& x, SymJet<2>& g, SymJet<2>& k) const override { jet(x, g, k); }
  void jet4(const Vec3& x, SymJet<4>& g, SymJet<4>& k) const override { jet(x, g, k); }

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
  template <int D>
  void jet(const Vec3& x, SymJet<D>& g, SymJet<D>& k) const {
    std::array<Taylor<D>, 3> xs{Taylor<D>::variable(x[0], 0), Taylor<D>::variable(x[1], 1),
                                Taylor<D>::variable(x[2], 2)};
    self().fields(xs, g, k);
  }
};

enum class DerivativeMode { ClosedForm, FiniteDifference };

/// (M, g, k) on a single coordinate chart.
class InitialDataSet {
 public:
  InitialDataSet(std::shared_ptr<const FieldModel> model, std::string name);

  const std::string& name() const { return name_; }
  double chart_radius() const { return model_->chart_radius(); }
  bool in_chart(const Vec3& x) const { return model_->in_domain(x); }
  DerivativeMode mode() const { return mode_; }
  double fd_step() const { return fd_step_; }

  /// Copy using the given derivative mode (the finite-difference oracle route).
  InitialDataSet with_mode(DerivativeMode mode, double h = 1e-4) const;

  /// Data in the chart y -> c + r y with g~ = g(c + r y), k~ = r k(c + r y),
  /// i.e. the pull-back of (r^-2 g, r^-1 k).
  InitialDataSet rescaled(const Vec3& c, double r) const;

  Mat3 metric(const Vec3& x) const;
  Mat3 k(const Vec3& x) const;

  /// Taylor expansions of g and k about x (D = 1, 2 or 4).
  template <int D>
  void jets(const Vec3& x, SymJet<D>& g, SymJet<D>& k) const;

  /// Christoffel symbols Gamma[i](j, k) = Gamma^i_jk at x.
  void christoffel(const Vec3& x, Tensor3& gamma) const;

  const FieldModel& model() const { return *model_; }

 private:
  std::shared_ptr<const FieldModel> model_;
  std::string name_;
  DerivativeMode mode_ = DerivativeMode::ClosedForm;
  double fd_step_ = 1e-4;
};

struct CurvatureAtPoint {
  Vec3 x;
  Mat3 g, g_inv;
  Tensor3 christoffel;  // christoffel[i](j, k) = Gamma^i_jk
  Tensor4 riemann;      // Rm_ijkl, Ric_jl = g^ik Rm_ijkl
  Mat3 ricci;
  double scalar = 0.0;
  Vec3 grad_scalar;     // coordinate partials of Sc
  Mat3 hess_scalar;     // covariant Hessian of Sc
  Tensor3 grad_ricci;   // grad_ricci[a](i, j) = (nabla_a Ric)_ij
  Mat3 k;
  double tr_k = 0.0;
  double norm_k_sq = 0.0;
  Tensor3 grad_k;       // grad_k[a](i, j) = (nabla_a k)_ij
  double traceless_k_norm_sq = 0.0;
};

/// Lighter per-point data used along surfaces (needs derivatives of g to order 2, k to order 1).
struct AmbientPoint {
  Mat3 g, g_inv;
  Tensor3 christoffel;
  Mat3 ricci;
  Mat3 k;
  Tensor3 grad_k;
};

CurvatureAtPoint curvature_at(const InitialDataSet& ds, const Vec3& x);
AmbientPoint ambient_at(const InitialDataSet& ds, const Vec3& x);

struct ConcentrationScalar {
  double value = 0.0;
  Vec3 gradient;  // coordinate partials
  Mat3 hessian;   // covariant Hessian
};

/// f = Sc + 3/5 (tr k)^2 + 1/5 |k|^2 with derivatives.
ConcentrationScalar concentration_scalar(const InitialDataSet& ds, const Vec3& x);

/// Symmetric orthonormal frame g(x)^(-1/2); columns are e_1, e_2, e_3.
Mat3 orthonormal_frame(const Mat3& g);

struct PolyTerm {
  int i = 0, j = 0;
  std::array<int, 3> powers{0, 0, 0};
  double coeff = 0.0;
};

struct PresetParams {
  double epsilon = 0.01;       // conformal_quadratic: g = (1 + eps |x|^2) delta
  double mass = 1.0;           // schwarzschild_slice
  Mat3 k = Mat3::Zero();       // constant part of k (constant_k, conformal_quadratic)
  std::vector<PolyTerm> metric_terms;  // polynomial: g_ij = delta_ij + sum coeff x^powers
  std::vector<PolyTerm> k_terms;       // polynomial: k_ij = k + sum coeff x^powers
  double chart_radius = 0.0;   // 0 selects the preset default
};

/// Names: flat, constant_k, conformal_quadratic, schwarzschild_slice, polynomial.
InitialDataSet preset(const std::string& name, const PresetParams& params = {});

}  // namespace hawking
