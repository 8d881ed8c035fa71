#include "hawking/background.hpp"

#include <cmath>

namespace hawking {
namespace {

using std::sqrt;

template <class T>
void fill_constant_k(const Mat3& k, std::array<T, 6>& out) {
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) out[sym_index(i, j)] = T(k(i, j));
}

class FlatModel : public AnalyticModel<FlatModel> {
 public:
  FlatModel(Mat3 k, double radius) : k_(k), radius_(radius) {}
  template <class T>
  void fields(const std::array<T, 3>&, std::array<T, 6>& g, std::array<T, 6>& k) const {
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) g[sym_index(i, j)] = T(i == j ? 1.0 : 0.0);
    fill_constant_k(k_, k);
  }
  bool in_domain(const Vec3& x) const override { return x.norm() < radius_; }
  double chart_radius() const override { return radius_; }

 private:
  Mat3 k_;
  double radius_;
};

class ConformalQuadraticModel : public AnalyticModel<ConformalQuadraticModel> {
 public:
  ConformalQuadraticModel(double eps, Mat3 k, double radius) : eps_(eps), k_(k), radius_(radius) {}
  template <class T>
  void fields(const std::array<T, 3>& x, std::array<T, 6>& g, std::array<T, 6>& k) const {
    T omega = 1.0 + eps_ * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) g[sym_index(i, j)] = i == j ? omega : T(0.0);
    fill_constant_k(k_, k);
  }
  bool in_domain(const Vec3& x) const override { return x.norm() < radius_; }
  double chart_radius() const override { return radius_; }

 private:
  double eps_;
  Mat3 k_;
  double radius_;
};

class SchwarzschildModel : public AnalyticModel<SchwarzschildModel> {
 public:
  SchwarzschildModel(double m, double radius) : m_(m), radius_(radius) {}
  template <class T>
  void fields(const std::array<T, 3>& x, std::array<T, 6>& g, std::array<T, 6>& k) const {
    T rho = sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    T psi = 1.0 + (0.5 * m_) / rho;
    T psi2 = psi * psi;
    T psi4 = psi2 * psi2;
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        g[sym_index(i, j)] = i == j ? psi4 : T(0.0);
        k[sym_index(i, j)] = T(0.0);
      }
  }
  bool in_domain(const Vec3& x) const override {
    double n = x.norm();
    return n > 0.5 * m_ && n < radius_;
  }
  double chart_radius() const override { return radius_; }

 private:
  double m_;
  double radius_;
};

class PolynomialModel : public AnalyticModel<PolynomialModel> {
 public:
  PolynomialModel(Mat3 k0, std::vector<PolyTerm> gt, std::vector<PolyTerm> kt, double radius)
      : k0_(k0), gt_(std::move(gt)), kt_(std::move(kt)), radius_(radius) {
    for (const auto* terms : {&gt_, &kt_})
      for (const auto& t : *terms)
        for (int p : t.powers) max_pow_ = std::max(max_pow_, p);
  }
  template <class T>
  void fields(const std::array<T, 3>& x, std::array<T, 6>& g, std::array<T, 6>& k) const {
    std::vector<std::array<T, 3>> pw(max_pow_ + 1);
    pw[0] = {T(1.0), T(1.0), T(1.0)};
    for (int p = 1; p <= max_pow_; ++p)
      for (int a = 0; a < 3; ++a) pw[p][a] = pw[p - 1][a] * x[a];
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) g[sym_index(i, j)] = T(i == j ? 1.0 : 0.0);
    fill_constant_k(k0_, k);
    auto add = [&](const std::vector<PolyTerm>& terms, std::array<T, 6>& out) {
      for (const auto& t : terms)
        out[sym_index(t.i, t.j)] += t.coeff * (pw[t.powers[0]][0] * pw[t.powers[1]][1] * pw[t.powers[2]][2]);
    };
    add(gt_, g);
    add(kt_, k);
  }
  bool in_domain(const Vec3& x) const override { return x.norm() < radius_; }
  double chart_radius() const override { return radius_; }

 private:
  Mat3 k0_;
  std::vector<PolyTerm> gt_, kt_;
  double radius_;
  int max_pow_ = 0;
};

void require_symmetric(const Mat3& k) {
  if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-14 || !k.allFinite())
    throw Error(ErrorCode::InvalidParams, "k must be a finite symmetric matrix");
}

void check_terms(const std::vector<PolyTerm>& terms) {
  for (const auto& t : terms) {
    if (t.i < 0 || t.i > 2 || t.j < 0 || t.j > 2)
      throw Error(ErrorCode::InvalidParams, "polynomial term index out of range");
    for (int p : t.powers)
      if (p < 0 || p > 8) throw Error(ErrorCode::InvalidParams, "polynomial term powers must lie in 0..8");
    if (!std::isfinite(t.coeff)) throw Error(ErrorCode::InvalidParams, "non-finite polynomial coefficient");
  }
}

}  // namespace

InitialDataSet preset(const std::string& name, const PresetParams& p) {
  auto radius = [&](double dflt) {
    if (p.chart_radius < 0.0 || !std::isfinite(p.chart_radius))
      throw Error(ErrorCode::InvalidParams, "chart_radius must be positive");
    return p.chart_radius > 0.0 ? p.chart_radius : dflt;
  };
  if (name == "flat") {
    return InitialDataSet(std::make_shared<FlatModel>(Mat3::Zero(), radius(10.0)), name);
  }
  if (name == "constant_k") {
    require_symmetric(p.k);
    return InitialDataSet(std::make_shared<FlatModel>(p.k, radius(10.0)), name);
  }
  if (name == "conformal_quadratic") {
    require_symmetric(p.k);
    if (!std::isfinite(p.epsilon)) throw Error(ErrorCode::InvalidParams, "epsilon must be finite");
    double R = radius(1.0);
    if (p.epsilon < 0.0 && 1.0 + p.epsilon * R * R <= 0.0)
      throw Error(ErrorCode::InvalidParams, "conformal factor vanishes inside the chart");
    return InitialDataSet(std::make_shared<ConformalQuadraticModel>(p.epsilon, p.k, R), name);
  }
  if (name == "schwarzschild_slice") {
    if (!(p.mass > 0.0) || !std::isfinite(p.mass))
      throw Error(ErrorCode::InvalidParams, "Schwarzschild mass must be positive");
    return InitialDataSet(std::make_shared<SchwarzschildModel>(p.mass, radius(50.0 * p.mass)), name);
  }
  if (name == "polynomial") {
    require_symmetric(p.k);
    check_terms(p.metric_terms);
    check_terms(p.k_terms);
    return InitialDataSet(std::make_shared<PolynomialModel>(p.k, p.metric_terms, p.k_terms, radius(1.0)), name);
  }
  throw Error(ErrorCode::UnknownPreset, "unknown preset '" + name + "'");
}

}  // namespace hawking
