#include "hawking/background.hpp"

#include <cmath>
#include <map>
#include <tuple>

namespace hawking {

const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::ChartExceeded: return "ChartExceeded";
    case ErrorCode::DegenerateMetric: return "DegenerateMetric";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::NonEmbedded: return "NonEmbedded";
    case ErrorCode::DegenerateInducedMetric: return "DegenerateInducedMetric";
    case ErrorCode::NotOrthogonal: return "NotOrthogonal";
    case ErrorCode::UnsupportedDegree: return "UnsupportedDegree";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DegenerateHessian: return "DegenerateHessian";
    case ErrorCode::ContinuationBroken: return "ContinuationBroken";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::GaussEquationViolated: return "GaussEquationViolated";
    case ErrorCode::InvalidCurvature: return "InvalidCurvature";
  }
  return "Unknown";
}

namespace {

// ---------------------------------------------------------------------------
// Finite-difference jets

struct Stencil {
  std::vector<int> offsets;
  std::vector<double> numerators;  // integer-valued, so constants cancel exactly
  double denominator;
};

// Central stencil for the n-th derivative, 4th order accurate.
const Stencil& central_stencil(int n) {
  static const std::array<Stencil, 5> table{{
      {{0}, {1}, 1.0},
      {{-2, -1, 1, 2}, {1, -8, 8, -1}, 12.0},
      {{-2, -1, 0, 1, 2}, {-1, 16, -30, 16, -1}, 12.0},
      {{-3, -2, -1, 1, 2, 3}, {1, -8, 13, -13, 8, -1}, 8.0},
      {{-3, -2, -1, 0, 1, 2, 3}, {-1, 12, -39, 56, -39, 12, -1}, 6.0},
  }};
  return table[n];
}

// Step used for derivatives of total order n. Cancellation error grows like
// eps / h^n, so higher orders use proportionally wider stencils.
double fd_step_for_order(double h, int n) {
  static constexpr double factor[] = {1.0, 1.0, 10.0, 50.0, 100.0};
  return factor[n] * h;
}

template <int D>
void fd_jets(const FieldModel& model, const Vec3& x, double h, SymJet<D>& g, SymJet<D>& k) {
  using Key = std::tuple<int, int, int, int>;
  std::map<Key, std::pair<Mat3, Mat3>> cache;
  auto sample = [&](int n, int a, int b, int c) -> const std::pair<Mat3, Mat3>& {
    Key key{n, a, b, c};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    double hn = fd_step_for_order(h, n);
    Vec3 y = x + hn * Vec3(a, b, c);
    if (!model.in_domain(y))
      throw Error(ErrorCode::ChartExceeded, "finite-difference stencil leaves the chart");
    std::pair<Mat3, Mat3> v;
    model.eval(y, v.first, v.second);
    return cache.emplace(key, v).first->second;
  };
  static constexpr double fact[] = {1, 1, 2, 6, 24};
  const auto& T = MonomialTable<D>::get();
  for (auto& t : g) t = Taylor<D>();
  for (auto& t : k) t = Taylor<D>();
  for (int m = 0; m < Taylor<D>::N; ++m) {
    auto e = T.exps[m];
    int n = T.degree[m];
    const Stencil& sa = central_stencil(e[0]);
    const Stencil& sb = central_stencil(e[1]);
    const Stencil& sc = central_stencil(e[2]);
    Mat3 dg = Mat3::Zero(), dk = Mat3::Zero();
    const double den = sa.denominator * sb.denominator * sc.denominator;
    for (size_t ia = 0; ia < sa.offsets.size(); ++ia)
      for (size_t ib = 0; ib < sb.offsets.size(); ++ib)
        for (size_t ic = 0; ic < sc.offsets.size(); ++ic) {
          double w = sa.numerators[ia] * sb.numerators[ib] * sc.numerators[ic];
          const auto& v = sample(n, sa.offsets[ia], sb.offsets[ib], sc.offsets[ic]);
          dg += w * v.first;
          dk += w * v.second;
        }
    double scale = std::pow(fd_step_for_order(h, n), -n) / (den * fact[e[0]] * fact[e[1]] * fact[e[2]]);
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        g[sym_index(i, j)].c[m] = scale * dg(i, j);
        k[sym_index(i, j)].c[m] = scale * dk(i, j);
      }
  }
}

// ---------------------------------------------------------------------------
// Rescaled chart

class RescaledModel : public FieldModel {
 public:
  RescaledModel(InitialDataSet base, Vec3 c, double r) : base_(std::move(base)), c_(c), r_(r) {}

  void eval(const Vec3& y, Mat3& g, Mat3& k) const override {
    Vec3 x = c_ + r_ * y;
    g = base_.metric(x);
    k = r_ * base_.k(x);
  }
  void jet1(const Vec3& y, SymJet<1>& g, SymJet<1>& k) const override { jet(y, g, k); }
  void jet2(const Vec3& y, SymJet<2>& g, SymJet<2>& k) const override { jet(y, g, k); }
  void jet4(const Vec3& y, SymJet<4>& g, SymJet<4>& k) const override { jet(y, g, k); }
  bool in_domain(const Vec3& y) const override { return base_.in_chart(c_ + r_ * y); }
  double chart_radius() const override { return base_.chart_radius() / r_; }

 private:
  template <int D>
  void jet(const Vec3& y, SymJet<D>& g, SymJet<D>& k) const {
    base_.jets<D>(c_ + r_ * y, g, k);
    const auto& T = MonomialTable<D>::get();
    for (int m = 0; m < Taylor<D>::N; ++m) {
      double s = std::pow(r_, T.degree[m]);
      for (int q = 0; q < 6; ++q) {
        g[q].c[m] *= s;
        k[q].c[m] *= s * r_;
      }
    }
  }

  InitialDataSet base_;
  Vec3 c_;
  double r_;
};

// ---------------------------------------------------------------------------
// Curvature pipeline on Taylor polynomials

template <int D>
using T33 = std::array<std::array<Taylor<D>, 3>, 3>;

template <int D>
T33<D> unpack(const SymJet<D>& s) {
  T33<D> m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = s[sym_index(i, j)];
  return m;
}

template <int D>
T33<D> inverse(const T33<D>& a) {
  T33<D> adj;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      int i1 = (j + 1) % 3, i2 = (j + 2) % 3, j1 = (i + 1) % 3, j2 = (i + 2) % 3;
      adj[i][j] = a[i1][j1] * a[i2][j2] - a[i1][j2] * a[i2][j1];
    }
  Taylor<D> det = a[0][0] * adj[0][0] + a[0][1] * adj[1][0] + a[0][2] * adj[2][0];
  if (!(det.value() > 0.0)) throw Error(ErrorCode::DegenerateMetric, "metric determinant not positive");
  Taylor<D> inv = reciprocal(det);
  for (auto& row : adj)
    for (auto& v : row) v = v * inv;
  return adj;
}

template <int D>
struct Geometry {
  T33<D> g, gi;
  std::array<T33<D>, 3> gamma;  // gamma[i][j][k] = Gamma^i_jk
  T33<D> ricci;
  Taylor<D> scalar;
};

// Christoffel symbols (valid to degree D-1) and Ricci (valid to degree D-2).
template <int D>
Geometry<D> geometry(const SymJet<D>& gj, bool with_ricci) {
  Geometry<D> out;
  out.g = unpack(gj);
  out.gi = inverse(out.g);
  std::array<T33<D>, 3> dg;  // dg[l][j][k] = d_l g_jk
  for (int l = 0; l < 3; ++l)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) dg[l][j][k] = out.g[j][k].d(l);
  std::array<T33<D>, 3> low;  // Gamma_ljk
  for (int l = 0; l < 3; ++l)
    for (int j = 0; j < 3; ++j)
      for (int k = j; k < 3; ++k) {
        low[l][j][k] = 0.5 * (dg[j][l][k] + dg[k][l][j] - dg[l][j][k]);
        low[l][k][j] = low[l][j][k];
      }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = j; k < 3; ++k) {
        Taylor<D> s;
        for (int l = 0; l < 3; ++l) s += out.gi[i][l] * low[l][j][k];
        out.gamma[i][j][k] = s;
        out.gamma[i][k][j] = s;
      }
  if (!with_ricci) return out;
  // Ric_jl = d_i G^i_jl - d_j G^i_il + G^i_ip G^p_jl - G^i_jp G^p_il
  std::array<Taylor<D>, 3> trace_gamma;  // G^i_ip
  for (int p = 0; p < 3; ++p) {
    Taylor<D> s;
    for (int i = 0; i < 3; ++i) s += out.gamma[i][i][p];
    trace_gamma[p] = s;
  }
  for (int j = 0; j < 3; ++j)
    for (int l = j; l < 3; ++l) {
      Taylor<D> s;
      for (int i = 0; i < 3; ++i) s += out.gamma[i][j][l].d(i);
      s -= trace_gamma[l].d(j);
      for (int p = 0; p < 3; ++p) {
        s += trace_gamma[p] * out.gamma[p][j][l];
        for (int i = 0; i < 3; ++i) s -= out.gamma[i][j][p] * out.gamma[p][i][l];
      }
      out.ricci[j][l] = s;
      out.ricci[l][j] = s;
    }
  Taylor<D> sc;
  for (int j = 0; j < 3; ++j)
    for (int l = 0; l < 3; ++l) sc += out.gi[j][l] * out.ricci[j][l];
  out.scalar = sc;
  return out;
}

template <int D>
Mat3 value(const T33<D>& a) {
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = a[i][j].value();
  return m;
}

template <int D>
Tensor3 value(const std::array<T33<D>, 3>& a) {
  Tensor3 t;
  for (int i = 0; i < 3; ++i) t[i] = value(a[i]);
  return t;
}

Tensor3 covariant_derivative(const Tensor3& partial, const Tensor3& gamma, const Mat3& field) {
  // (nabla_a T)_ij = d_a T_ij - G^m_ai T_mj - G^m_aj T_im
  Tensor3 out;
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = partial[a](i, j);
        for (int m = 0; m < 3; ++m) s -= gamma[m](a, i) * field(m, j) + gamma[m](a, j) * field(i, m);
        out[a](i, j) = s;
      }
  return out;
}

template <int D>
Tensor3 partials(const T33<D>& a) {
  Tensor3 t;
  for (int ax = 0; ax < 3; ++ax)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) t[ax](i, j) = a[i][j].coeff(ax == 0, ax == 1, ax == 2);
  return t;
}

void check_positive_definite(const Mat3& g) {
  Eigen::LLT<Mat3> llt(g);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::DegenerateMetric, "metric not positive definite");
}

}  // namespace

// ---------------------------------------------------------------------------

InitialDataSet::InitialDataSet(std::shared_ptr<const FieldModel> model, std::string name)
    : model_(std::move(model)), name_(std::move(name)) {}

InitialDataSet InitialDataSet::with_mode(DerivativeMode mode, double h) const {
  InitialDataSet out = *this;
  out.mode_ = mode;
  out.fd_step_ = h;
  return out;
}

InitialDataSet InitialDataSet::rescaled(const Vec3& c, double r) const {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidParams, "rescaling factor must be positive");
  return InitialDataSet(std::make_shared<RescaledModel>(*this, c, r), name_ + "_rescaled");
}

Mat3 InitialDataSet::metric(const Vec3& x) const {
  if (!in_chart(x)) throw Error(ErrorCode::ChartExceeded, "point outside chart");
  Mat3 g, k;
  model_->eval(x, g, k);
  return g;
}

Mat3 InitialDataSet::k(const Vec3& x) const {
  if (!in_chart(x)) throw Error(ErrorCode::ChartExceeded, "point outside chart");
  Mat3 g, k;
  model_->eval(x, g, k);
  return k;
}

template <int D>
void InitialDataSet::jets(const Vec3& x, SymJet<D>& g, SymJet<D>& k) const {
  if (!in_chart(x)) throw Error(ErrorCode::ChartExceeded, "point outside chart");
  if (mode_ == DerivativeMode::FiniteDifference) {
    fd_jets<D>(*model_, x, fd_step_, g, k);
    return;
  }
  if constexpr (D == 1) model_->jet1(x, g, k);
  else if constexpr (D == 2) model_->jet2(x, g, k);
  else model_->jet4(x, g, k);
}

template void InitialDataSet::jets<1>(const Vec3&, SymJet<1>&, SymJet<1>&) const;
template void InitialDataSet::jets<2>(const Vec3&, SymJet<2>&, SymJet<2>&) const;
template void InitialDataSet::jets<4>(const Vec3&, SymJet<4>&, SymJet<4>&) const;

void InitialDataSet::christoffel(const Vec3& x, Tensor3& gamma) const {
  SymJet<1> gj, kj;
  jets<1>(x, gj, kj);
  Mat3 g;
  Tensor3 dg;  // dg[l](j, k) = d_l g_jk
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const auto& t = gj[sym_index(i, j)];
      g(i, j) = t.c[0];
      for (int l = 0; l < 3; ++l) dg[l](i, j) = t.c[1 + l];
    }
  Mat3 gi = g.inverse();
  for (int i = 0; i < 3; ++i) gamma[i].setZero();
  for (int l = 0; l < 3; ++l)
    for (int j = 0; j < 3; ++j)
      for (int k = j; k < 3; ++k) {
        double low = 0.5 * (dg[j](l, k) + dg[k](l, j) - dg[l](j, k));
        for (int i = 0; i < 3; ++i) gamma[i](j, k) += gi(i, l) * low;
      }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < j; ++k) gamma[i](j, k) = gamma[i](k, j);
}

Mat3 orthonormal_frame(const Mat3& g) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(g);
  if (es.eigenvalues().minCoeff() <= 0.0) throw Error(ErrorCode::DegenerateMetric, "metric not positive definite");
  return es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

CurvatureAtPoint curvature_at(const InitialDataSet& ds, const Vec3& x) {
  SymJet<4> gj, kj;
  ds.jets<4>(x, gj, kj);
  CurvatureAtPoint c;
  c.x = x;
  auto geo = geometry<4>(gj, true);
  c.g = value(geo.g);
  check_positive_definite(c.g);
  c.g_inv = value(geo.gi);
  c.christoffel = value(geo.gamma);

  // Full Riemann tensor at x: R^m_lij = d_i G^m_jl - d_j G^m_il + G^m_ip G^p_jl - G^m_jp G^p_il,
  // Rm_ijkl = g_km R^m_lij.
  const auto& G = c.christoffel;
  Tensor3 dG[3];  // dG[i][m](j, l) = d_i Gamma^m_jl
  for (int i = 0; i < 3; ++i)
    for (int m = 0; m < 3; ++m)
      for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l) dG[i][m](j, l) = geo.gamma[m][j][l].coeff(i == 0, i == 1, i == 2);
  double Rup[3][3][3][3];
  for (int m = 0; m < 3; ++m)
    for (int l = 0; l < 3; ++l)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double s = dG[i][m](j, l) - dG[j][m](i, l);
          for (int p = 0; p < 3; ++p) s += G[m](i, p) * G[p](j, l) - G[m](j, p) * G[p](i, l);
          Rup[m][l][i][j] = s;
        }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double s = 0.0;
          for (int m = 0; m < 3; ++m) s += c.g(k, m) * Rup[m][l][i][j];
          c.riemann(i, j, k, l) = s;
        }
  c.ricci = value(geo.ricci);
  c.scalar = geo.scalar.value();
  for (int a = 0; a < 3; ++a) c.grad_scalar[a] = geo.scalar.coeff(a == 0, a == 1, a == 2);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      double s = geo.scalar.deriv((a == 0) + (b == 0), (a == 1) + (b == 1), (a == 2) + (b == 2));
      for (int m = 0; m < 3; ++m) s -= G[m](a, b) * c.grad_scalar[m];
      c.hess_scalar(a, b) = s;
    }
  c.grad_ricci = covariant_derivative(partials(geo.ricci), G, c.ricci);

  auto kk = unpack(kj);
  c.k = value(kk);
  c.grad_k = covariant_derivative(partials(kk), G, c.k);
  c.tr_k = (c.g_inv * c.k).trace();
  c.norm_k_sq = (c.g_inv * c.k * c.g_inv * c.k).trace();
  c.traceless_k_norm_sq = c.norm_k_sq - c.tr_k * c.tr_k / 3.0;
  return c;
}

AmbientPoint ambient_at(const InitialDataSet& ds, const Vec3& x) {
  SymJet<2> gj, kj;
  ds.jets<2>(x, gj, kj);
  auto geo = geometry<2>(gj, true);
  AmbientPoint a;
  a.g = value(geo.g);
  a.g_inv = value(geo.gi);
  a.christoffel = value(geo.gamma);
  a.ricci = value(geo.ricci);
  auto kk = unpack(kj);
  a.k = value(kk);
  a.grad_k = covariant_derivative(partials(kk), a.christoffel, a.k);
  return a;
}

ConcentrationScalar concentration_scalar(const InitialDataSet& ds, const Vec3& x) {
  SymJet<4> gj, kj;
  ds.jets<4>(x, gj, kj);
  auto geo = geometry<4>(gj, true);
  check_positive_definite(value(geo.g));
  auto kk = unpack(kj);
  Taylor<4> trk, knorm;
  T33<4> mixed;  // k^i_j = g^ia k_aj
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Taylor<4> s;
      for (int a = 0; a < 3; ++a) s += geo.gi[i][a] * kk[a][j];
      mixed[i][j] = s;
    }
  for (int i = 0; i < 3; ++i) trk += mixed[i][i];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) knorm += mixed[i][j] * mixed[j][i];
  Taylor<4> f = geo.scalar + 0.6 * trk * trk + 0.2 * knorm;
  ConcentrationScalar out;
  out.value = f.value();
  for (int a = 0; a < 3; ++a) out.gradient[a] = f.coeff(a == 0, a == 1, a == 2);
  Tensor3 G = value(geo.gamma);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      double s = f.deriv((a == 0) + (b == 0), (a == 1) + (b == 1), (a == 2) + (b == 2));
      for (int m = 0; m < 3; ++m) s -= G[m](a, b) * out.gradient[m];
      out.hessian(a, b) = s;
    }
  out.hessian = 0.5 * (out.hessian + out.hessian.transpose()).eval();
  return out;
}

}  // namespace hawking
