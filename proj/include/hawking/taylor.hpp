#pragma once

// Truncated multivariate Taylor polynomials in three variables.
// Taylor<D> stores c_alpha = (d^alpha f)(x0) / alpha! for |alpha| <= D.

#include <array>
#include <cmath>
#include <vector>

namespace hawking {

template <int D>
struct MonomialTable {
  static constexpr int N = (D + 1) * (D + 2) * (D + 3) / 6;
  std::array<std::array<int, 3>, N> exps{};
  std::array<int, N> degree{};
  // index lookup: idx[a][b][c], -1 when a+b+c > D
  std::array<std::array<std::array<int, D + 1>, D + 1>, D + 1> idx{};
  struct Triple { int i, j, k; };
  std::vector<Triple> products;
  // derivative tables: deriv[axis][n] = (source index, factor) for output monomial n
  std::array<std::array<int, N>, 3> dsrc{};
  std::array<std::array<double, N>, 3> dfac{};

  MonomialTable() {
    int n = 0;
    for (auto& plane : idx)
      for (auto& row : plane) row.fill(-1);
    for (int d = 0; d <= D; ++d)
      for (int a = d; a >= 0; --a)
        for (int b = d - a; b >= 0; --b) {
          int c = d - a - b;
          exps[n] = {a, b, c};
          degree[n] = d;
          idx[a][b][c] = n++;
        }
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        int a = exps[i][0] + exps[j][0], b = exps[i][1] + exps[j][1], c = exps[i][2] + exps[j][2];
        if (a + b + c <= D) products.push_back({i, j, idx[a][b][c]});
      }
    for (int ax = 0; ax < 3; ++ax)
      for (int m = 0; m < N; ++m) {
        auto e = exps[m];
        e[ax] += 1;
        if (e[0] + e[1] + e[2] <= D) {
          dsrc[ax][m] = idx[e[0]][e[1]][e[2]];
          dfac[ax][m] = e[ax];
        } else {
          dsrc[ax][m] = -1;
          dfac[ax][m] = 0.0;
        }
      }
  }

  static const MonomialTable& get() {
    static const MonomialTable t;
    return t;
  }
};

template <int D>
class Taylor {
 public:
  static constexpr int N = MonomialTable<D>::N;
  std::array<double, N> c{};

  Taylor() = default;
  Taylor(double v) { c[0] = v; }  // NOLINT: implicit promotion from constants is intended

  static Taylor variable(double x0, int axis) {
    Taylor t(x0);
    if constexpr (D >= 1) t.c[1 + axis] = 1.0;
    return t;
  }

  double value() const { return c[0]; }

  double coeff(int a, int b, int cc) const {
    if (a + b + cc > D) return 0.0;
    return c[MonomialTable<D>::get().idx[a][b][cc]];
  }

  /// Partial derivative d^(a,b,c) f at the expansion point.
  double deriv(int a, int b, int cc) const {
    static constexpr double fact[] = {1, 1, 2, 6, 24, 120, 720, 5040, 40320};
    return coeff(a, b, cc) * fact[a] * fact[b] * fact[cc];
  }

  /// Partial derivative as a polynomial; the top degree is lost (set to zero).
  Taylor d(int axis) const {
    const auto& T = MonomialTable<D>::get();
    Taylor r;
    for (int m = 0; m < N; ++m)
      if (T.dsrc[axis][m] >= 0) r.c[m] = T.dfac[axis][m] * c[T.dsrc[axis][m]];
    return r;
  }

  Taylor& operator+=(const Taylor& o) {
    for (int i = 0; i < N; ++i) c[i] += o.c[i];
    return *this;
  }
  Taylor& operator-=(const Taylor& o) {
    for (int i = 0; i < N; ++i) c[i] -= o.c[i];
    return *this;
  }
  Taylor& operator*=(double s) {
    for (auto& v : c) v *= s;
    return *this;
  }
  Taylor& operator*=(const Taylor& o) { return *this = *this * o; }
  Taylor& operator/=(const Taylor& o) { return *this = *this / o; }

  friend Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
  friend Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }
  friend Taylor operator-(Taylor a) {
    for (auto& v : a.c) v = -v;
    return a;
  }
  friend Taylor operator+(Taylor a, double s) { a.c[0] += s; return a; }
  friend Taylor operator+(double s, Taylor a) { a.c[0] += s; return a; }
  friend Taylor operator-(Taylor a, double s) { a.c[0] -= s; return a; }
  friend Taylor operator-(double s, const Taylor& a) { return s + (-a); }
  friend Taylor operator*(Taylor a, double s) { return a *= s; }
  friend Taylor operator*(double s, Taylor a) { return a *= s; }
  friend Taylor operator/(Taylor a, double s) { return a *= (1.0 / s); }
  friend Taylor operator*(const Taylor& a, const Taylor& b) {
    Taylor r;
    for (const auto& p : MonomialTable<D>::get().products) r.c[p.k] += a.c[p.i] * b.c[p.j];
    return r;
  }
  friend Taylor operator/(const Taylor& a, const Taylor& b) { return a * reciprocal(b); }
  friend Taylor operator/(double s, const Taylor& b) { return reciprocal(b) * s; }

  /// f(u) from the scaled derivatives f^(n)(u0)/n!, n = 0..D (Horner in u - u0).
  static Taylor compose(const Taylor& u, const std::array<double, D + 1>& fn) {
    Taylor delta = u;
    delta.c[0] = 0.0;
    Taylor r(fn[D]);
    for (int n = D - 1; n >= 0; --n) {
      r = r * delta;
      r.c[0] += fn[n];
    }
    return r;
  }

  friend Taylor reciprocal(const Taylor& u) {
    std::array<double, D + 1> fn{};
    double inv = 1.0 / u.c[0], p = inv;
    for (int n = 0; n <= D; ++n) {
      fn[n] = (n % 2 ? -p : p);
      p *= inv;
    }
    return compose(u, fn);
  }
};

template <int D>
Taylor<D> pow(const Taylor<D>& u, double p) {
  std::array<double, D + 1> fn{};
  double binom = 1.0;
  for (int n = 0; n <= D; ++n) {
    fn[n] = binom * std::pow(u.c[0], p - n);
    binom *= (p - n) / (n + 1);
  }
  return Taylor<D>::compose(u, fn);
}

template <int D>
Taylor<D> sqrt(const Taylor<D>& u) {
  return pow(u, 0.5);
}

}  // namespace hawking
