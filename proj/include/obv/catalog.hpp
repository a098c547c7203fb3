#pragma once

// Standard instances: the round contact form on spheres, the defining
// functions z1 and z1^2 + ... + zn^2, and the radial profile used for the
// inverse-monodromy construction. Coordinates on C^n are (x1, y1, x2, y2, ...).

#include <cmath>
#include <complex>
#include <string>

#include "obv/contact.hpp"
#include "obv/forms.hpp"
#include "obv/manifold.hpp"

namespace obv::catalog {

/// α0 = ½ Σ (x_j dy_j - y_j dx_j) on R^{2n}.
inline KForm alpha0(int n) {
  return KForm::one_form(2 * n, [n](const Vec& p) {
    Vec c(2 * n);
    for (int j = 0; j < n; ++j) {
      c[2 * j] = -0.5 * p[2 * j + 1];
      c[2 * j + 1] = 0.5 * p[2 * j];
    }
    return c;
  });
}

/// Σ dx_j ∧ dy_j on R^m (m >= 2n), the standard symplectic form on the first n pairs.
inline KForm omega0(int n, int m = -1) {
  if (m < 0) m = 2 * n;
  Vec c = Vec::Zero(detail::binom(m, 2));
  for (int j = 0; j < n; ++j) c[detail::rank_of((1u << (2 * j)) | (1u << (2 * j + 1)))] = 1.0;
  return KForm::constant(m, 2, c);
}

/// (α0, S^{2n-1}) with exact dα0.
inline ContactFormData standard_contact(int n) { return make_contact(alpha0(n), sphere(n), n - 1, omega0(n)); }

/// f = z1.
inline DefiningFunction g1(int n) {
  const int m = 2 * n;
  DefiningFunction f;
  f.dim = m;
  f.value = [](const Vec& p) { return cplx(p[0], p[1]); };
  f.gradient_fn = [m](const Vec&) {
    Mat G = Mat::Zero(2, m);
    G(0, 0) = 1.0;
    G(1, 1) = 1.0;
    return G;
  };
  return f;
}

/// f = Σ z_j^2. The real part is evaluated as Σx^2 - Σy^2 so that it
/// vanishes exactly on points of the form z2 = i z1.
inline DefiningFunction g2(int n) {
  const int m = 2 * n;
  DefiningFunction f;
  f.dim = m;
  f.value = [n](const Vec& p) {
    double sx = 0, sy = 0, sxy = 0;
    for (int j = 0; j < n; ++j) {
      sx += p[2 * j] * p[2 * j];
      sy += p[2 * j + 1] * p[2 * j + 1];
      sxy += p[2 * j] * p[2 * j + 1];
    }
    return cplx(sx - sy, 2.0 * sxy);
  };
  f.gradient_fn = [n, m](const Vec& p) {
    Mat G(2, m);
    for (int j = 0; j < n; ++j) {
      const double x = p[2 * j], y = p[2 * j + 1];
      G(0, 2 * j) = 2 * x;
      G(0, 2 * j + 1) = -2 * y;
      G(1, 2 * j) = 2 * y;
      G(1, 2 * j + 1) = 2 * x;
    }
    return G;
  };
  return f;
}

/// f = z1^2, whose zero set is not a regular level.
inline DefiningFunction z1_squared(int n) {
  const int m = 2 * n;
  DefiningFunction f;
  f.dim = m;
  f.value = [](const Vec& p) { return cplx(p[0], p[1]) * cplx(p[0], p[1]); };
  f.gradient_fn = [m](const Vec& p) {
    Mat G = Mat::Zero(2, m);
    G(0, 0) = 2 * p[0];
    G(0, 1) = -2 * p[1];
    G(1, 0) = 2 * p[1];
    G(1, 1) = 2 * p[0];
    return G;
  };
  return f;
}

/// Constant f = 1 (empty binding).
inline DefiningFunction constant_one(int m) {
  DefiningFunction f;
  f.dim = m;
  f.value = [](const Vec&) { return cplx(1.0, 0.0); };
  f.gradient_fn = [m](const Vec&) { return Mat::Zero(2, m).eval(); };
  return f;
}

/// Radial profile: identity on [0, inner], constant beyond outer, joined by
/// the antiderivative of a quintic smoothstep so the join is C^2.
struct RadialProfile {
  double inner = 0.2;
  double outer = 0.4;

  double value(double s) const {
    if (s <= inner) return s;
    const double w = outer - inner;
    if (s >= outer) return outer - 0.5 * w;
    const double t = (s - inner) / w;
    return s - w * t * t * t * t * (2.5 + t * (-3.0 + t));
  }
  double derivative(double s) const {
    if (s <= inner) return 1.0;
    if (s >= outer) return 0.0;
    const double t = (s - inner) / (outer - inner);
    return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
  }
};

/// f = (P(|g|)/|g|) g: equals g near the binding and has constant modulus far from it.
inline DefiningFunction profiled(const DefiningFunction& g, RadialProfile P = {}) {
  DefiningFunction f;
  f.dim = g.dim;
  f.value = [g, P](const Vec& p) {
    const cplx v = g(p);
    const double s = std::abs(v);
    if (s <= P.inner) return v;
    return (P.value(s) / s) * v;
  };
  f.gradient_fn = [g, P](const Vec& p) {
    const cplx v = g(p);
    const double s = std::abs(v);
    const Mat G = g.gradient(p);
    if (s <= P.inner) return G;
    const double phi = P.value(s) / s;
    const double dphi = (P.derivative(s) * s - P.value(s)) / (s * s);
    const Vec ds = (v.real() * G.row(0).transpose() + v.imag() * G.row(1).transpose()) / s;
    Mat F = phi * G;
    F.row(0) += v.real() * dphi * ds.transpose();
    F.row(1) += v.imag() * dphi * ds.transpose();
    return F;
  };
  return f;
}

/// Smooth step: 0 for x <= a, 1 for x >= b, quintic in between.
inline double smoothstep(double x, double a, double b) {
  if (x <= a) return 0.0;
  if (x >= b) return 1.0;
  const double t = (x - a) / (b - a);
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

inline double smoothstep_derivative(double x, double a, double b) {
  if (x <= a || x >= b) return 0.0;
  const double t = (x - a) / (b - a);
  return 30.0 * t * t * (1.0 - t) * (1.0 - t) / (b - a);
}

inline RepresentationData standard_g1(int n) { return {standard_contact(n), g1(n)}; }
inline RepresentationData standard_g2(int n) { return {standard_contact(n), g2(n)}; }

}  // namespace obv::catalog
