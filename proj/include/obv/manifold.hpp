#pragma once

// Constraint-defined submanifolds M = {c(p) = 0} of R^m.
//
// Orientation convention: a tangent basis E is positive when
// det[grad c_1, ..., grad c_k, E] * orientation > 0 (normals first). For
// spheres with c = |z|^2 - 1 this is the outward-normal-first orientation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "obv/errors.hpp"
#include "obv/forms.hpp"

namespace obv {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// splitmix64 finalizer; derives independent per-index streams from one seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL)));
}

inline double wrap_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

struct OrientedBasis {
  Vec point;
  Mat vectors;  // ambient_dim x dim, orthonormal columns
  int sign = 1;
};

using Sampler = std::function<Vec(std::mt19937_64&)>;

struct Submanifold {
  std::string name;
  int ambient_dim = 0;
  int codim = 0;
  std::function<Vec(const Vec&)> constraints;
  std::function<Mat(const Vec&)> jacobian_fn;  // codim x ambient_dim
  int orientation = 1;
  std::vector<bool> periodic;
  Sampler sampler;
  double on_tol = 1e-8;
  double rank_ratio = 1e-6;

  int dim() const { return ambient_dim - codim; }

  Vec residual(const Vec& p) const {
    if (p.size() != ambient_dim) throw DimensionError("point dimension does not match manifold " + name);
    if (codim == 0) return Vec(0);
    return constraints(p);
  }

  Mat jacobian(const Vec& p) const {
    if (codim == 0) return Mat(0, ambient_dim);
    if (jacobian_fn) return jacobian_fn(p);
    Mat J(codim, ambient_dim);
    const double h = 1e-6;
    Vec q = p;
    for (int i = 0; i < ambient_dim; ++i) {
      q[i] = p[i] + h;
      const Vec plus = constraints(q);
      q[i] = p[i] - h;
      const Vec minus = constraints(q);
      q[i] = p[i];
      J.col(i) = (plus - minus) / (2.0 * h);
    }
    return J;
  }

  bool contains(const Vec& p) const { return codim == 0 || residual(p).norm() <= on_tol; }

  bool is_periodic(int i) const { return i < static_cast<int>(periodic.size()) && periodic[static_cast<std::size_t>(i)]; }
};

/// Distance between points with periodic coordinates compared mod 2π.
inline double periodic_distance(const Submanifold& M, const Vec& a, const Vec& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    if (M.is_periodic(static_cast<int>(i))) d = std::remainder(d, kTwoPi);
    s += d * d;
  }
  return std::sqrt(s);
}

struct TangentOptions {
  bool require_on_manifold = true;
};

/// Orthonormal, oriented basis of ker Dc(p). With require_on_manifold false the
/// basis spans the tangent space of the level set through p.
inline OrientedBasis tangent_basis(const Submanifold& M, const Vec& p, TangentOptions opt = {}) {
  if (p.size() != M.ambient_dim) throw DimensionError("point dimension does not match manifold " + M.name);
  const int m = M.ambient_dim, c = M.codim, d = M.dim();
  OrientedBasis out{p, Mat(m, d), M.orientation};
  if (c == 0) {
    out.vectors = Mat::Identity(m, m);
    if (M.orientation < 0 && m > 0) out.vectors.col(m - 1) *= -1.0;
    return out;
  }
  if (opt.require_on_manifold) {
    const double r = M.residual(p).norm();
    if (!(r <= M.on_tol)) throw PreconditionError("point not on " + M.name + " (residual " + std::to_string(r) + ")");
  }
  const Mat J = M.jacobian(p);
  Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeFullV);
  const Vec sv = svd.singularValues();
  if (!(sv[c - 1] >= M.rank_ratio * sv[0]) || !(sv[0] > 0.0))
    throw DegenerateError("constraint Jacobian of " + M.name + " is rank deficient", sv);
  out.vectors = svd.matrixV().rightCols(d);
  if (d > 0) {
    Mat frame(m, m);
    frame.leftCols(c) = J.transpose();
    frame.rightCols(d) = out.vectors;
    if (frame.determinant() * M.orientation < 0) out.vectors.col(d - 1) *= -1.0;
  }
  return out;
}

/// Newton projection p <- p - J^+ c until the residual is at roundoff level.
inline Vec project(const Submanifold& M, Vec p, int max_iter = 60) {
  if (M.codim == 0) return p;
  double r = M.residual(p).norm();
  for (int it = 0; it < max_iter && r > 1e-15; ++it) {
    const Mat J = M.jacobian(p);
    const Vec next = p - J.transpose() * (J * J.transpose()).ldlt().solve(M.residual(p));
    const double r_next = M.residual(next).norm();
    if (!std::isfinite(r_next) || (r_next >= r && r < 1e-13)) break;
    p = next;
    r = r_next;
  }
  if (!(r <= std::min(M.on_tol, 1e-12))) throw ConvergenceError("projection onto " + M.name + " did not converge");
  return p;
}

/// One Newton correction, used after each integrator step.
inline Vec newton_step(const Submanifold& M, const Vec& p) {
  if (M.codim == 0) return p;
  const Mat J = M.jacobian(p);
  return p - J.transpose() * (J * J.transpose()).ldlt().solve(M.residual(p));
}

inline Vec wrap_periodic(const Submanifold& M, Vec p) {
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (M.is_periodic(static_cast<int>(i))) p[i] = wrap_angle(p[i]);
  return p;
}

/// n points on M, deterministic in (seed, index) and independent of threading.
inline std::vector<Vec> sample(const Submanifold& M, std::size_t n, std::uint64_t seed) {
  if (!M.sampler) throw PreconditionError("no sampler registered for " + M.name);
  std::vector<Vec> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = stream(seed, i);
    std::optional<Vec> got;
    for (int attempt = 0; attempt < 16 && !got; ++attempt) {
      try {
        Vec p = project(M, M.sampler(rng));
        p = wrap_periodic(M, p);
        tangent_basis(M, p);
        got = std::move(p);
      } catch (const Error&) {
      }
    }
    if (!got) throw ConvergenceError("sampler for " + M.name + " failed repeatedly");
    out.push_back(std::move(*got));
  }
  return out;
}

/// The first n points of the sample stream that satisfy keep; draws at most
/// max_draws candidates.
inline std::vector<Vec> sample_where(const Submanifold& M, std::size_t n, std::uint64_t seed,
                                     const std::function<bool(const Vec&)>& keep, std::size_t max_draws = 1000000) {
  std::vector<Vec> out;
  const std::size_t batch = std::max<std::size_t>(64, n);
  for (std::size_t offset = 0; out.size() < n && offset < max_draws; offset += batch) {
    for (Vec& p : sample(M, batch, splitmix64(seed + offset))) {
      if (keep(p)) out.push_back(std::move(p));
      if (out.size() == n) break;
    }
  }
  if (out.size() < n) throw ConvergenceError("too few samples of " + M.name + " satisfy the filter");
  return out;
}

inline Vec gaussian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> N(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = N(rng);
  return v;
}

/// Unit sphere S^{2n-1} in C^n with coordinates (x1, y1, x2, y2, ...).
inline Submanifold sphere(int complex_dim) {
  const int m = 2 * complex_dim;
  Submanifold S;
  S.name = "S^" + std::to_string(m - 1);
  S.ambient_dim = m;
  S.codim = 1;
  S.constraints = [](const Vec& p) { return Vec::Constant(1, p.squaredNorm() - 1.0).eval(); };
  S.jacobian_fn = [](const Vec& p) { return (2.0 * p.transpose()).eval(); };
  S.periodic.assign(static_cast<std::size_t>(m), false);
  S.sampler = [m](std::mt19937_64& rng) {
    Vec v = gaussian(rng, m);
    while (v.norm() < 1e-8) v = gaussian(rng, m);
    return (v / v.norm()).eval();
  };
  return S;
}

/// Open Euclidean space R^m (no constraints); optional sampler.
inline Submanifold euclidean(int m, std::string name = {}, Sampler sampler = {}) {
  Submanifold E;
  E.name = name.empty() ? "R^" + std::to_string(m) : std::move(name);
  E.ambient_dim = m;
  E.codim = 0;
  E.periodic.assign(static_cast<std::size_t>(m), false);
  E.sampler = std::move(sampler);
  return E;
}

/// M x T^2 with the torus angles appended as the last two (periodic) coordinates.
inline Submanifold product_with_torus(const Submanifold& M) {
  const int m = M.ambient_dim;
  Submanifold P;
  P.name = M.name + "xT2";
  P.ambient_dim = m + 2;
  P.codim = M.codim;
  P.orientation = M.orientation;
  P.on_tol = M.on_tol;
  P.rank_ratio = M.rank_ratio;
  if (M.codim > 0) {
    P.constraints = [M, m](const Vec& p) { return M.residual(p.head(m)); };
    P.jacobian_fn = [M, m](const Vec& p) {
      Mat J = Mat::Zero(M.codim, m + 2);
      J.leftCols(m) = M.jacobian(p.head(m));
      return J;
    };
  }
  P.periodic = M.periodic;
  P.periodic.resize(static_cast<std::size_t>(m), false);
  P.periodic.push_back(true);
  P.periodic.push_back(true);
  if (M.sampler) {
    P.sampler = [M, m](std::mt19937_64& rng) {
      Vec p(m + 2);
      p.head(m) = project(M, M.sampler(rng));
      std::uniform_real_distribution<double> U(0.0, kTwoPi);
      p[m] = U(rng);
      p[m + 1] = U(rng);
      return p;
    };
  }
  return P;
}

/// M ∩ {extra(p) = 0}. The sampler draws from M and lets Newton projection
/// land on the intersection.
inline Submanifold intersect(const Submanifold& M, int extra_count, std::function<Vec(const Vec&)> extra,
                             std::function<Mat(const Vec&)> extra_jacobian, std::string name) {
  Submanifold K;
  K.name = std::move(name);
  K.ambient_dim = M.ambient_dim;
  K.codim = M.codim + extra_count;
  K.orientation = M.orientation;
  K.periodic = M.periodic;
  K.on_tol = M.on_tol;
  K.rank_ratio = M.rank_ratio;
  K.constraints = [M, extra](const Vec& p) {
    const Vec a = M.residual(p);
    const Vec b = extra(p);
    Vec c(a.size() + b.size());
    c << a, b;
    return c;
  };
  if (extra_jacobian) {
    K.jacobian_fn = [M, extra_jacobian](const Vec& p) {
      const Mat a = M.jacobian(p);
      const Mat b = extra_jacobian(p);
      Mat J(a.rows() + b.rows(), a.cols());
      J << a, b;
      return J;
    };
  }
  if (M.sampler) K.sampler = M.sampler;
  return K;
}

/// Basis of the page tangent space ker(theta_form) ∩ T_pM, oriented so that
/// (R, U) is positive for `volume` whenever theta_form(R) > 0. Without a
/// volume form, M's own orientation is used.
inline OrientedBasis orient_page_basis(const Submanifold& M, const Vec& p, const KForm& theta_form,
                                       const std::optional<KForm>& volume = std::nullopt,
                                       TangentOptions opt = {}) {
  if (theta_form.degree() != 1) throw DimensionError("page orientation needs a 1-form");
  const OrientedBasis B = tangent_basis(M, p, opt);
  const int d = M.dim();
  const Vec c = theta_form.coefficients(p);
  const Vec w = B.vectors.transpose() * c;
  if (!(w.norm() > 1e-12 * std::max(1.0, c.norm())))
    throw PreconditionError("angular form vanishes on the tangent space (point on the binding)");
  Eigen::JacobiSVD<Mat> svd(w.transpose(), Eigen::ComputeFullV);
  Mat K = svd.matrixV().rightCols(d - 1);
  OrientedBasis out{p, B.vectors * K, 1};
  const Vec R = B.vectors * (w / w.squaredNorm());
  Mat frame(M.ambient_dim, d);
  frame.col(0) = R;
  frame.rightCols(d - 1) = out.vectors;
  double s;
  if (volume) {
    s = (*volume)(p, frame);
  } else {
    s = (B.vectors.transpose() * frame).determinant();
  }
  if (s < 0 && d > 1) out.vectors.col(d - 2) *= -1.0;
  out.sign = 1;
  return out;
}

}  // namespace obv
