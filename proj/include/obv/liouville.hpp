#pragma once

// Classical Liouville domains and their ideal completions, the two standard
// ideal domains, Lyapunov inequalities for Weinstein structures, the
// trivial-monodromy hypersurface V = {u - |z|^2 = 0} in F x C, and the
// coordinate change W x C x T^2 -> W x T*T^2.

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "obv/catalog.hpp"
#include "obv/contact.hpp"
#include "obv/errors.hpp"
#include "obv/forms.hpp"
#include "obv/manifold.hpp"
#include "obv/monodromy.hpp"
#include "obv/report.hpp"

namespace obv {

/// A classical Liouville domain F = {u >= 0} inside its ambient coordinate
/// space, with Liouville form, Liouville field (ι_X dλ = λ), and a
/// completion function u vanishing exactly on the boundary.
struct LiouvilleDomainData {
  std::string name;
  int n = 1;  // dim F = 2n
  Submanifold F;  // open region; its sampler draws interior points
  Sampler boundary_sampler;
  KForm lambda;
  KForm dlambda;
  VecField X;
  ScalarField u;
};

namespace detail {

inline double radial_power(const Vec& z, int k) { return std::pow(z.squaredNorm(), 0.5 * k); }

/// Uniform point in the unit ball of R^m scaled to radius in [r_min, r_max].
inline Vec ball_point(std::mt19937_64& rng, int m, double r_min, double r_max) {
  Vec v = gaussian(rng, m);
  v /= v.norm();
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double a = std::pow(r_min, m), b = std::pow(r_max, m);
  return std::pow(a + (b - a) * U(rng), 1.0 / m) * v;
}

}  // namespace detail

/// Unit ball in C^n with λ0, X = ½ z and u = 1 - |z|^k (k = 2 or 4).
inline LiouvilleDomainData ball_domain(int n, int k = 4, double r_max = 0.999) {
  const int m = 2 * n;
  LiouvilleDomainData d;
  d.name = "ball B^" + std::to_string(m) + " with u = 1 - |z|^" + std::to_string(k);
  d.n = n;
  d.F = euclidean(m, "B^" + std::to_string(m),
                  [m, r_max](std::mt19937_64& rng) { return detail::ball_point(rng, m, 0.0, r_max); });
  d.boundary_sampler = [m](std::mt19937_64& rng) {
    Vec v = gaussian(rng, m);
    return Vec(v / v.norm());
  };
  d.lambda = catalog::alpha0(n);
  d.dlambda = catalog::omega0(n);
  d.X = VecField{m, [](const Vec& p) { return Vec(0.5 * p); }};
  d.u = scalar_field(
      m, [k](const Vec& p) { return 1.0 - detail::radial_power(p, k); },
      [k](const Vec& p) { return Vec(-k * detail::radial_power(p, k - 2) * p); });
  return d;
}

/// Unit disk cotangent bundle of T^k in coordinates (q_1..q_k, p_1..p_k),
/// q periodic, with λ = -Σ p dq, X = p ∂p and u = 1 - |p|^2.
inline LiouvilleDomainData cotangent_disk_domain(int k, double p_max = 0.999) {
  const int m = 2 * k;
  LiouvilleDomainData d;
  d.name = "disk cotangent bundle of T^" + std::to_string(k);
  d.n = k;
  d.F = euclidean(m, "D*T^" + std::to_string(k), [k, p_max](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> A(0.0, kTwoPi);
    Vec x(2 * k);
    for (int j = 0; j < k; ++j) x[j] = A(rng);
    x.tail(k) = detail::ball_point(rng, k, 0.0, p_max);
    return x;
  });
  d.F.periodic.assign(static_cast<std::size_t>(m), false);
  for (int j = 0; j < k; ++j) d.F.periodic[static_cast<std::size_t>(j)] = true;
  d.boundary_sampler = [k](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> A(0.0, kTwoPi);
    Vec x(2 * k);
    for (int j = 0; j < k; ++j) x[j] = A(rng);
    Vec v = gaussian(rng, k);
    x.tail(k) = v / v.norm();
    return x;
  };
  d.lambda = KForm::one_form(m, [k](const Vec& x) {
    Vec c = Vec::Zero(2 * k);
    c.head(k) = -x.tail(k);
    return c;
  });
  Vec w = Vec::Zero(detail::binom(m, 2));
  for (int j = 0; j < k; ++j) w[detail::rank_of((1u << j) | (1u << (j + k)))] = 1.0;  // dq_j ∧ dp_j
  d.dlambda = KForm::constant(m, 2, w);
  d.X = VecField{m, [k](const Vec& x) {
                   Vec v = Vec::Zero(2 * k);
                   v.tail(k) = x.tail(k);
                   return v;
                 }};
  d.u = scalar_field(
      m, [k](const Vec& x) { return 1.0 - x.tail(k).squaredNorm(); },
      [k](const Vec& x) {
        Vec g = Vec::Zero(2 * k);
        g.tail(k) = -2.0 * x.tail(k);
        return g;
      });
  return d;
}

inline std::vector<Vec> boundary_samples(const LiouvilleDomainData& d, std::size_t count, std::uint64_t seed) {
  std::vector<Vec> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto rng = stream(seed, i);
    out[i] = d.boundary_sampler(rng);
  }
  return out;
}

/// Midpoint of two completion functions for the same domain.
inline LiouvilleDomainData average_completion(const LiouvilleDomainData& a, const ScalarField& u2) {
  LiouvilleDomainData d = a;
  const ScalarField u1 = a.u;
  d.name = a.name + " (averaged completion)";
  d.u = scalar_field(
      a.u.dim, [u1, u2](const Vec& p) { return 0.5 * (u1(p) + u2(p)); },
      [u1, u2](const Vec& p) { return Vec(0.5 * (u1.gradient(p) + u2.gradient(p))); });
  return d;
}

/// Conditions on u for the ideal completion: u - du(X) > 0 inside, du(X) < 0
/// and |du| bounded below on the boundary, ι_X dλ = λ, and the top power of
/// ω = d(λ/u), differentiated numerically, equals u^{-n}(1 - du(X)/u) (dλ)^n
/// and is positive.
inline CheckReport completion_check(const LiouvilleDomainData& d, const std::vector<Vec>& interior_pts,
                                    const std::vector<Vec>& boundary_pts, double tolerance = 0.0,
                                    double rel_tol = 1e-6) {
  Stopwatch sw;
  CheckReport r;
  r.name = "ideal completion of " + d.name;
  r.anchor = "completion function: u^{-1}(0) = boundary regular, du(X) < u; omega = d(lambda/u) nondegenerate";
  r.tolerance = tolerance;
  r.residual_tolerance = rel_tol;
  const int m = 2 * d.n;
  const ScalarField u = d.u;
  const KForm lam = d.lambda;
  const KForm lam_over_u = KForm::one_form(m, [u, lam](const Vec& p) { return Vec(lam.coefficients(p) / u(p)); });
  const KForm omega = ext_deriv(lam_over_u, DiffStep{1e-3, true, [u](const Vec& p) { return std::min(1.0, u(p)); }});
  const KForm top = power(omega, d.n);
  const KForm top_c = power(d.dlambda, d.n);
  const KForm liouville_gap = interior(d.X, d.dlambda) - d.lambda;
  const Mat I = Mat::Identity(m, m);
  struct Out {
    double margin, positivity, rel, x_res;
  };
  const auto outs = parallel_map<Out>(interior_pts.size(), [&](std::size_t i) {
    const Vec& p = interior_pts[i];
    const double up = u(p);
    const double dux = u.gradient(p).dot(d.X(p));
    const double c_top = top_c(p, I);
    const double expected = std::pow(up, -d.n) * (1.0 - dux / up) * c_top;
    const double got = top(p, I);
    // positivity is relative to the symplectic orientation of (dλ)^n
    const double sgn = c_top > 0 ? 1.0 : -1.0;
    return Out{up - dux, std::min(std::abs(c_top), sgn * got), relative_gap(got, expected),
               liouville_gap.coefficients(p).lpNorm<Eigen::Infinity>()};
  });
  double pos = std::numeric_limits<double>::infinity(), rel = 0, x_res = 0;
  for (const auto& o : outs) {
    r.margin(o.margin);
    pos = std::min(pos, o.positivity);
    rel = std::max(rel, o.rel);
    x_res = std::max(x_res, o.x_res);
  }
  r.residual(rel);
  double b_margin = std::numeric_limits<double>::infinity(), b_grad = b_margin, b_val = 0;
  for (const Vec& p : boundary_pts) {
    const Vec g = u.gradient(p);
    b_margin = std::min(b_margin, -g.dot(d.X(p)));
    b_grad = std::min(b_grad, g.norm());
    b_val = std::max(b_val, std::abs(u(p)));
  }
  if (!boundary_pts.empty()) r.margin(b_margin);
  if (!(pos > 0.0)) r.fail("completed symplectic form is not positive");
  if (!(x_res <= 1e-8)) r.fail("X is not the Liouville field of lambda");
  if (!boundary_pts.empty() && !(b_grad >= 1e-6)) r.fail("boundary is not a regular level of u");
  if (!(b_val <= 1e-10)) r.fail("boundary samples are not on u = 0");
  r.n_samples = interior_pts.size() + boundary_pts.size();
  r.metrics["interior_min_u_minus_du_X"] = outs.empty() ? 0.0 : [&] {
    double mn = std::numeric_limits<double>::infinity();
    for (const auto& o : outs) mn = std::min(mn, o.margin);
    return mn;
  }();
  r.metrics["boundary_min_minus_du_X"] = b_margin;
  r.metrics["boundary_min_grad_u"] = b_grad;
  r.metrics["min_top_power"] = pos;
  r.metrics["max_top_power_rel_gap"] = rel;
  r.metrics["liouville_field_residual"] = x_res;
  r.wall_time_ms = sw.ms();
  return r.finalize();
}

enum class IdealExample { Ball, CotangentDisk };

/// (a) z ↦ z / sqrt(1 - |z|^4) on the ball; (b) (q, p) ↦ (q, p / (1 - |p|^2)).
inline SmoothMap interior_identification_map(IdealExample ex, int dim) {
  SmoothMap F;
  F.source_dim = F.target_dim = dim;
  if (ex == IdealExample::Ball) {
    F.eval = [](const Vec& z) { return Vec(z / std::sqrt(1.0 - z.squaredNorm() * z.squaredNorm())); };
  } else {
    const int k = dim / 2;
    F.eval = [k](const Vec& x) {
      Vec y = x;
      y.tail(k) /= 1.0 - x.tail(k).squaredNorm();
      return y;
    };
  }
  return F;
}

inline Vec interior_identification(IdealExample ex, const Vec& p) {
  const double u = ex == IdealExample::Ball ? 1.0 - p.squaredNorm() * p.squaredNorm()
                                            : 1.0 - p.tail(p.size() / 2).squaredNorm();
  if (!(u > 0.0)) throw DomainError("identification is defined on the open interior only", p);
  return interior_identification_map(ex, static_cast<int>(p.size()))(p);
}

/// Pullback of the target Liouville form under the identification equals λ/u.
inline CheckReport identification_check(const LiouvilleDomainData& d, IdealExample ex, const std::vector<Vec>& pts,
                                        double tol = 1e-8) {
  Stopwatch sw;
  CheckReport r;
  r.name = "interior identification for " + d.name;
  r.anchor = "interior of the ideal domain is symplectomorphic to the completion";
  r.residual_tolerance = tol;
  const int m = 2 * d.n;
  const KForm pulled = pullback(interior_identification_map(ex, m), d.lambda);
  const ScalarField u = d.u;
  for (const Vec& p : pts) {
    (void)interior_identification(ex, p);
    const Vec gap = pulled.coefficients(p) - d.lambda.coefficients(p) / u(p);
    r.residual(gap.lpNorm<Eigen::Infinity>() / std::max(1.0, d.lambda.coefficients(p).norm() / u(p)));
  }
  r.n_samples = pts.size();
  r.wall_time_ms = sw.ms();
  return r.finalize();
}

/// r^{n+2} [d(β/r)]^n with r = sqrt(u), differentiated numerically, against
/// ½(2u - du(X)) (dβ)^n; the right side is also the positivity margin.
inline CheckReport page_volume_identity(const LiouvilleDomainData& d, const std::vector<Vec>& pts,
                                        double rel_tol = 1e-8) {
  Stopwatch sw;
  CheckReport r;
  r.name = "page volume identity for " + d.name;
  r.anchor = "trivial monodromy: r^{n+2} [d(beta/r)]^n = (2u - du(X))/2 (d beta)^n is a positive volume form";
  r.residual_tolerance = rel_tol;
  const int m = 2 * d.n;
  const ScalarField u = d.u;
  const KForm lam = d.lambda;
  const KForm over_r =
      KForm::one_form(m, [u, lam](const Vec& p) { return Vec(lam.coefficients(p) / std::sqrt(u(p))); });
  const KForm lhs_form = power(ext_deriv(over_r, DiffStep{1e-3, true, [u](const Vec& p) { return std::min(1.0, u(p)); }}), d.n);
  const KForm top_c = power(d.dlambda, d.n);
  const Mat I = Mat::Identity(m, m);
  struct Out {
    double rel, rhs;
  };
  const auto outs = parallel_map<Out>(pts.size(), [&](std::size_t i) {
    const Vec& p = pts[i];
    const double up = u(p);
    const double lhs = std::pow(up, 0.5 * (d.n + 2)) * lhs_form(p, I);
    const double c_top = top_c(p, I);
    const double rhs = 0.5 * (2.0 * up - u.gradient(p).dot(d.X(p))) * c_top;
    return Out{relative_gap(lhs, rhs), c_top > 0 ? rhs : -rhs};
  });
  for (const auto& o : outs) {
    r.residual(o.rel);
    r.margin(o.rhs);
  }
  r.n_samples = pts.size();
  r.wall_time_ms = sw.ms();
  return r.finalize();
}

struct WeinsteinData {
  std::string name;
  KForm lambda;
  KForm omega;
  VecField X;
  ScalarField f;
  double delta = 0.0;
};

/// ℂ with ω0, X = ½(x∂x + y∂y), f = x^2 + y^2.
inline WeinsteinData weinstein_plane(double delta) {
  return {"C", catalog::alpha0(1), catalog::omega0(1), VecField{2, [](const Vec& p) { return Vec(0.5 * p); }},
          scalar_field(
              2, [](const Vec& p) { return p.squaredNorm(); }, [](const Vec& p) { return Vec(2.0 * p); }),
          delta};
}

/// T*T^2 in (q1, q2, p1, p2) with λ = -p dq, X = p∂p, f = p1^2 + p2^2.
inline WeinsteinData weinstein_cotangent_torus(double delta) {
  const LiouvilleDomainData d = cotangent_disk_domain(2);
  return {"T*T2", d.lambda, d.dlambda, d.X,
          scalar_field(
              4, [](const Vec& x) { return x.tail(2).squaredNorm(); },
              [](const Vec& x) {
                Vec g = Vec::Zero(4);
                g.tail(2) = 2.0 * x.tail(2);
                return g;
              }),
          delta};
}

/// Lyapunov inequality df(X) >= δ(|X|^2 + |df|^2) in the ambient Euclidean
/// metric, strict at every sample, plus ι_X ω = λ.
inline CheckReport weinstein_check(const WeinsteinData& w, const std::vector<Vec>& pts, double liouville_tol = 1e-8) {
  Stopwatch sw;
  CheckReport r;
  r.name = "Lyapunov inequality on " + w.name;
  r.anchor = "Weinstein: f is a Lyapunov function for X, df(X) >= delta (|X|^2 + |df|^2)";
  r.tolerance = 0.0;
  r.residual_tolerance = liouville_tol;
  const KForm gap_form = interior(w.X, w.omega) - w.lambda;
  double best_delta = std::numeric_limits<double>::infinity();
  for (const Vec& p : pts) {
    const Vec x = w.X(p), g = w.f.gradient(p);
    const double dfx = g.dot(x), q = x.squaredNorm() + g.squaredNorm();
    r.margin(dfx - w.delta * q);
    if (q > 0) best_delta = std::min(best_delta, dfx / q);
    r.residual(gap_form.coefficients(p).lpNorm<Eigen::Infinity>());
  }
  r.n_samples = pts.size();
  r.metrics["delta"] = w.delta;
  r.metrics["largest_admissible_delta_on_samples"] = best_delta;
  r.wall_time_ms = sw.ms();
  return r.finalize();
}

/// Samples on the annulus r_min <= |z| <= r_max in the first pair of
/// coordinates, with any remaining coordinates uniform angles.
inline std::vector<Vec> annulus_samples(int dim, int radial_dim, double r_min, double r_max, std::size_t count,
                                        std::uint64_t seed, int radial_offset = 0) {
  std::vector<Vec> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto rng = stream(seed, i);
    std::uniform_real_distribution<double> A(0.0, kTwoPi);
    Vec x(dim);
    for (int j = 0; j < dim; ++j) x[j] = A(rng);
    x.segment(radial_offset, radial_dim) = detail::ball_point(rng, radial_dim, r_min, r_max);
    out[i] = x;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trivial monodromy hypersurface.

/// V = {u(p) - x^2 - y^2 = 0} in F x C, ambient coordinates (p, x, y).
struct Hypersurface {
  LiouvilleDomainData F;
  Submanifold V;
  ContactFormData contact;
  DefiningFunction f;
  RepresentationData representation() const { return {contact, f}; }
};

/// Transversality u - du(X) > 0 is required; the contact form is
/// λ + ½(x dy - y dx) restricted to V and the defining function is z.
inline Hypersurface hypersurface_build(const LiouvilleDomainData& F, const std::vector<Vec>& interior_pts,
                                       const std::vector<Vec>& boundary_pts, double tolerance = 0.0) {
  const CheckReport c = completion_check(F, interior_pts, boundary_pts, tolerance);
  if (!c.pass) {
    std::string why = "completion conditions fail for " + F.name;
    if (c.min_margin) why += ": transversality margin " + std::to_string(*c.min_margin);
    throw PreconditionError(why);
  }
  const int m = 2 * F.n, M = m + 2;
  Hypersurface h;
  h.F = F;
  const ScalarField u = F.u;
  const Submanifold Fs = F.F;
  h.V.name = "V in " + F.name + " x C";
  h.V.ambient_dim = M;
  h.V.codim = 1;
  h.V.constraints = [u, m](const Vec& x) {
    Vec c(1);
    c[0] = u(x.head(m)) - x[m] * x[m] - x[m + 1] * x[m + 1];
    return c;
  };
  h.V.jacobian_fn = [u, m](const Vec& x) {
    Mat J(1, m + 2);
    J.block(0, 0, 1, m) = u.gradient(x.head(m)).transpose();
    J(0, m) = -2.0 * x[m];
    J(0, m + 1) = -2.0 * x[m + 1];
    return J;
  };
  h.V.periodic.assign(static_cast<std::size_t>(M), false);
  // Liouville field X + ½(x∂x + y∂y) points outward: orient V with it last.
  h.V.orientation = -1;
  h.V.sampler = [Fs, u, m](std::mt19937_64& rng) {
    const Vec p = Fs.sampler(rng);
    std::uniform_real_distribution<double> A(0.0, kTwoPi);
    const double t = A(rng), rad = std::sqrt(std::max(0.0, u(p)));
    Vec x(m + 2);
    x << p, rad * std::cos(t), rad * std::sin(t);
    return x;
  };
  const KForm lam = extend(F.lambda, M);
  const KForm alpha = lam + KForm::one_form(M, [m](const Vec& x) {
                        Vec c = Vec::Zero(m + 2);
                        c[m] = -0.5 * x[m + 1];
                        c[m + 1] = 0.5 * x[m];
                        return c;
                      });
  Vec w = Vec::Zero(detail::binom(M, 2));
  w[detail::rank_of((1u << m) | (1u << (m + 1)))] = 1.0;
  const KForm dalpha = extend(F.dlambda, M) + KForm::constant(M, 2, w);
  h.contact = make_contact(alpha, h.V, F.n, dalpha);
  h.f.dim = M;
  h.f.value = [m](const Vec& x) { return cplx(x[m], x[m + 1]); };
  h.f.gradient_fn = [m](const Vec&) {
    Mat G = Mat::Zero(2, m + 2);
    G(0, m) = 1.0;
    G(1, m + 1) = 1.0;
    return G;
  };
  return h;
}

/// Binding ∂F x {0} with samples drawn from the boundary of F.
inline Submanifold hypersurface_binding(const Hypersurface& h) {
  Submanifold K = binding(h.V, h.f);
  const Sampler bs = h.F.boundary_sampler;
  K.sampler = [bs](std::mt19937_64& rng) {
    const Vec p = bs(rng);
    Vec x = Vec::Zero(p.size() + 2);
    x.head(p.size()) = p;
    return x;
  };
  return K;
}

/// Orientation test for V: the Liouville field of F x C is transverse to V,
/// dH(X_L) = du(X) - |z|^2 < 0 with H = u - |z|^2.
inline CheckReport transversality_check(const Hypersurface& h, const std::vector<Vec>& pts, double tolerance = 0.0) {
  Stopwatch sw;
  CheckReport r;
  r.name = "Liouville field transverse to V";
  r.anchor = "trivial monodromy: du(X_L) - |z|^2 = du(X_L) - u < 0";
  r.tolerance = tolerance;
  const int m = 2 * h.F.n;
  for (const Vec& x : pts) {
    const Vec p = x.head(m);
    const double dhx = h.F.u.gradient(p).dot(h.F.X(p)) - x[m] * x[m] - x[m + 1] * x[m + 1];
    r.margin(-dhx);
  }
  r.n_samples = pts.size();
  r.wall_time_ms = sw.ms();
  return r.finalize();
}

/// 2π∂θ on V, the rotation of the C factor.
inline VecField angular_rotation(const Hypersurface& h) {
  const int m = 2 * h.F.n;
  return VecField{m + 2, [m](const Vec& x) {
                    Vec v = Vec::Zero(m + 2);
                    v[m] = -kTwoPi * x[m + 1];
                    v[m + 1] = kTwoPi * x[m];
                    return v;
                  }};
}

/// Time-t flow of 2π∂θ in closed form (rotation of z by 2πt).
inline Vec angular_rotation_flow(const Hypersurface& h, const Vec& x, double t) {
  const int m = 2 * h.F.n;
  const double c = std::cos(kTwoPi * t), s = std::sin(kTwoPi * t);
  Vec y = x;
  y[m] = c * x[m] - s * x[m + 1];
  y[m + 1] = s * x[m] + c * x[m + 1];
  return y;
}

/// Time-one flow of 2π∂θ: closed form and RK4 both return to the start.
inline CheckReport trivial_monodromy_check(const Hypersurface& h, const std::vector<Vec>& pts, double tol = 1e-8,
                                           double rk4_step = 1e-3) {
  Stopwatch sw;
  CheckReport r;
  r.name = "trivial monodromy of V";
  r.anchor = "trivial monodromy: the time-one flow of 2 pi d/d theta is the identity";
  r.residual_tolerance = tol;
  const VecField Y = angular_rotation(h);
  FlowOptions opt;
  opt.step = rk4_step;
  opt.residual_tol = 1e-9;
  double exact = 0, numeric = 0;
  for (const Vec& x : pts) {
    exact = std::max(exact, (angular_rotation_flow(h, x, 1.0) - x).lpNorm<Eigen::Infinity>());
    const FlowState s = flow(h.V, [&Y](const Vec& p) { return Y(p); }, x, 1.0, opt);
    numeric = std::max(numeric, (s.point - x).lpNorm<Eigen::Infinity>());
  }
  r.residual(exact);
  r.residual(numeric);
  r.n_samples = pts.size();
  r.metrics["closed_form_return_gap"] = exact;
  r.metrics["rk4_return_gap"] = numeric;
  r.wall_time_ms = sw.ms();
  return r.finalize();
}

/// Collar profile on s in (-width, 0]: -s^2 near 0, s near -width, blended
/// by a quintic step; increasing for s < 0.
struct CollarProfile {
  double width = 0.2;
  double join = 0.05;  // the profile equals -s^2 on [-join, 0]

  double operator()(double s) const {
    if (s <= -width) return s;
    const double w = catalog::smoothstep(s, -width, -join);
    return (1.0 - w) * s - w * s * s;
  }
  double derivative(double s) const {
    if (s <= -width) return 1.0;
    const double w = catalog::smoothstep(s, -width, -join);
    const double dw = catalog::smoothstep_derivative(s, -width, -join);
    return (1.0 - w) - 2.0 * w * s + dw * (-s * s - s);
  }
};

/// Page embedding of a radial domain (ball) into V at angle θ: p ↦ (φ(p),
/// sqrt(u(φ(p))) e^{iθ}), where φ moves |p| - 1 by the collar profile. The
/// second factor then extends smoothly to the boundary.
inline Vec ball_page_embedding(const Hypersurface& h, const Vec& p, double theta, CollarProfile g = {}) {
  const int m = 2 * h.F.n;
  const double r = p.norm();
  Vec q = p;
  if (r > 1.0 - g.width && r > 0) q = p * ((1.0 + g(r - 1.0)) / r);
  const double ut = std::sqrt(std::max(0.0, h.F.u(q)));
  Vec x(m + 2);
  x << q, ut * std::cos(theta), ut * std::sin(theta);
  return x;
}

// ---------------------------------------------------------------------------
// Subcritical filling coordinates.

/// (w, x, y, φ1, φ2) ↦ (w, q1, q2, p1, p2) = (w, -φ1 - y, φ2 + x, x, y) from
/// W x C x T^2 to W x T*T^2; w has dimension dim_w.
inline SmoothMap subcritical_map(int dim_w) {
  const int M = dim_w + 4;
  SmoothMap F;
  F.source_dim = F.target_dim = M;
  F.eval = [dim_w](const Vec& s) {
    Vec t = s;
    const double x = s[dim_w], y = s[dim_w + 1], a = s[dim_w + 2], b = s[dim_w + 3];
    t[dim_w] = -a - y;
    t[dim_w + 1] = b + x;
    t[dim_w + 2] = x;
    t[dim_w + 3] = y;
    return t;
  };
  F.jacobian_fn = [dim_w, M](const Vec&) {
    Mat J = Mat::Identity(M, M);
    J.block(dim_w, dim_w, 4, 4) << 0, -1, -1, 0,  //
        1, 0, 0, 1,                                 //
        1, 0, 0, 0,                                 //
        0, 1, 0, 0;
    return J;
  };
  return F;
}

inline Vec subcritical_coordinates(const Vec& s, int dim_w) { return subcritical_map(dim_w)(s); }

/// λ_W + sign·Σ p dq on W x T*T^2 (sign = -1 is the cotangent convention).
inline KForm target_liouville_form(const KForm& lambda_w, int sign) {
  const int dw = lambda_w.ambient_dim(), M = dw + 4;
  return extend(lambda_w, M) + KForm::one_form(M, [dw, sign](const Vec& t) {
           Vec c = Vec::Zero(dw + 4);
           c[dw] = sign * t[dw + 2];
           c[dw + 1] = sign * t[dw + 3];
           return c;
         });
}

/// λ_W + x dy - y dx + x dφ1 - y dφ2 on W x C x T^2.
inline KForm source_liouville_form(const KForm& lambda_w) {
  const int dw = lambda_w.ambient_dim(), M = dw + 4;
  return extend(lambda_w, M) + KForm::one_form(M, [dw](const Vec& s) {
           Vec c = Vec::Zero(dw + 4);
           const double x = s[dw], y = s[dw + 1];
           c[dw] = -y;
           c[dw + 1] = x;
           c[dw + 2] = x;
           c[dw + 3] = -y;
           return c;
         });
}

/// Pullback of λ_W + λ_can equals the source Liouville form; both cotangent
/// sign conventions are tried and the one that matches is recorded. Also
/// checks f + p1^2 + p2^2 pulls back to f + x^2 + y^2 bit for bit, and
/// det = ±1 for the Jacobian.
inline CheckReport subcritical_check(const WeinsteinData& W, const std::vector<Vec>& pts, double tol = 1e-10) {
  Stopwatch sw;
  CheckReport r;
  r.name = "subcritical filling coordinates";
  r.anchor = "subcritical filling: (q1, q2; p1, p2) = (-phi1 - y, phi2 + x; x, y) is the desired contactomorphism";
  r.residual_tolerance = tol;
  const int dw = W.lambda.ambient_dim();
  const SmoothMap F = subcritical_map(dw);
  const KForm src = source_liouville_form(W.lambda);
  double gap[2] = {0, 0};
  const int signs[2] = {-1, 1};
  for (int k = 0; k < 2; ++k) {
    const KForm pulled = pullback(F, target_liouville_form(W.lambda, signs[k]));
    for (const Vec& s : pts) gap[k] = std::max(gap[k], (pulled.coefficients(s) - src.coefficients(s)).lpNorm<Eigen::Infinity>());
  }
  const int winner = gap[0] <= gap[1] ? 0 : 1;
  r.detail = winner == 0 ? "cotangent convention lambda_can = -sum p dq" : "cotangent convention lambda_can = +sum p dq";
  r.metrics["pullback_gap_minus_convention"] = gap[0];
  r.metrics["pullback_gap_plus_convention"] = gap[1];
  r.metrics["convention_sign"] = signs[winner];
  r.residual(gap[winner]);
  std::size_t exact_mismatch = 0;
  double det_gap = 0;
  for (const Vec& s : pts) {
    const Vec t = F(s);
    const double lhs = W.f(t.head(dw)) + t[dw + 2] * t[dw + 2] + t[dw + 3] * t[dw + 3];
    const double rhs = W.f(s.head(dw)) + s[dw] * s[dw] + s[dw + 1] * s[dw + 1];
    if (lhs != rhs) ++exact_mismatch;
    det_gap = std::max(det_gap, std::abs(std::abs(F.jacobian(s).determinant()) - 1.0));
  }
  if (exact_mismatch) r.fail("f + |p|^2 does not pull back to f + x^2 + y^2 exactly");
  if (!(det_gap <= 1e-14)) r.fail("Jacobian determinant is not +-1");
  r.metrics["exact_pullback_mismatches"] = static_cast<double>(exact_mismatch);
  r.metrics["jacobian_det_gap"] = det_gap;
  r.n_samples = pts.size();
  r.wall_time_ms = sw.ms();
  return r.finalize();
}

}  // namespace obv
