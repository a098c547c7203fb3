#pragma once

// Pre-Lagrangian submanifolds of V x T^2: Legendrian x T^2 inside a page and
// binding x T^2, Legendrian checks, and straightening of loops into loops
// positively transverse to the characteristic foliation.

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "obv/bourgeois.hpp"
#include "obv/catalog.hpp"
#include "obv/contact.hpp"
#include "obv/errors.hpp"
#include "obv/forms.hpp"
#include "obv/manifold.hpp"
#include "obv/monodromy.hpp"
#include "obv/report.hpp"

namespace obv {

struct PreLagrangianData {
  std::string name;
  Submanifold P;
  KForm alpha_hat;  // on the ambient space of the contact manifold
  int contact_dim = 0;
};

/// dim P = (dim V + 1)/2 and dα̂ vanishes on T_pP. α̂ itself is reported on
/// the tangent basis as metrics only.
inline CheckReport verify_prelagrangian(const PreLagrangianData& pl, const std::vector<Vec>& pts, double tol = 1e-7) {
  Stopwatch sw;
  CheckReport r;
  r.name = "pre-Lagrangian " + pl.name;
  r.anchor = "pre-Lagrangian: a contact form alpha with d alpha|TP = 0";
  r.residual_tolerance = tol;
  const int want = (pl.contact_dim + 1) / 2;
  r.metrics["dim_P"] = pl.P.dim();
  r.metrics["expected_dim"] = want;
  if (pl.contact_dim % 2 == 0 || pl.P.dim() != want) r.fail("dimension of P is not (dim V + 1)/2");
  const KForm da = ext_deriv(pl.alpha_hat, DiffStep{1e-4, true, {}});
  const auto gaps = parallel_map<double>(pts.size(), [&](std::size_t i) {
    const Mat E = tangent_basis(pl.P, pts[i]).vectors;
    return (E.transpose() * da.bilinear(pts[i]) * E).lpNorm<Eigen::Infinity>();
  });
  for (double g : gaps) r.residual(g);
  if (pts.empty()) r.residual(0.0);
  r.n_samples = pts.size();
  r.wall_time_ms = sw.ms();
  return r.finalize();
}

namespace detail {

/// Real unit circle {y = 0, |x| = 1} in C^2 with coordinates (x1, y1, x2, y2).
inline Vec real_circle_residual(const Vec& p) {
  Vec c(3);
  c << p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3] - 1.0, p[1], p[3];
  return c;
}

inline Mat real_circle_jacobian(const Vec& p, int ambient) {
  Mat J = Mat::Zero(3, ambient);
  for (int i = 0; i < 4; ++i) J(0, i) = 2.0 * p[i];
  J(1, 1) = 1.0;
  J(2, 3) = 1.0;
  return J;
}

}  // namespace detail

/// Three circles in S^3 given by two linear constraints on the sphere.
enum class CircleFixture { RealCircle, HopfFiber, BindingEquator };

/// Circles in S^3 ⊂ R^4: the real circle y = 0, the Hopf fiber z2 = z1, and
/// the equator z1 = 0 (the binding of z1).
inline Submanifold circle_in_sphere(CircleFixture which) {
  Submanifold L;
  L.ambient_dim = 4;
  L.codim = 3;
  L.periodic.assign(4, false);
  Mat A = Mat::Zero(2, 4);
  switch (which) {
    case CircleFixture::RealCircle:
      L.name = "real circle";
      A(0, 1) = 1.0;
      A(1, 3) = 1.0;
      break;
    case CircleFixture::HopfFiber:
      L.name = "Hopf fiber z2 = z1";
      A(0, 0) = -1.0, A(0, 2) = 1.0;
      A(1, 1) = -1.0, A(1, 3) = 1.0;
      break;
    case CircleFixture::BindingEquator:
      L.name = "equator z1 = 0";
      A(0, 0) = 1.0;
      A(1, 1) = 1.0;
      break;
  }
  L.constraints = [A](const Vec& p) {
    Vec c(3);
    c << p.squaredNorm() - 1.0, A * p;
    return c;
  };
  L.jacobian_fn = [A](const Vec& p) {
    Mat J(3, 4);
    J << 2.0 * p.transpose(), A;
    return J;
  };
  L.sampler = [A](std::mt19937_64& rng) {
    // a random point of the kernel of A, normalized
    Eigen::FullPivLU<Mat> lu(A);
    const Mat N = lu.kernel();
    Vec p = N * gaussian(rng, static_cast<int>(N.cols()));
    return Vec(p / p.norm());
  };
  return L;
}

/// α vanishes on T L, dim L = (dim V - 1)/2, L lies in a single page
/// (|f| > 0 and arg f constant).
inline CheckReport legendrian_check(const Submanifold& L, const KForm& alpha, const DefiningFunction& f,
                                    int contact_dim, const std::vector<Vec>& pts, double tol = 1e-9) {
  Stopwatch sw;
  CheckReport r;
  r.name = "Legendrian in a page: " + L.name;
  r.anchor = "closed Legendrian L contained in one page";
  r.residual_tolerance = tol;
  r.tolerance = 0.0;
  if (L.dim() != (contact_dim - 1) / 2) r.fail("dimension of L is not (dim V - 1)/2");
  double a_gap = 0, spread = 0, min_f = std::numeric_limits<double>::infinity();
  std::optional<double> theta0;
  for (const Vec& p : pts) {
    const Mat E = tangent_basis(L, p).vectors;
    a_gap = std::max(a_gap, (E.transpose() * alpha.coefficients(p)).lpNorm<Eigen::Infinity>());
    const cplx v = f(p);
    min_f = std::min(min_f, std::abs(v));
    const double th = std::arg(v);
    if (!theta0) theta0 = th;
    spread = std::max(spread, std::abs(std::remainder(th - *theta0, kTwoPi)));
  }
  r.residual(a_gap);
  r.margin(min_f);
  if (!(spread <= tol)) r.fail("arg f is not constant along L");
  r.n_samples = pts.size();
  r.metrics["alpha_on_TL"] = a_gap;
  r.metrics["theta_spread"] = spread;
  r.metrics["min_abs_f"] = min_f;
  r.wall_time_ms = sw.ms();
  return r.finalize();
}

/// Smooth bump: 1 for d <= inner, 0 for d >= outer.
struct Bump {
  double inner = 0.1;
  double outer = 0.3;
  double operator()(double d) const { return 1.0 - catalog::smoothstep(d, inner, outer); }
};

/// Euclidean distance in R^4 from (x, y) to the real unit circle.
inline double distance_to_real_circle(const Vec& p) {
  const double y2 = p[1] * p[1] + p[3] * p[3];
  const double rx = std::hypot(p[0], p[2]);
  return std::sqrt(y2 + (rx - 1.0) * (rx - 1.0));
}

/// L x T^2 for the real circle L on the zero page of z1^2 + z2^2 on S^3, with
/// α̂ = (Bourgeois form)/f̂, f̂ = b(d) Re f + (1 - b(d)) and d the distance to L.
inline PreLagrangianData real_circle_prelagrangian(Bump b = {}) {
  const RepresentationData rep = catalog::standard_g2(2);
  const BourgeoisFormData bf = bourgeois_form(rep);
  PreLagrangianData pl;
  pl.name = "real circle x T2";
  pl.contact_dim = 5;
  Submanifold& P = pl.P;
  P.name = "L x T2";
  P.ambient_dim = 6;
  P.codim = 3;
  P.constraints = [](const Vec& p) { return detail::real_circle_residual(p); };
  P.jacobian_fn = [](const Vec& p) { return detail::real_circle_jacobian(p, 6); };
  P.periodic = {false, false, false, false, true, true};
  P.sampler = [](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> A(0.0, kTwoPi);
    const double t = A(rng);
    Vec x(6);
    x << std::cos(t), 0.0, std::sin(t), 0.0, A(rng), A(rng);
    return x;
  };
  const DefiningFunction f = rep.f;
  const KForm alpha = bf.alpha;
  pl.alpha_hat = KForm::one_form(6, [f, alpha, b](const Vec& p) {
    const double w = b(distance_to_real_circle(p));
    const double fhat = w * f(p.head(4)).real() + (1.0 - w);
    return Vec(alpha.coefficients(p) / fhat);
  });
  return pl;
}

/// K x T^2 for the binding circle z2 = i z1 of z1^2 + z2^2 on S^3, with the
/// Bourgeois form itself (both f_x and f_y vanish on K x T^2).
inline PreLagrangianData binding_prelagrangian() {
  const RepresentationData rep = catalog::standard_g2(2);
  PreLagrangianData pl;
  pl.name = "binding x T2";
  pl.contact_dim = 5;
  Submanifold& P = pl.P;
  P.name = "K x T2";
  P.ambient_dim = 6;
  P.codim = 3;
  // z2 = i z1: x2 = -y1, y2 = x1
  P.constraints = [](const Vec& p) {
    Vec c(3);
    c << p.head(4).squaredNorm() - 1.0, p[2] + p[1], p[3] - p[0];
    return c;
  };
  P.jacobian_fn = [](const Vec& p) {
    Mat J = Mat::Zero(3, 6);
    for (int i = 0; i < 4; ++i) J(0, i) = 2.0 * p[i];
    J(1, 2) = 1.0, J(1, 1) = 1.0;
    J(2, 3) = 1.0, J(2, 0) = -1.0;
    return J;
  };
  P.periodic = {false, false, false, false, true, true};
  P.sampler = [](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> A(0.0, kTwoPi);
    const double t = A(rng), s = std::sqrt(0.5);
    const double a = s * std::cos(t), c = s * std::sin(t);
    Vec x(6);
    x << a, c, -c, a, A(rng), A(rng);
    return x;
  };
  pl.alpha_hat = bourgeois_form(rep).alpha;
  return pl;
}

/// The same K x T^2 with the φ2 circle dropped: dimension 2, not 3.
inline PreLagrangianData wrong_dimension_fixture() {
  PreLagrangianData pl = binding_prelagrangian();
  pl.name = "binding x S1 (wrong dimension)";
  const Submanifold P0 = pl.P;
  pl.P.name = "K x S1";
  pl.P.codim = 4;
  pl.P.constraints = [P0](const Vec& p) {
    Vec c(4);
    c << P0.constraints(p), p[5];
    return c;
  };
  pl.P.jacobian_fn = [P0](const Vec& p) {
    Mat J = Mat::Zero(4, 6);
    J.topRows(3) = P0.jacobian(p);
    J(3, 5) = 1.0;
    return J;
  };
  auto s0 = P0.sampler;
  pl.P.sampler = [s0](std::mt19937_64& rng) {
    Vec x = s0(rng);
    x[5] = 0.0;
    return x;
  };
  return pl;
}

/// Max |f_x| + |f_y| over samples of K x T^2; zero bit for bit when f is
/// evaluated analytically.
inline double torus_part_on_binding(const std::vector<Vec>& pts) {
  const DefiningFunction f = catalog::g2(2);
  double worst = 0;
  for (const Vec& p : pts) {
    const cplx v = f(p.head(4));
    worst = std::max(worst, std::abs(v.real()) + std::abs(v.imag()));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Loop straightening.

struct LoopData {
  std::function<Vec(double)> gamma;       // t in [0, 2π]
  std::function<Vec(double)> derivative;  // optional; central differences otherwise
  std::vector<bool> periodic;             // coordinates taken mod 2π

  Vec velocity(double t) const {
    if (derivative) return derivative(t);
    const double h = 1e-3;
    // five-point stencil; the coordinates are unwrapped by the formula for γ
    return (-gamma(t + 2 * h) + 8.0 * gamma(t + h) - 8.0 * gamma(t - h) + gamma(t - 2 * h)) / (12.0 * h);
  }
};

/// Flow of a field Y on P with α(Y) = 1, either in closed form or by RK4.
struct TransverseFlow {
  VecField Y;
  std::function<Vec(const Vec&, double)> closed_form;
};

/// Y = ∂ in one angular coordinate, flowing by an exact shift.
inline TransverseFlow coordinate_shift(int dim, int index) {
  TransverseFlow F;
  F.Y = VecField{dim, [dim, index](const Vec&) {
                   Vec v = Vec::Zero(dim);
                   v[index] = 1.0;
                   return v;
                 }};
  F.closed_form = [index](const Vec& p, double s) {
    Vec q = p;
    q[index] += s;
    return q;
  };
  return F;
}

struct StraightenOptions {
  int grid = 2048;          // Simpson intervals on [0, 2π]
  double tol = 1e-5;        // α(γ̃') = C/2π
  double integral_tol = 1e-6;
  double closure_tol = 1e-10;
  double field_tol = 1e-8;  // α(Y) = 1
  double drift_tol = 1e-8;  // flowed points stay on P
};

struct StraightenResult {
  LoopData loop;
  double C = 0;
  double C_out = 0;
  CheckReport report;
};

inline double simpson(const std::vector<double>& y, double h) {
  const std::size_t N = y.size() - 1;
  if (N % 2) throw PreconditionError("Simpson needs an even number of intervals");
  double s = y.front() + y.back();
  for (std::size_t i = 1; i < N; ++i) s += (i % 2 ? 4.0 : 2.0) * y[i];
  return s * h / 3.0;
}

/// g(t) = α(γ'(t)), C = ∮ α, f(t) = C t/2π - ∫_0^t g, and γ̃(t) = Φ_{f(t)}(γ(t)).
/// Throws PreconditionError for C <= 0 or α(Y) != 1, DomainError when the
/// flow leaves P.
inline StraightenResult straighten_loop(const LoopData& loop, const PreLagrangianData& pl, const TransverseFlow& Y,
                                        StraightenOptions opt = {}) {
  Stopwatch sw;
  const KForm alpha = pl.alpha_hat;
  auto g = [&](double t) { return alpha.coefficients(loop.gamma(t)).dot(loop.velocity(t)); };
  const int N = opt.grid;
  const double h = kTwoPi / N;
  std::vector<double> gs(static_cast<std::size_t>(N) + 1);
  for (int i = 0; i <= N; ++i) gs[static_cast<std::size_t>(i)] = g(i * h);
  const double C = simpson(gs, h);
  if (!(C > 0.0)) throw PreconditionError("loop integral of alpha is not positive: C = " + std::to_string(C));

  Vec start = loop.gamma(0.0), end = loop.gamma(kTwoPi);
  const double closure = periodic_distance(pl.P, start, end);
  if (!(closure <= opt.closure_tol)) throw PreconditionError("loop does not close up");

  const TransverseFlow Yc = Y;
  const Submanifold P = pl.P;
  auto flow_to = [Yc, P, opt](const Vec& p, double s) -> Vec {
    if (Yc.closed_form) return Yc.closed_form(p, s);
    FlowOptions fo;
    fo.step = 1e-3;
    fo.residual_tol = opt.drift_tol;
    return flow(P, [Yc](const Vec& x) { return Yc.Y(x); }, p, s, fo).point;
  };

  CheckReport r;
  r.name = "loop straightening on " + pl.name;
  r.anchor = "exact pre-Lagrangian: f(t) = C t / 2 pi - int_0^t g(s) ds straightens loops";
  r.residual_tolerance = opt.tol;
  double field_gap = 0;
  for (int i = 0; i < N; i += N / 64) {
    const Vec p = loop.gamma(i * h);
    const Vec y = Y.Y(p);
    field_gap = std::max(field_gap, std::abs(alpha.coefficients(p).dot(y) - 1.0));
    // Y tangent to P
    field_gap = std::max(field_gap, (P.jacobian(p) * y).lpNorm<Eigen::Infinity>());
  }
  if (!(field_gap <= opt.field_tol)) throw PreconditionError("Y is not tangent to P with alpha(Y) = 1");

  // f(t) = C t/2π - ∫_0^t g, the integral by 20-point Gauss-Legendre on
  // panels of width at most 2π/64
  const LoopData base = loop;
  auto fn = [base, C, alpha](double t) {
    using GL = boost::math::quadrature::gauss<double, 20>;
    auto gg = [&](double s) { return alpha.coefficients(base.gamma(s)).dot(base.velocity(s)); };
    const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(t) / (kTwoPi / 64.0))));
    double s = 0;
    for (int k = 0; k < panels; ++k) s += GL::integrate(gg, t * k / panels, t * (k + 1) / panels);
    return C * t / kTwoPi - s;
  };
  const auto fs = parallel_map<double>(static_cast<std::size_t>(N) + 1, [&](std::size_t i) { return fn(i * h); });
  StraightenResult out;
  out.C = C;
  out.loop.periodic = loop.periodic;
  out.loop.gamma = [base, fn, flow_to](double t) { return flow_to(base.gamma(t), fn(t)); };

  double drift = 0;
  std::vector<double> gt(static_cast<std::size_t>(N) + 1);
  const auto vals = parallel_map<std::pair<double, double>>(static_cast<std::size_t>(N) + 1, [&](std::size_t i) {
    const double t = static_cast<double>(i) * h;
    const Vec q = out.loop.gamma(t);
    return std::make_pair(alpha.coefficients(q).dot(out.loop.velocity(t)), P.residual(q).norm());
  });
  double worst = 0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    gt[i] = vals[i].first;
    worst = std::max(worst, std::abs(vals[i].first - C / kTwoPi));
    drift = std::max(drift, vals[i].second);
  }
  if (!(drift <= opt.drift_tol)) throw DomainError("flow of Y leaves P; drift " + std::to_string(drift), loop.gamma(0.0));
  r.residual(worst);
  out.C_out = simpson(gt, h);
  const double int_gap = std::abs(out.C_out - C);
  if (!(int_gap <= opt.integral_tol)) r.fail("loop integral of alpha changed under straightening");
  const double f_end = std::max(std::abs(fs.front()), std::abs(fs.back()));
  const double out_closure = periodic_distance(P, out.loop.gamma(0.0), out.loop.gamma(kTwoPi));
  if (!(out_closure <= opt.closure_tol + 1e-9)) r.fail("straightened loop does not close up");
  r.n_samples = static_cast<std::size_t>(N) + 1;
  r.metrics["C"] = C;
  r.metrics["C_out"] = out.C_out;
  r.metrics["integral_gap"] = int_gap;
  r.metrics["max_abs_f_endpoints"] = f_end;
  r.metrics["closure_gap"] = out_closure;
  r.metrics["max_drift"] = drift;
  r.metrics["field_gap"] = field_gap;
  double fmax = 0;
  for (double v : fs) fmax = std::max(fmax, std::abs(v));
  r.metrics["max_abs_f"] = fmax;
  r.wall_time_ms = sw.ms();
  out.report = r.finalize();
  return out;
}

/// t ↦ (cos t, 0, sin t, 0, φ1(t), 0) on L x T^2 for the given φ1.
inline LoopData real_circle_loop(std::function<double(double)> phi1, std::function<double(double)> dphi1) {
  LoopData L;
  L.periodic = {false, false, false, false, true, true};
  L.gamma = [phi1](double t) {
    Vec x(6);
    x << std::cos(t), 0.0, std::sin(t), 0.0, phi1(t), 0.0;
    return x;
  };
  L.derivative = [dphi1](double t) {
    Vec v(6);
    v << -std::sin(t), 0.0, std::cos(t), 0.0, dphi1(t), 0.0;
    return v;
  };
  return L;
}

}  // namespace obv
