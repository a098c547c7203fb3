#pragma once

// Contact forms, Reeb fields, and open books given by a defining function
// f = f_x + i f_y. Quantities that would divide by |f| are written through
//   rho drho   = f_x df_x + f_y df_y   (radial part)
//   rho^2 dθ   = f_x df_y - f_y df_x   (angular part)
// which stay smooth across the binding {f = 0}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "obv/errors.hpp"
#include "obv/forms.hpp"
#include "obv/manifold.hpp"
#include "obv/report.hpp"

namespace obv {

using cplx = std::complex<double>;

struct ContactFormData {
  KForm alpha;
  KForm dalpha;
  Submanifold manifold;
  int n = 0;  // manifold dimension is 2n + 1
};

/// Package α on M; dα is computed by finite differences unless supplied.
inline ContactFormData make_contact(KForm alpha, Submanifold M, int n, std::optional<KForm> dalpha = std::nullopt,
                                    DiffStep step = {}) {
  if (alpha.degree() != 1) throw DimensionError("contact form must be a 1-form");
  if (alpha.ambient_dim() != M.ambient_dim) throw DimensionError("contact form and manifold ambient dimensions differ");
  if (M.dim() != 2 * n + 1) throw DimensionError("contact manifold must have dimension 2n+1");
  KForm d = dalpha ? *dalpha : ext_deriv(alpha, step);
  return {std::move(alpha), std::move(d), std::move(M), n};
}

/// α ∧ (dα)^n
inline KForm contact_volume(const ContactFormData& cf) { return wedge(cf.alpha, power(cf.dalpha, cf.n)); }

struct DefiningFunction {
  int dim = 0;
  std::function<cplx(const Vec&)> value;
  std::function<Mat(const Vec&)> gradient_fn;  // 2 x dim: rows grad f_x, grad f_y
  DiffStep step{1e-5, true, {}};

  cplx operator()(const Vec& p) const { return value(p); }

  Mat gradient(const Vec& p) const {
    if (gradient_fn) return gradient_fn(p);
    auto central = [&](double h) {
      Mat G(2, dim);
      Vec q = p;
      for (int i = 0; i < dim; ++i) {
        q[i] = p[i] + h;
        const cplx plus = value(q);
        q[i] = p[i] - h;
        const cplx minus = value(q);
        q[i] = p[i];
        const cplx d = (plus - minus) / (2.0 * h);
        G(0, i) = d.real();
        G(1, i) = d.imag();
      }
      return G;
    };
    const double h = step.at(p);
    Mat G = central(h);
    if (step.richardson) G = (4.0 * central(0.5 * h) - G) / 3.0;
    return G;
  }

  ScalarField fx() const {
    auto self = *this;
    return ScalarField{dim, [self](const Vec& p) { return self(p).real(); },
                       [self](const Vec& p) { return Vec(self.gradient(p).row(0).transpose()); }, step};
  }
  ScalarField fy() const {
    auto self = *this;
    return ScalarField{dim, [self](const Vec& p) { return self(p).imag(); },
                       [self](const Vec& p) { return Vec(self.gradient(p).row(1).transpose()); }, step};
  }
  KForm dfx() const { return fx().differential(); }
  KForm dfy() const { return fy().differential(); }

  /// f_x df_y - f_y df_x  (= |f|^2 dθ)
  KForm angular() const {
    auto self = *this;
    return KForm::one_form(dim, [self](const Vec& p) {
      const cplx f = self(p);
      const Mat G = self.gradient(p);
      return Vec(f.real() * G.row(1).transpose() - f.imag() * G.row(0).transpose());
    });
  }

  /// f_x df_x + f_y df_y  (= ½ d|f|^2)
  KForm radial() const {
    auto self = *this;
    return KForm::one_form(dim, [self](const Vec& p) {
      const cplx f = self(p);
      const Mat G = self.gradient(p);
      return Vec(f.real() * G.row(0).transpose() + f.imag() * G.row(1).transpose());
    });
  }

  /// df_x ∧ df_y (= rho drho ∧ dθ)
  KForm area() const {
    auto self = *this;
    return KForm(dim, 2, [self, m = dim](const Vec& p) {
      const Mat G = self.gradient(p);
      const auto& ms = detail::masks(m, 2);
      Vec c(static_cast<Eigen::Index>(ms.size()));
      for (std::size_t r = 0; r < ms.size(); ++r) {
        const int i = std::countr_zero(ms[r]);
        const int j = 31 - std::countl_zero(ms[r]);
        c[static_cast<Eigen::Index>(r)] = G(0, i) * G(1, j) - G(0, j) * G(1, i);
      }
      return c;
    });
  }

  DefiningFunction conjugate() const {
    DefiningFunction out = *this;
    auto v = value;
    out.value = [v](const Vec& p) { return std::conj(v(p)); };
    if (gradient_fn) {
      auto g = gradient_fn;
      out.gradient_fn = [g](const Vec& p) {
        Mat G = g(p);
        G.row(1) *= -1.0;
        return G;
      };
    }
    return out;
  }

  /// Multiply by a real function with known gradient.
  DefiningFunction scaled_by(const ScalarField& chi) const {
    DefiningFunction out = *this;
    auto self = *this;
    out.value = [self, chi](const Vec& p) { return chi(p) * self(p); };
    out.gradient_fn = [self, chi](const Vec& p) {
      const cplx f = self(p);
      const Vec dchi = chi.gradient(p);
      Mat G = chi(p) * self.gradient(p);
      G.row(0) += f.real() * dchi.transpose();
      G.row(1) += f.imag() * dchi.transpose();
      return G;
    };
    return out;
  }
};

struct RepresentationData {
  ContactFormData contact;
  DefiningFunction f;
};

/// K = V ∩ {f = 0}, oriented normals-first by (V's normals, grad f_x, grad f_y).
inline Submanifold binding(const Submanifold& V, const DefiningFunction& f, std::string name = {}) {
  auto fun = f;
  return intersect(
      V, 2,
      [fun](const Vec& p) {
        const cplx v = fun(p);
        Vec c(2);
        c << v.real(), v.imag();
        return c;
      },
      [fun](const Vec& p) { return fun.gradient(p); }, name.empty() ? "K(" + V.name + ")" : std::move(name));
}

inline Submanifold binding(const RepresentationData& rep) { return binding(rep.contact.manifold, rep.f); }

struct ReebOptions {
  double residual_tol = 1e-8;
  double rank_ratio = 1e-6;
  TangentOptions tangent{};
};

/// R with α(R) = 1 and dα(R, e_i) = 0 on a tangent basis, by least squares.
inline Vec reeb_field(const ContactFormData& cf, const Vec& p, ReebOptions opt = {}) {
  const OrientedBasis B = tangent_basis(cf.manifold, p, opt.tangent);
  const int d = cf.manifold.dim();
  const Vec a = B.vectors.transpose() * cf.alpha.coefficients(p);
  const Mat A = B.vectors.transpose() * cf.dalpha.bilinear(p) * B.vectors;
  Mat S(d + 1, d);
  S.row(0) = a.transpose();
  S.bottomRows(d) = A.transpose();
  Vec rhs = Vec::Zero(d + 1);
  rhs[0] = 1.0;
  Eigen::JacobiSVD<Mat> svd(S, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec sv = svd.singularValues();
  if (!(sv[d - 1] >= opt.rank_ratio * sv[0]))
    throw DegenerateError("Reeb system is rank deficient (form not contact here)", sv);
  const Vec c = svd.solve(rhs);
  const double res = (S * c - rhs).norm();
  if (!(res <= opt.residual_tol)) throw DegenerateError("Reeb system residual above tolerance", sv, res);
  return B.vectors * c;
}

/// min over samples of orientation * α∧(dα)^n on oriented orthonormal bases.
inline CheckReport verify_contact(const ContactFormData& cf, const std::vector<Vec>& samples, double tolerance,
                                  int orientation = 1, std::string name = "contact condition") {
  Stopwatch sw;
  CheckReport r;
  r.name = std::move(name);
  r.anchor = "contact condition alpha ^ (d alpha)^n > 0";
  r.tolerance = tolerance;
  r.n_samples = samples.size();
  const KForm vol = contact_volume(cf);
  const auto vals = parallel_map<double>(samples.size(), [&](std::size_t i) {
    const OrientedBasis B = tangent_basis(cf.manifold, samples[i]);
    return orientation * vol(samples[i], B.vectors);
  });
  for (double v : vals) r.margin(v);
  if (samples.empty()) r.fail("no samples");
  r.metrics["orientation"] = orientation;
  r.wall_time_ms = sw.ms();
  return r.finalize();
}

/// Regularized open-book volume form
///   n df_x∧df_y∧β∧(dβ)^{n-1} + (f_x df_y - f_y df_x)∧(dβ)^n
/// equal to |f|^{n+2} dθ ∧ (d(β/|f|))^n off the binding.
inline KForm openbook_volume_form(const RepresentationData& rep) {
  const auto& cf = rep.contact;
  const int n = cf.n;
  KForm second = wedge(rep.f.angular(), power(cf.dalpha, n));
  if (n == 0) return second;
  KForm first = wedge(wedge(rep.f.area(), cf.alpha), power(cf.dalpha, n - 1));
  return static_cast<double>(n) * first + second;
}

/// |f|^{n+2} dθ ∧ (dλ)^n with λ = α/|f| by direct differentiation; valid only
/// away from the binding. The step shrinks with |f|.
inline KForm quotient_volume_form(const RepresentationData& rep, double h = 1e-3) {
  const auto& cf = rep.contact;
  const int m = cf.alpha.ambient_dim();
  auto f = rep.f;
  auto alpha = cf.alpha;
  KForm lambda = KForm::one_form(m, [f, alpha](const Vec& p) {
    const double r = std::abs(f(p));
    if (!(r > 0.0)) throw DomainError("quotient by |f| at the binding", p);
    return Vec(alpha.coefficients(p) / r);
  });
  KForm theta = KForm::one_form(m, [f](const Vec& p) {
    const cplx v = f(p);
    const double r2 = std::norm(v);
    if (!(r2 > 0.0)) throw DomainError("angular form at the binding", p);
    const Mat G = f.gradient(p);
    return Vec((v.real() * G.row(1).transpose() - v.imag() * G.row(0).transpose()) / r2);
  });
  DiffStep step{h, true, [f](const Vec& p) { return std::min(1.0, std::abs(f(p))); }};
  KForm body = wedge(theta, power(ext_deriv(lambda, step), cf.n));
  const int n = cf.n;
  return KForm(m, body.degree(), [body, f, n](const Vec& p) {
    return Vec(std::pow(std::abs(f(p)), n + 2) * body.coefficients(p));
  });
}

/// Positivity of the regularized volume form on all samples (binding
/// included) and agreement with the quotient form where |f| >= exclusion.
inline CheckReport openbook_volume_check(const RepresentationData& rep, const std::vector<Vec>& off_binding,
                                         const std::vector<Vec>& on_binding, double tolerance,
                                         double rel_tol = 1e-8, double exclusion = 1e-3) {
  Stopwatch sw;
  CheckReport r;
  r.name = "open book volume form";
  r.anchor = "volume form from an open book, regularized across the binding";
  r.tolerance = tolerance;
  r.residual_tolerance = rel_tol;
  const KForm omega = openbook_volume_form(rep);
  const KForm quotient = quotient_volume_form(rep);
  const auto& V = rep.contact.manifold;
  struct Out {
    double value = 0, gap = 0;
    bool compared = false;
  };
  const auto off = parallel_map<Out>(off_binding.size(), [&](std::size_t i) {
    const Vec& p = off_binding[i];
    const OrientedBasis B = tangent_basis(V, p);
    Out o;
    o.value = omega(p, B.vectors);
    if (std::abs(rep.f(p)) >= exclusion) {
      o.gap = relative_gap(o.value, quotient(p, B.vectors));
      o.compared = true;
    }
    return o;
  });
  std::size_t compared = 0;
  for (const auto& o : off) {
    r.margin(o.value);
    if (o.compared) {
      r.residual(o.gap);
      ++compared;
    }
  }
  double binding_second_term = 0.0;
  const KForm second = wedge(rep.f.angular(), power(rep.contact.dalpha, rep.contact.n));
  const auto on = parallel_map<std::pair<double, double>>(on_binding.size(), [&](std::size_t i) {
    const Vec& p = on_binding[i];
    const OrientedBasis B = tangent_basis(V, p);
    return std::pair{omega(p, B.vectors), second(p, B.vectors)};
  });
  for (const auto& [v, s] : on) {
    r.margin(v);
    binding_second_term = std::max(binding_second_term, std::abs(s));
  }
  if (!r.max_residual) r.max_residual = 0.0;
  r.n_samples = off_binding.size() + on_binding.size();
  r.metrics["binding_samples"] = static_cast<double>(on_binding.size());
  r.metrics["compared_samples"] = static_cast<double>(compared);
  r.metrics["binding_angular_term_max"] = binding_second_term;
  r.wall_time_ms = sw.ms();
  return r.finalize();
}

/// Sufficient conditions for (α, h) to define a supporting open book:
///  (i)  α∧(dα)^{n-1}∧dh_x∧dh_y > 0 along the binding;
///  (ii) h_x dh_y(R) - h_y dh_x(R) > 0 off the binding (reported divided by |h|^2).
inline CheckReport verify_adapted(const ContactFormData& cf, const DefiningFunction& h,
                                  const std::vector<Vec>& off_binding, const std::vector<Vec>& on_binding,
                                  double tolerance, double exclusion = 1e-3) {
  if (on_binding.empty()) throw PreconditionError("binding sample set is empty; the binding must be non-empty");
  Stopwatch sw;
  CheckReport r;
  r.name = "adapted open book";
  r.anchor = "sufficient conditions for a contact open book";
  r.tolerance = tolerance;
  const KForm along = wedge(wedge(cf.alpha, power(cf.dalpha, cf.n - 1)), h.area());
  const KForm ang = h.angular();
  const auto bvals = parallel_map<double>(on_binding.size(), [&](std::size_t i) {
    const Vec& p = on_binding[i];
    return along(p, tangent_basis(cf.manifold, p).vectors);
  });
  double min_i = std::numeric_limits<double>::infinity();
  for (double v : bvals) min_i = std::min(min_i, v);
  std::size_t excluded = 0;
  const auto ovals = parallel_map<std::optional<double>>(off_binding.size(), [&](std::size_t i) -> std::optional<double> {
    const Vec& p = off_binding[i];
    const double r2 = std::norm(h(p));
    if (std::sqrt(r2) < exclusion) return std::nullopt;
    const Vec R = reeb_field(cf, p);
    return ang.coefficients(p).dot(R) / r2;
  });
  double min_ii = std::numeric_limits<double>::infinity();
  for (const auto& v : ovals) {
    if (v)
      min_ii = std::min(min_ii, *v);
    else
      ++excluded;
  }
  r.margin(min_i);
  r.margin(min_ii);
  r.n_samples = off_binding.size() + on_binding.size();
  r.metrics["binding_condition_min"] = min_i;
  r.metrics["reeb_angle_min"] = min_ii;
  r.metrics["excluded_near_binding"] = static_cast<double>(excluded);
  r.wall_time_ms = sw.ms();
  return r.finalize();
}

/// Check the pair (α, f) is a representation: 0 a regular value, binding
/// non-empty, θ a submersion, pages Liouville and α positive contact on K.
inline CheckReport verify_representation(const RepresentationData& rep, const std::vector<Vec>& off_binding,
                                         const std::vector<Vec>& on_binding, double tolerance,
                                         std::string name = "representation") {
  Stopwatch sw;
  CheckReport r;
  r.name = std::move(name);
  r.anchor = "contact open book pages carry ideal Liouville structures";
  r.tolerance = tolerance;
  const auto& cf = rep.contact;
  const auto& V = cf.manifold;
  const Submanifold K = binding(rep);
  const KForm omega = openbook_volume_form(rep);
  const KForm binding_contact = wedge(cf.alpha, power(cf.dalpha, cf.n - 1));
  const KForm ang = rep.f.angular();
  const double inf = std::numeric_limits<double>::infinity();

  // (i) regular value and (iv b) contact binding
  double regular = inf, binding_pos = inf, on_level = 0.0;
  std::size_t singular = 0;
  for (const Vec& p : on_binding) {
    on_level = std::max(on_level, std::abs(rep.f(p)));
    try {
      const OrientedBasis B = tangent_basis(K, p, {false});
      const Mat J = K.jacobian(p);
      Eigen::JacobiSVD<Mat> svd(J);
      const Vec sv = svd.singularValues();
      regular = std::min(regular, sv[sv.size() - 1] / sv[0]);
      binding_pos = std::min(binding_pos, binding_contact(p, B.vectors));
    } catch (const DegenerateError& e) {
      ++singular;
      regular = std::min(regular, e.singular_values()[e.singular_values().size() - 1]);
    }
  }
  if (singular > 0) r.fail("0 is not a regular value of f on V (" + std::to_string(singular) + " singular binding points)");
  // (ii) non-empty binding
  if (on_binding.empty() || !(on_level <= 1e-8)) r.fail("binding K is empty or samples are off K");
  // (iii) submersion of θ, (iv a) positivity of the page volume
  double submersion = inf, page = inf;
  std::size_t not_submersive = 0;
  auto visit = [&](const Vec& p) {
    const OrientedBasis B = tangent_basis(V, p);
    const double absf = std::abs(rep.f(p));
    if (absf >= 1e-6) {
      const double s = (B.vectors.transpose() * ang.coefficients(p)).norm() / (absf * absf);
      submersion = std::min(submersion, s);
      if (!(s > tolerance)) ++not_submersive;
    } else {
      const Mat G = rep.f.gradient(p) * B.vectors;
      Eigen::JacobiSVD<Mat> svd(G);
      const double s = svd.singularValues()[1];
      submersion = std::min(submersion, s);
      if (!(s > tolerance)) ++not_submersive;
    }
    page = std::min(page, omega(p, B.vectors));
  };
  for (const Vec& p : off_binding) visit(p);
  for (const Vec& p : on_binding) {
    try {
      visit(p);
    } catch (const DegenerateError&) {
    }
  }
  if (not_submersive > 0) r.fail("theta = f/|f| is not a submersion (" + std::to_string(not_submersive) + " points)");
  if (!(page > tolerance)) r.fail("page volume form not positive (ideal Liouville condition)");
  if (singular == 0 && !on_binding.empty() && !(binding_pos > tolerance)) r.fail("alpha is not a positive contact form on K");

  r.margin(page);
  r.margin(submersion);
  if (singular == 0 && !on_binding.empty()) r.margin(binding_pos);
  r.n_samples = off_binding.size() + on_binding.size();
  r.metrics["regular_value_ratio_min"] = regular;
  r.metrics["submersion_min"] = submersion;
  r.metrics["page_volume_min"] = page;
  r.metrics["binding_contact_min"] = binding_pos;
  r.wall_time_ms = sw.ms();
  return r.finalize();
}

}  // namespace obv
