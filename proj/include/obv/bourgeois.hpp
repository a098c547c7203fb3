#pragma once

// Bourgeois forms α_V + ε(f_x dφ1 - f_y dφ2) on V × T², the inverse-monodromy
// deformation α_V - C (f_x df_y - f_y df_x), its torus-shear isotopy, and the
// weak-filling polynomial T ↦ α_ε ∧ (T dα_ε + ω + dφ1∧dφ2)^{n+1}.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "obv/contact.hpp"
#include "obv/forms.hpp"
#include "obv/manifold.hpp"
#include "obv/report.hpp"

namespace obv {

struct BourgeoisFormData {
  RepresentationData base;
  Submanifold total;  // V × T², angles last
  KForm alpha;        // α_V + ε β
  KForm beta;         // f_x dφ1 - f_y dφ2
  int n = 0;          // dim V = 2n + 1
  double eps = 1.0;

  int phi1() const { return total.ambient_dim - 2; }
  int phi2() const { return total.ambient_dim - 1; }
};

/// β = f_x dφ1 - f_y dφ2 on the ambient space of V × T².
inline KForm torus_part(const DefiningFunction& f, int ambient) {
  const int m = ambient - 2;
  return KForm::one_form(ambient, [f, m](const Vec& p) {
    Vec c = Vec::Zero(m + 2);
    const cplx v = f(p.head(m));
    c[m] = v.real();
    c[m + 1] = -v.imag();
    return c;
  });
}

inline BourgeoisFormData bourgeois_form(const RepresentationData& rep, double eps = 1.0) {
  const Submanifold total = product_with_torus(rep.contact.manifold);
  const int M = total.ambient_dim;
  KForm beta = torus_part(rep.f, M);
  KForm alpha = extend(rep.contact.alpha, M) + eps * beta;
  return {rep, total, std::move(alpha), std::move(beta), rep.contact.n, eps};
}

/// dφ1 ∧ dφ2 on the ambient space of V × T².
inline KForm torus_volume(int ambient) {
  const int idx[2] = {ambient - 2, ambient - 1};
  return KForm::basis(ambient, idx);
}

/// (n+1)[n df_x∧df_y∧α_V∧(dα_V)^{n-1} + (f_x df_y - f_y df_x)∧(dα_V)^n]∧dφ1∧dφ2,
/// assembled from V-side data only.
inline KForm expanded_top_form(const BourgeoisFormData& bf) {
  const auto& cf = bf.base.contact;
  const int n = bf.n, M = bf.total.ambient_dim;
  KForm bracket = wedge(bf.base.f.angular(), power(cf.dalpha, n));
  if (n > 0) bracket = static_cast<double>(n) * wedge(wedge(bf.base.f.area(), cf.alpha), power(cf.dalpha, n - 1)) + bracket;
  return static_cast<double>(n + 1) * wedge(extend(bracket, M), torus_volume(M));
}

struct BgOptions {
  double tolerance = 1e-3;
  double rel_tol = 1e-8;
  DiffStep step{1e-5, false, {}};
};

/// α∧(dα)^{n+1} by direct exterior algebra (finite-difference dα), compared
/// with the expanded product formula and with (n+1) Ω_V ∧ dφ1∧dφ2.
inline CheckReport verify_bg_contact(const BourgeoisFormData& bf, const std::vector<Vec>& samples, BgOptions opt = {}) {
  Stopwatch sw;
  CheckReport r;
  r.name = "Bourgeois contact condition";
  r.anchor = "characterization of Bourgeois contact structures: expansion of alpha ^ (d alpha)^{n+1}";
  r.tolerance = opt.tolerance;
  r.residual_tolerance = opt.rel_tol;
  const int M = bf.total.ambient_dim;
  const KForm direct = wedge(bf.alpha, power(ext_deriv(bf.alpha, opt.step), bf.n + 1));
  const KForm expanded = (bf.eps * bf.eps) * expanded_top_form(bf);
  const KForm via_volume =
      (bf.eps * bf.eps * (bf.n + 1)) * wedge(extend(openbook_volume_form(bf.base), M), torus_volume(M));
  struct Out {
    double direct, gap_expanded, gap_volume;
  };
  const auto outs = parallel_map<Out>(samples.size(), [&](std::size_t i) {
    const Vec& p = samples[i];
    const Mat E = tangent_basis(bf.total, p).vectors;
    const double d = direct(p, E);
    return Out{d, relative_gap(d, expanded(p, E)), relative_gap(d, via_volume(p, E))};
  });
  double gexp = 0, gvol = 0;
  for (const auto& o : outs) {
    r.margin(o.direct);
    r.residual(std::max(o.gap_expanded, o.gap_volume));
    gexp = std::max(gexp, o.gap_expanded);
    gvol = std::max(gvol, o.gap_volume);
  }
  r.n_samples = samples.size();
  r.metrics["eps"] = bf.eps;
  r.metrics["gap_direct_vs_expanded"] = gexp;
  r.metrics["gap_direct_vs_volume"] = gvol;
  r.wall_time_ms = sw.ms();
  return r.finalize();
}

/// α_ε∧(dα_ε)^{n+1} = ε² α∧(dα)^{n+1} at every sample, for each ε.
inline CheckReport eps_scaling_check(const RepresentationData& rep, const std::vector<Vec>& samples,
                                     const std::vector<double>& eps_grid, double rel_tol = 1e-8) {
  Stopwatch sw;
  CheckReport r;
  r.name = "epsilon scaling of the Bourgeois volume";
  r.anchor = "epsilon-deformed Bourgeois forms: volume scales by eps^2";
  r.residual_tolerance = rel_tol;
  const BourgeoisFormData base = bourgeois_form(rep, 1.0);
  const KForm top1 = wedge(base.alpha, power(ext_deriv(base.alpha), base.n + 1));
  r.columns = {"eps", "max_rel_gap"};
  for (double eps : eps_grid) {
    const BourgeoisFormData bf = bourgeois_form(rep, eps);
    const KForm top = wedge(bf.alpha, power(ext_deriv(bf.alpha), bf.n + 1));
    const auto gaps = parallel_map<double>(samples.size(), [&](std::size_t i) {
      const Vec& p = samples[i];
      const Mat E = tangent_basis(bf.total, p).vectors;
      return relative_gap(top(p, E), eps * eps * top1(p, E));
    });
    double g = 0;
    for (double v : gaps) g = std::max(g, v);
    r.residual(g);
    r.rows.push_back({eps, g});
  }
  r.n_samples = samples.size() * eps_grid.size();
  r.wall_time_ms = sw.ms();
  return r.finalize();
}

/// Recover (α_V, f) from a form on V × T² at a fixed torus point: f_x is the
/// dφ1 coefficient, f_y minus the dφ2 coefficient, α_V the V components.
inline RepresentationData characterization_extract(const BourgeoisFormData& bf, double phi1, double phi2) {
  const int m = bf.base.contact.manifold.ambient_dim;
  const KForm alpha = bf.alpha;
  auto lift = [m, phi1, phi2](const Vec& p) {
    Vec q(m + 2);
    q << p, phi1, phi2;
    return q;
  };
  KForm alpha_V = KForm::one_form(m, [alpha, lift, m](const Vec& p) { return Vec(alpha.coefficients(lift(p)).head(m)); });
  DefiningFunction f;
  f.dim = m;
  f.value = [alpha, lift, m](const Vec& p) {
    const Vec c = alpha.coefficients(lift(p));
    return cplx(c[m], -c[m + 1]);
  };
  ContactFormData cf = make_contact(alpha_V, bf.base.contact.manifold, bf.n, std::nullopt);
  return {std::move(cf), std::move(f)};
}

/// Conditions (ii)-(iii) of the Bourgeois-type characterization: β kills
/// vectors tangent to V × {pt}, and α's coefficients do not depend on the angles.
inline CheckReport bg_structure_check(const BourgeoisFormData& bf, const std::vector<Vec>& samples, double tol = 1e-12) {
  Stopwatch sw;
  CheckReport r;
  r.name = "Bourgeois structure conditions";
  r.anchor = "beta vanishes on V-directions; slice restriction is angle independent";
  r.residual_tolerance = tol;
  const int m = bf.total.ambient_dim - 2;
  for (const Vec& p : samples) {
    const Mat E = tangent_basis(bf.total, p).vectors;
    const Vec b = bf.beta.coefficients(p);
    for (int j = 0; j < E.cols(); ++j) {
      Vec v = E.col(j);
      v[m] = v[m + 1] = 0.0;
      r.residual(std::abs(b.dot(v)));
    }
    Vec q = p;
    q[m] += 1.234;
    q[m + 1] -= 0.567;
    r.residual((bf.alpha.coefficients(q) - bf.alpha.coefficients(p)).lpNorm<Eigen::Infinity>());
  }
  r.n_samples = samples.size();
  r.wall_time_ms = sw.ms();
  return r.finalize();
}

/// α_- = α_+ - C (f_x df_y - f_y df_x), with exact dα_- = dα_+ - 2C df_x∧df_y.
inline ContactFormData inverse_form(const RepresentationData& rep, double C) {
  const auto& cf = rep.contact;
  KForm a = cf.alpha - C * rep.f.angular();
  KForm da = cf.dalpha - (2.0 * C) * rep.f.area();
  return make_contact(std::move(a), cf.manifold, cf.n, std::move(da));
}

struct InverseSearch {
  std::optional<double> C;
  CheckReport at_C;
  CheckReport at_2C;
  std::vector<std::pair<double, double>> tried;  // (C, min margin with reversed orientation)
};

/// Smallest C in {1, 2, 4, ..., 1024} for which α_- is contact with reversed
/// orientation, then the same check at 2C.
inline InverseSearch find_inverse_constant(const RepresentationData& rep, const std::vector<Vec>& samples,
                                           double tolerance) {
  InverseSearch out;
  for (double C = 1.0; C <= 1024.0; C *= 2.0) {
    CheckReport rep_c = verify_contact(inverse_form(rep, C), samples, tolerance, -1, "inverse form contact (reversed)");
    out.tried.emplace_back(C, rep_c.min_margin.value_or(-1.0));
    if (rep_c.pass) {
      out.C = C;
      out.at_C = rep_c;
      out.at_C.metrics["C"] = C;
      out.at_2C = verify_contact(inverse_form(rep, 2 * C), samples, tolerance, -1, "inverse form contact at 2C");
      out.at_2C.metrics["C"] = 2 * C;
      return out;
    }
    out.at_C = rep_c;
  }
  out.at_C.fail("no C up to 1024 makes the inverse form contact; try a larger C");
  out.at_C.finalize();
  return out;
}

/// α_- and α_+ agree on page tangent spaces and on the binding.
inline CheckReport inverse_restriction_check(const RepresentationData& rep, double C, const std::vector<Vec>& off_binding,
                                             const std::vector<Vec>& on_binding, double tol = 1e-10) {
  Stopwatch sw;
  CheckReport r;
  r.name = "inverse form restricts like the original";
  r.anchor = "alpha_- equals alpha_+ on pages and on the binding";
  r.residual_tolerance = tol;
  const ContactFormData minus = inverse_form(rep, C);
  const KForm ang = rep.f.angular();
  const Submanifold K = binding(rep);
  for (const Vec& p : off_binding) {
    if (std::abs(rep.f(p)) < 1e-6) continue;
    const OrientedBasis U = orient_page_basis(rep.contact.manifold, p, ang);
    const Vec diff = minus.alpha.coefficients(p) - rep.contact.alpha.coefficients(p);
    r.residual((U.vectors.transpose() * diff).lpNorm<Eigen::Infinity>());
  }
  for (const Vec& p : on_binding) {
    const Mat E = tangent_basis(K, p).vectors;
    const Vec diff = minus.alpha.coefficients(p) - rep.contact.alpha.coefficients(p);
    r.residual((E.transpose() * diff).lpNorm<Eigen::Infinity>());
  }
  r.n_samples = off_binding.size() + on_binding.size();
  r.metrics["C"] = C;
  r.wall_time_ms = sw.ms();
  return r.finalize();
}

/// Φ_τ(p; φ1, φ2) = (p; φ1 - τC f_y, φ2 - τC f_x), with analytic Jacobian.
inline SmoothMap torus_shear(const DefiningFunction& f, double C, double tau, int ambient) {
  const int m = ambient - 2;
  SmoothMap phi;
  phi.source_dim = phi.target_dim = ambient;
  phi.eval = [f, C, tau, m](const Vec& p) {
    Vec q = p;
    const cplx v = f(p.head(m));
    q[m] -= tau * C * v.imag();
    q[m + 1] -= tau * C * v.real();
    return q;
  };
  phi.jacobian_fn = [f, C, tau, m, ambient](const Vec& p) {
    Mat J = Mat::Identity(ambient, ambient);
    const Mat G = f.gradient(p.head(m));
    J.block(m, 0, 1, m) = -tau * C * G.row(1);
    J.block(m + 1, 0, 1, m) = -tau * C * G.row(0);
    return J;
  };
  return phi;
}

/// (p; φ1, φ2) ↦ (p; φ1, -φ2)
inline SmoothMap angle_flip(int ambient) {
  SmoothMap F;
  F.source_dim = F.target_dim = ambient;
  F.eval = [](const Vec& p) {
    Vec q = p;
    q[q.size() - 1] = -q[q.size() - 1];
    return q;
  };
  F.jacobian_fn = [ambient](const Vec&) {
    Mat J = Mat::Identity(ambient, ambient);
    J(ambient - 1, ambient - 1) = -1.0;
    return J;
  };
  return F;
}

/// α_τ = α_+ - τC (f_x df_y - f_y df_x) + f_x dφ1 - f_y dφ2.
inline KForm isotopy_form(const RepresentationData& rep, double C, double tau) {
  return bourgeois_form(RepresentationData{inverse_form(rep, tau * C), rep.f}).alpha;
}

struct IsotopyOptions {
  double tolerance = 1e-3;      // contact margin
  double pullback_tol = 1e-6;   // finite-difference pullback vs α_τ
  double volume_rel_tol = 1e-6;
  double flip_tol = 1e-10;
};

/// For each τ: α_τ contact, Φ_τ^*α_0 = α_τ (numeric Jacobian), volume
/// invariance; at τ = 1 the flipped pullback is the Bourgeois form of (α_-, conj f).
inline CheckReport isotopy_check(const RepresentationData& rep, double C, const std::vector<double>& taus,
                                 const std::vector<Vec>& samples, IsotopyOptions opt = {}) {
  Stopwatch sw;
  CheckReport r;
  r.name = "inverse monodromy isotopy";
  r.anchor = "torus shear isotopy pulls alpha_0 back to alpha_tau";
  r.tolerance = opt.tolerance;
  r.residual_tolerance = opt.pullback_tol;
  const BourgeoisFormData b0 = bourgeois_form(rep);
  const int M = b0.total.ambient_dim;
  const KForm top0 = wedge(b0.alpha, power(ext_deriv(b0.alpha, {1e-5, true, {}}), b0.n + 1));
  r.columns = {"tau", "min_contact", "max_pullback_gap", "max_volume_gap"};
  double worst_pull = 0, worst_vol = 0;
  for (double tau : taus) {
    const KForm a_tau = isotopy_form(rep, C, tau);
    SmoothMap shear = torus_shear(rep.f, C, tau, M);
    shear.jacobian_fn = nullptr;  // finite-difference Jacobian on purpose
    const KForm pulled = pullback(shear, b0.alpha);
    const KForm top = wedge(a_tau, power(ext_deriv(a_tau, {1e-5, true, {}}), b0.n + 1));
    struct Out {
      double contact, pull, vol;
    };
    const auto outs = parallel_map<Out>(samples.size(), [&](std::size_t i) {
      const Vec& p = samples[i];
      const Mat E = tangent_basis(b0.total, p).vectors;
      const double t = top(p, E);
      const double pg = (E.transpose() * (pulled.coefficients(p) - a_tau.coefficients(p))).lpNorm<Eigen::Infinity>();
      return Out{t, pg, relative_gap(t, top0(p, E))};
    });
    double mc = std::numeric_limits<double>::infinity(), mp = 0, mv = 0;
    for (const auto& o : outs) {
      mc = std::min(mc, o.contact);
      mp = std::max(mp, o.pull);
      mv = std::max(mv, o.vol);
    }
    r.margin(mc);
    r.residual(mp);
    worst_pull = std::max(worst_pull, mp);
    worst_vol = std::max(worst_vol, mv);
    r.rows.push_back({tau, mc, mp, mv});
  }
  if (!(worst_vol <= opt.volume_rel_tol)) r.fail("volume form not invariant along the isotopy");

  // τ = 1 followed by the flip of the second angle, exact Jacobians.
  const SmoothMap composite = compose(torus_shear(rep.f, C, 1.0, M), angle_flip(M));
  const KForm flipped = pullback(composite, b0.alpha);
  const KForm target = bourgeois_form(RepresentationData{inverse_form(rep, C), rep.f.conjugate()}).alpha;
  double flip_gap = 0;
  for (const Vec& p : samples) flip_gap = std::max(flip_gap, (flipped.coefficients(p) - target.coefficients(p)).lpNorm<Eigen::Infinity>());
  if (!(flip_gap <= opt.flip_tol)) r.fail("flipped time-one pullback differs from the Bourgeois form of (alpha_-, conj f)");
  r.n_samples = samples.size() * taus.size();
  r.metrics["C"] = C;
  r.metrics["max_pullback_gap"] = worst_pull;
  r.metrics["max_volume_rel_gap"] = worst_vol;
  r.metrics["flip_gap"] = flip_gap;
  r.wall_time_ms = sw.ms();
  return r.finalize();
}

struct FillingPolyData {
  RepresentationData rep;
  KForm omega;  // symplectic form of the filling, on V's ambient space
  std::vector<double> eps_grid;
  std::vector<double> T_grid;
};

/// {0} ∪ {10^k : k = -2..2} ∪ {0, 0.25, ..., 10}, sorted and deduplicated.
inline std::vector<double> default_T_grid() {
  std::vector<double> g{0.0};
  for (int k = -2; k <= 2; ++k) g.push_back(std::pow(10.0, k));
  for (int i = 0; i <= 40; ++i) g.push_back(0.25 * i);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

/// Coefficients c_k(p) of P_ε(T) = Σ c_k T^k at one point, on the oriented basis E:
/// c_k = C(n+1, k) α_ε∧(dα_ε)^k∧(ω + vol)^{n+1-k}.
struct FillingCoefficients {
  std::vector<KForm> terms;  // k = 0..n+1
};

inline FillingCoefficients filling_coefficients(const FillingPolyData& fp, double eps) {
  const BourgeoisFormData bf = bourgeois_form(fp.rep, eps);
  const int M = bf.total.ambient_dim, n = bf.n;
  const KForm da = extend(fp.rep.contact.dalpha, M) + eps * ext_deriv(bf.beta);
  const KForm sym = extend(fp.omega, M) + torus_volume(M);
  FillingCoefficients out;
  for (int k = 0; k <= n + 1; ++k) {
    KForm t = wedge(bf.alpha, power(da, k));
    if (n + 1 - k > 0) t = wedge(t, power(sym, n + 1 - k));
    out.terms.push_back(static_cast<double>(detail::binom(n + 1, k)) * t);
  }
  return out;
}

/// P_ε(T) > 0 for all grid pairs, plus positivity of the leading coefficient
/// (T^n at ε = 0, T^{n+1} for ε > 0). CSV rows: [eps, T, min_margin].
inline CheckReport filling_polynomial(const FillingPolyData& fp, const std::vector<Vec>& samples, double tolerance) {
  Stopwatch sw;
  CheckReport r;
  r.name = "weak filling polynomial";
  r.anchor = "weak filling: alpha_eps ^ (T d alpha_eps + omega + vol)^{n+1} > 0 for T >= 0";
  r.tolerance = tolerance;
  r.columns = {"eps", "T", "min_margin"};
  const Submanifold total = product_with_torus(fp.rep.contact.manifold);
  const int n = fp.rep.contact.n;
  for (double eps : fp.eps_grid) {
    const FillingCoefficients fc = filling_coefficients(fp, eps);
    const auto coeffs = parallel_map<std::vector<double>>(samples.size(), [&](std::size_t i) {
      const Vec& p = samples[i];
      const Mat E = tangent_basis(total, p).vectors;
      std::vector<double> c;
      for (const auto& t : fc.terms) c.push_back(t(p, E));
      return c;
    });
    const int lead = eps == 0.0 ? n : n + 1;
    double lead_min = std::numeric_limits<double>::infinity();
    for (const auto& c : coeffs) lead_min = std::min(lead_min, c[static_cast<std::size_t>(lead)]);
    r.metrics["leading_coefficient_min_eps_" + std::to_string(eps)] = lead_min;
    // for ε > 0 the top coefficient scales as ε², so certify the normalized value
    const double lead_norm = eps == 0.0 ? lead_min : lead_min / (eps * eps);
    r.metrics["leading_coefficient_normalized_eps_" + std::to_string(eps)] = lead_norm;
    if (!(lead_norm > tolerance)) r.fail("leading coefficient of P_eps not positive at eps = " + std::to_string(eps));
    if (eps == 0.0) {
      double top = 0;
      for (const auto& c : coeffs) top = std::max(top, std::abs(c[static_cast<std::size_t>(n + 1)]));
      r.metrics["P0_degree_excess"] = top;
    }
    for (double T : fp.T_grid) {
      double mn = std::numeric_limits<double>::infinity();
      for (const auto& c : coeffs) {
        double v = 0, Tk = 1;
        for (double ck : c) {
          v += ck * Tk;
          Tk *= T;
        }
        mn = std::min(mn, v);
      }
      r.margin(mn);
      r.rows.push_back({eps, T, mn});
    }
  }
  r.n_samples = samples.size();
  r.wall_time_ms = sw.ms();
  return r.finalize();
}

}  // namespace obv
