#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include "obv/bourgeois.hpp"
#include "obv/catalog.hpp"
#include "obv/contact.hpp"
#include "obv/liouville.hpp"
#include "obv/monodromy.hpp"
#include "obv/prelagrangian.hpp"
#include "oracles.hpp"

using namespace obv;
using std::numbers::pi;

namespace {

std::vector<Vec> off_binding(const RepresentationData& rep, std::size_t n, std::uint64_t seed) {
  const DefiningFunction f = rep.f;
  return sample_where(rep.contact.manifold, n, seed, [f](const Vec& p) { return std::abs(f(p)) >= 1e-3; });
}

// 2π|z1|^2/(1+|z1|^2): angular speed of z2 under the spinning field of z1 on S^3.
double g1_second_speed(const Vec& p) {
  const double r2 = p[0] * p[0] + p[1] * p[1];
  return 2.0 * pi * r2 / (1.0 + r2);
}

Vec rotate_pair(const Vec& p, int j, double angle) {
  Vec q = p;
  const std::complex<double> z(p[2 * j], p[2 * j + 1]);
  const std::complex<double> w = std::polar(1.0, angle) * z;
  q[2 * j] = w.real();
  q[2 * j + 1] = w.imag();
  return q;
}

}  // namespace

// ---------------------------------------------------------------- contact

TEST(Contact, StandardVolumeOnSpheresIsConstant) {
  // α0∧ω0^{n-1} = ι_R ω0^n / 2n = (n-1)!/2 on an oriented orthonormal frame of S^{2n-1}
  for (int n : {2, 3}) {
    const ContactFormData cf = catalog::standard_contact(n);
    const auto pts = sample(cf.manifold, 50, 10 + n);
    const CheckReport r = verify_contact(cf, pts, 1e-3);
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(*r.min_margin, oracle::factorial(n - 1) / 2.0, 1e-12);
    const KForm vol = contact_volume(cf);
    for (const Vec& p : pts) EXPECT_NEAR(vol(p, tangent_basis(cf.manifold, p).vectors), oracle::factorial(n - 1) / 2.0, 1e-12);
  }
}

TEST(Contact, ClosedFormIsNotContact) {
  const ContactFormData cf = make_contact(KForm::dx(4, 0), sphere(2), 1);
  EXPECT_FALSE(verify_contact(cf, sample(cf.manifold, 20, 1), 1e-3).pass);
}

TEST(Contact, ReversedOrientationFails) {
  const ContactFormData cf = catalog::standard_contact(2);
  EXPECT_FALSE(verify_contact(cf, sample(cf.manifold, 20, 1), 1e-3, -1).pass);
}

TEST(Contact, ReebFieldOfRoundFormIsTwiceTheHopfField) {
  const ContactFormData cf = catalog::standard_contact(2);
  for (const Vec& p : sample(cf.manifold, 20, 2)) {
    Vec want(4);
    want << -2 * p[1], 2 * p[0], -2 * p[3], 2 * p[2];
    EXPECT_LE((reeb_field(cf, p) - want).norm(), 1e-10);
  }
}

TEST(Contact, AdaptedOpenBooksOnThreeSphere) {
  for (const RepresentationData& rep : {catalog::standard_g1(2), catalog::standard_g2(2)}) {
    const auto off = sample(rep.contact.manifold, 300, 3);
    const auto on = sample(binding(rep), 50, 4);
    for (const Vec& q : on) EXPECT_LE(std::abs(rep.f(q)), 1e-10);
    EXPECT_TRUE(verify_adapted(rep.contact, rep.f, off, on, 1e-3).pass);
    EXPECT_TRUE(verify_representation(rep, off, on, 1e-3).pass);
    EXPECT_TRUE(openbook_volume_check(rep, off_binding(rep, 100, 5), on, 1e-3).pass);
  }
}

TEST(Contact, ConjugateDefiningFunctionReversesPages) {
  const RepresentationData good = catalog::standard_g1(2);
  const RepresentationData bad{good.contact, good.f.conjugate()};
  const auto off = sample(bad.contact.manifold, 100, 6);
  const auto on = sample(binding(bad), 20, 7);
  EXPECT_FALSE(verify_representation(bad, off, on, 1e-3).pass);
}

TEST(Contact, OpenBookVolumeMatchesQuotientOffBinding) {
  // on S^3 for z1: Ω_V = df_x∧df_y∧α + (x1 dy1 - y1 dx1)∧dα, positive everywhere
  const RepresentationData rep = catalog::standard_g1(2);
  const KForm omega = openbook_volume_form(rep);
  for (const Vec& p : sample(rep.contact.manifold, 50, 8)) {
    const Mat E = tangent_basis(rep.contact.manifold, p).vectors;
    const Vec a = catalog::alpha0(2).coefficients(p);
    const Mat B = catalog::omega0(2).bilinear(p);
    Vec dfx = Vec::Zero(4), dfy = Vec::Zero(4), ang = Vec::Zero(4);
    dfx[0] = 1;
    dfy[1] = 1;
    ang[0] = -p[1];
    ang[1] = p[0];
    auto one = [](const Vec& c) { return [c](const Mat& V) { return c.dot(V.col(0)); }; };
    auto two = [](const Mat& M) { return [M](const Mat& V) { return V.col(0).dot(M * V.col(1)); }; };
    const Mat dxdy = dfx * dfy.transpose() - dfy * dfx.transpose();
    const double first = oracle::wedge_eval(two(dxdy), 2, one(a), 1, E);
    const double second = oracle::wedge_eval(one(ang), 1, two(B), 2, E);
    EXPECT_NEAR(omega(p, E), first + second, 1e-12);
    EXPECT_GT(first + second, 0.0);
  }
}

// ---------------------------------------------------------------- bourgeois

TEST(Bourgeois, TopFormMatchesIndependentAlternation) {
  // α = α0 + x1 dφ1 - y1 dφ2, dα = ω0 + dx1∧dφ1 - dy1∧dφ2 on R^6
  const RepresentationData rep = catalog::standard_g1(2);
  const BourgeoisFormData bf = bourgeois_form(rep);
  const KForm top = wedge(bf.alpha, power(ext_deriv(bf.alpha), 2));
  for (const Vec& p : sample(bf.total, 20, 9)) {
    Vec a = Vec::Zero(6);
    a.head(4) = catalog::alpha0(2).coefficients(p.head(4));
    a[4] = p[0];
    a[5] = -p[1];
    Mat B = Mat::Zero(6, 6);
    B(0, 1) = 1, B(2, 3) = 1, B(0, 4) = 1, B(1, 5) = -1;
    B -= Mat(B.transpose());
    const Mat E = tangent_basis(bf.total, p).vectors;
    auto alpha = [&](const Mat& V) { return a.dot(V.col(0)); };
    auto omega = [&](const Mat& V) { return V.col(0).dot(B * V.col(1)); };
    auto omega2 = [&](const Mat& V) { return oracle::wedge_eval(omega, 2, omega, 2, V); };
    const double want = oracle::wedge_eval(alpha, 1, omega2, 4, E);
    EXPECT_NEAR(top(p, E), want, 1e-8 * std::max(1.0, std::abs(want)));
    EXPECT_GT(want, 0.0);
  }
}

TEST(Bourgeois, ContactStructureAndScaling) {
  for (const RepresentationData& rep : {catalog::standard_g1(2), catalog::standard_g2(2)}) {
    const BourgeoisFormData bf = bourgeois_form(rep);
    const auto pts = sample(bf.total, 60, 10);
    const CheckReport c = verify_bg_contact(bf, pts);
    EXPECT_TRUE(c.pass) << c.metrics.at("gap_direct_vs_expanded");
    EXPECT_LE(c.metrics.at("gap_direct_vs_expanded"), 1e-8);
    EXPECT_TRUE(bg_structure_check(bf, pts).pass);
    const CheckReport s = eps_scaling_check(rep, pts, {0.1, 0.5, 1.0});
    EXPECT_TRUE(s.pass);
    ASSERT_EQ(s.rows.size(), 3u);
  }
}

TEST(Bourgeois, ConstantDefiningFunctionIsNotContact) {
  // f = 1 gives β = dφ1: α∧(dα)^{n+1} = 0
  const RepresentationData rep{catalog::standard_contact(2), catalog::constant_one(4)};
  const BourgeoisFormData bf = bourgeois_form(rep);
  EXPECT_FALSE(verify_bg_contact(bf, sample(bf.total, 20, 11)).pass);
}

TEST(Bourgeois, ShearAtZeroIsIdentityAndFlipIsInvolution) {
  const RepresentationData rep = catalog::standard_g2(2);
  const SmoothMap s0 = torus_shear(rep.f, 3.0, 0.0, 6);
  const SmoothMap F = angle_flip(6);
  for (const Vec& p : sample(product_with_torus(rep.contact.manifold), 10, 12)) {
    EXPECT_LE(periodic_distance(product_with_torus(rep.contact.manifold), s0(p), p), 1e-15);
    EXPECT_LE(periodic_distance(product_with_torus(rep.contact.manifold), F(F(p)), p), 1e-15);
  }
}

TEST(Bourgeois, InverseMonodromyChain) {
  const RepresentationData base = catalog::standard_g2(2);
  const RepresentationData prof{base.contact, catalog::profiled(base.f)};
  const auto pts = sample(base.contact.manifold, 300, 13);
  const InverseSearch s = find_inverse_constant(prof, pts, 1e-3);
  ASSERT_TRUE(s.C.has_value());
  EXPECT_TRUE(verify_contact(inverse_form(prof, 2 * *s.C), pts, 1e-3, -1).pass);
  EXPECT_TRUE(inverse_restriction_check(prof, *s.C, off_binding(prof, 50, 14), sample(binding(base), 20, 15)).pass);
  const auto tp = sample(product_with_torus(base.contact.manifold), 20, 16);
  const CheckReport iso = isotopy_check(prof, *s.C, {0.0, 0.5, 1.0}, tp);
  EXPECT_TRUE(iso.pass);
  EXPECT_LE(iso.metrics.at("flip_gap"), 1e-10);
}

TEST(Bourgeois, FillingPolynomialGridAndColumns) {
  const RepresentationData rep = catalog::standard_g1(2);
  FillingPolyData fp{rep, catalog::omega0(2), {0.0, 0.05}, {0.0, 1.0, 10.0}};
  const CheckReport r = filling_polynomial(fp, sample(product_with_torus(rep.contact.manifold), 40, 17), 1e-3);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.columns, (std::vector<std::string>{"eps", "T", "min_margin"}));
  EXPECT_EQ(r.rows.size(), 6u);
  // the T^{n+1} coefficient vanishes at ε = 0
  EXPECT_LE(r.metrics.at("P0_degree_excess"), 1e-12);
}

// ---------------------------------------------------------------- monodromy

TEST(Monodromy, SpinningFieldOfFirstCoordinateHasClosedFormFlow) {
  // Y = 2π∂θ1 + 2π r1^2/(1+r1^2) ∂θ2 solves dθ(Y) = 2π and ι_Y dλ = 0 on pages
  const RepresentationData rep = catalog::standard_g1(2);
  const SpinningField Y(rep);
  const auto starts = off_binding(rep, 6, 18);
  for (const Vec& p : starts) {
    const double t = 0.37;
    const Vec want = rotate_pair(rotate_pair(p, 0, 2 * pi * t), 1, g1_second_speed(p) * t);
    EXPECT_LE((flow(Y, p, t, {1e-3}).point - want).norm(), 1e-9);
  }
}

TEST(Monodromy, SpinningFieldChecks) {
  const RepresentationData rep = catalog::standard_g2(2);
  EXPECT_TRUE(spinning_field_check(SpinningField(rep), off_binding(rep, 50, 19)).pass);
  const RepresentationData g1 = catalog::standard_g1(2);
  const CheckReport r = spinning_property_check(g1, first_coordinate_rotation(2), sample(g1.contact.manifold, 10, 20),
                                                sample(binding(g1), 10, 21));
  EXPECT_TRUE(r.pass);
}

TEST(Monodromy, SpinningFieldRefusesTheBinding) {
  const SpinningField Y(catalog::standard_g1(2));
  Vec p = Vec::Zero(4);
  p[2] = 1.0;
  EXPECT_THROW(Y(p), PreconditionError);
}

TEST(Monodromy, HopfRotationReturnsAtTimeOne) {
  const RepresentationData rep = catalog::standard_g1(2);
  const CheckReport r =
      flow_return_check(rep.contact.manifold, first_coordinate_rotation(2), sample(rep.contact.manifold, 20, 22), 1e-3);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(*r.max_residual, 1e-7);
}

TEST(Monodromy, ClosedFormG2FlowSolvesTheODE) {
  // d/dt z(t) = Y(z(t)) by central differences of the closed form
  const RepresentationData rep = catalog::standard_g2(2);
  const SpinningField Y(rep);
  const DefiningFunction f = rep.f;
  const auto starts = sample_where(rep.contact.manifold, 8, 23, [f](const Vec& p) {
    const double g = std::abs(f(p));
    return g > 0.05 && g < 0.95;
  });
  for (const Vec& p : starts) {
    const auto z0 = to_complex(p);
    for (double t : {0.0, 0.4, 0.9}) {
      const double h = 1e-5;
      const Vec zp = to_real(analytic_flow_g2(z0, t + h)), zm = to_real(analytic_flow_g2(z0, t - h));
      const Vec z = to_real(analytic_flow_g2(z0, t));
      EXPECT_LE(((zp - zm) / (2 * h) - Y(z)).norm(), 1e-7);
      EXPECT_NEAR(std::abs(f(z)), std::abs(f(p)), 1e-12);
      EXPECT_NEAR(z.norm(), 1.0, 1e-12);
      EXPECT_LE((analytic_flow_g2_coefficient_form(z0, t).z - analytic_flow_g2(z0, t)).norm(), 1e-10);
    }
  }
}

TEST(Monodromy, AnalyticFlowCheckAgreesWithIntegrator) {
  const RepresentationData rep = catalog::standard_g2(2);
  const DefiningFunction f = rep.f;
  const auto starts = sample_where(rep.contact.manifold, 4, 24, [f](const Vec& p) {
    const double g = std::abs(f(p));
    return g > 0.05 && g < 0.95;
  });
  const CheckReport r = analytic_flow_check(SpinningField(rep), starts);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.columns, (std::vector<std::string>{"g0", "endpoint_error", "conservation_gap"}));
}

TEST(Monodromy, DehnTwistOnCircleBundleIsAPlaneRotation) {
  const DehnTwistData dt = standard_twist();
  for (const Vec& x : sample(disk_bundle(2), 30, 25)) {
    const Vec q = x.head(2), p = x.tail(2);
    const double r = p.norm();
    if (r < 1e-6) continue;
    const double rho = r * 2 * pi / (1 + r * r) - pi;
    const Vec ph = p / r;
    const Vec q2 = std::cos(rho) * q + std::sin(rho) * ph;
    const Vec ph2 = -std::sin(rho) * q + std::cos(rho) * ph;
    const auto [qa, pa] = dehn_twist(dt, q, p);
    EXPECT_LE((qa - q2).norm(), 1e-13);
    EXPECT_LE((pa - r * ph2).norm(), 1e-13);
  }
}

TEST(Monodromy, DehnTwistFixesBoundaryAndFlipsZeroSection) {
  const DehnTwistData dt = standard_twist();
  Vec q(3), p = Vec::Zero(3);
  q << 0.6, 0.8, 0.0;
  const auto [q0, p0] = dehn_twist(dt, q, p);
  EXPECT_LE((q0 + q).norm(), 1e-15);
  EXPECT_LE(p0.norm(), 1e-15);
  Vec pb(3);
  pb << 0.0, 0.0, 1.0;
  const auto [q1, p1] = dehn_twist(dt, q, pb);
  EXPECT_LE((q1 - q).norm(), 1e-15);
  EXPECT_LE((p1 - pb).norm(), 1e-15);
  EXPECT_THROW(dehn_twist(dt, 2 * q, p), PreconditionError);
  // small |p| branch is continuous with the direct formula
  Vec ps = Vec::Zero(3);
  ps[2] = 1e-3;
  const auto [qs, pss] = dehn_twist(dt, q, ps);
  ps[2] = 1e-3 * (1 - 1e-12);
  const auto [qt, ptt] = dehn_twist(dt, q, ps);
  EXPECT_LE((qs - qt).norm(), 1e-10);
}

TEST(Monodromy, DehnTwistIdentities) {
  const Submanifold D = disk_bundle(2);
  std::vector<Vec> bd = sample(D, 20, 27);
  for (Vec& x : bd) x.tail(2) /= x.tail(2).norm();
  const CheckReport r = dehn_twist_check(standard_twist(), 2, sample(D, 50, 26), bd);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.metrics.at("max_norm_gap"), 1e-12);
  EXPECT_LE(r.metrics.at("max_boundary_gap"), 1e-14);
}

TEST(Monodromy, TimeOneFlowIsTheDehnTwist) {
  const RepresentationData rep = catalog::standard_g2(2);
  const CheckReport r = monodromy_compare(SpinningField(rep), sample(disk_bundle(2, 1.0 - 1e-3), 4, 28));
  EXPECT_TRUE(r.pass) << r.detail;
  EXPECT_LE(r.metrics.at("max_inverse_error"), 1e-5);
}

// ---------------------------------------------------------------- liouville

TEST(Liouville, CompletionChecksOnIdealDomains) {
  for (const LiouvilleDomainData& d : {ball_domain(1, 4), ball_domain(2, 4), cotangent_disk_domain(1), cotangent_disk_domain(2)}) {
    const CheckReport r = completion_check(d, sample(d.F, 60, 29), boundary_samples(d, 30, 30), 0.0);
    EXPECT_TRUE(r.pass) << d.name;
  }
}

TEST(Liouville, InwardPointingFieldFailsCompletion) {
  LiouvilleDomainData d = ball_domain(1, 2);
  d.X = VecField{2, [](const Vec& p) { return Vec(-0.5 * p); }};
  EXPECT_FALSE(completion_check(d, sample(d.F, 30, 31), boundary_samples(d, 10, 32), 0.0).pass);
}

TEST(Liouville, IdentificationOfTheBall) {
  // z/sqrt(1-|z|^4) pulls λ0 back to λ0/(1-|z|^4) because λ0 vanishes on radial vectors
  const LiouvilleDomainData d = ball_domain(2, 4);
  auto pts = sample(d.F, 30, 33);
  for (Vec& p : pts) p *= 0.7 / p.norm();
  EXPECT_TRUE(identification_check(d, IdealExample::Ball, pts).pass);
  const Vec p = pts.front();
  const double s = 1.0 / std::sqrt(1.0 - std::pow(p.squaredNorm(), 2));
  EXPECT_LE((interior_identification(IdealExample::Ball, p) - s * p).norm(), 1e-15);
  Vec out = Vec::Zero(4);
  out[0] = 1.0;
  EXPECT_THROW(interior_identification(IdealExample::Ball, out), DomainError);
}

TEST(Liouville, IdentificationOfTheCotangentDisk) {
  const LiouvilleDomainData d = cotangent_disk_domain(2);
  auto pts = sample(d.F, 30, 34);
  for (Vec& p : pts) p.tail(2) *= 0.5 / p.tail(2).norm();
  EXPECT_TRUE(identification_check(d, IdealExample::CotangentDisk, pts).pass);
}

TEST(Liouville, PageVolumeIdentity) {
  for (const LiouvilleDomainData& d : {ball_domain(1, 4), ball_domain(2, 4)})
    EXPECT_TRUE(page_volume_identity(d, sample(d.F, 40, 35)).pass) << d.name;
}

TEST(Liouville, WeinsteinDeltaBoundsAreExact) {
  // plane: df(X) = |z|^2, |X|^2 + |df|^2 = 17|z|^2/4; cotangent: 2|p|^2 over 5|p|^2
  const auto plane_pts = annulus_samples(2, 2, 0.1, 2.0, 100, 36);
  const CheckReport a = weinstein_check(weinstein_plane(0.2), plane_pts);
  EXPECT_TRUE(a.pass);
  EXPECT_NEAR(a.metrics.at("largest_admissible_delta_on_samples"), 4.0 / 17.0, 1e-14);
  EXPECT_FALSE(weinstein_check(weinstein_plane(0.24), plane_pts).pass);
  const auto cot_pts = annulus_samples(4, 2, 0.1, 2.0, 100, 37, 2);
  const CheckReport b = weinstein_check(weinstein_cotangent_torus(0.35), cot_pts);
  EXPECT_TRUE(b.pass);
  EXPECT_NEAR(b.metrics.at("largest_admissible_delta_on_samples"), 0.4, 1e-14);
  EXPECT_FALSE(weinstein_check(weinstein_cotangent_torus(0.41), cot_pts).pass);
}

TEST(Liouville, SubcriticalCoordinates) {
  const CheckReport r = subcritical_check(weinstein_plane(0.2), annulus_samples(6, 4, 0.0, 2.0, 200, 38));
  EXPECT_TRUE(r.pass);
}

TEST(Liouville, HypersurfaceOverTheDiskIsAnOpenBookWithTrivialMonodromy) {
  const LiouvilleDomainData ball = ball_domain(1, 4);
  const Hypersurface h = hypersurface_build(ball, sample(ball.F, 60, 39), boundary_samples(ball, 30, 40));
  const auto off = sample(h.V, 200, 41);
  const auto on = sample(hypersurface_binding(h), 30, 42);
  EXPECT_TRUE(transversality_check(h, off).pass);
  EXPECT_TRUE(verify_contact(h.contact, off, 1e-3).pass);
  EXPECT_TRUE(verify_representation(h.representation(), off, on, 1e-3).pass);
  EXPECT_TRUE(trivial_monodromy_check(h, sample(h.V, 10, 43)).pass);
  for (const Vec& x : sample(h.V, 10, 44)) EXPECT_LE((angular_rotation_flow(h, x, 1.0) - x).norm(), 1e-14);
}

TEST(Liouville, HypersurfaceRejectsBadCompletion) {
  LiouvilleDomainData d = ball_domain(1, 2);
  d.X = VecField{2, [](const Vec& p) { return Vec(-0.5 * p); }};
  EXPECT_THROW(hypersurface_build(d, sample(d.F, 20, 45), boundary_samples(d, 10, 46)), PreconditionError);
}

// ---------------------------------------------------------------- pre-Lagrangian

TEST(PreLagrangian, RealCircleTimesTorus) {
  const PreLagrangianData pl = real_circle_prelagrangian();
  EXPECT_EQ(pl.P.dim(), 3);
  EXPECT_EQ(pl.contact_dim, 5);
  const auto pts = sample(pl.P, 40, 47);
  EXPECT_TRUE(verify_prelagrangian(pl, pts).pass);
  // α̂ = dφ1 on L x T^2
  for (const Vec& p : pts) {
    const Mat E = tangent_basis(pl.P, p).vectors;
    Vec dphi1 = Vec::Zero(6);
    dphi1[4] = 1.0;
    EXPECT_LE((E.transpose() * (pl.alpha_hat.coefficients(p) - dphi1)).norm(), 1e-12);
  }
}

TEST(PreLagrangian, BindingTorusPartVanishesExactly) {
  const PreLagrangianData pl = binding_prelagrangian();
  const auto pts = sample(pl.P, 40, 48);
  EXPECT_TRUE(verify_prelagrangian(pl, pts).pass);
  EXPECT_EQ(torus_part_on_binding(pts), 0.0);
}

TEST(PreLagrangian, WrongDimensionFails) {
  const PreLagrangianData pl = wrong_dimension_fixture();
  EXPECT_FALSE(verify_prelagrangian(pl, sample(pl.P, 10, 49)).pass);
}

TEST(PreLagrangian, LegendrianFixtures) {
  const KForm a = catalog::alpha0(2);
  const DefiningFunction f = catalog::g2(2);
  const Submanifold real = circle_in_sphere(CircleFixture::RealCircle);
  EXPECT_TRUE(legendrian_check(real, a, f, 3, sample(real, 20, 50)).pass);
  const Submanifold hopf = circle_in_sphere(CircleFixture::HopfFiber);
  EXPECT_FALSE(legendrian_check(hopf, a, f, 3, sample(hopf, 20, 51)).pass);
  const Submanifold eq = circle_in_sphere(CircleFixture::BindingEquator);
  EXPECT_FALSE(legendrian_check(eq, a, catalog::g1(2), 3, sample(eq, 20, 52)).pass);
}

TEST(PreLagrangian, StraighteningMakesTheAngleLinear) {
  // φ1 = t + sin(t)/2 has ∮ α̂ = 2π; the straightened loop has φ1 = t
  const PreLagrangianData pl = real_circle_prelagrangian();
  const LoopData loop = real_circle_loop([](double t) { return t + 0.5 * std::sin(t); },
                                         [](double t) { return 1.0 + 0.5 * std::cos(t); });
  StraightenOptions o;
  o.grid = 256;
  const StraightenResult s = straighten_loop(loop, pl, coordinate_shift(6, 4), o);
  EXPECT_TRUE(s.report.pass);
  EXPECT_NEAR(s.C, 2 * pi, 1e-10);
  EXPECT_NEAR(s.C_out, s.C, 1e-6);
  for (double t : {0.3, 1.7, 4.0}) EXPECT_NEAR(s.loop.gamma(t)[4], t, 1e-10);
}

TEST(PreLagrangian, StraighteningRejectsNegativeLoops) {
  const PreLagrangianData pl = real_circle_prelagrangian();
  const LoopData loop = real_circle_loop([](double t) { return -t; }, [](double) { return -1.0; });
  StraightenOptions o;
  o.grid = 64;
  EXPECT_THROW(straighten_loop(loop, pl, coordinate_shift(6, 4), o), PreconditionError);
}

TEST(PreLagrangian, SimpsonIsExactForCubics) {
  const int N = 10;
  const double h = 2.0 / N;
  std::vector<double> y;
  for (int i = 0; i <= N; ++i) {
    const double x = i * h;
    y.push_back(x * x * x - x);
  }
  EXPECT_NEAR(simpson(y, h), 4.0 - 2.0, 1e-13);
  y.pop_back();
  EXPECT_THROW(simpson(y, h), PreconditionError);
}
