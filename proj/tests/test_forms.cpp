#include <cmath>
#include <cstdlib>
#include <random>

#include <gtest/gtest.h>

#include "obv/forms.hpp"
#include "obv/manifold.hpp"
#include "obv/report.hpp"
#include "oracles.hpp"

using namespace obv;

namespace {

const DiffStep kFine{1e-3, true, {}};

struct Case {
  int m, k;
};

const Case kCases[] = {{3, 0}, {3, 1}, {3, 2}, {4, 1}, {4, 2}, {5, 2}, {5, 3}, {6, 1}};

}  // namespace

TEST(Forms, EvaluationMatchesPermutationDeterminants) {
  std::mt19937_64 rng(1);
  for (const auto& c : kCases) {
    const auto a = oracle::PolyForm::random(c.m, c.k, rng);
    const KForm K = a.kform();
    for (int s = 0; s < 5; ++s) {
      const Vec x = oracle::random_vector(c.m, rng);
      const Mat V = oracle::random_matrix(c.m, c.k, rng);
      EXPECT_NEAR(K(x, V), a.eval(x, V), 1e-10 * (1 + std::abs(a.eval(x, V))));
    }
  }
}

TEST(Forms, ExteriorDerivativeMatchesAnalyticGradient) {
  std::mt19937_64 rng(2);
  for (const auto& c : kCases) {
    const auto a = oracle::PolyForm::random(c.m, c.k, rng);
    const KForm dK = ext_deriv(a.kform(), kFine);
    for (int s = 0; s < 5; ++s) {
      const Vec x = oracle::random_vector(c.m, rng);
      const Mat V = oracle::random_matrix(c.m, c.k + 1, rng);
      const double want = a.d_eval(x, V);
      EXPECT_NEAR(dK(x, V), want, 1e-8 * (1 + std::abs(want))) << "m=" << c.m << " k=" << c.k;
    }
  }
}

TEST(Forms, SecondDerivativeVanishes) {
  std::mt19937_64 rng(3);
  for (const auto& c : kCases) {
    if (c.k + 2 > c.m) continue;
    const auto a = oracle::PolyForm::random(c.m, c.k, rng);
    const KForm dd = ext_deriv(ext_deriv(a.kform(), kFine), kFine);
    for (int s = 0; s < 5; ++s) {
      const Vec x = oracle::random_vector(c.m, rng);
      EXPECT_LE(dd.coefficients(x).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(Forms, WedgeMatchesAlternation) {
  std::mt19937_64 rng(4);
  const int m = 5;
  for (int k = 0; k <= 3; ++k) {
    for (int l = 0; k + l <= m && l <= 2; ++l) {
      const auto a = oracle::PolyForm::random(m, k, rng);
      const auto b = oracle::PolyForm::random(m, l, rng);
      const KForm w = wedge(a.kform(), b.kform());
      ASSERT_EQ(w.degree(), k + l);
      const Vec x = oracle::random_vector(m, rng);
      const Mat V = oracle::random_matrix(m, k + l, rng);
      const double want = oracle::wedge_eval([&](const Mat& A) { return a.eval(x, A); }, k,
                                             [&](const Mat& B) { return b.eval(x, B); }, l, V);
      EXPECT_NEAR(w(x, V), want, 1e-9 * (1 + std::abs(want))) << k << "," << l;
    }
  }
}

TEST(Forms, WedgeIsGradedCommutative) {
  std::mt19937_64 rng(5);
  const auto a = oracle::PolyForm::random(5, 1, rng).kform();
  const auto b = oracle::PolyForm::random(5, 2, rng).kform();
  const auto c = oracle::PolyForm::random(5, 1, rng).kform();
  const Vec x = oracle::random_vector(5, rng);
  EXPECT_LE((wedge(a, b).coefficients(x) - wedge(b, a).coefficients(x)).norm(), 1e-12);
  EXPECT_LE((wedge(a, c).coefficients(x) + wedge(c, a).coefficients(x)).norm(), 1e-12);
  EXPECT_LE(wedge(a, a).coefficients(x).norm(), 1e-14);
}

TEST(Forms, LeibnizRule) {
  std::mt19937_64 rng(6);
  const int m = 5;
  for (int k = 0; k <= 2; ++k) {
    const auto a = oracle::PolyForm::random(m, k, rng).kform();
    const auto b = oracle::PolyForm::random(m, 2, rng).kform();
    const KForm lhs = ext_deriv(wedge(a, b), kFine);
    const KForm rhs = wedge(ext_deriv(a, kFine), b) + (k % 2 ? -1.0 : 1.0) * wedge(a, ext_deriv(b, kFine));
    for (int s = 0; s < 4; ++s) {
      const Vec x = oracle::random_vector(m, rng);
      const Vec l = lhs.coefficients(x);
      EXPECT_LE((l - rhs.coefficients(x)).cwiseAbs().maxCoeff(), 1e-8 * (1 + l.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(Forms, PowerAndStandardVolume) {
  for (int n = 1; n <= 3; ++n) {
    Vec c = Vec::Zero(detail::binom(2 * n, 2));
    for (int j = 0; j < n; ++j) {
      const int idx[2] = {2 * j, 2 * j + 1};
      c += KForm::basis(2 * n, idx).coefficients(Vec::Zero(2 * n));
    }
    const KForm omega = KForm::constant(2 * n, 2, c);
    EXPECT_NEAR(power(omega, n)(Vec::Zero(2 * n), Mat::Identity(2 * n, 2 * n)), oracle::factorial(n), 1e-12);
  }
  std::mt19937_64 rng(7);
  const auto a = oracle::PolyForm::random(6, 2, rng).kform();
  const Vec x = oracle::random_vector(6, rng);
  EXPECT_LE((power(a, 3).coefficients(x) - wedge(wedge(a, a), a).coefficients(x)).norm(), 1e-10);
  EXPECT_NEAR(power(a, 0)(x), 1.0, 0.0);
}

TEST(Forms, InteriorProductInsertsFirstSlot) {
  std::mt19937_64 rng(8);
  const int m = 5;
  const Mat A = oracle::random_matrix(m, m, rng);
  const VecField X{m, [A](const Vec& p) { return Vec(A * p); }};
  for (int k = 1; k <= 3; ++k) {
    const auto a = oracle::PolyForm::random(m, k, rng);
    const KForm ia = interior(X, a.kform());
    const Vec x = oracle::random_vector(m, rng);
    const Mat V = oracle::random_matrix(m, k - 1, rng);
    Mat W(m, k);
    W.col(0) = A * x;
    W.rightCols(k - 1) = V;
    EXPECT_NEAR(ia(x, V), a.eval(x, W), 1e-10 * (1 + std::abs(a.eval(x, W))));
  }
}

TEST(Forms, PullbackMatchesPushedVectors) {
  std::mt19937_64 rng(9);
  const int m = 4;
  const SmoothMap phi = oracle::sine_map(m, rng);
  for (int k = 0; k <= 3; ++k) {
    const auto a = oracle::PolyForm::random(m, k, rng);
    const KForm pa = pullback(phi, a.kform());
    const Vec x = oracle::random_vector(m, rng);
    const Mat V = oracle::random_matrix(m, k, rng);
    const Mat JV = phi.jacobian(x) * V;
    EXPECT_NEAR(pa(x, V), a.eval(phi(x), JV), 1e-10 * (1 + std::abs(a.eval(phi(x), JV))));
  }
}

TEST(Forms, PullbackCommutesWithDerivative) {
  std::mt19937_64 rng(10);
  const int m = 4;
  const SmoothMap phi = oracle::sine_map(m, rng);
  for (int k = 0; k <= 2; ++k) {
    const auto a = oracle::PolyForm::random(m, k, rng).kform();
    const KForm lhs = pullback(phi, ext_deriv(a, kFine));
    const KForm rhs = ext_deriv(pullback(phi, a), kFine);
    const Vec x = oracle::random_vector(m, rng);
    const Vec l = lhs.coefficients(x);
    EXPECT_LE((l - rhs.coefficients(x)).cwiseAbs().maxCoeff(), 1e-8 * (1 + l.cwiseAbs().maxCoeff()));
  }
}

TEST(Forms, ComposedJacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  const SmoothMap f = oracle::sine_map(3, rng), g = oracle::sine_map(3, rng);
  const SmoothMap h = compose(f, g);
  const Vec x = oracle::random_vector(3, rng);
  EXPECT_LE((h.jacobian(x) - h.fd_jacobian(x)).norm(), 1e-8);
  EXPECT_LE((h(x) - f(g(x))).norm(), 0.0);
}

TEST(Forms, BilinearMatrixIsAntisymmetric) {
  std::mt19937_64 rng(12);
  const auto a = oracle::PolyForm::random(5, 2, rng);
  const Vec x = oracle::random_vector(5, rng);
  const Mat B = a.kform().bilinear(x);
  EXPECT_LE((B + B.transpose()).norm(), 0.0);
  const Mat V = oracle::random_matrix(5, 2, rng);
  EXPECT_NEAR(V.col(0).dot(B * V.col(1)), a.eval(x, V), 1e-10);
}

TEST(Forms, ExtendIgnoresTrailingCoordinates) {
  std::mt19937_64 rng(13);
  const auto a = oracle::PolyForm::random(3, 1, rng);
  const KForm e = extend(a.kform(), 5);
  const Vec x = oracle::random_vector(5, rng);
  const Mat V = oracle::random_matrix(5, 1, rng);
  EXPECT_NEAR(e(x, V), a.eval(x.head(3), V.topRows(3)), 1e-12);
}

TEST(Forms, ScalarFieldGradientMatchesAnalytic) {
  const ScalarField f = scalar_field(3, [](const Vec& p) { return std::sin(p[0]) * p[1] + p[2] * p[2] * p[2]; });
  const Vec x = Vec::LinSpaced(3, 0.1, 0.7);
  const Vec want = (Vec(3) << std::cos(x[0]) * x[1], std::sin(x[0]), 3 * x[2] * x[2]).finished();
  EXPECT_LE((f.gradient(x) - want).norm(), 1e-9);
}

TEST(Forms, ShapeErrors) {
  EXPECT_THROW(KForm(3, 4, [](const Vec&) { return Vec(); }), DimensionError);
  const KForm a = KForm::dx(3, 0), b = KForm::dx(4, 0);
  EXPECT_THROW(a + b, DimensionError);
  EXPECT_THROW(wedge(a, b), DimensionError);
  EXPECT_THROW(power(KForm::zero(3, 2), 2), DimensionError);
  EXPECT_THROW(a.coefficients(Vec::Zero(4)), DimensionError);
  EXPECT_THROW(a(Vec::Zero(3), Mat::Zero(3, 2)), DimensionError);
  const int bad[2] = {2, 1};
  EXPECT_THROW(KForm::basis(3, bad), DimensionError);
  EXPECT_THROW(ext_deriv(a, DiffStep{0.0, false, {}}), PreconditionError);
}

TEST(Forms, NonFiniteCoefficientsReportThePoint) {
  const KForm a = KForm::one_form(2, [](const Vec& p) { return Vec(Vec::Constant(2, 1.0 / p[0])); });
  try {
    a.coefficients(Vec::Zero(2));
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_EQ(e.point().size(), 2);
  }
}

TEST(Manifold, SphereSamplesAreOnTheSphereAndDeterministic) {
  const Submanifold S = sphere(3);
  const auto a = sample(S, 50, 42), b = sample(S, 50, 42), c = sample(S, 50, 43);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].norm(), 1.0, 1e-14);
    EXPECT_EQ(a[i], b[i]);
  }
  EXPECT_NE(a[0], c[0]);
  // prefix stability: the i-th point depends only on (seed, i)
  const auto longer = sample(S, 80, 42);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], longer[i]);
}

TEST(Manifold, TangentBasisIsOrthonormalAndOriented) {
  const Submanifold S = sphere(2);
  for (const Vec& p : sample(S, 20, 3)) {
    const OrientedBasis B = tangent_basis(S, p);
    EXPECT_LE((B.vectors.transpose() * B.vectors - Mat::Identity(3, 3)).norm(), 1e-12);
    EXPECT_LE((B.vectors.transpose() * p).norm(), 1e-12);
    Mat frame(4, 4);
    frame.col(0) = p;
    frame.rightCols(3) = B.vectors;
    EXPECT_GT(frame.determinant(), 0.0);
  }
  EXPECT_THROW(tangent_basis(S, Vec::Constant(4, 2.0)), PreconditionError);
}

TEST(Manifold, TorusProductAppendsAngles) {
  const Submanifold P = product_with_torus(sphere(2));
  EXPECT_EQ(P.ambient_dim, 6);
  EXPECT_EQ(P.dim(), 5);
  EXPECT_TRUE(P.is_periodic(4) && P.is_periodic(5) && !P.is_periodic(0));
  for (const Vec& p : sample(P, 20, 9)) {
    EXPECT_NEAR(p.head(4).norm(), 1.0, 1e-14);
    for (int i : {4, 5}) {
      EXPECT_GE(p[i], 0.0);
      EXPECT_LT(p[i], 2 * M_PI);
    }
  }
  Vec a = Vec::Zero(6), b = Vec::Zero(6);
  a[4] = 0.1;
  b[4] = 2 * M_PI - 0.1;
  EXPECT_NEAR(periodic_distance(P, a, b), 0.2, 1e-12);
}

TEST(Manifold, FilteredSamplingKeepsOnlyAcceptedPoints) {
  const Submanifold S = sphere(2);
  const auto pts = sample_where(S, 30, 5, [](const Vec& p) { return p[0] > 0.5; });
  ASSERT_EQ(pts.size(), 30u);
  for (const Vec& p : pts) EXPECT_GT(p[0], 0.5);
  EXPECT_THROW(sample_where(S, 1, 5, [](const Vec&) { return false; }, 200), ConvergenceError);
}

TEST(Manifold, ParallelResultsIndependentOfThreadCount) {
  auto run = [] {
    return parallel_map<double>(1000, [](std::size_t i) {
      auto rng = stream(17, i);
      return std::uniform_real_distribution<double>(0, 1)(rng);
    });
  };
  setenv("OBV_THREADS", "1", 1);
  const auto one = run();
  EXPECT_EQ(thread_count(), 1u);
  setenv("OBV_THREADS", "4", 1);
  const auto four = run();
  EXPECT_EQ(thread_count(), 4u);
  unsetenv("OBV_THREADS");
  EXPECT_EQ(one, four);
}

TEST(Report, PassRequiresMarginAboveAndResidualWithinTolerance) {
  CheckReport r;
  r.tolerance = 1e-3;
  r.residual_tolerance = 1e-6;
  r.margin(2e-3);
  r.residual(1e-6);
  EXPECT_TRUE(r.finalize().pass);
  r.margin(1e-3);
  EXPECT_FALSE(r.finalize().pass);
  CheckReport s;
  s.residual(std::nan(""));
  s.residual(0.0);
  EXPECT_FALSE(s.finalize().pass);
  CheckReport t;
  t.fail("explicit");
  EXPECT_FALSE(t.finalize().pass);
}
