#pragma once

// Reference computations that avoid the library's rank tables and
// finite-difference kernels: determinants by permutation sums, forms with
// analytic coefficient gradients, alternation formulas.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "obv/forms.hpp"

namespace oracle {

using obv::Mat;
using obv::Vec;

inline int permutation_sign(const std::vector<int>& perm) {
  int sign = 1;
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (seen[i]) continue;
    std::size_t len = 0;
    for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(perm[j])) {
      seen[j] = true;
      ++len;
    }
    if (len % 2 == 0) sign = -sign;
  }
  return sign;
}

/// Leibniz formula over all permutations.
inline double det(const Mat& A) {
  const int k = static_cast<int>(A.rows());
  if (k == 0) return 1.0;
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  double s = 0.0;
  do {
    double t = permutation_sign(perm);
    for (int i = 0; i < k; ++i) t *= A(i, perm[static_cast<std::size_t>(i)]);
    s += t;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return s;
}

inline std::vector<std::vector<int>> increasing_indices(int m, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < m; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

inline Mat rows_of(const Mat& V, const std::vector<int>& I) {
  Mat out(static_cast<Eigen::Index>(I.size()), V.cols());
  for (std::size_t r = 0; r < I.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = V.row(I[r]);
  return out;
}

inline Mat drop_col(const Mat& V, int c) {
  Mat out(V.rows(), V.cols() - 1);
  for (int j = 0, o = 0; j < V.cols(); ++j)
    if (j != c) out.col(o++) = V.col(j);
  return out;
}

/// c + b.x + g (w.x)^2 + h (u.x)^3 with its exact gradient.
struct RidgeCoefficient {
  double c = 0, g = 0, h = 0;
  Vec b, w, u;

  double value(const Vec& x) const {
    const double s = w.dot(x), t = u.dot(x);
    return c + b.dot(x) + g * s * s + h * t * t * t;
  }
  Vec gradient(const Vec& x) const {
    const double s = w.dot(x), t = u.dot(x);
    return b + 2.0 * g * s * w + 3.0 * h * t * t * u;
  }
};

/// A k-form on R^m with one ridge coefficient per increasing multi-index.
struct PolyForm {
  int m = 0, k = 0;
  std::vector<std::vector<int>> indices;
  std::vector<RidgeCoefficient> coeffs;

  static PolyForm random(int m, int k, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> N(0.0, scale);
    auto vec = [&] {
      Vec v(m);
      for (int i = 0; i < m; ++i) v[i] = N(rng);
      return v;
    };
    PolyForm a;
    a.m = m;
    a.k = k;
    a.indices = increasing_indices(m, k);
    for (std::size_t i = 0; i < a.indices.size(); ++i) a.coeffs.push_back({N(rng), N(rng), N(rng), vec(), vec(), vec()});
    return a;
  }

  /// The library form with the same coefficients. The slot of each
  /// multi-index is read off the library's own basis forms.
  obv::KForm kform() const {
    std::vector<Eigen::Index> slot;
    const Vec origin = Vec::Zero(m);
    for (const auto& I : indices) {
      const Vec e = obv::KForm::basis(m, I).coefficients(origin);
      Eigen::Index where = 0;
      e.maxCoeff(&where);
      slot.push_back(where);
    }
    const PolyForm self = *this;
    const auto n = static_cast<Eigen::Index>(indices.size());
    return obv::KForm(m, k, [self, slot, n](const Vec& x) {
      Vec c = Vec::Zero(n);
      for (std::size_t i = 0; i < slot.size(); ++i) c[slot[i]] = self.coeffs[i].value(x);
      return c;
    });
  }

  /// a(x)(v_1, ..., v_k) = Σ_I a_I(x) det(V restricted to rows I).
  double eval(const Vec& x, const Mat& V) const {
    double s = 0.0;
    for (std::size_t i = 0; i < indices.size(); ++i) s += coeffs[i].value(x) * det(rows_of(V, indices[i]));
    return s;
  }

  /// da(x)(v_0, ..., v_k) = Σ_i (-1)^i (D_{v_i} a)(v_0, .., v̂_i, .., v_k) for constant vectors.
  double d_eval(const Vec& x, const Mat& V) const {
    double s = 0.0;
    for (int c = 0; c <= k; ++c) {
      const Mat rest = drop_col(V, c);
      double t = 0.0;
      for (std::size_t i = 0; i < indices.size(); ++i)
        t += coeffs[i].gradient(x).dot(V.col(c)) * det(rows_of(rest, indices[i]));
      s += (c % 2 == 0 ? 1.0 : -1.0) * t;
    }
    return s;
  }
};

/// (a∧b)(v) = 1/(k! l!) Σ_σ sgn(σ) a(v_σ(1..k)) b(v_σ(k+1..k+l)).
template <class A, class B>
double wedge_eval(const A& a, int k, const B& b, int l, const Mat& V) {
  std::vector<int> perm(static_cast<std::size_t>(k + l));
  std::iota(perm.begin(), perm.end(), 0);
  double fk = 1, fl = 1;
  for (int i = 2; i <= k; ++i) fk *= i;
  for (int i = 2; i <= l; ++i) fl *= i;
  double s = 0.0;
  do {
    Mat Va(V.rows(), k), Vb(V.rows(), l);
    for (int i = 0; i < k; ++i) Va.col(i) = V.col(perm[static_cast<std::size_t>(i)]);
    for (int i = 0; i < l; ++i) Vb.col(i) = V.col(perm[static_cast<std::size_t>(k + i)]);
    s += permutation_sign(perm) * a(Va) * b(Vb);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return s / (fk * fl);
}

inline Mat random_matrix(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  Mat M(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) M(i, j) = N(rng);
  return M;
}

inline Vec random_vector(int m, std::mt19937_64& rng, double scale = 1.0) { return scale * random_matrix(m, 1, rng).col(0); }

/// x + s sin(A x) with its exact Jacobian.
inline obv::SmoothMap sine_map(int m, std::mt19937_64& rng, double s = 0.2) {
  const Mat A = random_matrix(m, m, rng);
  obv::SmoothMap phi;
  phi.source_dim = m;
  phi.target_dim = m;
  phi.eval = [A, s](const Vec& x) { return Vec(x + s * (A * x).array().sin().matrix()); };
  phi.jacobian_fn = [A, s, m](const Vec& x) {
    const Vec c = (A * x).array().cos().matrix();
    return Mat(Mat::Identity(m, m) + s * c.asDiagonal() * A);
  };
  return phi;
}

inline double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

}  // namespace oracle
