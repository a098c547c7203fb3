#pragma once

// Exterior calculus over ambient Euclidean coordinates.
//
// A KForm of degree k on R^m is stored as a function returning all C(m,k)
// coefficients at once, indexed by strictly increasing multi-indices in
// colexicographic order (equivalently: k-bit masks in increasing numeric
// order). Restriction to a submanifold happens only at evaluation time, by
// feeding tangent vectors.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "obv/errors.hpp"

namespace obv {

inline constexpr int kMaxAmbientDim = 16;

namespace detail {

inline int binom(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<int>(r);
}

// Colex rank of a bit mask among masks of the same popcount.
inline int rank_of(std::uint32_t mask) {
  int r = 0, j = 0;
  while (mask) {
    const int c = std::countr_zero(mask);
    r += binom(c, ++j);
    mask &= mask - 1;
  }
  return r;
}

// All k-subsets of {0..m-1} as masks, in rank order. Built once, immutable.
inline const std::vector<std::uint32_t>& masks(int m, int k) {
  static const auto table = [] {
    std::array<std::array<std::vector<std::uint32_t>, kMaxAmbientDim + 1>, kMaxAmbientDim + 1> t;
    for (int dim = 0; dim <= kMaxAmbientDim; ++dim) {
      for (int deg = 0; deg <= dim; ++deg) {
        auto& out = t[dim][deg];
        if (deg == 0) {
          out.push_back(0u);
          continue;
        }
        std::uint32_t v = (1u << deg) - 1u;
        const std::uint32_t limit = 1u << dim;
        while (v < limit) {
          out.push_back(v);
          const std::uint32_t c = v & (~v + 1u);
          const std::uint32_t r = v + c;
          v = (((r ^ v) >> 2) / c) | r;
        }
      }
    }
    return t;
  }();
  if (m < 0 || m > kMaxAmbientDim) throw DimensionError("ambient dimension out of supported range");
  static const std::vector<std::uint32_t> empty;
  if (k < 0 || k > m) return empty;
  return table[m][k];
}

inline std::vector<int> indices_of(std::uint32_t mask) {
  std::vector<int> out;
  while (mask) {
    out.push_back(std::countr_zero(mask));
    mask &= mask - 1;
  }
  return out;
}

// Position of bit i inside mask (number of set bits below i).
inline int position(std::uint32_t mask, int i) { return std::popcount(mask & ((1u << i) - 1u)); }

struct WedgeEntry {
  int a, b, out;
  double sign;
};

inline std::vector<WedgeEntry> wedge_table(int m, int k, int l) {
  std::vector<WedgeEntry> t;
  const auto& ma = masks(m, k);
  const auto& mb = masks(m, l);
  for (std::size_t ia = 0; ia < ma.size(); ++ia) {
    for (std::size_t ib = 0; ib < mb.size(); ++ib) {
      const std::uint32_t A = ma[ia], B = mb[ib];
      if (A & B) continue;
      int inversions = 0;
      for (std::uint32_t bb = B; bb; bb &= bb - 1) {
        const int j = std::countr_zero(bb);
        inversions += std::popcount(A & ~((2u << j) - 1u));
      }
      t.push_back({static_cast<int>(ia), static_cast<int>(ib), rank_of(A | B), (inversions % 2) ? -1.0 : 1.0});
    }
  }
  return t;
}

// Entries (coordinate i, rank of J\{i} or J+{i}, sign) keyed by output rank.
struct IndexTerm {
  int coord, rank;
  double sign;
};

inline std::vector<std::vector<IndexTerm>> derivative_table(int m, int k) {
  const auto& out = masks(m, k + 1);
  std::vector<std::vector<IndexTerm>> t(out.size());
  for (std::size_t r = 0; r < out.size(); ++r) {
    const std::uint32_t J = out[r];
    for (std::uint32_t bb = J; bb; bb &= bb - 1) {
      const int i = std::countr_zero(bb);
      t[r].push_back({i, rank_of(J & ~(1u << i)), (position(J, i) % 2) ? -1.0 : 1.0});
    }
  }
  return t;
}

inline std::vector<std::vector<IndexTerm>> interior_table(int m, int k) {
  const auto& out = masks(m, k - 1);
  std::vector<std::vector<IndexTerm>> t(out.size());
  for (std::size_t r = 0; r < out.size(); ++r) {
    const std::uint32_t J = out[r];
    for (int i = 0; i < m; ++i) {
      if (J & (1u << i)) continue;
      const std::uint32_t I = J | (1u << i);
      t[r].push_back({i, rank_of(I), (position(I, i) % 2) ? -1.0 : 1.0});
    }
  }
  return t;
}

inline double minor_det(const Mat& rows_src, std::uint32_t row_mask, std::uint32_t col_mask, int k) {
  if (k == 0) return 1.0;
  Eigen::MatrixXd sub(k, k);
  int r = 0;
  for (std::uint32_t rr = row_mask; rr; rr &= rr - 1, ++r) {
    const int i = std::countr_zero(rr);
    int c = 0;
    for (std::uint32_t cc = col_mask; cc; cc &= cc - 1, ++c) sub(r, c) = rows_src(i, std::countr_zero(cc));
  }
  if (k == 1) return sub(0, 0);
  if (k == 2) return sub(0, 0) * sub(1, 1) - sub(0, 1) * sub(1, 0);
  return sub.partialPivLu().determinant();
}

}  // namespace detail

/// Finite-difference step policy. The effective step at p is h * scale(p)
/// when a scale function is supplied.
struct DiffStep {
  double h = 1e-5;
  bool richardson = false;
  std::function<double(const Vec&)> scale;

  double at(const Vec& p) const { return scale ? h * scale(p) : h; }
};

class KForm {
 public:
  using CoeffFn = std::function<Vec(const Vec&)>;

  KForm() = default;
  KForm(int ambient_dim, int degree, CoeffFn fn) : m_(ambient_dim), k_(degree), fn_(std::move(fn)) {
    if (m_ < 0 || m_ > kMaxAmbientDim) throw DimensionError("ambient dimension out of supported range");
    if (k_ < 0 || k_ > m_) throw DimensionError("form degree exceeds ambient dimension");
  }

  int ambient_dim() const { return m_; }
  int degree() const { return k_; }
  Eigen::Index size() const { return detail::binom(m_, k_); }

  /// All coefficients at p, in rank order. Throws DomainError on non-finite values.
  Vec coefficients(const Vec& p) const {
    if (p.size() != m_) throw DimensionError("point dimension does not match form");
    Vec c = fn_(p);
    if (c.size() != size()) throw DimensionError("coefficient function returned wrong length");
    if (!c.allFinite()) throw DomainError("form coefficients not finite", p);
    return c;
  }

  /// Coefficient for one strictly increasing multi-index.
  double coeff(const Vec& p, std::span<const int> multi_index) const {
    if (static_cast<int>(multi_index.size()) != k_) throw DimensionError("multi-index length differs from degree");
    std::uint32_t mask = 0;
    for (std::size_t j = 0; j < multi_index.size(); ++j) {
      const int i = multi_index[j];
      if (i < 0 || i >= m_ || (j > 0 && multi_index[j - 1] >= i))
        throw DimensionError("multi-index must be strictly increasing and in range");
      mask |= 1u << i;
    }
    return coefficients(p)[detail::rank_of(mask)];
  }

  /// Value of the form at p on the columns of `vectors` (m x k).
  double operator()(const Vec& p, const Mat& vectors) const { return evaluate(coefficients(p), vectors); }

  /// Value of a 0-form.
  double operator()(const Vec& p) const {
    if (k_ != 0) throw DimensionError("scalar evaluation needs a 0-form");
    return coefficients(p)[0];
  }

  /// Contract a coefficient vector of this shape against k vectors.
  double evaluate(const Vec& c, const Mat& vectors) const {
    if (vectors.rows() != m_ || vectors.cols() != k_) throw DimensionError("need k vectors of ambient length");
    if (k_ == 0) return c[0];
    if (k_ == 1) return c.dot(vectors.col(0));
    const auto& ms = detail::masks(m_, k_);
    const std::uint32_t cols = (k_ >= 32) ? ~0u : ((1u << k_) - 1u);
    double s = 0.0;
    for (std::size_t r = 0; r < ms.size(); ++r) {
      if (c[r] == 0.0) continue;
      s += c[r] * detail::minor_det(vectors, ms[r], cols, k_);
    }
    return s;
  }

  /// Antisymmetric matrix B of a 2-form, so that a(u, v) = u^T B v.
  Mat bilinear(const Vec& p) const { return bilinear_from(coefficients(p)); }

  Mat bilinear_from(const Vec& c) const {
    if (k_ != 2) throw DimensionError("bilinear matrix needs a 2-form");
    Mat B = Mat::Zero(m_, m_);
    const auto& ms = detail::masks(m_, 2);
    for (std::size_t r = 0; r < ms.size(); ++r) {
      const int i = std::countr_zero(ms[r]);
      const int j = 31 - std::countl_zero(ms[r]);
      B(i, j) = c[r];
      B(j, i) = -c[r];
    }
    return B;
  }

  static KForm zero(int m, int k) {
    const int n = detail::binom(m, k);
    return KForm(m, k, [n](const Vec&) { return Vec::Zero(n).eval(); });
  }
  static KForm constant(int m, int k, Vec c) {
    if (c.size() != detail::binom(m, k)) throw DimensionError("constant coefficients have wrong length");
    return KForm(m, k, [c = std::move(c)](const Vec&) { return c; });
  }
  static KForm scalar(int m, std::function<double(const Vec&)> f) {
    return KForm(m, 0, [f = std::move(f)](const Vec& p) { return Vec::Constant(1, f(p)).eval(); });
  }
  /// 1-form from its coefficient vector field.
  static KForm one_form(int m, std::function<Vec(const Vec&)> f) { return KForm(m, 1, std::move(f)); }
  /// The coordinate differential dx_i.
  static KForm dx(int m, int i) {
    if (i < 0 || i >= m) throw DimensionError("coordinate index out of range");
    Vec c = Vec::Zero(m);
    c[i] = 1.0;
    return constant(m, 1, c);
  }
  /// dx_I for a strictly increasing multi-index I.
  static KForm basis(int m, std::span<const int> multi_index) {
    std::uint32_t mask = 0;
    for (std::size_t j = 0; j < multi_index.size(); ++j) {
      if (multi_index[j] < 0 || multi_index[j] >= m || (j > 0 && multi_index[j - 1] >= multi_index[j]))
        throw DimensionError("multi-index must be strictly increasing and in range");
      mask |= 1u << multi_index[j];
    }
    const int k = static_cast<int>(multi_index.size());
    Vec c = Vec::Zero(detail::binom(m, k));
    c[detail::rank_of(mask)] = 1.0;
    return constant(m, k, c);
  }

 private:
  int m_ = 0;
  int k_ = 0;
  CoeffFn fn_;
};

inline void require_same_shape(const KForm& a, const KForm& b) {
  if (a.ambient_dim() != b.ambient_dim() || a.degree() != b.degree())
    throw DimensionError("forms differ in ambient dimension or degree");
}

inline KForm operator+(const KForm& a, const KForm& b) {
  require_same_shape(a, b);
  return KForm(a.ambient_dim(), a.degree(), [a, b](const Vec& p) { return (a.coefficients(p) + b.coefficients(p)).eval(); });
}

inline KForm operator-(const KForm& a, const KForm& b) {
  require_same_shape(a, b);
  return KForm(a.ambient_dim(), a.degree(), [a, b](const Vec& p) { return (a.coefficients(p) - b.coefficients(p)).eval(); });
}

inline KForm operator*(double s, const KForm& a) {
  return KForm(a.ambient_dim(), a.degree(), [a, s](const Vec& p) { return (s * a.coefficients(p)).eval(); });
}

inline KForm operator-(const KForm& a) { return -1.0 * a; }

/// Exterior product. Coefficients follow the signed shuffle sum.
inline KForm wedge(const KForm& a, const KForm& b) {
  if (a.ambient_dim() != b.ambient_dim()) throw DimensionError("wedge of forms on different ambient spaces");
  const int m = a.ambient_dim();
  const int k = a.degree(), l = b.degree();
  if (k + l > m) throw DimensionError("wedge degree exceeds ambient dimension");
  auto table = std::make_shared<const std::vector<detail::WedgeEntry>>(detail::wedge_table(m, k, l));
  const int n = detail::binom(m, k + l);
  return KForm(m, k + l, [a, b, table, n](const Vec& p) {
    const Vec ca = a.coefficients(p);
    const Vec cb = b.coefficients(p);
    Vec out = Vec::Zero(n);
    for (const auto& e : *table) out[e.out] += e.sign * ca[e.a] * cb[e.b];
    return out;
  });
}

/// a ∧ a ∧ ... ∧ a (j factors); the base form is evaluated once per point.
inline KForm power(const KForm& a, int j) {
  const int m = a.ambient_dim(), d = a.degree();
  if (j < 0) throw DimensionError("negative wedge power");
  if (j == 0) return KForm::scalar(m, [](const Vec&) { return 1.0; });
  if (d * j > m) throw DimensionError("wedge power exceeds ambient dimension");
  if (j == 1) return a;
  auto tables = std::make_shared<std::vector<std::vector<detail::WedgeEntry>>>();
  for (int i = 1; i < j; ++i) tables->push_back(detail::wedge_table(m, d * i, d));
  const int n = detail::binom(m, d * j);
  std::shared_ptr<const std::vector<std::vector<detail::WedgeEntry>>> frozen = tables;
  return KForm(m, d * j, [a, frozen, m, d, n](const Vec& p) {
    const Vec c = a.coefficients(p);
    Vec acc = c;
    for (std::size_t i = 0; i < frozen->size(); ++i) {
      Vec next = Vec::Zero(detail::binom(m, d * static_cast<int>(i + 2)));
      for (const auto& e : (*frozen)[i]) next[e.out] += e.sign * acc[e.a] * c[e.b];
      acc = std::move(next);
    }
    (void)n;
    return acc;
  });
}

/// Exterior derivative by central differences on each coordinate:
/// (da)_J = sum over i in J of (-1)^pos(i) * d_i a_{J\i}.
inline KForm ext_deriv(const KForm& a, DiffStep step = {}) {
  const int m = a.ambient_dim(), k = a.degree();
  if (k + 1 > m) throw DimensionError("exterior derivative degree exceeds ambient dimension");
  if (!(step.h > 0.0)) throw PreconditionError("finite-difference step must be positive");
  auto table = std::make_shared<const std::vector<std::vector<detail::IndexTerm>>>(detail::derivative_table(m, k));
  const Eigen::Index na = a.size();
  return KForm(m, k + 1, [a, step, table, m, na](const Vec& p) {
    const double h = step.at(p);
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("non-positive local step", p);
    auto partials = [&](double hh) {
      Mat D(na, m);
      Vec q = p;
      for (int i = 0; i < m; ++i) {
        q[i] = p[i] + hh;
        const Vec plus = a.coefficients(q);
        q[i] = p[i] - hh;
        const Vec minus = a.coefficients(q);
        q[i] = p[i];
        D.col(i) = (plus - minus) / (2.0 * hh);
      }
      return D;
    };
    Mat D = partials(h);
    if (step.richardson) D = (4.0 * partials(0.5 * h) - D) / 3.0;
    Vec out(static_cast<Eigen::Index>(table->size()));
    for (std::size_t r = 0; r < table->size(); ++r) {
      double s = 0.0;
      for (const auto& t : (*table)[r]) s += t.sign * D(t.rank, t.coord);
      out[static_cast<Eigen::Index>(r)] = s;
    }
    return out;
  });
}

struct VecField {
  int dim = 0;
  std::function<Vec(const Vec&)> eval;

  Vec operator()(const Vec& p) const {
    Vec v = eval(p);
    if (v.size() != dim) throw DimensionError("vector field returned wrong length");
    return v;
  }
};

inline VecField operator*(double s, const VecField& X) {
  return {X.dim, [X, s](const Vec& p) { return (s * X(p)).eval(); }};
}

/// Interior product ι_X a.
inline KForm interior(const VecField& X, const KForm& a) {
  if (a.degree() < 1) throw DimensionError("interior product of a 0-form");
  if (X.dim != a.ambient_dim()) throw DimensionError("vector field and form live in different dimensions");
  auto table = std::make_shared<const std::vector<std::vector<detail::IndexTerm>>>(
      detail::interior_table(a.ambient_dim(), a.degree()));
  return KForm(a.ambient_dim(), a.degree() - 1, [X, a, table](const Vec& p) {
    const Vec c = a.coefficients(p);
    const Vec x = X(p);
    Vec out(static_cast<Eigen::Index>(table->size()));
    for (std::size_t r = 0; r < table->size(); ++r) {
      double s = 0.0;
      for (const auto& t : (*table)[r]) s += t.sign * x[t.coord] * c[t.rank];
      out[static_cast<Eigen::Index>(r)] = s;
    }
    return out;
  });
}

/// A smooth map R^source -> R^target with an optional analytic Jacobian.
struct SmoothMap {
  int source_dim = 0;
  int target_dim = 0;
  std::function<Vec(const Vec&)> eval;
  std::function<Mat(const Vec&)> jacobian_fn;
  DiffStep step{1e-5, true, {}};

  Vec operator()(const Vec& p) const {
    if (p.size() != source_dim) throw DimensionError("map applied to point of wrong dimension");
    Vec q = eval(p);
    if (q.size() != target_dim) throw DimensionError("map returned point of wrong dimension");
    return q;
  }

  /// target_dim x source_dim Jacobian (analytic when available).
  Mat jacobian(const Vec& p) const {
    if (jacobian_fn) return jacobian_fn(p);
    return fd_jacobian(p);
  }

  Mat fd_jacobian(const Vec& p) const { return fd_jacobian(p, step.at(p)); }

  Mat fd_jacobian(const Vec& p, double h) const {
    auto central = [&](double hh) {
      Mat J(target_dim, source_dim);
      Vec q = p;
      for (int i = 0; i < source_dim; ++i) {
        q[i] = p[i] + hh;
        const Vec plus = (*this)(q);
        q[i] = p[i] - hh;
        const Vec minus = (*this)(q);
        q[i] = p[i];
        J.col(i) = (plus - minus) / (2.0 * hh);
      }
      return J;
    };
    Mat J = central(h);
    if (step.richardson) J = (4.0 * central(0.5 * h) - J) / 3.0;
    return J;
  }
};

inline SmoothMap identity_map(int m) {
  return {m, m, [](const Vec& p) { return p; }, [m](const Vec&) { return Mat::Identity(m, m).eval(); }, {}};
}

/// outer ∘ inner
inline SmoothMap compose(const SmoothMap& outer, const SmoothMap& inner) {
  if (inner.target_dim != outer.source_dim) throw DimensionError("cannot compose maps of mismatched dimensions");
  SmoothMap out;
  out.source_dim = inner.source_dim;
  out.target_dim = outer.target_dim;
  out.eval = [outer, inner](const Vec& p) { return outer(inner(p)); };
  out.jacobian_fn = [outer, inner](const Vec& p) { return (outer.jacobian(inner(p)) * inner.jacobian(p)).eval(); };
  return out;
}

/// φ*a, with (φ*a)(v1..vk) = a(Dφ v1, ..., Dφ vk).
inline KForm pullback(const SmoothMap& phi, const KForm& a) {
  if (a.ambient_dim() != phi.target_dim) throw DimensionError("form does not live on the map's target");
  const int k = a.degree(), s = phi.source_dim, t = phi.target_dim;
  if (k > s) throw DimensionError("form degree exceeds source dimension");
  return KForm(s, k, [phi, a, k, s, t](const Vec& p) {
    const Vec q = phi(p);
    const Vec c = a.coefficients(q);
    if (k == 0) return c;
    const Mat J = phi.jacobian(p);
    if (k == 1) return (J.transpose() * c).eval();
    const auto& src = detail::masks(s, k);
    const auto& tgt = detail::masks(t, k);
    Vec out = Vec::Zero(static_cast<Eigen::Index>(src.size()));
    for (std::size_t I = 0; I < src.size(); ++I) {
      double sum = 0.0;
      for (std::size_t Jr = 0; Jr < tgt.size(); ++Jr) {
        if (c[static_cast<Eigen::Index>(Jr)] == 0.0) continue;
        sum += c[static_cast<Eigen::Index>(Jr)] * detail::minor_det(J, tgt[Jr], src[I], k);
      }
      out[static_cast<Eigen::Index>(I)] = sum;
    }
    return out;
  });
}

/// Pullback along the projection R^new_dim -> R^m onto the leading coordinates.
inline KForm extend(const KForm& a, int new_dim) {
  const int m = a.ambient_dim();
  if (new_dim < m) throw DimensionError("cannot extend to a smaller ambient space");
  const int n = detail::binom(new_dim, a.degree());
  return KForm(new_dim, a.degree(), [a, m, n](const Vec& p) {
    Vec out = Vec::Zero(n);
    out.head(a.size()) = a.coefficients(p.head(m));
    return out;
  });
}

/// A real function with an optional analytic gradient.
struct ScalarField {
  int dim = 0;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient_fn;
  DiffStep step{1e-5, true, {}};

  double operator()(const Vec& p) const { return value(p); }

  Vec gradient(const Vec& p) const {
    if (gradient_fn) return gradient_fn(p);
    const double h = step.at(p);
    auto central = [&](double hh) {
      Vec g(dim);
      Vec q = p;
      for (int i = 0; i < dim; ++i) {
        q[i] = p[i] + hh;
        const double plus = value(q);
        q[i] = p[i] - hh;
        const double minus = value(q);
        q[i] = p[i];
        g[i] = (plus - minus) / (2.0 * hh);
      }
      return g;
    };
    Vec g = central(h);
    if (step.richardson) g = (4.0 * central(0.5 * h) - g) / 3.0;
    return g;
  }

  KForm form() const {
    auto f = value;
    return KForm::scalar(dim, f);
  }

  KForm differential() const {
    ScalarField self = *this;
    return KForm::one_form(dim, [self](const Vec& p) { return self.gradient(p); });
  }
};

/// The 0-form f multiplied into a.
inline KForm scaled(const ScalarField& f, const KForm& a) {
  if (f.dim != a.ambient_dim()) throw DimensionError("scalar field and form live in different dimensions");
  return KForm(a.ambient_dim(), a.degree(), [f, a](const Vec& p) { return (f(p) * a.coefficients(p)).eval(); });
}

/// Wrap the real function f as a ScalarField, gradient by finite differences.
inline ScalarField scalar_field(int dim, std::function<double(const Vec&)> f, std::function<Vec(const Vec&)> grad = {}) {
  return ScalarField{dim, std::move(f), std::move(grad), {1e-5, true, {}}};
}

}  // namespace obv
