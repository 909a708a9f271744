#ifndef BCB_EIGEN_HPP
#define BCB_EIGEN_HPP

// Real eigenstructure of small dense matrices.
//
// Eigenvalues come from closed-form characteristic-polynomial roots when
// n ≤ 3 and from a shifted QR iteration on the Hessenberg form otherwise.
// For each simple real eigenvalue λ the left/right eigenvectors are read off
// the rank-one adjugate, adj(λI − A) = v uᵀ, so the pair carries that exact
// scaling. Repeated eigenvalues fall back to unit-norm null vectors.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "bcb/error.hpp"
#include "bcb/linalg.hpp"

namespace bcb {

struct EigenTriple {
  double lambda = 0.0;
  Vector u;  // left eigenvector: uᵀA = λuᵀ
  Vector v;  // right eigenvector: Av = λv
  int multiplicity = 1;
  bool canonical = false;  // true when v uᵀ = adj(λI − A)
};

/// One member of a complex-conjugate pair, im > 0.
struct ComplexPair {
  double re = 0.0;
  double im = 0.0;
  double modulus = 0.0;
};

struct Spectrum {
  std::vector<EigenTriple> real;  // ascending by lambda
  std::vector<ComplexPair> complex;
};

inline constexpr double kDefaultEigenTol = 1e-10;

namespace detail {

using cplx = std::complex<double>;

inline double cluster_threshold(const Matrix& a) { return 1e-8 * (1.0 + frobenius_norm(a)); }

/// Roots of μ² + b μ + c without cancellation in the larger root.
inline void quadratic_roots(double b, double c, std::vector<cplx>& out) {
  const double disc = b * b - 4.0 * c;
  if (disc >= 0.0) {
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + std::copysign(sq, b));
    if (q == 0.0) {
      out.emplace_back(0.0, 0.0);
      out.emplace_back(0.0, 0.0);
    } else {
      out.emplace_back(q, 0.0);
      out.emplace_back(c / q, 0.0);
    }
  } else {
    const double re = -0.5 * b;
    const double im = 0.5 * std::sqrt(-disc);
    out.emplace_back(re, im);
    out.emplace_back(re, -im);
  }
}

/// μ³ + a2 μ² + a1 μ + a0
inline double cubic_value(double a2, double a1, double a0, double x) { return ((x + a2) * x + a1) * x + a0; }

inline double polish_cubic_root(double a2, double a1, double a0, double x) {
  for (int it = 0; it < 8; ++it) {
    const double f = cubic_value(a2, a1, a0, x);
    const double df = (3.0 * x + 2.0 * a2) * x + a1;
    if (df == 0.0) break;
    const double next = x - f / df;
    if (!(std::abs(cubic_value(a2, a1, a0, next)) < std::abs(f))) break;
    x = next;
  }
  return x;
}

inline void cubic_roots(double a2, double a1, double a0, std::vector<cplx>& out) {
  const double shift = a2 / 3.0;
  const double p = a1 - a2 * a2 / 3.0;
  const double q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
  const double disc = 0.25 * q * q + p * p * p / 27.0;
  if (disc > 0.0) {
    // One real root; deflate to get the conjugate pair.
    const double big = -std::copysign(std::cbrt(0.5 * std::abs(q) + std::sqrt(disc)), q);
    const double small = (big != 0.0) ? -p / (3.0 * big) : 0.0;
    const double r = polish_cubic_root(a2, a1, a0, big + small - shift);
    out.emplace_back(r, 0.0);
    quadratic_roots(a2 + r, a1 + r * (a2 + r), out);
  } else {
    const double rad = std::sqrt(std::max(0.0, -p / 3.0));
    if (rad == 0.0) {
      for (int k = 0; k < 3; ++k) out.emplace_back(-shift, 0.0);
      return;
    }
    const double arg = std::clamp(-0.5 * q / (rad * rad * rad), -1.0, 1.0);
    const double phi = std::acos(arg);
    for (int k = 0; k < 3; ++k) {
      const double y = 2.0 * rad * std::cos((phi - 2.0 * std::numbers::pi * k) / 3.0);
      out.emplace_back(polish_cubic_root(a2, a1, a0, y - shift), 0.0);
    }
  }
}

/// Householder reduction to upper Hessenberg form.
inline Matrix hessenberg(Matrix h) {
  const std::size_t n = h.rows();
  for (std::size_t k = 0; k + 2 < n; ++k) {
    Vector x(n - k - 1);
    for (std::size_t i = k + 1; i < n; ++i) x[i - k - 1] = h(i, k);
    const double alpha = norm(x);
    if (alpha == 0.0) continue;
    x[0] += std::copysign(alpha, x[0]);
    const double xx = dot(x, x);
    if (xx == 0.0) continue;
    // H ← P H P with P = I − 2 x xᵀ / xᵀx acting on rows/cols k+1..n−1.
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) s += x[i - k - 1] * h(i, j);
      s *= 2.0 / xx;
      for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= s * x[i - k - 1];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += h(i, j) * x[j - k - 1];
      s *= 2.0 / xx;
      for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= s * x[j - k - 1];
    }
    for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
  }
  return h;
}

/// Eigenvalues of a Hessenberg matrix by complex-shifted QR with Givens
/// rotations and Wilkinson shifts; exceptional shifts every tenth sweep.
inline void hessenberg_qr_eigenvalues(const Matrix& hr, std::vector<cplx>& out) {
  const std::size_t n = hr.rows();
  std::vector<cplx> h(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h[i * n + j] = hr(i, j);
  auto at = [&](std::size_t i, std::size_t j) -> cplx& { return h[i * n + j]; };

  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr int kMaxIterPerEigen = 200;
  const double anorm = std::max(frobenius_norm(hr), std::numeric_limits<double>::min());

  std::size_t hi = n - 1;
  int iter = 0;
  std::vector<cplx> found;
  while (true) {
    if (hi == 0) {
      found.push_back(at(0, 0));
      break;
    }
    // Locate the start of the active unreduced block.
    std::size_t lo = hi;
    while (lo > 0) {
      const double s = std::abs(at(lo, lo)) + std::abs(at(lo - 1, lo - 1));
      if (std::abs(at(lo, lo - 1)) <= eps * (s == 0.0 ? anorm : s)) {
        at(lo, lo - 1) = 0.0;
        break;
      }
      --lo;
    }
    if (lo == hi) {
      found.push_back(at(hi, hi));
      --hi;
      iter = 0;
      continue;
    }
    if (++iter > kMaxIterPerEigen)
      throw Error(ErrorKind::IllConditioned, "real_eigen: QR iteration did not converge");

    cplx mu;
    if (iter % 10 == 0) {
      mu = at(hi, hi) + cplx(std::abs(at(hi, hi - 1)) * 0.75, std::abs(at(hi, hi - 1)) * 0.25);
    } else {
      const cplx a = at(hi - 1, hi - 1), b = at(hi - 1, hi), c = at(hi, hi - 1), d = at(hi, hi);
      const cplx tr_half = 0.5 * (a + d);
      const cplx det = a * d - b * c;
      const cplx disc = std::sqrt(tr_half * tr_half - det);
      const cplx r1 = tr_half + disc, r2 = tr_half - disc;
      mu = (std::abs(r1 - d) < std::abs(r2 - d)) ? r1 : r2;
    }

    for (std::size_t i = lo; i <= hi; ++i) at(i, i) -= mu;
    struct Rot {
      cplx c, s;
    };
    std::vector<Rot> rots;
    rots.reserve(hi - lo);
    for (std::size_t k = lo; k < hi; ++k) {
      const cplx x = at(k, k), y = at(k + 1, k);
      const double r = std::hypot(std::abs(x), std::abs(y));
      Rot g{1.0, 0.0};
      if (r != 0.0) g = {x / r, y / r};
      // Apply Gᴴ from the left to rows k, k+1.
      for (std::size_t j = k; j < n; ++j) {
        const cplx t1 = at(k, j), t2 = at(k + 1, j);
        at(k, j) = std::conj(g.c) * t1 + std::conj(g.s) * t2;
        at(k + 1, j) = -g.s * t1 + g.c * t2;
      }
      rots.push_back(g);
    }
    for (std::size_t k = lo; k < hi; ++k) {
      const Rot& g = rots[k - lo];
      for (std::size_t i = 0; i <= std::min(k + 1, hi); ++i) {
        const cplx t1 = at(i, k), t2 = at(i, k + 1);
        at(i, k) = t1 * g.c + t2 * g.s;
        at(i, k + 1) = -t1 * std::conj(g.s) + t2 * std::conj(g.c);
      }
    }
    for (std::size_t i = lo; i <= hi; ++i) at(i, i) += mu;
  }
  out.insert(out.end(), found.begin(), found.end());
}

inline std::vector<cplx> eigenvalues(const Matrix& a) {
  std::vector<cplx> roots;
  const std::size_t n = a.rows();
  if (n == 1) {
    roots.emplace_back(a(0, 0), 0.0);
  } else if (n == 2) {
    quadratic_roots(-trace(a), determinant(a), roots);
  } else if (n == 3) {
    const double sigma = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0) + a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0) +
                         a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
    cubic_roots(-trace(a), sigma, -determinant(a), roots);
  } else {
    hessenberg_qr_eigenvalues(hessenberg(a), roots);
  }
  return roots;
}

/// Newton on det(λI − A), using d/dλ det(λI − A) = trace adj(λI − A).
inline double polish_simple_eigenvalue(const Matrix& a, double lambda) {
  double f = determinant(shifted(lambda, a));
  for (int it = 0; it < 4 && f != 0.0; ++it) {
    const double df = trace(adjugate(shifted(lambda, a)));
    if (df == 0.0 || !std::isfinite(df)) break;
    const double next = lambda - f / df;
    const double fn = determinant(shifted(next, a));
    if (!(std::abs(fn) < std::abs(f))) break;
    lambda = next;
    f = fn;
  }
  return lambda;
}

/// Unit null vector of m, first significant component positive.
inline Vector null_vector(const Matrix& m, double rank_tol) {
  const std::size_t n = m.rows();
  Matrix r = m;
  std::vector<std::size_t> col_of_row;
  std::vector<bool> pivot_col(n, false);
  std::size_t row = 0;
  const double threshold = rank_tol * std::max(1.0, max_abs(m));
  for (std::size_t col = 0; col < n && row < n; ++col) {
    std::size_t p = row;
    for (std::size_t i = row + 1; i < n; ++i)
      if (std::abs(r(i, col)) > std::abs(r(p, col))) p = i;
    if (std::abs(r(p, col)) <= threshold) continue;
    for (std::size_t j = 0; j < n; ++j) std::swap(r(row, j), r(p, j));
    for (std::size_t i = 0; i < n; ++i) {
      if (i == row) continue;
      const double f = r(i, col) / r(row, col);
      for (std::size_t j = 0; j < n; ++j) r(i, j) -= f * r(row, j);
    }
    pivot_col[col] = true;
    col_of_row.push_back(col);
    ++row;
  }
  std::size_t free_col = n;
  for (std::size_t j = 0; j < n; ++j)
    if (!pivot_col[j]) {
      free_col = j;
      break;
    }
  Vector x(n, 0.0);
  if (free_col == n) {
    // Numerically full rank: use the direction of the smallest pivot.
    free_col = col_of_row.back();
    x[free_col] = 1.0;
  } else {
    x[free_col] = 1.0;
    for (std::size_t i = 0; i < col_of_row.size(); ++i) {
      const std::size_t pc = col_of_row[i];
      x[pc] = -r(i, free_col) / r(i, pc);
    }
  }
  const double len = norm(x);
  for (double& xi : x) xi /= len;
  for (double xi : x)
    if (std::abs(xi) > 1e-14) {
      if (xi < 0.0)
        for (double& y : x) y = -y;
      break;
    }
  return x;
}

}  // namespace detail

/// Writes adj as v uᵀ using its largest-magnitude entry (i, j) as pivot:
/// v = column j, uᵀ = row i / adj(i, j).
inline bool factor_rank_one(const Matrix& adj, Vector& u, Vector& v) {
  std::size_t pi = 0, pj = 0;
  for (std::size_t i = 0; i < adj.rows(); ++i)
    for (std::size_t j = 0; j < adj.cols(); ++j)
      if (std::abs(adj(i, j)) > std::abs(adj(pi, pj))) {
        pi = i;
        pj = j;
      }
  const double pivot = adj(pi, pj);
  if (pivot == 0.0) return false;
  v = adj.col(pj);
  u = adj.row(pi);
  for (double& x : u) x /= pivot;
  return true;
}

/// Real eigenvalues (with multiplicities and eigenvectors) plus complex-pair
/// summaries. Roots closer than 1e−8·(1 + ‖A‖) are merged; this also folds a
/// conjugate pair with negligible imaginary part into a real double root.
inline Spectrum real_eigen(const Matrix& a, double tol = kDefaultEigenTol) {
  require_square(a, "real_eigen");
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "real_eigen: tol must be positive");
  if (!a.all_finite()) throw Error(ErrorKind::InvalidArgument, "real_eigen: non-finite entries");

  const std::vector<detail::cplx> roots = detail::eigenvalues(a);
  const double merge = detail::cluster_threshold(a);

  Spectrum spec;
  std::vector<std::pair<double, int>> reals;  // (value, multiplicity)
  std::vector<detail::cplx> upper;
  for (const auto& z : roots) {
    if (std::abs(z.imag()) <= 0.5 * merge) {
      reals.emplace_back(z.real(), 1);
    } else if (z.imag() > 0.0) {
      upper.push_back(z);
    }
  }
  std::sort(reals.begin(), reals.end());
  std::vector<std::pair<double, int>> clustered;
  for (const auto& [value, mult] : reals) {
    if (!clustered.empty() && std::abs(value - clustered.back().first / clustered.back().second) <= merge) {
      clustered.back().first += value;
      clustered.back().second += mult;
    } else {
      clustered.emplace_back(value, mult);
    }
  }

  for (auto& [sum, mult] : clustered) {
    EigenTriple t;
    t.multiplicity = mult;
    t.lambda = sum / mult;
    if (mult == 1) {
      t.lambda = detail::polish_simple_eigenvalue(a, t.lambda);
      const Matrix adj = adjugate(shifted(t.lambda, a));
      t.canonical = factor_rank_one(adj, t.u, t.v);
    }
    if (!t.canonical) {
      const Matrix m = shifted(t.lambda, a);
      t.v = detail::null_vector(m, std::sqrt(merge));
      t.u = detail::null_vector(transpose(m), std::sqrt(merge));
    }
    spec.real.push_back(std::move(t));
  }

  std::sort(upper.begin(), upper.end(),
            [](const auto& x, const auto& y) { return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag()); });
  for (const auto& z : upper) spec.complex.push_back({z.real(), z.imag(), std::abs(z)});
  return spec;
}

/// All eigenvalues as a multiset of complex numbers, real ones repeated by
/// multiplicity and each complex pair expanded to both members.
inline std::vector<std::complex<double>> eigenvalue_multiset(const Spectrum& s) {
  std::vector<std::complex<double>> out;
  for (const auto& t : s.real)
    for (int k = 0; k < t.multiplicity; ++k) out.emplace_back(t.lambda, 0.0);
  for (const auto& c : s.complex) {
    out.emplace_back(c.re, c.im);
    out.emplace_back(c.re, -c.im);
  }
  return out;
}

}  // namespace bcb

#endif  // BCB_EIGEN_HPP
