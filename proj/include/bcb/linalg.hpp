#ifndef BCB_LINALG_HPP
#define BCB_LINALG_HPP

// Small dense real linear algebra: the matrix type, determinants, adjugates,
// LU solves and orthonormal hyperplane bases. Everything here is pure and
// intended for n up to roughly ten.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bcb/error.hpp"

namespace bcb {

using Vector = std::vector<double>;

/// Dense row-major real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw Error(ErrorKind::InvalidArgument, "ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix from_rows(const std::vector<Vector>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_) throw Error(ErrorKind::InvalidArgument, "ragged matrix rows");
      std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * m.cols_));
    }
    return m;
  }

  static Matrix from_columns(const std::vector<Vector>& cols) {
    if (cols.empty()) return {};
    Matrix m(cols.front().size(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (cols[j].size() != m.rows_) throw Error(ErrorKind::InvalidArgument, "ragged matrix columns");
      for (std::size_t i = 0; i < m.rows_; ++i) m(i, j) = cols[j][i];
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> data() const noexcept { return data_; }

  Vector row(std::size_t i) const {
    return Vector(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                  data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
  }
  Vector col(std::size_t j) const {
    Vector v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// ---- vector helpers --------------------------------------------------------

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double x) { return std::isfinite(x); });
}

inline Vector operator+(Vector a, const Vector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

inline Vector operator-(Vector a, const Vector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

inline Vector operator*(double s, Vector a) {
  for (double& x : a) x *= s;
  return a;
}

inline Vector unit_vector(std::size_t n, std::size_t k) {
  Vector e(n, 0.0);
  e[k] = 1.0;
  return e;
}

// ---- matrix arithmetic -----------------------------------------------------

inline Matrix operator+(Matrix a, const Matrix& b) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) += b(i, j);
  return a;
}

inline Matrix operator-(Matrix a, const Matrix& b) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) -= b(i, j);
  return a;
}

inline Matrix operator*(double s, Matrix a) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) *= s;
  return a;
}

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

/// A x
inline Vector operator*(const Matrix& a, std::span<const double> x) {
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

inline Vector operator*(const Matrix& a, const Vector& x) { return a * std::span<const double>(x); }

/// uᵀ A, returned as a plain vector.
inline Vector left_multiply(std::span<const double> u, const Matrix& a) {
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += u[i] * a(i, j);
  return y;
}

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

/// r qᵀ
inline Matrix outer(std::span<const double> r, std::span<const double> q) {
  Matrix m(r.size(), q.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) m(i, j) = r[i] * q[j];
  return m;
}

inline double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double x : a.data()) s += x * x;
  return std::sqrt(s);
}

inline double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double x : a.data()) m = std::max(m, std::abs(x));
  return m;
}

inline double trace(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) s += a(i, i);
  return s;
}

/// λI − A
inline Matrix shifted(double lambda, const Matrix& a) {
  Matrix m = -1.0 * a;
  for (std::size_t i = 0; i < a.rows(); ++i) m(i, i) += lambda;
  return m;
}

inline void require_square(const Matrix& a, const char* who) {
  if (!a.square() || a.rows() == 0)
    throw Error(ErrorKind::InvalidArgument, std::string(who) + ": matrix must be square and non-empty");
}

// ---- LU --------------------------------------------------------------------

/// PA = LU with partial pivoting, packed in one matrix.
struct LuDecomposition {
  Matrix lu;
  std::vector<std::size_t> perm;
  int sign = 1;
  bool singular = false;
};

/// Pivots with |pivot| ≤ rel_pivot · max|A_ij| mark the matrix as singular.
inline LuDecomposition lu_decompose(const Matrix& a, double rel_pivot = 0.0) {
  require_square(a, "lu_decompose");
  const std::size_t n = a.rows();
  LuDecomposition d{a, {}, 1, false};
  d.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.perm[i] = i;
  const double threshold = rel_pivot * max_abs(a);
  Matrix& m = d.lu;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(m(i, k)) > std::abs(m(p, k))) p = i;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
      std::swap(d.perm[k], d.perm[p]);
      d.sign = -d.sign;
    }
    const double pivot = m(k, k);
    if (pivot == 0.0 || std::abs(pivot) <= threshold) {
      d.singular = true;
      continue;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = m(i, k) / pivot;
      m(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= f * m(k, j);
    }
  }
  return d;
}

/// Solves A x = b; empty when the pivot test declares A singular.
inline std::optional<Vector> solve(const Matrix& a, std::span<const double> b, double rel_pivot = 1e-12) {
  const LuDecomposition d = lu_decompose(a, rel_pivot);
  if (d.singular) return std::nullopt;
  const std::size_t n = a.rows();
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[d.perm[i]];
    for (std::size_t j = 0; j < i; ++j) s -= d.lu(i, j) * x[j];
    x[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= d.lu(i, j) * x[j];
    x[i] = s / d.lu(i, i);
  }
  if (!all_finite(x)) return std::nullopt;
  return x;
}

// ---- determinants and adjugates -------------------------------------------

/// Closed form for n ≤ 3, partial-pivot LU otherwise.
inline double determinant(const Matrix& a) {
  require_square(a, "determinant");
  switch (a.rows()) {
    case 1: return a(0, 0);
    case 2: return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    case 3:
      return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
             a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
             a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
    default: break;
  }
  const LuDecomposition d = lu_decompose(a);
  double det = d.sign;
  for (std::size_t i = 0; i < a.rows(); ++i) det *= d.lu(i, i);
  return det;
}

/// A with row `skip_row` and column `skip_col` removed.
inline Matrix submatrix(const Matrix& a, std::size_t skip_row, std::size_t skip_col) {
  Matrix m(a.rows() - 1, a.cols() - 1);
  for (std::size_t i = 0, r = 0; i < a.rows(); ++i) {
    if (i == skip_row) continue;
    for (std::size_t j = 0, c = 0; j < a.cols(); ++j) {
      if (j == skip_col) continue;
      m(r, c++) = a(i, j);
    }
    ++r;
  }
  return m;
}

/// Classical adjoint: entry (i,j) is (−1)^{i+j} times the minor of A with
/// row j and column i deleted. Well defined for singular A.
inline Matrix adjugate(const Matrix& a) {
  require_square(a, "adjugate");
  const std::size_t n = a.rows();
  if (n == 1) return Matrix{{1.0}};
  Matrix adj(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double minor = determinant(submatrix(a, j, i));
      adj(i, j) = ((i + j) % 2 == 0) ? minor : -minor;
    }
  return adj;
}

/// Both sides of det(A + r qᵀ) = det(A) + qᵀ adj(A) r, computed independently.
struct DetLemmaSides {
  double lhs;
  double rhs;
};

inline DetLemmaSides matrix_det_lemma_check(const Matrix& a, std::span<const double> q,
                                            std::span<const double> r) {
  require_square(a, "matrix_det_lemma_check");
  if (q.size() != a.rows() || r.size() != a.rows())
    throw Error(ErrorKind::InvalidArgument, "matrix_det_lemma_check: dimension mismatch");
  const double lhs = determinant(a + outer(r, q));
  const double rhs = determinant(a) + dot(q, adjugate(a) * r);
  return {lhs, rhs};
}

// ---- hyperplane bases ------------------------------------------------------

/// Orthonormal basis of {x : normalᵀx = 0}, taken from the columns of the
/// Householder reflector that maps `normal` onto its largest-magnitude axis.
/// The construction is branch-for-branch deterministic.
inline std::vector<Vector> hyperplane_basis(std::span<const double> normal) {
  const std::size_t n = normal.size();
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "hyperplane_basis: empty normal");
  if (!all_finite(normal)) throw Error(ErrorKind::InvalidArgument, "hyperplane_basis: non-finite normal");
  const double len = norm(normal);
  if (len == 0.0) throw Error(ErrorKind::ZeroNormal, "hyperplane_basis: normal is zero");

  std::size_t k = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(normal[i]) > std::abs(normal[k])) k = i;

  Vector w(normal.begin(), normal.end());
  for (double& x : w) x /= len;
  w[k] += (w[k] >= 0.0) ? 1.0 : -1.0;
  const double wtw = dot(w, w);

  std::vector<Vector> basis;
  basis.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == k) continue;
    Vector col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = (i == j ? 1.0 : 0.0) - 2.0 * w[i] * w[j] / wtw;
    basis.push_back(std::move(col));
  }
  return basis;
}

}  // namespace bcb

#endif  // BCB_LINALG_HPP
