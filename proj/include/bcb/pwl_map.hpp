#ifndef BCB_PWL_MAP_HPP
#define BCB_PWL_MAP_HPP

// Continuous piecewise-linear maps
//
//   g(x) = A_L x + b   if cᵀx < 0
//          A_R x + b   if cᵀx ≥ 0
//
// with A_R = A_L + p cᵀ, the border-collision normal form in two and three
// dimensions, and orbit/fixed-point utilities.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bcb/error.hpp"
#include "bcb/linalg.hpp"

namespace bcb {

enum class Side : char { L = 'L', R = 'R' };

inline constexpr double kDefaultContinuityTol = 1e-10;
inline constexpr double kDefaultEscapeRadius = 1e12;
inline constexpr std::size_t kDefaultTransient = 1000;
inline constexpr std::size_t kDefaultKeep = 3000;
inline constexpr double kFixedPointPivotTol = 1e-12;

namespace detail {

/// p = (A_R − A_L)c / cᵀc and the residual ‖A_R − A_L − p cᵀ‖_F.
struct ContinuityFit {
  Vector p;
  double residual = 0.0;
  double jump_norm = 0.0;
};

inline ContinuityFit fit_continuity(const Matrix& al, const Matrix& ar, const Vector& c) {
  const Matrix jump = ar - al;
  Vector p = jump * c;
  const double cc = dot(c, c);
  for (double& x : p) x /= cc;
  return {p, frobenius_norm(jump - outer(p, c)), frobenius_norm(jump)};
}

}  // namespace detail

/// Immutable continuous piecewise-linear map. Construction checks shapes,
/// finiteness, c ≠ 0 and continuity with relative tolerance 1e−10.
class PwlMap {
 public:
  PwlMap(Matrix a_left, Matrix a_right, Vector b, Vector c)
      : al_(std::move(a_left)), ar_(std::move(a_right)), b_(std::move(b)), c_(std::move(c)) {
    const std::size_t n = al_.rows();
    if (n == 0 || !al_.square() || !ar_.square() || ar_.rows() != n || b_.size() != n || c_.size() != n)
      throw Error(ErrorKind::InvalidArgument, "PwlMap: inconsistent dimensions");
    if (!al_.all_finite() || !ar_.all_finite() || !all_finite(b_) || !all_finite(c_))
      throw Error(ErrorKind::InvalidArgument, "PwlMap: non-finite entries");
    if (norm(c_) == 0.0) throw Error(ErrorKind::ZeroNormal, "PwlMap: switching normal c is zero");
    const auto fit = detail::fit_continuity(al_, ar_, c_);
    if (fit.residual > kDefaultContinuityTol * std::max(1.0, fit.jump_norm))
      throw Error(ErrorKind::NotContinuous,
                  "PwlMap: A_R - A_L is not of the form p c^T (residual " + std::to_string(fit.residual) + ")");
    p_ = fit.p;
  }

  std::size_t dim() const noexcept { return b_.size(); }
  const Matrix& a_left() const noexcept { return al_; }
  const Matrix& a_right() const noexcept { return ar_; }
  const Matrix& a(Side s) const noexcept { return s == Side::L ? al_ : ar_; }
  const Vector& b() const noexcept { return b_; }
  const Vector& c() const noexcept { return c_; }
  /// Continuity vector with A_R = A_L + p cᵀ.
  const Vector& p() const noexcept { return p_; }

  /// Σ belongs to the right piece.
  Side side(std::span<const double> x) const { return dot(c_, x) < 0.0 ? Side::L : Side::R; }

  Vector apply(Side s, std::span<const double> x) const { return a(s) * x + b_; }

  Vector operator()(std::span<const double> x) const {
    if (x.size() != dim()) throw Error(ErrorKind::InvalidArgument, "PwlMap: state has wrong dimension");
    return apply(side(x), x);
  }

 private:
  Matrix al_, ar_;
  Vector b_, c_, p_;
};

/// Coefficients of one BCNF piece. sigma is ignored in two dimensions.
struct PieceCoeffs {
  double tau = 0.0;
  double sigma = 0.0;
  double delta = 0.0;
};

struct BcnfParams {
  int dimension = 2;
  PieceCoeffs left;
  PieceCoeffs right;
};

namespace detail {

inline Matrix bcnf_matrix(int dim, const PieceCoeffs& k) {
  if (dim == 2) return Matrix{{k.tau, 1.0}, {-k.delta, 0.0}};
  return Matrix{{k.tau, 1.0, 0.0}, {-k.sigma, 0.0, 1.0}, {k.delta, 0.0, 0.0}};
}

}  // namespace detail

/// Companion-form normal form with b = c = e₁. The 3D pieces carry +δ in the
/// bottom-left entry, so det(A_Z) = δ_Z in both dimensions.
inline PwlMap bcnf(const BcnfParams& params) {
  if (params.dimension != 2 && params.dimension != 3)
    throw Error(ErrorKind::UnsupportedDimension,
                "bcnf: dimension must be 2 or 3, got " + std::to_string(params.dimension));
  const auto n = static_cast<std::size_t>(params.dimension);
  return PwlMap(detail::bcnf_matrix(params.dimension, params.left),
                detail::bcnf_matrix(params.dimension, params.right), unit_vector(n, 0), unit_vector(n, 0));
}

/// Returns p with ‖A_R − A_L − p cᵀ‖_F ≤ tol, or throws NotContinuous.
inline Vector validate_continuity(const PwlMap& map, double tol = kDefaultContinuityTol) {
  const auto fit = detail::fit_continuity(map.a_left(), map.a_right(), map.c());
  if (fit.residual > tol)
    throw Error(ErrorKind::NotContinuous, "validate_continuity: residual " + std::to_string(fit.residual));
  return fit.p;
}

inline Vector eval(const PwlMap& map, std::span<const double> x) { return map(x); }

// ---- orbits ------------------------------------------------------------------

struct OrbitSettings {
  std::size_t transient = kDefaultTransient;
  std::size_t keep = kDefaultKeep;
  double escape_radius = kDefaultEscapeRadius;
};

struct OrbitData {
  std::vector<Vector> points;
  std::vector<Side> itinerary;
  std::size_t transient_discarded = 0;
  bool escaped = false;
  std::size_t escape_index = 0;  // iterate index at which ‖x‖ first exceeded the radius

  friend bool operator==(const OrbitData&, const OrbitData&) = default;
};

/// Iterates x₀, g(x₀), …; keeps iterates transient … transient+keep−1.
/// Stops early (escaped = true) once ‖x_k‖ exceeds the escape radius.
inline OrbitData orbit(const PwlMap& map, std::span<const double> x0, const OrbitSettings& settings = {}) {
  if (settings.keep < 1) throw Error(ErrorKind::InvalidArgument, "orbit: keep must be at least 1");
  if (!(settings.escape_radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "orbit: escape radius must be positive");
  if (x0.size() != map.dim()) throw Error(ErrorKind::InvalidArgument, "orbit: x0 has wrong dimension");

  OrbitData out;
  out.points.reserve(settings.keep);
  out.itinerary.reserve(settings.keep);
  Vector x(x0.begin(), x0.end());
  const std::size_t total = settings.transient + settings.keep;
  for (std::size_t k = 0; k < total; ++k) {
    if (k > 0) x = map(x);
    if (!all_finite(x))
      throw Error(ErrorKind::NonFinite, "orbit: non-finite iterate at index " + std::to_string(k));
    if (norm(x) > settings.escape_radius) {
      out.escaped = true;
      out.escape_index = k;
      break;
    }
    if (k < settings.transient) {
      ++out.transient_discarded;
      continue;
    }
    out.itinerary.push_back(map.side(x));
    out.points.push_back(x);
  }
  return out;
}

// ---- fixed points --------------------------------------------------------------

struct FixedPoint {
  std::optional<Vector> point;
  bool admissible = false;
  bool borderline = false;  // |cᵀx| < 1e−12: the point sits on Σ
};

struct FixedPoints {
  FixedPoint x;  // of g_R: (I − A_R)X = b, admissible iff cᵀX ≥ 0
  FixedPoint y;  // of g_L: (I − A_L)Y = b, admissible iff cᵀY < 0
};

inline std::optional<Vector> piece_fixed_point(const PwlMap& map, Side s) {
  return solve(shifted(1.0, map.a(s)), map.b(), kFixedPointPivotTol);
}

inline FixedPoints fixed_points(const PwlMap& map) {
  FixedPoints fp;
  if (auto x = piece_fixed_point(map, Side::R)) {
    const double s = dot(map.c(), *x);
    fp.x = {std::move(x), s >= 0.0, std::abs(s) < 1e-12};
  }
  if (auto y = piece_fixed_point(map, Side::L)) {
    const double s = dot(map.c(), *y);
    fp.y = {std::move(y), s < 0.0, std::abs(s) < 1e-12};
  }
  return fp;
}

}  // namespace bcb

#endif  // BCB_PWL_MAP_HPP
