#ifndef BCB_REDUCTION_HPP
#define BCB_REDUCTION_HPP

// Dimension reduction for continuous piecewise-linear maps.
//
// Shared eigenvalue: if A_L and A_R have a common simple real eigenvalue
// λ ≠ 1 with cᵀv ≠ 0, the left eigenvector u of A_R (scaled through the
// adjugate) is also a left eigenvector of A_L, and
//
//     φ(x) = uᵀx − uᵀb / (1 − λ)
//
// satisfies φ(g(x)) = λ φ(x) everywhere. The zero set ℳ of φ is invariant
// and g restricted to ℳ is an (n−1)-dimensional piecewise-linear map.
//
// Zero eigenvalue: if 0 is a simple eigenvalue of A_L, g_L maps all of ℝⁿ
// onto the hyperplane 𝒩 = {wᵀ(x − Y) = 0} through Y = (I − A_L)⁻¹b, and the
// first-return map to 𝒩 gives an (n−1)-dimensional description.
//
// Unit modulus: eigenvalues on the unit circle are classified as saddle-node
// (+1), period-doubling (−1) or Neimark-Sacker (e^{±iθ}).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "bcb/eigen.hpp"
#include "bcb/error.hpp"
#include "bcb/linalg.hpp"
#include "bcb/pwl_map.hpp"

namespace bcb {

inline constexpr double kSharedMatchTol = 1e-9;
inline constexpr double kMembershipTol = 1e-9;
inline constexpr double kParallelTol = 1e-8;
inline constexpr std::size_t kDefaultMaxReturn = 1'000'000;

struct AffineHyperplane {
  Vector normal;
  std::optional<Vector> base_point;
  double offset = 0.0;  // normalᵀ · base_point

  double residual(std::span<const double> x) const { return dot(normal, x) - offset; }

  /// The single membership authority: |normalᵀx − offset| ≤ tol (1 + ‖x‖).
  bool contains(std::span<const double> x, double tol = kMembershipTol) const {
    return std::abs(residual(x)) <= tol * (1.0 + norm(x));
  }
};

/// Affine coordinates y ∈ ℝ^{n−1} on a hyperplane: x = base + Σ y_i e_i.
struct Chart {
  Vector base;
  std::vector<Vector> basis;  // orthonormal, each orthogonal to the normal

  std::size_t dim() const noexcept { return basis.size(); }

  Vector lift(std::span<const double> y) const {
    Vector x = base;
    for (std::size_t i = 0; i < basis.size(); ++i)
      for (std::size_t k = 0; k < x.size(); ++k) x[k] += y[i] * basis[i][k];
    return x;
  }

  Vector project(std::span<const double> x) const {
    Vector d(x.begin(), x.end());
    d = d - base;
    Vector y(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) y[i] = dot(basis[i], d);
    return y;
  }
};

inline Chart make_chart(Vector base, std::span<const double> normal) {
  return Chart{std::move(base), hyperplane_basis(normal)};
}

/// One affine piece y ↦ M y + k in chart coordinates.
struct ReducedPiece {
  Matrix m;
  Vector k;
};

/// g restricted to an invariant hyperplane, written in chart coordinates.
/// The reduced switching set is {y : switch_normalᵀy + switch_offset = 0},
/// the chart image of ℳ ∩ Σ; the right piece owns it.
struct ReducedPwlMap {
  Chart chart;
  ReducedPiece left;
  ReducedPiece right;
  Vector switch_normal;
  double switch_offset = 0.0;

  std::size_t dim() const noexcept { return chart.dim(); }

  Side side(std::span<const double> y) const {
    return dot(switch_normal, y) + switch_offset < 0.0 ? Side::L : Side::R;
  }

  Vector apply(Side s, std::span<const double> y) const {
    const ReducedPiece& piece = (s == Side::L) ? left : right;
    return piece.m * y + piece.k;
  }

  Vector operator()(std::span<const double> y) const { return apply(side(y), y); }
};

namespace detail {

inline ReducedPiece restrict_piece(const PwlMap& map, Side s, const Chart& chart) {
  const std::size_t d = chart.dim();
  const Matrix& a = map.a(s);
  ReducedPiece piece{Matrix(d, d), Vector(d)};
  for (std::size_t j = 0; j < d; ++j) {
    const Vector image = a * chart.basis[j];
    for (std::size_t i = 0; i < d; ++i) piece.m(i, j) = dot(chart.basis[i], image);
  }
  piece.k = chart.project(map.apply(s, chart.base));
  return piece;
}

}  // namespace detail

/// Restriction of g to a g-invariant hyperplane described by `chart`.
inline ReducedPwlMap restrict_to_chart(const PwlMap& map, const Chart& chart) {
  ReducedPwlMap r;
  r.chart = chart;
  r.left = detail::restrict_piece(map, Side::L, chart);
  r.right = detail::restrict_piece(map, Side::R, chart);
  r.switch_normal.resize(chart.dim());
  for (std::size_t i = 0; i < chart.dim(); ++i) r.switch_normal[i] = dot(chart.basis[i], map.c());
  r.switch_offset = dot(map.c(), chart.base);
  return r;
}

// ---- shared eigenvalue -------------------------------------------------------------

struct SharedEigReduction {
  double lambda = 0.0;       // as an eigenvalue of A_R
  double lambda_left = 0.0;  // the matching eigenvalue of A_L
  Vector u;                  // left eigenvector of A_R, v uᵀ = adj(λI − A_R)
  Vector v;                  // right eigenvector of A_R
  AffineHyperplane manifold;  // ℳ = {φ = 0}; base point X when it exists
  double phi_offset = 0.0;    // uᵀb / (1 − λ)
  bool transversal = true;    // u not parallel to c
  std::optional<ReducedPwlMap> restricted;  // present when transversal
  std::vector<double> other_shared;         // further shared eigenvalues, ascending |λ|
};

inline double phi(const SharedEigReduction& red, std::span<const double> x) { return dot(red.u, x) - red.phi_offset; }

/// u ∥ c up to relative tolerance kParallelTol.
inline bool parallel(std::span<const double> u, std::span<const double> c) {
  const double cc = dot(c, c);
  const double uc = dot(u, c);
  double off = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - uc / cc * c[i];
    off += d * d;
  }
  return std::sqrt(off) <= kParallelTol * norm(u);
}

/// Expresses both pieces in chart coordinates on ℳ. For n = 2 this is a
/// skew tent map whose slopes are the non-shared eigenvalues.
inline ReducedPwlMap restrict_to_manifold(const PwlMap& map, const SharedEigReduction& red) {
  if (parallel(red.u, map.c()))
    throw Error(ErrorKind::NonTransversal,
                "restrict_to_manifold: u is parallel to c, so M does not cross Sigma and A_L, A_R share "
                "every eigenvalue");
  return restrict_to_chart(map, make_chart(*red.manifold.base_point, red.u));
}

/// Looks for a common simple real eigenvalue of A_L and A_R. Returns nullopt
/// when there is none; throws HypothesisViolated when every shared value
/// fails a hypothesis (λ = 1, cᵀv = 0, or multiplicity > 1).
inline std::optional<SharedEigReduction> detect_shared_eigenvalue(const PwlMap& map, double tol = kSharedMatchTol) {
  const Spectrum left = real_eigen(map.a_left());
  const Spectrum right = real_eigen(map.a_right());

  struct Candidate {
    const EigenTriple* l;
    const EigenTriple* r;
  };
  std::vector<Candidate> candidates;
  for (const auto& tl : left.real)
    for (const auto& tr : right.real)
      if (std::abs(tl.lambda - tr.lambda) <= tol * (1.0 + std::abs(tl.lambda))) candidates.push_back({&tl, &tr});
  if (candidates.empty()) return std::nullopt;
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return std::abs(a.r->lambda) < std::abs(b.r->lambda); });

  std::string failures;
  const Candidate* chosen = nullptr;
  for (const auto& cand : candidates) {
    const double lam = cand.r->lambda;
    std::string why;
    if (cand.l->multiplicity > 1 || cand.r->multiplicity > 1 || !cand.r->canonical)
      why = "eigenvalue " + std::to_string(lam) + " has algebraic multiplicity > 1";
    else if (std::abs(lam - 1.0) <= tol)
      why = "shared eigenvalue equals 1";
    else if (std::abs(dot(map.c(), cand.r->v)) <= tol * norm(map.c()) * norm(cand.r->v))
      why = "c^T v = 0 for shared eigenvalue " + std::to_string(lam);
    if (why.empty()) {
      chosen = &cand;
      break;
    }
    failures += (failures.empty() ? "" : "; ") + why;
  }
  if (!chosen) throw Error(ErrorKind::HypothesisViolated, failures);

  SharedEigReduction red;
  red.lambda = chosen->r->lambda;
  red.lambda_left = chosen->l->lambda;
  red.u = chosen->r->u;
  red.v = chosen->r->v;
  red.phi_offset = dot(red.u, map.b()) / (1.0 - red.lambda);
  for (const auto& cand : candidates)
    if (&cand != chosen) red.other_shared.push_back(cand.r->lambda);

  std::optional<Vector> x = piece_fixed_point(map, Side::R);
  if (!x) x = (red.phi_offset / dot(red.u, red.u)) * red.u;
  red.manifold = AffineHyperplane{red.u, x, red.phi_offset};
  red.transversal = !parallel(red.u, map.c());
  if (red.transversal) red.restricted = restrict_to_manifold(map, red);
  return red;
}

// ---- zero eigenvalue ---------------------------------------------------------------

struct ZeroEigReduction {
  AffineHyperplane plane;  // 𝒩 with unit normal w through Y
  Vector w;                // unit left eigenvector of A_L for eigenvalue 0
  Vector y;                // fixed point of g_L
  Chart chart;             // coordinates on 𝒩, based at Y
  double range_residual = 0.0;  // ‖wᵀA_L‖, zero when the range property is exact
};

inline ZeroEigReduction zero_eig_reduction(const PwlMap& map, double tol = kMembershipTol) {
  const Matrix& al = map.a_left();
  const double det = determinant(al);
  if (std::abs(det) > tol)
    throw Error(ErrorKind::NotSingular, "zero_eig_reduction: det(A_L) = " + std::to_string(det));
  const Spectrum spec = real_eigen(al);
  const EigenTriple* zero = nullptr;
  for (const auto& t : spec.real)
    if (!zero || std::abs(t.lambda) < std::abs(zero->lambda)) zero = &t;
  if (!zero) throw Error(ErrorKind::NotSingular, "zero_eig_reduction: A_L has no real eigenvalue near 0");
  if (zero->multiplicity > 1)
    throw Error(ErrorKind::MultipleZero,
                "zero_eig_reduction: eigenvalue 0 has multiplicity " + std::to_string(zero->multiplicity));
  std::optional<Vector> y = piece_fixed_point(map, Side::L);
  if (!y) throw Error(ErrorKind::NoFixedPoint, "zero_eig_reduction: 1 is an eigenvalue of A_L");

  ZeroEigReduction z;
  Vector u, v;
  if (!factor_rank_one(adjugate(-1.0 * al), u, v)) u = zero->u;
  const double len = norm(u);
  for (double& x : u) x /= len;
  z.w = u;
  z.y = *y;
  z.plane = AffineHyperplane{u, y, dot(u, *y)};
  z.chart = make_chart(*y, u);
  z.range_residual = norm(left_multiply(u, al));
  return z;
}

struct InducedMapResult {
  Vector image;
  std::size_t return_time = 0;
  std::vector<Side> itinerary;  // sides of x, g(x), …, g^{j−1}(x)
};

struct InducedSettings {
  std::size_t max_return = kDefaultMaxReturn;
  double escape_radius = kDefaultEscapeRadius;
  double tol = kMembershipTol;
};

/// First return G(x) = g^j(x) to 𝒩. An iterate reached by an L-step lies on
/// 𝒩 by construction; R-step iterates are accepted through the membership test.
inline InducedMapResult induced_map(const PwlMap& map, const ZeroEigReduction& zr, std::span<const double> x,
                                    const InducedSettings& settings = {}) {
  if (x.size() != map.dim()) throw Error(ErrorKind::InvalidArgument, "induced_map: wrong dimension");
  if (!zr.plane.contains(x, settings.tol))
    throw Error(ErrorKind::InvalidArgument, "induced_map: starting point is not on N");
  InducedMapResult res;
  Vector cur(x.begin(), x.end());
  for (std::size_t j = 1; j <= settings.max_return; ++j) {
    const Side s = map.side(cur);
    res.itinerary.push_back(s);
    cur = map.apply(s, cur);
    if (!all_finite(cur) || norm(cur) > settings.escape_radius)
      throw Error(ErrorKind::Escaped, "induced_map: orbit left the escape radius after " + std::to_string(j) + " steps");
    if (s == Side::L || zr.plane.contains(cur, settings.tol)) {
      res.image = std::move(cur);
      res.return_time = j;
      return res;
    }
  }
  throw Error(ErrorKind::NoReturn, "induced_map: no return within " + std::to_string(settings.max_return) + " steps");
}

// ---- unit modulus -----------------------------------------------------------------

enum class UnitKind { SaddleNode, PeriodDoubling, NeimarkSacker };

constexpr std::string_view to_string(UnitKind k) noexcept {
  switch (k) {
    case UnitKind::SaddleNode: return "SN";
    case UnitKind::PeriodDoubling: return "PD";
    case UnitKind::NeimarkSacker: return "NS";
  }
  return "?";
}

struct UnitModulusReport {
  Side side = Side::L;
  UnitKind kind = UnitKind::SaddleNode;
  double theta = 0.0;  // argument in (0, π) for NS; 0 for SN, π for PD
  bool resonant = false;  // θ ∈ {2π/3, π/2}
};

inline std::vector<UnitModulusReport> classify_unit_modulus(const PwlMap& map, double tol = kSharedMatchTol) {
  std::vector<UnitModulusReport> out;
  for (const Side s : {Side::L, Side::R}) {
    const Spectrum spec = real_eigen(map.a(s));
    for (const auto& t : spec.real) {
      if (std::abs(t.lambda - 1.0) <= tol) out.push_back({s, UnitKind::SaddleNode, 0.0, false});
      else if (std::abs(t.lambda + 1.0) <= tol) out.push_back({s, UnitKind::PeriodDoubling, std::numbers::pi, false});
    }
    for (const auto& c : spec.complex) {
      if (std::abs(c.modulus - 1.0) > tol) continue;
      const double theta = std::atan2(c.im, c.re);
      const bool resonant =
          std::abs(theta - 2.0 * std::numbers::pi / 3.0) <= tol || std::abs(theta - std::numbers::pi / 2.0) <= tol;
      out.push_back({s, UnitKind::NeimarkSacker, theta, resonant});
    }
  }
  return out;
}

// ---- combined report ---------------------------------------------------------------

struct ReductionReport {
  Spectrum left;
  Spectrum right;
  FixedPoints fixed;
  Vector p;
  std::optional<SharedEigReduction> shared;
  std::optional<std::string> shared_error;
  std::optional<ZeroEigReduction> zero;
  std::optional<std::string> zero_error;
  std::vector<UnitModulusReport> unit_modulus;
};

/// Runs every scenario; failures of one section are recorded, not thrown.
inline ReductionReport analyze_map(const PwlMap& map, double tol = kSharedMatchTol) {
  ReductionReport r;
  r.left = real_eigen(map.a_left());
  r.right = real_eigen(map.a_right());
  r.fixed = fixed_points(map);
  r.p = map.p();
  try {
    r.shared = detect_shared_eigenvalue(map, tol);
  } catch (const Error& e) {
    r.shared_error = e.what();
  }
  try {
    r.zero = zero_eig_reduction(map, tol);
  } catch (const Error& e) {
    r.zero_error = e.what();
  }
  r.unit_modulus = classify_unit_modulus(map, tol);
  return r;
}

}  // namespace bcb

#endif  // BCB_REDUCTION_HPP
