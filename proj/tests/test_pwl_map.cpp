#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bcb/eigen.hpp"
#include "bcb/pwl_map.hpp"
#include "test_support.hpp"

using namespace bcb;
using namespace bcb::testing;
using Catch::Approx;

namespace {

// δ_L = 0.4, τ_R = −1.3, δ_R = −0.3 with τ_L = 2.2.
PwlMap shared2d() { return bcnf({2, {2.2, 0.0, 0.4}, {-1.3, 0.0, -0.3}}); }

}  // namespace

TEST_CASE("bcnf builds the companion-form pieces", "[pwl]") {
  SECTION("2D") {
    const PwlMap m = shared2d();
    CHECK(m.a_left() == Matrix{{2.2, 1.0}, {-0.4, 0.0}});
    CHECK(m.a_right() == Matrix{{-1.3, 1.0}, {0.3, 0.0}});
    CHECK(m.b() == Vector{1.0, 0.0});
    CHECK(m.c() == Vector{1.0, 0.0});
  }
  SECTION("all zero") {
    const PwlMap m = bcnf({2, {}, {}});
    CHECK(m.a_left() == Matrix{{0.0, 1.0}, {0.0, 0.0}});
    CHECK(m.a_right() == m.a_left());
  }
  SECTION("3D keeps +delta in the bottom-left entry") {
    const PwlMap m = bcnf({3, {0.0, -1.0, 0.18973854}, {0.0, 3.0, -0.6}});
    CHECK(m.a_left() == Matrix{{0.0, 1.0, 0.0}, {1.0, 0.0, 1.0}, {0.18973854, 0.0, 0.0}});
    CHECK(m.a_right() == Matrix{{0.0, 1.0, 0.0}, {-3.0, 0.0, 1.0}, {-0.6, 0.0, 0.0}});
    CHECK(m.b() == Vector{1.0, 0.0, 0.0});
  }
  SECTION("unsupported dimension") {
    CHECK_THROWS_AS(bcnf({4, {}, {}}), Error);
    try {
      bcnf({1, {}, {}});
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UnsupportedDimension);
    }
  }
}

TEST_CASE("bcnf trace, determinant and second invariant", "[pwl][property]") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 2 + trial % 2;
    const PieceCoeffs l{uniform(rng, -3, 3), uniform(rng, -3, 3), uniform(rng, -3, 3)};
    const PieceCoeffs r{uniform(rng, -3, 3), uniform(rng, -3, 3), uniform(rng, -3, 3)};
    const PwlMap m = bcnf({dim, l, r});
    for (const auto& [a, k] : {std::pair{m.a_left(), l}, std::pair{m.a_right(), r}}) {
      CHECK(std::abs(trace(a) - k.tau) < 1e-12);
      CHECK(std::abs(laplace_det(a) - k.delta) < 1e-12);
      const auto cp = char_poly(a);
      if (dim == 2) {
        // μ² − τμ + δ at five sample points.
        for (double mu : {-2.0, -0.5, 0.0, 0.7, 3.0})
          CHECK(std::abs(laplace_det(shifted(mu, a)) - (mu * mu - k.tau * mu + k.delta)) < 1e-12);
      } else {
        CHECK(std::abs(cp[1] - k.sigma) < 1e-12);  // e₂ of the eigenvalues
        for (double mu : {-2.0, -0.5, 0.0, 0.7, 3.0})
          CHECK(std::abs(laplace_det(shifted(mu, a)) - (mu * mu * mu - k.tau * mu * mu + k.sigma * mu - k.delta)) <
                1e-11);
      }
    }
  }
}

TEST_CASE("continuity vector", "[pwl]") {
  const Vector p = validate_continuity(shared2d());
  CHECK(p[0] == Approx(-3.5).margin(1e-15));
  CHECK(p[1] == Approx(0.7).margin(1e-15));

  const Matrix a{{0.3, 0.1}, {-0.2, 0.5}};
  CHECK(validate_continuity(PwlMap(a, a, {1, 0}, {0.3, -1.0})) == Vector{0.0, 0.0});

  const Vector c{0.6, 0.8};
  const PwlMap m(a, a + outer(Vector{1.0, 0.0}, c), {1, 0}, c);
  const Vector pe = validate_continuity(m);
  CHECK(pe[0] == Approx(1.0).margin(1e-15));
  CHECK(pe[1] == Approx(0.0).margin(1e-15));

  SECTION("discontinuous pieces are rejected") {
    try {
      PwlMap(a, a + Matrix{{0.0, 1.0}, {0.0, 0.0}}, {1, 0}, {1, 0});
      FAIL("expected NotContinuous");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NotContinuous);
    }
  }
  SECTION("zero normal") { CHECK_THROWS_AS(PwlMap(a, a, {1, 0}, {0, 0}), Error); }
}

TEST_CASE("continuity holds on the switching manifold", "[pwl][property]") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 4);
    const Vector c = random_vector(rng, n);
    const Matrix al = random_matrix(rng, n);
    const PwlMap m(al, al + outer(random_vector(rng, n), c), random_vector(rng, n), c);
    validate_continuity(m);
    const auto basis = hyperplane_basis(c);
    Vector x(n, 0.0);
    for (const auto& e : basis) x = x + uniform(rng, -5, 5) * e;
    const Vector gl = m.apply(Side::L, x), gr = m.apply(Side::R, x);
    CHECK(norm(gl - gr) <= 1e-10 * (1 + norm(x)));
  }
}

TEST_CASE("eval picks the piece by the sign of c^T x", "[pwl]") {
  const PwlMap m = shared2d();
  CHECK(eval(m, Vector{0.0, 0.0}) == m.b());
  const Vector l = eval(m, Vector{-1.0, 0.0});
  CHECK(l[0] == Approx(-1.2).margin(1e-15));
  CHECK(l[1] == Approx(0.4).margin(1e-15));
  const Vector r = eval(m, Vector{1.0, 0.0});
  CHECK(r[0] == Approx(-0.3).margin(1e-15));
  CHECK(r[1] == Approx(0.3).margin(1e-15));
  CHECK(m.side(Vector{0.0, 5.0}) == Side::R);
  CHECK(m.side(Vector{-1e-300, 5.0}) == Side::L);
  CHECK_THROWS_AS(eval(m, Vector{1.0}), Error);
}

TEST_CASE("fixed points", "[pwl]") {
  SECTION("X of the right piece") {
    const FixedPoints fp = fixed_points(shared2d());
    REQUIRE(fp.x.point);
    CHECK((*fp.x.point)[0] == Approx(0.5).margin(1e-15));
    CHECK((*fp.x.point)[1] == Approx(0.15).margin(1e-15));
    CHECK(fp.x.admissible);
    CHECK_FALSE(fp.x.borderline);
    const Vector gx = shared2d().apply(Side::R, *fp.x.point);
    CHECK(norm(gx - *fp.x.point) < 1e-10);
  }
  SECTION("A_R = I has no X") {
    const Matrix i2 = Matrix::identity(2);
    const FixedPoints fp = fixed_points(PwlMap(i2, i2, {1, 0}, {1, 0}));
    CHECK_FALSE(fp.x.point);
    CHECK_FALSE(fp.y.point);
  }
  SECTION("Y with a zero eigenvalue of A_L") {
    const PwlMap m = bcnf({2, {1.3, 0.0, 0.0}, {-1.4, 0.0, 1.5}});
    const FixedPoints fp = fixed_points(m);
    REQUIRE(fp.y.point);
    // Oracle: (I − A_L)Y = e₁ with A_L = [[1.3, 1], [0, 0]] gives Y = (1/(1 − 1.3), 0).
    CHECK((*fp.y.point)[0] == Approx(-10.0 / 3.0).epsilon(1e-14));
    CHECK((*fp.y.point)[1] == Approx(0.0).margin(1e-15));
    CHECK(fp.y.admissible == (dot(m.c(), *fp.y.point) < 0.0));
  }
  SECTION("fixed-point residuals on random maps") {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 2 + static_cast<std::size_t>(trial % 3);
      const Vector c = random_vector(rng, n);
      const Matrix al = random_matrix(rng, n);
      const PwlMap m(al, al + outer(random_vector(rng, n), c), random_vector(rng, n), c);
      const FixedPoints fp = fixed_points(m);
      if (fp.x.point) CHECK(norm(m.apply(Side::R, *fp.x.point) - *fp.x.point) <= 1e-10 * (1 + norm(*fp.x.point)));
      if (fp.y.point) CHECK(norm(m.apply(Side::L, *fp.y.point) - *fp.y.point) <= 1e-10 * (1 + norm(*fp.y.point)));
    }
  }
  SECTION("fixed point on the boundary is flagged") {
    // b = 0 puts both fixed points at the origin, on Σ.
    const Matrix a{{0.5, 0.0}, {0.0, 0.5}};
    const FixedPoints fp = fixed_points(PwlMap(a, a, {0, 0}, {1, 0}));
    CHECK(fp.x.borderline);
    CHECK(fp.x.admissible);
    CHECK_FALSE(fp.y.admissible);
  }
}

TEST_CASE("orbits", "[pwl]") {
  SECTION("starting at X stays at X") {
    const PwlMap m = shared2d();
    const Vector x = *fixed_points(m).x.point;
    const OrbitData o = orbit(m, x, {0, 50, 1e12});
    REQUIRE(o.points.size() == 50);
    for (std::size_t k = 0; k < o.points.size(); ++k) {
      CHECK(norm(o.points[k] - x) < 1e-14);
      CHECK(o.itinerary[k] == Side::R);
    }
    CHECK_FALSE(o.escaped);
  }
  SECTION("invariants: itinerary matches sign, consecutive points are images") {
    const PwlMap m = shared2d();
    const OrbitData o = orbit(m, Vector{0.1, 0.1}, {10, 500, 1e12});
    CHECK(o.transient_discarded == 10);
    for (std::size_t k = 0; k < o.points.size(); ++k) {
      CHECK((o.itinerary[k] == Side::L) == (dot(m.c(), o.points[k]) < 0.0));
      if (k + 1 < o.points.size()) CHECK(m(o.points[k]) == o.points[k + 1]);
    }
  }
  SECTION("escape") {
    const Matrix a = 2.0 * Matrix::identity(2);
    const OrbitData o = orbit(PwlMap(a, a, {1, 0}, {1, 0}), Vector{0.3, 0.2}, {0, 3000, 1e8});
    CHECK(o.escaped);
    CHECK(o.escape_index > 0);
    CHECK(o.points.size() == o.escape_index);
  }
  SECTION("non-finite iterates") {
    const Matrix a = 1e200 * Matrix::identity(2);
    CHECK_THROWS_AS(orbit(PwlMap(a, a, {1, 0}, {1, 0}), Vector{1e200, 0.0},
                          {0, 10, std::numeric_limits<double>::infinity()}),
                    Error);
  }
  SECTION("bad settings") {
    CHECK_THROWS_AS(orbit(shared2d(), Vector{0.0, 0.0}, {0, 0, 1.0}), Error);
    CHECK_THROWS_AS(orbit(shared2d(), Vector{0.0, 0.0}, {0, 1, 0.0}), Error);
  }
  SECTION("reproducible") {
    const OrbitData a = orbit(shared2d(), Vector{0.1, 0.1});
    const OrbitData b = orbit(shared2d(), Vector{0.1, 0.1});
    CHECK(a == b);
    CHECK(a.points.size() == kDefaultKeep);
    CHECK(a.transient_discarded == kDefaultTransient);
  }
}
