#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bcb/analysis.hpp"
#include "bcb/reduction.hpp"
#include "test_support.hpp"

using namespace bcb;
using namespace bcb::testing;

namespace {

BcnfParams tau_family(double tau_l) { return {2, {tau_l, 0.0, 0.4}, {-1.3, 0.0, -0.3}}; }

double diameter(const std::vector<Vector>& pts) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, norm(pts[i] - pts[j]));
  return d;
}

// Brute-force reference without the early exit.
double hausdorff_reference(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  auto directed = [](const std::vector<Vector>& p, const std::vector<Vector>& q) {
    double worst = 0.0;
    for (const auto& x : p) {
      double best = INFINITY;
      for (const auto& y : q) best = std::min(best, norm(x - y));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

}  // namespace

TEST_CASE("hausdorff examples", "[analysis]") {
  const std::vector<Vector> zero{{0.0, 0.0}};
  const std::vector<Vector> e1{{1.0, 0.0}};
  const std::vector<Vector> both{{0.0, 0.0}, {1.0, 0.0}};
  CHECK(hausdorff(both, both) == 0.0);
  CHECK(hausdorff(zero, e1) == 1.0);
  CHECK(hausdorff(both, zero) == 1.0);
  CHECK(hausdorff(zero, both) == 1.0);
  CHECK_THROWS_AS(hausdorff(zero, std::vector<Vector>{}), Error);
  try {
    hausdorff(std::vector<Vector>{}, zero);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyCloud);
  }
}

TEST_CASE("hausdorff is a metric on finite clouds", "[analysis][property]") {
  Rng rng(12);
  auto cloud = [&](std::size_t n) {
    std::vector<Vector> c(n);
    for (auto& p : c) p = random_vector(rng, 3, -2.0, 2.0);
    return c;
  };
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = cloud(1 + trial % 40), b = cloud(1 + (trial * 7) % 33), c = cloud(1 + (trial * 3) % 25);
    const double ab = hausdorff(a, b), ba = hausdorff(b, a);
    CHECK(ab == ba);
    CHECK(ab > 0.0);
    CHECK(std::abs(ab - hausdorff_reference(a, b)) <= 1e-15);
    CHECK(ab <= hausdorff(a, c) + hausdorff(c, b) + 1e-14);
    CHECK(hausdorff(a, a) == 0.0);
    // Same set, different order and multiplicity.
    auto shuffled = a;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    shuffled.push_back(a.front());
    CHECK(hausdorff(a, shuffled) == 0.0);
  }
}

TEST_CASE("attractor clouds", "[analysis]") {
  SECTION("tau_L = 2.2 attractor lies on the invariant line") {
    const PwlMap m = bcnf(tau_family(2.2));
    const auto red = detect_shared_eigenvalue(m);
    REQUIRE(red);
    const AttractorCloud cloud = attractor(m, Vector{0.1, 0.1});
    REQUIRE(cloud.points.size() == 3000);
    CHECK_FALSE(cloud.escaped);
    for (const auto& p : cloud.points) CHECK(std::abs(phi(*red, p)) < 1e-8);
  }
  SECTION("3D shared case attractor lies on the invariant plane") {
    double lo = -1.0, hi = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (mid * mid * mid + 3.0 * mid + 0.6 < 0.0 ? lo : hi) = mid;
    }
    const double lam = lo;
    const PwlMap m = bcnf({3, {0.0, -1.0, lam * lam * lam - lam}, {0.0, 3.0, -0.6}});
    const auto red = detect_shared_eigenvalue(m);
    REQUIRE(red);
    const AttractorCloud cloud = attractor(m, default_initial_condition(m.b()));
    REQUIRE_FALSE(cloud.escaped);
    REQUIRE(cloud.points.size() == 3000);
    for (const auto& p : cloud.points) CHECK(std::abs(red->manifold.residual(p)) <= 1e-8 * norm(red->u));
  }
  SECTION("contracting map collapses to its fixed point") {
    const Matrix a = 0.5 * Matrix::identity(2);
    const PwlMap m(a, a, {1.0, 0.0}, {1.0, 0.0});
    const AttractorCloud cloud = attractor(m, Vector{3.0, -4.0}, {200, 100, 1e12}, "contracting");
    CHECK(cloud.provenance == "contracting");
    CHECK(diameter(cloud.points) <= 1e-10);
    CHECK(norm(cloud.points.front() - Vector{2.0, 0.0}) <= 1e-10);
  }
  SECTION("escaped orbit yields an empty cloud") {
    const Matrix a = 2.0 * Matrix::identity(2);
    const AttractorCloud cloud = attractor(PwlMap(a, a, {1.0, 0.0}, {1.0, 0.0}), Vector{0.1, 0.1});
    CHECK(cloud.escaped);
    CHECK(cloud.points.empty());
  }
  SECTION("deterministic") {
    const PwlMap m = bcnf(tau_family(2.0));
    CHECK(attractor(m, Vector{0.1, 0.1}).points == attractor(m, Vector{0.1, 0.1}).points);
  }
}

TEST_CASE("parameter names", "[analysis]") {
  CHECK(parse_param("tl", 2) == BcnfParam::TauL);
  CHECK(parse_param("dr", 3) == BcnfParam::DeltaR);
  CHECK(parse_param("sl", 3) == BcnfParam::SigmaL);
  CHECK_THROWS_AS(parse_param("sl", 2), Error);
  CHECK_THROWS_AS(parse_param("xx", 2), Error);
  const BcnfParams p = with_param(tau_family(2.0), BcnfParam::DeltaR, 0.7);
  CHECK(p.right.delta == 0.7);
  CHECK(p.left.tau == 2.0);
}

TEST_CASE("scan", "[analysis]") {
  SECTION("three tau_L values") {
    const ScanResult r = scan(tau_family(2.0), "tl", {2.0, 2.2, 2.4});
    REQUIRE(r.clouds.size() == 3);
    REQUIRE(r.consecutive_hausdorff.size() == 2);
    double diam = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK_FALSE(r.errors[k]);
      CHECK(r.clouds[k].points.size() == kDefaultKeep);
      diam = std::max(diam, diameter(std::vector<Vector>(r.clouds[k].points.begin(), r.clouds[k].points.begin() + 300)));
    }
    for (const auto& h : r.consecutive_hausdorff) {
      REQUIRE(h);
      CHECK(std::isfinite(*h));
      CHECK(*h < diam);
    }
  }
  SECTION("single value") {
    const ScanResult r = scan(tau_family(2.0), "tl", {2.2});
    CHECK(r.consecutive_hausdorff.empty());
    CHECK(r.clouds.size() == 1);
  }
  SECTION("delta_L family with a zero eigenvalue") {
    const ScanResult r = scan({2, {1.3, 0.0, 0.0}, {-1.4, 0.0, 1.5}}, "dl", {-0.08, 0.0, 0.08});
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK_FALSE(r.errors[k]);
      CHECK_FALSE(r.clouds[k].escaped);
    }
  }
  SECTION("ordering is independent of the worker count") {
    ScanSettings one, many;
    one.threads = 1;
    many.threads = 4;
    one.orbit = many.orbit = {100, 200, 1e12};
    const std::vector<double> values{2.0, 2.1, 2.2, 2.3, 2.4, 2.5};
    const ScanResult a = scan(tau_family(2.0), "tl", values, one);
    const ScanResult b = scan(tau_family(2.0), "tl", values, many);
    for (std::size_t k = 0; k < values.size(); ++k) CHECK(a.clouds[k].points == b.clouds[k].points);
    CHECK(a.consecutive_hausdorff == b.consecutive_hausdorff);
  }
  SECTION("divergent values are recorded, not thrown") {
    const ScanResult r = scan(tau_family(2.0), "tl", {2.2, 5.0});
    CHECK_FALSE(r.errors[0]);
    CHECK(r.clouds[1].escaped);
    REQUIRE(r.errors[1]);
    CHECK_FALSE(r.consecutive_hausdorff[0]);
  }
  SECTION("bad input") {
    CHECK_THROWS_AS(scan(tau_family(2.0), "tl", {}), Error);
    CHECK_THROWS_AS(scan(tau_family(2.0), "sr", {1.0}), Error);
  }
}
