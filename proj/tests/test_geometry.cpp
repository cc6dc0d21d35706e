#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fraccaloric/errors.hpp"
#include "fraccaloric/geometry.hpp"
#include "fraccaloric/rng.hpp"

using namespace fc;

namespace {

Pt random_in_bbox(const Domain& d, Rng& rng) {
    Pt lo = d.bbox_lo(), hi = d.bbox_hi();
    Pt p{0, 0, 0};
    for (int i = 0; i < d.dim(); ++i) p[i] = lo[i] + (hi[i] - lo[i]) * rng.uniform();
    return p;
}

std::vector<Domain> catalog() {
    return {Domain::ball(2, pt(0, 0), 1.0), Domain::box(2, pt(0, 0), pt(1, 1)),
            Domain::lshape(1.0, 0.5), Domain::sector(1.0, 1.5 * M_PI),
            Domain::polygon({pt(0, 0), pt(1.2, 0.1), pt(0.9, 1.0), pt(0.2, 0.8)})};
}

}  // namespace

TEST_CASE("signed distance closed forms") {
    Domain disk = Domain::ball(2, pt(0, 0), 1.0);
    CHECK(disk.signed_distance(pt(0, 0)) == doctest::Approx(1.0));
    CHECK(disk.signed_distance(pt(2, 0)) == doctest::Approx(-1.0));
    Domain sq = Domain::box(2, pt(0, 0), pt(1, 1));
    CHECK(sq.signed_distance(pt(0.25, 0.5)) == doctest::Approx(0.25));
    CHECK(sq.signed_distance(pt(-3, 0.5)) == doctest::Approx(-3.0));
    Domain ls = Domain::lshape(1.0, 0.5);
    CHECK(ls.signed_distance(pt(0.25, 0.25)) == doctest::Approx(0.25));
    CHECK(ls.signed_distance(pt(0.75, 0.75)) < 0);  // inside the notch
    Domain sec = Domain::sector(1.0, 1.5 * M_PI);
    CHECK(sec.signed_distance(pt(-0.5, 0.0)) > 0);
    CHECK(sec.signed_distance(pt(0.5, -0.1)) < 0);  // removed wedge
}

TEST_CASE("signed distance is 1-Lipschitz") {
    Rng rng(11, 0);
    for (const Domain& d : catalog()) {
        for (int i = 0; i < 10000; ++i) {
            Pt a = random_in_bbox(d, rng), b = random_in_bbox(d, rng);
            double lhs = std::abs(d.signed_distance(a) - d.signed_distance(b));
            CHECK(lhs <= dist(a, b) + 1e-12);
        }
    }
}

TEST_CASE("interior shrinkage is nested") {
    Rng rng(12, 0);
    for (const Domain& d : catalog()) {
        for (int i = 0; i < 2000; ++i) {
            Pt p = random_in_bbox(d, rng);
            double sd = d.signed_distance(p);
            // membership in D_r = {delta > 1/r} is monotone in r
            if (sd > 1.0 / 4.0) CHECK(sd > 1.0 / 8.0);
        }
    }
}

TEST_CASE("corkscrew point containment") {
    Rng rng(13, 0);
    for (const Domain& d : catalog()) {
        double kappa = d.kappa();
        int tested = 0;
        while (tested < 100) {
            Pt y = random_in_bbox(d, rng);
            if (d.signed_distance(y) < -0.05) continue;  // want closure points
            double r = d.r0() / 2 * (0.1 + 0.9 * rng.uniform());
            Pt a = d.corkscrew_point(y, r);
            ++tested;
            CHECK(d.signed_distance(a) >= kappa * r - 1e-10);
            CHECK(dist(a, y) <= r - kappa * r + 1e-10);
            // probe the containment B(a, kappa r) in D cap B(y, r)
            for (int probe = 0; probe < 100; ++probe) {
                Pt u = rng.direction(2);
                Pt q = a + (kappa * r * rng.uniform()) * u;
                CHECK(d.signed_distance(q) > -1e-9);
                CHECK(dist(q, y) <= r + 1e-9);
            }
        }
    }
}

TEST_CASE("corkscrew large scale returns the reference point") {
    Domain d = Domain::ball(2, pt(0, 0), 1.0);
    Pt a = d.corkscrew_point(pt(1, 0), d.r0());
    CHECK(dist(a, d.x0()) == doctest::Approx(0.0));
    // interior points are their own corkscrew at small scales
    CHECK(dist(d.corkscrew_point(pt(0, 0), 0.1), pt(0, 0)) == doctest::Approx(0.0));
}

TEST_CASE("corkscrew pair") {
    Domain d = Domain::ball(2, pt(0, 0), 1.0);
    // large r_{x,y} falls back to x0
    Pt a = d.corkscrew_pair(pt(0.5, 0), pt(-0.5, 0));
    CHECK(dist(a, d.x0()) == doctest::Approx(0.0));
    // deep interior point is its own pair corkscrew
    Domain big = Domain::ball(2, pt(0, 0), 40.0);
    Pt x = pt(1.0, 0.3);
    CHECK(dist(big.corkscrew_pair(x, x), x) == doctest::Approx(0.0));
    // near-boundary pair: verify the three containments by probing
    Rng rng(14, 0);
    Domain wide = Domain::ball(2, pt(0, 0), 1.0);
    wide.set_localization(32.0 * 0.08, 1.0);  // r0 large enough for the near-boundary branch
    Pt p1 = pt(0.95, 0), p2 = pt(0.97, 0);
    Pt cp = wide.corkscrew_pair(p1, p2);
    double rxy = std::max({dist(p1, p2), wide.signed_distance(p1), wide.signed_distance(p2)});
    for (int probe = 0; probe < 10000; ++probe) {
        Pt u = rng.direction(2);
        Pt q = cp + (wide.kappa() * rxy * rng.uniform()) * u;
        CHECK(wide.signed_distance(q) > -1e-9);
        CHECK(dist(q, p1) <= 3 * rxy + 1e-9);
        CHECK(dist(q, p2) <= 3 * rxy + 1e-9);
    }
}

TEST_CASE("ray crossings agree with membership flips") {
    Rng rng(15, 0);
    for (const Domain& d : catalog()) {
        for (int i = 0; i < 200; ++i) {
            Pt z = random_in_bbox(d, rng);
            if (d.signed_distance(z) <= 1e-6) continue;
            Pt dir = rng.direction(2);
            auto cross = d.ray_boundary_crossings(z, dir);
            REQUIRE(!cross.empty());
            // after the last crossing the ray is outside (domains are bounded)
            Pt far = z + (cross.back() + 1.0 + d.diameter()) * dir;
            CHECK(!d.contains(far));
            // the first segment stays inside
            Pt mid0 = z + (0.5 * cross.front()) * dir;
            CHECK(d.contains(mid0));
            // every boundary crossing point is on the boundary
            for (double r : cross)
                CHECK(std::abs(d.signed_distance(z + r * dir)) < 1e-7);
        }
    }
}

TEST_CASE("boundary probes sit on the boundary with interior axes") {
    for (const Domain& d : catalog()) {
        for (const auto& bp : d.boundary_probes()) {
            CHECK(std::abs(d.signed_distance(bp.q)) < 1e-9);
            CHECK(norm(bp.inward) == doctest::Approx(1.0));
            CHECK(d.signed_distance(bp.q + 1e-4 * bp.inward) > 0);
        }
    }
}

TEST_CASE("dilation scales geometry exactly") {
    Domain d = Domain::box(2, pt(0, 0), pt(1, 1));
    Domain d2 = d.dilated(2.0);
    CHECK(d2.signed_distance(pt(1.0, 1.0)) == doctest::Approx(1.0));
    CHECK(d2.r0() == doctest::Approx(2 * d.r0()));
    CHECK(d2.kappa() == doctest::Approx(d.kappa()));
}

TEST_CASE("dimension guards") {
    CHECK_THROWS_AS(Domain::ball(4, pt(0, 0), 1.0), DomainError);
    CHECK_THROWS_AS(Domain::ball(2, pt(0, 0), -1.0), DomainError);
    CHECK_THROWS_AS(Domain::sector(1.0, 7.0), DomainError);
    Domain d = Domain::ball(2, pt(0, 0), 1.0);
    CHECK_THROWS_AS(d.set_x0(pt(5, 5)), DomainError);
}
