#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "fraccaloric/errors.hpp"
#include "fraccaloric/special.hpp"
#include "fraccaloric/stable.hpp"
#include "oracles.hpp"

using namespace fc;

TEST_CASE("jump constant closed forms") {
    CHECK(jump_constant(2, 1.0) == doctest::Approx(1.0 / (2 * M_PI)).epsilon(1e-14));
    CHECK(jump_constant(1, 1.0) == doctest::Approx(1.0 / M_PI).epsilon(1e-14));
    // pole of Gamma(-alpha/2) at alpha -> 2
    CHECK(jump_constant(2, 1.999) < jump_constant(2, 1.9));
    CHECK(jump_constant(2, 1.9999) < 1e-3 * jump_constant(2, 1.0));
    CHECK_THROWS_AS(jump_constant(2, 2.0), DomainError);
    CHECK_THROWS_AS(jump_constant(2, 0.0), DomainError);
}

TEST_CASE("density matches the Cauchy closed forms") {
    for (int d : {1, 2, 3}) {
        StableModel m(d, 1.0);
        for (double r : {0.0, 0.17, 0.8, 2.1, 6.5}) {
            double want = oracle::cauchy_nd(d, 1.0, r);
            CHECK(m.density(1.0, r) == doctest::Approx(want).epsilon(1e-9));
        }
        // and at a non-unit time
        CHECK(m.density(0.37, 0.9) ==
              doctest::Approx(oracle::cauchy_nd(d, 0.37, 0.9)).epsilon(1e-9));
    }
}

TEST_CASE("density scaling identity") {
    StableModel m(2, 1.4);
    Rng rng(3, 0);
    for (int i = 0; i < 20; ++i) {
        double t = 0.2 + 3.0 * rng.uniform();
        double r = 2.0 * rng.uniform() * std::pow(t, 1.0 / 1.4);
        double lhs = m.density(t, r);
        double rhs = std::pow(t, -2.0 / 1.4) * m.density(1.0, r * std::pow(t, -1.0 / 1.4));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
    }
}

TEST_CASE("density two-sided bound has a finite constant") {
    StableModel m(2, 0.8);
    double cmax = 0.0, cmin = 1e300;
    for (int i = 1; i <= 10; ++i)
        for (int j = 1; j <= 10; ++j) {
            double t = 0.05 * i;
            double r = 0.3 * j * std::pow(t, 1.0 / 0.8);
            double bound = std::min(std::pow(t, -2.0 / 0.8), t * std::pow(r, -2.0 - 0.8));
            double ratio = m.density(t, r) / bound;
            cmax = std::max(cmax, ratio);
            cmin = std::min(cmin, ratio);
        }
    CHECK(cmin > 0);
    CHECK(cmax < 1e3);
}

TEST_CASE("density integrates to one") {
    for (double alpha : {0.7, 1.0, 1.5}) {
        StableModel m(2, alpha);
        double mass = oracle::simpson(
            [&](double r) { return m.density(1.0, r) * 2 * M_PI * r; }, 0.0, 9.0, 4000);
        // tail beyond the truncation from the first-jump asymptote
        mass += 2 * M_PI * m.jump_const() * std::pow(9.0, -alpha) / alpha;
        CHECK(mass == doctest::Approx(1.0).epsilon(2e-4));
    }
}

TEST_CASE("semigroup property by convolution quadrature") {
    StableModel m(2, 1.2);
    double s = 0.4, t = 0.7;
    // radial x angular quadrature of (p_s * p_t)(x)
    for (double rx : {0.3, 1.1}) {
        double conv = 0.0;
        int nr = 160, na = 48;
        double rmax = 14.0;
        for (int i = 0; i < nr; ++i) {
            double r = (i + 0.5) * rmax / nr;
            double inner = 0.0;
            for (int j = 0; j < na; ++j) {
                double phi = (j + 0.5) * 2 * M_PI / na;
                double d2 = std::sqrt(r * r + rx * rx - 2 * r * rx * std::cos(phi));
                inner += m.density(t, d2);
            }
            conv += m.density(s, r) * inner * (2 * M_PI / na) * r * (rmax / nr);
        }
        CHECK(conv == doctest::Approx(m.density(s + t, rx)).epsilon(1e-4));
    }
}

TEST_CASE("subordinator has the right Laplace transform") {
    for (double alpha : {0.6, 1.0, 1.6}) {
        StableModel m(2, alpha);
        Rng rng(5, 0);
        int n = 400000;
        double t = 0.8;
        double acc1 = 0, acc2 = 0;
        for (int i = 0; i < n; ++i) {
            double s = m.sample_subordinator(t, rng);
            acc1 += std::exp(-0.5 * s);
            acc2 += std::exp(-2.0 * s);
        }
        CHECK(acc1 / n == doctest::Approx(std::exp(-t * std::pow(0.5, alpha / 2))).epsilon(0.004));
        CHECK(acc2 / n == doctest::Approx(std::exp(-t * std::pow(2.0, alpha / 2))).epsilon(0.004));
    }
}

TEST_CASE("increment characteristic function and isotropy") {
    StableModel m(2, 1.3);
    Rng rng(6, 0);
    int n = 1000000;
    double t = 0.5;
    double mx = 0, my = 0;
    double cf[4] = {0, 0, 0, 0};
    double freqs[4][2] = {{0.5, 0.0}, {1.3, 0.4}, {0.0, 2.0}, {-0.7, 0.7}};
    for (int i = 0; i < n; ++i) {
        Pt x = m.sample_increment(t, rng);
        double nx = norm(x);
        if (nx > 0) {
            mx += x[0] / nx;
            my += x[1] / nx;
        }
        for (int k = 0; k < 4; ++k) cf[k] += std::cos(freqs[k][0] * x[0] + freqs[k][1] * x[1]);
    }
    double tol = 4.0 / std::sqrt(double(n));
    CHECK(std::hypot(mx / n, my / n) <= tol);
    for (int k = 0; k < 4; ++k) {
        double xi = std::hypot(freqs[k][0], freqs[k][1]);
        CHECK(std::abs(cf[k] / n - std::exp(-t * std::pow(xi, 1.3))) <= tol);
    }
}

TEST_CASE("alpha=1 radial law matches the Cauchy CDF") {
    StableModel m(2, 1.0);
    Rng rng(7, 0);
    int n = 100000;
    std::vector<double> radii(n);
    for (int i = 0; i < n; ++i) radii[i] = norm(m.sample_increment(1.0, rng));
    std::sort(radii.begin(), radii.end());
    double dks = 0.0;
    for (int i = 0; i < n; ++i) {
        double f = oracle::cauchy2d_radial_cdf(radii[i]);
        dks = std::max(dks, std::max(std::abs(f - double(i) / n), std::abs(f - double(i + 1) / n)));
    }
    CHECK(dks <= 2.0 / std::sqrt(double(n)));
    CHECK(ks_pvalue(dks, n) > 0.001);
}

TEST_CASE("ball poisson kernel closed form and normalization") {
    StableModel m(2, 1.0);
    // BGR constant times the displayed factors
    double v = ball_poisson_kernel(m, 1.0, pt(0, 0), pt(2, 0));
    CHECK(v == doctest::Approx(1.0 / (M_PI * M_PI) / std::sqrt(3.0) / 4.0).epsilon(1e-12));
    CHECK(std::abs(ball_poisson_mass(m, 1.0, pt(0, 0)) - 1.0) < 1e-6);
    CHECK(std::abs(ball_poisson_mass(m, 1.0, pt(0.5, 0)) - 1.0) < 1e-6);
    CHECK(std::abs(ball_poisson_mass(StableModel(2, 1.5), 2.0, pt(0.4, -0.8)) - 1.0) < 1e-6);
    // rotation symmetry about the axis through x and monotonicity along rays
    double a = ball_poisson_kernel(m, 1.0, pt(0.3, 0), pt(1.5, 0.8));
    double b = ball_poisson_kernel(m, 1.0, pt(0.3, 0), pt(1.5, -0.8));
    CHECK(a == doctest::Approx(b).epsilon(1e-13));
    CHECK(ball_poisson_kernel(m, 1.0, pt(0.3, 0), pt(2.0, 0)) >
          ball_poisson_kernel(m, 1.0, pt(0.3, 0), pt(3.0, 0)));
    CHECK_THROWS_AS(ball_poisson_kernel(m, 1.0, pt(2, 0), pt(3, 0)), DomainError);
}

TEST_CASE("ball exit sampler goodness of fit") {
    StableModel m(2, 1.0);
    BallExitSampler samp(m, 1.0, pt(0.5, 0));
    Rng rng(8, 0);
    int n = 100000;
    // radial bins aligned with the tabulated marginal
    std::vector<double> redges = {1.0, 1.1, 1.3, 1.8, 3.0, 1e18};
    int NA = 4, NR = int(redges.size()) - 1;
    std::vector<double> counts(NR * NA, 0.0);
    for (int i = 0; i < n; ++i) {
        Pt v = samp.sample(rng);
        double s = norm(v);
        CHECK(s > 1.0);
        double a = std::atan2(v[1], v[0]);
        if (a < 0) a += 2 * M_PI;
        int ia = std::min(NA - 1, int(a / (2 * M_PI) * NA));
        int ir = 0;
        while (ir < NR - 1 && s >= redges[ir + 1]) ++ir;
        counts[ir * NA + ia] += 1.0;
    }
    // expected probabilities by independent quadrature of the kernel in
    // polar coordinates with the cosh substitution for the rim
    auto cellp = [&](double s0, double s1, double p0, double p1) {
        double u0 = std::acosh(std::max(s0, 1.0));
        double u1 = std::acosh(std::min(s1, 1e7));
        return oracle::simpson(
            [&](double u) {
                double s = std::cosh(u), sh = std::sinh(u);
                double c = bgr_constant(2, 1.0) * std::pow(1 - 0.25, 0.5);
                return oracle::simpson(
                    [&](double phi) {
                        double q = s * s + 0.25 - s * std::cos(phi);
                        return c / std::max(sh, 1e-300) * s * sh / q;
                    },
                    p0, p1, 64);
            },
            u0 + 1e-12, u1, 400);
    };
    double chi2 = 0.0;
    int cells = 0;
    for (int ir = 0; ir < NR; ++ir)
        for (int ia = 0; ia < NA; ++ia) {
            double e = n * cellp(redges[ir], std::min(redges[ir + 1], 1e6),
                                 2 * M_PI * ia / NA, 2 * M_PI * (ia + 1) / NA);
            if (e < 10) continue;
            double o = counts[ir * NA + ia];
            chi2 += (o - e) * (o - e) / e;
            ++cells;
        }
    CHECK(chi2_sf(chi2, cells - 1) > 0.01);
}

TEST_CASE("ball exit sampler is isotropic from the center") {
    StableModel m(2, 1.4);
    BallExitSampler samp(m, 1.0, pt(0, 0));
    Rng rng(9, 0);
    int n = 50000;
    double cx = 0, cy = 0;
    for (int i = 0; i < n; ++i) {
        Pt v = samp.sample(rng);
        double s = norm(v);
        cx += v[0] / s;
        cy += v[1] / s;
    }
    // Rayleigh statistic
    double z = (cx * cx + cy * cy) / n;
    CHECK(std::exp(-z) > 0.01);
}

TEST_CASE("killing intensity closed forms and scaling") {
    StableModel m(2, 1.0);
    Domain disk = Domain::ball(2, pt(0, 0), 1.0);
    CHECK(killing_intensity(m, disk, pt(0, 0)) == doctest::Approx(1.0).epsilon(1e-6));
    Domain disk3 = Domain::ball(2, pt(0, 0), 3.0);
    CHECK(killing_intensity(m, disk3, pt(0, 0)) == doctest::Approx(1.0 / 3).epsilon(1e-6));
    StableModel m15(2, 1.5);
    double k1 = killing_intensity(m15, disk, pt(0.2, 0.1));
    double k2 = killing_intensity(m15, disk.dilated(2.0), pt(0.4, 0.2));
    CHECK(k2 == doctest::Approx(std::pow(2.0, -1.5) * k1).epsilon(1e-5));
}

TEST_CASE("killing intensity blows up like delta^-alpha at the boundary") {
    StableModel m(2, 1.0);
    Domain sq = Domain::box(2, pt(0, 0), pt(1, 1));
    std::vector<double> ld, lk;
    for (int k = 2; k <= 5; ++k) {
        double delta = std::pow(10.0, -k);
        ld.push_back(std::log(delta));
        lk.push_back(std::log(killing_intensity(m, sq, pt(0.5, delta))));
    }
    LinFit fit = linear_fit(ld, lk);
    CHECK(std::abs(-fit.slope - 1.0) < 0.1);  // exponent alpha within 10%
}

TEST_CASE("killing intensity in one and three dimensions") {
    StableModel m1(1, 0.8);
    Domain iv = Domain::box(1, pt(-1), pt(1));
    // closed form: c/alpha ((1-x)^-a + (1+x)^-a)
    double want = m1.jump_const() / 0.8 * (std::pow(0.7, -0.8) + std::pow(1.3, -0.8));
    CHECK(killing_intensity(m1, iv, pt(0.3)) == doctest::Approx(want).epsilon(1e-6));
    StableModel m3(3, 1.2);
    Domain ball3 = Domain::ball(3, pt(0, 0, 0), 1.0);
    double k0 = killing_intensity(m3, ball3, pt(0, 0, 0));
    double want3 = m3.jump_const() * sphere_surface(3) / 1.2;
    CHECK(k0 == doctest::Approx(want3).epsilon(1e-5));
}
