#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <memory>

#include "fraccaloric/caloric.hpp"
#include "fraccaloric/errors.hpp"

using namespace fc;

namespace {

struct Setup {
    StableModel m{2, 1.0};
    Domain dom = Domain::ball(2, pt(0, 0), 1.0);
    GridOperator op;
    EigenSystem eig;
    SubSystem sub;
    Setup()
        : op(assemble_operator(m, dom, 1.0 / 16)), eig(eigensystem(op, 0)),
          sub(make_subsystem(op, [&](const Pt& p) { return dist(p, pt(0, 0)) < 0.55; })) {}
};

Setup& disk() {
    static Setup s;
    return s;
}

SpaceTimeFn heat_candidate(Setup& s, int xf) {
    auto cache = std::make_shared<std::pair<double, Eigen::VectorXd>>(-1.0, Eigen::VectorXd());
    return [&s, xf, cache](double t, const Pt& z) {
        if (t <= 0) return 0.0;
        int n = s.op.grid.node_near(z);
        if (n < 0) return 0.0;
        if (cache->first != t) *cache = {t, s.eig.heat_field(t, xf, 0)};
        return cache->second(n);
    };
}

}  // namespace

TEST_CASE("cylinder exit law is complete") {
    Setup& s = disk();
    for (double span : {0.3, 0.8}) {
        double mass = cylinder_exit_mass(s.op, s.sub, span, pt(0, 0));
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("strong markov consistency across nested cylinders") {
    Setup& s = disk();
    int xf = s.op.grid.node_near(pt(0.3, -0.2));
    SpaceTimeFn u = heat_candidate(s, xf);
    // iterate over a shorter cylinder first, then the longer one
    PoissonData data{u, u, 0.0};
    double direct = poisson_integral(s.op, s.sub, 0.2, 0.9, pt(0, 0), data);
    double via_mid = poisson_integral(s.op, s.sub, 0.55, 0.9, pt(0, 0), data);
    CHECK(direct == doctest::Approx(u(0.9, pt(0, 0))).epsilon(1e-3));
    CHECK(via_mid == doctest::Approx(u(0.9, pt(0, 0))).epsilon(1e-3));
}

TEST_CASE("mean value property of spectral candidates, with defect detection") {
    Setup& s = disk();
    int xf = s.op.grid.node_near(pt(0.3, -0.2));
    SpaceTimeFn u = heat_candidate(s, xf);
    SpaceTimeCylinder G{0.2, 1.0, &s.sub};
    std::vector<std::pair<double, Pt>> probes = {{0.6, pt(0, 0)}, {0.85, pt(0.2, 0.1)}};
    CHECK(mean_value_residual(u, s.op, G, probes) <= 1e-3);
    SpaceTimeFn bad = [&](double t, const Pt& z) {
        double v = u(t, z);
        if (std::abs(t - 0.6) < 1e-12 && dist(z, pt(0, 0)) < 1e-12) v += 0.01;
        return v;
    };
    CHECK(mean_value_residual(bad, s.op, G, {{0.6, pt(0, 0)}}) >= 0.005);
}

TEST_CASE("lateral kernel values and the normal derivative identity") {
    Setup& s = disk();
    Pt zin = pt(0.8, 0.1);    // in D minus U
    Pt zout = pt(1.4, -0.2);  // exterior of D
    double j1 = lateral_poisson_kernel(s.op, s.sub, 1.0, pt(0, 0), 0.5, zin);
    double j2 = lateral_poisson_kernel(s.op, s.sub, 1.0, pt(0, 0), 0.5, zout);
    CHECK(j1 > 0);
    CHECK(j2 > 0);
    CHECK(j1 > j2);  // closer targets receive more mass
    CHECK_THROWS_AS(lateral_poisson_kernel(s.op, s.sub, 1.0, pt(0, 0), 0.5, pt(0.1, 0.1)),
                    ConfigError);
    CHECK_THROWS_AS(lateral_poisson_kernel(s.op, s.sub, 0.4, pt(0, 0), 0.5, zin), ConfigError);

    // J is the nonlocal normal derivative of the zero-extended kernel
    int xloc = 0;
    Eigen::VectorXd p = s.sub.eig.heat_field(0.5, xloc, 0);
    int zp = s.op.grid.node_near(zin);
    double direct = 0.0;
    for (size_t l = 0; l < s.sub.nodes.size(); ++l)
        direct += p(l) * s.op.jump_weight(s.sub.nodes[l], zp);
    direct /= s.op.grid.cell_volume();
    double via = lateral_poisson_kernel(s.op, s.sub, 1.0,
                                        s.op.grid.point(s.sub.nodes[xloc]), 0.5, zin);
    CHECK(std::abs(direct - via) <= 1e-10 * std::abs(via));
}

TEST_CASE("poisson integral propagates eigenmodes and constants") {
    Setup& s = disk();
    // g = 0, u_r = phi_1 propagates by the ground eigenvalue of the sub-domain
    Eigen::VectorXd phi1 = s.sub.eig.phi.col(0);
    PoissonData data;
    data.lateral = [](double, const Pt&) { return 0.0; };
    data.initial = [&](double, const Pt& z) {
        int n = s.op.grid.node_near(z);
        int l = n >= 0 ? s.sub.local_of[n] : -1;
        return l >= 0 ? phi1(l) : 0.0;
    };
    double span = 0.6;
    double got = poisson_integral(s.op, s.sub, 0.0, span, pt(0, 0), data);
    int xloc = s.sub.local_of[s.op.grid.node_near(pt(0, 0))];
    double want = std::exp(-s.sub.eig.lambda(0) * span) * phi1(xloc);
    CHECK(got == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("singular caloric candidates") {
    Setup& s = disk();
    auto probes = s.dom.boundary_probes();
    BoundaryMeasure mu;
    mu.atoms.push_back({probes[0], 0.0, 1.0});
    mu.atoms.push_back({probes[1], 0.3, 0.5});
    SingularCaloric h = make_singular_caloric(s.eig, mu, 0.4);
    CHECK(mu.total_mass() == doctest::Approx(1.5));
    int xn = s.op.grid.node_near(pt(0, 0));
    // before the second atom activates only the first contributes
    EtaModes m0 = eta_boundary_modes(s.eig, BoundaryApproach{probes[0], 0.4, 10});
    CHECK(h.eval(0.2, xn) == doctest::Approx(eta_eval(s.eig, m0, 0.2, xn)).epsilon(1e-12));
    CHECK(h.eval(1.0, xn) > eta_eval(s.eig, m0, 1.0, xn));  // both atoms active
    CHECK(h.eval(-0.1, xn) == 0.0);
    // caloricity of the superposition on an interior cylinder
    SpaceTimeCylinder G{0.3, 1.0, &s.sub};
    double res = mean_value_residual(h.as_fn(), s.op, G, {{0.7, pt(0, 0)}});
    CHECK(res <= 0.05 * std::abs(h.eval(0.7, xn)));
}

TEST_CASE("measure recovery concentrates toward the boundary atom") {
    StableModel m(2, 1.5);
    Domain sq = Domain::box(2, pt(0, 0), pt(1, 1));
    GridOperator op = assemble_operator(m, sq, 1.0 / 32);
    auto probes = sq.boundary_probes();
    double diam = sq.diameter();
    auto levels = recover_boundary_measure_cn(op, probes[0].q, {diam / 8, diam / 16, diam / 24},
                                              0.2, 0.1 * diam, sq.x0(), 0.05, 1e-3);
    REQUIRE(levels.size() == 3);
    for (const auto& l : levels) {
        CHECK(l.mass > 0);
        CHECK(std::isfinite(l.mass_bound));
        CHECK(l.nodes >= 8);
    }
    CHECK(levels[2].frac_near > levels[0].frac_near);
    CHECK(levels[2].barycenter_space_dist < levels[0].barycenter_space_dist);
    CHECK(levels[2].barycenter_time < 0.1);
}

TEST_CASE("cn and eigensolve recoveries agree") {
    StableModel m(2, 1.5);
    Domain sq = Domain::box(2, pt(0, 0), pt(1, 1));
    GridOperator op = assemble_operator(m, sq, 1.0 / 24);
    EigenSystem eig = eigensystem(op, 0);
    auto probes = sq.boundary_probes();
    double diam = sq.diameter();
    // the same anchored candidate through both machineries
    int wn = 0;
    double best = 1e300;
    for (int i = 0; i < op.grid.size(); ++i) {
        double dd = dist(op.grid.point(i), probes[0].q);
        if (dd < best) {
            best = dd;
            wn = i;
        }
    }
    double s1w = eig.survival(1.0)(wn);
    auto cache = std::make_shared<std::pair<double, Eigen::VectorXd>>(-1.0, Eigen::VectorXd());
    SpaceTimeFn u = [&, cache](double t, const Pt& z) {
        if (t <= 0) return 0.0;
        int n = op.grid.node_near(z);
        if (n < 0) return 0.0;
        if (cache->first != t) *cache = {t, eig.heat_field(t, wn, 0)};
        return std::max(0.0, cache->second(n)) / s1w;
    };
    auto eig_route = recover_boundary_measure(u, op, {diam / 12}, probes[0].q, 0.2, 0.1 * diam,
                                              sq.x0(), 0.05);
    auto cn_route = recover_boundary_measure_cn(op, probes[0].q, {diam / 12}, 0.2, 0.1 * diam,
                                                sq.x0(), 0.05, 5e-4);
    CHECK(cn_route[0].mass == doctest::Approx(eig_route[0].mass).epsilon(0.02));
    CHECK(cn_route[0].frac_near == doctest::Approx(eig_route[0].frac_near).epsilon(0.03));
}

TEST_CASE("initial concentration of the heat kernel candidate") {
    Setup& s = disk();
    int xf = s.op.grid.node_near(pt(0.25, 0.15));
    SpaceTimeFn u = heat_candidate(s, xf);
    auto conc = initial_concentration(u, s.eig, s.op.grid.point(xf), {0.2, 0.1, 0.05}, 0.25);
    REQUIRE(conc.size() == 3);
    CHECK(conc[2].second > conc[0].second);
    CHECK(conc[2].second > 0.7);
}

TEST_CASE("subsystem guards") {
    Setup& s = disk();
    CHECK_THROWS_AS(make_subsystem(s.op, [](const Pt&) { return false; }),
                    InsufficientResolution);
    SpaceTimeCylinder G{0.5, 0.4, &s.sub};
    CHECK_THROWS_AS(mean_value_residual([](double, const Pt&) { return 0.0; }, s.op, G,
                                        {{0.45, pt(0, 0)}}),
                    ConfigError);
}
