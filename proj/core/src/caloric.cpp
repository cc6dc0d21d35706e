#include "fraccaloric/caloric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "fraccaloric/errors.hpp"
#include "fraccaloric/quadrature.hpp"

namespace fc {

SubSystem make_subsystem(const GridOperator& parent,
                         const std::function<bool(const Pt&)>& inside) {
    std::vector<int> nodes;
    for (int i = 0; i < parent.grid.size(); ++i)
        if (inside(parent.grid.point(i))) nodes.push_back(i);
    if (nodes.size() < 8)
        throw InsufficientResolution("subdomain resolves fewer than 8 interior nodes");
    GridOperator op = restrict_operator(parent, nodes);
    SubSystem sub{nodes, std::vector<int>(parent.grid.size(), -1), op,
                  eigensystem(op, std::min<int>(nodes.size(), parent.grid.size())), {}};
    for (size_t l = 0; l < nodes.size(); ++l) sub.local_of[nodes[l]] = static_cast<int>(l);
    sub.kappa = Eigen::VectorXd(nodes.size());
    for (size_t l = 0; l < nodes.size(); ++l) sub.kappa(l) = op.kappa[l];
    return sub;
}

namespace {

// p^U_span(x_local, .) as a local field
Eigen::VectorXd sub_heat_field(const SubSystem& sub, double span, int xloc) {
    return sub.eig.heat_field(span, xloc, 0);
}

int require_local(const SubSystem& sub, const GridOperator& parent, const Pt& x) {
    int pn = parent.grid.node_near(x);
    if (pn < 0 || sub.local_of[pn] < 0) throw ConfigError("point is not a node of the cylinder base");
    return sub.local_of[pn];
}

// dyadic panels of [0, span] graded toward tau = 0 (i.e. s -> t)
std::vector<std::pair<double, double>> dyadic_panels(double span, double tau_min = 1e-10) {
    std::vector<std::pair<double, double>> panels;
    double hi = span;
    while (hi > tau_min) {
        double lo = std::max(tau_min, hi / 2);
        panels.push_back({lo, hi});
        hi = lo;
    }
    return panels;
}

}  // namespace

double lateral_poisson_kernel(const GridOperator& parent, const SubSystem& sub, double t,
                              const Pt& x, double s, const Pt& z) {
    if (!(s < t)) throw ConfigError("lateral kernel needs s < t");
    int xloc = require_local(sub, parent, x);
    Eigen::VectorXd p = sub_heat_field(sub, t - s, xloc);
    double hd = parent.grid.cell_volume();
    int zp = parent.grid.node_near(z);
    if (zp >= 0 && sub.local_of[zp] < 0 && parent.domain.contains(parent.grid.point(zp))) {
        // z inside D \ U: discrete coupling per unit volume
        double acc = 0.0;
        for (size_t l = 0; l < sub.nodes.size(); ++l)
            acc += p(l) * parent.jump_weight(sub.nodes[l], zp);
        return acc / hd;
    }
    if (parent.domain.contains(z)) throw ConfigError("z must lie outside the cylinder base");
    // exterior of D: continuum jump kernel
    double acc = 0.0;
    for (size_t l = 0; l < sub.nodes.size(); ++l)
        acc += p(l) * parent.model.nu(dist(parent.grid.point(sub.nodes[l]), z)) * hd;
    return acc;
}

double poisson_integral(const GridOperator& parent, const SubSystem& sub, double t_lo, double t,
                        const Pt& x, const PoissonData& data) {
    if (!(t_lo < t)) throw ConfigError("poisson integral needs t_lo < t");
    int xloc = require_local(sub, parent, x);
    const double hd = parent.grid.cell_volume();
    const int nloc = static_cast<int>(sub.nodes.size());

    // complement nodes of D \ U with their couplings to U
    std::vector<int> comp;
    for (int i = 0; i < parent.grid.size(); ++i)
        if (sub.local_of[i] < 0) comp.push_back(i);

    // exterior-of-D mass per local node: kappa_sub - couplings to D \ U
    Eigen::VectorXd ext_mass = sub.kappa;
    for (int l = 0; l < nloc; ++l)
        for (int c : comp) ext_mass(l) -= parent.jump_weight(sub.nodes[l], c);

    // q(s, xi) = sum_{z in D\U} W(xi,z) u(s,z)  + exterior_const * ext_mass(xi)
    auto q_vec = [&](double s) {
        Eigen::VectorXd q = Eigen::VectorXd::Zero(nloc);
        for (int c : comp) {
            double uv = data.lateral(s, parent.grid.point(c));
            if (uv == 0.0) continue;
            for (int l = 0; l < nloc; ++l)
                q(l) += parent.jump_weight(sub.nodes[l], c) * uv;
        }
        if (data.exterior_const != 0.0) q += data.exterior_const * ext_mass;
        return q;
    };

    // lateral part: int over s with tau = t - s graded dyadically toward 0
    const GaussRule& g12 = gauss_legendre(12);
    double lateral = 0.0;
    double span = t - t_lo;
    for (auto [lo, hi] : dyadic_panels(span)) {
        for (size_t k = 0; k < g12.x.size(); ++k) {
            double tau = 0.5 * (lo + hi) + 0.5 * (hi - lo) * g12.x[k];
            double w = 0.5 * (hi - lo) * g12.w[k];
            Eigen::VectorXd p = sub_heat_field(sub, tau, xloc);
            lateral += w * p.dot(q_vec(t - tau)) * hd;
        }
    }
    // remainder below tau_min, where P_tau is the identity
    lateral += 1e-10 * q_vec(t)(xloc);

    // terminal part
    Eigen::VectorXd pT = sub_heat_field(sub, span, xloc);
    double terminal = 0.0;
    for (int l = 0; l < nloc; ++l)
        terminal += pT(l) * data.initial(t_lo, parent.grid.point(sub.nodes[l]));
    terminal *= hd;
    return lateral + terminal;
}

double cylinder_exit_mass(const GridOperator& parent, const SubSystem& sub, double span,
                          const Pt& x) {
    PoissonData data;
    data.lateral = [](double, const Pt&) { return 1.0; };
    data.initial = [](double, const Pt&) { return 1.0; };
    data.exterior_const = 1.0;
    return poisson_integral(parent, sub, 0.0, span, x, data);
}

double mean_value_residual(const SpaceTimeFn& u, const GridOperator& parent,
                           const SpaceTimeCylinder& G,
                           const std::vector<std::pair<double, Pt>>& probes) {
    if (!G.U) throw ConfigError("cylinder has no base subsystem");
    PoissonData data;
    data.lateral = u;
    data.initial = u;
    data.exterior_const = 0.0;
    double worst = 0.0;
    for (const auto& [t, x] : probes) {
        if (!(t > G.t_lo && t <= G.t_hi)) throw ConfigError("probe time outside the cylinder");
        double pi = poisson_integral(parent, *G.U, G.t_lo, t, x, data);
        worst = std::max(worst, std::abs(u(t, x) - pi));
    }
    return worst;
}

double BoundaryMeasure::total_mass() const {
    double m = 0.0;
    for (const auto& a : atoms) m += a.weight;
    return m;
}

double SingularCaloric::eval(double t, int node) const {
    double acc = 0.0;
    for (size_t a = 0; a < atoms.size(); ++a) {
        double s = t - atoms[a].time;
        if (s <= 0) continue;  // eta vanishes at nonpositive times
        acc += atoms[a].weight * eta_eval(*eig, modes[a], s, node);
    }
    return acc;
}

SpaceTimeFn SingularCaloric::as_fn() const {
    // quadratures sweep many points per time node; cache the last field
    auto cache = std::make_shared<std::pair<double, Eigen::VectorXd>>(
        std::numeric_limits<double>::quiet_NaN(), Eigen::VectorXd());
    return [this, cache](double t, const Pt& z) {
        int n = eig->grid.node_near(z);
        if (n < 0) return 0.0;
        if (!(cache->first == t)) {
            Eigen::VectorXd f = Eigen::VectorXd::Zero(eig->phi.rows());
            for (size_t a = 0; a < atoms.size(); ++a) {
                double s = t - atoms[a].time;
                if (s <= 0) continue;
                f += atoms[a].weight * eta_field(*eig, modes[a], s);
            }
            *cache = {t, std::move(f)};
        }
        return std::max(0.0, cache->second(n));
    };
}

SingularCaloric make_singular_caloric(const EigenSystem& eig, const BoundaryMeasure& mu,
                                      double approach_delta0, int approach_depth) {
    SingularCaloric sc;
    sc.eig = &eig;
    sc.atoms = mu.atoms;
    for (const auto& a : mu.atoms) {
        BoundaryApproach appr{a.Q, approach_delta0, approach_depth};
        sc.modes.push_back(eta_boundary_modes(eig, appr));
    }
    return sc;
}

namespace {

// graded time grid (finer near 0 where eta-type data are singular)
void graded_time_grid(double tmax, std::vector<double>& sgrid, std::vector<double>& sw) {
    const int M = 24;
    for (int j = 0; j < M; ++j) {
        double a = tmax * std::pow(double(j) / M, 2.0);
        double b = tmax * std::pow(double(j + 1) / M, 2.0);
        sgrid.push_back(0.5 * (a + b));
        sw.push_back(b - a);
    }
}

MeasureRecoveryLevel level_stats(const GridOperator& parent, const std::vector<int>& dn_nodes,
                                 const Eigen::VectorXd& surv_dn, const std::vector<int>& comp,
                                 const std::vector<std::vector<double>>& u_comp,
                                 const std::vector<double>& sgrid, const std::vector<double>& sw,
                                 const Pt& Q, double eps) {
    MeasureRecoveryLevel lvl;
    lvl.nodes = static_cast<int>(dn_nodes.size());
    double hd = parent.grid.cell_volume();
    double mass = 0.0, bx = 0.0, by = 0.0, bt = 0.0, near = 0.0;
    for (size_t j = 0; j < sgrid.size(); ++j) {
        double s = sgrid[j];
        const std::vector<double>& uz = u_comp[j];
#pragma omp parallel for schedule(static) reduction(+ : mass, bx, by, bt, near)
        for (size_t l = 0; l < dn_nodes.size(); ++l) {
            double inner = 0.0;
            for (size_t c = 0; c < comp.size(); ++c)
                if (uz[c] != 0.0) inner += parent.jump_weight(dn_nodes[l], comp[c]) * uz[c];
            if (inner == 0.0) continue;
            double me = surv_dn(l) * inner * hd * sw[j];
            mass += me;
            const Pt& y = parent.grid.point(dn_nodes[l]);
            bx += me * y[0];
            by += me * y[1];
            bt += me * s;
            if (dist(y, Q) < eps && s < eps) near += me;
        }
    }
    lvl.mass = mass;
    if (mass > 0) {
        lvl.barycenter_space_dist = dist(pt(bx / mass, by / mass), Q);
        lvl.barycenter_time = bt / mass;
        lvl.frac_near = near / mass;
    }
    return lvl;
}

}  // namespace

std::vector<MeasureRecoveryLevel> recover_boundary_measure(
    const SpaceTimeFn& u, const GridOperator& parent, const std::vector<double>& shrink_deltas,
    const Pt& Q, double T, double eps, const Pt& x0, double theta) {
    std::vector<MeasureRecoveryLevel> out;
    std::vector<double> sgrid, sw;
    double tmax = 0.75 * T;
    graded_time_grid(tmax, sgrid, sw);
    for (double delta : shrink_deltas) {
        SubSystem sub = make_subsystem(parent, [&](const Pt& p) {
            return parent.domain.signed_distance(p) > delta;
        });
        Eigen::VectorXd surv = sub.eig.survival(1.0);
        std::vector<int> comp;
        for (int i = 0; i < parent.grid.size(); ++i)
            if (sub.local_of[i] < 0) comp.push_back(i);
        std::vector<std::vector<double>> u_comp(sgrid.size());
        for (size_t j = 0; j < sgrid.size(); ++j) {
            u_comp[j].resize(comp.size());
            for (size_t c = 0; c < comp.size(); ++c)
                u_comp[j][c] = u(sgrid[j], parent.grid.point(comp[c]));
        }
        MeasureRecoveryLevel lvl =
            level_stats(parent, sub.nodes, surv, comp, u_comp, sgrid, sw, Q, eps);
        lvl.delta = delta;
        lvl.mass_bound = u(tmax + theta, x0);
        out.push_back(lvl);
    }
    return out;
}

std::vector<MeasureRecoveryLevel> recover_boundary_measure_cn(
    const GridOperator& parent, const Pt& Q, const std::vector<double>& shrink_deltas, double T,
    double eps, const Pt& x0, double theta, double dt) {
    const Grid& g = parent.grid;
    int n = g.size();
    // interior node nearest Q anchors the boundary-kernel column
    int wn = 0;
    double best = 1e300;
    for (int i = 0; i < n; ++i) {
        double dd = dist(g.point(i), Q);
        if (dd < best) {
            best = dd;
            wn = i;
        }
    }
    std::vector<double> sgrid, sw;
    double tmax = 0.75 * T;
    graded_time_grid(tmax, sgrid, sw);

    // one factorization, two columns: the kernel column and the survival march
    Eigen::MatrixXd v0 = Eigen::MatrixXd::Zero(n, 2);
    v0(wn, 0) = 1.0 / g.cell_volume();
    v0.col(1).setOnes();
    std::vector<double> times = sgrid;
    times.push_back(tmax + theta);
    times.push_back(1.0);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                times.end());
    std::vector<Eigen::MatrixXd> snaps = march_heat(parent.A, v0, times, dt);
    auto at_time = [&](double t) -> const Eigen::MatrixXd& {
        size_t k = std::lower_bound(times.begin(), times.end(), t - 1e-12) - times.begin();
        return snaps[k];
    };
    double s1w = at_time(1.0)(wn, 1);
    if (!(s1w > 0)) throw SolverFailure("anchored survival vanished in the CN march");

    std::vector<MeasureRecoveryLevel> out;
    for (double delta : shrink_deltas) {
        std::vector<int> dn, comp;
        std::vector<int> local(n, -1);
        for (int i = 0; i < n; ++i) {
            if (parent.domain.signed_distance(g.point(i)) > delta) {
                local[i] = static_cast<int>(dn.size());
                dn.push_back(i);
            } else {
                comp.push_back(i);
            }
        }
        if (dn.size() < 8 || comp.empty())
            throw InsufficientResolution("shrink level resolves too few nodes");
        Eigen::MatrixXd An(dn.size(), dn.size());
        for (size_t a = 0; a < dn.size(); ++a)
            for (size_t b = 0; b < dn.size(); ++b) An(a, b) = parent.A(dn[a], dn[b]);
        Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(dn.size(), 1);
        std::vector<Eigen::MatrixXd> sv = march_heat(An, ones, {1.0}, dt);
        Eigen::VectorXd surv = sv[0].col(0);
        An.resize(0, 0);

        std::vector<std::vector<double>> u_comp(sgrid.size());
        for (size_t j = 0; j < sgrid.size(); ++j) {
            const Eigen::MatrixXd& snap = at_time(sgrid[j]);
            u_comp[j].resize(comp.size());
            for (size_t c = 0; c < comp.size(); ++c)
                u_comp[j][c] = std::max(0.0, snap(comp[c], 0)) / s1w;
        }
        MeasureRecoveryLevel lvl = level_stats(parent, dn, surv, comp, u_comp, sgrid, sw, Q, eps);
        lvl.delta = delta;
        int x0n = g.node_near(x0);
        lvl.mass_bound = x0n >= 0 ? at_time(tmax + theta)(x0n, 0) / s1w : 0.0;
        out.push_back(lvl);
    }
    return out;
}

std::vector<std::pair<double, double>> initial_concentration(const SpaceTimeFn& u,
                                                             const EigenSystem& eig,
                                                             const Pt& x_f,
                                                             const std::vector<double>& epsilons,
                                                             double radius) {
    std::vector<std::pair<double, double>> out;
    double hd = eig.cell_volume();
    for (double e : epsilons) {
        double total = 0.0, near = 0.0;
        for (int i = 0; i < eig.grid.size(); ++i) {
            double v = u(e, eig.grid.point(i)) * hd;
            total += v;
            if (dist(eig.grid.point(i), x_f) < radius) near += v;
        }
        out.push_back({e, total > 0 ? near / total : 0.0});
    }
    return out;
}

}  // namespace fc
