#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "fraccaloric/boundary.hpp"
#include "fraccaloric/caloric.hpp"
#include "fraccaloric/errors.hpp"
#include "fraccaloric/io.hpp"
#include "fraccaloric/path_mc.hpp"
#include "fraccaloric/special.hpp"

namespace fc {

namespace {

using nlohmann::ordered_json;

struct Checks {
    ordered_json items = ordered_json::array();
    bool all = true;
    void add(const std::string& name, bool pass, double value, const std::string& note = "") {
        ordered_json j;
        j["name"] = name;
        j["pass"] = pass;
        j["value"] = value;
        if (!note.empty()) j["note"] = note;
        items.push_back(j);
        all = all && pass;
    }
};

std::string join(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

struct Spectral {
    StableModel model;
    Domain dom;
    GridOperator op;
    EigenSystem eig;
    Eigen::VectorXd kappa;  // discrete killing A*1
};

Spectral make_spectral(const Config& cfg, double default_h, int n_max_default = 0) {
    StableModel m = cfg.model();
    Domain dom = cfg.domain();
    double h = cfg.num("h", default_h);
    GridOperator op = assemble_operator(m, dom, h);
    int n_max = static_cast<int>(cfg.integer("n_max", n_max_default));
    EigenSystem eig = eigensystem(op, n_max);
    Eigen::VectorXd kap = op.A * Eigen::VectorXd::Ones(op.grid.size());
    return Spectral{m, dom, std::move(op), std::move(eig), std::move(kap)};
}

// ---------------------------------------------------------------------------
// ball-exit-law

// exit probability of one (radial x angular) cell of the ball Poisson kernel,
// via the cosh substitution that removes the rim singularity
double exit_cell_prob(const StableModel& m, double r, const Pt& x, double s0, double s1,
                      double phi0, double phi1) {
    double rho = norm(x);
    double phix = std::atan2(x[1], x[0]);
    double c = bgr_constant(m.dim(), m.alpha()) * std::pow(r * r - rho * rho, 0.5 * m.alpha());
    double u0 = std::acosh(std::max(s0 / r, 1.0));
    double u1 = std::acosh(std::max(s1 / r, 1.0 + 1e-15));
    const GaussRule& g = gauss_legendre(32);
    double acc = 0.0;
    for (size_t iu = 0; iu < g.x.size(); ++iu) {
        double u = 0.5 * (u0 + u1) + 0.5 * (u1 - u0) * g.x[iu];
        double wu = 0.5 * (u1 - u0) * g.w[iu];
        double s = r * std::cosh(u);
        double sh = r * std::sinh(u);
        double rad = std::pow(sh, -m.alpha()) * s * sh;  // d = 2
        for (size_t iv = 0; iv < g.x.size(); ++iv) {
            double ph = 0.5 * (phi0 + phi1) + 0.5 * (phi1 - phi0) * g.x[iv];
            double wp = 0.5 * (phi1 - phi0) * g.w[iv];
            double q = s * s + rho * rho - 2 * s * rho * std::cos(ph - phix);
            acc += wu * wp * c * rad * std::pow(q, -1.0);
        }
    }
    return acc;
}

void exp_ball_exit_law(const Config& cfg, const std::string& out, Checks& ck, ordered_json& extra) {
    StableModel m = cfg.model();
    if (m.dim() != 2) throw ConfigError("ball-exit-law is a d=2 experiment");
    double r = cfg.num("radius", 1.0);
    std::int64_t N = cfg.integer("N", 1000000);
    std::uint64_t seed = cfg.integer("seed", 7);
    std::vector<double> starts = cfg.list("starts", {0.0, 0.0, 0.5, 0.0});

    double mass = ball_poisson_mass(m, r, pt(0, 0));
    ck.add("normalization", std::abs(mass - 1.0) <= 1e-6, mass, "|int - 1| <= 1e-6");
    extra["normalization_mass"] = mass;

    std::vector<double> redges = {1.0, 1.05, 1.12, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0, 40.0, 1e18};
    for (double& e : redges) e *= r;
    const int NA = 5;

    CsvWriter csv(join(out, "ball_exit_histogram.csv"),
                  {"start_x", "start_y", "r_lo", "r_hi", "phi_lo", "phi_hi", "observed",
                   "expected"});
    for (size_t si = 0; si + 1 < starts.size(); si += 2) {
        Pt x = pt(starts[si], starts[si + 1]);
        BallExitSampler samp(m, r, x);
        int NR = static_cast<int>(redges.size()) - 1;
        std::vector<double> counts(NR * NA, 0.0);
        Rng rng(seed, si);
        for (std::int64_t i = 0; i < N; ++i) {
            Pt v = samp.sample(rng);
            double s = norm(v);
            double a = std::atan2(v[1], v[0]);
            if (a < 0) a += 2 * M_PI;
            int ia = std::min(NA - 1, static_cast<int>(a / (2 * M_PI) * NA));
            int ir = 0;
            while (ir < NR - 1 && s >= redges[ir + 1]) ++ir;
            counts[ir * NA + ia] += 1.0;
        }
        double chi2 = 0.0;
        int cells = 0;
        for (int ir = 0; ir < NR; ++ir)
            for (int ia = 0; ia < NA; ++ia) {
                double p = exit_cell_prob(m, r, x, redges[ir], std::min(redges[ir + 1], 1e6 * r),
                                          2 * M_PI * ia / NA, 2 * M_PI * (ia + 1) / NA);
                double e = p * N;
                csv.row({x[0], x[1], redges[ir], redges[ir + 1], 2 * M_PI * ia / NA,
                         2 * M_PI * (ia + 1) / NA, counts[ir * NA + ia], e});
                if (e >= 5.0) {
                    double o = counts[ir * NA + ia];
                    chi2 += (o - e) * (o - e) / e;
                    ++cells;
                }
            }
        double p = chi2_sf(chi2, cells - 1);
        char label[64];
        std::snprintf(label, sizeof label, "chi2_p_start_%g_%g", x[0], x[1]);
        ck.add(label, p > 0.01, p, "chi-square p-value > 0.01 on " + std::to_string(cells) +
                                        " cells");
    }
}

// ---------------------------------------------------------------------------
// survival

void exp_survival(const Config& cfg, const std::string& out, Checks& ck, ordered_json& extra) {
    Spectral sp = make_spectral(cfg, 1.0 / 24);
    auto xs = cfg.list("x", {0.0, 0.0});
    Pt x = pt(xs[0], xs.size() > 1 ? xs[1] : 0.0);
    x = sp.op.grid.point(sp.op.grid.node_near(x));  // same source for MC and spectral
    EnsembleOptions opts;
    opts.T = cfg.num("T", 2.0);
    opts.dt = cfg.num("dt", 1e-3);
    opts.N = cfg.integer("N", 100000);
    opts.seed = cfg.integer("seed", 1);
    int ncp = 16;
    for (int i = 1; i <= ncp; ++i) {
        double t = opts.T * i / ncp;
        opts.checkpoints.push_back(std::llround(t / opts.dt) * opts.dt);
    }
    PathEnsemble ens = run_killed_ensemble(sp.model, sp.dom, x, opts);

    int xn = sp.op.grid.node_near(x);
    CsvWriter csv(join(out, "survival_curve.csv"), {"t", "mc", "mc_stderr", "spectral"});
    double worst_z = 0.0;
    for (double t : opts.checkpoints) {
        Estimate s = survival_probability(ens, t);
        double spv = sp.eig.survival(t)(xn);
        csv.row({t, s.value, s.stderr_, spv});
        // pooled error includes an h-refinement discrepancy proxy
        double pooled = std::sqrt(s.stderr_ * s.stderr_ + 1e-4 + 0.02 * spv * 0.02 * spv);
        worst_z = std::max(worst_z, std::abs(s.value - spv) / pooled);
    }
    ck.add("mc_vs_spectral_z", worst_z <= 3.0, worst_z, "max |mc-spectral|/pooled over curve");

    // monotonicity of the survival curve
    bool mono = true;
    for (size_t i = 1; i < opts.checkpoints.size(); ++i)
        if (survival_probability(ens, opts.checkpoints[i]).value >
            survival_probability(ens, opts.checkpoints[i - 1]).value + 1e-12)
            mono = false;
    ck.add("monotone", mono, 1.0);

    // exact scaling identity P^{2x}(tau_{2D} > 2^alpha t) = P^x(tau_D > t)
    double fac = std::pow(2.0, sp.model.alpha());
    Domain dom2 = sp.dom.dilated(2.0);
    EnsembleOptions o2 = opts;
    o2.T = fac * opts.T;
    o2.dt = fac * opts.dt;
    o2.checkpoints.clear();
    PathEnsemble ens2 = run_killed_ensemble(sp.model, dom2, 2.0 * x, o2);
    Estimate a = survival_probability(ens, opts.T / 2);
    Estimate b = survival_probability(ens2, fac * opts.T / 2);
    double pooled = std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_) + 1e-12;
    double z = std::abs(a.value - b.value) / pooled;
    ck.add("scaling_identity_z", z <= 3.0, z, "same-seed dilation comparison");

    // expected exit time against the survival-curve integral
    Estimate et = expected_exit_time(ens, sp.eig.lambda(0));
    extra["expected_exit_time"] = et.value;
    extra["expected_exit_time_stderr"] = et.stderr_;
    extra["lambda1"] = sp.eig.lambda(0);
}

// ---------------------------------------------------------------------------
// heat-kernel / green

void exp_heat_kernel(const Config& cfg, const std::string& out, Checks& ck, ordered_json& extra) {
    Spectral sp = make_spectral(cfg, 1.0 / 24);
    auto xs = cfg.list("x", {0.0, 0.0});
    Pt x = pt(xs[0], xs.size() > 1 ? xs[1] : 0.0);
    x = sp.op.grid.point(sp.op.grid.node_near(x));
    double t = cfg.num("t", 0.5);
    double hcells = cfg.num("cells_h", 1.0 / 12);
    // align the histogram lattice with the spectral lattice
    hcells = std::max<long long>(1, std::llround(hcells / sp.op.h)) * sp.op.h;
    Grid cells(sp.dom, hcells);

    EnsembleOptions opts;
    opts.dt = cfg.num("dt", 1e-3);
    opts.T = std::llround(std::max(t, 1.0) / opts.dt) * opts.dt;
    opts.N = cfg.integer("N", 200000);
    opts.seed = cfg.integer("seed", 2);
    opts.checkpoints = {std::llround(t / opts.dt) * opts.dt, std::llround(1.0 / opts.dt) * opts.dt};
    PathEnsemble ens = run_killed_ensemble(sp.model, sp.dom, x, opts);
    McFields f = mc_fields(ens, opts.checkpoints[0], cells);

    // spectral cell masses over the full comparison-cell volume, matching the
    // histogram semantics at partially covered boundary cells
    int xn = sp.op.grid.node_near(x);
    Eigen::VectorXd pf = sp.eig.heat_field(t, xn, 0);
    std::vector<double> avg(cells.size(), 0.0), cnt(cells.size(), 0.0);
    double wnode = sp.op.grid.cell_volume() / cells.cell_volume();
    for (int i = 0; i < sp.op.grid.size(); ++i) {
        int c = cells.node_near(sp.op.grid.point(i));
        if (c >= 0) {
            avg[c] += pf(i) * wnode;
            cnt[c] += 1.0;
        }
    }
    int viol = 0, used = 0;
    double hunt_viol = 0;
    CsvWriter csv(join(out, "heat_kernel_field.csv"),
                  {"x", "y", "mc", "mc_stderr", "spectral", "free_density"});
    for (int c = 0; c < cells.size(); ++c) {
        double spv = avg[c];
        double freep = sp.model.density(t, dist(x, cells.point(c)));
        csv.row({cells.point(c)[0], cells.point(c)[1], f.heat_kernel.value[c],
                 f.heat_kernel.stderr_[c], spv, freep});
        if (f.heat_kernel.value[c] > freep + 3 * f.heat_kernel.stderr_[c] + 1e-12) ++hunt_viol;
        if (f.heat_kernel.unreliable[c] || cnt[c] == 0) continue;
        ++used;
        double pooled = std::sqrt(f.heat_kernel.stderr_[c] * f.heat_kernel.stderr_[c] +
                                  0.03 * spv * 0.03 * spv) + 1e-12;
        if (std::abs(f.heat_kernel.value[c] - spv) > 3 * pooled) ++viol;
    }
    ck.add("cellwise_3sigma", viol <= std::max(2, used / 50), double(viol),
           "cells beyond 3 pooled sigma out of " + std::to_string(used));
    ck.add("hunt_domination", hunt_viol == 0, hunt_viol, "p_t^D <= p_t cellwise");

    // m_x integrates to 1
    if (!f.m_x.value.empty()) {
        double mass = 0.0;
        for (double v : f.m_x.value) mass += v * f.m_x.cell_volume;
        ck.add("m_x_mass", std::abs(mass - 1.0) < 0.02, mass, "conditioned law integrates to 1");
    }
    extra["alive_fraction_t"] = survival_probability(ens, t).value;
}

void exp_green(const Config& cfg, const std::string& out, Checks& ck, ordered_json& extra) {
    Spectral sp = make_spectral(cfg, 1.0 / 24);
    auto xs = cfg.list("x", {0.0, 0.0});
    Pt x = pt(xs[0], xs.size() > 1 ? xs[1] : 0.0);
    x = sp.op.grid.point(sp.op.grid.node_near(x));
    double hcells = cfg.num("cells_h", 1.0 / 12);
    hcells = std::max<long long>(1, std::llround(hcells / sp.op.h)) * sp.op.h;
    Grid cells(sp.dom, hcells);

    EnsembleOptions opts;
    opts.dt = cfg.num("dt", 1e-3);
    opts.T = cfg.num("T", 6.0);
    opts.N = cfg.integer("N", 100000);
    opts.seed = cfg.integer("seed", 3);
    opts.checkpoints = {1.0};
    opts.occupation_grid = cells;
    PathEnsemble ens = run_killed_ensemble(sp.model, sp.dom, x, opts);
    McFields f = mc_fields(ens, 1.0, cells);

    int xn = sp.op.grid.node_near(x);
    Eigen::VectorXd gf = sp.eig.green_field(xn);
    std::vector<double> avg(cells.size(), 0.0), cnt(cells.size(), 0.0);
    double wnode = sp.op.grid.cell_volume() / cells.cell_volume();
    for (int i = 0; i < sp.op.grid.size(); ++i) {
        int c = cells.node_near(sp.op.grid.point(i));
        if (c >= 0) {
            avg[c] += gf(i) * wnode;
            cnt[c] += 1.0;
        }
    }
    int viol = 0, used = 0;
    double exclusion = 2.0 * hcells * std::sqrt(2.0);
    CsvWriter csv(join(out, "green_field.csv"), {"x", "y", "mc", "mc_stderr", "spectral"});
    for (int c = 0; c < cells.size(); ++c) {
        double spv = avg[c];
        csv.row({cells.point(c)[0], cells.point(c)[1], f.green.value[c], f.green.stderr_[c], spv});
        if (f.green.unreliable[c] || cnt[c] == 0) continue;
        if (dist(cells.point(c), x) < exclusion) continue;  // singular cells excluded
        ++used;
        double pooled = std::sqrt(f.green.stderr_[c] * f.green.stderr_[c] +
                                  0.03 * spv * 0.03 * spv) + 1e-12;
        if (std::abs(f.green.value[c] - spv) > 3 * pooled) ++viol;
    }
    ck.add("cellwise_3sigma", viol <= std::max(2, used / 50), double(viol),
           "off-diagonal cells beyond 3 pooled sigma out of " + std::to_string(used));

    // occupation identity: int green = E tau
    double total = 0.0;
    for (double v : f.green.value) total += v * f.green.cell_volume;
    Estimate et = expected_exit_time(ens, sp.eig.lambda(0));
    double pooled = 3 * (et.stderr_ + 0.01 * et.value);
    ck.add("occupation_identity", std::abs(total - et.value) <= pooled, total,
           "int G dy vs E tau = " + std::to_string(et.value));

    // harmonic measure vs the explicit ball kernel (only for the unit disk);
    // the oracle is the kernel cell average, with the rim handled by an
    // inside-indicator so partially exterior cells match histogram semantics
    if (sp.dom.kind() == DomainKind::ball) {
        const GaussRule& g8 = gauss_legendre(8);
        int viol2 = 0, used2 = 0;
        for (size_t c = 0; c < f.harmonic_measure.value.size(); ++c) {
            if (f.harmonic_measure.unreliable[c]) continue;
            const Pt& z = f.harmonic_measure.pts[c];
            if (norm(z) + hcells < 1.0) continue;
            double want = 0.0;
            for (size_t iu = 0; iu < g8.x.size(); ++iu)
                for (size_t iv = 0; iv < g8.x.size(); ++iv) {
                    Pt q = z + pt(0.5 * hcells * g8.x[iu], 0.5 * hcells * g8.x[iv]);
                    if (norm(q) > 1.0)
                        want += 0.25 * g8.w[iu] * g8.w[iv] *
                                ball_poisson_kernel(sp.model, 1.0, x, q);
                }
            ++used2;
            if (std::abs(f.harmonic_measure.value[c] - want) >
                3 * f.harmonic_measure.stderr_[c] + 0.05 * want + 1e-6)
                ++viol2;
        }
        ck.add("harmonic_measure_vs_kernel", viol2 <= std::max(2, used2 / 50), double(viol2),
               "window cells beyond tolerance out of " + std::to_string(used2));
        write_field_csv(join(out, "harmonic_measure.csv"), f.harmonic_measure);
    }
    extra["green_total"] = total;
}

// ---------------------------------------------------------------------------
// spectral-weyl

void exp_spectral_weyl(const Config& cfg, const std::string& out, Checks& ck,
                       ordered_json& extra) {
    Config c2 = cfg;
    if (!cfg.has("domain")) c2.set("domain", "unit-square");
    Spectral sp = make_spectral(c2, 1.0 / 48);
    int nfit_lo = 5, nfit_hi = std::min<int>(150, sp.eig.n_max);

    CsvWriter csv(join(out, "spectrum.csv"), {"n", "lambda"});
    for (int n = 0; n < sp.eig.n_max; ++n) csv.row({double(n + 1), sp.eig.lambda(n)});

    std::vector<double> lx, ly;
    for (int n = nfit_lo; n <= nfit_hi; ++n) {
        lx.push_back(std::log(double(n)));
        ly.push_back(std::log(sp.eig.lambda(n - 1)));
    }
    LinFit fit = linear_fit(lx, ly);
    double want = sp.model.alpha() / sp.model.dim();
    ck.add("weyl_exponent", std::abs(fit.slope - want) <= 0.15 * want, fit.slope,
           "fit over n in [5," + std::to_string(nfit_hi) + "], target alpha/d");
    extra["weyl_r2"] = fit.r2;

    // eigen residuals and orthonormality
    double resid = 0.0;
    double anorm = sp.op.A.cwiseAbs().rowwise().sum().maxCoeff();
    for (int n = 0; n < std::min(20, sp.eig.n_max); ++n) {
        Eigen::VectorXd r = sp.op.A * sp.eig.phi.col(n) - sp.eig.lambda(n) * sp.eig.phi.col(n);
        resid = std::max(resid, r.cwiseAbs().maxCoeff() / anorm);
    }
    ck.add("eigen_residual", resid <= 1e-8, resid, "||A phi - lambda phi|| / ||A||");
    Eigen::MatrixXd gram = sp.eig.phi.leftCols(30).transpose() * sp.eig.phi.leftCols(30) *
                           sp.eig.cell_volume();
    double ortho = (gram - Eigen::MatrixXd::Identity(30, 30)).cwiseAbs().maxCoeff();
    ck.add("orthonormality", ortho <= 1e-10, ortho);
    ck.add("ground_state_positive", sp.eig.phi.col(0).minCoeff() > 0,
           sp.eig.phi.col(0).minCoeff());

    // lambda1 scaling under dilation
    GridOperator op2 = assemble_operator(sp.model, sp.dom.dilated(2.0), 2 * sp.op.h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op2.A);
    double l2 = es.eigenvalues()(0);
    double want2 = std::pow(2.0, -sp.model.alpha()) * sp.eig.lambda(0);
    ck.add("lambda1_dilation", std::abs(l2 / want2 - 1) <= 0.02, l2,
           "lambda1(2D) vs 2^-alpha lambda1(D)");
    extra["lambda1"] = sp.eig.lambda(0);
}

// ---------------------------------------------------------------------------
// l38

void exp_l38(const Config& cfg, const std::string& out, Checks& ck, ordered_json& extra) {
    Spectral sp = make_spectral(cfg, 1.0 / 24);
    L38Result r = l38_identity_check(sp.eig, sp.kappa);
    ck.add("discrete_identity", r.max_rel_error <= 1e-6, r.max_rel_error,
           "max relative error of P^x(tau>1) = G_D P_1^D kappa_D");

    CsvWriter csv(join(out, "l38_field.csv"), {"x", "y", "lhs", "rhs"});
    for (int i = 0; i < sp.op.grid.size(); ++i)
        csv.row({sp.op.grid.point(i)[0], sp.op.grid.point(i)[1], r.lhs(i), r.rhs(i)});

    // MC cross-check at 9 interior points
    std::int64_t N = cfg.integer("N", 20000);
    double dt = cfg.num("dt", 1e-3);
    std::uint64_t seed = cfg.integer("seed", 5);
    // coarse spectral solution for a discretization error proxy
    GridOperator opc = assemble_operator(sp.model, sp.dom, sp.op.h * 1.5);
    EigenSystem eigc = eigensystem(opc, 0);
    int done = 0;
    double worst = 0.0;
    for (int gx = -1; gx <= 1 && done < 9; ++gx)
        for (int gy = -1; gy <= 1 && done < 9; ++gy) {
            Pt x = sp.dom.x0() + pt(gx * 0.18 * sp.dom.diameter() / std::sqrt(2.0),
                                    gy * 0.18 * sp.dom.diameter() / std::sqrt(2.0));
            if (!sp.dom.contains(x)) continue;
            int xn = sp.op.grid.node_near(x);
            int xc = opc.grid.node_near(x);
            if (xn < 0 || xc < 0) continue;
            ++done;
            EnsembleOptions opts;
            opts.T = 1.0;
            opts.dt = dt;
            opts.N = N;
            opts.seed = seed + done;
            PathEnsemble ens = run_killed_ensemble(sp.model, sp.dom, x, opts);
            Estimate s = survival_probability(ens, 1.0);
            double rhs = r.rhs(xn);
            double disc = std::abs(rhs - eigc.survival(1.0)(xc));
            double pooled = std::sqrt(s.stderr_ * s.stderr_ + disc * disc) + 1e-12;
            worst = std::max(worst, std::abs(s.value - rhs) / pooled);
        }
    ck.add("mc_cross_check_z", worst <= 3.0 && done >= 9, worst,
           "max z over " + std::to_string(done) + " interior points");
    extra["points_checked"] = done;
}

// ---------------------------------------------------------------------------
// c1

void exp_c1(const Config& cfg, const std::string& out, Checks& ck, ordered_json& extra) {
    Config c2 = cfg;
    if (!cfg.has("domain")) c2.set("domain", "unit-square");
    Spectral sp = make_spectral(c2, 1.0 / 48);
    auto probes = sp.dom.boundary_probes();
    int nq = static_cast<int>(cfg.integer("n_boundary_points", 2));
    CsvWriter csv(join(out, "c1.csv"), {"qx", "qy", "c1_integral", "c1_trace", "rel_diff"});
    double worst = 0.0;
    for (int qi = 0; qi < nq && qi < static_cast<int>(probes.size()); ++qi) {
        BoundaryApproach appr{probes[qi], 0.25 * sp.dom.diameter(), 12};
        double c1i = yaglom_constant_c1(sp.eig, sp.kappa, appr, sp.dom.x0(), 1.0);
        RatioTrace tr = boundary_ratio_limit(RatioKind::survival_over_green, sp.eig, appr, 1.0,
                                             sp.dom.x0(), sp.dom.x0());
        double rel = std::abs(c1i / tr.limit - 1.0);
        worst = std::max(worst, rel);
        csv.row({probes[qi].q[0], probes[qi].q[1], c1i, tr.limit, rel});
        if (qi == 0) {
            ck.add("positive_finite", c1i > 0 && std::isfinite(c1i), c1i);
            extra["c1"] = c1i;
        }
    }
    ck.add("cross_method_agreement", worst <= 0.05, worst,
           "double integral vs boundary trace, max over Q");

    // t0-generalized version
    double t0 = cfg.num("t0", 0.5);
    BoundaryApproach appr{probes[0], 0.25 * sp.dom.diameter(), 12};
    double c1t = yaglom_constant_c1(sp.eig, sp.kappa, appr, sp.dom.x0(), t0);
    RatioTrace trt = boundary_ratio_limit(RatioKind::survival_over_green, sp.eig, appr, t0,
                                          sp.dom.x0(), sp.dom.x0());
    double relt = std::abs(c1t / trt.limit - 1.0);
    ck.add("t0_variant_agreement", relt <= 0.05, relt, "t0 = " + std::to_string(t0));
}

// ---------------------------------------------------------------------------
// martin-traces

void exp_martin_traces(const Config& cfg, const std::string& out, Checks& ck,
                       ordered_json& extra) {
    Config c2 = cfg;
    if (!cfg.has("domain")) c2.set("domain", "unit-square");
    Spectral sp = make_spectral(c2, 1.0 / 48);
    auto probes = sp.dom.boundary_probes();
    int nq = static_cast<int>(cfg.integer("n_boundary_points", 4));
    double t = cfg.num("t", 1.0);

    CsvWriter csv(join(out, "martin_traces.csv"),
                  {"qx", "qy", "kind", "delta", "value"});
    auto dump = [&](const BoundaryPoint& q, const char* kind, const RatioTrace& tr) {
        for (size_t k = 0; k < tr.value.size(); ++k)
            csv.row_prefixed(std::string() + std::to_string(q.q[0]) + "," +
                                 std::to_string(q.q[1]) + "," + kind,
                             {tr.delta[k], tr.value[k]});
    };

    bool all_converged = true;
    double quot_dev = 0.0;
    double band_lo = 1e300, band_hi = 0.0;
    bool positive = true;
    for (int qi = 0; qi < nq && qi < static_cast<int>(probes.size()); ++qi) {
        BoundaryApproach appr{probes[qi], 0.25 * sp.dom.diameter(), 12};
        // x-grid for quotients and the Estimation band
        std::vector<Pt> xgrid;
        for (int a = -1; a <= 1; ++a)
            for (int b = -1; b <= 1; ++b) {
                Pt x = sp.dom.x0() + pt(a * 0.15 * sp.dom.diameter() / 1.4,
                                        b * 0.15 * sp.dom.diameter() / 1.4);
                if (sp.dom.contains(x) && sp.op.grid.node_near(x) >= 0) xgrid.push_back(x);
            }
        std::vector<double> q_eta_x0, q_eta_tilde;
        Eigen::VectorXd surv_t = sp.eig.survival(t);
        for (const Pt& x : xgrid) {
            RatioTrace te = boundary_ratio_limit(RatioKind::eta, sp.eig, appr, t, x, sp.dom.x0());
            RatioTrace tx =
                boundary_ratio_limit(RatioKind::eta_x0, sp.eig, appr, t, x, sp.dom.x0());
            RatioTrace tt =
                boundary_ratio_limit(RatioKind::eta_tilde, sp.eig, appr, t, x, sp.dom.x0(), 1.0);
            if (&x == &xgrid.front()) {
                dump(probes[qi], "eta", te);
                dump(probes[qi], "eta_x0", tx);
                dump(probes[qi], "eta_tilde", tt);
            }
            all_converged = all_converged && te.converged && tx.converged && tt.converged;
            positive = positive && te.limit > 0 && tx.limit > 0 && tt.limit > 0;
            q_eta_x0.push_back(te.limit / tx.limit);
            q_eta_tilde.push_back(te.limit / tt.limit);
            double est = te.limit / surv_t(sp.op.grid.node_near(x));
            band_lo = std::min(band_lo, est);
            band_hi = std::max(band_hi, est);
        }
        for (auto& qv : {q_eta_x0, q_eta_tilde}) {
            double mn = *std::min_element(qv.begin(), qv.end());
            double mx = *std::max_element(qv.begin(), qv.end());
            quot_dev = std::max(quot_dev, mx / mn - 1.0);
        }
    }
    ck.add("traces_converged", all_converged, 1.0,
           std::to_string(nq) + " boundary points, three kernels");
    ck.add("limits_positive", positive, 1.0);
    ck.add("quotients_x_independent", quot_dev <= 0.05, quot_dev,
           "pairwise normalization quotients across the x-grid");
    ck.add("estimation_band_finite", band_hi > 0 && std::isfinite(band_hi), band_hi / band_lo,
           "eta_{1,Q}/P^x(tau>1) band ratio");
    extra["estimation_band"] = {band_lo, band_hi};
}

// ---------------------------------------------------------------------------
// entrance

void exp_entrance(const Config& cfg, const std::string& out, Checks& ck, ordered_json& extra) {
    (void)out;
    Config c2 = cfg;
    if (!cfg.has("domain")) c2.set("domain", "unit-disk");
    Spectral sp = make_spectral(c2, 1.0 / 32);
    auto probes = sp.dom.boundary_probes();
    BoundaryApproach appr{probes[0], 0.25 * sp.dom.diameter(), 12};
    double t = cfg.num("t", 0.5), s = cfg.num("s", 0.5);
    Pt x = sp.dom.x0();
    double rel = entrance_law_check(sp.eig, appr, t, s, x);
    ck.add("entrance_rel_error", rel <= 0.05, rel, "eta_{t+s} vs int eta_t p_s");

    // additivity is exact in the discrete model: propagate the eta field
    EtaModes modes = eta_boundary_modes(sp.eig, appr);
    Eigen::VectorXd e_t = eta_field(sp.eig, modes, t);
    Eigen::VectorXd once = sp.eig.apply_heat(s, e_t);
    Eigen::VectorXd twice = sp.eig.apply_heat(s / 2, sp.eig.apply_heat(s / 2, e_t));
    double add_err = (once - twice).cwiseAbs().maxCoeff() / once.cwiseAbs().maxCoeff();
    ck.add("additivity_exact", add_err <= 1e-8, add_err, "semigroup splitting of the propagation");

    // s -> 0 recovers the field
    Eigen::VectorXd tiny = sp.eig.apply_heat(1e-8, e_t);
    double s0_err = (tiny - e_t).cwiseAbs().maxCoeff() / e_t.cwiseAbs().maxCoeff();
    ck.add("s_to_zero", s0_err <= 1e-5, s0_err);
    extra["eta_modes_converged"] = modes.converged;
}

// ---------------------------------------------------------------------------
// yaglom

void exp_yaglom(const Config& cfg, const std::string& out, Checks& ck, ordered_json& extra) {
    Config c2 = cfg;
    if (!cfg.has("domain")) c2.set("domain", "unit-square");
    Spectral sp = make_spectral(c2, 1.0 / 32);
    auto xs = cfg.list("x", {0.5, 0.5});
    Pt x = pt(xs[0], xs[1]);
    std::vector<double> times = cfg.list("times", {1.0, 4.0, 16.0});
    std::int64_t N = cfg.integer("N", 1000000);
    std::uint64_t seed = cfg.integer("seed", 11);
    double dt = cfg.num("dt", 1e-3);
    int partition = static_cast<int>(cfg.integer("partition", 32));

    YaglomResult yr = yaglom_experiment(sp.model, sp.dom, x, times, N, seed, sp.eig, partition, dt);
    CsvWriter csv(join(out, "yaglom_tv.csv"), {"t", "tv", "tv_stderr", "survivors"});
    for (const auto& p : yr.points) csv.row({p.t, p.tv_distance, p.tv_stderr, double(p.survivors)});

    bool decreasing = true;
    for (size_t i = 1; i < yr.points.size(); ++i) {
        double gap = yr.points[i - 1].tv_distance - yr.points[i].tv_distance;
        double pooled = std::sqrt(std::pow(yr.points[i - 1].tv_stderr, 2) +
                                  std::pow(yr.points[i].tv_stderr, 2));
        if (gap <= pooled) decreasing = false;
    }
    ck.add("tv_decreasing", decreasing, yr.points.back().tv_distance,
           "beyond pooled Monte-Carlo error");
    ck.add("m0_mass", std::abs(yr.m0_mass - 1.0) <= 0.05, yr.m0_mass,
           "eta_{1,0} integrates to about 1 before normalization");

    // scaling identity of the proof at small N: the literal dilated run and the
    // rescaled run coincide path by path under the same seed
    {
        double t = times.size() > 1 ? times[1] : 4.0;
        double fac = std::pow(t, 1.0 / sp.model.alpha());
        Pt xt = std::pow(t, -1.0 / sp.model.alpha()) * x;
        EnsembleOptions a;
        a.T = 1.0;
        a.dt = dt;
        a.N = 2000;
        a.seed = seed + 999;
        a.checkpoints = {1.0};
        PathEnsemble small = run_killed_ensemble(sp.model, sp.dom, xt, a);
        EnsembleOptions b = a;
        b.T = t;
        b.dt = dt * t;
        b.checkpoints = {t};
        PathEnsemble big = run_killed_ensemble(sp.model, sp.dom.dilated(fac), x, b);
        double worst = 0.0;
        for (std::int64_t p = 0; p < a.N; ++p) {
            bool sa = small.tau[p] > 1.0, sb = big.tau[p] > t;
            if (sa != sb) worst = 1e300;
            if (sa && sb)
                worst = std::max(worst, dist(*small.checkpoint(p, 0),
                                             std::pow(t, -1.0 / sp.model.alpha()) *
                                                 (*big.checkpoint(p, 0))));
        }
        ck.add("proof_scaling_identity", worst <= 1e-9, worst,
               "same-seed dilated run reproduces the rescaled endpoints");
    }
    extra["survivors"] = ordered_json::array();
    for (const auto& p : yr.points) extra["survivors"].push_back(p.survivors);
}

// ---------------------------------------------------------------------------
// diagnostics: factorization / holder / survival-scaling

void run_diagnostic(DiagnosticKind kind, const Config& cfg, const std::string& out, Checks& ck,
                    ordered_json& extra, const char* csvname) {
    Config c2 = cfg;
    if (!cfg.has("domain"))
        c2.set("domain", kind == DiagnosticKind::survival_scaling ? "unit-square" : "unit-disk");
    Spectral sp = make_spectral(c2, 1.0 / 32);
    DiagnosticConfig dc;
    dc.t = cfg.num("t", 0.5);
    // the boundary-scaling exponent lives at small times; elsewhere the window
    // covers the generic desk-scale range
    bool small_t = kind == DiagnosticKind::survival_scaling;
    dc.T1 = cfg.num("T1", small_t ? 0.02 : 0.1);
    dc.T2 = cfg.num("T2", small_t ? 0.12 : 1.0);
    dc.p = cfg.num("p", 1.0);
    DiagnosticReport rep = ratio_diagnostic(kind, sp.model, sp.dom, sp.eig, dc);
    CsvWriter csv(join(out, csvname), {"abscissa", "value"});
    for (auto& [a, b] : rep.trace) csv.row({a, b});
    extra[rep.kind + "_band"] = {rep.band_lo, rep.band_hi};
    extra[rep.kind + "_exponent"] = rep.exponent;
    extra[rep.kind + "_r2"] = rep.r2;
    switch (kind) {
        case DiagnosticKind::factorization:
        case DiagnosticKind::cks_band:
        case DiagnosticKind::gdest_band:
            ck.add(rep.kind + "_finite_band", rep.pass, rep.band_hi / std::max(rep.band_lo, 1e-300),
                   "band ratio logged, no asserted constant");
            break;
        case DiagnosticKind::holder_eta:
        case DiagnosticKind::holder_green_lp:
            ck.add(rep.kind + "_exponent_positive", rep.exponent > 0, rep.exponent);
            ck.add(rep.kind + "_r2", rep.r2 >= 0.9, rep.r2);
            break;
        case DiagnosticKind::survival_scaling:
            ck.add("sigma_in_unit_interval", rep.pass, rep.exponent);
            break;
        case DiagnosticKind::lip_small_exponents:
            ck.add("exponents_bracketed", rep.pass, rep.exponent,
                   "sigma1 <= sigma2 in (0,1), band logged");
            extra["sigma2"] = rep.exponent2;
            break;
    }
}

void exp_factorization(const Config& cfg, const std::string& out, Checks& ck,
                       ordered_json& extra) {
    run_diagnostic(DiagnosticKind::factorization, cfg, out, ck, extra, "factorization.csv");
    run_diagnostic(DiagnosticKind::cks_band, cfg, out, ck, extra, "cks_band.csv");
    run_diagnostic(DiagnosticKind::gdest_band, cfg, out, ck, extra, "gdest_band.csv");
}

void exp_holder(const Config& cfg, const std::string& out, Checks& ck, ordered_json& extra) {
    run_diagnostic(DiagnosticKind::holder_eta, cfg, out, ck, extra, "holder_eta.csv");
    Config cp = cfg;
    run_diagnostic(DiagnosticKind::holder_green_lp, cp, out, ck, extra, "holder_green_l1.csv");
    cp.set("p", "1.1");
    run_diagnostic(DiagnosticKind::holder_green_lp, cp, out, ck, extra, "holder_green_l11.csv");
    run_diagnostic(DiagnosticKind::lip_small_exponents, cfg, out, ck, extra, "lip_small.csv");
}

void exp_survival_scaling(const Config& cfg, const std::string& out, Checks& ck,
                          ordered_json& extra) {
    run_diagnostic(DiagnosticKind::survival_scaling, cfg, out, ck, extra, "survival_scaling.csv");
}

// ---------------------------------------------------------------------------
// ikeda-watanabe

void exp_ikeda_watanabe(const Config& cfg, const std::string& out, Checks& ck,
                        ordered_json& extra) {
    Config c2 = cfg;
    if (!cfg.has("domain")) c2.set("domain", "unit-disk");
    Spectral sp = make_spectral(c2, 1.0 / 24);
    GridOperator opc = assemble_operator(sp.model, sp.dom, sp.op.h * 1.5);
    EigenSystem eigc = eigensystem(opc, 0);

    std::int64_t N = cfg.integer("N", 300000);
    std::uint64_t seed = cfg.integer("seed", 17);
    int nconf = static_cast<int>(cfg.integer("configs", 10));
    EnsembleOptions opts;
    opts.T = 1.6;
    opts.dt = cfg.num("dt", 1e-3);
    opts.N = N;
    opts.seed = seed;
    PathEnsemble ens = run_killed_ensemble(sp.model, sp.dom, pt(0, 0), opts);

    CsvWriter csv(join(out, "ikeda_watanabe.csv"),
                  {"t0", "t1", "a_size", "b_dir", "mc", "mc_stderr", "formula", "z"});
    Rng rng(seed, 12345);
    double worst = 0.0;
    int done = 0, attempts = 0;
    while (done < nconf && attempts < 200) {
        ++attempts;
        double t0 = 0.05 + 0.5 * rng.uniform();
        double t1 = t0 + 0.3 + 0.6 * rng.uniform();
        double aw = 0.25 + 0.2 * rng.uniform();
        double ax = (rng.uniform() - 0.5) * 0.5, ay = (rng.uniform() - 0.5) * 0.5;
        if (std::hypot(std::abs(ax) + aw, std::abs(ay) + aw) > 0.97) continue;
        double th = 2 * M_PI * rng.uniform();
        double br = 1.35 + 0.5 * rng.uniform(), bw = 0.22;
        Pt bc = pt(br * std::cos(th), br * std::sin(th));
        Pt alo = pt(ax - aw, ay - aw), ahi = pt(ax + aw, ay + aw);
        Pt blo = bc + pt(-bw, -bw), bhi = bc + pt(bw, bw);
        try {
            IkedaWatanabeCheck r =
                ikeda_watanabe_check(ens, t0, t1, alo, ahi, blo, bhi, sp.eig, eigc);
            csv.row({t0, t1, aw, th, r.mc_prob, r.mc_stderr, r.formula_prob, r.z_score});
            worst = std::max(worst, std::abs(r.z_score));
            ++done;
        } catch (const InsufficientData&) {
            continue;  // too few events in this window; draw another
        }
    }
    ck.add("configs_checked", done >= nconf, double(done));
    ck.add("max_abs_z", worst <= 3.0, worst,
           "|z| over " + std::to_string(done) + " randomized (I,A,B)");

    // additivity of the formula under partitioning (quadrature property, no
    // event count involved)
    {
        Pt alo = pt(-0.3, -0.3), ahi = pt(0.3, 0.3);
        Pt blo = pt(1.2, -0.25), bhi = pt(1.7, 0.25);
        auto prob = [&](double a, double b, const Pt& l, const Pt& h) {
            return ikeda_watanabe_formula(sp.model, sp.eig, pt(0, 0), a, b, alo, ahi, l, h);
        };
        double whole = prob(0.2, 1.0, blo, bhi);
        Pt bmid = pt(blo[0], 0.5 * (blo[1] + bhi[1]));
        Pt bmid2 = pt(bhi[0], 0.5 * (blo[1] + bhi[1]));
        double parts = prob(0.2, 0.6, blo, bhi) + prob(0.6, 1.0, blo, bhi);
        double parts2 = prob(0.2, 1.0, blo, bmid2) + prob(0.2, 1.0, bmid, bhi);
        double err = std::max(std::abs(parts - whole), std::abs(parts2 - whole)) /
                     std::max(whole, 1e-300);
        ck.add("formula_additivity", err <= 1e-10, err, "partition of I and of B");
    }
    extra["attempts"] = attempts;
}

// ---------------------------------------------------------------------------
// lateral-kernel

void exp_lateral_kernel(const Config& cfg, const std::string& out, Checks& ck,
                        ordered_json& extra) {
    Config c2 = cfg;
    if (!cfg.has("domain")) c2.set("domain", "unit-disk");
    Spectral sp = make_spectral(c2, 1.0 / 20);

    // exit-law completeness on random sub-cylinders
    Rng rng(cfg.integer("seed", 23), 77);
    double worst_mass = 0.0;
    CsvWriter csv(join(out, "cylinder_completeness.csv"),
                  {"cx", "cy", "radius", "span", "mass"});
    for (int i = 0; i < 10; ++i) {
        double cr = 0.3 + 0.3 * rng.uniform();
        double cx = (rng.uniform() - 0.5) * 0.6, cy = (rng.uniform() - 0.5) * 0.6;
        if (std::hypot(cx, cy) + cr > 0.95) {
            --i;
            continue;
        }
        double span = 0.2 + 0.8 * rng.uniform();
        SubSystem sub = make_subsystem(
            sp.op, [&](const Pt& p) { return dist(p, pt(cx, cy)) < cr; });
        double mass = cylinder_exit_mass(sp.op, sub, span, pt(cx, cy));
        csv.row({cx, cy, cr, span, mass});
        worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
    }
    ck.add("exit_law_completeness", worst_mass <= 1e-3, worst_mass,
           "lateral + terminal mass over 10 random cylinders");

    // MC cross-check of the joint (tau, X_tau) law against J^D
    {
        GridOperator opc = assemble_operator(sp.model, sp.dom, sp.op.h * 1.5);
        EigenSystem eigc = eigensystem(opc, 0);
        EnsembleOptions opts;
        opts.T = 1.2;
        opts.dt = cfg.num("dt", 1e-3);
        opts.N = cfg.integer("N", 200000);
        opts.seed = cfg.integer("seed", 23);
        PathEnsemble ens = run_killed_ensemble(sp.model, sp.dom, pt(0, 0), opts);
        Pt alo = sp.dom.bbox_lo(), ahi = sp.dom.bbox_hi();
        double worstz = 0.0;
        for (int j = 0; j < 4; ++j) {
            double th = j * M_PI / 2 + 0.3;
            Pt bc = pt(1.5 * std::cos(th), 1.5 * std::sin(th));
            IkedaWatanabeCheck r =
                ikeda_watanabe_check(ens, 0.1 + 0.15 * j, 0.5 + 0.15 * j, alo, ahi,
                                     bc + pt(-0.3, -0.3), bc + pt(0.3, 0.3), sp.eig, eigc);
            worstz = std::max(worstz, std::abs(r.z_score));
        }
        ck.add("mc_joint_law_z", worstz <= 3.0, worstz,
               "(tau, X_tau) histogram against the J^D x time density");
    }

    // comparability in x and almost-monotonicity in t, plus the algebraic
    // normal-derivative identity
    {
        SubSystem sub = make_subsystem(
            sp.op, [&](const Pt& p) { return dist(p, pt(0, 0)) < 0.55; });
        std::vector<Pt> xs;
        for (double a : {-0.2, 0.0, 0.2})
            for (double b : {-0.2, 0.2}) xs.push_back(pt(a, b));
        Pt z1 = pt(0.75, 0.1);  // in D \ U
        Pt z2 = pt(1.4, -0.3);  // exterior
        double lo = 1e300, hi = 0.0, mono = 0.0;
        for (const Pt& x : xs) {
            for (const Pt& z : {z1, z2}) {
                double num = lateral_poisson_kernel(sp.op, sub, 1.0, x, 0.4, z);
                double den = lateral_poisson_kernel(sp.op, sub, 1.0, pt(0, 0), 0.4, z);
                lo = std::min(lo, num / den);
                hi = std::max(hi, num / den);
                double early = lateral_poisson_kernel(sp.op, sub, 0.7, x, 0.4, z);
                mono = std::max(mono, early / num);
            }
        }
        ck.add("x_comparability_finite", std::isfinite(hi / lo) && lo > 0, hi / lo,
               "J(t,x,s,z)/J(t,x0,s,z) band over interior x");
        extra["t_monotonicity_constant"] = mono;

        // J = nonlocal normal derivative of p^U (zero extension)
        int xloc = 0;
        Eigen::VectorXd p = sub.eig.heat_field(0.6, xloc, 0);
        int zp = sp.op.grid.node_near(z1);
        double direct = 0.0;
        for (size_t l = 0; l < sub.nodes.size(); ++l)
            direct += p(l) * sp.op.jump_weight(sub.nodes[l], zp);
        direct /= sp.op.grid.cell_volume();
        double viaJ = lateral_poisson_kernel(sp.op, sub, 1.0, sp.op.grid.point(sub.nodes[0]),
                                             0.4, z1);
        ck.add("normal_derivative_identity", std::abs(direct - viaJ) <= 1e-10 * std::abs(viaJ) + 1e-14,
               std::abs(direct - viaJ), "J equals the nonlocal normal derivative");
    }
}

// ---------------------------------------------------------------------------
// mean-value

void exp_mean_value(const Config& cfg, const std::string& out, Checks& ck, ordered_json& extra) {
    (void)out;
    Config c2 = cfg;
    if (!cfg.has("domain")) c2.set("domain", "unit-disk");
    Spectral sp = make_spectral(c2, 1.0 / 20);
    SubSystem sub = make_subsystem(sp.op, [&](const Pt& p) { return dist(p, pt(0, 0)) < 0.55; });

    // candidates cache the field of their most recent time: the Poisson
    // integral sweeps many points per time node
    int xf = sp.op.grid.node_near(pt(0.3, -0.2));
    auto heat_cache = std::make_shared<std::pair<double, Eigen::VectorXd>>(-1.0,
                                                                           Eigen::VectorXd());
    SpaceTimeFn heat = [&, heat_cache](double t, const Pt& z) {
        if (t <= 0) return 0.0;
        int n = sp.op.grid.node_near(z);
        if (n < 0) return 0.0;
        if (heat_cache->first != t) *heat_cache = {t, sp.eig.heat_field(t, xf, 0)};
        return heat_cache->second(n);
    };
    SpaceTimeCylinder G{0.2, 1.0, &sub};
    std::vector<std::pair<double, Pt>> probes = {{0.6, pt(0, 0)}, {0.9, pt(0.25, 0.1)},
                                                 {0.45, pt(-0.2, 0.15)}};
    double res1 = mean_value_residual(heat, sp.op, G, probes);
    ck.add("heat_kernel_caloric", res1 <= 1e-3, res1,
           "spectral p_t^D on a sub-cylinder (exact discretely)");

    // P_t^D f for f >= 0 bounded
    Eigen::VectorXd f0(sp.op.grid.size());
    for (int i = 0; i < sp.op.grid.size(); ++i)
        f0(i) = 1.0 + std::sin(3 * sp.op.grid.point(i)[0]) * std::cos(2 * sp.op.grid.point(i)[1]);
    auto ptf_cache = std::make_shared<std::pair<double, Eigen::VectorXd>>(-1.0,
                                                                          Eigen::VectorXd());
    SpaceTimeFn ptf = [&, ptf_cache](double t, const Pt& z) {
        int n = sp.op.grid.node_near(z);
        if (n < 0) return 0.0;
        if (t <= 0) return f0(n);
        if (ptf_cache->first != t) *ptf_cache = {t, sp.eig.apply_heat(t, f0)};
        return ptf_cache->second(n);
    };
    double res2 = mean_value_residual(ptf, sp.op, G, probes);
    ck.add("semigroup_caloric", res2 <= 1e-3, res2, "P_t^D f on [0,T) cylinders");

    // detector sensitivity: an injected defect is seen
    double eps = 0.01;
    double base = heat(0.6, pt(0, 0));
    SpaceTimeFn bad = [&](double t, const Pt& z) {
        double v = heat(t, z);
        if (std::abs(t - 0.6) < 1e-12 && dist(z, pt(0, 0)) < 1e-12) v += eps;
        return v;
    };
    double res3 = mean_value_residual(bad, sp.op, G, {{0.6, pt(0, 0)}});
    ck.add("defect_detected", res3 >= eps / 2, res3, "+0.01 perturbation at a probe");
    extra["heat_value_scale"] = base;
}

// ---------------------------------------------------------------------------
// singular-caloric

void exp_singular_caloric(const Config& cfg, const std::string& out, Checks& ck,
                          ordered_json& extra) {
    Config c2 = cfg;
    if (!cfg.has("domain")) c2.set("domain", "unit-square");
    Spectral sp = make_spectral(c2, 1.0 / 32);
    auto probes_b = sp.dom.boundary_probes();
    BoundaryMeasure mu;
    mu.atoms.push_back({probes_b[0], 0.0, 1.0});
    SingularCaloric h = make_singular_caloric(sp.eig, mu, 0.25 * sp.dom.diameter());

    // single atom reproduces eta
    EtaModes modes = eta_boundary_modes(sp.eig, BoundaryApproach{probes_b[0],
                                                                 0.25 * sp.dom.diameter(), 10});
    int xn = sp.op.grid.node_near(sp.dom.x0());
    double direct = eta_eval(sp.eig, modes, 0.7, xn);
    ck.add("single_atom_identity", std::abs(h.eval(0.7, xn) - direct) <= 1e-12 * std::abs(direct),
           h.eval(0.7, xn), "h = eta for mu = delta_Q x delta_0");

    // caloricity: relative mean-value residual on an interior cylinder
    SubSystem sub = make_subsystem(sp.op, [&](const Pt& p) {
        return dist(p, sp.dom.x0()) < 0.22 * sp.dom.diameter();
    });
    SpaceTimeCylinder G{0.25, 1.0, &sub};
    std::vector<std::pair<double, Pt>> pr = {{0.6, sp.dom.x0()}, {0.9, sp.dom.x0()}};
    double res = mean_value_residual(h.as_fn(), sp.op, G, pr);
    double scale = std::abs(h.eval(0.6, xn));
    ck.add("singular_caloricity", res <= 0.05 * scale, res / scale,
           "relative mean-value residual of the delta-measure candidate");

    // vanishing initial trace away from the singularity.  The truncated
    // expansion cannot resolve small times, so the check runs on the anchored
    // full-spectrum kernel column, cross-checked against h where both resolve.
    Pt wq = sp.op.grid.point(sp.op.grid.node_near(
        probes_b[0].q + (0.5 * sp.op.h) * probes_b[0].inward));
    int wn = sp.op.grid.node_near(wq);
    double s1w = sp.eig.survival(1.0)(wn);
    auto surrogate = [&](double t, int node) {
        return sp.eig.heat_kernel(t, wn, node, 0) / s1w;
    };
    double cons = 0.0;
    for (double t : {0.6, 0.9, 1.2})
        cons = std::max(cons, std::abs(h.eval(t, xn) / surrogate(t, xn) - 1.0));
    ck.add("surrogate_consistency", cons <= 0.10, cons,
           "eta modes vs the anchored kernel column at resolvable times");
    std::vector<double> ts = {0.05, 0.1, 0.2, 0.4, 0.8};
    CsvWriter csv(join(out, "singular_caloric_trace.csv"), {"t", "surrogate_at_x0", "h_at_x0"});
    double hmax = 0.0;
    for (double t : ts) hmax = std::max(hmax, surrogate(t, xn));
    for (double t : ts) csv.row({t, surrogate(t, xn), h.eval(t, xn)});
    ck.add("vanishing_initial_trace", surrogate(ts.front(), xn) <= 0.5 * hmax,
           surrogate(ts.front(), xn) / hmax, "trace ratio at t = 0.05 over the window max");

    // two-atom superposition sanity
    BoundaryMeasure mu2;
    mu2.atoms.push_back({probes_b[0], 0.0, 0.6});
    mu2.atoms.push_back({probes_b[1], 0.2, 0.4});
    SingularCaloric h2 = make_singular_caloric(sp.eig, mu2, 0.25 * sp.dom.diameter());
    ck.add("superposition_finite", std::isfinite(h2.eval(0.9, xn)) && h2.eval(0.9, xn) > 0,
           h2.eval(0.9, xn));
    extra["total_mass"] = mu2.total_mass();
}

// ---------------------------------------------------------------------------
// measure-recovery

void exp_measure_recovery(const Config& cfg, const std::string& out, Checks& ck,
                          ordered_json& extra) {
    // The concentration target needs a fine lattice; Crank-Nicolson marches
    // keep it affordable where a dense eigensolve would not be.
    StableModel m(static_cast<int>(cfg.integer("d", 2)), cfg.num("alpha", 1.5));
    Config c2 = cfg;
    if (!cfg.has("domain")) c2.set("domain", "unit-square");
    Domain dom = c2.domain();
    double h = cfg.num("h", 1.0 / 96);
    GridOperator op = assemble_operator(m, dom, h);

    auto probes_b = dom.boundary_probes();
    BoundaryPoint Q = probes_b[0];
    double diam = dom.diameter();
    std::vector<double> deltas =
        cfg.list("shrink_deltas", {diam / 8.0, diam / 16.0, diam / 32.0, diam / 64.0});
    double eps = cfg.num("eps", 0.1 * diam);
    double T = cfg.num("T", 0.2);
    double dt = cfg.num("dt", 1e-3);
    auto levels =
        recover_boundary_measure_cn(op, Q.q, deltas, T, eps, dom.x0(), 0.25 * T, dt);
    CsvWriter csv(join(out, "measure_recovery.csv"),
                  {"delta", "nodes", "mass", "mass_bound", "bary_dist", "bary_time", "frac_near"});
    for (const auto& l : levels)
        csv.row({l.delta, double(l.nodes), l.mass, l.mass_bound, l.barycenter_space_dist,
                 l.barycenter_time, l.frac_near});

    ck.add("masses_bounded", levels.back().mass > 0 && std::isfinite(levels.back().mass),
           levels.back().mass / std::max(levels.back().mass_bound, 1e-300),
           "mass over u(x0, t+theta), comparability factor logged");
    ck.add("concentration_at_finest", levels.back().frac_near >= 0.9, levels.back().frac_near,
           "mass fraction in B(Q,eps) x [0,eps)");
    bool tightening = true;
    for (size_t i = 1; i < levels.size(); ++i)
        if (levels[i].frac_near < levels[i - 1].frac_near - 0.02) tightening = false;
    ck.add("concentration_tightening", tightening, levels.front().frac_near);

    // initial-measure recovery for the heat-kernel candidate (coarse spectral
    // grid is plenty here)
    Spectral sp = make_spectral(c2, 1.0 / 32);
    int xf = sp.op.grid.node_near(sp.dom.x0() + pt(0.1, -0.05));
    SpaceTimeFn heat = [&](double t, const Pt& z) {
        if (t <= 0) return 0.0;
        int n = sp.op.grid.node_near(z);
        return n < 0 ? 0.0 : sp.eig.heat_kernel(t, xf, n, 0);
    };
    auto conc = initial_concentration(heat, sp.eig, sp.op.grid.point(xf), {0.08, 0.04, 0.02},
                                      0.1 * diam);
    ck.add("initial_recovery", conc.back().second >= 0.8, conc.back().second,
           "u(eps,.) mass near x_f as eps -> 0");
    extra["initial_concentration"] = ordered_json::array();
    for (auto& [e, frac] : conc) extra["initial_concentration"].push_back({e, frac});
}

using ExpFn = void (*)(const Config&, const std::string&, Checks&, ordered_json&);

const std::vector<std::pair<std::string, ExpFn>>& registry() {
    static const std::vector<std::pair<std::string, ExpFn>> reg = {
        {"ball-exit-law", exp_ball_exit_law},
        {"survival", exp_survival},
        {"heat-kernel", exp_heat_kernel},
        {"green", exp_green},
        {"spectral-weyl", exp_spectral_weyl},
        {"l38", exp_l38},
        {"c1", exp_c1},
        {"martin-traces", exp_martin_traces},
        {"entrance", exp_entrance},
        {"yaglom", exp_yaglom},
        {"factorization", exp_factorization},
        {"holder", exp_holder},
        {"survival-scaling", exp_survival_scaling},
        {"ikeda-watanabe", exp_ikeda_watanabe},
        {"lateral-kernel", exp_lateral_kernel},
        {"mean-value", exp_mean_value},
        {"singular-caloric", exp_singular_caloric},
        {"measure-recovery", exp_measure_recovery},
    };
    return reg;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [n, f] : registry()) out.push_back(n);
        return out;
    }();
    return names;
}

ExperimentResult run_experiment(const std::string& name, Config cfg, const std::string& out_dir) {
    ExpFn fn = nullptr;
    for (const auto& [n, f] : registry())
        if (n == name) fn = f;
    if (!fn) {
        std::string valid;
        for (const auto& n : experiment_names()) valid += (valid.empty() ? "" : ", ") + n;
        throw ConfigError("unknown experiment '" + name + "' (valid: " + valid + ")");
    }
    std::filesystem::create_directories(out_dir);
    Checks ck;
    ordered_json extra;
    fn(cfg, out_dir, ck, extra);

    ExperimentResult res;
    res.pass = ck.all;
    res.summary["schema_version"] = 1;
    res.summary["experiment"] = name;
    res.summary["config"] = cfg.echo();
    res.summary["checks"] = ck.items;
    res.summary["results"] = extra;
    res.summary["pass"] = ck.all;
    std::ofstream js(join(out_dir, "summary.json"));
    js << res.summary.dump(2) << "\n";
    return res;
}

}  // namespace fc
