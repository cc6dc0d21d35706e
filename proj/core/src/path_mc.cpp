#include "fraccaloric/path_mc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fraccaloric/errors.hpp"
#include "fraccaloric/io.hpp"
#include "fraccaloric/quadrature.hpp"

namespace fc {

int PathEnsemble::checkpoint_index(double t) const {
    for (size_t i = 0; i < opts.checkpoints.size(); ++i)
        if (std::abs(opts.checkpoints[i] - t) < 1e-9) return static_cast<int>(i);
    throw ConfigError("time is not an ensemble checkpoint");
}

PathEnsemble run_killed_ensemble(const StableModel& m, const Domain& dom, const Pt& x,
                                 const EnsembleOptions& opts) {
    if (opts.dt <= 0 || opts.N <= 0) throw ConfigError("need dt > 0 and N > 0");
    if (opts.dt > opts.T) throw ConfigError("need dt <= T");
    if (!dom.contains(x)) throw ConfigError("start point must be interior");
    const std::int64_t nsteps = std::llround(opts.T / opts.dt);
    if (std::abs(nsteps * opts.dt - opts.T) > 1e-9 * opts.T)
        throw ConfigError("T must be a multiple of dt");
    std::vector<std::int64_t> cp_step;
    for (double tc : opts.checkpoints) {
        std::int64_t s = std::llround(tc / opts.dt);
        if (std::abs(s * opts.dt - tc) > 1e-9 || s < 0 || s > nsteps)
            throw ConfigError("checkpoints must be multiples of dt within [0, T]");
        cp_step.push_back(s);
    }

    PathEnsemble ens{m, dom, x, opts, {}, {}, {}, {}, {}, {}};
    const std::int64_t N = opts.N;
    const size_t ncp = opts.checkpoints.size();
    ens.tau.assign(N, std::numeric_limits<double>::infinity());
    ens.pre_jump.assign(N, {0, 0, 0});
    ens.post_jump.assign(N, {0, 0, 0});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    ens.checkpoint_pos.assign(N * ncp, {nan, nan, nan});

    const bool occ = opts.occupation_grid.has_value();
    const Grid* ogrid = occ ? &*opts.occupation_grid : nullptr;
    const int ncells = occ ? ogrid->size() : 0;
    int nthreads = 1;
#ifdef _OPENMP
    nthreads = omp_get_max_threads();
#endif
    std::vector<std::vector<std::int64_t>> occ_loc(nthreads);
    std::vector<std::vector<double>> occ_sq_loc(nthreads);
    if (occ)
        for (int t = 0; t < nthreads; ++t) {
            occ_loc[t].assign(ncells, 0);
            occ_sq_loc[t].assign(ncells, 0.0);
        }

    const int nsub = 1 << opts.bisect_levels;
    const std::int64_t full_units = 2LL * nsub;  // units of dt / (2 nsub) per step

#pragma omp parallel
    {
        int tid = 0;
#ifdef _OPENMP
        tid = omp_get_thread_num();
#endif
        // per-path scratch of touched occupation cells
        std::vector<std::pair<int, std::int64_t>> touched;
#pragma omp for schedule(dynamic, 256)
        for (std::int64_t p = 0; p < N; ++p) {
            Rng rng(opts.seed, static_cast<std::uint64_t>(p));
            Pt pos = x;
            touched.clear();
            auto add_occ = [&](const Pt& at, std::int64_t units) {
                if (!occ) return;
                int c = ogrid->node_near(at);
                if (c >= 0) touched.emplace_back(c, units);
            };
            size_t cpi = 0;
            bool alive = true;
            for (std::int64_t s = 0; s < nsteps && alive; ++s) {
                while (cpi < ncp && cp_step[cpi] == s) {
                    ens.checkpoint_pos[p * ncp + cpi] = pos;
                    ++cpi;
                }
                Pt prop = pos + m.sample_increment(opts.dt, rng);
                if (dom.contains(prop)) {
                    add_occ(pos, full_units);
                    pos = prop;
                    continue;
                }
                // the step exits; bisect the killing interval with fresh
                // (bridge-free) sub-increments to localize the exit time
                alive = false;
                std::int64_t a = 0, b = 2LL * nsub;  // units of dt / (2 nsub)
                Pt cur = pos;
                Pt post = prop;
                for (int lvl = 0; lvl < opts.bisect_levels; ++lvl) {
                    std::int64_t half = (b - a) / 2;
                    double span = half * (opts.dt / (2.0 * nsub));
                    Pt mid = cur + m.sample_increment(span, rng);
                    if (!dom.contains(mid)) {
                        b = a + half;
                        post = mid;
                    } else {
                        cur = mid;
                        a = a + half;
                    }
                }
                std::int64_t tmid = (a + b) / 2;  // exact: a,b share parity 2^{K-lvl}
                ens.tau[p] = s * opts.dt + tmid * (opts.dt / (2.0 * nsub));
                ens.pre_jump[p] = cur;
                ens.post_jump[p] = post;
                add_occ(pos, tmid);  // killed-step occupancy up to the midpoint
            }
            if (alive)
                while (cpi < ncp && cp_step[cpi] == nsteps) {
                    ens.checkpoint_pos[p * ncp + cpi] = pos;
                    ++cpi;
                }
            if (occ && !touched.empty()) {
                std::sort(touched.begin(), touched.end());
                size_t i = 0;
                while (i < touched.size()) {
                    int cell = touched[i].first;
                    std::int64_t u = 0;
                    while (i < touched.size() && touched[i].first == cell) u += touched[i++].second;
                    occ_loc[tid][cell] += u;
                    occ_sq_loc[tid][cell] += static_cast<double>(u) * static_cast<double>(u);
                }
            }
        }
    }
    if (occ) {
        ens.occ_units.assign(ncells, 0);
        ens.occ_sumsq.assign(ncells, 0.0);
        for (int t = 0; t < nthreads; ++t)
            for (int c = 0; c < ncells; ++c) {
                ens.occ_units[c] += occ_loc[t][c];
                ens.occ_sumsq[c] += occ_sq_loc[t][c];
            }
    }
    return ens;
}

Estimate survival_probability(const PathEnsemble& ens, double t) {
    if (t > ens.opts.T + 1e-12) throw ConfigError("t exceeds the ensemble horizon");
    std::int64_t alive = 0;
    for (double tau : ens.tau)
        if (tau > t) ++alive;
    double n = static_cast<double>(ens.count());
    double p = alive / n;
    return {p, std::sqrt(std::max(p * (1 - p), 1.0 / n) / n)};
}

Estimate expected_exit_time(const PathEnsemble& ens, double lambda1) {
    double T = ens.opts.T;
    double n = static_cast<double>(ens.count());
    double mean = 0.0, m2 = 0.0;
    std::int64_t alive_T = 0;
    for (double tau : ens.tau) {
        double v = std::min(tau, T);
        mean += v;
        m2 += v * v;
        if (tau > T) ++alive_T;
    }
    mean /= n;
    double var = std::max(0.0, m2 / n - mean * mean);
    double sT = alive_T / n;
    double rate = lambda1;
    if (rate <= 0) {
        // doubling-window fit of the tail decay
        Estimate a = survival_probability(ens, T / 2);
        double b = std::max(sT, 0.5 / n);
        rate = (a.value > 0 && b > 0 && a.value > b)
                   ? std::log(a.value / b) / (T / 2)
                   : 1.0;
    }
    double tail = sT / rate;
    double se = std::sqrt(var / n) + std::sqrt(sT * (1 - sT) / n) / rate;
    return {mean + tail, se};
}

namespace {

ScalarField histogram_field(const Grid& grid, const std::vector<std::int64_t>& counts,
                            double denom) {
    ScalarField f;
    f.cell_volume = grid.cell_volume();
    f.pts = grid.points();
    f.value.resize(grid.size());
    f.stderr_.resize(grid.size());
    f.unreliable.resize(grid.size());
    for (int c = 0; c < grid.size(); ++c) {
        double p = counts[c] / denom;
        f.value[c] = p / f.cell_volume;
        f.stderr_[c] = std::sqrt(std::max(p * (1 - p), 0.0) / denom) / f.cell_volume;
        f.unreliable[c] = counts[c] < 10;
    }
    return f;
}

}  // namespace

McFields mc_fields(const PathEnsemble& ens, double t, const Grid& grid, double margin) {
    int cp = ens.checkpoint_index(t);
    int cp1 = -1;
    try {
        cp1 = ens.checkpoint_index(1.0);
    } catch (const ConfigError&) {
    }
    const std::int64_t N = ens.count();
    const size_t ncp = ens.opts.checkpoints.size();

    std::vector<std::int64_t> heat_counts(grid.size(), 0);
    std::vector<std::int64_t> mx_counts(grid.size(), 0);
    std::int64_t alive1 = 0;
    for (std::int64_t p = 0; p < N; ++p) {
        if (ens.tau[p] > t) {
            const Pt& at = ens.checkpoint_pos[p * ncp + cp];
            int c = grid.node_near(at);
            if (c >= 0) ++heat_counts[c];
        }
        if (cp1 >= 0 && ens.tau[p] > 1.0) {
            ++alive1;
            const Pt& at = ens.checkpoint_pos[p * ncp + cp1];
            int c = grid.node_near(at);
            if (c >= 0) ++mx_counts[c];
        }
    }

    McFields out;
    out.heat_kernel = histogram_field(grid, heat_counts, static_cast<double>(N));
    if (cp1 >= 0 && alive1 > 0)
        out.m_x = histogram_field(grid, mx_counts, static_cast<double>(alive1));

    // green from the occupation accumulators
    if (!ens.occ_units.empty()) {
        if (!ens.opts.occupation_grid || ens.opts.occupation_grid->size() != grid.size())
            throw ConfigError("occupation grid does not match the requested grid");
        double unit = ens.occupation_unit();
        ScalarField g;
        g.cell_volume = grid.cell_volume();
        g.pts = grid.points();
        g.value.resize(grid.size());
        g.stderr_.resize(grid.size());
        g.unreliable.resize(grid.size());
        for (int c = 0; c < grid.size(); ++c) {
            double mean_units = static_cast<double>(ens.occ_units[c]) / N;
            double var_units =
                std::max(0.0, ens.occ_sumsq[c] / N - mean_units * mean_units);
            g.value[c] = mean_units * unit / g.cell_volume;
            g.stderr_[c] = std::sqrt(var_units / N) * unit / g.cell_volume;
            g.unreliable[c] = ens.occ_units[c] < 10;
        }
        out.green = g;
    }

    // harmonic measure on the exterior window
    {
        Pt lo = ens.domain.bbox_lo(), hi = ens.domain.bbox_hi();
        for (int i = 0; i < ens.domain.dim(); ++i) {
            lo[i] -= margin;
            hi[i] += margin;
        }
        Domain window = Domain::box(ens.domain.dim(), lo, hi);
        Grid wgrid(window, grid.h());
        std::vector<std::int64_t> counts(wgrid.size(), 0);
        std::int64_t killed = 0;
        for (std::int64_t p = 0; p < N; ++p) {
            if (std::isfinite(ens.tau[p])) {
                ++killed;
                int c = wgrid.node_near(ens.post_jump[p]);
                if (c >= 0 && !ens.domain.contains(wgrid.point(c))) ++counts[c];
            }
        }
        ScalarField hm = histogram_field(wgrid, counts, static_cast<double>(N));
        // zero out cells inside D (post-jump positions cannot land there)
        for (int c = 0; c < wgrid.size(); ++c)
            if (ens.domain.contains(wgrid.point(c))) {
                hm.value[c] = 0.0;
                hm.stderr_[c] = 0.0;
                hm.unreliable[c] = 1;
            }
        out.harmonic_measure = hm;
    }
    return out;
}

namespace {

bool inbox_d(const Pt& p, const Pt& lo, const Pt& hi, int d) {
    for (int i = 0; i < d; ++i)
        if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
}

}  // namespace

double ikeda_watanabe_formula(const StableModel& m, const EigenSystem& e, const Pt& start,
                              double t0, double t1, const Pt& a_lo, const Pt& a_hi,
                              const Pt& b_lo, const Pt& b_hi) {
    const int d = m.dim();
    // nodes of A with their exterior-mass factor int_B nu(y-z) dz
    std::vector<int> anodes;
    std::vector<double> bmass;
    const GaussRule& g8 = gauss_legendre(8);
    for (int i = 0; i < e.grid.size(); ++i) {
        const Pt& y = e.grid.point(i);
        if (!inbox_d(y, a_lo, a_hi, d)) continue;
        double mass = 0.0;
        if (d == 1) {
            mass = gauss_apply(
                g8, [&](double z) { return m.nu(std::abs(z - y[0])); }, b_lo[0], b_hi[0]);
        } else {
            for (size_t iu = 0; iu < g8.x.size(); ++iu) {
                double zx = 0.5 * (b_lo[0] + b_hi[0]) + 0.5 * (b_hi[0] - b_lo[0]) * g8.x[iu];
                double wx = 0.5 * (b_hi[0] - b_lo[0]) * g8.w[iu];
                for (size_t iv = 0; iv < g8.x.size(); ++iv) {
                    double zy = 0.5 * (b_lo[1] + b_hi[1]) + 0.5 * (b_hi[1] - b_lo[1]) * g8.x[iv];
                    double wy = 0.5 * (b_hi[1] - b_lo[1]) * g8.w[iv];
                    mass += wx * wy * m.nu(dist(y, pt(zx, zy)));
                }
            }
        }
        anodes.push_back(i);
        bmass.push_back(mass);
    }
    int xn = e.grid.node_near(start);
    if (xn < 0) throw ConfigError("start point is off the spectral grid");
    const GaussRule& g20 = gauss_legendre(20);
    double hd = e.grid.cell_volume();
    double acc = 0.0;
    for (size_t iu = 0; iu < g20.x.size(); ++iu) {
        double u = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * g20.x[iu];
        double wu = 0.5 * (t1 - t0) * g20.w[iu];
        Eigen::VectorXd p_u = e.heat_field(u, xn, 0);
        double inner = 0.0;
        for (size_t a = 0; a < anodes.size(); ++a) inner += p_u(anodes[a]) * bmass[a];
        acc += wu * inner * hd;
    }
    return acc;
}

IkedaWatanabeCheck ikeda_watanabe_check(const PathEnsemble& ens, double t0, double t1,
                                        const Pt& a_lo, const Pt& a_hi, const Pt& b_lo,
                                        const Pt& b_hi, const EigenSystem& eig,
                                        const EigenSystem& eig_coarse) {
    const int d = ens.model.dim();
    IkedaWatanabeCheck out;
    for (std::int64_t p = 0; p < ens.count(); ++p) {
        double tau = ens.tau[p];
        if (std::isfinite(tau) && tau >= t0 && tau <= t1 &&
            inbox_d(ens.pre_jump[p], a_lo, a_hi, d) && inbox_d(ens.post_jump[p], b_lo, b_hi, d))
            ++out.events;
    }
    if (out.events < 100)
        throw InsufficientData("fewer than 100 qualifying exit events in the window");
    double n = static_cast<double>(ens.count());
    out.mc_prob = out.events / n;
    out.mc_stderr = std::sqrt(out.mc_prob * (1 - out.mc_prob) / n);

    out.formula_prob =
        ikeda_watanabe_formula(ens.model, eig, ens.start, t0, t1, a_lo, a_hi, b_lo, b_hi);
    double coarse =
        ikeda_watanabe_formula(ens.model, eig_coarse, ens.start, t0, t1, a_lo, a_hi, b_lo, b_hi);
    out.formula_err = std::abs(out.formula_prob - coarse);
    out.z_score = (out.mc_prob - out.formula_prob) /
                  std::sqrt(out.mc_stderr * out.mc_stderr + out.formula_err * out.formula_err);
    return out;
}

void PathEnsemble::save(const std::string& path) const {
    std::vector<std::pair<std::string, std::vector<double>>> cols;
    cols.push_back({"meta",
                    {double(model.dim()), model.alpha(), start[0], start[1], start[2], opts.T,
                     opts.dt, double(opts.N), double(opts.seed), double(opts.bisect_levels),
                     double(opts.checkpoints.size())}});
    cols.push_back({"checkpoint_times", opts.checkpoints});
    cols.push_back({"tau", tau});
    std::vector<double> buf;
    auto flat = [&](const std::vector<Pt>& v) {
        buf.clear();
        buf.reserve(v.size() * 3);
        for (const Pt& p : v) {
            buf.push_back(p[0]);
            buf.push_back(p[1]);
            buf.push_back(p[2]);
        }
        return buf;
    };
    cols.push_back({"pre_jump", flat(pre_jump)});
    cols.push_back({"post_jump", flat(post_jump)});
    cols.push_back({"checkpoint_pos", flat(checkpoint_pos)});
    write_columns(path, cols);
}

}  // namespace fc
