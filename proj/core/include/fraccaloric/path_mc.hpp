#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fraccaloric/geometry.hpp"
#include "fraccaloric/grid.hpp"
#include "fraccaloric/point.hpp"
#include "fraccaloric/spectral.hpp"
#include "fraccaloric/stable.hpp"

namespace fc {

struct EnsembleOptions {
    double T = 1.0;
    double dt = 1e-3;
    std::int64_t N = 10000;
    std::uint64_t seed = 1;
    int bisect_levels = 4;                  // killing-step refinement depth
    std::vector<double> checkpoints;        // multiples of dt, ascending
    std::optional<Grid> occupation_grid;    // accumulate time-integrated occupation
};

// One killed path: exit time, last in-domain and first out-of-domain
// positions, and positions at the requested checkpoint times while alive.
struct PathEnsemble {
    StableModel model;
    Domain domain;
    Pt start{0, 0, 0};
    EnsembleOptions opts;

    std::vector<double> tau;
    std::vector<Pt> pre_jump;
    std::vector<Pt> post_jump;
    std::vector<Pt> checkpoint_pos;  // N * checkpoints.size(), row-major

    // occupation accumulators on opts.occupation_grid, in units of
    // dt / 2^{bisect_levels+1}; per-cell sums and per-path sums of squares
    std::vector<std::int64_t> occ_units;
    std::vector<double> occ_sumsq;  // sum over paths of (per-path units)^2

    std::int64_t count() const { return static_cast<std::int64_t>(tau.size()); }
    double occupation_unit() const {
        return opts.dt / static_cast<double>(std::int64_t(2) << opts.bisect_levels);
    }

    const Pt* checkpoint(std::int64_t path, int cp_index) const {
        return &checkpoint_pos[static_cast<size_t>(path) * opts.checkpoints.size() + cp_index];
    }
    int checkpoint_index(double t) const;

    void save(const std::string& path) const;
};

// Euler scheme with exact stable increments; a step that lands outside is
// re-simulated at dyadic sub-steps and tau is the midpoint of the killing
// sub-interval.
PathEnsemble run_killed_ensemble(const StableModel& m, const Domain& dom, const Pt& x,
                                 const EnsembleOptions& opts);

struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
};

Estimate survival_probability(const PathEnsemble& ens, double t);

// Trapezoid over the survival curve plus an exponential tail; lambda1 > 0
// switches the tail to the spectral rate.
Estimate expected_exit_time(const PathEnsemble& ens, double lambda1 = 0.0);

struct McFields {
    ScalarField heat_kernel;      // p_t^D(x, .) on the grid cells
    ScalarField green;            // G_D(x, .)
    ScalarField harmonic_measure; // exit-position density on an exterior window
    ScalarField m_x;              // conditioned law at t = 1
};

// Histogram estimators; t must be one of the ensemble checkpoints.  The
// harmonic-measure window is [bbox grown by margin] \ D on the same lattice.
McFields mc_fields(const PathEnsemble& ens, double t, const Grid& grid, double margin = 0.5);

struct IkedaWatanabeCheck {
    double mc_prob = 0.0;
    double mc_stderr = 0.0;
    double formula_prob = 0.0;
    double formula_err = 0.0;
    double z_score = 0.0;
    std::int64_t events = 0;
};

// The triple integral int_I int_B int_A nu(y,z) p_u^D(x,y) dy dz du by
// quadrature against the spectral heat kernel.  A and B are boxes (lo,hi).
double ikeda_watanabe_formula(const StableModel& m, const EigenSystem& eig, const Pt& start,
                              double t0, double t1, const Pt& a_lo, const Pt& a_hi,
                              const Pt& b_lo, const Pt& b_hi);

// P^x[tau in I, X_{tau-} in A, X_tau in B] versus the triple integral.
IkedaWatanabeCheck ikeda_watanabe_check(const PathEnsemble& ens, double t0, double t1,
                                        const Pt& a_lo, const Pt& a_hi, const Pt& b_lo,
                                        const Pt& b_hi, const EigenSystem& eig,
                                        const EigenSystem& eig_coarse);

}  // namespace fc
