#pragma once

#include <functional>
#include <vector>

#include "fraccaloric/boundary.hpp"
#include "fraccaloric/spectral.hpp"

namespace fc {

// Node subset of a parent operator with its principal-submatrix eigensystem;
// killing on exiting the subset.  Discrete Duhamel/mean-value identities
// against the parent are exact by construction.
struct SubSystem {
    std::vector<int> nodes;      // parent node indices
    std::vector<int> local_of;   // parent index -> local index or -1
    GridOperator op;             // principal submatrix
    EigenSystem eig;             // local indexing
    Eigen::VectorXd kappa;       // discrete killing of the subset (row sums)
};

SubSystem make_subsystem(const GridOperator& parent,
                         const std::function<bool(const Pt&)>& inside);

// Space-time cylinder (t_lo, t_hi) x U.
struct SpaceTimeCylinder {
    double t_lo = 0.0;
    double t_hi = 1.0;
    const SubSystem* U = nullptr;
};

// Space-time data/candidate: value at (time, point); implementations must
// return 0 outside the ambient domain (zero extension).
using SpaceTimeFn = std::function<double(double, const Pt&)>;

// J^U(t, x, s, z): lateral exit density.  For z among the parent nodes of
// D \ U the discrete coupling is used; for z exterior to D, the continuum
// jump kernel.
double lateral_poisson_kernel(const GridOperator& parent, const SubSystem& sub, double t,
                              const Pt& x, double s, const Pt& z);

// int_{t_lo}^{t} int_{U^c} J^U u dz ds + int_U p^U_{t - t_lo}(x,y) u(t_lo,y) dy.
// exterior_const adds a constant lateral datum on D^c (beyond what `lateral`
// yields on D \ U); data on D^c other than a constant are not supported.
struct PoissonData {
    SpaceTimeFn lateral;   // values on D \ U (and ignored on D^c)
    SpaceTimeFn initial;   // values on U at t_lo
    double exterior_const = 0.0;
};
double poisson_integral(const GridOperator& parent, const SubSystem& sub, double t_lo, double t,
                        const Pt& x, const PoissonData& data);

// Exit-law completeness of the cylinder: lateral mass + terminal mass,
// computed through the same quadrature as poisson_integral (should be 1).
double cylinder_exit_mass(const GridOperator& parent, const SubSystem& sub, double span,
                          const Pt& x);

// max over probes (t, x) of |u(t,x) - PoissonIntegral_G[u](t,x)| on the
// cylinder G = (t_lo, t_hi) x U, with u itself supplying the data.
double mean_value_residual(const SpaceTimeFn& u, const GridOperator& parent,
                           const SpaceTimeCylinder& G,
                           const std::vector<std::pair<double, Pt>>& probes);

struct BoundaryMeasureAtom {
    BoundaryPoint Q;
    double time = 0.0;
    double weight = 1.0;
};
struct BoundaryMeasure {
    std::vector<BoundaryMeasureAtom> atoms;
    double total_mass() const;
};

// h(t,x) = sum_atoms w * eta_{t - s, Q}(x), with eta = 0 for t <= s.
struct SingularCaloric {
    const EigenSystem* eig = nullptr;
    std::vector<BoundaryMeasureAtom> atoms;
    std::vector<EtaModes> modes;
    double eval(double t, int node) const;
    SpaceTimeFn as_fn() const;
};
SingularCaloric make_singular_caloric(const EigenSystem& eig, const BoundaryMeasure& mu,
                                      double approach_delta0, int approach_depth = 10);

struct MeasureRecoveryLevel {
    double delta = 0.0;      // interior shrink threshold of D_n
    int nodes = 0;
    double mass = 0.0;
    double mass_bound = 0.0;            // u(t + theta, x0) reference
    double barycenter_space_dist = 0.0; // distance of the spatial barycenter to Q
    double barycenter_time = 0.0;
    double frac_near = 0.0;             // mass fraction in B(Q,eps) x [0,eps)
};

// mu_n(dy ds) = P^y(tau_{D_n} > 1) int_{D \ D_n} u(s,z) nu(y,z) dz dy ds on
// successive interior shrinkages, with concentration statistics toward (Q,0).
std::vector<MeasureRecoveryLevel> recover_boundary_measure(
    const SpaceTimeFn& u, const GridOperator& parent, const std::vector<double>& shrink_deltas,
    const Pt& Q, double T, double eps, const Pt& x0, double theta);

// Fine-grid variant on Crank-Nicolson marches (no eigendecompositions); the
// candidate is the anchored boundary-kernel column p_s(., w)/P^w(tau>1) with
// w the interior node nearest Q.
std::vector<MeasureRecoveryLevel> recover_boundary_measure_cn(
    const GridOperator& parent, const Pt& Q, const std::vector<double>& shrink_deltas, double T,
    double eps, const Pt& x0, double theta, double dt = 1e-3);

// Mass fraction of u(eps, .) within `radius` of x_f, for each eps
// (initial-measure recovery mechanism).
std::vector<std::pair<double, double>> initial_concentration(const SpaceTimeFn& u,
                                                             const EigenSystem& eig,
                                                             const Pt& x_f,
                                                             const std::vector<double>& epsilons,
                                                             double radius);

}  // namespace fc
