#pragma once

#include <map>
#include <string>
#include <vector>

#include "fraccaloric/geometry.hpp"
#include "fraccaloric/path_mc.hpp"
#include "fraccaloric/special.hpp"
#include "fraccaloric/spectral.hpp"

namespace fc {

// Geometric approach sequence y_k = Q + delta0 2^{-k} inward, k = 0..depth-1.
struct BoundaryApproach {
    BoundaryPoint Q;
    double delta0 = 0.25;
    int depth = 8;
    std::vector<Pt> points() const;
};

struct RatioTrace {
    std::vector<double> delta;   // boundary distances of the approach points
    std::vector<double> value;   // ratio at each approach point
    double limit = 0.0;          // Aitken-extrapolated boundary limit
    double limit_error = 0.0;
    bool converged = false;
};

enum class RatioKind { elliptic_M, eta, eta_x0, eta_tilde, survival_over_green };

// The defining ratio of each boundary kernel evaluated along the approach,
// with extrapolated limit.  t is the heat-kernel time (for survival_over_green
// it is the survival horizon, normally 1); x the evaluation point; x0/t0 the
// reference point and time of the normalizations.
RatioTrace boundary_ratio_limit(RatioKind kind, const EigenSystem& eig,
                                const BoundaryApproach& approach, double t, const Pt& x,
                                const Pt& x0, double t0 = 1.0);

// Per-mode boundary coefficients psi_n(Q) = lim phi_n(y)/P^y(tau>1), so that
// eta_{t,Q}(x) = sum_n e^{-lambda_n t} psi_n(Q) phi_n(x).
struct EtaModes {
    std::vector<double> psi;
    bool converged = false;
};
EtaModes eta_boundary_modes(const EigenSystem& eig, const BoundaryApproach& approach);

double eta_eval(const EigenSystem& eig, const EtaModes& modes, double t, int node);
Eigen::VectorXd eta_field(const EigenSystem& eig, const EtaModes& modes, double t);

// C1 = int int M_D^{x0}(y,Q) p_{t0}^D(y,z) kappa_D(z) dz dy via the Martin
// field; kappa is the discrete killing (A*1).
double yaglom_constant_c1(const EigenSystem& eig, const Eigen::VectorXd& kappa,
                          const BoundaryApproach& approach, const Pt& x0, double t0 = 1.0);

// Pointwise relative errors of P^x(tau>1) = (G_D P_1^D kappa_D)(x).
struct L38Result {
    Eigen::VectorXd lhs;      // survival at t = 1
    Eigen::VectorXd rhs;      // G_D P_1^D kappa
    double max_rel_error = 0.0;
};
L38Result l38_identity_check(const EigenSystem& eig, const Eigen::VectorXd& kappa);

// Relative error of eta_{t+s,Q}(x) = int eta_{t,Q}(z) p_s^D(z,x) dz with both
// sides from direct trace extrapolation (left) and trace-field quadrature
// (right).
double entrance_law_check(const EigenSystem& eig, const BoundaryApproach& approach, double t,
                          double s, const Pt& x);

struct YaglomPoint {
    double t = 0.0;
    double tv_distance = 0.0;
    double tv_stderr = 0.0;
    std::int64_t survivors = 0;
};
struct YaglomResult {
    std::vector<YaglomPoint> points;
    double m0_mass = 0.0;  // integral of the eta_{1,0} density before normalization
};

// Theorem-Main2 experiment: conditioned rescaled endpoint law against
// m_0 = eta_{1,0} on a fixed partition; domain must have 0 on its boundary
// and be star-shaped about it.
YaglomResult yaglom_experiment(const StableModel& m, const Domain& dom, const Pt& x,
                               const std::vector<double>& times, std::int64_t N,
                               std::uint64_t seed, const EigenSystem& eig, int partition = 32,
                               double dt = 1e-3);

enum class DiagnosticKind {
    factorization,
    holder_eta,
    holder_green_lp,
    survival_scaling,
    gdest_band,
    cks_band,
    lip_small_exponents
};

struct DiagnosticReport {
    std::string kind;
    double band_lo = 0.0, band_hi = 0.0;  // empirical comparability band
    double exponent = 0.0;                // fitted Holder/scaling exponent
    double exponent2 = 0.0;               // second exponent where applicable
    double r2 = 0.0;
    bool pass = false;
    std::map<std::string, double> extra;
    std::vector<std::pair<double, double>> trace;  // (abscissa, value) pairs for CSV
};

struct DiagnosticConfig {
    double t = 0.5;            // heat-kernel time for eta-based diagnostics
    double T1 = 0.1, T2 = 1.0; // time window
    double p = 1.0;            // L^p exponent for holder_green_lp
    int pairs = 6;             // dyadic separations in Holder fits
    double delta = 0.05;       // boundary offset of the probe line
};

DiagnosticReport ratio_diagnostic(DiagnosticKind kind, const StableModel& m, const Domain& dom,
                                  const EigenSystem& eig, const DiagnosticConfig& cfg);

}  // namespace fc
