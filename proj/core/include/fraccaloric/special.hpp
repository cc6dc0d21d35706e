#pragma once

#include <cstddef>
#include <vector>

namespace fc {

// Regularized upper incomplete gamma Q(a,x) = Gamma(a,x)/Gamma(a).
double gamma_q(double a, double x);

// Survival function of the chi-square distribution with k dof.
double chi2_sf(double x, int dof);

// Asymptotic Kolmogorov-Smirnov p-value for statistic d with sample size n
// (two-sided, one-sample); for two samples pass the effective n.
double ks_pvalue(double d, double n_effective);

struct LinFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double slope_stderr = 0.0;
};
LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Aitken delta-squared extrapolation of the tail of a sequence; returns the
// extrapolated limit, an error estimate from the last increment, and whether
// the increments were decreasing in magnitude (convergence flag).
struct Extrapolation {
    double limit = 0.0;
    double error = 0.0;
    bool converged = false;
};
Extrapolation aitken_limit(const std::vector<double>& seq);

// Contraction ratio of the last three terms; NaN when undefined.
double estimate_rho(const std::vector<double>& seq);

// Geometric extrapolation from the last two terms with a shared contraction
// ratio; falls back to `last` when rho is out of (0.01, 0.95).
double shared_rho_limit(double prev, double last, double rho);

}  // namespace fc
