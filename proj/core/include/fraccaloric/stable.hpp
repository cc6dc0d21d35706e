#pragma once

#include <vector>

#include "fraccaloric/geometry.hpp"
#include "fraccaloric/point.hpp"
#include "fraccaloric/quadrature.hpp"
#include "fraccaloric/rng.hpp"

namespace fc {

// Jump constant c_{d,alpha} = 2^alpha Gamma((d+alpha)/2) / (pi^{d/2} |Gamma(-alpha/2)|).
double jump_constant(int d, double alpha);

// Blumenthal-Getoor-Ray constant of the ball Poisson kernel:
// Gamma(d/2) pi^{-(d/2+1)} sin(pi alpha / 2).
double bgr_constant(int d, double alpha);

// Surface measure of S^{d-1}.
double sphere_surface(int d);

// Isotropic alpha-stable model with the convention E e^{i<xi,X_t>} = e^{-t|xi|^alpha}.
class StableModel {
  public:
    StableModel(int d, double alpha);

    int dim() const { return d_; }
    double alpha() const { return alpha_; }
    double jump_const() const { return cda_; }

    // Levy jump density nu(y) = c_{d,alpha} |y|^{-d-alpha}, radial form.
    double nu(double r) const;

    // Free-space transition density p_t(x), evaluated by radial Fourier
    // inversion; switches to the first-jump tail t*c*|x|^{-d-alpha} for
    // |x| > 10 t^{1/alpha}.
    double density(double t, double r) const;
    double density(double t, const Pt& x) const { return density(t, norm(x)); }

    // One-sided alpha/2-stable subordinator value with E e^{-u S} = e^{-t u^{alpha/2}}.
    double sample_subordinator(double t, Rng& rng) const;

    // Exact draw of X_t (started at 0) by Gaussian subordination.
    Pt sample_increment(double t, Rng& rng) const;

  private:
    int d_;
    double alpha_;
    double cda_;
};

// Explicit Poisson kernel of B(0,r): P(x,v) for |x| < r < |v|.
double ball_poisson_kernel(const StableModel& m, double r, const Pt& x, const Pt& v);

// Normalization check: integral over B(0,r)^c of the kernel from x, by
// radial quadrature of the closed-form angular marginal (should be 1).
double ball_poisson_mass(const StableModel& m, double r, const Pt& x);

// Exact sampler of the exit position X_{tau_B(0,r)} started at x:
// tabulated inverse CDF for |v| and a rejection step for the direction.
class BallExitSampler {
  public:
    BallExitSampler(const StableModel& m, double r, const Pt& x);
    Pt sample(Rng& rng) const;

    // radial density of |v| (integrated over directions); used by tests
    double radial_pdf(double s) const;

  private:
    const StableModel m_;
    double r_, rho_;
    Pt x_, axis_;
    std::vector<double> cdf_u_, cdf_s_;  // tabulated CDF in the cosh parameter
    std::vector<double> pdf_vals_;       // normalized density at the table nodes
    double pdf_scale_ = 1.0;
};

// kappa_D(z) = int_{D^c} nu(z-y) dy by exact per-ray integration of r^{-1-alpha}
// over the complement segments and adaptive angular quadrature.
double killing_intensity(const StableModel& m, const Domain& dom, const Pt& z,
                         double reltol = 1e-7);

}  // namespace fc
