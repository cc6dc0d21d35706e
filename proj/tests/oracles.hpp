#pragma once

// Test-only closed forms and independent reference computations.  Everything
// here is derived from textbook identities, separate from the library code
// paths it is used to check.

#include <cmath>
#include <functional>

namespace oracle {

// 2-D isotropic Cauchy (alpha = 1) density with the e^{-t|xi|} convention.
inline double cauchy2d(double t, double r) {
    return t / (2.0 * M_PI) * std::pow(t * t + r * r, -1.5);
}

// d-dimensional alpha = 1 density: Gamma((d+1)/2) / pi^{(d+1)/2} * t (t^2+r^2)^{-(d+1)/2}.
inline double cauchy_nd(int d, double t, double r) {
    return std::tgamma(0.5 * (d + 1)) * std::pow(M_PI, -0.5 * (d + 1)) * t *
           std::pow(t * t + r * r, -0.5 * (d + 1));
}

// CDF of |X_1| for the 2-D standard Cauchy: 1 - (1+r^2)^{-1/2}.
inline double cauchy2d_radial_cdf(double r) { return 1.0 - std::pow(1.0 + r * r, -0.5); }

// Expected exit time of the ball B(0,R) for the isotropic alpha-stable
// process: E^x tau = Gamma(d/2) / (2^alpha Gamma(1+alpha/2) Gamma((d+alpha)/2))
// * (R^2-|x|^2)^{alpha/2}.
inline double ball_expected_exit(int d, double alpha, double R, double absx) {
    return std::tgamma(0.5 * d) /
           (std::pow(2.0, alpha) * std::tgamma(1.0 + 0.5 * alpha) *
            std::tgamma(0.5 * (d + alpha))) *
           std::pow(R * R - absx * absx, 0.5 * alpha);
}

// Composite Simpson integration, independent of the library quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
    if (n % 2) ++n;
    double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace oracle
