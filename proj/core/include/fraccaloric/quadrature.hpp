#pragma once

#include <functional>
#include <vector>

namespace fc {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;  // estimated absolute error
};

// Globally adaptive Gauss-Kronrod (7,15) on [a,b].  Stops when the estimated
// error is below max(abstol, reltol*|value|) or the interval budget runs out;
// the achieved estimate is always reported.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abstol = 1e-12, double reltol = 1e-10, int max_intervals = 4000);

// Same, but throws QuadratureFailure if the tolerance was not met.
double integrate_checked(const std::function<double(double)>& f, double a, double b,
                         double abstol, double reltol, int max_intervals = 4000);

// Gauss-Legendre nodes/weights on [-1,1], cached per order.
struct GaussRule {
    std::vector<double> x, w;
};
const GaussRule& gauss_legendre(int n);

// Map a rule to [a,b] and accumulate f.
double gauss_apply(const GaussRule& g, const std::function<double(double)>& f, double a, double b);

// Natural cubic spline through (x_i, y_i), x strictly increasing.
class CubicSpline {
  public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y);
    double operator()(double x) const;
    double min_x() const { return x_.front(); }
    double max_x() const { return x_.back(); }

  private:
    std::vector<double> x_, y_, m_;  // m = second derivatives
};

}  // namespace fc
