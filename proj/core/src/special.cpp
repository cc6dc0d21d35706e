#include "fraccaloric/special.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

namespace fc {

namespace {

double gamma_p_series(double a, double x) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
    double b = x + 1.0 - a, c = 1e308, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) return 1.0;
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi2_sf(double x, int dof) { return gamma_q(0.5 * dof, 0.5 * x); }

double ks_pvalue(double d, double n_effective) {
    double lambda = (std::sqrt(n_effective) + 0.12 + 0.11 / std::sqrt(n_effective)) * d;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-12) break;
    }
    if (sum < 0.0) sum = 0.0;
    if (sum > 1.0) sum = 1.0;
    return sum;
}

LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    LinFit fit;
    size_t n = x.size();
    if (n < 2 || y.size() != n) return fit;
    double sx = 0, sy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) return fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssres = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double e = y[i] - (fit.intercept + fit.slope * x[i]);
        ssres += e * e;
    }
    fit.r2 = (syy > 0.0) ? 1.0 - ssres / syy : 1.0;
    if (n > 2) fit.slope_stderr = std::sqrt(ssres / ((n - 2) * sxx));
    return fit;
}

Extrapolation aitken_limit(const std::vector<double>& seq) {
    Extrapolation ex;
    size_t n = seq.size();
    if (n == 0) return ex;
    ex.limit = seq.back();
    if (n < 3) {
        ex.error = (n >= 2) ? std::abs(seq[n - 1] - seq[n - 2]) : 0.0;
        return ex;
    }
    double d1 = seq[n - 2] - seq[n - 3];
    double d2 = seq[n - 1] - seq[n - 2];
    double denom = d2 - d1;
    if (std::abs(denom) > 1e-14 * (std::abs(d1) + std::abs(d2))) {
        ex.limit = seq[n - 1] - d2 * d2 / denom;
        ex.error = std::abs(ex.limit - seq[n - 1]);
    } else {
        ex.limit = seq[n - 1];
        ex.error = std::abs(d2);
    }
    // convergence check over the recorded tail
    ex.converged = true;
    for (size_t i = n - 1; i >= 2 && i + 3 >= n; --i) {
        double a = std::abs(seq[i] - seq[i - 1]);
        double b = std::abs(seq[i - 1] - seq[i - 2]);
        if (a > b * 1.0000001 && a > 1e-14 * std::abs(seq[i])) ex.converged = false;
        if (i == 2) break;
    }
    return ex;
}

double estimate_rho(const std::vector<double>& seq) {
    size_t n = seq.size();
    if (n < 3) return std::numeric_limits<double>::quiet_NaN();
    double d1 = seq[n - 2] - seq[n - 3];
    double d2 = seq[n - 1] - seq[n - 2];
    if (std::abs(d1) < 1e-300) return std::numeric_limits<double>::quiet_NaN();
    return d2 / d1;
}

double shared_rho_limit(double prev, double last, double rho) {
    if (!(rho > 0.01 && rho < 0.95)) return last;
    return last + (last - prev) * rho / (1.0 - rho);
}

}  // namespace fc
