#include "fraccaloric/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>

#include "fraccaloric/errors.hpp"

namespace fc {

namespace {

// Kronrod 15 nodes/weights (positive half) and embedded Gauss 7 weights.
const double kXgk[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                        0.741531185599394, 0.586087235467691, 0.405845151377397,
                        0.207784955007898, 0.000000000000000};
const double kWgk[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                        0.140653259715525, 0.169004726639267, 0.190350578064785,
                        0.204432940075298, 0.209482141084728};
const double kWg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                       0.417959183673469};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fc = f(c);
    double resk = kWgk[7] * fc;
    double resg = kWg[3] * fc;
    double fv[7][2];
    for (int j = 0; j < 7; ++j) {
        fv[j][0] = f(c - h * kXgk[j]);
        fv[j][1] = f(c + h * kXgk[j]);
        resk += kWgk[j] * (fv[j][0] + fv[j][1]);
    }
    for (int j = 0; j < 3; ++j) resg += kWg[j] * (fv[2 * j + 1][0] + fv[2 * j + 1][1]);
    double value = resk * h;
    double err = std::abs((resk - resg) * h);
    // standard QUADPACK-style sharpening of the raw difference
    double resabs = 0.0;
    for (int j = 0; j < 7; ++j) resabs += kWgk[j] * (std::abs(fv[j][0]) + std::abs(fv[j][1]));
    resabs = (resabs + kWgk[7] * std::abs(fc)) * std::abs(h);
    if (resabs > 0.0 && err > 0.0)
        err = resabs * std::min(1.0, std::pow(200.0 * err / resabs, 1.5));
    return {a, b, value, err};
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abstol, double reltol, int max_intervals) {
    if (a == b) return {0.0, 0.0};
    std::priority_queue<Panel> heap;
    Panel p0 = gk15(f, a, b);
    double total = p0.value, toterr = p0.error;
    heap.push(p0);
    int used = 1;
    while (used < max_intervals) {
        double tol = std::max(abstol, reltol * std::abs(total));
        if (toterr <= tol) break;
        Panel worst = heap.top();
        heap.pop();
        double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {  // cannot split further
            heap.push(worst);
            break;
        }
        Panel l = gk15(f, worst.a, mid);
        Panel r = gk15(f, mid, worst.b);
        total += l.value + r.value - worst.value;
        toterr += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
        ++used;
    }
    return {total, toterr};
}

double integrate_checked(const std::function<double(double)>& f, double a, double b,
                         double abstol, double reltol, int max_intervals) {
    QuadResult r = integrate(f, a, b, abstol, reltol, max_intervals);
    if (r.error > std::max(abstol, reltol * std::abs(r.value)) * 1.001)
        throw QuadratureFailure("adaptive quadrature did not converge", r.error);
    return r.value;
}

const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GaussRule g;
    g.x.resize(n);
    g.w.resize(n);
    // Newton on Legendre P_n, standard symmetric construction.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        g.x[i] = -x;
        g.x[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        g.w[i] = w;
        g.w[n - 1 - i] = w;
    }
    auto [pos, _] = cache.emplace(n, std::move(g));
    return pos->second;
}

double gauss_apply(const GaussRule& g, const std::function<double(double)>& f, double a, double b) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(c + h * g.x[i]);
    return s * h;
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    size_t n = x_.size();
    m_.assign(n, 0.0);
    if (n < 3) return;
    std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), r(n, 0.0);
    b[0] = b[n - 1] = 1.0;
    for (size_t i = 1; i + 1 < n; ++i) {
        double hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
        a[i] = hl / 6.0;
        b[i] = (hl + hr) / 3.0;
        c[i] = hr / 6.0;
        r[i] = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
    }
    for (size_t i = 1; i < n; ++i) {
        double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        r[i] -= m * r[i - 1];
    }
    m_[n - 1] = r[n - 1] / b[n - 1];
    for (size_t i = n - 1; i-- > 0;) m_[i] = (r[i] - c[i] * m_[i + 1]) / b[i];
}

double CubicSpline::operator()(double x) const {
    size_t n = x_.size();
    if (n == 0) return 0.0;
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    size_t hi = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin();
    size_t lo = hi - 1;
    double h = x_[hi] - x_[lo];
    double A = (x_[hi] - x) / h, B = (x - x_[lo]) / h;
    return A * y_[lo] + B * y_[hi] +
           ((A * A * A - A) * m_[lo] + (B * B * B - B) * m_[hi]) * h * h / 6.0;
}

}  // namespace fc
