#include "fraccaloric/stable.hpp"

#include <algorithm>
#include <cmath>

#include "fraccaloric/errors.hpp"

namespace fc {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double jump_constant(int d, double alpha) {
    if (alpha <= 0.0 || alpha >= 2.0) throw DomainError("alpha must lie in (0,2)");
    if (d < 1) throw DomainError("d must be >= 1");
    // |Gamma(-alpha/2)| = 2 Gamma(1-alpha/2) / alpha
    double num = std::pow(2.0, alpha) * std::tgamma(0.5 * (d + alpha));
    double den = std::pow(M_PI, 0.5 * d) * (2.0 / alpha) * std::tgamma(1.0 - 0.5 * alpha);
    return num / den;
}

double bgr_constant(int d, double alpha) {
    return std::tgamma(0.5 * d) * std::pow(M_PI, -(0.5 * d + 1.0)) * std::sin(M_PI * alpha / 2);
}

double sphere_surface(int d) {
    return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
}

StableModel::StableModel(int d, double alpha) : d_(d), alpha_(alpha) {
    cda_ = jump_constant(d, alpha);  // validates inputs
}

double StableModel::nu(double r) const { return cda_ * std::pow(r, -d_ - alpha_); }

namespace {

// Approximate k-th positive zero of J0 (McMahon); used only as panel cuts.
double j0_zero(int k) {
    double b = (k - 0.25) * M_PI;
    return b + 1.0 / (8 * b) - 124.0 / (3 * std::pow(8 * b, 3));
}

}  // namespace

double StableModel::density(double t, double r) const {
    if (t <= 0.0) throw DomainError("density needs t > 0");
    r = std::abs(r);
    double tinv = std::pow(t, 1.0 / alpha_);
    if (r > 10.0 * tinv) return t * cda_ * std::pow(r, -d_ - alpha_);

    if (r == 0.0) {
        // (2pi)^{-d} s_d Gamma(d/alpha) / (alpha t^{d/alpha})
        return std::pow(kTwoPi, -d_) * sphere_surface(d_) * std::tgamma(d_ / alpha_) /
               (alpha_ * std::pow(t, d_ / alpha_));
    }

    auto integrand = [&](double rho) {
        double e = std::exp(-t * std::pow(rho, alpha_));
        switch (d_) {
            case 1:
                return std::cos(r * rho) * e / M_PI;
            case 2:
                return std::cyl_bessel_j(0.0, r * rho) * e * rho / kTwoPi;
            default:
                return std::sin(r * rho) * e * rho / (2.0 * M_PI * M_PI * r);
        }
    };
    double rho_max = std::pow(42.0 / t, 1.0 / alpha_);
    if (r * rho_max < 30.0) {
        QuadResult q = integrate(integrand, 0.0, rho_max, 1e-14, 1e-11, 20000);
        if (q.error > 1e-8 * std::abs(q.value) + 1e-14)
            throw QuadratureFailure("stable density quadrature", q.error);
        return q.value;
    }
    // panel-per-oscillation summation with Gauss-Kronrod panels
    const GaussRule& g = gauss_legendre(15);
    double acc = 0.0, comp = 0.0;  // Kahan
    double prev = 0.0;
    int small_run = 0;
    auto zero_at = [&](int k) {
        switch (d_) {
            case 1:
                return (k - 0.5) * M_PI / r;
            case 2:
                return j0_zero(k) / r;
            default:
                return k * M_PI / r;
        }
    };
    for (int k = 1; k < 4000000; ++k) {
        double z = zero_at(k);
        if (prev >= rho_max) break;
        double hi = std::min(z, rho_max);
        double val = gauss_apply(g, integrand, prev, hi);
        double y = val - comp;
        double tnew = acc + y;
        comp = (tnew - acc) - y;
        acc = tnew;
        prev = hi;
        if (std::abs(val) < 1e-17 * std::abs(acc)) {
            if (++small_run > 3) break;
        } else {
            small_run = 0;
        }
    }
    return acc;
}

double StableModel::sample_subordinator(double t, Rng& rng) const {
    // Kanter's representation of the one-sided rho-stable law, rho = alpha/2.
    double rho = 0.5 * alpha_;
    double theta = M_PI * rng.uniform();
    double w = rng.exponential();
    double logs1 = std::log(std::sin(rho * theta)) +
                   (1.0 - rho) / rho * std::log(std::sin((1.0 - rho) * theta)) -
                   std::log(std::sin(theta)) / rho - (1.0 - rho) / rho * std::log(w);
    return std::pow(t, 1.0 / rho) * std::exp(logs1);
}

Pt StableModel::sample_increment(double t, Rng& rng) const {
    double s = sample_subordinator(t, rng);
    double sigma = std::sqrt(2.0 * s);
    Pt z = rng.normal_vec(d_);
    return sigma * z;
}

double ball_poisson_kernel(const StableModel& m, double r, const Pt& x, const Pt& v) {
    double rho = norm(x), s = norm(v);
    if (!(rho < r) || !(s > r)) throw DomainError("ball_poisson_kernel needs |x| < r < |v|");
    double c = bgr_constant(m.dim(), m.alpha());
    return c * std::pow((r * r - rho * rho) / (s * s - r * r), 0.5 * m.alpha()) *
           std::pow(dist(x, v), -m.dim());
}

namespace {

// int over S^{d-1} of |s w - x|^{-d} dsigma(w), |x| = rho < s; closed forms.
double angular_marginal(int d, double s, double rho) {
    double q = s * s - rho * rho;
    switch (d) {
        case 1:
            return 2.0 * s / q;
        case 2:
            return kTwoPi / q;
        default:
            return 2.0 * kTwoPi / (s * q);
    }
}

}  // namespace

double ball_poisson_mass(const StableModel& m, double r, const Pt& x) {
    double rho = norm(x);
    if (!(rho < r)) throw DomainError("x must be inside the ball");
    int d = m.dim();
    double a = m.alpha();
    double c = bgr_constant(d, a) * std::pow(r * r - rho * rho, 0.5 * a);
    // s = r cosh(u); s^2 - r^2 = (r sinh u)^2 avoids cancellation at the rim
    auto f = [&](double u) {
        double sh = r * std::sinh(u);
        double s = r * std::cosh(u);
        return c * std::pow(sh, -a) * std::pow(s, d - 1) * angular_marginal(d, s, rho) * sh;
    };
    double umax = std::log(2.0 * std::pow(1e16, 1.0 / a)) + 1.0;
    QuadResult q = integrate(f, 0.0, umax, 1e-13, 1e-11, 20000);
    return q.value;
}

BallExitSampler::BallExitSampler(const StableModel& m, double r, const Pt& x)
    : m_(m), r_(r), rho_(norm(x)), x_(x) {
    if (!(rho_ < r_)) throw DomainError("start point must be inside the ball");
    axis_ = rho_ > 1e-14 ? normalized(x_) : pt(1, 0, 0);
    int d = m_.dim();
    double a = m_.alpha();
    // unnormalized radial mass element in u, s = r cosh u
    auto f = [&](double u) {
        double sh = r_ * std::sinh(u);
        double s = r_ * std::cosh(u);
        return std::pow(sh, -a) * std::pow(s, d - 1) * angular_marginal(d, s, rho_) * sh;
    };
    const double umin = 1e-12;
    const double umax = std::log(2.0 * std::pow(1e16, 1.0 / a)) + 1.0;
    const int n = 4096;
    cdf_u_.resize(n + 1);
    cdf_s_.resize(n + 1);
    std::vector<double> pdf(n + 1);
    for (int i = 0; i <= n; ++i) {
        cdf_u_[i] = umin * std::pow(umax / umin, double(i) / n);
        pdf[i] = f(cdf_u_[i]);
    }
    // head mass below umin from the u^{1-alpha} asymptote of f
    double head = f(umin) * umin / (2.0 - a);
    std::vector<double> cum(n + 1);
    cum[0] = head;
    const GaussRule& g = gauss_legendre(8);
    for (int i = 1; i <= n; ++i)
        cum[i] = cum[i - 1] + gauss_apply(g, f, cdf_u_[i - 1], cdf_u_[i]);
    double total = cum[n];
    for (int i = 0; i <= n; ++i) {
        cum[i] /= total;
        cdf_s_[i] = cum[i];
        pdf[i] /= total;
    }
    pdf_scale_ = total;
    pdf_vals_ = std::move(pdf);
}

double BallExitSampler::radial_pdf(double s) const {
    if (s <= r_) return 0.0;
    int d = m_.dim();
    double a = m_.alpha();
    return std::pow((s - r_) * (s + r_), -0.5 * a) * std::pow(s, d - 1) *
           angular_marginal(d, s, rho_) / pdf_scale_;
}

Pt BallExitSampler::sample(Rng& rng) const {
    // invert the tabulated radial CDF with a Hermite-cubic Newton refinement
    double uq = rng.uniform();
    size_t hi = std::upper_bound(cdf_s_.begin(), cdf_s_.end(), uq) - cdf_s_.begin();
    double u;
    if (hi == 0) {
        // head: F ~ c u^{2-alpha}
        u = cdf_u_.front() * std::pow(uq / cdf_s_.front(), 1.0 / (2.0 - m_.alpha()));
    } else if (hi >= cdf_s_.size()) {
        u = cdf_u_.back();
    } else {
        size_t lo = hi - 1;
        double u0 = cdf_u_[lo], u1 = cdf_u_[hi];
        double f0 = cdf_s_[lo], f1 = cdf_s_[hi];
        double d0 = pdf_vals_[lo], d1 = pdf_vals_[hi];
        double h = u1 - u0;
        u = u0 + (uq - f0) / std::max(f1 - f0, 1e-300) * h;
        for (int it = 0; it < 30; ++it) {  // Newton on the Hermite interpolant of F
            double tt = (u - u0) / h;
            double h00 = (1 + 2 * tt) * (1 - tt) * (1 - tt);
            double h10 = tt * (1 - tt) * (1 - tt);
            double h01 = tt * tt * (3 - 2 * tt);
            double h11 = tt * tt * (tt - 1);
            double F = h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1;
            double dh00 = 6 * tt * tt - 6 * tt;
            double dh10 = 3 * tt * tt - 4 * tt + 1;
            double dh01 = -dh00;
            double dh11 = 3 * tt * tt - 2 * tt;
            double dF = (dh00 * f0 + dh01 * f1) / h + dh10 * d0 + dh11 * d1;
            double step = (F - uq) / std::max(dF, 1e-300);
            u -= step;
            u = std::clamp(u, u0, u1);
            if (std::abs(step) < 1e-14 * (1.0 + u)) break;
        }
    }
    double s = r_ * std::cosh(u);

    int d = m_.dim();
    if (rho_ < 1e-14) return s * rng.direction(d);
    // rejection for the direction against the uniform proposal
    double bound = std::pow((s - rho_) * (s - rho_), 0.5 * d);
    for (;;) {
        Pt w = rng.direction(d);
        double mu = dot(w, axis_);
        double q = s * s + rho_ * rho_ - 2.0 * s * rho_ * mu;
        double acc = bound / std::pow(q, 0.5 * d);
        if (rng.uniform() < acc) return s * w;
    }
}

double killing_intensity(const StableModel& m, const Domain& dom, const Pt& z, double reltol) {
    if (dom.signed_distance(z) <= 0) throw DomainError("killing intensity needs z interior");
    if (m.dim() != dom.dim()) throw DomainError("model/domain dimension mismatch");
    int d = m.dim();
    double a = m.alpha();

    auto ray_mass = [&](const Pt& dir) {
        // exact integral of r^{-1-alpha} over the complement segments
        std::vector<double> cross = dom.ray_boundary_crossings(z, dir);
        double total = 0.0;
        double prev = 0.0;
        bool prev_known_inside = true;  // z is interior
        for (size_t i = 0; i < cross.size(); ++i) {
            double cur = cross[i];
            bool inside;
            if (i == 0 && prev == 0.0)
                inside = true;
            else {
                Pt mid = z + (0.5 * (prev + cur)) * dir;
                inside = dom.contains(mid);
            }
            if (!inside && prev > 0.0)
                total += (std::pow(prev, -a) - std::pow(cur, -a)) / a;
            prev = cur;
            (void)prev_known_inside;
        }
        if (prev == 0.0) {
            // no crossing found: direction grazes the boundary; integrate from
            // the distance to the boundary as a conservative fallback
            prev = std::max(dom.signed_distance(z), 1e-14);
        }
        Pt far = z + (prev * 1.0000001 + 1e-12) * dir;
        if (!dom.contains(far)) total += std::pow(prev, -a) / a;
        return total;
    };

    double angular;
    if (d == 1) {
        angular = ray_mass(pt(1)) + ray_mass(pt(-1));
    } else if (d == 2) {
        QuadResult q = integrate([&](double phi) { return ray_mass(pt(std::cos(phi), std::sin(phi))); },
                                 0.0, kTwoPi, 1e-14, reltol, 60000);
        if (q.error > 4.0 * reltol * std::abs(q.value) + 1e-12)
            throw QuadratureFailure("killing intensity angular quadrature", q.error);
        angular = q.value;
    } else {
        if (dom.kind() == DomainKind::ball) {
            // axisymmetric about the center direction
            Pt c = 0.5 * (dom.bbox_lo() + dom.bbox_hi());
            Pt axis = norm(c - z) > 1e-14 ? normalized(c - z) : pt(0, 0, 1);
            Pt e1 = std::abs(axis[0]) < 0.9 ? pt(1, 0, 0) : pt(0, 1, 0);
            Pt u = normalized(e1 - dot(e1, axis) * axis);
            QuadResult q = integrate(
                [&](double mu) {
                    double smu = std::sqrt(std::max(0.0, 1.0 - mu * mu));
                    Pt dir = mu * axis + smu * u;
                    return ray_mass(dir);
                },
                -1.0, 1.0, 1e-14, reltol, 40000);
            angular = kTwoPi * q.value;
        } else {
            QuadResult q = integrate(
                [&](double mu) {
                    double smu = std::sqrt(std::max(0.0, 1.0 - mu * mu));
                    QuadResult inner = integrate(
                        [&](double phi) {
                            Pt dir = pt(smu * std::cos(phi), smu * std::sin(phi), mu);
                            return ray_mass(dir);
                        },
                        0.0, kTwoPi, 1e-13, reltol, 4000);
                    return inner.value;
                },
                -1.0, 1.0, 1e-13, reltol, 2000);
            angular = q.value;
        }
    }
    return m.jump_const() * angular;
}

}  // namespace fc
