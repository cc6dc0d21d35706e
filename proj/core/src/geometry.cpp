#include "fraccaloric/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fraccaloric/errors.hpp"

namespace fc {

namespace {

double seg_distance(const Pt& p, const Pt& a, const Pt& b, Pt* closest = nullptr) {
    Pt ab = b - a;
    double len2 = norm2(ab);
    double t = len2 > 0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    Pt q = a + t * ab;
    if (closest) *closest = q;
    return dist(p, q);
}

bool point_in_polygon(const Pt& p, const std::vector<Pt>& v) {
    bool in = false;
    size_t n = v.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        if ((v[i][1] > p[1]) != (v[j][1] > p[1])) {
            double xint = v[j][0] + (p[1] - v[j][1]) / (v[i][1] - v[j][1]) * (v[i][0] - v[j][0]);
            if (p[0] < xint) in = !in;
        }
    }
    return in;
}

// r > 0 with z + r*dir on segment [a,b]; -1 if none.
double ray_segment(const Pt& z, const Pt& dir, const Pt& a, const Pt& b) {
    double ex = b[0] - a[0], ey = b[1] - a[1];
    double det = dir[0] * (-ey) - dir[1] * (-ex);
    if (std::abs(det) < 1e-300) return -1.0;
    double qx = a[0] - z[0], qy = a[1] - z[1];
    double r = (qx * (-ey) + ex * qy) / det;
    double s = (dir[0] * qy - dir[1] * qx) / det;
    if (r > 1e-13 && s >= 0.0 && s <= 1.0) return r;
    return -1.0;
}

void ray_sphere(const Pt& z, const Pt& dir, const Pt& c, double R, std::vector<double>& out) {
    Pt m = z - c;
    double b = dot(m, dir);
    double disc = b * b - (norm2(m) - R * R);
    if (disc <= 0.0) return;
    double s = std::sqrt(disc);
    if (-b - s > 1e-13) out.push_back(-b - s);
    if (-b + s > 1e-13) out.push_back(-b + s);
}

double polar_angle(const Pt& p) {
    double a = std::atan2(p[1], p[0]);
    return a < 0 ? a + 2.0 * M_PI : a;
}

}  // namespace

Domain Domain::ball(int d, Pt center, double radius) {
    if (d < 1 || d > 3) throw DomainError("dimension must be 1, 2, or 3");
    if (radius <= 0) throw DomainError("ball radius must be positive");
    Domain dom;
    dom.d_ = d;
    dom.kind_ = DomainKind::ball;
    dom.center_ = center;
    dom.radius_ = radius;
    dom.finalize();
    return dom;
}

Domain Domain::box(int d, Pt lo, Pt hi) {
    if (d < 1 || d > 3) throw DomainError("dimension must be 1, 2, or 3");
    for (int i = 0; i < d; ++i)
        if (!(lo[i] < hi[i])) throw DomainError("box needs lo < hi per axis");
    Domain dom;
    dom.d_ = d;
    dom.kind_ = DomainKind::box;
    dom.lo_ = lo;
    dom.hi_ = hi;
    dom.finalize();
    return dom;
}

Domain Domain::polygon(std::vector<Pt> verts) {
    if (verts.size() < 3) throw DomainError("polygon needs at least 3 vertices");
    // enforce CCW orientation
    double area2 = 0.0;
    size_t n = verts.size();
    for (size_t i = 0; i < n; ++i) {
        const Pt& a = verts[i];
        const Pt& b = verts[(i + 1) % n];
        area2 += a[0] * b[1] - b[0] * a[1];
    }
    if (area2 < 0) std::reverse(verts.begin(), verts.end());
    Domain dom;
    dom.d_ = 2;
    dom.kind_ = DomainKind::polygon;
    dom.verts_ = std::move(verts);
    dom.finalize();
    return dom;
}

Domain Domain::lshape(double size, double notch) {
    if (size <= 0 || notch <= 0 || notch >= size)
        throw DomainError("lshape needs 0 < notch < size");
    double s = size, c = size - notch;
    Domain dom = polygon({pt(0, 0), pt(s, 0), pt(s, c), pt(c, c), pt(c, s), pt(0, s)});
    dom.kind_ = DomainKind::lshape;
    return dom;
}

Domain Domain::sector(double radius, double angle) {
    if (radius <= 0 || angle <= 0 || angle >= 2.0 * M_PI)
        throw DomainError("sector needs radius > 0 and angle in (0, 2*pi)");
    Domain dom;
    dom.d_ = 2;
    dom.kind_ = DomainKind::sector;
    dom.radius_ = radius;
    dom.angle_ = angle;
    dom.finalize();
    return dom;
}

double Domain::signed_distance(const Pt& x) const {
    switch (kind_) {
        case DomainKind::ball:
            return radius_ - dist(x, center_);
        case DomainKind::box: {
            double inside = 1e300;
            double out2 = 0.0;
            bool out = false;
            for (int i = 0; i < d_; ++i) {
                inside = std::min(inside, std::min(x[i] - lo_[i], hi_[i] - x[i]));
                double e = std::max(lo_[i] - x[i], x[i] - hi_[i]);
                if (e > 0) {
                    out = true;
                    out2 += e * e;
                }
            }
            return out ? -std::sqrt(out2) : inside;
        }
        case DomainKind::polygon:
        case DomainKind::lshape: {
            double dmin = 1e300;
            size_t n = verts_.size();
            for (size_t i = 0; i < n; ++i)
                dmin = std::min(dmin, seg_distance(x, verts_[i], verts_[(i + 1) % n]));
            return point_in_polygon(x, verts_) ? dmin : -dmin;
        }
        case DomainKind::sector: {
            double r = norm(x);
            double a = polar_angle(x);
            Pt e0 = pt(radius_, 0);
            Pt e1 = pt(radius_ * std::cos(angle_), radius_ * std::sin(angle_));
            double dmin = std::min(seg_distance(x, pt(0, 0), e0), seg_distance(x, pt(0, 0), e1));
            if (a <= angle_)
                dmin = std::min(dmin, std::abs(r - radius_));
            else
                dmin = std::min(dmin, std::min(dist(x, e0), dist(x, e1)));
            bool in = (r < radius_) && (a > 0.0) && (a < angle_);
            return in ? dmin : -dmin;
        }
    }
    return 0.0;
}

BoundaryPoint Domain::nearest_boundary(const Pt& x) const {
    BoundaryPoint bp;
    switch (kind_) {
        case DomainKind::ball: {
            Pt u = x - center_;
            double n = norm(u);
            u = (n > 1e-14) ? (1.0 / n) * u : pt(1, 0, 0);
            bp.q = center_ + radius_ * u;
            bp.inward = -1.0 * u;
            return bp;
        }
        case DomainKind::box: {
            if (signed_distance(x) >= 0) {
                int axis = 0;
                double best = 1e300;
                double side = 1.0;
                for (int i = 0; i < d_; ++i) {
                    if (x[i] - lo_[i] < best) {
                        best = x[i] - lo_[i];
                        axis = i;
                        side = -1.0;
                    }
                    if (hi_[i] - x[i] < best) {
                        best = hi_[i] - x[i];
                        axis = i;
                        side = 1.0;
                    }
                }
                bp.q = x;
                bp.q[axis] = side > 0 ? hi_[axis] : lo_[axis];
                bp.inward = pt(0, 0, 0);
                bp.inward[axis] = -side;
            } else {
                Pt q = x;
                Pt inw = pt(0, 0, 0);
                for (int i = 0; i < d_; ++i) {
                    double c = std::clamp(x[i], lo_[i], hi_[i]);
                    if (c != x[i]) inw[i] = (c == lo_[i]) ? 1.0 : -1.0;
                    q[i] = c;
                }
                bp.q = q;
                bp.inward = normalized(inw);
            }
            // corner: blend inward normals of faces within tolerance
            Pt blend = pt(0, 0, 0);
            int active = 0;
            for (int i = 0; i < d_; ++i) {
                if (std::abs(bp.q[i] - lo_[i]) < 1e-12) {
                    blend[i] += 1;
                    ++active;
                }
                if (std::abs(bp.q[i] - hi_[i]) < 1e-12) {
                    blend[i] -= 1;
                    ++active;
                }
            }
            if (active > 1) bp.inward = normalized(blend);
            return bp;
        }
        case DomainKind::polygon:
        case DomainKind::lshape: {
            size_t n = verts_.size();
            double best = 1e300;
            size_t ei = 0;
            Pt q{0, 0, 0};
            for (size_t i = 0; i < n; ++i) {
                Pt cand;
                double dd = seg_distance(x, verts_[i], verts_[(i + 1) % n], &cand);
                if (dd < best) {
                    best = dd;
                    q = cand;
                    ei = i;
                }
            }
            bp.q = q;
            auto edge_inward = [&](size_t i) {
                Pt t = normalized(verts_[(i + 1) % n] - verts_[i]);
                return pt(-t[1], t[0]);  // CCW interior on the left
            };
            // vertex hit: average the adjacent edge normals
            bool at_v0 = dist(q, verts_[ei]) < 1e-12;
            bool at_v1 = dist(q, verts_[(ei + 1) % n]) < 1e-12;
            if (at_v0)
                bp.inward = normalized(edge_inward(ei) + edge_inward((ei + n - 1) % n));
            else if (at_v1)
                bp.inward = normalized(edge_inward(ei) + edge_inward((ei + 1) % n));
            else
                bp.inward = edge_inward(ei);
            return bp;
        }
        case DomainKind::sector: {
            Pt e0 = pt(radius_, 0);
            Pt e1 = pt(radius_ * std::cos(angle_), radius_ * std::sin(angle_));
            Pt q0, q1;
            double d0 = seg_distance(x, pt(0, 0), e0, &q0);
            double d1 = seg_distance(x, pt(0, 0), e1, &q1);
            double a = polar_angle(x);
            double darc = 1e300;
            Pt qa{0, 0, 0};
            if (a <= angle_ && norm(x) > 1e-14) {
                qa = (radius_ / norm(x)) * x;
                darc = std::abs(norm(x) - radius_);
            }
            Pt half = pt(std::cos(angle_ / 2), std::sin(angle_ / 2));
            if (darc <= d0 && darc <= d1) {
                bp.q = qa;
                bp.inward = normalized(-1.0 * qa);
            } else if (d0 <= d1) {
                bp.q = q0;
                bp.inward = (norm(q0) < 1e-12) ? half : pt(0, 1);
            } else {
                bp.q = q1;
                bp.inward = (norm(q1) < 1e-12) ? half
                                               : pt(std::sin(angle_), -std::cos(angle_));
            }
            if (norm(bp.q) < 1e-12) bp.inward = half;  // the corner at the origin
            return bp;
        }
    }
    return bp;
}

std::vector<double> Domain::ray_boundary_crossings(const Pt& z, const Pt& dir) const {
    std::vector<double> out;
    switch (kind_) {
        case DomainKind::ball:
            ray_sphere(z, dir, center_, radius_, out);
            break;
        case DomainKind::box: {
            double tmin = 0.0, tmax = 1e300;
            bool hit = true;
            for (int i = 0; i < d_; ++i) {
                if (std::abs(dir[i]) < 1e-300) {
                    if (z[i] <= lo_[i] || z[i] >= hi_[i]) hit = false;
                    continue;
                }
                double t1 = (lo_[i] - z[i]) / dir[i];
                double t2 = (hi_[i] - z[i]) / dir[i];
                if (t1 > t2) std::swap(t1, t2);
                tmin = std::max(tmin, t1);
                tmax = std::min(tmax, t2);
            }
            if (hit && tmin < tmax) {
                if (tmin > 1e-13) out.push_back(tmin);
                if (tmax > 1e-13) out.push_back(tmax);
            }
            break;
        }
        case DomainKind::polygon:
        case DomainKind::lshape: {
            size_t n = verts_.size();
            for (size_t i = 0; i < n; ++i) {
                double r = ray_segment(z, dir, verts_[i], verts_[(i + 1) % n]);
                if (r > 0) out.push_back(r);
            }
            break;
        }
        case DomainKind::sector: {
            std::vector<double> circ;
            ray_sphere(z, dir, pt(0, 0), radius_, circ);
            for (double r : circ) {
                Pt p = z + r * dir;
                double a = polar_angle(p);
                if (a >= 0.0 && a <= angle_) out.push_back(r);
            }
            Pt e0 = pt(radius_, 0);
            Pt e1 = pt(radius_ * std::cos(angle_), radius_ * std::sin(angle_));
            double r0x = ray_segment(z, dir, pt(0, 0), e0);
            if (r0x > 0) out.push_back(r0x);
            double r1x = ray_segment(z, dir, pt(0, 0), e1);
            if (r1x > 0) out.push_back(r1x);
            break;
        }
    }
    std::sort(out.begin(), out.end());
    // merge near-duplicate hits (vertex grazing)
    std::vector<double> merged;
    for (double r : out)
        if (merged.empty() || r - merged.back() > 1e-12 * (1.0 + r)) merged.push_back(r);
    return merged;
}

Pt Domain::corkscrew_point(const Pt& y, double r) const {
    if (r <= 0) throw DomainError("corkscrew scale must be positive");
    if (r > r0_ / 2) return x0_;
    double kr = kappa_ * r;
    if (signed_distance(y) >= kr) return y;
    BoundaryPoint bp = nearest_boundary(y);
    auto admissible = [&](double s) {
        Pt a = bp.q + s * bp.inward;
        return signed_distance(a) >= kr && dist(a, y) <= r - kr;
    };
    const int steps = 64;
    double smax = (1.0 - kappa_) * r;
    double good = -1.0, bad = smax;
    for (int j = steps; j >= 1; --j) {
        double s = smax * j / steps;
        if (admissible(s)) {
            good = s;
            break;
        }
        bad = s;
    }
    if (good < 0) throw GeometryFailure("corkscrew search failed; check r0/lambda for this domain");
    for (int it = 0; it < 40; ++it) {  // push to the largest admissible offset
        double mid = 0.5 * (good + bad);
        if (admissible(mid))
            good = mid;
        else
            bad = mid;
    }
    return bp.q + good * bp.inward;
}

Pt Domain::corkscrew_pair(const Pt& x, const Pt& y) const {
    double rxy = std::max({dist(x, y), signed_distance(x), signed_distance(y)});
    if (rxy > r0_ / 32) return x0_;
    double kr = kappa_ * rxy;
    auto admissible = [&](const Pt& a) {
        return signed_distance(a) >= kr && dist(a, x) <= 3 * rxy - kr && dist(a, y) <= 3 * rxy - kr;
    };
    Pt mid = 0.5 * (x + y);
    for (const Pt& cand : {x, y, mid})
        if (admissible(cand)) return cand;
    BoundaryPoint bp = nearest_boundary(mid);
    double good = -1.0;
    const int steps = 64;
    double smax = (3.0 - kappa_) * rxy;
    for (int j = steps; j >= 1; --j) {
        double s = smax * j / steps;
        if (admissible(bp.q + s * bp.inward)) {
            good = s;
            break;
        }
    }
    if (good < 0) throw GeometryFailure("corkscrew pair search failed");
    return bp.q + good * bp.inward;
}

void Domain::set_x0(const Pt& x0) {
    if (signed_distance(x0) <= 0) throw DomainError("x0 must be interior");
    x0_ = x0;
}

void Domain::set_localization(double r0, double lambda) {
    if (r0 <= 0 || lambda <= 0) throw DomainError("r0 and lambda must be positive");
    r0_ = r0;
    lambda_ = lambda;
    kappa_ = 1.0 / (4.0 * std::sqrt(1.0 + lambda_ * lambda_));
}

Domain Domain::dilated(double c) const {
    if (c <= 0) throw DomainError("dilation factor must be positive");
    // every geometric field scales linearly; kappa is scale invariant
    Domain dom = *this;
    dom.center_ = c * center_;
    dom.radius_ *= c;
    dom.lo_ = c * lo_;
    dom.hi_ = c * hi_;
    for (auto& v : dom.verts_) v = c * v;
    dom.r0_ *= c;
    dom.x0_ = c * x0_;
    return dom;
}

void Domain::finalize() {
    // bounding box
    switch (kind_) {
        case DomainKind::ball:
            for (int i = 0; i < d_; ++i) {
                lo_[i] = center_[i] - radius_;
                hi_[i] = center_[i] + radius_;
            }
            break;
        case DomainKind::box:
            break;  // already set
        case DomainKind::polygon:
        case DomainKind::lshape: {
            lo_ = pt(1e300, 1e300);
            hi_ = pt(-1e300, -1e300);
            for (const auto& v : verts_) {
                for (int i = 0; i < 2; ++i) {
                    lo_[i] = std::min(lo_[i], v[i]);
                    hi_[i] = std::max(hi_[i], v[i]);
                }
            }
            lo_[2] = hi_[2] = 0;
            break;
        }
        case DomainKind::sector:
            lo_ = pt(-radius_, -radius_);
            hi_ = pt(radius_, radius_);
            break;
    }

    // conservative Lipschitz data per shape
    double lambda = 1.0, r0 = 0.0;
    switch (kind_) {
        case DomainKind::ball:
            r0 = radius_ / 2;
            break;
        case DomainKind::box: {
            double side = 1e300;
            for (int i = 0; i < d_; ++i) side = std::min(side, hi_[i] - lo_[i]);
            r0 = side / 2;
            break;
        }
        case DomainKind::polygon:
        case DomainKind::lshape: {
            size_t n = verts_.size();
            double minedge = 1e300;
            for (size_t i = 0; i < n; ++i) {
                const Pt& a = verts_[i];
                const Pt& b = verts_[(i + 1) % n];
                const Pt& c = verts_[(i + 2) % n];
                minedge = std::min(minedge, dist(a, b));
                Pt u = normalized(a - b), w = normalized(c - b);
                double cosang = std::clamp(dot(u, w), -1.0, 1.0);
                double theta = std::acos(cosang);  // in (0, pi]; reflex handled by |cot|
                lambda = std::max(lambda, std::abs(1.0 / std::tan(theta / 2)));
            }
            r0 = 0.4 * minedge;
            break;
        }
        case DomainKind::sector: {
            lambda = std::max(1.0, std::abs(1.0 / std::tan(angle_ / 2)));
            r0 = 0.4 * radius_;
            break;
        }
    }
    set_localization(r0, lambda);

    // deterministic interior reference point: coarse argmax of delta_D
    Pt best = pt(0, 0, 0);
    double bestd = -1e300;
    int n1 = 33;
    int nz = (d_ == 3) ? n1 : 1, ny = (d_ >= 2) ? n1 : 1;
    for (int iz = 0; iz < nz; ++iz)
        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix < n1; ++ix) {
                Pt p = pt(lo_[0] + (ix + 0.5) * (hi_[0] - lo_[0]) / n1,
                          d_ >= 2 ? lo_[1] + (iy + 0.5) * (hi_[1] - lo_[1]) / n1 : 0,
                          d_ == 3 ? lo_[2] + (iz + 0.5) * (hi_[2] - lo_[2]) / n1 : 0);
                double sd = signed_distance(p);
                if (sd > bestd) {
                    bestd = sd;
                    best = p;
                }
            }
    if (bestd <= 0) throw DomainError("failed to locate an interior reference point");
    x0_ = best;
}

std::vector<BoundaryPoint> Domain::boundary_probes() const {
    std::vector<BoundaryPoint> out;
    auto edge_inward = [&](size_t i) {
        size_t n = verts_.size();
        Pt t = normalized(verts_[(i + 1) % n] - verts_[i]);
        return pt(-t[1], t[0]);
    };
    switch (kind_) {
        case DomainKind::ball: {
            int m = (d_ == 1) ? 2 : 4;
            for (int k = 0; k < m; ++k) {
                double a = 2.0 * M_PI * k / m;
                Pt u = (d_ == 1) ? pt(k == 0 ? 1.0 : -1.0) : pt(std::cos(a), std::sin(a));
                BoundaryPoint bp;
                bp.q = center_ + radius_ * u;
                bp.inward = -1.0 * u;
                out.push_back(bp);
            }
            break;
        }
        case DomainKind::box: {
            if (d_ == 1) {
                out.push_back({pt(lo_[0]), pt(1, 0, 0)});
                out.push_back({pt(hi_[0]), pt(-1, 0, 0)});
                break;
            }
            double cx = 0.5 * (lo_[0] + hi_[0]), cy = 0.5 * (lo_[1] + hi_[1]);
            out.push_back({pt(cx, lo_[1]), pt(0, 1)});
            out.push_back({pt(hi_[0], cy), pt(-1, 0)});
            out.push_back({pt(cx, hi_[1]), pt(0, -1)});
            out.push_back({pt(lo_[0], cy), pt(1, 0)});
            double inv = 1.0 / std::sqrt(2.0);
            out.push_back({pt(lo_[0], lo_[1]), pt(inv, inv)});
            out.push_back({pt(hi_[0], lo_[1]), pt(-inv, inv)});
            out.push_back({pt(hi_[0], hi_[1]), pt(-inv, -inv)});
            out.push_back({pt(lo_[0], hi_[1]), pt(inv, -inv)});
            break;
        }
        case DomainKind::polygon:
        case DomainKind::lshape: {
            size_t n = verts_.size();
            for (size_t i = 0; i < n; ++i)
                out.push_back({0.5 * (verts_[i] + verts_[(i + 1) % n]), edge_inward(i)});
            for (size_t i = 0; i < n; ++i)
                out.push_back(
                    {verts_[i], normalized(edge_inward(i) + edge_inward((i + n - 1) % n))});
            break;
        }
        case DomainKind::sector: {
            double am = angle_ / 2;
            BoundaryPoint arc;
            arc.q = pt(radius_ * std::cos(am), radius_ * std::sin(am));
            arc.inward = normalized(-1.0 * arc.q);
            out.push_back(arc);
            out.push_back({pt(radius_ / 2, 0), pt(0, 1)});
            out.push_back({pt(radius_ / 2 * std::cos(angle_), radius_ / 2 * std::sin(angle_)),
                           pt(std::sin(angle_), -std::cos(angle_))});
            BoundaryPoint vertex;
            vertex.q = pt(0, 0);
            vertex.inward = pt(std::cos(am), std::sin(am));
            out.push_back(vertex);
            break;
        }
    }
    return out;
}

std::string Domain::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case DomainKind::ball:
            os << "ball(d=" << d_ << ", center=(" << center_[0] << "," << center_[1] << ","
               << center_[2] << "), r=" << radius_ << ")";
            break;
        case DomainKind::box:
            os << "box(d=" << d_ << ", lo=(" << lo_[0] << "," << lo_[1] << "," << lo_[2]
               << "), hi=(" << hi_[0] << "," << hi_[1] << "," << hi_[2] << "))";
            break;
        case DomainKind::polygon:
            os << "polygon(" << verts_.size() << " vertices)";
            break;
        case DomainKind::lshape:
            os << "lshape";
            break;
        case DomainKind::sector:
            os << "sector(r=" << radius_ << ", angle=" << angle_ << ")";
            break;
    }
    return os.str();
}

Domain Domain::from_name(const std::string& name) {
    if (name == "unit-disk" || name == "ball") return ball(2, pt(0, 0), 1.0);
    if (name == "unit-square" || name == "square" || name == "box")
        return box(2, pt(0, 0), pt(1, 1));
    if (name == "lshape") return lshape(1.0, 0.5);
    if (name == "sector") return sector(1.0, 1.5 * M_PI);
    if (name == "interval") return box(1, pt(-1), pt(1));
    throw ConfigError("unknown domain name: " + name +
                      " (expected unit-disk|unit-square|lshape|sector|interval|ball|box)");
}

}  // namespace fc
