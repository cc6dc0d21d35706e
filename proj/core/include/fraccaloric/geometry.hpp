#pragma once

#include <string>
#include <vector>

#include "fraccaloric/point.hpp"

namespace fc {

enum class DomainKind { ball, box, polygon, lshape, sector };

struct BoundaryPoint {
    Pt q{0, 0, 0};       // point on the boundary
    Pt inward{0, 0, 0};  // unit axis of the interior cone at q
};

// Bounded Lipschitz open sets with analytic distance functions.  Domains are
// immutable after construction and safe to share across threads.
class Domain {
  public:
    static Domain ball(int d, Pt center, double radius);
    static Domain box(int d, Pt lo, Pt hi);
    static Domain polygon(std::vector<Pt> verts);  // simple polygon, CCW, d=2
    // (0,size)^2 with the closed top-right notch [size-notch,size]^2 removed
    static Domain lshape(double size, double notch);
    // {r < radius, 0 < arg < angle}, vertex at the origin, d=2
    static Domain sector(double radius, double angle);

    int dim() const { return d_; }
    DomainKind kind() const { return kind_; }

    // delta_D(x) with sign: positive inside, nonpositive outside.
    double signed_distance(const Pt& x) const;
    bool contains(const Pt& x) const { return signed_distance(x) > 0.0; }

    BoundaryPoint nearest_boundary(const Pt& x) const;

    // Radii r > 0 at which z + r*dir crosses the boundary, ascending.
    std::vector<double> ray_boundary_crossings(const Pt& z, const Pt& dir) const;

    // A_r(y): deterministic corkscrew point, x0 for r > r0/2.
    Pt corkscrew_point(const Pt& y, double r) const;
    // A_{x,y}: x0 when r_{x,y} > r0/32.
    Pt corkscrew_pair(const Pt& x, const Pt& y) const;

    Pt bbox_lo() const { return lo_; }
    Pt bbox_hi() const { return hi_; }
    double diameter() const { return dist(lo_, hi_); }

    double r0() const { return r0_; }
    double lipschitz() const { return lambda_; }
    double kappa() const { return kappa_; }
    const Pt& x0() const { return x0_; }
    void set_x0(const Pt& x0);
    void set_localization(double r0, double lambda);

    // Scaled copy c*D (dilation about the origin).
    Domain dilated(double c) const;

    // Representative boundary points: edge/arc midpoints first, then corners.
    std::vector<BoundaryPoint> boundary_probes() const;

    std::string describe() const;

    // Catalog lookup: "unit-disk", "unit-square", "lshape", "sector", "ball",
    // "box" (the latter two with parameters).
    static Domain from_name(const std::string& name);

  private:
    Domain() = default;
    void finalize();  // bbox, conservative r0/lambda/kappa, interior x0

    int d_ = 2;
    DomainKind kind_ = DomainKind::ball;
    Pt center_{0, 0, 0};
    double radius_ = 1.0;
    double angle_ = 0.0;  // sector opening
    Pt lo_{0, 0, 0}, hi_{0, 0, 0};
    std::vector<Pt> verts_;  // polygon/lshape

    double r0_ = 0.5, lambda_ = 1.0, kappa_ = 0.0;
    Pt x0_{0, 0, 0};
};

}  // namespace fc
