#pragma once

#include <array>
#include <cmath>

namespace fc {

// Points in R^d for d <= 3; unused coordinates stay zero so norms and
// distances can ignore the ambient dimension.
using Pt = std::array<double, 3>;

inline Pt pt(double x, double y = 0.0, double z = 0.0) { return {x, y, z}; }

inline Pt operator+(const Pt& a, const Pt& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Pt operator-(const Pt& a, const Pt& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Pt operator*(double c, const Pt& a) { return {c * a[0], c * a[1], c * a[2]}; }

inline double dot(const Pt& a, const Pt& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm2(const Pt& a) { return dot(a, a); }
inline double norm(const Pt& a) { return std::sqrt(norm2(a)); }
inline double dist(const Pt& a, const Pt& b) { return norm(a - b); }

inline Pt normalized(const Pt& a) {
    double n = norm(a);
    return n > 0 ? (1.0 / n) * a : a;
}

}  // namespace fc
