#ifndef LIDAUS_GEOMETRY_HPP
#define LIDAUS_GEOMETRY_HPP

#include <cmath>
#include <stdexcept>

namespace lidaus {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    double norm_xy() const { return std::sqrt(x * x + y * y); }

    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
    bool operator!=(const Vec3& o) const { return !(*this == o); }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

inline bool is_finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

// Axis-aligned box, used for obstacles.
struct Box {
    Vec3 min;
    Vec3 max;

    bool valid() const {
        return min.x <= max.x && min.y <= max.y && min.z <= max.z;
    }

    bool contains(const Vec3& p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y &&
               p.z >= min.z && p.z <= max.z;
    }
};

// Intersection test between an axis-aligned segment and a box. Segments in
// the grid graphs are always axis-aligned, so interval overlap per axis is
// exact.
inline bool segment_intersects_box(const Vec3& a, const Vec3& b, const Box& box) {
    const double lox = std::min(a.x, b.x), hix = std::max(a.x, b.x);
    const double loy = std::min(a.y, b.y), hiy = std::max(a.y, b.y);
    const double loz = std::min(a.z, b.z), hiz = std::max(a.z, b.z);
    return hix >= box.min.x && lox <= box.max.x &&
           hiy >= box.min.y && loy <= box.max.y &&
           hiz >= box.min.z && loz <= box.max.z;
}

// Distance from point p to segment [a, b].
inline double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
    const Vec3 ab = b - a;
    const double len2 = ab.x * ab.x + ab.y * ab.y + ab.z * ab.z;
    if (len2 == 0.0) return distance(p, a);
    const Vec3 ap = p - a;
    double t = (ap.x * ab.x + ap.y * ab.y + ap.z * ab.z) / len2;
    t = std::max(0.0, std::min(1.0, t));
    return distance(p, a + ab * t);
}

}  // namespace lidaus

#endif
