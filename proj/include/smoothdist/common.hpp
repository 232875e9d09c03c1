#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace smoothdist {

using Vec3 = Eigen::Vector3d;

inline double sq(double x) { return x * x; }

// Axis-aligned bounding box. Default state is empty (inverted bounds) so that
// expand() can be used to accumulate.
struct Aabb {
    Vec3 lo{std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi{-std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};

    bool valid() const { return (lo.array() <= hi.array()).all(); }

    void expand(const Vec3& p) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    void expand(const Aabb& b) {
        lo = lo.cwiseMin(b.lo);
        hi = hi.cwiseMax(b.hi);
    }

    Vec3 center() const { return 0.5 * (lo + hi); }
    Vec3 extent() const { return hi - lo; }
    double diagonal() const { return valid() ? (hi - lo).norm() : 0.0; }

    // Componentwise clamp; the nearest point of the box to q.
    Vec3 closest_point(const Vec3& q) const { return q.cwiseMax(lo).cwiseMin(hi); }

    bool contains(const Vec3& p, double tol = 0.0) const {
        return (p.array() >= lo.array() - tol).all() && (p.array() <= hi.array() + tol).all();
    }
};

[[noreturn]] inline void fail(const std::string& msg) { throw std::runtime_error(msg); }

} // namespace smoothdist
