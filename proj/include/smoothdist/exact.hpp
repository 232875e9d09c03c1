#pragma once

#include "mesh.hpp"

#include <array>
#include <cstddef>

namespace smoothdist {

// Barycentric coordinates over the constrained simplex domain.
// Conventions: an edge point is (1-t)v0 + t v1 with c[0] = t; a triangle
// point is (1-u-v)v0 + u v1 + v v2 with c = (u, v), u,v >= 0, u+v <= 1.
struct Barycentric {
    std::array<double, 2> c{0.0, 0.0};
    int dim = 0;

    static Barycentric for_point() { return {}; }
    static Barycentric for_edge(double t) { return {{t, 0.0}, 1}; }
    static Barycentric for_triangle(double u, double v) { return {{u, v}, 2}; }
};

// A simplex with resolved corner positions, decoupled from mesh storage so
// query primitives and synthetic probes use the same kernels.
struct SimplexGeom {
    std::array<Vec3, 3> c{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    int dim = 0;

    static SimplexGeom point(const Vec3& a) { return {{a, Vec3::Zero(), Vec3::Zero()}, 0}; }
    static SimplexGeom edge(const Vec3& a, const Vec3& b) { return {{a, b, Vec3::Zero()}, 1}; }
    static SimplexGeom triangle(const Vec3& a, const Vec3& b, const Vec3& c) { return {{a, b, c}, 2}; }
    static SimplexGeom from_mesh(const SimplexMesh& m, const Simplex& s) {
        return {m.corners(s), s.dim()};
    }

    Vec3 at(const Barycentric& b) const {
        switch (dim) {
            case 0: return c[0];
            case 1: return c[0] + b.c[0] * (c[1] - c[0]);
            default: return c[0] + b.c[0] * (c[1] - c[0]) + b.c[1] * (c[2] - c[0]);
        }
    }
};

// Result of the closest-pair computation between a data simplex f and a query
// simplex g. grad is the distance gradient with respect to rigid translation
// of g: (point_g - point_f)/distance, or zero at contact. Any closest pair
// yields the same gradient, so tie-breaking only affects the barycentrics.
struct ClosestPair {
    double distance = 0.0;
    Barycentric phi;     // on f
    Barycentric lambda;  // on g
    Vec3 point_f = Vec3::Zero();
    Vec3 point_g = Vec3::Zero();
    Vec3 grad = Vec3::Zero();
};

namespace detail {

inline void finish_pair(ClosestPair& r) {
    const Vec3 diff = r.point_g - r.point_f;
    r.distance = diff.norm();
    r.grad = r.distance > 0.0 ? Vec3(diff / r.distance) : Vec3::Zero();
}

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

// Closest point on segment (a, b) to p; returns parameter t.
inline double closest_on_segment(const Vec3& a, const Vec3& b, const Vec3& p) {
    const Vec3 ab = b - a;
    const double denom = ab.squaredNorm();
    if (denom <= 0.0) return 0.0;
    return clamp01(ab.dot(p - a) / denom);
}

// Closest point on triangle (a, b, c) to p via the Voronoi-region case
// analysis; returns barycentric (u, v) with point = a + u(b-a) + v(c-a).
inline Barycentric closest_on_triangle(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& p) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return Barycentric::for_triangle(0.0, 0.0);

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return Barycentric::for_triangle(1.0, 0.0);

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return Barycentric::for_triangle(0.0, 1.0);

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0)
        return Barycentric::for_triangle(d1 / (d1 - d3), 0.0);

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0)
        return Barycentric::for_triangle(0.0, d2 / (d2 - d6));

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return Barycentric::for_triangle(1.0 - t, t);
    }

    const double denom = 1.0 / (va + vb + vc);
    return Barycentric::for_triangle(vb * denom, vc * denom);
}

// Closest parameters between segments (p1, q1) and (p2, q2). Parallel pairs
// resolve to the smallest feasible s, making the result deterministic.
inline void closest_segment_segment(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2,
                                    double& s, double& t) {
    const Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
    const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
    constexpr double kTiny = 1e-30;
    if (a <= kTiny && e <= kTiny) {
        s = t = 0.0;
        return;
    }
    if (a <= kTiny) {
        s = 0.0;
        t = clamp01(f / e);
        return;
    }
    const double c = d1.dot(r);
    if (e <= kTiny) {
        t = 0.0;
        s = clamp01(-c / a);
        return;
    }
    const double b = d1.dot(d2);
    const double denom = a * e - b * b;
    s = denom > 0.0 ? clamp01((b * f - c * e) / denom) : 0.0;
    t = (b * s + f) / e;
    if (t < 0.0) {
        t = 0.0;
        s = clamp01(-c / a);
    } else if (t > 1.0) {
        t = 1.0;
        s = clamp01((b - c) / a);
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Distance between two simplices as a QP over the joint barycentric domain:
//   min |f(phi) - g(lambda)|^2  s.t.  phi, lambda in their simplex domains.
// The Hessian is positive semidefinite, so the minimizer lies on some face of
// the domain polytope and is the critical point of the restriction to that
// face's affine hull. We enumerate all faces (the active sets), solve each
// face's unconstrained normal equations, and keep the best feasible
// candidate. Faces are visited vertices -> edges -> interior, and ties keep
// the earliest candidate, so degenerate configurations (parallel features)
// resolve to the lowest-dimensional active set deterministically.
//
// Rank-deficient restrictions (e.g. interior x interior faces of parallel
// features) are skipped outright: when the minimizer over such a face is
// non-unique, the minimizing set extends to the face boundary, so a
// lower-dimensional face yields the same distance.
// ---------------------------------------------------------------------------
inline ClosestPair simplex_distance_qp(const SimplexGeom& f, const SimplexGeom& g) {
    struct Face {
        double base[2];
        double dir[2][2];  // dir[param][bary coord]
        int k;
    };
    // Canonical face lists in ascending dimension, vertices in index order.
    static constexpr Face kPointFaces[] = {{{0, 0}, {{0, 0}, {0, 0}}, 0}};
    static constexpr Face kEdgeFaces[] = {
        {{0, 0}, {{0, 0}, {0, 0}}, 0},
        {{1, 0}, {{0, 0}, {0, 0}}, 0},
        {{0, 0}, {{1, 0}, {0, 0}}, 1},
    };
    static constexpr Face kTriFaces[] = {
        {{0, 0}, {{0, 0}, {0, 0}}, 0},
        {{1, 0}, {{0, 0}, {0, 0}}, 0},
        {{0, 1}, {{0, 0}, {0, 0}}, 0},
        {{0, 0}, {{1, 0}, {0, 0}}, 1},   // edge v0-v1
        {{0, 0}, {{0, 1}, {0, 0}}, 1},   // edge v0-v2
        {{1, 0}, {{-1, 1}, {0, 0}}, 1},  // edge v1-v2
        {{0, 0}, {{1, 0}, {0, 1}}, 2},
    };
    auto faces_of = [](int dim, const Face*& ptr, int& n) {
        switch (dim) {
            case 0: ptr = kPointFaces; n = 1; break;
            case 1: ptr = kEdgeFaces; n = 3; break;
            default: ptr = kTriFaces; n = 7; break;
        }
    };

    static constexpr double kOrigin[3] = {0, 0, 0};
    auto bary_at = [](const Face& fc, const double* z, int dim) {
        Barycentric b;
        b.dim = dim;
        b.c[0] = fc.base[0];
        b.c[1] = fc.base[1];
        for (int p = 0; p < fc.k; ++p) {
            b.c[0] += z[p] * fc.dir[p][0];
            b.c[1] += z[p] * fc.dir[p][1];
        }
        return b;
    };
    auto feasible = [](const Barycentric& b) {
        constexpr double tol = 1e-10;
        if (b.dim == 0) return true;
        if (b.dim == 1) return b.c[0] >= -tol && b.c[0] <= 1.0 + tol;
        return b.c[0] >= -tol && b.c[1] >= -tol && b.c[0] + b.c[1] <= 1.0 + tol;
    };
    auto clamp_domain = [](Barycentric& b) {
        if (b.dim == 0) return;
        if (b.dim == 1) {
            b.c[0] = detail::clamp01(b.c[0]);
            return;
        }
        b.c[0] = std::max(b.c[0], 0.0);
        b.c[1] = std::max(b.c[1], 0.0);
        const double s = b.c[0] + b.c[1];
        if (s > 1.0) {
            b.c[0] /= s;
            b.c[1] /= s;
        }
    };

    const Face* ffaces;
    const Face* gfaces;
    int nf, ng;
    faces_of(f.dim, ffaces, nf);
    faces_of(g.dim, gfaces, ng);

    const Vec3 fe1 = f.c[1] - f.c[0], fe2 = f.c[2] - f.c[0];
    const Vec3 ge1 = g.c[1] - g.c[0], ge2 = g.c[2] - g.c[0];

    ClosestPair best;
    double best_d2 = std::numeric_limits<double>::infinity();
    bool have = false;

    for (int i = 0; i < nf; ++i) {
        const Face& Ff = ffaces[i];
        // world-space direction of each f-face parameter
        Vec3 fdir[2];
        for (int p = 0; p < Ff.k; ++p) fdir[p] = Ff.dir[p][0] * fe1 + Ff.dir[p][1] * fe2;
        Barycentric fb0 = bary_at(Ff, kOrigin, f.dim);
        const Vec3 f0 = f.at(fb0);

        for (int j = 0; j < ng; ++j) {
            const Face& Fg = gfaces[j];
            const int k = Ff.k + Fg.k;
            if (k > 3) continue;  // rank <= 3 in R^3: always deficient, boundary faces cover it

            Vec3 cols[3];
            for (int p = 0; p < Ff.k; ++p) cols[p] = fdir[p];
            for (int p = 0; p < Fg.k; ++p)
                cols[Ff.k + p] = -(Fg.dir[p][0] * ge1 + Fg.dir[p][1] * ge2);
            Barycentric gb0 = bary_at(Fg, kOrigin, g.dim);
            const Vec3 d0 = f0 - g.at(gb0);

            double z[3] = {0, 0, 0};
            bool solved = true;
            if (k == 1) {
                const double m = cols[0].squaredNorm();
                if (m <= 0.0) solved = false;
                else z[0] = -cols[0].dot(d0) / m;
            } else if (k == 2) {
                const double a11 = cols[0].squaredNorm(), a22 = cols[1].squaredNorm();
                const double a12 = cols[0].dot(cols[1]);
                const double det = a11 * a22 - a12 * a12;
                if (det <= 1e-12 * a11 * a22) {
                    solved = false;
                } else {
                    const double r1 = -cols[0].dot(d0), r2 = -cols[1].dot(d0);
                    z[0] = (a22 * r1 - a12 * r2) / det;
                    z[1] = (a11 * r2 - a12 * r1) / det;
                }
            } else if (k == 3) {
                Eigen::Matrix3d M;
                for (int r = 0; r < 3; ++r)
                    for (int cI = 0; cI < 3; ++cI) M(r, cI) = cols[r].dot(cols[cI]);
                const double det = M.determinant();
                const double scale = M(0, 0) * M(1, 1) * M(2, 2);
                if (std::abs(det) <= 1e-12 * scale) {
                    solved = false;
                } else {
                    Eigen::Vector3d rhs;
                    for (int r = 0; r < 3; ++r) rhs(r) = -cols[r].dot(d0);
                    Eigen::Vector3d sol = M.inverse() * rhs;
                    z[0] = sol(0);
                    z[1] = sol(1);
                    z[2] = sol(2);
                }
            }
            if (!solved && k > 0) continue;

            Barycentric fb = bary_at(Ff, z, f.dim);
            Barycentric gb = bary_at(Fg, z + Ff.k, g.dim);
            if (!feasible(fb) || !feasible(gb)) continue;
            clamp_domain(fb);
            clamp_domain(gb);

            const Vec3 pf = f.at(fb), pg = g.at(gb);
            const double d2 = (pg - pf).squaredNorm();
            if (!have || d2 < best_d2) {
                have = true;
                best_d2 = d2;
                best.phi = fb;
                best.lambda = gb;
                best.point_f = pf;
                best.point_g = pg;
            }
        }
    }
    detail::finish_pair(best);
    return best;
}

// Fast path for point queries (the sphere tracer and grid benchmark live on
// this); phi comes from the closed-form kernels.
inline ClosestPair point_simplex_distance(const SimplexGeom& f, const Vec3& q) {
    ClosestPair r;
    r.lambda = Barycentric::for_point();
    r.point_g = q;
    switch (f.dim) {
        case 0:
            r.phi = Barycentric::for_point();
            r.point_f = f.c[0];
            break;
        case 1:
            r.phi = Barycentric::for_edge(detail::closest_on_segment(f.c[0], f.c[1], q));
            r.point_f = f.at(r.phi);
            break;
        default:
            r.phi = detail::closest_on_triangle(f.c[0], f.c[1], f.c[2], q);
            r.point_f = f.at(r.phi);
            break;
    }
    detail::finish_pair(r);
    return r;
}

// Exact distance between two simplices. Point/edge/triangle point queries and
// segment pairs use closed forms; edge-triangle and triangle-triangle pairs go
// through the face-enumeration QP.
inline ClosestPair simplex_distance(const SimplexGeom& f, const SimplexGeom& g) {
    if (g.dim == 0) return point_simplex_distance(f, g.c[0]);
    if (f.dim == 0) {
        // swap: compute closest point on g to the point f
        ClosestPair r = point_simplex_distance(g, f.c[0]);
        ClosestPair out;
        out.phi = Barycentric::for_point();
        out.lambda = r.phi;
        out.point_f = r.point_g;
        out.point_g = r.point_f;
        detail::finish_pair(out);
        return out;
    }
    if (f.dim == 1 && g.dim == 1) {
        double s, t;
        detail::closest_segment_segment(f.c[0], f.c[1], g.c[0], g.c[1], s, t);
        ClosestPair r;
        r.phi = Barycentric::for_edge(s);
        r.lambda = Barycentric::for_edge(t);
        r.point_f = f.at(r.phi);
        r.point_g = g.at(r.lambda);
        detail::finish_pair(r);
        return r;
    }
    return simplex_distance_qp(f, g);
}

struct ExactMinResult {
    double distance = std::numeric_limits<double>::infinity();
    std::size_t argmin = 0;
    ClosestPair pair;
};

// Brute-force minimum over all primitives. This is the oracle the accelerated
// paths are judged against, so it stays a plain linear scan.
inline ExactMinResult exact_min_distance(const SimplexMesh& mesh, const SimplexGeom& g) {
    ExactMinResult res;
    for (std::size_t i = 0; i < mesh.simplices.size(); ++i) {
        ClosestPair p = g.dim == 0
                            ? point_simplex_distance(SimplexGeom::from_mesh(mesh, mesh.simplices[i]), g.c[0])
                            : simplex_distance(SimplexGeom::from_mesh(mesh, mesh.simplices[i]), g);
        if (p.distance < res.distance) {
            res.distance = p.distance;
            res.argmin = i;
            res.pair = p;
        }
    }
    return res;
}

inline ExactMinResult exact_min_distance(const SimplexMesh& mesh, const Vec3& q) {
    return exact_min_distance(mesh, SimplexGeom::point(q));
}

} // namespace smoothdist
