#pragma once

#include "exact.hpp"
#include "mesh.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

namespace smoothdist::shapes {

// ---------------------------------------------------------------------------
// Deterministic procedural meshes. The random scene generator emits only
// topologies whose (valence, edge-valence) combinations keep A w~ >= 1:
// every generated triangle shares at least one edge, so isolated triangles
// and bowtie configurations never appear.
// ---------------------------------------------------------------------------

inline SimplexMesh icosphere(int subdivisions = 1, double radius = 1.0,
                             const Vec3& center = Vec3::Zero()) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    std::vector<std::array<std::int32_t, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},
        {5, 11, 4}, {11, 10, 2}, {10, 7, 6},  {7, 1, 8},  {3, 9, 4},   {3, 4, 2},
        {3, 2, 6},  {3, 6, 8},  {3, 8, 9},   {4, 9, 5},  {2, 4, 11},  {6, 2, 10},
        {8, 6, 7},  {9, 8, 1}};

    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<std::int32_t, std::int32_t>, std::int32_t> midpoint;
        auto mid = [&](std::int32_t a, std::int32_t b) {
            const auto key = std::minmax(a, b);
            auto [it, fresh] = midpoint.try_emplace({key.first, key.second},
                                                    std::int32_t(verts.size()));
            if (fresh) verts.push_back(0.5 * (verts[a] + verts[b]));
            return it->second;
        };
        std::vector<std::array<std::int32_t, 3>> next;
        next.reserve(4 * faces.size());
        for (const auto& f : faces) {
            const std::int32_t ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }

    SimplexMesh mesh;
    mesh.vertices.reserve(verts.size());
    for (const Vec3& v : verts) mesh.vertices.push_back(center + radius * v.normalized());
    for (const auto& f : faces) mesh.simplices.push_back(Simplex::triangle(f[0], f[1], f[2]));
    return mesh;
}

// Torus of 2 * nu * nv triangles (60 x 60 -> 7200), closed and manifold:
// every vertex valence 6, every edge valence 2.
inline SimplexMesh uv_torus(double major = 0.35, double minor = 0.15, int nu = 60, int nv = 60,
                            const Vec3& center = Vec3::Zero()) {
    SimplexMesh mesh;
    mesh.vertices.reserve(std::size_t(nu) * nv);
    for (int i = 0; i < nu; ++i) {
        const double u = 2 * M_PI * i / nu;
        for (int j = 0; j < nv; ++j) {
            const double v = 2 * M_PI * j / nv;
            const double ring = major + minor * std::cos(v);
            mesh.vertices.push_back(center + Vec3(ring * std::cos(u), minor * std::sin(v),
                                                  ring * std::sin(u)));
        }
    }
    auto vid = [&](int i, int j) { return std::int32_t((i % nu) * nv + (j % nv)); };
    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
            mesh.simplices.push_back(Simplex::triangle(vid(i, j), vid(i + 1, j), vid(i, j + 1)));
            mesh.simplices.push_back(
                Simplex::triangle(vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)));
        }
    }
    return mesh;
}

// Planar grid patch of 2 (nx-1)(ny-1) triangles with optional height jitter.
inline SimplexMesh grid_patch(int nx, int ny, double size = 1.0, double height_jitter = 0.0,
                              std::uint64_t seed = 0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-height_jitter, height_jitter);
    SimplexMesh mesh;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            mesh.vertices.push_back(Vec3(size * i / (nx - 1), size * j / (ny - 1),
                                         height_jitter > 0 ? jitter(rng) : 0.0));
    auto vid = [&](int i, int j) { return std::int32_t(j * nx + i); };
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            mesh.simplices.push_back(Simplex::triangle(vid(i, j), vid(i + 1, j), vid(i, j + 1)));
            mesh.simplices.push_back(
                Simplex::triangle(vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)));
        }
    }
    return mesh;
}

namespace detail {

inline Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec3 v(n(rng), n(rng), n(rng));
    while (v.norm() < 1e-8) v = Vec3(n(rng), n(rng), n(rng));
    return v.normalized();
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
    const Vec3 axis = random_unit(rng);
    std::uniform_real_distribution<double> angle(0.0, 2 * M_PI);
    return Eigen::AngleAxisd(angle(rng), axis).toRotationMatrix();
}

inline void append_mesh(SimplexMesh& dst, const SimplexMesh& src, const Eigen::Matrix3d& rot,
                        const Vec3& shift, double scale) {
    const auto base = std::int32_t(dst.vertices.size());
    for (const Vec3& v : src.vertices) dst.vertices.push_back(rot * (scale * v) + shift);
    for (Simplex s : src.simplices) {
        for (int k = 0; k < s.nverts(); ++k) s.v[k] += base;
        dst.simplices.push_back(s);
    }
}

} // namespace detail

// Triangle strip of n >= 2 triangles between two jittered rails.
inline SimplexMesh triangle_strip(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> off(-0.15, 0.15);
    SimplexMesh mesh;
    const int cols = (n + 1) / 2 + 1;
    for (int i = 0; i < cols; ++i) {
        mesh.vertices.push_back(Vec3(i * 0.4 + off(rng), off(rng), off(rng)));
        mesh.vertices.push_back(Vec3(i * 0.4 + off(rng), 0.4 + off(rng), off(rng)));
    }
    for (int k = 0; k < n; ++k) {
        const std::int32_t i = k / 2;
        if (k % 2 == 0)
            mesh.simplices.push_back(Simplex::triangle(2 * i, 2 * i + 2, 2 * i + 1));
        else
            mesh.simplices.push_back(Simplex::triangle(2 * i + 2, 2 * i + 3, 2 * i + 1));
    }
    return mesh;
}

// Fan of k >= 2 triangles around a central vertex (valence k at the center).
inline SimplexMesh triangle_fan(int k, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> rad(0.3, 0.6), lift(-0.1, 0.1);
    SimplexMesh mesh;
    mesh.vertices.push_back(Vec3(0, 0, 0));
    for (int i = 0; i <= k; ++i) {
        const double a = M_PI * 1.6 * i / k;
        const double r = rad(rng);
        mesh.vertices.push_back(Vec3(r * std::cos(a), r * std::sin(a), lift(rng)));
    }
    for (int i = 1; i <= k; ++i) mesh.simplices.push_back(Simplex::triangle(0, i, i + 1));
    return mesh;
}

// Random open polyline of n edges.
inline SimplexMesh polyline(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> step(0.1, 0.35);
    SimplexMesh mesh;
    Vec3 p(0, 0, 0);
    mesh.vertices.push_back(p);
    for (int i = 0; i < n; ++i) {
        p += step(rng) * detail::random_unit(rng);
        mesh.vertices.push_back(p);
        mesh.simplices.push_back(Simplex::edge(i, i + 1));
    }
    return mesh;
}

inline SimplexMesh point_cluster(int n, std::mt19937_64& rng, double spread = 0.4) {
    std::uniform_real_distribution<double> u(-spread, spread);
    SimplexMesh mesh;
    for (int i = 0; i < n; ++i) {
        mesh.vertices.push_back(Vec3(u(rng), u(rng), u(rng)));
        mesh.simplices.push_back(Simplex::point(i));
    }
    return mesh;
}

// Mixed random scene: 1-4 pieces with block-disjoint vertex ranges, random
// rigid placement, at most max_prims primitives total.
inline SimplexMesh random_scene(std::uint64_t seed, int max_prims = 200) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> npieces(1, 4), kind(0, 4);
    std::uniform_real_distribution<double> scale(0.5, 1.5), place(-1.0, 1.0);

    SimplexMesh mesh;
    const int pieces = npieces(rng);
    for (int p = 0; p < pieces; ++p) {
        const int budget = max_prims - int(mesh.num_simplices());
        if (budget < 2) break;
        SimplexMesh piece;
        switch (kind(rng)) {
            case 0:
                piece = triangle_strip(std::uniform_int_distribution<int>(2, std::min(40, budget))(rng), rng);
                break;
            case 1:
                piece = triangle_fan(std::uniform_int_distribution<int>(2, std::min(8, budget))(rng), rng);
                break;
            case 2: {
                const int nx = std::uniform_int_distribution<int>(2, 5)(rng);
                const int ny = std::uniform_int_distribution<int>(2, 5)(rng);
                if (2 * (nx - 1) * (ny - 1) > budget) {
                    piece = triangle_strip(2, rng);
                } else {
                    piece = grid_patch(nx, ny, 1.0, 0.15, rng());
                }
                break;
            }
            case 3:
                piece = polyline(std::uniform_int_distribution<int>(1, std::min(30, budget))(rng), rng);
                break;
            default:
                piece = point_cluster(std::uniform_int_distribution<int>(1, std::min(30, budget))(rng), rng);
                break;
        }
        detail::append_mesh(mesh, piece, detail::random_rotation(rng),
                            Vec3(place(rng), place(rng), place(rng)), scale(rng));
    }
    if (mesh.num_simplices() == 0) {
        mesh = point_cluster(4, rng);
    }
    return mesh;
}

// Random query simplex of a random kind inside an inflated scene box.
inline SimplexGeom random_query(std::mt19937_64& rng, const Aabb& box, double size_scale = 0.3) {
    std::uniform_int_distribution<int> kind(0, 2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Vec3 lo = box.lo - 0.5 * box.extent().cwiseMax(0.2);
    const Vec3 hi = box.hi + 0.5 * box.extent().cwiseMax(0.2);
    auto sample = [&] {
        return Vec3(lo.x() + u(rng) * (hi.x() - lo.x()), lo.y() + u(rng) * (hi.y() - lo.y()),
                    lo.z() + u(rng) * (hi.z() - lo.z()));
    };
    const Vec3 a = sample();
    switch (kind(rng)) {
        case 0:
            return SimplexGeom::point(a);
        case 1:
            return SimplexGeom::edge(a, a + size_scale * detail::random_unit(rng));
        default: {
            const Vec3 e1 = size_scale * detail::random_unit(rng);
            Vec3 e2 = size_scale * detail::random_unit(rng);
            while (e1.cross(e2).norm() < 1e-6) e2 = size_scale * detail::random_unit(rng);
            return SimplexGeom::triangle(a, a + e1, a + e2);
        }
    }
}

// V-shaped bowl in the z = 0 plane: apex at the origin, straight walls up to
// (+-width/2, height), and flat horizontal wings beyond the rim. Built as an
// edge mesh so the 3D evaluator is reused unmodified by the 2D demo.
inline SimplexMesh v_bowl(double width, double height, double wing = 0.75, int wall_segs = 32,
                          int wing_segs = 8) {
    SimplexMesh mesh;
    auto add_chain = [&](const Vec3& a, const Vec3& b, int segs) {
        const auto base = std::int32_t(mesh.vertices.size());
        for (int i = 0; i <= segs; ++i) mesh.vertices.push_back(a + (b - a) * (double(i) / segs));
        for (int i = 0; i < segs; ++i) mesh.simplices.push_back(Simplex::edge(base + i, base + i + 1));
    };
    const double hw = width / 2;
    add_chain(Vec3(-hw - wing, height, 0), Vec3(-hw, height, 0), wing_segs);
    add_chain(Vec3(-hw, height, 0), Vec3(0, 0, 0), wall_segs);
    add_chain(Vec3(0, 0, 0), Vec3(hw, height, 0), wall_segs);
    add_chain(Vec3(hw, height, 0), Vec3(hw + wing, height, 0), wing_segs);
    return mesh;
}

} // namespace smoothdist::shapes
