#pragma once

#include "common.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <vector>

namespace smoothdist {

// Simplex kinds are ordered by intrinsic dimension; a mesh may mix all three.
enum class SimplexKind : std::uint8_t { Point = 0, Edge = 1, Triangle = 2 };

struct Simplex {
    std::array<std::int32_t, 3> v{-1, -1, -1};
    SimplexKind kind = SimplexKind::Point;

    int dim() const { return static_cast<int>(kind); }
    int nverts() const { return dim() + 1; }

    static Simplex point(std::int32_t a) { return {{a, -1, -1}, SimplexKind::Point}; }
    static Simplex edge(std::int32_t a, std::int32_t b) { return {{a, b, -1}, SimplexKind::Edge}; }
    static Simplex triangle(std::int32_t a, std::int32_t b, std::int32_t c) {
        return {{a, b, c}, SimplexKind::Triangle};
    }
};

struct SimplexMesh {
    std::vector<Vec3> vertices;
    std::vector<Simplex> simplices;

    std::size_t num_vertices() const { return vertices.size(); }
    std::size_t num_simplices() const { return simplices.size(); }

    std::array<Vec3, 3> corners(const Simplex& s) const {
        std::array<Vec3, 3> c{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
        for (int i = 0; i < s.nverts(); ++i) c[i] = vertices[s.v[i]];
        return c;
    }
    std::array<Vec3, 3> corners(std::size_t i) const { return corners(simplices[i]); }

    std::size_t count(SimplexKind k) const {
        std::size_t n = 0;
        for (const auto& s : simplices) n += (s.kind == k);
        return n;
    }
};

// Throws on out-of-range indices and degenerate simplices (repeated indices,
// exactly coincident corner positions). Near-degenerate geometry is allowed;
// the distance kernels handle it.
inline void validate(const SimplexMesh& mesh) {
    const auto n = static_cast<std::int32_t>(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.simplices.size(); ++i) {
        const Simplex& s = mesh.simplices[i];
        const int nv = s.nverts();
        for (int a = 0; a < nv; ++a) {
            if (s.v[a] < 0 || s.v[a] >= n) {
                std::ostringstream os;
                os << "simplex " << i << ": vertex index " << s.v[a] << " out of range [0, " << n << ")";
                fail(os.str());
            }
        }
        for (int a = 0; a < nv; ++a) {
            for (int b = a + 1; b < nv; ++b) {
                if (s.v[a] == s.v[b] || mesh.vertices[s.v[a]] == mesh.vertices[s.v[b]]) {
                    std::ostringstream os;
                    os << "degenerate simplex " << i << ": indices";
                    for (int c = 0; c < nv; ++c) os << ' ' << s.v[c];
                    fail(os.str());
                }
            }
        }
        if (s.kind == SimplexKind::Triangle) {
            const auto c = mesh.corners(s);
            if ((c[1] - c[0]).cross(c[2] - c[0]).norm() == 0.0) {
                std::ostringstream os;
                os << "degenerate simplex " << i << ": indices " << s.v[0] << ' ' << s.v[1] << ' '
                   << s.v[2] << " (zero area)";
                fail(os.str());
            }
        }
    }
}

inline Aabb bounding_box(const SimplexMesh& mesh) {
    Aabb box;
    for (const auto& p : mesh.vertices) box.expand(p);
    return box;
}

// Shortest edge over edge simplices and triangle borders; empty for meshes
// with no edges (pure point clouds).
inline std::optional<double> min_edge_length(const SimplexMesh& mesh) {
    double best = std::numeric_limits<double>::infinity();
    bool any = false;
    for (const auto& s : mesh.simplices) {
        const int nv = s.nverts();
        if (nv < 2) continue;
        const auto c = mesh.corners(s);
        for (int a = 0; a < nv; ++a) {
            for (int b = a + 1; b < nv; ++b) {
                best = std::min(best, (c[a] - c[b]).norm());
                any = true;
            }
        }
    }
    if (!any) return std::nullopt;
    return best;
}

// Similarity transform q -> scale*q + offset, as applied by the benchmark
// normalization.
struct FrameTransform {
    double scale = 1.0;
    Vec3 offset = Vec3::Zero();
    Vec3 apply(const Vec3& p) const { return scale * p + offset; }
};

// Rescales the mesh so its bounding box is centered at (0.5, 0.5, 0.5) with
// diagonal 0.5 (the frame used by the grid benchmark). Degenerate bounding
// boxes are translated only. Idempotent up to roundoff.
inline FrameTransform normalize_to_benchmark_frame(SimplexMesh& mesh) {
    const Aabb box = bounding_box(mesh);
    if (!box.valid()) return {};
    const double diag = box.diagonal();
    FrameTransform t;
    t.scale = diag > 0.0 ? 0.5 / diag : 1.0;
    t.offset = Vec3::Constant(0.5) - t.scale * box.center();
    for (auto& p : mesh.vertices) p = t.apply(p);
    return t;
}

namespace detail {
inline std::uint64_t pack_edge_key(std::int32_t a, std::int32_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}
} // namespace detail

// Incidence data for valence lookups and query-mesh one-rings.
//
// vertex_valence counts incident non-point simplices (the |N_k| of the weight
// construction; in mixed meshes edges and triangles both count). one_ring
// lists every incident simplex including points, which is what the outer
// mesh-to-mesh sum needs: each simplex appears in exactly nverts() rings.
struct Adjacency {
    std::vector<std::int32_t> vertex_valence;
    std::vector<std::vector<std::int32_t>> one_ring;
    std::unordered_map<std::uint64_t, std::int32_t> edge_count;

    // Number of non-point simplices containing the undirected edge (a, b).
    std::int32_t edge_valence(std::int32_t a, std::int32_t b) const {
        auto it = edge_count.find(detail::pack_edge_key(a, b));
        return it == edge_count.end() ? 0 : it->second;
    }
};

inline Adjacency build_adjacency(const SimplexMesh& mesh) {
    Adjacency adj;
    adj.vertex_valence.assign(mesh.num_vertices(), 0);
    adj.one_ring.resize(mesh.num_vertices());
    for (std::size_t i = 0; i < mesh.simplices.size(); ++i) {
        const Simplex& s = mesh.simplices[i];
        const int nv = s.nverts();
        for (int a = 0; a < nv; ++a) {
            adj.one_ring[s.v[a]].push_back(static_cast<std::int32_t>(i));
            if (nv > 1) adj.vertex_valence[s.v[a]]++;
        }
        if (nv == 2) {
            adj.edge_count[detail::pack_edge_key(s.v[0], s.v[1])]++;
        } else if (nv == 3) {
            adj.edge_count[detail::pack_edge_key(s.v[0], s.v[1])]++;
            adj.edge_count[detail::pack_edge_key(s.v[1], s.v[2])]++;
            adj.edge_count[detail::pack_edge_key(s.v[2], s.v[0])]++;
        }
    }
    return adj;
}

} // namespace smoothdist
