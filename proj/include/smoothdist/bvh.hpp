#pragma once

#include "exact.hpp"
#include "mesh.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>
#include <vector>

namespace smoothdist {

struct BvhNode {
    Aabb box;
    std::int32_t left = -1, right = -1;  // -1 on leaves
    std::int32_t primitive = -1;         // valid on leaves only
    std::int32_t count = 0;              // primitives beneath this node (n_B)
    double diameter = 0.0;               // |B|: box diagonal

    bool is_leaf() const { return left < 0; }
};

// Binary bounding volume hierarchy, one primitive per leaf. Built by
// longest-axis median splits on primitive centroids with primitive-index
// tie-breaks, so rebuilding the same mesh reproduces the same tree.
struct Bvh {
    std::vector<BvhNode> nodes;  // root at index 0 when non-empty

    bool empty() const { return nodes.empty(); }
    const BvhNode& root() const { return nodes[0]; }
};

inline Bvh build_bvh(const SimplexMesh& mesh) {
    Bvh bvh;
    const std::size_t n = mesh.num_simplices();
    if (n == 0) return bvh;

    std::vector<Aabb> boxes(n);
    std::vector<Vec3> centroids(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Simplex& s = mesh.simplices[i];
        const auto c = mesh.corners(s);
        for (int k = 0; k < s.nverts(); ++k) boxes[i].expand(c[k]);
        centroids[i] = boxes[i].center();
    }

    std::vector<std::int32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    bvh.nodes.reserve(2 * n - 1);

    // recursive split of order[first, last)
    auto build = [&](auto&& self, std::size_t first, std::size_t last) -> std::int32_t {
        const std::int32_t node_id = static_cast<std::int32_t>(bvh.nodes.size());
        bvh.nodes.emplace_back();
        if (last - first == 1) {
            BvhNode& leaf = bvh.nodes[node_id];
            leaf.primitive = order[first];
            leaf.count = 1;
            leaf.box = boxes[order[first]];
            leaf.diameter = leaf.box.diagonal();
            return node_id;
        }
        Aabb box;
        for (std::size_t i = first; i < last; ++i) box.expand(boxes[order[i]]);
        const Vec3 ext = box.extent();
        int axis = 0;
        if (ext.y() > ext.x()) axis = 1;
        if (ext.z() > ext[axis]) axis = 2;

        const std::size_t mid = first + (last - first) / 2;
        std::nth_element(order.begin() + first, order.begin() + mid, order.begin() + last,
                         [&](std::int32_t a, std::int32_t b) {
                             if (centroids[a][axis] != centroids[b][axis])
                                 return centroids[a][axis] < centroids[b][axis];
                             return a < b;
                         });
        const std::int32_t l = self(self, first, mid);
        const std::int32_t r = self(self, mid, last);
        BvhNode& node = bvh.nodes[node_id];
        node.left = l;
        node.right = r;
        node.count = bvh.nodes[l].count + bvh.nodes[r].count;
        node.box = bvh.nodes[l].box;
        node.box.expand(bvh.nodes[r].box);
        node.diameter = node.box.diagonal();
        return node_id;
    };
    build(build, 0, n);
    return bvh;
}

// Proximity of a query simplex to a box. distance is the exact distance from
// g to the solid box; y_b the closest point on the box; lambda the
// barycentric coordinates of the closest point on g. must_descend marks
// queries that straddle the box (no separating face plane), where the
// distance is 0 and the far-field expansion is never admissible.
struct BoxProximity {
    double distance = 0.0;
    Vec3 y_b = Vec3::Zero();
    Barycentric lambda;
    bool must_descend = false;
};

inline BoxProximity box_point_proximity(const Aabb& box, const Vec3& q) {
    BoxProximity r;
    r.y_b = box.closest_point(q);
    r.distance = (q - r.y_b).norm();
    r.lambda = Barycentric::for_point();
    return r;
}

// Classifies which box feature is nearest by counting the face halfspaces
// that contain g entirely: three -> a corner, two -> a box edge, one -> a
// face, zero -> the query straddles the box slab in every axis and we must
// descend. The identified feature is then handed to the exact simplex
// kernels, so the reported distance is the exact box distance and never
// exceeds the distance to any primitive inside the box.
inline BoxProximity box_primitive_proximity(const Aabb& box, const SimplexGeom& g) {
    if (g.dim == 0) return box_point_proximity(box, g.c[0]);

    int out_axis[3];  // +1: beyond hi, -1: below lo, 0: straddles
    int n_out = 0;
    for (int a = 0; a < 3; ++a) {
        out_axis[a] = 0;
        bool all_hi = true, all_lo = true;
        for (int k = 0; k <= g.dim; ++k) {
            all_hi = all_hi && g.c[k][a] >= box.hi[a];
            all_lo = all_lo && g.c[k][a] <= box.lo[a];
        }
        if (all_hi) out_axis[a] = 1, ++n_out;
        else if (all_lo) out_axis[a] = -1, ++n_out;
    }

    BoxProximity r;
    if (n_out == 0) {
        r.must_descend = true;
        r.y_b = box.center();
        return r;
    }

    auto side_coord = [&](int a) { return out_axis[a] > 0 ? box.hi[a] : box.lo[a]; };
    auto eval_feature = [&](const SimplexGeom& feature) {
        const ClosestPair p = simplex_distance(feature, g);
        r.distance = p.distance;
        r.y_b = p.point_f;
        r.lambda = p.lambda;
    };

    if (n_out == 3) {
        eval_feature(SimplexGeom::point(Vec3(side_coord(0), side_coord(1), side_coord(2))));
    } else if (n_out == 2) {
        // box edge running along the one straddled axis
        int free_axis = 0;
        while (out_axis[free_axis] != 0) ++free_axis;
        Vec3 a, b;
        for (int ax = 0; ax < 3; ++ax) a[ax] = b[ax] = out_axis[ax] != 0 ? side_coord(ax) : 0.0;
        a[free_axis] = box.lo[free_axis];
        b[free_axis] = box.hi[free_axis];
        eval_feature(SimplexGeom::edge(a, b));
    } else {
        // box face: the rectangle on the separating plane, split in two
        int face_axis = 0;
        while (out_axis[face_axis] == 0) ++face_axis;
        const int u = (face_axis + 1) % 3, v = (face_axis + 2) % 3;
        Vec3 r00, r10, r11, r01;
        r00[face_axis] = r10[face_axis] = r11[face_axis] = r01[face_axis] = side_coord(face_axis);
        r00[u] = box.lo[u], r00[v] = box.lo[v];
        r10[u] = box.hi[u], r10[v] = box.lo[v];
        r11[u] = box.hi[u], r11[v] = box.hi[v];
        r01[u] = box.lo[u], r01[v] = box.hi[v];
        const ClosestPair p1 = simplex_distance(SimplexGeom::triangle(r00, r10, r11), g);
        const ClosestPair p2 = simplex_distance(SimplexGeom::triangle(r00, r11, r01), g);
        const ClosestPair& p = p1.distance <= p2.distance ? p1 : p2;
        r.distance = p.distance;
        r.y_b = p.point_f;
        r.lambda = p.lambda;
    }
    return r;
}

// Barnes-Hut admissibility: the node is replaced by its far-field expansion
// when it subtends less than beta as seen from the query. beta = 0 disables
// the approximation entirely; contact (distance 0) always descends.
inline bool bh_condition(const BvhNode& node, const BoxProximity& prox, double beta) {
    return !prox.must_descend && prox.distance > 0.0 && node.diameter < beta * prox.distance;
}

// ---------------------------------------------------------------------------
// Binary cache (versioned; node array with leaf primitive indices).
// ---------------------------------------------------------------------------
namespace detail {
inline constexpr char kBvhCacheMagic[8] = {'S', 'D', 'B', 'V', '0', '0', '0', '1'};
}

inline void save_bvh_cache(const Bvh& bvh, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open " + path + " for writing");
    out.write(detail::kBvhCacheMagic, 8);
    const std::uint64_t n = bvh.nodes.size();
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    for (const BvhNode& node : bvh.nodes) {
        out.write(reinterpret_cast<const char*>(node.box.lo.data()), 3 * sizeof(double));
        out.write(reinterpret_cast<const char*>(node.box.hi.data()), 3 * sizeof(double));
        out.write(reinterpret_cast<const char*>(&node.left), sizeof(node.left));
        out.write(reinterpret_cast<const char*>(&node.right), sizeof(node.right));
        out.write(reinterpret_cast<const char*>(&node.primitive), sizeof(node.primitive));
        out.write(reinterpret_cast<const char*>(&node.count), sizeof(node.count));
        out.write(reinterpret_cast<const char*>(&node.diameter), sizeof(node.diameter));
    }
    if (!out) fail("write failed: " + path);
}

inline Bvh load_bvh_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, detail::kBvhCacheMagic, 8) != 0)
        fail(path + ": not a BVH cache (bad magic)");
    std::uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    Bvh bvh;
    bvh.nodes.resize(n);
    for (BvhNode& node : bvh.nodes) {
        in.read(reinterpret_cast<char*>(node.box.lo.data()), 3 * sizeof(double));
        in.read(reinterpret_cast<char*>(node.box.hi.data()), 3 * sizeof(double));
        in.read(reinterpret_cast<char*>(&node.left), sizeof(node.left));
        in.read(reinterpret_cast<char*>(&node.right), sizeof(node.right));
        in.read(reinterpret_cast<char*>(&node.primitive), sizeof(node.primitive));
        in.read(reinterpret_cast<char*>(&node.count), sizeof(node.count));
        in.read(reinterpret_cast<char*>(&node.diameter), sizeof(node.diameter));
    }
    if (!in) fail(path + ": truncated BVH cache");
    return bvh;
}

} // namespace smoothdist
