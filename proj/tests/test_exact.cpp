#include <smoothdist/exact.hpp>
#include <smoothdist/shapes.hpp>

#include <gtest/gtest.h>

#include <random>
#include <vector>

using namespace smoothdist;

namespace {

SimplexGeom translated(const SimplexGeom& g, const Vec3& d) {
    SimplexGeom out = g;
    for (int k = 0; k <= g.dim; ++k) out.c[k] += d;
    return out;
}

SimplexGeom random_simplex(std::mt19937_64& rng) {
    Aabb box;
    box.expand(Vec3(-1, -1, -1));
    box.expand(Vec3(1, 1, 1));
    return shapes::random_query(rng, box, 0.6);
}

// Minimum over edge samples of the closed-form point-to-simplex distance.
// The map t -> d(edge(t), f) is Lipschitz with the edge length, so the grid
// minimum overshoots the true minimum by at most len / (2 n).
double sampled_edge_distance(const SimplexGeom& f, const Vec3& a, const Vec3& b, int n) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        const Vec3 p = a + (double(i) / n) * (b - a);
        best = std::min(best, point_simplex_distance(f, p).distance);
    }
    return best;
}

// Global minimum over x in triangle g of d(x, f): the objective is convex
// (distance to a convex set), so coarse-grid seeding plus compass refinement
// converges to the global optimum.
double refined_triangle_distance(const SimplexGeom& f, const SimplexGeom& g) {
    constexpr int N = 64;
    double bu = 0, bv = 0, best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= N; ++i) {
        for (int j = 0; j + i <= N; ++j) {
            const double u = double(i) / N, v = double(j) / N;
            const double d = point_simplex_distance(f, g.at(Barycentric::for_triangle(u, v))).distance;
            if (d < best) best = d, bu = u, bv = v;
        }
    }
    double step = 1.0 / N;
    while (step > 1e-12) {
        bool moved = false;
        const double cand[4][2] = {{bu + step, bv}, {bu - step, bv}, {bu, bv + step}, {bu, bv - step}};
        for (const auto& c : cand) {
            if (c[0] < 0 || c[1] < 0 || c[0] + c[1] > 1) continue;
            const double d =
                point_simplex_distance(f, g.at(Barycentric::for_triangle(c[0], c[1]))).distance;
            if (d < best) best = d, bu = c[0], bv = c[1], moved = true;
        }
        if (!moved) step *= 0.5;
    }
    return best;
}

} // namespace

TEST(ExactDist, PointPointExample) {
    const SimplexGeom f = SimplexGeom::point(Vec3(3, 4, 0));
    const SimplexGeom g = SimplexGeom::point(Vec3(0, 0, 0));
    const ClosestPair r = simplex_distance(f, g);
    EXPECT_DOUBLE_EQ(r.distance, 5.0);
    EXPECT_NEAR(r.grad.x(), -3.0 / 5.0, 1e-15);
    EXPECT_NEAR(r.grad.y(), -4.0 / 5.0, 1e-15);
    EXPECT_DOUBLE_EQ(r.grad.z(), 0.0);
    EXPECT_NEAR((r.point_f - Vec3(3, 4, 0)).norm(), 0.0, 0.0);
}

TEST(ExactDist, EdgeEndpointClamp) {
    const SimplexGeom f = SimplexGeom::edge(Vec3(0, 0, 0), Vec3(1, 0, 0));
    const ClosestPair r = point_simplex_distance(f, Vec3(2, 1, 0));
    EXPECT_DOUBLE_EQ(r.distance, std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(r.phi.c[0], 1.0);
    EXPECT_NEAR((r.point_f - Vec3(1, 0, 0)).norm(), 0.0, 0.0);
}

TEST(ExactDist, EdgeInteriorProjection) {
    const SimplexGeom f = SimplexGeom::edge(Vec3(0, 0, 0), Vec3(1, 0, 0));
    const ClosestPair r = point_simplex_distance(f, Vec3(0.25, 2, 0));
    EXPECT_DOUBLE_EQ(r.distance, 2.0);
    EXPECT_DOUBLE_EQ(r.phi.c[0], 0.25);
    EXPECT_NEAR((r.grad - Vec3(0, 1, 0)).norm(), 0.0, 1e-15);
}

TEST(ExactDist, TriangleVoronoiRegions) {
    const SimplexGeom f =
        SimplexGeom::triangle(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0));

    const ClosestPair interior = point_simplex_distance(f, Vec3(0.25, 0.25, 3));
    EXPECT_DOUBLE_EQ(interior.distance, 3.0);
    EXPECT_DOUBLE_EQ(interior.phi.c[0], 0.25);
    EXPECT_DOUBLE_EQ(interior.phi.c[1], 0.25);

    const ClosestPair vertex = point_simplex_distance(f, Vec3(-1, -1, 0));
    EXPECT_DOUBLE_EQ(vertex.distance, std::sqrt(2.0));
    EXPECT_NEAR((vertex.point_f - Vec3(0, 0, 0)).norm(), 0.0, 0.0);

    // beyond the hypotenuse: closest point is its midpoint
    const ClosestPair edge = point_simplex_distance(f, Vec3(1, 1, 0));
    EXPECT_DOUBLE_EQ(edge.distance, std::sqrt(0.5));
    EXPECT_NEAR((edge.point_f - Vec3(0.5, 0.5, 0)).norm(), 0.0, 1e-15);
}

TEST(ExactDist, SymmetryUnderArgumentSwap) {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 300; ++trial) {
        const SimplexGeom f = random_simplex(rng);
        const SimplexGeom g = random_simplex(rng);
        const double dfg = simplex_distance(f, g).distance;
        const double dgf = simplex_distance(g, f).distance;
        EXPECT_NEAR(dfg, dgf, 1e-6 * (1.0 + dfg)) << "trial " << trial;
    }
}

TEST(ExactDist, QpMatchesClosedForms) {
    std::mt19937_64 rng(202);
    int used = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const SimplexGeom f = random_simplex(rng);
        const SimplexGeom g = random_simplex(rng);
        if (f.dim == 2 && g.dim == 2) continue;  // no closed form to compare
        const double closed = simplex_distance(f, g).distance;
        const double qp = simplex_distance_qp(f, g).distance;
        EXPECT_NEAR(qp, closed, 1e-6 * (1.0 + closed)) << "trial " << trial;
        ++used;
    }
    EXPECT_GT(used, 300);
}

TEST(ExactDist, GradientMatchesCentralDifference) {
    std::mt19937_64 rng(303);
    const double h = 1e-6;
    int used = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const SimplexGeom f = random_simplex(rng);
        const SimplexGeom g = random_simplex(rng);
        const ClosestPair r = simplex_distance(f, g);
        if (r.distance < 1e-3) continue;
        for (int axis = 0; axis < 3; ++axis) {
            Vec3 dv = Vec3::Zero();
            dv[axis] = h;
            const double dp = simplex_distance(f, translated(g, dv)).distance;
            const double dm = simplex_distance(f, translated(g, -dv)).distance;
            const double fd = (dp - dm) / (2 * h);
            EXPECT_NEAR(fd, r.grad[axis], 1e-4 * std::max(1.0, std::abs(r.grad[axis])))
                << "trial " << trial << " axis " << axis;
        }
        ++used;
    }
    EXPECT_GT(used, 250);
}

TEST(ExactDist, ClosestPointsAreConsistent) {
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 300; ++trial) {
        const SimplexGeom f = random_simplex(rng);
        const SimplexGeom g = random_simplex(rng);
        const ClosestPair r = simplex_distance(f, g);
        EXPECT_NEAR((r.point_g - r.point_f).norm(), r.distance, 1e-12 * (1.0 + r.distance));
        EXPECT_NEAR((f.at(r.phi) - r.point_f).norm(), 0.0, 1e-12);
        EXPECT_NEAR((g.at(r.lambda) - r.point_g).norm(), 0.0, 1e-12);
        if (r.distance > 0.0) {
            EXPECT_NEAR((r.grad * r.distance - (r.point_g - r.point_f)).norm(), 0.0,
                        1e-9 * (1.0 + r.distance));
        } else {
            EXPECT_NEAR(r.grad.norm(), 0.0, 0.0);
        }
    }
}

TEST(ExactDist, EdgeTriangleAgainstDenseSampling) {
    const SimplexGeom tri =
        SimplexGeom::triangle(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.2, 0.9, 0.1));
    const Vec3 a(-0.4, 0.5, 0.8), b(1.3, -0.2, 0.4);
    const SimplexGeom edge = SimplexGeom::edge(a, b);

    const double exact = simplex_distance(tri, edge).distance;
    const double sampled = sampled_edge_distance(tri, a, b, 1000000);
    EXPECT_LE(exact, sampled + 1e-12);
    EXPECT_NEAR(exact, sampled, 1e-4);

    std::mt19937_64 rng(505);
    for (int trial = 0; trial < 12; ++trial) {
        SimplexGeom f = random_simplex(rng);
        SimplexGeom g = random_simplex(rng);
        if (f.dim != 2) continue;
        if (g.dim != 1) g = SimplexGeom::edge(g.c[0], g.c[0] + Vec3(0.5, 0.3, -0.4));
        const double d = simplex_distance(f, g).distance;
        const double s = sampled_edge_distance(f, g.c[0], g.c[1], 200000);
        EXPECT_LE(d, s + 1e-12) << "trial " << trial;
        EXPECT_NEAR(d, s, 1e-4) << "trial " << trial;
    }
}

TEST(ExactDist, TriangleTriangleAgainstConvexRefinement) {
    std::mt19937_64 rng(606);
    int used = 0;
    while (used < 10) {
        const SimplexGeom f = random_simplex(rng);
        const SimplexGeom g = random_simplex(rng);
        if (f.dim != 2 || g.dim != 2) continue;
        const double exact = simplex_distance(f, g).distance;
        const double refined = refined_triangle_distance(f, g);
        EXPECT_LE(exact, refined + 1e-9) << "trial " << used;
        EXPECT_NEAR(exact, refined, 1e-6 * (1.0 + exact)) << "trial " << used;
        ++used;
    }
}

TEST(ExactDist, ParallelEdgesResolveDeterministically) {
    const SimplexGeom f = SimplexGeom::edge(Vec3(0, 0, 0), Vec3(1, 0, 0));
    const SimplexGeom g = SimplexGeom::edge(Vec3(0, 1, 0), Vec3(1, 1, 0));
    const ClosestPair r = simplex_distance(f, g);
    EXPECT_DOUBLE_EQ(r.distance, 1.0);
    EXPECT_DOUBLE_EQ(r.phi.c[0], 0.0);  // parallel tie resolves to the smallest s
    EXPECT_DOUBLE_EQ(r.lambda.c[0], 0.0);

    const SimplexGeom rev = SimplexGeom::edge(Vec3(1, 1, 0), Vec3(0, 1, 0));
    EXPECT_DOUBLE_EQ(simplex_distance(f, rev).distance, 1.0);
}

TEST(ExactDist, ContactAndOverlap) {
    const SimplexGeom tri =
        SimplexGeom::triangle(Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(0, 2, 0));

    // point sitting on the triangle surface
    const ClosestPair on = point_simplex_distance(tri, Vec3(0.5, 0.5, 0));
    EXPECT_DOUBLE_EQ(on.distance, 0.0);
    EXPECT_DOUBLE_EQ(on.grad.norm(), 0.0);

    // edge piercing the triangle interior
    const SimplexGeom pierce = SimplexGeom::edge(Vec3(0.5, 0.5, -1), Vec3(0.5, 0.5, 1));
    EXPECT_NEAR(simplex_distance(tri, pierce).distance, 0.0, 1e-12);

    // an edge against itself
    const SimplexGeom e = SimplexGeom::edge(Vec3(0, 0, 0), Vec3(1, 2, 3));
    const ClosestPair self = simplex_distance(e, e);
    EXPECT_DOUBLE_EQ(self.distance, 0.0);
    EXPECT_DOUBLE_EQ(self.grad.norm(), 0.0);
}

TEST(ExactDist, CoplanarParallelTrianglePair) {
    const SimplexGeom f =
        SimplexGeom::triangle(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0));
    const SimplexGeom g =
        SimplexGeom::triangle(Vec3(0, 0, 0.5), Vec3(1, 0, 0.5), Vec3(0, 1, 0.5));
    const ClosestPair r = simplex_distance(f, g);
    EXPECT_NEAR(r.distance, 0.5, 1e-12);
    EXPECT_NEAR(std::abs(r.grad.z()), 1.0, 1e-12);
}

TEST(ExactDist, BruteForceMinimumOverMesh) {
    SimplexMesh mesh;
    mesh.vertices = {Vec3(0, 0, 0), Vec3(10, 0, 0), Vec3(10, 1, 0)};
    mesh.simplices = {Simplex::point(0), Simplex::edge(1, 2)};

    const ExactMinResult near_point = exact_min_distance(mesh, Vec3(1, 0, 0));
    EXPECT_EQ(near_point.argmin, 0u);
    EXPECT_DOUBLE_EQ(near_point.distance, 1.0);

    const ExactMinResult near_edge = exact_min_distance(mesh, Vec3(9, 0.5, 0));
    EXPECT_EQ(near_edge.argmin, 1u);
    EXPECT_DOUBLE_EQ(near_edge.distance, 1.0);
    EXPECT_NEAR(near_edge.pair.distance, near_edge.distance, 0.0);

    // query simplex overload agrees with the point overload
    const ExactMinResult via_geom = exact_min_distance(mesh, SimplexGeom::point(Vec3(1, 0, 0)));
    EXPECT_DOUBLE_EQ(via_geom.distance, near_point.distance);
    EXPECT_EQ(via_geom.argmin, near_point.argmin);
}
