#include <smoothdist/shapes.hpp>
#include <smoothdist/smooth.hpp>
#include <smoothdist/weights.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

using namespace smoothdist;

namespace {

SimplexMesh straight_chain(int edges) {
    SimplexMesh mesh;
    for (int i = 0; i <= edges; ++i) mesh.vertices.push_back(Vec3(i, 0, 0));
    for (int i = 0; i < edges; ++i) mesh.simplices.push_back(Simplex::edge(i, i + 1));
    return mesh;
}

} // namespace

TEST(EdgeWeight, FrozenQuarticForValence22) {
    const EdgeWeightPoly p = build_edge_weight(2, 2);
    EXPECT_EQ(p.a[0], 0.5);
    EXPECT_EQ(p.a[1], 0.0);
    EXPECT_EQ(p.a[2], 8.0);
    EXPECT_EQ(p.a[3], -16.0);
    EXPECT_EQ(p.a[4], 8.0);
    // extrema over [0, 1]: peak 1 at the midpoint, endpoints at 1/2
    EXPECT_DOUBLE_EQ(p.sup, 1.0);
    EXPECT_DOUBLE_EQ(p.inf, 0.5);
}

TEST(EdgeWeight, IsolatedEdgeIsConstantOne) {
    const EdgeWeightPoly p = build_edge_weight(1, 1);
    EXPECT_EQ(p.a, (std::array<double, 5>{1, 0, 0, 0, 0}));
    EXPECT_DOUBLE_EQ(p.value(0.37), 1.0);
    EXPECT_DOUBLE_EQ(p.sup, 1.0);
    EXPECT_DOUBLE_EQ(p.inf, 1.0);
}

TEST(EdgeWeight, InterpolationConstraintsAllValences) {
    for (int v0 = 1; v0 <= 8; ++v0) {
        for (int v1 = 1; v1 <= 8; ++v1) {
            const EdgeWeightPoly p = build_edge_weight(v0, v1);
            EXPECT_NEAR(p.value(0.0), 1.0 / v0, 1e-12);
            EXPECT_NEAR(p.value(1.0), 1.0 / v1, 1e-12);
            EXPECT_NEAR(p.value(0.5), 1.0, 1e-12);
            EXPECT_NEAR(p.derivative(0.0), 0.0, 1e-12);
            EXPECT_NEAR(p.derivative(1.0), 0.0, 1e-12);
        }
    }
}

TEST(TriWeight, InterpolationTargets) {
    const TriWeightPoly p = build_tri_weight(6, 2);
    // vertices 1/v, edge thirds 1/e, barycenter (v-1)/v
    EXPECT_NEAR(p.value(0, 0), 1.0 / 6, 1e-7);
    EXPECT_NEAR(p.value(1, 0), 1.0 / 6, 1e-7);
    EXPECT_NEAR(p.value(0, 1), 1.0 / 6, 1e-7);
    EXPECT_NEAR(p.value(1.0 / 3, 0), 0.5, 1e-7);
    EXPECT_NEAR(p.value(2.0 / 3, 0), 0.5, 1e-7);
    EXPECT_NEAR(p.value(1.0 / 3, 2.0 / 3), 0.5, 1e-7);
    EXPECT_NEAR(p.value(1.0 / 3, 1.0 / 3), 5.0 / 6, 1e-7);
}

TEST(TriWeight, CoefficientGridIsExactlySymmetric) {
    for (auto [v, e] : {std::pair{2, 2}, {6, 2}, {4, 3}}) {
        const TriWeightPoly p = build_tri_weight(v, e);
        for (int j = 0; j <= 7; ++j)
            for (int k = 0; k <= 7; ++k) EXPECT_EQ(p.c[j][k], p.c[k][j]) << j << "," << k;
        EXPECT_NEAR(p.value(0.7, 0.1), p.value(0.1, 0.7), 1e-12);
    }
}

TEST(TriWeight, ZeroNormalDerivativeOnBoundary) {
    const TriWeightPoly p = build_tri_weight(6, 2);
    for (double t : {0.0, 0.2, 0.5, 0.9, 1.0}) {
        // x = 0 and y = 0 edges: the normal coefficient row is exactly zero
        EXPECT_EQ(p.deriv_x(0.0, t), 0.0);
        EXPECT_EQ(p.deriv_y(t, 0.0), 0.0);
        // hypotenuse: the normal derivative is (d/dx + d/dy) up to scale
        EXPECT_NEAR(p.deriv_x(t, 1.0 - t) + p.deriv_y(t, 1.0 - t), 0.0, 1e-6);
    }
}

TEST(TriWeight, SystemResidualSmallForAllValences) {
    for (int v = 1; v <= 8; ++v) {
        for (int e = 1; e <= 8; ++e) {
            const TriWeightPoly p = build_tri_weight(v, e);
            EXPECT_LT(p.residual, 1e-7) << "v=" << v << " e=" << e;
            EXPECT_GE(p.sup, p.inf);
        }
    }
}

TEST(WeightSet, BuildPicksValencesFromAdjacency) {
    // two triangles sharing an edge: shared vertices have valence 2
    SimplexMesh mesh;
    mesh.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)};
    mesh.simplices = {Simplex::triangle(0, 1, 2), Simplex::triangle(1, 3, 2)};
    const WeightSet ws = build_weight_set(mesh, build_adjacency(mesh));
    EXPECT_DOUBLE_EQ(ws.A, 2.0);
    ASSERT_EQ(ws.tri_polys.size(), 1u);  // both triangles share (v=2, e=2)
    EXPECT_EQ(ws.poly_index[0], ws.poly_index[1]);
    EXPECT_EQ(ws.tri_polys[0].vertex_valence, 2);
    EXPECT_EQ(ws.tri_polys[0].edge_valence, 2);
}

TEST(WeightSet, AttenuationExponentExamples) {
    SmoothParams params;
    params.alpha_u = 600.0;
    params.alpha = 600.0;
    EXPECT_DOUBLE_EQ(params.attenuation(), 1.0);
    params.alpha = 50.0;
    EXPECT_DOUBLE_EQ(params.attenuation(), 50.0 / 600.0);  // 1/12
    params.alpha = 1200.0;
    EXPECT_DOUBLE_EQ(params.attenuation(), 1.0);  // capped above alpha_u
}

TEST(WeightSet, AttenuatedWeightContinuousAcrossAlphaU) {
    SimplexMesh mesh = straight_chain(4);
    const WeightSet ws = build_weight_set(mesh, build_adjacency(mesh));
    SmoothParams lo, hi;
    lo.alpha_u = hi.alpha_u = 300.0;
    lo.alpha = 300.0 - 1e-9;
    hi.alpha = 300.0 + 1e-9;
    const Barycentric phi = Barycentric::for_edge(0.3);
    double wl, wh, gl[2], gh[2];
    evaluate_weight(mesh, ws, 1, phi, lo, wl, gl);
    evaluate_weight(mesh, ws, 1, phi, hi, wh, gh);
    EXPECT_NEAR(wl, wh, 1e-6);
    EXPECT_NEAR(ws.max_attenuated_weight(lo), ws.max_attenuated_weight(hi), 1e-6);
}

TEST(WeightSet, MaxAttenuatedWeightBound) {
    WeightSet ws;
    ws.A = 3.0;
    ws.sup_wtilde = 1.2;
    SmoothParams params;
    params.alpha = 300.0;
    params.alpha_u = 600.0;
    EXPECT_DOUBLE_EQ(ws.max_attenuated_weight(params), std::pow(3.6, 0.5));

    SimplexMesh cloud;
    cloud.vertices = {Vec3(0, 0, 0)};
    cloud.simplices = {Simplex::point(0)};
    const WeightSet unit = unit_weight_set(cloud);
    EXPECT_DOUBLE_EQ(unit.max_attenuated_weight(params), 1.0);
}

TEST(WeightSet, PointPrimitivesGetScaledUnitWeight) {
    // a fan of 5 triangles (center valence 5) plus a free-standing point
    std::mt19937_64 rng(42);
    SimplexMesh mesh = shapes::triangle_fan(5, rng);
    mesh.vertices.push_back(Vec3(9, 9, 9));
    mesh.simplices.push_back(Simplex::point(std::int32_t(mesh.num_vertices()) - 1));
    const WeightSet ws = build_weight_set(mesh, build_adjacency(mesh));
    EXPECT_DOUBLE_EQ(ws.A, 5.0);

    SmoothParams params;
    params.alpha = params.alpha_u = 100.0;  // S = 1
    double w, dw[2];
    evaluate_weight(mesh, ws, mesh.num_simplices() - 1, Barycentric::for_point(), params, w, dw);
    EXPECT_DOUBLE_EQ(w, 5.0);  // (A * 1)^1
    EXPECT_EQ(dw[0], 0.0);
    EXPECT_EQ(dw[1], 0.0);
}

TEST(WeightSet, FloorKeepsOutOfModelWeightsFinite) {
    SimplexMesh mesh;
    mesh.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    mesh.simplices = {Simplex::triangle(0, 1, 2)};
    TriWeightPoly negative;
    negative.stored[0] = -2.0;  // constant polynomial w~ = -2
    negative.expand();
    WeightSet ws;
    ws.A = 1.0;
    ws.tri_polys = {negative};
    ws.poly_index = {0};

    SmoothParams params;
    params.alpha = 100.0;
    params.alpha_u = 600.0;
    double w, dw[2];
    evaluate_weight(mesh, ws, 0, Barycentric::for_triangle(0.2, 0.3), params, w, dw);
    EXPECT_DOUBLE_EQ(w, std::pow(1e-300, params.attenuation()));
    EXPECT_EQ(dw[0], 0.0);
    EXPECT_EQ(dw[1], 0.0);
    EXPECT_TRUE(std::isfinite(w));
}

TEST(WeightSet, CacheRoundTripIsBitExact) {
    const SimplexMesh mesh = shapes::random_scene(9);
    const WeightSet ws = build_weight_set(mesh, build_adjacency(mesh));
    const auto path =
        (std::filesystem::temp_directory_path() / "weights_cache.bin").string();
    save_weight_cache(ws, path);
    const WeightSet back = load_weight_cache(path);

    EXPECT_EQ(back.A, ws.A);
    EXPECT_EQ(back.sup_wtilde, ws.sup_wtilde);
    EXPECT_EQ(back.poly_index, ws.poly_index);
    ASSERT_EQ(back.edge_polys.size(), ws.edge_polys.size());
    for (std::size_t i = 0; i < ws.edge_polys.size(); ++i) {
        EXPECT_EQ(back.edge_polys[i].a, ws.edge_polys[i].a);
        EXPECT_EQ(back.edge_polys[i].valence0, ws.edge_polys[i].valence0);
        EXPECT_EQ(back.edge_polys[i].sup, ws.edge_polys[i].sup);
        EXPECT_EQ(back.edge_polys[i].inf, ws.edge_polys[i].inf);
    }
    ASSERT_EQ(back.tri_polys.size(), ws.tri_polys.size());
    for (std::size_t i = 0; i < ws.tri_polys.size(); ++i) {
        EXPECT_EQ(back.tri_polys[i].stored, ws.tri_polys[i].stored);
        EXPECT_EQ(back.tri_polys[i].residual, ws.tri_polys[i].residual);
        EXPECT_EQ(back.tri_polys[i].c, ws.tri_polys[i].c);  // expanded grid rebuilt identically
    }
}

TEST(WeightSet, WorldGradientScalesInverselyWithAlpha) {
    SimplexMesh mesh = straight_chain(4);
    const WeightSet ws = build_weight_set(mesh, build_adjacency(mesh));
    SmoothParams a1, a2;
    a1.alpha = 600.0;
    a2.alpha = 1200.0;
    a1.alpha_u = a2.alpha_u = 600.0;  // S = 1 for both
    const Barycentric phi = Barycentric::for_edge(0.3);
    const Vec3 g1 = weight_gradient_world(mesh, ws, 1, phi, a1);
    const Vec3 g2 = weight_gradient_world(mesh, ws, 1, phi, a2);
    EXPECT_GT(g1.norm(), 0.0);
    EXPECT_NEAR((g1 - 2.0 * g2).norm(), 0.0, 1e-12 * g1.norm());

    // zero-Neumann construction: no gradient across shared vertices
    const Vec3 at_joint = weight_gradient_world(mesh, ws, 1, Barycentric::for_edge(0.0), a1);
    EXPECT_NEAR(at_joint.norm(), 0.0, 1e-12);
}

// The point of the construction: with unit weights the field sits closer to
// the true distance over primitive interiors than over shared vertices (the
// coinciding terms double up), so the offset d - d_hat varies along the mesh.
// The valence-aware weights equalize the offset.
TEST(WeightSet, OffsetUniformityAlongChain) {
    SimplexMesh mesh = straight_chain(4);
    const WeightSet weighted = build_weight_set(mesh, build_adjacency(mesh));
    const WeightSet unit = unit_weight_set(mesh);
    SmoothParams params;
    params.alpha = params.alpha_u = 40.0;
    params.beta = 0.0;

    const double y = 0.08;
    std::vector<double> probe_x = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5};
    double u_min = 1e300, u_max = -1e300, w_min = 1e300, w_max = -1e300;
    for (double x : probe_x) {
        const SimplexGeom q = SimplexGeom::point(Vec3(x, y, 0));
        const double err_u = y - smooth_min_dist_flat(mesh, unit, q, params).d_hat;
        const double err_w = y - smooth_min_dist_flat(mesh, weighted, q, params).d_hat;
        EXPECT_GE(err_w, -1e-12);  // still an underestimate
        u_min = std::min(u_min, err_u), u_max = std::max(u_max, err_u);
        w_min = std::min(w_min, err_w), w_max = std::max(w_max, err_w);
    }
    const double spread_unit = u_max - u_min;
    const double spread_weighted = w_max - w_min;
    EXPECT_LT(spread_weighted, 0.5 * spread_unit);
}
