#include <smoothdist/demo.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace smoothdist;

namespace {

double max_x(const std::vector<DemoRow>& rows) {
    double m = -std::numeric_limits<double>::infinity();
    for (const DemoRow& r : rows) m = std::max(m, r.position.x());
    return m;
}

Vec3 last_velocity(const std::vector<DemoRow>& rows, double h) {
    const std::size_t n = rows.size();
    return (rows[n - 1].position - rows[n - 2].position) / h;
}

} // namespace

TEST(DemoScenario, ConstructionMatchesBowlGeometry) {
    const DemoScenario shallow = make_scenario("shallow");
    EXPECT_EQ(shallow.name, "shallow");
    EXPECT_LE((shallow.start - Vec3(-0.375, 0.75, 0)).norm(), 1e-12);
    EXPECT_NEAR(shallow.params.alpha, 35.5, 0.1);  // 1 / (wall length / 32)
    EXPECT_DOUBLE_EQ(shallow.params.beta, 0.0);
    EXPECT_DOUBLE_EQ(shallow.gap, 1e-4);

    const DemoScenario deep = make_scenario("deep");
    EXPECT_LE((deep.start - Vec3(-0.125, 1.75, 0)).norm(), 1e-12);
    EXPECT_NEAR(deep.params.alpha, 21.0, 0.1);

    EXPECT_THROW(make_scenario("nope"), std::runtime_error);
}

TEST(DemoScenario, InsidePolygonParity) {
    const DemoScenario sc = make_scenario("shallow");
    EXPECT_TRUE(inside_polygon(sc.sign_poly, 0.0, -0.5));   // under the apex: solid
    EXPECT_FALSE(inside_polygon(sc.sign_poly, 0.0, 0.1));   // inside the V: air
    EXPECT_FALSE(inside_polygon(sc.sign_poly, 0.0, 2.0));   // far above
    EXPECT_FALSE(inside_polygon(sc.sign_poly, 2.0, 1.0));   // beyond the wings
    EXPECT_FALSE(inside_polygon(sc.sign_poly, -1.6, -0.5)); // left of the block
}

TEST(DemoStep, FreeFallFastPathIsExact) {
    const DemoScenario sc = make_scenario("shallow");
    EvalScratch scratch;
    DemoState state;
    state.position = Vec3(0.0, 2.0, 0.0);  // far above the bowl

    const StepOutcome out = demo_step(sc, ConstraintMode::Smooth, state, scratch);
    const Vec3 expected =
        state.position + state.h * state.velocity + state.h * state.h * state.gravity;
    EXPECT_EQ(out.state.position, expected);
    EXPECT_EQ(out.state.velocity, state.h * state.gravity);
    EXPECT_EQ(out.iterations, 0);
    EXPECT_EQ(out.rejections, 0);
    EXPECT_FALSE(out.frozen);
}

TEST(DemoStep, FreeFallDissipatesFixedEnergyPerStep) {
    const DemoScenario sc = make_scenario("shallow");
    EvalScratch scratch;
    DemoState state;
    state.position = Vec3(0.0, 3.0, 0.0);

    auto energy = [&](const DemoState& s) {
        return 0.5 * s.velocity.squaredNorm() - s.gravity.dot(s.position);
    };
    const double drop = 0.5 * state.h * state.h * state.gravity.squaredNorm();
    double prev = energy(state);
    for (int k = 0; k < 10; ++k) {
        const StepOutcome out = demo_step(sc, ConstraintMode::Smooth, state, scratch);
        ASSERT_EQ(out.iterations, 0);  // still in free fall
        state = out.state;
        const double now = energy(state);
        EXPECT_NEAR(prev - now, drop, 1e-9 * drop);
        prev = now;
    }
}

TEST(DemoRun, ZeroStepsEmitsInitialRowOnly) {
    const DemoScenario sc = make_scenario("shallow");
    const auto rows = run_demo(sc, ConstraintMode::Smooth, 0);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].t, 0.0);
    EXPECT_EQ(rows[0].position, sc.start);
    EXPECT_EQ(rows[0].iterations, 0);
    EXPECT_GT(rows[0].constraint, 0.0);
}

TEST(DemoRun, StaysFeasibleAndInPlane) {
    for (const char* name : {"shallow", "deep"}) {
        const DemoScenario sc = make_scenario(name);
        const auto rows = run_demo(sc, ConstraintMode::Smooth, 500);
        ASSERT_EQ(rows.size(), 501u);
        for (const DemoRow& r : rows) {
            EXPECT_GE(r.constraint, -1e-12) << name << " t=" << r.t;
            EXPECT_EQ(r.position.z(), 0.0) << name << " t=" << r.t;
        }
    }
}

TEST(DemoRun, ShallowBowlSettlesAtTheBottom) {
    const DemoScenario sc = make_scenario("shallow");
    const double h = 1.0 / 200.0;
    const auto rows = run_demo(sc, ConstraintMode::Smooth, 1200, h);
    ASSERT_EQ(rows.size(), 1201u);

    const Vec3 p = rows.back().position;
    EXPECT_LT(std::abs(p.x()), 0.05);
    EXPECT_GT(p.y(), 0.0);
    EXPECT_LT(p.y(), 0.2);  // smooth field rests slightly above the apex
    EXPECT_LT(last_velocity(rows, h).norm(), 1e-2);
}

// The deep bowl separates the two constraint modes: the smoothed field fills
// in the narrow V, so the mass swings across the centerline and comes to
// rest suspended well above the apex; the exact signed distance pins it to
// the wall it first touches, where repeated line-search failures freeze it.
TEST(DemoRun, DeepBowlSeparatesSmoothFromExact) {
    const DemoScenario sc = make_scenario("deep");
    const double h = 1.0 / 200.0;

    const auto smooth = run_demo(sc, ConstraintMode::Smooth, 1000, h);
    EXPECT_GT(max_x(smooth), 0.05);          // crosses the centerline
    EXPECT_GT(smooth.back().position.y(), 0.3);  // rests high in the V
    EXPECT_LT(last_velocity(smooth, h).norm(), 1e-2);
    for (const DemoRow& r : smooth) EXPECT_GE(r.constraint, -1e-12);

    const auto exact = run_demo(sc, ConstraintMode::Exact, 800, h);
    EXPECT_LT(max_x(exact), 0.03);           // never makes it past the centerline
    EXPECT_LT(last_velocity(exact, h).norm(), 1e-6);  // frozen
}

TEST(DemoCsv, ShapeAndColumns) {
    const DemoScenario sc = make_scenario("shallow");
    const auto rows = run_demo(sc, ConstraintMode::Smooth, 5);
    const std::string path =
        (std::filesystem::temp_directory_path() / "demo_test.csv").string();
    write_demo_csv(rows, path);

    std::ifstream in(path);
    ASSERT_TRUE(bool(in));
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    ASSERT_EQ(lines.size(), 7u);
    EXPECT_EQ(lines[0], "t,px,py,pz,constraint,iterations");

    for (std::size_t k = 1; k < lines.size(); ++k) {
        std::stringstream ss(lines[k]);
        std::string fieldstr;
        std::vector<std::string> fields;
        while (std::getline(ss, fieldstr, ',')) fields.push_back(fieldstr);
        ASSERT_EQ(fields.size(), 6u) << lines[k];
        EXPECT_NEAR(std::stod(fields[0]), (k - 1) * (1.0 / 200.0), 1e-9);
        EXPECT_EQ(std::stod(fields[3]), 0.0);  // planar dynamics: pz stays 0
    }
}
