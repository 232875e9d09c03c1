#pragma once

#include "shapes.hpp"
#include "smooth.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace smoothdist {

enum class ConstraintMode { Smooth, Exact };

inline const char* to_string(ConstraintMode m) {
    return m == ConstraintMode::Smooth ? "smooth" : "exact";
}

// A point mass dropped into a V-shaped bowl, confined to the z = 0 plane.
// The bowl is a 3D edge mesh so the full evaluator is reused unmodified.
struct DemoScenario {
    std::string name;
    SimplexMesh bowl;
    Bvh bvh;
    WeightSet weights;
    SmoothParams params;
    Vec3 start;
    // Bowl profile closed underneath into a polygon, used to give the exact
    // (otherwise unsigned) distance a sign via even-odd parity.
    std::vector<Eigen::Vector2d> sign_poly;
    // The stepper enforces distance >= gap rather than >= 0. The level set
    // {d = gap} is C1 (sharp corners become arcs of radius gap), so contact
    // can slide around a corner instead of dead-ending on the gradient jump,
    // and accepted states keep a strictly positive true clearance.
    double gap = 1e-4;
};

// Even-odd point-in-polygon test in the z = 0 plane.
inline bool inside_polygon(const std::vector<Eigen::Vector2d>& poly, double x, double y) {
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Eigen::Vector2d& a = poly[i];
        const Eigen::Vector2d& b = poly[j];
        if ((a.y() > y) != (b.y() > y) &&
            x < (b.x() - a.x()) * (y - a.y()) / (b.y() - a.y()) + a.x())
            inside = !inside;
    }
    return inside;
}

inline DemoScenario make_scenario(const std::string& name) {
    DemoScenario sc;
    sc.name = name;
    double width, height;
    if (name == "shallow") {
        width = 1.5;
        height = 0.5;
    } else if (name == "deep") {
        width = 0.5;
        height = 1.5;
    } else {
        fail("unknown demo scenario '" + name + "' (expected shallow or deep)");
    }
    sc.bowl = shapes::v_bowl(width, height);
    validate(sc.bowl);
    sc.bvh = build_bvh(sc.bowl);
    sc.weights = build_weight_set(sc.bowl, build_adjacency(sc.bowl));
    const AlphaChoice ac = alpha_heuristic(sc.bowl);
    sc.params.alpha = ac.alpha;
    sc.params.alpha_u = ac.alpha_u;
    sc.params.beta = 0.0;  // the bowl is small; exact traversal keeps dynamics smooth
    sc.start = Vec3(-width / 4.0, height + 0.25, 0.0);
    for (const Vec3& v : sc.bowl.vertices) sc.sign_poly.emplace_back(v.x(), v.y());
    const double floor_y = -1.0;
    sc.sign_poly.emplace_back(sc.sign_poly.back().x(), floor_y);
    sc.sign_poly.emplace_back(sc.sign_poly.front().x(), floor_y);
    return sc;
}

struct DemoState {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    double h = 1.0 / 200.0;
    Vec3 gravity = Vec3(0.0, -9.8, 0.0);
};

struct ConstraintEval {
    double value = 0.0;  // enforced constraint: field value minus the gap
    double field = 0.0;  // raw smooth or exact-min distance at the point
    Vec3 grad = Vec3::Zero();
};

inline ConstraintEval eval_constraint(const DemoScenario& sc, ConstraintMode mode, const Vec3& p,
                                      EvalScratch& scratch) {
    ConstraintEval ce;
    if (mode == ConstraintMode::Smooth) {
        const SmoothResult r =
            smooth_min_dist(sc.bowl, sc.bvh, sc.weights, SimplexGeom::point(p), sc.params, scratch);
        ce.field = r.d_hat;
        ce.grad = r.grad;
    } else {
        // The exact distance to an open chain is unsigned, which makes c >= 0
        // vacuous as a barrier (both sides of a wall satisfy it, so a long
        // solver step can hop straight across the zero set). Sign it against
        // the bowl profile closed underneath into a solid block.
        const ExactMinResult r = exact_min_distance(sc.bowl, p);
        const double side = inside_polygon(sc.sign_poly, p.x(), p.y()) ? -1.0 : 1.0;
        ce.field = side * r.distance;
        ce.grad = side * r.pair.grad;
    }
    ce.value = ce.field - sc.gap;
    return ce;
}

struct StepOutcome {
    DemoState state;
    double constraint = 0.0;  // raw field value (d_hat or min distance) at the accepted position
    int iterations = 0;       // interior-point iterations over the whole step
    int rejections = 0;       // sub-steps rejected by the line search
    bool frozen = false;      // step abandoned after repeated halving
};

namespace detail {

// One implicit-Euler increment: minimize E(u) = 1/2 |u - target|^2 subject
// to c(u) >= 0, over the xy plane, via a primal-dual interior point method
// with the Hessian block replaced by the identity. Perturbed KKT system:
//   u - target - lambda grad c = 0,   lambda c(u) = mu,   lambda > 0.
// Iterates are kept above a floor at a fixed fraction of the gap below the
// enforced surface: contacts converge to c = 0, but a step may transiently
// dip into the cushion. Without that slack a slide along a curved level set
// from a resting contact would be rejected outright (any tangential step of
// length t dips by t^2 / 2R) and the solver would grind in micro-steps.
// Fraction-to-boundary on lambda and on the linearized constraint plus the
// floor check in the backtracking line search also rule out hopping across
// the zero set of the (signed) distance.
// Returns false on a line-search failure; the caller halves the time step.
inline bool solve_increment(const DemoScenario& sc, ConstraintMode mode, const Vec3& start,
                            const Vec3& target, EvalScratch& scratch, Vec3& solution,
                            double& c_out, int& iters) {
    using Vec2 = Eigen::Vector2d;
    Vec2 u(start.x(), start.y());
    const Vec2 tgt(target.x(), target.y());

    ConstraintEval ce = eval_constraint(sc, mode, Vec3(u.x(), u.y(), start.z()), scratch);
    double c = ce.value;
    const double move = (tgt - u).norm();
    double lambda = std::max(move, 1e-8);
    const double c_floor = -0.75 * sc.gap;  // true clearance stays >= gap / 4

    constexpr int kMaxIters = 100;
    constexpr double kTau = 0.995;
    constexpr double kTol = 1e-8;
    // Complementarity keeps a hair of relaxation (lambda * c = kMu) so the
    // Newton system stays well-posed at active contacts; the physical cushion
    // contacts rest on is the geometric gap, not this relaxation. Anything
    // larger injects energy: the KKT solution lifts a grazing contact by
    // sqrt(kMu), and v = du / h_try amplifies that lift on small sub-steps.
    constexpr double kMu = 1e-14;
    double mu = std::max(lambda * c, kMu);
    auto residual = [&](const Vec2& uu, double ll, double cc, const Vec2& gc, double mmu) {
        Eigen::Vector3d r;
        r.head<2>() = uu - tgt - ll * gc;
        r(2) = ll * cc - mmu;
        return r;
    };

    Vec2 gc = ce.grad.head<2>();
    while (iters < kMaxIters) {
        if (residual(u, lambda, c, gc, kMu).norm() < kTol) break;
        Eigen::Vector3d r = residual(u, lambda, c, gc, mu);
        if (mu > kMu && r.norm() < std::max(0.1 * mu, 0.5 * kTol)) {
            // converged for this barrier parameter; tighten and refresh
            mu = std::max(0.2 * mu, kMu);
            r = residual(u, lambda, c, gc, mu);
        }

        Eigen::Matrix3d J;
        J.setZero();
        J(0, 0) = J(1, 1) = 1.0;  // identity primal Hessian block
        J(0, 2) = -gc.x();
        J(1, 2) = -gc.y();
        J(2, 0) = lambda * gc.x();
        J(2, 1) = lambda * gc.y();
        J(2, 2) = c;
        const Eigen::Vector3d d = J.fullPivLu().solve(-r);
        const Vec2 du = d.head<2>();
        const double dl = d(2);

        double alpha = 1.0;
        if (dl < 0.0) alpha = std::min(alpha, -kTau * lambda / dl);
        // Clip against the enforced surface, not the floor (an approach step
        // should aim at c = 0, not dive the whole cushion), but always leave
        // a sliver of room so near-tangential steps from a resting contact
        // are not clipped to nothing; the floor check below still holds.
        const double dc = gc.dot(du);
        if (dc < 0.0) alpha = std::min(alpha, -kTau * std::max(c, 0.1 * sc.gap) / dc);
        bool accepted = false;
        const double r0 = r.norm();
        const double alpha_floor = std::max(1e-8 * alpha, 1e-14);
        while (alpha > alpha_floor) {
            const Vec2 ut = u + alpha * du;
            const double lt = lambda + alpha * dl;
            const ConstraintEval cet =
                eval_constraint(sc, mode, Vec3(ut.x(), ut.y(), start.z()), scratch);
            if (cet.value > c_floor && lt > 0.0) {
                const Eigen::Vector3d rt =
                    residual(ut, lt, cet.value, cet.grad.head<2>(), mu);
                if (rt.norm() <= (1.0 - 1e-4 * alpha) * r0) {
                    u = ut;
                    lambda = lt;
                    ce = cet;
                    c = cet.value;
                    gc = cet.grad.head<2>();
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        ++iters;
        if (!accepted) return false;
    }
    solution = Vec3(u.x(), u.y(), start.z());
    c_out = c;
    // Exhausting the budget without convergence is a stall, not progress.
    return residual(u, lambda, c, gc, kMu).norm() < kTol;
}

} // namespace detail

// Advances one nominal time step h. The unconstrained target is accepted
// outright when the whole move provably stays clear of the surface (the
// constraint value bounds the distance from below, so a move shorter than it
// cannot cross). Otherwise the interior-point increment runs; on line-search
// failure the sub-step is halved, and after 8 halvings the remainder of the
// step is abandoned with zero velocity (the stall regime).
inline StepOutcome demo_step(const DemoScenario& sc, ConstraintMode mode, const DemoState& in,
                             EvalScratch& scratch) {
    StepOutcome out;
    out.state = in;
    Vec3 p = in.position;
    Vec3 v = in.velocity;

    double remaining = in.h;
    double h_try = in.h;
    const double h_floor = in.h / 256.0;
    double c_final = eval_constraint(sc, mode, p, scratch).value;

    while (remaining > 1e-12 * in.h) {
        const Vec3 target = p + h_try * v + h_try * h_try * in.gravity;
        const double move = (target - p).norm();
        const double margin = 1.2 * move + 1e-9;

        double c_target = eval_constraint(sc, mode, target, scratch).value;
        if (c_final > margin && c_target > margin) {
            v = v + h_try * in.gravity;  // (target - p) / h_try, exactly
            p = target;
            c_final = c_target;
            remaining -= h_try;
            h_try = std::min(remaining, 2.0 * h_try);
            continue;
        }

        Vec3 solution;
        double c_sol = 0.0;
        int iters = 0;
        if (detail::solve_increment(sc, mode, p, target, scratch, solution, c_sol, iters)) {
            out.iterations += iters;
            v = (solution - p) / h_try;
            p = solution;
            c_final = c_sol;
            remaining -= h_try;
            h_try = std::min(remaining, 2.0 * h_try);
        } else {
            out.iterations += iters;
            ++out.rejections;
            // A static contact the solver cannot settle will not be settled
            // by a shorter step either (the geometry does not scale with h),
            // so only cascade while there is momentum to arrive with.
            h_try *= 0.5;
            if (h_try < h_floor || v.squaredNorm() == 0.0) {
                out.frozen = true;
                v = Vec3::Zero();
                break;
            }
        }
    }

    out.state.position = p;
    out.state.velocity = v;
    out.constraint = c_final + sc.gap;  // solver tracks field - gap; report the field
    return out;
}

struct DemoRow {
    double t = 0.0;
    Vec3 position = Vec3::Zero();
    double constraint = 0.0;
    int iterations = 0;
};

inline std::vector<DemoRow> run_demo(const DemoScenario& sc, ConstraintMode mode, int steps,
                                     double h = 1.0 / 200.0) {
    EvalScratch scratch;
    DemoState state;
    state.position = sc.start;
    state.h = h;

    std::vector<DemoRow> rows;
    rows.reserve(steps + 1);
    rows.push_back({0.0, state.position, eval_constraint(sc, mode, state.position, scratch).field, 0});
    for (int s = 1; s <= steps; ++s) {
        const StepOutcome outcome = demo_step(sc, mode, state, scratch);
        state = outcome.state;
        rows.push_back({s * h, state.position, outcome.constraint, outcome.iterations});
    }
    return rows;
}

inline void write_demo_csv(const std::vector<DemoRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail("cannot open " + path + " for writing");
    out << "t,px,py,pz,constraint,iterations\n";
    char buf[200];
    for (const DemoRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%.10g,%.17g,%.17g,%.17g,%.17g,%d\n", r.t, r.position.x(),
                      r.position.y(), r.position.z(), r.constraint, r.iterations);
        out << buf;
    }
    if (!out) fail("write failed: " + path);
}

} // namespace smoothdist
