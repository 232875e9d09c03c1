#pragma once

#include "bvh.hpp"
#include "exact.hpp"
#include "mesh.hpp"
#include "parallel.hpp"
#include "params.hpp"
#include "weights.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace smoothdist {

// Result of one smooth-distance query. d_hat may be +infinity when the
// exponential sum underflows (far query at high alpha); the gradient is zero
// there. c and grad_c expose the raw accumulator for oracle comparisons.
struct SmoothResult {
    double d_hat = std::numeric_limits<double>::infinity();
    Vec3 grad = Vec3::Zero();
    double c = 0.0;
    Vec3 grad_c = Vec3::Zero();
    std::int64_t leaves = 0;      // exact leaf evaluations
    std::int64_t far_field = 0;   // Barnes-Hut expansions taken
};

// Reusable per-worker buffers: the traversal records each contribution as
// (exponent argument, scalar coefficient, gradient coefficient) and the
// exponentials are evaluated in one vectorized pass afterwards. Summation
// follows recording order, so results match a streaming accumulation.
struct EvalScratch {
    std::vector<double> args;   // -alpha * d per term
    std::vector<double> coefs;  // w_i, or n_B * w_ff for far-field terms
    std::vector<Vec3> gcoefs;   // w_i grad d_i - grad w_i / alpha
    Eigen::ArrayXd vals;
    std::vector<std::int32_t> stack;

    void clear() {
        args.clear();
        coefs.clear();
        gcoefs.clear();
    }
};

namespace detail {

// One exact leaf contribution: w_i exp(-alpha d_i) into c and
// exp(-alpha d_i) (w_i grad d_i - grad w_i / alpha) into grad_c.
inline void push_leaf_term(const SimplexMesh& mesh, const WeightSet& ws, std::size_t prim,
                           const SimplexGeom& g, const SmoothParams& params, EvalScratch& s) {
    const SimplexGeom f = SimplexGeom::from_mesh(mesh, mesh.simplices[prim]);
    const ClosestPair p = simplex_distance(f, g);
    double w, dw[2];
    evaluate_weight(mesh, ws, prim, p.phi, params, w, dw);
    const Vec3 grad_w = weight_gradient_world(mesh, ws, prim, p.phi, params);
    s.args.push_back(-params.alpha * p.distance);
    s.coefs.push_back(w);
    s.gcoefs.push_back(w * p.grad - grad_w / params.alpha);
}

// Far-field contribution of a whole subtree: n_B terms collapsed onto the
// box's closest point y_B. The constant weight is the mesh-wide upper bound
// on attenuated weights, which keeps the cluster term >= the exact sum it
// replaces and therefore keeps the field an underestimate.
inline void push_far_field_term(const BvhNode& node, const BoxProximity& prox,
                                const SimplexGeom& g, double w_ff, const SmoothParams& params,
                                EvalScratch& s) {
    const Vec3 diff = g.at(prox.lambda) - prox.y_b;
    const double scale = node.count * w_ff;
    s.args.push_back(-params.alpha * prox.distance);
    s.coefs.push_back(scale);
    s.gcoefs.push_back((scale / prox.distance) * diff);
}

// Sums the recorded terms. Plain double accumulation, no log-domain
// shifting: underflow to c = 0 is the documented far-query behavior.
inline void finalize_terms(EvalScratch& s, double& c, Vec3& grad_c) {
    c = 0.0;
    grad_c = Vec3::Zero();
    const auto n = static_cast<Eigen::Index>(s.args.size());
    if (n == 0) return;
    const auto args = Eigen::Map<const Eigen::ArrayXd>(s.args.data(), n);
    // Eigen's vectorized exp saturates for very negative arguments instead
    // of underflowing; force those terms to zero so far queries underflow to
    // c = 0 (reported as d_hat = +inf) the same way scalar exp would.
    s.vals = (args < -708.0).select(0.0, args.exp());
    for (Eigen::Index i = 0; i < n; ++i) {
        c += s.coefs[i] * s.vals[i];
        grad_c += s.vals[i] * s.gcoefs[i];
    }
}

} // namespace detail

// Tree traversal collecting all contributions to the exponential sum for
// query simplex g. At every node, admissible subtrees (box subtends less
// than beta from g) are replaced by their far-field expansion; leaves are
// evaluated exactly otherwise. The full tree is visited when beta = 0.
inline void collect_contributions(const SimplexMesh& mesh, const Bvh& bvh, const WeightSet& ws,
                                  const SimplexGeom& g, const SmoothParams& params,
                                  EvalScratch& scratch, SmoothResult& stats_out) {
    if (bvh.empty()) return;
    const double w_ff = ws.max_attenuated_weight(params);
    const bool use_bh = params.beta > 0.0;

    scratch.stack.clear();
    scratch.stack.push_back(0);
    while (!scratch.stack.empty()) {
        const std::int32_t id = scratch.stack.back();
        scratch.stack.pop_back();
        const BvhNode& node = bvh.nodes[id];
        if (use_bh) {
            const BoxProximity prox = box_primitive_proximity(node.box, g);
            if (bh_condition(node, prox, params.beta)) {
                detail::push_far_field_term(node, prox, g, w_ff, params, scratch);
                ++stats_out.far_field;
                continue;
            }
        }
        if (node.is_leaf()) {
            detail::push_leaf_term(mesh, ws, node.primitive, g, params, scratch);
            ++stats_out.leaves;
        } else {
            // right first so the left child pops first (recursion order)
            scratch.stack.push_back(node.right);
            scratch.stack.push_back(node.left);
        }
    }
}

inline std::pair<double, Vec3> collect_contributions(const SimplexMesh& mesh, const Bvh& bvh,
                                                     const WeightSet& ws, const SimplexGeom& g,
                                                     const SmoothParams& params) {
    EvalScratch scratch;
    SmoothResult stats;
    collect_contributions(mesh, bvh, ws, g, params, scratch, stats);
    double c;
    Vec3 grad_c;
    detail::finalize_terms(scratch, c, grad_c);
    return {c, grad_c};
}

namespace detail {

inline SmoothResult result_from_accum(EvalScratch& scratch, SmoothResult stats,
                                      const SmoothParams& params) {
    SmoothResult r = stats;
    finalize_terms(scratch, r.c, r.grad_c);
    if (r.c <= 0.0) {
        r.d_hat = std::numeric_limits<double>::infinity();
        r.grad = Vec3::Zero();
        return r;
    }
    r.d_hat = -std::log(r.c) / params.alpha;
    r.grad = r.grad_c / (r.c + params.epsilon);
    return r;
}

} // namespace detail

// Smooth minimum distance from mesh to a query simplex:
// d_hat = -(1/alpha) log sum_i w_i exp(-alpha d_i), with the gradient taken
// with respect to a rigid translation of the query.
inline SmoothResult smooth_min_dist(const SimplexMesh& mesh, const Bvh& bvh, const WeightSet& ws,
                                    const SimplexGeom& g, const SmoothParams& params,
                                    EvalScratch& scratch) {
    scratch.clear();
    SmoothResult stats;
    collect_contributions(mesh, bvh, ws, g, params, scratch, stats);
    return detail::result_from_accum(scratch, stats, params);
}

inline SmoothResult smooth_min_dist(const SimplexMesh& mesh, const Bvh& bvh, const WeightSet& ws,
                                    const SimplexGeom& g, const SmoothParams& params) {
    EvalScratch scratch;
    return smooth_min_dist(mesh, bvh, ws, g, params, scratch);
}

inline SmoothResult smooth_min_dist(const SimplexMesh& mesh, const Bvh& bvh, const WeightSet& ws,
                                    const Vec3& q, const SmoothParams& params) {
    return smooth_min_dist(mesh, bvh, ws, SimplexGeom::point(q), params);
}

// Reference evaluation without the tree: a flat sum over every primitive
// (equivalent to beta = 0). Oracle for the traversal and the CLI --exact
// cross-check.
inline SmoothResult smooth_min_dist_flat(const SimplexMesh& mesh, const WeightSet& ws,
                                         const SimplexGeom& g, const SmoothParams& params) {
    EvalScratch scratch;
    SmoothResult stats;
    for (std::size_t i = 0; i < mesh.num_simplices(); ++i) {
        detail::push_leaf_term(mesh, ws, i, g, params, scratch);
        ++stats.leaves;
    }
    return detail::result_from_accum(scratch, stats, params);
}

// ---------------------------------------------------------------------------
// Mesh-to-mesh distance: an outer LogSumExp over all query primitives g_j of
// the inner smooth distances d_hat_j, with per-vertex gradients obtained by
// splitting each primitive's softmin mass evenly over its n+1 vertices.
// ---------------------------------------------------------------------------
struct MeshDistResult {
    double d_hat = std::numeric_limits<double>::infinity();
    std::vector<Vec3> vertex_grads;      // one per query-mesh vertex
    std::vector<double> per_primitive;   // inner d_hat_j per query primitive
    std::int64_t leaves = 0, far_field = 0;
};

inline MeshDistResult smooth_mesh_dist(const SimplexMesh& mesh, const Bvh& bvh,
                                       const WeightSet& ws, const SimplexMesh& query,
                                       const SmoothParams& params,
                                       int threads = default_thread_count()) {
    const std::size_t nq = query.num_simplices();
    MeshDistResult out;
    out.vertex_grads.assign(query.vertices.size(), Vec3::Zero());
    out.per_primitive.assign(nq, std::numeric_limits<double>::infinity());
    if (nq == 0) return out;

    std::vector<Vec3> inner_grads(nq, Vec3::Zero());
    std::vector<std::int64_t> leaves(nq, 0), far(nq, 0);

    parallel_for(nq, threads, [&](std::size_t begin, std::size_t end, int) {
        EvalScratch scratch;
        for (std::size_t j = begin; j < end; ++j) {
            const SimplexGeom g = SimplexGeom::from_mesh(query, query.simplices[j]);
            const SmoothResult r = smooth_min_dist(mesh, bvh, ws, g, params, scratch);
            out.per_primitive[j] = r.d_hat;
            inner_grads[j] = r.grad;
            leaves[j] = r.leaves;
            far[j] = r.far_field;
        }
    });

    // serial reduction in primitive order (deterministic at any thread count)
    double denom = 0.0;
    for (std::size_t j = 0; j < nq; ++j) {
        out.leaves += leaves[j];
        out.far_field += far[j];
        const double mass = std::exp(-params.alpha_q * out.per_primitive[j]);
        denom += mass;
        const Simplex& s = query.simplices[j];
        const double split = mass / (s.nverts());
        for (int k = 0; k < s.nverts(); ++k) out.vertex_grads[s.v[k]] += split * inner_grads[j];
    }
    if (denom <= 0.0) {
        for (Vec3& gk : out.vertex_grads) gk = Vec3::Zero();
        return out;
    }
    out.d_hat = -std::log(denom) / params.alpha_q;
    for (Vec3& gk : out.vertex_grads) gk /= denom + params.epsilon;
    return out;
}

// Combines several constraint fields (one per mesh pair) with one more
// LogSumExp at the given alpha, typically the largest alpha in play.
inline SmoothResult combine_constraints(const std::vector<SmoothResult>& fields, double alpha,
                                        double epsilon = 1e-300) {
    SmoothResult out;
    double denom = 0.0;
    Vec3 numer = Vec3::Zero();
    for (const SmoothResult& f : fields) {
        const double mass = std::exp(-alpha * f.d_hat);
        denom += mass;
        numer += mass * f.grad;
        out.leaves += f.leaves;
        out.far_field += f.far_field;
    }
    out.c = denom;
    out.grad_c = numer;
    if (denom <= 0.0) return out;
    out.d_hat = -std::log(denom) / alpha;
    out.grad = numer / (denom + epsilon);
    return out;
}

// ---------------------------------------------------------------------------
// Parameter heuristic: alpha = 1 / (minimum edge length), alpha_U = 6 alpha.
// Point clouds have no edge length; the verbatim fallback (100 * bbox
// diagonal) has inconsistent units and is opt-in, with a note advising
// manual tuning either way.
// ---------------------------------------------------------------------------
struct AlphaChoice {
    double alpha = 0.0;
    double alpha_u = 0.0;
    bool applicable = false;
    std::string note;
};

inline AlphaChoice alpha_heuristic(const SimplexMesh& mesh, bool point_cloud_diagonal = false) {
    AlphaChoice out;
    if (const auto min_edge = min_edge_length(mesh)) {
        out.alpha = 1.0 / *min_edge;
        out.alpha_u = 6.0 * out.alpha;
        out.applicable = true;
        return out;
    }
    if (point_cloud_diagonal) {
        const double diag = bounding_box(mesh).diagonal();
        out.alpha = 100.0 * (diag > 0.0 ? diag : 1.0);
        out.alpha_u = 6.0 * out.alpha;
        out.applicable = true;
        out.note = "point cloud: using 100 * bbox diagonal; manual tuning is advised";
        return out;
    }
    out.note = "point cloud has no edge length; set alpha manually (or enable the "
               "bbox-diagonal fallback)";
    return out;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature and the integrated (non-conservative) edge
// distance -(1/alpha) log integral_edge exp(-alpha |x - q|) dx. Provided as
// a negative control: integrating instead of minimizing overestimates the
// true distance at low alpha.
// ---------------------------------------------------------------------------
struct QuadratureRule {
    std::vector<double> nodes, weights;  // on [0, 1], weights sum to 1
};

inline QuadratureRule gauss_legendre(int order) {
    QuadratureRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int k = 0; k < order; ++k) {
        // Newton iteration on P_n from the Chebyshev initial guess
        double x = std::cos(M_PI * (k + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int n = 2; n <= order; ++n) {
                const double p2 = ((2 * n - 1) * x * p1 - (n - 1) * p0) / n;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[k] = 0.5 * (1.0 - x);  // roots descend, nodes ascend
        rule.weights[k] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

inline double integrated_edge_distance(const Vec3& a, const Vec3& b, const Vec3& q, double alpha,
                                       int order = 5) {
    const QuadratureRule rule = gauss_legendre(order);
    const double length = (b - a).norm();
    double sum = 0.0;
    for (int k = 0; k < order; ++k) {
        const Vec3 x = a + rule.nodes[k] * (b - a);
        sum += rule.weights[k] * std::exp(-alpha * (x - q).norm());
    }
    const double integral = length * sum;
    if (integral <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(integral) / alpha;
}

} // namespace smoothdist
