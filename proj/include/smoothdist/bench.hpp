#pragma once

#include "render.hpp"
#include "smooth.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace smoothdist {

// ---------------------------------------------------------------------------
// Voxel-grid benchmark: evaluate d_hat at every voxel center of an N^3 grid
// over [0,1]^3 (the mesh is expected in the benchmark frame). Slabs of fixed
// z are the unit of parallel work and of wall-time aggregation.
// ---------------------------------------------------------------------------
struct GridBenchResult {
    int resolution = 0;
    std::vector<double> d_hat;          // N^3 values, x fastest, then y, then z
    std::vector<std::int64_t> leaves;   // per voxel
    std::vector<std::int64_t> far_field;
    std::vector<double> slab_seconds;   // per z-slab wall time
    double total_seconds = 0.0;
    std::int64_t total_leaves = 0, total_far_field = 0;
};

inline GridBenchResult grid_benchmark(const SimplexMesh& mesh, const Bvh& bvh, const WeightSet& ws,
                                      const SmoothParams& params, int resolution,
                                      int threads = default_thread_count()) {
    GridBenchResult out;
    out.resolution = resolution;
    const std::size_t n3 = std::size_t(resolution) * resolution * resolution;
    out.d_hat.assign(n3, 0.0);
    out.leaves.assign(n3, 0);
    out.far_field.assign(n3, 0);
    out.slab_seconds.assign(resolution, 0.0);

    const auto start = std::chrono::steady_clock::now();
    parallel_for(resolution, threads, [&](std::int64_t k0, std::int64_t k1, int) {
        EvalScratch scratch;
        for (std::int64_t k = k0; k < k1; ++k) {
            const auto slab_start = std::chrono::steady_clock::now();
            for (int j = 0; j < resolution; ++j) {
                for (int i = 0; i < resolution; ++i) {
                    const Vec3 q((i + 0.5) / resolution, (j + 0.5) / resolution,
                                 (k + 0.5) / resolution);
                    const SmoothResult r =
                        smooth_min_dist(mesh, bvh, ws, SimplexGeom::point(q), params, scratch);
                    const std::size_t idx =
                        std::size_t(i) + resolution * (std::size_t(j) + resolution * k);
                    out.d_hat[idx] = r.d_hat;
                    out.leaves[idx] = r.leaves;
                    out.far_field[idx] = r.far_field;
                }
            }
            out.slab_seconds[k] =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - slab_start)
                    .count();
        }
    });
    out.total_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (std::size_t v = 0; v < n3; ++v) {
        out.total_leaves += out.leaves[v];
        out.total_far_field += out.far_field[v];
    }
    return out;
}

// CSV rows: voxel index, d_hat, leaves visited, far-field count, and the
// wall-time aggregate of the voxel's z-slab. All columns except slab_time_s
// are deterministic for a fixed input.
inline void write_grid_csv(const GridBenchResult& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail("cannot open " + path + " for writing");
    out << "voxel_index,d_hat,leaves_visited,far_field,slab_time_s\n";
    char buf[160];
    const int n = r.resolution;
    for (std::size_t idx = 0; idx < r.d_hat.size(); ++idx) {
        const int k = int(idx / (std::size_t(n) * n));
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%lld,%lld,%.6g\n", idx, r.d_hat[idx],
                      static_cast<long long>(r.leaves[idx]),
                      static_cast<long long>(r.far_field[idx]), r.slab_seconds[k]);
        out << buf;
    }
    if (!out) fail("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Beta ablation: renders the same view at each beta and reports render time
// and isosurface displacement along identical rays against the beta = 0
// reference.
// ---------------------------------------------------------------------------
struct AblationRow {
    double beta = 0.0;
    double seconds = 0.0;
    double speedup_vs_beta0 = 1.0;
    double mean_disp_rel = 0.0;  // mean |t_beta - t_0| / bbox diagonal, both-hit rays
    double max_disp_rel = 0.0;
    std::int64_t mismatched_hits = 0;  // rays hitting in exactly one of the two renders
    std::int64_t leaves = 0;
};

inline std::vector<AblationRow> beta_ablation(const SimplexMesh& mesh, const Bvh& bvh,
                                              const WeightSet& ws, SmoothParams params,
                                              const std::vector<double>& betas,
                                              const RenderConfig& cfg,
                                              int threads = default_thread_count()) {
    params.beta = 0.0;
    const RenderResult ref = render(mesh, bvh, ws, params, cfg, threads);
    const double diag = std::max(bounding_box(mesh).diagonal(), 1e-12);

    std::vector<AblationRow> rows;
    for (double beta : betas) {
        params.beta = beta;
        const RenderResult rr =
            beta == 0.0 ? ref : render(mesh, bvh, ws, params, cfg, threads);
        AblationRow row;
        row.beta = beta;
        row.seconds = rr.seconds;
        row.speedup_vs_beta0 = rr.seconds > 0.0 ? ref.seconds / rr.seconds : 0.0;
        row.leaves = rr.leaves;
        double sum = 0.0;
        std::int64_t both = 0;
        for (std::size_t p = 0; p < rr.hit_t.size(); ++p) {
            const bool h0 = ref.hit_t[p] >= 0.0, hb = rr.hit_t[p] >= 0.0;
            if (h0 && hb) {
                const double d = std::abs(rr.hit_t[p] - ref.hit_t[p]) / diag;
                sum += d;
                row.max_disp_rel = std::max(row.max_disp_rel, d);
                ++both;
            } else if (h0 != hb) {
                ++row.mismatched_hits;
            }
        }
        row.mean_disp_rel = both > 0 ? sum / double(both) : 0.0;
        if (beta == 0.0) {
            row.mean_disp_rel = 0.0;
            row.max_disp_rel = 0.0;
            row.mismatched_hits = 0;
        }
        rows.push_back(row);
    }
    return rows;
}

inline void write_ablation_csv(const std::vector<AblationRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail("cannot open " + path + " for writing");
    out << "beta,render_time_s,speedup_vs_beta0,mean_disp_rel,max_disp_rel,mismatched_hits,"
           "leaves_visited\n";
    char buf[200];
    for (const AblationRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.6g,%.6g,%.17g,%.17g,%lld,%lld\n", r.beta,
                      r.seconds, r.speedup_vs_beta0, r.mean_disp_rel, r.max_disp_rel,
                      static_cast<long long>(r.mismatched_hits),
                      static_cast<long long>(r.leaves));
        out << buf;
    }
    if (!out) fail("write failed: " + path);
}

// Pearson correlation coefficient of two equally sized samples.
inline double pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    if (n < 2 || ys.size() != n) return 0.0;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

} // namespace smoothdist
