// Command-line surface for the smooth distance library: sphere-traced
// renders, the voxel-grid benchmark, the beta ablation, single-query
// inspection, mesh generation, and the bowl-drop dynamics demo.

#include <CLI11.hpp>

#include <smoothdist/bench.hpp>
#include <smoothdist/demo.hpp>
#include <smoothdist/mesh_io.hpp>
#include <smoothdist/render.hpp>
#include <smoothdist/shapes.hpp>
#include <smoothdist/smooth.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace {

using namespace smoothdist;

// "1.5,2,-0.25" -> Vec3
Vec3 parse_vec3(const std::string& s, const std::string& what) {
    Vec3 v;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%lf,%lf,%lf%c", &v.x(), &v.y(), &v.z(), &tail) != 3)
        throw CLI::ValidationError(what, "expected \"x,y,z\", got \"" + s + "\"");
    return v;
}

// "ox,oy,oz:tx,ty,tz" -> origin, target
void parse_camera(const std::string& s, Vec3& origin, Vec3& target) {
    const auto colon = s.find(':');
    if (colon == std::string::npos)
        throw CLI::ValidationError("--camera", "expected \"ox,oy,oz:tx,ty,tz\", got \"" + s + "\"");
    origin = parse_vec3(s.substr(0, colon), "--camera");
    target = parse_vec3(s.substr(colon + 1), "--camera");
    if (!origin.allFinite() || !target.allFinite())
        throw CLI::ValidationError("--camera", "non-finite camera");
}

void parse_size(const std::string& s, int& w, int& h) {
    char tail = 0;
    if (std::sscanf(s.c_str(), "%dx%d%c", &w, &h, &tail) != 2 || w < 1 || h < 1)
        throw CLI::ValidationError("--size", "expected \"WxH\" with W,H >= 1, got \"" + s + "\"");
}

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct ParamFlags {
    SmoothParams params;
    bool auto_alpha = false;

    void attach(CLI::App* cmd, bool with_beta = true) {
        cmd->add_option("--alpha", params.alpha, "LogSumExp sharpness")->capture_default_str();
        cmd->add_option("--alpha-u", params.alpha_u,
                        "attenuation threshold (weights flatten when alpha < alpha-u)")
            ->capture_default_str();
        if (with_beta)
            cmd->add_option("--beta", params.beta, "Barnes-Hut admissibility; 0 disables")
                ->capture_default_str();
        cmd->add_option("--alpha-q", params.alpha_q, "outer sharpness for primitive queries")
            ->capture_default_str();
        cmd->add_flag("--auto-alpha", auto_alpha,
                      "set alpha = 1 / min edge length and alpha-u = 6 alpha");
    }

    SmoothParams resolve(const SimplexMesh& mesh) const {
        SmoothParams p = params;
        if (auto_alpha) {
            const AlphaChoice ac = alpha_heuristic(mesh);
            if (!ac.applicable) fail("--auto-alpha: " + ac.note);
            p.alpha = ac.alpha;
            p.alpha_u = ac.alpha_u;
            std::fprintf(stderr, "auto-alpha: alpha=%g alpha-u=%g\n", p.alpha, p.alpha_u);
        }
        if (!(p.alpha > 0.0) || !(p.alpha_u > 0.0) || !std::isfinite(p.alpha) ||
            !std::isfinite(p.alpha_u))
            fail("alpha and alpha-u must be positive and finite");
        if (p.beta < 0.0 || !std::isfinite(p.beta)) fail("beta must be finite and >= 0");
        return p;
    }
};

struct RenderFlags {
    std::string camera, size = "256x256";
    double fov = 45.0, threshold = 0.0;
    int max_steps = 128;

    void attach(CLI::App* cmd) {
        cmd->add_option("--camera", camera,
                        "\"ox,oy,oz:tx,ty,tz\" (default frames the bounding box)");
        cmd->add_option("--fov", fov, "vertical field of view, degrees")->capture_default_str();
        cmd->add_option("--size", size, "image size WxH")->capture_default_str();
        cmd->add_option("--threshold", threshold,
                        "hit threshold, model units (default 1e-3 * bbox diagonal)");
        cmd->add_option("--max-steps", max_steps, "sphere-tracing step limit per ray")
            ->capture_default_str();
    }

    RenderConfig resolve(const SimplexMesh& mesh) const {
        RenderConfig cfg;
        parse_size(size, cfg.width, cfg.height);
        cfg.fov_deg = fov;
        cfg.threshold = threshold;
        cfg.max_steps = max_steps;
        if (cfg.max_steps < 1) fail("--max-steps must be >= 1");
        if (threshold < 0.0) fail("--threshold must be > 0 (or omitted for the default)");
        if (!camera.empty()) {
            parse_camera(camera, cfg.origin, cfg.target);
        } else {
            const Aabb box = bounding_box(mesh);
            const double diag = std::max(box.diagonal(), 1e-6);
            cfg.target = box.center();
            cfg.origin = box.center() + diag * Vec3(0.9, 0.55, 1.1);
        }
        return cfg;
    }
};

SimplexMesh load_and_validate(const std::string& path) {
    SimplexMesh mesh = load_mesh(path);
    validate(mesh);
    if (mesh.num_simplices() == 0) fail(path + ": mesh has no primitives");
    return mesh;
}

struct BuiltScene {
    SimplexMesh mesh;
    Bvh bvh;
    WeightSet weights;
};

BuiltScene build_scene(SimplexMesh mesh) {
    BuiltScene s;
    s.mesh = std::move(mesh);
    s.bvh = build_bvh(s.mesh);
    s.weights = build_weight_set(s.mesh, build_adjacency(s.mesh));
    return s;
}

// ---------------------------------------------------------------------------
int run_trace(const std::string& mesh_path, const ParamFlags& pf, const RenderFlags& rf,
              const std::string& out_path, int threads) {
    const BuiltScene s = build_scene(load_and_validate(mesh_path));
    const SmoothParams params = pf.resolve(s.mesh);
    const RenderConfig cfg = rf.resolve(s.mesh);
    const RenderResult r = render(s.mesh, s.bvh, s.weights, params, cfg, threads);
    if (out_path.size() >= 4 && out_path.substr(out_path.size() - 4) == ".png")
        write_png(r.image, out_path);
    else
        write_ppm(r.image, out_path);
    std::printf("wrote %s (%dx%d)\n", out_path.c_str(), cfg.width, cfg.height);
    std::printf("render_time_s=%.6g hits=%lld/%lld mean_leaves_per_ray=%.6g far_field=%lld\n",
                r.seconds, static_cast<long long>(r.hits), static_cast<long long>(r.rays),
                r.mean_leaves_per_ray, static_cast<long long>(r.far_field));
    return 0;
}

int run_bench(const std::string& mesh_path, const ParamFlags& pf, int grid,
              const std::string& out_path, int threads) {
    if (grid < 1) fail("--grid must be >= 1");
    SimplexMesh mesh = load_and_validate(mesh_path);
    normalize_to_benchmark_frame(mesh);
    const BuiltScene s = build_scene(std::move(mesh));
    const SmoothParams params = pf.resolve(s.mesh);
    const GridBenchResult r = grid_benchmark(s.mesh, s.bvh, s.weights, params, grid, threads);
    write_grid_csv(r, out_path);
    std::printf("wrote %s (%d^3 = %zu rows)\n", out_path.c_str(), grid, r.d_hat.size());
    std::printf("total_time_s=%.6g total_leaves=%lld total_far_field=%lld\n", r.total_seconds,
                static_cast<long long>(r.total_leaves), static_cast<long long>(r.total_far_field));
    return 0;
}

int run_ablate(const std::string& mesh_path, const ParamFlags& pf, std::vector<double> betas,
               const RenderFlags& rf, const std::string& out_path, int threads) {
    if (betas.empty()) betas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    const BuiltScene s = build_scene(load_and_validate(mesh_path));
    const SmoothParams params = pf.resolve(s.mesh);
    const RenderConfig cfg = rf.resolve(s.mesh);
    const std::vector<AblationRow> rows =
        beta_ablation(s.mesh, s.bvh, s.weights, params, betas, cfg, threads);
    write_ablation_csv(rows, out_path);
    std::printf("wrote %s\n", out_path.c_str());
    std::printf("%8s %12s %10s %14s %14s\n", "beta", "time_s", "speedup", "mean_disp_rel",
                "max_disp_rel");
    for (const AblationRow& r : rows)
        std::printf("%8g %12.6g %10.3g %14.6g %14.6g\n", r.beta, r.seconds, r.speedup_vs_beta0,
                    r.mean_disp_rel, r.max_disp_rel);
    return 0;
}

int run_query(const std::string& mesh_path, const ParamFlags& pf, const std::string& point_spec,
              const std::string& edge_spec, const std::string& tri_spec, bool exact_check) {
    const BuiltScene s = build_scene(load_and_validate(mesh_path));
    const SmoothParams params = pf.resolve(s.mesh);

    SimplexGeom g = SimplexGeom::point(Vec3::Zero());
    const int given = int(!point_spec.empty()) + int(!edge_spec.empty()) + int(!tri_spec.empty());
    if (given != 1) fail("give exactly one of --point, --edge, --tri");
    if (!point_spec.empty()) {
        g = SimplexGeom::point(parse_vec3(point_spec, "--point"));
    } else if (!edge_spec.empty()) {
        const auto colon = edge_spec.find(':');
        if (colon == std::string::npos) fail("--edge expects \"ax,ay,az:bx,by,bz\"");
        g = SimplexGeom::edge(parse_vec3(edge_spec.substr(0, colon), "--edge"),
                              parse_vec3(edge_spec.substr(colon + 1), "--edge"));
    } else {
        const auto c1 = tri_spec.find(':');
        const auto c2 = c1 == std::string::npos ? std::string::npos : tri_spec.find(':', c1 + 1);
        if (c2 == std::string::npos) fail("--tri expects \"ax,ay,az:bx,by,bz:cx,cy,cz\"");
        g = SimplexGeom::triangle(parse_vec3(tri_spec.substr(0, c1), "--tri"),
                                  parse_vec3(tri_spec.substr(c1 + 1, c2 - c1 - 1), "--tri"),
                                  parse_vec3(tri_spec.substr(c2 + 1), "--tri"));
    }

    EvalScratch scratch;
    const SmoothResult r = smooth_min_dist(s.mesh, s.bvh, s.weights, g, params, scratch);
    const ExactMinResult em = exact_min_distance(s.mesh, g);

    std::printf("d_hat      = %s\n", fmt(r.d_hat).c_str());
    std::printf("grad       = (%s, %s, %s)\n", fmt(r.grad.x()).c_str(), fmt(r.grad.y()).c_str(),
                fmt(r.grad.z()).c_str());
    std::printf("d_min      = %s  (primitive %zu)\n", fmt(em.distance).c_str(), em.argmin);
    std::printf("gap        = %s\n", fmt(em.distance - r.d_hat).c_str());
    std::printf("leaves     = %lld  far_field = %lld  (of %zu primitives)\n",
                static_cast<long long>(r.leaves), static_cast<long long>(r.far_field),
                s.mesh.num_simplices());
    if (exact_check) {
        const SmoothResult flat = smooth_min_dist_flat(s.mesh, s.weights, g, params);
        const double diff = flat.d_hat == r.d_hat ? 0.0 : std::abs(flat.d_hat - r.d_hat);
        std::printf("flat oracle: d_hat = %s  |diff| = %s%s\n", fmt(flat.d_hat).c_str(),
                    fmt(diff).c_str(),
                    params.beta > 0.0 ? "  (beta > 0: difference includes far-field error)" : "");
    }
    return 0;
}

int run_demo(const std::string& scenario, const std::string& mode_name, int steps, double dt,
             const std::string& out_path) {
    if (steps < 0) fail("--steps must be >= 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) fail("--dt must be positive");
    const ConstraintMode mode = [&] {
        if (mode_name == "smooth") return ConstraintMode::Smooth;
        if (mode_name == "exact") return ConstraintMode::Exact;
        fail("--mode must be smooth or exact");
    }();
    const DemoScenario sc = make_scenario(scenario);
    std::printf("scenario=%s mode=%s alpha=%g alpha-u=%g start=(%g, %g) h=%g\n", sc.name.c_str(),
                to_string(mode), sc.params.alpha, sc.params.alpha_u, sc.start.x(), sc.start.y(),
                dt);
    const std::vector<DemoRow> rows = smoothdist::run_demo(sc, mode, steps, dt);
    write_demo_csv(rows, out_path);
    const DemoRow& last = rows.back();
    std::printf("wrote %s (%zu rows)\n", out_path.c_str(), rows.size());
    std::printf("final: t=%.6g p=(%.6g, %.6g) constraint=%.6g\n", last.t, last.position.x(),
                last.position.y(), last.constraint);
    return 0;
}

int run_gen(const std::string& shape, int n, std::uint64_t seed, double width, double height,
            const std::string& out_path) {
    std::mt19937_64 rng(seed);
    SimplexMesh mesh;
    if (shape == "icosphere")
        mesh = shapes::icosphere(n);
    else if (shape == "torus")
        mesh = shapes::uv_torus();
    else if (shape == "strip")
        mesh = shapes::triangle_strip(n, rng);
    else if (shape == "fan")
        mesh = shapes::triangle_fan(n, rng);
    else if (shape == "polyline")
        mesh = shapes::polyline(n, rng);
    else if (shape == "cloud")
        mesh = shapes::point_cluster(n, rng);
    else if (shape == "scene")
        mesh = shapes::random_scene(seed, n);
    else if (shape == "vbowl")
        mesh = shapes::v_bowl(width, height);
    else
        fail("unknown shape '" + shape +
             "' (icosphere, torus, strip, fan, polyline, cloud, scene, vbowl)");
    validate(mesh);
    save_obj(mesh, out_path);
    std::printf("wrote %s (%zu vertices, %zu primitives)\n", out_path.c_str(),
                mesh.num_vertices(), mesh.num_simplices());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "smoothdist: conservative smooth minimum distance over points, edges and triangles"};
    app.require_subcommand(1);
    int rc = 0;

    // trace ------------------------------------------------------------
    auto* trace = app.add_subcommand("trace", "sphere-trace the zero isosurface to PPM/PNG");
    std::string tr_mesh, tr_out;
    ParamFlags tr_pf;
    RenderFlags tr_rf;
    int tr_threads = default_thread_count();
    trace->add_option("mesh", tr_mesh, "input mesh (.obj/.ply/.xyz)")->required();
    tr_pf.attach(trace);
    tr_rf.attach(trace);
    trace->add_option("--threads", tr_threads, "worker threads")->capture_default_str();
    trace->add_option("--out", tr_out, "output image (.ppm or .png)")->required();
    trace->callback([&] { rc = run_trace(tr_mesh, tr_pf, tr_rf, tr_out, tr_threads); });

    // bench ------------------------------------------------------------
    auto* bench = app.add_subcommand("bench", "evaluate d_hat on an N^3 voxel grid, write CSV");
    std::string be_mesh, be_out;
    ParamFlags be_pf;
    int be_grid = 100, be_threads = default_thread_count();
    bench->add_option("mesh", be_mesh, "input mesh")->required();
    be_pf.attach(bench);
    bench->add_option("--grid", be_grid, "grid resolution N")->capture_default_str();
    bench->add_option("--threads", be_threads, "worker threads")->capture_default_str();
    bench->add_option("--out", be_out, "output CSV")->required();
    bench->callback([&] { rc = run_bench(be_mesh, be_pf, be_grid, be_out, be_threads); });

    // ablate -----------------------------------------------------------
    auto* ablate = app.add_subcommand("ablate", "render-time/displacement ablation over beta");
    std::string ab_mesh, ab_out;
    ParamFlags ab_pf;
    RenderFlags ab_rf;
    std::vector<double> ab_betas;
    int ab_threads = default_thread_count();
    ablate->add_option("mesh", ab_mesh, "input mesh")->required();
    ab_pf.attach(ablate, /*with_beta=*/false);
    ab_rf.attach(ablate);
    ablate->add_option("--betas", ab_betas, "beta values (default 0 0.1 0.2 0.3 0.4 0.5)");
    ablate->add_option("--threads", ab_threads, "worker threads")->capture_default_str();
    ablate->add_option("--out", ab_out, "output CSV")->required();
    ablate->callback(
        [&] { rc = run_ablate(ab_mesh, ab_pf, ab_betas, ab_rf, ab_out, ab_threads); });

    // query ------------------------------------------------------------
    auto* query = app.add_subcommand("query", "evaluate one query and print a report");
    std::string qu_mesh, qu_point, qu_edge, qu_tri;
    ParamFlags qu_pf;
    bool qu_exact = false;
    query->add_option("mesh", qu_mesh, "input mesh")->required();
    qu_pf.attach(query);
    query->add_option("--point", qu_point, "query point \"x,y,z\"");
    query->add_option("--edge", qu_edge, "query edge \"ax,ay,az:bx,by,bz\"");
    query->add_option("--tri", qu_tri, "query triangle \"a:b:c\" with three \"x,y,z\"");
    query->add_flag("--exact", qu_exact, "also run the flat-sum oracle and print the difference");
    query->callback([&] { rc = run_query(qu_mesh, qu_pf, qu_point, qu_edge, qu_tri, qu_exact); });

    // demo ---------------------------------------------------------------
    auto* demo = app.add_subcommand("demo", "drop a point mass into a V-bowl, write CSV");
    std::string de_scenario = "shallow", de_mode = "smooth", de_out;
    int de_steps = 1000;
    double de_dt = 1.0 / 200.0;
    demo->add_option("--scenario", de_scenario, "shallow or deep")->capture_default_str();
    demo->add_option("--mode", de_mode, "smooth or exact constraint")->capture_default_str();
    demo->add_option("--steps", de_steps, "number of time steps")->capture_default_str();
    demo->add_option("--dt", de_dt, "time step h")->capture_default_str();
    demo->add_option("--out", de_out, "output CSV")->required();
    demo->callback([&] { rc = run_demo(de_scenario, de_mode, de_steps, de_dt, de_out); });

    // gen ----------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a test mesh and write OBJ");
    std::string ge_shape = "icosphere", ge_out;
    int ge_n = 2;
    std::uint64_t ge_seed = 1;
    double ge_width = 1.5, ge_height = 0.5;
    gen->add_option("--shape", ge_shape,
                    "icosphere | torus | strip | fan | polyline | cloud | scene | vbowl")
        ->capture_default_str();
    gen->add_option("--n", ge_n, "size knob (subdivisions / primitive count)")
        ->capture_default_str();
    gen->add_option("--seed", ge_seed, "random seed")->capture_default_str();
    gen->add_option("--width", ge_width, "vbowl half-width")->capture_default_str();
    gen->add_option("--height", ge_height, "vbowl height")->capture_default_str();
    gen->add_option("--out", ge_out, "output OBJ")->required();
    gen->callback([&] { rc = run_gen(ge_shape, ge_n, ge_seed, ge_width, ge_height, ge_out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
