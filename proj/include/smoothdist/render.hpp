#pragma once

#include "mesh.hpp"
#include "parallel.hpp"
#include "smooth.hpp"

#include <zlib.h>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace smoothdist {

struct RenderConfig {
    Vec3 origin = Vec3(1.5, 1.5, 1.5);
    Vec3 target = Vec3(0.5, 0.5, 0.5);
    Vec3 up = Vec3(0, 1, 0);
    double fov_deg = 45.0;
    int width = 256, height = 256;
    double threshold = 0.0;  // hit when d_hat < threshold; 0 = 1e-3 * bbox diagonal
    int max_steps = 128;
};

struct Image {
    int width = 0, height = 0;
    std::vector<std::uint8_t> rgb;  // 3 bytes per pixel, rows top to bottom

    std::uint8_t* pixel(int x, int y) { return rgb.data() + 3 * (std::size_t(y) * width + x); }
    const std::uint8_t* pixel(int x, int y) const {
        return rgb.data() + 3 * (std::size_t(y) * width + x);
    }
};

struct RenderResult {
    Image image;
    std::vector<double> hit_t;  // per pixel: ray parameter at the hit, or -1 on miss
    double seconds = 0.0;
    std::int64_t leaves = 0, far_field = 0;
    std::int64_t rays = 0, hits = 0;
    double mean_leaves_per_ray = 0.0;
};

namespace detail {

struct CameraFrame {
    Vec3 origin, forward, right, up;
    double half_w, half_h;
};

inline CameraFrame make_camera(const RenderConfig& cfg) {
    CameraFrame cam;
    cam.origin = cfg.origin;
    cam.forward = (cfg.target - cfg.origin).normalized();
    cam.right = cam.forward.cross(cfg.up).normalized();
    cam.up = cam.right.cross(cam.forward);
    cam.half_h = std::tan(cfg.fov_deg * M_PI / 360.0);
    cam.half_w = cam.half_h * double(cfg.width) / double(cfg.height);
    return cam;
}

inline Vec3 pixel_ray(const CameraFrame& cam, const RenderConfig& cfg, int x, int y) {
    const double u = (2.0 * (x + 0.5) / cfg.width - 1.0) * cam.half_w;
    const double v = (1.0 - 2.0 * (y + 0.5) / cfg.height) * cam.half_h;
    return (cam.forward + u * cam.right + v * cam.up).normalized();
}

} // namespace detail

// Sphere-traces the zero isosurface of d_hat. The field underestimates the
// true distance, so stepping by d_hat never jumps through the surface; steps
// are clamped below by 0.1 * threshold to guarantee progress across the
// negative shell. Each pixel is independent and pure, so output is
// bit-identical across runs and thread counts.
inline RenderResult render(const SimplexMesh& mesh, const Bvh& bvh, const WeightSet& ws,
                           const SmoothParams& params, const RenderConfig& cfg,
                           int threads = default_thread_count()) {
    RenderResult out;
    out.image.width = cfg.width;
    out.image.height = cfg.height;
    out.image.rgb.assign(std::size_t(cfg.width) * cfg.height * 3, 0);
    out.hit_t.assign(std::size_t(cfg.width) * cfg.height, -1.0);
    out.rays = std::int64_t(cfg.width) * cfg.height;

    const Aabb box = bounding_box(mesh);
    const double diag = box.diagonal();
    const double threshold = cfg.threshold > 0.0 ? cfg.threshold : 1e-3 * std::max(diag, 1e-12);
    const double min_step = 0.1 * threshold;
    const detail::CameraFrame cam = detail::make_camera(cfg);
    const double t_far =
        (box.center() - cfg.origin).norm() + std::max(diag, 1e-12) * 1.5 + threshold;

    std::vector<std::int64_t> leaves(threads > 0 ? threads : 1, 0), far(threads > 0 ? threads : 1, 0);
    std::vector<std::int64_t> hits(leaves.size(), 0);

    const auto start = std::chrono::steady_clock::now();
    parallel_for(std::size_t(cfg.height), threads, [&](std::size_t y0, std::size_t y1, int worker) {
        EvalScratch scratch;
        for (std::size_t y = y0; y < y1; ++y) {
            for (int x = 0; x < cfg.width; ++x) {
                const Vec3 dir = detail::pixel_ray(cam, cfg, x, int(y));
                double t = 0.0;
                for (int step = 0; step < cfg.max_steps && t <= t_far; ++step) {
                    const SmoothResult r = smooth_min_dist(
                        mesh, bvh, ws, SimplexGeom::point(cam.origin + t * dir), params, scratch);
                    leaves[worker] += r.leaves;
                    far[worker] += r.far_field;
                    if (r.d_hat < threshold) {
                        out.hit_t[y * cfg.width + x] = t;
                        ++hits[worker];
                        const double gn = r.grad.norm();
                        const Vec3 n = gn > 0.0 ? Vec3(r.grad / gn) : -dir;
                        const double shade = std::abs(n.dot(dir));
                        const auto gray = std::uint8_t(16.5 + 239.0 * std::min(1.0, shade));
                        std::uint8_t* px = out.image.pixel(x, int(y));
                        px[0] = px[1] = px[2] = gray;
                        break;
                    }
                    t += std::max(std::isfinite(r.d_hat) ? r.d_hat : t_far, min_step);
                }
            }
        }
    });
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        out.leaves += leaves[i];
        out.far_field += far[i];
        out.hits += hits[i];
    }
    out.mean_leaves_per_ray = out.rays > 0 ? double(out.leaves) / double(out.rays) : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Image output: PPM (P6) is the golden format; PNG via zlib is optional.
// ---------------------------------------------------------------------------
inline void write_ppm(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open " + path + " for writing");
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.rgb.data()),
              static_cast<std::streamsize>(img.rgb.size()));
    if (!out) fail("write failed: " + path);
}

namespace detail {

inline void png_chunk(std::ofstream& out, const char type[4], const std::uint8_t* data,
                      std::uint32_t len) {
    auto be32 = [&](std::uint32_t v) {
        const std::uint8_t b[4] = {std::uint8_t(v >> 24), std::uint8_t(v >> 16),
                                   std::uint8_t(v >> 8), std::uint8_t(v)};
        out.write(reinterpret_cast<const char*>(b), 4);
    };
    be32(len);
    out.write(type, 4);
    if (len) out.write(reinterpret_cast<const char*>(data), len);
    std::uint32_t crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(type), 4);
    if (len) crc = crc32(crc, data, len);
    be32(crc);
}

} // namespace detail

inline void write_png(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open " + path + " for writing");
    static const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    out.write(reinterpret_cast<const char*>(sig), 8);

    std::uint8_t ihdr[13];
    auto put32 = [](std::uint8_t* p, std::uint32_t v) {
        p[0] = std::uint8_t(v >> 24);
        p[1] = std::uint8_t(v >> 16);
        p[2] = std::uint8_t(v >> 8);
        p[3] = std::uint8_t(v);
    };
    put32(ihdr, std::uint32_t(img.width));
    put32(ihdr + 4, std::uint32_t(img.height));
    ihdr[8] = 8;   // bit depth
    ihdr[9] = 2;   // truecolor RGB
    ihdr[10] = ihdr[11] = ihdr[12] = 0;
    detail::png_chunk(out, "IHDR", ihdr, 13);

    // filter byte 0 in front of every scanline
    std::vector<std::uint8_t> raw;
    raw.reserve(std::size_t(img.height) * (1 + 3 * std::size_t(img.width)));
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);
        raw.insert(raw.end(), img.pixel(0, y), img.pixel(0, y) + 3 * std::size_t(img.width));
    }
    uLongf comp_len = compressBound(uLong(raw.size()));
    std::vector<std::uint8_t> comp(comp_len);
    if (compress2(comp.data(), &comp_len, raw.data(), uLong(raw.size()), 6) != Z_OK)
        fail("zlib compression failed for " + path);
    detail::png_chunk(out, "IDAT", comp.data(), std::uint32_t(comp_len));
    detail::png_chunk(out, "IEND", nullptr, 0);
    if (!out) fail("write failed: " + path);
}

} // namespace smoothdist
