#pragma once

#include "mesh.hpp"

#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace smoothdist {

enum class MeshFormat { Auto, Obj, Ply, Xyz };

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& path, std::size_t line, const std::string& what) {
    std::ostringstream os;
    os << path << ":" << line << ": " << what;
    fail(os.str());
}

inline std::string lower_ext(const std::string& path) {
    auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return {};
    std::string ext = path.substr(dot + 1);
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

// OBJ indices are 1-based; negative values count back from the current end.
inline std::int32_t obj_index(long raw, std::size_t nverts, const std::string& path, std::size_t line) {
    long idx = raw > 0 ? raw - 1 : static_cast<long>(nverts) + raw;
    if (raw == 0 || idx < 0 || idx >= static_cast<long>(nverts))
        parse_fail(path, line, "vertex index " + std::to_string(raw) + " out of range");
    return static_cast<std::int32_t>(idx);
}

inline SimplexMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open " + path);
    SimplexMesh mesh;
    std::string token;
    std::size_t lineno = 0;
    bool any_element = false;
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        if (!(ls >> token) || token[0] == '#') continue;
        if (token == "v") {
            Vec3 p;
            if (!(ls >> p.x() >> p.y() >> p.z())) parse_fail(path, lineno, "malformed vertex");
            mesh.vertices.push_back(p);
        } else if (token == "f") {
            any_element = true;
            std::vector<std::int32_t> poly;
            std::string ent;
            while (ls >> ent) {
                // entries may carry /texture/normal references; the lead index is ours
                long raw = std::strtol(ent.c_str(), nullptr, 10);
                poly.push_back(obj_index(raw, mesh.vertices.size(), path, lineno));
            }
            if (poly.size() < 3) parse_fail(path, lineno, "face with fewer than 3 vertices");
            for (std::size_t i = 2; i < poly.size(); ++i)
                mesh.simplices.push_back(Simplex::triangle(poly[0], poly[i - 1], poly[i]));
        } else if (token == "l") {
            any_element = true;
            std::vector<std::int32_t> chain;
            std::string ent;
            while (ls >> ent) {
                long raw = std::strtol(ent.c_str(), nullptr, 10);
                chain.push_back(obj_index(raw, mesh.vertices.size(), path, lineno));
            }
            if (chain.size() < 2) parse_fail(path, lineno, "line with fewer than 2 vertices");
            for (std::size_t i = 1; i < chain.size(); ++i)
                mesh.simplices.push_back(Simplex::edge(chain[i - 1], chain[i]));
        } else if (token == "p") {
            any_element = true;
            std::string ent;
            while (ls >> ent) {
                long raw = std::strtol(ent.c_str(), nullptr, 10);
                mesh.simplices.push_back(Simplex::point(obj_index(raw, mesh.vertices.size(), path, lineno)));
            }
        }
        // all other records (vn, vt, o, g, usemtl, ...) are ignored
    }
    // A vertices-only file is treated as a point cloud.
    if (!any_element) {
        for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
            mesh.simplices.push_back(Simplex::point(static_cast<std::int32_t>(i)));
    }
    return mesh;
}

inline SimplexMesh load_xyz(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open " + path);
    SimplexMesh mesh;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first) || first[0] == '#') continue;
        Vec3 p;
        char* end = nullptr;
        p.x() = std::strtod(first.c_str(), &end);
        if (end == first.c_str()) parse_fail(path, lineno, "expected number");
        if (!(ls >> p.y() >> p.z())) parse_fail(path, lineno, "expected 3 coordinates");
        mesh.vertices.push_back(p);
        mesh.simplices.push_back(Simplex::point(static_cast<std::int32_t>(mesh.vertices.size() - 1)));
    }
    return mesh;
}

// Minimal PLY reader: extracts vertex positions (any numeric property type),
// skips every other element/property, handles ascii and binary_little_endian.
inline SimplexMesh load_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open " + path);

    struct Prop {
        std::string type, name;
        bool is_list = false;
        std::string count_type;
    };
    struct Elem {
        std::string name;
        std::size_t count = 0;
        std::vector<Prop> props;
    };

    auto type_size = [&](const std::string& t) -> std::size_t {
        if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
        if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
        if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" || t == "float32") return 4;
        if (t == "double" || t == "float64") return 8;
        fail("ply: unknown property type " + t);
    };

    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&]() -> std::string {
        if (!std::getline(in, line)) parse_fail(path, lineno, "unexpected end of header");
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };

    if (next_line() != "ply") parse_fail(path, lineno, "not a PLY file");
    bool binary = false;
    std::vector<Elem> elems;
    for (;;) {
        std::istringstream ls(next_line());
        std::string tok;
        ls >> tok;
        if (tok == "comment" || tok == "obj_info" || tok.empty()) continue;
        if (tok == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "ascii") binary = false;
            else if (fmt == "binary_little_endian") binary = true;
            else parse_fail(path, lineno, "unsupported PLY format " + fmt);
        } else if (tok == "element") {
            Elem e;
            ls >> e.name >> e.count;
            elems.push_back(e);
        } else if (tok == "property") {
            if (elems.empty()) parse_fail(path, lineno, "property before element");
            Prop p;
            ls >> p.type;
            if (p.type == "list") {
                p.is_list = true;
                ls >> p.count_type >> p.type;
            }
            ls >> p.name;
            elems.back().props.push_back(p);
        } else if (tok == "end_header") {
            break;
        } else {
            parse_fail(path, lineno, "unknown header token " + tok);
        }
    }

    auto read_binary_scalar = [&](const std::string& t) -> double {
        unsigned char buf[8];
        in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(type_size(t)));
        if (!in) fail(path + ": truncated PLY payload");
        if (t == "float" || t == "float32") {
            float f;
            std::memcpy(&f, buf, 4);
            return f;
        }
        if (t == "double" || t == "float64") {
            double d;
            std::memcpy(&d, buf, 8);
            return d;
        }
        // integral types
        std::uint64_t u = 0;
        for (std::size_t i = 0; i < type_size(t); ++i) u |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        if (t == "char" || t == "int8") return static_cast<std::int8_t>(u);
        if (t == "short" || t == "int16") return static_cast<std::int16_t>(u);
        if (t == "int" || t == "int32") return static_cast<std::int32_t>(u);
        return static_cast<double>(u);
    };

    SimplexMesh mesh;
    for (const Elem& e : elems) {
        const bool is_vertex = (e.name == "vertex");
        int ix = -1, iy = -1, iz = -1;
        for (std::size_t p = 0; p < e.props.size(); ++p) {
            if (e.props[p].name == "x") ix = static_cast<int>(p);
            if (e.props[p].name == "y") iy = static_cast<int>(p);
            if (e.props[p].name == "z") iz = static_cast<int>(p);
        }
        if (is_vertex && (ix < 0 || iy < 0 || iz < 0)) fail(path + ": PLY vertex element lacks x/y/z");
        for (std::size_t i = 0; i < e.count; ++i) {
            Vec3 pos = Vec3::Zero();
            for (std::size_t p = 0; p < e.props.size(); ++p) {
                const Prop& pr = e.props[p];
                std::size_t n = 1;
                if (pr.is_list) {
                    double cnt = binary ? read_binary_scalar(pr.count_type) : [&] {
                        double v;
                        if (!(in >> v)) fail(path + ": truncated PLY payload");
                        return v;
                    }();
                    n = static_cast<std::size_t>(cnt);
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double val;
                    if (binary) {
                        val = read_binary_scalar(pr.type);
                    } else if (!(in >> val)) {
                        fail(path + ": truncated PLY payload");
                    }
                    if (is_vertex && !pr.is_list) {
                        if (static_cast<int>(p) == ix) pos.x() = val;
                        if (static_cast<int>(p) == iy) pos.y() = val;
                        if (static_cast<int>(p) == iz) pos.z() = val;
                    }
                }
            }
            if (is_vertex) {
                mesh.vertices.push_back(pos);
                mesh.simplices.push_back(Simplex::point(static_cast<std::int32_t>(mesh.vertices.size() - 1)));
            }
        }
    }
    return mesh;
}

} // namespace detail

inline SimplexMesh load_mesh(const std::string& path, MeshFormat format = MeshFormat::Auto) {
    if (format == MeshFormat::Auto) {
        const std::string ext = detail::lower_ext(path);
        if (ext == "obj") format = MeshFormat::Obj;
        else if (ext == "ply") format = MeshFormat::Ply;
        else if (ext == "xyz") format = MeshFormat::Xyz;
        else fail("cannot infer mesh format from path: " + path);
    }
    SimplexMesh mesh;
    switch (format) {
        case MeshFormat::Obj: mesh = detail::load_obj(path); break;
        case MeshFormat::Ply: mesh = detail::load_ply(path); break;
        case MeshFormat::Xyz: mesh = detail::load_xyz(path); break;
        default: fail("unreachable");
    }
    validate(mesh);
    return mesh;
}

// Writes vertices at full double precision so a load round-trips bit-exactly.
// Point simplices become `p` records, edges `l`, triangles `f`.
inline void save_obj(const SimplexMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail("cannot open " + path + " for writing");
    char buf[128];
    for (const auto& p : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
        out << buf;
    }
    for (const auto& s : mesh.simplices) {
        switch (s.kind) {
            case SimplexKind::Point: out << "p " << s.v[0] + 1 << "\n"; break;
            case SimplexKind::Edge: out << "l " << s.v[0] + 1 << ' ' << s.v[1] + 1 << "\n"; break;
            case SimplexKind::Triangle:
                out << "f " << s.v[0] + 1 << ' ' << s.v[1] + 1 << ' ' << s.v[2] + 1 << "\n";
                break;
        }
    }
    if (!out) fail("write failed: " + path);
}

} // namespace smoothdist
