#include "asmb/geometry.hpp"

#include <algorithm>
#include <cctype>

#include "asmb/error.hpp"
#include "asmb/kernels.hpp"
#include "asmb/text.hpp"

namespace asmb {

std::array<Vec3, 8> LocalBox::corners() const {
    return {Vec3{min.x, min.y, min.z}, Vec3{max.x, min.y, min.z}, Vec3{min.x, max.y, min.z},
            Vec3{max.x, max.y, min.z}, Vec3{min.x, min.y, max.z}, Vec3{max.x, min.y, max.z},
            Vec3{min.x, max.y, max.z}, Vec3{max.x, max.y, max.z}};
}

double triangle_double_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return norm(cross(b - a, c - a));
}

namespace {

long long parse_face_ref(std::string_view token, std::size_t line_no) {
    const auto slash = token.find('/');
    const auto idx = text::parse_int(token.substr(0, slash));
    if (!idx) {
        throw error(errc::malformed_line, "bad face index '" + std::string(token) + "'", line_no);
    }
    return *idx;
}

} // namespace

TriMesh load_obj(std::string_view content) {
    TriMesh mesh;
    struct pending_face {
        std::vector<long long> refs;
        std::size_t line;
    };
    std::vector<pending_face> faces;

    const auto lines = text::split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        auto line = lines[i];
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto tok = text::split_ws(line);
        if (tok.empty()) continue;
        if (tok[0] == "v") {
            if (tok.size() < 4 || tok.size() > 5) throw error(errc::malformed_line, "vertex needs 3 coordinates", line_no);
            Vec3 p;
            for (std::size_t k = 0; k < 3; ++k) {
                const auto v = text::parse_double(tok[k + 1]);
                if (!v) throw error(errc::malformed_line, "bad coordinate '" + std::string(tok[k + 1]) + "'", line_no);
                p[k] = *v;
            }
            mesh.vertices.push_back(p);
        } else if (tok[0] == "f") {
            if (tok.size() < 4) throw error(errc::malformed_line, "face needs at least 3 vertices", line_no);
            pending_face f{{}, line_no};
            for (std::size_t k = 1; k < tok.size(); ++k) {
                long long r = parse_face_ref(tok[k], line_no);
                // Relative indices refer to vertices parsed so far.
                if (r < 0) r = static_cast<long long>(mesh.vertices.size()) + r + 1;
                f.refs.push_back(r);
            }
            faces.push_back(std::move(f));
        }
    }

    const auto nv = static_cast<long long>(mesh.vertices.size());
    for (const auto& f : faces) {
        for (long long r : f.refs) {
            if (r < 1 || r > nv) {
                throw error(errc::index_out_of_range,
                            "vertex " + std::to_string(r) + " of " + std::to_string(nv), f.line);
            }
        }
        for (std::size_t k = 1; k + 1 < f.refs.size(); ++k) {
            const Triangle t{static_cast<std::uint32_t>(f.refs[0] - 1), static_cast<std::uint32_t>(f.refs[k] - 1),
                             static_cast<std::uint32_t>(f.refs[k + 1] - 1)};
            if (triangle_double_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]) <=
                2 * min_triangle_area) {
                continue;
            }
            mesh.triangles.push_back(t);
        }
    }
    return mesh;
}

std::string export_obj(const TriMesh& mesh) {
    std::string out;
    out.reserve(mesh.vertices.size() * 32 + mesh.triangles.size() * 16);
    for (const auto& v : mesh.vertices) {
        out += "v ";
        out += text::format_double(v.x);
        out += ' ';
        out += text::format_double(v.y);
        out += ' ';
        out += text::format_double(v.z);
        out += '\n';
    }
    for (const auto& t : mesh.triangles) {
        out += "f " + std::to_string(t[0] + 1) + ' ' + std::to_string(t[1] + 1) + ' ' + std::to_string(t[2] + 1) + '\n';
    }
    return out;
}

double vdw_radius_nm(std::string_view element) {
    std::string e;
    for (char c : element) e += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    double angstrom = 1.60;
    if (e == "C") angstrom = 1.70;
    else if (e == "N") angstrom = 1.55;
    else if (e == "O") angstrom = 1.52;
    else if (e == "S") angstrom = 1.80;
    else if (e == "H") angstrom = 1.20;
    else if (e == "P") angstrom = 1.80;
    return angstrom / 10.0;
}

TriMesh icosphere(unsigned subdiv) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    TriMesh m;
    m.vertices = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0}, {0, -1, phi}, {0, 1, phi},
                  {0, -1, -phi}, {0, 1, -phi}, {phi, 0, -1},  {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
    for (auto& v : m.vertices) v = v / norm(v);
    m.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                   {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                   {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    for (unsigned level = 0; level < subdiv; ++level) {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoints;
        auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
            const auto key = std::minmax(a, b);
            const auto it = midpoints.find(key);
            if (it != midpoints.end()) return it->second;
            const Vec3 p = (m.vertices[a] + m.vertices[b]) * 0.5;
            m.vertices.push_back(p / norm(p));
            const auto idx = static_cast<std::uint32_t>(m.vertices.size() - 1);
            midpoints.emplace(key, idx);
            return idx;
        };
        std::vector<Triangle> next;
        next.reserve(m.triangles.size() * 4);
        for (const auto& t : m.triangles) {
            const auto ab = midpoint(t[0], t[1]);
            const auto bc = midpoint(t[1], t[2]);
            const auto ca = midpoint(t[2], t[0]);
            next.push_back({t[0], ab, ca});
            next.push_back({t[1], bc, ab});
            next.push_back({t[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        m.triangles = std::move(next);
    }
    return m;
}

namespace {

std::string_view column(std::string_view line, std::size_t first, std::size_t last) {
    // 1-based inclusive fixed columns.
    if (line.size() < first) return {};
    return line.substr(first - 1, std::min(last, line.size()) - first + 1);
}

struct atom_record {
    Vec3 position; // nm
    std::string element;
    std::string name;
    char chain = ' ';
};

} // namespace

PdbImport load_pdb_spheres(std::string_view content, double sphere_radius_scale, unsigned subdiv,
                           std::string source_id) {
    if (subdiv > 1) throw error(errc::invalid_argument, "subdiv must be 0 or 1");
    if (!(sphere_radius_scale > 0)) throw error(errc::invalid_argument, "sphere radius scale must be positive");

    std::vector<atom_record> atoms;
    const auto lines = text::split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = lines[i];
        if (line.starts_with("ENDMDL")) break;
        if (!line.starts_with("ATOM") && !line.starts_with("HETATM")) continue;
        if (line.starts_with("ATOM") && line.size() > 4 && line[4] != ' ') continue;
        if (line.size() < 54) throw error(errc::unparseable_record, "record shorter than 54 columns", i + 1);
        atom_record a;
        for (std::size_t k = 0; k < 3; ++k) {
            const auto v = text::parse_double(column(line, 31 + 8 * k, 38 + 8 * k));
            if (!v) throw error(errc::unparseable_record, "bad coordinate field", i + 1);
            a.position[k] = *v / 10.0;
        }
        a.name = std::string(text::trim(column(line, 13, 16)));
        a.chain = line.size() >= 22 ? line[21] : ' ';
        a.element = std::string(text::trim(column(line, 77, 78)));
        if (a.element.empty()) {
            for (char c : a.name) {
                if (std::isalpha(static_cast<unsigned char>(c))) {
                    a.element = std::string(1, c);
                    break;
                }
            }
        }
        atoms.push_back(std::move(a));
    }
    if (atoms.empty()) throw error(errc::no_atoms, "no ATOM/HETATM records");

    PdbImport out;
    const TriMesh unit = icosphere(subdiv);
    out.mesh.vertices.reserve(atoms.size() * unit.vertices.size());
    out.mesh.triangles.reserve(atoms.size() * unit.triangles.size());
    for (const auto& a : atoms) {
        const double r = vdw_radius_nm(a.element) * sphere_radius_scale;
        const auto offset = static_cast<std::uint32_t>(out.mesh.vertices.size());
        for (const auto& v : unit.vertices) out.mesh.vertices.push_back(a.position + v * r);
        for (const auto& t : unit.triangles) out.mesh.triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
    }

    const char first_chain = atoms.front().chain;
    std::vector<const atom_record*> alpha, chain_atoms;
    for (const auto& a : atoms) {
        if (a.chain != first_chain) continue;
        chain_atoms.push_back(&a);
        if (a.name == "CA") alpha.push_back(&a);
    }
    const auto& termini = alpha.empty() ? chain_atoms : alpha;
    out.meta.n_terminus = termini.front()->position;
    out.meta.c_terminus = termini.back()->position;
    out.meta.source_id = std::move(source_id);
    return out;
}

LocalBox fit_local_box(const TriMesh& mesh) {
    if (mesh.vertices.empty()) throw error(errc::empty_mesh, "mesh has no vertices");
    const auto b = kernels::point_bounds(mesh.vertices);
    return {b.min, b.max};
}

LocalBox world_aabb(const LocalBox& box, const RigidTransform& t) {
    const auto c = box.corners();
    Vec3 lo = t.apply(c[0]);
    Vec3 hi = lo;
    for (std::size_t i = 1; i < c.size(); ++i) {
        const Vec3 p = t.apply(c[i]);
        lo = min(lo, p);
        hi = max(hi, p);
    }
    return {lo, hi};
}

void validate_mesh(const TriMesh& mesh) {
    const auto n = mesh.vertices.size();
    for (const auto& v : mesh.vertices) {
        if (!is_finite(v)) throw error(errc::invalid_argument, "non-finite vertex");
    }
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
        const auto& t = mesh.triangles[i];
        if (t[0] >= n || t[1] >= n || t[2] >= n) {
            throw error(errc::index_out_of_range, "triangle " + std::to_string(i) + " index out of range");
        }
        if (triangle_double_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]) <= 2 * min_triangle_area) {
            throw error(errc::invalid_argument, "triangle " + std::to_string(i) + " is degenerate");
        }
    }
    for (const auto& [name, values] : mesh.scalars) {
        if (values.size() != n) throw error(errc::invalid_argument, "scalar channel '" + name + "' length mismatch");
    }
}

} // namespace asmb
