#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "asmb/transforms.hpp"

namespace asmb {

using Triangle = std::array<std::uint32_t, 3>;

struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
    // Named per-vertex scalar channels (e.g. precomputed electrostatics).
    std::map<std::string, std::vector<double>> scalars;

    bool operator==(const TriMesh&) const = default;
};

// Termini of the first chain, local frame, nm. Only PDB imports carry this.
struct MoleculeMeta {
    Vec3 n_terminus;
    Vec3 c_terminus;
    std::string source_id;

    bool operator==(const MoleculeMeta&) const = default;
};

// Axis-aligned in the object's local frame, so oriented once placed.
struct LocalBox {
    Vec3 min;
    Vec3 max;

    Vec3 center() const { return (min + max) * 0.5; }
    Vec3 extent() const { return max - min; }
    bool contains(const Vec3& p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
               p.z <= max.z;
    }
    std::array<Vec3, 8> corners() const;

    bool operator==(const LocalBox&) const = default;
};

inline bool overlaps(const LocalBox& a, const LocalBox& b) {
    return a.min.x <= b.max.x && b.min.x <= a.max.x && a.min.y <= b.max.y && b.min.y <= a.max.y &&
           a.min.z <= b.max.z && b.min.z <= a.max.z;
}

// Twice the triangle area; degenerate below 2e-12.
double triangle_double_area(const Vec3& a, const Vec3& b, const Vec3& c);
constexpr double min_triangle_area = 1e-12;

// Subset: `v`, `f` (n-gons fan-triangulated, v/vt/vn index forms, negative
// indices relative). Other statements are ignored; zero-area triangles dropped.
TriMesh load_obj(std::string_view text);
// `v` lines then `f` lines, 1-based, shortest round-trip decimals.
std::string export_obj(const TriMesh& mesh);

struct PdbImport {
    TriMesh mesh;
    MoleculeMeta meta;
};

// One icosphere per ATOM/HETATM record, van der Waals radius * scale, merged.
// Angstrom coordinates are converted to nm.
PdbImport load_pdb_spheres(std::string_view text, double sphere_radius_scale = 1.0,
                           unsigned subdiv = 0, std::string source_id = {});

// Van der Waals radius in nm for an element symbol (case-insensitive).
double vdw_radius_nm(std::string_view element);
// Unit-radius icosphere centered at the origin; 12 vertices at level 0, 42 at level 1.
TriMesh icosphere(unsigned subdiv);

LocalBox fit_local_box(const TriMesh& mesh);
// World-frame enclosing box of the transformed local box.
LocalBox world_aabb(const LocalBox& box, const RigidTransform& t);

void validate_mesh(const TriMesh& mesh);

} // namespace asmb
