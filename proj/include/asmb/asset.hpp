#pragma once

#include <memory>
#include <optional>
#include <string>

#include "asmb/bvh.hpp"
#include "asmb/canonical_json.hpp"
#include "asmb/geometry.hpp"

namespace asmb {

// Immutable mesh plus everything derived from it. Shared by reference
// between every object that instances it.
struct MeshAsset {
    TriMesh mesh;
    std::optional<MoleculeMeta> meta;
    LocalBox box;
    BvhTree bvh;
    Vec3 centroid; // vertex mean, local frame
    std::string hash; // sha256 hex of the canonical record
};

using AssetPtr = std::shared_ptr<const MeshAsset>;

AssetPtr make_asset(TriMesh mesh, std::optional<MoleculeMeta> meta = std::nullopt);

// {"obj": text, "scalars": {...}, "meta": {...}?}; the hash covers exactly this.
json asset_record(const TriMesh& mesh, const std::optional<MoleculeMeta>& meta);
std::string sha256_hex(const std::string& bytes);

} // namespace asmb
