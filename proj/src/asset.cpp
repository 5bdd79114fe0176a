#include "asmb/asset.hpp"

#include <openssl/evp.h>

#include "asmb/error.hpp"

namespace asmb {

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw error(errc::io_error, "sha256 failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

json asset_record(const TriMesh& mesh, const std::optional<MoleculeMeta>& meta) {
    json rec;
    rec["obj"] = export_obj(mesh);
    rec["scalars"] = json::object();
    for (const auto& [name, values] : mesh.scalars) rec["scalars"][name] = values;
    if (meta) {
        rec["meta"] = {{"n_terminus", {meta->n_terminus.x, meta->n_terminus.y, meta->n_terminus.z}},
                       {"c_terminus", {meta->c_terminus.x, meta->c_terminus.y, meta->c_terminus.z}},
                       {"source_id", meta->source_id}};
    }
    return rec;
}

AssetPtr make_asset(TriMesh mesh, std::optional<MoleculeMeta> meta) {
    validate_mesh(mesh);
    if (mesh.triangles.empty()) throw error(errc::empty_mesh, "mesh has no triangles");
    auto a = std::make_shared<MeshAsset>();
    a->hash = sha256_hex(canonical_dump(asset_record(mesh, meta)));
    a->box = fit_local_box(mesh);
    a->bvh = build_bvh(mesh, 4);
    Vec3 sum;
    for (const auto& v : mesh.vertices) sum += v;
    a->centroid = sum / static_cast<double>(mesh.vertices.size());
    a->mesh = std::move(mesh);
    a->meta = std::move(meta);
    return a;
}

} // namespace asmb
