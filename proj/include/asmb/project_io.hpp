#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "asmb/canonical_json.hpp"
#include "asmb/scene.hpp"

namespace asmb {

inline constexpr int project_format_version = 1;
inline constexpr int anim_format_version = 1;

struct SaveOptions {
    // mesh hash -> path written instead of embedding the OBJ text. The caller
    // is responsible for writing the file (see write_external_meshes).
    std::map<std::string, std::string> external_paths;
};

json transform_to_json(const RigidTransform& t);
RigidTransform transform_from_json(const json& j, const std::string& path = "");

json project_to_json(const SceneDoc& doc, const SaveOptions& opts = {});
std::string save(const SceneDoc& doc, const SaveOptions& opts = {});
// External mesh paths resolve against base_dir.
SceneDoc load(std::string_view bytes, const std::filesystem::path& base_dir = {});

// Writes OBJ files for every mesh listed in opts.external_paths.
void write_external_meshes(const SceneDoc& doc, const SaveOptions& opts, const std::filesystem::path& base_dir);

// Clipboard: objects, the groups they belong to and connectors between them,
// with embedded meshes. Pasting re-ids everything and drops chain membership.
std::string copy_fragment(const SceneDoc& doc, const std::vector<ObjectId>& ids);
std::vector<ObjectId> paste_fragment(SceneDoc& doc, std::string_view bytes);

struct AnimOptions {
    double fps = 24;
    double t0 = 0;
    double t1 = 0;
    Vec3 light_direction{0, 1, 0};
};

// floor((t1 - t0) * fps) + 1, tolerant of representation error in the product.
std::uint64_t frame_count(double t0, double t1, double fps);
double frame_time(double t0, double fps, std::uint64_t i);

json export_animation_json(const SceneDoc& doc, const AnimOptions& opts);
std::string export_animation(const SceneDoc& doc, const AnimOptions& opts);

struct ImportOptions {
    std::string format; // "obj" or "pdb"; empty: from the file extension
    double sphere_scale = 1.0;
    unsigned subdiv = 0;
};

AssetPtr import_model_text(std::string_view text, const std::string& format, const ImportOptions& opts,
                           const std::string& source_id = {});
AssetPtr import_model_file(const std::filesystem::path& path, const ImportOptions& opts = {});

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view bytes);

} // namespace asmb
