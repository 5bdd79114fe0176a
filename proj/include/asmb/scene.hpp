#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "asmb/asset.hpp"
#include "asmb/collision.hpp"
#include "asmb/physics.hpp"
#include "asmb/transforms.hpp"

namespace asmb {

using GroupId = std::uint64_t;
using ChainId = std::uint64_t;

// Solid RGB in [0,1], or a per-vertex scalar channel mapped through a colormap.
struct Color {
    std::array<double, 3> rgb{0.8, 0.8, 0.8};
    std::string scalar_channel; // empty: solid
    std::string colormap;       // "rainbow" or "blue-white-red" when scalar_channel is set

    bool operator==(const Color&) const = default;
};

bool is_known_colormap(std::string_view name);
// s is clamped to [0, 1].
std::array<double, 3> colormap_rgb(std::string_view name, double s);

struct Keyframe {
    double time = 0;
    RigidTransform transform;
    Color color;
    std::optional<GroupId> group;
    bool visible = true;

    bool operator==(const Keyframe&) const = default;
};

struct SceneObject {
    ObjectId id = 0;
    std::string name;
    std::string mesh_ref; // content hash into SceneDoc::meshes
    RigidTransform transform;
    Vec3 linear_velocity;
    Vec3 angular_velocity;
    Color color;
    std::optional<GroupId> group;
    bool visible = true;
    std::optional<ChainId> chain;
    std::uint32_t chain_index = 0;
    std::vector<Keyframe> keyframes; // strictly increasing times

    bool operator==(const SceneObject&) const = default;
};

struct Group {
    GroupId id = 0;

    bool operator==(const Group&) const = default;
};

struct CrystalChain {
    ChainId id = 0;
    RigidTransform t_ab;
    std::vector<ObjectId> members; // members[0] is the base, members[1] the second copy

    ObjectId base() const { return members.front(); }
    ObjectId second() const { return members.at(1); }
    bool operator==(const CrystalChain&) const = default;
};

struct SceneDoc {
    std::map<std::string, AssetPtr> meshes;
    std::map<ObjectId, SceneObject> objects;
    std::map<GroupId, Group> groups;
    std::map<ChainId, CrystalChain> chains;
    std::map<ConnectorId, SpringConnector> connectors;
    double duration = 10;
    double current_time = 0;
    PhysicsMode physics_mode = PhysicsMode::pose;
    bool collisions_enabled = true;
    bool springs_enabled = true;
    PhysicsConfig physics;
    std::uint64_t next_id = 1; // shared by objects, groups, chains and connectors

    const SceneObject& object(ObjectId id) const;
    SceneObject& object(ObjectId id);
    const MeshAsset& asset_of(ObjectId id) const;
};

// State-level equality, meshes compared by hash.
bool same_state(const SceneDoc& a, const SceneDoc& b);
// Throws when a cross-reference does not resolve or an invariant fails.
void check_invariants(const SceneDoc& doc);

std::string add_mesh(SceneDoc& doc, AssetPtr asset);

ObjectId spawn(SceneDoc& doc, const std::string& mesh_ref, const RigidTransform& transform,
               std::string name = {});
// Copies share meshes; groups fully or partly covered by `ids` are re-created
// around the copies. Chain membership is not copied.
std::vector<ObjectId> duplicate(SceneDoc& doc, const std::vector<ObjectId>& ids);
// Removing any chain member dissolves the chain; drops connectors to it.
void remove_object(SceneDoc& doc, ObjectId id);

GroupId group(SceneDoc& doc, const std::vector<ObjectId>& ids);
void ungroup(SceneDoc& doc, GroupId id);
// Live members, ascending.
std::vector<ObjectId> group_members(const SceneDoc& doc, GroupId id);
// Keyframes the object's membership at `time`, keeping its motion. If no
// earlier keyframe exists one capturing the current membership is added at 0.
void set_membership_keyframe(SceneDoc& doc, ObjectId object, double time, std::optional<GroupId> group);
std::set<ObjectId> membership(const SceneDoc& doc, GroupId id, double time);

ChainId chain_create(SceneDoc& doc, ObjectId base, ObjectId second, std::size_t count);
// Re-derives t_ab from the base pair and regenerates members 3..n.
void chain_update(SceneDoc& doc, ChainId id);
// Direct transform entry: regenerates members 2..n from the base.
void chain_set_tab(SceneDoc& doc, ChainId id, const RigidTransform& t_ab);
// Moves the whole chain rigidly so member `index` lands on `t`.
void chain_move_rigid(SceneDoc& doc, ChainId id, std::size_t index, const RigidTransform& t);

ConnectorId add_connector(SceneDoc& doc, SpringConnector conn);

const Keyframe& set_keyframe(SceneDoc& doc, ObjectId object, double time);
bool has_keyframe_at(const SceneObject& obj, double time);

struct EvaluatedState {
    RigidTransform transform;
    Color color;
    std::optional<GroupId> group;
    bool visible = true;

    bool operator==(const EvaluatedState&) const = default;
};

EvaluatedState evaluate_object(const SceneObject& obj, double time);
std::map<ObjectId, EvaluatedState> evaluate(const SceneDoc& doc, double time);
// set_time: writes evaluated state into every keyframed object.
void apply_time(SceneDoc& doc, double time);

// Centripetal Catmull-Rom through p1..p2 with neighbors p0, p3 (duplicates allowed).
Vec3 catmull_rom_centripetal(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3, double u);

struct Selection {
    enum class Kind { object, group } kind = Kind::object;
    std::uint64_t id = 0;
};

struct OverlaySpec {
    std::string tag; // "single" or "group"
    std::vector<Segment> edges; // world frame; 12 per box
    std::map<ObjectId, bool> ribbons; // keyframe at current time
};

OverlaySpec selection_overlay(const SceneDoc& doc, const Selection& sel);

// World-frame box edges for a local box under a transform.
std::vector<Segment> box_edges(const LocalBox& box, const RigidTransform& t);

} // namespace asmb
