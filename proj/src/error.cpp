#include "asmb/error.hpp"

namespace asmb {

std::string_view to_string(errc code) {
    switch (code) {
    case errc::malformed_line: return "MalformedLine";
    case errc::index_out_of_range: return "IndexOutOfRange";
    case errc::no_atoms: return "NoAtoms";
    case errc::unparseable_record: return "UnparseableRecord";
    case errc::empty_mesh: return "EmptyMesh";
    case errc::chain_invariant_violated: return "ChainInvariantViolated";
    case errc::non_finite_state: return "NonFiniteState";
    case errc::dangling_endpoint: return "DanglingEndpoint";
    case errc::no_terminus_data: return "NoTerminusData";
    case errc::unknown_id: return "UnknownId";
    case errc::conflicting_membership: return "ConflictingMembership";
    case errc::mesh_mismatch: return "MeshMismatch";
    case errc::time_out_of_range: return "TimeOutOfRange";
    case errc::version_mismatch: return "VersionMismatch";
    case errc::schema_violation: return "SchemaViolation";
    case errc::dangling_reference: return "DanglingReference";
    case errc::hash_mismatch: return "HashMismatch";
    case errc::range_error: return "RangeError";
    case errc::invalid_argument: return "InvalidArgument";
    case errc::unknown_command: return "UnknownCommand";
    case errc::bad_sequence: return "BadSequence";
    case errc::not_grabbed: return "NotGrabbed";
    case errc::read_only_client: return "ReadOnlyClient";
    case errc::bind_failure: return "BindFailure";
    case errc::io_error: return "IoError";
    }
    return "Unknown";
}

} // namespace asmb
