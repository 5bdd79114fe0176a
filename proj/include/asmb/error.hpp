#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace asmb {

enum class errc {
    malformed_line,
    index_out_of_range,
    no_atoms,
    unparseable_record,
    empty_mesh,
    chain_invariant_violated,
    non_finite_state,
    dangling_endpoint,
    no_terminus_data,
    unknown_id,
    conflicting_membership,
    mesh_mismatch,
    time_out_of_range,
    version_mismatch,
    schema_violation,
    dangling_reference,
    hash_mismatch,
    range_error,
    invalid_argument,
    unknown_command,
    bad_sequence,
    not_grabbed,
    read_only_client,
    bind_failure,
    io_error,
};

std::string_view to_string(errc code);

// All library failures are reported through this exception. `line` is set for
// parse errors, `where` carries a document path or offending id when known.
class error : public std::runtime_error {
public:
    error(errc code, const std::string& message, std::optional<std::size_t> line = std::nullopt,
          std::string where = {})
        : std::runtime_error(message), code_(code), line_(line), where_(std::move(where)) {}

    errc code() const noexcept { return code_; }
    std::optional<std::size_t> line() const noexcept { return line_; }
    const std::string& where() const noexcept { return where_; }

private:
    errc code_;
    std::optional<std::size_t> line_;
    std::string where_;
};

} // namespace asmb
