#include "asmb/canonical_json.hpp"

#include "asmb/text.hpp"

namespace asmb {

namespace {

void write(const json& j, std::string& out) {
    switch (j.type()) {
    case json::value_t::object: {
        out += '{';
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ',';
            first = false;
            out += json(it.key()).dump();
            out += ':';
            write(it.value(), out);
        }
        out += '}';
        break;
    }
    case json::value_t::array: {
        out += '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) out += ',';
            write(j[i], out);
        }
        out += ']';
        break;
    }
    case json::value_t::number_float: out += text::format_double(j.get<double>()); break;
    default: out += j.dump(); break;
    }
}

} // namespace

std::string canonical_dump(const json& j) {
    std::string out;
    write(j, out);
    return out;
}

} // namespace asmb
