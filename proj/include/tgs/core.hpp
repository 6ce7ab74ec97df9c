#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace tgs {

// Element identifiers are opaque strings, stable across deltas.
using ElemId = std::string;

enum class Side { Source, Corr, Target };

inline const char* side_name(Side s) {
    switch (s) {
        case Side::Source: return "src";
        case Side::Corr: return "corr";
        case Side::Target: return "trg";
    }
    return "?";
}

inline std::optional<Side> side_from_name(const std::string& s) {
    if (s == "src" || s == "source") return Side::Source;
    if (s == "trg" || s == "target") return Side::Target;
    if (s == "corr") return Side::Corr;
    return std::nullopt;
}

// Attribute values are strings or integers.
using AttrValue = std::variant<std::string, std::int64_t>;

inline std::string attr_to_string(const AttrValue& v) {
    if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
    return std::to_string(std::get<std::int64_t>(v));
}

enum class AttrKind { String, Integer };

// Error codes used across the engine. Thrown as TgsError.
enum class Errc {
    ParseError,
    TypeError,
    IncompatibleSeed,
    DanglingEdge,
    AttrUnsolvable,
    NotApplicable,
    OverlapIllTyped,
    StaleDelta,
    BudgetExhausted,
    OrchInvalid,
    UnresolvedConflict,
    BadInput,
    IoError,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::ParseError: return "PARSE-ERROR";
        case Errc::TypeError: return "TYPE-ERROR";
        case Errc::IncompatibleSeed: return "INCOMPATIBLE-SEED";
        case Errc::DanglingEdge: return "DANGLING-EDGE";
        case Errc::AttrUnsolvable: return "ATTR-UNSOLVABLE";
        case Errc::NotApplicable: return "NOT-APPLICABLE";
        case Errc::OverlapIllTyped: return "OVERLAP-ILLTYPED";
        case Errc::StaleDelta: return "STALE-DELTA";
        case Errc::BudgetExhausted: return "BUDGET-EXHAUSTED";
        case Errc::OrchInvalid: return "ORCH-INVALID";
        case Errc::UnresolvedConflict: return "UNRESOLVED-CONFLICT";
        case Errc::BadInput: return "BAD-INPUT";
        case Errc::IoError: return "IO-ERROR";
    }
    return "ERROR";
}

class TgsError : public std::runtime_error {
public:
    TgsError(Errc code, std::string message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

// Non-fatal findings reported by validate/verify.
struct Diagnostic {
    std::string kind;   // e.g. "DANGLING-REF", "COVERAGE", "ACYCLICITY"
    ElemId element;     // offending element or node id ("" if global)
    std::string detail;
    bool partial_only = false;  // marks partiality, not invalidity

    bool is_error() const { return !partial_only; }
};

using IdSet = std::set<ElemId>;

inline std::string join_ids(const std::vector<ElemId>& ids, const char* sep = ",") {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += sep;
        out += ids[i];
    }
    return out;
}

}  // namespace tgs
