#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "tgs/dpg.hpp"

namespace tgs {

enum class ConflictKind { PreserveDelete, CorrespondencePreservation, AttributeChange };

inline const char* conflict_kind_name(ConflictKind k) {
    switch (k) {
        case ConflictKind::PreserveDelete: return "preserve-delete";
        case ConflictKind::CorrespondencePreservation: return "correspondence-preservation";
        case ConflictKind::AttributeChange: return "attribute-change";
    }
    return "?";
}

inline ConflictKind conflict_kind_from_name(const std::string& s) {
    if (s == "preserve-delete") return ConflictKind::PreserveDelete;
    if (s == "correspondence-preservation") return ConflictKind::CorrespondencePreservation;
    if (s == "attribute-change") return ConflictKind::AttributeChange;
    throw TgsError(Errc::BadInput, "unknown conflict kind '" + s + "'");
}

struct Conflict {
    ConflictKind kind = ConflictKind::PreserveDelete;
    std::string anchor;
    std::set<std::string> scope;          // DPG node ids, anchor included
    std::vector<std::string> evidence;    // element ids / changes justifying it
};

// Appendix-style table of potential conflicts per annotation pair. Rows and
// columns range over {}, -, /, #, n; only base-node annotations participate.
inline std::set<ConflictKind> potential_for_pair(char src, char trg) {
    using K = ConflictKind;
    auto cell = [](std::initializer_list<K> ks) { return std::set<K>(ks); };
    static const std::map<std::pair<char, char>, std::set<K>> table = [&cell]() {
        std::map<std::pair<char, char>, std::set<K>> t;
        const char none = ' ';
        t[{none, '-'}] = cell({K::PreserveDelete});
        t[{none, '/'}] = cell({K::PreserveDelete, K::CorrespondencePreservation});
        t[{none, 'n'}] = cell({K::CorrespondencePreservation});
        t[{'-', none}] = cell({K::PreserveDelete});
        t[{'-', '/'}] = cell({K::PreserveDelete, K::CorrespondencePreservation});
        t[{'-', '#'}] = cell({K::PreserveDelete});
        t[{'-', 'n'}] = cell({K::PreserveDelete, K::CorrespondencePreservation});
        for (char c : {' ', '-', '/', '#', 'n'})
            t[{'/', c}] = cell({K::PreserveDelete, K::CorrespondencePreservation});
        t[{'#', '-'}] = cell({K::PreserveDelete});
        t[{'#', '/'}] = cell({K::PreserveDelete, K::CorrespondencePreservation});
        t[{'#', '#'}] = cell({K::AttributeChange});
        t[{'#', 'n'}] = cell({K::CorrespondencePreservation});
        t[{'n', none}] = cell({K::CorrespondencePreservation});
        t[{'n', '-'}] = cell({K::PreserveDelete, K::CorrespondencePreservation});
        t[{'n', '/'}] = cell({K::PreserveDelete, K::CorrespondencePreservation});
        t[{'n', '#'}] = cell({K::CorrespondencePreservation});
        t[{'n', 'n'}] = cell({K::CorrespondencePreservation});
        return t;
    }();
    auto it = table.find({src, trg});
    return it == table.end() ? std::set<K>{} : it->second;
}

// Table lookup lifted to annotation sets (a node may carry several).
inline std::set<ConflictKind> potential_conflicts_for(const AnnSet& src_ann,
                                                      const AnnSet& trg_ann) {
    auto effective = [](const AnnSet& s) {
        std::vector<char> out;
        for (Ann a : s) {
            char c = static_cast<char>(a);
            if (c == '-' || c == '/' || c == '#' || c == 'n') out.push_back(c);
        }
        if (out.empty()) out.push_back(' ');
        return out;
    };
    std::set<ConflictKind> out;
    for (char a : effective(src_ann))
        for (char b : effective(trg_ann))
            for (auto k : potential_for_pair(a, b)) out.insert(k);
    return out;
}

inline std::vector<std::pair<std::string, std::set<ConflictKind>>> potential_conflicts(
    const DeltaPrecedenceGraph& dpg) {
    std::vector<std::pair<std::string, std::set<ConflictKind>>> out;
    for (auto& n : dpg.nodes) {
        if (n.candidate) continue;  // conflicts concern original PG nodes
        auto ks = potential_conflicts_for(n.src_ann, n.trg_ann);
        if (!ks.empty()) out.push_back({n.id, std::move(ks)});
    }
    return out;
}

}  // namespace tgs
