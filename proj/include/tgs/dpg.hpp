#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "tgs/precedence.hpp"

namespace tgs {

// Annotation alphabet {+, -, *, /, #, u, n}.
enum class Ann : char {
    Plus = '+',
    Minus = '-',
    Star = '*',
    Slash = '/',
    Hash = '#',
    U = 'u',
    N = 'n',
};

using AnnSet = std::set<Ann>;

inline std::string ann_to_string(Ann a) { return std::string(1, static_cast<char>(a)); }

inline Ann ann_from_string(const std::string& s) {
    if (s.size() == 1) {
        switch (s[0]) {
            case '+': return Ann::Plus;
            case '-': return Ann::Minus;
            case '*': return Ann::Star;
            case '/': return Ann::Slash;
            case '#': return Ann::Hash;
            case 'u': return Ann::U;
            case 'n': return Ann::N;
        }
    }
    throw TgsError(Errc::BadInput, "unknown annotation '" + s + "'");
}

// A node of the delta precedence graph: either a node of the original PG or a
// candidate match of a source/target pattern anchored at unpropagated
// elements.
struct DpgNode {
    std::string id;
    bool candidate = false;
    std::string rule;
    Side pattern_side = Side::Source;  // candidates only: which side pattern
    Bindings bindings;
    IdSet created;        // base: original created set; candidates: create-bound
    IdSet context;
    AnnSet src_ann;
    AnnSet trg_ann;
};

struct DeltaPrecedenceGraph {
    std::vector<DpgNode> nodes;
    std::vector<std::pair<std::string, std::string>> dep_edges;

    const DpgNode* node(const std::string& id) const {
        for (auto& n : nodes)
            if (n.id == id) return &n;
        return nullptr;
    }
};

}  // namespace tgs
