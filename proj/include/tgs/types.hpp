#pragma once

#include <map>
#include <string>

#include "tgs/core.hpp"

namespace tgs {

struct NodeTypeDecl {
    std::string name;
    Side side = Side::Source;
    std::map<std::string, AttrKind> attrs;
    std::string super;  // empty if none
};

struct EdgeTypeDecl {
    std::string name;
    Side side = Side::Source;
    std::string from_type;
    std::string to_type;
};

struct CorrTypeDecl {
    std::string name;
    std::string src_type;  // source node type
    std::string trg_type;  // target node type
};

// The triple type graph: node/edge types per side, correspondence types,
// and an inheritance partial order on node types per side.
class TypeTriple {
public:
    void add_node_type(NodeTypeDecl d) { node_types_[d.name] = std::move(d); }
    void add_edge_type(EdgeTypeDecl d) { edge_types_[d.name] = std::move(d); }
    void add_corr_type(CorrTypeDecl d) { corr_types_[d.name] = std::move(d); }

    const NodeTypeDecl* node_type(const std::string& n) const {
        auto it = node_types_.find(n);
        return it == node_types_.end() ? nullptr : &it->second;
    }
    const EdgeTypeDecl* edge_type(const std::string& n) const {
        auto it = edge_types_.find(n);
        return it == edge_types_.end() ? nullptr : &it->second;
    }
    const CorrTypeDecl* corr_type(const std::string& n) const {
        auto it = corr_types_.find(n);
        return it == corr_types_.end() ? nullptr : &it->second;
    }

    const std::map<std::string, NodeTypeDecl>& node_types() const { return node_types_; }
    const std::map<std::string, EdgeTypeDecl>& edge_types() const { return edge_types_; }
    const std::map<std::string, CorrTypeDecl>& corr_types() const { return corr_types_; }

    // True if `sub` equals `super` or inherits from it (transitively).
    bool is_subtype(const std::string& sub, const std::string& super) const {
        std::string cur = sub;
        int guard = 0;
        while (!cur.empty()) {
            if (cur == super) return true;
            auto* d = node_type(cur);
            if (!d) return false;
            cur = d->super;
            if (++guard > 1000) return false;  // cyclic declarations caught by validate()
        }
        return false;
    }

    // Attribute kind lookup walking the inheritance chain.
    const AttrKind* attr_kind(const std::string& node_type_name, const std::string& attr) const {
        std::string cur = node_type_name;
        int guard = 0;
        while (!cur.empty() && ++guard <= 1000) {
            auto* d = node_type(cur);
            if (!d) return nullptr;
            auto it = d->attrs.find(attr);
            if (it != d->attrs.end()) return &it->second;
            cur = d->super;
        }
        return nullptr;
    }

    std::vector<Diagnostic> validate() const {
        std::vector<Diagnostic> out;
        for (auto& [name, d] : node_types_) {
            if (!d.super.empty()) {
                auto* s = node_type(d.super);
                if (!s)
                    out.push_back({"UNKNOWN-TYPE", name, "unknown super type " + d.super});
                else if (s->side != d.side)
                    out.push_back({"TYPE-MISMATCH", name, "super type on different side"});
                // acyclicity
                std::string cur = d.super;
                int guard = 0;
                while (!cur.empty()) {
                    if (cur == name) {
                        out.push_back({"INHERITANCE-CYCLE", name, "inheritance cycle"});
                        break;
                    }
                    auto* n = node_type(cur);
                    if (!n || ++guard > 1000) break;
                    cur = n->super;
                }
            }
        }
        for (auto& [name, d] : edge_types_) {
            auto* f = node_type(d.from_type);
            auto* t = node_type(d.to_type);
            if (!f || f->side != d.side)
                out.push_back({"BAD-ENDPOINT", name, "bad source endpoint type " + d.from_type});
            if (!t || t->side != d.side)
                out.push_back({"BAD-ENDPOINT", name, "bad target endpoint type " + d.to_type});
        }
        for (auto& [name, d] : corr_types_) {
            auto* s = node_type(d.src_type);
            auto* t = node_type(d.trg_type);
            if (!s || s->side != Side::Source)
                out.push_back({"BAD-ENDPOINT", name, "corr source type " + d.src_type});
            if (!t || t->side != Side::Target)
                out.push_back({"BAD-ENDPOINT", name, "corr target type " + d.trg_type});
        }
        return out;
    }

private:
    std::map<std::string, NodeTypeDecl> node_types_;
    std::map<std::string, EdgeTypeDecl> edge_types_;
    std::map<std::string, CorrTypeDecl> corr_types_;
};

}  // namespace tgs
