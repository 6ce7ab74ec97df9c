#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tgs/core.hpp"
#include "tgs/types.hpp"

namespace tgs {

enum class ElemKind { Node, Edge, CorrNode };

struct Node {
    ElemId id;
    Side side = Side::Source;
    std::string type;
    std::map<std::string, AttrValue> attrs;
};

struct Edge {
    ElemId id;
    Side side = Side::Source;
    std::string type;
    ElemId from;
    ElemId to;
};

// A correspondence node. Refs keep their target id even after the referenced
// node was deleted; such a ref is dangling until the node reappears.
// An empty optional encodes an explicitly dangling reference.
struct CorrNode {
    ElemId id;
    std::string type;
    std::optional<ElemId> src;
    std::optional<ElemId> trg;
};

// Typed attributed triple graph, possibly partial (dangling corr refs).
// All mutators keep adjacency indexes in sync.
class TripleGraph {
public:
    bool has_node(const ElemId& id) const { return nodes_.count(id) != 0; }
    bool has_edge(const ElemId& id) const { return edges_.count(id) != 0; }
    bool has_corr(const ElemId& id) const { return corrs_.count(id) != 0; }
    bool has_element(const ElemId& id) const { return has_node(id) || has_edge(id) || has_corr(id); }

    const Node& node(const ElemId& id) const { return nodes_.at(id); }
    const Edge& edge(const ElemId& id) const { return edges_.at(id); }
    const CorrNode& corr(const ElemId& id) const { return corrs_.at(id); }

    const std::map<ElemId, Node>& nodes() const { return nodes_; }
    const std::map<ElemId, Edge>& edges() const { return edges_; }
    const std::map<ElemId, CorrNode>& corrs() const { return corrs_; }

    std::optional<ElemKind> kind_of(const ElemId& id) const {
        if (has_node(id)) return ElemKind::Node;
        if (has_edge(id)) return ElemKind::Edge;
        if (has_corr(id)) return ElemKind::CorrNode;
        return std::nullopt;
    }

    std::size_t size() const { return nodes_.size() + edges_.size() + corrs_.size(); }

    void add_node(Node n) {
        if (has_element(n.id)) throw TgsError(Errc::BadInput, "duplicate id " + n.id);
        index_node(n);
        nodes_.emplace(n.id, std::move(n));
    }

    void add_edge(Edge e) {
        if (has_element(e.id)) throw TgsError(Errc::BadInput, "duplicate id " + e.id);
        auto fs = nodes_.find(e.from);
        auto ts = nodes_.find(e.to);
        if (fs == nodes_.end() || ts == nodes_.end())
            throw TgsError(Errc::BadInput, "edge " + e.id + " endpoint missing");
        if (fs->second.side != e.side || ts->second.side != e.side)
            throw TgsError(Errc::BadInput, "edge " + e.id + " crosses sides");
        out_edges_[e.from].insert(e.id);
        in_edges_[e.to].insert(e.id);
        by_type_edge_[e.type].insert(e.id);
        edges_.emplace(e.id, std::move(e));
    }

    void add_corr(CorrNode c) {
        if (has_element(c.id)) throw TgsError(Errc::BadInput, "duplicate id " + c.id);
        if (c.src) corr_refs_[*c.src].insert(c.id);
        if (c.trg) corr_refs_[*c.trg].insert(c.id);
        by_type_corr_[c.type].insert(c.id);
        corrs_.emplace(c.id, std::move(c));
    }

    void remove_node(const ElemId& id) {
        auto it = nodes_.find(id);
        if (it == nodes_.end()) throw TgsError(Errc::BadInput, "no node " + id);
        auto oi = out_edges_.find(id);
        auto ii = in_edges_.find(id);
        if ((oi != out_edges_.end() && !oi->second.empty()) ||
            (ii != in_edges_.end() && !ii->second.empty()))
            throw TgsError(Errc::DanglingEdge, "node " + id + " still has incident edges");
        out_edges_.erase(id);
        in_edges_.erase(id);
        by_type_node_[it->second.type].erase(id);
        nodes_.erase(it);
        // Corr refs to this node stay in place: they are dangling now.
    }

    void remove_edge(const ElemId& id) {
        auto it = edges_.find(id);
        if (it == edges_.end()) throw TgsError(Errc::BadInput, "no edge " + id);
        out_edges_[it->second.from].erase(id);
        in_edges_[it->second.to].erase(id);
        by_type_edge_[it->second.type].erase(id);
        edges_.erase(it);
    }

    void remove_corr(const ElemId& id) {
        auto it = corrs_.find(id);
        if (it == corrs_.end()) throw TgsError(Errc::BadInput, "no corr " + id);
        if (it->second.src) corr_refs_[*it->second.src].erase(id);
        if (it->second.trg) corr_refs_[*it->second.trg].erase(id);
        by_type_corr_[it->second.type].erase(id);
        corrs_.erase(it);
    }

    void set_attr(const ElemId& id, const std::string& attr, AttrValue v) {
        auto it = nodes_.find(id);
        if (it == nodes_.end()) throw TgsError(Errc::BadInput, "no node " + id);
        it->second.attrs[attr] = std::move(v);
    }

    // Incident edge ids (empty set when none).
    const IdSet& edges_out(const ElemId& node) const { return set_or_empty(out_edges_, node); }
    const IdSet& edges_in(const ElemId& node) const { return set_or_empty(in_edges_, node); }
    // Corr nodes referencing the given node from either side.
    const IdSet& corrs_at(const ElemId& node) const { return set_or_empty(corr_refs_, node); }

    const IdSet& nodes_of_type(const std::string& t) const { return set_or_empty(by_type_node_, t); }
    const IdSet& edges_of_type(const std::string& t) const { return set_or_empty(by_type_edge_, t); }
    const IdSet& corrs_of_type(const std::string& t) const { return set_or_empty(by_type_corr_, t); }

    bool corr_ref_live(const std::optional<ElemId>& ref) const {
        return ref && nodes_.count(*ref) != 0;
    }

    bool is_total() const {
        for (auto& [id, c] : corrs_)
            if (!corr_ref_live(c.src) || !corr_ref_live(c.trg)) return false;
        return true;
    }

    std::vector<ElemId> all_element_ids() const {
        std::vector<ElemId> out;
        out.reserve(size());
        for (auto& [id, n] : nodes_) out.push_back(id);
        for (auto& [id, e] : edges_) out.push_back(id);
        for (auto& [id, c] : corrs_) out.push_back(id);
        return out;
    }

    std::map<std::string, std::size_t> type_counts() const {
        std::map<std::string, std::size_t> out;
        for (auto& [id, n] : nodes_) out[n.type]++;
        for (auto& [id, e] : edges_) out[e.type]++;
        for (auto& [id, c] : corrs_) out[c.type]++;
        return out;
    }

private:
    void index_node(const Node& n) { by_type_node_[n.type].insert(n.id); }

    static const IdSet& set_or_empty(const std::map<std::string, IdSet>& m, const std::string& k) {
        static const IdSet empty;
        auto it = m.find(k);
        return it == m.end() ? empty : it->second;
    }

    std::map<ElemId, Node> nodes_;
    std::map<ElemId, Edge> edges_;
    std::map<ElemId, CorrNode> corrs_;
    std::map<ElemId, IdSet> out_edges_;
    std::map<ElemId, IdSet> in_edges_;
    std::map<ElemId, IdSet> corr_refs_;
    std::map<std::string, IdSet> by_type_node_;
    std::map<std::string, IdSet> by_type_edge_;
    std::map<std::string, IdSet> by_type_corr_;
};

// Structural validation against a type triple. Returns one diagnostic per
// violation; dangling corr refs are reported as partiality, not errors.
inline std::vector<Diagnostic> validate(const TripleGraph& host, const TypeTriple& types) {
    std::vector<Diagnostic> out;
    for (auto& [id, n] : host.nodes()) {
        auto* d = types.node_type(n.type);
        if (!d) {
            out.push_back({"UNKNOWN-TYPE", id, "node type " + n.type});
            continue;
        }
        if (d->side != n.side) out.push_back({"SIDE-MISMATCH", id, "node side vs type side"});
        for (auto& [an, av] : n.attrs) {
            auto* kind = types.attr_kind(n.type, an);
            if (!kind) {
                out.push_back({"UNKNOWN-ATTR", id, "attribute " + an});
            } else if ((*kind == AttrKind::String) != std::holds_alternative<std::string>(av)) {
                out.push_back({"ATTR-KIND", id, "attribute " + an + " has wrong kind"});
            }
        }
    }
    for (auto& [id, e] : host.edges()) {
        auto* d = types.edge_type(e.type);
        if (!d) {
            out.push_back({"UNKNOWN-TYPE", id, "edge type " + e.type});
            continue;
        }
        if (d->side != e.side) out.push_back({"SIDE-MISMATCH", id, "edge side vs type side"});
        if (!host.has_node(e.from) || !host.has_node(e.to)) {
            out.push_back({"BAD-ENDPOINT", id, "missing endpoint"});
            continue;
        }
        if (!types.is_subtype(host.node(e.from).type, d->from_type))
            out.push_back({"TYPE-MISMATCH", id, "edge source endpoint type"});
        if (!types.is_subtype(host.node(e.to).type, d->to_type))
            out.push_back({"TYPE-MISMATCH", id, "edge target endpoint type"});
        if (host.node(e.from).side != e.side || host.node(e.to).side != e.side)
            out.push_back({"SIDE-MISMATCH", id, "edge endpoints on wrong side"});
    }
    for (auto& [id, c] : host.corrs()) {
        auto* d = types.corr_type(c.type);
        if (!d) {
            out.push_back({"UNKNOWN-TYPE", id, "corr type " + c.type});
            continue;
        }
        if (c.src && host.has_node(*c.src)) {
            if (!types.is_subtype(host.node(*c.src).type, d->src_type))
                out.push_back({"TYPE-MISMATCH", id, "corr src endpoint type"});
        } else {
            out.push_back({"DANGLING-REF", id, "src reference", true});
        }
        if (c.trg && host.has_node(*c.trg)) {
            if (!types.is_subtype(host.node(*c.trg).type, d->trg_type))
                out.push_back({"TYPE-MISMATCH", id, "corr trg endpoint type"});
        } else {
            out.push_back({"DANGLING-REF", id, "trg reference", true});
        }
    }
    return out;
}

inline bool valid_and_total(const std::vector<Diagnostic>& diags) {
    for (auto& d : diags)
        if (d.is_error()) return false;
    return true;
}

}  // namespace tgs
