#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tgs/graph.hpp"

namespace tgs {

struct AddNodeOp {
    ElemId id;
    std::string type;
    std::map<std::string, AttrValue> attrs;
};
struct AddEdgeOp {
    ElemId id;
    std::string type;
    ElemId from;
    ElemId to;
};
struct DeleteNodeOp {
    ElemId id;
};
struct DeleteEdgeOp {
    ElemId id;
};
struct SetAttrOp {
    ElemId id;
    std::string attr;
    AttrValue old_value;
    AttrValue new_value;
};

using DeltaOp = std::variant<AddNodeOp, AddEdgeOp, DeleteNodeOp, DeleteEdgeOp, SetAttrOp>;

// An ordered user edit of one side. Normalized form: every DeleteNode is
// preceded by DeleteEdge ops for all incident edges.
struct Delta {
    Side side = Side::Source;
    std::vector<DeltaOp> ops;
};

inline ElemId delta_op_id(const DeltaOp& op) {
    return std::visit([](auto&& o) { return o.id; }, op);
}

namespace detail {

// Dry-run validation of a delta against the host; throws STALE-DELTA before
// any mutation.
inline void check_delta(const TripleGraph& host, const Delta& d, const TypeTriple& types) {
    std::set<ElemId> added_nodes, added_edges, deleted;
    std::map<ElemId, std::pair<ElemId, ElemId>> added_edge_ends;
    std::map<std::pair<ElemId, std::string>, AttrValue> attr_now;
    auto exists_node = [&](const ElemId& id) {
        if (deleted.count(id)) return false;
        return added_nodes.count(id) != 0 || host.has_node(id);
    };
    auto exists_edge = [&](const ElemId& id) {
        if (deleted.count(id)) return false;
        return added_edges.count(id) != 0 || host.has_edge(id);
    };
    auto fail = [&](const std::string& msg) { throw TgsError(Errc::StaleDelta, msg); };
    std::size_t idx = 0;
    for (auto& op : d.ops) {
        ++idx;
        std::string at = " (op " + std::to_string(idx) + " on " + side_name(d.side) + ")";
        if (auto* a = std::get_if<AddNodeOp>(&op)) {
            bool in_use = added_nodes.count(a->id) || added_edges.count(a->id) ||
                          (host.has_element(a->id) && !deleted.count(a->id));
            if (in_use) fail("add-node id already in use: " + a->id + at);
            auto* t = types.node_type(a->type);
            if (!t) fail("add-node with unknown type " + a->type + at);
            if (t->side != d.side) fail("add-node type on wrong side: " + a->id + at);
            added_nodes.insert(a->id);
            deleted.erase(a->id);
        } else if (auto* a = std::get_if<AddEdgeOp>(&op)) {
            bool in_use = added_nodes.count(a->id) || added_edges.count(a->id) ||
                          (host.has_element(a->id) && !deleted.count(a->id));
            if (in_use) fail("add-edge id already in use: " + a->id + at);
            auto* t = types.edge_type(a->type);
            if (!t) fail("add-edge with unknown type " + a->type + at);
            if (t->side != d.side) fail("add-edge type on wrong side: " + a->id + at);
            if (!exists_node(a->from)) fail("add-edge endpoint missing: " + a->from + at);
            if (!exists_node(a->to)) fail("add-edge endpoint missing: " + a->to + at);
            added_edges.insert(a->id);
            added_edge_ends[a->id] = {a->from, a->to};
            deleted.erase(a->id);
        } else if (auto* del = std::get_if<DeleteNodeOp>(&op)) {
            if (!exists_node(del->id)) fail("delete-node of missing id: " + del->id + at);
            if (host.has_node(del->id) && host.node(del->id).side != d.side)
                fail("delete-node on wrong side: " + del->id + at);
            // normalized deltas delete incident edges first
            if (host.has_node(del->id)) {
                for (auto& e : host.edges_out(del->id))
                    if (!deleted.count(e)) fail("delete-node with live incident edge " + e + at);
                for (auto& e : host.edges_in(del->id))
                    if (!deleted.count(e)) fail("delete-node with live incident edge " + e + at);
            }
            for (auto& [eid, ends] : added_edge_ends)
                if (!deleted.count(eid) && (ends.first == del->id || ends.second == del->id))
                    fail("delete-node with live incident edge " + eid + at);
            deleted.insert(del->id);
            added_nodes.erase(del->id);
        } else if (auto* del = std::get_if<DeleteEdgeOp>(&op)) {
            if (!exists_edge(del->id)) fail("delete-edge of missing id: " + del->id + at);
            if (host.has_edge(del->id) && host.edge(del->id).side != d.side)
                fail("delete-edge on wrong side: " + del->id + at);
            deleted.insert(del->id);
            added_edges.erase(del->id);
        } else if (auto* s = std::get_if<SetAttrOp>(&op)) {
            if (!exists_node(s->id)) fail("set-attr on missing node: " + s->id + at);
            AttrValue cur;
            auto key = std::make_pair(s->id, s->attr);
            auto it = attr_now.find(key);
            if (it != attr_now.end()) {
                cur = it->second;
            } else if (host.has_node(s->id)) {
                if (host.node(s->id).side != d.side)
                    fail("set-attr on wrong side: " + s->id + at);
                auto& attrs = host.node(s->id).attrs;
                auto ait = attrs.find(s->attr);
                if (ait == attrs.end()) fail("set-attr of unknown attribute " + s->attr + at);
                cur = ait->second;
            } else {
                continue;  // attribute of a node added in this delta
            }
            if (!(cur == s->old_value)) fail("set-attr old value mismatch at " + s->id + at);
            attr_now[key] = s->new_value;
        }
    }
}

}  // namespace detail

// Applies both deltas. Corr refs to deleted nodes become dangling, never
// silently removed. Validates both deltas before any mutation.
inline void apply_delta(TripleGraph& host, const Delta& delta_src, const Delta& delta_trg,
                        const TypeTriple& types) {
    if (delta_src.side != Side::Source || delta_trg.side != Side::Target)
        throw TgsError(Errc::StaleDelta, "deltas must be tagged source and target");
    detail::check_delta(host, delta_src, types);
    detail::check_delta(host, delta_trg, types);
    for (const Delta* d : {&delta_src, &delta_trg}) {
        for (auto& op : d->ops) {
            if (auto* a = std::get_if<AddNodeOp>(&op)) {
                Node n;
                n.id = a->id;
                n.side = d->side;
                n.type = a->type;
                n.attrs = a->attrs;
                host.add_node(std::move(n));
            } else if (auto* a = std::get_if<AddEdgeOp>(&op)) {
                Edge e;
                e.id = a->id;
                e.side = d->side;
                e.type = a->type;
                e.from = a->from;
                e.to = a->to;
                host.add_edge(std::move(e));
            } else if (auto* del = std::get_if<DeleteNodeOp>(&op)) {
                host.remove_node(del->id);
            } else if (auto* del = std::get_if<DeleteEdgeOp>(&op)) {
                host.remove_edge(del->id);
            } else if (auto* s = std::get_if<SetAttrOp>(&op)) {
                host.set_attr(s->id, s->attr, s->new_value);
            }
        }
    }
}

// Identity-based diff of two snapshots of one side, in normalized order:
// deleted edges, deleted nodes, added nodes, added edges, attribute changes.
inline Delta diff_side(const TripleGraph& before, const TripleGraph& after, Side side) {
    Delta d;
    d.side = side;
    for (auto& [id, e] : before.edges())
        if (e.side == side && !after.has_edge(id)) d.ops.push_back(DeleteEdgeOp{id});
    for (auto& [id, n] : before.nodes())
        if (n.side == side && !after.has_node(id)) d.ops.push_back(DeleteNodeOp{id});
    for (auto& [id, n] : after.nodes())
        if (n.side == side && !before.has_node(id)) d.ops.push_back(AddNodeOp{id, n.type, n.attrs});
    for (auto& [id, e] : after.edges())
        if (e.side == side && !before.has_edge(id))
            d.ops.push_back(AddEdgeOp{id, e.type, e.from, e.to});
    for (auto& [id, n] : after.nodes()) {
        if (n.side != side || !before.has_node(id)) continue;
        auto& old = before.node(id);
        for (auto& [an, av] : n.attrs) {
            auto it = old.attrs.find(an);
            if (it != old.attrs.end() && !(it->second == av))
                d.ops.push_back(SetAttrOp{id, an, it->second, av});
        }
    }
    return d;
}

}  // namespace tgs
