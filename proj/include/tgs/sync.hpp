#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "tgs/conflicts.hpp"
#include "tgs/delta.hpp"
#include "tgs/dpg.hpp"
#include "tgs/operational.hpp"
#include "tgs/precedence.hpp"

namespace tgs {

enum class Strategy { TakeSource, TakeTarget, Preserve };

inline const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::TakeSource: return "take-source";
        case Strategy::TakeTarget: return "take-target";
        case Strategy::Preserve: return "preserve";
    }
    return "?";
}

struct SyncReport {
    struct Resolution {
        std::string anchor;
        ConflictKind kind = ConflictKind::PreserveDelete;
        std::string strategy;
        std::vector<std::string> warnings;
    };
    std::vector<Conflict> conflicts;
    std::vector<Resolution> resolutions;
    std::vector<std::string> rule_log;
    std::vector<ElemId> cleanup_deleted;
    std::vector<std::string> warnings;
    std::vector<std::string> unresolved;
};

// Restoration state: the (partial) triple graph under repair together with
// the annotated delta precedence graph, kept consistent incrementally after
// every fragment step.
class SyncEngine {
public:
    SyncEngine(const Tgg& g, const OpRuleSet& ops, const TripleGraph& base_host,
               const PrecedenceGraph& pg, const Delta& delta_src, const Delta& delta_trg)
        : g_(&g), ops_(&ops), host_(base_host) {
        detail::check_delta(base_host, delta_src, g.types);
        detail::check_delta(base_host, delta_trg, g.types);
        capture_payloads(base_host, delta_src, delta_trg);
        ids_.set_taken_predicate([this](const ElemId& id) { return payloads_.count(id) != 0; });
        apply_delta(host_, delta_src, delta_trg, g.types);
        src_ops_ = delta_src.ops;
        trg_ops_ = delta_trg.ops;
        src_revoked_.assign(src_ops_.size(), false);
        trg_revoked_.assign(trg_ops_.size(), false);
        rebuild_live_delta();
        init_nodes(pg);
        std::set<ElemId> touched;
        for (auto& [id, s] : added_live_) touched.insert(id);
        for (auto& [id, p] : deleted_live_) touched.insert(id);
        for (auto& [k, v] : attr_changed_src_) touched.insert(k.first);
        for (auto& [k, v] : attr_changed_trg_) touched.insert(k.first);
        // endpoints of added edges matter for NAC violations
        for (auto& [id, s] : added_live_) {
            if (host_.has_edge(id)) {
                touched.insert(host_.edge(id).from);
                touched.insert(host_.edge(id).to);
            }
        }
        std::set<std::string> affected;
        for (auto& e : touched) {
            auto bit = binders_.find(e);
            if (bit != binders_.end())
                for (auto& n : bit->second) affected.insert(n);
        }
        for (auto& n : affected) annotate_base(n);
        refresh_unpropagated_added();
        enumerate_candidates();
        detect_conflicts();
    }

    // the fresh-id predicate captures `this`
    SyncEngine(const SyncEngine&) = delete;
    SyncEngine& operator=(const SyncEngine&) = delete;

    const TripleGraph& host() const { return host_; }
    const Tgg& grammar() const { return *g_; }
    const SyncReport& report() const { return report_; }
    const IdSet& unpropagated() const { return unpropagated_; }
    const std::vector<Conflict>& conflicts() const { return report_.conflicts; }
    void note_unresolved(const std::string& what) { report_.unresolved.push_back(what); }
    void note_warning(const std::string& what) { report_.warnings.push_back(what); }

    // ------------------------------------------------------------------
    // DPG snapshot
    // ------------------------------------------------------------------
    DeltaPrecedenceGraph dpg() const {
        DeltaPrecedenceGraph out;
        for (auto& [id, n] : nodes_) {
            DpgNode d;
            d.id = id;
            d.candidate = false;
            d.rule = n.rule;
            d.bindings = n.bindings;
            d.created = n.created;
            d.context = n.context;
            d.src_ann = n.src_ann;
            d.trg_ann = n.trg_ann;
            out.nodes.push_back(std::move(d));
        }
        for (auto& [id, c] : cands_) {
            DpgNode d;
            d.id = id;
            d.candidate = true;
            d.rule = c.rule;
            d.pattern_side = c.side;
            d.bindings = c.bindings;
            d.created = c.create_bound;
            for (auto& e : c.all_bound)
                if (!c.create_bound.count(e)) d.context.insert(e);
            if (c.side == Side::Source) {
                d.src_ann = {c.own};
                d.trg_ann = {Ann::U};
            } else {
                d.trg_ann = {c.own};
                d.src_ann = {Ann::U};
            }
            out.nodes.push_back(std::move(d));
        }
        std::sort(out.nodes.begin(), out.nodes.end(),
                  [](const DpgNode& a, const DpgNode& b) { return a.id < b.id; });
        // dependency edges: a node depends on the node that accounts for an
        // element it matches. Base nodes account for their created elements;
        // candidates account only for elements no base node explains.
        std::map<ElemId, std::set<std::string>> accounts;
        for (auto& n : out.nodes)
            if (!n.candidate)
                for (auto& e : n.created) accounts[e].insert(n.id);
        for (auto& n : out.nodes)
            if (n.candidate)
                for (auto& e : n.created)
                    if (!accounts.count(e)) accounts[e].insert(n.id);
        std::set<std::pair<std::string, std::string>> edges;
        for (auto& n : out.nodes) {
            for (auto& [pid, e] : n.bindings) {
                bool own_created = !n.candidate && n.created.count(e);
                if (own_created) continue;
                auto it = accounts.find(e);
                if (it == accounts.end()) continue;
                for (auto& m : it->second)
                    if (m != n.id) edges.insert({n.id, m});
            }
        }
        out.dep_edges.assign(edges.begin(), edges.end());
        return out;
    }

    // Live base nodes as a precedence graph (for final verification).
    PrecedenceGraph current_pg() const {
        PrecedenceGraph pg;
        for (auto& [id, n] : nodes_) {
            ConsistencyMatch m;
            m.id = id;
            m.rule = n.rule;
            m.bindings = n.bindings;
            m.created = n.created;
            m.context = n.context;
            pg.nodes.push_back(std::move(m));
        }
        detail::compute_dep_edges(pg);
        return pg;
    }

    // ------------------------------------------------------------------
    // Conflict detection
    // ------------------------------------------------------------------
    std::vector<Conflict> detect_all() const { return report_.conflicts; }

    // ------------------------------------------------------------------
    // Fragments
    // ------------------------------------------------------------------
    using Restrict = std::optional<std::set<std::string>>;

    void frag_local_cc(const Restrict& restrict_to = std::nullopt) {
        bool progressed = true;
        while (progressed) {
            progressed = false;
            for (auto& id : sorted_cand_ids()) {
                auto cit = cands_.find(id);
                if (cit == cands_.end()) continue;
                const CandNode& c = cit->second;
                if (c.own != Ann::Plus || c.side != Side::Source) continue;
                if (!eligible(id, restrict_to)) continue;
                if (try_local_cc(c)) {
                    progressed = true;
                    break;  // restart scan: candidate set changed
                }
            }
        }
    }

    void frag_translate(const Restrict& restrict_to = std::nullopt) {
        bool progressed = true;
        while (progressed) {
            progressed = false;
            for (auto& id : sorted_cand_ids()) {
                auto cit = cands_.find(id);
                if (cit == cands_.end()) continue;
                const CandNode& c = cit->second;
                if (c.own != Ann::Plus) continue;
                if (!eligible(id, restrict_to)) continue;
                if (try_translate(c)) {
                    progressed = true;
                    break;
                }
            }
        }
    }

    void frag_repair(const Restrict& restrict_to = std::nullopt) {
        bool progressed = true;
        while (progressed) {
            progressed = false;
            // one-sided attribute re-enforcement first
            for (auto& id : sorted_annotated()) {
                auto nit = nodes_.find(id);
                if (nit == nodes_.end()) continue;
                if (!eligible(id, restrict_to)) continue;
                if (try_attr_repair(nit->second)) {
                    progressed = true;
                    break;
                }
            }
            if (progressed) continue;
            for (auto& id : sorted_annotated()) {
                auto nit = nodes_.find(id);
                if (nit == nodes_.end()) continue;
                if (!eligible(id, restrict_to)) continue;
                const BaseNode& n = nit->second;
                if (!has_any(n, {Ann::N, Ann::Slash})) continue;
                if (try_shortcut_repair(n)) {
                    progressed = true;
                    break;
                }
            }
        }
    }

    void frag_rollback(const Restrict& restrict_to = std::nullopt) {
        bool progressed = true;
        while (progressed) {
            progressed = false;
            for (auto& id : sorted_annotated()) {
                auto nit = nodes_.find(id);
                if (nit == nodes_.end()) continue;
                if (!eligible(id, restrict_to)) continue;
                if (!solely_minus(nit->second)) continue;
                rollback_node(id);
                progressed = true;
                break;
            }
        }
    }

    void frag_propagate(const Restrict& restrict_to = std::nullopt) {
        frag_repair(restrict_to);
        frag_rollback(restrict_to);
        frag_translate(restrict_to);
    }

    void frag_cleanup() {
        std::set<ElemId> queue(unpropagated_.begin(), unpropagated_.end());
        // dangling correspondence nodes are inconsistent as well
        for (auto& [id, c] : host_.corrs())
            if (!host_.corr_ref_live(c.src) || !host_.corr_ref_live(c.trg)) queue.insert(id);
        while (!queue.empty()) {
            ElemId e = *queue.begin();
            queue.erase(queue.begin());
            if (!host_.has_element(e)) continue;
            cleanup_delete(e, queue);
        }
    }

    // ------------------------------------------------------------------
    // Conflict resolution
    // ------------------------------------------------------------------
    struct ResolvePlan {
        bool pre_repair = false;
        Strategy strategy = Strategy::TakeSource;
        enum class Post { None, Translate, Propagate } post = Post::None;
    };

    void resolve_conflict(std::size_t index, const ResolvePlan& plan) {
        if (index >= report_.conflicts.size() || resolved_[index]) return;
        Conflict& c = report_.conflicts[index];
        SyncReport::Resolution res;
        res.anchor = c.anchor;
        res.kind = c.kind;
        res.strategy = strategy_name(plan.strategy);
        // a previously detected conflict may have dissolved
        if (!still_confirmed(c)) {
            res.warnings.push_back("dissolved before resolution");
            resolved_[index] = true;
            report_.resolutions.push_back(std::move(res));
            rebuild_scope_index();
            return;
        }
        std::set<std::string> scope = c.scope;
        if (plan.pre_repair) frag_repair(scope);
        apply_strategy(c, plan.strategy, res);
        resolved_[index] = true;
        rebuild_scope_index();
        if (plan.post == ResolvePlan::Post::Translate)
            frag_translate(scope);
        else if (plan.post == ResolvePlan::Post::Propagate)
            frag_propagate(scope);
        report_.resolutions.push_back(std::move(res));
    }

    // Pending conflicts in dependency-topological order of their anchors.
    std::vector<std::size_t> pending_conflicts_in_order() const {
        std::vector<std::size_t> out;
        auto order = topo_order(initial_pg_);
        std::map<std::string, std::size_t> rank;
        for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < report_.conflicts.size(); ++i)
            if (!resolved_[i]) idx.push_back(i);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            auto& ca = report_.conflicts[a];
            auto& cb = report_.conflicts[b];
            auto ra = rank.count(ca.anchor) ? rank.at(ca.anchor) : 0;
            auto rb = rank.count(cb.anchor) ? rank.at(cb.anchor) : 0;
            if (ra != rb) return ra < rb;
            if (ca.anchor != cb.anchor) return ca.anchor < cb.anchor;
            return static_cast<int>(ca.kind) < static_cast<int>(cb.kind);
        });
        return idx;
    }

    // ------------------------------------------------------------------
    // Internal structures (public for tests and wrappers)
    // ------------------------------------------------------------------
    struct BaseNode {
        std::string id;
        std::string rule;
        Bindings bindings;
        IdSet created;
        IdSet context;
        AnnSet src_ann;
        AnnSet trg_ann;

        bool structurally_broken() const {
            for (Ann a : {Ann::Minus, Ann::Slash, Ann::N})
                if (src_ann.count(a) || trg_ann.count(a)) return true;
            return false;
        }
        bool annotated() const { return !src_ann.empty() || !trg_ann.empty(); }
    };

    struct CandNode {
        std::string id;
        std::string rule;
        Side side = Side::Source;
        Bindings bindings;
        IdSet create_bound;
        IdSet all_bound;
        Ann own = Ann::Plus;
    };

    const std::map<std::string, BaseNode>& base_nodes() const { return nodes_; }
    const std::map<std::string, CandNode>& candidates() const { return cands_; }

    bool confirm(const std::string& node_id, ConflictKind kind, Conflict* out = nullptr) const {
        auto it = nodes_.find(node_id);
        if (it == nodes_.end()) return false;
        switch (kind) {
            case ConflictKind::PreserveDelete: return confirm_pdc(it->second, out);
            case ConflictKind::CorrespondencePreservation: return confirm_cpc(it->second, out);
            case ConflictKind::AttributeChange: return confirm_acc(it->second, out);
        }
        return false;
    }

    // Counters for conflict evaluation predicates.
    std::map<std::string, std::int64_t> conflict_stats(const Conflict& c) const {
        IdSet elems = scope_element_set(c);
        std::int64_t del_s = 0, del_t = 0, add_s = 0, add_t = 0, chg_s = 0, chg_t = 0;
        for (auto& [id, side] : deleted_live_)
            if (elems.count(id)) (side == Side::Source ? del_s : del_t)++;
        for (auto& [id, side] : added_live_)
            if (elems.count(id)) (side == Side::Source ? add_s : add_t)++;
        for (auto& [key, v] : attr_changed_src_)
            if (elems.count(key.first)) chg_s++;
        for (auto& [key, v] : attr_changed_trg_)
            if (elems.count(key.first)) chg_t++;
        return {{"deletedSrc", del_s}, {"deletedTrg", del_t},   {"addedSrc", add_s},
                {"addedTrg", add_t},   {"changedSrc", chg_s},   {"changedTrg", chg_t},
                {"scopeSize", static_cast<std::int64_t>(c.scope.size())}};
    }

private:
    // --- initialization ------------------------------------------------
    void capture_payloads(const TripleGraph& base, const Delta& ds, const Delta& dt) {
        TripleGraph scratch = base;
        for (const Delta* d : {&ds, &dt}) {
            for (auto& op : d->ops) {
                if (auto* a = std::get_if<AddNodeOp>(&op)) {
                    Node n{a->id, d->side, a->type, a->attrs};
                    scratch.add_node(n);
                } else if (auto* a = std::get_if<AddEdgeOp>(&op)) {
                    Edge e{a->id, d->side, a->type, a->from, a->to};
                    scratch.add_edge(e);
                } else if (auto* del = std::get_if<DeleteNodeOp>(&op)) {
                    payloads_[del->id] = scratch.node(del->id);
                    scratch.remove_node(del->id);
                } else if (auto* del = std::get_if<DeleteEdgeOp>(&op)) {
                    payloads_[del->id] = scratch.edge(del->id);
                    scratch.remove_edge(del->id);
                } else if (auto* s = std::get_if<SetAttrOp>(&op)) {
                    scratch.set_attr(s->id, s->attr, s->new_value);
                }
            }
        }
    }

    void init_nodes(const PrecedenceGraph& pg) {
        initial_pg_ = pg;
        for (auto& m : pg.nodes) {
            BaseNode n;
            n.id = m.id;
            n.rule = m.rule;
            n.bindings = m.bindings;
            n.created = m.created;
            n.context = m.context;
            nodes_[n.id] = std::move(n);
            for (auto& e : m.created) covered_[e] = m.id;
        }
        for (auto& [id, n] : nodes_) index_binders(id, n.bindings);
    }

    void index_binders(const std::string& node_id, const Bindings& b) {
        for (auto& [pid, e] : b) binders_[e].insert(node_id);
    }
    void unindex_binders(const std::string& node_id, const Bindings& b) {
        for (auto& [pid, e] : b) {
            auto it = binders_.find(e);
            if (it != binders_.end()) {
                it->second.erase(node_id);
                if (it->second.empty()) binders_.erase(it);
            }
        }
    }

    void rebuild_live_delta() {
        added_live_.clear();
        deleted_live_.clear();
        attr_changed_src_.clear();
        attr_changed_trg_.clear();
        auto scan = [&](const std::vector<DeltaOp>& ops, const std::vector<bool>& revoked,
                        Side side) {
            auto& attr_changed = side == Side::Source ? attr_changed_src_ : attr_changed_trg_;
            for (std::size_t i = 0; i < ops.size(); ++i) {
                if (revoked[i]) continue;
                const DeltaOp& op = ops[i];
                if (auto* a = std::get_if<AddNodeOp>(&op)) {
                    added_live_[a->id] = side;
                    deleted_live_.erase(a->id);
                } else if (auto* a = std::get_if<AddEdgeOp>(&op)) {
                    added_live_[a->id] = side;
                    deleted_live_.erase(a->id);
                } else if (auto* del = std::get_if<DeleteNodeOp>(&op)) {
                    if (added_live_.erase(del->id) == 0) deleted_live_[del->id] = side;
                } else if (auto* del = std::get_if<DeleteEdgeOp>(&op)) {
                    if (added_live_.erase(del->id) == 0) deleted_live_[del->id] = side;
                } else if (auto* s = std::get_if<SetAttrOp>(&op)) {
                    auto key = std::make_pair(s->id, s->attr);
                    auto it = attr_changed.find(key);
                    if (it == attr_changed.end()) {
                        if (!(s->old_value == s->new_value))
                            attr_changed[key] = {s->old_value, s->new_value};
                    } else {
                        it->second.second = s->new_value;
                        if (it->second.first == it->second.second) attr_changed.erase(it);
                    }
                }
            }
        };
        scan(src_ops_, src_revoked_, Side::Source);
        scan(trg_ops_, trg_revoked_, Side::Target);
    }

    // --- annotation -----------------------------------------------------
    std::optional<Side> element_side(const ElemId& e) const {
        if (host_.has_node(e)) return host_.node(e).side;
        if (host_.has_edge(e)) return host_.edge(e).side;
        if (host_.has_corr(e)) return Side::Corr;
        // deleted: consult payloads
        auto it = payloads_.find(e);
        if (it != payloads_.end()) {
            if (auto* n = std::get_if<Node>(&it->second)) return n->side;
            if (auto* ed = std::get_if<Edge>(&it->second)) return ed->side;
        }
        return std::nullopt;
    }

    // last known attribute value, falling back to the deletion payload
    std::optional<AttrValue> attr_value(const ElemId& e, const std::string& attr) const {
        if (host_.has_node(e)) {
            auto& attrs = host_.node(e).attrs;
            auto it = attrs.find(attr);
            if (it != attrs.end()) return it->second;
            return std::nullopt;
        }
        auto it = payloads_.find(e);
        if (it != payloads_.end()) {
            if (auto* n = std::get_if<Node>(&it->second)) {
                auto ait = n->attrs.find(attr);
                if (ait != n->attrs.end()) return ait->second;
            }
        }
        return std::nullopt;
    }

    bool side_attr_changed(const ElemId& e, const std::string& attr, Side s) const {
        auto& m = s == Side::Source ? attr_changed_src_ : attr_changed_trg_;
        return m.count({e, attr}) != 0;
    }

    void annotate_base(const std::string& id) {
        auto it = nodes_.find(id);
        if (it == nodes_.end()) return;
        BaseNode& n = it->second;
        const TggRule* r = g_->rule(n.rule);
        AnnSet anns[2];
        Side sides[2] = {Side::Source, Side::Target};
        for (int k = 0; k < 2; ++k) {
            Side s = sides[k];
            // created elements on this side
            std::size_t total = 0, gone = 0;
            for (auto& e : n.created) {
                auto es = element_side_static(n, e);
                if (es != s) continue;
                ++total;
                if (!host_.has_element(e)) ++gone;
            }
            if (total > 0 && gone == total) {
                anns[k].insert(Ann::Minus);
            } else if (gone > 0) {
                anns[k].insert(Ann::Slash);
            } else {
                // context elements of this side missing
                for (auto& e : n.context) {
                    if (element_side_static(n, e) != s) continue;
                    if (!host_.has_element(e)) {
                        anns[k].insert(Ann::Slash);
                        break;
                    }
                }
            }
            // attribute constraint violated by this side's edit
            if (r) {
                for (auto& c : r->pattern.conds) {
                    if (!cond_violated_now(n, c)) continue;
                    if (cond_touched_by(n, c, s)) anns[k].insert(Ann::Hash);
                }
                // filter NAC of the operationalized rule violated by an added element
                const OperationalRule& dir =
                    s == Side::Source ? ops_->of(n.rule).fwd : ops_->of(n.rule).bwd;
                for (auto& nac : dir.pattern.nacs) {
                    if (nac.side != s) continue;
                    if (nac_violated_by_add(n, dir.pattern, nac)) {
                        anns[k].insert(Ann::N);
                        break;
                    }
                }
            }
        }
        n.src_ann = std::move(anns[0]);
        n.trg_ann = std::move(anns[1]);
        if (n.annotated())
            annotated_.insert(id);
        else
            annotated_.erase(id);
        refresh_unpropagated_node(n);
    }

    // side of an element as recorded by the node's rule (works for deleted
    // elements too)
    Side element_side_static(const BaseNode& n, const ElemId& e) const {
        auto s = element_side(e);
        if (s) return *s;
        // fall back to the rule pattern
        const TggRule* r = g_->rule(n.rule);
        if (r) {
            for (auto& [pid, id] : n.bindings) {
                if (id != e) continue;
                if (auto* pn = r->pattern.find_node(pid)) return pn->side;
                if (auto* pe = r->pattern.find_edge(pid)) return pe->side;
                if (r->pattern.find_corr(pid)) return Side::Corr;
            }
        }
        return Side::Corr;
    }

    bool cond_violated_now(const BaseNode& n, const AttrCond& c) const {
        auto slot_val = [&](const AttrSlot& s) -> std::optional<AttrValue> {
            auto bit = n.bindings.find(s.pid);
            if (bit == n.bindings.end()) return std::nullopt;
            return attr_value(bit->second, s.attr);
        };
        auto lv = slot_val(c.lhs);
        auto rv = c.rhs_is_const ? std::optional<AttrValue>(c.rhs_const) : slot_val(c.rhs_slot);
        if (!lv || !rv) return false;
        return !(*lv == *rv);
    }

    bool cond_touched_by(const BaseNode& n, const AttrCond& c, Side s) const {
        auto touched = [&](const AttrSlot& slot) {
            auto bit = n.bindings.find(slot.pid);
            if (bit == n.bindings.end()) return false;
            return side_attr_changed(bit->second, slot.attr, s);
        };
        if (touched(c.lhs)) return true;
        if (!c.rhs_is_const && touched(c.rhs_slot)) return true;
        return false;
    }

    bool nac_violated_by_add(const BaseNode& n, const Pattern& pat, const Nac& nac) const {
        (void)pat;
        // anchors of the NAC must still exist
        Bindings anchors;
        for (auto& e : nac.edges) {
            for (const std::string* pid : {&e.from, &e.to}) {
                bool local = false;
                for (auto& nn : nac.nodes)
                    if (nn.pid == *pid) local = true;
                if (local) continue;
                auto bit = n.bindings.find(*pid);
                if (bit == n.bindings.end() || !host_.has_element(bit->second)) return false;
                anchors[*pid] = bit->second;
            }
        }
        Pattern ext;
        ext.name = nac.name;
        ext.nodes = nac.nodes;
        ext.edges = nac.edges;
        MatchOptions opt;
        detail::MatchCtx ctx(ext, host_, g_->types, opt);
        // anchors are fixed, joint injectivity with all live node bindings
        for (auto& [pid, id] : n.bindings)
            if (host_.has_element(id)) ctx.used.insert(id);
        for (auto& [pid, id] : anchors) ctx.bound[pid] = id;
        detail::match_rec(ctx);
        for (auto& m : ctx.results) {
            for (auto& [pid, id] : m.bindings) {
                if (anchors.count(pid)) continue;
                if (added_live_.count(id)) return true;  // introduced by the edit
            }
        }
        return false;
    }

    void refresh_unpropagated_node(const BaseNode& n) {
        bool broken = n.structurally_broken();
        for (auto& e : n.created) {
            if (!host_.has_element(e)) {
                unpropagated_.erase(e);
                continue;
            }
            if (covered_.count(e) && covered_.at(e) == n.id) {
                if (broken)
                    unpropagated_.insert(e);
                else
                    unpropagated_.erase(e);
            }
        }
    }

    void refresh_unpropagated_added() {
        for (auto& [id, s] : added_live_) {
            if (!host_.has_element(id)) continue;
            if (!covered_.count(id)) unpropagated_.insert(id);
        }
        // drop stale entries
        std::vector<ElemId> stale;
        for (auto& e : unpropagated_) {
            if (!host_.has_element(e)) {
                stale.push_back(e);
                continue;
            }
            bool added = added_live_.count(e) && !covered_.count(e);
            bool broken_created = false;
            auto cit = covered_.find(e);
            if (cit != covered_.end()) {
                auto nit = nodes_.find(cit->second);
                broken_created = nit != nodes_.end() && nit->second.structurally_broken();
            }
            if (!added && !broken_created) stale.push_back(e);
        }
        for (auto& e : stale) unpropagated_.erase(e);
    }

    // --- candidates -----------------------------------------------------
    void enumerate_candidates() {
        for (auto& e : IdSet(unpropagated_)) try_candidates_at(e);
    }

    void try_candidates_at(const ElemId& e) {
        auto es = element_side(e);
        if (!es || *es == Side::Corr) return;
        for (auto& r : g_->rules) {
            const OperationalRule& pat =
                *es == Side::Source ? ops_->of(r.name).src_pattern : ops_->of(r.name).trg_pattern;
            if (pat.pattern.empty()) continue;
            for (auto& pid : pat.pattern.pids_with_role(Role::Create)) {
                if (!seed_ok(pat.pattern, pid, e)) continue;
                MatchOptions opt;
                opt.element_filter = [&](const std::string& p, const ElemId& id) {
                    auto* pn2 = pat.pattern.find_node(p);
                    bool is_create = false;
                    if (pn2)
                        is_create = pn2->role == Role::Create;
                    else if (auto* pe2 = pat.pattern.find_edge(p))
                        is_create = pe2->role == Role::Create;
                    if (is_create) return unpropagated_.count(id) != 0;
                    return host_.has_element(id);
                };
                for (auto& m : find_matches(pat.pattern, host_, g_->types, {{pid, e}}, opt))
                    install_candidate(r.name, *es, pat.pattern, m);
            }
        }
    }

    bool seed_ok(const Pattern& p, const std::string& pid, const ElemId& e) const {
        if (auto* pn = p.find_node(pid)) {
            if (!host_.has_node(e)) return false;
            const Node& hn = host_.node(e);
            return hn.side == pn->side && g_->types.is_subtype(hn.type, pn->type) &&
                   unpropagated_.count(e);
        }
        if (auto* pe = p.find_edge(pid)) {
            if (!host_.has_edge(e)) return false;
            const Edge& he = host_.edge(e);
            return he.side == pe->side && he.type == pe->type && unpropagated_.count(e);
        }
        return false;
    }

    void install_candidate(const std::string& rule, Side side, const Pattern& pat,
                           const PatternMatch& m) {
        CandNode c;
        c.rule = rule;
        c.side = side;
        c.bindings = m.bindings;
        for (auto& [pid, id] : m.bindings) {
            c.all_bound.insert(id);
            bool is_create = false;
            if (auto* pn = pat.find_node(pid))
                is_create = pn->role == Role::Create;
            else if (auto* pe = pat.find_edge(pid))
                is_create = pe->role == Role::Create;
            if (is_create) c.create_bound.insert(id);
        }
        if (c.create_bound.empty()) return;
        // never re-create deleted structure: at least one bound element must
        // stem from the user edit
        bool any_added = false, any_previous = false;
        for (auto& e : c.create_bound) {
            if (added_live_.count(e)) any_added = true;
            if (covered_.count(e)) any_previous = true;
        }
        if (!any_added) return;
        c.own = any_previous ? Ann::Star : Ann::Plus;
        // dedupe by binding signature
        std::string sig = rule + "|" + side_name(side) + "|";
        for (auto& [pid, id] : c.bindings) sig += pid + "=" + id + ";";
        if (!cand_sigs_.insert(sig).second) return;
        std::string base_id = rule + "~" + side_name(side) + ":" + *c.create_bound.begin();
        std::string id = base_id;
        int k = 1;
        while (cands_.count(id) || nodes_.count(id)) id = base_id + "#" + std::to_string(++k);
        c.id = id;
        index_binders(id, c.bindings);
        cand_sig_of_[id] = sig;
        cands_[id] = std::move(c);
    }

    void sweep_candidates(const std::set<ElemId>& touched) {
        std::set<std::string> check;
        for (auto& e : touched) {
            auto it = binders_.find(e);
            if (it == binders_.end()) continue;
            for (auto& n : it->second)
                if (cands_.count(n)) check.insert(n);
        }
        for (auto& id : check) {
            auto it = cands_.find(id);
            if (it == cands_.end()) continue;
            CandNode& c = it->second;
            bool dead = false;
            for (auto& e : c.all_bound)
                if (!host_.has_element(e)) dead = true;
            bool any_added = false, any_previous = false;
            if (!dead) {
                for (auto& e : c.create_bound) {
                    if (!unpropagated_.count(e)) dead = true;
                    if (added_live_.count(e)) any_added = true;
                    if (covered_.count(e)) any_previous = true;
                }
            }
            if (!dead && !any_added) dead = true;
            if (dead) {
                unindex_binders(id, c.bindings);
                cand_sigs_.erase(cand_sig_of_[id]);
                cand_sig_of_.erase(id);
                cands_.erase(it);
            } else {
                c.own = any_previous ? Ann::Star : Ann::Plus;
            }
        }
    }

    // --- shared mutation plumbing ----------------------------------------
    void after_mutation(const std::set<ElemId>& touched) {
        std::set<std::string> affected;
        for (auto& e : touched) {
            auto bit = binders_.find(e);
            if (bit != binders_.end())
                for (auto& n : bit->second)
                    if (nodes_.count(n)) affected.insert(n);
            // endpoints of touched edges influence NAC checks of their binders
            if (host_.has_edge(e)) {
                for (const ElemId* ep : {&host_.edge(e).from, &host_.edge(e).to}) {
                    auto b2 = binders_.find(*ep);
                    if (b2 != binders_.end())
                        for (auto& n : b2->second)
                            if (nodes_.count(n)) affected.insert(n);
                }
            }
        }
        for (auto& n : affected) annotate_base(n);
        refresh_unpropagated_added();
        sweep_candidates(touched);
    }

    std::vector<std::string> sorted_cand_ids() const {
        std::vector<std::string> out;
        out.reserve(cands_.size());
        for (auto& [id, c] : cands_) out.push_back(id);
        return out;
    }
    std::vector<std::string> sorted_annotated() const {
        return std::vector<std::string>(annotated_.begin(), annotated_.end());
    }

    bool eligible(const std::string& node_id, const Restrict& restrict_to) const {
        if (restrict_to) return restrict_to->count(node_id) != 0;
        return in_scope_.count(node_id) == 0;
    }

    bool has_any(const BaseNode& n, std::initializer_list<Ann> as) const {
        for (Ann a : as)
            if (n.src_ann.count(a) || n.trg_ann.count(a)) return true;
        return false;
    }

    bool solely_minus(const BaseNode& n) const {
        auto only_minus = [](const AnnSet& s) {
            return s.empty() || (s.size() == 1 && s.count(Ann::Minus));
        };
        bool some = n.src_ann.count(Ann::Minus) || n.trg_ann.count(Ann::Minus);
        return some && only_minus(n.src_ann) && only_minus(n.trg_ann);
    }

    bool context_ok(const ElemId& e) const {
        if (!host_.has_element(e)) return false;
        auto it = covered_.find(e);
        if (it == covered_.end()) return false;
        auto nit = nodes_.find(it->second);
        return nit != nodes_.end() && !nit->second.structurally_broken();
    }

    Pattern context_part(const Pattern& p) const {
        Pattern out;
        out.name = p.name + "_ctx";
        for (auto& n : p.nodes)
            if (n.role == Role::Context) out.nodes.push_back(n);
        for (auto& e : p.edges)
            if (e.role == Role::Context) out.edges.push_back(e);
        for (auto& c : p.corrs)
            if (c.role == Role::Context) out.corrs.push_back(c);
        out.nacs = p.nacs;
        out.conds = p.conds;  // conditions over unbound elements are skipped
        return out;
    }

    Marking mark_of(const Pattern& p, const std::string& pid) const {
        if (auto* n = p.find_node(pid)) return n->mark;
        if (auto* e = p.find_edge(pid)) return e->mark;
        if (auto* c = p.find_corr(pid)) return c->mark;
        return Marking::None;
    }

    std::string fresh_node_id(const TggRule& r, const Bindings& created) {
        std::set<std::string> taken;
        std::string base = detail::pg_node_id(r, created, taken);
        std::string id = base + "@" + std::to_string(++app_counter_);
        return id;
    }

    BaseNode& install_node(const TggRule& r, const Bindings& full) {
        BaseNode n;
        n.rule = r.name;
        n.bindings = full;
        Bindings created_b;
        for (auto& pid : r.pattern.pids_with_role(Role::Create)) {
            auto it = full.find(pid);
            if (it != full.end()) {
                n.created.insert(it->second);
                created_b[pid] = it->second;
            }
        }
        for (auto& [pid, id] : full)
            if (!n.created.count(id)) n.context.insert(id);
        n.id = fresh_node_id(r, created_b);
        for (auto& e : n.created) {
            covered_[e] = n.id;
            unpropagated_.erase(e);
        }
        index_binders(n.id, n.bindings);
        auto [it, ok] = nodes_.emplace(n.id, std::move(n));
        annotate_base(it->first);
        return it->second;
    }

    void drop_node(const std::string& id, bool erase_record = true) {
        auto it = nodes_.find(id);
        if (it == nodes_.end()) return;
        for (auto& e : it->second.created) {
            auto cit = covered_.find(e);
            if (cit != covered_.end() && cit->second == id) covered_.erase(cit);
        }
        unindex_binders(id, it->second.bindings);
        annotated_.erase(id);
        if (erase_record) nodes_.erase(it);
    }

    // --- fragment implementations ----------------------------------------
    bool try_local_cc(const CandNode& cand) {
        const TggRule* r = g_->rule(cand.rule);
        const OperationalRule& cc = ops_->of(cand.rule).cc;
        // pairing requires created elements on both sides
        bool src_any = false, trg_any = false;
        for (auto& n : r->pattern.nodes)
            if (n.role == Role::Create) (n.side == Side::Source ? src_any : trg_any) = true;
        for (auto& e : r->pattern.edges)
            if (e.role == Role::Create) (e.side == Side::Source ? src_any : trg_any) = true;
        if (!src_any || !trg_any) return false;
        MatchOptions opt;
        opt.limit = 1;
        opt.element_filter = [&](const std::string& pid, const ElemId& id) {
            Marking mk = mark_of(cc.pattern, pid);
            if (mk == Marking::Translates)
                return unpropagated_.count(id) != 0 && added_live_.count(id) != 0;
            return context_ok(id);
        };
        std::vector<PatternMatch> ms;
        try {
            ms = find_matches(context_part(cc.pattern), host_, g_->types, cand.bindings, opt);
        } catch (const TgsError&) {
            return false;
        }
        if (ms.empty()) return false;
        ApplyResult res;
        try {
            res = apply_pattern(cc.pattern, ms[0], host_, g_->types, ids_, {}, provider());
        } catch (const TgsError&) {
            return false;
        }
        BaseNode& n = install_node(*r, res.full);
        report_.rule_log.push_back("local-cc " + cc.name + " -> " + n.id);
        std::set<ElemId> touched;
        for (auto& [pid, id] : res.full) touched.insert(id);
        after_mutation(touched);
        return true;
    }

    bool try_translate(const CandNode& cand) {
        const TggRule* r = g_->rule(cand.rule);
        const OperationalRule& dir =
            cand.side == Side::Source ? ops_->of(cand.rule).fwd : ops_->of(cand.rule).bwd;
        // all create-bound elements must still be pending
        for (auto& e : cand.create_bound)
            if (!unpropagated_.count(e)) return false;
        MatchOptions opt;
        opt.limit = 1;
        opt.element_filter = [&](const std::string& pid, const ElemId& id) {
            Marking mk = mark_of(dir.pattern, pid);
            if (mk == Marking::Translates) return unpropagated_.count(id) != 0;
            return context_ok(id);
        };
        std::vector<PatternMatch> ms;
        try {
            ms = find_matches(context_part(dir.pattern), host_, g_->types, cand.bindings, opt);
        } catch (const TgsError&) {
            return false;
        }
        if (ms.empty()) return false;
        ApplyResult res;
        try {
            res = apply_pattern(dir.pattern, ms[0], host_, g_->types, ids_, {}, provider());
        } catch (const TgsError&) {
            return false;
        }
        BaseNode& n = install_node(*r, res.full);
        report_.rule_log.push_back("translate " + dir.name + " -> " + n.id);
        std::set<ElemId> touched;
        for (auto& [pid, id] : res.full) touched.insert(id);
        after_mutation(touched);
        return true;
    }

    bool try_attr_repair(const BaseNode& n) {
        bool src_hash = n.src_ann.count(Ann::Hash) != 0;
        bool trg_hash = n.trg_ann.count(Ann::Hash) != 0;
        if (src_hash == trg_hash) return false;  // contradictory or none
        Side from = src_hash ? Side::Source : Side::Target;
        const TggRule* r = g_->rule(n.rule);
        if (!r) return false;
        bool changed = false;
        std::set<ElemId> touched;
        for (auto& c : r->pattern.conds) {
            if (!cond_violated_now(n, c) || c.rhs_is_const) continue;
            auto lhs_it = n.bindings.find(c.lhs.pid);
            auto rhs_it = n.bindings.find(c.rhs_slot.pid);
            if (lhs_it == n.bindings.end() || rhs_it == n.bindings.end()) continue;
            if (!host_.has_node(lhs_it->second) || !host_.has_node(rhs_it->second)) continue;
            Side lhs_side = host_.node(lhs_it->second).side;
            const ElemId& src_el = lhs_side == from ? lhs_it->second : rhs_it->second;
            const std::string& src_attr = lhs_side == from ? c.lhs.attr : c.rhs_slot.attr;
            const ElemId& dst_el = lhs_side == from ? rhs_it->second : lhs_it->second;
            const std::string& dst_attr = lhs_side == from ? c.rhs_slot.attr : c.lhs.attr;
            auto v = attr_value(src_el, src_attr);
            if (!v) continue;
            host_.set_attr(dst_el, dst_attr, *v);
            touched.insert(dst_el);
            changed = true;
            report_.rule_log.push_back("attr-repair " + n.rule + " " + dst_el + "." + dst_attr);
        }
        if (changed) after_mutation(touched);
        return changed;
    }

    bool try_shortcut_repair(const BaseNode& n) {
        for (auto& sc : ops_->shortcuts) {
            if (sc.decl.replaced != n.rule) continue;
            for (const OperationalRule* rep : {&sc.repairs.cc, &sc.repairs.fwd, &sc.repairs.bwd}) {
                if (try_repair_rule(n, sc, *rep)) return true;
            }
        }
        return false;
    }

    bool try_repair_rule(const BaseNode& n, const ShortcutOps& sc, const OperationalRule& rep) {
        const TggRule* r2 = g_->rule(sc.decl.replacing);
        // absent elements of the replaced application must be gone
        std::map<std::string, std::string> replaced_of;  // sc pid -> r1 pid
        for (auto& [r1pid, scpid] : rep.from_replaced) replaced_of[scpid] = r1pid;
        for (auto& a : rep.absent) {
            auto rit = replaced_of.find(a);
            if (rit == replaced_of.end()) continue;
            auto bit = n.bindings.find(rit->second);
            if (bit == n.bindings.end()) return false;
            if (host_.has_element(bit->second)) return false;
        }
        // seed preserved / old-context / delete-bound elements from n
        Bindings seed;
        for (auto& [r1pid, scpid] : rep.from_replaced) {
            if (!rep.pattern.has_pid(scpid)) continue;
            auto bit = n.bindings.find(r1pid);
            if (bit == n.bindings.end()) return false;
            if (!host_.has_element(bit->second)) return false;
            seed[scpid] = bit->second;
        }
        MatchOptions opt;
        opt.limit = 1;
        opt.element_filter = [&](const std::string& pid, const ElemId& id) {
            Marking mk = mark_of(rep.pattern, pid);
            if (mk == Marking::Translates)
                return unpropagated_.count(id) != 0 && added_live_.count(id) != 0;
            return context_ok(id);
        };
        std::vector<PatternMatch> ms;
        try {
            ms = find_matches(context_part(rep.pattern), host_, g_->types, seed, opt);
        } catch (const TgsError&) {
            return false;
        }
        if (ms.empty()) return false;
        ApplyResult res;
        try {
            res = apply_pattern(rep.pattern, ms[0], host_, g_->types, ids_, rep.deletes,
                               provider());
        } catch (const TgsError&) {
            return false;
        }
        // rebind to the replacing rule's pid space
        Bindings full2;
        for (auto& [r2pid, scpid] : rep.from_replacing) {
            auto it = res.full.find(scpid);
            if (it != res.full.end()) full2[r2pid] = it->second;
        }
        std::set<ElemId> touched(res.deleted.begin(), res.deleted.end());
        for (auto& [pid, id] : res.full) touched.insert(id);
        std::string old_id = n.id;
        drop_node(old_id);
        BaseNode& created = install_node(*r2, full2);
        report_.rule_log.push_back("repair " + rep.name + " " + old_id + " -> " + created.id);
        after_mutation(touched);
        return true;
    }

    // Cascades over dependents regardless of scope boundaries: preserve-delete
    // scopes are dependency-closed, so in-scope rollbacks stay in scope.
    void rollback_node(const std::string& id) {
        std::set<std::string> visiting;
        rollback_rec(id, visiting);
    }

    void rollback_rec(const std::string& id, std::set<std::string>& visiting) {
        auto it = nodes_.find(id);
        if (it == nodes_.end() || visiting.count(id)) return;
        visiting.insert(id);
        // dependents first
        std::set<std::string> deps;
        for (auto& e : it->second.created) {
            auto bit = binders_.find(e);
            if (bit == binders_.end()) continue;
            for (auto& m : bit->second)
                if (m != id && nodes_.count(m)) deps.insert(m);
        }
        for (auto& d : deps) rollback_rec(d, visiting);
        it = nodes_.find(id);
        if (it == nodes_.end()) return;
        BaseNode n = it->second;
        std::set<ElemId> touched;
        // delete still-present created elements (edges, corrs, then nodes),
        // cascading over foreign incident edges
        std::vector<ElemId> edges, corrs, node_els;
        for (auto& e : n.created) {
            if (!host_.has_element(e)) continue;
            if (host_.has_edge(e))
                edges.push_back(e);
            else if (host_.has_corr(e))
                corrs.push_back(e);
            else
                node_els.push_back(e);
        }
        auto delete_edge = [&](const ElemId& e) {
            if (!host_.has_edge(e)) return;
            host_.remove_edge(e);
            touched.insert(e);
            report_.rule_log.push_back("rollback deleted " + e);
        };
        for (auto& e : edges) delete_edge(e);
        for (auto& e : corrs) {
            if (!host_.has_corr(e)) continue;
            host_.remove_corr(e);
            touched.insert(e);
            report_.rule_log.push_back("rollback deleted " + e);
        }
        for (auto& e : node_els) {
            if (!host_.has_node(e)) continue;
            for (auto& inc : IdSet(host_.edges_out(e))) delete_edge(inc);
            for (auto& inc : IdSet(host_.edges_in(e))) delete_edge(inc);
            // correspondences referencing the node become dangling; drop the
            // ones this node created, leave foreign ones to their owners
            host_.remove_node(e);
            touched.insert(e);
            report_.rule_log.push_back("rollback deleted " + e);
        }
        drop_node(n.id);
        after_mutation(touched);
    }

    void cleanup_delete(const ElemId& e, std::set<ElemId>& queue) {
        if (!host_.has_element(e)) return;
        std::set<ElemId> touched;
        std::function<void(const ElemId&)> del = [&](const ElemId& x) {
            if (!host_.has_element(x)) return;
            if (host_.has_edge(x)) {
                host_.remove_edge(x);
            } else if (host_.has_corr(x)) {
                host_.remove_corr(x);
            } else {
                for (auto& inc : IdSet(host_.edges_out(x))) del(inc);
                for (auto& inc : IdSet(host_.edges_in(x))) del(inc);
                for (auto& c : IdSet(host_.corrs_at(x))) del(c);
                host_.remove_node(x);
            }
            touched.insert(x);
            report_.cleanup_deleted.push_back(x);
            // breaking a covering match strands its other elements
            auto cit = covered_.find(x);
            if (cit != covered_.end()) {
                auto nit = nodes_.find(cit->second);
                if (nit != nodes_.end()) {
                    BaseNode dead = nit->second;
                    drop_node(dead.id);
                    for (auto& other : dead.created)
                        if (host_.has_element(other)) queue.insert(other);
                }
            }
        };
        del(e);
        after_mutation(touched);
    }

    // --- conflicts --------------------------------------------------------
    void detect_conflicts() {
        std::vector<Conflict> out;
        for (auto& [id, n] : nodes_) {
            auto kinds = potential_conflicts_for(n.src_ann, n.trg_ann);
            for (auto k : kinds) {
                Conflict c;
                if (confirm(id, k, &c)) out.push_back(std::move(c));
            }
        }
        std::sort(out.begin(), out.end(), [](const Conflict& a, const Conflict& b) {
            if (a.anchor != b.anchor) return a.anchor < b.anchor;
            return static_cast<int>(a.kind) < static_cast<int>(b.kind);
        });
        report_.conflicts = std::move(out);
        resolved_.assign(report_.conflicts.size(), false);
        rebuild_scope_index();
    }

    // transitive dependents (through candidates as well)
    std::set<std::string> dependents_closure(const std::string& root) const {
        std::set<std::string> out{root};
        std::vector<std::string> work{root};
        while (!work.empty()) {
            std::string cur = work.back();
            work.pop_back();
            IdSet elems;
            auto nit = nodes_.find(cur);
            if (nit != nodes_.end()) elems = nit->second.created;
            auto cit = cands_.find(cur);
            if (cit != cands_.end()) elems = cit->second.create_bound;
            for (auto& e : elems) {
                auto bit = binders_.find(e);
                if (bit == binders_.end()) continue;
                for (auto& m : bit->second) {
                    if (out.count(m)) continue;
                    bool is_creator = false;
                    auto mn = nodes_.find(m);
                    if (mn != nodes_.end() && mn->second.created.count(e) && m == cur)
                        is_creator = true;
                    (void)is_creator;
                    if (m == cur) continue;
                    out.insert(m);
                    work.push_back(m);
                }
            }
        }
        return out;
    }

    bool confirm_pdc(const BaseNode& n, Conflict* out) const {
        for (Side s : {Side::Source, Side::Target}) {
            const AnnSet& ann = s == Side::Source ? n.src_ann : n.trg_ann;
            if (!ann.count(Ann::Minus) && !ann.count(Ann::Slash)) continue;
            if (n.src_ann.count(Ann::Minus) && n.trg_ann.count(Ann::Minus)) continue;  // rollback
            Side t = s == Side::Source ? Side::Target : Side::Source;
            auto scope = dependents_closure(n.id);
            // elements that vanish if the deletion is propagated: survivors of
            // scope base nodes that no live candidate preserves
            IdSet preservable;
            for (auto& [cid, c] : cands_)
                if (c.own == Ann::Star)
                    for (auto& e : c.create_bound) preservable.insert(e);
            IdSet doomed;
            for (auto& m : scope) {
                auto mit = nodes_.find(m);
                if (mit == nodes_.end()) continue;
                for (auto& e : mit->second.created)
                    if (host_.has_element(e) && !preservable.count(e)) doomed.insert(e);
            }
            std::vector<std::string> evidence;
            // blocked additions on the opposite side
            for (auto& [a, aside] : added_live_) {
                if (aside != t || !host_.has_element(a)) continue;
                if (covered_.count(a)) continue;
                std::vector<const CandNode*> explaining;
                for (auto& [cid, c] : cands_)
                    if (c.create_bound.count(a)) explaining.push_back(&c);
                if (explaining.empty()) continue;
                bool all_vanish = true;
                for (auto* c : explaining) {
                    bool vanish = false;
                    for (auto& e : c->all_bound)
                        if (doomed.count(e)) vanish = true;
                    if (!vanish) all_vanish = false;
                }
                if (all_vanish) evidence.push_back("blocked-add:" + a);
            }
            // attribute changes on the opposite side that would be lost
            const auto& changed = t == Side::Source ? attr_changed_src_ : attr_changed_trg_;
            for (auto& [key, vals] : changed)
                if (doomed.count(key.first)) evidence.push_back("lost-change:" + key.first);
            if (!evidence.empty()) {
                if (out) {
                    out->kind = ConflictKind::PreserveDelete;
                    out->anchor = n.id;
                    out->scope = scope;
                    out->evidence = std::move(evidence);
                }
                return true;
            }
        }
        return false;
    }

    bool confirm_cpc(const BaseNode& n, Conflict* out) const {
        auto broken = [](const AnnSet& a) { return a.count(Ann::N) || a.count(Ann::Slash); };
        if (!broken(n.src_ann) || !broken(n.trg_ann)) return false;
        // survivors that need to be covered and related again
        IdSet survivors;
        for (auto& e : n.created)
            if (host_.has_element(e)) survivors.insert(e);
        if (survivors.empty()) return false;
        if (complete_rematch_exists(n, survivors)) return false;
        if (out) {
            out->kind = ConflictKind::CorrespondencePreservation;
            out->anchor = n.id;
            out->scope.insert(n.id);
            for (auto& [cid, c] : cands_) {
                if (c.own != Ann::Star) continue;
                bool shares = false;
                for (auto& e : c.create_bound)
                    if (n.created.count(e)) shares = true;
                if (shares) out->scope.insert(cid);
            }
            for (auto& e : survivors) out->evidence.push_back("survivor:" + e);
        }
        return true;
    }

    bool complete_rematch_exists(const BaseNode& n, const IdSet& survivors) const {
        // pick the smallest surviving created node element as anchor
        ElemId anchor;
        for (auto& e : survivors)
            if (host_.has_node(e)) {
                anchor = e;
                break;
            }
        if (anchor.empty()) return false;
        for (auto& r : g_->rules) {
            for (auto& pn : r.pattern.nodes) {
                if (pn.role != Role::Create) continue;
                if (!host_.has_node(anchor)) continue;
                const Node& hn = host_.node(anchor);
                if (hn.side != pn.side || !g_->types.is_subtype(hn.type, pn.type)) continue;
                MatchOptions opt;
                opt.element_filter = [&](const std::string& pid, const ElemId& id) {
                    bool is_create = false;
                    if (auto* x = r.pattern.find_node(pid))
                        is_create = x->role == Role::Create;
                    else if (auto* e2 = r.pattern.find_edge(pid))
                        is_create = e2->role == Role::Create;
                    else if (auto* c2 = r.pattern.find_corr(pid))
                        is_create = c2->role == Role::Create;
                    if (is_create)
                        return survivors.count(id) != 0 || unpropagated_.count(id) != 0;
                    return covered_.count(id) != 0 || survivors.count(id) != 0;
                };
                for (auto& m : find_matches(r.pattern, host_, g_->types, {{pn.pid, anchor}}, opt)) {
                    // must account for every survivor
                    IdSet create_bound;
                    for (auto& pid : r.pattern.pids_with_role(Role::Create)) {
                        auto bit = m.bindings.find(pid);
                        if (bit != m.bindings.end()) create_bound.insert(bit->second);
                    }
                    bool all = true;
                    for (auto& e : survivors)
                        if (!create_bound.count(e)) all = false;
                    if (all) return true;
                }
            }
        }
        return false;
    }

    bool confirm_acc(const BaseNode& n, Conflict* out) const {
        if (!n.src_ann.count(Ann::Hash) || !n.trg_ann.count(Ann::Hash)) return false;
        const TggRule* r = g_->rule(n.rule);
        if (!r) return false;
        for (auto& c : r->pattern.conds) {
            if (c.rhs_is_const || !cond_violated_now(n, c)) continue;
            bool src_changed = cond_touched_by(n, c, Side::Source);
            bool trg_changed = cond_touched_by(n, c, Side::Target);
            if (src_changed && trg_changed) {
                if (out) {
                    out->kind = ConflictKind::AttributeChange;
                    out->anchor = n.id;
                    out->scope.insert(n.id);
                    auto lv = n.bindings.count(c.lhs.pid)
                                  ? attr_value(n.bindings.at(c.lhs.pid), c.lhs.attr)
                                  : std::nullopt;
                    auto rv = n.bindings.count(c.rhs_slot.pid)
                                  ? attr_value(n.bindings.at(c.rhs_slot.pid), c.rhs_slot.attr)
                                  : std::nullopt;
                    out->evidence.push_back("attr:" + c.lhs.pid + "." + c.lhs.attr + "=" +
                                            (lv ? attr_to_string(*lv) : "?") + " vs " +
                                            c.rhs_slot.pid + "." + c.rhs_slot.attr + "=" +
                                            (rv ? attr_to_string(*rv) : "?"));
                }
                return true;
            }
        }
        return false;
    }

    bool still_confirmed(const Conflict& c) const { return confirm(c.anchor, c.kind, nullptr); }

    void rebuild_scope_index() {
        in_scope_.clear();
        for (std::size_t i = 0; i < report_.conflicts.size(); ++i) {
            if (resolved_[i]) continue;
            for (auto& n : report_.conflicts[i].scope) in_scope_[n].insert(i);
        }
    }

    IdSet scope_element_set(const Conflict& c) const {
        IdSet out;
        for (auto& nid : c.scope) {
            auto nit = nodes_.find(nid);
            if (nit != nodes_.end())
                for (auto& e : nit->second.created) out.insert(e);
            auto cit = cands_.find(nid);
            if (cit != cands_.end())
                for (auto& e : cit->second.create_bound) out.insert(e);
        }
        return out;
    }

    void apply_strategy(const Conflict& c, Strategy s, SyncReport::Resolution& res) {
        switch (s) {
            case Strategy::TakeSource:
                revert_side_ops(Side::Target, scope_element_set(c), res);
                break;
            case Strategy::TakeTarget:
                revert_side_ops(Side::Source, scope_element_set(c), res);
                break;
            case Strategy::Preserve:
                if (c.kind != ConflictKind::PreserveDelete) {
                    res.warnings.push_back("STRATEGY-NO-EFFECT: preserve on " +
                                           std::string(conflict_kind_name(c.kind)));
                    return;
                }
                preserve_blocking_deletions(c, res);
                break;
        }
    }

    void revert_side_ops(Side side, const IdSet& scope_elems, SyncReport::Resolution& res) {
        auto& ops = side == Side::Source ? src_ops_ : trg_ops_;
        auto& revoked = side == Side::Source ? src_revoked_ : trg_revoked_;
        std::set<ElemId> touched;
        for (std::size_t i = ops.size(); i-- > 0;) {
            if (revoked[i]) continue;
            const DeltaOp& op = ops[i];
            ElemId id = delta_op_id(op);
            if (!scope_elems.count(id)) continue;
            if (revert_op(op, touched, res)) revoked[i] = true;
        }
        rebuild_live_delta();
        after_mutation(touched);
    }

    bool revert_op(const DeltaOp& op, std::set<ElemId>& touched, SyncReport::Resolution& res) {
        if (auto* a = std::get_if<AddNodeOp>(&op)) {
            if (!host_.has_node(a->id)) return true;
            if (!host_.edges_out(a->id).empty() || !host_.edges_in(a->id).empty()) {
                res.warnings.push_back("cannot revert add of " + a->id + ": still connected");
                return false;
            }
            host_.remove_node(a->id);
            touched.insert(a->id);
        } else if (auto* a = std::get_if<AddEdgeOp>(&op)) {
            if (host_.has_edge(a->id)) {
                host_.remove_edge(a->id);
                touched.insert(a->id);
            }
        } else if (auto* d = std::get_if<DeleteNodeOp>(&op)) {
            auto pit = payloads_.find(d->id);
            if (pit == payloads_.end()) return false;
            if (!host_.has_node(d->id)) {
                host_.add_node(std::get<Node>(pit->second));
                touched.insert(d->id);
            }
        } else if (auto* d = std::get_if<DeleteEdgeOp>(&op)) {
            auto pit = payloads_.find(d->id);
            if (pit == payloads_.end()) return false;
            const Edge& e = std::get<Edge>(pit->second);
            if (!host_.has_edge(d->id)) {
                if (!host_.has_node(e.from) || !host_.has_node(e.to)) {
                    res.warnings.push_back("cannot restore edge " + d->id + ": endpoint missing");
                    return false;
                }
                host_.add_edge(e);
                touched.insert(d->id);
            }
        } else if (auto* s = std::get_if<SetAttrOp>(&op)) {
            if (host_.has_node(s->id)) {
                host_.set_attr(s->id, s->attr, s->old_value);
                touched.insert(s->id);
            }
        }
        return true;
    }

    // Re-create exactly the deleted elements that block additions from being
    // propagated: the minimal dependency-closed set.
    void preserve_blocking_deletions(const Conflict& c, SyncReport::Resolution& res) {
        auto nit = nodes_.find(c.anchor);
        if (nit == nodes_.end()) return;
        // which nodes' survivors block the additions: recompute like pdc
        std::set<std::string> restore;
        for (auto& ev : c.evidence) {
            if (ev.rfind("blocked-add:", 0) != 0 && ev.rfind("lost-change:", 0) != 0) continue;
            ElemId a = ev.substr(ev.find(':') + 1);
            // nodes in scope owning elements the explanation binds
            std::vector<const CandNode*> explaining;
            for (auto& [cid, cn] : cands_)
                if (cn.create_bound.count(a)) explaining.push_back(&cn);
            if (explaining.empty() && covered_.count(a)) {
                restore.insert(covered_.at(a));
                continue;
            }
            for (auto* cn : explaining)
                for (auto& e : cn->all_bound) {
                    auto cit = covered_.find(e);
                    if (cit != covered_.end() && c.scope.count(cit->second))
                        restore.insert(cit->second);
                }
        }
        if (restore.empty()) restore.insert(c.anchor);
        std::set<std::string> visited;
        std::set<ElemId> touched;
        std::function<void(const std::string&)> restore_node = [&](const std::string& id) {
            if (!visited.insert(id).second) return;
            auto it = nodes_.find(id);
            if (it == nodes_.end()) return;
            const BaseNode& y = it->second;
            for (Side s : {Side::Source, Side::Target}) {
                auto& ops = s == Side::Source ? src_ops_ : trg_ops_;
                auto& revoked = s == Side::Source ? src_revoked_ : trg_revoked_;
                for (std::size_t i = ops.size(); i-- > 0;) {
                    if (revoked[i]) continue;
                    const DeltaOp& op = ops[i];
                    bool is_delete = std::holds_alternative<DeleteNodeOp>(op) ||
                                     std::holds_alternative<DeleteEdgeOp>(op);
                    if (!is_delete) continue;
                    ElemId id2 = delta_op_id(op);
                    if (!y.created.count(id2)) continue;
                    if (revert_op(op, touched, res)) revoked[i] = true;
                }
            }
            // context still missing: restore its creators as well
            for (auto& e : y.context) {
                if (host_.has_element(e)) continue;
                auto cit = covered_.find(e);
                if (cit != covered_.end()) restore_node(cit->second);
            }
        };
        for (auto& id : restore) restore_node(id);
        rebuild_live_delta();
        after_mutation(touched);
    }

    AttrProvider provider() {
        return [this](AttrKind k, const std::string&) -> AttrValue {
            ++value_counter_;
            if (k == AttrKind::String) return "s" + std::to_string(value_counter_);
            return static_cast<std::int64_t>(value_counter_);
        };
    }

    const Tgg* g_;
    const OpRuleSet* ops_;
    TripleGraph host_;
    PrecedenceGraph initial_pg_;
    std::map<std::string, BaseNode> nodes_;
    std::map<std::string, CandNode> cands_;
    std::set<std::string> cand_sigs_;
    std::map<std::string, std::string> cand_sig_of_;
    std::map<ElemId, std::string> covered_;
    std::map<ElemId, std::set<std::string>> binders_;
    IdSet unpropagated_;
    std::set<std::string> annotated_;
    std::map<std::string, std::set<std::size_t>> in_scope_;
    std::vector<DeltaOp> src_ops_, trg_ops_;
    std::vector<bool> src_revoked_, trg_revoked_;
    std::map<ElemId, Side> added_live_;
    std::map<ElemId, Side> deleted_live_;
    std::map<std::pair<ElemId, std::string>, std::pair<AttrValue, AttrValue>> attr_changed_src_;
    std::map<std::pair<ElemId, std::string>, std::pair<AttrValue, AttrValue>> attr_changed_trg_;
    std::map<ElemId, std::variant<Node, Edge>> payloads_;
    std::vector<bool> resolved_;
    SyncReport report_;
    IdGen ids_{"~"};
    std::uint64_t app_counter_ = 0;
    std::uint64_t value_counter_ = 0;
};

// Module-level wrappers matching the specification surface.

inline IdSet unpropagated(const Tgg& g, const OpRuleSet& ops, const TripleGraph& base_host,
                          const PrecedenceGraph& pg, const Delta& ds, const Delta& dt) {
    SyncEngine e(g, ops, base_host, pg, ds, dt);
    return e.unpropagated();
}

inline DeltaPrecedenceGraph annotate(const Tgg& g, const OpRuleSet& ops,
                                     const TripleGraph& base_host, const PrecedenceGraph& pg,
                                     const Delta& ds, const Delta& dt) {
    SyncEngine e(g, ops, base_host, pg, ds, dt);
    return e.dpg();
}

inline std::vector<Conflict> detect_all(const Tgg& g, const OpRuleSet& ops,
                                        const TripleGraph& base_host, const PrecedenceGraph& pg,
                                        const Delta& ds, const Delta& dt) {
    SyncEngine e(g, ops, base_host, pg, ds, dt);
    return e.detect_all();
}

}  // namespace tgs
