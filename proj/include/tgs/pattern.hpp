#pragma once

#include <algorithm>
#include <cassert>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tgs/graph.hpp"

namespace tgs {

enum class Role { Context, Create };

// Translation markings on operationalized rule elements.
enum class Marking { None, Translates, RequiresTranslated };

struct PatternNode {
    std::string pid;
    Side side = Side::Source;
    std::string type;
    Role role = Role::Context;
    Marking mark = Marking::None;
    std::map<std::string, AttrValue> exact_attrs;  // used by isomorphism checks only
};

struct PatternEdge {
    std::string pid;
    Side side = Side::Source;
    std::string type;
    std::string from;  // pid of a pattern node
    std::string to;
    Role role = Role::Context;
    Marking mark = Marking::None;
};

struct PatternCorr {
    std::string pid;
    std::string type;
    std::string src;  // pid of a source pattern node
    std::string trg;  // pid of a target pattern node
    Role role = Role::Context;
    Marking mark = Marking::None;
};

struct AttrSlot {
    std::string pid;
    std::string attr;
    bool operator<(const AttrSlot& o) const { return std::tie(pid, attr) < std::tie(o.pid, o.attr); }
    bool operator==(const AttrSlot& o) const { return pid == o.pid && attr == o.attr; }
};

// Equality between two slots or a slot and a constant.
struct AttrCond {
    AttrSlot lhs;
    bool rhs_is_const = false;
    AttrSlot rhs_slot;
    AttrValue rhs_const;
};

// Forbidden context: a per-side extension of the base pattern. Edge endpoints
// may name base pattern pids.
struct Nac {
    std::string name;
    Side side = Side::Source;
    std::vector<PatternNode> nodes;
    std::vector<PatternEdge> edges;
};

struct Pattern {
    std::string name;
    std::vector<PatternNode> nodes;
    std::vector<PatternEdge> edges;
    std::vector<PatternCorr> corrs;
    std::vector<Nac> nacs;
    std::vector<AttrCond> conds;

    const PatternNode* find_node(const std::string& pid) const {
        for (auto& n : nodes)
            if (n.pid == pid) return &n;
        return nullptr;
    }
    const PatternEdge* find_edge(const std::string& pid) const {
        for (auto& e : edges)
            if (e.pid == pid) return &e;
        return nullptr;
    }
    const PatternCorr* find_corr(const std::string& pid) const {
        for (auto& c : corrs)
            if (c.pid == pid) return &c;
        return nullptr;
    }
    bool has_pid(const std::string& pid) const {
        return find_node(pid) || find_edge(pid) || find_corr(pid);
    }

    std::vector<std::string> pids() const {
        std::vector<std::string> out;
        for (auto& n : nodes) out.push_back(n.pid);
        for (auto& e : edges) out.push_back(e.pid);
        for (auto& c : corrs) out.push_back(c.pid);
        return out;
    }

    std::vector<std::string> pids_with_role(Role r) const {
        std::vector<std::string> out;
        for (auto& n : nodes)
            if (n.role == r) out.push_back(n.pid);
        for (auto& e : edges)
            if (e.role == r) out.push_back(e.pid);
        for (auto& c : corrs)
            if (c.role == r) out.push_back(c.pid);
        return out;
    }

    bool empty() const { return nodes.empty() && edges.empty() && corrs.empty(); }
};

using Bindings = std::map<std::string, ElemId>;

struct PatternMatch {
    const Pattern* pattern = nullptr;
    Bindings bindings;
    bool attr_ok = true;
    std::vector<std::string> satisfied_nacs;

    std::vector<ElemId> bound_ids_sorted() const {
        std::vector<ElemId> ids;
        ids.reserve(bindings.size());
        for (auto& [p, h] : bindings) ids.push_back(h);
        std::sort(ids.begin(), ids.end());
        return ids;
    }
};

struct MatchOptions {
    std::size_t limit = 0;  // 0 = all
    bool check_nacs = true;
    bool check_conds = true;
    bool exact_types = false;  // exact type equality instead of subtyping
    bool exact_attrs = false;  // node attrs must equal PatternNode::exact_attrs
    // Extra admissibility filter; return false to reject a host element for a pid.
    std::function<bool(const std::string& pid, const ElemId& host_id)> element_filter;
};

namespace detail {

struct MatchCtx {
    const Pattern& pat;
    const TripleGraph& host;
    const TypeTriple& types;
    const MatchOptions& opt;
    Bindings bound;
    std::set<ElemId> used;
    std::vector<PatternMatch> results;

    MatchCtx(const Pattern& p, const TripleGraph& h, const TypeTriple& t, const MatchOptions& o)
        : pat(p), host(h), types(t), opt(o) {}

    bool type_ok_node(const PatternNode& pn, const Node& hn) const {
        if (hn.side != pn.side) return false;
        if (opt.exact_types ? (hn.type != pn.type) : !types.is_subtype(hn.type, pn.type))
            return false;
        if (opt.exact_attrs && hn.attrs != pn.exact_attrs) return false;
        return true;
    }

    bool accept(const std::string& pid, const ElemId& id) const {
        if (used.count(id)) return false;
        if (opt.element_filter && !opt.element_filter(pid, id)) return false;
        return true;
    }

    bool node_candidate_ok(const PatternNode& pn, const ElemId& id) const {
        return host.has_node(id) && type_ok_node(pn, host.node(id)) && accept(pn.pid, id);
    }

    bool edge_candidate_ok(const PatternEdge& pe, const ElemId& id) const {
        if (!host.has_edge(id)) return false;
        const Edge& he = host.edge(id);
        if (he.side != pe.side || he.type != pe.type) return false;
        if (!accept(pe.pid, id)) return false;
        // endpoint compatibility with current bindings
        auto fit = bound.find(pe.from);
        if (fit != bound.end() && fit->second != he.from) return false;
        auto tit = bound.find(pe.to);
        if (tit != bound.end() && tit->second != he.to) return false;
        // endpoints must be bindable to the endpoint pattern nodes
        auto* pf = pat.find_node(pe.from);
        auto* pt = pat.find_node(pe.to);
        if (pf && fit == bound.end()) {
            if (!node_candidate_ok(*pf, he.from)) return false;
            if (he.from == he.to && pe.from != pe.to) return false;
        }
        if (pt && tit == bound.end() && !node_candidate_ok(*pt, he.to)) return false;
        return true;
    }

    bool corr_candidate_ok(const PatternCorr& pc, const ElemId& id) const {
        if (!host.has_corr(id)) return false;
        const CorrNode& hc = host.corr(id);
        if (hc.type != pc.type) return false;
        if (!accept(pc.pid, id)) return false;
        if (!host.corr_ref_live(hc.src) || !host.corr_ref_live(hc.trg)) return false;
        auto sit = bound.find(pc.src);
        if (sit != bound.end() && sit->second != *hc.src) return false;
        auto tit = bound.find(pc.trg);
        if (tit != bound.end() && tit->second != *hc.trg) return false;
        auto* ps = pat.find_node(pc.src);
        auto* pt = pat.find_node(pc.trg);
        if (ps && sit == bound.end() && !node_candidate_ok(*ps, *hc.src)) return false;
        if (pt && tit == bound.end() && !node_candidate_ok(*pt, *hc.trg)) return false;
        return true;
    }

    void bind(const std::string& pid, const ElemId& id) {
        bound[pid] = id;
        used.insert(id);
    }
    void unbind(const std::string& pid) {
        auto it = bound.find(pid);
        if (it != bound.end()) {
            used.erase(it->second);
            bound.erase(it);
        }
    }

    // Binding an edge or corr forces its endpoints; returns pids actually bound.
    bool bind_with_endpoints(const PatternEdge& pe, const ElemId& id,
                             std::vector<std::string>& newly) {
        const Edge& he = host.edge(id);
        bind(pe.pid, id);
        newly.push_back(pe.pid);
        if (!bound.count(pe.from)) {
            if (used.count(he.from)) return false;
            bind(pe.from, he.from);
            newly.push_back(pe.from);
        }
        if (!bound.count(pe.to)) {
            if (used.count(he.to)) return false;
            bind(pe.to, he.to);
            newly.push_back(pe.to);
        }
        return true;
    }

    bool bind_with_endpoints(const PatternCorr& pc, const ElemId& id,
                             std::vector<std::string>& newly) {
        const CorrNode& hc = host.corr(id);
        bind(pc.pid, id);
        newly.push_back(pc.pid);
        if (!bound.count(pc.src)) {
            if (used.count(*hc.src)) return false;
            bind(pc.src, *hc.src);
            newly.push_back(pc.src);
        }
        if (!bound.count(pc.trg)) {
            if (used.count(*hc.trg)) return false;
            bind(pc.trg, *hc.trg);
            newly.push_back(pc.trg);
        }
        return true;
    }
};

inline std::optional<AttrValue> slot_value(const MatchCtx& ctx, const AttrSlot& s) {
    auto it = ctx.bound.find(s.pid);
    if (it == ctx.bound.end()) return std::nullopt;
    if (!ctx.host.has_node(it->second)) return std::nullopt;
    const Node& n = ctx.host.node(it->second);
    auto ait = n.attrs.find(s.attr);
    if (ait == n.attrs.end()) return std::nullopt;
    return ait->second;
}

// Conds are checked once all referenced elements are bound; a cond whose
// elements are not all bound (e.g. created later) is skipped here.
inline bool conds_hold(const MatchCtx& ctx) {
    if (!ctx.opt.check_conds) return true;
    for (auto& c : ctx.pat.conds) {
        auto lv = slot_value(ctx, c.lhs);
        if (!lv) continue;
        if (c.rhs_is_const) {
            if (!(*lv == c.rhs_const)) return false;
        } else {
            auto rv = slot_value(ctx, c.rhs_slot);
            if (!rv) continue;
            if (!(*lv == *rv)) return false;
        }
    }
    return true;
}

bool match_rec(MatchCtx& ctx);

inline bool nac_violated(MatchCtx& ctx, const Nac& nac) {
    // Build the extension pattern: NAC-local elements, seeded with the base
    // bindings for any base pids referenced by NAC edges.
    Pattern ext;
    ext.name = nac.name;
    ext.nodes = nac.nodes;
    ext.edges = nac.edges;
    MatchOptions opt;
    opt.limit = 1;
    opt.check_nacs = false;
    opt.check_conds = false;
    opt.element_filter = ctx.opt.element_filter ? nullptr : nullptr;
    MatchCtx sub(ext, ctx.host, ctx.types, opt);
    // Joint injectivity with the base match.
    sub.used = ctx.used;
    for (auto& e : nac.edges) {
        for (const std::string* pid : {&e.from, &e.to}) {
            if (!ext.find_node(*pid)) {
                auto it = ctx.bound.find(*pid);
                if (it == ctx.bound.end())
                    throw TgsError(Errc::BadInput,
                                   "nac " + nac.name + " references unknown pid " + *pid);
                sub.bound[*pid] = it->second;
            }
        }
    }
    return match_rec(sub);
}

inline bool nacs_hold(MatchCtx& ctx) {
    if (!ctx.opt.check_nacs) return true;
    for (auto& nac : ctx.pat.nacs)
        if (nac_violated(ctx, nac)) return false;
    return true;
}

// Picks the next unbound pattern element, preferring anchored ones.
// Returns (kind, index) with kind 0=node, 1=edge, 2=corr, -1 when complete.
inline std::pair<int, std::size_t> pick_next(const MatchCtx& ctx) {
    int best_kind = -1;
    std::size_t best_idx = 0;
    int best_score = -1;
    auto consider = [&](int kind, std::size_t idx, int score) {
        if (score > best_score) {
            best_score = score;
            best_kind = kind;
            best_idx = idx;
        }
    };
    for (std::size_t i = 0; i < ctx.pat.edges.size(); ++i) {
        auto& e = ctx.pat.edges[i];
        if (ctx.bound.count(e.pid)) continue;
        int anchors = int(ctx.bound.count(e.from)) + int(ctx.bound.count(e.to));
        consider(1, i, 10 + 5 * anchors);
    }
    for (std::size_t i = 0; i < ctx.pat.corrs.size(); ++i) {
        auto& c = ctx.pat.corrs[i];
        if (ctx.bound.count(c.pid)) continue;
        int anchors = int(ctx.bound.count(c.src)) + int(ctx.bound.count(c.trg));
        consider(2, i, 9 + 5 * anchors);
    }
    for (std::size_t i = 0; i < ctx.pat.nodes.size(); ++i) {
        auto& n = ctx.pat.nodes[i];
        if (ctx.bound.count(n.pid)) continue;
        consider(0, i, 0);
    }
    return {best_kind, best_idx};
}

inline std::vector<ElemId> node_candidates(const MatchCtx& ctx, const PatternNode& pn) {
    std::vector<ElemId> out;
    // All host node types compatible with the pattern type.
    for (auto& [tname, decl] : ctx.types.node_types()) {
        if (decl.side != pn.side) continue;
        bool ok = ctx.opt.exact_types ? (tname == pn.type) : ctx.types.is_subtype(tname, pn.type);
        if (!ok) continue;
        for (auto& id : ctx.host.nodes_of_type(tname))
            if (ctx.node_candidate_ok(pn, id)) out.push_back(id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<ElemId> edge_candidates(const MatchCtx& ctx, const PatternEdge& pe) {
    std::vector<ElemId> out;
    auto fit = ctx.bound.find(pe.from);
    auto tit = ctx.bound.find(pe.to);
    if (fit != ctx.bound.end()) {
        for (auto& id : ctx.host.edges_out(fit->second))
            if (ctx.edge_candidate_ok(pe, id)) out.push_back(id);
    } else if (tit != ctx.bound.end()) {
        for (auto& id : ctx.host.edges_in(tit->second))
            if (ctx.edge_candidate_ok(pe, id)) out.push_back(id);
    } else {
        for (auto& id : ctx.host.edges_of_type(pe.type))
            if (ctx.edge_candidate_ok(pe, id)) out.push_back(id);
    }
    return out;  // already sorted: IdSet iteration is ordered
}

inline std::vector<ElemId> corr_candidates(const MatchCtx& ctx, const PatternCorr& pc) {
    std::vector<ElemId> out;
    auto sit = ctx.bound.find(pc.src);
    auto tit = ctx.bound.find(pc.trg);
    if (sit != ctx.bound.end()) {
        for (auto& id : ctx.host.corrs_at(sit->second))
            if (ctx.corr_candidate_ok(pc, id)) out.push_back(id);
    } else if (tit != ctx.bound.end()) {
        for (auto& id : ctx.host.corrs_at(tit->second))
            if (ctx.corr_candidate_ok(pc, id)) out.push_back(id);
    } else {
        for (auto& id : ctx.host.corrs_of_type(pc.type))
            if (ctx.corr_candidate_ok(pc, id)) out.push_back(id);
    }
    return out;
}

// Returns true as soon as one match is found when opt.limit == 1.
inline bool match_rec(MatchCtx& ctx) {
    auto [kind, idx] = pick_next(ctx);
    if (kind < 0) {
        if (!conds_hold(ctx)) return false;
        if (!nacs_hold(ctx)) return false;
        PatternMatch m;
        m.pattern = &ctx.pat;
        m.bindings = ctx.bound;
        for (auto& n : ctx.pat.nacs) m.satisfied_nacs.push_back(n.name);
        ctx.results.push_back(std::move(m));
        return ctx.opt.limit != 0 && ctx.results.size() >= ctx.opt.limit;
    }
    bool done = false;
    if (kind == 0) {
        auto& pn = ctx.pat.nodes[idx];
        for (auto& id : node_candidates(ctx, pn)) {
            ctx.bind(pn.pid, id);
            done = match_rec(ctx);
            ctx.unbind(pn.pid);
            if (done) return true;
        }
    } else if (kind == 1) {
        auto& pe = ctx.pat.edges[idx];
        for (auto& id : edge_candidates(ctx, pe)) {
            std::vector<std::string> newly;
            bool ok = ctx.bind_with_endpoints(pe, id, newly);
            if (ok) done = match_rec(ctx);
            for (auto it = newly.rbegin(); it != newly.rend(); ++it) ctx.unbind(*it);
            if (done) return true;
        }
    } else {
        auto& pc = ctx.pat.corrs[idx];
        for (auto& id : corr_candidates(ctx, pc)) {
            std::vector<std::string> newly;
            bool ok = ctx.bind_with_endpoints(pc, id, newly);
            if (ok) done = match_rec(ctx);
            for (auto it = newly.rbegin(); it != newly.rend(); ++it) ctx.unbind(*it);
            if (done) return true;
        }
    }
    return false;
}

}  // namespace detail

// Injective typed matching with NACs and attribute conditions. Returns all
// extensions of `seed` in canonical order (sorted bound host ids, then the
// assignment vector in pattern declaration order).
inline std::vector<PatternMatch> find_matches(const Pattern& pattern, const TripleGraph& host,
                                              const TypeTriple& types, const Bindings& seed = {},
                                              const MatchOptions& options = {}) {
    detail::MatchCtx ctx(pattern, host, types, options);
    // Validate and install the seed.
    for (auto& [pid, id] : seed) {
        if (ctx.used.count(id))
            throw TgsError(Errc::IncompatibleSeed, "seed not injective at " + pid);
        if (auto* pn = pattern.find_node(pid)) {
            if (!host.has_node(id) || !ctx.type_ok_node(*pn, host.node(id)))
                throw TgsError(Errc::IncompatibleSeed, "seed " + pid + " -> " + id);
        } else if (auto* pe = pattern.find_edge(pid)) {
            if (!host.has_edge(id) || host.edge(id).side != pe->side ||
                host.edge(id).type != pe->type)
                throw TgsError(Errc::IncompatibleSeed, "seed " + pid + " -> " + id);
        } else if (auto* pc = pattern.find_corr(pid)) {
            if (!host.has_corr(id) || host.corr(id).type != pc->type)
                throw TgsError(Errc::IncompatibleSeed, "seed " + pid + " -> " + id);
        } else {
            throw TgsError(Errc::IncompatibleSeed, "unknown pattern element " + pid);
        }
        ctx.bind(pid, id);
    }
    // Incidence of seeded edges/corrs with seeded endpoints.
    for (auto& pe : pattern.edges) {
        auto it = ctx.bound.find(pe.pid);
        if (it == ctx.bound.end()) continue;
        const Edge& he = host.edge(it->second);
        auto f = ctx.bound.find(pe.from);
        auto t = ctx.bound.find(pe.to);
        if ((f != ctx.bound.end() && f->second != he.from) ||
            (t != ctx.bound.end() && t->second != he.to))
            throw TgsError(Errc::IncompatibleSeed, "seed incidence at " + pe.pid);
    }
    for (auto& pc : pattern.corrs) {
        auto it = ctx.bound.find(pc.pid);
        if (it == ctx.bound.end()) continue;
        const CorrNode& hc = host.corr(it->second);
        auto s = ctx.bound.find(pc.src);
        auto t = ctx.bound.find(pc.trg);
        if (!host.corr_ref_live(hc.src) || !host.corr_ref_live(hc.trg))
            throw TgsError(Errc::IncompatibleSeed, "seed corr dangling at " + pc.pid);
        if ((s != ctx.bound.end() && s->second != *hc.src) ||
            (t != ctx.bound.end() && t->second != *hc.trg))
            throw TgsError(Errc::IncompatibleSeed, "seed incidence at " + pc.pid);
    }
    detail::match_rec(ctx);
    auto& res = ctx.results;
    std::stable_sort(res.begin(), res.end(), [&](const PatternMatch& a, const PatternMatch& b) {
        auto ka = a.bound_ids_sorted();
        auto kb = b.bound_ids_sorted();
        if (ka != kb) return ka < kb;
        return a.bindings < b.bindings;
    });
    return res;
}

// Fresh id generation for rule applications. Ids must stay unique across
// deltas, so a taken-predicate can extend the check beyond live elements
// (e.g. to ids of deleted elements that may be restored).
class IdGen {
public:
    explicit IdGen(std::string prefix = "~") : prefix_(std::move(prefix)) {}
    ElemId fresh(const TripleGraph& host) {
        ElemId id;
        do {
            id = prefix_ + std::to_string(++counter_);
        } while (host.has_element(id) || (taken_ && taken_(id)));
        return id;
    }
    std::uint64_t counter() const { return counter_; }
    void reset(std::uint64_t c = 0) { counter_ = c; }
    void set_taken_predicate(std::function<bool(const ElemId&)> taken) {
        taken_ = std::move(taken);
    }

private:
    std::string prefix_;
    std::uint64_t counter_ = 0;
    std::function<bool(const ElemId&)> taken_;
};

using AttrProvider = std::function<AttrValue(AttrKind, const std::string& hint)>;

inline AttrProvider default_attr_provider() {
    auto counter = std::make_shared<std::uint64_t>(0);
    return [counter](AttrKind k, const std::string&) -> AttrValue {
        ++*counter;
        if (k == AttrKind::String) return "v" + std::to_string(*counter);
        return static_cast<std::int64_t>(*counter);
    };
}

struct ApplyResult {
    Bindings created;               // pattern pid -> fresh host id
    std::vector<ElemId> deleted;    // host ids removed
    Bindings full;                  // bindings of the whole pattern after application
};

namespace detail {

// Attribute constraint solving: union-find over slots, fixed values from
// bound elements and constants, fresh values from the provider.
struct AttrSolver {
    std::map<AttrSlot, AttrSlot> parent;

    AttrSlot find(AttrSlot s) {
        auto it = parent.find(s);
        if (it == parent.end()) {
            parent[s] = s;
            return s;
        }
        if (it->second == s) return s;
        AttrSlot r = find(it->second);
        parent[s] = r;
        return r;
    }
    void unite(const AttrSlot& a, const AttrSlot& b) { parent[find(a)] = find(b); }
};

}  // namespace detail

// Applies a rule-shaped pattern at a match: Create-role elements that are not
// bound get fresh host elements; `deletes` (bound pids) are removed first.
// Attribute equations are enforced by assigning values to created elements.
inline ApplyResult apply_pattern(const Pattern& pattern, const PatternMatch& match,
                                 TripleGraph& host, const TypeTriple& types, IdGen& ids,
                                 const std::set<std::string>& deletes = {},
                                 const AttrProvider& provider = nullptr) {
    ApplyResult out;
    Bindings bound = match.bindings;

    // Deletions: edges, then corrs, then nodes; reject orphaned edges.
    std::vector<ElemId> del_edges, del_corrs, del_nodes;
    for (auto& pid : deletes) {
        auto it = bound.find(pid);
        if (it == bound.end()) throw TgsError(Errc::NotApplicable, "delete of unbound " + pid);
        if (host.has_edge(it->second))
            del_edges.push_back(it->second);
        else if (host.has_corr(it->second))
            del_corrs.push_back(it->second);
        else if (host.has_node(it->second))
            del_nodes.push_back(it->second);
    }
    for (auto& id : del_nodes) {
        for (auto& e : host.edges_out(id))
            if (std::find(del_edges.begin(), del_edges.end(), e) == del_edges.end())
                throw TgsError(Errc::DanglingEdge, "deleting " + id + " would orphan edge " + e);
        for (auto& e : host.edges_in(id))
            if (std::find(del_edges.begin(), del_edges.end(), e) == del_edges.end())
                throw TgsError(Errc::DanglingEdge, "deleting " + id + " would orphan edge " + e);
    }
    for (auto& id : del_edges) host.remove_edge(id);
    for (auto& id : del_corrs) host.remove_corr(id);
    for (auto& id : del_nodes) host.remove_node(id);
    out.deleted.insert(out.deleted.end(), del_edges.begin(), del_edges.end());
    out.deleted.insert(out.deleted.end(), del_corrs.begin(), del_corrs.end());
    out.deleted.insert(out.deleted.end(), del_nodes.begin(), del_nodes.end());

    // Solve attribute equations.
    detail::AttrSolver solver;
    std::map<AttrSlot, AttrValue> fixed_const;
    for (auto& c : pattern.conds) {
        if (c.rhs_is_const) {
            AttrSlot root = solver.find(c.lhs);
            auto it = fixed_const.find(root);
            if (it != fixed_const.end() && !(it->second == c.rhs_const))
                throw TgsError(Errc::AttrUnsolvable, "conflicting constants for " + c.lhs.pid);
            fixed_const[root] = c.rhs_const;
        } else {
            AttrSlot ra = solver.find(c.lhs), rb = solver.find(c.rhs_slot);
            if (!(ra == rb)) {
                // merge constants
                auto ia = fixed_const.find(ra);
                auto ib = fixed_const.find(rb);
                if (ia != fixed_const.end() && ib != fixed_const.end() && !(ia->second == ib->second))
                    throw TgsError(Errc::AttrUnsolvable, "conflicting constants");
                AttrValue merged;
                bool have = false;
                if (ia != fixed_const.end()) { merged = ia->second; have = true; }
                if (ib != fixed_const.end()) { merged = ib->second; have = true; }
                if (ia != fixed_const.end()) fixed_const.erase(ia);
                solver.unite(ra, rb);
                AttrSlot root = solver.find(rb);
                if (have) fixed_const[root] = merged;
            }
        }
    }
    auto group_fixed = [&](const AttrSlot& slot) -> std::optional<AttrValue> {
        AttrSlot root = solver.find(slot);
        std::optional<AttrValue> val;
        auto cit = fixed_const.find(root);
        if (cit != fixed_const.end()) val = cit->second;
        for (auto& c : pattern.conds) {
            for (const AttrSlot* s : {&c.lhs, c.rhs_is_const ? &c.lhs : &c.rhs_slot}) {
                if (!(solver.find(*s) == root)) continue;
                auto bit = bound.find(s->pid);
                if (bit == bound.end() || !host.has_node(bit->second)) continue;
                const Node& hn = host.node(bit->second);
                auto ait = hn.attrs.find(s->attr);
                if (ait == hn.attrs.end()) continue;
                if (val && !(*val == ait->second))
                    throw TgsError(Errc::AttrUnsolvable,
                                   "equation over fixed unequal values at " + s->pid);
                val = ait->second;
            }
        }
        return val;
    };

    // Creation order: nodes, then edges and corrs.
    AttrProvider prov = provider ? provider : default_attr_provider();
    for (auto& pn : pattern.nodes) {
        if (pn.role != Role::Create || bound.count(pn.pid)) continue;
        Node n;
        n.id = ids.fresh(host);
        n.side = pn.side;
        n.type = pn.type;
        // initialize declared attributes (walking the inheritance chain)
        std::string cur = pn.type;
        while (!cur.empty()) {
            auto* d = types.node_type(cur);
            if (!d) break;
            for (auto& [an, ak] : d->attrs) {
                if (n.attrs.count(an)) continue;
                AttrSlot slot{pn.pid, an};
                bool constrained = false;
                for (auto& c : pattern.conds)
                    if (c.lhs == slot || (!c.rhs_is_const && c.rhs_slot == slot)) constrained = true;
                if (constrained) {
                    auto v = group_fixed(slot);
                    n.attrs[an] = v ? *v : prov(ak, pn.pid + "." + an);
                    if (!v) {
                        // freeze the fresh value for the rest of the group
                        AttrSlot root = solver.find(slot);
                        fixed_const[root] = n.attrs[an];
                    }
                } else {
                    n.attrs[an] = ak == AttrKind::String ? AttrValue(std::string()) : AttrValue(std::int64_t(0));
                }
            }
            cur = d->super;
        }
        bound[pn.pid] = n.id;
        out.created[pn.pid] = n.id;
        host.add_node(std::move(n));
    }
    for (auto& pe : pattern.edges) {
        if (pe.role != Role::Create || bound.count(pe.pid)) continue;
        Edge e;
        e.id = ids.fresh(host);
        e.side = pe.side;
        e.type = pe.type;
        auto f = bound.find(pe.from);
        auto t = bound.find(pe.to);
        if (f == bound.end() || t == bound.end())
            throw TgsError(Errc::NotApplicable, "created edge " + pe.pid + " lacks endpoints");
        e.from = f->second;
        e.to = t->second;
        bound[pe.pid] = e.id;
        out.created[pe.pid] = e.id;
        host.add_edge(std::move(e));
    }
    for (auto& pc : pattern.corrs) {
        if (pc.role != Role::Create || bound.count(pc.pid)) continue;
        CorrNode c;
        c.id = ids.fresh(host);
        c.type = pc.type;
        auto s = bound.find(pc.src);
        auto t = bound.find(pc.trg);
        if (s == bound.end() || t == bound.end())
            throw TgsError(Errc::NotApplicable, "created corr " + pc.pid + " lacks endpoints");
        c.src = s->second;
        c.trg = t->second;
        bound[pc.pid] = c.id;
        out.created[pc.pid] = c.id;
        host.add_corr(std::move(c));
    }

    // Enforce equations on elements that already existed (directed update)
    // and verify fully-fixed groups.
    for (auto& c : pattern.conds) {
        auto check_or_assign = [&](const AttrSlot& slot, const AttrValue& want) {
            auto bit = bound.find(slot.pid);
            if (bit == bound.end() || !host.has_node(bit->second)) return;
            Node n = host.node(bit->second);
            auto ait = n.attrs.find(slot.attr);
            if (ait != n.attrs.end() && !(ait->second == want)) {
                if (out.created.count(slot.pid))
                    host.set_attr(bit->second, slot.attr, want);
                else
                    throw TgsError(Errc::AttrUnsolvable, "equation violated at " + slot.pid +
                                                             "." + slot.attr);
            }
        };
        auto v = group_fixed(c.lhs);
        if (v) {
            check_or_assign(c.lhs, *v);
            if (!c.rhs_is_const) check_or_assign(c.rhs_slot, *v);
        }
    }

    out.full = std::move(bound);
    return out;
}

// Isomorphism of triple graphs: exact types, exact attribute maps, bijective.
inline bool isomorphic(const TripleGraph& a, const TripleGraph& b, const TypeTriple& types) {
    if (a.nodes().size() != b.nodes().size() || a.edges().size() != b.edges().size() ||
        a.corrs().size() != b.corrs().size())
        return false;
    Pattern pat;
    pat.name = "iso";
    for (auto& [id, n] : a.nodes()) {
        PatternNode pn;
        pn.pid = id;
        pn.side = n.side;
        pn.type = n.type;
        pn.exact_attrs = n.attrs;
        pat.nodes.push_back(std::move(pn));
    }
    for (auto& [id, e] : a.edges()) {
        PatternEdge pe;
        pe.pid = id;
        pe.side = e.side;
        pe.type = e.type;
        pe.from = e.from;
        pe.to = e.to;
        pat.edges.push_back(std::move(pe));
    }
    for (auto& [id, c] : a.corrs()) {
        if (!a.corr_ref_live(c.src) || !a.corr_ref_live(c.trg)) return false;  // partial: no iso
        PatternCorr pc;
        pc.pid = id;
        pc.type = c.type;
        pc.src = *c.src;
        pc.trg = *c.trg;
        pat.corrs.push_back(std::move(pc));
    }
    MatchOptions opt;
    opt.limit = 1;
    opt.exact_types = true;
    opt.exact_attrs = true;
    opt.check_conds = false;
    opt.check_nacs = false;
    return !find_matches(pat, b, types, {}, opt).empty();
}

}  // namespace tgs
