#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tgs/derive.hpp"
#include "tgs/operational.hpp"

namespace tgs {

// One consistency-pattern match: an embedding of a rule's RHS whose create
// elements account for exactly the elements in `created`.
struct ConsistencyMatch {
    std::string id;
    std::string rule;
    Bindings bindings;
    IdSet created;
    IdSet context;
};

struct PrecedenceGraph {
    std::vector<ConsistencyMatch> nodes;
    // (from, to): from depends on to.
    std::vector<std::pair<std::string, std::string>> dep_edges;

    const ConsistencyMatch* node(const std::string& id) const {
        for (auto& n : nodes)
            if (n.id == id) return &n;
        return nullptr;
    }
};

namespace detail {

inline std::string pg_node_id(const TggRule& r, const Bindings& created,
                              const std::set<std::string>& taken) {
    // Prefer the canonically first created node element; fall back to any
    // created element.
    std::string anchor;
    for (auto& n : r.pattern.nodes) {
        if (n.role != Role::Create) continue;
        auto it = created.find(n.pid);
        if (it != created.end() && (anchor.empty() || it->second < anchor)) anchor = it->second;
    }
    if (anchor.empty()) {
        for (auto& [pid, id] : created)
            if (anchor.empty() || id < anchor) anchor = id;
    }
    std::string base = r.name + ":" + (anchor.empty() ? "@" : anchor);
    std::string id = base;
    int k = 1;
    while (taken.count(id)) id = base + "#" + std::to_string(++k);
    return id;
}

inline void compute_dep_edges(PrecedenceGraph& pg) {
    std::map<ElemId, std::string> creator;
    for (auto& n : pg.nodes)
        for (auto& e : n.created) creator[e] = n.id;
    std::set<std::pair<std::string, std::string>> edges;
    for (auto& n : pg.nodes)
        for (auto& e : n.context) {
            auto it = creator.find(e);
            if (it != creator.end() && it->second != n.id) edges.insert({n.id, it->second});
        }
    pg.dep_edges.assign(edges.begin(), edges.end());
}

}  // namespace detail

inline PrecedenceGraph pg_from_trace(const Tgg& g, const Trace& trace) {
    PrecedenceGraph pg;
    std::set<std::string> taken;
    for (auto& step : trace) {
        const TggRule* r = g.rule(step.rule);
        if (!r) throw TgsError(Errc::BadInput, "trace references unknown rule " + step.rule);
        ConsistencyMatch m;
        m.rule = step.rule;
        m.bindings = step.full;
        for (auto& [pid, id] : step.created) m.created.insert(id);
        for (auto& [pid, id] : step.full)
            if (!step.created.count(pid)) m.context.insert(id);
        m.id = detail::pg_node_id(*r, step.created, taken);
        taken.insert(m.id);
        pg.nodes.push_back(std::move(m));
    }
    detail::compute_dep_edges(pg);
    return pg;
}

enum class ParseStatus { Ok, NoCover, Budget };

struct ParseResult {
    ParseStatus status = ParseStatus::NoCover;
    PrecedenceGraph pg;
};

namespace detail {

struct ParseApp {
    std::string rule;
    Bindings bindings;
    Bindings created;  // create pid -> host id
    Bindings context;  // context pid -> host id
    std::string key;
};

// Marking-based cold-start parse: maintain a frontier of rule applications
// whose context is covered and whose create elements are not, claim them in
// canonical order, and backtrack chronologically. Filter NACs prune
// dead-ends; failed coverage states are memoized for small hosts.
class PgParser {
public:
    PgParser(const Tgg& g, const OpRuleSet& ops, const TripleGraph& host, std::size_t budget)
        : g_(g), host_(host), budget_(budget) {
        for (auto& r : g_.rules) {
            ConsistencyPattern cp;
            cp.rule = &r;
            cp.pattern = r.pattern;
            auto sit = ops.filter_nacs.src.find(r.name);
            if (sit != ops.filter_nacs.src.end())
                for (auto& n : sit->second) cp.pattern.nacs.push_back(n);
            auto tit = ops.filter_nacs.trg.find(r.name);
            if (tit != ops.filter_nacs.trg.end())
                for (auto& n : tit->second) cp.pattern.nacs.push_back(n);
            for (auto& pid : r.pattern.pids_with_role(Role::Create)) cp.create_pids.insert(pid);
            patterns_.push_back(std::move(cp));
        }
        total_ = host_.size();
        memoize_failures_ = total_ <= 1000;
    }

    ParseResult run() {
        for (auto& cp : patterns_)
            if (cp.rule->context_pids().empty()) discover_rootless(cp);
        ParseResult out;
        bool ok = solve();
        if (budget_exceeded_) {
            out.status = ParseStatus::Budget;
            return out;
        }
        if (!ok) {
            out.status = ParseStatus::NoCover;
            return out;
        }
        out.status = ParseStatus::Ok;
        std::set<std::string> taken;
        for (auto& fr : stack_) {
            ConsistencyMatch m;
            m.rule = fr.app.rule;
            m.bindings = fr.app.bindings;
            for (auto& [pid, id] : fr.app.created) m.created.insert(id);
            for (auto& [pid, id] : fr.app.context) m.context.insert(id);
            m.id = pg_node_id(*g_.rule(fr.app.rule), fr.app.created, taken);
            taken.insert(m.id);
            out.pg.nodes.push_back(std::move(m));
        }
        compute_dep_edges(out.pg);
        return out;
    }

private:
    struct ConsistencyPattern {
        const TggRule* rule;
        Pattern pattern;
        std::set<std::string> create_pids;
    };

    struct Frame {
        ParseApp app;
        std::vector<std::string> discovered;    // frontier keys added by this claim
        std::vector<std::string> invalidated;   // ready keys parked by this claim
    };

    MatchOptions match_options(const ConsistencyPattern& cp) const {
        MatchOptions opt;
        opt.element_filter = [this, &cp](const std::string& pid, const ElemId& id) {
            bool is_create = cp.create_pids.count(pid) != 0;
            bool is_covered = covered_.count(id) != 0;
            return is_create ? !is_covered : is_covered;
        };
        return opt;
    }

    std::string key_of(const std::string& rule, const PatternMatch& m) const {
        auto ids = m.bound_ids_sorted();
        std::string k = join_ids(ids) + "|" + rule + "|";
        for (auto& [p, id] : m.bindings) k += id + ";";
        return k;
    }

    void install_app(const ConsistencyPattern& cp, const PatternMatch& m, const std::string& key) {
        ParseApp app;
        app.rule = cp.rule->name;
        app.bindings = m.bindings;
        for (auto& [pid, id] : m.bindings) {
            if (cp.create_pids.count(pid))
                app.created[pid] = id;
            else
                app.context[pid] = id;
        }
        app.key = key;
        for (auto& [pid, id] : app.created) created_index_[id].insert(key);
        ready_.insert(key);
        frontier_.emplace(key, std::move(app));
    }

    void uninstall_app(const std::string& key) {
        auto it = frontier_.find(key);
        if (it == frontier_.end()) return;
        for (auto& [pid, id] : it->second.created) created_index_[id].erase(key);
        ready_.erase(key);
        frontier_.erase(it);
    }

    void discover_rootless(const ConsistencyPattern& cp) {
        std::string anchor;
        for (auto& n : cp.pattern.nodes)
            if (n.role == Role::Create) {
                anchor = n.pid;
                break;
            }
        MatchOptions opt = match_options(cp);
        if (anchor.empty()) {
            for (auto& m : find_matches(cp.pattern, host_, g_.types, {}, opt)) {
                std::string key = key_of(cp.rule->name, m);
                if (!frontier_.count(key)) install_app(cp, m, key);
            }
            return;
        }
        auto* pn = cp.pattern.find_node(anchor);
        for (auto& [tname, tdecl] : g_.types.node_types()) {
            if (tdecl.side != pn->side || !g_.types.is_subtype(tname, pn->type)) continue;
            for (auto& id : host_.nodes_of_type(tname)) {
                for (auto& m : find_matches(cp.pattern, host_, g_.types, {{anchor, id}}, opt)) {
                    std::string key = key_of(cp.rule->name, m);
                    if (!frontier_.count(key)) install_app(cp, m, key);
                }
            }
        }
    }

    bool seed_compatible(const Pattern& p, const std::string& pid, const ElemId& id) const {
        if (auto* pn = p.find_node(pid)) {
            if (!host_.has_node(id)) return false;
            const Node& n = host_.node(id);
            return n.side == pn->side && g_.types.is_subtype(n.type, pn->type);
        }
        if (auto* pe = p.find_edge(pid)) {
            if (!host_.has_edge(id)) return false;
            const Edge& e = host_.edge(id);
            return e.side == pe->side && e.type == pe->type;
        }
        if (auto* pc = p.find_corr(pid)) {
            if (!host_.has_corr(id)) return false;
            return host_.corr(id).type == pc->type;
        }
        return false;
    }

    // New applications enabled by x becoming covered.
    void discover_at(const ElemId& x, std::vector<std::string>& added) {
        for (auto& cp : patterns_) {
            for (auto& pid : cp.rule->context_pids()) {
                if (!seed_compatible(cp.pattern, pid, x)) continue;
                MatchOptions opt = match_options(cp);
                for (auto& m : find_matches(cp.pattern, host_, g_.types, {{pid, x}}, opt)) {
                    std::string key = key_of(cp.rule->name, m);
                    if (frontier_.count(key) || claimed_keys_.count(key)) continue;
                    install_app(cp, m, key);
                    added.push_back(key);
                }
            }
        }
    }

    void claim(Frame& fr) {
        const ParseApp& app = fr.app;
        claimed_keys_.insert(app.key);
        uninstall_app(app.key);
        for (auto& [pid, id] : app.created) covered_.insert(id);
        // competitors for the same created elements leave the ready set
        for (auto& [pid, id] : app.created) {
            auto cit = created_index_.find(id);
            if (cit == created_index_.end()) continue;
            for (auto& k : cit->second) {
                if (ready_.erase(k)) fr.invalidated.push_back(k);
            }
        }
        for (auto& [pid, id] : app.created) discover_at(id, fr.discovered);
    }

    void undo(Frame& fr) {
        for (auto& k : fr.discovered) uninstall_app(k);
        for (auto& [pid, id] : fr.app.created) covered_.erase(id);
        for (auto& k : fr.invalidated)
            if (frontier_.count(k)) ready_.insert(k);
        claimed_keys_.erase(fr.app.key);
        // reinstall the app itself
        for (auto& [pid, id] : fr.app.created) created_index_[id].insert(fr.app.key);
        ready_.insert(fr.app.key);
        frontier_.emplace(fr.app.key, fr.app);
    }

    bool solve() {
        std::string resume;  // scan strictly after this key ("" = from begin)
        while (true) {
            if (covered_.size() == total_) return true;
            bool dead = memoize_failures_ && failed_.count(covered_key()) != 0;
            std::string pick;
            if (!dead) {
                auto it = resume.empty() ? ready_.begin() : ready_.upper_bound(resume);
                if (it != ready_.end()) pick = *it;
            }
            if (!pick.empty()) {
                if (++claims_tried_ > budget_) {
                    budget_exceeded_ = true;
                    return false;
                }
                Frame fr;
                fr.app = frontier_.at(pick);
                claim(fr);
                stack_.push_back(std::move(fr));
                resume.clear();
                continue;
            }
            // dead end: memoize and backtrack
            if (memoize_failures_ && !dead) failed_.insert(covered_key());
            if (stack_.empty()) return false;
            Frame fr = std::move(stack_.back());
            stack_.pop_back();
            undo(fr);
            resume = fr.app.key;
        }
    }

    std::string covered_key() const {
        std::string k;
        for (auto& id : covered_) {
            k += id;
            k += ',';
        }
        return k;
    }

    const Tgg& g_;
    const TripleGraph& host_;
    std::vector<ConsistencyPattern> patterns_;
    std::map<std::string, ParseApp> frontier_;
    std::map<ElemId, std::set<std::string>> created_index_;
    std::set<std::string> ready_;
    std::vector<Frame> stack_;
    std::set<std::string> claimed_keys_;
    IdSet covered_;
    std::set<std::string> failed_;
    std::size_t total_ = 0;
    std::size_t budget_ = 0;
    std::size_t claims_tried_ = 0;
    bool budget_exceeded_ = false;
    bool memoize_failures_ = false;
};

}  // namespace detail

// Cold-start parse of a total triple graph into a covering, acyclic family of
// consistency matches. The budget bounds claims tried (default 10x element
// count); BUDGET-EXHAUSTED is reported distinctly from NO-COVER.
inline ParseResult parse_pg(const Tgg& g, const OpRuleSet& ops, const TripleGraph& host,
                            std::size_t budget = 0) {
    if (!host.is_total()) throw TgsError(Errc::BadInput, "parse_pg requires a total triple graph");
    if (budget == 0) budget = 10 * std::max<std::size_t>(host.size(), 1);
    detail::PgParser parser(g, ops, host, budget);
    return parser.run();
}

// Coverage / acyclicity / match-validity certificate. Empty result means the
// precedence graph proves language membership of the host.
inline std::vector<Diagnostic> verify_pg(const Tgg& g, const TripleGraph& host,
                                         const PrecedenceGraph& pg) {
    std::vector<Diagnostic> out;
    std::map<ElemId, std::string> creator;
    std::set<std::string> node_ids;
    for (auto& n : pg.nodes) {
        if (!node_ids.insert(n.id).second)
            out.push_back({"NODE", n.id, "duplicate node id"});
        const TggRule* r = g.rule(n.rule);
        if (!r) {
            out.push_back({"MATCH", n.id, "unknown rule " + n.rule});
            continue;
        }
        // bindings must form a valid RHS match with the declared roles
        std::set<std::string> seen_pids;
        for (auto& [pid, id] : n.bindings) {
            seen_pids.insert(pid);
            if (!host.has_element(id)) {
                out.push_back({"MATCH", n.id, "binding " + pid + " -> missing element " + id});
                continue;
            }
        }
        for (auto& pid : r->pattern.pids()) {
            if (!seen_pids.count(pid)) out.push_back({"MATCH", n.id, "unbound element " + pid});
        }
        // typing, incidence and role bookkeeping
        IdSet expect_created, expect_context;
        for (auto& pn : r->pattern.nodes) {
            auto it = n.bindings.find(pn.pid);
            if (it == n.bindings.end() || !host.has_node(it->second)) continue;
            const Node& hn = host.node(it->second);
            if (hn.side != pn.side || !g.types.is_subtype(hn.type, pn.type))
                out.push_back({"MATCH", n.id, "binding " + pn.pid + " has wrong type"});
            (pn.role == Role::Create ? expect_created : expect_context).insert(it->second);
        }
        for (auto& pe : r->pattern.edges) {
            auto it = n.bindings.find(pe.pid);
            if (it == n.bindings.end() || !host.has_edge(it->second)) continue;
            const Edge& he = host.edge(it->second);
            if (he.type != pe.type || he.side != pe.side)
                out.push_back({"MATCH", n.id, "binding " + pe.pid + " has wrong type"});
            auto f = n.bindings.find(pe.from);
            auto t = n.bindings.find(pe.to);
            if (f != n.bindings.end() && f->second != he.from)
                out.push_back({"MATCH", n.id, "edge " + pe.pid + " incidence"});
            if (t != n.bindings.end() && t->second != he.to)
                out.push_back({"MATCH", n.id, "edge " + pe.pid + " incidence"});
            (pe.role == Role::Create ? expect_created : expect_context).insert(it->second);
        }
        for (auto& pc : r->pattern.corrs) {
            auto it = n.bindings.find(pc.pid);
            if (it == n.bindings.end() || !host.has_corr(it->second)) continue;
            const CorrNode& hc = host.corr(it->second);
            if (hc.type != pc.type)
                out.push_back({"MATCH", n.id, "binding " + pc.pid + " has wrong type"});
            auto s = n.bindings.find(pc.src);
            auto t = n.bindings.find(pc.trg);
            if (!host.corr_ref_live(hc.src) || !host.corr_ref_live(hc.trg))
                out.push_back({"MATCH", n.id, "corr " + pc.pid + " dangling"});
            else {
                if (s != n.bindings.end() && s->second != *hc.src)
                    out.push_back({"MATCH", n.id, "corr " + pc.pid + " incidence"});
                if (t != n.bindings.end() && t->second != *hc.trg)
                    out.push_back({"MATCH", n.id, "corr " + pc.pid + " incidence"});
            }
            (pc.role == Role::Create ? expect_created : expect_context).insert(it->second);
        }
        if (expect_created != n.created)
            out.push_back({"MATCH", n.id, "created set does not match rule roles"});
        if (expect_context != n.context)
            out.push_back({"MATCH", n.id, "context set does not match rule roles"});
        // attribute equations hold
        for (auto& c : r->pattern.conds) {
            auto val = [&](const AttrSlot& s) -> std::optional<AttrValue> {
                auto it = n.bindings.find(s.pid);
                if (it == n.bindings.end() || !host.has_node(it->second)) return std::nullopt;
                auto& attrs = host.node(it->second).attrs;
                auto ait = attrs.find(s.attr);
                if (ait == attrs.end()) return std::nullopt;
                return ait->second;
            };
            auto lv = val(c.lhs);
            std::optional<AttrValue> rv = c.rhs_is_const ? std::optional<AttrValue>(c.rhs_const)
                                                         : val(c.rhs_slot);
            if (lv && rv && !(*lv == *rv))
                out.push_back({"MATCH", n.id, "attribute equation violated"});
        }
        // rule NACs
        Pattern probe = r->pattern;
        detail::MatchCtx dummy(probe, host, g.types, MatchOptions{});
        for (auto& nac : r->pattern.nacs) {
            detail::MatchCtx base(probe, host, g.types, MatchOptions{});
            base.bound = n.bindings;
            for (auto& [pid, id] : n.bindings) base.used.insert(id);
            if (detail::nac_violated(base, nac))
                out.push_back({"MATCH", n.id, "nac " + nac.name + " violated"});
        }
        for (auto& e : n.created) {
            auto it = creator.find(e);
            if (it != creator.end())
                out.push_back({"COVERAGE", e, "covered twice: " + it->second + " and " + n.id});
            else
                creator[e] = n.id;
        }
    }
    for (auto& id : host.all_element_ids())
        if (!creator.count(id)) out.push_back({"COVERAGE", id, "element not covered"});
    for (auto& [e, nid] : creator)
        if (!host.has_element(e)) out.push_back({"COVERAGE", e, "covered element missing"});

    // dependency edges: recompute and compare
    PrecedenceGraph expect;
    expect.nodes = pg.nodes;
    detail::compute_dep_edges(expect);
    std::set<std::pair<std::string, std::string>> want(expect.dep_edges.begin(),
                                                       expect.dep_edges.end());
    std::set<std::pair<std::string, std::string>> have(pg.dep_edges.begin(), pg.dep_edges.end());
    if (want != have) out.push_back({"EDGES", "", "dependency edges do not match coverage"});

    // acyclicity (Kahn) over the recomputed edges
    std::map<std::string, int> indeg;
    std::map<std::string, std::vector<std::string>> rev;
    for (auto& n : pg.nodes) indeg[n.id] = 0;
    for (auto& [a, b] : want) {
        if (!indeg.count(a) || !indeg.count(b)) continue;
        indeg[a]++;          // a depends on b: process b first
        rev[b].push_back(a);
    }
    std::deque<std::string> q;
    for (auto& [id, d] : indeg)
        if (d == 0) q.push_back(id);
    std::size_t seen = 0;
    while (!q.empty()) {
        auto id = q.front();
        q.pop_front();
        ++seen;
        for (auto& nxt : rev[id])
            if (--indeg[nxt] == 0) q.push_back(nxt);
    }
    if (seen != pg.nodes.size()) out.push_back({"ACYCLICITY", "", "dependency relation is cyclic"});
    return out;
}

// Topological order of PG nodes (dependencies first). Canonical tie-break.
inline std::vector<std::string> topo_order(const PrecedenceGraph& pg) {
    std::map<std::string, std::set<std::string>> deps;  // node -> nodes it depends on
    std::map<std::string, std::set<std::string>> dependents;
    for (auto& n : pg.nodes) deps[n.id];
    for (auto& [a, b] : pg.dep_edges) {
        deps[a].insert(b);
        dependents[b].insert(a);
    }
    std::set<std::string> ready;
    for (auto& [id, d] : deps)
        if (d.empty()) ready.insert(id);
    std::vector<std::string> out;
    std::map<std::string, std::size_t> remaining;
    for (auto& [id, d] : deps) remaining[id] = d.size();
    while (!ready.empty()) {
        std::string id = *ready.begin();
        ready.erase(ready.begin());
        out.push_back(id);
        for (auto& d : dependents[id])
            if (--remaining[d] == 0) ready.insert(d);
    }
    return out;
}

}  // namespace tgs
