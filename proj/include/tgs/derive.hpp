#pragma once

#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "tgs/grammar.hpp"
#include "tgs/pattern.hpp"

namespace tgs {

struct TraceStep {
    std::string rule;
    Bindings full;     // all rule elements -> host ids after application
    Bindings created;  // create elements -> fresh host ids
};
using Trace = std::vector<TraceStep>;

struct ScheduleStep {
    std::string rule;
    std::size_t match_index = 0;  // index into the canonical match list
    Bindings seed;                // optional pre-bound context elements
};

struct DeriveResult {
    TripleGraph triple;
    Trace trace;
};

namespace detail {

// Bounded uniform integer from a std::mt19937_64, via rejection. The standard
// distributions are implementation-defined; this keeps runs reproducible.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    if (n == 0) return 0;
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                          std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % n;
}

inline TraceStep apply_tgg_rule(const TggRule& r, const PatternMatch& m, TripleGraph& host,
                                const TypeTriple& types, IdGen& ids, const AttrProvider& prov) {
    ApplyResult res = apply_pattern(r.pattern, m, host, types, ids, {}, prov);
    TraceStep step;
    step.rule = r.name;
    step.full = res.full;
    step.created = res.created;
    return step;
}

}  // namespace detail

// Step-wise derivation state; grows a triple from the empty start graph.
class Derivation {
public:
    explicit Derivation(const Tgg& g, IdGen ids = IdGen(), AttrProvider prov = nullptr)
        : g_(&g), ids_(std::move(ids)), prov_(prov ? std::move(prov) : default_attr_provider()) {}

    const TripleGraph& triple() const { return result_.triple; }
    const Trace& trace() const { return result_.trace; }
    DeriveResult take() { return std::move(result_); }

    // Applies one rule at the canonical match of the given index; `seed` may
    // pre-bind context elements. Throws NOT-APPLICABLE.
    const TraceStep& step(const std::string& rule, std::size_t match_index = 0,
                          const Bindings& seed = {}) {
        const TggRule* r = g_->rule(rule);
        if (!r) throw TgsError(Errc::NotApplicable, "no rule " + rule);
        auto matches = find_matches(r->lhs(), result_.triple, g_->types, seed);
        if (match_index >= matches.size())
            throw TgsError(Errc::NotApplicable, "rule " + rule + " has " +
                                                    std::to_string(matches.size()) + " matches");
        result_.trace.push_back(detail::apply_tgg_rule(*r, matches[match_index], result_.triple,
                                                       g_->types, ids_, prov_));
        return result_.trace.back();
    }

private:
    const Tgg* g_;
    IdGen ids_;
    AttrProvider prov_;
    DeriveResult result_;
};

// Derivation by explicit schedule. Throws NOT-APPLICABLE naming the step.
inline DeriveResult derive(const Tgg& g, const std::vector<ScheduleStep>& schedule,
                           IdGen ids = IdGen(), AttrProvider prov = nullptr) {
    Derivation d(g, std::move(ids), std::move(prov));
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        auto& st = schedule[i];
        try {
            d.step(st.rule, st.match_index, st.seed);
        } catch (const TgsError& e) {
            throw TgsError(Errc::NotApplicable, "step " + std::to_string(i) + ": " + e.what());
        }
    }
    return d.take();
}

// Seeded random derivation: rules uniform among applicable, matches picked
// uniformly from the canonical match list. Bit-reproducible under the seed.
inline DeriveResult derive_random(const Tgg& g, std::uint64_t seed, std::size_t length) {
    std::mt19937_64 rng(seed);
    std::uint64_t name_counter = 0;
    AttrProvider prov = [&](AttrKind k, const std::string&) -> AttrValue {
        ++name_counter;
        if (k == AttrKind::String) return "n" + std::to_string(name_counter);
        return static_cast<std::int64_t>(name_counter);
    };
    IdGen ids;
    DeriveResult out;
    for (std::size_t i = 0; i < length; ++i) {
        std::vector<std::pair<const TggRule*, std::vector<PatternMatch>>> applicable;
        for (auto& r : g.rules) {
            auto ms = find_matches(r.lhs(), out.triple, g.types);
            if (!ms.empty()) applicable.push_back({&r, std::move(ms)});
        }
        if (applicable.empty()) break;
        auto& pick = applicable[detail::bounded(rng, applicable.size())];
        auto& m = pick.second[detail::bounded(rng, pick.second.size())];
        out.trace.push_back(detail::apply_tgg_rule(*pick.first, m, out.triple, g.types, ids, prov));
    }
    return out;
}

enum class Membership { Yes, No, Unknown };

namespace detail {

// Attribute slots of a derivation prefix are constrained symbolically: a slot
// is free, pinned to a constant, or tied into an equality group. Derivations
// may choose any values for free slots, so membership must compare structure
// plus satisfied constraints, not literal values.
struct AttrTag {
    enum Kind { Free, Const, Group } kind = Free;
    AttrValue value;
    std::uint64_t group = 0;
};
using AttrTags = std::map<std::pair<ElemId, std::string>, AttrTag>;

struct OracleState {
    TripleGraph triple;
    AttrTags tags;
    IdGen ids{"m~"};
};

// Registers the attribute effects of applying `r` at bindings `full`;
// returns false when the rule's equations cannot be satisfied.
inline bool apply_attr_constraints(const TggRule& r, const Bindings& full, OracleState& st,
                                   std::uint64_t& group_counter) {
    // union-find over the rule's slots
    std::map<AttrSlot, AttrSlot> parent;
    std::function<AttrSlot(AttrSlot)> find = [&](AttrSlot s) {
        auto it = parent.find(s);
        if (it == parent.end() || it->second == s) {
            parent[s] = s;
            return s;
        }
        AttrSlot root = find(it->second);
        parent[s] = root;
        return root;
    };
    std::map<AttrSlot, AttrValue> consts;
    for (auto& c : r.pattern.conds) {
        if (c.rhs_is_const) {
            AttrSlot root = find(c.lhs);
            auto it = consts.find(root);
            if (it != consts.end() && !(it->second == c.rhs_const)) return false;
            consts[root] = c.rhs_const;
        } else {
            AttrSlot ra = find(c.lhs), rb = find(c.rhs_slot);
            if (ra == rb) continue;
            auto ia = consts.find(ra);
            std::optional<AttrValue> v;
            if (ia != consts.end()) {
                v = ia->second;
                consts.erase(ia);
            }
            parent[ra] = rb;
            AttrSlot root = find(rb);
            auto ib = consts.find(root);
            if (ib != consts.end() && v && !(*v == ib->second)) return false;
            if (v && ib == consts.end()) consts[root] = *v;
        }
    }
    // collect groups of host slots
    std::map<AttrSlot, std::vector<std::pair<ElemId, std::string>>> groups;
    std::set<AttrSlot> seen;
    for (auto& c : r.pattern.conds) {
        for (const AttrSlot* s : {&c.lhs, c.rhs_is_const ? &c.lhs : &c.rhs_slot}) {
            if (!seen.insert(*s).second) continue;
            auto bit = full.find(s->pid);
            if (bit == full.end()) return false;
            groups[find(*s)].push_back({bit->second, s->attr});
        }
    }
    for (auto& [root, slots] : groups) {
        AttrTag resolved;
        auto cit = consts.find(root);
        if (cit != consts.end()) {
            resolved.kind = AttrTag::Const;
            resolved.value = cit->second;
        }
        // merge with existing tags of member slots
        std::vector<std::uint64_t> absorbed;
        for (auto& hs : slots) {
            auto it = st.tags.find(hs);
            if (it == st.tags.end() || it->second.kind == AttrTag::Free) continue;
            if (it->second.kind == AttrTag::Const) {
                if (resolved.kind == AttrTag::Const && !(resolved.value == it->second.value))
                    return false;
                if (resolved.kind != AttrTag::Const) {
                    resolved.kind = AttrTag::Const;
                    resolved.value = it->second.value;
                }
            } else {
                absorbed.push_back(it->second.group);
            }
        }
        if (resolved.kind == AttrTag::Free) {
            resolved.kind = AttrTag::Group;
            resolved.group = absorbed.empty() ? ++group_counter : absorbed.front();
        }
        // rewrite absorbed groups everywhere
        for (auto g_old : absorbed) {
            if (resolved.kind == AttrTag::Group && g_old == resolved.group) continue;
            for (auto& [k, t] : st.tags)
                if (t.kind == AttrTag::Group && t.group == g_old) t = resolved;
        }
        for (auto& hs : slots) st.tags[hs] = resolved;
    }
    return true;
}

}  // namespace detail

// Exhaustive language membership for small hosts (the test oracle). Searches
// all derivations up to max_depth, pruning by per-type element counts; at
// host size, accepts when a structural bijection satisfies the accumulated
// attribute constraints.
inline Membership member_bruteforce(const Tgg& g, const TripleGraph& host, std::size_t max_depth,
                                    std::size_t state_budget = 2000000) {
    if (!host.is_total())
        throw TgsError(Errc::BadInput, "member_bruteforce requires a total triple graph");
    const std::size_t host_size = host.size();
    const auto host_counts = host.type_counts();
    bool depth_hit = false;
    bool budget_hit = false;
    std::size_t states = 0;

    // per-rule created element type counts
    std::map<std::string, std::map<std::string, std::size_t>> rule_adds;
    std::map<std::string, Pattern> uncond;  // rule patterns with equations stripped
    for (auto& r : g.rules) {
        auto& adds = rule_adds[r.name];
        for (auto& n : r.pattern.nodes)
            if (n.role == Role::Create) adds[n.type]++;
        for (auto& e : r.pattern.edges)
            if (e.role == Role::Create) adds[e.type]++;
        for (auto& c : r.pattern.corrs)
            if (c.role == Role::Create) adds[c.type]++;
        Pattern p = r.pattern;
        p.conds.clear();
        uncond[r.name] = std::move(p);
    }

    auto fits = [&](const std::map<std::string, std::size_t>& cur,
                    const std::map<std::string, std::size_t>& adds) {
        for (auto& [t, k] : adds) {
            auto it = host_counts.find(t);
            std::size_t have = it == host_counts.end() ? 0 : it->second;
            auto c = cur.find(t);
            if ((c == cur.end() ? 0 : c->second) + k > have) return false;
        }
        return true;
    };

    auto final_check = [&](const detail::OracleState& st) {
        Pattern pat;
        for (auto& [id, n] : st.triple.nodes()) {
            PatternNode pn;
            pn.pid = id;
            pn.side = n.side;
            pn.type = n.type;
            pat.nodes.push_back(std::move(pn));
        }
        for (auto& [id, e] : st.triple.edges()) {
            PatternEdge pe;
            pe.pid = id;
            pe.side = e.side;
            pe.type = e.type;
            pe.from = e.from;
            pe.to = e.to;
            pat.edges.push_back(std::move(pe));
        }
        for (auto& [id, c] : st.triple.corrs()) {
            PatternCorr pc;
            pc.pid = id;
            pc.type = c.type;
            pc.src = *c.src;
            pc.trg = *c.trg;
            pat.corrs.push_back(std::move(pc));
        }
        MatchOptions opt;
        opt.exact_types = true;
        opt.check_conds = false;
        auto bijections = find_matches(pat, host, g.types, {}, opt);
        for (auto& b : bijections) {
            std::map<std::uint64_t, AttrValue> group_val;
            bool ok = true;
            for (auto& [slot, tag] : st.tags) {
                if (tag.kind == detail::AttrTag::Free) continue;
                const ElemId& hid = b.bindings.at(slot.first);
                const Node& hn = host.node(hid);
                auto ait = hn.attrs.find(slot.second);
                if (ait == hn.attrs.end()) {
                    ok = false;
                    break;
                }
                if (tag.kind == detail::AttrTag::Const) {
                    if (!(ait->second == tag.value)) {
                        ok = false;
                        break;
                    }
                } else {
                    auto git = group_val.find(tag.group);
                    if (git == group_val.end())
                        group_val[tag.group] = ait->second;
                    else if (!(git->second == ait->second)) {
                        ok = false;
                        break;
                    }
                }
            }
            if (ok) return true;
        }
        return false;
    };

    std::uint64_t group_counter = 0;
    std::function<bool(detail::OracleState&, std::map<std::string, std::size_t>&, std::size_t)>
        dfs = [&](detail::OracleState& st, std::map<std::string, std::size_t>& counts,
                  std::size_t depth) -> bool {
        if (++states > state_budget) {
            budget_hit = true;
            return false;
        }
        if (st.triple.size() == host_size) return final_check(st);
        if (depth >= max_depth) {
            depth_hit = true;
            return false;
        }
        for (auto& r : g.rules) {
            if (r.created_pids().empty()) continue;  // cannot grow
            if (!fits(counts, rule_adds[r.name])) continue;
            Pattern lhs = r.lhs();
            lhs.conds.clear();  // equations handled symbolically
            auto matches = find_matches(lhs, st.triple, g.types);
            for (auto& m : matches) {
                detail::OracleState next = st;
                ApplyResult res =
                    apply_pattern(uncond[r.name], m, next.triple, g.types, next.ids, {}, nullptr);
                if (!detail::apply_attr_constraints(r, res.full, next, group_counter)) continue;
                auto next_counts = counts;
                for (auto& [t, k] : rule_adds[r.name]) next_counts[t] += k;
                if (dfs(next, next_counts, depth + 1)) return true;
            }
        }
        return false;
    };

    detail::OracleState init;
    std::map<std::string, std::size_t> counts;
    if (dfs(init, counts, 0)) return Membership::Yes;
    if (budget_hit || (depth_hit && max_depth < host_size)) return Membership::Unknown;
    return Membership::No;
}

}  // namespace tgs
