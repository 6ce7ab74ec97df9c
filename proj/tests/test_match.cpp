#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"

using namespace tgs;

namespace {

// Independent oracle: enumerate all injective assignments of pattern elements
// to host elements by plain recursion over candidate lists, then filter by
// typing, incidence, NACs and attribute conditions. No indexes, no ordering
// heuristics; usable on hosts up to a dozen elements.
std::vector<Bindings> brute_force_matches(const Pattern& p, const TripleGraph& host,
                                          const TypeTriple& types) {
    std::vector<std::string> pids = p.pids();
    std::vector<Bindings> out;
    Bindings cur;
    std::set<ElemId> used;

    std::function<bool(const Bindings&)> structure_ok = [&](const Bindings& b) {
        for (auto& pn : p.nodes) {
            const ElemId& id = b.at(pn.pid);
            if (!host.has_node(id)) return false;
            const Node& n = host.node(id);
            if (n.side != pn.side || !types.is_subtype(n.type, pn.type)) return false;
        }
        for (auto& pe : p.edges) {
            const ElemId& id = b.at(pe.pid);
            if (!host.has_edge(id)) return false;
            const Edge& e = host.edge(id);
            if (e.side != pe.side || e.type != pe.type) return false;
            if (e.from != b.at(pe.from) || e.to != b.at(pe.to)) return false;
        }
        for (auto& pc : p.corrs) {
            const ElemId& id = b.at(pc.pid);
            if (!host.has_corr(id)) return false;
            const CorrNode& c = host.corr(id);
            if (c.type != pc.type) return false;
            if (!host.corr_ref_live(c.src) || !host.corr_ref_live(c.trg)) return false;
            if (*c.src != b.at(pc.src) || *c.trg != b.at(pc.trg)) return false;
        }
        return true;
    };

    auto conds_ok = [&](const Bindings& b) {
        for (auto& c : p.conds) {
            auto val = [&](const AttrSlot& s) -> std::optional<AttrValue> {
                auto it = b.find(s.pid);
                if (it == b.end() || !host.has_node(it->second)) return std::nullopt;
                auto& attrs = host.node(it->second).attrs;
                auto ait = attrs.find(s.attr);
                return ait == attrs.end() ? std::nullopt : std::optional<AttrValue>(ait->second);
            };
            auto lv = val(c.lhs);
            auto rv = c.rhs_is_const ? std::optional<AttrValue>(c.rhs_const) : val(c.rhs_slot);
            if (lv && rv && !(*lv == *rv)) return false;
        }
        return true;
    };

    // NAC check by recursive enumeration of the extension
    std::function<bool(const Nac&, const Bindings&)> nac_matches = [&](const Nac& nac,
                                                                       const Bindings& base) {
        std::vector<std::string> ext;
        for (auto& n : nac.nodes) ext.push_back(n.pid);
        for (auto& e : nac.edges) ext.push_back(e.pid);
        Bindings b = base;
        std::set<ElemId> taken;
        for (auto& [pid, id] : base) taken.insert(id);
        std::function<bool(std::size_t)> rec = [&](std::size_t i) -> bool {
            if (i == ext.size()) {
                for (auto& e : nac.edges) {
                    const ElemId& id = b.at(e.pid);
                    if (!host.has_edge(id)) return false;
                    const Edge& he = host.edge(id);
                    if (he.type != e.type || he.side != e.side) return false;
                    if (he.from != b.at(e.from) || he.to != b.at(e.to)) return false;
                }
                for (auto& n : nac.nodes) {
                    const ElemId& id = b.at(n.pid);
                    if (!host.has_node(id)) return false;
                    const Node& hn = host.node(id);
                    if (hn.side != n.side || !types.is_subtype(hn.type, n.type)) return false;
                }
                return true;
            }
            const std::string& pid = ext[i];
            bool is_node = false;
            for (auto& n : nac.nodes)
                if (n.pid == pid) is_node = true;
            std::vector<ElemId> cands;
            if (is_node)
                for (auto& [id, n] : host.nodes()) cands.push_back(id);
            else
                for (auto& [id, e] : host.edges()) cands.push_back(id);
            for (auto& id : cands) {
                if (taken.count(id)) continue;
                b[pid] = id;
                taken.insert(id);
                if (rec(i + 1)) {
                    taken.erase(id);
                    b.erase(pid);
                    return true;
                }
                taken.erase(id);
                b.erase(pid);
            }
            return false;
        };
        return rec(0);
    };

    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == pids.size()) {
            if (!structure_ok(cur) || !conds_ok(cur)) return;
            for (auto& nac : p.nacs)
                if (nac_matches(nac, cur)) return;
            out.push_back(cur);
            return;
        }
        const std::string& pid = pids[i];
        // all injective maps, filtered by kind/side/type up front
        std::vector<ElemId> cands;
        if (auto* pn = p.find_node(pid)) {
            for (auto& [id, n] : host.nodes())
                if (n.side == pn->side && types.is_subtype(n.type, pn->type)) cands.push_back(id);
        } else if (auto* pe = p.find_edge(pid)) {
            for (auto& [id, e] : host.edges())
                if (e.side == pe->side && e.type == pe->type) cands.push_back(id);
        } else if (auto* pc = p.find_corr(pid)) {
            for (auto& [id, c] : host.corrs())
                if (c.type == pc->type) cands.push_back(id);
        }
        for (auto& id : cands) {
            if (used.count(id)) continue;
            cur[pid] = id;
            used.insert(id);
            rec(i + 1);
            used.erase(id);
            cur.erase(pid);
        }
    };
    rec(0);
    return out;
}

std::set<Bindings> as_set(const std::vector<PatternMatch>& ms) {
    std::set<Bindings> out;
    for (auto& m : ms) out.insert(m.bindings);
    return out;
}

}  // namespace

TEST_CASE("find_matches: ICD context has two matches on the chain model") {
    auto res = fixtures::chain_model();
    const TggRule* icd = fixtures::running_tgg().rule("ICD");
    auto ms = find_matches(icd->lhs(), res.triple, fixtures::running_tgg().types);
    CHECK(ms.size() == 2);
}

TEST_CASE("find_matches: empty pattern yields exactly one empty match") {
    Pattern empty;
    auto ms = find_matches(empty, fixtures::running_base(), fixtures::running_tgg().types);
    REQUIRE(ms.size() == 1);
    CHECK(ms[0].bindings.empty());
}

TEST_CASE("find_matches: filter NAC blocks translating a subclass via CD") {
    // CD_FWD's source pattern must not match C2 once C3 -subClass-> C2 exists.
    auto g = fixtures::running_base();
    fixtures::add_node(g, "C3", Side::Source, "Class", {{"name", "c3"}});
    fixtures::add_edge(g, "C3", "subClass", "C2");
    const OperationalRule& sp = fixtures::running_ops().of("CD").src_pattern;
    auto ms = find_matches(sp.pattern, g, fixtures::running_tgg().types, {{"c", "C2"}});
    CHECK(ms.empty());
    // C3 itself has no incoming subClass edge, so it is translatable
    auto ms2 = find_matches(sp.pattern, g, fixtures::running_tgg().types, {{"c", "C3"}});
    CHECK(ms2.size() == 1);
}

TEST_CASE("find_matches: agrees with brute-force enumeration") {
    auto& g = fixtures::running_tgg();
    auto host = fixtures::chain_model().triple;
    for (auto& r : g.rules) {
        auto fast = find_matches(r.lhs(), host, g.types);
        auto slow = brute_force_matches(r.lhs(), host, g.types);
        INFO("rule " << r.name);
        CHECK(as_set(fast) == std::set<Bindings>(slow.begin(), slow.end()));
    }
    // consistency patterns (full RHS) as well
    auto base = fixtures::running_base();
    for (auto& r : g.rules) {
        auto fast = find_matches(r.pattern, base, g.types);
        auto slow = brute_force_matches(r.pattern, base, g.types);
        INFO("rule " << r.name);
        CHECK(as_set(fast) == std::set<Bindings>(slow.begin(), slow.end()));
    }
}

TEST_CASE("find_matches: deterministic canonical order") {
    auto base = fixtures::running_base();
    auto& g = fixtures::running_tgg();
    const TggRule* me = g.rule("ME");
    auto a = find_matches(me->pattern, base, g.types);
    auto b = find_matches(me->pattern, base, g.types);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].bindings == b[i].bindings);
    // sorted by bound host ids
    for (std::size_t i = 1; i < a.size(); ++i)
        CHECK(a[i - 1].bound_ids_sorted() <= a[i].bound_ids_sorted());
}

TEST_CASE("find_matches: rejects incompatible seeds") {
    auto base = fixtures::running_base();
    auto& g = fixtures::running_tgg();
    const TggRule* me = g.rule("ME");
    CHECK_THROWS_AS(find_matches(me->lhs(), base, g.types, {{"c", "D1"}}), TgsError);
    CHECK_THROWS_AS(find_matches(me->lhs(), base, g.types, {{"nope", "C1"}}), TgsError);
}

TEST_CASE("apply: CD on the empty triple creates a name-equal pair") {
    auto& g = fixtures::running_tgg();
    TripleGraph host;
    IdGen ids;
    const TggRule* cd = g.rule("CD");
    auto ms = find_matches(cd->lhs(), host, g.types);
    REQUIRE(ms.size() == 1);
    auto res = apply_pattern(cd->pattern, ms[0], host, g.types, ids);
    CHECK(res.created.size() == 3);
    CHECK(host.nodes().size() == 2);
    CHECK(host.corrs().size() == 1);
    auto& c = host.node(res.created.at("c"));
    auto& d = host.node(res.created.at("d"));
    CHECK(c.attrs.at("name") == d.attrs.at("name"));
    CHECK(d.attrs.at("version") == AttrValue(std::int64_t(1)));
}

TEST_CASE("apply: ICD extends the chain model") {
    auto& g = fixtures::running_tgg();
    auto host = fixtures::chain_model().triple;
    std::size_t before = host.size();
    const TggRule* icd = g.rule("ICD");
    auto ms = find_matches(icd->lhs(), host, g.types);
    REQUIRE_FALSE(ms.empty());
    IdGen ids("n");
    auto res = apply_pattern(icd->pattern, ms[0], host, g.types, ids);
    CHECK(res.created.size() == 5);
    CHECK(host.size() == before + 5);
    CHECK(validate(host, g.types).empty());
}

TEST_CASE("apply: a rule with an empty create part changes nothing") {
    auto& g = fixtures::running_tgg();
    TggRule noop;
    noop.name = "noop";
    PatternNode pn;
    pn.pid = "c";
    pn.side = Side::Source;
    pn.type = "Class";
    noop.pattern.nodes.push_back(pn);
    auto host = fixtures::running_base();
    std::size_t before = host.size();
    IdGen ids;
    auto ms = find_matches(noop.lhs(), host, g.types);
    REQUIRE_FALSE(ms.empty());
    auto res = apply_pattern(noop.pattern, ms[0], host, g.types, ids);
    CHECK(res.created.empty());
    CHECK(host.size() == before);
}

TEST_CASE("apply: dangling-edge deletions are rejected") {
    auto& g = fixtures::running_tgg();
    auto host = fixtures::running_base();
    Pattern p;
    PatternNode pn;
    pn.pid = "m";
    pn.side = Side::Source;
    pn.type = "Method";
    p.nodes.push_back(pn);
    PatternMatch m;
    m.pattern = &p;
    m.bindings = {{"m", "M6"}};
    IdGen ids;
    CHECK_THROWS_AS(apply_pattern(p, m, host, g.types, ids, {"m"}), TgsError);
}

TEST_CASE("property: matching equals brute force on random small hosts") {
    auto& g = fixtures::running_tgg();
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        auto host = derive_random(g, seed, 4).triple;
        for (auto& r : g.rules) {
            auto fast = find_matches(r.lhs(), host, g.types);
            auto slow = brute_force_matches(r.lhs(), host, g.types);
            INFO("seed " << seed << " rule " << r.name);
            REQUIRE(as_set(fast) == std::set<Bindings>(slow.begin(), slow.end()));
        }
    }
}
