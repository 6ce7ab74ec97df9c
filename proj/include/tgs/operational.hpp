#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "tgs/grammar.hpp"

namespace tgs {

enum class OpKind { Fwd, Bwd, Cc, SrcPattern, TrgPattern, ShortCut, RepairFwd, RepairBwd, ScCc };

inline const char* op_kind_name(OpKind k) {
    switch (k) {
        case OpKind::Fwd: return "FWD";
        case OpKind::Bwd: return "BWD";
        case OpKind::Cc: return "CC";
        case OpKind::SrcPattern: return "SRC-PATTERN";
        case OpKind::TrgPattern: return "TRG-PATTERN";
        case OpKind::ShortCut: return "SHORT-CUT";
        case OpKind::RepairFwd: return "REPAIR-FWD";
        case OpKind::RepairBwd: return "REPAIR-BWD";
        case OpKind::ScCc: return "SC-CC";
    }
    return "?";
}

// A rule derived from TGG rules. Context elements are bound on application,
// Create elements are instantiated, `deletes` are bound and removed, and
// `absent` lists elements of the replaced application that must already be
// gone from the host (repair rules act on partial triples).
struct OperationalRule {
    OpKind kind = OpKind::Fwd;
    std::string name;
    std::vector<std::string> base;
    Pattern pattern;
    std::set<std::string> deletes;
    std::vector<std::string> absent;
    // Short-cut / repair bookkeeping: original rule pid -> pattern pid.
    std::map<std::string, std::string> from_replaced;
    std::map<std::string, std::string> from_replacing;

    std::vector<std::string> translates_pids() const {
        std::vector<std::string> out;
        for (auto& n : pattern.nodes)
            if (n.mark == Marking::Translates) out.push_back(n.pid);
        for (auto& e : pattern.edges)
            if (e.mark == Marking::Translates) out.push_back(e.pid);
        for (auto& c : pattern.corrs)
            if (c.mark == Marking::Translates) out.push_back(c.pid);
        return out;
    }
};

namespace detail {

inline void mark_side(Pattern& p, Side side) {
    for (auto& n : p.nodes) {
        if (n.side != side) continue;
        if (n.role == Role::Create) {
            n.role = Role::Context;
            n.mark = Marking::Translates;
        } else {
            n.mark = Marking::RequiresTranslated;
        }
    }
    for (auto& e : p.edges) {
        if (e.side != side) continue;
        if (e.role == Role::Create) {
            e.role = Role::Context;
            e.mark = Marking::Translates;
        } else {
            e.mark = Marking::RequiresTranslated;
        }
    }
}

inline void require_context(Pattern& p) {
    for (auto& n : p.nodes)
        if (n.role == Role::Context && n.mark == Marking::None) n.mark = Marking::RequiresTranslated;
    for (auto& e : p.edges)
        if (e.role == Role::Context && e.mark == Marking::None) e.mark = Marking::RequiresTranslated;
    for (auto& c : p.corrs)
        if (c.role == Role::Context && c.mark == Marking::None) c.mark = Marking::RequiresTranslated;
}

}  // namespace detail

inline OperationalRule forward_rule(const TggRule& r, const std::vector<Nac>& filter_nacs = {}) {
    OperationalRule op;
    op.kind = OpKind::Fwd;
    op.name = r.name + "_FWD";
    op.base = {r.name};
    op.pattern = r.pattern;
    op.pattern.name = op.name;
    detail::mark_side(op.pattern, Side::Source);
    detail::require_context(op.pattern);
    for (auto& n : filter_nacs) op.pattern.nacs.push_back(n);
    return op;
}

inline OperationalRule backward_rule(const TggRule& r, const std::vector<Nac>& filter_nacs = {}) {
    OperationalRule op;
    op.kind = OpKind::Bwd;
    op.name = r.name + "_BWD";
    op.base = {r.name};
    op.pattern = r.pattern;
    op.pattern.name = op.name;
    detail::mark_side(op.pattern, Side::Target);
    detail::require_context(op.pattern);
    for (auto& n : filter_nacs) op.pattern.nacs.push_back(n);
    return op;
}

// Both source and target create elements become context with a marking
// requirement; only correspondence elements remain to be created.
inline OperationalRule cc_rule(const TggRule& r) {
    OperationalRule op;
    op.kind = OpKind::Cc;
    op.name = r.name + "_CC";
    op.base = {r.name};
    op.pattern = r.pattern;
    op.pattern.name = op.name;
    detail::mark_side(op.pattern, Side::Source);
    detail::mark_side(op.pattern, Side::Target);
    detail::require_context(op.pattern);
    return op;
}

// One-side projections of the CC rule; corr elements and cross-side
// conditions are dropped.
inline std::pair<OperationalRule, OperationalRule> side_patterns(
    const TggRule& r, const std::vector<Nac>& src_filter_nacs = {},
    const std::vector<Nac>& trg_filter_nacs = {}) {
    auto project = [&](Side side, OpKind kind, const std::string& suffix,
                       const std::vector<Nac>& fnacs) {
        OperationalRule op;
        op.kind = kind;
        op.name = r.name + suffix;
        op.base = {r.name};
        op.pattern.name = op.name;
        for (auto& n : r.pattern.nodes)
            if (n.side == side) op.pattern.nodes.push_back(n);
        for (auto& e : r.pattern.edges)
            if (e.side == side) op.pattern.edges.push_back(e);
        for (auto& c : r.pattern.conds) {
            bool lhs_in = op.pattern.find_node(c.lhs.pid) != nullptr;
            if (!lhs_in) continue;
            if (c.rhs_is_const || op.pattern.find_node(c.rhs_slot.pid)) op.pattern.conds.push_back(c);
        }
        for (auto& n : r.pattern.nacs)
            if (n.side == side) op.pattern.nacs.push_back(n);
        for (auto& n : fnacs) op.pattern.nacs.push_back(n);
        return op;
    };
    return {project(Side::Source, OpKind::SrcPattern, "_SRC", src_filter_nacs),
            project(Side::Target, OpKind::TrgPattern, "_TRG", trg_filter_nacs)};
}

// Synthesizes the short-cut rule replacing an application of `replaced` by one
// of `replacing`, preserving the declared overlap elements.
// Pattern pids: replacing pids keep their names, unmapped replaced pids get an
// "old_" prefix.
inline OperationalRule shortcut_rule(const TggRule& replaced, const TggRule& replacing,
                                     const std::map<std::string, std::string>& overlap,
                                     const std::string& name = "") {
    OperationalRule op;
    op.kind = OpKind::ShortCut;
    op.name = name.empty() ? replaced.name + "-To-" + replacing.name : name;
    op.base = {replaced.name, replacing.name};
    op.pattern.name = op.name;

    auto ill = [&](const std::string& msg) {
        throw TgsError(Errc::OverlapIllTyped, op.name + ": " + msg);
    };

    // Validate the overlap mapping.
    for (auto& [a, b] : overlap) {
        if (!replaced.pattern.has_pid(a)) ill("unknown replaced element " + a);
        if (!replacing.pattern.has_pid(b)) ill("unknown replacing element " + b);
        auto role_a = Role::Context;
        auto role_b = Role::Context;
        if (auto* n = replaced.pattern.find_node(a)) {
            auto* m = replacing.pattern.find_node(b);
            if (!m) ill(a + " maps to a different element kind");
            if (n->type != m->type || n->side != m->side) ill(a + " maps to different type");
            role_a = n->role;
            role_b = m->role;
        } else if (auto* e = replaced.pattern.find_edge(a)) {
            auto* f = replacing.pattern.find_edge(b);
            if (!f) ill(a + " maps to a different element kind");
            if (e->type != f->type || e->side != f->side) ill(a + " maps to different type");
            auto fit = overlap.find(e->from);
            auto tit = overlap.find(e->to);
            if (fit == overlap.end() || fit->second != f->from || tit == overlap.end() ||
                tit->second != f->to)
                ill("edge " + a + " endpoints not mapped consistently");
            role_a = e->role;
            role_b = f->role;
        } else if (auto* c = replaced.pattern.find_corr(a)) {
            auto* d = replacing.pattern.find_corr(b);
            if (!d) ill(a + " maps to a different element kind");
            if (c->type != d->type) ill(a + " maps to different type");
            auto sit = overlap.find(c->src);
            auto tit = overlap.find(c->trg);
            if (sit == overlap.end() || sit->second != d->src || tit == overlap.end() ||
                tit->second != d->trg)
                ill("corr " + a + " endpoints not mapped consistently");
            role_a = c->role;
            role_b = d->role;
        }
        if (role_a != role_b) ill(a + " maps across roles");
    }

    std::map<std::string, std::string> sc_of_replaced, sc_of_replacing;
    for (auto& pid : replacing.pattern.pids()) sc_of_replacing[pid] = pid;
    for (auto& pid : replaced.pattern.pids()) {
        auto it = overlap.find(pid);
        sc_of_replaced[pid] = it != overlap.end() ? it->second : "old_" + pid;
    }
    op.from_replaced = sc_of_replaced;
    op.from_replacing = sc_of_replacing;

    std::set<std::string> overlap_images;
    for (auto& [a, b] : overlap) overlap_images.insert(b);

    // Replacing side: creates become Create unless preserved via overlap.
    for (auto& n : replacing.pattern.nodes) {
        PatternNode c = n;
        c.mark = Marking::None;
        if (n.role == Role::Create && overlap_images.count(n.pid)) c.role = Role::Context;
        op.pattern.nodes.push_back(std::move(c));
    }
    for (auto& e : replacing.pattern.edges) {
        PatternEdge c = e;
        c.mark = Marking::None;
        if (e.role == Role::Create && overlap_images.count(e.pid)) c.role = Role::Context;
        op.pattern.edges.push_back(std::move(c));
    }
    for (auto& c0 : replacing.pattern.corrs) {
        PatternCorr c = c0;
        c.mark = Marking::None;
        if (c0.role == Role::Create && overlap_images.count(c0.pid)) c.role = Role::Context;
        op.pattern.corrs.push_back(std::move(c));
    }
    // Replaced-only elements: context stays context, creates get deleted.
    auto remap = [&](const std::string& pid) { return sc_of_replaced.at(pid); };
    for (auto& n : replaced.pattern.nodes) {
        if (overlap.count(n.pid)) continue;
        PatternNode c = n;
        c.pid = remap(n.pid);
        c.mark = Marking::None;
        c.role = Role::Context;
        if (n.role == Role::Create) op.deletes.insert(c.pid);
        op.pattern.nodes.push_back(std::move(c));
    }
    for (auto& e : replaced.pattern.edges) {
        if (overlap.count(e.pid)) continue;
        PatternEdge c = e;
        c.pid = remap(e.pid);
        c.from = remap(e.from);
        c.to = remap(e.to);
        c.mark = Marking::None;
        c.role = Role::Context;
        if (e.role == Role::Create) op.deletes.insert(c.pid);
        op.pattern.edges.push_back(std::move(c));
    }
    for (auto& c0 : replaced.pattern.corrs) {
        if (overlap.count(c0.pid)) continue;
        PatternCorr c = c0;
        c.pid = remap(c0.pid);
        c.src = remap(c0.src);
        c.trg = remap(c0.trg);
        c.mark = Marking::None;
        c.role = Role::Context;
        if (c0.role == Role::Create) op.deletes.insert(c.pid);
        op.pattern.corrs.push_back(std::move(c));
    }
    op.pattern.nacs = replacing.pattern.nacs;
    op.pattern.conds = replacing.pattern.conds;
    return op;
}

// Operationalizes a short-cut rule into repair rules. REPAIR-FWD assumes the
// source-side effect has already happened: deleted source elements must be
// absent, created source elements are consumed as context; the rule performs
// the target-side (and correspondence) effect. REPAIR-BWD is symmetric. SC-CC
// checks that both sides changed compatibly and only adjusts correspondences.
struct RepairRules {
    OperationalRule fwd;
    OperationalRule bwd;
    OperationalRule cc;
};

inline RepairRules repair_rules(const OperationalRule& sc) {
    if (sc.kind != OpKind::ShortCut)
        throw TgsError(Errc::BadInput, "repair_rules expects a short-cut rule");
    auto derive = [&](OpKind kind, const char* suffix, bool src_done, bool trg_done) {
        OperationalRule op;
        op.kind = kind;
        op.name = sc.name + suffix;
        op.base = sc.base;
        op.from_replaced = sc.from_replaced;
        op.from_replacing = sc.from_replacing;
        op.pattern.name = op.name;
        std::set<std::string> drop;
        auto side_done = [&](Side s) { return s == Side::Source ? src_done : trg_done; };
        for (auto& n : sc.pattern.nodes) {
            PatternNode c = n;
            if (side_done(n.side)) {
                if (sc.deletes.count(n.pid)) {
                    drop.insert(n.pid);
                    op.absent.push_back(n.pid);
                    continue;
                }
                if (n.role == Role::Create) {
                    c.role = Role::Context;
                    c.mark = Marking::Translates;
                }
            } else if (sc.deletes.count(n.pid)) {
                op.deletes.insert(n.pid);
            }
            op.pattern.nodes.push_back(std::move(c));
        }
        for (auto& e : sc.pattern.edges) {
            PatternEdge c = e;
            if (side_done(e.side)) {
                if (sc.deletes.count(e.pid)) {
                    drop.insert(e.pid);
                    op.absent.push_back(e.pid);
                    continue;
                }
                if (e.role == Role::Create) {
                    c.role = Role::Context;
                    c.mark = Marking::Translates;
                }
            } else if (sc.deletes.count(e.pid)) {
                op.deletes.insert(e.pid);
            }
            op.pattern.edges.push_back(std::move(c));
        }
        for (auto& c0 : sc.pattern.corrs) {
            // Correspondence effects are always performed by the repair.
            PatternCorr c = c0;
            if (sc.deletes.count(c0.pid)) op.deletes.insert(c0.pid);
            op.pattern.corrs.push_back(std::move(c));
        }
        // Prune replaced-side context that nothing kept refers to: after the
        // user's edit those elements may be gone (partial triples), and the
        // repair does not need them.
        std::set<std::string> needed;
        std::set<std::string> replacing_pids;
        for (auto& [r2pid, scpid] : sc.from_replacing) replacing_pids.insert(scpid);
        for (auto& n : op.pattern.nodes)
            if (replacing_pids.count(n.pid)) needed.insert(n.pid);
        for (auto& e : op.pattern.edges)
            if (replacing_pids.count(e.pid) || op.deletes.count(e.pid)) needed.insert(e.pid);
        for (auto& c : op.pattern.corrs)
            if (replacing_pids.count(c.pid) || op.deletes.count(c.pid)) needed.insert(c.pid);
        for (auto& n : op.pattern.nodes)
            if (op.deletes.count(n.pid)) needed.insert(n.pid);
        bool grew = true;
        while (grew) {
            grew = false;
            for (auto& e : op.pattern.edges) {
                if (!needed.count(e.pid)) continue;
                if (needed.insert(e.from).second) grew = true;
                if (needed.insert(e.to).second) grew = true;
            }
            for (auto& c : op.pattern.corrs) {
                if (!needed.count(c.pid)) continue;
                if (needed.insert(c.src).second) grew = true;
                if (needed.insert(c.trg).second) grew = true;
            }
        }
        auto pruned = [&](const std::string& pid) {
            return !needed.count(pid);
        };
        std::erase_if(op.pattern.nodes, [&](const PatternNode& n) { return pruned(n.pid); });
        std::erase_if(op.pattern.edges, [&](const PatternEdge& e) { return pruned(e.pid); });
        std::erase_if(op.pattern.corrs, [&](const PatternCorr& c) { return pruned(c.pid); });
        // Drop NACs and conditions that reference removed elements.
        for (auto& nac : sc.pattern.nacs) {
            bool ok = true;
            for (auto& e : nac.edges)
                for (const std::string* ep : {&e.from, &e.to}) {
                    bool local = false;
                    for (auto& nn : nac.nodes)
                        if (nn.pid == *ep) local = true;
                    if (!local && !op.pattern.has_pid(*ep)) ok = false;
                }
            if (ok) op.pattern.nacs.push_back(nac);
        }
        for (auto& cond : sc.pattern.conds) {
            if (!op.pattern.has_pid(cond.lhs.pid)) continue;
            if (!cond.rhs_is_const && !op.pattern.has_pid(cond.rhs_slot.pid)) continue;
            op.pattern.conds.push_back(cond);
        }
        return op;
    };
    RepairRules out;
    out.fwd = derive(OpKind::RepairFwd, "_FWD", true, false);
    out.bwd = derive(OpKind::RepairBwd, "_BWD", false, true);
    out.cc = derive(OpKind::ScCc, "_CC", true, true);
    return out;
}

// Static filter-NAC computation: for a node the forward rule translates, an
// incident edge of type t in direction d is forbidden when no rule of the
// grammar can ever translate such an edge attached to an already-translated
// node of that kind, and the rule itself does not create one there.
struct FilterNacs {
    std::map<std::string, std::vector<Nac>> src;  // rule name -> NACs (source side)
    std::map<std::string, std::vector<Nac>> trg;
};

inline FilterNacs compute_filter_nacs(const Tgg& g) {
    FilterNacs out;
    auto related = [&](const std::string& a, const std::string& b) {
        return g.types.is_subtype(a, b) || g.types.is_subtype(b, a);
    };
    auto compute_side = [&](Side side, std::map<std::string, std::vector<Nac>>& dest) {
        // Edge type t, incoming at node type T: some rule creates a t-edge
        // whose target endpoint is a context node with a type related to T.
        auto translatable = [&](const std::string& t, bool incoming, const std::string& T) {
            for (auto& r : g.rules) {
                for (auto& e : r.pattern.edges) {
                    if (e.role != Role::Create || e.type != t || e.side != side) continue;
                    auto* ep = r.pattern.find_node(incoming ? e.to : e.from);
                    if (ep && ep->role == Role::Context && related(ep->type, T)) return true;
                }
            }
            return false;
        };
        for (auto& r : g.rules) {
            std::vector<Nac> nacs;
            for (auto& n : r.pattern.nodes) {
                if (n.side != side || n.role != Role::Create) continue;
                for (auto& [tname, tdecl] : g.types.edge_types()) {
                    if (tdecl.side != side) continue;
                    for (bool incoming : {true, false}) {
                        const std::string& end_type = incoming ? tdecl.to_type : tdecl.from_type;
                        if (!related(n.type, end_type)) continue;
                        // skip if the rule itself creates such an edge at n
                        bool self = false;
                        for (auto& e : r.pattern.edges) {
                            if (e.role != Role::Create || e.type != tname) continue;
                            if ((incoming ? e.to : e.from) == n.pid) self = true;
                        }
                        if (self) continue;
                        if (translatable(tname, incoming, n.type)) continue;
                        Nac nac;
                        nac.side = side;
                        nac.name = r.name + "_filter_" + tname + (incoming ? "_in_" : "_out_") +
                                   n.pid;
                        PatternNode other;
                        other.pid = "nacnode_" + tname + "_" + n.pid;
                        other.side = side;
                        other.type = incoming ? tdecl.from_type : tdecl.to_type;
                        nac.nodes.push_back(other);
                        PatternEdge edge;
                        edge.pid = "nacedge_" + tname + "_" + n.pid;
                        edge.side = side;
                        edge.type = tname;
                        edge.from = incoming ? other.pid : n.pid;
                        edge.to = incoming ? n.pid : other.pid;
                        nac.edges.push_back(edge);
                        nacs.push_back(std::move(nac));
                    }
                }
            }
            if (!nacs.empty()) dest[r.name] = std::move(nacs);
        }
    };
    compute_side(Side::Source, out.src);
    compute_side(Side::Target, out.trg);
    return out;
}

// All operational rules of a grammar, ready for the synchronizer.
struct RuleOps {
    OperationalRule fwd;
    OperationalRule bwd;
    OperationalRule cc;
    OperationalRule src_pattern;
    OperationalRule trg_pattern;
};

struct ShortcutOps {
    ShortcutDecl decl;
    OperationalRule sc;
    RepairRules repairs;
};

struct OpRuleSet {
    FilterNacs filter_nacs;
    std::map<std::string, RuleOps> per_rule;
    std::vector<ShortcutOps> shortcuts;

    const RuleOps& of(const std::string& rule) const { return per_rule.at(rule); }
};

inline OpRuleSet build_op_rules(const Tgg& g) {
    OpRuleSet out;
    out.filter_nacs = compute_filter_nacs(g);
    for (auto& r : g.rules) {
        auto sit = out.filter_nacs.src.find(r.name);
        auto tit = out.filter_nacs.trg.find(r.name);
        static const std::vector<Nac> none;
        const std::vector<Nac>& snacs = sit == out.filter_nacs.src.end() ? none : sit->second;
        const std::vector<Nac>& tnacs = tit == out.filter_nacs.trg.end() ? none : tit->second;
        RuleOps ops{forward_rule(r, snacs), backward_rule(r, tnacs), cc_rule(r),
                    OperationalRule{}, OperationalRule{}};
        auto [sp, tp] = side_patterns(r, snacs, tnacs);
        ops.src_pattern = std::move(sp);
        ops.trg_pattern = std::move(tp);
        out.per_rule.emplace(r.name, std::move(ops));
    }
    for (auto& sd : g.shortcuts) {
        auto* r1 = g.rule(sd.replaced);
        auto* r2 = g.rule(sd.replacing);
        ShortcutOps s{sd, shortcut_rule(*r1, *r2, sd.overlap, sd.name), {}};
        s.repairs = repair_rules(s.sc);
        out.shortcuts.push_back(std::move(s));
    }
    return out;
}

// Debug/golden rendering of an operational rule in the grammar text format
// with marking annotations.
inline std::string print_operational(const OperationalRule& op) {
    std::ostringstream os;
    os << op_kind_name(op.kind) << " " << op.name << " {\n";
    auto mark_str = [](Marking m) {
        switch (m) {
            case Marking::Translates: return " [mark]";
            case Marking::RequiresTranslated: return " [marked]";
            default: return "";
        }
    };
    auto role_prefix = [&](Role r, const std::string& pid) {
        if (op.deletes.count(pid)) return "--";
        return r == Role::Create ? "++" : "";
    };
    for (auto& n : op.pattern.nodes)
        os << "  " << role_prefix(n.role, n.pid) << side_name(n.side) << " " << n.pid << ": "
           << n.type << mark_str(n.mark) << "\n";
    for (auto& e : op.pattern.edges)
        os << "  " << role_prefix(e.role, e.pid) << side_name(e.side) << " " << e.pid << ": "
           << e.from << " -" << e.type << "-> " << e.to << mark_str(e.mark) << "\n";
    for (auto& c : op.pattern.corrs)
        os << "  " << role_prefix(c.role, c.pid) << "corr " << c.pid << ": " << c.type << "("
           << c.src << ", " << c.trg << ")" << mark_str(c.mark) << "\n";
    for (auto& c : op.pattern.conds) {
        os << "  eq " << c.lhs.pid << "." << c.lhs.attr << " == ";
        if (c.rhs_is_const)
            os << gtext::print_attr_value(c.rhs_const);
        else
            os << c.rhs_slot.pid << "." << c.rhs_slot.attr;
        os << "\n";
    }
    for (auto& nac : op.pattern.nacs) {
        os << "  nac " << side_name(nac.side) << " {\n";
        for (auto& n : nac.nodes) os << "    " << n.pid << ": " << n.type << "\n";
        for (auto& e : nac.edges)
            os << "    " << e.pid << ": " << e.from << " -" << e.type << "-> " << e.to << "\n";
        os << "  }\n";
    }
    for (auto& a : op.absent) os << "  absent " << a << "\n";
    os << "}\n";
    return os.str();
}

}  // namespace tgs
