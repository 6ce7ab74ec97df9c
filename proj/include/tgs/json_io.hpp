#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "tgs/conflicts.hpp"
#include "tgs/delta.hpp"
#include "tgs/dpg.hpp"
#include "tgs/restore.hpp"

namespace tgs {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Triple graphs: {"source": {nodes, edges}, "target": {...}, "corr": [...]}
// with null encoding a dangling reference.
// ---------------------------------------------------------------------------

inline json attr_value_to_json(const AttrValue& v) {
    if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
    return std::get<std::int64_t>(v);
}

inline AttrValue attr_value_from_json(const json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return j.get<std::int64_t>();
    throw TgsError(Errc::BadInput, "attribute values must be strings or integers");
}

inline json triple_to_json(const TripleGraph& g) {
    json out;
    auto side_obj = [&](Side s) {
        json nodes = json::array();
        for (auto& [id, n] : g.nodes()) {
            if (n.side != s) continue;
            json attrs = json::object();
            for (auto& [an, av] : n.attrs) attrs[an] = attr_value_to_json(av);
            nodes.push_back({{"id", id}, {"type", n.type}, {"attrs", attrs}});
        }
        json edges = json::array();
        for (auto& [id, e] : g.edges()) {
            if (e.side != s) continue;
            edges.push_back({{"id", id}, {"type", e.type}, {"from", e.from}, {"to", e.to}});
        }
        return json{{"nodes", nodes}, {"edges", edges}};
    };
    out["source"] = side_obj(Side::Source);
    out["target"] = side_obj(Side::Target);
    json corr = json::array();
    for (auto& [id, c] : g.corrs()) {
        json jc{{"id", id}, {"type", c.type}};
        jc["src"] = g.corr_ref_live(c.src) ? json(*c.src) : json(nullptr);
        jc["trg"] = g.corr_ref_live(c.trg) ? json(*c.trg) : json(nullptr);
        corr.push_back(jc);
    }
    out["corr"] = corr;
    return out;
}

inline TripleGraph triple_from_json(const json& j) {
    TripleGraph g;
    auto load_side = [&](const json& side, Side s) {
        if (!side.contains("nodes")) return;
        for (auto& jn : side.at("nodes")) {
            Node n;
            n.id = jn.at("id").get<std::string>();
            n.side = s;
            n.type = jn.at("type").get<std::string>();
            if (jn.contains("attrs"))
                for (auto& [k, v] : jn.at("attrs").items()) n.attrs[k] = attr_value_from_json(v);
            g.add_node(std::move(n));
        }
        if (!side.contains("edges")) return;
        for (auto& je : side.at("edges")) {
            Edge e;
            e.id = je.at("id").get<std::string>();
            e.side = s;
            e.type = je.at("type").get<std::string>();
            e.from = je.at("from").get<std::string>();
            e.to = je.at("to").get<std::string>();
            g.add_edge(std::move(e));
        }
    };
    if (j.contains("source")) load_side(j.at("source"), Side::Source);
    if (j.contains("target")) load_side(j.at("target"), Side::Target);
    if (j.contains("corr")) {
        for (auto& jc : j.at("corr")) {
            CorrNode c;
            c.id = jc.at("id").get<std::string>();
            c.type = jc.at("type").get<std::string>();
            if (jc.contains("src") && !jc.at("src").is_null())
                c.src = jc.at("src").get<std::string>();
            if (jc.contains("trg") && !jc.at("trg").is_null())
                c.trg = jc.at("trg").get<std::string>();
            g.add_corr(std::move(c));
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Deltas: {"source": [tagged ops...], "target": [...]}
// ---------------------------------------------------------------------------

inline json delta_op_to_json(const DeltaOp& op) {
    json j;
    if (auto* a = std::get_if<AddNodeOp>(&op)) {
        j["op"] = "add-node";
        j["id"] = a->id;
        j["type"] = a->type;
        json attrs = json::object();
        for (auto& [an, av] : a->attrs) attrs[an] = attr_value_to_json(av);
        j["attrs"] = attrs;
    } else if (auto* a = std::get_if<AddEdgeOp>(&op)) {
        j["op"] = "add-edge";
        j["id"] = a->id;
        j["type"] = a->type;
        j["from"] = a->from;
        j["to"] = a->to;
    } else if (auto* d = std::get_if<DeleteNodeOp>(&op)) {
        j["op"] = "delete-node";
        j["id"] = d->id;
    } else if (auto* d = std::get_if<DeleteEdgeOp>(&op)) {
        j["op"] = "delete-edge";
        j["id"] = d->id;
    } else if (auto* s = std::get_if<SetAttrOp>(&op)) {
        j["op"] = "set-attr";
        j["id"] = s->id;
        j["attr"] = s->attr;
        j["old"] = attr_value_to_json(s->old_value);
        j["new"] = attr_value_to_json(s->new_value);
    }
    return j;
}

inline DeltaOp delta_op_from_json(const json& j) {
    std::string op = j.at("op").get<std::string>();
    if (op == "add-node") {
        AddNodeOp a;
        a.id = j.at("id").get<std::string>();
        a.type = j.at("type").get<std::string>();
        if (j.contains("attrs"))
            for (auto& [k, v] : j.at("attrs").items()) a.attrs[k] = attr_value_from_json(v);
        return a;
    }
    if (op == "add-edge") {
        AddEdgeOp a;
        a.id = j.at("id").get<std::string>();
        a.type = j.at("type").get<std::string>();
        a.from = j.at("from").get<std::string>();
        a.to = j.at("to").get<std::string>();
        return a;
    }
    if (op == "delete-node") return DeleteNodeOp{j.at("id").get<std::string>()};
    if (op == "delete-edge") return DeleteEdgeOp{j.at("id").get<std::string>()};
    if (op == "set-attr") {
        SetAttrOp s;
        s.id = j.at("id").get<std::string>();
        s.attr = j.at("attr").get<std::string>();
        s.old_value = attr_value_from_json(j.at("old"));
        s.new_value = attr_value_from_json(j.at("new"));
        return s;
    }
    throw TgsError(Errc::BadInput, "unknown delta op '" + op + "'");
}

inline json delta_to_json(const Delta& d) {
    json ops = json::array();
    for (auto& op : d.ops) ops.push_back(delta_op_to_json(op));
    return ops;
}

inline Delta delta_from_json(const json& j, Side side) {
    Delta d;
    d.side = side;
    for (auto& jo : j) d.ops.push_back(delta_op_from_json(jo));
    return d;
}

// A delta file may carry one side ({"side": "...", "ops": [...]}) or both
// ({"source": [...], "target": [...]}).
inline std::pair<Delta, Delta> deltas_from_json(const json& j) {
    Delta ds, dt;
    ds.side = Side::Source;
    dt.side = Side::Target;
    if (j.contains("source")) ds = delta_from_json(j.at("source"), Side::Source);
    if (j.contains("target")) dt = delta_from_json(j.at("target"), Side::Target);
    return {ds, dt};
}

inline Delta one_delta_from_json(const json& j, Side expected) {
    if (j.is_array()) return delta_from_json(j, expected);
    if (j.contains("ops")) {
        Side s = expected;
        if (j.contains("side")) {
            auto parsed = side_from_name(j.at("side").get<std::string>());
            if (parsed) s = *parsed;
        }
        if (s != expected)
            throw TgsError(Errc::BadInput, "delta file side does not match its role");
        return delta_from_json(j.at("ops"), expected);
    }
    if (j.contains("source") && expected == Side::Source)
        return delta_from_json(j.at("source"), Side::Source);
    if (j.contains("target") && expected == Side::Target)
        return delta_from_json(j.at("target"), Side::Target);
    throw TgsError(Errc::BadInput, "unrecognized delta file layout");
}

// ---------------------------------------------------------------------------
// Precedence graphs and DPGs
// ---------------------------------------------------------------------------

inline json pg_to_json(const PrecedenceGraph& pg) {
    json nodes = json::array();
    for (auto& n : pg.nodes) {
        json b = json::object();
        for (auto& [pid, id] : n.bindings) b[pid] = id;
        nodes.push_back({{"id", n.id},
                         {"rule", n.rule},
                         {"bindings", b},
                         {"created", json(n.created)},
                         {"context", json(n.context)},
                         {"srcAnn", json::array()},
                         {"trgAnn", json::array()}});
    }
    json edges = json::array();
    for (auto& [a, b] : pg.dep_edges) edges.push_back(json::array({a, b}));
    return json{{"nodes", nodes}, {"edges", edges}};
}

inline PrecedenceGraph pg_from_json(const json& j) {
    PrecedenceGraph pg;
    for (auto& jn : j.at("nodes")) {
        ConsistencyMatch m;
        m.id = jn.at("id").get<std::string>();
        m.rule = jn.at("rule").get<std::string>();
        for (auto& [pid, id] : jn.at("bindings").items()) m.bindings[pid] = id.get<std::string>();
        for (auto& e : jn.at("created")) m.created.insert(e.get<std::string>());
        for (auto& e : jn.at("context")) m.context.insert(e.get<std::string>());
        pg.nodes.push_back(std::move(m));
    }
    for (auto& je : j.at("edges"))
        pg.dep_edges.push_back({je.at(0).get<std::string>(), je.at(1).get<std::string>()});
    return pg;
}

inline json dpg_to_json(const DeltaPrecedenceGraph& dpg) {
    json nodes = json::array();
    for (auto& n : dpg.nodes) {
        json b = json::object();
        for (auto& [pid, id] : n.bindings) b[pid] = id;
        json src_ann = json::array(), trg_ann = json::array();
        for (Ann a : n.src_ann) src_ann.push_back(ann_to_string(a));
        for (Ann a : n.trg_ann) trg_ann.push_back(ann_to_string(a));
        nodes.push_back({{"id", n.id},
                         {"rule", n.rule},
                         {"candidate", n.candidate},
                         {"bindings", b},
                         {"created", json(n.created)},
                         {"context", json(n.context)},
                         {"srcAnn", src_ann},
                         {"trgAnn", trg_ann}});
    }
    json edges = json::array();
    for (auto& [a, b] : dpg.dep_edges) edges.push_back(json::array({a, b}));
    return json{{"nodes", nodes}, {"edges", edges}};
}

// ---------------------------------------------------------------------------
// Conflict reports
// ---------------------------------------------------------------------------

inline json conflict_to_json(const Conflict& c) {
    return json{{"kind", conflict_kind_name(c.kind)},
                {"anchor", c.anchor},
                {"scope", json(c.scope)},
                {"evidence", json(c.evidence)}};
}

inline json conflicts_to_json(const std::vector<Conflict>& cs) {
    json out = json::array();
    for (auto& c : cs) out.push_back(conflict_to_json(c));
    return out;
}

inline std::string conflicts_to_text(const std::vector<Conflict>& cs) {
    std::ostringstream os;
    os << cs.size() << " conflict(s)\n";
    for (auto& c : cs) {
        os << "  " << conflict_kind_name(c.kind) << " @ " << c.anchor << "\n";
        os << "    scope:";
        for (auto& s : c.scope) os << " " << s;
        os << "\n    evidence:";
        for (auto& e : c.evidence) os << " " << e;
        os << "\n";
    }
    return os.str();
}

inline json report_to_json(const SyncReport& r) {
    json res = json::array();
    for (auto& x : r.resolutions)
        res.push_back(json{{"anchor", x.anchor},
                           {"kind", conflict_kind_name(x.kind)},
                           {"strategy", x.strategy},
                           {"warnings", json(x.warnings)}});
    return json{{"conflicts", conflicts_to_json(r.conflicts)},
                {"resolutions", res},
                {"ruleLog", json(r.rule_log)},
                {"cleanupDeleted", json(r.cleanup_deleted)},
                {"warnings", json(r.warnings)},
                {"unresolved", json(r.unresolved)}};
}

inline std::string report_to_text(const SyncReport& r) {
    std::ostringstream os;
    os << conflicts_to_text(r.conflicts);
    for (auto& x : r.resolutions) {
        os << "resolved " << conflict_kind_name(x.kind) << " @ " << x.anchor << " via "
           << x.strategy;
        for (auto& w : x.warnings) os << " [" << w << "]";
        os << "\n";
    }
    for (auto& u : r.unresolved) os << "unresolved: " << u << "\n";
    os << r.rule_log.size() << " rule application(s), " << r.cleanup_deleted.size()
       << " element(s) cleaned up\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Orchestration files
// ---------------------------------------------------------------------------

inline ResolveConfig resolve_config_from_json(const json& j) {
    ResolveConfig cfg;
    if (j.contains("pre")) {
        std::string pre = j.at("pre").get<std::string>();
        if (pre == "repair")
            cfg.pre_repair = true;
        else if (!pre.empty())
            throw TgsError(Errc::OrchInvalid, "resolve pre step must be 'repair'");
    }
    std::string strat = j.at("strategy").get<std::string>();
    if (strat == "take-source")
        cfg.strategy = Strategy::TakeSource;
    else if (strat == "take-target")
        cfg.strategy = Strategy::TakeTarget;
    else if (strat == "preserve")
        cfg.strategy = Strategy::Preserve;
    else
        throw TgsError(Errc::OrchInvalid, "unknown strategy '" + strat + "'");
    if (j.contains("post")) {
        std::string post = j.at("post").get<std::string>();
        if (post == "translate")
            cfg.post = ResolveConfig::Post::Translate;
        else if (post == "propagate")
            cfg.post = ResolveConfig::Post::Propagate;
        else if (!post.empty())
            throw TgsError(Errc::OrchInvalid, "resolve post step must be translate|propagate");
    }
    return cfg;
}

inline Orchestration orchestration_from_json(const json& j) {
    Orchestration o;
    for (auto& js : j.at("steps")) o.steps.push_back(fragment_step_from_name(js.get<std::string>()));
    if (j.contains("resolve")) {
        for (auto& [kind, jc] : j.at("resolve").items()) {
            conflict_kind_from_name(kind);  // validates the key
            o.resolve[kind] = resolve_config_from_json(jc);
        }
    }
    if (j.contains("evaluators")) {
        for (auto& je : j.at("evaluators")) {
            Evaluator ev;
            ev.when = je.at("when").get<std::string>();
            ev.config = resolve_config_from_json(je);
            o.evaluators.push_back(std::move(ev));
        }
    }
    validate_orchestration(o);
    return o;
}

inline json orchestration_to_json(const Orchestration& o) {
    json steps = json::array();
    for (auto s : o.steps) steps.push_back(fragment_step_name(s));
    json resolve = json::object();
    auto cfg_to_json = [](const ResolveConfig& c) {
        json j;
        if (c.pre_repair) j["pre"] = "repair";
        j["strategy"] = c.strategy == Strategy::TakeSource   ? "take-source"
                        : c.strategy == Strategy::TakeTarget ? "take-target"
                                                             : "preserve";
        if (c.post == ResolveConfig::Post::Translate) j["post"] = "translate";
        if (c.post == ResolveConfig::Post::Propagate) j["post"] = "propagate";
        return j;
    };
    for (auto& [kind, cfg] : o.resolve) resolve[kind] = cfg_to_json(cfg);
    json evals = json::array();
    for (auto& ev : o.evaluators) {
        json je = cfg_to_json(ev.config);
        je["when"] = ev.when;
        evals.push_back(je);
    }
    return json{{"steps", steps}, {"resolve", resolve}, {"evaluators", evals}};
}

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TgsError(Errc::IoError, "cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TgsError(Errc::IoError, "cannot write " + path);
    out << content;
}

inline json parse_json_file(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw TgsError(Errc::ParseError, path + ": " + e.what());
    }
}

}  // namespace tgs
