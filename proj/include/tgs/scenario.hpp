#pragma once

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tgs/restore.hpp"

namespace tgs {

// The Java-AST-to-documentation grammar used by the generator, benchmarks and
// the bundled fixtures.
inline const char* running_example_grammar() {
    return R"(# Java AST <-> documentation consistency
metamodel {
  src node Class { name: string }
  src node Method { name: string }
  src node Field { name: string }
  src node Parameter { }
  src edge subClass: Class -> Class
  src edge methods: Class -> Method
  src edge fields: Class -> Field
  src edge params: Method -> Parameter
  trg node Doc { name: string; version: integer }
  trg node Entry { name: string }
  trg node Glossary { }
  trg node GlossaryEntry { name: string }
  trg edge entries: Doc -> Entry
  trg edge href: Doc -> Doc
  trg edge glEntries: Glossary -> GlossaryEntry
  trg edge glRef: Entry -> GlossaryEntry
  corr C2D: Class <-> Doc
  corr M2E: Method <-> Entry
  corr F2E: Field <-> Entry
  corr P2E: Parameter <-> Entry
}

rule CD {
  ++src c: Class
  ++trg d: Doc
  ++corr cd: C2D(c, d)
  eq c.name == d.name
  eq d.version == 1
}

rule ICD {
  src c: Class
  trg d: Doc
  corr cd: C2D(c, d)
  ++src c2: Class
  ++src e1: c -subClass-> c2
  ++trg d2: Doc
  ++trg e2: d -href-> d2
  ++corr cd2: C2D(c2, d2)
  eq c2.name == d2.name
  eq d2.version == 1
}

rule ME {
  src c: Class
  trg d: Doc
  corr cd: C2D(c, d)
  ++src m: Method
  ++src e1: c -methods-> m
  ++trg en: Entry
  ++trg e2: d -entries-> en
  ++corr me: M2E(m, en)
  eq m.name == en.name
}

rule FE {
  src c: Class
  trg d: Doc
  corr cd: C2D(c, d)
  ++src f: Field
  ++src e1: c -fields-> f
  ++trg en: Entry
  ++trg e2: d -entries-> en
  ++corr fe: F2E(f, en)
  eq f.name == en.name
}

rule P {
  src m: Method
  trg en: Entry
  corr me: M2E(m, en)
  ++src p: Parameter
  ++src e1: m -params-> p
  ++corr pe: P2E(p, en)
}

rule G {
  ++trg g: Glossary
}

rule GE {
  trg g: Glossary
  ++trg ge: GlossaryEntry
  ++trg e1: g -glEntries-> ge
}

rule GL {
  trg en: Entry
  trg ge: GlossaryEntry
  ++trg e1: en -glRef-> ge
}

shortcut CDtoICD: CD -> ICD overlap { c -> c2, d -> d2, cd -> cd2 }
shortcut ICDtoCD: ICD -> CD overlap { c2 -> c, d2 -> d, cd2 -> cd }
shortcut MoveField: FE -> FE overlap { f -> f, en -> en, fe -> fe }
shortcut MoveMethod: ME -> ME overlap { m -> m, en -> en, me -> me }
shortcut MoveParam: P -> P overlap { p -> p }
)";
}

struct Scenario {
    std::size_t size = 1000;    // node count, source+target
    std::size_t changes = 20;   // total paired edits
    double ratio = 1.0;         // fraction of conflict-inducing edits
    std::uint64_t seed = 1;
};

struct GeneratedScenario {
    TripleGraph triple;
    Trace trace;
    Delta delta_src;
    Delta delta_trg;
    std::size_t expected_conflicts = 0;
    std::size_t benign_changes = 0;
    // ids recorded for property checks
    std::vector<ElemId> added_fields;
    std::vector<ElemId> renamed_fields;
    std::vector<ElemId> moved_params;
    std::vector<ElemId> deleted_params;
};

// Deterministic scenario synthesis. Conflict-inducing edits mirror the three
// conflict kinds: delete-vs-use, contradictory relocations, divergent renames.
// Benign edits: additions, one-sided renames, param relocations and whole
// deletions, all repairable by Propagate.
inline GeneratedScenario gen_scenario(const Tgg& g, const Scenario& sc) {
    std::mt19937_64 rng(sc.seed);
    std::size_t n_conflicts = static_cast<std::size_t>(std::ceil(sc.ratio * double(sc.changes)));
    if (n_conflicts > sc.changes) n_conflicts = sc.changes;
    std::size_t n_benign = sc.changes - n_conflicts;
    std::size_t n_pdc = (n_conflicts + 2) / 3;
    std::size_t n_cpc = (n_conflicts + 1) / 3;
    std::size_t n_acc = n_conflicts / 3;
    std::size_t n_add = (n_benign + 3) / 4;
    std::size_t n_rename = (n_benign + 2) / 4;
    std::size_t n_move = (n_benign + 1) / 4;
    std::size_t n_del = n_benign / 4;

    GeneratedScenario out;
    std::uint64_t name_counter = 0;
    AttrProvider prov = [&](AttrKind k, const std::string&) -> AttrValue {
        ++name_counter;
        if (k == AttrKind::String) return "n" + std::to_string(name_counter);
        return static_cast<std::int64_t>(name_counter);
    };
    Derivation d(g, IdGen("e"), prov);

    // backbone: glossary with two entries, a hub class pair, two subclasses
    // for relocation targets
    TraceStep g_step = d.step("G");
    ElemId glossary = g_step.created.at("g");
    ElemId ge1 = d.step("GE", 0, {{"g", glossary}}).created.at("ge");
    d.step("GE", 0, {{"g", glossary}});
    TraceStep hub = d.step("CD");
    ElemId c_hub = hub.created.at("c");
    ElemId d_hub = hub.created.at("d");
    ElemId cd_hub = hub.created.at("cd");
    Bindings hub_seed{{"c", c_hub}, {"d", d_hub}, {"cd", cd_hub}};
    bool need_icds = n_cpc > 0;
    ElemId ca, da, db;
    if (need_icds) {
        TraceStep icd1 = d.step("ICD", 0, hub_seed);
        ca = icd1.created.at("c2");
        da = icd1.created.at("d2");
        TraceStep icd2 = d.step("ICD", 0, hub_seed);
        db = icd2.created.at("d2");
        (void)da;
    }

    struct Unit {
        std::string kind;
        std::vector<TraceStep> steps;
    };
    // planned template instances; derivation order gets seeded-shuffled
    std::vector<std::string> plan;
    for (std::size_t i = 0; i < n_pdc; ++i) plan.push_back("pdc");
    for (std::size_t i = 0; i < n_cpc; ++i) plan.push_back("cpc");
    for (std::size_t i = 0; i < n_acc; ++i) plan.push_back("acc");
    for (std::size_t i = 0; i < n_rename; ++i) plan.push_back("rename");
    for (std::size_t i = 0; i < n_move; ++i) plan.push_back("move");
    for (std::size_t i = 0; i < n_del; ++i) plan.push_back("del");
    // seeded shuffle (Fisher-Yates with our own bounded sampler)
    for (std::size_t i = plan.size(); i > 1; --i)
        std::swap(plan[i - 1], plan[detail::bounded(rng, i)]);

    std::vector<Unit> units;
    for (auto& kind : plan) {
        Unit u;
        u.kind = kind;
        if (kind == "pdc" || kind == "acc" || kind == "rename") {
            u.steps.push_back(kind == "rename" ? d.step("FE", 0, hub_seed)
                                               : d.step("ME", 0, hub_seed));
        } else if (kind == "cpc") {
            u.steps.push_back(d.step("FE", 0, hub_seed));
        } else if (kind == "move") {
            TraceStep host_me = d.step("ME", 0, hub_seed);
            TraceStep target_me = d.step("ME", 0, hub_seed);
            u.steps.push_back(host_me);
            u.steps.push_back(target_me);
            u.steps.push_back(d.step("P", 0, {{"m", host_me.created.at("m")}}));
        } else if (kind == "del") {
            TraceStep host_me = d.step("ME", 0, hub_seed);
            u.steps.push_back(host_me);
            u.steps.push_back(d.step("P", 0, {{"m", host_me.created.at("m")}}));
        }
        units.push_back(std::move(u));
    }

    // fill up to the requested node count
    auto node_count = [&]() { return d.triple().nodes().size(); };
    while (node_count() + 1 < sc.size) d.step("ME", 0, hub_seed);
    if (node_count() < sc.size) d.step("GE", 0, {{"g", glossary}});

    Delta ds;
    ds.side = Side::Source;
    Delta dt;
    dt.side = Side::Target;
    std::size_t uid = 0;
    auto node_name = [&](const TripleGraph& t, const ElemId& id) {
        return std::get<std::string>(t.node(id).attrs.at("name"));
    };
    const TripleGraph& t = d.triple();
    for (auto& u : units) {
        ++uid;
        std::string tag = std::to_string(uid);
        if (u.kind == "pdc") {
            const TraceStep& me = u.steps[0];
            ds.ops.push_back(DeleteEdgeOp{me.created.at("e1")});
            ds.ops.push_back(DeleteNodeOp{me.created.at("m")});
            dt.ops.push_back(AddEdgeOp{"lnk" + tag, "glRef", me.created.at("en"), ge1});
        } else if (u.kind == "acc") {
            const TraceStep& me = u.steps[0];
            std::string old = node_name(t, me.created.at("m"));
            ds.ops.push_back(SetAttrOp{me.created.at("m"), "name", old, "xs" + tag});
            dt.ops.push_back(SetAttrOp{me.created.at("en"), "name", old, "xt" + tag});
        } else if (u.kind == "cpc") {
            const TraceStep& fe = u.steps[0];
            ds.ops.push_back(DeleteEdgeOp{fe.created.at("e1")});
            ds.ops.push_back(AddEdgeOp{"fmv" + tag, "fields", ca, fe.created.at("f")});
            dt.ops.push_back(DeleteEdgeOp{fe.created.at("e2")});
            dt.ops.push_back(AddEdgeOp{"emv" + tag, "entries", db, fe.created.at("en")});
        } else if (u.kind == "rename") {
            const TraceStep& fe = u.steps[0];
            std::string old = node_name(t, fe.created.at("f"));
            ds.ops.push_back(SetAttrOp{fe.created.at("f"), "name", old, "rn" + tag});
            out.renamed_fields.push_back(fe.created.at("f"));
        } else if (u.kind == "move") {
            const TraceStep& target_me = u.steps[1];
            const TraceStep& p = u.steps[2];
            ds.ops.push_back(DeleteEdgeOp{p.created.at("e1")});
            ds.ops.push_back(
                AddEdgeOp{"pmv" + tag, "params", target_me.created.at("m"), p.created.at("p")});
            out.moved_params.push_back(p.created.at("p"));
        } else if (u.kind == "del") {
            const TraceStep& p = u.steps[1];
            ds.ops.push_back(DeleteEdgeOp{p.created.at("e1")});
            ds.ops.push_back(DeleteNodeOp{p.created.at("p")});
            out.deleted_params.push_back(p.created.at("p"));
        }
    }
    for (std::size_t i = 0; i < n_add; ++i) {
        ++uid;
        std::string tag = std::to_string(uid);
        std::string name = "add" + tag;
        ds.ops.push_back(AddNodeOp{"fadd" + tag, "Field", {{"name", name}}});
        ds.ops.push_back(AddEdgeOp{"feadd" + tag, "fields", c_hub, "fadd" + tag});
        out.added_fields.push_back("fadd" + tag);
        if (i % 2 == 1) {  // paired addition for Local CC
            dt.ops.push_back(AddNodeOp{"eadd" + tag, "Entry", {{"name", name}}});
            dt.ops.push_back(AddEdgeOp{"eeadd" + tag, "entries", d_hub, "eadd" + tag});
        }
    }

    DeriveResult res = d.take();
    out.triple = std::move(res.triple);
    out.trace = std::move(res.trace);
    out.delta_src = std::move(ds);
    out.delta_trg = std::move(dt);
    out.expected_conflicts = n_conflicts;
    out.benign_changes = n_benign;
    return out;
}

// ---------------------------------------------------------------------------
// Benchmark harness
// ---------------------------------------------------------------------------

struct BenchRow {
    std::string scenario;
    std::size_t size = 0;
    std::size_t changes = 0;
    double ratio = 0;
    std::string run;  // repetition index or "avg"
    double init_ms = 0;
    double detect_ms = 0;
    double resolve_ms = 0;
};

struct BenchPoint {
    std::string scenario;
    Scenario params;
};

inline double ms_since(std::chrono::steady_clock::time_point t0) {
    auto dt = std::chrono::steady_clock::now() - t0;
    return std::chrono::duration<double, std::milli>(dt).count();
}

// One scenario point: repetitions start from a fresh state; initialization is
// the cold-start parse (this engine has no external incremental matcher, so
// numbers are not comparable 1:1 with tools that keep matches warm).
inline std::vector<BenchRow> bench_point(const Tgg& g, const OpRuleSet& ops,
                                         const BenchPoint& point, std::size_t reps,
                                         const Orchestration& orch) {
    std::vector<BenchRow> rows;
    GeneratedScenario gen = gen_scenario(g, point.params);
    double sum_init = 0, sum_detect = 0, sum_resolve = 0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        BenchRow row;
        row.scenario = point.scenario;
        row.size = point.params.size;
        row.changes = point.params.changes;
        row.ratio = point.params.ratio;
        row.run = std::to_string(rep);
        auto t0 = std::chrono::steady_clock::now();
        ParseResult pr = parse_pg(g, ops, gen.triple);
        row.init_ms = ms_since(t0);
        if (pr.status != ParseStatus::Ok)
            throw TgsError(Errc::BadInput, "bench fixture failed to parse");
        t0 = std::chrono::steady_clock::now();
        SyncEngine engine(g, ops, gen.triple, pr.pg, gen.delta_src, gen.delta_trg);
        row.detect_ms = ms_since(t0);
        t0 = std::chrono::steady_clock::now();
        orchestrate(engine, orch);
        row.resolve_ms = ms_since(t0);
        sum_init += row.init_ms;
        sum_detect += row.detect_ms;
        sum_resolve += row.resolve_ms;
        rows.push_back(row);
    }
    BenchRow avg;
    avg.scenario = point.scenario;
    avg.size = point.params.size;
    avg.changes = point.params.changes;
    avg.ratio = point.params.ratio;
    avg.run = "avg";
    avg.init_ms = sum_init / double(reps);
    avg.detect_ms = sum_detect / double(reps);
    avg.resolve_ms = sum_resolve / double(reps);
    rows.push_back(avg);
    return rows;
}

inline std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream os;
    os << "scenario,size,changes,ratio,run,init_ms,detect_ms,resolve_ms\r\n";
    os.setf(std::ios::fixed);
    os.precision(3);
    for (auto& r : rows)
        os << r.scenario << "," << r.size << "," << r.changes << "," << r.ratio << "," << r.run
           << "," << r.init_ms << "," << r.detect_ms << "," << r.resolve_ms << "\r\n";
    return os.str();
}

// Least-squares fit helpers for the scaling checks.
struct LinearFit {
    double slope = 0;
    double intercept = 0;
    double r_squared = 0;
};

inline LinearFit linear_fit(const std::vector<std::pair<double, double>>& points) {
    LinearFit out;
    if (points.size() < 2) return out;
    double n = double(points.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [x, y] : points) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0) return out;
    out.slope = (n * sxy - sx * sy) / denom;
    out.intercept = (sy - out.slope * sx) / n;
    double mean_y = sy / n;
    double ss_tot = 0, ss_res = 0;
    for (auto& [x, y] : points) {
        double fy = out.slope * x + out.intercept;
        ss_tot += (y - mean_y) * (y - mean_y);
        ss_res += (y - fy) * (y - fy);
    }
    out.r_squared = ss_tot == 0 ? 1.0 : 1.0 - ss_res / ss_tot;
    return out;
}

}  // namespace tgs
