#pragma once

// Shared fixtures: the Java-AST/documentation running example and a small
// synthetic grammar exercising every annotation case.

#include <tgs/tgs.hpp>

namespace fixtures {

using namespace tgs;

inline const Tgg& running_tgg() {
    static Tgg g = parse_grammar(running_example_grammar());
    return g;
}

inline const OpRuleSet& running_ops() {
    static OpRuleSet ops = build_op_rules(running_tgg());
    return ops;
}

// Class c1 with subclass c2; method under c2 with one parameter (the chain
// CD -> ICD -> ME -> P).
inline DeriveResult chain_model() {
    Derivation d(running_tgg(), IdGen("e"));
    TraceStep cd = d.step("CD");
    TraceStep icd = d.step("ICD", 0,
                           {{"c", cd.created.at("c")}, {"d", cd.created.at("d")}});
    TraceStep me = d.step("ME", 0,
                          {{"c", icd.created.at("c2")}, {"d", icd.created.at("d2")}});
    d.step("P", 0, {{"m", me.created.at("m")}});
    return d.take();
}

inline void add_node(TripleGraph& g, const ElemId& id, Side side, const std::string& type,
                     std::map<std::string, AttrValue> attrs = {}) {
    Node n;
    n.id = id;
    n.side = side;
    n.type = type;
    n.attrs = std::move(attrs);
    g.add_node(std::move(n));
}

inline void add_edge(TripleGraph& g, const ElemId& from, const std::string& type,
                     const ElemId& to) {
    Edge e;
    e.id = from + "_" + type + "_" + to;
    e.side = g.node(from).side;
    e.type = type;
    e.from = from;
    e.to = to;
    g.add_edge(std::move(e));
}

inline void add_corr(TripleGraph& g, const ElemId& src, const std::string& type,
                     const ElemId& trg) {
    CorrNode c;
    c.id = src + "_" + type + "_" + trg;
    c.type = type;
    c.src = src;
    c.trg = trg;
    g.add_corr(std::move(c));
}

// The base model of the concurrent-change example: two classes with a field
// and method each, M6 with parameters P9/P10, M8 with P11, docs mirroring the
// classes, and a glossary whose entry GE13 is referenced by E7 and E8.
inline TripleGraph running_base() {
    TripleGraph g;
    add_node(g, "C1", Side::Source, "Class", {{"name", "c1"}});
    add_node(g, "C2", Side::Source, "Class", {{"name", "c2"}});
    add_node(g, "F5", Side::Source, "Field", {{"name", "f5"}});
    add_node(g, "M6", Side::Source, "Method", {{"name", "m6"}});
    add_node(g, "F7", Side::Source, "Field", {{"name", "f7"}});
    add_node(g, "M8", Side::Source, "Method", {{"name", "m8"}});
    add_node(g, "P9", Side::Source, "Parameter");
    add_node(g, "P10", Side::Source, "Parameter");
    add_node(g, "P11", Side::Source, "Parameter");
    add_edge(g, "C1", "fields", "F5");
    add_edge(g, "C1", "methods", "M6");
    add_edge(g, "C2", "fields", "F7");
    add_edge(g, "C2", "methods", "M8");
    add_edge(g, "M6", "params", "P9");
    add_edge(g, "M6", "params", "P10");
    add_edge(g, "M8", "params", "P11");
    add_node(g, "D1", Side::Target, "Doc", {{"name", "c1"}, {"version", std::int64_t(1)}});
    add_node(g, "D2", Side::Target, "Doc", {{"name", "c2"}, {"version", std::int64_t(1)}});
    add_node(g, "E5", Side::Target, "Entry", {{"name", "f5"}});
    add_node(g, "E6", Side::Target, "Entry", {{"name", "m6"}});
    add_node(g, "E7", Side::Target, "Entry", {{"name", "f7"}});
    add_node(g, "E8", Side::Target, "Entry", {{"name", "m8"}});
    add_node(g, "G14", Side::Target, "Glossary");
    add_node(g, "GE12", Side::Target, "GlossaryEntry", {{"name", "ge12"}});
    add_node(g, "GE13", Side::Target, "GlossaryEntry", {{"name", "ge13"}});
    add_edge(g, "D1", "entries", "E5");
    add_edge(g, "D1", "entries", "E6");
    add_edge(g, "D2", "entries", "E7");
    add_edge(g, "D2", "entries", "E8");
    add_edge(g, "G14", "glEntries", "GE12");
    add_edge(g, "G14", "glEntries", "GE13");
    add_edge(g, "E7", "glRef", "GE13");
    add_edge(g, "E8", "glRef", "GE13");
    add_corr(g, "C1", "C2D", "D1");
    add_corr(g, "C2", "C2D", "D2");
    add_corr(g, "F5", "F2E", "E5");
    add_corr(g, "M6", "M2E", "E6");
    add_corr(g, "F7", "F2E", "E7");
    add_corr(g, "M8", "M2E", "E8");
    add_corr(g, "P9", "P2E", "E6");
    add_corr(g, "P10", "P2E", "E6");
    add_corr(g, "P11", "P2E", "E8");
    return g;
}

// Source delta: pull F7 up into the new superclass C3 of C2, add F4 to C1,
// delete M6 with P9 and move P10 to M8, rename M8 to a8.
inline Delta running_delta_src() {
    Delta d;
    d.side = Side::Source;
    d.ops = {
        AddNodeOp{"C3", "Class", {{"name", "c3"}}},
        AddEdgeOp{"C3_subClass_C2", "subClass", "C3", "C2"},
        DeleteEdgeOp{"C2_fields_F7"},
        AddEdgeOp{"C3_fields_F7", "fields", "C3", "F7"},
        AddNodeOp{"F4", "Field", {{"name", "f4"}}},
        AddEdgeOp{"C1_fields_F4", "fields", "C1", "F4"},
        DeleteEdgeOp{"M6_params_P9"},
        DeleteEdgeOp{"M6_params_P10"},
        DeleteEdgeOp{"C1_methods_M6"},
        DeleteNodeOp{"P9"},
        DeleteNodeOp{"M6"},
        AddEdgeOp{"M8_params_P10", "params", "M8", "P10"},
        SetAttrOp{"M8", "name", "m8", "a8"},
    };
    return d;
}

// Target delta: move E7 to D1, add E4 to D1 (same name as F4), link E6, E4,
// E5 and E7 to GE12, rename E8 to b8.
inline Delta running_delta_trg() {
    Delta d;
    d.side = Side::Target;
    d.ops = {
        DeleteEdgeOp{"D2_entries_E7"},
        AddEdgeOp{"D1_entries_E7", "entries", "D1", "E7"},
        AddNodeOp{"E4", "Entry", {{"name", "f4"}}},
        AddEdgeOp{"D1_entries_E4", "entries", "D1", "E4"},
        AddEdgeOp{"E6_glRef_GE12", "glRef", "E6", "GE12"},
        AddEdgeOp{"E4_glRef_GE12", "glRef", "E4", "GE12"},
        AddEdgeOp{"E5_glRef_GE12", "glRef", "E5", "GE12"},
        AddEdgeOp{"E7_glRef_GE12", "glRef", "E7", "GE12"},
        SetAttrOp{"E8", "name", "m8", "b8"},
    };
    return d;
}

inline const PrecedenceGraph& running_pg() {
    static PrecedenceGraph pg = [] {
        auto res = parse_pg(running_tgg(), running_ops(), running_base());
        if (res.status != ParseStatus::Ok)
            throw std::runtime_error("running example base model failed to parse");
        return res.pg;
    }();
    return pg;
}

// Synthetic grammar covering every annotation case on a single rule (R2):
// its instances have two created elements per side, a violable equation, and
// filter NACs via the never-translated edge types ref/tref.
inline const char* matrix_grammar_text() {
    return R"(metamodel {
  src node A { name: string }
  src node B { }
  src edge aa: A -> A
  src edge ab: A -> B
  src edge ref: A -> A
  trg node X { name: string }
  trg node Y { }
  trg edge xx: X -> X
  trg edge xy: X -> Y
  trg edge tref: X -> X
  corr A2X: A <-> X
}

rule R0 {
  ++src a: A
  ++trg x: X
  ++corr ax: A2X(a, x)
  eq a.name == x.name
}

rule R1 {
  src a: A
  trg x: X
  corr ax: A2X(a, x)
  ++src b: B
  ++src e1: a -ab-> b
  ++trg y: Y
  ++trg e2: x -xy-> y
}

rule R2 {
  src a: A
  trg x: X
  corr ax: A2X(a, x)
  ++src a2: A
  ++src e1: a -aa-> a2
  ++trg x2: X
  ++trg e2: x -xx-> x2
  ++corr ax2: A2X(a2, x2)
  eq a2.name == x2.name
}

shortcut MoveR2: R2 -> R2 overlap { a2 -> a2, x2 -> x2, ax2 -> ax2 }
)";
}

inline const Tgg& matrix_tgg() {
    static Tgg g = parse_grammar(matrix_grammar_text());
    return g;
}

inline const OpRuleSet& matrix_ops() {
    static OpRuleSet ops = build_op_rules(matrix_tgg());
    return ops;
}

// a1/x1 (R0), a2/x2 under them (R2), a3/x3 (R0, spare anchor for candidates)
inline TripleGraph matrix_base() {
    TripleGraph g;
    add_node(g, "a1", Side::Source, "A", {{"name", "a1"}});
    add_node(g, "a2", Side::Source, "A", {{"name", "v2"}});
    add_node(g, "a3", Side::Source, "A", {{"name", "a3"}});
    add_edge(g, "a1", "aa", "a2");
    add_node(g, "x1", Side::Target, "X", {{"name", "a1"}});
    add_node(g, "x2", Side::Target, "X", {{"name", "v2"}});
    add_node(g, "x3", Side::Target, "X", {{"name", "a3"}});
    add_edge(g, "x1", "xx", "x2");
    add_corr(g, "a1", "A2X", "x1");
    add_corr(g, "a2", "A2X", "x2");
    add_corr(g, "a3", "A2X", "x3");
    return g;
}

inline std::string fixture_path(const std::string& name) {
    return std::string(TGS_FIXTURE_DIR) + "/" + name;
}

}  // namespace fixtures
