// Minimal end-to-end walkthrough: derive a small model, edit both sides
// concurrently, detect the conflicts, and restore consistency.

#include <iostream>

#include <tgs/tgs.hpp>

int main() {
    using namespace tgs;
    Tgg g = parse_grammar(running_example_grammar());
    OpRuleSet ops = build_op_rules(g);

    // a class/doc pair with one method
    Derivation d(g);
    TraceStep cd = d.step("CD");
    TraceStep me = d.step("ME", 0, {{"c", cd.created.at("c")}, {"d", cd.created.at("d")}});
    DeriveResult base = d.take();
    PrecedenceGraph pg = pg_from_trace(g, base.trace);

    // source user adds a field; target user deletes the method's entry pair
    Delta ds;
    ds.side = Side::Source;
    ds.ops = {AddNodeOp{"f1", "Field", {{"name", "flag"}}},
              AddEdgeOp{"cf1", "fields", cd.created.at("c"), "f1"}};
    Delta dt;
    dt.side = Side::Target;
    dt.ops = {DeleteEdgeOp{me.created.at("e2")}, DeleteNodeOp{me.created.at("en")}};

    SyncEngine engine(g, ops, base.triple, pg, ds, dt);
    std::cout << conflicts_to_text(engine.conflicts());

    orchestrate(engine, default_orchestration());
    std::cout << report_to_text(engine.report());

    auto diags = verify_pg(g, engine.host(), engine.current_pg());
    std::cout << "final model verification: " << (diags.empty() ? "clean" : "violations") << "\n";
    std::cout << triple_to_json(engine.host()).dump(2) << "\n";
    return diags.empty() ? 0 : 1;
}
