// Command-line front end: consistency checking, annotation, conflict
// detection, synchronization, scenario generation and benchmarking.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <tgs/tgs.hpp>

namespace {

using namespace tgs;

std::uint64_t seed_override(std::uint64_t seed) {
    if (const char* env = std::getenv("SYNC_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw TgsError(Errc::BadInput, "SYNC_SEED is not an integer");
        }
    }
    return seed;
}

Tgg load_grammar(const std::string& path) {
    if (path.empty()) return parse_grammar(running_example_grammar());
    return parse_grammar(read_file(path));
}

TripleGraph load_triple(const std::string& path, const TypeTriple& types) {
    TripleGraph g = triple_from_json(parse_json_file(path));
    auto diags = validate(g, types);
    for (auto& d : diags)
        if (d.is_error())
            throw TgsError(Errc::BadInput, path + ": " + d.kind + " at " + d.element);
    return g;
}

struct Inputs {
    Tgg grammar;
    OpRuleSet ops;
    TripleGraph base;
    PrecedenceGraph pg;
    Delta ds;
    Delta dt;
};

Inputs load_inputs(const std::string& grammar_path, const std::string& triple_path,
                   const std::string& src_delta_path, const std::string& trg_delta_path) {
    Inputs in;
    in.grammar = load_grammar(grammar_path);
    in.ops = build_op_rules(in.grammar);
    in.base = load_triple(triple_path, in.grammar.types);
    auto pr = parse_pg(in.grammar, in.ops, in.base);
    if (pr.status == ParseStatus::Budget)
        throw TgsError(Errc::BudgetExhausted, "parse budget exhausted on " + triple_path);
    if (pr.status != ParseStatus::Ok)
        throw TgsError(Errc::BadInput, triple_path + " is not consistent (NO-COVER)");
    in.pg = std::move(pr.pg);
    in.ds = one_delta_from_json(parse_json_file(src_delta_path), Side::Source);
    in.dt = one_delta_from_json(parse_json_file(trg_delta_path), Side::Target);
    return in;
}

void emit(const std::string& out_path, const json& j) {
    std::string text = j.dump(2) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        write_file(out_path, text);
}

int run_cli(int argc, char** argv) {
    CLI::App app{"triple-graph-grammar model synchronization"};
    app.require_subcommand(1);

    std::string grammar_path, triple_path, src_delta, trg_delta, orch_path, out_path;
    std::string out_source, out_target, report_path;

    auto* check = app.add_subcommand("check", "parse a model into a precedence graph and verify it");
    check->add_option("grammar", grammar_path, "grammar file (.tgg)")->required();
    check->add_option("model", triple_path, "triple graph (.json)")->required();
    check->add_option("-o,--out", out_path, "write the precedence graph JSON here");

    auto* annotate_cmd = app.add_subcommand("annotate", "emit the annotated delta precedence graph");
    annotate_cmd->add_option("grammar", grammar_path)->required();
    annotate_cmd->add_option("model", triple_path)->required();
    annotate_cmd->add_option("source-delta", src_delta)->required();
    annotate_cmd->add_option("target-delta", trg_delta)->required();
    annotate_cmd->add_option("-o,--out", out_path);

    auto* detect = app.add_subcommand("detect", "detect conflicts between two deltas");
    detect->add_option("grammar", grammar_path)->required();
    detect->add_option("model", triple_path)->required();
    detect->add_option("source-delta", src_delta)->required();
    detect->add_option("target-delta", trg_delta)->required();
    detect->add_option("-o,--out", out_path);
    bool detect_text = false;
    detect->add_flag("--text", detect_text, "print a human-readable table");

    auto* sync = app.add_subcommand("sync", "restore consistency per an orchestration");
    sync->add_option("grammar", grammar_path)->required();
    sync->add_option("model", triple_path)->required();
    sync->add_option("source-delta", src_delta)->required();
    sync->add_option("target-delta", trg_delta)->required();
    sync->add_option("--orch", orch_path, "orchestration JSON (default: the built-in one)");
    sync->add_option("--out-source", out_source, "write the synchronized source model");
    sync->add_option("--out-target", out_target, "write the synchronized target model");
    sync->add_option("--out", out_path, "write the full synchronized triple");
    sync->add_option("--report", report_path, "write the report JSON");

    auto* gen = app.add_subcommand("gen", "generate a scenario: base triple plus two deltas");
    std::size_t gen_size = 1000, gen_changes = 20;
    double gen_ratio = 1.0;
    std::uint64_t gen_seed = 1;
    std::string gen_prefix = "scenario";
    gen->add_option("--grammar", grammar_path, "grammar file (default: built-in)");
    gen->add_option("--size", gen_size, "node count, source+target");
    gen->add_option("--changes", gen_changes, "total paired edits");
    gen->add_option("--ratio", gen_ratio, "fraction of conflict-inducing edits");
    gen->add_option("--seed", gen_seed, "rng seed (SYNC_SEED overrides)");
    gen->add_option("--out-prefix", gen_prefix, "output file prefix");

    auto* bench = app.add_subcommand("bench", "scenario sweep, CSV of init/detect/resolve times");
    std::vector<std::size_t> bench_sizes{5000, 15000, 50000};
    std::vector<std::size_t> bench_changes{20};
    std::vector<double> bench_ratios{1.0};
    std::size_t bench_reps = 20;
    std::uint64_t bench_seed = 1;
    std::string bench_csv_path;
    bench->add_option("--grammar", grammar_path);
    bench->add_option("--sizes", bench_sizes, "model sizes")->delimiter(',');
    bench->add_option("--changes", bench_changes, "change counts")->delimiter(',');
    bench->add_option("--ratios", bench_ratios, "conflict ratios")->delimiter(',');
    bench->add_option("--reps", bench_reps, "repetitions per point");
    bench->add_option("--seed", bench_seed);
    bench->add_option("--csv", bench_csv_path, "write CSV here (default stdout)");

    CLI11_PARSE(app, argc, argv);

    if (check->parsed()) {
        Tgg g = load_grammar(grammar_path);
        OpRuleSet ops = build_op_rules(g);
        TripleGraph host = load_triple(triple_path, g.types);
        auto pr = parse_pg(g, ops, host);
        if (pr.status == ParseStatus::Budget)
            throw TgsError(Errc::BudgetExhausted, "parse budget exhausted");
        if (pr.status != ParseStatus::Ok)
            throw TgsError(Errc::BadInput, "model is not in the grammar's language (NO-COVER)");
        auto diags = verify_pg(g, host, pr.pg);
        if (!diags.empty())
            throw TgsError(Errc::BadInput, "verification failed: " + diags.front().detail);
        emit(out_path, pg_to_json(pr.pg));
        return 0;
    }
    if (annotate_cmd->parsed()) {
        Inputs in = load_inputs(grammar_path, triple_path, src_delta, trg_delta);
        SyncEngine engine(in.grammar, in.ops, in.base, in.pg, in.ds, in.dt);
        emit(out_path, dpg_to_json(engine.dpg()));
        return 0;
    }
    if (detect->parsed()) {
        Inputs in = load_inputs(grammar_path, triple_path, src_delta, trg_delta);
        SyncEngine engine(in.grammar, in.ops, in.base, in.pg, in.ds, in.dt);
        if (detect_text) std::cout << conflicts_to_text(engine.conflicts());
        emit(out_path, conflicts_to_json(engine.conflicts()));
        return 0;
    }
    if (sync->parsed()) {
        Inputs in = load_inputs(grammar_path, triple_path, src_delta, trg_delta);
        Orchestration orch = orch_path.empty()
                                 ? default_orchestration()
                                 : orchestration_from_json(parse_json_file(orch_path));
        SyncEngine engine(in.grammar, in.ops, in.base, in.pg, in.ds, in.dt);
        orchestrate(engine, orch);
        json full = triple_to_json(engine.host());
        if (!out_path.empty()) emit(out_path, full);
        if (!out_source.empty())
            emit(out_source, json{{"source", full.at("source")}});
        if (!out_target.empty())
            emit(out_target, json{{"target", full.at("target")}});
        if (out_path.empty() && out_source.empty() && out_target.empty()) emit("", full);
        if (!report_path.empty()) emit(report_path, report_to_json(engine.report()));
        return 0;
    }
    if (gen->parsed()) {
        Tgg g = load_grammar(grammar_path);
        Scenario sc;
        sc.size = gen_size;
        sc.changes = gen_changes;
        sc.ratio = gen_ratio;
        sc.seed = seed_override(gen_seed);
        GeneratedScenario out = gen_scenario(g, sc);
        emit(gen_prefix + ".triple.json", triple_to_json(out.triple));
        emit(gen_prefix + ".src.delta.json",
             json{{"side", "src"}, {"ops", delta_to_json(out.delta_src)}});
        emit(gen_prefix + ".trg.delta.json",
             json{{"side", "trg"}, {"ops", delta_to_json(out.delta_trg)}});
        emit(gen_prefix + ".meta.json",
             json{{"expectedConflicts", out.expected_conflicts},
                  {"benignChanges", out.benign_changes},
                  {"size", sc.size},
                  {"changes", sc.changes},
                  {"ratio", sc.ratio},
                  {"seed", sc.seed}});
        std::cerr << "wrote " << gen_prefix << ".{triple,src.delta,trg.delta,meta}.json\n";
        return 0;
    }
    if (bench->parsed()) {
        Tgg g = load_grammar(grammar_path);
        OpRuleSet ops = build_op_rules(g);
        Orchestration orch = default_orchestration();
        std::vector<BenchRow> rows;
        std::uint64_t seed = seed_override(bench_seed);
        for (auto size : bench_sizes)
            for (auto changes : bench_changes)
                for (auto ratio : bench_ratios) {
                    BenchPoint point;
                    point.scenario = "s" + std::to_string(size) + "-c" + std::to_string(changes) +
                                     "-r" + std::to_string(ratio);
                    point.params = Scenario{size, changes, ratio, seed};
                    auto part = bench_point(g, ops, point, bench_reps, orch);
                    rows.insert(rows.end(), part.begin(), part.end());
                }
        std::string csv = bench_csv(rows);
        if (bench_csv_path.empty())
            std::cout << csv;
        else
            write_file(bench_csv_path, csv);
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const TgsError& e) {
        json err{{"error", errc_name(e.code())}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        json err{{"error", "ERROR"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
}
