#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tgs/sync.hpp"

namespace tgs {

enum class FragmentStep { LocalCc, Translate, Repair, Rollback, Propagate, ResolveConflict, CleanUp };

inline const char* fragment_step_name(FragmentStep s) {
    switch (s) {
        case FragmentStep::LocalCc: return "local-cc";
        case FragmentStep::Translate: return "translate";
        case FragmentStep::Repair: return "repair";
        case FragmentStep::Rollback: return "rollback";
        case FragmentStep::Propagate: return "propagate";
        case FragmentStep::ResolveConflict: return "resolve-conflict";
        case FragmentStep::CleanUp: return "clean-up";
    }
    return "?";
}

inline FragmentStep fragment_step_from_name(const std::string& s) {
    if (s == "local-cc") return FragmentStep::LocalCc;
    if (s == "translate") return FragmentStep::Translate;
    if (s == "repair") return FragmentStep::Repair;
    if (s == "rollback") return FragmentStep::Rollback;
    if (s == "propagate") return FragmentStep::Propagate;
    if (s == "resolve-conflict") return FragmentStep::ResolveConflict;
    if (s == "clean-up") return FragmentStep::CleanUp;
    throw TgsError(Errc::OrchInvalid, "unknown fragment '" + s + "'");
}

struct ResolveConfig {
    bool pre_repair = false;
    Strategy strategy = Strategy::TakeSource;
    enum class Post { None, Translate, Propagate } post = Post::None;
};

struct Evaluator {
    std::string when;  // predicate over conflict counters, e.g. "deletedSrc > deletedTrg"
    ResolveConfig config;
};

struct Orchestration {
    std::vector<FragmentStep> steps;
    std::map<std::string, ResolveConfig> resolve;  // keyed by conflict kind name
    std::vector<Evaluator> evaluators;
};

// The running-example orchestration:
// LocalCC -> Translate -> Repair -> Resolve{Repair -> TakeSource -> Propagate}
// -> Propagate -> CleanUp.
inline Orchestration default_orchestration() {
    Orchestration o;
    o.steps = {FragmentStep::LocalCc,   FragmentStep::Translate,
               FragmentStep::Repair,    FragmentStep::ResolveConflict,
               FragmentStep::Propagate, FragmentStep::CleanUp};
    ResolveConfig cfg;
    cfg.pre_repair = true;
    cfg.strategy = Strategy::TakeSource;
    cfg.post = ResolveConfig::Post::Propagate;
    for (const char* k : {"preserve-delete", "correspondence-preservation", "attribute-change"})
        o.resolve[k] = cfg;
    return o;
}

inline void validate_orchestration(const Orchestration& o) {
    std::optional<std::size_t> local_cc, first_translate, cleanup;
    for (std::size_t i = 0; i < o.steps.size(); ++i) {
        switch (o.steps[i]) {
            case FragmentStep::LocalCc:
                if (!local_cc) local_cc = i;
                break;
            case FragmentStep::Translate:
                if (!first_translate) first_translate = i;
                break;
            case FragmentStep::CleanUp:
                cleanup = i;
                break;
            default: break;
        }
    }
    if (local_cc && first_translate && *local_cc > *first_translate)
        throw TgsError(Errc::OrchInvalid, "local-cc must precede translate");
    if (cleanup && *cleanup != o.steps.size() - 1)
        throw TgsError(Errc::OrchInvalid, "clean-up must be the last step");
}

namespace detail {

// Tiny predicate language over conflict counters:
//   expr := or ; or := and ('||' and)* ; and := cmp ('&&' cmp)*
//   cmp := '!' cmp | operand (op operand)? ; op in { > < >= <= == != }
//   operand := int | ident | 'string' | '(' expr ')'
class PredicateParser {
public:
    PredicateParser(const std::string& src, const std::map<std::string, std::int64_t>& vars,
                    const std::string& kind)
        : src_(src), vars_(vars), kind_(kind) {}

    bool evaluate() {
        pos_ = 0;
        bool v = parse_or();
        skip_ws();
        if (pos_ != src_.size())
            throw TgsError(Errc::OrchInvalid, "trailing input in predicate '" + src_ + "'");
        return v;
    }

private:
    struct Value {
        bool is_str = false;
        std::int64_t num = 0;
        std::string str;
    };

    bool parse_or() {
        bool v = parse_and();
        while (eat("||")) v = parse_and() || v;
        return v;
    }
    bool parse_and() {
        bool v = parse_cmp();
        while (eat("&&")) v = parse_cmp() && v;
        return v;
    }
    bool parse_cmp() {
        skip_ws();
        if (eat("!")) return !parse_cmp();
        if (peek('(')) {
            eat("(");
            bool v = parse_or();
            if (!eat(")")) throw TgsError(Errc::OrchInvalid, "missing ')' in predicate");
            return v;
        }
        Value a = parse_operand();
        skip_ws();
        for (const char* op : {">=", "<=", "==", "!=", ">", "<"}) {
            if (eat(op)) {
                Value b = parse_operand();
                return compare(a, b, op);
            }
        }
        if (a.is_str) throw TgsError(Errc::OrchInvalid, "string without comparison");
        return a.num != 0;
    }
    Value parse_operand() {
        skip_ws();
        Value v;
        if (pos_ < src_.size() && src_[pos_] == '\'') {
            ++pos_;
            while (pos_ < src_.size() && src_[pos_] != '\'') v.str += src_[pos_++];
            if (pos_ >= src_.size()) throw TgsError(Errc::OrchInvalid, "unterminated string");
            ++pos_;
            v.is_str = true;
            return v;
        }
        if (pos_ < src_.size() && (isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '-')) {
            std::size_t start = pos_;
            if (src_[pos_] == '-') ++pos_;
            while (pos_ < src_.size() && isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            v.num = std::stoll(src_.substr(start, pos_ - start));
            return v;
        }
        std::string id;
        while (pos_ < src_.size() &&
               (isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            id += src_[pos_++];
        if (id.empty()) throw TgsError(Errc::OrchInvalid, "bad predicate operand in '" + src_ + "'");
        if (id == "kind") {
            v.is_str = true;
            v.str = kind_;
            return v;
        }
        auto it = vars_.find(id);
        if (it == vars_.end())
            throw TgsError(Errc::OrchInvalid, "unknown predicate variable '" + id + "'");
        v.num = it->second;
        return v;
    }
    bool compare(const Value& a, const Value& b, const std::string& op) {
        if (a.is_str || b.is_str) {
            if (!(a.is_str && b.is_str))
                throw TgsError(Errc::OrchInvalid, "comparing string with number");
            if (op == "==") return a.str == b.str;
            if (op == "!=") return a.str != b.str;
            throw TgsError(Errc::OrchInvalid, "strings support only == and !=");
        }
        if (op == ">") return a.num > b.num;
        if (op == "<") return a.num < b.num;
        if (op == ">=") return a.num >= b.num;
        if (op == "<=") return a.num <= b.num;
        if (op == "==") return a.num == b.num;
        return a.num != b.num;
    }

    void skip_ws() {
        while (pos_ < src_.size() && isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool peek(char c) {
        skip_ws();
        return pos_ < src_.size() && src_[pos_] == c;
    }
    bool eat(const std::string& tok) {
        skip_ws();
        if (src_.compare(pos_, tok.size(), tok) == 0) {
            // avoid eating '>' of '>='
            if ((tok == ">" || tok == "<") && pos_ + 1 < src_.size() && src_[pos_ + 1] == '=')
                return false;
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    const std::string& src_;
    const std::map<std::string, std::int64_t>& vars_;
    const std::string& kind_;
    std::size_t pos_ = 0;
};

}  // namespace detail

// Executes the orchestration on an initialized engine.
inline void orchestrate(SyncEngine& engine, const Orchestration& orch) {
    validate_orchestration(orch);
    bool has_cleanup = false;
    for (auto s : orch.steps)
        if (s == FragmentStep::CleanUp) has_cleanup = true;
    std::vector<std::string> no_handler;
    for (auto step : orch.steps) {
        switch (step) {
            case FragmentStep::LocalCc: engine.frag_local_cc(); break;
            case FragmentStep::Translate: engine.frag_translate(); break;
            case FragmentStep::Repair: engine.frag_repair(); break;
            case FragmentStep::Rollback: engine.frag_rollback(); break;
            case FragmentStep::Propagate: engine.frag_propagate(); break;
            case FragmentStep::CleanUp: engine.frag_cleanup(); break;
            case FragmentStep::ResolveConflict: {
                for (std::size_t idx : engine.pending_conflicts_in_order()) {
                    const Conflict& c = engine.conflicts()[idx];
                    auto stats = engine.conflict_stats(c);
                    std::string kind = conflict_kind_name(c.kind);
                    const ResolveConfig* cfg = nullptr;
                    for (auto& ev : orch.evaluators) {
                        detail::PredicateParser p(ev.when, stats, kind);
                        if (p.evaluate()) {
                            cfg = &ev.config;
                            break;
                        }
                    }
                    if (!cfg) {
                        auto it = orch.resolve.find(kind);
                        if (it != orch.resolve.end()) cfg = &it->second;
                    }
                    if (!cfg) {
                        no_handler.push_back(kind + " at " + c.anchor);
                        engine.note_unresolved(kind + " at " + c.anchor);
                        continue;
                    }
                    SyncEngine::ResolvePlan plan;
                    plan.pre_repair = cfg->pre_repair;
                    plan.strategy = cfg->strategy;
                    plan.post = cfg->post == ResolveConfig::Post::Translate
                                    ? SyncEngine::ResolvePlan::Post::Translate
                                : cfg->post == ResolveConfig::Post::Propagate
                                    ? SyncEngine::ResolvePlan::Post::Propagate
                                    : SyncEngine::ResolvePlan::Post::None;
                    engine.resolve_conflict(idx, plan);
                }
                break;
            }
        }
    }
    if (!no_handler.empty() && !has_cleanup)
        throw TgsError(Errc::UnresolvedConflict,
                       "no handler for: " + no_handler.front() +
                           (no_handler.size() > 1 ? " (and others)" : ""));
}

struct RunResult {
    TripleGraph result;
    SyncReport report;
};

// Full synchronization: annotate, detect, restore per the orchestration.
inline RunResult run_sync(const Tgg& g, const OpRuleSet& ops, const TripleGraph& base_host,
                          const PrecedenceGraph& pg, const Delta& ds, const Delta& dt,
                          const Orchestration& orch) {
    SyncEngine engine(g, ops, base_host, pg, ds, dt);
    orchestrate(engine, orch);
    RunResult out;
    out.result = engine.host();
    out.report = engine.report();
    return out;
}

}  // namespace tgs
