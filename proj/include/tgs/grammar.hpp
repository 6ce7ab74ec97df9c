#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tgs/pattern.hpp"

namespace tgs {

// A non-deleting triple rule: context elements form the LHS, context plus
// create elements the RHS. NACs are per-side pattern extensions.
struct TggRule {
    std::string name;
    Pattern pattern;

    Pattern lhs() const {
        Pattern p;
        p.name = name + "_LHS";
        for (auto& n : pattern.nodes)
            if (n.role == Role::Context) p.nodes.push_back(n);
        for (auto& e : pattern.edges)
            if (e.role == Role::Context) p.edges.push_back(e);
        for (auto& c : pattern.corrs)
            if (c.role == Role::Context) p.corrs.push_back(c);
        p.nacs = pattern.nacs;
        // only conditions fully over context elements constrain applicability
        for (auto& c : pattern.conds) {
            bool ctx = p.has_pid(c.lhs.pid) && (c.rhs_is_const || p.has_pid(c.rhs_slot.pid));
            if (ctx) p.conds.push_back(c);
        }
        return p;
    }

    std::vector<std::string> created_pids() const { return pattern.pids_with_role(Role::Create); }
    std::vector<std::string> context_pids() const { return pattern.pids_with_role(Role::Context); }
};

struct ShortcutDecl {
    std::string name;
    std::string replaced;
    std::string replacing;
    std::map<std::string, std::string> overlap;  // replaced pid -> replacing pid
};

struct Tgg {
    TypeTriple types;
    std::vector<TggRule> rules;
    std::vector<ShortcutDecl> shortcuts;

    const TggRule* rule(const std::string& n) const {
        for (auto& r : rules)
            if (r.name == n) return &r;
        return nullptr;
    }
    const ShortcutDecl* shortcut(const std::string& n) const {
        for (auto& s : shortcuts)
            if (s.name == n) return &s;
        return nullptr;
    }
};

namespace gtext {

struct Token {
    enum Kind { Ident, Int, Str, Sym, End } kind = End;
    std::string text;
    std::int64_t ival = 0;
    int line = 0, col = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return cur_; }
    Token next() {
        Token t = cur_;
        advance();
        return t;
    }

private:
    void advance() {
        skip_ws();
        cur_ = Token{};
        cur_.line = line_;
        cur_.col = col_;
        if (pos_ >= src_.size()) {
            cur_.kind = Token::End;
            return;
        }
        char c = src_[pos_];
        if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string id;
            while (pos_ < src_.size() &&
                   (isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                id += take();
            cur_.kind = Token::Ident;
            cur_.text = id;
            return;
        }
        if (isdigit(static_cast<unsigned char>(c))) {
            std::string num;
            while (pos_ < src_.size() && isdigit(static_cast<unsigned char>(src_[pos_])))
                num += take();
            cur_.kind = Token::Int;
            cur_.ival = std::stoll(num);
            cur_.text = num;
            return;
        }
        if (c == '"') {
            take();
            std::string s;
            while (pos_ < src_.size() && src_[pos_] != '"') {
                if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) take();
                s += take();
            }
            if (pos_ >= src_.size()) fail("unterminated string");
            take();
            cur_.kind = Token::Str;
            cur_.text = s;
            return;
        }
        for (const char* sym : {"<->", "->", "==", "++"}) {
            std::size_t n = std::string(sym).size();
            if (src_.compare(pos_, n, sym) == 0) {
                for (std::size_t i = 0; i < n; ++i) take();
                cur_.kind = Token::Sym;
                cur_.text = sym;
                return;
            }
        }
        static const std::string singles = "{}:;(),.-";
        if (singles.find(c) != std::string::npos) {
            cur_.kind = Token::Sym;
            cur_.text = std::string(1, take());
            return;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    void skip_ws() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') take();
            } else if (isspace(static_cast<unsigned char>(c))) {
                take();
            } else {
                break;
            }
        }
    }

    char take() {
        char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw TgsError(Errc::ParseError,
                       msg + " at " + std::to_string(line_) + ":" + std::to_string(col_));
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token cur_;
};

class Parser {
public:
    explicit Parser(const std::string& src) : lex_(src) {}

    Tgg parse() {
        Tgg g;
        while (lex_.peek().kind != Token::End) {
            skip_seps();
            if (lex_.peek().kind == Token::End) break;
            std::string kw = expect_ident("top-level keyword");
            if (kw == "metamodel")
                parse_metamodel(g);
            else if (kw == "rule")
                parse_rule(g);
            else if (kw == "shortcut")
                parse_shortcut(g);
            else
                fail("unknown section '" + kw + "'");
        }
        validate(g);
        return g;
    }

private:
    void parse_metamodel(Tgg& g) {
        expect_sym("{");
        while (!try_sym("}")) {
            skip_seps();
            if (try_sym("}")) break;
            std::string kw = expect_ident("metamodel entry");
            if (kw == "corr") {
                CorrTypeDecl d;
                d.name = expect_ident("corr type name");
                expect_sym(":");
                d.src_type = expect_ident("source node type");
                expect_sym("<->");
                d.trg_type = expect_ident("target node type");
                g.types.add_corr_type(std::move(d));
                continue;
            }
            auto side = side_from_name(kw);
            if (!side || *side == Side::Corr) fail("expected src|trg|corr, got '" + kw + "'");
            std::string what = expect_ident("node|edge");
            if (what == "node") {
                NodeTypeDecl d;
                d.side = *side;
                d.name = expect_ident("node type name");
                if (try_sym(":")) d.super = expect_ident("super type name");
                if (try_sym("{")) {
                    while (!try_sym("}")) {
                        skip_seps();
                        if (try_sym("}")) break;
                        std::string an = expect_ident("attribute name");
                        expect_sym(":");
                        std::string kind = expect_ident("string|integer");
                        if (kind != "string" && kind != "integer")
                            fail("attribute kind must be string or integer");
                        d.attrs[an] = kind == "string" ? AttrKind::String : AttrKind::Integer;
                    }
                }
                g.types.add_node_type(std::move(d));
            } else if (what == "edge") {
                EdgeTypeDecl d;
                d.side = *side;
                d.name = expect_ident("edge type name");
                expect_sym(":");
                d.from_type = expect_ident("endpoint type");
                expect_sym("->");
                d.to_type = expect_ident("endpoint type");
                g.types.add_edge_type(std::move(d));
            } else {
                fail("expected node or edge, got '" + what + "'");
            }
        }
    }

    void parse_rule(Tgg& g) {
        TggRule r;
        r.name = expect_ident("rule name");
        r.pattern.name = r.name;
        expect_sym("{");
        while (!try_sym("}")) {
            skip_seps();
            if (try_sym("}")) break;
            bool create = try_sym("++");
            Token t = lex_.peek();
            std::string kw = expect_ident("rule entry");
            if (kw == "eq") {
                if (create) fail("'++' before eq");
                r.pattern.conds.push_back(parse_cond());
            } else if (kw == "nac") {
                if (create) fail("'++' before nac");
                r.pattern.nacs.push_back(parse_nac(r));
            } else if (kw == "corr") {
                PatternCorr c;
                c.role = create ? Role::Create : Role::Context;
                c.pid = expect_ident("corr element name");
                expect_sym(":");
                c.type = expect_ident("corr type");
                expect_sym("(");
                c.src = expect_ident("source element");
                expect_sym(",");
                c.trg = expect_ident("target element");
                expect_sym(")");
                r.pattern.corrs.push_back(std::move(c));
            } else if (kw == "src" || kw == "trg") {
                Side side = kw == "src" ? Side::Source : Side::Target;
                std::string pid = expect_ident("element name");
                expect_sym(":");
                parse_element_tail(r.pattern.nodes, r.pattern.edges, side, pid,
                                   create ? Role::Create : Role::Context);
            } else {
                fail_at(t, "expected src|trg|corr|eq|nac, got '" + kw + "'");
            }
        }
        g.rules.push_back(std::move(r));
    }

    // After "pid:" either "Type" (node) or "from -type-> to" (edge).
    template <typename Nodes, typename Edges>
    void parse_element_tail(Nodes& nodes, Edges& edges, Side side, const std::string& pid,
                            Role role) {
        std::string first = expect_ident("type or endpoint");
        if (try_sym("-")) {
            PatternEdge e;
            e.pid = pid;
            e.side = side;
            e.role = role;
            e.from = first;
            e.type = expect_ident("edge type");
            expect_sym("->");
            e.to = expect_ident("endpoint");
            edges.push_back(std::move(e));
        } else {
            PatternNode n;
            n.pid = pid;
            n.side = side;
            n.role = role;
            n.type = first;
            nodes.push_back(std::move(n));
        }
    }

    Nac parse_nac(const TggRule& r) {
        Nac n;
        std::string side = expect_ident("nac side");
        auto s = side_from_name(side);
        if (!s || *s == Side::Corr) fail("nac side must be src or trg");
        n.side = *s;
        n.name = r.name + "_nac" + std::to_string(r.pattern.nacs.size());
        expect_sym("{");
        while (!try_sym("}")) {
            skip_seps();
            if (try_sym("}")) break;
            std::string pid = expect_ident("nac element name");
            expect_sym(":");
            parse_element_tail(n.nodes, n.edges, n.side, pid, Role::Context);
        }
        return n;
    }

    AttrCond parse_cond() {
        AttrCond c;
        c.lhs.pid = expect_ident("element");
        expect_sym(".");
        c.lhs.attr = expect_ident("attribute");
        expect_sym("==");
        Token t = lex_.peek();
        if (t.kind == Token::Int) {
            lex_.next();
            c.rhs_is_const = true;
            c.rhs_const = t.ival;
        } else if (t.kind == Token::Str) {
            lex_.next();
            c.rhs_is_const = true;
            c.rhs_const = t.text;
        } else {
            c.rhs_slot.pid = expect_ident("element or constant");
            expect_sym(".");
            c.rhs_slot.attr = expect_ident("attribute");
        }
        return c;
    }

    void parse_shortcut(Tgg& g) {
        ShortcutDecl d;
        d.name = expect_ident("shortcut name");
        expect_sym(":");
        d.replaced = expect_ident("replaced rule");
        expect_sym("->");
        d.replacing = expect_ident("replacing rule");
        std::string kw = expect_ident("overlap");
        if (kw != "overlap") fail("expected 'overlap'");
        expect_sym("{");
        while (!try_sym("}")) {
            skip_seps();
            if (try_sym("}")) break;
            std::string a = expect_ident("replaced element");
            expect_sym("->");
            std::string b = expect_ident("replacing element");
            d.overlap[a] = b;
            try_sym(",");
        }
        g.shortcuts.push_back(std::move(d));
    }

    // Structure validation; throws TYPE-ERROR naming the offending element.
    void validate(Tgg& g) {
        auto tdiags = g.types.validate();
        for (auto& d : tdiags)
            if (d.is_error())
                throw TgsError(Errc::TypeError, d.kind + " " + d.element + ": " + d.detail);
        std::set<std::string> rule_names;
        for (auto& r : g.rules) {
            if (!rule_names.insert(r.name).second)
                throw TgsError(Errc::TypeError, "duplicate rule name " + r.name);
            validate_rule(g, r);
        }
        for (auto& sc : g.shortcuts) {
            if (!g.rule(sc.replaced))
                throw TgsError(Errc::TypeError, "shortcut " + sc.name + ": unknown rule " + sc.replaced);
            if (!g.rule(sc.replacing))
                throw TgsError(Errc::TypeError, "shortcut " + sc.name + ": unknown rule " + sc.replacing);
        }
    }

    void validate_rule(const Tgg& g, const TggRule& r) {
        auto err = [&](const std::string& elem, const std::string& msg) {
            throw TgsError(Errc::TypeError, "rule " + r.name + ", element " + elem + ": " + msg);
        };
        std::set<std::string> pids;
        for (auto& pid : r.pattern.pids())
            if (!pids.insert(pid).second) err(pid, "duplicate element name");
        for (auto& n : r.pattern.nodes) {
            auto* d = g.types.node_type(n.type);
            if (!d) err(n.pid, "unknown node type " + n.type);
            if (d->side != n.side) err(n.pid, "node type on wrong side");
        }
        for (auto& e : r.pattern.edges) {
            auto* d = g.types.edge_type(e.type);
            if (!d) err(e.pid, "unknown edge type " + e.type);
            if (d->side != e.side) err(e.pid, "edge type on wrong side");
            auto* f = r.pattern.find_node(e.from);
            auto* t = r.pattern.find_node(e.to);
            if (!f || !t) err(e.pid, "edge endpoint not declared");
            if (f->side != e.side || t->side != e.side) err(e.pid, "edge endpoint on wrong side");
            if (!g.types.is_subtype(f->type, d->from_type)) err(e.pid, "source endpoint type");
            if (!g.types.is_subtype(t->type, d->to_type)) err(e.pid, "target endpoint type");
            if (e.role == Role::Context && (f->role != Role::Context || t->role != Role::Context))
                err(e.pid, "context edge with created endpoint");
        }
        for (auto& c : r.pattern.corrs) {
            auto* d = g.types.corr_type(c.type);
            if (!d) err(c.pid, "unknown corr type " + c.type);
            auto* s = r.pattern.find_node(c.src);
            auto* t = r.pattern.find_node(c.trg);
            if (!s || !t) err(c.pid, "corr endpoint not declared");
            if (s->side != Side::Source || t->side != Side::Target)
                err(c.pid, "corr endpoints must be src and trg nodes");
            if (!g.types.is_subtype(s->type, d->src_type)) err(c.pid, "corr src endpoint type");
            if (!g.types.is_subtype(t->type, d->trg_type)) err(c.pid, "corr trg endpoint type");
            if (c.role == Role::Context && (s->role != Role::Context || t->role != Role::Context))
                err(c.pid, "context corr with created endpoint");
        }
        for (auto& c : r.pattern.conds) {
            auto check_slot = [&](const AttrSlot& s, const AttrKind* other) -> const AttrKind* {
                auto* n = r.pattern.find_node(s.pid);
                if (!n) err(s.pid, "equation references unknown element");
                auto* k = g.types.attr_kind(n->type, s.attr);
                if (!k) err(s.pid, "no attribute " + s.attr + " on " + n->type);
                if (other && *other != *k) err(s.pid, "equation over mixed attribute kinds");
                return k;
            };
            const AttrKind* k = check_slot(c.lhs, nullptr);
            if (c.rhs_is_const) {
                bool is_str = std::holds_alternative<std::string>(c.rhs_const);
                if ((*k == AttrKind::String) != is_str) err(c.lhs.pid, "constant kind mismatch");
            } else {
                check_slot(c.rhs_slot, k);
            }
        }
        for (auto& nac : r.pattern.nacs) {
            std::set<std::string> local;
            for (auto& n : nac.nodes) {
                if (n.side != nac.side) err(n.pid, "nac element on wrong side");
                if (!g.types.node_type(n.type)) err(n.pid, "unknown node type " + n.type);
                if (pids.count(n.pid)) err(n.pid, "nac element shadows rule element");
                local.insert(n.pid);
            }
            for (auto& e : nac.edges) {
                auto* d = g.types.edge_type(e.type);
                if (!d) err(e.pid, "unknown edge type " + e.type);
                for (const std::string* ep : {&e.from, &e.to}) {
                    if (local.count(*ep)) continue;
                    auto* bn = r.pattern.find_node(*ep);
                    if (!bn) err(e.pid, "nac edge endpoint not declared");
                    if (bn->side != nac.side) err(e.pid, "nac edge endpoint on wrong side");
                }
            }
        }
    }

    void skip_seps() {
        while (lex_.peek().kind == Token::Sym && lex_.peek().text == ";") lex_.next();
    }

    std::string expect_ident(const std::string& what) {
        Token t = lex_.next();
        if (t.kind != Token::Ident) fail_at(t, "expected " + what);
        return t.text;
    }
    void expect_sym(const std::string& s) {
        Token t = lex_.next();
        if (t.kind != Token::Sym || t.text != s) fail_at(t, "expected '" + s + "'");
    }
    bool try_sym(const std::string& s) {
        if (lex_.peek().kind == Token::Sym && lex_.peek().text == s) {
            lex_.next();
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) { fail_at(lex_.peek(), msg); }
    [[noreturn]] void fail_at(const Token& t, const std::string& msg) {
        throw TgsError(Errc::ParseError,
                       msg + " at " + std::to_string(t.line) + ":" + std::to_string(t.col));
    }

    Lexer lex_;
};

}  // namespace gtext

inline Tgg parse_grammar(const std::string& text) { return gtext::Parser(text).parse(); }

namespace gtext {

inline std::string print_attr_value(const AttrValue& v) {
    if (std::holds_alternative<std::string>(v)) return "\"" + std::get<std::string>(v) + "\"";
    return std::to_string(std::get<std::int64_t>(v));
}

inline void print_elements(std::ostringstream& os, const Pattern& p, const std::string& indent,
                           bool with_side = true) {
    auto prefix = [&](Role r) { return r == Role::Create ? "++" : ""; };
    for (auto& n : p.nodes) {
        os << indent << prefix(n.role);
        if (with_side) os << side_name(n.side) << " ";
        os << n.pid << ": " << n.type << "\n";
    }
    for (auto& e : p.edges) {
        os << indent << prefix(e.role);
        if (with_side) os << side_name(e.side) << " ";
        os << e.pid << ": " << e.from << " -" << e.type << "-> " << e.to << "\n";
    }
    for (auto& c : p.corrs)
        os << indent << prefix(c.role) << "corr " << c.pid << ": " << c.type << "(" << c.src << ", "
           << c.trg << ")\n";
}

}  // namespace gtext

inline std::string print_grammar(const Tgg& g) {
    std::ostringstream os;
    os << "metamodel {\n";
    for (auto& [name, d] : g.types.node_types()) {
        os << "  " << side_name(d.side) << " node " << name;
        if (!d.super.empty()) os << " : " << d.super;
        if (!d.attrs.empty()) {
            os << " {";
            bool first = true;
            for (auto& [an, ak] : d.attrs) {
                os << (first ? " " : "; ") << an << ": "
                   << (ak == AttrKind::String ? "string" : "integer");
                first = false;
            }
            os << " }";
        }
        os << "\n";
    }
    for (auto& [name, d] : g.types.edge_types())
        os << "  " << side_name(d.side) << " edge " << name << ": " << d.from_type << " -> "
           << d.to_type << "\n";
    for (auto& [name, d] : g.types.corr_types())
        os << "  corr " << name << ": " << d.src_type << " <-> " << d.trg_type << "\n";
    os << "}\n";
    for (auto& r : g.rules) {
        os << "\nrule " << r.name << " {\n";
        gtext::print_elements(os, r.pattern, "  ");
        for (auto& c : r.pattern.conds) {
            os << "  eq " << c.lhs.pid << "." << c.lhs.attr << " == ";
            if (c.rhs_is_const)
                os << gtext::print_attr_value(c.rhs_const);
            else
                os << c.rhs_slot.pid << "." << c.rhs_slot.attr;
            os << "\n";
        }
        for (auto& nac : r.pattern.nacs) {
            os << "  nac " << side_name(nac.side) << " {\n";
            Pattern np;
            np.nodes = nac.nodes;
            np.edges = nac.edges;
            gtext::print_elements(os, np, "    ", false);
            os << "  }\n";
        }
        os << "}\n";
    }
    for (auto& sc : g.shortcuts) {
        os << "\nshortcut " << sc.name << ": " << sc.replaced << " -> " << sc.replacing
           << " overlap {";
        bool first = true;
        for (auto& [a, b] : sc.overlap) {
            os << (first ? " " : ", ") << a << " -> " << b;
            first = false;
        }
        os << " }\n";
    }
    return os.str();
}

}  // namespace tgs
