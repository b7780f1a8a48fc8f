#include "parser.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace otsc {

namespace {

// Infix precedence, loosest first. Unary minus and `not` bind tightest.
int infix_prec(const Token& t) {
    if (t.kind == TokKind::Ident) {
        if (t.text == "or") return 4;
        if (t.text == "and") return 6;
        return -1;
    }
    if (t.kind != TokKind::Sym) return -1;
    const std::string& s = t.text;
    if (s == "=") return -1; // equation separator, never an infix op
    if (s == "==" || s == "=/=") return 10;
    if (s == ">=" || s == ">") return 20;
    if (s == "+" || s == "-") return 30;
    return 25; // other declared infix operators
}

class Parser {
public:
    Parser(const std::vector<Token>& toks, size_t& pos, DiagnosticSink& sink)
        : toks_(toks), pos_(pos), sink_(sink) {}

    std::optional<SpecModule> module() {
        SpecModule m;
        const Token& head = cur();
        if (head.kind != TokKind::KwModStar && head.kind != TokKind::KwModBang) {
            err("expected 'mod*' or 'mod!'");
            return std::nullopt;
        }
        m.tight = head.kind == TokKind::KwModBang;
        m.span = head.span;
        next();
        if (!expect(TokKind::Ident, "module name")) return std::nullopt;
        m.name = prev().text;
        if (!expect(TokKind::LBrace, "'{'")) return std::nullopt;
        while (true) {
            switch (cur().kind) {
            case TokKind::RBrace: next(); return m;
            case TokKind::Eof:
                sink_.error("unterminated-module", "module '" + m.name + "' has no closing '}'",
                            cur().span);
                return std::nullopt;
            case TokKind::KwPr:
                if (!import_decl(m)) return std::nullopt;
                break;
            case TokKind::LBracket:
            case TokKind::HLBracket:
                if (!sort_decl(m)) return std::nullopt;
                break;
            case TokKind::KwOp:
            case TokKind::KwOps:
            case TokKind::KwBop:
            case TokKind::KwBops:
                if (!op_decl(m)) return std::nullopt;
                break;
            case TokKind::KwVar:
            case TokKind::KwVars:
                if (!var_decl(m)) return std::nullopt;
                break;
            case TokKind::KwEq:
            case TokKind::KwCeq:
                if (!equation(m)) return std::nullopt;
                break;
            default:
                err("expected a declaration (pr, sort, op, bop, var, eq, ceq) or '}'");
                return std::nullopt;
            }
        }
    }

    std::optional<Term> term_entry() { return term(0); }

private:
    const Token& cur() const { return toks_[std::min(pos_, toks_.size() - 1)]; }
    const Token& prev() const { return toks_[pos_ - 1]; }
    const Token& peek(size_t off = 1) const {
        return toks_[std::min(pos_ + off, toks_.size() - 1)];
    }
    void next() {
        if (pos_ < toks_.size() - 1) ++pos_;
    }

    void err(const std::string& what) {
        sink_.error("syntax-error", what + ", found '" +
                                        (cur().kind == TokKind::Eof ? "<eof>" : cur().text) + "'",
                    cur().span);
        // one syntax error per module: skip to eof
        pos_ = toks_.size() - 1;
    }

    bool expect(TokKind kind, const std::string& what) {
        if (cur().kind != kind) {
            err("expected " + what);
            return false;
        }
        next();
        return true;
    }

    bool import_decl(SpecModule& m) {
        next(); // pr
        if (!expect(TokKind::LParen, "'(' after pr")) return false;
        if (!expect(TokKind::Ident, "module name")) return false;
        m.imports.push_back(prev().text);
        return expect(TokKind::RParen, "')'");
    }

    bool sort_decl(SpecModule& m) {
        bool hidden = cur().kind == TokKind::HLBracket;
        SourceSpan sp = cur().span;
        TokKind close = hidden ? TokKind::HRBracket : TokKind::RBracket;
        next();
        std::vector<std::string> names;
        while (cur().kind == TokKind::Ident) {
            names.push_back(cur().text);
            next();
            if (cur().kind == TokKind::Comma) next();
        }
        if (names.empty()) {
            err("expected sort name");
            return false;
        }
        std::vector<std::string> supers;
        if (cur().kind == TokKind::Sym && cur().text == "<") {
            next();
            while (cur().kind == TokKind::Ident) {
                supers.push_back(cur().text);
                next();
                if (cur().kind == TokKind::Comma) next();
            }
            if (supers.empty()) {
                err("expected supersort name after '<'");
                return false;
            }
        }
        if (!expect(close, hidden ? "']*'" : "']'")) return false;
        for (auto& n : names) {
            SortDecl s;
            s.name = n;
            s.kind = hidden ? SortKind::Hidden : SortKind::Visible;
            s.supersorts = supers;
            s.span = sp;
            m.sorts.push_back(std::move(s));
        }
        return true;
    }

    bool op_decl(SpecModule& m) {
        bool behavioral = cur().kind == TokKind::KwBop || cur().kind == TokKind::KwBops;
        SourceSpan sp = cur().span;
        next();
        std::vector<std::string> names;
        while (cur().kind == TokKind::Ident || cur().kind == TokKind::OpName) {
            names.push_back(cur().text);
            next();
        }
        if (names.empty()) {
            err("expected operator name");
            return false;
        }
        if (!expect(TokKind::Colon, "':' in operator declaration")) return false;
        std::vector<std::string> arity;
        while (cur().kind == TokKind::Ident) {
            arity.push_back(cur().text);
            next();
        }
        if (!expect(TokKind::Arrow, "'->' in operator declaration")) return false;
        if (!expect(TokKind::Ident, "result sort")) return false;
        std::string coarity = prev().text;
        for (auto& n : names) {
            OperatorDecl op;
            op.name = n;
            op.arity = arity;
            op.coarity = coarity;
            op.behavioral = behavioral;
            op.span = sp;
            m.operators.push_back(std::move(op));
        }
        return true;
    }

    bool var_decl(SpecModule& m) {
        SourceSpan sp = cur().span;
        next();
        std::vector<std::string> names;
        while (cur().kind == TokKind::Ident) {
            names.push_back(cur().text);
            next();
        }
        if (names.empty()) {
            err("expected variable name");
            return false;
        }
        if (!expect(TokKind::Colon, "':' in variable declaration")) return false;
        if (!expect(TokKind::Ident, "variable sort")) return false;
        for (auto& n : names) m.variables.push_back({n, prev().text, sp});
        return true;
    }

    bool equation(SpecModule& m) {
        bool conditional = cur().kind == TokKind::KwCeq;
        SourceSpan sp = cur().span;
        next();
        auto lhs = term(0);
        if (!lhs) return false;
        if (cur().kind != TokKind::Sym || cur().text != "=") {
            err("expected '=' in equation");
            return false;
        }
        next();
        auto rhs = term(0);
        if (!rhs) return false;
        Equation e;
        e.lhs = std::move(*lhs);
        e.rhs = std::move(*rhs);
        e.span = sp;
        if (conditional) {
            if (!expect(TokKind::KwIf, "'if' in conditional equation")) return false;
            auto cond = term(0);
            if (!cond) return false;
            e.condition = std::move(*cond);
        } else if (cur().kind == TokKind::KwIf) {
            err("'if' in an unconditional equation (use ceq)");
            return false;
        }
        if (cur().kind != TokKind::Period) {
            err("expected ' .' terminating the equation");
            return false;
        }
        if (!cur().space_before) {
            sink_.error("syntax-error", "equation terminator '.' must be preceded by whitespace",
                        cur().span);
            pos_ = toks_.size() - 1;
            return false;
        }
        next();
        m.equations.push_back(std::move(e));
        return true;
    }

    std::optional<Term> term(int min_prec) {
        auto lhs = unary();
        if (!lhs) return std::nullopt;
        while (true) {
            int prec = infix_prec(cur());
            if (prec < 0 || prec <= min_prec) break;
            Token op = cur();
            next();
            auto rhs = term(prec);
            if (!rhs) return std::nullopt;
            std::string name = op.kind == TokKind::Ident ? "_" + op.text + "_"
                                                         : "_" + op.text + "_";
            Term t = Term::apply(name, {std::move(*lhs), std::move(*rhs)},
                                 join_spans(op.span, rhs->span));
            lhs = std::move(t);
        }
        return lhs;
    }

    std::optional<Term> unary() {
        if (cur().kind == TokKind::Sym && cur().text == "-") {
            SourceSpan sp = cur().span;
            next();
            auto operand = unary();
            if (!operand) return std::nullopt;
            if (operand->is_int())
                return Term::int_lit(-operand->value, join_spans(sp, operand->span));
            return Term::apply("-_", {std::move(*operand)}, sp);
        }
        if (cur().kind == TokKind::Ident && cur().text == "not") {
            SourceSpan sp = cur().span;
            next();
            auto operand = unary();
            if (!operand) return std::nullopt;
            return Term::apply("not_", {std::move(*operand)}, sp);
        }
        return primary();
    }

    std::optional<Term> primary() {
        const Token& t = cur();
        switch (t.kind) {
        case TokKind::IntLit: {
            next();
            return Term::int_lit(prev().int_value, prev().span);
        }
        case TokKind::LParen: {
            next();
            auto inner = term(0);
            if (!inner) return std::nullopt;
            if (!expect(TokKind::RParen, "')'")) return std::nullopt;
            return inner;
        }
        case TokKind::Ident: {
            std::string name = t.text;
            SourceSpan sp = t.span;
            next();
            std::vector<Term> args;
            if (cur().kind == TokKind::LParen) {
                next();
                if (cur().kind != TokKind::RParen) {
                    while (true) {
                        auto a = term(0);
                        if (!a) return std::nullopt;
                        args.push_back(std::move(*a));
                        if (cur().kind == TokKind::Comma) {
                            next();
                            continue;
                        }
                        break;
                    }
                }
                if (!expect(TokKind::RParen, "')' closing argument list")) return std::nullopt;
            }
            return Term::apply(std::move(name), std::move(args), sp);
        }
        default:
            err("expected a term");
            return std::nullopt;
        }
    }

    const std::vector<Token>& toks_;
    size_t& pos_;
    DiagnosticSink& sink_;
};

struct RawFile {
    std::string name;
    std::string text;
};

ModuleSet assemble(std::vector<SpecModule> user_modules, DiagnosticSink& sink) {
    ModuleSet set;
    std::map<std::string, SpecModule> by_name;
    std::vector<std::string> order; // declaration order for determinism
    for (auto& m : prelude::modules()) {
        order.push_back(m.name);
        by_name.emplace(m.name, std::move(m));
    }
    for (auto& m : user_modules) {
        if (by_name.count(m.name)) {
            sink.error("duplicate-module-name", "module '" + m.name + "' is declared twice",
                       m.span);
            continue;
        }
        // every module can use Bool
        if (std::find(m.imports.begin(), m.imports.end(), prelude::kBool) == m.imports.end())
            m.imports.push_back(prelude::kBool);
        order.push_back(m.name);
        by_name.emplace(m.name, std::move(m));
    }

    // unresolved imports
    for (auto& [name, m] : by_name)
        for (const auto& imp : m.imports)
            if (!by_name.count(imp))
                sink.error("unresolved-import",
                           "module '" + name + "' imports unknown module '" + imp + "'", m.span);

    // Kahn's algorithm, lexicographic tie-break for deterministic output
    std::map<std::string, std::set<std::string>> deps;
    std::map<std::string, int> indegree;
    for (auto& [name, m] : by_name) {
        indegree.emplace(name, 0);
        for (const auto& imp : m.imports)
            if (by_name.count(imp)) deps[imp].insert(name);
    }
    for (auto& [from, tos] : deps)
        for (const auto& to : tos) indegree[to] += 1;
    std::set<std::string> ready;
    for (auto& [name, deg] : indegree)
        if (deg == 0) ready.insert(name);
    std::vector<std::string> sorted;
    while (!ready.empty()) {
        std::string cur = *ready.begin();
        ready.erase(ready.begin());
        sorted.push_back(cur);
        for (const auto& nxt : deps[cur])
            if (--indegree[nxt] == 0) ready.insert(nxt);
    }
    if (sorted.size() != by_name.size()) {
        std::vector<std::string> cyclic;
        for (auto& [name, deg] : indegree)
            if (deg > 0) cyclic.push_back(name);
        std::string list;
        for (size_t i = 0; i < cyclic.size(); ++i) list += (i ? ", " : "") + cyclic[i];
        sink.error("cyclic-import", "import cycle involving: " + list);
        for (const auto& name : cyclic) sorted.push_back(name); // keep going, partial set
    }
    // prelude first, then user modules in dependency order
    for (const auto& name : sorted) set.modules.push_back(std::move(by_name.at(name)));
    set.build_indexes(sink);
    return set;
}

ModuleSet parse_raw(const std::vector<RawFile>& files, DiagnosticSink& sink) {
    std::vector<SpecModule> mods;
    for (const auto& f : files) {
        std::vector<Token> toks = tokenize(f.text, f.name, sink);
        size_t pos = 0;
        while (toks[pos].kind != TokKind::Eof) {
            Parser p(toks, pos, sink);
            auto m = p.module();
            if (!m) break; // one syntax error per module; skip rest of file
            mods.push_back(std::move(*m));
        }
    }
    ModuleSet set = assemble(std::move(mods), sink);
    check_modules(set, sink);
    return set;
}

} // namespace

std::optional<SpecModule> parse_module(const std::vector<Token>& tokens, size_t& pos,
                                       DiagnosticSink& sink) {
    Parser p(tokens, pos, sink);
    return p.module();
}

std::optional<Term> parse_term_text(const std::string& text, DiagnosticSink& sink) {
    std::vector<Token> toks = tokenize(text, "<term>", sink);
    if (sink.has_errors()) return std::nullopt;
    size_t pos = 0;
    Parser p(toks, pos, sink);
    auto t = p.term_entry();
    if (t && toks[pos].kind != TokKind::Eof)
        sink.error("syntax-error", "trailing input after term", toks[pos].span);
    return t;
}

ModuleSet parse_spec(const std::vector<std::string>& files, DiagnosticSink& sink) {
    std::vector<RawFile> raw;
    for (const auto& path : files) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            sink.error("io-error", "cannot read file '" + path + "'");
            continue;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        raw.push_back({path, buf.str()});
    }
    return parse_raw(raw, sink);
}

ModuleSet parse_spec_sources(const std::vector<std::pair<std::string, std::string>>& sources,
                             DiagnosticSink& sink) {
    std::vector<RawFile> raw;
    for (const auto& [name, text] : sources) raw.push_back({name, text});
    return parse_raw(raw, sink);
}

} // namespace otsc
