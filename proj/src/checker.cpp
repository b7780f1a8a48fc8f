#include <set>

#include "parser.hpp"

namespace otsc {

namespace {

void resolve_idents(Term& t, const SpecModule& m, DiagnosticSink& sink) {
    if (t.is_apply()) {
        const VarDecl* v = m.find_var(t.name);
        if (v) {
            if (!t.args.empty()) {
                sink.error("variable-applied",
                           "variable '" + t.name + "' cannot take arguments", t.span);
            } else {
                t.kind = Term::Kind::Var;
                t.sort = v->sort;
                return;
            }
        }
    }
    for (auto& c : t.args) resolve_idents(c, m, sink);
}

bool known_name(const Term& t, const ModuleSet& set, const SpecModule& m, DiagnosticSink& sink) {
    bool ok = true;
    if (t.is_apply() && set.operators_named(t.name, m.name).empty()) {
        sink.error("unresolved-name",
                   "'" + t.name + "' is neither a declared variable nor an operator visible from '" +
                       m.name + "'",
                   t.span);
        ok = false;
    }
    for (const auto& c : t.args) ok = known_name(c, set, m, sink) && ok;
    return ok;
}

void check_sort_decls(const ModuleSet& set, const SpecModule& m, DiagnosticSink& sink) {
    std::set<std::string> seen;
    for (const auto& s : m.sorts) {
        if (s.name.empty()) {
            sink.error("duplicate-sort", "empty sort name", s.span);
            continue;
        }
        if (!seen.insert(s.name).second)
            sink.error("duplicate-sort", "sort '" + s.name + "' declared twice in module '" +
                                             m.name + "'",
                       s.span);
        for (const auto& sup : s.supersorts) {
            const SortDecl* d = resolve_sort(set, sup, m.name, sink, s.span);
            if (!d) continue;
            if (d->kind != s.kind)
                sink.error("bad-supersort",
                           "subsort declaration '" + s.name + " < " + sup +
                               "' mixes hidden and visible sorts",
                           s.span);
        }
    }
}

void check_operator_decls(const ModuleSet& set, SpecModule& m, DiagnosticSink& sink) {
    std::set<std::string> sigs;
    for (auto& op : m.operators) {
        if (op.name.front() == '_' || op.name.back() == '_') {
            size_t underscores = 0;
            for (char c : op.name)
                if (c == '_') ++underscores;
            bool binary_infix = op.is_infix() && op.arity.size() == 2;
            if (!binary_infix) {
                sink.error("bad-mixfix",
                           "only binary infix operators declared as _sym_ are supported ('" +
                               op.name + "')",
                           op.span);
                continue;
            }
            (void)underscores;
        }
        std::string sig = op.name + ":";
        for (const auto& a : op.arity) sig += a + " ";
        if (!sigs.insert(sig).second)
            sink.error("duplicate-operator",
                       "operator '" + op.name + "' redeclared with an identical arity signature",
                       op.span);
        for (const auto* other : set.operators_named(op.name, m.name)) {
            if (other == &op || other->module == m.name) continue;
            if (other->builtin && other->arity == op.arity)
                sink.error("builtin-redefinition",
                           "operator '" + op.name + "' shadows a builtin declaration", op.span);
        }
        bool bad_sort = false;
        for (const auto& a : op.arity)
            if (!resolve_sort(set, a, m.name, sink, op.span)) bad_sort = true;
        if (!resolve_sort(set, op.coarity, m.name, sink, op.span)) bad_sort = true;
        if (bad_sort) continue;
        if (op.behavioral) {
            bool hidden_arg = false;
            for (const auto& a : op.arity)
                if (set.is_hidden(a)) hidden_arg = true;
            bool hidden_const = op.arity.empty() && set.is_hidden(op.coarity);
            if (!hidden_arg && !hidden_const)
                sink.error("behavioral-bad-signature",
                           "behavioral operator '" + op.name +
                               "' has no hidden sort in its arity",
                           op.span);
        }
    }
}

void check_equation(const ModuleSet& set, const SpecModule& m, const Equation& e,
                    DiagnosticSink& sink) {
    if (!e.lhs.is_apply()) {
        sink.error("bad-lhs", "equation left-hand side must be an operator application", e.span);
        return;
    }
    // left-hand sides of rewrite rules may not redefine builtins
    auto ops = set.operators_named(e.lhs.name, m.name);
    if (!ops.empty() && ops.front()->builtin) {
        sink.error("builtin-redefinition",
                   "equation redefines builtin operator '" + e.lhs.name + "'", e.span);
        return;
    }

    if (!known_name(e.lhs, set, m, sink) || !known_name(e.rhs, set, m, sink)) return;
    if (e.condition && !known_name(*e.condition, set, m, sink)) return;

    auto ls = sort_of(e.lhs, set, m.name, sink);
    auto rs = sort_of(e.rhs, set, m.name, sink);
    if (!ls || !rs) return;
    if (!set.sorts_comparable(*ls, *rs)) {
        sink.error("incomparable-equation-sorts",
                   "equation sides have unrelated sorts " + *ls + " and " + *rs, e.span);
        return;
    }
    if (e.condition) {
        auto cs = sort_of(*e.condition, set, m.name, sink);
        if (!cs) return;
        if (!set.sort_leq(*cs, prelude::kSortBool)) {
            sink.error("non-boolean-condition",
                       "equation condition has sort " + *cs + ", expected Bool", e.span);
            return;
        }
    }

    // executability: every variable on the right or in the condition must
    // be bound by the left-hand side
    std::set<std::string> lhs_vars, other_vars;
    collect_vars(e.lhs, lhs_vars);
    collect_vars(e.rhs, other_vars);
    if (e.condition) collect_vars(*e.condition, other_vars);
    for (const auto& v : other_vars)
        if (!lhs_vars.count(v))
            sink.error("nonexecutable-equation",
                       "variable '" + v +
                           "' occurs on the right-hand side or condition but not on the left",
                       e.span);
}

} // namespace

void check_modules(ModuleSet& set, DiagnosticSink& sink) {
    for (auto& m : set.modules) {
        if (m.builtin) continue;
        check_sort_decls(set, m, sink);
        check_operator_decls(set, m, sink);
        std::set<std::string> var_names;
        for (const auto& v : m.variables) {
            if (!var_names.insert(v.name).second)
                sink.error("duplicate-variable", "variable '" + v.name + "' declared twice",
                           v.span);
            resolve_sort(set, v.sort, m.name, sink, v.span);
        }
        for (auto& e : m.equations) {
            resolve_idents(e.lhs, m, sink);
            resolve_idents(e.rhs, m, sink);
            if (e.condition) resolve_idents(*e.condition, m, sink);
            check_equation(set, m, e, sink);
        }
    }
}

} // namespace otsc
