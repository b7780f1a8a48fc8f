#include "ast.hpp"

#include <algorithm>
#include <sstream>

namespace otsc {

std::string format_diagnostic(const Diagnostic& d) {
    std::ostringstream os;
    const auto& s = d.span;
    os << (s.file.empty() ? "<input>" : s.file) << ":" << s.start_line << ":" << s.start_col
       << ": " << (d.severity == Severity::Error ? "error" : "warning") << ": " << d.code
       << ": " << d.message;
    return os.str();
}

std::string OperatorDecl::symbol() const {
    std::string s;
    for (char c : name)
        if (c != '_') s.push_back(c);
    return s;
}

Term Term::var(std::string name, std::string sort, SourceSpan sp) {
    Term t;
    t.kind = Kind::Var;
    t.name = std::move(name);
    t.sort = std::move(sort);
    t.span = std::move(sp);
    return t;
}

Term Term::apply(std::string op, std::vector<Term> args, SourceSpan sp) {
    Term t;
    t.kind = Kind::Apply;
    t.name = std::move(op);
    t.args = std::move(args);
    t.span = std::move(sp);
    return t;
}

Term Term::int_lit(long long v, SourceSpan sp) {
    Term t;
    t.kind = Kind::IntLit;
    t.value = v;
    t.span = std::move(sp);
    return t;
}

Term Term::id_lit(std::string sort, long long v) {
    Term t;
    t.kind = Kind::IdLit;
    t.sort = std::move(sort);
    t.value = v;
    return t;
}

bool operator==(const Term& a, const Term& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case Term::Kind::Var: return a.name == b.name && a.sort == b.sort;
    case Term::Kind::IntLit: return a.value == b.value;
    case Term::Kind::IdLit: return a.value == b.value && a.sort == b.sort;
    case Term::Kind::Apply: break;
    }
    if (a.name != b.name || a.args.size() != b.args.size()) return false;
    for (size_t i = 0; i < a.args.size(); ++i)
        if (!(a.args[i] == b.args[i])) return false;
    return true;
}

bool term_is_ground(const Term& t) {
    if (t.is_var()) return false;
    for (const auto& c : t.args)
        if (!term_is_ground(c)) return false;
    return true;
}

bool term_contains_op(const Term& t, const std::string& op) {
    if (t.is_apply() && t.name == op) return true;
    for (const auto& c : t.args)
        if (term_contains_op(c, op)) return true;
    return false;
}

void collect_vars(const Term& t, std::set<std::string>& out) {
    if (t.is_var()) out.insert(t.name);
    for (const auto& c : t.args) collect_vars(c, out);
}

Term substitute(const Term& t, const std::map<std::string, Term>& subst) {
    if (t.is_var()) {
        auto it = subst.find(t.name);
        return it != subst.end() ? it->second : t;
    }
    Term out = t;
    for (auto& c : out.args) c = substitute(c, subst);
    return out;
}

namespace {

// Precedence for paren-minimal printing; mirrors the parser's table.
int print_prec(const std::string& op) {
    if (op == "_or_") return 4;
    if (op == "_and_") return 6;
    if (op == "_==_" || op == "_=/=_") return 10;
    if (op == "_>=_" || op == "_>_") return 20;
    if (op == "_+_" || op == "_-_") return 30;
    return 25; // user-declared infix
}

void print_term(const Term& t, std::ostream& os, int parent_prec) {
    switch (t.kind) {
    case Term::Kind::Var: os << t.name; return;
    case Term::Kind::IntLit: os << t.value; return;
    case Term::Kind::IdLit: {
        char c = t.sort.empty() ? 'k' : static_cast<char>(std::tolower(t.sort[0]));
        os << c << t.value;
        return;
    }
    case Term::Kind::Apply: break;
    }
    const std::string& op = t.name;
    bool infix = t.args.size() == 2 && op.size() >= 3 && op.front() == '_' && op.back() == '_' &&
                 op.find('_', 1) == op.size() - 1;
    bool prefix = t.args.size() == 1 && op.size() >= 2 && op.back() == '_' && op.front() != '_';
    if (infix) {
        int prec = print_prec(op);
        std::string sym;
        for (char c : op)
            if (c != '_') sym.push_back(c);
        bool paren = prec <= parent_prec;
        if (paren) os << "(";
        print_term(t.args[0], os, prec - 1);
        os << " " << sym << " ";
        print_term(t.args[1], os, prec);
        if (paren) os << ")";
        return;
    }
    if (prefix) {
        std::string sym = op.substr(0, op.size() - 1);
        if (sym == "-") {
            os << "-";
            // keep -(N) readable and reparseable
            bool paren = !(t.args[0].is_int());
            if (paren) os << "(";
            print_term(t.args[0], os, 100);
            if (paren) os << ")";
        } else {
            os << sym << " ";
            print_term(t.args[0], os, 90);
        }
        return;
    }
    os << op;
    if (!t.args.empty()) {
        os << "(";
        for (size_t i = 0; i < t.args.size(); ++i) {
            if (i) os << ", ";
            print_term(t.args[i], os, -1);
        }
        os << ")";
    }
}

} // namespace

std::string term_to_string(const Term& t) {
    std::ostringstream os;
    print_term(t, os, -1);
    return os.str();
}

bool operator==(const Equation& a, const Equation& b) {
    if (!(a.lhs == b.lhs) || !(a.rhs == b.rhs)) return false;
    if (a.condition.has_value() != b.condition.has_value()) return false;
    if (a.condition && !(*a.condition == *b.condition)) return false;
    return a.label == b.label;
}

const VarDecl* SpecModule::find_var(const std::string& n) const {
    for (const auto& v : variables)
        if (v.name == n) return &v;
    return nullptr;
}

bool structurally_equal(const SpecModule& a, const SpecModule& b) {
    if (a.name != b.name || a.tight != b.tight || a.imports != b.imports) return false;
    if (a.sorts.size() != b.sorts.size() || a.operators.size() != b.operators.size() ||
        a.variables.size() != b.variables.size() || a.equations.size() != b.equations.size())
        return false;
    for (size_t i = 0; i < a.sorts.size(); ++i) {
        const auto &x = a.sorts[i], &y = b.sorts[i];
        if (x.name != y.name || x.kind != y.kind || x.supersorts != y.supersorts) return false;
    }
    for (size_t i = 0; i < a.operators.size(); ++i) {
        const auto &x = a.operators[i], &y = b.operators[i];
        if (x.name != y.name || x.arity != y.arity || x.coarity != y.coarity ||
            x.behavioral != y.behavioral)
            return false;
    }
    for (size_t i = 0; i < a.variables.size(); ++i)
        if (a.variables[i].name != b.variables[i].name || a.variables[i].sort != b.variables[i].sort)
            return false;
    for (size_t i = 0; i < a.equations.size(); ++i)
        if (!(a.equations[i] == b.equations[i])) return false;
    return true;
}

std::string to_cafe(const SpecModule& m) {
    std::ostringstream os;
    os << (m.tight ? "mod!" : "mod*") << " " << m.name << " {\n";
    for (const auto& imp : m.imports)
        if (imp != prelude::kBool) os << "  pr(" << imp << ")\n";
    for (const auto& s : m.sorts) {
        os << "  " << (s.kind == SortKind::Hidden ? "*[ " : "[ ") << s.name;
        if (!s.supersorts.empty()) {
            os << " <";
            for (const auto& sup : s.supersorts) os << " " << sup;
        }
        os << (s.kind == SortKind::Hidden ? " ]*" : " ]") << "\n";
    }
    for (const auto& op : m.operators) {
        os << "  " << (op.behavioral ? "bop " : "op ") << op.name << " :";
        for (const auto& a : op.arity) os << " " << a;
        os << " -> " << op.coarity << "\n";
    }
    for (const auto& v : m.variables) os << "  var " << v.name << " : " << v.sort << "\n";
    for (const auto& e : m.equations) {
        os << "  " << (e.conditional() ? "ceq " : "eq ") << term_to_string(e.lhs) << " = "
           << term_to_string(e.rhs);
        if (e.condition) os << " if " << term_to_string(*e.condition);
        os << " .\n";
    }
    os << "}\n";
    return os.str();
}

void ModuleSet::build_indexes(DiagnosticSink& sink) {
    module_index_.clear();
    sorts_by_name_.clear();
    ops_by_name_.clear();
    visibility_.clear();
    supersort_closure_.clear();

    for (size_t i = 0; i < modules.size(); ++i) {
        auto& m = modules[i];
        if (module_index_.count(m.name))
            sink.error("duplicate-module-name", "module '" + m.name + "' declared twice", m.span);
        module_index_[m.name] = static_cast<int>(i);
        for (auto& s : m.sorts) {
            s.module = m.name;
            sorts_by_name_[s.name].push_back(&s);
        }
        for (auto& o : m.operators) {
            o.module = m.name;
            ops_by_name_[o.name].push_back(&o);
        }
    }

    // visibility: module itself plus transitive imports, depth-first,
    // deterministic (declaration order)
    for (const auto& m : modules) {
        std::vector<std::string> vis;
        std::set<std::string> seen;
        std::vector<std::string> stack{m.name};
        while (!stack.empty()) {
            std::string cur = stack.back();
            stack.pop_back();
            if (seen.count(cur)) continue;
            seen.insert(cur);
            vis.push_back(cur);
            if (const SpecModule* cm = find_module(cur))
                for (auto it = cm->imports.rbegin(); it != cm->imports.rend(); ++it)
                    stack.push_back(*it);
        }
        visibility_[m.name] = std::move(vis);
    }

    // transitive supersort closure
    std::map<std::string, std::set<std::string>> direct;
    for (const auto& m : modules)
        for (const auto& s : m.sorts)
            for (const auto& sup : s.supersorts) direct[s.name].insert(sup);
    for (const auto& [name, _] : sorts_by_name_) {
        std::set<std::string> closure;
        std::vector<std::string> stack{name};
        while (!stack.empty()) {
            std::string cur = stack.back();
            stack.pop_back();
            auto it = direct.find(cur);
            if (it == direct.end()) continue;
            for (const auto& sup : it->second)
                if (closure.insert(sup).second) stack.push_back(sup);
        }
        supersort_closure_[name] = std::move(closure);
    }
}

const SpecModule* ModuleSet::find_module(const std::string& name) const {
    auto it = module_index_.find(name);
    return it == module_index_.end() ? nullptr : &modules[it->second];
}

const std::vector<std::string>& ModuleSet::visible_from(const std::string& module) const {
    static const std::vector<std::string> empty;
    auto it = visibility_.find(module);
    return it == visibility_.end() ? empty : it->second;
}

bool ModuleSet::sort_exists(const std::string& name) const { return sorts_by_name_.count(name) > 0; }

bool ModuleSet::is_hidden(const std::string& sort) const {
    auto it = sorts_by_name_.find(sort);
    if (it == sorts_by_name_.end()) return false;
    return it->second.front()->kind == SortKind::Hidden;
}

bool ModuleSet::sort_leq(const std::string& a, const std::string& b) const {
    if (a == b) return true;
    auto it = supersort_closure_.find(a);
    return it != supersort_closure_.end() && it->second.count(b) > 0;
}

bool ModuleSet::sorts_comparable(const std::string& a, const std::string& b) const {
    return sort_leq(a, b) || sort_leq(b, a);
}

const SortDecl* ModuleSet::find_sort_anywhere(const std::string& name) const {
    auto it = sorts_by_name_.find(name);
    return it == sorts_by_name_.end() ? nullptr : it->second.front();
}

std::vector<const OperatorDecl*> ModuleSet::operators_named(const std::string& name,
                                                            const std::string& context) const {
    std::vector<const OperatorDecl*> out;
    auto it = ops_by_name_.find(name);
    if (it == ops_by_name_.end()) return out;
    const auto& vis = visible_from(context);
    for (const OperatorDecl* op : it->second)
        if (std::find(vis.begin(), vis.end(), op->module) != vis.end()) out.push_back(op);
    return out;
}

std::vector<const OperatorDecl*> ModuleSet::operators_visible(const std::string& context) const {
    std::vector<const OperatorDecl*> out;
    for (const auto& name : visible_from(context)) {
        const SpecModule* m = find_module(name);
        if (!m) continue;
        for (const auto& op : m->operators) out.push_back(&op);
    }
    return out;
}

const SortDecl* resolve_sort(const ModuleSet& set, const std::string& name,
                             const std::string& context, DiagnosticSink& sink, SourceSpan at) {
    std::vector<const SortDecl*> found;
    for (const auto& mod_name : set.visible_from(context)) {
        const SpecModule* m = set.find_module(mod_name);
        if (!m) continue;
        for (const auto& s : m->sorts)
            if (s.name == name) found.push_back(&s);
    }
    if (found.empty()) {
        sink.error("unknown-sort", "sort '" + name + "' is not declared in '" + context +
                                       "' or its imports",
                   at);
        return nullptr;
    }
    if (found.size() > 1) {
        sink.error("ambiguous-sort", "sort '" + name + "' is declared in unrelated modules '" +
                                         found[0]->module + "' and '" + found[1]->module + "'",
                   at);
        return nullptr;
    }
    return found.front();
}

std::optional<std::string> sort_of(const Term& t, const ModuleSet& set,
                                   const std::string& context, DiagnosticSink& sink) {
    switch (t.kind) {
    case Term::Kind::Var: return t.sort;
    case Term::Kind::IntLit:
        return t.value >= 0 ? std::string(prelude::kSortNat) : std::string(prelude::kSortInt);
    case Term::Kind::IdLit: return t.sort;
    case Term::Kind::Apply: break;
    }
    std::vector<std::string> arg_sorts;
    arg_sorts.reserve(t.args.size());
    for (const auto& a : t.args) {
        auto s = sort_of(a, set, context, sink);
        if (!s) return std::nullopt;
        arg_sorts.push_back(*s);
    }
    const OperatorDecl* op = resolve_apply(set, t.name, arg_sorts, context);
    if (!op) {
        std::string args;
        for (size_t i = 0; i < arg_sorts.size(); ++i) args += (i ? " " : "") + arg_sorts[i];
        sink.error("ill-sorted-term",
                   "no operator '" + t.name + "' applicable to (" + args + ") in term '" +
                       term_to_string(t) + "'",
                   t.span);
        return std::nullopt;
    }
    if (op->poly_equality) {
        if (!set.sorts_comparable(arg_sorts[0], arg_sorts[1])) {
            sink.error("ill-sorted-term",
                       "'" + op->symbol() + "' applied to incomparable sorts " + arg_sorts[0] +
                           " and " + arg_sorts[1],
                       t.span);
            return std::nullopt;
        }
        return std::string(prelude::kSortBool);
    }
    return op->coarity;
}

const OperatorDecl* resolve_apply(const ModuleSet& set, const std::string& name,
                                  const std::vector<std::string>& arg_sorts,
                                  const std::string& context) {
    std::vector<const OperatorDecl*> candidates;
    for (const OperatorDecl* op : set.operators_named(name, context)) {
        if (op->poly_equality) {
            if (arg_sorts.size() == 2) candidates.push_back(op);
            continue;
        }
        if (op->arity.size() != arg_sorts.size()) continue;
        bool ok = true;
        for (size_t i = 0; i < arg_sorts.size(); ++i)
            if (!set.sort_leq(arg_sorts[i], op->arity[i])) {
                ok = false;
                break;
            }
        if (ok) candidates.push_back(op);
    }
    if (candidates.size() == 1) return candidates.front();
    if (candidates.empty()) return nullptr;
    // identical redeclarations are rejected at check time; prefer the
    // first in dependency order for deterministic behaviour
    return candidates.front();
}

namespace prelude {

namespace {

OperatorDecl mk_op(std::string name, std::vector<std::string> arity, std::string coarity,
                   std::string module, bool poly = false) {
    OperatorDecl op;
    op.name = std::move(name);
    op.arity = std::move(arity);
    op.coarity = std::move(coarity);
    op.builtin = true;
    op.poly_equality = poly;
    op.module = std::move(module);
    return op;
}

} // namespace

std::vector<SpecModule> modules() {
    std::vector<SpecModule> out;

    SpecModule b;
    b.name = kBool;
    b.builtin = true;
    b.sorts.push_back({kSortBool, SortKind::Visible, {}, kBool, {}});
    b.operators.push_back(mk_op("true", {}, kSortBool, kBool));
    b.operators.push_back(mk_op("false", {}, kSortBool, kBool));
    b.operators.push_back(mk_op("_and_", {kSortBool, kSortBool}, kSortBool, kBool));
    b.operators.push_back(mk_op("_or_", {kSortBool, kSortBool}, kSortBool, kBool));
    b.operators.push_back(mk_op("not_", {kSortBool}, kSortBool, kBool));
    b.operators.push_back(mk_op("_==_", {"", ""}, kSortBool, kBool, true));
    b.operators.push_back(mk_op("_=/=_", {"", ""}, kSortBool, kBool, true));
    out.push_back(std::move(b));

    SpecModule i;
    i.name = kInt;
    i.builtin = true;
    i.imports.push_back(kBool);
    i.sorts.push_back({kSortInt, SortKind::Visible, {}, kInt, {}});
    i.sorts.push_back({kSortNat, SortKind::Visible, {kSortInt}, kInt, {}});
    i.operators.push_back(mk_op("_+_", {kSortInt, kSortInt}, kSortInt, kInt));
    i.operators.push_back(mk_op("_-_", {kSortInt, kSortInt}, kSortInt, kInt));
    i.operators.push_back(mk_op("-_", {kSortInt}, kSortInt, kInt));
    i.operators.push_back(mk_op("_>=_", {kSortInt, kSortInt}, kSortBool, kInt));
    i.operators.push_back(mk_op("_>_", {kSortInt, kSortInt}, kSortBool, kInt));
    out.push_back(std::move(i));

    return out;
}

bool is_prelude_module(const std::string& name) { return name == kBool || name == kInt; }

} // namespace prelude

} // namespace otsc
