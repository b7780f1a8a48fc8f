#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "diagnostics.hpp"

namespace otsc {

enum class SortKind { Visible, Hidden };

struct SortDecl {
    std::string name;
    SortKind kind = SortKind::Visible;
    std::vector<std::string> supersorts;
    std::string module; // owning module, filled when the set is assembled
    SourceSpan span;
};

/// Operator declaration. Mixfix is restricted to binary infix operators
/// written with two underscores (`_+_`) and the builtin prefix forms
/// (`-_`, `not_`).
struct OperatorDecl {
    std::string name; // "read", "_+_", "not_", ...
    std::vector<std::string> arity;
    std::string coarity;
    bool behavioral = false;   // bop/bops
    bool builtin = false;      // native evaluation in the interpreter
    bool poly_equality = false; // _==_ / _=/=_ : any comparable pair -> Bool
    std::string module;
    SourceSpan span;

    bool is_infix() const {
        return name.size() >= 3 && name.front() == '_' && name.back() == '_' &&
               name.find('_', 1) == name.size() - 1;
    }
    bool is_prefix_unary() const {
        return name.size() >= 2 && name.back() == '_' && name.front() != '_';
    }
    /// Display symbol without the underscore slots ("_+_" -> "+").
    std::string symbol() const;
};

/// First-order term. Integer and identifier literals get their own node
/// kinds; everything else is a variable or an operator application.
struct Term {
    enum class Kind { Var, Apply, IntLit, IdLit };

    Kind kind = Kind::Apply;
    std::string name;      // Var: variable name; Apply: operator name
    std::string sort;      // Var: declared sort; IdLit: identifier sort
    long long value = 0;   // IntLit / IdLit payload
    std::vector<Term> args;
    SourceSpan span;

    bool is_var() const { return kind == Kind::Var; }
    bool is_apply() const { return kind == Kind::Apply; }
    bool is_int() const { return kind == Kind::IntLit; }
    bool is_id() const { return kind == Kind::IdLit; }
    bool is_const(const std::string& op) const {
        return kind == Kind::Apply && name == op && args.empty();
    }

    static Term var(std::string name, std::string sort, SourceSpan sp = {});
    static Term apply(std::string op, std::vector<Term> args = {}, SourceSpan sp = {});
    static Term int_lit(long long v, SourceSpan sp = {});
    static Term id_lit(std::string sort, long long v);
};

bool operator==(const Term& a, const Term& b); // structural, ignores spans
inline bool operator!=(const Term& a, const Term& b) { return !(a == b); }

bool term_is_ground(const Term& t);
bool term_contains_op(const Term& t, const std::string& op);
void collect_vars(const Term& t, std::set<std::string>& out);
Term substitute(const Term& t, const std::map<std::string, Term>& subst);

/// Renders a term in source syntax, infix-aware ("read(A) + I >= 0").
std::string term_to_string(const Term& t);

struct Equation {
    Term lhs;
    Term rhs;
    std::optional<Term> condition;
    std::string label;
    SourceSpan span;

    bool conditional() const { return condition.has_value(); }
};

bool operator==(const Equation& a, const Equation& b);

struct VarDecl {
    std::string name;
    std::string sort;
    SourceSpan span;
};

struct SpecModule {
    std::string name;
    bool tight = false; // mod! vs mod*
    std::vector<std::string> imports;
    std::vector<SortDecl> sorts;
    std::vector<OperatorDecl> operators;
    std::vector<VarDecl> variables;
    std::vector<Equation> equations;
    bool builtin = false;
    SourceSpan span;

    const VarDecl* find_var(const std::string& name) const;
};

bool structurally_equal(const SpecModule& a, const SpecModule& b);

/// Pretty-prints a module back to `.cafe` source (round-trip tested).
std::string to_cafe(const SpecModule& m);

/// An import-closed, dependency-ordered set of modules plus lookup
/// indexes. Immutable once checked; safe to share across threads.
class ModuleSet {
public:
    std::vector<SpecModule> modules; // dependency order, prelude first

    void build_indexes(DiagnosticSink& sink);

    const SpecModule* find_module(const std::string& name) const;
    /// Modules visible from `module` (itself + transitive imports).
    const std::vector<std::string>& visible_from(const std::string& module) const;

    bool sort_exists(const std::string& name) const;
    bool is_hidden(const std::string& sort) const;
    /// true when a <= b in the declared subsort order (reflexive).
    bool sort_leq(const std::string& a, const std::string& b) const;
    bool sorts_comparable(const std::string& a, const std::string& b) const;

    const SortDecl* find_sort_anywhere(const std::string& name) const;
    std::vector<const OperatorDecl*> operators_named(const std::string& name,
                                                     const std::string& context) const;
    /// All operators visible from `context`.
    std::vector<const OperatorDecl*> operators_visible(const std::string& context) const;

private:
    std::map<std::string, int> module_index_;
    std::map<std::string, std::vector<const SortDecl*>> sorts_by_name_;
    std::map<std::string, std::vector<const OperatorDecl*>> ops_by_name_;
    std::map<std::string, std::vector<std::string>> visibility_;
    std::map<std::string, std::set<std::string>> supersort_closure_;
    friend class ModuleSetBuilder;
};

/// Searches the context module and its transitive imports for a sort
/// declaration. Errors: unknown-sort, ambiguous-sort.
const SortDecl* resolve_sort(const ModuleSet& set, const std::string& name,
                             const std::string& context, DiagnosticSink& sink,
                             SourceSpan at = {});

/// Least sort of a checked term. Errors: ill-sorted-term with the
/// offending subterm's span.
std::optional<std::string> sort_of(const Term& t, const ModuleSet& set,
                                   const std::string& context, DiagnosticSink& sink);

/// Resolves an application to a unique operator declaration given the
/// argument sorts; nullptr plus a diagnostic when unknown or ambiguous.
const OperatorDecl* resolve_apply(const ModuleSet& set, const std::string& name,
                                  const std::vector<std::string>& arg_sorts,
                                  const std::string& context);

namespace prelude {
constexpr const char* kBool = "BOOL";
constexpr const char* kInt = "INT";
constexpr const char* kSortBool = "Bool";
constexpr const char* kSortInt = "Int";
constexpr const char* kSortNat = "Nat";

/// The embedded builtin modules (BOOL, INT). INT declares both Int and
/// Nat with Nat < Int.
std::vector<SpecModule> modules();
bool is_prelude_module(const std::string& name);
} // namespace prelude

} // namespace otsc
