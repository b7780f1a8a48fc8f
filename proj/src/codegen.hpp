#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "analyzer.hpp"
#include "ast.hpp"

#include "json.hpp"

namespace otsc::gen {

enum class ExprKind {
    IntLit,
    BoolLit,
    Null,
    This,
    Result, // \result
    Ghost,  // the pre-state ghost field
    Name,   // parameter or binder reference
    Call,   // method call, optional receiver
    New,    // new Class(args...)
    Unary,  // text: "!" or "-"
    Binary, // text: "&&" "||" "==>" "==" "!=" ">=" ">" "<" "<=" "+" "-"
    Forall,
};

struct ExprNode;
using ExprP = std::shared_ptr<const ExprNode>;

struct ExprNode {
    ExprKind kind = ExprKind::Null;
    long long int_value = 0;
    bool bool_value = false;
    std::string text; // name / method / operator / class
    ExprP recv;       // Call receiver (may be null: implicit)
    std::vector<ExprP> args;
    std::vector<std::pair<std::string, std::string>> binders; // Forall: (type, name)
    ExprP body;                                               // Forall
};

ExprP e_int(long long v);
ExprP e_bool(bool v);
ExprP e_null();
ExprP e_this();
ExprP e_result();
ExprP e_ghost(std::string name);
ExprP e_name(std::string name);
ExprP e_call(ExprP recv, std::string method, std::vector<ExprP> args = {});
ExprP e_new(std::string cls, std::vector<ExprP> args = {});
ExprP e_un(std::string op, ExprP x);
ExprP e_bin(std::string op, ExprP l, ExprP r);
ExprP e_forall(std::vector<std::pair<std::string, std::string>> binders, ExprP body);
ExprP e_and_all(std::vector<ExprP> parts);
/// Structural negation: comparisons flip (>= becomes <), everything else
/// gets a '!'.
ExprP e_negate(const ExprP& x);

std::string render_expr(const ExprP& e);

/// One JML contract case: requires/ensures conjunctions plus an optional
/// assignable clause; cases are joined with `also`.
struct ContractCase {
    std::vector<ExprP> requires_clauses;
    std::vector<ExprP> ensures_clauses;
    bool assignable_nothing = false;
    bool normal_behavior = false;
};

struct ContractMethod {
    std::string name;
    std::vector<std::pair<std::string, std::string>> params; // (type, name)
    std::string return_type; // empty for constructors
    bool pure = false;
    bool is_constructor = false;
    std::vector<ContractCase> cases;
    std::vector<ExprP> ghost_sets;  // body preamble: set <ghost> = expr
    std::string placeholder_return; // "", "0", "false", "null", "this"
};

struct ContractClass {
    std::string name;
    std::optional<std::string> extends_name;
    std::vector<std::pair<std::string, std::string>> ghost_fields; // (type, name)
    std::vector<ContractMethod> methods;

    const ContractMethod* find_method(const std::string& name) const;
};

/// Maps visible sorts to target types, default values and preferred
/// parameter names.
struct SortMapping {
    struct Entry {
        std::string type;
        std::string default_value;
        std::string param_name;
        bool is_nat = false; // adds `p >= 0` requires clauses
    };
    std::map<std::string, Entry> table;

    static SortMapping defaults();
    const Entry* find(const std::string& sort) const;
};

struct TranslateOptions {
    SortMapping mapping = SortMapping::defaults();
    std::string ghost_name = "temp";
    std::map<std::string, std::string> class_names;  // module -> class
    std::map<std::string, std::string> method_names; // "MODULE.op" -> method
};

std::string default_class_name(const std::string& module_name);

/// Translates whole module sets: components and parents are translated
/// before the classes that need them.
class Translator {
public:
    Translator(const ModuleSet& set, TranslateOptions options);

    /// Classifies and translates `module` (and, recursively, every
    /// module it inherits from or projects into).
    std::optional<ContractClass> translate_module(const std::string& module,
                                                  DiagnosticSink& sink);

    const std::map<std::string, OtsModel>& models() const { return models_; }
    std::string class_name(const std::string& module) const;
    std::string method_name(const std::string& module, const std::string& op) const;

private:
    std::optional<ContractClass> translate_single(const OtsModel& model, DiagnosticSink& sink);
    void translate_composite_members(const OtsModel& model, ContractClass& cls,
                                     DiagnosticSink& sink);
    bool apply_inheritance(const OtsModel& child, ContractClass& cls, DiagnosticSink& sink);
    std::optional<ExprP> init_observer_clause(const OtsModel& owner, const ObserverSpec& o,
                                              const std::string& init, DiagnosticSink& sink);
    std::optional<ExprP> init_projection_clause(const OtsModel& model, const ProjectionSpec& p,
                                                const std::string& init, DiagnosticSink& sink);
    std::optional<ContractMethod> translate_simple_transition(const OtsModel& model,
                                                              const TransitionSpec& t,
                                                              const ContractClass& cls,
                                                              DiagnosticSink& sink);

    const ModuleSet& set_;
    TranslateOptions options_;
    std::map<std::string, OtsModel> models_;
    std::map<std::string, ContractClass> done_;
    friend struct TermTranslator;
};

/// Renders one `.java` compilation unit (UTF-8, LF, 4-space indent).
/// Bodies carry only the ghost-set preamble, a TODO marker and a
/// type-correct placeholder return.
std::string emit_java_jml(const ContractClass& cls);

/// Alternate backend-neutral rendering of the contract class.
nlohmann::ordered_json contract_class_json(const ContractClass& cls);

/// Structural check that contract expressions reference only pure
/// methods, ghosts, parameters, \result and this (side-effect freedom).
void validate_contracts(const ContractClass& cls,
                        const std::map<std::string, ContractClass>& known,
                        DiagnosticSink& sink);

/// Whitespace-collapsed, comment-style-normalized form used for golden
/// comparisons.
std::string normalize_emitted_text(const std::string& text);

} // namespace otsc::gen
