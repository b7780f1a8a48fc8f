#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ast.hpp"

#include "json.hpp"

namespace otsc {

struct ObserverSpec {
    std::string name;
    std::vector<std::string> param_sorts; // visible argument sorts, declaration order
    std::string result_sort;
    int hidden_arg_index = 0; // position of the state argument in the operator
    std::vector<int> defining_equations; // indices into the module's equations
    const OperatorDecl* op = nullptr;
};

struct TransitionSpec {
    std::string name;
    std::vector<std::string> param_sorts;
    int hidden_arg_index = 0;
    std::optional<std::string> effective_condition; // bound c-<name> operator
    int condition_equation = -1;                    // defining equation of the c-op
    std::vector<int> effect_equations;
    const OperatorDecl* op = nullptr;
};

struct ProjectionSpec {
    std::string name;
    std::vector<std::string> id_sorts;
    std::string component_module;
    std::string component_hidden_sort;
    int hidden_arg_index = 0;
    std::optional<std::string> absent_value; // nullary constant mapped to null
    std::vector<int> defining_equations;
    const OperatorDecl* op = nullptr;
};

/// The classified OTS: observers O, initial states I, transitions T,
/// plus projections and the inheritance edge.
struct OtsModel {
    std::string module_name;
    std::string hidden_sort;
    std::vector<ObserverSpec> observers;
    std::vector<std::string> initial_states;
    std::vector<TransitionSpec> transitions;
    std::vector<ProjectionSpec> projections;
    std::optional<std::string> extends_module;
    std::vector<std::string> auxiliary_ops;

    bool is_composite() const { return !projections.empty(); }
    const ObserverSpec* find_observer(const std::string& name) const;
    const TransitionSpec* find_transition(const std::string& name) const;
    const ProjectionSpec* find_projection(const std::string& name) const;
};

std::optional<OtsModel> classify(const ModuleSet& set, const std::string& module_name,
                                 DiagnosticSink& sink);

/// How one effect equation of a composite transition treats one
/// projection's component state.
struct ProjectionEffect {
    enum class Kind { Frame, Modify, Create, Delete };
    Kind kind = Kind::Frame;
    int equation = -1; // index into the composite module's equations
    const Equation* eq = nullptr;
};

/// Effect equations of each (transition, projection) pair, classified.
/// Shared by the composition checks, method grouping and codegen.
std::map<std::pair<std::string, std::string>, std::vector<ProjectionEffect>>
projection_effects(const OtsModel& model, const ModuleSet& set);

/// Syntactic verification of the three composite-object conditions.
/// Violations are reported as warnings (diagnostics only, none fatal).
void check_composition(const OtsModel& composite, const std::vector<const OtsModel*>& components,
                       const ModuleSet& set, DiagnosticSink& sink);

struct MethodGroup {
    std::vector<std::string> components; // projection names, sorted
    std::vector<std::string> transitions;
    bool synchronized = false; // touches several components or depends on another's state
};

/// Partitions the composite's transitions by the set of component
/// objects whose projected state they change.
std::vector<MethodGroup> method_groups(const OtsModel& composite, const ModuleSet& set);

/// Schema-versioned JSON rendering of the classified model (schema
/// documented in docs/model-schema.md). Deterministic field order.
nlohmann::ordered_json dump_model(const OtsModel& model, const ModuleSet& set);

} // namespace otsc
