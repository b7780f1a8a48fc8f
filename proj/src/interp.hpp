#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "analyzer.hpp"
#include "ast.hpp"

#include "json.hpp"

namespace otsc {

/// Enumeration bounds for the interpreter: the universally quantified
/// behavioral equivalence of the formalism is checked over these finite
/// domains ("over tested domains").
struct DomainBounds {
    long long int_lo = -3, int_hi = 3;
    long long id_lo = 0, id_hi = 2;
    long long max_rewrite_steps = 10000;
};

enum class RewriteStrategy { LeftmostInnermost, LeftmostOutermost };

struct StateValue;

/// A data value produced by observation: integer (identifiers map into
/// integers over the id range), boolean, a component state, or the
/// absent-component marker.
struct DataValue {
    enum class Kind { Int, Bool, Component, Absent };
    Kind kind = Kind::Int;
    long long int_value = 0;
    bool bool_value = false;
    std::shared_ptr<StateValue> component;

    static DataValue of_int(long long v);
    static DataValue of_bool(bool b);
    static DataValue absent();
    static DataValue of_component(StateValue sv);
};

bool operator==(const DataValue& a, const DataValue& b); // structural; components compare by history
std::string data_value_to_string(const DataValue& v);

/// Interpreter state in canonical transition-history form: an initial
/// constant plus the transitions applied to it. Equality of states is
/// behavioral (behaviorally_equal), never structural.
struct StateValue {
    std::string model; // owning model's module name
    std::string initial;
    std::vector<std::pair<std::string, std::vector<DataValue>>> history;
};

struct ScenarioStep {
    std::string transition;
    std::vector<DataValue> args;
};

struct TraceStep {
    int step = 0;
    std::string action; // empty for the initial snapshot
    std::vector<std::pair<std::string, std::string>> observations; // display -> rendered value
};

struct EquivalenceResult {
    bool equal = true;
    std::string witness_observer;
    std::string witness_args; // rendered "(a, b)" tuple
};

/// Executes one classified OTS by treating equations as left-to-right
/// rewrite rules. Holds a registry of component/parent models so
/// projections and inheritance resolve.
class Interpreter {
public:
    Interpreter(const ModuleSet& set, const OtsModel& model,
                std::map<std::string, OtsModel> registry, DomainBounds bounds = {});

    /// Builds an interpreter for `module`, classifying it and every
    /// imported module with a hidden sort.
    static std::optional<Interpreter> create(const ModuleSet& set, const std::string& module,
                                             DomainBounds bounds, DiagnosticSink& sink);

    const OtsModel& model() const { return model_; }
    const DomainBounds& bounds() const { return bounds_; }
    const OtsModel* find_model(const std::string& module) const;

    /// When enabled, a transition whose effective condition reduces to
    /// false stutters implicitly even if the spec omits the stuttering
    /// equation. Off by default; documented extension.
    void set_implicit_stuttering(bool on) { implicit_stuttering_ = on; }

    StateValue initial_state(int index = 0) const;

    /// Leftmost-innermost normalization; `strategy` switches to
    /// leftmost-outermost for the confluence spot check. Errors:
    /// fuel-exhausted, stuck-term, projection-absent.
    std::optional<Term> reduce(const Term& term, DiagnosticSink& sink,
                               RewriteStrategy strategy = RewriteStrategy::LeftmostInnermost) const;

    std::optional<DataValue> observe(const StateValue& state, const std::string& observer,
                                     const std::vector<DataValue>& args,
                                     DiagnosticSink& sink) const;

    /// Effective-condition evaluation; transitions without a bound c-op
    /// are always effective.
    std::optional<bool> check_effective(const StateValue& state, const std::string& transition,
                                        const std::vector<DataValue>& args,
                                        DiagnosticSink& sink) const;

    /// Total: appends one history entry whether or not the effective
    /// condition holds (the equations encode stuttering).
    std::optional<StateValue> apply_transition(const StateValue& state,
                                               const std::string& transition,
                                               const std::vector<DataValue>& args,
                                               DiagnosticSink& sink) const;

    /// Enumerates every observer over the bounded argument domains;
    /// component-valued observers recurse into component equivalence
    /// (absent equals absent). Returns the first distinguishing witness.
    std::optional<EquivalenceResult> behaviorally_equal(const StateValue& a, const StateValue& b,
                                                        DiagnosticSink& sink) const;

    std::optional<std::vector<TraceStep>> run_scenario(const std::vector<ScenarioStep>& scenario,
                                                       DiagnosticSink& sink) const;

    Term state_term(const StateValue& state) const;
    std::vector<DataValue> domain_values(const std::string& sort) const;

private:
    struct Rewriter;
    std::optional<Term> normalize(const Term& term, RewriteStrategy strategy,
                                  DiagnosticSink& sink) const;
    std::optional<DataValue> interpret_normal_form(const Term& nf, const std::string& expect_sort,
                                                   DiagnosticSink& sink) const;
    std::optional<StateValue> parse_component_state(const Term& nf, const OtsModel& comp) const;
    Term build_call(const OperatorDecl& op, int hidden_index, const Term& state,
                    const std::vector<DataValue>& args) const;

    const ModuleSet& set_;
    OtsModel model_;
    std::map<std::string, OtsModel> registry_;
    DomainBounds bounds_;
    bool implicit_stuttering_ = false;
    std::map<std::string, std::vector<const Equation*>> rules_;
    std::map<std::string, const OperatorDecl*> op_cache_;
};

std::string render_trace_text(const std::vector<TraceStep>& trace);
nlohmann::ordered_json render_trace_json(const std::vector<TraceStep>& trace);

/// Parses the scenario JSON (`[{"transition": name, "args": [...]}]`);
/// strings name identifiers ("u1" -> id 1 of the parameter's sort).
std::optional<std::vector<ScenarioStep>> parse_scenario_json(const std::string& text,
                                                             const OtsModel& model,
                                                             DiagnosticSink& sink);

} // namespace otsc
