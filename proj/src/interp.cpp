#include "interp.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace otsc {

DataValue DataValue::of_int(long long v) {
    DataValue d;
    d.kind = Kind::Int;
    d.int_value = v;
    return d;
}
DataValue DataValue::of_bool(bool b) {
    DataValue d;
    d.kind = Kind::Bool;
    d.bool_value = b;
    return d;
}
DataValue DataValue::absent() {
    DataValue d;
    d.kind = Kind::Absent;
    return d;
}
DataValue DataValue::of_component(StateValue sv) {
    DataValue d;
    d.kind = Kind::Component;
    d.component = std::make_shared<StateValue>(std::move(sv));
    return d;
}

bool operator==(const DataValue& a, const DataValue& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case DataValue::Kind::Int: return a.int_value == b.int_value;
    case DataValue::Kind::Bool: return a.bool_value == b.bool_value;
    case DataValue::Kind::Absent: return true;
    case DataValue::Kind::Component: break;
    }
    const StateValue &x = *a.component, &y = *b.component;
    if (x.model != y.model || x.initial != y.initial || x.history.size() != y.history.size())
        return false;
    for (size_t i = 0; i < x.history.size(); ++i) {
        if (x.history[i].first != y.history[i].first) return false;
        if (x.history[i].second.size() != y.history[i].second.size()) return false;
        for (size_t k = 0; k < x.history[i].second.size(); ++k)
            if (!(x.history[i].second[k] == y.history[i].second[k])) return false;
    }
    return true;
}

std::string data_value_to_string(const DataValue& v) {
    switch (v.kind) {
    case DataValue::Kind::Int: return std::to_string(v.int_value);
    case DataValue::Kind::Bool: return v.bool_value ? "true" : "false";
    case DataValue::Kind::Absent: return "absent";
    case DataValue::Kind::Component: break;
    }
    std::string s = v.component->initial;
    for (const auto& [t, args] : v.component->history) {
        std::string a;
        for (size_t i = 0; i < args.size(); ++i)
            a += (i ? ", " : "") + data_value_to_string(args[i]);
        s = t + "(" + s + (a.empty() ? "" : ", " + a) + ")";
    }
    return s;
}

namespace {

struct EvalError {
    std::string code;
    std::string message;
};

bool is_bool_const(const Term& t, bool v) { return t.is_const(v ? "true" : "false"); }

Term bool_const(bool v) { return Term::apply(v ? "true" : "false"); }

} // namespace

struct Interpreter::Rewriter {
    const Interpreter& interp;
    DiagnosticSink& sink;
    RewriteStrategy strategy;
    long long fuel;
    std::set<const Equation*> warned;

    Rewriter(const Interpreter& i, DiagnosticSink& s, RewriteStrategy st)
        : interp(i), sink(s), strategy(st), fuel(i.bounds_.max_rewrite_steps) {}

    void spend() {
        if (--fuel < 0)
            throw EvalError{"fuel-exhausted",
                            "rewriting exceeded " +
                                std::to_string(interp.bounds_.max_rewrite_steps) +
                                " steps (possibly nonterminating specification)"};
    }

    std::optional<std::string> sort_quiet(const Term& t) const {
        DiagnosticSink scratch;
        return sort_of(t, interp.set_, interp.model_.module_name, scratch);
    }

    bool match(const Term& pat, const Term& t, std::map<std::string, Term>& subst) const {
        switch (pat.kind) {
        case Term::Kind::Var: {
            auto s = sort_quiet(t);
            if (!s || !interp.set_.sort_leq(*s, pat.sort)) return false;
            auto it = subst.find(pat.name);
            if (it != subst.end()) return it->second == t;
            subst[pat.name] = t;
            return true;
        }
        case Term::Kind::IntLit: return t.is_int() && t.value == pat.value;
        case Term::Kind::IdLit: return t.is_id() && t.value == pat.value && t.sort == pat.sort;
        case Term::Kind::Apply: break;
        }
        if (!t.is_apply() || t.name != pat.name || t.args.size() != pat.args.size()) return false;
        for (size_t i = 0; i < pat.args.size(); ++i)
            if (!match(pat.args[i], t.args[i], subst)) return false;
        return true;
    }

    Term normalize(Term t) {
        if (strategy == RewriteStrategy::LeftmostInnermost) return normalize_inner(std::move(t));
        return normalize_outer(std::move(t));
    }

    Term normalize_inner(Term t) {
        while (true) {
            if (t.is_apply())
                for (auto& a : t.args) a = normalize_inner(std::move(a));
            auto stepped = head_step(t);
            if (!stepped) return t;
            t = std::move(*stepped);
        }
    }

    Term normalize_outer(Term t) {
        while (true) {
            auto stepped = head_step(t);
            if (stepped) {
                t = std::move(*stepped);
                continue;
            }
            bool changed = false;
            if (t.is_apply()) {
                for (auto& a : t.args) {
                    Term na = normalize_outer(a);
                    if (!(na == a)) {
                        a = std::move(na);
                        changed = true;
                        break; // retry the head after the leftmost change
                    }
                }
            }
            if (!changed) return t;
        }
    }

    std::optional<Term> head_step(const Term& t) {
        if (!t.is_apply()) return std::nullopt;
        if (auto folded = fold_builtin(t)) {
            spend();
            return folded;
        }
        auto it = interp.rules_.find(t.name);
        if (it != interp.rules_.end()) {
            for (const Equation* e : it->second) {
                std::map<std::string, Term> subst;
                if (!match(e->lhs, t, subst)) continue;
                if (e->condition) {
                    Term cond = normalize(substitute(*e->condition, subst));
                    if (is_bool_const(cond, true)) {
                        // fall through to fire
                    } else if (is_bool_const(cond, false)) {
                        continue;
                    } else {
                        if (warned.insert(e).second)
                            sink.warn("condition-stuck",
                                      "condition '" + term_to_string(*e->condition) +
                                          "' reduced to '" + term_to_string(cond) +
                                          "', treating the equation as non-applicable",
                                      e->span);
                        continue;
                    }
                }
                spend();
                return substitute(e->rhs, subst);
            }
        }
        if (interp.implicit_stuttering_)
            if (auto stuttered = implicit_stutter(t)) {
                spend();
                return stuttered;
            }
        return std::nullopt;
    }

    // o(tau(u, a...), y...) -> o(u, y...) when c-tau(u, a...) is false
    std::optional<Term> implicit_stutter(const Term& t) {
        const OtsModel* owner = nullptr;
        const ObserverSpec* obs = nullptr;
        for (const auto& [name, m] : interp.registry_) {
            if (const ObserverSpec* o = m.find_observer(t.name)) {
                owner = &m;
                obs = o;
                break;
            }
        }
        if (!obs || static_cast<size_t>(obs->hidden_arg_index) >= t.args.size())
            return std::nullopt;
        const Term& h = t.args[obs->hidden_arg_index];
        if (!h.is_apply()) return std::nullopt;
        const TransitionSpec* tr = owner->find_transition(h.name);
        if (!tr || !tr->effective_condition) return std::nullopt;
        const OperatorDecl* cop = nullptr;
        for (const OperatorDecl* op :
             interp.set_.operators_named(*tr->effective_condition, interp.model_.module_name))
            cop = op;
        if (!cop || static_cast<size_t>(tr->hidden_arg_index) >= h.args.size())
            return std::nullopt;
        // rebuild the condition call with the transition's own arguments
        std::vector<Term> cargs;
        int chidden = -1;
        for (size_t i = 0; i < cop->arity.size(); ++i)
            if (interp.set_.is_hidden(cop->arity[i])) chidden = static_cast<int>(i);
        if (chidden < 0) return std::nullopt;
        size_t src = 0;
        for (size_t i = 0; i < cop->arity.size(); ++i) {
            if (static_cast<int>(i) == chidden) {
                cargs.push_back(h.args[tr->hidden_arg_index]);
            } else {
                while (src < h.args.size() && static_cast<int>(src) == tr->hidden_arg_index) ++src;
                if (src >= h.args.size()) return std::nullopt;
                cargs.push_back(h.args[src++]);
            }
        }
        Term cond = normalize(Term::apply(cop->name, std::move(cargs)));
        if (!is_bool_const(cond, false)) return std::nullopt;
        Term out = t;
        out.args[obs->hidden_arg_index] = h.args[tr->hidden_arg_index];
        return out;
    }

    std::optional<Term> fold_builtin(const Term& t) {
        auto ops = interp.set_.operators_named(t.name, interp.model_.module_name);
        if (ops.empty() || !ops.front()->builtin) return std::nullopt;
        const std::string& n = t.name;
        auto lit = [](const Term& x) { return x.is_int(); };
        if (n == "_+_" && lit(t.args[0]) && lit(t.args[1]))
            return Term::int_lit(t.args[0].value + t.args[1].value);
        if (n == "_-_" && lit(t.args[0]) && lit(t.args[1]))
            return Term::int_lit(t.args[0].value - t.args[1].value);
        if (n == "-_" && lit(t.args[0])) return Term::int_lit(-t.args[0].value);
        if (n == "_>=_" && lit(t.args[0]) && lit(t.args[1]))
            return bool_const(t.args[0].value >= t.args[1].value);
        if (n == "_>_" && lit(t.args[0]) && lit(t.args[1]))
            return bool_const(t.args[0].value > t.args[1].value);
        if (n == "not_") {
            if (is_bool_const(t.args[0], true)) return bool_const(false);
            if (is_bool_const(t.args[0], false)) return bool_const(true);
            return std::nullopt;
        }
        if (n == "_and_") {
            if (is_bool_const(t.args[0], false) || is_bool_const(t.args[1], false))
                return bool_const(false);
            if (is_bool_const(t.args[0], true)) return t.args[1];
            if (is_bool_const(t.args[1], true)) return t.args[0];
            return std::nullopt;
        }
        if (n == "_or_") {
            if (is_bool_const(t.args[0], true) || is_bool_const(t.args[1], true))
                return bool_const(true);
            if (is_bool_const(t.args[0], false)) return t.args[1];
            if (is_bool_const(t.args[1], false)) return t.args[0];
            return std::nullopt;
        }
        if (n == "_==_" || n == "_=/=_") {
            auto sa = sort_quiet(t.args[0]);
            auto sb = sort_quiet(t.args[1]);
            if (sa && interp.set_.is_hidden(*sa)) return std::nullopt;
            if (sb && interp.set_.is_hidden(*sb)) return std::nullopt;
            Term a = normalize(t.args[0]);
            Term b = normalize(t.args[1]);
            bool eq;
            if (a == b) {
                eq = true;
            } else if (term_is_ground(a) && term_is_ground(b)) {
                eq = false; // distinct ground normal forms of visible sort
            } else {
                return std::nullopt; // undecidable with free variables
            }
            return bool_const(n == "_==_" ? eq : !eq);
        }
        return std::nullopt;
    }
};

Interpreter::Interpreter(const ModuleSet& set, const OtsModel& model,
                         std::map<std::string, OtsModel> registry, DomainBounds bounds)
    : set_(set), model_(model), registry_(std::move(registry)), bounds_(bounds) {
    registry_[model_.module_name] = model_;
    // rule index over every module visible from the interpreted one, in
    // dependency order; equations apply first-match in that order
    for (const auto& name : set_.visible_from(model_.module_name)) {
        const SpecModule* m = set_.find_module(name);
        if (!m) continue;
        for (const auto& e : m->equations)
            if (e.lhs.is_apply()) rules_[e.lhs.name].push_back(&e);
    }
}

std::optional<Interpreter> Interpreter::create(const ModuleSet& set, const std::string& module,
                                               DomainBounds bounds, DiagnosticSink& sink) {
    auto model = classify(set, module, sink);
    if (!model) return std::nullopt;
    std::map<std::string, OtsModel> registry;
    for (const auto& name : set.visible_from(module)) {
        if (name == module) continue;
        const SpecModule* m = set.find_module(name);
        if (!m || m->builtin) continue;
        bool has_hidden = false;
        for (const auto& s : m->sorts)
            if (s.kind == SortKind::Hidden) has_hidden = true;
        if (!has_hidden) continue;
        DiagnosticSink scratch;
        if (auto comp = classify(set, name, scratch)) registry[name] = std::move(*comp);
    }
    return Interpreter(set, *model, std::move(registry), bounds);
}

const OtsModel* Interpreter::find_model(const std::string& module) const {
    auto it = registry_.find(module);
    return it == registry_.end() ? nullptr : &it->second;
}

StateValue Interpreter::initial_state(int index) const {
    StateValue sv;
    sv.model = model_.module_name;
    if (index >= 0 && static_cast<size_t>(index) < model_.initial_states.size())
        sv.initial = model_.initial_states[index];
    return sv;
}

Term Interpreter::build_call(const OperatorDecl& op, int hidden_index, const Term& state,
                             const std::vector<DataValue>& args) const {
    std::vector<Term> call_args;
    size_t vi = 0;
    for (size_t i = 0; i < op.arity.size(); ++i) {
        if (static_cast<int>(i) == hidden_index) {
            call_args.push_back(state);
            continue;
        }
        const std::string& slot = op.arity[i];
        const DataValue& v = args[vi++];
        switch (v.kind) {
        case DataValue::Kind::Int:
            if (set_.sort_leq(slot, prelude::kSortInt) ||
                set_.sort_leq(prelude::kSortInt, slot) ||
                set_.sort_leq(prelude::kSortNat, slot))
                call_args.push_back(Term::int_lit(v.int_value));
            else
                call_args.push_back(Term::id_lit(slot, v.int_value));
            break;
        case DataValue::Kind::Bool: call_args.push_back(bool_const(v.bool_value)); break;
        case DataValue::Kind::Component:
            call_args.push_back(state_term(*v.component));
            break;
        case DataValue::Kind::Absent:
            call_args.push_back(Term::apply("absent"));
            break;
        }
    }
    return Term::apply(op.name, std::move(call_args));
}

Term Interpreter::state_term(const StateValue& state) const {
    const OtsModel* m = find_model(state.model);
    Term t = Term::apply(state.initial);
    if (!m) return t;
    for (const auto& [name, args] : state.history) {
        const TransitionSpec* tr = m->find_transition(name);
        if (!tr) return t;
        t = build_call(*tr->op, tr->hidden_arg_index, t, args);
    }
    return t;
}

std::vector<DataValue> Interpreter::domain_values(const std::string& sort) const {
    std::vector<DataValue> out;
    if (sort == prelude::kSortBool) {
        out.push_back(DataValue::of_bool(false));
        out.push_back(DataValue::of_bool(true));
        return out;
    }
    if (set_.sort_leq(sort, prelude::kSortInt)) {
        long long lo = bounds_.int_lo, hi = bounds_.int_hi;
        if (sort == prelude::kSortNat) lo = std::max<long long>(0, lo);
        for (long long v = lo; v <= hi; ++v) out.push_back(DataValue::of_int(v));
        return out;
    }
    for (long long v = bounds_.id_lo; v <= bounds_.id_hi; ++v)
        out.push_back(DataValue::of_int(v));
    return out;
}

std::optional<Term> Interpreter::normalize(const Term& term, RewriteStrategy strategy,
                                           DiagnosticSink& sink) const {
    try {
        Rewriter rw(*this, sink, strategy);
        return rw.normalize(term);
    } catch (const EvalError& e) {
        sink.error(e.code, e.message, term.span);
        return std::nullopt;
    }
}

namespace {

// first remaining application that is neither a value nor a state
// constructor, leftmost-innermost
const Term* find_stuck(const Term& t, const ModuleSet& set, const std::string& context) {
    for (const auto& a : t.args)
        if (const Term* s = find_stuck(a, set, context)) return s;
    if (!t.is_apply()) return nullptr;
    auto ops = set.operators_named(t.name, context);
    if (ops.empty()) return &t;
    const OperatorDecl* op = ops.front();
    if (op->builtin) {
        if (t.args.empty()) return nullptr; // true / false
        return &t;                          // unfolded builtin application
    }
    if (op->poly_equality) return &t;
    if (set.is_hidden(op->coarity)) return nullptr; // state constructors stay
    return &t; // visible-coarity operator with no applicable rule
}

bool contains_absent(const Term& t, const std::set<std::string>& absents) {
    if (t.is_apply() && t.args.empty() && absents.count(t.name)) return true;
    for (const auto& a : t.args)
        if (contains_absent(a, absents)) return true;
    return false;
}

} // namespace

std::optional<Term> Interpreter::reduce(const Term& term, DiagnosticSink& sink,
                                        RewriteStrategy strategy) const {
    auto nf = normalize(term, strategy, sink);
    if (!nf) return std::nullopt;
    if (const Term* stuck = find_stuck(*nf, set_, model_.module_name)) {
        std::set<std::string> absents;
        for (const auto& [name, m] : registry_)
            for (const auto& p : m.projections)
                if (p.absent_value) absents.insert(*p.absent_value);
        if (contains_absent(*stuck, absents))
            sink.error("projection-absent",
                       "term observes an absent component: stuck at '" + term_to_string(*stuck) +
                           "'",
                       term.span);
        else
            sink.error("stuck-term",
                       "no rule applies to '" + term_to_string(*stuck) + "' (normal form '" +
                           term_to_string(*nf) + "')",
                       term.span);
        return std::nullopt;
    }
    return nf;
}

std::optional<DataValue> Interpreter::interpret_normal_form(const Term& nf,
                                                            const std::string& expect_sort,
                                                            DiagnosticSink& sink) const {
    std::set<std::string> absents;
    for (const auto& [name, m] : registry_)
        for (const auto& p : m.projections)
            if (p.absent_value) absents.insert(*p.absent_value);

    if (nf.is_int()) return DataValue::of_int(nf.value);
    if (nf.is_id()) return DataValue::of_int(nf.value);
    if (is_bool_const(nf, true)) return DataValue::of_bool(true);
    if (is_bool_const(nf, false)) return DataValue::of_bool(false);
    if (nf.is_apply() && nf.args.empty() && absents.count(nf.name)) return DataValue::absent();

    if (set_.is_hidden(expect_sort)) {
        // component state: must be history-shaped over the owning model
        const SortDecl* sd = set_.find_sort_anywhere(expect_sort);
        const OtsModel* comp = sd ? find_model(sd->module) : nullptr;
        if (comp)
            if (auto sv = parse_component_state(nf, *comp))
                return DataValue::of_component(std::move(*sv));
        if (contains_absent(nf, absents)) return DataValue::absent();
        sink.error("stuck-term",
                   "'" + term_to_string(nf) + "' is not a reachable state of sort " + expect_sort);
        return std::nullopt;
    }
    if (contains_absent(nf, absents)) return DataValue::absent();
    sink.error("stuck-term", "no rule applies to '" + term_to_string(nf) + "'");
    return std::nullopt;
}

std::optional<StateValue> Interpreter::parse_component_state(const Term& nf,
                                                             const OtsModel& comp) const {
    if (!nf.is_apply()) return std::nullopt;
    if (nf.args.empty()) {
        for (const auto& init : comp.initial_states)
            if (nf.name == init) {
                StateValue sv;
                sv.model = comp.module_name;
                sv.initial = init;
                return sv;
            }
        return std::nullopt;
    }
    const TransitionSpec* tr = comp.find_transition(nf.name);
    if (!tr || static_cast<size_t>(tr->hidden_arg_index) >= nf.args.size()) return std::nullopt;
    auto inner = parse_component_state(nf.args[tr->hidden_arg_index], comp);
    if (!inner) return std::nullopt;
    std::vector<DataValue> args;
    for (size_t i = 0; i < nf.args.size(); ++i) {
        if (static_cast<int>(i) == tr->hidden_arg_index) continue;
        const Term& a = nf.args[i];
        if (a.is_int())
            args.push_back(DataValue::of_int(a.value));
        else if (a.is_id())
            args.push_back(DataValue::of_int(a.value));
        else if (is_bool_const(a, true))
            args.push_back(DataValue::of_bool(true));
        else if (is_bool_const(a, false))
            args.push_back(DataValue::of_bool(false));
        else
            return std::nullopt;
    }
    inner->history.push_back({nf.name, std::move(args)});
    return inner;
}

std::optional<DataValue> Interpreter::observe(const StateValue& state,
                                              const std::string& observer,
                                              const std::vector<DataValue>& args,
                                              DiagnosticSink& sink) const {
    const OtsModel* m = find_model(state.model);
    if (!m) {
        sink.error("unknown-module", "state belongs to unknown model '" + state.model + "'");
        return std::nullopt;
    }
    const OperatorDecl* op = nullptr;
    int hidden_index = 0;
    std::string result_sort;
    size_t nparams = 0;
    // own observers/projections, then inherited ones
    for (const OtsModel* cur = m; cur;) {
        if (const ObserverSpec* o = cur->find_observer(observer)) {
            op = o->op;
            hidden_index = o->hidden_arg_index;
            result_sort = o->result_sort;
            nparams = o->param_sorts.size();
            break;
        }
        if (const ProjectionSpec* p = cur->find_projection(observer)) {
            op = p->op;
            hidden_index = p->hidden_arg_index;
            result_sort = p->component_hidden_sort;
            nparams = p->id_sorts.size();
            break;
        }
        cur = cur->extends_module ? find_model(*cur->extends_module) : nullptr;
    }
    if (!op) {
        sink.error("unknown-observer",
                   "'" + observer + "' is not an observer of model '" + state.model + "'");
        return std::nullopt;
    }
    if (args.size() != nparams) {
        sink.error("arity-mismatch", "observer '" + observer + "' expects " +
                                         std::to_string(nparams) + " data arguments, got " +
                                         std::to_string(args.size()));
        return std::nullopt;
    }
    Term call = build_call(*op, hidden_index, state_term(state), args);
    auto nf = normalize(call, RewriteStrategy::LeftmostInnermost, sink);
    if (!nf) return std::nullopt;
    return interpret_normal_form(*nf, result_sort, sink);
}

std::optional<bool> Interpreter::check_effective(const StateValue& state,
                                                 const std::string& transition,
                                                 const std::vector<DataValue>& args,
                                                 DiagnosticSink& sink) const {
    const OtsModel* m = find_model(state.model);
    const TransitionSpec* tr = m ? m->find_transition(transition) : nullptr;
    if (!tr) {
        sink.error("unknown-transition",
                   "'" + transition + "' is not a transition of model '" + state.model + "'");
        return std::nullopt;
    }
    if (!tr->effective_condition) return true;
    const OperatorDecl* cop = nullptr;
    for (const OperatorDecl* op : set_.operators_named(*tr->effective_condition, state.model))
        cop = op;
    if (!cop) return true;
    int hidden_index = 0;
    for (size_t i = 0; i < cop->arity.size(); ++i)
        if (set_.is_hidden(cop->arity[i])) hidden_index = static_cast<int>(i);
    Term call = build_call(*cop, hidden_index, state_term(state), args);
    auto nf = normalize(call, RewriteStrategy::LeftmostInnermost, sink);
    if (!nf) return std::nullopt;
    if (is_bool_const(*nf, true)) return true;
    if (is_bool_const(*nf, false)) return false;
    sink.error("non-boolean-condition",
               "effective condition '" + *tr->effective_condition + "' reduced to '" +
                   term_to_string(*nf) + "'");
    return std::nullopt;
}

std::optional<StateValue> Interpreter::apply_transition(const StateValue& state,
                                                        const std::string& transition,
                                                        const std::vector<DataValue>& args,
                                                        DiagnosticSink& sink) const {
    const OtsModel* m = find_model(state.model);
    const TransitionSpec* tr = m ? m->find_transition(transition) : nullptr;
    if (!tr) {
        sink.error("unknown-transition",
                   "'" + transition + "' is not a transition of model '" + state.model + "'");
        return std::nullopt;
    }
    if (args.size() != tr->param_sorts.size()) {
        sink.error("arity-mismatch", "transition '" + transition + "' expects " +
                                         std::to_string(tr->param_sorts.size()) +
                                         " data arguments, got " + std::to_string(args.size()));
        return std::nullopt;
    }
    StateValue next = state;
    next.history.push_back({transition, args});
    return next;
}

namespace {

void enumerate_tuples(const std::vector<std::vector<DataValue>>& domains,
                      std::vector<DataValue>& cur,
                      const std::function<bool(const std::vector<DataValue>&)>& fn) {
    if (cur.size() == domains.size()) {
        fn(cur);
        return;
    }
    for (const auto& v : domains[cur.size()]) {
        cur.push_back(v);
        enumerate_tuples(domains, cur, fn);
        cur.pop_back();
    }
}

// Derives which component ids a transition step touches, by unifying the
// modify equation's projection id variables with the transition's
// argument variables through the guard's equality atoms.
std::optional<std::vector<DataValue>> affected_ids_impl(const Equation& eq,
                                                        const TransitionSpec& tr,
                                                        const ProjectionSpec& p,
                                                        const std::vector<DataValue>& args) {
    if (p.id_sorts.empty()) return std::vector<DataValue>{};
    if (!eq.lhs.is_apply()) return std::nullopt;
    std::vector<std::string> id_vars;
    for (size_t i = 0; i < eq.lhs.args.size(); ++i) {
        if (static_cast<int>(i) == p.hidden_arg_index) continue;
        if (!eq.lhs.args[i].is_var()) return std::nullopt;
        id_vars.push_back(eq.lhs.args[i].name);
    }
    if (static_cast<size_t>(p.hidden_arg_index) >= eq.lhs.args.size()) return std::nullopt;
    const Term& tau = eq.lhs.args[p.hidden_arg_index];
    if (!tau.is_apply()) return std::nullopt;
    std::map<std::string, size_t> trans_var_pos;
    size_t vi = 0;
    for (size_t i = 0; i < tau.args.size(); ++i) {
        if (static_cast<int>(i) == tr.hidden_arg_index) continue;
        if (tau.args[i].is_var()) trans_var_pos[tau.args[i].name] = vi;
        ++vi;
    }
    std::map<std::string, std::string> alias;
    if (eq.condition) {
        std::vector<const Term*> stack{&*eq.condition};
        while (!stack.empty()) {
            const Term* t = stack.back();
            stack.pop_back();
            if (t->is_apply() && t->name == "_and_") {
                stack.push_back(&t->args[0]);
                stack.push_back(&t->args[1]);
            } else if (t->is_apply() && t->name == "_==_" && t->args[0].is_var() &&
                       t->args[1].is_var()) {
                alias[t->args[0].name] = t->args[1].name;
                alias[t->args[1].name] = t->args[0].name;
            }
        }
    }
    std::vector<DataValue> out;
    for (const auto& v : id_vars) {
        size_t idx;
        if (trans_var_pos.count(v))
            idx = trans_var_pos[v];
        else if (alias.count(v) && trans_var_pos.count(alias[v]))
            idx = trans_var_pos[alias[v]];
        else
            return std::nullopt;
        if (idx >= args.size()) return std::nullopt;
        out.push_back(args[idx]);
    }
    return out;
}

std::string render_args(const std::vector<DataValue>& args,
                        const std::vector<std::string>& sorts, const ModuleSet& set) {
    std::string out;
    for (size_t i = 0; i < args.size(); ++i) {
        if (i) out += ", ";
        if (args[i].kind == DataValue::Kind::Int && i < sorts.size() &&
            !set.sort_leq(sorts[i], prelude::kSortInt) && sorts[i] != prelude::kSortBool) {
            char c = static_cast<char>(std::tolower(sorts[i][0]));
            out += c + std::to_string(args[i].int_value);
        } else {
            out += data_value_to_string(args[i]);
        }
    }
    return out;
}

} // namespace

std::optional<EquivalenceResult> Interpreter::behaviorally_equal(const StateValue& a,
                                                                 const StateValue& b,
                                                                 DiagnosticSink& sink) const {
    if (a.model != b.model) {
        sink.error("unknown-module", "states belong to different models");
        return std::nullopt;
    }
    const OtsModel* m = find_model(a.model);
    if (!m) {
        sink.error("unknown-module", "state belongs to unknown model '" + a.model + "'");
        return std::nullopt;
    }
    // observers of the model plus everything inherited
    std::vector<std::pair<std::string, std::vector<std::string>>> experiments;
    for (const OtsModel* cur = m; cur;) {
        for (const auto& o : cur->observers) experiments.push_back({o.name, o.param_sorts});
        for (const auto& p : cur->projections) experiments.push_back({p.name, p.id_sorts});
        cur = cur->extends_module ? find_model(*cur->extends_module) : nullptr;
    }

    for (const auto& [name, sorts] : experiments) {
        std::vector<std::vector<DataValue>> domains;
        for (const auto& s : sorts) domains.push_back(domain_values(s));
        bool failed = false;
        EquivalenceResult result;
        std::vector<DataValue> cur;
        bool error = false;
        std::function<bool(const std::vector<DataValue>&)> fn =
            [&](const std::vector<DataValue>& args) {
                if (failed || error) return false;
                auto va = observe(a, name, args, sink);
                auto vb = observe(b, name, args, sink);
                if (!va || !vb) {
                    error = true;
                    return false;
                }
                bool eq;
                if (va->kind == DataValue::Kind::Component ||
                    vb->kind == DataValue::Kind::Component) {
                    if (va->kind != vb->kind) {
                        eq = false; // absent vs present
                    } else {
                        auto sub = behaviorally_equal(*va->component, *vb->component, sink);
                        if (!sub) {
                            error = true;
                            return false;
                        }
                        eq = sub->equal;
                    }
                } else {
                    eq = *va == *vb;
                }
                if (!eq) {
                    failed = true;
                    result.equal = false;
                    result.witness_observer = name;
                    result.witness_args = "(" + render_args(args, sorts, set_) + ")";
                }
                return true;
            };
        enumerate_tuples(domains, cur, fn);
        if (error) return std::nullopt;
        if (failed) return result;
    }
    return EquivalenceResult{};
}

std::optional<std::vector<TraceStep>> Interpreter::run_scenario(
    const std::vector<ScenarioStep>& scenario, DiagnosticSink& sink) const {
    if (model_.initial_states.empty()) {
        sink.error("no-initial-state",
                   "model '" + model_.module_name + "' declares no initial state");
        return std::nullopt;
    }
    auto effects = projection_effects(model_, set_);
    StateValue state = initial_state();
    std::vector<TraceStep> trace;

    auto snapshot = [&](int step, const std::string& action) -> bool {
        TraceStep ts;
        ts.step = step;
        ts.action = action;
        const OtsModel* m = find_model(state.model);
        std::vector<std::pair<std::string, std::vector<std::string>>> experiments;
        for (const OtsModel* cur = m; cur;) {
            for (const auto& o : cur->observers) experiments.push_back({o.name, o.param_sorts});
            for (const auto& p : cur->projections) experiments.push_back({p.name, p.id_sorts});
            cur = cur->extends_module ? find_model(*cur->extends_module) : nullptr;
        }
        for (const auto& [name, sorts] : experiments) {
            std::vector<std::vector<DataValue>> domains;
            for (const auto& s : sorts) domains.push_back(domain_values(s));
            std::vector<DataValue> cur;
            bool error = false;
            std::function<bool(const std::vector<DataValue>&)> fn =
                [&](const std::vector<DataValue>& args) {
                    if (error) return false;
                    auto v = observe(state, name, args, sink);
                    if (!v) {
                        error = true;
                        return false;
                    }
                    std::string display = name;
                    if (!args.empty()) display += "(" + render_args(args, sorts, set_) + ")";
                    ts.observations.push_back({display, data_value_to_string(*v)});
                    return true;
                };
            enumerate_tuples(domains, cur, fn);
            if (error) return false;
        }
        trace.push_back(std::move(ts));
        return true;
    };

    if (!snapshot(0, "")) return std::nullopt;

    int step_no = 0;
    for (const auto& step : scenario) {
        ++step_no;
        const TransitionSpec* tr = model_.find_transition(step.transition);
        if (!tr) {
            sink.error("unknown-transition", "scenario step " + std::to_string(step_no) +
                                                 ": unknown transition '" + step.transition + "'");
            return std::nullopt;
        }
        if (step.args.size() != tr->param_sorts.size()) {
            sink.error("arity-mismatch",
                       "scenario step " + std::to_string(step_no) + ": transition '" +
                           step.transition + "' expects " +
                           std::to_string(tr->param_sorts.size()) + " arguments");
            return std::nullopt;
        }
        // a component-modifying transition applied where the projected
        // component is absent cannot take effect; report it
        for (const auto& p : model_.projections) {
            auto it = effects.find({tr->name, p.name});
            if (it == effects.end()) continue;
            std::optional<std::vector<DataValue>> ids;
            for (const auto& pe : it->second)
                if (pe.kind == ProjectionEffect::Kind::Modify && pe.eq && !ids)
                    ids = affected_ids_impl(*pe.eq, *tr, p, step.args);
            if (!ids) continue;
            auto v = observe(state, p.name, *ids, sink);
            if (!v) return std::nullopt;
            if (v->kind == DataValue::Kind::Absent) {
                sink.error("projection-absent",
                           "scenario step " + std::to_string(step_no) + ": transition '" +
                               step.transition + "' modifies component '" + p.name + "(" +
                               render_args(*ids, p.id_sorts, set_) +
                               ")' which is absent in the current state");
                return std::nullopt;
            }
        }
        auto next = apply_transition(state, step.transition, step.args, sink);
        if (!next) return std::nullopt;
        state = *next;
        std::string action = step.transition;
        if (!step.args.empty()) action += "(" + render_args(step.args, tr->param_sorts, set_) + ")";
        if (!snapshot(step_no, action)) return std::nullopt;
    }
    return trace;
}

std::string render_trace_text(const std::vector<TraceStep>& trace) {
    std::ostringstream os;
    for (const auto& ts : trace) {
        if (ts.action.empty())
            os << "step " << ts.step << "  (initial)\n";
        else
            os << "step " << ts.step << "  " << ts.action << "\n";
        for (const auto& [k, v] : ts.observations) os << "  " << k << " = " << v << "\n";
    }
    return os.str();
}

nlohmann::ordered_json render_trace_json(const std::vector<TraceStep>& trace) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& ts : trace) {
        nlohmann::ordered_json o;
        o["step"] = ts.step;
        o["action"] = ts.action.empty() ? nlohmann::ordered_json(nullptr)
                                        : nlohmann::ordered_json(ts.action);
        nlohmann::ordered_json obs;
        for (const auto& [k, v] : ts.observations) {
            if (v == "true" || v == "false")
                obs[k] = v == "true";
            else if (v == "absent")
                obs[k] = nullptr;
            else if (!v.empty() && (std::isdigit(static_cast<unsigned char>(v[0])) ||
                                    (v[0] == '-' && v.size() > 1)))
                obs[k] = std::stoll(v);
            else
                obs[k] = v;
        }
        o["observations"] = obs;
        arr.push_back(o);
    }
    return arr;
}

std::optional<std::vector<ScenarioStep>> parse_scenario_json(const std::string& text,
                                                             const OtsModel& model,
                                                             DiagnosticSink& sink) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_array()) {
        sink.error("bad-scenario", "scenario must be a JSON array of {transition, args} objects");
        return std::nullopt;
    }
    std::vector<ScenarioStep> out;
    for (const auto& e : j) {
        if (!e.is_object() || !e.contains("transition")) {
            sink.error("bad-scenario", "scenario entry missing 'transition'");
            return std::nullopt;
        }
        ScenarioStep step;
        step.transition = e["transition"].get<std::string>();
        const TransitionSpec* tr = model.find_transition(step.transition);
        auto args = e.value("args", nlohmann::json::array());
        for (size_t i = 0; i < args.size(); ++i) {
            const auto& a = args[i];
            if (a.is_number_integer()) {
                step.args.push_back(DataValue::of_int(a.get<long long>()));
            } else if (a.is_boolean()) {
                step.args.push_back(DataValue::of_bool(a.get<bool>()));
            } else if (a.is_string()) {
                // identifiers: "u1" maps into the id range as 1
                std::string s = a.get<std::string>();
                size_t p = 0;
                while (p < s.size() && !std::isdigit(static_cast<unsigned char>(s[p]))) ++p;
                if (p == s.size()) {
                    sink.error("bad-scenario",
                               "identifier argument '" + s + "' carries no index digits");
                    return std::nullopt;
                }
                step.args.push_back(DataValue::of_int(std::stoll(s.substr(p))));
            } else {
                sink.error("bad-scenario", "unsupported scenario argument type");
                return std::nullopt;
            }
        }
        (void)tr; // arity checked when the scenario runs
        out.push_back(std::move(step));
    }
    return out;
}

} // namespace otsc
