#include "analyzer.hpp"

#include <algorithm>
#include <set>

namespace otsc {

namespace {

bool is_visible(const ModuleSet& set, const std::string& sort) { return !set.is_hidden(sort); }

std::vector<int> hidden_positions(const ModuleSet& set, const OperatorDecl& op) {
    std::vector<int> out;
    for (size_t i = 0; i < op.arity.size(); ++i)
        if (set.is_hidden(op.arity[i])) out.push_back(static_cast<int>(i));
    return out;
}

std::vector<std::string> visible_args(const ModuleSet& set, const OperatorDecl& op) {
    std::vector<std::string> out;
    for (const auto& a : op.arity)
        if (!set.is_hidden(a)) out.push_back(a);
    return out;
}

// The hidden-argument subterm of an observer/projection/transition
// application, by declared position.
const Term* hidden_arg(const Term& t, int index) {
    if (!t.is_apply() || index < 0 || static_cast<size_t>(index) >= t.args.size()) return nullptr;
    return &t.args[index];
}

} // namespace

const ObserverSpec* OtsModel::find_observer(const std::string& name) const {
    for (const auto& o : observers)
        if (o.name == name) return &o;
    return nullptr;
}
const TransitionSpec* OtsModel::find_transition(const std::string& name) const {
    for (const auto& t : transitions)
        if (t.name == name) return &t;
    return nullptr;
}
const ProjectionSpec* OtsModel::find_projection(const std::string& name) const {
    for (const auto& p : projections)
        if (p.name == name) return &p;
    return nullptr;
}

std::optional<OtsModel> classify(const ModuleSet& set, const std::string& module_name,
                                 DiagnosticSink& sink) {
    const SpecModule* m = set.find_module(module_name);
    if (!m) {
        sink.error("unknown-module", "module '" + module_name + "' not found");
        return std::nullopt;
    }

    OtsModel model;
    model.module_name = module_name;

    std::vector<const SortDecl*> hidden;
    for (const auto& s : m->sorts)
        if (s.kind == SortKind::Hidden) hidden.push_back(&s);
    if (hidden.empty()) {
        sink.error("no-hidden-sort", "module '" + module_name + "' declares no hidden sort",
                   m->span);
        return std::nullopt;
    }
    if (hidden.size() > 1) {
        sink.error("multiple-hidden-sorts",
                   "module '" + module_name + "' declares more than one hidden sort", m->span);
        return std::nullopt;
    }
    model.hidden_sort = hidden.front()->name;

    // inheritance: explicit hidden subsort declaration across modules
    for (const auto& sup : hidden.front()->supersorts) {
        const SortDecl* d = set.find_sort_anywhere(sup);
        if (d && d->kind == SortKind::Hidden && d->module != module_name) {
            if (model.extends_module)
                sink.warn("behavioral-bad-signature",
                          "hidden sort '" + model.hidden_sort +
                              "' has several hidden supersorts; using '" + *model.extends_module +
                              "'",
                          hidden.front()->span);
            else
                model.extends_module = d->module;
        }
    }

    for (const auto& op : m->operators) {
        auto hpos = hidden_positions(set, op);
        if (op.behavioral) {
            if (is_visible(set, op.coarity)) {
                // observer
                if (hpos.size() != 1) {
                    sink.error("behavioral-bad-signature",
                               "observer '" + op.name + "' must take exactly one hidden argument",
                               op.span);
                    continue;
                }
                ObserverSpec o;
                o.name = op.name;
                o.param_sorts = visible_args(set, op);
                o.result_sort = op.coarity;
                o.hidden_arg_index = hpos.front();
                o.op = &op;
                model.observers.push_back(std::move(o));
            } else if (set.sort_leq(op.coarity, model.hidden_sort) ||
                       set.sort_leq(model.hidden_sort, op.coarity)) {
                // transition on the module's own state space
                if (hpos.empty()) {
                    sink.error("transition-without-state-argument",
                               "transition '" + op.name + "' has no state argument", op.span);
                    continue;
                }
                int own = -1;
                for (int i : hpos)
                    if (set.sorts_comparable(op.arity[i], model.hidden_sort)) own = i;
                if (own < 0 || hpos.size() > 1) {
                    sink.error("behavioral-bad-signature",
                               "transition '" + op.name +
                                   "' must take exactly one argument of its own hidden sort",
                               op.span);
                    continue;
                }
                TransitionSpec t;
                t.name = op.name;
                t.param_sorts = visible_args(set, op);
                t.hidden_arg_index = own;
                t.op = &op;
                model.transitions.push_back(std::move(t));
            } else {
                // projection to an imported object's state space
                if (hpos.size() != 1 || !set.sorts_comparable(op.arity[hpos.front()],
                                                              model.hidden_sort)) {
                    sink.error("behavioral-bad-signature",
                               "projection '" + op.name +
                                   "' must take exactly one argument of its own hidden sort",
                               op.span);
                    continue;
                }
                const SortDecl* comp = set.find_sort_anywhere(op.coarity);
                ProjectionSpec p;
                p.name = op.name;
                p.id_sorts = visible_args(set, op);
                p.component_module = comp ? comp->module : "";
                p.component_hidden_sort = op.coarity;
                p.hidden_arg_index = hpos.front();
                p.op = &op;
                model.projections.push_back(std::move(p));
            }
        }
    }

    std::set<std::string> bound_conditions;
    std::set<std::string> absent_candidates;
    for (const auto& op : m->operators) {
        if (op.behavioral) continue;
        if (op.arity.empty() && op.coarity == model.hidden_sort) {
            model.initial_states.push_back(op.name);
            continue;
        }
        if (op.name.rfind("c-", 0) == 0) {
            std::string target = op.name.substr(2);
            TransitionSpec* t = nullptr;
            for (auto& tr : model.transitions)
                if (tr.name == target) t = &tr;
            if (!t) {
                sink.error("dangling-effective-condition",
                           "operator '" + op.name + "' names no transition '" + target + "'",
                           op.span);
                continue;
            }
            if (!set.sort_leq(op.coarity, prelude::kSortBool)) {
                sink.error("effective-condition-not-boolean",
                           "effective condition '" + op.name + "' must return Bool", op.span);
                continue;
            }
            // the condition shares the transition's parameter sorts plus
            // the hidden sort
            if (visible_args(set, op) != t->param_sorts ||
                hidden_positions(set, op).size() != 1)
                sink.warn("effective-condition-signature",
                          "condition '" + op.name +
                              "' does not share the signature of transition '" + target + "'",
                          op.span);
            t->effective_condition = op.name;
            bound_conditions.insert(op.name);
            continue;
        }
        if (op.arity.empty() && set.is_hidden(op.coarity) && op.coarity != model.hidden_sort) {
            absent_candidates.insert(op.name);
            continue;
        }
        model.auxiliary_ops.push_back(op.name);
    }

    // bind equations to the operators they define
    for (size_t i = 0; i < m->equations.size(); ++i) {
        const Equation& e = m->equations[i];
        if (!e.lhs.is_apply()) continue;
        int idx = static_cast<int>(i);
        const std::string& head = e.lhs.name;
        if (auto* o = const_cast<ObserverSpec*>(model.find_observer(head))) {
            o->defining_equations.push_back(idx);
            const Term* h = hidden_arg(e.lhs, o->hidden_arg_index);
            if (h && h->is_apply())
                if (auto* t = const_cast<TransitionSpec*>(model.find_transition(h->name)))
                    t->effect_equations.push_back(idx);
            continue;
        }
        if (auto* p = const_cast<ProjectionSpec*>(model.find_projection(head))) {
            p->defining_equations.push_back(idx);
            const Term* h = hidden_arg(e.lhs, p->hidden_arg_index);
            if (h && h->is_apply())
                if (auto* t = const_cast<TransitionSpec*>(model.find_transition(h->name)))
                    t->effect_equations.push_back(idx);
            // nullary foreign-hidden constants appearing as a projection
            // equation's whole right side are the component's absent value
            if (e.rhs.is_apply() && e.rhs.args.empty() && absent_candidates.count(e.rhs.name))
                if (!p->absent_value) p->absent_value = e.rhs.name;
            continue;
        }
        if (head.rfind("c-", 0) == 0 && bound_conditions.count(head)) {
            for (auto& t : model.transitions)
                if (t.effective_condition == head) {
                    if (t.condition_equation >= 0)
                        sink.warn("effective-condition-signature",
                                  "condition '" + head + "' has several defining equations", e.span);
                    else
                        t.condition_equation = idx;
                }
            continue;
        }
    }

    // unbound absent candidates stay auxiliary
    std::set<std::string> used_absent;
    for (const auto& p : model.projections)
        if (p.absent_value) used_absent.insert(*p.absent_value);
    for (const auto& name : absent_candidates)
        if (!used_absent.count(name)) model.auxiliary_ops.push_back(name);

    // guard shape check: effect equations should be guarded by the bound
    // condition, its negation, or identifier dispatch comparisons
    for (const auto& t : model.transitions) {
        for (int idx : t.effect_equations) {
            const Equation& e = m->equations[idx];
            if (!e.condition) continue;
            std::vector<const Term*> parts{&*e.condition};
            std::vector<const Term*> atoms;
            while (!parts.empty()) {
                const Term* p = parts.back();
                parts.pop_back();
                if (p->is_apply() && p->name == "_and_") {
                    parts.push_back(&p->args[0]);
                    parts.push_back(&p->args[1]);
                } else {
                    atoms.push_back(p);
                }
            }
            for (const Term* a : atoms) {
                bool ok = false;
                if (a->is_apply()) {
                    if (t.effective_condition && a->name == *t.effective_condition) ok = true;
                    if (a->name == "not_" && a->args[0].is_apply() && t.effective_condition &&
                        a->args[0].name == *t.effective_condition)
                        ok = true;
                    // identifier dispatch: V == W / V =/= W over variables
                    if ((a->name == "_==_" || a->name == "_=/=_") && a->args[0].is_var() &&
                        a->args[1].is_var())
                        ok = true;
                }
                if (!ok)
                    sink.warn("guard-unrecognized",
                              "equation for transition '" + t.name +
                                  "' is guarded by something other than its effective condition",
                              e.span);
            }
        }
    }

    return model;
}

namespace {

// A chain is a nesting of component operator applications whose
// innermost hidden argument bottoms out in a projection application (or
// a component constant for creation).
struct ChainInfo {
    bool is_chain = false;
    bool uses_projection = false;
    bool from_initial = false;     // innermost is a component initial/absent constant
    bool has_transition = false;   // some component transition is applied
    std::string projection;        // innermost projection name, if any
};

ChainInfo classify_chain(const Term& t, const OtsModel& composite,
                         const std::map<std::string, const OtsModel*>& components,
                         const ModuleSet& set) {
    ChainInfo info;
    if (!t.is_apply()) return info;
    if (const ProjectionSpec* p = composite.find_projection(t.name)) {
        info.is_chain = true;
        info.uses_projection = true;
        info.projection = p->name;
        return info;
    }
    // component constant (initial or absent value)
    for (const auto& [name, comp] : components) {
        if (t.args.empty()) {
            for (const auto& init : comp->initial_states)
                if (t.name == init) {
                    info.is_chain = true;
                    info.from_initial = true;
                    return info;
                }
        }
    }
    if (t.args.empty()) {
        // absent constants are nullary foreign-hidden ops
        for (const auto& p : composite.projections)
            if (p.absent_value && *p.absent_value == t.name) {
                info.is_chain = true;
                info.from_initial = true;
                return info;
            }
    }
    // component observer or transition applied to a chain
    for (const auto& [name, comp] : components) {
        const ObserverSpec* o = comp->find_observer(t.name);
        const TransitionSpec* tr = comp->find_transition(t.name);
        if (!o && !tr) continue;
        int hidx = o ? o->hidden_arg_index : tr->hidden_arg_index;
        if (static_cast<size_t>(hidx) >= t.args.size()) continue;
        ChainInfo inner = classify_chain(t.args[hidx], composite, components, set);
        if (!inner.is_chain) continue;
        inner.has_transition = inner.has_transition || tr != nullptr;
        inner.is_chain = true;
        return inner;
    }
    // builtin wrapper around chains (the composition f of Definition 3)
    auto ops = set.operators_named(t.name, composite.module_name);
    if (!ops.empty() && ops.front()->builtin) {
        ChainInfo merged;
        merged.is_chain = true;
        for (const auto& a : t.args) {
            if (!a.is_apply()) continue;
            ChainInfo inner = classify_chain(a, composite, components, set);
            if (!inner.is_chain) return ChainInfo{};
            merged.uses_projection = merged.uses_projection || inner.uses_projection;
            merged.has_transition = merged.has_transition || inner.has_transition;
        }
        return merged;
    }
    return info;
}

} // namespace

std::map<std::pair<std::string, std::string>, std::vector<ProjectionEffect>>
projection_effects(const OtsModel& model, const ModuleSet& set) {
    std::map<std::pair<std::string, std::string>, std::vector<ProjectionEffect>> out;
    const SpecModule* m = set.find_module(model.module_name);
    if (!m) return out;
    for (const auto& p : model.projections) {
        for (int idx : p.defining_equations) {
            const Equation& e = m->equations[idx];
            const Term* h = e.lhs.is_apply() && static_cast<size_t>(p.hidden_arg_index) <
                                                    e.lhs.args.size()
                                ? &e.lhs.args[p.hidden_arg_index]
                                : nullptr;
            if (!h || !h->is_apply()) continue;
            const TransitionSpec* t = model.find_transition(h->name);
            if (!t) continue;
            ProjectionEffect pe;
            pe.equation = idx;
            pe.eq = &e;
            const Term& rhs = e.rhs;
            if (rhs.is_apply() && rhs.name == p.name) {
                pe.kind = ProjectionEffect::Kind::Frame;
            } else if (p.absent_value && rhs.is_const(*p.absent_value)) {
                pe.kind = ProjectionEffect::Kind::Delete;
            } else {
                // creation when the chain bottoms out in a component
                // constant instead of the projected pre-state
                bool from_initial = false;
                const Term* cur = &rhs;
                const OtsModel* unused = nullptr;
                (void)unused;
                while (cur && cur->is_apply() && !cur->args.empty()) {
                    // descend through the hidden slot of component ops
                    const Term* next = nullptr;
                    for (size_t i = 0; i < cur->args.size(); ++i) {
                        const Term& a = cur->args[i];
                        if (a.is_apply()) {
                            DiagnosticSink scratch;
                            auto s = sort_of(a, set, model.module_name, scratch);
                            if (s && set.is_hidden(*s)) {
                                next = &a;
                                break;
                            }
                        }
                    }
                    cur = next;
                }
                if (cur && cur->is_apply() && cur->args.empty() && cur->name != p.name)
                    from_initial = true;
                pe.kind = from_initial ? ProjectionEffect::Kind::Create
                                       : ProjectionEffect::Kind::Modify;
            }
            out[{t->name, p.name}].push_back(pe);
        }
    }
    return out;
}

void check_composition(const OtsModel& composite, const std::vector<const OtsModel*>& components,
                       const ModuleSet& set, DiagnosticSink& sink) {
    const SpecModule* m = set.find_module(composite.module_name);
    if (!m) return;
    if (composite.projections.empty()) {
        sink.error("composition-no-projections",
                   "module '" + composite.module_name +
                       "' is not a composite: it declares no projection operators");
        return;
    }
    std::map<std::string, const OtsModel*> comp_map;
    for (const OtsModel* c : components) comp_map[c->module_name] = c;
    for (const auto& p : composite.projections)
        if (!comp_map.count(p.component_module))
            sink.error("composition-missing-component",
                       "projection '" + p.name + "' targets module '" + p.component_module +
                           "' which is not among the analyzed components");

    // condition 1: every projection-of-transition equation must rewrite
    // to a component transition chain, identity, creation or deletion
    for (const auto& p : composite.projections) {
        const OtsModel* comp = comp_map.count(p.component_module) ? comp_map[p.component_module]
                                                                  : nullptr;
        for (int idx : p.defining_equations) {
            const Equation& e = m->equations[idx];
            const Term* h = static_cast<size_t>(p.hidden_arg_index) < e.lhs.args.size()
                                ? &e.lhs.args[p.hidden_arg_index]
                                : nullptr;
            if (!h || !h->is_apply() || !composite.find_transition(h->name)) continue;
            const Term& rhs = e.rhs;
            bool ok = false;
            if (rhs.is_apply() && rhs.name == p.name) ok = true; // identity / frame
            if (p.absent_value && rhs.is_const(*p.absent_value)) ok = true; // deletion
            if (!ok && comp) {
                ChainInfo info = classify_chain(rhs, composite, comp_map, set);
                if (info.is_chain && (info.uses_projection || info.from_initial)) ok = true;
            }
            if (!ok)
                sink.warn("composition-cond-1",
                          "state change of component '" + p.name + "' under transition '" +
                              h->name +
                              "' is not expressed as a component transition or identity",
                          e.span);
        }
    }

    // condition 2: composite observers must be compositions of
    // projections and chains
    for (const auto& o : composite.observers) {
        for (int idx : o.defining_equations) {
            const Equation& e = m->equations[idx];
            const Term* h = static_cast<size_t>(o.hidden_arg_index) < e.lhs.args.size()
                                ? &e.lhs.args[o.hidden_arg_index]
                                : nullptr;
            if (h && h->is_apply() && !h->args.empty()) continue; // transition effects: cond 1
            bool init_anchored = h && h->is_apply() && h->args.empty();
            if (init_anchored) continue; // initial values belong to condition 3
            ChainInfo info = classify_chain(e.rhs, composite, comp_map, set);
            if (!info.is_chain || !info.uses_projection)
                sink.warn("composition-cond-2",
                          "observer '" + o.name +
                              "' is not defined through projections and component chains",
                          e.span);
        }
    }

    // condition 3: each initial state projects to a component constant or
    // the designated absent value
    for (const auto& init : composite.initial_states) {
        for (const auto& p : composite.projections) {
            const Equation* found = nullptr;
            for (int idx : p.defining_equations) {
                const Equation& e = m->equations[idx];
                const Term* h = static_cast<size_t>(p.hidden_arg_index) < e.lhs.args.size()
                                    ? &e.lhs.args[p.hidden_arg_index]
                                    : nullptr;
                if (h && h->is_const(init)) {
                    found = &e;
                    break;
                }
            }
            if (!found) {
                sink.warn("composition-cond-3",
                          "initial state '" + init + "' is not projected by '" + p.name + "'");
                continue;
            }
            const Term& rhs = found->rhs;
            bool constant = rhs.is_apply() && rhs.args.empty();
            bool absent = p.absent_value && rhs.is_const(*p.absent_value);
            const OtsModel* comp = comp_map.count(p.component_module)
                                       ? comp_map[p.component_module]
                                       : nullptr;
            bool comp_initial = false;
            if (constant && comp)
                comp_initial = std::find(comp->initial_states.begin(),
                                         comp->initial_states.end(),
                                         rhs.name) != comp->initial_states.end();
            if (!(absent || comp_initial))
                sink.warn("composition-cond-3",
                          "initial state '" + init + "' projects through '" + p.name +
                              "' to a non-constant",
                          found->span);
        }
    }

    // unmatched equations: anything that is neither an initial
    // projection, a transition effect nor a frame
    for (const auto& p : composite.projections) {
        for (int idx : p.defining_equations) {
            const Equation& e = m->equations[idx];
            const Term* h = static_cast<size_t>(p.hidden_arg_index) < e.lhs.args.size()
                                ? &e.lhs.args[p.hidden_arg_index]
                                : nullptr;
            bool matched = h && (h->is_var() || (h->is_apply() && h->args.empty()) ||
                                 (h->is_apply() && composite.find_transition(h->name)));
            if (!matched)
                sink.warn("composition-unmatched",
                          "projection equation does not match any of the three composition shapes",
                          e.span);
        }
    }
}

std::vector<MethodGroup> method_groups(const OtsModel& composite, const ModuleSet& set) {
    auto effects = projection_effects(composite, set);
    const SpecModule* m = set.find_module(composite.module_name);
    std::map<std::vector<std::string>, MethodGroup> groups;
    for (const auto& t : composite.transitions) {
        std::set<std::string> touched;
        bool sync_dependency = false;
        for (const auto& p : composite.projections) {
            auto it = effects.find({t.name, p.name});
            if (it == effects.end()) continue;
            for (const auto& pe : it->second) {
                if (pe.kind != ProjectionEffect::Kind::Frame) touched.insert(p.name);
                // synchronized when a projected state depends on the
                // state of another component
                if (m && pe.eq)
                    for (const auto& q : composite.projections)
                        if (q.name != p.name && term_contains_op(pe.eq->rhs, q.name))
                            sync_dependency = true;
            }
        }
        std::vector<std::string> key(touched.begin(), touched.end());
        auto& g = groups[key];
        g.components = key;
        g.transitions.push_back(t.name);
        if (key.size() > 1 || sync_dependency) g.synchronized = true;
    }
    std::vector<MethodGroup> out;
    for (auto& [key, g] : groups) out.push_back(std::move(g));
    return out;
}

namespace {

nlohmann::ordered_json equation_list(const std::vector<int>& idxs, const SpecModule* m) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (int i : idxs) {
        nlohmann::ordered_json e;
        e["index"] = i;
        if (m && i >= 0 && static_cast<size_t>(i) < m->equations.size()) {
            const Equation& eq = m->equations[i];
            std::string text = term_to_string(eq.lhs) + " = " + term_to_string(eq.rhs);
            if (eq.condition) text += " if " + term_to_string(*eq.condition);
            e["text"] = text;
        }
        arr.push_back(e);
    }
    return arr;
}

} // namespace

nlohmann::ordered_json dump_model(const OtsModel& model, const ModuleSet& set) {
    const SpecModule* m = set.find_module(model.module_name);
    nlohmann::ordered_json j;
    j["schema"] = "ots-model/1";
    j["module"] = model.module_name;
    j["hiddenSort"] = model.hidden_sort;
    j["extends"] = model.extends_module ? nlohmann::ordered_json(*model.extends_module)
                                        : nlohmann::ordered_json(nullptr);
    j["initialStates"] = model.initial_states;
    auto observers = nlohmann::ordered_json::array();
    for (const auto& o : model.observers) {
        nlohmann::ordered_json e;
        e["name"] = o.name;
        e["paramSorts"] = o.param_sorts;
        e["resultSort"] = o.result_sort;
        e["hiddenArgIndex"] = o.hidden_arg_index;
        e["definingEquations"] = equation_list(o.defining_equations, m);
        observers.push_back(e);
    }
    j["observers"] = observers;
    auto transitions = nlohmann::ordered_json::array();
    for (const auto& t : model.transitions) {
        nlohmann::ordered_json e;
        e["name"] = t.name;
        e["paramSorts"] = t.param_sorts;
        e["hiddenArgIndex"] = t.hidden_arg_index;
        e["effectiveCondition"] = t.effective_condition
                                      ? nlohmann::ordered_json(*t.effective_condition)
                                      : nlohmann::ordered_json(nullptr);
        e["effectEquations"] = equation_list(t.effect_equations, m);
        transitions.push_back(e);
    }
    j["transitions"] = transitions;
    auto projections = nlohmann::ordered_json::array();
    for (const auto& p : model.projections) {
        nlohmann::ordered_json e;
        e["name"] = p.name;
        e["idSorts"] = p.id_sorts;
        e["componentModule"] = p.component_module;
        e["componentHiddenSort"] = p.component_hidden_sort;
        e["absentValue"] = p.absent_value ? nlohmann::ordered_json(*p.absent_value)
                                          : nlohmann::ordered_json(nullptr);
        e["definingEquations"] = equation_list(p.defining_equations, m);
        projections.push_back(e);
    }
    j["projections"] = projections;
    j["auxiliaryOps"] = model.auxiliary_ops;
    return j;
}

} // namespace otsc
