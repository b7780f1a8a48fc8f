#include <set>

#include "codegen.hpp"

namespace otsc::gen {

namespace {

// Symbolic counterpart of the interpreter's id unification: which method
// parameters name the component ids a transition effect touches.
struct EffectBindings {
    std::map<std::string, ExprP> vars; // equation variable -> expression
    std::vector<ExprP> id_exprs;       // projection id arguments
    bool ok = false;
};

EffectBindings effect_bindings(const Equation& eq, const TransitionSpec& t,
                               const ProjectionSpec& p,
                               const std::vector<std::string>& param_names) {
    EffectBindings out;
    if (!eq.lhs.is_apply()) return out;
    if (static_cast<size_t>(p.hidden_arg_index) >= eq.lhs.args.size()) return out;
    const Term& tau = eq.lhs.args[p.hidden_arg_index];
    if (!tau.is_apply()) return out;

    // transition argument variables name the method parameters
    size_t vi = 0;
    for (size_t i = 0; i < tau.args.size(); ++i) {
        if (static_cast<int>(i) == t.hidden_arg_index) continue;
        if (tau.args[i].is_var() && vi < param_names.size())
            out.vars[tau.args[i].name] = e_name(param_names[vi]);
        ++vi;
    }
    // equality guards alias the projection's id variables to them
    if (eq.condition) {
        std::vector<const Term*> stack{&*eq.condition};
        while (!stack.empty()) {
            const Term* g = stack.back();
            stack.pop_back();
            if (g->is_apply() && g->name == "_and_") {
                stack.push_back(&g->args[0]);
                stack.push_back(&g->args[1]);
            } else if (g->is_apply() && g->name == "_==_" && g->args[0].is_var() &&
                       g->args[1].is_var()) {
                const std::string &a = g->args[0].name, &b = g->args[1].name;
                if (out.vars.count(a) && !out.vars.count(b)) out.vars[b] = out.vars[a];
                if (out.vars.count(b) && !out.vars.count(a)) out.vars[a] = out.vars[b];
            }
        }
    }
    for (size_t i = 0; i < eq.lhs.args.size(); ++i) {
        if (static_cast<int>(i) == p.hidden_arg_index) continue;
        const Term& idp = eq.lhs.args[i];
        if (!idp.is_var() || !out.vars.count(idp.name)) return out;
        out.id_exprs.push_back(out.vars[idp.name]);
    }
    out.ok = true;
    return out;
}

} // namespace

void Translator::translate_composite_members(const OtsModel& model, ContractClass& cls,
                                             DiagnosticSink& sink) {
    const SpecModule* mod = set_.find_module(model.module_name);
    if (!mod) return;

    // (a) projection getters, emitted ahead of the composite observers
    std::vector<ContractMethod> getters;
    for (const auto& p : model.projections) {
        ContractMethod g;
        g.name = method_name(model.module_name, p.name);
        g.pure = true;
        auto names = make_getter_param_names(p.id_sorts);
        for (size_t i = 0; i < p.id_sorts.size(); ++i)
            g.params.push_back({options_.mapping.find(p.id_sorts[i])->type, names[i]});
        g.return_type = class_name(p.component_module);
        g.placeholder_return = "null";
        if (!p.id_sorts.empty()) {
            ContractCase c;
            c.normal_behavior = true;
            for (const auto& n : names) c.requires_clauses.push_back(e_bin(">=", e_name(n), e_int(0)));
            if (names.size() == 1) {
                // distinctness: different ids never alias the same object
                std::string i = names[0], j = i == "j" ? "j2" : "j";
                ExprP gi = e_call(nullptr, g.name, {e_name(i)});
                ExprP gj = e_call(nullptr, g.name, {e_name(j)});
                ExprP ante = e_bin("&&", e_bin("!=", gi, e_null()), e_bin("!=", e_name(i), e_name(j)));
                ExprP body = e_bin("==>", ante, e_bin("!=", gi, gj));
                c.ensures_clauses.push_back(e_forall({{"int", j}}, body));
            }
            g.cases.push_back(std::move(c));
        }
        getters.push_back(std::move(g));
    }
    cls.methods.insert(cls.methods.begin(), getters.begin(), getters.end());

    // (d) composite observers: chains over the pre-state ghost
    for (const auto& o : model.observers) {
        ContractMethod* method = nullptr;
        for (auto& m : cls.methods)
            if (!m.is_constructor && m.name == method_name(model.module_name, o.name))
                method = &m;
        if (!method) continue;
        const Equation* general = nullptr;
        for (int idx : o.defining_equations) {
            const Equation& e = mod->equations[idx];
            if (static_cast<size_t>(o.hidden_arg_index) < e.lhs.args.size() &&
                e.lhs.args[o.hidden_arg_index].is_var()) {
                general = &e;
                break;
            }
        }
        if (!general) continue;
        auto pnames = make_param_names(o.param_sorts, options_.mapping);
        TermTranslator tt{*this, model, e_ghost(options_.ghost_name), {}, sink};
        tt.error_code = "chain-not-translatable";
        size_t vi = 0;
        for (size_t i = 0; i < general->lhs.args.size(); ++i) {
            if (static_cast<int>(i) == o.hidden_arg_index) continue;
            if (general->lhs.args[i].is_var() && vi < pnames.size())
                tt.bindings[general->lhs.args[i].name] = e_name(pnames[vi]);
            ++vi;
        }
        ExprP chain = tt.translate(general->rhs);
        if (tt.failed) continue;
        if (tt.chain_has_transition)
            sink.warn("chain-includes-transition",
                      "observer '" + o.name +
                          "' is defined through a chain containing a transition call; purity "
                          "under contract semantics is not guaranteed");
        ContractCase c;
        std::vector<const Term*> projections_used;
        collect_projection_refs(general->rhs, model, projections_used);
        std::set<std::string> seen;
        for (const Term* call : projections_used) {
            TermTranslator ti{*this, model, e_this(), tt.bindings, sink};
            ExprP getter = ti.translate(*call);
            if (ti.failed) continue;
            std::string key = render_expr(getter);
            if (!seen.insert(key).second) continue;
            c.requires_clauses.push_back(e_bin("!=", getter, e_null()));
        }
        c.ensures_clauses.push_back(e_bin("==", e_result(), chain));
        method->cases.push_back(std::move(c));
    }

    // (c) behavioral equality takes the projections into account
    for (auto& m : cls.methods) {
        if (m.name != "equals" || m.is_constructor) continue;
        for (const auto& p : model.projections) {
            auto names = make_getter_param_names(p.id_sorts);
            std::vector<std::pair<std::string, std::string>> binders;
            std::vector<ExprP> args;
            for (size_t i = 0; i < p.id_sorts.size(); ++i) {
                binders.push_back({options_.mapping.find(p.id_sorts[i])->type, names[i]});
                args.push_back(e_name(names[i]));
            }
            std::string gname = method_name(model.module_name, p.name);
            ExprP body = e_call(e_call(e_this(), gname, args), "equals",
                                {e_call(e_name("another"), gname, args)});
            ExprP ante = binders.empty() ? body : e_forall(binders, body);
            m.cases.front().ensures_clauses.push_back(
                e_bin("==>", ante, e_bin("==", e_result(), e_bool(true))));
        }
    }

    // (b) deep copy correctly copies the composing objects
    for (auto& m : cls.methods) {
        if (!m.is_constructor || m.params.size() != 1 || m.params[0].first != cls.name) continue;
        for (const auto& p : model.projections) {
            auto names = make_getter_param_names(p.id_sorts);
            std::vector<std::pair<std::string, std::string>> binders;
            std::vector<ExprP> args;
            for (size_t i = 0; i < p.id_sorts.size(); ++i) {
                binders.push_back({options_.mapping.find(p.id_sorts[i])->type, names[i]});
                args.push_back(e_name(names[i]));
            }
            std::string gname = method_name(model.module_name, p.name);
            ExprP mine = e_call(e_this(), gname, args);
            ExprP theirs = e_call(e_name("another"), gname, args);
            ExprP body = e_bin(
                "==>", e_bin("!=", mine, e_null()),
                e_bin("&&", e_call(mine, "equals", {theirs}), e_bin("!=", mine, theirs)));
            m.cases.front().ensures_clauses.push_back(binders.empty() ? body
                                                                      : e_forall(binders, body));
        }
    }

    // (e)/(f) composite transitions: per affected component, the Def 4
    // commutation contract; creators and deleters get the add/delete
    // contracts with the absent-value-to-null mapping
    auto effects = projection_effects(model, set_);
    for (const auto& t : model.transitions) {
        ContractMethod m;
        m.name = method_name(model.module_name, t.name);
        auto pnames = make_param_names(t.param_sorts, options_.mapping);
        for (size_t i = 0; i < t.param_sorts.size(); ++i)
            m.params.push_back({options_.mapping.find(t.param_sorts[i])->type, pnames[i]});
        m.return_type = cls.name;
        m.placeholder_return = "this";
        m.ghost_sets.push_back(e_new(cls.name, {e_this()}));

        ContractCase c;
        std::vector<ExprP> ensures_parts;
        for (const auto& p : model.projections) {
            auto it = effects.find({t.name, p.name});
            if (it == effects.end()) continue;
            std::string gname = method_name(model.module_name, p.name);
            for (const auto& pe : it->second) {
                if (pe.kind == ProjectionEffect::Kind::Frame || !pe.eq) continue;
                EffectBindings eb = effect_bindings(*pe.eq, t, p, pnames);
                if (!eb.ok) {
                    sink.error("chain-not-translatable",
                               "cannot bind the component ids of '" + p.name +
                                   "' touched by transition '" + t.name + "'");
                    continue;
                }
                ExprP this_get = e_call(e_this(), gname, eb.id_exprs);
                ExprP result_get = e_call(e_result(), gname, eb.id_exprs);
                switch (pe.kind) {
                case ProjectionEffect::Kind::Modify: {
                    c.requires_clauses.push_back(e_bin("!=", this_get, e_null()));
                    TermTranslator tt{*this, model, e_ghost(options_.ghost_name), eb.vars, sink};
                    tt.error_code = "chain-not-translatable";
                    ExprP rhs = tt.translate(pe.eq->rhs);
                    if (!tt.failed)
                        ensures_parts.push_back(e_call(result_get, "equals", {rhs}));
                    break;
                }
                case ProjectionEffect::Kind::Create: {
                    c.requires_clauses.push_back(e_bin("==", this_get, e_null()));
                    TermTranslator tt{*this, model, e_ghost(options_.ghost_name), eb.vars, sink};
                    tt.error_code = "chain-not-translatable";
                    ExprP rhs = tt.translate(pe.eq->rhs);
                    if (!tt.failed) ensures_parts.push_back(e_call(result_get, "equals", {rhs}));
                    if (eb.id_exprs.size() == 1) {
                        std::string j = "j";
                        ExprP other = e_call(e_result(), gname, {e_name(j)});
                        ensures_parts.push_back(e_forall(
                            {{"int", j}},
                            e_bin("==>", e_bin("!=", e_name(j), eb.id_exprs[0]),
                                  e_bin("!=", result_get, other))));
                    }
                    break;
                }
                case ProjectionEffect::Kind::Delete:
                    c.requires_clauses.push_back(e_bin("!=", this_get, e_null()));
                    ensures_parts.push_back(e_bin("==", result_get, e_null()));
                    break;
                case ProjectionEffect::Kind::Frame: break;
                }
            }
        }
        for (size_t i = 0; i < t.param_sorts.size(); ++i) {
            const auto* e = options_.mapping.find(t.param_sorts[i]);
            if (e && e->is_nat) c.requires_clauses.push_back(e_bin(">=", e_name(pnames[i]), e_int(0)));
        }
        ensures_parts.push_back(e_bin("==", e_result(), e_this()));
        c.ensures_clauses.push_back(e_and_all(ensures_parts));
        m.cases.push_back(std::move(c));
        cls.methods.push_back(std::move(m));
    }
}

bool Translator::apply_inheritance(const OtsModel& child, ContractClass& cls,
                                   DiagnosticSink& sink) {
    if (!child.extends_module) return true;
    auto it = done_.find(*child.extends_module);
    if (it == done_.end()) {
        sink.error("parent-not-translated", "class for module '" + *child.extends_module +
                                                "' was not translated before its subclass");
        return false;
    }
    cls.extends_name = it->second.name;
    return true;
}

std::vector<std::string> Translator::make_getter_param_names(
    const std::vector<std::string>& id_sorts) const {
    // Definition 2 names the projection getter parameter `i`
    std::vector<std::string> out;
    for (size_t k = 0; k < id_sorts.size(); ++k)
        out.push_back(k == 0 ? "i" : "i" + std::to_string(k + 1));
    return out;
}

void Translator::collect_projection_refs(const Term& t, const OtsModel& model,
                                         std::vector<const Term*>& out) const {
    if (t.is_apply() && model.find_projection(t.name)) out.push_back(&t);
    for (const auto& a : t.args) collect_projection_refs(a, model, out);
}

} // namespace otsc::gen
