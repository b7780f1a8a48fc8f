#include "codegen.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "interp.hpp"

namespace otsc::gen {

namespace {

ExprP node(ExprNode n) { return std::make_shared<ExprNode>(std::move(n)); }

} // namespace

ExprP e_int(long long v) {
    ExprNode n;
    n.kind = ExprKind::IntLit;
    n.int_value = v;
    return node(std::move(n));
}
ExprP e_bool(bool v) {
    ExprNode n;
    n.kind = ExprKind::BoolLit;
    n.bool_value = v;
    return node(std::move(n));
}
ExprP e_null() {
    ExprNode n;
    n.kind = ExprKind::Null;
    return node(std::move(n));
}
ExprP e_this() {
    ExprNode n;
    n.kind = ExprKind::This;
    return node(std::move(n));
}
ExprP e_result() {
    ExprNode n;
    n.kind = ExprKind::Result;
    return node(std::move(n));
}
ExprP e_ghost(std::string name) {
    ExprNode n;
    n.kind = ExprKind::Ghost;
    n.text = std::move(name);
    return node(std::move(n));
}
ExprP e_name(std::string name) {
    ExprNode n;
    n.kind = ExprKind::Name;
    n.text = std::move(name);
    return node(std::move(n));
}
ExprP e_call(ExprP recv, std::string method, std::vector<ExprP> args) {
    ExprNode n;
    n.kind = ExprKind::Call;
    n.recv = std::move(recv);
    n.text = std::move(method);
    n.args = std::move(args);
    return node(std::move(n));
}
ExprP e_new(std::string cls, std::vector<ExprP> args) {
    ExprNode n;
    n.kind = ExprKind::New;
    n.text = std::move(cls);
    n.args = std::move(args);
    return node(std::move(n));
}
ExprP e_un(std::string op, ExprP x) {
    ExprNode n;
    n.kind = ExprKind::Unary;
    n.text = std::move(op);
    n.args = {std::move(x)};
    return node(std::move(n));
}
ExprP e_bin(std::string op, ExprP l, ExprP r) {
    ExprNode n;
    n.kind = ExprKind::Binary;
    n.text = std::move(op);
    n.args = {std::move(l), std::move(r)};
    return node(std::move(n));
}
ExprP e_forall(std::vector<std::pair<std::string, std::string>> binders, ExprP body) {
    ExprNode n;
    n.kind = ExprKind::Forall;
    n.binders = std::move(binders);
    n.body = std::move(body);
    return node(std::move(n));
}

ExprP e_and_all(std::vector<ExprP> parts) {
    ExprP out;
    for (auto& p : parts) {
        if (!p) continue;
        out = out ? e_bin("&&", out, p) : p;
    }
    return out;
}

ExprP e_negate(const ExprP& x) {
    if (!x) return x;
    if (x->kind == ExprKind::BoolLit) return e_bool(!x->bool_value);
    if (x->kind == ExprKind::Unary && x->text == "!") return x->args[0];
    if (x->kind == ExprKind::Binary) {
        static const std::map<std::string, std::string> flip = {
            {">=", "<"}, {">", "<="}, {"<", ">="}, {"<=", ">"}, {"==", "!="}, {"!=", "=="}};
        auto it = flip.find(x->text);
        if (it != flip.end()) return e_bin(it->second, x->args[0], x->args[1]);
    }
    return e_un("!", x);
}

namespace {

int expr_prec(const ExprP& e) {
    switch (e->kind) {
    case ExprKind::Binary: {
        const std::string& op = e->text;
        if (op == "==>") return 1;
        if (op == "||") return 2;
        if (op == "&&") return 3;
        if (op == "==" || op == "!=") return 4;
        if (op == ">=" || op == ">" || op == "<" || op == "<=") return 5;
        return 6; // + -
    }
    case ExprKind::Unary: return 7;
    case ExprKind::Forall: return 0; // always printed with its own parens
    default: return 10;
    }
}

std::string render(const ExprP& e);

// Boolean connectives carry explicit parentheses around comparison and
// quantifier operands, matching the contract style of the target goldens.
std::string render_operand(const ExprP& child, const std::string& parent_op) {
    std::string s = render(child);
    if (child->kind == ExprKind::Forall) return s; // self-parenthesized
    bool parent_logic = parent_op == "&&" || parent_op == "||" || parent_op == "==>";
    if (parent_logic) {
        if (child->kind == ExprKind::Binary && child->text != parent_op) return "(" + s + ")";
        return s;
    }
    int pp = parent_op == "==" || parent_op == "!=" ? 4
             : parent_op == ">=" || parent_op == ">" || parent_op == "<" || parent_op == "<=" ? 5
                                                                                              : 6;
    if (expr_prec(child) <= pp && child->kind == ExprKind::Binary) return "(" + s + ")";
    return s;
}

std::string render(const ExprP& e) {
    switch (e->kind) {
    case ExprKind::IntLit: return std::to_string(e->int_value);
    case ExprKind::BoolLit: return e->bool_value ? "true" : "false";
    case ExprKind::Null: return "null";
    case ExprKind::This: return "this";
    case ExprKind::Result: return "\\result";
    case ExprKind::Ghost: return e->text;
    case ExprKind::Name: return e->text;
    case ExprKind::New: {
        std::string s = "new " + e->text + "(";
        for (size_t i = 0; i < e->args.size(); ++i) s += (i ? ", " : "") + render(e->args[i]);
        return s + ")";
    }
    case ExprKind::Call: {
        std::string s;
        if (e->recv) {
            s = render(e->recv);
            if (e->recv->kind == ExprKind::Binary || e->recv->kind == ExprKind::Unary)
                s = "(" + s + ")";
            s += ".";
        }
        s += e->text + "(";
        for (size_t i = 0; i < e->args.size(); ++i) s += (i ? ", " : "") + render(e->args[i]);
        return s + ")";
    }
    case ExprKind::Unary: {
        std::string s = render(e->args[0]);
        if (e->args[0]->kind == ExprKind::Binary || e->args[0]->kind == ExprKind::Forall)
            s = "(" + s + ")";
        return e->text + s;
    }
    case ExprKind::Binary:
        return render_operand(e->args[0], e->text) + " " + e->text + " " +
               render_operand(e->args[1], e->text);
    case ExprKind::Forall: {
        std::string s = "(\\forall ";
        // one type per declarator group (JML binder lists share a type)
        for (size_t i = 0; i < e->binders.size(); ++i) {
            if (i) {
                s += ", ";
                if (e->binders[i].first != e->binders[i - 1].first)
                    s += e->binders[i].first + " ";
            } else {
                s += e->binders[i].first + " ";
            }
            s += e->binders[i].second;
        }
        s += "; " + render(e->body) + ")";
        return s;
    }
    }
    return "";
}

} // namespace

std::string render_expr(const ExprP& e) { return e ? render(e) : std::string(); }

const ContractMethod* ContractClass::find_method(const std::string& name) const {
    for (const auto& m : methods)
        if (m.name == name) return &m;
    return nullptr;
}

SortMapping SortMapping::defaults() {
    SortMapping m;
    m.table["Int"] = {"int", "0", "x", false};
    m.table["INT"] = {"int", "0", "x", false};
    m.table["Nat"] = {"int", "0", "n", true};
    m.table["NAT"] = {"int", "0", "n", true};
    m.table["Bool"] = {"boolean", "false", "b", false};
    m.table["BOOL"] = {"boolean", "false", "b", false};
    return m;
}

const SortMapping::Entry* SortMapping::find(const std::string& sort) const {
    auto it = table.find(sort);
    return it == table.end() ? nullptr : &it->second;
}

std::string default_class_name(const std::string& module_name) {
    std::string out;
    bool upper = true;
    for (char c : module_name) {
        if (c == '-' || c == '_') {
            upper = true;
            continue;
        }
        out.push_back(upper ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
                            : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        upper = false;
    }
    return out;
}

namespace {

std::string camelize(const std::string& name) {
    std::string out;
    bool upper = false;
    for (char c : name) {
        if (c == '-' || c == '\'') {
            upper = true;
            continue;
        }
        out.push_back(upper ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c);
        upper = false;
    }
    return out;
}

std::string upper_first(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::vector<std::string> make_param_names(const std::vector<std::string>& sorts,
                                          const SortMapping& mapping,
                                          const std::string& fixed = "") {
    std::vector<std::string> out;
    std::map<std::string, int> used;
    for (const auto& s : sorts) {
        std::string base = fixed;
        if (base.empty()) {
            const SortMapping::Entry* e = mapping.find(s);
            base = e && !e->param_name.empty()
                       ? e->param_name
                       : std::string(1, static_cast<char>(std::tolower(
                             static_cast<unsigned char>(s.empty() ? 'v' : s[0]))));
        }
        int& n = used[base];
        ++n;
        out.push_back(n == 1 ? base : base + std::to_string(n));
    }
    return out;
}

} // namespace

Translator::Translator(const ModuleSet& set, TranslateOptions options)
    : set_(set), options_(std::move(options)) {}

std::string Translator::class_name(const std::string& module) const {
    auto it = options_.class_names.find(module);
    if (it != options_.class_names.end()) return it->second;
    return default_class_name(module);
}

std::string Translator::method_name(const std::string& module, const std::string& op) const {
    auto it = options_.method_names.find(module + "." + op);
    if (it != options_.method_names.end()) return it->second;
    const OtsModel* m = nullptr;
    auto mit = models_.find(module);
    if (mit != models_.end()) m = &mit->second;
    if (m && m->find_projection(op)) return "get" + upper_first(camelize(op));
    return camelize(op);
}

// Translates spec terms into contract expressions. `pre` is the
// expression standing for the pre-state receiver (this, the ghost, or
// null for the implicit receiver in constructor clauses).
struct TermTranslator {
    Translator& tr;
    const OtsModel& model;
    ExprP pre;
    std::map<std::string, ExprP> bindings; // equation variables -> parameter/binder refs
    DiagnosticSink& sink;
    std::string error_code = "observer-equation-not-translatable";
    bool failed = false;
    bool chain_has_transition = false;

    const OtsModel* owner_of(const std::string& op_name, const ObserverSpec** obs,
                             const ProjectionSpec** proj, const TransitionSpec** trans) const {
        *obs = nullptr;
        *proj = nullptr;
        *trans = nullptr;
        std::vector<const OtsModel*> search;
        search.push_back(&model);
        for (const auto& [name, m] : tr.models_)
            if (name != model.module_name) search.push_back(&m);
        for (const OtsModel* m : search) {
            if ((*obs = m->find_observer(op_name))) return m;
            if ((*proj = m->find_projection(op_name))) return m;
            if ((*trans = m->find_transition(op_name))) return m;
        }
        return nullptr;
    }

    ExprP fail(const std::string& msg, const SourceSpan& at) {
        if (!failed) sink.error(error_code, msg, at);
        failed = true;
        return e_null();
    }

    ExprP receiver_for(const Term& hidden) {
        if (hidden.is_var()) return pre; // the pre-state variable
        if (hidden.is_apply()) {
            // nested chain or an initial constant
            return translate(hidden);
        }
        return fail("cannot translate state expression '" + term_to_string(hidden) + "'",
                    hidden.span);
    }

    ExprP translate(const Term& t) {
        switch (t.kind) {
        case Term::Kind::IntLit: return e_int(t.value);
        case Term::Kind::IdLit: return e_int(t.value);
        case Term::Kind::Var: {
            auto it = bindings.find(t.name);
            if (it != bindings.end()) return it->second;
            return fail("variable '" + t.name + "' has no parameter binding", t.span);
        }
        case Term::Kind::Apply: break;
        }
        const std::string& n = t.name;
        if (n == "true") return e_bool(true);
        if (n == "false") return e_bool(false);
        static const std::map<std::string, std::string> binops = {
            {"_+_", "+"},  {"_-_", "-"},  {"_>=_", ">="}, {"_>_", ">"},
            {"_==_", "=="}, {"_=/=_", "!="}, {"_and_", "&&"}, {"_or_", "||"}};
        auto bit = binops.find(n);
        if (bit != binops.end())
            return e_bin(bit->second, translate(t.args[0]), translate(t.args[1]));
        if (n == "-_") return e_un("-", translate(t.args[0]));
        if (n == "not_") return e_negate(translate(t.args[0]));

        const ObserverSpec* obs;
        const ProjectionSpec* proj;
        const TransitionSpec* trans;
        const OtsModel* owner = owner_of(n, &obs, &proj, &trans);
        if (owner) {
            int hidden_index = obs ? obs->hidden_arg_index
                               : proj ? proj->hidden_arg_index
                                      : trans->hidden_arg_index;
            if (static_cast<size_t>(hidden_index) >= t.args.size())
                return fail("'" + n + "' is missing its state argument", t.span);
            if (trans) chain_has_transition = true;
            ExprP recv = receiver_for(t.args[hidden_index]);
            std::vector<ExprP> args;
            for (size_t i = 0; i < t.args.size(); ++i)
                if (static_cast<int>(i) != hidden_index) args.push_back(translate(t.args[i]));
            return e_call(recv, tr.method_name(owner->module_name, n), std::move(args));
        }

        // initial constants and absent values of component models
        if (t.args.empty()) {
            for (const auto& [name, m] : tr.models_) {
                for (const auto& init : m.initial_states)
                    if (init == n) return e_new(tr.class_name(name));
                for (const auto& p : m.projections)
                    if (p.absent_value && *p.absent_value == n) return e_null();
            }
            for (const auto& p : model.projections)
                if (p.absent_value && *p.absent_value == n) return e_null();
        }

        // bound effective conditions inline their defining equation
        for (const auto& [name, m] : tr.models_) {
            for (const auto& trs : m.transitions) {
                if (trs.effective_condition != n) continue;
                const SpecModule* mod = tr.set_.find_module(name);
                if (trs.condition_equation < 0 || !mod)
                    return fail("effective condition '" + n + "' has no defining equation",
                                t.span);
                const Equation& eq = mod->equations[trs.condition_equation];
                TermTranslator inner{tr, model, pre, {}, sink, error_code};
                // bind the condition's own variables positionally
                size_t ai = 0;
                for (size_t i = 0; i < eq.lhs.args.size() && ai < t.args.size(); ++i) {
                    const Term& pat = eq.lhs.args[i];
                    if (!pat.is_var()) continue;
                    if (tr.set_.is_hidden(pat.sort)) {
                        inner.bindings[pat.name] = pre;
                        ++ai;
                    } else {
                        // visible argument: translate the actual term
                        inner.bindings[pat.name] = translate(t.args[i]);
                        ++ai;
                    }
                }
                ExprP out = inner.translate(eq.rhs);
                failed = failed || inner.failed;
                chain_has_transition = chain_has_transition || inner.chain_has_transition;
                return out;
            }
        }

        return fail("operator '" + n + "' has no pure-method counterpart", t.span);
    }
};

namespace {

std::string placeholder_for(const std::string& type) {
    if (type == "int") return "0";
    if (type == "boolean") return "false";
    if (type.empty()) return "";
    return "null";
}

// collects the projection applications referenced in a chain, for the
// non-null requires clauses of composite observers
void collect_projection_calls(const Term& t, const OtsModel& model,
                              std::vector<const Term*>& out) {
    if (t.is_apply() && model.find_projection(t.name)) out.push_back(&t);
    for (const auto& a : t.args) collect_projection_calls(a, model, out);
}

} // namespace

std::optional<ContractClass> Translator::translate_module(const std::string& module,
                                                          DiagnosticSink& sink) {
    auto cached = done_.find(module);
    if (cached != done_.end()) return cached->second;

    if (!models_.count(module)) {
        auto model = classify(set_, module, sink);
        if (!model) return std::nullopt;
        models_[module] = std::move(*model);
    }
    OtsModel model = models_[module];

    // parents and components first
    if (model.extends_module) {
        if (!translate_module(*model.extends_module, sink)) {
            sink.error("parent-not-translated", "module '" + module +
                                                    "' extends '" + *model.extends_module +
                                                    "' which could not be translated");
            return std::nullopt;
        }
    }
    for (const auto& p : model.projections) {
        if (p.component_module.empty() || p.component_module == module) continue;
        if (!translate_module(p.component_module, sink)) {
            sink.error("component-class-missing",
                       "projection '" + p.name + "' needs class for module '" +
                           p.component_module + "'");
            return std::nullopt;
        }
    }

    // identifier sorts default to int
    for (const auto& [name, m] : models_)
        for (const auto& p : m.projections)
            for (const auto& s : p.id_sorts)
                if (!options_.mapping.find(s)) options_.mapping.table[s] = {"int", "0", "id", false};

    // every reachable visible sort must be mapped
    bool unmapped = false;
    auto need = [&](const std::string& sort, const char* where) {
        if (set_.is_hidden(sort)) return;
        if (!options_.mapping.find(sort)) {
            sink.error("unmapped-sort", "no target type for sort '" + sort + "' (" + where +
                                            "); supply one in the configuration");
            unmapped = true;
        }
    };
    for (const auto& o : model.observers) {
        for (const auto& s : o.param_sorts) need(s, o.name.c_str());
        need(o.result_sort, o.name.c_str());
    }
    for (const auto& t : model.transitions)
        for (const auto& s : t.param_sorts) need(s, t.name.c_str());
    for (const auto& p : model.projections)
        for (const auto& s : p.id_sorts) need(s, p.name.c_str());
    if (unmapped) return std::nullopt;

    auto cls = translate_single(model, sink);
    if (!cls) return std::nullopt;
    if (model.is_composite()) translate_composite_members(model, *cls, sink);
    if (!apply_inheritance(model, *cls, sink)) return std::nullopt;

    validate_contracts(*cls, done_, sink);
    done_[module] = *cls;
    return cls;
}

// effective observers for equals / deep copy / constructors: the model's
// own plus everything inherited and not redeclared
static void effective_observers(const Translator& tr,
                                const std::map<std::string, OtsModel>& models,
                                const OtsModel& model,
                                std::vector<std::pair<const OtsModel*, const ObserverSpec*>>& out) {
    std::set<std::string> seen;
    const OtsModel* cur = &model;
    while (cur) {
        for (const auto& o : cur->observers)
            if (seen.insert(o.name).second) out.push_back({cur, &o});
        if (!cur->extends_module) break;
        auto it = models.find(*cur->extends_module);
        cur = it == models.end() ? nullptr : &it->second;
    }
    (void)tr;
}

std::optional<ContractClass> Translator::translate_single(const OtsModel& model,
                                                          DiagnosticSink& sink) {
    const SpecModule* mod = set_.find_module(model.module_name);
    if (!mod) return std::nullopt;
    ContractClass cls;
    cls.name = class_name(model.module_name);

    bool has_transitions = !model.transitions.empty();
    if (has_transitions) cls.ghost_fields.push_back({cls.name, options_.ghost_name});

    std::vector<std::pair<const OtsModel*, const ObserverSpec*>> all_observers;
    effective_observers(*this, models_, model, all_observers);

    // (a) one pure method per own observer
    for (const auto& o : model.observers) {
        ContractMethod m;
        m.name = method_name(model.module_name, o.name);
        m.pure = true;
        auto names = make_param_names(o.param_sorts, options_.mapping);
        for (size_t i = 0; i < o.param_sorts.size(); ++i)
            m.params.push_back({options_.mapping.find(o.param_sorts[i])->type, names[i]});
        m.return_type = options_.mapping.find(o.result_sort)->type;
        m.placeholder_return = placeholder_for(m.return_type);
        cls.methods.push_back(std::move(m));
    }

    // (b) one constructor per initial state, ensures one clause per observer
    if (model.initial_states.size() > 1)
        sink.warn("multiple-initial-states",
                  "module '" + model.module_name +
                      "' has several initial states; the argument-free constructors collide");
    for (const auto& init : model.initial_states) {
        ContractMethod ctor;
        ctor.name = cls.name;
        ctor.is_constructor = true;
        ContractCase c;
        for (const auto& [owner, o] : all_observers)
            if (auto clause = init_observer_clause(*owner, *o, init, sink))
                c.ensures_clauses.push_back(*clause);
        for (const auto& p : model.projections)
            if (auto clause = init_projection_clause(model, p, init, sink))
                c.ensures_clauses.push_back(*clause);
        ctor.cases.push_back(std::move(c));
        cls.methods.push_back(std::move(ctor));
    }

    // (c) behavioral equality
    {
        ContractMethod eq;
        eq.name = "equals";
        eq.params.push_back({cls.name, "another"});
        eq.return_type = "boolean";
        eq.placeholder_return = "false";
        ContractCase c;
        for (const auto& [owner, o] : all_observers) {
            auto names = make_param_names(o->param_sorts, options_.mapping);
            std::vector<std::pair<std::string, std::string>> binders;
            std::vector<ExprP> args;
            for (size_t i = 0; i < names.size(); ++i) {
                binders.push_back({options_.mapping.find(o->param_sorts[i])->type, names[i]});
                args.push_back(e_name(names[i]));
            }
            std::string mname = method_name(owner->module_name, o->name);
            ExprP body = e_bin("==", e_call(e_this(), mname, args),
                               e_call(e_name("another"), mname, args));
            ExprP ante = binders.empty() ? body : e_forall(binders, body);
            c.ensures_clauses.push_back(
                e_bin("==>", ante, e_bin("==", e_result(), e_bool(true))));
        }
        eq.cases.push_back(std::move(c));
        cls.methods.push_back(std::move(eq));
    }

    // (d) deep copy constructor
    {
        ContractMethod copy;
        copy.name = cls.name;
        copy.is_constructor = true;
        copy.params.push_back({cls.name, "another"});
        ContractCase c;
        c.requires_clauses.push_back(e_bin("!=", e_name("another"), e_null()));
        std::vector<ExprP> parts;
        for (const auto& [owner, o] : all_observers) {
            auto names = make_param_names(o->param_sorts, options_.mapping);
            std::vector<std::pair<std::string, std::string>> binders;
            std::vector<ExprP> args;
            for (size_t i = 0; i < names.size(); ++i) {
                binders.push_back({options_.mapping.find(o->param_sorts[i])->type, names[i]});
                args.push_back(e_name(names[i]));
            }
            std::string mname = method_name(owner->module_name, o->name);
            ExprP body = e_bin("==", e_call(e_this(), mname, args),
                               e_call(e_name("another"), mname, args));
            parts.push_back(binders.empty() ? body : e_forall(binders, body));
        }
        parts.push_back(e_bin("!=", e_this(), e_name("another")));
        c.ensures_clauses.push_back(e_and_all(parts));
        copy.cases.push_back(std::move(c));
        cls.methods.push_back(std::move(copy));
    }

    // (e) transition methods with the dual contract
    for (const auto& t : model.transitions) {
        if (!model.is_composite()) {
            if (auto m = translate_simple_transition(model, t, cls, sink))
                cls.methods.push_back(std::move(*m));
            else
                return std::nullopt;
        }
        // composite transitions are emitted in translate_composite_members
    }

    return cls;
}

std::optional<ExprP> Translator::init_observer_clause(const OtsModel& owner,
                                                      const ObserverSpec& o,
                                                      const std::string& init,
                                                      DiagnosticSink& sink) {
    const SpecModule* mod = set_.find_module(owner.module_name);
    if (!mod) return std::nullopt;
    auto names = make_param_names(o.param_sorts, options_.mapping);
    std::vector<std::pair<std::string, std::string>> binders;
    std::vector<ExprP> args;
    for (size_t i = 0; i < names.size(); ++i) {
        binders.push_back({options_.mapping.find(o.param_sorts[i])->type, names[i]});
        args.push_back(e_name(names[i]));
    }
    std::string mname = method_name(owner.module_name, o.name);
    ExprP call = e_call(nullptr, mname, args); // constructor ensures use the implicit receiver

    // search every visible module for an equation anchoring the observer
    // at this initial constant (subclasses give initial values for
    // inherited observers)
    const Equation* anchored = nullptr;
    for (const auto& [mn, m] : models_) {
        const SpecModule* sm = set_.find_module(mn);
        if (!sm) continue;
        for (const auto& e : sm->equations) {
            if (!e.lhs.is_apply() || e.lhs.name != o.name) continue;
            if (static_cast<size_t>(o.hidden_arg_index) >= e.lhs.args.size()) continue;
            if (e.lhs.args[o.hidden_arg_index].is_const(init)) {
                anchored = &e;
                break;
            }
        }
        if (anchored) break;
    }

    ExprP value;
    if (anchored) {
        TermTranslator tt{*this, owner, nullptr, {}, sink};
        size_t bi = 0;
        for (size_t i = 0; i < anchored->lhs.args.size(); ++i) {
            if (static_cast<int>(i) == o.hidden_arg_index) continue;
            if (anchored->lhs.args[i].is_var() && bi < names.size())
                tt.bindings[anchored->lhs.args[i].name] = e_name(names[bi]);
            ++bi;
        }
        Term rhs = anchored->rhs;
        if (term_is_ground(rhs)) {
            // the paper obtains the value by reducing the init equation
            Interpreter interp(set_, models_.at(owner.module_name), models_, {});
            DiagnosticSink quiet;
            if (auto nf = interp.reduce(rhs, quiet)) rhs = *nf;
        }
        DiagnosticSink quiet;
        TermTranslator tv{*this, owner, nullptr, {}, quiet};
        tv.bindings = tt.bindings;
        value = tv.translate(rhs);
        if (tv.failed) return std::nullopt; // not expressible, omit the clause
    } else {
        // no anchored equation: evaluate symbolically and omit when stuck
        Interpreter interp(set_, models_.at(owner.module_name), models_, {});
        Term call_term = Term::apply(o.op->name, {});
        std::vector<Term> targs;
        size_t bi = 0;
        for (size_t i = 0; i < o.op->arity.size(); ++i) {
            if (static_cast<int>(i) == o.hidden_arg_index)
                targs.push_back(Term::apply(init));
            else
                targs.push_back(Term::var("$p" + std::to_string(bi), o.op->arity[i])), ++bi;
        }
        call_term.args = std::move(targs);
        DiagnosticSink quiet;
        auto nf = interp.reduce(call_term, quiet);
        if (!nf) return std::nullopt;
        DiagnosticSink quiet2;
        TermTranslator tv{*this, owner, nullptr, {}, quiet2};
        for (size_t i = 0; i < names.size(); ++i)
            tv.bindings["$p" + std::to_string(i)] = e_name(names[i]);
        value = tv.translate(*nf);
        if (tv.failed) return std::nullopt;
    }

    ExprP body = e_bin("==", call, value);
    return binders.empty() ? body : e_forall(binders, body);
}

std::optional<ExprP> Translator::init_projection_clause(const OtsModel& model,
                                                        const ProjectionSpec& p,
                                                        const std::string& init,
                                                        DiagnosticSink& sink) {
    const SpecModule* mod = set_.find_module(model.module_name);
    if (!mod) return std::nullopt;
    const Equation* anchored = nullptr;
    for (int idx : p.defining_equations) {
        const Equation& e = mod->equations[idx];
        if (static_cast<size_t>(p.hidden_arg_index) < e.lhs.args.size() &&
            e.lhs.args[p.hidden_arg_index].is_const(init)) {
            anchored = &e;
            break;
        }
    }
    if (!anchored) return std::nullopt;
    auto names = make_param_names(p.id_sorts, options_.mapping, "i");
    std::vector<std::pair<std::string, std::string>> binders;
    std::vector<ExprP> args;
    for (size_t i = 0; i < names.size(); ++i) {
        binders.push_back({options_.mapping.find(p.id_sorts[i])->type, names[i]});
        args.push_back(e_name(names[i]));
    }
    ExprP call = e_call(nullptr, method_name(model.module_name, p.name), args);
    ExprP body;
    if (p.absent_value && anchored->rhs.is_const(*p.absent_value)) {
        body = e_bin("==", call, e_null());
    } else {
        DiagnosticSink quiet;
        TermTranslator tv{*this, model, nullptr, {}, quiet};
        size_t bi = 0;
        for (size_t i = 0; i < anchored->lhs.args.size(); ++i) {
            if (static_cast<int>(i) == p.hidden_arg_index) continue;
            if (anchored->lhs.args[i].is_var() && bi < names.size())
                tv.bindings[anchored->lhs.args[i].name] = e_name(names[bi]);
            ++bi;
        }
        ExprP value = tv.translate(anchored->rhs);
        if (tv.failed) {
            sink.warn("chain-not-translatable",
                      "initial projection of '" + p.name + "' omitted from the constructor");
            return std::nullopt;
        }
        body = e_call(call, "equals", {value});
    }
    return binders.empty() ? body : e_forall(binders, body);
}

std::optional<ContractMethod> Translator::translate_simple_transition(const OtsModel& model,
                                                                      const TransitionSpec& t,
                                                                      const ContractClass& cls,
                                                                      DiagnosticSink& sink) {
    const SpecModule* mod = set_.find_module(model.module_name);
    ContractMethod m;
    m.name = method_name(model.module_name, t.name);
    auto pnames = make_param_names(t.param_sorts, options_.mapping);
    for (size_t i = 0; i < t.param_sorts.size(); ++i)
        m.params.push_back({options_.mapping.find(t.param_sorts[i])->type, pnames[i]});
    m.return_type = cls.name;
    m.placeholder_return = "this";
    m.ghost_sets.push_back(e_new(cls.name, {e_this()}));

    // nat-sorted parameters add their non-negativity requires
    std::vector<ExprP> nat_clauses;
    for (size_t i = 0; i < t.param_sorts.size(); ++i) {
        const auto* e = options_.mapping.find(t.param_sorts[i]);
        if (e && e->is_nat) nat_clauses.push_back(e_bin(">=", e_name(pnames[i]), e_int(0)));
    }

    // bind transition argument variables positionally from any effect
    // equation; they name the method parameters
    auto bind_transition_vars = [&](const Term& tau, std::map<std::string, ExprP>& bindings) {
        size_t vi = 0;
        for (size_t i = 0; i < tau.args.size(); ++i) {
            if (static_cast<int>(i) == t.hidden_arg_index) continue;
            if (tau.args[i].is_var() && vi < pnames.size())
                bindings[tau.args[i].name] = e_name(pnames[vi]);
            ++vi;
        }
    };

    // effective condition translated over the pure methods
    ExprP cond;
    if (t.effective_condition && t.condition_equation >= 0 && mod) {
        const Equation& ce = mod->equations[t.condition_equation];
        TermTranslator tt{*this, model, e_this(), {}, sink};
        size_t vi = 0;
        for (size_t i = 0; i < ce.lhs.args.size(); ++i) {
            const Term& pat = ce.lhs.args[i];
            if (!pat.is_var()) continue;
            if (set_.is_hidden(pat.sort)) {
                tt.bindings[pat.name] = e_this();
            } else {
                if (vi < pnames.size()) tt.bindings[pat.name] = e_name(pnames[vi]);
                ++vi;
            }
        }
        cond = tt.translate(ce.rhs);
        if (tt.failed) return std::nullopt;
    }

    // partition the effect equations into the effective and stuttering case
    struct EffectClause {
        ExprP clause;
    };
    std::vector<ExprP> case1_effects, case2_effects;
    if (mod) {
        for (int idx : t.effect_equations) {
            const Equation& e = mod->equations[idx];
            bool negated = false, guarded = false;
            if (e.condition) {
                const Term& g = *e.condition;
                if (t.effective_condition && g.is_apply() && g.name == *t.effective_condition)
                    guarded = true;
                if (t.effective_condition && g.is_apply() && g.name == "not_" &&
                    g.args[0].is_apply() && g.args[0].name == *t.effective_condition) {
                    guarded = true;
                    negated = true;
                }
            }
            const ObserverSpec* o = model.find_observer(e.lhs.name);
            if (!o) continue;
            const Term& tau = e.lhs.args[o->hidden_arg_index];
            TermTranslator tt{*this, model, e_ghost(options_.ghost_name), {}, sink};
            bind_transition_vars(tau, tt.bindings);
            // observer argument variables become forall binders
            auto onames = make_param_names(o->param_sorts, options_.mapping);
            std::vector<std::pair<std::string, std::string>> binders;
            std::vector<ExprP> oargs;
            size_t bi = 0;
            for (size_t i = 0; i < e.lhs.args.size(); ++i) {
                if (static_cast<int>(i) == o->hidden_arg_index) continue;
                if (e.lhs.args[i].is_var() && bi < onames.size()) {
                    tt.bindings[e.lhs.args[i].name] = e_name(onames[bi]);
                    binders.push_back(
                        {options_.mapping.find(o->param_sorts[bi])->type, onames[bi]});
                    oargs.push_back(e_name(onames[bi]));
                }
                ++bi;
            }
            ExprP rhs = tt.translate(e.rhs);
            if (tt.failed) return std::nullopt;
            ExprP lhs = e_call(e_result(), method_name(model.module_name, o->name), oargs);
            ExprP clause = e_bin("==", lhs, rhs);
            if (!binders.empty()) clause = e_forall(binders, clause);
            if (guarded && negated)
                case2_effects.push_back(clause);
            else
                case1_effects.push_back(clause);
        }
    }

    ContractCase c1;
    if (cond) c1.requires_clauses.push_back(cond);
    for (const auto& nc : nat_clauses) c1.requires_clauses.push_back(nc);
    case1_effects.push_back(e_bin("==", e_result(), e_this()));
    c1.ensures_clauses.push_back(e_and_all(case1_effects));
    m.cases.push_back(std::move(c1));

    if (cond) {
        ContractCase c2;
        c2.requires_clauses.push_back(e_negate(cond));
        for (const auto& nc : nat_clauses) c2.requires_clauses.push_back(nc);
        case2_effects.push_back(e_bin("==", e_result(), e_this()));
        c2.ensures_clauses.push_back(e_and_all(case2_effects));
        c2.assignable_nothing = true;
        m.cases.push_back(std::move(c2));
    }
    return m;
}

} // namespace otsc::gen
