#include "specdb/check.hpp"

#include <algorithm>
#include <set>

namespace specdb {

namespace {

struct LocalError {
    SourceSpan span;
    std::string message;
};

std::string show(const ColumnTypes& t) {
    std::string out;
    for (std::size_t i = 0; i < t.size(); ++i) out += (i ? "->" : "") + t[i];
    return out.empty() ? "?" : out;
}

class Checker {
public:
    explicit Checker(const Spec& spec) : spec_(spec) {}

    // -- expressions --------------------------------------------------------

    ExprPtr expr(const ExprPtr& e, const VarTypes& vars, const ColumnTypes* expected = nullptr) {
        switch (e->kind) {
            case ExprKind::Rel: {
                ColumnTypes t;
                if (e->tag != RelTag::Plain) throw LocalError{e->span, "tagged relation in source syntax"};
                if (spec_.find_sig(e->name) != nullptr) {
                    t = {e->name};
                } else if (const FieldDecl* f = spec_.find_field(e->name)) {
                    t = f->columns;
                } else {
                    throw LocalError{e->span, "unknown relation `" + e->name + "`"};
                }
                return ex::rel(e->name, t, RelTag::Plain, e->span);
            }
            case ExprKind::Var: {
                auto it = vars.find(e->name);
                if (it == vars.end()) throw LocalError{e->span, "unbound variable `" + e->name + "`"};
                return ex::var(e->name, {it->second}, e->span);
            }
            case ExprKind::None: {
                if (expected != nullptr && !expected->empty()) return ex::none(*expected, e->span);
                if (!e->type.empty()) return ex::none(e->type, e->span);
                throw LocalError{e->span, "cannot infer the type of `none` here"};
            }
            case ExprKind::Union:
            case ExprKind::Intersect:
            case ExprKind::Diff: {
                auto [a, b] = same_typed(e->lhs, e->rhs, vars, expected);
                if (a->type != b->type)
                    throw LocalError{e->span, "operands have different types " + show(a->type) + " and " +
                                                  show(b->type)};
                return ex::binary(e->kind, a, b, e->span);
            }
            case ExprKind::Join: {
                ExprPtr a = expr(e->lhs, vars);
                ExprPtr b = expr(e->rhs, vars);
                if (a->type.back() != b->type.front())
                    throw LocalError{e->span, "cannot join " + show(a->type) + " with " + show(b->type)};
                if (a->arity() + b->arity() <= 2)
                    throw LocalError{e->span, "join of two unary expressions has no columns"};
                return ex::join(a, b, e->span);
            }
            case ExprKind::Product:
                return ex::product(expr(e->lhs, vars), expr(e->rhs, vars), e->span);
            case ExprKind::Converse: {
                const ColumnTypes* inner = nullptr;
                ColumnTypes swapped;
                if (expected != nullptr && expected->size() == 2) {
                    swapped = {(*expected)[1], (*expected)[0]};
                    inner = &swapped;
                }
                ExprPtr a = expr(e->lhs, vars, inner);
                if (a->arity() != 2) throw LocalError{e->span, "converse of a non-binary expression " + show(a->type)};
                return ex::converse(a, e->span);
            }
            case ExprKind::Closure: {
                ExprPtr a = expr(e->lhs, vars, expected);
                if (a->arity() != 2 || a->type[0] != a->type[1])
                    throw LocalError{e->span, "closure needs a homogeneous binary relation, got " + show(a->type)};
                return ex::closure(a, e->span);
            }
        }
        throw LocalError{e->span, "bad expression"};
    }

    std::pair<ExprPtr, ExprPtr> same_typed(const ExprPtr& l, const ExprPtr& r, const VarTypes& vars,
                                           const ColumnTypes* expected) {
        bool l_open = l->kind == ExprKind::None && l->type.empty();
        if (l_open) {
            ExprPtr b = expr(r, vars, expected);
            return {expr(l, vars, &b->type), b};
        }
        ExprPtr a = expr(l, vars, expected);
        return {a, expr(r, vars, &a->type)};
    }

    // -- formulas -----------------------------------------------------------

    FormulaPtr formula(const FormulaPtr& f, VarTypes vars) {
        switch (f->kind) {
            case FormulaKind::In:
            case FormulaKind::Eq: {
                auto [a, b] = same_typed(f->lhs, f->rhs, vars, nullptr);
                if (a->type != b->type)
                    throw LocalError{f->span, "comparison between " + show(a->type) + " and " + show(b->type)};
                return f->kind == FormulaKind::In ? fx::in(a, b, f->span) : fx::eq(a, b, f->span);
            }
            case FormulaKind::Not:
                return fx::not_(formula(f->left, vars), f->span);
            case FormulaKind::And:
                return fx::and_(formula(f->left, vars), formula(f->right, vars), f->span);
            case FormulaKind::Or:
                return fx::or_(formula(f->left, vars), formula(f->right, vars), f->span);
            case FormulaKind::Forall:
            case FormulaKind::Exists: {
                ExprPtr bound = expr(f->lhs, vars);
                if (bound->arity() != 1)
                    throw LocalError{f->lhs->span, "quantifier bound must be unary, got " + show(bound->type)};
                vars[f->var] = bound->type[0];
                FormulaPtr body = formula(f->left, vars);
                return f->kind == FormulaKind::Forall ? fx::forall(f->var, bound, body, f->span)
                                                      : fx::exists(f->var, bound, body, f->span);
            }
        }
        throw LocalError{f->span, "bad formula"};
    }

    // -- State discipline ---------------------------------------------------

    bool is_state_var(const Expr& e, const VarTypes& vars) const {
        if (e.kind != ExprKind::Var) return false;
        auto it = vars.find(e.name);
        return it != vars.end() && it->second == spec_.state_sig;
    }

    bool is_state_field(const std::string& name) const {
        const Signature* owner = spec_.field_owner(name);
        return owner != nullptr && owner->name == spec_.state_sig;
    }

    void state_use(const Expr& e, const VarTypes& vars) const {
        if (spec_.state_sig.empty()) return;
        if (e.kind == ExprKind::Join && is_state_var(*e.lhs, vars)) {
            state_headed(*e.rhs, vars);
            return;
        }
        if (is_state_var(e, vars))
            throw LocalError{e.span, "State variable `" + e.name + "` may only be used as `" + e.name + ".field`"};
        if (e.kind == ExprKind::Rel) {
            if (e.name == spec_.state_sig)
                throw LocalError{e.span, "the State signature cannot be used as an expression"};
            if (is_state_field(e.name))
                throw LocalError{e.span, "State field `" + e.name + "` must be accessed through a State variable"};
        }
        if (e.lhs) state_use(*e.lhs, vars);
        if (e.rhs) state_use(*e.rhs, vars);
    }

    // Right operand of `x.e` for a State variable x.
    void state_headed(const Expr& e, const VarTypes& vars) const {
        switch (e.kind) {
            case ExprKind::Rel:
                if (is_state_field(e.name)) return;
                break;
            case ExprKind::None:
                return;
            case ExprKind::Union:
            case ExprKind::Intersect:
            case ExprKind::Diff:
                state_headed(*e.lhs, vars);
                state_headed(*e.rhs, vars);
                return;
            case ExprKind::Join:
                if (e.lhs->arity() >= 2) {
                    state_headed(*e.lhs, vars);
                    state_use(*e.rhs, vars);
                    return;
                }
                break;
            default:
                break;
        }
        throw LocalError{e.span, "unsupported State-typed expression; expected State fields combined with + & - and joins"};
    }

    void state_formula(const Formula& f, const VarTypes& vars_in, bool allow_state_bound) const {
        VarTypes vars = vars_in;
        switch (f.kind) {
            case FormulaKind::In:
            case FormulaKind::Eq:
                state_use(*f.lhs, vars);
                state_use(*f.rhs, vars);
                return;
            case FormulaKind::Not:
                state_formula(*f.left, vars, false);
                return;
            case FormulaKind::And:
            case FormulaKind::Or:
                state_formula(*f.left, vars, false);
                state_formula(*f.right, vars, false);
                return;
            case FormulaKind::Forall:
            case FormulaKind::Exists: {
                bool over_state = f.lhs->type.size() == 1 && f.lhs->type[0] == spec_.state_sig && !spec_.state_sig.empty();
                if (over_state) {
                    if (!allow_state_bound || f.kind != FormulaKind::Forall)
                        throw LocalError{f.span, "State variables may only be bound by a fact's leading `all`"};
                    if (!(f.lhs->kind == ExprKind::Rel && f.lhs->name == spec_.state_sig))
                        throw LocalError{f.lhs->span, "a State variable must range over the State signature itself"};
                } else {
                    state_use(*f.lhs, vars);
                }
                vars[f.var] = f.lhs->type[0];
                state_formula(*f.left, vars, allow_state_bound && f.kind == FormulaKind::Forall);
                return;
            }
        }
    }

private:
    const Spec& spec_;
};

// Resolves field column types, in declaration order; dependent items may
// refer to earlier fields of the same signature.
void resolve_fields(Spec& s, std::vector<Diagnostic>& diags) {
    for (auto& sig : s.signatures) {
        for (std::size_t fi = 0; fi < sig.fields.size(); ++fi) {
            FieldDecl& f = sig.fields[fi];
            f.columns = {sig.name};
            bool ok = true;
            for (std::size_t k = 0; k < f.items.size(); ++k) {
                const FieldItem& item = f.items[k];
                if (item.mult == Multiplicity::Lone && k + 1 != f.items.size()) {
                    diags.push_back({f.span, "`lone` is only supported on the last column of `" + f.name + "`"});
                    ok = false;
                }
                if (s.find_sig(item.name) != nullptr) {
                    if (item.name == s.state_sig && !s.state_sig.empty()) {
                        diags.push_back({f.span, "the State signature may only appear as the owner of a field (in `" +
                                                     f.name + "`)"});
                        ok = false;
                    }
                    f.columns.push_back(item.name);
                    continue;
                }
                const FieldDecl* sibling = nullptr;
                for (std::size_t j = 0; j < fi; ++j)
                    if (sig.fields[j].name == item.name) sibling = &sig.fields[j];
                if (sibling == nullptr) {
                    diags.push_back({f.span, "unknown type `" + item.name + "` in field `" + f.name + "`"});
                    ok = false;
                    continue;
                }
                if (item.explicit_mult && item.mult == Multiplicity::Lone) {
                    diags.push_back({f.span, "`lone` cannot annotate a field reference"});
                    ok = false;
                }
                f.columns.insert(f.columns.end(), sibling->columns.begin() + 1, sibling->columns.end());
            }
            if (!ok) f.columns = {sig.name};
        }
    }
}

void derive_facts(Spec& s) {
    s.derived_facts.clear();
    for (const auto& sig : s.signatures) {
        for (const auto& f : sig.fields) {
            if (f.columns.size() < 2) continue;
            bool dependent = std::any_of(f.items.begin(), f.items.end(),
                                         [&](const FieldItem& i) { return s.find_sig(i.name) == nullptr; });
            if (dependent) {
                ExprPtr self = ex::var("this");
                ExprPtr lhs = ex::join(self, ex::rel(f.name));
                ExprPtr rhs;
                for (const auto& item : f.items) {
                    ExprPtr part = s.find_sig(item.name) != nullptr ? ex::rel(item.name)
                                                                    : ex::join(self, ex::rel(item.name));
                    rhs = rhs ? ex::product(rhs, part) : part;
                }
                Fact fact;
                fact.name = f.name + "$domain";
                fact.body = fx::forall("this", ex::rel(sig.name), fx::in(lhs, rhs));
                fact.span = f.span;
                s.derived_facts.push_back(std::move(fact));
            }
            if (!f.items.empty() && f.items.back().mult == Multiplicity::Lone) {
                const std::size_t n = f.columns.size() - 1;
                std::vector<std::string> names;
                ExprPtr path = ex::rel(f.name);
                for (std::size_t k = 0; k < n; ++k) {
                    names.push_back("x" + std::to_string(k));
                    path = ex::join(ex::var(names.back()), path);
                }
                ExprPtr y1 = ex::var("y1");
                ExprPtr y2 = ex::var("y2");
                FormulaPtr body = fx::implies(fx::and_(fx::in(y1, path), fx::in(y2, path)), fx::eq(y1, y2));
                body = fx::forall("y2", ex::rel(f.columns[n]), body);
                body = fx::forall("y1", ex::rel(f.columns[n]), body);
                for (std::size_t k = n; k-- > 0;) body = fx::forall(names[k], ex::rel(f.columns[k]), body);
                Fact fact;
                fact.name = f.name + "$lone";
                fact.body = body;
                fact.span = f.span;
                s.derived_facts.push_back(std::move(fact));
            }
        }
    }
}

std::string infer_state_sig(const Spec& s, std::vector<Diagnostic>& diags) {
    for (const auto& sig : s.signatures)
        if (sig.state_marked) return sig.name;
    std::string found;
    for (const auto& p : s.predicates) {
        for (const auto& param : p.params) {
            if (!is_primed(param.name)) continue;
            if (found.empty()) {
                found = param.type;
            } else if (found != param.type) {
                diags.push_back({p.span, "predicates disagree on the State signature (`" + found + "` vs `" +
                                             param.type + "`); mark one with `state sig`"});
            }
        }
    }
    if (!found.empty()) return found;
    if (s.find_sig("State") != nullptr) return "State";
    return {};
}

}  // namespace

Spec check_spec(const Spec& raw) {
    Spec s = raw;
    std::vector<Diagnostic> diags;

    std::map<std::string, SourceSpan> names;
    auto declare = [&](const std::string& n, const SourceSpan& span, const char* what) {
        if (!names.emplace(n, span).second) diags.push_back({span, std::string("duplicate ") + what + " name `" + n + "`"});
    };
    for (const auto& sig : s.signatures) {
        declare(sig.name, sig.span, "signature");
        for (const auto& f : sig.fields) declare(f.name, f.span, "field");
    }
    for (const auto& p : s.predicates) declare(p.name, p.span, "predicate");

    s.state_sig = infer_state_sig(s, diags);
    if (!s.state_sig.empty() && s.find_sig(s.state_sig) == nullptr)
        diags.push_back({SourceSpan{}, "State signature `" + s.state_sig + "` is not declared"});
    if (s.state_sig.empty() && !s.predicates.empty())
        diags.push_back({s.predicates.front().span, "no State signature: predicates need parameters `s, s': State`"});

    resolve_fields(s, diags);
    derive_facts(s);

    Checker checker(s);
    for (auto& p : s.predicates) {
        VarTypes vars;
        std::vector<std::string> pre;
        std::vector<std::string> post;
        for (const auto& param : p.params) {
            if (s.find_sig(param.type) == nullptr)
                diags.push_back({p.span, "unknown type `" + param.type + "` for parameter `" + param.name + "`"});
            if (!vars.emplace(param.name, param.type).second)
                diags.push_back({p.span, "duplicate parameter `" + param.name + "`"});
            if (param.type == s.state_sig) (is_primed(param.name) ? post : pre).push_back(param.name);
        }
        if (pre.size() != 1 || post.size() != 1 || post[0] != pre[0] + "'") {
            diags.push_back({p.span, "predicate `" + p.name + "` needs exactly two State parameters `x, x': " +
                                         s.state_sig + "`"});
            continue;
        }
        try {
            p.body = checker.formula(p.body, vars);
            checker.state_formula(*p.body, vars, false);
            for (const auto& v : free_vars(*p.body))
                if (vars.count(v) == 0) diags.push_back({p.span, "free variable `" + v + "`"});
        } catch (const LocalError& e) {
            diags.push_back({e.span, e.message});
        }
    }

    auto check_fact = [&](Fact& f) {
        try {
            f.body = checker.formula(f.body, {});
            if (!free_vars(*f.body).empty())
                diags.push_back({f.span, "fact `" + f.name + "` has free variables"});
            checker.state_formula(*f.body, {}, true);
            // at most one State binder along the leading `all` chain
            int state_vars = 0;
            for (const Formula* cur = f.body.get(); cur->kind == FormulaKind::Forall; cur = cur->left.get())
                if (cur->lhs->type == ColumnTypes{s.state_sig}) ++state_vars;
            if (state_vars > 1) diags.push_back({f.span, "fact `" + f.name + "` has more than one State variable"});
        } catch (const LocalError& e) {
            diags.push_back({e.span, e.message});
        }
    };
    for (auto& f : s.facts) check_fact(f);
    for (auto& f : s.derived_facts) check_fact(f);

    if (!diags.empty()) throw TypeError(std::move(diags), s.source);
    s.checked = true;
    return s;
}

ColumnTypes type_of(const Expr& e, const Spec& spec, const VarTypes& vars) {
    return check_expr(spec, std::make_shared<Expr>(e), vars)->type;
}

ExprPtr check_expr(const Spec& spec, const ExprPtr& e, const VarTypes& vars) {
    Checker c(spec);
    try {
        return c.expr(e, vars);
    } catch (const LocalError& err) {
        throw TypeError({Diagnostic{err.span, err.message}}, spec.source);
    }
}

FormulaPtr check_formula(const Spec& spec, const FormulaPtr& f, const VarTypes& vars) {
    Checker c(spec);
    try {
        FormulaPtr out = c.formula(f, vars);
        c.state_formula(*out, vars, false);
        return out;
    } catch (const LocalError& err) {
        throw TypeError({Diagnostic{err.span, err.message}}, spec.source);
    }
}

}  // namespace specdb
