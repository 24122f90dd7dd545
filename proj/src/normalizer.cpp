#include "specdb/normalizer.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace specdb {

namespace {

std::string fresh(const std::string& base, std::set<std::string>& used) {
    std::string name = base;
    for (int k = 1; used.count(name); ++k) name = base + "$" + std::to_string(k);
    used.insert(name);
    return name;
}

void collect_binders(const Formula& f, std::set<std::string>& out) {
    if (f.kind == FormulaKind::Forall || f.kind == FormulaKind::Exists) out.insert(f.var);
    if (f.left) collect_binders(*f.left, out);
    if (f.right) collect_binders(*f.right, out);
}

FormulaPtr rename_apart(const FormulaPtr& f, std::set<std::string>& used) {
    switch (f->kind) {
        case FormulaKind::In:
        case FormulaKind::Eq:
            return f;
        case FormulaKind::Not:
            return fx::not_(rename_apart(f->left, used), f->span);
        case FormulaKind::And:
            return fx::and_(rename_apart(f->left, used), rename_apart(f->right, used), f->span);
        case FormulaKind::Or:
            return fx::or_(rename_apart(f->left, used), rename_apart(f->right, used), f->span);
        case FormulaKind::Forall:
        case FormulaKind::Exists: {
            std::string name = fresh(f->var, used);
            FormulaPtr body = f->left;
            if (name != f->var) body = substitute(body, f->var, ex::var(name, f->lhs->type));
            body = rename_apart(body, used);
            return f->kind == FormulaKind::Forall ? fx::forall(name, f->lhs, body, f->span)
                                                  : fx::exists(name, f->lhs, body, f->span);
        }
    }
    return f;
}

// Drops the State binder of a fact's leading `all` chain, binding it to the
// post-state parameter instead.
FormulaPtr bind_state(const FormulaPtr& f, const std::string& state_sig, const std::string& post) {
    if (f->kind != FormulaKind::Forall) return f;
    bool is_state = f->lhs->kind == ExprKind::Rel && f->lhs->name == state_sig && f->lhs->arity() == 1;
    if (is_state) {
        FormulaPtr body = substitute(f->left, f->var, ex::var(post, {state_sig}));
        return bind_state(body, state_sig, post);
    }
    return fx::forall(f->var, f->lhs, bind_state(f->left, state_sig, post), f->span);
}

FormulaPtr nnf(const FormulaPtr& f, bool positive) {
    switch (f->kind) {
        case FormulaKind::In:
        case FormulaKind::Eq:
            return positive ? f : fx::not_(f, f->span);
        case FormulaKind::Not:
            return nnf(f->left, !positive);
        case FormulaKind::And:
        case FormulaKind::Or: {
            FormulaPtr l = nnf(f->left, positive);
            FormulaPtr r = nnf(f->right, positive);
            bool conj = (f->kind == FormulaKind::And) == positive;
            return conj ? fx::and_(l, r, f->span) : fx::or_(l, r, f->span);
        }
        case FormulaKind::Forall:
        case FormulaKind::Exists: {
            bool universal = (f->kind == FormulaKind::Forall) == positive;
            const std::string sig = f->lhs->type.at(0);
            FormulaPtr body = nnf(f->left, positive);
            bool plain = f->lhs->kind == ExprKind::Rel && f->lhs->tag == RelTag::Plain && f->lhs->name == sig;
            ExprPtr y = ex::var(f->var, {sig});
            if (!plain) {
                body = universal ? fx::or_(fx::not_(fx::in(y, f->lhs)), body) : fx::and_(fx::in(y, f->lhs), body);
            }
            ExprPtr bound = ex::rel(sig, {sig});
            return universal ? fx::forall(f->var, bound, body, f->span) : fx::exists(f->var, bound, body, f->span);
        }
    }
    return f;
}

std::vector<FormulaPtr> primed_facts(const Spec& spec, const Predicate& p, const std::vector<Fact>& facts) {
    std::set<std::string> used;
    for (const auto& prm : p.params) used.insert(prm.name);
    collect_binders(*p.body, used);
    const std::string post = p.post_state(spec.state_sig);
    std::vector<FormulaPtr> out;
    for (const auto& fact : facts) out.push_back(bind_state(rename_apart(fact.body, used), spec.state_sig, post));
    return out;
}

// ---------------------------------------------------------------------------
// Skolemization

class Skolemizer {
public:
    Skolemizer(Spec& spec, const Predicate& p, std::vector<RelationDecl>& decls)
        : spec_(spec), post_(p.post_state(spec.state_sig)), decls_(decls) {
        for (const auto& prm : p.params) used_.insert(prm.name);
        collect_binders(*p.body, used_);
        for (const auto& sig : spec.signatures) {
            names_.insert(sig.name);
            for (const auto& fld : sig.fields) names_.insert(fld.name);
        }
        for (const auto& pr : spec.predicates) names_.insert(pr.name);
    }

    FormulaPtr walk(const FormulaPtr& f, std::vector<Universal>& scope) {
        switch (f->kind) {
            case FormulaKind::In:
            case FormulaKind::Eq:
            case FormulaKind::Not:
                return f;
            case FormulaKind::And:
                return fx::and_(walk(f->left, scope), walk(f->right, scope), f->span);
            case FormulaKind::Or:
                return fx::or_(walk(f->left, scope), walk(f->right, scope), f->span);
            case FormulaKind::Forall: {
                scope.push_back({f->var, f->lhs->type.at(0)});
                FormulaPtr body = walk(f->left, scope);
                scope.pop_back();
                return fx::forall(f->var, f->lhs, body, f->span);
            }
            case FormulaKind::Exists: {
                const std::string y_sig = f->lhs->type.at(0);
                RelationDecl decl;
                decl.name = fresh("sk$" + f->var, names_);
                decl.columns = {spec_.state_sig};
                for (const auto& u : scope) decl.columns.push_back(u.sig);
                decl.columns.push_back(y_sig);
                decl.is_mutable = true;
                add_field(decl);

                ExprPtr term = skolem_term(decl, scope, {});
                FormulaPtr body = walk(substitute(f->left, f->var, term), scope);
                constraints_.push_back(at_most_one(decl, scope, y_sig));
                return fx::and_(fx::not_(fx::in(term, ex::none({y_sig}))), body, f->span);
            }
        }
        return f;
    }

    const std::vector<FormulaPtr>& constraints() const { return constraints_; }

private:
    ExprPtr skolem_term(const RelationDecl& decl, const std::vector<Universal>& scope,
                        const std::map<std::string, std::string>& rename) {
        ExprPtr e = ex::join(ex::var(post_, {spec_.state_sig}), ex::rel(decl.name, decl.columns));
        for (const auto& u : scope) {
            auto it = rename.find(u.var);
            e = ex::join(ex::var(it == rename.end() ? u.var : it->second, {u.sig}), e);
        }
        return e;
    }

    FormulaPtr at_most_one(const RelationDecl& decl, const std::vector<Universal>& scope, const std::string& y_sig) {
        std::map<std::string, std::string> rename;
        for (const auto& u : scope) rename[u.var] = fresh(u.var, used_);
        ExprPtr p = skolem_term(decl, scope, rename);
        ExprPtr y1 = ex::var(fresh("y1", used_), {y_sig});
        ExprPtr y2 = ex::var(fresh("y2", used_), {y_sig});
        FormulaPtr body = fx::or_(fx::or_(fx::not_(fx::in(y1, p)), fx::not_(fx::in(y2, p))), fx::eq(y1, y2));
        body = fx::forall(y2->name, ex::rel(y_sig, {y_sig}), body);
        body = fx::forall(y1->name, ex::rel(y_sig, {y_sig}), body);
        for (auto it = scope.rbegin(); it != scope.rend(); ++it)
            body = fx::forall(rename[it->var], ex::rel(it->sig, {it->sig}), body);
        return body;
    }

    void add_field(const RelationDecl& decl) {
        decls_.push_back(decl);
        for (auto& sig : spec_.signatures) {
            if (sig.name != spec_.state_sig) continue;
            FieldDecl fd;
            fd.name = decl.name;
            for (std::size_t k = 1; k < decl.columns.size(); ++k) fd.items.push_back({decl.columns[k], Multiplicity::Set, false});
            fd.columns = decl.columns;
            sig.fields.push_back(std::move(fd));
        }
    }

    Spec& spec_;
    std::string post_;
    std::vector<RelationDecl>& decls_;
    std::set<std::string> used_;
    std::set<std::string> names_;
    std::vector<FormulaPtr> constraints_;
};

// ---------------------------------------------------------------------------
// State tagging

ExprPtr push_state(const ExprPtr& e, RelTag tag, const std::string& pre, const std::string& post) {
    switch (e->kind) {
        case ExprKind::Rel:
            return ex::rel(e->name, ColumnTypes(e->type.begin() + 1, e->type.end()), tag, e->span);
        case ExprKind::None:
            return ex::none(ColumnTypes(e->type.begin() + 1, e->type.end()), e->span);
        case ExprKind::Union:
        case ExprKind::Intersect:
        case ExprKind::Diff:
            return ex::binary(e->kind, push_state(e->lhs, tag, pre, post), push_state(e->rhs, tag, pre, post), e->span);
        case ExprKind::Join:
            return ex::join(push_state(e->lhs, tag, pre, post), tag_state(e->rhs, pre, post), e->span);
        default:
            throw std::logic_error("unsupported State-headed expression");
    }
}

// ---------------------------------------------------------------------------
// Special form

using Cnf = std::vector<Clause>;

Cnf cnf_true() { return {}; }
Cnf cnf_false() { return {Clause{}}; }

Cnf cnf_and(Cnf a, const Cnf& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

Cnf cnf_or(const Cnf& a, const Cnf& b) {
    Cnf out;
    for (const auto& x : a)
        for (const auto& y : b) {
            Clause c = x;
            c.universals.insert(c.universals.end(), y.universals.begin(), y.universals.end());
            c.disjuncts.insert(c.disjuncts.end(), y.disjuncts.begin(), y.disjuncts.end());
            out.push_back(std::move(c));
        }
    return out;
}

Cnf unit(SpecialFormula s) { return {Clause{{}, {std::move(s)}}}; }

ExprPtr converse_of(const ExprPtr& e) {
    switch (e->kind) {
        case ExprKind::Converse:
            return e->lhs;
        case ExprKind::Union:
        case ExprKind::Intersect:
        case ExprKind::Diff:
            return ex::binary(e->kind, converse_of(e->lhs), converse_of(e->rhs), e->span);
        case ExprKind::Product:
            return ex::product(e->rhs, e->lhs, e->span);
        case ExprKind::Join:
            if (e->lhs->arity() == 2 && e->rhs->arity() == 2)
                return ex::join(converse_of(e->rhs), converse_of(e->lhs), e->span);
            return ex::converse(e, e->span);
        case ExprKind::Closure:
            return ex::closure(converse_of(e->lhs), e->span);
        default:
            return ex::converse(e, e->span);
    }
}

ExprPtr subtract_all(ExprPtr d, const std::vector<ExprPtr>& f) {
    for (const auto& x : f) d = ex::minus(d, x);
    return d;
}

// Union-free, none-free terms whose union is `e`; empty means none.
std::vector<ExprPtr> terms(const ExprPtr& e) {
    auto pairs = [&](auto make) {
        std::vector<ExprPtr> out;
        auto a = terms(e->lhs);
        auto b = terms(e->rhs);
        for (const auto& x : a)
            for (const auto& y : b) out.push_back(make(x, y));
        return out;
    };
    switch (e->kind) {
        case ExprKind::Rel:
        case ExprKind::Var:
            return {e};
        case ExprKind::None:
            return {};
        case ExprKind::Union: {
            auto a = terms(e->lhs);
            auto b = terms(e->rhs);
            a.insert(a.end(), b.begin(), b.end());
            return a;
        }
        case ExprKind::Intersect:
            return pairs([](const ExprPtr& x, const ExprPtr& y) { return ex::inter(x, y); });
        case ExprKind::Join:
            return pairs([](const ExprPtr& x, const ExprPtr& y) { return ex::join(x, y); });
        case ExprKind::Product:
            return pairs([](const ExprPtr& x, const ExprPtr& y) { return ex::product(x, y); });
        case ExprKind::Diff: {
            auto a = terms(e->lhs);
            auto b = terms(e->rhs);
            std::vector<ExprPtr> out;
            for (const auto& x : a) out.push_back(subtract_all(x, b));
            return out;
        }
        case ExprKind::Converse: {
            std::vector<ExprPtr> out;
            for (const auto& x : terms(e->lhs)) out.push_back(converse_of(x));
            return out;
        }
        case ExprKind::Closure: {
            auto a = terms(e->lhs);
            if (a.empty()) return {};
            ExprPtr u = a[0];
            for (std::size_t i = 1; i < a.size(); ++i) u = ex::plus(u, a[i]);
            return {ex::closure(u, e->span)};
        }
    }
    return {e};
}

bool is_singleton(const Expr& e) {
    if (e.kind == ExprKind::Var) return true;
    return e.kind == ExprKind::Product && is_singleton(*e.lhs) && is_singleton(*e.rhs);
}

Cnf included(const std::vector<ExprPtr>& d, const std::vector<ExprPtr>& f) {
    Cnf out;
    for (const auto& x : d) out.push_back(Clause{{}, {SpecialFormula{{subtract_all(x, f)}, Polarity::Empty}}});
    return out;
}

Cnf not_included(const std::vector<ExprPtr>& d, const std::vector<ExprPtr>& f) {
    Cnf out = cnf_false();
    for (const auto& x : d) {
        Cnf lit;
        if (is_singleton(*x)) {
            // a singleton lies outside f1 + ... + fn iff it misses every fj
            lit = cnf_true();
            for (const auto& y : f) lit.push_back(Clause{{}, {SpecialFormula{{x, y}, Polarity::Empty}}});
        } else {
            lit = unit(SpecialFormula{{subtract_all(x, f)}, Polarity::NonEmpty});
        }
        out = cnf_or(out, lit);
    }
    return out;
}

Cnf basic(const Formula& f, bool positive) {
    auto a = terms(f.lhs);
    auto b = terms(f.rhs);
    if (f.kind == FormulaKind::In) return positive ? included(a, b) : not_included(a, b);
    if (positive) return cnf_and(included(a, b), included(b, a));
    return cnf_or(not_included(a, b), not_included(b, a));
}

Cnf clausify(const FormulaPtr& f) {
    switch (f->kind) {
        case FormulaKind::In:
        case FormulaKind::Eq:
            return basic(*f, true);
        case FormulaKind::Not:
            if (f->left->kind != FormulaKind::In && f->left->kind != FormulaKind::Eq)
                throw std::logic_error("to_special_form: formula is not in negation normal form");
            return basic(*f->left, false);
        case FormulaKind::And:
            return cnf_and(clausify(f->left), clausify(f->right));
        case FormulaKind::Or:
            return cnf_or(clausify(f->left), clausify(f->right));
        case FormulaKind::Forall: {
            Cnf body = clausify(f->left);
            for (auto& c : body) c.universals.insert(c.universals.begin(), Universal{f->var, f->lhs->type.at(0)});
            return body;
        }
        case FormulaKind::Exists:
            throw std::logic_error("to_special_form: existential quantifier left after Skolemization");
    }
    return {};
}

std::string key(const SpecialFormula& s) {
    return render(s);
}

std::string key(const Clause& c) {
    std::string k;
    for (const auto& u : c.universals) k += u.var + ":" + u.sig + ",";
    k += "|";
    for (const auto& d : c.disjuncts) k += key(d) + ";";
    return k;
}

// (State - State) = none and != none
Clause canonical_true(const std::string& state_sig) {
    ExprPtr s = ex::rel(state_sig, {state_sig});
    return Clause{{}, {SpecialFormula{{ex::minus(s, s)}, Polarity::Empty}}};
}

void tidy(std::vector<Clause>& matrix, const std::string& state_sig) {
    std::set<std::string> seen;
    std::vector<Clause> out;
    for (auto& c : matrix) {
        std::set<std::string> ds;
        std::vector<SpecialFormula> kept;
        for (auto& d : c.disjuncts)
            if (ds.insert(key(d)).second) kept.push_back(std::move(d));
        c.disjuncts = std::move(kept);
        if (c.disjuncts.empty()) {
            ExprPtr s = ex::rel(state_sig, {state_sig});
            c.disjuncts.push_back(SpecialFormula{{ex::minus(s, s)}, Polarity::NonEmpty});
        }
        if (seen.insert(key(c)).second) out.push_back(std::move(c));
    }
    matrix = std::move(out);
}

FormulaPtr tag_formula(const FormulaPtr& f, const std::string& pre, const std::string& post) {
    switch (f->kind) {
        case FormulaKind::In:
            return fx::in(tag_state(f->lhs, pre, post), tag_state(f->rhs, pre, post), f->span);
        case FormulaKind::Eq:
            return fx::eq(tag_state(f->lhs, pre, post), tag_state(f->rhs, pre, post), f->span);
        case FormulaKind::Not:
            return fx::not_(tag_formula(f->left, pre, post), f->span);
        case FormulaKind::And:
            return fx::and_(tag_formula(f->left, pre, post), tag_formula(f->right, pre, post), f->span);
        case FormulaKind::Or:
            return fx::or_(tag_formula(f->left, pre, post), tag_formula(f->right, pre, post), f->span);
        case FormulaKind::Forall:
            return fx::forall(f->var, f->lhs, tag_formula(f->left, pre, post), f->span);
        case FormulaKind::Exists:
            return fx::exists(f->var, f->lhs, tag_formula(f->left, pre, post), f->span);
    }
    return f;
}

}  // namespace

// ---------------------------------------------------------------------------

Predicate prime_facts(const Spec& spec, const Predicate& p, const std::vector<Fact>& facts) {
    Predicate out = p;
    std::vector<FormulaPtr> parts{p.body};
    for (const auto& f : primed_facts(spec, p, facts)) parts.push_back(f);
    out.body = fx::conjunction(parts);
    return out;
}

FormulaPtr to_nnf(const Spec&, const FormulaPtr& f) {
    return nnf(f, true);
}

Skolemized skolemize(const Spec& spec, const Predicate& p) {
    Skolemized out{spec, p, {}};
    Skolemizer sk(out.spec, p, out.decls);
    std::vector<Universal> scope;
    std::vector<FormulaPtr> parts{sk.walk(p.body, scope)};
    for (const auto& c : sk.constraints()) parts.push_back(c);
    out.predicate.body = fx::conjunction(parts);
    for (auto& pr : out.spec.predicates)
        if (pr.name == p.name) pr.body = out.predicate.body;
    return out;
}

ExprPtr tag_state(const ExprPtr& e, const std::string& pre, const std::string& post) {
    if (e->kind == ExprKind::Join && e->lhs->kind == ExprKind::Var && (e->lhs->name == pre || e->lhs->name == post))
        return push_state(e->rhs, e->lhs->name == pre ? RelTag::Pre : RelTag::Post, pre, post);
    switch (e->kind) {
        case ExprKind::Rel:
        case ExprKind::Var:
        case ExprKind::None:
            return e;
        case ExprKind::Converse:
            return ex::converse(tag_state(e->lhs, pre, post), e->span);
        case ExprKind::Closure:
            return ex::closure(tag_state(e->lhs, pre, post), e->span);
        default:
            return ex::binary(e->kind, tag_state(e->lhs, pre, post), tag_state(e->rhs, pre, post), e->span);
    }
}

std::vector<Clause> to_special_form(const FormulaPtr& f, const std::string& state_sig) {
    std::vector<Clause> m = clausify(f);
    tidy(m, state_sig);
    if (m.empty()) m.push_back(canonical_true(state_sig));
    return m;
}

NormalizedPredicate normalize_predicate(const Spec& spec, const Predicate& p, const NormalizeOptions& opts) {
    NormalizedPredicate out;
    out.name = p.name;
    out.params = p.params;
    out.pre_state = p.pre_state(spec.state_sig);
    out.post_state = p.post_state(spec.state_sig);

    std::vector<FormulaPtr> facts;
    if (opts.prime_facts) facts = primed_facts(spec, p, spec.all_facts());
    for (auto& f : facts) f = nnf(f, true);
    FormulaPtr body = nnf(p.body, true);

    Predicate all = p;
    std::vector<FormulaPtr> parts{body};
    parts.insert(parts.end(), facts.begin(), facts.end());
    all.body = fx::conjunction(parts);
    Spec expanded = spec;
    Skolemizer sk(expanded, all, out.skolem_decls);
    std::vector<Universal> scope;
    body = sk.walk(body, scope);
    for (auto& f : facts) f = sk.walk(f, scope);
    facts.insert(facts.end(), sk.constraints().begin(), sk.constraints().end());

    // body clauses first, then facts and Skolem constraints
    std::vector<Clause> rest;
    out.matrix = clausify(tag_formula(body, out.pre_state, out.post_state));
    for (const auto& f : facts) {
        auto m = clausify(tag_formula(f, out.pre_state, out.post_state));
        rest.insert(rest.end(), m.begin(), m.end());
    }
    tidy(out.matrix, spec.state_sig);
    tidy(rest, spec.state_sig);
    out.body_clauses = out.matrix.size();
    out.matrix.insert(out.matrix.end(), rest.begin(), rest.end());
    if (out.matrix.empty()) out.matrix.push_back(canonical_true(spec.state_sig));
    for (const auto& c : out.matrix)
        for (const auto& u : c.universals)
            if (std::find(out.universals.begin(), out.universals.end(), u) == out.universals.end())
                out.universals.push_back(u);
    return out;
}

NormalizedPredicate normalize_predicate(const Spec& spec, const std::string& name, const NormalizeOptions& opts) {
    const Predicate* p = spec.find_pred(name);
    if (!p) throw std::invalid_argument("unknown predicate `" + name + "`");
    return normalize_predicate(spec, *p, opts);
}

// ---------------------------------------------------------------------------

bool holds(const SpecialFormula& s, const Instance& pre, const Instance& post, const Environment& env) {
    TupleSet acc = eval(*s.exprs.front(), pre, post, env);
    for (std::size_t i = 1; i < s.exprs.size() && !acc.empty(); ++i) {
        TupleSet next;
        for (const auto& t : acc)
            if (contains(*s.exprs[i], t, pre, post, env)) next.insert(t);
        acc = std::move(next);
    }
    return (s.polarity == Polarity::Empty) == acc.empty();
}

bool holds_instance(const Clause& c, const Instance& pre, const Instance& post, const Environment& env) {
    return std::any_of(c.disjuncts.begin(), c.disjuncts.end(),
                       [&](const SpecialFormula& s) { return holds(s, pre, post, env); });
}

namespace {

bool holds_from(const Clause& c, std::size_t k, const Instance& pre, const Instance& post, Environment& env) {
    if (k == c.universals.size()) return holds_instance(c, pre, post, env);
    for (AtomId a : pre.atoms_of(c.universals[k].sig)) {
        env[c.universals[k].var] = a;
        if (!holds_from(c, k + 1, pre, post, env)) return false;
    }
    return true;
}

}  // namespace

bool holds(const Clause& c, const Instance& pre, const Instance& post, const Environment& env) {
    Environment e = env;
    return holds_from(c, 0, pre, post, e);
}

bool holds(const std::vector<Clause>& matrix, const Instance& pre, const Instance& post, const Environment& env) {
    return std::all_of(matrix.begin(), matrix.end(), [&](const Clause& c) { return holds(c, pre, post, env); });
}

std::string render(const SpecialFormula& s, const RenderOptions& opts) {
    ExprPtr e = s.exprs.front();
    for (std::size_t i = 1; i < s.exprs.size(); ++i) e = ex::inter(e, s.exprs[i]);
    return render(*e, opts) + (s.polarity == Polarity::Empty ? " = none" : " != none");
}

std::string render(const Clause& c, const RenderOptions& opts) {
    std::string out;
    if (!c.universals.empty()) {
        out += "all ";
        for (std::size_t i = 0; i < c.universals.size(); ++i)
            out += (i ? ", " : "") + c.universals[i].var + ": " + c.universals[i].sig;
        out += " | ";
    }
    for (std::size_t i = 0; i < c.disjuncts.size(); ++i) out += (i ? " or " : "") + render(c.disjuncts[i], opts);
    return out;
}

std::string render(const NormalizedPredicate& p) {
    RenderOptions opts{p.pre_state, p.post_state};
    std::ostringstream out;
    out << "pred " << p.name << "(";
    for (std::size_t i = 0; i < p.params.size(); ++i) out << (i ? ", " : "") << p.params[i].name << ": " << p.params[i].type;
    out << ")\n";
    for (const auto& d : p.skolem_decls) {
        out << "  skolem " << d.name << ":";
        for (std::size_t k = 0; k < d.columns.size(); ++k) out << (k ? " -> " : " ") << d.columns[k];
        out << "\n";
    }
    for (std::size_t i = 0; i < p.matrix.size(); ++i) {
        if (i == p.body_clauses) out << "  -- facts\n";
        out << "  " << render(p.matrix[i], opts) << "\n";
    }
    return out.str();
}

bool is_special_expr(const Expr& e) {
    switch (e.kind) {
        case ExprKind::Rel:
        case ExprKind::Var:
            return true;
        case ExprKind::None:
        case ExprKind::Union:
            return false;
        case ExprKind::Converse:
            if (e.lhs->kind == ExprKind::Rel || e.lhs->kind == ExprKind::Var) return true;
            return e.lhs->kind == ExprKind::Join && !(e.lhs->lhs->arity() == 2 && e.lhs->rhs->arity() == 2) &&
                   is_special_expr(*e.lhs);
        case ExprKind::Closure: {
            const Expr* inner = e.lhs.get();
            if (inner->kind != ExprKind::Union) return is_special_expr(*inner);
            std::vector<const Expr*> stack{inner};
            while (!stack.empty()) {
                const Expr* x = stack.back();
                stack.pop_back();
                if (x->kind == ExprKind::Union) {
                    stack.push_back(x->lhs.get());
                    stack.push_back(x->rhs.get());
                } else if (!is_special_expr(*x)) {
                    return false;
                }
            }
            return true;
        }
        default:
            return is_special_expr(*e.lhs) && is_special_expr(*e.rhs);
    }
}

}  // namespace specdb
