#include "specdb/ast.hpp"

#include <algorithm>
#include <sstream>

namespace specdb {

// ---------------------------------------------------------------------------
// Diagnostics

std::pair<std::size_t, std::size_t> SourceText::line_col(std::size_t offset) const {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

std::string format_diagnostic(const Diagnostic& d, const SourceText* source) {
    std::ostringstream out;
    const std::string& file = d.span.file.empty() ? std::string("<input>") : d.span.file;
    if (source != nullptr) {
        auto [line, col] = source->line_col(d.span.start);
        out << file << ":" << line << ":" << col << ": ";
    } else {
        out << file << ":@" << d.span.start << ": ";
    }
    out << d.message;
    return out.str();
}

namespace {

std::string join_diagnostics(const std::vector<Diagnostic>& diags, const SourceText* source) {
    std::string out;
    for (const auto& d : diags) {
        if (!out.empty()) out += "\n";
        out += format_diagnostic(d, source);
    }
    return out;
}

}  // namespace

SpecError::SpecError(std::vector<Diagnostic> diags, std::shared_ptr<const SourceText> source)
    : std::runtime_error(join_diagnostics(diags, source.get())),
      diags_(std::move(diags)),
      source_(std::move(source)) {}

// ---------------------------------------------------------------------------
// Constructors

bool Expr::is_binary_op() const {
    switch (kind) {
        case ExprKind::Union:
        case ExprKind::Intersect:
        case ExprKind::Diff:
        case ExprKind::Join:
        case ExprKind::Product:
            return true;
        default:
            return false;
    }
}

namespace ex {

namespace {

ExprPtr make(ExprKind kind, ExprPtr a, ExprPtr b, ColumnTypes type, SourceSpan span) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    e->type = std::move(type);
    e->span = std::move(span);
    return e;
}

}  // namespace

ExprPtr rel(std::string name, ColumnTypes type, RelTag tag, SourceSpan span) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Rel;
    e->name = std::move(name);
    e->tag = tag;
    e->type = std::move(type);
    e->span = std::move(span);
    return e;
}

ExprPtr var(std::string name, ColumnTypes type, SourceSpan span) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Var;
    e->name = std::move(name);
    e->type = std::move(type);
    e->span = std::move(span);
    return e;
}

ExprPtr none(ColumnTypes type, SourceSpan span) {
    return make(ExprKind::None, nullptr, nullptr, std::move(type), std::move(span));
}

ExprPtr plus(ExprPtr a, ExprPtr b, SourceSpan span) {
    return binary(ExprKind::Union, std::move(a), std::move(b), std::move(span));
}

ExprPtr inter(ExprPtr a, ExprPtr b, SourceSpan span) {
    return binary(ExprKind::Intersect, std::move(a), std::move(b), std::move(span));
}

ExprPtr minus(ExprPtr a, ExprPtr b, SourceSpan span) {
    return binary(ExprKind::Diff, std::move(a), std::move(b), std::move(span));
}

ExprPtr join(ExprPtr a, ExprPtr b, SourceSpan span) {
    return binary(ExprKind::Join, std::move(a), std::move(b), std::move(span));
}

ExprPtr product(ExprPtr a, ExprPtr b, SourceSpan span) {
    return binary(ExprKind::Product, std::move(a), std::move(b), std::move(span));
}

ExprPtr converse(ExprPtr a, SourceSpan span) {
    ColumnTypes t;
    if (a->type.size() == 2) t = {a->type[1], a->type[0]};
    return make(ExprKind::Converse, std::move(a), nullptr, std::move(t), std::move(span));
}

ExprPtr closure(ExprPtr a, SourceSpan span) {
    ColumnTypes t = a->type;
    return make(ExprKind::Closure, std::move(a), nullptr, std::move(t), std::move(span));
}

ExprPtr binary(ExprKind kind, ExprPtr a, ExprPtr b, SourceSpan span) {
    ColumnTypes t;
    switch (kind) {
        case ExprKind::Union:
        case ExprKind::Intersect:
        case ExprKind::Diff:
            t = !a->type.empty() ? a->type : b->type;
            break;
        case ExprKind::Join:
            if (!a->type.empty() && !b->type.empty() && a->type.size() + b->type.size() > 2) {
                t.assign(a->type.begin(), a->type.end() - 1);
                t.insert(t.end(), b->type.begin() + 1, b->type.end());
            }
            break;
        case ExprKind::Product:
            if (!a->type.empty() && !b->type.empty()) {
                t = a->type;
                t.insert(t.end(), b->type.begin(), b->type.end());
            }
            break;
        default:
            break;
    }
    return make(kind, std::move(a), std::move(b), std::move(t), std::move(span));
}

}  // namespace ex

namespace fx {

namespace {

std::shared_ptr<Formula> make(FormulaKind kind, SourceSpan span) {
    auto f = std::make_shared<Formula>();
    f->kind = kind;
    f->span = std::move(span);
    return f;
}

}  // namespace

FormulaPtr in(ExprPtr a, ExprPtr b, SourceSpan span) {
    auto f = make(FormulaKind::In, std::move(span));
    f->lhs = std::move(a);
    f->rhs = std::move(b);
    return f;
}

FormulaPtr eq(ExprPtr a, ExprPtr b, SourceSpan span) {
    auto f = make(FormulaKind::Eq, std::move(span));
    f->lhs = std::move(a);
    f->rhs = std::move(b);
    return f;
}

FormulaPtr not_(FormulaPtr g, SourceSpan span) {
    auto f = make(FormulaKind::Not, std::move(span));
    f->left = std::move(g);
    return f;
}

FormulaPtr and_(FormulaPtr a, FormulaPtr b, SourceSpan span) {
    auto f = make(FormulaKind::And, std::move(span));
    f->left = std::move(a);
    f->right = std::move(b);
    return f;
}

FormulaPtr or_(FormulaPtr a, FormulaPtr b, SourceSpan span) {
    auto f = make(FormulaKind::Or, std::move(span));
    f->left = std::move(a);
    f->right = std::move(b);
    return f;
}

FormulaPtr implies(FormulaPtr a, FormulaPtr b, SourceSpan span) {
    return or_(not_(std::move(a), span), std::move(b), span);
}

FormulaPtr forall(std::string var, ExprPtr bound, FormulaPtr body, SourceSpan span) {
    auto f = make(FormulaKind::Forall, std::move(span));
    f->var = std::move(var);
    f->lhs = std::move(bound);
    f->left = std::move(body);
    return f;
}

FormulaPtr exists(std::string var, ExprPtr bound, FormulaPtr body, SourceSpan span) {
    auto f = make(FormulaKind::Exists, std::move(span));
    f->var = std::move(var);
    f->lhs = std::move(bound);
    f->left = std::move(body);
    return f;
}

FormulaPtr conjunction(const std::vector<FormulaPtr>& parts) {
    FormulaPtr acc = parts.at(0);
    for (std::size_t i = 1; i < parts.size(); ++i) acc = and_(acc, parts[i]);
    return acc;
}

}  // namespace fx

// ---------------------------------------------------------------------------
// Declarations

bool is_primed(const std::string& name) { return !name.empty() && name.back() == '\''; }

std::string Predicate::pre_state(const std::string& state_sig) const {
    for (const auto& p : params)
        if (p.type == state_sig && !is_primed(p.name)) return p.name;
    return {};
}

std::string Predicate::post_state(const std::string& state_sig) const {
    for (const auto& p : params)
        if (p.type == state_sig && is_primed(p.name)) return p.name;
    return {};
}

const Signature* Spec::find_sig(const std::string& name) const {
    for (const auto& s : signatures)
        if (s.name == name) return &s;
    return nullptr;
}

const FieldDecl* Spec::find_field(const std::string& name) const {
    for (const auto& s : signatures)
        for (const auto& f : s.fields)
            if (f.name == name) return &f;
    return nullptr;
}

const Signature* Spec::field_owner(const std::string& name) const {
    for (const auto& s : signatures)
        for (const auto& f : s.fields)
            if (f.name == name) return &s;
    return nullptr;
}

const Predicate* Spec::find_pred(const std::string& name) const {
    for (const auto& p : predicates)
        if (p.name == name) return &p;
    return nullptr;
}

std::vector<Fact> Spec::all_facts() const {
    std::vector<Fact> out = facts;
    out.insert(out.end(), derived_facts.begin(), derived_facts.end());
    return out;
}

// ---------------------------------------------------------------------------
// Free variables

namespace {

void collect(const Expr& e, std::set<std::string>& out) {
    if (e.kind == ExprKind::Var) out.insert(e.name);
    if (e.lhs) collect(*e.lhs, out);
    if (e.rhs) collect(*e.rhs, out);
}

void collect(const Formula& f, std::set<std::string>& out) {
    switch (f.kind) {
        case FormulaKind::In:
        case FormulaKind::Eq:
            collect(*f.lhs, out);
            collect(*f.rhs, out);
            break;
        case FormulaKind::Not:
            collect(*f.left, out);
            break;
        case FormulaKind::And:
        case FormulaKind::Or:
            collect(*f.left, out);
            collect(*f.right, out);
            break;
        case FormulaKind::Forall:
        case FormulaKind::Exists: {
            collect(*f.lhs, out);
            std::set<std::string> inner;
            collect(*f.left, inner);
            inner.erase(f.var);
            out.insert(inner.begin(), inner.end());
            break;
        }
    }
}

}  // namespace

std::set<std::string> free_vars(const Formula& f) {
    std::set<std::string> out;
    collect(f, out);
    return out;
}

std::set<std::string> free_vars(const Expr& e) {
    std::set<std::string> out;
    collect(e, out);
    return out;
}

// ---------------------------------------------------------------------------
// Structural equality

bool same_expr(const Expr& a, const Expr& b, bool compare_types) {
    if (a.kind != b.kind || a.name != b.name || a.tag != b.tag) return false;
    if (compare_types && a.type != b.type) return false;
    if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs)) return false;
    if (static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs)) return false;
    if (a.lhs && !same_expr(*a.lhs, *b.lhs, compare_types)) return false;
    if (a.rhs && !same_expr(*a.rhs, *b.rhs, compare_types)) return false;
    return true;
}

bool same_formula(const Formula& a, const Formula& b, bool compare_types) {
    if (a.kind != b.kind || a.var != b.var) return false;
    auto same_e = [&](const ExprPtr& x, const ExprPtr& y) {
        if (static_cast<bool>(x) != static_cast<bool>(y)) return false;
        return !x || same_expr(*x, *y, compare_types);
    };
    auto same_f = [&](const FormulaPtr& x, const FormulaPtr& y) {
        if (static_cast<bool>(x) != static_cast<bool>(y)) return false;
        return !x || same_formula(*x, *y, compare_types);
    };
    return same_e(a.lhs, b.lhs) && same_e(a.rhs, b.rhs) && same_f(a.left, b.left) &&
           same_f(a.right, b.right);
}

bool same_spec(const Spec& a, const Spec& b) {
    if (a.signatures.size() != b.signatures.size() || a.predicates.size() != b.predicates.size() ||
        a.facts.size() != b.facts.size())
        return false;
    for (std::size_t i = 0; i < a.signatures.size(); ++i) {
        const auto& x = a.signatures[i];
        const auto& y = b.signatures[i];
        if (x.name != y.name || x.state_marked != y.state_marked || x.fields.size() != y.fields.size())
            return false;
        for (std::size_t j = 0; j < x.fields.size(); ++j) {
            const auto& fx_ = x.fields[j];
            const auto& fy = y.fields[j];
            if (fx_.name != fy.name || fx_.items.size() != fy.items.size()) return false;
            for (std::size_t k = 0; k < fx_.items.size(); ++k) {
                if (fx_.items[k].name != fy.items[k].name || fx_.items[k].mult != fy.items[k].mult ||
                    fx_.items[k].explicit_mult != fy.items[k].explicit_mult)
                    return false;
            }
        }
    }
    for (std::size_t i = 0; i < a.predicates.size(); ++i) {
        const auto& x = a.predicates[i];
        const auto& y = b.predicates[i];
        if (x.name != y.name || x.params.size() != y.params.size()) return false;
        for (std::size_t j = 0; j < x.params.size(); ++j)
            if (x.params[j].name != y.params[j].name || x.params[j].type != y.params[j].type)
                return false;
        if (!same_formula(*x.body, *y.body)) return false;
    }
    for (std::size_t i = 0; i < a.facts.size(); ++i) {
        if (a.facts[i].name != b.facts[i].name) return false;
        if (!same_formula(*a.facts[i].body, *b.facts[i].body)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Substitution

ExprPtr substitute(const ExprPtr& e, const std::string& from, const ExprPtr& to) {
    if (e->kind == ExprKind::Var) return e->name == from ? to : e;
    if (!e->lhs) return e;
    ExprPtr l = substitute(e->lhs, from, to);
    ExprPtr r = e->rhs ? substitute(e->rhs, from, to) : nullptr;
    if (l == e->lhs && r == e->rhs) return e;
    auto copy = std::make_shared<Expr>(*e);
    copy->lhs = std::move(l);
    copy->rhs = std::move(r);
    return copy;
}

FormulaPtr substitute(const FormulaPtr& f, const std::string& from, const ExprPtr& to) {
    auto copy = std::make_shared<Formula>(*f);
    switch (f->kind) {
        case FormulaKind::In:
        case FormulaKind::Eq:
            copy->lhs = substitute(f->lhs, from, to);
            copy->rhs = substitute(f->rhs, from, to);
            break;
        case FormulaKind::Not:
            copy->left = substitute(f->left, from, to);
            break;
        case FormulaKind::And:
        case FormulaKind::Or:
            copy->left = substitute(f->left, from, to);
            copy->right = substitute(f->right, from, to);
            break;
        case FormulaKind::Forall:
        case FormulaKind::Exists:
            copy->lhs = substitute(f->lhs, from, to);
            if (f->var != from) copy->left = substitute(f->left, from, to);
            break;
    }
    return copy;
}

std::size_t node_count(const Expr& e) {
    std::size_t n = 1;
    if (e.lhs) n += node_count(*e.lhs);
    if (e.rhs) n += node_count(*e.rhs);
    return n;
}

std::size_t node_count(const Formula& f) {
    std::size_t n = 1;
    if (f.lhs) n += node_count(*f.lhs);
    if (f.rhs) n += node_count(*f.rhs);
    if (f.left) n += node_count(*f.left);
    if (f.right) n += node_count(*f.right);
    return n;
}

}  // namespace specdb
