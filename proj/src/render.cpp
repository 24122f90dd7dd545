#include "specdb/parser.hpp"

#include <sstream>

namespace specdb {

namespace {

int expr_prec(const Expr& e) {
    switch (e.kind) {
        case ExprKind::Union:
            return 1;
        case ExprKind::Diff:
            return 2;
        case ExprKind::Intersect:
            return 3;
        case ExprKind::Product:
            return 4;
        case ExprKind::Join:
            return 5;
        case ExprKind::Converse:
        case ExprKind::Closure:
            return 6;
        default:
            return 7;
    }
}

const char* op_text(ExprKind k) {
    switch (k) {
        case ExprKind::Union:
            return " + ";
        case ExprKind::Diff:
            return " - ";
        case ExprKind::Intersect:
            return " & ";
        case ExprKind::Product:
            return " -> ";
        case ExprKind::Join:
            return ".";
        default:
            return "?";
    }
}

void render_expr(std::ostream& out, const Expr& e, const RenderOptions& opts);

void render_child(std::ostream& out, const Expr& child, bool parens, const RenderOptions& opts) {
    if (parens) out << "(";
    render_expr(out, child, opts);
    if (parens) out << ")";
}

void render_expr(std::ostream& out, const Expr& e, const RenderOptions& opts) {
    switch (e.kind) {
        case ExprKind::Rel:
            if (e.tag == RelTag::Pre) out << opts.pre_state << ".";
            if (e.tag == RelTag::Post) out << opts.post_state << ".";
            out << e.name;
            return;
        case ExprKind::Var:
            out << e.name;
            return;
        case ExprKind::None:
            out << "none";
            return;
        case ExprKind::Converse:
        case ExprKind::Closure:
            out << (e.kind == ExprKind::Converse ? "~" : "^");
            render_child(out, *e.lhs, expr_prec(*e.lhs) < 6 || (e.lhs->kind == ExprKind::Rel && e.lhs->tag != RelTag::Plain), opts);
            return;
        default: {
            int p = expr_prec(e);
            bool tagged_rhs = e.kind == ExprKind::Join && e.rhs->kind == ExprKind::Rel && e.rhs->tag != RelTag::Plain;
            render_child(out, *e.lhs, expr_prec(*e.lhs) < p, opts);
            out << op_text(e.kind);
            render_child(out, *e.rhs, expr_prec(*e.rhs) <= p || tagged_rhs, opts);
            return;
        }
    }
}

int formula_prec(const Formula& f) {
    switch (f.kind) {
        case FormulaKind::Or:
            return 1;
        case FormulaKind::And:
            return 3;
        case FormulaKind::Not:
            return 4;
        case FormulaKind::In:
        case FormulaKind::Eq:
            return 5;
        case FormulaKind::Forall:
        case FormulaKind::Exists:
            return 0;
    }
    return 0;
}

void render_formula(std::ostream& out, const Formula& f, const RenderOptions& opts);

void render_fchild(std::ostream& out, const Formula& child, bool parens, const RenderOptions& opts) {
    if (parens) out << "(";
    render_formula(out, child, opts);
    if (parens) out << ")";
}

void render_formula(std::ostream& out, const Formula& f, const RenderOptions& opts) {
    switch (f.kind) {
        case FormulaKind::In:
        case FormulaKind::Eq:
            render_expr(out, *f.lhs, opts);
            out << (f.kind == FormulaKind::In ? " in " : " = ");
            render_expr(out, *f.rhs, opts);
            return;
        case FormulaKind::Not: {
            const Formula& g = *f.left;
            if (g.kind == FormulaKind::In || g.kind == FormulaKind::Eq) {
                render_expr(out, *g.lhs, opts);
                out << (g.kind == FormulaKind::In ? " not in " : " != ");
                render_expr(out, *g.rhs, opts);
                return;
            }
            out << "not ";
            render_fchild(out, g, formula_prec(g) < 4, opts);
            return;
        }
        case FormulaKind::And:
        case FormulaKind::Or: {
            int p = formula_prec(f);
            render_fchild(out, *f.left, formula_prec(*f.left) < p, opts);
            out << (f.kind == FormulaKind::And ? " and " : " or ");
            render_fchild(out, *f.right, formula_prec(*f.right) <= p, opts);
            return;
        }
        case FormulaKind::Forall:
        case FormulaKind::Exists:
            out << (f.kind == FormulaKind::Forall ? "all " : "some ") << f.var << ": ";
            render_expr(out, *f.lhs, opts);
            out << " | ";
            render_formula(out, *f.left, opts);
            return;
    }
}

// Conjuncts along the left spine of an `and` chain, each printed on its own
// line inside a block.
void render_block(std::ostream& out, const Formula& body, const std::string& indent) {
    std::vector<const Formula*> parts;
    const Formula* cur = &body;
    while (cur->kind == FormulaKind::And) {
        parts.push_back(cur->right.get());
        cur = cur->left.get();
    }
    parts.push_back(cur);
    out << "{\n";
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
        out << indent;
        render_formula(out, **it, {});
        out << "\n";
    }
    out << "}\n";
}

}  // namespace

std::string render(const Expr& e, const RenderOptions& opts) {
    std::ostringstream out;
    render_expr(out, e, opts);
    return out.str();
}

std::string render(const Formula& f, const RenderOptions& opts) {
    std::ostringstream out;
    render_formula(out, f, opts);
    return out.str();
}

std::string render(const Spec& s) {
    std::ostringstream out;
    for (const auto& sig : s.signatures) {
        if (sig.state_marked) out << "state ";
        out << "sig " << sig.name << " {";
        for (std::size_t i = 0; i < sig.fields.size(); ++i) {
            const auto& f = sig.fields[i];
            out << (i == 0 ? "\n  " : ",\n  ") << f.name << ": ";
            for (std::size_t k = 0; k < f.items.size(); ++k) {
                if (k > 0) out << " -> ";
                const auto& item = f.items[k];
                if (item.explicit_mult) out << (item.mult == Multiplicity::Lone ? "lone " : "set ");
                out << item.name;
            }
        }
        out << (sig.fields.empty() ? "}\n" : "\n}\n");
    }
    for (const auto& p : s.predicates) {
        out << "\npred " << p.name << "(";
        for (std::size_t i = 0; i < p.params.size(); ++i) {
            out << p.params[i].name;
            bool last_of_group = i + 1 == p.params.size() || p.params[i + 1].type != p.params[i].type;
            if (last_of_group) out << ": " << p.params[i].type;
            if (i + 1 < p.params.size()) out << ", ";
        }
        out << ") ";
        render_block(out, *p.body, "  ");
    }
    for (const auto& f : s.facts) {
        out << "\nfact ";
        if (!f.name.empty()) out << f.name << " ";
        render_block(out, *f.body, "  ");
    }
    return out.str();
}

std::string render_command(const Command& c) {
    std::ostringstream out;
    std::visit(
        [&](const auto& cmd) {
            using T = std::decay_t<decltype(cmd)>;
            if constexpr (std::is_same_v<T, CreateAtom>) {
                if (!cmd.binding.empty()) out << cmd.binding << " = ";
                out << "Create" << cmd.sig << "(\"" << cmd.label << "\")";
            } else if constexpr (std::is_same_v<T, InvokePredicate>) {
                out << cmd.name << "(";
                for (std::size_t i = 0; i < cmd.args.size(); ++i) out << (i ? ", " : "") << cmd.args[i];
                out << ")";
            } else if constexpr (std::is_same_v<T, ShowRelation>) {
                out << "show " << cmd.name;
            } else if constexpr (std::is_same_v<T, SnapshotCommand>) {
                out << "snapshot " << cmd.path;
            } else {
                out << "quit";
            }
        },
        c);
    return out.str();
}

}  // namespace specdb
