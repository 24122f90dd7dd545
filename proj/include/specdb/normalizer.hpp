#pragma once

// Compiles a predicate together with the facts into clause form
//
//   for each clause i:  all x_i1 ... x_in | σ_i1 or ... or σ_im
//
// where every σ is a special formula (e1 & ... & ek) = none or != none over
// union-free, none-free expressions. State-variable joins are compiled away:
// `s.r` and `s'.r` become Pre / Post tagged occurrences of r.
//
// Two shapes fall outside the strict special form and are kept as they are:
// the converse of a join between a unary and a ternary expression, and the
// closure of a union with more than one term.

#include "specdb/ast.hpp"
#include "specdb/parser.hpp"
#include "specdb/store.hpp"

#include <string>
#include <vector>

namespace specdb {

enum class Polarity { Empty, NonEmpty };

struct SpecialFormula {
    std::vector<ExprPtr> exprs;  // intersected
    Polarity polarity = Polarity::Empty;
};

struct Universal {
    std::string var;
    std::string sig;

    bool operator==(const Universal&) const = default;
};

/// A disjunction of special formulas under its own universal prefix.
struct Clause {
    std::vector<Universal> universals;
    std::vector<SpecialFormula> disjuncts;
};

struct NormalizedPredicate {
    std::string name;
    std::vector<Param> params;
    std::string pre_state;
    std::string post_state;
    std::vector<Universal> universals;  // every clause prefix, in order
    std::vector<Clause> matrix;
    std::vector<RelationDecl> skolem_decls;
    /// Number of leading clauses that come from the predicate body; the rest
    /// come from primed facts and Skolem constraints.
    std::size_t body_clauses = 0;
};

struct NormalizeOptions {
    /// Conjoin primed facts onto the body. Off only for mutation testing.
    bool prime_facts = true;
};

/// Conjoins each fact onto the body with its State variable replaced by the
/// primed State parameter. Bound variables of the facts are renamed apart.
Predicate prime_facts(const Spec& spec, const Predicate& p, const std::vector<Fact>& facts);

/// Negation normal form. Bounded quantifiers `all y: e | f` become
/// `all y: S | y not in e or f` (dually for `some`), with S the signature of e.
/// `implies` has already been desugared by the parser.
FormulaPtr to_nnf(const Spec& spec, const FormulaPtr& f);

struct Skolemized {
    Spec spec;  // input spec extended with the Skolem fields of the State sig
    Predicate predicate;
    std::vector<RelationDecl> decls;
};

/// Replaces every existential `some y: S | g` under universals x1..xk by a
/// fresh State field Sk : State -> X1 -> ... -> Xk -> S. The existential
/// becomes `some Sk[x1]...[xk] and g[y := Sk[x1]...[xk]]` (written with
/// joins on the post state), and a conjunct constrains Sk to at most one
/// value per x1..xk. The result is in negation normal form and
/// existential-free. Preconditions: `p` belongs to `spec`, body in NNF.
Skolemized skolemize(const Spec& spec, const Predicate& p);

/// Replaces `x.e` for State variables x by tagged occurrences.
ExprPtr tag_state(const ExprPtr& e, const std::string& pre, const std::string& post);

/// Clause form of a quantifier-free, negation-normal, tagged formula.
std::vector<Clause> to_special_form(const FormulaPtr& f, const std::string& state_sig);

/// Full pipeline: prime facts, NNF, Skolemize, tag, special form.
NormalizedPredicate normalize_predicate(const Spec& spec, const Predicate& p, const NormalizeOptions& opts = {});
NormalizedPredicate normalize_predicate(const Spec& spec, const std::string& name, const NormalizeOptions& opts = {});

bool holds(const SpecialFormula& s, const Instance& pre, const Instance& post, const Environment& env);
/// One instantiation of the clause's disjunction (universals bound in env).
bool holds_instance(const Clause& c, const Instance& pre, const Instance& post, const Environment& env);
/// Clause with its universals ranging over their universes.
bool holds(const Clause& c, const Instance& pre, const Instance& post, const Environment& env);
bool holds(const std::vector<Clause>& matrix, const Instance& pre, const Instance& post, const Environment& env);

std::string render(const SpecialFormula& s, const RenderOptions& opts = {});
std::string render(const Clause& c, const RenderOptions& opts = {});
std::string render(const NormalizedPredicate& p);

/// True if `e` and all its subexpressions meet the special-form rules
/// (no union, no none, converse only on names and variables), allowing the
/// two exceptions above.
bool is_special_expr(const Expr& e);

}  // namespace specdb
