#pragma once

// Abstract syntax of the kernel specification language: relational
// expressions, first-order formulas over them, and the signature /
// predicate / fact declarations that make up a specification.

#include "specdb/diagnostics.hpp"

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace specdb {

/// Column-type sequence of a relational expression: one signature name per
/// column. Empty means "not yet typed".
using ColumnTypes = std::vector<std::string>;

/// Which instance a relation occurrence reads from.
///
/// Source ASTs only contain `Plain` occurrences. The normalizer compiles
/// `s.r` / `s'.r` (a State variable joined with a State field) into `Pre` /
/// `Post` occurrences of `r` that denote the field with its State column
/// stripped.
enum class RelTag { Plain, Pre, Post };

enum class ExprKind { Rel, Var, None, Union, Intersect, Diff, Join, Product, Converse, Closure };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    ExprKind kind = ExprKind::None;
    std::string name;  // Rel, Var
    RelTag tag = RelTag::Plain;
    ExprPtr lhs;  // binary operands; unary operand
    ExprPtr rhs;
    ColumnTypes type;
    SourceSpan span;

    std::size_t arity() const { return type.size(); }
    bool is_binary_op() const;
};

enum class FormulaKind { In, Eq, Not, And, Or, Forall, Exists };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    FormulaKind kind = FormulaKind::In;
    ExprPtr lhs;  // In, Eq; the bounding expression of a quantifier
    ExprPtr rhs;
    FormulaPtr left;  // Not, And, Or; quantifier body
    FormulaPtr right;
    std::string var;  // quantified variable
    SourceSpan span;
};

namespace ex {
// Constructors compute the column type from typed operands; untyped operands
// give an untyped result.
ExprPtr rel(std::string name, ColumnTypes type = {}, RelTag tag = RelTag::Plain, SourceSpan span = {});
ExprPtr var(std::string name, ColumnTypes type = {}, SourceSpan span = {});
ExprPtr none(ColumnTypes type = {}, SourceSpan span = {});
ExprPtr plus(ExprPtr a, ExprPtr b, SourceSpan span = {});
ExprPtr inter(ExprPtr a, ExprPtr b, SourceSpan span = {});
ExprPtr minus(ExprPtr a, ExprPtr b, SourceSpan span = {});
ExprPtr join(ExprPtr a, ExprPtr b, SourceSpan span = {});
ExprPtr product(ExprPtr a, ExprPtr b, SourceSpan span = {});
ExprPtr converse(ExprPtr a, SourceSpan span = {});
ExprPtr closure(ExprPtr a, SourceSpan span = {});
ExprPtr binary(ExprKind kind, ExprPtr a, ExprPtr b, SourceSpan span = {});
}  // namespace ex

namespace fx {
FormulaPtr in(ExprPtr a, ExprPtr b, SourceSpan span = {});
FormulaPtr eq(ExprPtr a, ExprPtr b, SourceSpan span = {});
FormulaPtr not_(FormulaPtr f, SourceSpan span = {});
FormulaPtr and_(FormulaPtr a, FormulaPtr b, SourceSpan span = {});
FormulaPtr or_(FormulaPtr a, FormulaPtr b, SourceSpan span = {});
FormulaPtr implies(FormulaPtr a, FormulaPtr b, SourceSpan span = {});
FormulaPtr forall(std::string var, ExprPtr bound, FormulaPtr body, SourceSpan span = {});
FormulaPtr exists(std::string var, ExprPtr bound, FormulaPtr body, SourceSpan span = {});
/// Left-nested conjunction; `parts` must be nonempty.
FormulaPtr conjunction(const std::vector<FormulaPtr>& parts);
}  // namespace fx

enum class Multiplicity { Set, Lone };

/// One arrow-separated component of a field declaration: either a signature
/// name or, for dependent declarations such as `work : roster -> Submission`,
/// the name of a sibling field.
struct FieldItem {
    std::string name;
    Multiplicity mult = Multiplicity::Set;
    bool explicit_mult = false;
};

struct FieldDecl {
    std::string name;
    std::vector<FieldItem> items;
    ColumnTypes columns;  // filled by check_spec; columns[0] is the owner
    SourceSpan span;
};

struct Signature {
    std::string name;
    std::vector<FieldDecl> fields;
    bool state_marked = false;  // declared with `state sig`
    SourceSpan span;
};

struct Param {
    std::string name;
    std::string type;
};

struct Predicate {
    std::string name;
    std::vector<Param> params;
    FormulaPtr body;
    SourceSpan span;

    /// The unprimed and primed State parameters; empty when absent.
    std::string pre_state(const std::string& state_sig) const;
    std::string post_state(const std::string& state_sig) const;
};

struct Fact {
    std::string name;
    FormulaPtr body;
    SourceSpan span;
};

struct Spec {
    std::vector<Signature> signatures;
    std::vector<Predicate> predicates;
    std::vector<Fact> facts;
    /// Facts generated by check_spec from multiplicities and dependent field
    /// types. Never rendered.
    std::vector<Fact> derived_facts;
    std::string state_sig;
    bool checked = false;
    std::shared_ptr<const SourceText> source;

    const Signature* find_sig(const std::string& name) const;
    const FieldDecl* find_field(const std::string& name) const;
    /// Owning signature of a field.
    const Signature* field_owner(const std::string& name) const;
    const Predicate* find_pred(const std::string& name) const;
    /// Declared facts followed by derived facts.
    std::vector<Fact> all_facts() const;
};

bool is_primed(const std::string& name);

std::set<std::string> free_vars(const Formula& f);
std::set<std::string> free_vars(const Expr& e);

/// Structural equality ignoring spans and (when `compare_types` is false)
/// column-type annotations.
bool same_expr(const Expr& a, const Expr& b, bool compare_types = false);
bool same_formula(const Formula& a, const Formula& b, bool compare_types = false);
bool same_spec(const Spec& a, const Spec& b);

/// Replace free occurrences of variable `from` by `to`.
ExprPtr substitute(const ExprPtr& e, const std::string& from, const ExprPtr& to);
FormulaPtr substitute(const FormulaPtr& f, const std::string& from, const ExprPtr& to);

/// Number of nodes, for size measurements.
std::size_t node_count(const Formula& f);
std::size_t node_count(const Expr& e);

}  // namespace specdb
