#pragma once

// Well-formedness and typing of specifications.
//
// Beyond ordinary relational typing, check_spec enforces the restrictions
// the executor relies on:
//  - the State signature appears only as the owner column of its own fields;
//  - every predicate has exactly two State parameters, `x` and `x'`;
//  - State variables and State fields occur only in the form `x.e`, where `e`
//    is built from State fields with + & - and joins on the right;
//  - a fact has at most one State variable, bound by a leading `all v: State`.
//
// Multiplicity keywords and dependent field types are turned into derived
// facts (Spec::derived_facts).

#include "specdb/ast.hpp"

#include <map>
#include <string>

namespace specdb {

using VarTypes = std::map<std::string, std::string>;

/// Returns the annotated specification or throws TypeError listing every
/// violation found.
Spec check_spec(const Spec& raw);

/// Column types of `e` under `vars`. Throws TypeError.
ColumnTypes type_of(const Expr& e, const Spec& spec, const VarTypes& vars);

/// Annotate a standalone formula against a checked spec. Throws TypeError.
FormulaPtr check_formula(const Spec& spec, const FormulaPtr& f, const VarTypes& vars);
ExprPtr check_expr(const Spec& spec, const ExprPtr& e, const VarTypes& vars);

}  // namespace specdb
