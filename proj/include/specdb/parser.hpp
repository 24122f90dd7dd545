#pragma once

// Concrete syntax.
//
// Operators, tightest first:
//   ~ ^            converse, transitive closure (prefix)
//   . e[x]         join; box join e[x] is x.e
//   ->             product
//   &              intersection
//   -              difference
//   +              union
//   in = not in != comparison
//   not
//   and
//   implies        (right associative, sugar for `not a or b`)
//   or
//   all some       quantifiers; the body after `|` extends as far right as possible
//
// Binary operators associate to the left. Parentheses are always accepted.

#include "specdb/ast.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace specdb {

/// Parse a specification. Throws ParseError. Name and arity errors are left
/// to check_spec.
Spec parse_spec(std::string_view text, std::string file_name = "<input>");

/// Parse a standalone formula in which `vars` are in scope as variables.
FormulaPtr parse_formula(std::string_view text, const std::vector<std::string>& vars = {});
ExprPtr parse_expr(std::string_view text, const std::vector<std::string>& vars = {});

// ---------------------------------------------------------------------------
// Session commands

struct CreateAtom {
    std::string binding;  // may be empty
    std::string sig;
    std::string label;
};

struct InvokePredicate {
    std::string name;
    std::vector<std::string> args;
};

struct ShowRelation {
    std::string name;
};

struct SnapshotCommand {
    std::string path;
};

struct Quit {};

using Command = std::variant<CreateAtom, InvokePredicate, ShowRelation, SnapshotCommand, Quit>;

/// Parse one script/REPL line. Returns nullopt for blank and comment lines.
/// Throws ParseError.
std::optional<Command> parse_command(std::string_view line);

// ---------------------------------------------------------------------------
// Rendering

struct RenderOptions {
    /// Names used to print Pre / Post tagged occurrences as `pre.r` / `post.r`.
    std::string pre_state = "s";
    std::string post_state = "s'";
};

std::string render(const Expr& e, const RenderOptions& opts = {});
std::string render(const Formula& f, const RenderOptions& opts = {});
std::string render(const Spec& s);
std::string render_command(const Command& c);

}  // namespace specdb
