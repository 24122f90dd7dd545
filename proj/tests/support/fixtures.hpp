#pragma once

// Specs and instances shared by the unit tests and the acceptance suite.

#include "specdb/ast.hpp"
#include "specdb/store.hpp"

#include <string>

namespace specdb::testing {

/// Path of a file under the source tree's specs/ directory.
std::string spec_path(const std::string& name);
std::string read_text(const std::string& path);
/// Parsed and checked specs/<name>.
Spec load(const std::string& name);

/// The gradebook model from the worked example: two Course atoms c0 and c1,
/// Students Harry and Meg, Submission hwk1, Grades A, A-, B+, B.
Instance harry_meg_model(const Spec& gradebook);

/// The same model restricted to the single State atom c1, as the live
/// database would hold it.
Instance harry_meg_model_c1(const Spec& gradebook);

/// First atom of `sig` with `label`; throws when absent.
AtomId atom(const Instance& inst, const std::string& sig, const std::string& label);

}  // namespace specdb::testing
