#pragma once

// Reference semantics for checking the executor. Formulas are evaluated
// directly on the checked source AST, and post-states are found by
// enumerating every assignment of the mutable relations. Nothing here uses
// the normalizer or the executor.
//
// In `v.e` with v a State variable, relation occurrences in e are read from
// the post-state when v is primed or bound by a fact, and from the
// pre-state otherwise.

#include "specdb/ast.hpp"
#include "specdb/store.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace specdb {

struct OracleConfig {
    std::size_t max_atoms_per_sig = 3;
    /// Candidate post-states; enumeration beyond this is an error.
    std::size_t max_candidates = std::size_t{1} << 20;
};

class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

TupleSet oracle_eval(const Spec& spec, const Expr& e, const Instance& pre, const Instance& post, const Environment& env);

/// Truth of `f` with env binding its free variables.
bool satisfies(const Spec& spec, const Formula& f, const Instance& pre, const Instance& post, const Environment& env);

/// Every declared and derived fact holds in `inst`.
bool facts_hold(const Spec& spec, const Instance& inst);
/// Name of the first violated fact, if any.
std::optional<std::string> violated_fact(const Spec& spec, const Instance& inst);

/// Body under env (State parameters bound to the State atoms of pre and
/// post) and all facts on post.
bool satisfies_predicate(const Spec& spec, const Predicate& p, const Instance& pre, const Instance& post,
                         const Environment& env);

/// All post-states over the universes of `pre` satisfying the predicate, in
/// a fixed order. Only State fields mentioned by the body or the facts vary;
/// other relations are copied from `pre`. Throws OracleError when the
/// candidate count exceeds the cap.
std::vector<Instance> enumerate_poststates(const Spec& spec, const Predicate& p, const Instance& pre,
                                           const Environment& env, const OracleConfig& cfg = {});
std::optional<Instance> find_poststate(const Spec& spec, const Predicate& p, const Instance& pre,
                                       const Environment& env, const OracleConfig& cfg = {});

enum class Verdict { Ok, SoundViolation, CompleteViolation };

const char* verdict_name(Verdict v);

/// `post` is the executor's result, or nullopt if it failed.
Verdict oracle_check(const Spec& spec, const Predicate& p, const Instance& pre, const Environment& env,
                     const std::optional<Instance>& post, const OracleConfig& cfg = {});

}  // namespace specdb
