#pragma once

// Runs a normalized predicate as a transaction: a depth-first backtracking
// search over the choices of the insert/delete procedures, repeated in
// rounds until a full pass over the clauses records no new update.

#include "specdb/normalizer.hpp"
#include "specdb/store.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace specdb {

struct Budget {
    std::size_t max_choice_points = 1'000'000;
    /// 0 means 2 * (mutable tuple space) + 2.
    std::size_t max_rounds = 0;
};

/// Order in which alternatives are tried at a choice point.
struct Strategy {
    bool random = false;
    std::uint64_t seed = 0;

    /// "default" or "random:<seed>". Throws std::invalid_argument.
    static Strategy parse(const std::string& text);
    std::string str() const;
};

struct ExecOptions {
    Budget budget;
    Strategy strategy;
    std::ostream* trace = nullptr;
};

enum class Outcome { Success, Exhausted, BudgetExceeded };

const char* outcome_name(Outcome o);

struct ExecStats {
    std::size_t rounds = 0;
    std::size_t choice_points = 0;
    std::size_t backtracks = 0;
    std::size_t max_updates = 0;  // longest update log seen on any branch
    std::size_t max_rounds_seen = 0;
    std::size_t tuple_space = 0;  // possible tuples over all mutable relations
};

struct ExecResult {
    Outcome outcome = Outcome::Exhausted;
    /// The post-state on success with Skolem relations removed; otherwise
    /// a copy of the pre-state.
    Instance post;
    UpdateLog updates;  // Skolem relations included
    ExecStats stats;
    std::string message;

    bool ok() const { return outcome == Outcome::Success; }
};

/// `env` binds every non-State parameter. `pre` must have exactly one
/// State atom; it is never modified.
ExecResult run_predicate(const NormalizedPredicate& p, const Environment& env, const Instance& pre,
                         const ExecOptions& opts = {});

/// Number of tuples the relations written by `p` (its post-state
/// occurrences) could hold over the universes of `inst`.
std::size_t mutable_tuple_space(const NormalizedPredicate& p, const Instance& inst);

}  // namespace specdb
