#pragma once

// Relational instances, the update log, evaluation of expressions against a
// (pre, post) pair, and snapshot files.

#include "specdb/ast.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace specdb {

using AtomId = std::uint32_t;
using Tuple = std::vector<AtomId>;
using TupleSet = std::set<Tuple>;
using Environment = std::map<std::string, AtomId>;

struct Atom {
    AtomId id = 0;
    std::string sig;
    std::string label;

    bool operator==(const Atom&) const = default;
};

struct RelationDecl {
    std::string name;
    ColumnTypes columns;
    bool is_mutable = false;

    bool operator==(const RelationDecl&) const = default;
};

/// Relation catalog of a checked spec, optionally extended with Skolem
/// relations.
struct Schema {
    std::vector<std::string> sigs;
    std::string state_sig;
    std::vector<RelationDecl> relations;  // declaration order

    static Schema from_spec(const Spec& spec, const std::vector<RelationDecl>& extra = {});
    const RelationDecl* find(const std::string& name) const;
    bool is_sig(const std::string& name) const;
};

class StoreError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Atom universes and relation contents. Field relations keep their owner
/// column, so State fields carry the State atom in column 0.
struct Instance {
    std::vector<Atom> atoms;  // indexed by id
    std::map<std::string, std::vector<AtomId>> universe;
    std::map<std::string, TupleSet> relations;
    std::string state_sig;

    /// Empty universes and relations for every sig and relation of `schema`.
    static Instance empty(const Schema& schema);

    AtomId add_atom(const std::string& sig, const std::string& label);
    const std::vector<AtomId>& atoms_of(const std::string& sig) const;
    const Atom& atom(AtomId id) const { return atoms.at(id); }
    /// The State atom; throws StoreError unless there is exactly one.
    AtomId state_atom() const;

    const TupleSet& rel(const std::string& name) const;
    TupleSet& rel(const std::string& name);

    bool operator==(const Instance&) const = default;
};

/// Tuples of a State field with the State column removed.
TupleSet strip_state(const TupleSet& full, AtomId state);

std::string format_tuple(const Instance& inst, const Tuple& t);

// ---------------------------------------------------------------------------
// Evaluation

/// Value of `e`. Sig names denote their universe; plain field occurrences and
/// Pre-tagged ones read `pre`, Post-tagged ones read `post`. Tagged
/// occurrences drop the State column.
TupleSet eval(const Expr& e, const Instance& pre, const Instance& post, const Environment& env);
bool contains(const Expr& e, const Tuple& t, const Instance& pre, const Instance& post, const Environment& env);

TupleSet join(const TupleSet& a, const TupleSet& b);
TupleSet product(const TupleSet& a, const TupleSet& b);
TupleSet transpose(const TupleSet& a);
TupleSet transitive_closure(const TupleSet& a);

// ---------------------------------------------------------------------------
// Updates

enum class Action { Insert, Delete };

struct Update {
    std::string rel;
    Tuple tuple;
    Action action = Action::Insert;

    bool operator==(const Update&) const = default;
};

/// Ordered record of the insertions and deletions of one transaction. A
/// (relation, tuple) pair never appears with both actions.
class UpdateLog {
public:
    const std::vector<Update>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    /// True if recording `action` for (rel, t) would contradict an earlier
    /// entry.
    bool conflicts(const std::string& rel, const Tuple& t, Action action) const;
    bool recorded(const std::string& rel, const Tuple& t, Action action) const;

    /// Throws StoreError on conflict.
    void append(Update u);
    /// Drop entries past `n`.
    void truncate(std::size_t n);

    bool operator==(const UpdateLog& o) const { return entries_ == o.entries_; }

private:
    std::vector<Update> entries_;
    std::map<std::pair<std::string, Tuple>, std::pair<Action, std::size_t>> index_;  // action, count
};

/// Set-semantics insert or delete.
void apply(Instance& inst, const Update& u);
void replay(Instance& inst, const UpdateLog& log);

/// Per-relation symmetric difference, relations in name order, deletions
/// before insertions. Throws StoreError if the universes differ.
UpdateLog diff(const Instance& pre, const Instance& post);

/// J is an (I, I')-approximation: per relation, I - J ⊆ I - I' and
/// J - I ⊆ I' - I.
bool is_approximation(const Instance& j, const Instance& i, const Instance& iprime);

// ---------------------------------------------------------------------------
// Snapshots
//
//   SPECDB 1
//   atom <sig> <id> <label>      one per atom, in id order
//   rel <name>                   one block per relation, in name order
//   <id>\t<id>...                tuples in lexicographic order
//
// Lines starting with `#` are comments.

std::string snapshot_text(const Instance& inst);
Instance parse_snapshot(const std::string& text, const Schema& schema, const std::string& origin = "<snapshot>");

/// Writes through a temporary file and rename.
void snapshot_write(const Instance& inst, const std::string& path);
Instance snapshot_read(const std::string& path, const Schema& schema);

/// Text form of an update log in the snapshot style, one `+`/`-` line per
/// entry.
std::string log_text(const UpdateLog& log);

}  // namespace specdb
