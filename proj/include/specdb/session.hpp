#pragma once

// A live database: a checked spec, the committed instance, and the names
// bound by Create commands. Predicates run as transactions against it.

#include "specdb/executor.hpp"
#include "specdb/normalizer.hpp"
#include "specdb/parser.hpp"
#include "specdb/store.hpp"

#include <map>
#include <optional>
#include <string>

namespace specdb {

struct SessionOptions {
    ExecOptions exec;
    std::string db_path;       // snapshot written after every change when set
    std::string journal_path;  // committed update logs appended when set
};

struct CommandResult {
    bool ok = true;
    bool quit = false;
    /// A predicate ran and failed; the committed state is unchanged.
    bool transaction_failed = false;
    std::string output;
    std::string error;
    std::optional<ExecResult> exec;
};

/// Binds the arguments of a call to `p`: one per parameter except the primed
/// State one. Names resolve through `bindings`, then by unique atom label.
/// The unprimed State argument must name the State atom of `inst` and is
/// left out of the result. Throws std::invalid_argument.
Environment bind_arguments(const Spec& spec, const Predicate& p, const Instance& inst,
                           const std::vector<std::string>& args, const std::map<std::string, AtomId>& bindings = {});

class Session {
public:
    /// Label of the State atom created with a fresh database.
    static constexpr const char* kInitialStateLabel = "state";

    Session(Spec spec, Instance committed, SessionOptions opts = {});

    /// Empty instance of `spec` with its single State atom.
    static Instance fresh_instance(const Spec& spec);

    /// Opens `opts.db_path`, creating a fresh database when the file does not
    /// exist. Throws StoreError if the snapshot does not satisfy the facts.
    static Session open(Spec spec, SessionOptions opts);

    CommandResult execute(const Command& cmd);
    /// Parses and executes one line; blank and comment lines do nothing.
    CommandResult execute_line(const std::string& line);

    const Spec& spec() const { return spec_; }
    const Instance& committed() const { return committed_; }
    const std::map<std::string, AtomId>& bindings() const { return bindings_; }
    std::size_t transactions() const { return transactions_; }

    /// Relation or signature contents, one tuple per line.
    std::string show(const std::string& name) const;

private:
    CommandResult create(const CreateAtom& c);
    CommandResult invoke(const InvokePredicate& c);
    void persist();
    const NormalizedPredicate& normalized(const Predicate& p);

    Spec spec_;
    Instance committed_;
    SessionOptions opts_;
    std::map<std::string, AtomId> bindings_;
    std::map<std::string, NormalizedPredicate> cache_;
    std::size_t transactions_ = 0;
};

}  // namespace specdb
