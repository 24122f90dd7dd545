#include "specdb/session.hpp"

#include "specdb/oracle.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace specdb {

Session::Session(Spec spec, Instance committed, SessionOptions opts)
    : spec_(std::move(spec)), committed_(std::move(committed)), opts_(std::move(opts)) {}

Instance Session::fresh_instance(const Spec& spec) {
    Instance inst = Instance::empty(Schema::from_spec(spec));
    if (!spec.state_sig.empty()) inst.add_atom(spec.state_sig, kInitialStateLabel);
    return inst;
}

Session Session::open(Spec spec, SessionOptions opts) {
    Instance inst;
    if (!opts.db_path.empty() && std::filesystem::exists(opts.db_path)) {
        inst = snapshot_read(opts.db_path, Schema::from_spec(spec));
        if (!spec.state_sig.empty() && inst.atoms_of(spec.state_sig).size() != 1)
            throw StoreError(opts.db_path + ": the database must hold exactly one " + spec.state_sig + " atom");
        if (auto bad = violated_fact(spec, inst))
            throw StoreError(opts.db_path + ": stored instance violates fact " + *bad);
    } else {
        inst = fresh_instance(spec);
    }
    Session s(std::move(spec), std::move(inst), std::move(opts));
    if (!s.opts_.db_path.empty()) s.persist();
    return s;
}

void Session::persist() {
    if (!opts_.db_path.empty()) snapshot_write(committed_, opts_.db_path);
}

CommandResult Session::execute_line(const std::string& line) {
    std::optional<Command> cmd;
    try {
        cmd = parse_command(line);
    } catch (const SpecError& e) {
        CommandResult r;
        r.ok = false;
        r.error = e.what();
        return r;
    }
    if (!cmd) return {};
    return execute(*cmd);
}

CommandResult Session::execute(const Command& cmd) {
    CommandResult r;
    try {
        if (const auto* c = std::get_if<CreateAtom>(&cmd)) return create(*c);
        if (const auto* c = std::get_if<InvokePredicate>(&cmd)) return invoke(*c);
        if (const auto* c = std::get_if<ShowRelation>(&cmd)) {
            r.output = show(c->name);
            return r;
        }
        if (const auto* c = std::get_if<SnapshotCommand>(&cmd)) {
            snapshot_write(committed_, c->path);
            r.output = "snapshot written to " + c->path + "\n";
            return r;
        }
        r.quit = true;
        return r;
    } catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
        return r;
    }
}

CommandResult Session::create(const CreateAtom& c) {
    CommandResult r;
    auto fail = [&](const std::string& msg) {
        r.ok = false;
        r.error = msg;
        return r;
    };
    if (!spec_.find_sig(c.sig)) return fail("unknown signature `" + c.sig + "`");
    if (c.label.find_first_of("\t\n\r") != std::string::npos) return fail("labels cannot contain tabs or newlines");
    if (!c.binding.empty() && bindings_.count(c.binding)) return fail("name `" + c.binding + "` is already bound");

    Instance next = committed_;
    AtomId id = 0;
    if (c.sig == spec_.state_sig) {
        // the database has exactly one State atom; creating it names it
        id = next.state_atom();
        for (const auto& [name, bound] : bindings_)
            if (bound == id) return fail("the " + c.sig + " atom is already bound to `" + name + "`");
        if (next.atoms[id].label != kInitialStateLabel && next.atoms[id].label != c.label)
            return fail("the database already has its " + c.sig + " atom `" + next.atoms[id].label + "`");
        next.atoms[id].label = c.label;
    } else {
        id = next.add_atom(c.sig, c.label);
    }
    if (auto bad = violated_fact(spec_, next)) return fail("creating " + c.sig + " atom would violate fact " + *bad);
    committed_ = std::move(next);
    if (!c.binding.empty()) bindings_[c.binding] = id;
    persist();
    r.output = c.sig + " " + c.label + "\n";
    return r;
}

namespace {

AtomId resolve(const Instance& inst, const std::map<std::string, AtomId>& bindings, const std::string& name) {
    auto it = bindings.find(name);
    if (it != bindings.end()) return it->second;
    std::optional<AtomId> found;
    for (const auto& a : inst.atoms) {
        if (a.label != name) continue;
        if (found) throw std::invalid_argument("label `" + name + "` is ambiguous");
        found = a.id;
    }
    if (!found) throw std::invalid_argument("unknown name `" + name + "`");
    return *found;
}

}  // namespace

Environment bind_arguments(const Spec& spec, const Predicate& p, const Instance& inst,
                           const std::vector<std::string>& args, const std::map<std::string, AtomId>& bindings) {
    const std::string pre = p.pre_state(spec.state_sig);
    const std::string post = p.post_state(spec.state_sig);
    std::vector<const Param*> params;
    for (const auto& prm : p.params)
        if (prm.name != post) params.push_back(&prm);
    if (params.size() != args.size())
        throw std::invalid_argument(p.name + " takes " + std::to_string(params.size()) + " arguments, got " +
                                    std::to_string(args.size()));
    Environment env;
    for (std::size_t i = 0; i < params.size(); ++i) {
        AtomId a = resolve(inst, bindings, args[i]);
        if (inst.atoms[a].sig != params[i]->type)
            throw std::invalid_argument("argument `" + args[i] + "` is a " + inst.atoms[a].sig + ", expected " +
                                        params[i]->type);
        if (params[i]->name == pre) {
            if (a != inst.state_atom())
                throw std::invalid_argument("`" + args[i] + "` is not the current " + spec.state_sig);
            continue;
        }
        env[params[i]->name] = a;
    }
    return env;
}

const NormalizedPredicate& Session::normalized(const Predicate& p) {
    auto it = cache_.find(p.name);
    if (it == cache_.end()) it = cache_.emplace(p.name, normalize_predicate(spec_, p)).first;
    return it->second;
}

CommandResult Session::invoke(const InvokePredicate& c) {
    CommandResult r;
    const Predicate* p = spec_.find_pred(c.name);
    if (!p) {
        r.ok = false;
        r.error = "unknown predicate `" + c.name + "`";
        return r;
    }
    Environment env = bind_arguments(spec_, *p, committed_, c.args, bindings_);

    ExecResult res = run_predicate(normalized(*p), env, committed_, opts_.exec);
    if (!res.ok()) {
        r.ok = false;
        r.transaction_failed = true;
        r.error = c.name + " failed (" + std::string(outcome_name(res.outcome)) + "): " + res.message;
        r.exec = std::move(res);
        return r;
    }
    if (auto bad = violated_fact(spec_, res.post)) {
        r.ok = false;
        r.transaction_failed = true;
        r.error = c.name + " produced a state violating fact " + *bad;
        r.exec = std::move(res);
        return r;
    }

    UpdateLog committed_log = diff(committed_, res.post);
    committed_ = res.post;
    ++transactions_;
    persist();
    if (!opts_.journal_path.empty()) {
        std::ofstream j(opts_.journal_path, std::ios::app);
        if (!j) throw StoreError("cannot append to journal `" + opts_.journal_path + "`");
        j << "txn " << transactions_ << " " << render_command(c) << "\n" << log_text(committed_log);
    }
    std::ostringstream out;
    for (const auto& u : committed_log.entries())
        out << (u.action == Action::Insert ? "+ " : "- ") << u.rel << " " << format_tuple(committed_, u.tuple) << "\n";
    r.output = out.str();
    r.exec = std::move(res);
    return r;
}

std::string Session::show(const std::string& name) const {
    std::ostringstream out;
    if (spec_.find_sig(name)) {
        out << name << "\n";
        for (AtomId a : committed_.atoms_of(name)) out << "  " << committed_.atoms[a].label << "\n";
        return out.str();
    }
    const TupleSet& tuples = committed_.rel(name);
    out << name << "\n";
    for (const auto& t : tuples) out << "  " << format_tuple(committed_, t) << "\n";
    return out.str();
}

}  // namespace specdb
