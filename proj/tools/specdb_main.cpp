// specdb: run relational specifications as database transactions.

#include "specdb/check.hpp"
#include "specdb/executor.hpp"
#include "specdb/normalizer.hpp"
#include "specdb/oracle.hpp"
#include "specdb/parser.hpp"
#include "specdb/session.hpp"
#include "specdb/store.hpp"

#include <CLI11.hpp>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace specdb;

namespace {

constexpr int kOk = 0;
constexpr int kUserError = 1;
constexpr int kTxnFailed = 2;

struct UserError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UserError("cannot read `" + path + "`");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Spec load_spec(const std::string& path) {
    return check_spec(parse_spec(read_file(path), path));
}

// Advisory lock on <db>.lock held for the lifetime of the object.
class DbLock {
public:
    explicit DbLock(const std::string& db) {
        if (db.empty()) return;
        path_ = db + ".lock";
        fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT, 0644);
        if (fd_ < 0) throw UserError("cannot open lock file `" + path_ + "`");
        if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
            ::close(fd_);
            fd_ = -1;
            throw UserError("database `" + db + "` is in use by another session");
        }
    }
    ~DbLock() {
        if (fd_ < 0) return;
        ::unlink(path_.c_str());
        ::close(fd_);
    }
    DbLock(const DbLock&) = delete;
    DbLock& operator=(const DbLock&) = delete;

private:
    std::string path_;
    int fd_ = -1;
};

struct SharedFlags {
    std::string spec;
    std::string db;
    std::string journal;
    std::string strategy = "default";
    std::size_t max_choices = Budget{}.max_choice_points;
    bool trace = false;
};

ExecOptions exec_options(const SharedFlags& f) {
    ExecOptions o;
    o.strategy = Strategy::parse(f.strategy);
    o.budget.max_choice_points = f.max_choices;
    const char* env = std::getenv("SPECDB_TRACE");
    if (f.trace || (env && std::string(env) == "1")) o.trace = &std::cout;
    return o;
}

void report(const CommandResult& r) {
    std::cout << r.output << std::flush;
    if (!r.ok) std::cerr << "error: " << r.error << "\n";
}

int cmd_run(const SharedFlags& f, const std::string& script) {
    Spec spec = load_spec(f.spec);
    std::string text = read_file(script);
    DbLock lock(f.db);
    SessionOptions so{exec_options(f), f.db, f.journal};
    Session s = Session::open(std::move(spec), so);
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        CommandResult r = s.execute_line(line);
        if (!r.ok) std::cerr << script << ":" << n << ": ";
        report(r);
        if (r.quit) break;
        if (!r.ok) return r.transaction_failed ? kTxnFailed : kUserError;
    }
    return kOk;
}

int cmd_repl(const SharedFlags& f) {
    Spec spec = load_spec(f.spec);
    DbLock lock(f.db);
    SessionOptions so{exec_options(f), f.db, f.journal};
    Session s = Session::open(std::move(spec), so);
    const bool tty = ::isatty(STDIN_FILENO);
    std::string line;
    while (true) {
        if (tty) std::cout << "specdb> " << std::flush;
        if (!std::getline(std::cin, line)) break;
        CommandResult r = s.execute_line(line);
        report(r);
        if (r.quit) break;
    }
    return kOk;
}

int cmd_check(const SharedFlags& f) {
    Spec spec = load_spec(f.spec);
    for (const auto& sig : spec.signatures) {
        std::cout << "sig " << sig.name << (sig.name == spec.state_sig ? " (state)" : "");
        if (!sig.fields.empty()) {
            std::cout << ":";
            for (const auto& fld : sig.fields) std::cout << " " << fld.name << "/" << fld.columns.size();
        }
        std::cout << "\n";
    }
    for (const auto& p : spec.predicates) {
        std::cout << "pred " << p.name << "(";
        for (std::size_t i = 0; i < p.params.size(); ++i)
            std::cout << (i ? ", " : "") << p.params[i].name << ": " << p.params[i].type;
        std::cout << ")\n";
    }
    std::cout << spec.facts.size() << " facts, " << spec.derived_facts.size() << " derived\n";
    return kOk;
}

int cmd_dump(const SharedFlags& f, const std::string& pred, bool no_prime) {
    Spec spec = load_spec(f.spec);
    NormalizeOptions no;
    no.prime_facts = !no_prime;
    bool found = false;
    for (const auto& p : spec.predicates) {
        if (!pred.empty() && p.name != pred) continue;
        found = true;
        std::cout << render(normalize_predicate(spec, p, no));
    }
    if (!found) throw UserError("unknown predicate `" + pred + "`");
    return kOk;
}

int cmd_oracle_check(const SharedFlags& f, const std::string& pred, const std::vector<std::string>& args,
                     bool no_prime) {
    Spec spec = load_spec(f.spec);
    if (f.db.empty()) throw UserError("oracle check needs --db");
    Instance pre = snapshot_read(f.db, Schema::from_spec(spec));
    const Predicate* p = spec.find_pred(pred);
    if (!p) throw UserError("unknown predicate `" + pred + "`");
    Environment env = bind_arguments(spec, *p, pre, args);

    NormalizeOptions no;
    no.prime_facts = !no_prime;
    ExecResult res = run_predicate(normalize_predicate(spec, *p, no), env, pre, exec_options(f));
    if (res.outcome == Outcome::BudgetExceeded) {
        std::cout << "executor: Budget (" << res.message << ")\nverdict: INCONCLUSIVE\n";
        return kUserError;
    }
    std::optional<Instance> post;
    if (res.ok()) post = res.post;
    Verdict v = oracle_check(spec, *p, pre, env, post);
    std::cout << "executor: " << outcome_name(res.outcome) << " (rounds=" << res.stats.rounds
              << ", choices=" << res.stats.choice_points << ")\n";
    std::cout << "verdict: " << verdict_name(v) << "\n";
    if (v == Verdict::Ok) return kOk;

    std::cout << "--- reproducer\n";
    std::cout << "predicate " << pred << "\n";
    for (const auto& [name, atom] : env)
        std::cout << "env " << name << " = " << pre.atoms[atom].label << " (" << pre.atoms[atom].sig << ")\n";
    std::cout << "--- spec " << f.spec << "\n" << render(spec);
    std::cout << "--- pre-state\n" << snapshot_text(pre);
    if (post) {
        std::cout << "--- executor post-state\n" << snapshot_text(*post);
    } else if (auto witness = find_poststate(spec, *p, pre, env)) {
        std::cout << "--- satisfying post-state\n" << snapshot_text(*witness);
    }
    return kTxnFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"specdb: relational specifications run as backtracking transactions"};
    app.require_subcommand(1);
    SharedFlags f;

    auto shared = [&f](CLI::App* sub, bool need_db) {
        sub->add_option("--spec", f.spec, "specification file")->required()->check(CLI::ExistingFile);
        auto* db = sub->add_option("--db", f.db, "snapshot file");
        if (need_db) db->required();
    };
    auto exec_flags = [&f](CLI::App* sub) {
        sub->add_flag("--trace", f.trace, "print choice points, updates and backtracks");
        sub->add_option("--strategy", f.strategy, "default | random:<seed>");
        sub->add_option("--max-choices", f.max_choices, "choice point budget");
    };

    std::string script;
    auto* run = app.add_subcommand("run", "execute a command script against a database");
    shared(run, false);
    exec_flags(run);
    run->add_option("--script", script, "command script")->required()->check(CLI::ExistingFile);
    run->add_option("--journal", f.journal, "append committed update logs here");

    auto* repl = app.add_subcommand("repl", "interactive session");
    shared(repl, false);
    exec_flags(repl);
    repl->add_option("--journal", f.journal, "append committed update logs here");

    auto* check = app.add_subcommand("check", "typecheck a specification");
    shared(check, false);

    std::string pred;
    bool no_prime = false;
    auto* dump = app.add_subcommand("dump-normal", "print the normalized matrix of each predicate");
    shared(dump, false);
    dump->add_option("--pred", pred, "only this predicate");
    dump->add_flag("--no-prime-facts", no_prime, "leave the facts out of the matrix");

    std::vector<std::string> args;
    auto* oracle = app.add_subcommand("oracle", "brute-force reference checks");
    oracle->require_subcommand(1);
    auto* ocheck = oracle->add_subcommand("check", "run a predicate and check the result by enumeration");
    shared(ocheck, true);
    exec_flags(ocheck);
    ocheck->add_option("--pred", pred, "predicate")->required();
    ocheck->add_option("--args", args, "arguments, primed State omitted");
    ocheck->add_flag("--no-prime-facts", no_prime, "run without the primed facts (mutation check)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUserError;
    }

    try {
        if (*run) return cmd_run(f, script);
        if (*repl) return cmd_repl(f);
        if (*check) return cmd_check(f);
        if (*dump) return cmd_dump(f, pred, no_prime);
        if (*ocheck) return cmd_oracle_check(f, pred, args, no_prime);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUserError;
    }
    return kUserError;
}
