#include "specdb/executor.hpp"

#include <algorithm>
#include <ostream>
#include <random>
#include <stdexcept>
#include <type_traits>

#include <pthread.h>

namespace specdb {

Strategy Strategy::parse(const std::string& text) {
    if (text.empty() || text == "default") return {};
    const std::string prefix = "random:";
    if (text.rfind(prefix, 0) == 0) {
        std::string digits = text.substr(prefix.size());
        if (!digits.empty() && std::all_of(digits.begin(), digits.end(), ::isdigit))
            return {true, std::stoull(digits)};
    }
    throw std::invalid_argument("unknown strategy `" + text + "` (expected default or random:<seed>)");
}

std::string Strategy::str() const {
    return random ? "random:" + std::to_string(seed) : "default";
}

const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Success:
            return "Success";
        case Outcome::Exhausted:
            return "Exhausted";
        case Outcome::BudgetExceeded:
            return "Budget";
    }
    return "?";
}

namespace {

// Non-owning callable reference; the referenced callable must outlive it.
template <class Sig>
class FunctionRef;

template <class R, class... A>
class FunctionRef<R(A...)> {
public:
    template <class F, class = std::enable_if_t<!std::is_same_v<std::decay_t<F>, FunctionRef>>>
    FunctionRef(F&& f)  // NOLINT(google-explicit-constructor)
        : obj_(const_cast<void*>(static_cast<const void*>(&f))),
          call_([](void* o, A... a) -> R { return (*static_cast<std::remove_reference_t<F>*>(o))(a...); }) {}

    R operator()(A... a) const { return call_(obj_, a...); }

private:
    void* obj_;
    R (*call_)(void*, A...);
};

using Cont = FunctionRef<bool()>;

struct BudgetHit {
    std::string what;
};

void collect_post(const Expr& e, std::map<std::string, ColumnTypes>& out) {
    if (e.kind == ExprKind::Rel && e.tag == RelTag::Post) out[e.name] = e.type;
    if (e.lhs) collect_post(*e.lhs, out);
    if (e.rhs) collect_post(*e.rhs, out);
}

ExprPtr conjunction_of(const SpecialFormula& s) {
    ExprPtr e = s.exprs.front();
    for (std::size_t i = 1; i < s.exprs.size(); ++i) e = ex::inter(e, s.exprs[i]);
    return e;
}

class Search {
public:
    Search(const NormalizedPredicate& p, const Environment& env, const Instance& pre, const ExecOptions& opts)
        : p_(p), env_(env), pre_(pre), post_(pre), opts_(opts), rng_(opts.strategy.seed) {
        for (const auto& d : p.skolem_decls) {
            pre_.relations[d.name];
            post_.relations[d.name];
        }
        state_ = pre_.state_atom();
        space_ = mutable_tuple_space(p, pre);
        max_rounds_ = opts.budget.max_rounds ? opts.budget.max_rounds : 2 * space_ + 2;
    }

    ExecResult run() {
        ExecResult r;
        r.post = pre_;
        try {
            bool ok = round(1);
            r.outcome = ok ? Outcome::Success : Outcome::Exhausted;
            if (ok) {
                r.post = result_;
                r.updates = result_log_;
                r.stats.rounds = result_rounds_;
            } else {
                r.message = "no choice of updates satisfies " + p_.name;
            }
        } catch (const BudgetHit& b) {
            r.outcome = Outcome::BudgetExceeded;
            r.message = b.what;
        }
        for (const auto& d : p_.skolem_decls) r.post.relations.erase(d.name);
        r.stats.choice_points = choice_points_;
        r.stats.backtracks = backtracks_;
        r.stats.max_updates = max_updates_;
        r.stats.max_rounds_seen = max_rounds_seen_;
        r.stats.tuple_space = space_;
        return r;
    }

private:
    // -- choice points and undo --------------------------------------------

    template <class F>
    bool choose(std::size_t n, F&& alt) {
        if (n == 0) return false;
        if (n == 1) return alt(std::size_t{0});
        if (++choice_points_ > opts_.budget.max_choice_points)
            throw BudgetHit{"choice-point budget of " + std::to_string(opts_.budget.max_choice_points) + " exceeded"};
        const std::size_t site = choice_points_;
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        if (opts_.strategy.random) std::shuffle(order.begin(), order.end(), rng_);
        const std::size_t mark = log_.size();
        for (std::size_t k = 0; k < n; ++k) {
            if (opts_.trace) *opts_.trace << "CHOOSE site=" << site << " alt=" << k + 1 << "/" << n << "\n";
            if (alt(order[k])) return true;
            undo(mark);
            ++backtracks_;
            if (opts_.trace) *opts_.trace << "BACKTRACK site=" << site << "\n";
        }
        return false;
    }

    void undo(std::size_t mark) {
        const auto& entries = log_.entries();
        for (std::size_t i = entries.size(); i > mark; --i) {
            const Update& u = entries[i - 1];
            TupleSet& r = post_.rel(u.rel);
            if (u.action == Action::Insert)
                r.erase(u.tuple);
            else
                r.insert(u.tuple);
        }
        log_.truncate(mark);
    }

    bool record(const std::string& rel, Tuple full, Action action) {
        if (log_.conflicts(rel, full, action)) return false;
        if (opts_.trace)
            *opts_.trace << (action == Action::Insert ? "INS " : "DEL ") << rel << " " << format_tuple(post_, full)
                         << "\n";
        if (action == Action::Insert)
            post_.rel(rel).insert(full);
        else
            post_.rel(rel).erase(full);
        log_.append({rel, std::move(full), action});
        max_updates_ = std::max(max_updates_, log_.size());
        return true;
    }

    bool in(const Expr& e, const Tuple& t, const Environment& env) const {
        return contains(e, t, pre_, post_, env);
    }

    // -- insertTuple / deleteTuple -----------------------------------------

    bool insert(const Tuple& t, const ExprPtr& e, const Environment& env, Cont k) {
        if (in(*e, t, env)) return k();
        switch (e->kind) {
            case ExprKind::Var:
            case ExprKind::None:
                return false;
            case ExprKind::Rel: {
                if (e->tag != RelTag::Post) return false;
                Tuple full{state_};
                full.insert(full.end(), t.begin(), t.end());
                return record(e->name, std::move(full), Action::Insert) && k();
            }
            case ExprKind::Union:
                return choose(2, [&](std::size_t i) { return insert(t, i == 0 ? e->lhs : e->rhs, env, k); });
            case ExprKind::Intersect:
                return insert(t, e->lhs, env, [&] { return insert(t, e->rhs, env, k); });
            case ExprKind::Diff:
                return insert(t, e->lhs, env, [&] { return remove(t, e->rhs, env, k); });
            case ExprKind::Converse:
                return insert(Tuple(t.rbegin(), t.rend()), e->lhs, env, k);
            case ExprKind::Product: {
                auto n = static_cast<std::ptrdiff_t>(e->lhs->arity());
                Tuple l(t.begin(), t.begin() + n);
                Tuple r(t.begin() + n, t.end());
                return insert(l, e->lhs, env, [&] { return insert(r, e->rhs, env, k); });
            }
            case ExprKind::Join:
                return insert_join(t, e, env, k);
            case ExprKind::Closure:
                return insert(t, e->lhs, env, k);
        }
        return false;
    }

    // A witness atom a of the join column gives t = t_left ++ t_right with
    // t_left ++ a in e1 and a ++ t_right in e2. Atoms that already satisfy
    // one side are tried first.
    bool insert_join(const Tuple& t, const ExprPtr& e, const Environment& env, Cont k) {
        const auto split = static_cast<std::ptrdiff_t>(e->lhs->arity() - 1);
        const Tuple tl(t.begin(), t.begin() + split);
        const Tuple tr(t.begin() + split, t.end());
        auto left_of = [&](AtomId a) {
            Tuple x = tl;
            x.push_back(a);
            return x;
        };
        auto right_of = [&](AtomId a) {
            Tuple x{a};
            x.insert(x.end(), tr.begin(), tr.end());
            return x;
        };
        std::vector<AtomId> witnesses = pre_.atoms_of(e->lhs->type.back());
        std::stable_sort(witnesses.begin(), witnesses.end(), [&](AtomId a, AtomId b) {
            auto score = [&](AtomId x) { return int(in(*e->lhs, left_of(x), env)) + int(in(*e->rhs, right_of(x), env)); };
            return score(a) > score(b);
        });
        return choose(witnesses.size(), [&](std::size_t i) {
            const AtomId a = witnesses[i];
            const Tuple r = right_of(a);
            return insert(left_of(a), e->lhs, env, [&] { return insert(r, e->rhs, env, k); });
        });
    }

    bool remove(const Tuple& t, const ExprPtr& e, const Environment& env, Cont k) {
        if (!in(*e, t, env)) return k();
        switch (e->kind) {
            case ExprKind::Var:
            case ExprKind::None:
                return false;
            case ExprKind::Rel: {
                if (e->tag != RelTag::Post) return false;
                Tuple full{state_};
                full.insert(full.end(), t.begin(), t.end());
                return record(e->name, std::move(full), Action::Delete) && k();
            }
            case ExprKind::Union:
                return remove(t, e->lhs, env, [&] { return remove(t, e->rhs, env, k); });
            case ExprKind::Intersect:
                return choose(2, [&](std::size_t i) { return remove(t, i == 0 ? e->lhs : e->rhs, env, k); });
            case ExprKind::Diff:
                return choose(2, [&](std::size_t i) {
                    return i == 0 ? remove(t, e->lhs, env, k) : insert(t, e->rhs, env, k);
                });
            case ExprKind::Converse:
                return remove(Tuple(t.rbegin(), t.rend()), e->lhs, env, k);
            case ExprKind::Product: {
                auto n = static_cast<std::ptrdiff_t>(e->lhs->arity());
                return choose(2, [&](std::size_t i) {
                    return i == 0 ? remove(Tuple(t.begin(), t.begin() + n), e->lhs, env, k)
                                  : remove(Tuple(t.begin() + n, t.end()), e->rhs, env, k);
                });
            }
            case ExprKind::Join:
                return remove_join(t, e, env, k);
            case ExprKind::Closure:
                return remove_closure(t, e, env, k);
        }
        return false;
    }

    // Every current witness is broken on one side or the other.
    bool remove_join(const Tuple& t, const ExprPtr& e, const Environment& env, Cont k) {
        const auto split = static_cast<std::ptrdiff_t>(e->lhs->arity() - 1);
        const Tuple tl(t.begin(), t.begin() + split);
        const Tuple tr(t.begin() + split, t.end());
        std::vector<std::pair<Tuple, Tuple>> parts;
        for (AtomId a : pre_.atoms_of(e->lhs->type.back())) {
            Tuple l = tl;
            l.push_back(a);
            Tuple r{a};
            r.insert(r.end(), tr.begin(), tr.end());
            if (in(*e->lhs, l, env) && in(*e->rhs, r, env)) parts.emplace_back(std::move(l), std::move(r));
        }
        return break_witnesses(parts, 0, e, env, k);
    }

    bool break_witnesses(const std::vector<std::pair<Tuple, Tuple>>& parts, std::size_t i, const ExprPtr& e,
                         const Environment& env, Cont k) {
        if (i == parts.size()) return k();
        const auto& [l, r] = parts[i];
        auto next = [&] { return break_witnesses(parts, i + 1, e, env, k); };
        if (!in(*e->lhs, l, env) || !in(*e->rhs, r, env)) return next();
        return choose(2, [&](std::size_t side) {
            return side == 0 ? remove(l, e->lhs, env, next) : remove(r, e->rhs, env, next);
        });
    }

    // Repeatedly takes a shortest path from t[0] to t[1] and deletes one of
    // its edges, until no path is left.
    bool remove_closure(const Tuple& t, const ExprPtr& e, const Environment& env, Cont k) {
        TupleSet edges = eval(*e->lhs, pre_, post_, env);
        std::map<AtomId, std::vector<AtomId>> succ;
        for (const auto& x : edges) succ[x[0]].push_back(x[1]);
        std::map<AtomId, AtomId> parent;
        std::vector<AtomId> frontier{t[0]};
        bool found = false;
        while (!frontier.empty() && !found) {
            std::vector<AtomId> next;
            for (AtomId u : frontier) {
                for (AtomId v : succ[u]) {
                    if (parent.count(v)) continue;
                    parent[v] = u;
                    if (v == t[1]) {
                        found = true;
                        break;
                    }
                    next.push_back(v);
                }
                if (found) break;
            }
            frontier = std::move(next);
        }
        if (!found) return k();
        std::vector<Tuple> path;
        AtomId v = t[1];
        do {
            AtomId u = parent[v];
            path.push_back({u, v});
            v = u;
        } while (v != t[0]);
        std::reverse(path.begin(), path.end());

        const std::size_t before = log_.size();
        return choose(path.size(), [&](std::size_t i) {
            return remove(path[i], e->lhs, env, [&] {
                if (log_.size() == before) return false;  // no progress
                return remove_closure(t, e, env, k);
            });
        });
    }

    // -- clause passes -----------------------------------------------------

    struct Cursor {
        std::size_t clause = 0;
        std::vector<std::size_t> pos;
    };

    const std::vector<AtomId>& universe(const Universal& u) const { return pre_.atoms_of(u.sig); }

    // Moves to the first binding of `c.clause`, skipping clauses with an
    // empty universe. False at the end of the matrix.
    bool settle(Cursor& c) const {
        for (; c.clause < p_.matrix.size(); ++c.clause) {
            const auto& us = p_.matrix[c.clause].universals;
            bool empty = std::any_of(us.begin(), us.end(), [&](const Universal& u) { return universe(u).empty(); });
            if (!empty) {
                c.pos.assign(us.size(), 0);
                return true;
            }
        }
        return false;
    }

    bool advance(Cursor& c) const {
        const auto& us = p_.matrix[c.clause].universals;
        for (std::size_t i = us.size(); i-- > 0;) {
            if (++c.pos[i] < universe(us[i]).size()) return true;
            c.pos[i] = 0;
        }
        ++c.clause;
        return settle(c);
    }

    Environment bind(const Cursor& c) const {
        Environment env = env_;
        const auto& us = p_.matrix[c.clause].universals;
        for (std::size_t i = 0; i < us.size(); ++i) env[us[i].var] = universe(us[i])[c.pos[i]];
        return env;
    }

    bool round(std::size_t n) {
        if (n > max_rounds_)
            throw BudgetHit{"round budget of " + std::to_string(max_rounds_) + " exceeded"};
        max_rounds_seen_ = std::max(max_rounds_seen_, n);
        if (opts_.trace) *opts_.trace << "ROUND " << n << "\n";
        const std::size_t mark = log_.size();
        Cursor c;
        if (!settle(c)) return end_of_round(n, mark);
        return pass(c, n, mark);
    }

    bool end_of_round(std::size_t n, std::size_t mark) {
        if (log_.size() != mark) return round(n + 1);
        if (!holds(p_.matrix, pre_, post_, env_)) return false;
        result_ = post_;
        result_log_ = log_;
        result_rounds_ = n;
        return true;
    }

    bool pass(Cursor c, std::size_t n, std::size_t mark) {
        for (;;) {
            const Clause& clause = p_.matrix[c.clause];
            Environment env = bind(c);
            if (!holds_instance(clause, pre_, post_, env)) {
                Cursor next = c;
                bool more = advance(next);
                auto k = [&] { return more ? pass(next, n, mark) : end_of_round(n, mark); };
                return choose(clause.disjuncts.size(),
                              [&](std::size_t i) { return realize(clause.disjuncts[i], env, k); });
            }
            if (!advance(c)) return end_of_round(n, mark);
        }
    }

    bool realize(const SpecialFormula& s, const Environment& env, Cont k) {
        ExprPtr e = conjunction_of(s);
        if (s.polarity == Polarity::Empty) {
            TupleSet current = eval(*e, pre_, post_, env);
            std::vector<Tuple> doomed(current.begin(), current.end());
            return remove_each(doomed, 0, e, env, k);
        }
        std::vector<Tuple> candidates = candidates_for(*e, env);
        return choose(candidates.size(), [&](std::size_t i) { return insert(candidates[i], e, env, k); });
    }

    bool remove_each(const std::vector<Tuple>& ts, std::size_t i, const ExprPtr& e, const Environment& env, Cont k) {
        if (i == ts.size()) return k();
        return remove(ts[i], e, env, [&] { return remove_each(ts, i + 1, e, env, k); });
    }

    std::vector<Tuple> candidates_for(const Expr& e, const Environment& env) const {
        std::vector<Tuple> all{Tuple{}};
        for (const auto& col : e.type) {
            std::vector<Tuple> next;
            for (const auto& prefix : all)
                for (AtomId a : pre_.atoms_of(col)) {
                    Tuple t = prefix;
                    t.push_back(a);
                    next.push_back(std::move(t));
                }
            all = std::move(next);
        }
        std::stable_partition(all.begin(), all.end(), [&](const Tuple& t) { return in(e, t, env); });
        return all;
    }

    const NormalizedPredicate& p_;
    const Environment& env_;
    Instance pre_;
    Instance post_;
    const ExecOptions& opts_;
    std::mt19937_64 rng_;
    AtomId state_ = 0;
    UpdateLog log_;
    std::size_t space_ = 0;
    std::size_t max_rounds_ = 0;

    std::size_t choice_points_ = 0;
    std::size_t backtracks_ = 0;
    std::size_t max_updates_ = 0;
    std::size_t max_rounds_seen_ = 0;

    Instance result_;
    UpdateLog result_log_;
    std::size_t result_rounds_ = 0;
};

struct Job {
    const NormalizedPredicate* p;
    const Environment* env;
    const Instance* pre;
    const ExecOptions* opts;
    ExecResult result;
    std::exception_ptr error;
};

void* run_job(void* arg) {
    auto* job = static_cast<Job*>(arg);
    try {
        Search s(*job->p, *job->env, *job->pre, *job->opts);
        job->result = s.run();
    } catch (...) {
        job->error = std::current_exception();
    }
    return nullptr;
}

}  // namespace

std::size_t mutable_tuple_space(const NormalizedPredicate& p, const Instance& inst) {
    std::map<std::string, ColumnTypes> rels;
    for (const auto& c : p.matrix)
        for (const auto& d : c.disjuncts)
            for (const auto& e : d.exprs) collect_post(*e, rels);
    std::size_t total = 0;
    for (const auto& [name, cols] : rels) {
        std::size_t n = 1;
        for (const auto& c : cols) n *= inst.atoms_of(c).size();
        total += n;
    }
    return total;
}

ExecResult run_predicate(const NormalizedPredicate& p, const Environment& env, const Instance& pre,
                         const ExecOptions& opts) {
    for (const auto& prm : p.params) {
        if (prm.name == p.pre_state || prm.name == p.post_state) continue;
        auto it = env.find(prm.name);
        if (it == env.end()) throw std::invalid_argument("parameter `" + prm.name + "` is not bound");
        if (it->second >= pre.atoms.size() || pre.atoms[it->second].sig != prm.type)
            throw std::invalid_argument("parameter `" + prm.name + "` must be bound to a " + prm.type + " atom");
    }
    pre.state_atom();

    // The search recurses once per realized update; give it a deep stack.
    Job job{&p, &env, &pre, &opts, {}, nullptr};
    pthread_attr_t attr;
    pthread_attr_init(&attr);
    pthread_attr_setstacksize(&attr, std::size_t{512} << 20);
    pthread_t thread;
    if (pthread_create(&thread, &attr, run_job, &job) != 0) {
        pthread_attr_destroy(&attr);
        run_job(&job);
    } else {
        pthread_attr_destroy(&attr);
        pthread_join(thread, nullptr);
    }
    if (job.error) std::rethrow_exception(job.error);
    return std::move(job.result);
}

}  // namespace specdb
