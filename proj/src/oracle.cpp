#include "specdb/oracle.hpp"

#include <algorithm>
#include <set>

namespace specdb {

namespace {

class Evaluator {
public:
    Evaluator(const Spec& spec, const Instance& pre, const Instance& post, const Environment& env)
        : spec_(spec), pre_(pre), post_(post), env_(env) {}

    TupleSet expr(const Expr& e, const Instance& cur) {
        switch (e.kind) {
            case ExprKind::Rel: {
                if (e.tag != RelTag::Plain) throw OracleError("tagged relation in a source formula");
                if (spec_.find_sig(e.name)) {
                    TupleSet out;
                    for (AtomId a : cur.atoms_of(e.name)) out.insert({a});
                    return out;
                }
                return cur.rel(e.name);
            }
            case ExprKind::Var: {
                auto it = env_.find(e.name);
                if (it == env_.end()) throw OracleError("unbound variable `" + e.name + "`");
                return {{it->second}};
            }
            case ExprKind::None:
                return {};
            case ExprKind::Union:
            case ExprKind::Intersect:
            case ExprKind::Diff: {
                TupleSet a = expr(*e.lhs, cur);
                TupleSet b = expr(*e.rhs, cur);
                TupleSet out;
                if (e.kind == ExprKind::Union) {
                    out = a;
                    out.insert(b.begin(), b.end());
                } else {
                    for (const auto& t : a)
                        if (b.count(t) == (e.kind == ExprKind::Intersect ? 1u : 0u)) out.insert(t);
                }
                return out;
            }
            case ExprKind::Join: {
                if (e.lhs->kind == ExprKind::Var && is_state_var(*e.lhs)) {
                    const Instance& inst = reads_post(e.lhs->name) ? post_ : pre_;
                    return join(expr(*e.lhs, inst), expr(*e.rhs, inst));
                }
                return join(expr(*e.lhs, cur), expr(*e.rhs, cur));
            }
            case ExprKind::Product:
                return product(expr(*e.lhs, cur), expr(*e.rhs, cur));
            case ExprKind::Converse:
                return transpose(expr(*e.lhs, cur));
            case ExprKind::Closure: {
                // paths of length 1..n by repeated composition
                TupleSet base = expr(*e.lhs, cur);
                TupleSet acc = base;
                TupleSet step = base;
                for (std::size_t i = 1; i < cur.atoms.size() && !step.empty(); ++i) {
                    step = join(step, base);
                    std::size_t before = acc.size();
                    acc.insert(step.begin(), step.end());
                    if (acc.size() == before) break;
                }
                return acc;
            }
        }
        return {};
    }

    bool formula(const Formula& f) {
        switch (f.kind) {
            case FormulaKind::In: {
                TupleSet a = expr(*f.lhs, pre_);
                TupleSet b = expr(*f.rhs, pre_);
                return std::includes(b.begin(), b.end(), a.begin(), a.end());
            }
            case FormulaKind::Eq:
                return expr(*f.lhs, pre_) == expr(*f.rhs, pre_);
            case FormulaKind::Not:
                return !formula(*f.left);
            case FormulaKind::And:
                return formula(*f.left) && formula(*f.right);
            case FormulaKind::Or:
                return formula(*f.left) || formula(*f.right);
            case FormulaKind::Forall:
            case FormulaKind::Exists: {
                const bool all = f.kind == FormulaKind::Forall;
                const bool state_bound = f.lhs->arity() == 1 && f.lhs->type[0] == spec_.state_sig;
                // a State variable bound by a quantifier belongs to a fact
                const Instance& range_inst = state_bound ? post_ : pre_;
                TupleSet range = expr(*f.lhs, range_inst);
                auto saved = env_.find(f.var) != env_.end() ? std::optional<AtomId>(env_[f.var]) : std::nullopt;
                if (state_bound) fact_state_.insert(f.var);
                bool result = all;
                for (const auto& t : range) {
                    env_[f.var] = t[0];
                    if (formula(*f.left) != all) {
                        result = !all;
                        break;
                    }
                }
                if (state_bound) fact_state_.erase(f.var);
                if (saved)
                    env_[f.var] = *saved;
                else
                    env_.erase(f.var);
                return result;
            }
        }
        return false;
    }

private:
    bool is_state_var(const Expr& v) const {
        return v.type.size() == 1 && !spec_.state_sig.empty() && v.type[0] == spec_.state_sig;
    }

    bool reads_post(const std::string& var) const { return is_primed(var) || fact_state_.count(var) > 0; }

    const Spec& spec_;
    const Instance& pre_;
    const Instance& post_;
    Environment env_;
    std::set<std::string> fact_state_;
};

void mentioned(const Expr& e, std::set<std::string>& out) {
    if (e.kind == ExprKind::Rel) out.insert(e.name);
    if (e.lhs) mentioned(*e.lhs, out);
    if (e.rhs) mentioned(*e.rhs, out);
}

void mentioned(const Formula& f, std::set<std::string>& out) {
    if (f.lhs) mentioned(*f.lhs, out);
    if (f.rhs) mentioned(*f.rhs, out);
    if (f.left) mentioned(*f.left, out);
    if (f.right) mentioned(*f.right, out);
}

Environment with_states(const Spec& spec, const Predicate& p, const Instance& pre, const Instance& post,
                        const Environment& env) {
    Environment full = env;
    full[p.pre_state(spec.state_sig)] = pre.state_atom();
    full[p.post_state(spec.state_sig)] = post.state_atom();
    return full;
}

// Calls `visit` on each candidate post-state until it returns false.
template <class Visit>
void enumerate(const Spec& spec, const Predicate& p, const Instance& pre, const OracleConfig& cfg, Visit visit) {
    for (const auto& [sig, atoms] : pre.universe)
        if (atoms.size() > cfg.max_atoms_per_sig)
            throw OracleError("signature " + sig + " has " + std::to_string(atoms.size()) + " atoms, above the limit of " +
                              std::to_string(cfg.max_atoms_per_sig));
    const AtomId state = pre.state_atom();

    std::set<std::string> names;
    mentioned(*p.body, names);
    for (const auto& f : spec.all_facts()) mentioned(*f.body, names);

    struct Slot {
        std::string rel;
        Tuple tuple;
    };
    std::vector<Slot> slots;
    std::vector<std::string> varying;
    const Signature* state_sig = spec.find_sig(spec.state_sig);
    for (const auto& field : state_sig->fields) {
        if (!names.count(field.name)) continue;
        varying.push_back(field.name);
        std::vector<Tuple> tuples{{state}};
        for (std::size_t c = 1; c < field.columns.size(); ++c) {
            std::vector<Tuple> next;
            for (const auto& t : tuples)
                for (AtomId a : pre.atoms_of(field.columns[c])) {
                    Tuple x = t;
                    x.push_back(a);
                    next.push_back(std::move(x));
                }
            tuples = std::move(next);
        }
        for (auto& t : tuples) slots.push_back({field.name, std::move(t)});
    }
    if (slots.size() >= 63 || (std::size_t{1} << slots.size()) > cfg.max_candidates)
        throw OracleError("enumeration of " + std::to_string(slots.size()) + " tuple slots exceeds the cap of " +
                          std::to_string(cfg.max_candidates) + " candidates");

    Instance cand = pre;
    const std::uint64_t total = std::uint64_t{1} << slots.size();
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        for (const auto& r : varying) cand.rel(r).clear();
        for (std::size_t i = 0; i < slots.size(); ++i)
            if (mask >> i & 1u) cand.rel(slots[i].rel).insert(slots[i].tuple);
        if (!visit(cand)) return;
    }
}

}  // namespace

TupleSet oracle_eval(const Spec& spec, const Expr& e, const Instance& pre, const Instance& post, const Environment& env) {
    Evaluator ev(spec, pre, post, env);
    return ev.expr(e, pre);
}

bool satisfies(const Spec& spec, const Formula& f, const Instance& pre, const Instance& post, const Environment& env) {
    Evaluator ev(spec, pre, post, env);
    return ev.formula(f);
}

std::optional<std::string> violated_fact(const Spec& spec, const Instance& inst) {
    for (const auto& f : spec.all_facts())
        if (!satisfies(spec, *f.body, inst, inst, {})) return f.name.empty() ? std::string("<fact>") : f.name;
    return std::nullopt;
}

bool facts_hold(const Spec& spec, const Instance& inst) {
    return !violated_fact(spec, inst).has_value();
}

bool satisfies_predicate(const Spec& spec, const Predicate& p, const Instance& pre, const Instance& post,
                         const Environment& env) {
    return satisfies(spec, *p.body, pre, post, with_states(spec, p, pre, post, env)) && facts_hold(spec, post);
}

std::vector<Instance> enumerate_poststates(const Spec& spec, const Predicate& p, const Instance& pre,
                                           const Environment& env, const OracleConfig& cfg) {
    std::vector<Instance> out;
    enumerate(spec, p, pre, cfg, [&](const Instance& cand) {
        if (satisfies_predicate(spec, p, pre, cand, env)) out.push_back(cand);
        return true;
    });
    return out;
}

std::optional<Instance> find_poststate(const Spec& spec, const Predicate& p, const Instance& pre,
                                       const Environment& env, const OracleConfig& cfg) {
    std::optional<Instance> found;
    enumerate(spec, p, pre, cfg, [&](const Instance& cand) {
        if (!satisfies_predicate(spec, p, pre, cand, env)) return true;
        found = cand;
        return false;
    });
    return found;
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Ok:
            return "OK";
        case Verdict::SoundViolation:
            return "SOUND-VIOLATION";
        case Verdict::CompleteViolation:
            return "COMPLETE-VIOLATION";
    }
    return "?";
}

Verdict oracle_check(const Spec& spec, const Predicate& p, const Instance& pre, const Environment& env,
                     const std::optional<Instance>& post, const OracleConfig& cfg) {
    if (post) return satisfies_predicate(spec, p, pre, *post, env) ? Verdict::Ok : Verdict::SoundViolation;
    return find_poststate(spec, p, pre, env, cfg) ? Verdict::CompleteViolation : Verdict::Ok;
}

}  // namespace specdb
