#include "specdb/store.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace specdb {

Schema Schema::from_spec(const Spec& spec, const std::vector<RelationDecl>& extra) {
    Schema s;
    s.state_sig = spec.state_sig;
    for (const auto& sig : spec.signatures) s.sigs.push_back(sig.name);
    for (const auto& sig : spec.signatures)
        for (const auto& f : sig.fields)
            s.relations.push_back({f.name, f.columns, !spec.state_sig.empty() && sig.name == spec.state_sig});
    s.relations.insert(s.relations.end(), extra.begin(), extra.end());
    return s;
}

const RelationDecl* Schema::find(const std::string& name) const {
    for (const auto& r : relations)
        if (r.name == name) return &r;
    return nullptr;
}

bool Schema::is_sig(const std::string& name) const {
    return std::find(sigs.begin(), sigs.end(), name) != sigs.end();
}

Instance Instance::empty(const Schema& schema) {
    Instance inst;
    inst.state_sig = schema.state_sig;
    for (const auto& s : schema.sigs) inst.universe[s];
    for (const auto& r : schema.relations) inst.relations[r.name];
    return inst;
}

AtomId Instance::add_atom(const std::string& sig, const std::string& label) {
    auto it = universe.find(sig);
    if (it == universe.end()) throw StoreError("unknown signature `" + sig + "`");
    auto id = static_cast<AtomId>(atoms.size());
    atoms.push_back({id, sig, label});
    it->second.push_back(id);
    return id;
}

const std::vector<AtomId>& Instance::atoms_of(const std::string& sig) const {
    auto it = universe.find(sig);
    if (it == universe.end()) throw StoreError("unknown signature `" + sig + "`");
    return it->second;
}

AtomId Instance::state_atom() const {
    const auto& states = atoms_of(state_sig);
    if (states.size() != 1)
        throw StoreError("expected exactly one " + state_sig + " atom, found " + std::to_string(states.size()));
    return states.front();
}

const TupleSet& Instance::rel(const std::string& name) const {
    auto it = relations.find(name);
    if (it == relations.end()) throw StoreError("unknown relation `" + name + "`");
    return it->second;
}

TupleSet& Instance::rel(const std::string& name) {
    auto it = relations.find(name);
    if (it == relations.end()) throw StoreError("unknown relation `" + name + "`");
    return it->second;
}

TupleSet strip_state(const TupleSet& full, AtomId state) {
    TupleSet out;
    for (auto it = full.lower_bound(Tuple{state}); it != full.end() && (*it)[0] == state; ++it)
        out.emplace_hint(out.end(), it->begin() + 1, it->end());
    return out;
}

std::string format_tuple(const Instance& inst, const Tuple& t) {
    std::string out = "(";
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) out += ", ";
        out += t[i] < inst.atoms.size() ? inst.atoms[t[i]].label : "#" + std::to_string(t[i]);
    }
    return out + ")";
}

// ---------------------------------------------------------------------------

TupleSet join(const TupleSet& a, const TupleSet& b) {
    std::map<AtomId, std::vector<const Tuple*>> by_head;
    for (const auto& t : b) by_head[t.front()].push_back(&t);
    TupleSet out;
    for (const auto& l : a) {
        auto it = by_head.find(l.back());
        if (it == by_head.end()) continue;
        for (const Tuple* r : it->second) {
            Tuple t(l.begin(), l.end() - 1);
            t.insert(t.end(), r->begin() + 1, r->end());
            out.insert(std::move(t));
        }
    }
    return out;
}

TupleSet product(const TupleSet& a, const TupleSet& b) {
    TupleSet out;
    for (const auto& l : a)
        for (const auto& r : b) {
            Tuple t = l;
            t.insert(t.end(), r.begin(), r.end());
            out.insert(std::move(t));
        }
    return out;
}

TupleSet transpose(const TupleSet& a) {
    TupleSet out;
    for (const auto& t : a) out.insert(Tuple(t.rbegin(), t.rend()));
    return out;
}

TupleSet transitive_closure(const TupleSet& a) {
    TupleSet cur = a;
    for (;;) {
        TupleSet next = cur;
        for (auto& t : join(cur, cur)) next.insert(t);
        if (next.size() == cur.size()) return cur;
        cur = std::move(next);
    }
}

namespace {

TupleSet set_op(ExprKind k, const TupleSet& a, const TupleSet& b) {
    TupleSet out;
    switch (k) {
        case ExprKind::Union:
            std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
            break;
        case ExprKind::Intersect:
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
            break;
        default:
            std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
            break;
    }
    return out;
}

}  // namespace

TupleSet eval(const Expr& e, const Instance& pre, const Instance& post, const Environment& env) {
    switch (e.kind) {
        case ExprKind::Rel: {
            if (e.tag == RelTag::Post) return strip_state(post.rel(e.name), post.state_atom());
            if (e.tag == RelTag::Pre) return strip_state(pre.rel(e.name), pre.state_atom());
            auto u = pre.universe.find(e.name);
            if (u != pre.universe.end()) {
                TupleSet out;
                for (AtomId a : u->second) out.insert(Tuple{a});
                return out;
            }
            return pre.rel(e.name);
        }
        case ExprKind::Var: {
            auto it = env.find(e.name);
            if (it == env.end()) throw StoreError("unbound variable `" + e.name + "`");
            return {Tuple{it->second}};
        }
        case ExprKind::None:
            return {};
        case ExprKind::Union:
        case ExprKind::Intersect:
        case ExprKind::Diff:
            return set_op(e.kind, eval(*e.lhs, pre, post, env), eval(*e.rhs, pre, post, env));
        case ExprKind::Join:
            return join(eval(*e.lhs, pre, post, env), eval(*e.rhs, pre, post, env));
        case ExprKind::Product:
            return product(eval(*e.lhs, pre, post, env), eval(*e.rhs, pre, post, env));
        case ExprKind::Converse:
            return transpose(eval(*e.lhs, pre, post, env));
        case ExprKind::Closure:
            return transitive_closure(eval(*e.lhs, pre, post, env));
    }
    return {};
}

bool contains(const Expr& e, const Tuple& t, const Instance& pre, const Instance& post, const Environment& env) {
    switch (e.kind) {
        case ExprKind::Rel: {
            if (e.tag != RelTag::Plain) {
                const Instance& inst = e.tag == RelTag::Post ? post : pre;
                Tuple full{inst.state_atom()};
                full.insert(full.end(), t.begin(), t.end());
                return inst.rel(e.name).count(full) > 0;
            }
            auto u = pre.universe.find(e.name);
            if (u != pre.universe.end())
                return t.size() == 1 && t[0] < pre.atoms.size() && pre.atoms[t[0]].sig == e.name;
            return pre.rel(e.name).count(t) > 0;
        }
        case ExprKind::Var: {
            auto it = env.find(e.name);
            return it != env.end() && t.size() == 1 && t[0] == it->second;
        }
        case ExprKind::None:
            return false;
        case ExprKind::Union:
            return contains(*e.lhs, t, pre, post, env) || contains(*e.rhs, t, pre, post, env);
        case ExprKind::Intersect:
            return contains(*e.lhs, t, pre, post, env) && contains(*e.rhs, t, pre, post, env);
        case ExprKind::Diff:
            return contains(*e.lhs, t, pre, post, env) && !contains(*e.rhs, t, pre, post, env);
        case ExprKind::Product: {
            auto n = static_cast<std::ptrdiff_t>(e.lhs->arity());
            return contains(*e.lhs, Tuple(t.begin(), t.begin() + n), pre, post, env) &&
                   contains(*e.rhs, Tuple(t.begin() + n, t.end()), pre, post, env);
        }
        case ExprKind::Converse:
            return contains(*e.lhs, Tuple(t.rbegin(), t.rend()), pre, post, env);
        default:
            return eval(e, pre, post, env).count(t) > 0;
    }
}

// ---------------------------------------------------------------------------

bool UpdateLog::conflicts(const std::string& rel, const Tuple& t, Action action) const {
    auto it = index_.find({rel, t});
    return it != index_.end() && it->second.first != action;
}

bool UpdateLog::recorded(const std::string& rel, const Tuple& t, Action action) const {
    auto it = index_.find({rel, t});
    return it != index_.end() && it->second.first == action;
}

void UpdateLog::append(Update u) {
    if (conflicts(u.rel, u.tuple, u.action))
        throw StoreError("conflicting update on `" + u.rel + "`");
    auto& slot = index_[{u.rel, u.tuple}];
    slot.first = u.action;
    ++slot.second;
    entries_.push_back(std::move(u));
}

void UpdateLog::truncate(std::size_t n) {
    while (entries_.size() > n) {
        const Update& u = entries_.back();
        auto it = index_.find({u.rel, u.tuple});
        if (--it->second.second == 0) index_.erase(it);
        entries_.pop_back();
    }
}

void apply(Instance& inst, const Update& u) {
    TupleSet& r = inst.rel(u.rel);
    if (u.action == Action::Insert)
        r.insert(u.tuple);
    else
        r.erase(u.tuple);
}

void replay(Instance& inst, const UpdateLog& log) {
    for (const auto& u : log.entries()) apply(inst, u);
}

UpdateLog diff(const Instance& pre, const Instance& post) {
    if (pre.atoms != post.atoms) throw StoreError("diff: instances have different universes");
    UpdateLog log;
    for (const auto& [name, before] : pre.relations) {
        const TupleSet& after = post.rel(name);
        for (const auto& t : before)
            if (!after.count(t)) log.append({name, t, Action::Delete});
        for (const auto& t : after)
            if (!before.count(t)) log.append({name, t, Action::Insert});
    }
    return log;
}

bool is_approximation(const Instance& j, const Instance& i, const Instance& iprime) {
    for (const auto& [name, ti] : i.relations) {
        const TupleSet& tj = j.rel(name);
        const TupleSet& tp = iprime.rel(name);
        for (const auto& t : ti)
            if (!tj.count(t) && tp.count(t)) return false;  // I - J must lie in I - I'
        for (const auto& t : tj)
            if (!ti.count(t) && !tp.count(t)) return false;  // J - I must lie in I' - I
    }
    return true;
}

// ---------------------------------------------------------------------------

std::string snapshot_text(const Instance& inst) {
    std::ostringstream out;
    out << "SPECDB 1\n";
    for (const auto& a : inst.atoms) out << "atom " << a.sig << " " << a.id << " " << a.label << "\n";
    for (const auto& [name, tuples] : inst.relations) {
        out << "rel " << name << "\n";
        for (const auto& t : tuples) {
            for (std::size_t k = 0; k < t.size(); ++k) out << (k ? "\t" : "") << t[k];
            out << "\n";
        }
    }
    return out.str();
}

Instance parse_snapshot(const std::string& text, const Schema& schema, const std::string& origin) {
    Instance inst = Instance::empty(schema);
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& msg) -> StoreError {
        return StoreError(origin + ":" + std::to_string(lineno) + ": " + msg);
    };
    bool header = false;
    const RelationDecl* current = nullptr;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != "SPECDB 1") throw fail("missing `SPECDB 1` header");
            header = true;
            continue;
        }
        if (line.rfind("atom ", 0) == 0) {
            if (current) throw fail("atom line after relation data");
            std::istringstream ls(line.substr(5));
            std::string sig;
            AtomId id = 0;
            if (!(ls >> sig >> id)) throw fail("malformed atom line");
            std::string label;
            if (ls.peek() == ' ') ls.get();
            std::getline(ls, label);
            if (!schema.is_sig(sig)) throw fail("unknown signature `" + sig + "`");
            if (id != inst.atoms.size()) throw fail("atom ids must be consecutive from 0");
            inst.add_atom(sig, label);
            continue;
        }
        if (line.rfind("rel ", 0) == 0) {
            std::string name = line.substr(4);
            current = schema.find(name);
            if (!current) throw fail("unknown relation `" + name + "`");
            if (!seen.insert(name).second) throw fail("relation `" + name + "` listed twice");
            continue;
        }
        if (!current) throw fail("unexpected line");
        Tuple t;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, '\t')) {
            char* end = nullptr;
            unsigned long v = std::strtoul(cell.c_str(), &end, 10);
            if (cell.empty() || *end != '\0') throw fail("malformed tuple");
            t.push_back(static_cast<AtomId>(v));
        }
        if (t.size() != current->columns.size())
            throw fail("tuple of arity " + std::to_string(t.size()) + " in `" + current->name + "`");
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (t[k] >= inst.atoms.size() || inst.atoms[t[k]].sig != current->columns[k])
                throw fail("atom " + std::to_string(t[k]) + " does not have type " + current->columns[k]);
        }
        inst.relations[current->name].insert(std::move(t));
    }
    if (!header) throw fail("missing `SPECDB 1` header");
    return inst;
}

void snapshot_write(const Instance& inst, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw StoreError("cannot write `" + tmp + "`");
        out << snapshot_text(inst);
        out.flush();
        if (!out) throw StoreError("write to `" + tmp + "` failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw StoreError("cannot replace `" + path + "`");
    }
}

Instance snapshot_read(const std::string& path, const Schema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StoreError("cannot read `" + path + "`");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_snapshot(buf.str(), schema, path);
}

std::string log_text(const UpdateLog& log) {
    std::ostringstream out;
    for (const auto& u : log.entries()) {
        out << (u.action == Action::Insert ? "+ " : "- ") << u.rel;
        for (AtomId a : u.tuple) out << "\t" << a;
        out << "\n";
    }
    return out.str();
}

}  // namespace specdb
