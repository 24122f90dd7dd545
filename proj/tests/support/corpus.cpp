#include "corpus.hpp"

#include "specdb/check.hpp"
#include "specdb/oracle.hpp"
#include "specdb/parser.hpp"

#include <algorithm>
#include <stdexcept>

namespace specdb::testing {

namespace {

const std::vector<std::pair<std::string, std::string>> kFieldPool = {
    {"r", "A"}, {"q", "AB"}, {"e", "AA"}, {"k", "B"}};

std::string field_decl(const std::string& name, const std::string& type) {
    if (name == "r") return "r : set A";
    if (name == "q") return "q : A -> B";
    if (name == "e") return "e : A -> A";
    if (name == "k") return "k : lone B";
    throw std::logic_error("unknown field " + name + " of type " + type);
}

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

}  // namespace

Generator::Generator(std::uint64_t seed, GenOptions opts) : rng_(seed), opts_(opts) {}

bool Generator::coin(double p) { return std::bernoulli_distribution(p)(rng_); }

std::size_t Generator::pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

std::string Generator::fresh() { return "v" + std::to_string(++fresh_); }

std::string Generator::leaf(const std::string& type, Scope& sc) {
    std::vector<std::string> options;
    auto state_read = [&](const std::string& f) {
        if (sc.post.empty()) return "(" + sc.pre + "." + f + ")";
        return "(" + (coin(0.5) ? sc.pre : sc.post) + "." + f + ")";
    };
    for (const auto& [name, ftype] : fields_)
        if (ftype == type) options.push_back(state_read(name));
    if (type.size() == 1) {
        options.push_back(type);
        for (const auto& v : type == "A" ? sc.a_vars : sc.b_vars) options.push_back(v);
    } else {
        if (type == "AB") options.push_back("link");
        options.push_back("(" + leaf(type.substr(0, 1), sc) + " -> " + leaf(type.substr(1), sc) + ")");
    }
    return options[pick(options.size())];
}

std::string Generator::expr(const std::string& type, int depth, Scope& sc) {
    if (depth <= 0 || coin(0.3)) return leaf(type, sc);
    const bool binary = type.size() == 2;
    std::vector<int> ops = {0, 1, 2, 3};  // union, intersect, diff, join
    if (binary) {
        ops.push_back(4);  // product
        ops.push_back(5);  // converse
        if (opts_.closure && type[0] == type[1]) ops.push_back(6);
    }
    const char mid = coin(0.5) ? 'A' : 'B';
    switch (ops[pick(ops.size())]) {
        case 0:
            return "(" + expr(type, depth - 1, sc) + " + " + expr(type, depth - 1, sc) + ")";
        case 1:
            return "(" + expr(type, depth - 1, sc) + " & " + expr(type, depth - 1, sc) + ")";
        case 2:
            return "(" + expr(type, depth - 1, sc) + " - " + expr(type, depth - 1, sc) + ")";
        case 3: {
            std::string l, r;
            if (binary) {
                l = expr(type.substr(0, 1) + mid, depth - 1, sc);
                r = expr(std::string(1, mid) + type.substr(1), depth - 1, sc);
            } else if (coin(0.5)) {
                l = expr(std::string(1, mid), depth - 1, sc);
                r = expr(std::string(1, mid) + type, depth - 1, sc);
            } else {
                l = expr(type + mid, depth - 1, sc);
                r = expr(std::string(1, mid), depth - 1, sc);
            }
            // box join r[l] means l.r
            if (coin(0.2)) return "(" + r + ")[" + l + "]";
            return "(" + l + "." + r + ")";
        }
        case 4:
            return "(" + expr(type.substr(0, 1), depth - 1, sc) + " -> " + expr(type.substr(1), depth - 1, sc) + ")";
        case 5: {
            std::string rev{type[1], type[0]};
            return "~(" + expr(rev, depth - 1, sc) + ")";
        }
        default:
            return "^(" + expr(type, depth - 1, sc) + ")";
    }
}

std::string Generator::formula(int depth, Scope& sc) {
    static const std::vector<std::string> types = {"A", "B", "AA", "AB"};
    int choice = static_cast<int>(pick(depth <= 0 ? 3 : (opts_.quantifiers ? 8 : 6)));
    const int ed = std::max(1, opts_.depth - 1);
    switch (choice) {
        case 0:
        case 1: {
            const std::string& t = types[pick(types.size())];
            std::string l = expr(t, ed, sc);
            std::string r = coin(0.15) ? std::string("none") : expr(t, ed, sc);
            static const char* const in_ops[] = {" in ", " not in "};
            static const char* const eq_ops[] = {" = ", " != "};
            const bool neg = coin(0.25);
            return l + (choice == 0 ? in_ops[neg] : eq_ops[neg]) + r;
        }
        case 2: {
            const std::string& t = types[pick(types.size())];
            return expr(t, ed, sc) + " in " + expr(t, ed, sc);
        }
        case 3:
            return "not (" + formula(depth - 1, sc) + ")";
        case 4:
            return "(" + formula(depth - 1, sc) + " and " + formula(depth - 1, sc) + ")";
        case 5: {
            const bool implies = coin(0.3);
            return "(" + formula(depth - 1, sc) + (implies ? " implies " : " or ") + formula(depth - 1, sc) + ")";
        }
        default: {
            const bool all = choice == 6;
            const bool on_a = coin(0.6);
            std::string v = fresh();
            std::string bound = on_a ? "A" : "B";
            if (coin(0.3)) bound = expr(on_a ? "A" : "B", 1, sc);
            auto& vars = on_a ? sc.a_vars : sc.b_vars;
            vars.push_back(v);
            std::string body = formula(depth - 1, sc);
            vars.pop_back();
            return std::string("(") + (all ? "all " : "some ") + v + " : " + bound + " | " + body + ")";
        }
    }
}

std::string Generator::conjunct(Scope& sc) {
    if (coin(0.45)) {
        const auto& [name, type] = fields_[pick(fields_.size())];
        std::string pre = "(" + sc.pre + "." + name + ")";
        std::string post = "(" + sc.post + "." + name + ")";
        switch (pick(4)) {
            case 0:
                return post + " = " + pre + " + " + expr(type, 1, sc);
            case 1:
                return post + " = " + pre + " - " + expr(type, 1, sc);
            case 2:
                return expr(type, 1, sc) + " in " + post;
            default:
                return post + " = " + pre;
        }
    }
    return formula(opts_.depth, sc);
}

std::string Generator::formula_text(int depth) {
    Scope sc{"s", "s'", {"x", "x2"}, {"y"}};
    return formula(depth, sc);
}

std::string Generator::spec_text() {
    fresh_ = 0;
    fields_.clear();
    std::vector<std::pair<std::string, std::string>> pool = kFieldPool;
    std::shuffle(pool.begin(), pool.end(), rng_);
    const std::size_t n = 1 + pick(3);
    fields_.assign(pool.begin(), pool.begin() + n);

    std::string text = "sig A { link : set B }\nsig B {}\nsig S {";
    for (std::size_t i = 0; i < fields_.size(); ++i)
        text += std::string(i ? "," : "") + "\n  " + field_decl(fields_[i].first, fields_[i].second);
    text += " }\n\npred P (s, s' : S, x, x2 : A, y : B) {\n";

    Scope sc{"s", "s'", {"x", "x2"}, {"y"}};
    const std::size_t parts = 1 + pick(static_cast<std::size_t>(opts_.conjuncts));
    for (std::size_t i = 0; i < parts; ++i) text += (i ? " and\n  " : "  ") + conjunct(sc);
    if (opts_.need_existential) {
        bool on_a = coin(0.6);
        std::string v = fresh();
        auto& vars = on_a ? sc.a_vars : sc.b_vars;
        vars.push_back(v);
        std::string g = formula(std::max(1, opts_.depth - 1), sc);
        vars.pop_back();
        if (coin(0.4)) {
            // under a universal
            std::string u = fresh();
            sc.a_vars.push_back(u);
            vars.push_back(v);
            g = formula(std::max(1, opts_.depth - 1), sc);
            vars.pop_back();
            sc.a_vars.pop_back();
            text += " and\n  (all " + u + " : A | some " + v + " : " + (on_a ? "A" : "B") + " | " + g + ")";
        } else {
            text += " and\n  (some " + v + " : " + (on_a ? "A" : "B") + " | " + g + ")";
        }
    }
    text += " }\n";

    if (opts_.facts && coin(0.5)) {
        Scope fs{"t", "", {}, {}};
        text += "\nfact F {\n  all t : S | " + formula(2, fs) + " }\n";
    }
    return text;
}

Case Generator::next() {
    for (int attempt = 0; attempt < 10000; ++attempt) {
        Case c;
        c.seed = rng_();
        c.text = spec_text();
        try {
            c.spec = check_spec(parse_spec(c.text, "<generated>"));
        } catch (const SpecError&) {
            continue;
        }
        c.pred = c.spec.find_pred("P");
        const std::size_t a = 1 + pick(opts_.max_a);
        const std::size_t b = 1 + pick(opts_.max_b);
        bool found = false;
        for (int i = 0; i < 40 && !found; ++i) {
            c.pre = random_instance(c.spec, a, b, i < 20 ? 0.4 : 0.15, rng_);
            found = facts_hold(c.spec, c.pre);
        }
        if (!found) continue;
        if (oracle_slots(c.spec, *c.pred, c.pre) > opts_.max_slots) continue;
        const auto& as = c.pre.atoms_of("A");
        const auto& bs = c.pre.atoms_of("B");
        c.env["x"] = as[pick(as.size())];
        c.env["x2"] = as[pick(as.size())];
        c.env["y"] = bs[pick(bs.size())];
        return c;
    }
    throw std::runtime_error("generator could not produce a well-formed case");
}

Instance random_instance(const Spec& spec, std::size_t a, std::size_t b, double density, std::mt19937_64& rng) {
    Instance inst = Instance::empty(Schema::from_spec(spec));
    for (std::size_t i = 0; i < a; ++i) inst.add_atom("A", "a" + std::to_string(i));
    for (std::size_t i = 0; i < b; ++i) inst.add_atom("B", "b" + std::to_string(i));
    inst.add_atom(spec.state_sig, "s0");
    std::bernoulli_distribution keep(density);
    for (const auto& sig : spec.signatures) {
        for (const auto& field : sig.fields) {
            std::vector<Tuple> tuples{{}};
            for (const auto& col : field.columns) {
                std::vector<Tuple> next;
                for (const auto& t : tuples)
                    for (AtomId x : inst.atoms_of(col)) {
                        Tuple u = t;
                        u.push_back(x);
                        next.push_back(std::move(u));
                    }
                tuples = std::move(next);
            }
            for (auto& t : tuples)
                if (keep(rng)) inst.rel(field.name).insert(std::move(t));
        }
    }
    return inst;
}

std::size_t oracle_slots(const Spec& spec, const Predicate& p, const Instance& inst) {
    std::set<std::string> names;
    mentioned(*p.body, names);
    for (const auto& f : spec.all_facts()) mentioned(*f.body, names);
    std::size_t total = 0;
    for (const auto& field : spec.find_sig(spec.state_sig)->fields) {
        if (!names.count(field.name)) continue;
        std::size_t n = 1;
        for (std::size_t c = 1; c < field.columns.size(); ++c) n *= inst.atoms_of(field.columns[c]).size();
        total += n;
    }
    return total;
}

namespace {

const char* expr_kind_name(ExprKind k) {
    switch (k) {
        case ExprKind::Rel: return "Rel";
        case ExprKind::Var: return "Var";
        case ExprKind::None: return "None";
        case ExprKind::Union: return "Union";
        case ExprKind::Intersect: return "Intersect";
        case ExprKind::Diff: return "Diff";
        case ExprKind::Join: return "Join";
        case ExprKind::Product: return "Product";
        case ExprKind::Converse: return "Converse";
        case ExprKind::Closure: return "Closure";
    }
    return "?";
}

const char* formula_kind_name(FormulaKind k) {
    switch (k) {
        case FormulaKind::In: return "In";
        case FormulaKind::Eq: return "Eq";
        case FormulaKind::Not: return "Not";
        case FormulaKind::And: return "And";
        case FormulaKind::Or: return "Or";
        case FormulaKind::Forall: return "Forall";
        case FormulaKind::Exists: return "Exists";
    }
    return "?";
}

void cover(const Expr& e, Coverage& c) {
    c.exprs.insert(expr_kind_name(e.kind));
    if (e.lhs) cover(*e.lhs, c);
    if (e.rhs) cover(*e.rhs, c);
}

}  // namespace

void cover(const Formula& f, Coverage& c) {
    c.formulas.insert(formula_kind_name(f.kind));
    if (f.lhs) cover(*f.lhs, c);
    if (f.rhs) cover(*f.rhs, c);
    if (f.left) cover(*f.left, c);
    if (f.right) cover(*f.right, c);
}

}  // namespace specdb::testing
