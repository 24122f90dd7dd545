#include "fixtures.hpp"

#include "specdb/check.hpp"
#include "specdb/parser.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#ifndef SPECDB_SOURCE_DIR
#error "SPECDB_SOURCE_DIR must be defined"
#endif

namespace specdb::testing {

std::string spec_path(const std::string& name) { return std::string(SPECDB_SOURCE_DIR) + "/specs/" + name; }

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Spec load(const std::string& name) { return check_spec(parse_spec(read_text(spec_path(name)), name)); }

AtomId atom(const Instance& inst, const std::string& sig, const std::string& label) {
    for (AtomId a : inst.atoms_of(sig))
        if (inst.atoms[a].label == label) return a;
    throw std::runtime_error("no " + sig + " atom " + label);
}

namespace {

Instance build(const Spec& spec, bool both_courses) {
    Instance m = Instance::empty(Schema::from_spec(spec));
    for (const char* s : {"Harry", "Meg"}) m.add_atom("Student", s);
    m.add_atom("Submission", "hwk1");
    for (const char* g : {"A", "A-", "B+", "B"}) m.add_atom("Grade", g);
    if (both_courses) m.add_atom("Course", "c0");
    m.add_atom("Course", "c1");
    auto at = [&](const char* sig, const char* label) { return atom(m, sig, label); };
    const AtomId c1 = at("Course", "c1");
    const AtomId harry = at("Student", "Harry");
    if (both_courses) m.rel("roster").insert({at("Course", "c0"), harry});
    m.rel("roster").insert({c1, harry});
    m.rel("roster").insert({c1, at("Student", "Meg")});
    m.rel("work").insert({c1, harry, at("Submission", "hwk1")});
    m.rel("gradebook").insert({c1, harry, at("Submission", "hwk1"), at("Grade", "A-")});
    return m;
}

}  // namespace

Instance harry_meg_model(const Spec& gradebook) { return build(gradebook, true); }

Instance harry_meg_model_c1(const Spec& gradebook) { return build(gradebook, false); }

}  // namespace specdb::testing
