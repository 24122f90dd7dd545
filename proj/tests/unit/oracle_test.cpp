#include "corpus.hpp"
#include "fixtures.hpp"

#include "specdb/check.hpp"
#include "specdb/executor.hpp"
#include "specdb/normalizer.hpp"
#include "specdb/oracle.hpp"
#include "specdb/parser.hpp"
#include "specdb/session.hpp"

#include <gtest/gtest.h>

using namespace specdb;
using namespace specdb::testing;

namespace {

std::vector<std::string> golden_lines() {
    std::vector<std::string> out;
    std::istringstream in(read_text(spec_path("gradebook_session.txt")));
    std::string l;
    while (std::getline(in, l)) out.push_back(l);
    return out;
}

}  // namespace

TEST(Oracle, HarryMegModelSatisfiesEnroll) {
    Spec spec = load("gradebook_literal.spec");
    Instance m = harry_meg_model(spec);
    Environment env{{"c", atom(m, "Course", "c0")}, {"c'", atom(m, "Course", "c1")}, {"sNew", atom(m, "Student", "Meg")}};
    EXPECT_TRUE(satisfies(spec, *spec.find_pred("Enroll")->body, m, m, env));
    EXPECT_TRUE(facts_hold(spec, m));
    env["sNew"] = atom(m, "Student", "Harry");
    EXPECT_FALSE(satisfies(spec, *spec.find_pred("Enroll")->body, m, m, env));
}

TEST(Oracle, HarryMegModelSubmitForPairOnlyDegenerateBinding) {
    Spec spec = load("gradebook_literal.spec");
    Instance m = harry_meg_model(spec);
    const Predicate* p = spec.find_pred("SubmitForPair");
    int bindings = 0;
    std::vector<Environment> holding;
    for (AtomId c : m.atoms_of("Course"))
        for (AtomId c2 : m.atoms_of("Course"))
            for (AtomId s1 : m.atoms_of("Student"))
                for (AtomId s2 : m.atoms_of("Student"))
                    for (AtomId b : m.atoms_of("Submission")) {
                        Environment env{{"c", c}, {"c'", c2}, {"s1", s1}, {"s2", s2}, {"bNew", b}};
                        if (satisfies(spec, *p->body, m, m, env)) holding.push_back(env);
                        ++bindings;
                    }
    EXPECT_EQ(bindings, 16);
    // The only model is the degenerate one where c and c' coincide and the
    // submission is already recorded.
    const AtomId c1 = atom(m, "Course", "c1");
    const AtomId harry = atom(m, "Student", "Harry");
    ASSERT_EQ(holding.size(), 1u);
    EXPECT_EQ(holding[0], (Environment{{"c", c1}, {"c'", c1}, {"s1", harry}, {"s2", harry}, {"bNew", atom(m, "Submission", "hwk1")}}));
}

TEST(Oracle, Tautology) {
    Spec spec = load("gradebook.spec");
    Instance m = harry_meg_model_c1(spec);
    EXPECT_TRUE(satisfies(spec, *parse_formula("none = none"), m, m, {}));
    EXPECT_TRUE(satisfies(spec, *check_formula(spec, parse_formula("Student - Student = none"), {}), m, m, {}));
}

TEST(Oracle, DropEnumerationIncludesOverDeletion) {
    Spec spec = load("gradebook_literal.spec");
    Instance pre = harry_meg_model_c1(spec);
    const AtomId c1 = atom(pre, "Course", "c1");
    const AtomId meg = atom(pre, "Student", "Meg");
    OracleConfig cfg;
    cfg.max_atoms_per_sig = 4;
    auto posts = enumerate_poststates(spec, *spec.find_pred("Drop"), pre, {{"s", meg}}, cfg);
    Instance minimal = pre;
    minimal.rel("roster").erase({c1, meg});
    bool has_minimal = false;
    bool has_emptied = false;
    for (const auto& p : posts) {
        has_minimal |= p == minimal;
        has_emptied |= p.rel("roster").empty();
        EXPECT_EQ(p.rel("roster").count({c1, meg}), 0u);
    }
    EXPECT_TRUE(has_minimal);
    EXPECT_TRUE(has_emptied);
    EXPECT_GT(posts.size(), 2u);
}

TEST(Oracle, UnsatisfiableAndIdentity) {
    Spec spec = check_spec(parse_spec(
        "sig A {}\nsig S { r : set A }\n"
        "pred Never(s, s' : S, x : A) { x in s'.r and x not in s'.r }\n"
        "pred Same(s, s' : S) { s'.r = s.r }"));
    Instance pre = Instance::empty(Schema::from_spec(spec));
    for (int i = 0; i < 3; ++i) pre.add_atom("A", "a" + std::to_string(i));
    const AtomId st = pre.add_atom("S", "s");
    pre.rel("r").insert({st, 1});
    EXPECT_TRUE(enumerate_poststates(spec, *spec.find_pred("Never"), pre, {{"x", 0}}).empty());
    auto same = enumerate_poststates(spec, *spec.find_pred("Same"), pre, {});
    ASSERT_EQ(same.size(), 1u);
    EXPECT_EQ(same[0], pre);
}

TEST(Oracle, LimitsAreEnforced) {
    Spec spec = check_spec(parse_spec("sig A {}\nsig S { r : set A }\npred Same(s, s' : S) { s'.r = s.r }"));
    Instance pre = Instance::empty(Schema::from_spec(spec));
    for (int i = 0; i < 4; ++i) pre.add_atom("A", "a" + std::to_string(i));
    pre.add_atom("S", "s");
    EXPECT_THROW(enumerate_poststates(spec, *spec.find_pred("Same"), pre, {}), OracleError);
    OracleConfig wide;
    wide.max_atoms_per_sig = 4;
    EXPECT_EQ(enumerate_poststates(spec, *spec.find_pred("Same"), pre, {}, wide).size(), 1u);
    wide.max_candidates = 8;
    EXPECT_THROW(enumerate_poststates(spec, *spec.find_pred("Same"), pre, {}, wide), OracleError);
}

TEST(Oracle, GoldenSessionIsOkAtEveryStep) {
    Spec spec = load("gradebook.spec");
    Session s(spec, Session::fresh_instance(spec));
    int checked = 0;
    for (const auto& line : golden_lines()) {
        auto cmd = parse_command(line);
        if (!cmd) continue;
        Instance pre = s.committed();
        CommandResult r = s.execute(*cmd);
        ASSERT_TRUE(r.ok) << line << ": " << r.error;
        auto* inv = std::get_if<InvokePredicate>(&*cmd);
        if (!inv) continue;
        const Predicate* p = spec.find_pred(inv->name);
        Environment env = bind_arguments(spec, *p, pre, inv->args, s.bindings());
        EXPECT_EQ(oracle_check(spec, *p, pre, env, s.committed()), Verdict::Ok) << line;
        ++checked;
    }
    EXPECT_EQ(checked, 4);
}

TEST(Oracle, MutationWithoutFactPrimingIsCaught) {
    Spec spec = load("gradebook.spec");
    Session s(spec, Session::fresh_instance(spec));
    auto lines = golden_lines();
    for (const auto& line : lines) {
        if (line.rfind("AssignGrade", 0) == 0) break;
        ASSERT_TRUE(s.execute_line(line).ok) << line;
    }
    const Instance& pre = s.committed();
    const Predicate* p = spec.find_pred("AssignGrade");
    Environment env{{"s", atom(pre, "Student", "Pete")}, {"b", atom(pre, "Submission", "hwk1")},
                    {"g", atom(pre, "Grade", "A")}};
    NormalizeOptions broken;
    broken.prime_facts = false;
    ExecResult bad = run_predicate(normalize_predicate(spec, *p, broken), env, pre);
    ASSERT_TRUE(bad.ok());
    EXPECT_EQ(oracle_check(spec, *p, pre, env, bad.post), Verdict::SoundViolation);
    ExecResult good = run_predicate(normalize_predicate(spec, *p), env, pre);
    EXPECT_EQ(oracle_check(spec, *p, pre, env, good.post), Verdict::Ok);
    EXPECT_STREQ(verdict_name(Verdict::SoundViolation), "SOUND-VIOLATION");
}

TEST(Oracle, EqualityVariantFailureIsOk) {
    Spec spec = load("gradebook_assign_eq.spec");
    Session s(spec, Session::fresh_instance(spec));
    for (const auto& line : golden_lines()) {
        if (line.rfind("AssignGrade", 0) == 0) break;
        ASSERT_TRUE(s.execute_line(line).ok) << line;
    }
    const Instance& pre = s.committed();
    const Predicate* p = spec.find_pred("AssignGrade");
    Environment env{{"s", atom(pre, "Student", "Pete")}, {"b", atom(pre, "Submission", "hwk1")},
                    {"g", atom(pre, "Grade", "A")}};
    EXPECT_EQ(oracle_check(spec, *p, pre, env, std::nullopt), Verdict::Ok);
    // a failure where a post-state exists is a completeness violation
    Spec ok_spec = load("gradebook.spec");
    EXPECT_EQ(oracle_check(ok_spec, *ok_spec.find_pred("AssignGrade"), pre, env, std::nullopt),
              Verdict::CompleteViolation);
}

TEST(Oracle, FactsAreCheckedOnThePostState) {
    Spec spec = load("gradebook.spec");
    Instance m = harry_meg_model_c1(spec);
    EXPECT_TRUE(facts_hold(spec, m));
    Instance bad = m;
    bad.rel("work").insert({atom(m, "Course", "c1"), atom(m, "Student", "Meg"), atom(m, "Submission", "hwk1")});
    EXPECT_EQ(violated_fact(spec, bad), std::optional<std::string>("SameGradeForPair"));
    Instance orphan = m;
    orphan.rel("roster").erase({atom(m, "Course", "c1"), atom(m, "Student", "Harry")});
    EXPECT_EQ(violated_fact(spec, orphan), std::optional<std::string>("work$domain"));
}
