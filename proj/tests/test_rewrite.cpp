#include <doctest.h>

#include <map>
#include <set>

#include "support.hpp"

using namespace qpa;
using namespace qpa::testing;

TEST_SUITE_BEGIN("rewrite");

namespace {

TermPtr C(const ActionLabel& l) { return Term::constant(l); }

std::multiset<std::string> summand_multiset(const TermPtr& t) {
  std::vector<TermPtr> summands;
  flatten_choice(t, summands);
  std::multiset<std::string> out;
  for (const auto& s : summands) out.insert(render(s));
  return out;
}

}  // namespace

TEST_CASE("ac_canonical flattens and sorts, keeping duplicates") {
  TermPtr nu = C(lbl_a()), mu = C(lbl_b());
  TermPtr t = Term::choice(Term::choice(nu, mu), nu);
  TermPtr c = ac_canonical(t);
  std::vector<TermPtr> summands;
  flatten_choice(c, summands);
  REQUIRE(summands.size() == 3);
  CHECK(render(summands[0]) == "a");
  CHECK(render(summands[1]) == "a");
  CHECK(render(summands[2]) == "b");
  CHECK(Term::equal(ac_canonical(c), c));
}

TEST_CASE("all parenthesizations of a summand multiset share one canonical form") {
  Rng rng(79);
  for (int i = 0; i < 40; ++i) {
    TermPtr t = random_closed_term(rng, 4);
    TermPtr shuffled = ac_shuffle(rng, t);
    // Oracle: identical summand multisets at every level is implied by
    // comparing the canonical renders.
    CHECK(render(ac_canonical(t)) == render(ac_canonical(shuffled)));
    CHECK(summand_multiset(ac_canonical(t)) == summand_multiset(ac_canonical(shuffled)));
    CHECK(ac_equal(t, shuffled));
  }
}

TEST_CASE("shadow prefixes rewrite away") {
  Model m = harness_model();
  TermPtr x = Term::seq(C(ActionLabel::shadow("M")), C(lbl_a()));
  auto s = rewrite_step(x, m);
  REQUIRE(s.has_value());
  CHECK(s->rule == "SC2");
  CHECK(Term::equal(s->next, C(lbl_a())));
}

TEST_CASE("matched entanglement atoms collapse to the operation") {
  Model m = harness_model();
  TermPtr t = Term::ent_merge(C(lbl_M()), C(ActionLabel::shadow("M")));
  auto s = rewrite_step(t, m);
  REQUIRE(s.has_value());
  CHECK(s->rule == "QEM11");
  CHECK(Term::equal(s->next, C(lbl_M())));
}

TEST_CASE("deadlock absorbs the entanglement merge") {
  Model m = harness_model();
  TermPtr t = Term::ent_merge(Term::deadlock(), C(lbl_a()));
  auto s = rewrite_step(t, m);
  REQUIRE(s.has_value());
  CHECK(s->rule == "QEM21");
  CHECK(s->next->kind() == TermKind::Deadlock);
}

TEST_CASE("mismatched entanglement atoms rewrite to deadlock") {
  Model m = harness_model();
  auto s = rewrite_step(Term::ent_merge(C(lbl_M()), C(lbl_N())), m);
  REQUIRE(s.has_value());
  CHECK(s->rule == "QEM11d");
  CHECK(s->next->kind() == TermKind::Deadlock);
}

TEST_CASE("normal form of a matched guarded pair is basic") {
  Model m = harness_model();
  Rng rng(83);
  for (int i = 0; i < 20; ++i) {
    TermPtr x = random_basic_term(rng, 3);
    TermPtr y = random_basic_term(rng, 3);
    TermPtr t = Term::ent_merge(Term::seq(C(lbl_M()), x),
                                Term::seq(C(ActionLabel::shadow("M")), y));
    auto res = normal_form(t, m);
    REQUIRE_FALSE(res.trace.empty());
    CHECK(res.trace.front() == "QEM17");
    CHECK(is_basic(res.nf));
  }
}

TEST_CASE("basic terms are already normal") {
  Model m = harness_model();
  TermPtr t = Term::seq(C(lbl_a()), Term::choice(C(lbl_b()), C(lbl_M())));
  auto res = normal_form(t, m);
  CHECK(res.trace.empty());
  CHECK(Term::equal(res.nf, ac_canonical(t)));
}

TEST_CASE("parallel classical actions expand to both orders plus the communication") {
  // Worked by hand: QM1 splits a || b; QLM2 turns the left merges into
  // prefixes; QCM5 yields the communication c; a >< b deadlocks and the
  // deadlock summand is absorbed. Summands: {a.b, b.a, c}.
  Model m = harness_model();
  auto res = normal_form(Term::merge(C(lbl_a()), C(lbl_b())), m);
  std::multiset<std::string> expect{"a . b", "b . a", "c"};
  CHECK(summand_multiset(res.nf) == expect);
  CHECK(is_basic(res.nf));
}

TEST_CASE("weight oracle values") {
  TermPtr u = C(lbl_M()), w = C(lbl_N());
  CHECK(weight(u) == 2);
  CHECK(weight(C(ActionLabel::shadow("M"))) == 2);
  CHECK(weight(Term::seq(u, w)) == 8);
  CHECK(weight(Term::merge(u, w)) == 65);
  CHECK(weight(Term::left_merge(u, w)) == 16);
  CHECK(weight(Term::comm_merge(u, w)) == 16);
  CHECK(weight(Term::ent_merge(u, w)) == 16);
  CHECK(weight(Term::choice(u, w)) == 4);
}

TEST_CASE("weight is invariant under AC reshuffling") {
  Rng rng(89);
  for (int i = 0; i < 40; ++i) {
    TermPtr t = random_closed_term(rng, 4);
    CHECK(weight(t) == weight(ac_shuffle(rng, t)));
    CHECK(weight(t) == weight(ac_canonical(t)));
  }
}

TEST_CASE("every rewrite step except QLM3 strictly decreases the weight") {
  // QLM3 ascends by exactly 4 under the published weight table; the
  // acceptance suite reports that separately. All other rules descend.
  Model m = harness_model();
  Rng rng(97);
  int steps_checked = 0, qlm3_seen = 0;
  for (int i = 0; i < 300; ++i) {
    TermPtr cur = random_closed_term(rng, 4);
    for (int k = 0; k < 200; ++k) {
      auto s = rewrite_step(cur, m);
      if (!s) break;
      Weight before = weight(ac_canonical(cur));
      Weight after = weight(s->next);
      if (s->rule == "QLM3") {
        // Ascends by 4 at the redex; enclosing contexts amplify the delta.
        ++qlm3_seen;
        CHECK(after > before);
      } else {
        CHECK(after < before);
      }
      ++steps_checked;
      cur = s->next;
    }
  }
  CHECK(steps_checked > 500);
  CHECK(qlm3_seen > 0);
}

TEST_CASE("normal forms contain no merge operators or shadow redexes") {
  Model m = harness_model();
  Rng rng(101);
  for (int i = 0; i < 150; ++i) {
    TermPtr t = random_closed_term(rng, 4);
    auto res = normal_form(t, m);
    // No further rule applies, in particular no merge survives.
    CHECK_FALSE(rewrite_step(res.nf, m).has_value());
    std::function<bool(const TermPtr&)> no_merge = [&](const TermPtr& u) {
      switch (u->kind()) {
        case TermKind::Merge:
        case TermKind::LeftMerge:
        case TermKind::CommMerge:
        case TermKind::EntMerge:
          return false;
        case TermKind::Choice:
        case TermKind::Seq:
          return no_merge(u->left()) && no_merge(u->right());
        default:
          return true;
      }
    };
    CHECK(no_merge(res.nf));
  }
}

TEST_CASE("shadow-free inputs normalize to basic terms") {
  Model m = harness_model();
  Rng rng(103);
  for (int i = 0; i < 150; ++i) {
    TermPtr t = random_term(rng, 4, basic_atoms(), true);  // merges, no shadows
    auto res = normal_form(t, m);
    CHECK(is_basic(res.nf));
    CHECK_FALSE(contains_shadow(res.nf));
  }
}

TEST_CASE("rule soundness: each directed rule preserves strong bisimilarity") {
  // SC1-SC3 are excluded here: a shadow constant has an observable
  // transition, so dropping it is not sound for the labelled semantics.
  // The acceptance suite exercises them and documents the failure.
  Model m = harness_model();
  Rng rng(107);
  for (const auto& rule : rule_set()) {
    if (rule.id == "SC1" || rule.id == "SC2" || rule.id == "SC3") continue;
    for (int i = 0; i < 12; ++i) {
      std::map<std::string, TermPtr> vars;
      auto var_fn = [&](const std::string& v) {
        auto it = vars.find(v);
        if (it == vars.end()) it = vars.emplace(v, random_basic_term(rng, 3)).first;
        return it->second;
      };
      ActionLabel op = (i % 2 == 0) ? lbl_M() : lbl_N();
      // Any-constant metavariables: draw from the full atom alphabet.
      std::vector<ActionLabel> consts{lbl_a(), lbl_b(), lbl_M(), lbl_N(),
                                      ActionLabel::shadow("M"), ActionLabel::tau()};
      ActionLabel ca = consts[i % consts.size()];
      ActionLabel cb = consts[(i + 3) % consts.size()];
      TermPtr lhs = instantiate_pattern(rule.lhs, var_fn, op, ca, cb, m);
      TermPtr rhs = instantiate_pattern(rule.rhs, var_fn, op, ca, cb, m);
      // Respect the rule guard; skip instantiations it does not cover.
      auto step = rewrite_step(lhs, m);
      if (!step || step->rule != rule.id) continue;
      DensityMatrix rho = random_state(rng, {"q1", "q2"});
      std::string msg = "rule " + rule.id + ": " + render(lhs) + "  vs  " + render(step->next);
      CHECK_MESSAGE(check_strong(m, lhs, step->next, rho).related(), msg);
      (void)rhs;
    }
  }
}

TEST_CASE("rewriting rejects operators outside the system") {
  Model m = harness_model();
  TermPtr t = Term::encapsulate({"a"}, C(lbl_a()));
  CHECK_THROWS_AS((void)rewrite_step(t, m), std::invalid_argument);
  CHECK_THROWS_AS((void)normal_form(Term::abstraction({"a"}, C(lbl_a())), m),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)rewrite_step(Term::pattern_var("x"), m), std::invalid_argument);
  CHECK_THROWS_AS((void)weight(Term::pattern_var("x")), std::invalid_argument);
}

TEST_CASE("an exhausted step budget is an error, not a wrong result") {
  Model m = harness_model();
  TermPtr t = Term::merge(C(lbl_a()), C(lbl_b()));  // needs several steps
  CHECK_THROWS_AS((void)normal_form(t, m, 2), std::runtime_error);
  CHECK_NOTHROW((void)normal_form(t, m));
}

TEST_CASE("rule table sanity: ids unique, variables of rhs occur in lhs") {
  std::set<std::string> ids;
  for (const auto& rule : rule_set()) {
    CHECK(ids.insert(rule.id).second);
    CHECK(rule.lhs->kind() != TermKind::PatternVar);  // lhs is not a single variable
    std::function<void(const TermPtr&, std::set<std::string>&)> vars =
        [&](const TermPtr& t, std::set<std::string>& out) {
          if (t->kind() == TermKind::PatternVar) out.insert(t->var());
          else if (t->is_binary()) {
            vars(t->left(), out);
            vars(t->right(), out);
          }
        };
    std::set<std::string> lv, rv;
    vars(rule.lhs, lv);
    vars(rule.rhs, rv);
    for (const auto& v : rv) CHECK(lv.count(v) == 1);
  }
}

TEST_SUITE_END();
