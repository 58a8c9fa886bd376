/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "qpa/rewrite.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace qpa {

namespace {

// ---- pattern metavariables -------------------------------------------
// $u       quantum-operation constant (QEM rules)
// $v, $w   classical actions feeding gamma (QCM rules)
// $a, $b   any action constant (QLM2/3 and the mismatch rules)
// $gamma   rhs marker: the communication result of the bound $v, $w

TermPtr pvar(const char* n) { return Term::pattern_var(n); }
TermPtr quantum_meta(const char* n) { return Term::constant(ActionLabel::quantum(n, {})); }
TermPtr shadow_meta(const char* n) { return Term::constant(ActionLabel::shadow(n)); }
TermPtr classical_meta(const char* n) { return Term::constant(ActionLabel::classical(n)); }
TermPtr any_meta(const char* n) {
  ActionLabel l;
  l.kind = LabelKind::Classical;
  l.name = n;
  l.data_args = {"*"};  // distinguishes "any constant" from classical metas
  return Term::constant(l);
}
TermPtr gamma_meta() { return Term::constant(ActionLabel::comm_result("$gamma", {"$v", "$w"})); }

bool is_meta_name(const std::string& s) { return !s.empty() && s[0] == '$'; }

struct Bindings {
  std::map<std::string, TermPtr> terms;
  std::map<std::string, ActionLabel> labels;
};

bool match_label(const ActionLabel& pat, const ActionLabel& got, Bindings& b) {
  // Any-constant metavariable: name $x with data {"*"}.
  if (is_meta_name(pat.name) && pat.kind == LabelKind::Classical && pat.data_args.size() == 1 &&
      pat.data_args[0] == "*") {
    auto it = b.labels.find(pat.name);
    if (it != b.labels.end()) return it->second == got;
    b.labels.emplace(pat.name, got);
    return true;
  }
  if (pat.kind == LabelKind::Shadow && is_meta_name(pat.shadow_of)) {
    if (got.kind != LabelKind::Shadow) return false;
    auto it = b.labels.find(pat.shadow_of);
    if (it != b.labels.end())
      return it->second.kind == LabelKind::QuantumOp && it->second.name == got.shadow_of;
    // Bind the metavariable to a stand-in quantum label carrying the name.
    b.labels.emplace(pat.shadow_of, ActionLabel::quantum(got.shadow_of, {}));
    return true;
  }
  if (is_meta_name(pat.name)) {
    if (pat.kind != got.kind) return false;
    auto it = b.labels.find(pat.name);
    if (it != b.labels.end()) {
      if (pat.kind == LabelKind::QuantumOp) {
        if (it->second.kind != LabelKind::QuantumOp || it->second.name != got.name) return false;
        it->second = got;  // prefer the concrete operation label over a shadow stand-in
        return true;
      }
      return it->second == got;
    }
    b.labels.emplace(pat.name, got);
    return true;
  }
  return pat == got;
}

bool match(const TermPtr& pat, const TermPtr& t, Bindings& b) {
  switch (pat->kind()) {
    case TermKind::PatternVar: {
      auto it = b.terms.find(pat->var());
      if (it != b.terms.end()) return Term::equal(it->second, t);
      b.terms.emplace(pat->var(), t);
      return true;
    }
    case TermKind::Constant:
      return t->kind() == TermKind::Constant && match_label(pat->label(), t->label(), b);
    case TermKind::Deadlock:
      return t->kind() == TermKind::Deadlock;
    default:
      if (pat->kind() != t->kind()) return false;
      return match(pat->left(), t->left(), b) && match(pat->right(), t->right(), b);
  }
}

TermPtr instantiate(const TermPtr& rhs, const Bindings& b, const Model& m, bool& ok) {
  switch (rhs->kind()) {
    case TermKind::PatternVar: {
      auto it = b.terms.find(rhs->var());
      if (it == b.terms.end()) { ok = false; return rhs; }
      return it->second;
    }
    case TermKind::Constant: {
      const ActionLabel& l = rhs->label();
      if (l.name == "$gamma") {
        auto v = b.labels.find("$v");
        auto w = b.labels.find("$w");
        if (v == b.labels.end() || w == b.labels.end()) { ok = false; return rhs; }
        auto res = m.gamma.find(v->second, w->second);
        if (!res) { ok = false; return rhs; }
        return Term::constant(*res);
      }
      if (l.kind == LabelKind::Shadow && is_meta_name(l.shadow_of)) {
        auto it = b.labels.find(l.shadow_of);
        if (it == b.labels.end()) { ok = false; return rhs; }
        return Term::constant(ActionLabel::shadow(it->second.name));
      }
      if (is_meta_name(l.name)) {
        auto it = b.labels.find(l.name);
        if (it == b.labels.end()) { ok = false; return rhs; }
        return Term::constant(it->second);
      }
      return rhs;
    }
    case TermKind::Deadlock:
      return rhs;
    default: {
      TermPtr lft = instantiate(rhs->left(), b, m, ok);
      TermPtr rgt = instantiate(rhs->right(), b, m, ok);
      return Term::binary(rhs->kind(), lft, rgt);
    }
  }
}

bool ent_matched(const ActionLabel& a, const ActionLabel& b) {
  if (a.kind == LabelKind::QuantumOp && b.kind == LabelKind::Shadow)
    return b.shadow_of == a.name;
  if (b.kind == LabelKind::QuantumOp && a.kind == LabelKind::Shadow)
    return a.shadow_of == b.name;
  return false;
}

bool guard_holds(RuleGuard g, const Bindings& b, const Model& m) {
  switch (g) {
    case RuleGuard::None:
      return true;
    case RuleGuard::GammaDefined: {
      auto v = b.labels.find("$v");
      auto w = b.labels.find("$w");
      return v != b.labels.end() && w != b.labels.end() &&
             m.gamma.find(v->second, w->second).has_value();
    }
    case RuleGuard::CommMismatch: {
      auto v = b.labels.find("$a");
      auto w = b.labels.find("$b");
      if (v == b.labels.end() || w == b.labels.end()) return false;
      if (v->second.kind == LabelKind::Classical && w->second.kind == LabelKind::Classical &&
          m.gamma.find(v->second, w->second).has_value())
        return false;
      return true;
    }
    case RuleGuard::EntMismatch: {
      auto v = b.labels.find("$a");
      auto w = b.labels.find("$b");
      if (v == b.labels.end() || w == b.labels.end()) return false;
      return !ent_matched(v->second, w->second);
    }
  }
  return false;
}

std::vector<RewriteRule> build_rules() {
  std::vector<RewriteRule> rules;
  auto add = [&](const char* id, TermPtr lhs, TermPtr rhs, RuleGuard g = RuleGuard::None,
                 bool ac = false) {
    rules.push_back({id, std::move(lhs), std::move(rhs), g, ac});
  };
  TermPtr x = pvar("x"), y = pvar("y"), z = pvar("z");
  TermPtr u = quantum_meta("$u"), su = shadow_meta("$u");
  TermPtr v = classical_meta("$v"), w = classical_meta("$w");
  TermPtr ca = any_meta("$a"), cb = any_meta("$b");
  TermPtr dl = Term::deadlock();

  // Sum rules, applied to the whole canonical +-spine.
  add("A3", Term::choice(x, x), x, RuleGuard::None, true);
  add("A6", Term::choice(x, dl), x, RuleGuard::None, true);
  add("SC1", Term::choice(x, shadow_meta("$u")), x, RuleGuard::None, true);

  // Sequential composition.
  add("A7", Term::seq(dl, x), dl);
  add("SC2", Term::seq(su, x), x);
  add("SC3", Term::seq(x, su), x);
  add("A5", Term::seq(Term::seq(x, y), z), Term::seq(x, Term::seq(y, z)));
  add("A4", Term::seq(Term::choice(x, y), z),
      Term::choice(Term::seq(x, z), Term::seq(y, z)));

  // Merge expansion.
  add("QM1", Term::merge(x, y),
      Term::choice(Term::choice(Term::left_merge(x, y), Term::left_merge(y, x)),
                   Term::choice(Term::comm_merge(x, y), Term::ent_merge(x, y))));

  // Left merge.
  add("QLM4", Term::left_merge(Term::choice(x, y), z),
      Term::choice(Term::left_merge(x, z), Term::left_merge(y, z)));
  add("QLMD", Term::left_merge(dl, y), dl);
  add("QLM3", Term::left_merge(Term::seq(ca, x), y), Term::seq(ca, Term::merge(x, y)));
  add("QLM2", Term::left_merge(ca, y), Term::seq(ca, y));

  // Communication merge.
  add("QCM9", Term::comm_merge(Term::choice(x, y), z),
      Term::choice(Term::comm_merge(x, z), Term::comm_merge(y, z)));
  add("QCM10", Term::comm_merge(x, Term::choice(y, z)),
      Term::choice(Term::comm_merge(x, y), Term::comm_merge(x, z)));
  add("QCMD1", Term::comm_merge(dl, y), dl);
  add("QCMD2", Term::comm_merge(x, dl), dl);
  add("QCM8", Term::comm_merge(Term::seq(v, x), Term::seq(w, y)),
      Term::seq(gamma_meta(), Term::merge(x, y)), RuleGuard::GammaDefined);
  add("QCM7", Term::comm_merge(Term::seq(v, x), w), Term::seq(gamma_meta(), x),
      RuleGuard::GammaDefined);
  add("QCM6", Term::comm_merge(v, Term::seq(w, y)), Term::seq(gamma_meta(), y),
      RuleGuard::GammaDefined);
  add("QCM5", Term::comm_merge(v, w), gamma_meta(), RuleGuard::GammaDefined);
  add("QCM8d", Term::comm_merge(Term::seq(ca, x), Term::seq(cb, y)), dl,
      RuleGuard::CommMismatch);
  add("QCM7d", Term::comm_merge(Term::seq(ca, x), cb), dl, RuleGuard::CommMismatch);
  add("QCM6d", Term::comm_merge(ca, Term::seq(cb, y)), dl, RuleGuard::CommMismatch);
  add("QCM5d", Term::comm_merge(ca, cb), dl, RuleGuard::CommMismatch);

  // Entanglement merge.
  add("QEM19", Term::ent_merge(Term::choice(x, y), z),
      Term::choice(Term::ent_merge(x, z), Term::ent_merge(y, z)));
  add("QEM20", Term::ent_merge(x, Term::choice(y, z)),
      Term::choice(Term::ent_merge(x, y), Term::ent_merge(x, z)));
  add("QEM21", Term::ent_merge(dl, x), dl);
  add("QEM22", Term::ent_merge(x, dl), dl);
  add("QEM17", Term::ent_merge(Term::seq(u, x), Term::seq(su, y)),
      Term::seq(u, Term::merge(x, y)));
  add("QEM18", Term::ent_merge(Term::seq(su, x), Term::seq(u, y)),
      Term::seq(u, Term::merge(x, y)));
  add("QEM15", Term::ent_merge(Term::seq(u, x), su), Term::seq(u, x));
  add("QEM16", Term::ent_merge(Term::seq(su, x), u), Term::seq(u, x));
  add("QEM13", Term::ent_merge(u, Term::seq(su, y)), Term::seq(u, y));
  add("QEM14", Term::ent_merge(su, Term::seq(u, y)), Term::seq(u, y));
  add("QEM11", Term::ent_merge(u, su), u);
  add("QEM12", Term::ent_merge(su, u), u);
  add("QEM17d", Term::ent_merge(Term::seq(ca, x), Term::seq(cb, y)), dl,
      RuleGuard::EntMismatch);
  add("QEM15d", Term::ent_merge(Term::seq(ca, x), cb), dl, RuleGuard::EntMismatch);
  add("QEM13d", Term::ent_merge(ca, Term::seq(cb, y)), dl, RuleGuard::EntMismatch);
  add("QEM11d", Term::ent_merge(ca, cb), dl, RuleGuard::EntMismatch);
  return rules;
}

void ensure_rewritable(const TermPtr& t) {
  switch (t->kind()) {
    case TermKind::PatternVar:
      throw std::invalid_argument("rewrite: open term (pattern variable '" + t->var() + "')");
    case TermKind::RecVar:
    case TermKind::Encapsulate:
    case TermKind::Abstract:
      throw std::invalid_argument(
          "rewrite: term contains an operator outside the rewrite system "
          "(encapsulation, abstraction or recursion)");
    case TermKind::Constant:
    case TermKind::Deadlock:
      return;
    default:
      ensure_rewritable(t->left());
      ensure_rewritable(t->right());
  }
}

// Sum-spine rules: A3 (drop a duplicate summand), A6 (drop delta), SC1
// (drop a shadow constant); each needs at least two summands.
std::optional<RewriteStep> try_sum_rules(const std::vector<TermPtr>& summands) {
  if (summands.size() < 2) return std::nullopt;
  for (size_t i = 0; i + 1 < summands.size(); ++i)
    if (Term::equal(summands[i], summands[i + 1])) {
      std::vector<TermPtr> rest(summands);
      rest.erase(rest.begin() + static_cast<long>(i));
      return RewriteStep{rebuild_choice(rest), "A3"};
    }
  for (size_t i = 0; i < summands.size(); ++i)
    if (summands[i]->kind() == TermKind::Deadlock) {
      std::vector<TermPtr> rest(summands);
      rest.erase(rest.begin() + static_cast<long>(i));
      return RewriteStep{rebuild_choice(rest), "A6"};
    }
  for (size_t i = 0; i < summands.size(); ++i)
    if (summands[i]->kind() == TermKind::Constant &&
        summands[i]->label().kind == LabelKind::Shadow) {
      std::vector<TermPtr> rest(summands);
      rest.erase(rest.begin() + static_cast<long>(i));
      return RewriteStep{rebuild_choice(rest), "SC1"};
    }
  return std::nullopt;
}

// Structural rules indexed by the root kind of their left-hand side.
const std::vector<const RewriteRule*>& rules_for(TermKind k) {
  static const auto table = [] {
    std::map<TermKind, std::vector<const RewriteRule*>> by_kind;
    for (const auto& rule : rule_set())
      if (!rule.ac_sum_rule) by_kind[rule.lhs->kind()].push_back(&rule);
    return by_kind;
  }();
  static const std::vector<const RewriteRule*> none;
  auto it = table.find(k);
  return it == table.end() ? none : it->second;
}

// Outermost-leftmost search; `top_of_sum` suppresses re-trying the sum
// rules on nested nodes of the same +-spine.
std::optional<RewriteStep> find_redex(const TermPtr& t, const Model& m, bool top_of_sum) {
  if (t->kind() == TermKind::Choice && top_of_sum) {
    std::vector<TermPtr> summands;
    flatten_choice(t, summands);
    if (auto s = try_sum_rules(summands)) return s;
  }
  if (t->kind() != TermKind::Choice) {
    for (const RewriteRule* rule : rules_for(t->kind())) {
      Bindings b;
      if (!match(rule->lhs, t, b)) continue;
      if (!guard_holds(rule->guard, b, m)) continue;
      bool ok = true;
      TermPtr next = instantiate(rule->rhs, b, m, ok);
      if (!ok) continue;
      return RewriteStep{next, rule->id};
    }
  }
  // Recurse into children, left to right.
  switch (t->kind()) {
    case TermKind::Constant:
    case TermKind::Deadlock:
      return std::nullopt;
    default: {
      bool child_top_left = t->kind() != TermKind::Choice;
      if (auto s = find_redex(t->left(), m, child_top_left)) {
        return RewriteStep{Term::binary(t->kind(), s->next, t->right()), s->rule};
      }
      // The right child of a Choice continues the same spine.
      bool child_top_right = t->kind() != TermKind::Choice;
      if (auto s = find_redex(t->right(), m, child_top_right)) {
        return RewriteStep{Term::binary(t->kind(), t->left(), s->next), s->rule};
      }
      return std::nullopt;
    }
  }
}

}  // namespace

const std::vector<RewriteRule>& rule_set() {
  static const std::vector<RewriteRule> rules = build_rules();
  return rules;
}

TermPtr ac_canonical(const TermPtr& t) {
  switch (t->kind()) {
    case TermKind::Constant:
    case TermKind::Deadlock:
    case TermKind::RecVar:
    case TermKind::PatternVar:
      return t;
    case TermKind::Encapsulate: {
      TermPtr b = ac_canonical(t->body());
      return b == t->body() ? t : Term::encapsulate(t->name_set(), b);
    }
    case TermKind::Abstract: {
      TermPtr b = ac_canonical(t->body());
      return b == t->body() ? t : Term::abstraction(t->name_set(), b);
    }
    case TermKind::Choice: {
      bool right_nested = true;
      for (TermPtr spine = t; spine->kind() == TermKind::Choice; spine = spine->right())
        if (spine->left()->kind() == TermKind::Choice) {
          right_nested = false;
          break;
        }
      std::vector<TermPtr> summands;
      flatten_choice(t, summands);
      bool unchanged = true;
      for (auto& s : summands) {
        TermPtr c = ac_canonical(s);
        unchanged = unchanged && c == s;
        s = c;
      }
      bool sorted = std::is_sorted(summands.begin(), summands.end(),
                                   [](const TermPtr& a, const TermPtr& b) {
                                     return Term::compare(a, b) < 0;
                                   });
      if (right_nested && unchanged && sorted) return t;
      if (!sorted)
        std::stable_sort(summands.begin(), summands.end(),
                         [](const TermPtr& a, const TermPtr& b) {
                           return Term::compare(a, b) < 0;
                         });
      return rebuild_choice(summands);
    }
    default: {
      TermPtr l = ac_canonical(t->left());
      TermPtr r = ac_canonical(t->right());
      if (l == t->left() && r == t->right()) return t;
      return Term::binary(t->kind(), l, r);
    }
  }
}

bool ac_equal(const TermPtr& a, const TermPtr& b) {
  return Term::equal(ac_canonical(a), ac_canonical(b));
}

std::optional<RewriteStep> rewrite_step(const TermPtr& t, const Model& m) {
  ensure_rewritable(t);
  TermPtr tc = ac_canonical(t);
  return find_redex(tc, m, true);
}

NormalFormResult normal_form(const TermPtr& t, const Model& m, size_t budget) {
  ensure_rewritable(t);
  NormalFormResult res;
  TermPtr cur = t;
  for (size_t i = 0; i <= budget; ++i) {
    TermPtr tc = ac_canonical(cur);
    auto s = find_redex(tc, m, true);
    if (!s) {
      res.nf = tc;
      return res;
    }
    res.trace.push_back(s->rule);
    cur = s->next;
  }
  throw std::runtime_error("normal_form: step budget exceeded (termination bug)");
}

Weight weight(const TermPtr& t) {
  switch (t->kind()) {
    case TermKind::PatternVar:
      throw std::invalid_argument("weight: open term (pattern variable '" + t->var() + "')");
    case TermKind::Constant:
    case TermKind::Deadlock:
    case TermKind::RecVar:
      return 2;
    case TermKind::Encapsulate:
    case TermKind::Abstract:
      return weight(t->body());
    case TermKind::Choice:
      return weight(t->left()) + weight(t->right());
    case TermKind::Seq: {
      Weight l = weight(t->left());
      return l * l * weight(t->right());
    }
    case TermKind::Merge: {
      Weight p = weight(t->left()) * weight(t->right());
      return 4 * p * p + 1;
    }
    default: {  // LeftMerge, CommMerge, EntMerge
      Weight p = weight(t->left()) * weight(t->right());
      return p * p;
    }
  }
}

}  // namespace qpa
