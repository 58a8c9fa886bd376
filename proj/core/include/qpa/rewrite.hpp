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
#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <optional>
#include <string>
#include <vector>

#include "qpa/model.hpp"

namespace qpa {

using Weight = boost::multiprecision::cpp_int;

/// Side condition of a directed rule beyond structural matching.
enum class RuleGuard {
  None,
  GammaDefined,   // the two bound actions communicate
  CommMismatch,   // they do not (wrong kind or gamma undefined)
  EntMismatch,    // the two bound constants are not an (op, shadow) pair
};

/// A directed rule. Patterns use pattern variables for term positions and
/// reserved $-labels for constant metavariables; see docs/rewrite_rules.md
/// for the full list.
struct RewriteRule {
  std::string id;
  TermPtr lhs;
  TermPtr rhs;
  RuleGuard guard = RuleGuard::None;
  bool ac_sum_rule = false;  // matched against the whole +-spine
};

/// The complete directed rule set, in application priority order.
const std::vector<RewriteRule>& rule_set();

/// Flattens +-spines and sorts summands by the structural order;
/// duplicates are kept. Idempotent.
TermPtr ac_canonical(const TermPtr& t);

/// True iff the two terms are equal modulo associativity/commutativity
/// of +.
bool ac_equal(const TermPtr& a, const TermPtr& b);

struct RewriteStep {
  TermPtr next;
  std::string rule;
};

/// One application of the first applicable rule at the outermost-leftmost
/// redex of the AC-canonical form; nullopt iff the term is a normal form.
/// The term must be closed and built from constants, delta, +, ., and the
/// four merge operators.
std::optional<RewriteStep> rewrite_step(const TermPtr& t, const Model& m);

struct NormalFormResult {
  TermPtr nf;
  std::vector<std::string> trace;
};

/// Iterates rewrite_step to a fixpoint. The step budget guards against
/// non-termination bugs and must never fire on valid inputs.
NormalFormResult normal_form(const TermPtr& t, const Model& m, size_t budget = 1000000);

/// The termination weight: constants weigh 2, weight(s+t)=w(s)+w(t),
/// weight(s.t)=w(s)^2*w(t), weight(s||t)=4*(w(s)*w(t))^2+1 and the three
/// auxiliary merges weigh (w(s)*w(t))^2. Encapsulation and abstraction are
/// transparent; recursion variables weigh 2.
Weight weight(const TermPtr& t);

}  // namespace qpa
