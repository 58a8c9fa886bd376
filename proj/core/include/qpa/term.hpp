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

#include <memory>
#include <string>
#include <vector>

#include "qpa/label.hpp"

namespace qpa {

enum class TermKind {
  Constant,     // action constant (any label kind except Delta)
  Deadlock,     // delta
  Choice,       // s + t
  Seq,          // s . t
  Merge,        // s || t
  LeftMerge,    // s |_ t
  CommMerge,    // s | t
  EntMerge,     // s >< t
  Encapsulate,  // encap{H}(s)
  Abstract,     // abstract{I}(s)
  RecVar,       // recursion variable bound in a RecursionSpec
  PatternVar,   // rewrite-rule variable; never occurs in closed terms
};

class Term;
using TermPtr = std::shared_ptr<const Term>;

/// Immutable process term. Nodes are shared freely; all construction goes
/// through the static factories, which precompute a structural hash.
class Term {
 public:
  static TermPtr constant(ActionLabel label);
  static TermPtr deadlock();
  static TermPtr tau();
  static TermPtr choice(TermPtr l, TermPtr r);
  static TermPtr seq(TermPtr l, TermPtr r);
  static TermPtr merge(TermPtr l, TermPtr r);
  static TermPtr left_merge(TermPtr l, TermPtr r);
  static TermPtr comm_merge(TermPtr l, TermPtr r);
  static TermPtr ent_merge(TermPtr l, TermPtr r);
  static TermPtr binary(TermKind k, TermPtr l, TermPtr r);
  static TermPtr encapsulate(std::vector<std::string> names, TermPtr body);
  static TermPtr abstraction(std::vector<std::string> names, TermPtr body);
  static TermPtr rec_var(std::string name, int spec_ref);
  static TermPtr pattern_var(std::string name);

  TermKind kind() const { return kind_; }
  const ActionLabel& label() const { return label_; }
  const TermPtr& left() const { return left_; }
  const TermPtr& right() const { return right_; }
  const TermPtr& body() const { return left_; }
  const std::vector<std::string>& name_set() const { return names_; }
  const std::string& var() const { return var_; }
  int spec_ref() const { return spec_ref_; }
  size_t hash() const { return hash_; }

  bool is_binary() const {
    return kind_ == TermKind::Choice || kind_ == TermKind::Seq || kind_ == TermKind::Merge ||
           kind_ == TermKind::LeftMerge || kind_ == TermKind::CommMerge ||
           kind_ == TermKind::EntMerge;
  }

  /// Total structural order.
  static int compare(const TermPtr& a, const TermPtr& b);
  /// Structural equality; the precomputed hashes give a fast negative.
  static bool equal(const TermPtr& a, const TermPtr& b) {
    return a == b || (a->hash_ == b->hash_ && compare(a, b) == 0);
  }

 private:
  Term() = default;

  TermKind kind_ = TermKind::Deadlock;
  ActionLabel label_;
  TermPtr left_, right_;
  std::vector<std::string> names_;  // Encapsulate/Abstract, sorted unique
  std::string var_;                 // RecVar / PatternVar
  int spec_ref_ = -1;
  size_t hash_ = 0;
};

/// Surface-syntax rendering; parses back to a structurally equal term.
std::string render(const TermPtr& t);

/// True iff the term uses only Constant/Deadlock/Choice/Seq and contains no
/// shadow constants. Throws std::invalid_argument on open terms (pattern
/// variables).
bool is_basic(const TermPtr& t);

/// True iff the term contains a pattern variable.
bool is_open(const TermPtr& t);

/// True iff the term contains a shadow constant anywhere.
bool contains_shadow(const TermPtr& t);

/// Flattens the maximal +-spine at the root into a summand list.
void flatten_choice(const TermPtr& t, std::vector<TermPtr>& out);

/// Rebuilds a sum as a right-nested Choice chain; the list must be nonempty.
TermPtr rebuild_choice(const std::vector<TermPtr>& summands);

}  // namespace qpa
