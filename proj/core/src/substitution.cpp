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
#include "qpa/substitution.hpp"

namespace qpa {

TermPtr Substitution::apply(const TermPtr& t) const {
  switch (t->kind()) {
    case TermKind::PatternVar: {
      auto it = mapping.find(t->var());
      return it == mapping.end() ? t : it->second;
    }
    case TermKind::Constant:
    case TermKind::Deadlock:
    case TermKind::RecVar:
      return t;
    case TermKind::Encapsulate: {
      TermPtr b = apply(t->body());
      return b == t->body() ? t : Term::encapsulate(t->name_set(), b);
    }
    case TermKind::Abstract: {
      TermPtr b = apply(t->body());
      return b == t->body() ? t : Term::abstraction(t->name_set(), b);
    }
    default: {
      TermPtr l = apply(t->left());
      TermPtr r = apply(t->right());
      if (l == t->left() && r == t->right()) return t;
      return Term::binary(t->kind(), l, r);
    }
  }
}

Substitution Substitution::compose(const Substitution& s2, const Substitution& s1) {
  Substitution out;
  for (const auto& [v, body] : s1.mapping) out.mapping[v] = s2.apply(body);
  for (const auto& [v, body] : s2.mapping)
    if (!out.mapping.count(v)) out.mapping[v] = body;
  return out;
}

}  // namespace qpa
