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

#include <map>
#include <string>

#include "qpa/term.hpp"

namespace qpa {

/// A simultaneous mapping from pattern variables to terms. Application
/// replaces every free occurrence in one pass, so {x->y, y->x} swaps.
/// Recursion variables are opaque to substitution.
struct Substitution {
  std::map<std::string, TermPtr> mapping;

  TermPtr apply(const TermPtr& t) const;

  /// Composition: apply(compose(s2, s1), t) == apply(s2, apply(s1, t)).
  static Substitution compose(const Substitution& s2, const Substitution& s1);
};

}  // namespace qpa
