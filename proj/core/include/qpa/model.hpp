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
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qpa/label.hpp"
#include "qpa/quantum.hpp"
#include "qpa/term.hpp"

namespace qpa {

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A resource limit was hit (LTS truncation where exhaustiveness is
/// required, or an exploration cap in a verification run).
struct LimitError : ModelError {
  using ModelError::ModelError;
};

/// A guarded linear recursion specification: every body is a sum of
/// summands, each a single action constant or an action-prefixed variable
/// of the same specification.
struct RecursionSpec {
  std::vector<std::pair<std::string, TermPtr>> equations;  // insertion order

  const TermPtr* find(const std::string& name) const {
    for (const auto& [n, t] : equations)
      if (n == name) return &t;
    return nullptr;
  }
};

/// Symmetric partial map from pairs of classical actions to the resulting
/// communication action.
class CommunicationFunction {
 public:
  void define(const ActionLabel& a, const ActionLabel& b, const ActionLabel& result);
  std::optional<ActionLabel> find(const ActionLabel& a, const ActionLabel& b) const;
  bool empty() const { return table_.empty(); }
  const std::map<std::pair<std::string, std::string>, ActionLabel>& entries() const {
    return table_;
  }

 private:
  std::map<std::pair<std::string, std::string>, ActionLabel> table_;
};

/// A fully resolved specification: named closed terms, recursion
/// specifications, the communication function, quantum operation
/// definitions and the canonical qubit register.
struct Model {
  std::vector<std::pair<std::string, TermPtr>> terms;  // insertion order; front = root
  std::vector<RecursionSpec> recursion;
  CommunicationFunction gamma;
  std::map<std::string, QuantumOperationDef> ops;
  std::vector<std::string> qubit_order;                      // canonical global order
  std::map<std::string, std::vector<std::string>> domains;   // declared data domains
  std::vector<std::pair<int, std::pair<std::string, std::string>>> init_bells;

  const QuantumOperationDef* find_op(const std::string& name) const {
    auto it = ops.find(name);
    return it == ops.end() ? nullptr : &it->second;
  }
  const TermPtr* find_term(const std::string& name) const {
    for (const auto& [n, t] : terms)
      if (n == name) return &t;
    return nullptr;
  }
  const TermPtr* find_equation(int spec_ref, const std::string& var) const {
    if (spec_ref < 0 || spec_ref >= static_cast<int>(recursion.size())) return nullptr;
    return recursion[spec_ref].find(var);
  }

  /// Initial state over the canonical register: Bell pairs from `init`
  /// directives, every other qubit in |0>.
  DensityMatrix initial_state() const;
};

}  // namespace qpa
