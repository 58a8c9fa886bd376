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
#include "qpa/model.hpp"

#include <algorithm>

namespace qpa {

void CommunicationFunction::define(const ActionLabel& a, const ActionLabel& b,
                                   const ActionLabel& result) {
  if (a.kind != LabelKind::Classical || b.kind != LabelKind::Classical)
    throw ModelError("gamma is defined on classical actions only");
  if (result.kind != LabelKind::CommResult)
    throw ModelError("gamma results must be communication results");
  std::pair<std::string, std::string> key{a.key(), b.key()};
  if (key.second < key.first) std::swap(key.first, key.second);
  auto it = table_.find(key);
  if (it != table_.end()) {
    if (it->second == result) return;
    throw ModelError("gamma(" + key.first + ", " + key.second + ") defined twice");
  }
  table_.emplace(std::move(key), result);
}

std::optional<ActionLabel> CommunicationFunction::find(const ActionLabel& a,
                                                       const ActionLabel& b) const {
  if (a.kind != LabelKind::Classical || b.kind != LabelKind::Classical) return std::nullopt;
  std::pair<std::string, std::string> key{a.key(), b.key()};
  if (key.second < key.first) std::swap(key.first, key.second);
  auto it = table_.find(key);
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

DensityMatrix Model::initial_state() const {
  if (qubit_order.empty()) return DensityMatrix();
  DensityMatrix acc;
  std::vector<std::string> in_bell;
  for (const auto& [k, qs] : init_bells) {
    acc = acc.tensor(DensityMatrix::bell_state(k, qs.first, qs.second));
    in_bell.push_back(qs.first);
    in_bell.push_back(qs.second);
  }
  for (const auto& q : qubit_order)
    if (std::find(in_bell.begin(), in_bell.end(), q) == in_bell.end())
      acc = acc.tensor(DensityMatrix::zero_state({q}));
  return acc.reorder(qubit_order);
}

}  // namespace qpa
