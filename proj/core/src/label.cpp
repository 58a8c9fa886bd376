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
#include "qpa/label.hpp"

namespace qpa {

ActionLabel ActionLabel::classical(std::string name, std::vector<std::string> args) {
  ActionLabel l;
  l.kind = LabelKind::Classical;
  l.name = std::move(name);
  l.data_args = std::move(args);
  return l;
}

ActionLabel ActionLabel::quantum(std::string name, std::vector<std::string> qubits,
                                 std::vector<std::string> args) {
  ActionLabel l;
  l.kind = LabelKind::QuantumOp;
  l.name = std::move(name);
  l.qubit_args = std::move(qubits);
  l.data_args = std::move(args);
  return l;
}

ActionLabel ActionLabel::shadow(std::string of) {
  ActionLabel l;
  l.kind = LabelKind::Shadow;
  l.name = "shadow";
  l.shadow_of = std::move(of);
  return l;
}

ActionLabel ActionLabel::comm_result(std::string name, std::vector<std::string> args) {
  ActionLabel l;
  l.kind = LabelKind::CommResult;
  l.name = std::move(name);
  l.data_args = std::move(args);
  return l;
}

ActionLabel ActionLabel::tau() {
  ActionLabel l;
  l.kind = LabelKind::Tau;
  l.name = "tau";
  return l;
}

ActionLabel ActionLabel::delta() {
  ActionLabel l;
  l.kind = LabelKind::Delta;
  l.name = "delta";
  return l;
}

std::string ActionLabel::key() const {
  if (kind == LabelKind::Shadow) return "shadow[" + shadow_of + "]";
  std::string s = name;
  if (!data_args.empty()) {
    s += '(';
    for (size_t i = 0; i < data_args.size(); ++i) {
      if (i) s += ',';
      s += data_args[i];
    }
    s += ')';
  }
  return s;
}

namespace {
int cmp_vec(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (size_t i = 0; i < a.size(); ++i) {
    int c = a[i].compare(b[i]);
    if (c) return c < 0 ? -1 : 1;
  }
  return 0;
}
}  // namespace

int ActionLabel::compare(const ActionLabel& a, const ActionLabel& b) {
  if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind) ? -1 : 1;
  if (int c = a.name.compare(b.name)) return c < 0 ? -1 : 1;
  if (int c = cmp_vec(a.data_args, b.data_args)) return c;
  if (int c = cmp_vec(a.qubit_args, b.qubit_args)) return c;
  if (int c = a.shadow_of.compare(b.shadow_of)) return c < 0 ? -1 : 1;
  return 0;
}

size_t ActionLabel::hash() const {
  size_t h = 1469598103934665603ull;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  };
  h ^= static_cast<size_t>(kind);
  h *= 1099511628211ull;
  mix(name);
  for (const auto& d : data_args) mix(d);
  for (const auto& q : qubit_args) mix(q);
  mix(shadow_of);
  return h;
}

bool label_set_matches(const std::string& entry, const ActionLabel& label) {
  if (entry.rfind("shadow[", 0) == 0) {
    return label.kind == LabelKind::Shadow && entry == label.key();
  }
  if (entry.find('(') != std::string::npos) {
    return label.kind != LabelKind::Shadow && entry == label.key();
  }
  return label.kind != LabelKind::Shadow && entry == label.name;
}

}  // namespace qpa
