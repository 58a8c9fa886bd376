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

#include <string>
#include <vector>

namespace qpa {

/// Kind of an atomic step.
enum class LabelKind {
  Classical,   ///< ordinary communicating action, leaves the quantum state fixed
  QuantumOp,   ///< named superoperator applied to the quantum state
  Shadow,      ///< placeholder step synchronizing with a quantum operation
  CommResult,  ///< result of a matched communication (range of gamma)
  Tau,         ///< silent step
  Delta,       ///< deadlock constant (never fires; kept for completeness)
};

/// An atomic action label. Labels are immutable value types.
///
/// The `sync` flag marks transitions produced by a matched entanglement
/// step. It is transition metadata: it is excluded from `key()`, from the
/// total order and from equality, so two transitions that differ only in
/// `sync` carry the same observable label.
struct ActionLabel {
  LabelKind kind = LabelKind::Classical;
  std::string name;
  std::vector<std::string> data_args;
  std::vector<std::string> qubit_args;  // QuantumOp only
  std::string shadow_of;                // Shadow only
  bool sync = false;                    // QuantumOp only, set by merge rules

  static ActionLabel classical(std::string name, std::vector<std::string> args = {});
  static ActionLabel quantum(std::string name, std::vector<std::string> qubits,
                             std::vector<std::string> args = {});
  static ActionLabel shadow(std::string of);
  static ActionLabel comm_result(std::string name, std::vector<std::string> args = {});
  static ActionLabel tau();
  static ActionLabel delta();

  bool is_tau() const { return kind == LabelKind::Tau; }

  /// Observable identity: `name(args)` for plain actions, `shadow[op]` for
  /// shadows. Used for bisimulation matching, encapsulation/abstraction
  /// sets and the communication function.
  std::string key() const;

  /// Total order on (kind, name, data, qubits, shadow_of); sync ignored.
  static int compare(const ActionLabel& a, const ActionLabel& b);
  bool operator==(const ActionLabel& o) const { return compare(*this, o) == 0; }
  bool operator!=(const ActionLabel& o) const { return compare(*this, o) != 0; }
  bool operator<(const ActionLabel& o) const { return compare(*this, o) < 0; }

  size_t hash() const;
};

/// True if `entry` (an element of an encapsulation/abstraction set) matches
/// the label. Entries of the form `name(a,b)` or `shadow[op]` match exactly;
/// a bare `name` matches any non-shadow label with that name.
bool label_set_matches(const std::string& entry, const ActionLabel& label);

}  // namespace qpa
