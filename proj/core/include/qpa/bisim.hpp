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

#include "qpa/sos.hpp"

namespace qpa {

enum class Verdict { Related, NotRelated, Incomparable };

struct EquivalenceResult {
  Verdict verdict = Verdict::NotRelated;
  /// Block assignment per node when the LTSs are comparable; roots related
  /// iff they share a block.
  std::vector<int> blocks_a, blocks_b;
  /// Experiment hint when not related: a label sequence whose replay
  /// diverges between the two systems.
  std::vector<std::string> distinguishing_trace;
  /// Branching only: some absorbed tau step changed the quantum state.
  bool tau_state_divergence = false;
  std::string note;

  bool related() const { return verdict == Verdict::Related; }
};

/// Serialization used by the CLI: RELATED / NOT-RELATED <trace> /
/// INCOMPARABLE, with exit codes 0/1/2.
std::string verdict_line(const EquivalenceResult& r);
int verdict_exit_code(const EquivalenceResult& r);

/// Strong quantum bisimilarity: partition refinement over the disjoint
/// union, matching on (label, target block) and termination; nodes with
/// quantum states differing beyond `tol` never share a block.
EquivalenceResult strong_bisim(const Lts& a, const Lts& b, double tol = kDefaultTol);

/// Quantum branching bisimilarity: stuttering-closed refinement on the
/// configuration graphs. Terminated configurations are compared by state
/// (final states must agree within tol); tau steps are absorbable
/// irrespective of their state effect, and the result flags absorbed
/// state-changing tau steps.
EquivalenceResult branching_bisim(const Lts& a, const Lts& b, double tol = kDefaultTol);

/// Branching bisimilarity with the root condition: initial transitions
/// must be matched directly, with branching-equivalent targets.
EquivalenceResult rooted_branching_bisim(const Lts& a, const Lts& b, double tol = kDefaultTol);

/// Test oracle: classical (state-blind) strong bisimilarity on the label
/// structures, ignoring quantum states everywhere.
EquivalenceResult classical_strong_bisim(const Lts& a, const Lts& b);

}  // namespace qpa
