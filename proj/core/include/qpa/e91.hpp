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

#include "qpa/bisim.hpp"
#include "qpa/model.hpp"
#include "qpa/sos.hpp"

namespace qpa {

/// Which shadow constant to drop when building a mutated model (used to
/// show the entanglement synchronization is load-bearing).
enum class E91Mutation { None, DropShadowInAliceA3, DropShadowInBobB1 };

struct E91Options {
  int pairs = 1;  // EPR pairs, 1..4
  std::vector<std::string> delta_i = {"d0"};  // input data domain
  std::vector<std::string> delta_o = {"k0"};  // output data domain
  E91Mutation mutation = E91Mutation::None;
};

/// The two-party key distribution model: Alice and Bob as guarded linear
/// recursion specs, the three communication pairs, the encapsulation and
/// abstraction sets, and the entangled initial state (pairs prepared in
/// the first Bell state).
struct E91Model {
  Model model;        // recursion specs, gamma, operation defs, register
  E91Options options;
  TermPtr system;      // abstract{I}(encap{H}(A || B))
  TermPtr encapsulated;  // encap{H}(A || B), used by the derivation chain
  TermPtr spec_loop;   // external behavior: receive then send, repeating
  std::vector<std::string> H, I;
  DensityMatrix initial;
  std::vector<std::pair<std::string, std::string>> pair_qubits;  // (alice, bob) per pair
};

E91Model build_e91(const E91Options& opts = {});

/// One step of the protocol derivation chain, checked as a strong quantum
/// bisimilarity between the running system and its one-step unfolding.
struct ChainCheck {
  std::string lhs;  // rendered configuration term
  std::string rhs;
  bool related = false;
  bool exact_single_step = false;  // the lhs configuration has exactly one transition
};

struct E91Report {
  EquivalenceResult verdict;              // rooted branching vs the spec loop
  std::vector<ChainCheck> chain;          // derivation chain results
  std::vector<DensityMatrix> pair_states; // post-measurement reduced state per pair
  double max_pair_deviation = 0.0;        // from the ideal correlated mixture
  bool deadlock_reached = false;          // a non-terminal node with no transitions
  bool output_reachable = false;          // some send_B transition exists
  size_t system_nodes = 0;
};

/// Builds the system and specification LTSs, decides rooted branching
/// bisimilarity, replays the derivation chain and reports the
/// post-measurement state of every pair.
E91Report verify_e91(const E91Model& m, double tol = kDefaultTol,
                     const ExploreLimits& limits = {});

}  // namespace qpa
