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

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "qpa/model.hpp"

namespace qpa {

/// A node of the transition system: a process term together with the
/// current quantum state. A null term is the termination marker.
struct Configuration {
  TermPtr term;
  DensityMatrix state;
  bool terminal() const { return term == nullptr; }
};

/// One derivable transition out of a configuration.
struct StepResult {
  ActionLabel label;
  TermPtr target;  // null = successful termination
  DensityMatrix state;
};

/// All transitions derivable from `c` by one application of the rule set.
/// Results are sorted and deduplicated, so the relation is a set.
std::vector<StepResult> step(const Configuration& c, const Model& m, double tol = kDefaultTol);

struct Transition {
  int src;
  ActionLabel label;
  int dst;
};

struct ExploreLimits {
  size_t max_configs = 100000;
  size_t max_depth = static_cast<size_t>(-1);
};

/// A finite labelled transition system over configurations. Nodes with
/// structurally equal terms and states equal within tolerance are merged.
struct Lts {
  struct Node {
    TermPtr term;  // null = terminated
    DensityMatrix state;
    bool terminal() const { return term == nullptr; }
  };
  std::vector<Node> nodes;
  std::vector<Transition> transitions;
  std::vector<std::vector<int>> out;  // node -> transition indices
  int root = 0;
  bool truncated = false;
  std::string truncation_reason;

  size_t num_nodes() const { return nodes.size(); }
};

/// Breadth-first closure of `root` under step(). Exploration past the
/// limits marks the result truncated instead of failing.
Lts build_lts(const Configuration& root, const Model& m, const ExploreLimits& limits = {},
              double tol = kDefaultTol);

/// Transition records `src -label-> dst` followed by a per-node state
/// digest table; full matrices are included when dump_states is set.
void dump_lts(std::ostream& os, const Lts& lts, bool dump_states = false);

/// Graphviz dot rendering for external tooling.
void dump_lts_dot(std::ostream& os, const Lts& lts);

}  // namespace qpa
