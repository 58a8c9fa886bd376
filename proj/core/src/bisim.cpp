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
#include "qpa/bisim.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

namespace qpa {

namespace {

// Disjoint union of two LTSs with interned labels and per-node state
// clusters (transitive closure of pairwise tolerance equality).
struct Union {
  struct Edge {
    int label;  // interned label id; tau has a fixed id
    int dst;
  };
  struct TauEdge {
    int src, dst;
    double state_dev = 0.0;
  };
  std::vector<std::vector<Edge>> out;
  std::vector<bool> terminal;
  std::vector<int> cluster;        // state cluster per node
  std::vector<TauEdge> tau_edges;  // for divergence reporting
  int root_a = 0, root_b = 0;
  int n = 0;
  int tau_id = -1;
  std::vector<ActionLabel> labels;  // id -> label

  int size() const { return n; }
};

Union make_union(const Lts& a, const Lts& b, double tol, bool with_states) {
  if (a.truncated || b.truncated)
    throw LimitError("bisimulation requires exhaustive LTSs (input was truncated)");
  Union u;
  u.n = static_cast<int>(a.nodes.size() + b.nodes.size());
  u.root_a = a.root;
  u.root_b = static_cast<int>(a.nodes.size()) + b.root;
  u.out.resize(u.n);
  u.terminal.resize(u.n);
  u.cluster.assign(u.n, 0);

  // Intern labels in their total order so that splitter/trace tie-breaks
  // pick the lexicographically least label.
  std::map<ActionLabel, int> intern;
  intern.emplace(ActionLabel::tau(), 0);
  for (const Lts* lts : {&a, &b})
    for (const auto& tr : lts->transitions) {
      ActionLabel observable = tr.label;
      observable.sync = false;  // sync is metadata, not observable identity
      intern.emplace(observable, 0);
    }
  for (auto& [l, id] : intern) {
    id = static_cast<int>(u.labels.size());
    u.labels.push_back(l);
  }
  u.tau_id = intern.at(ActionLabel::tau());

  auto add = [&](const Lts& lts, int base) {
    for (size_t i = 0; i < lts.nodes.size(); ++i)
      u.terminal[base + i] = lts.nodes[i].terminal();
    for (const auto& tr : lts.transitions) {
      ActionLabel observable = tr.label;
      observable.sync = false;
      u.out[base + tr.src].push_back({intern.at(observable), base + tr.dst});
      if (observable.is_tau()) {
        double dev = state_distance(lts.nodes[tr.src].state, lts.nodes[tr.dst].state);
        u.tau_edges.push_back({base + tr.src, base + tr.dst, dev});
      }
    }
  };
  add(a, 0);
  add(b, static_cast<int>(a.nodes.size()));

  if (with_states) {
    // Unique states first (exact scan within digest buckets), then
    // tolerance clustering of the representatives via union-find.
    std::vector<const DensityMatrix*> state_of(u.n);
    for (size_t i = 0; i < a.nodes.size(); ++i) state_of[i] = &a.nodes[i].state;
    for (size_t i = 0; i < b.nodes.size(); ++i)
      state_of[a.nodes.size() + i] = &b.nodes[i].state;

    std::vector<int> rep;  // representative node per unique state
    std::map<uint64_t, std::vector<int>> buckets;
    std::vector<int> unique_of(u.n, -1);
    for (int i = 0; i < u.n; ++i) {
      uint64_t d = state_of[i]->digest();
      bool found = false;
      for (int r : buckets[d]) {
        if (state_of[r]->qubits() == state_of[i]->qubits() &&
            state_of[r]->matrix() == state_of[i]->matrix()) {
          unique_of[i] = unique_of[r];
          found = true;
          break;
        }
      }
      if (!found) {
        unique_of[i] = static_cast<int>(rep.size());
        rep.push_back(i);
        buckets[d].push_back(i);
      }
    }
    const int m = static_cast<int>(rep.size());
    std::vector<int> parent(m);
    for (int i = 0; i < m; ++i) parent[i] = i;
    std::function<int(int)> find = [&](int v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        const DensityMatrix* si = state_of[rep[i]];
        const DensityMatrix* sj = state_of[rep[j]];
        if (si->num_qubits() != sj->num_qubits()) continue;
        bool same_register = true;
        for (const auto& q : si->qubits())
          if (sj->qubit_index(q) < 0) {
            same_register = false;
            break;
          }
        if (!same_register) continue;
        if (state_distance(*si, *sj) <= tol) parent[find(i)] = find(j);
      }
    for (int i = 0; i < u.n; ++i) u.cluster[i] = find(unique_of[i]);
  }
  return u;
}

using Signature = std::vector<std::pair<int, int>>;  // sorted unique (label, block)

void sort_unique(Signature& s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
}

// Generic signature refinement; `signature(node, block)` must be stable.
// Returns the final block assignment.
std::vector<int> refine(int n, std::vector<int> block,
                        const std::function<Signature(int, const std::vector<int>&)>& signature) {
  int blocks = 1 + *std::max_element(block.begin(), block.end());
  while (true) {
    std::map<std::pair<int, Signature>, int> next_ids;
    std::vector<int> next(n);
    for (int v = 0; v < n; ++v) {
      auto key = std::make_pair(block[v], signature(v, block));
      auto it = next_ids.find(key);
      if (it == next_ids.end())
        it = next_ids.emplace(std::move(key), static_cast<int>(next_ids.size())).first;
      next[v] = it->second;
    }
    int nblocks = static_cast<int>(next_ids.size());
    block.swap(next);
    if (nblocks == blocks) return block;
    blocks = nblocks;
  }
}

std::vector<int> strong_blocks(const Union& u, bool with_states) {
  // Initial partition: termination status, and state cluster when the
  // quantum part participates.
  std::map<std::pair<int, int>, int> init_ids;
  std::vector<int> block(u.n);
  for (int v = 0; v < u.n; ++v) {
    auto key = std::make_pair(u.terminal[v] ? 1 : 0, with_states ? u.cluster[v] : 0);
    auto it = init_ids.find(key);
    if (it == init_ids.end())
      it = init_ids.emplace(key, static_cast<int>(init_ids.size())).first;
    block[v] = it->second;
  }
  auto signature = [&u](int v, const std::vector<int>& blk) {
    Signature s;
    s.reserve(u.out[v].size());
    for (const auto& e : u.out[v]) s.push_back({e.label, blk[e.dst]});
    sort_unique(s);
    return s;
  };
  return refine(u.n, std::move(block), signature);
}

// Branching signatures with stuttering closure: inert tau steps (same
// block) contribute their target's signature instead of an edge record.
// Termination is encoded as a pseudo-edge keyed by the state cluster so
// that final states must agree while intermediate states stay free.
std::vector<int> branching_blocks(const Union& u) {
  const int tick_base = static_cast<int>(u.labels.size());
  std::vector<int> block(u.n, 0);
  auto compute = [&](const std::vector<int>& blk) {
    // Condense inert-tau SCCs, then accumulate signatures in reverse
    // topological order.
    std::vector<std::vector<int>> inert(u.n);
    for (int v = 0; v < u.n; ++v)
      for (const auto& e : u.out[v])
        if (e.label == u.tau_id && blk[e.dst] == blk[v]) inert[v].push_back(e.dst);

    std::vector<int> idx(u.n, -1), low(u.n, 0), comp(u.n, -1);
    std::vector<bool> on_stack(u.n, false);
    std::vector<int> stack, order;  // order: components in completion order (children first)
    int counter = 0, ncomp = 0;
    // Iterative Tarjan to be safe on long tau chains.
    struct Frame {
      int v;
      size_t child;
    };
    for (int s = 0; s < u.n; ++s) {
      if (idx[s] >= 0) continue;
      std::vector<Frame> call{{s, 0}};
      while (!call.empty()) {
        auto& f = call.back();
        int v = f.v;
        if (f.child == 0) {
          idx[v] = low[v] = counter++;
          stack.push_back(v);
          on_stack[v] = true;
        }
        if (f.child < inert[v].size()) {
          int w = inert[v][f.child++];
          if (idx[w] < 0) {
            call.push_back({w, 0});
          } else if (on_stack[w]) {
            low[v] = std::min(low[v], idx[w]);
          }
          continue;
        }
        if (low[v] == idx[v]) {
          while (true) {
            int w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            comp[w] = ncomp;
            if (w == v) break;
          }
          ++ncomp;
        }
        call.pop_back();
        if (!call.empty()) {
          int parent = call.back().v;
          low[parent] = std::min(low[parent], low[v]);
        }
      }
    }
    // Component signature = union over members of local signatures and of
    // inert successors' component signatures. Tarjan numbers components
    // children-first, so accumulate in component order.
    std::vector<Signature> comp_sig(ncomp);
    std::vector<std::vector<int>> comp_members(ncomp);
    for (int v = 0; v < u.n; ++v) comp_members[comp[v]].push_back(v);
    for (int c = 0; c < ncomp; ++c) {
      Signature s;
      for (int v : comp_members[c]) {
        for (const auto& e : u.out[v]) {
          if (e.label == u.tau_id && blk[e.dst] == blk[v]) continue;  // inert
          s.push_back({e.label, blk[e.dst]});
        }
        if (u.terminal[v]) s.push_back({tick_base + u.cluster[v], -1});
        for (int w : inert[v]) {
          const Signature& ws = comp_sig[comp[w]];
          if (comp[w] != c) s.insert(s.end(), ws.begin(), ws.end());
        }
      }
      sort_unique(s);
      comp_sig[c] = std::move(s);
    }
    std::vector<Signature> sig(u.n);
    for (int v = 0; v < u.n; ++v) sig[v] = comp_sig[comp[v]];
    return sig;
  };

  int blocks = 1;
  while (true) {
    auto sig = compute(block);
    std::map<std::pair<int, Signature>, int> ids;
    std::vector<int> next(u.n);
    for (int v = 0; v < u.n; ++v) {
      auto key = std::make_pair(block[v], sig[v]);
      auto it = ids.find(key);
      if (it == ids.end()) it = ids.emplace(std::move(key), static_cast<int>(ids.size())).first;
      next[v] = it->second;
    }
    int nblocks = static_cast<int>(ids.size());
    block.swap(next);
    if (nblocks == blocks) return block;
    blocks = nblocks;
  }
}

// Experiment-hint extraction: follow the lexicographically least signature
// difference until the divergence is immediate.
std::vector<std::string> extract_trace(const Union& u, const std::vector<int>& block, int a,
                                       int b) {
  std::vector<std::string> trace;
  std::set<std::pair<int, int>> seen;
  while (a != b && block[a] != block[b] && seen.insert({a, b}).second) {
    if (u.terminal[a] != u.terminal[b]) break;  // divergence visible in place
    auto succ_blocks = [&](int v) {
      std::set<std::pair<int, int>> s;
      for (const auto& e : u.out[v]) s.insert({e.label, block[e.dst]});
      return s;
    };
    auto sa = succ_blocks(a), sb = succ_blocks(b);
    std::pair<int, int> pick{-1, -1};
    bool on_a = true;
    for (const auto& p : sa)
      if (!sb.count(p)) {
        pick = p;
        break;
      }
    if (pick.first < 0) {
      for (const auto& p : sb)
        if (!sa.count(p)) {
          pick = p;
          on_a = false;
          break;
        }
    }
    if (pick.first < 0) break;
    trace.push_back(u.labels[pick.first].key());
    int from = on_a ? a : b;
    int other = on_a ? b : a;
    int next_from = -1;
    for (const auto& e : u.out[from])
      if (e.label == pick.first && block[e.dst] == pick.second) {
        next_from = e.dst;
        break;
      }
    // Follow the closest same-label successor on the other side, if any.
    int next_other = -1;
    for (const auto& e : u.out[other])
      if (e.label == pick.first) {
        next_other = e.dst;
        break;
      }
    if (next_from < 0 || next_other < 0) break;
    a = on_a ? next_from : next_other;
    b = on_a ? next_other : next_from;
  }
  return trace;
}

// Root-state comparability gate shared by the public entry points.
bool roots_comparable(const Lts& a, const Lts& b, double tol, EquivalenceResult& r) {
  const DensityMatrix& sa = a.nodes[a.root].state;
  const DensityMatrix& sb = b.nodes[b.root].state;
  try {
    if (!states_equal(sa, sb, tol)) {
      r.verdict = Verdict::Incomparable;
      r.note = "root quantum states differ beyond tolerance";
      return false;
    }
  } catch (const std::invalid_argument&) {
    r.verdict = Verdict::Incomparable;
    r.note = "root quantum registers differ";
    return false;
  }
  return true;
}

void fill_blocks(EquivalenceResult& r, const Lts& a, const std::vector<int>& block) {
  r.blocks_a.assign(block.begin(), block.begin() + a.nodes.size());
  r.blocks_b.assign(block.begin() + a.nodes.size(), block.end());
}

}  // namespace

std::string verdict_line(const EquivalenceResult& r) {
  switch (r.verdict) {
    case Verdict::Related:
      return "RELATED";
    case Verdict::Incomparable:
      return "INCOMPARABLE";
    default: {
      std::string s = "NOT-RELATED";
      for (const auto& l : r.distinguishing_trace) s += " " + l;
      return s;
    }
  }
}

int verdict_exit_code(const EquivalenceResult& r) {
  switch (r.verdict) {
    case Verdict::Related:
      return 0;
    case Verdict::NotRelated:
      return 1;
    default:
      return 2;
  }
}

EquivalenceResult strong_bisim(const Lts& a, const Lts& b, double tol) {
  EquivalenceResult r;
  if (!roots_comparable(a, b, tol, r)) return r;
  Union u = make_union(a, b, tol, /*with_states=*/true);
  auto block = strong_blocks(u, true);
  fill_blocks(r, a, block);
  if (block[u.root_a] == block[u.root_b]) {
    r.verdict = Verdict::Related;
  } else {
    r.verdict = Verdict::NotRelated;
    r.distinguishing_trace = extract_trace(u, block, u.root_a, u.root_b);
  }
  return r;
}

EquivalenceResult classical_strong_bisim(const Lts& a, const Lts& b) {
  EquivalenceResult r;
  Union u = make_union(a, b, kDefaultTol, /*with_states=*/false);
  auto block = strong_blocks(u, false);
  fill_blocks(r, a, block);
  r.verdict = block[u.root_a] == block[u.root_b] ? Verdict::Related : Verdict::NotRelated;
  if (r.verdict == Verdict::NotRelated)
    r.distinguishing_trace = extract_trace(u, block, u.root_a, u.root_b);
  return r;
}

namespace {

EquivalenceResult branching_core(const Lts& a, const Lts& b, double tol, bool rooted) {
  EquivalenceResult r;
  if (!roots_comparable(a, b, tol, r)) return r;
  Union u = make_union(a, b, tol, /*with_states=*/true);
  auto block = branching_blocks(u);
  fill_blocks(r, a, block);

  bool related;
  if (!rooted) {
    related = block[u.root_a] == block[u.root_b];
  } else {
    // Root condition: initial transitions match directly with
    // branching-equivalent targets; root termination matches exactly.
    related = u.terminal[u.root_a] == u.terminal[u.root_b];
    auto root_sig = [&](int v) {
      Signature s;
      for (const auto& e : u.out[v]) s.push_back({e.label, block[e.dst]});
      sort_unique(s);
      return s;
    };
    related = related && root_sig(u.root_a) == root_sig(u.root_b);
  }
  if (related) {
    r.verdict = Verdict::Related;
    // Report absorbed state-changing tau steps (inert within final blocks).
    for (const auto& e : u.tau_edges)
      if (block[e.src] == block[e.dst] && e.state_dev > tol) r.tau_state_divergence = true;
    if (r.tau_state_divergence)
      r.note =
          "an absorbed tau step changes the quantum state; related by structure and final states";
  } else {
    r.verdict = Verdict::NotRelated;
    if (block[u.root_a] != block[u.root_b]) {
      r.distinguishing_trace = extract_trace(u, block, u.root_a, u.root_b);
    } else {
      // Rooted failure with branching-equivalent roots: report the first
      // mismatched root step.
      auto root_sig = [&](int v) {
        Signature s;
        for (const auto& e : u.out[v]) s.push_back({e.label, block[e.dst]});
        sort_unique(s);
        return s;
      };
      auto sa = root_sig(u.root_a), sb = root_sig(u.root_b);
      for (const auto& p : sa)
        if (std::find(sb.begin(), sb.end(), p) == sb.end()) {
          r.distinguishing_trace.push_back(u.labels[p.first].key());
          break;
        }
      if (r.distinguishing_trace.empty())
        for (const auto& p : sb)
          if (std::find(sa.begin(), sa.end(), p) == sa.end()) {
            r.distinguishing_trace.push_back(u.labels[p.first].key());
            break;
          }
    }
  }
  return r;
}

}  // namespace

EquivalenceResult branching_bisim(const Lts& a, const Lts& b, double tol) {
  return branching_core(a, b, tol, false);
}

EquivalenceResult rooted_branching_bisim(const Lts& a, const Lts& b, double tol) {
  return branching_core(a, b, tol, true);
}

}  // namespace qpa
