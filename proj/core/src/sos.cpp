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
#include "qpa/sos.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <ostream>
#include <unordered_map>

namespace qpa {

namespace {

bool set_matches(const std::vector<std::string>& entries, const ActionLabel& label) {
  for (const auto& e : entries)
    if (label_set_matches(e, label)) return true;
  return false;
}

class Stepper {
 public:
  Stepper(const Model& m, double tol) : m_(m), tol_(tol) {}

  std::vector<StepResult> run(const TermPtr& t, const DensityMatrix& rho) {
    std::vector<StepResult> out = steps(t, rho);
    std::sort(out.begin(), out.end(), [](const StepResult& a, const StepResult& b) {
      if (int c = ActionLabel::compare(a.label, b.label)) return c < 0;
      if (a.label.sync != b.label.sync) return !a.label.sync;
      bool an = a.target == nullptr, bn = b.target == nullptr;
      if (an != bn) return an;
      if (!an)
        if (int c = Term::compare(a.target, b.target)) return c < 0;
      return a.state.digest() < b.state.digest();
    });
    out.erase(std::unique(out.begin(), out.end(),
                          [this](const StepResult& a, const StepResult& b) {
                            if (ActionLabel::compare(a.label, b.label) != 0) return false;
                            if (a.label.sync != b.label.sync) return false;
                            bool an = a.target == nullptr, bn = b.target == nullptr;
                            if (an != bn) return false;
                            if (!an && !Term::equal(a.target, b.target)) return false;
                            return states_equal(a.state, b.state, tol_);
                          }),
              out.end());
    return out;
  }

 private:
  std::vector<StepResult> steps(const TermPtr& t, const DensityMatrix& rho) {
    switch (t->kind()) {
      case TermKind::Constant:
        return constant_step(t->label(), rho);
      case TermKind::Deadlock:
        return {};
      case TermKind::Choice: {
        auto out = steps(t->left(), rho);
        auto r = steps(t->right(), rho);
        out.insert(out.end(), r.begin(), r.end());
        return out;
      }
      case TermKind::Seq: {
        auto inner = steps(t->left(), rho);
        std::vector<StepResult> out;
        out.reserve(inner.size());
        for (auto& s : inner) {
          TermPtr tgt = s.target ? Term::seq(s.target, t->right()) : t->right();
          out.push_back({std::move(s.label), std::move(tgt), std::move(s.state)});
        }
        return out;
      }
      case TermKind::Merge: {
        auto ls = steps(t->left(), rho);
        auto rs = steps(t->right(), rho);
        std::vector<StepResult> out;
        // Interleaving, both sides.
        for (const auto& s : ls)
          out.push_back({s.label, s.target ? Term::merge(s.target, t->right()) : t->right(),
                         s.state});
        for (const auto& s : rs)
          out.push_back({s.label, s.target ? Term::merge(t->left(), s.target) : t->left(),
                         s.state});
        append_comm(ls, rs, rho, out);
        append_ent(ls, rs, out);
        return out;
      }
      case TermKind::LeftMerge: {
        auto ls = steps(t->left(), rho);
        std::vector<StepResult> out;
        out.reserve(ls.size());
        for (const auto& s : ls)
          out.push_back({s.label, s.target ? Term::merge(s.target, t->right()) : t->right(),
                         s.state});
        return out;
      }
      case TermKind::CommMerge: {
        auto ls = steps(t->left(), rho);
        auto rs = steps(t->right(), rho);
        std::vector<StepResult> out;
        append_comm(ls, rs, rho, out);
        return out;
      }
      case TermKind::EntMerge: {
        auto ls = steps(t->left(), rho);
        auto rs = steps(t->right(), rho);
        std::vector<StepResult> out;
        append_ent(ls, rs, out);
        return out;
      }
      case TermKind::Encapsulate: {
        auto inner = steps(t->body(), rho);
        std::vector<StepResult> out;
        for (auto& s : inner) {
          if (!s.label.sync && set_matches(t->name_set(), s.label)) continue;
          TermPtr tgt = s.target ? Term::encapsulate(t->name_set(), s.target) : nullptr;
          out.push_back({std::move(s.label), std::move(tgt), std::move(s.state)});
        }
        return out;
      }
      case TermKind::Abstract: {
        auto inner = steps(t->body(), rho);
        std::vector<StepResult> out;
        for (auto& s : inner) {
          ActionLabel label =
              set_matches(t->name_set(), s.label) ? ActionLabel::tau() : s.label;
          TermPtr tgt = s.target ? Term::abstraction(t->name_set(), s.target) : nullptr;
          out.push_back({std::move(label), std::move(tgt), std::move(s.state)});
        }
        return out;
      }
      case TermKind::RecVar: {
        const TermPtr* body = m_.find_equation(t->spec_ref(), t->var());
        if (!body)
          throw ModelError("unresolvable recursion variable '" + t->var() + "'");
        if (++unfolds_ > kMaxUnfolds)
          throw ModelError("recursion variable '" + t->var() +
                           "' unfolds without a guard");
        auto out = steps(*body, rho);
        --unfolds_;
        return out;
      }
      case TermKind::PatternVar:
        throw std::invalid_argument("step: open term (pattern variable '" + t->var() + "')");
    }
    return {};
  }

  std::vector<StepResult> constant_step(const ActionLabel& label, const DensityMatrix& rho) {
    switch (label.kind) {
      case LabelKind::QuantumOp: {
        const QuantumOperationDef* def = m_.find_op(label.name);
        if (!def) throw ModelError("undefined quantum operation '" + label.name + "'");
        return {{label, nullptr, apply_operation(*def, rho)}};
      }
      case LabelKind::Delta:
        return {};
      default:
        return {{label, nullptr, rho}};
    }
  }

  void append_comm(const std::vector<StepResult>& ls, const std::vector<StepResult>& rs,
                   const DensityMatrix& rho, std::vector<StepResult>& out) {
    for (const auto& a : ls) {
      if (a.label.kind != LabelKind::Classical) continue;
      for (const auto& b : rs) {
        if (b.label.kind != LabelKind::Classical) continue;
        auto res = m_.gamma.find(a.label, b.label);
        if (!res) continue;
        out.push_back({*res, merge_target(a.target, b.target), rho});
      }
    }
  }

  void append_ent(const std::vector<StepResult>& ls, const std::vector<StepResult>& rs,
                  std::vector<StepResult>& out) {
    auto match = [&](const StepResult& opstep, const StepResult& shstep) {
      if (opstep.label.kind != LabelKind::QuantumOp) return;
      if (shstep.label.kind != LabelKind::Shadow) return;
      if (shstep.label.shadow_of != opstep.label.name) return;
      ActionLabel label = opstep.label;
      label.sync = true;
      // The operation is applied once: the conclusion takes the state
      // produced by the operation premise.
      out.push_back({std::move(label), merge_target(opstep.target, shstep.target),
                     opstep.state});
    };
    for (const auto& a : ls)
      for (const auto& b : rs) {
        match(a, b);
        match(b, a);
      }
  }

  static TermPtr merge_target(const TermPtr& a, const TermPtr& b) {
    if (!a && !b) return nullptr;
    if (!a) return b;
    if (!b) return a;
    return Term::merge(a, b);
  }

  static constexpr int kMaxUnfolds = 4096;

  const Model& m_;
  double tol_;
  int unfolds_ = 0;
};

}  // namespace

std::vector<StepResult> step(const Configuration& c, const Model& m, double tol) {
  if (c.terminal()) return {};
  Stepper st(m, tol);
  return st.run(c.term, c.state);
}

Lts build_lts(const Configuration& root, const Model& m, const ExploreLimits& limits,
              double tol) {
  Lts lts;
  std::unordered_map<size_t, std::vector<int>> index;  // term hash -> node ids

  auto find_or_add = [&](const TermPtr& term, const DensityMatrix& state,
                         bool& added) -> int {
    size_t h = term ? term->hash() : 0;
    auto& bucket = index[h];
    for (int id : bucket) {
      const Lts::Node& n = lts.nodes[id];
      bool tmatch = (!term && !n.term) || (term && n.term && Term::equal(term, n.term));
      if (tmatch && states_equal(state, n.state, tol)) {
        added = false;
        return id;
      }
    }
    int id = static_cast<int>(lts.nodes.size());
    lts.nodes.push_back({term, state});
    lts.out.emplace_back();
    bucket.push_back(id);
    added = true;
    return id;
  };

  bool added = false;
  lts.root = find_or_add(root.term, root.state, added);
  std::deque<std::pair<int, size_t>> frontier;  // node id, depth
  frontier.push_back({lts.root, 0});

  while (!frontier.empty()) {
    auto [id, depth] = frontier.front();
    frontier.pop_front();
    if (lts.nodes[id].terminal()) continue;
    if (depth >= limits.max_depth) {
      lts.truncated = true;
      lts.truncation_reason = "max depth reached";
      continue;
    }
    Configuration c{lts.nodes[id].term, lts.nodes[id].state};
    auto succs = step(c, m, tol);
    for (auto& s : succs) {
      if (lts.nodes.size() >= limits.max_configs) {
        // Only grow past the cap when the target is an existing node.
        size_t h = s.target ? s.target->hash() : 0;
        bool exists = false;
        auto it = index.find(h);
        if (it != index.end()) {
          for (int cand : it->second) {
            const Lts::Node& n = lts.nodes[cand];
            bool tmatch =
                (!s.target && !n.term) || (s.target && n.term && Term::equal(s.target, n.term));
            if (tmatch && states_equal(s.state, n.state, tol)) {
              exists = true;
              break;
            }
          }
        }
        if (!exists) {
          lts.truncated = true;
          lts.truncation_reason = "max configurations reached";
          continue;
        }
      }
      bool fresh = false;
      int tgt = find_or_add(s.target, s.state, fresh);
      int tix = static_cast<int>(lts.transitions.size());
      lts.transitions.push_back({id, std::move(s.label), tgt});
      lts.out[id].push_back(tix);
      if (fresh) frontier.push_back({tgt, depth + 1});
    }
  }
  return lts;
}

void dump_lts(std::ostream& os, const Lts& lts, bool dump_states) {
  os << "lts root=" << lts.root << " nodes=" << lts.nodes.size()
     << " transitions=" << lts.transitions.size();
  if (lts.truncated) os << " truncated(" << lts.truncation_reason << ")";
  os << "\n";
  for (const auto& tr : lts.transitions)
    os << tr.src << " -" << tr.label.key() << "-> " << tr.dst << "\n";
  for (size_t i = 0; i < lts.nodes.size(); ++i) {
    const auto& n = lts.nodes[i];
    os << "state " << i << " ";
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(n.state.digest()));
    os << buf << (n.terminal() ? " terminated" : "") << "\n";
    if (dump_states) {
      const Matrix& m = n.state.matrix();
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        os << "  ";
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
          if (c) os << " ";
          os << m(r, c).real();
          if (m(r, c).imag() != 0.0) os << (m(r, c).imag() > 0 ? "+" : "") << m(r, c).imag() << "i";
        }
        os << "\n";
      }
    }
  }
}

void dump_lts_dot(std::ostream& os, const Lts& lts) {
  os << "digraph lts {\n  rankdir=LR;\n";
  for (size_t i = 0; i < lts.nodes.size(); ++i) {
    os << "  n" << i << " [shape=" << (lts.nodes[i].terminal() ? "doublecircle" : "circle")
       << (static_cast<int>(i) == lts.root ? ", style=bold" : "") << ", label=\"" << i
       << "\"];\n";
  }
  for (const auto& tr : lts.transitions)
    os << "  n" << tr.src << " -> n" << tr.dst << " [label=\"" << tr.label.key() << "\"];\n";
  os << "}\n";
}

}  // namespace qpa
