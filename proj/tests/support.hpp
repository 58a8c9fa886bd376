// Shared fixtures for unit and acceptance tests: a harness model with two
// classical actions, two measurement channels and a defined communication,
// plus deterministic random generators for terms and states.
#pragma once

#include <algorithm>
#include <functional>
#include <random>
#include <vector>

#include "qpa/bisim.hpp"
#include "qpa/e91.hpp"
#include "qpa/model.hpp"
#include "qpa/rewrite.hpp"
#include "qpa/sos.hpp"

namespace qpa::testing {

using Rng = std::mt19937_64;

inline QuantumOperationDef measz_channel(const std::string& name, const std::string& qubit) {
  QuantumOperationDef def;
  def.name = name;
  def.qubits = {qubit};
  Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  def.kraus = {p0, p1};
  return def;
}

inline QuantumOperationDef hadamard_op(const std::string& name, const std::string& qubit) {
  QuantumOperationDef def = builtin_gate("H", {qubit});
  def.name = name;
  return def;
}

/// Harness: classical a, b with gamma(a,b)=c; M = measurement channel on
/// q1, N = Hadamard on q2; register {q1, q2}.
inline Model harness_model() {
  Model m;
  m.qubit_order = {"q1", "q2"};
  m.ops.emplace("M", measz_channel("M", "q1"));
  m.ops.emplace("N", hadamard_op("N", "q2"));
  m.gamma.define(ActionLabel::classical("a"), ActionLabel::classical("b"),
                 ActionLabel::comm_result("c"));
  return m;
}

inline ActionLabel lbl_a() { return ActionLabel::classical("a"); }
inline ActionLabel lbl_b() { return ActionLabel::classical("b"); }
inline ActionLabel lbl_M() { return ActionLabel::quantum("M", {"q1"}); }
inline ActionLabel lbl_N() { return ActionLabel::quantum("N", {"q2"}); }

/// Atom pool for random closed terms over the harness model.
inline std::vector<TermPtr> full_atoms() {
  return {Term::constant(lbl_a()),
          Term::constant(lbl_b()),
          Term::constant(lbl_M()),
          Term::constant(lbl_N()),
          Term::constant(ActionLabel::shadow("M")),
          Term::constant(ActionLabel::shadow("N")),
          Term::deadlock(),
          Term::tau()};
}

/// Shadow-free atoms for basic terms.
inline std::vector<TermPtr> basic_atoms() {
  return {Term::constant(lbl_a()), Term::constant(lbl_b()), Term::constant(lbl_M()),
          Term::deadlock()};
}

inline TermPtr random_term(Rng& rng, int depth, const std::vector<TermPtr>& atoms,
                           bool merges) {
  std::uniform_int_distribution<size_t> atom_pick(0, atoms.size() - 1);
  if (depth <= 1) return atoms[atom_pick(rng)];
  std::uniform_int_distribution<int> op_pick(0, merges ? 5 : 1);
  std::uniform_int_distribution<int> stop(0, 3);
  if (stop(rng) == 0) return atoms[atom_pick(rng)];
  TermPtr l = random_term(rng, depth - 1, atoms, merges);
  TermPtr r = random_term(rng, depth - 1, atoms, merges);
  switch (op_pick(rng)) {
    case 0: return Term::choice(l, r);
    case 1: return Term::seq(l, r);
    case 2: return Term::merge(l, r);
    case 3: return Term::left_merge(l, r);
    case 4: return Term::comm_merge(l, r);
    default: return Term::ent_merge(l, r);
  }
}

inline TermPtr random_basic_term(Rng& rng, int depth) {
  return random_term(rng, depth, basic_atoms(), false);
}

inline TermPtr random_closed_term(Rng& rng, int depth) {
  return random_term(rng, depth, full_atoms(), true);
}

/// Random density matrix over `qubits`: a mixture of a few random pure
/// states, hermitian and unit trace by construction.
inline DensityMatrix random_state(Rng& rng, std::vector<std::string> qubits) {
  const Eigen::Index d = Eigen::Index(1) << qubits.size();
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix rho = Matrix::Zero(d, d);
  std::uniform_int_distribution<int> terms(1, 3);
  int k = terms(rng);
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXcd v(d);
    for (Eigen::Index j = 0; j < d; ++j) v(j) = Cplx(gauss(rng), gauss(rng));
    v.normalize();
    rho += v * v.adjoint();
  }
  rho /= static_cast<double>(k);
  return DensityMatrix::from_matrix(std::move(qubits), std::move(rho));
}

/// Random AC reshuffle: canonicalizes and rebuilds sums in a random order.
inline TermPtr ac_shuffle(Rng& rng, const TermPtr& t) {
  switch (t->kind()) {
    case TermKind::Choice: {
      std::vector<TermPtr> summands;
      flatten_choice(t, summands);
      for (auto& s : summands) s = ac_shuffle(rng, s);
      std::shuffle(summands.begin(), summands.end(), rng);
      // Random re-association.
      while (summands.size() > 1) {
        std::uniform_int_distribution<size_t> pick(0, summands.size() - 2);
        size_t i = pick(rng);
        summands[i] = Term::choice(summands[i], summands[i + 1]);
        summands.erase(summands.begin() + static_cast<long>(i) + 1);
      }
      return summands.front();
    }
    case TermKind::Constant:
    case TermKind::Deadlock:
    case TermKind::RecVar:
    case TermKind::PatternVar:
      return t;
    case TermKind::Encapsulate:
      return Term::encapsulate(t->name_set(), ac_shuffle(rng, t->body()));
    case TermKind::Abstract:
      return Term::abstraction(t->name_set(), ac_shuffle(rng, t->body()));
    default:
      return Term::binary(t->kind(), ac_shuffle(rng, t->left()), ac_shuffle(rng, t->right()));
  }
}

/// Test-side instantiation of rule patterns, independent of the rewriter's
/// matcher: term variables from `vars`, $u from `op`, $v/$w from the
/// harness gamma pair, $a/$b from `anyc`.
inline TermPtr instantiate_pattern(const TermPtr& pat,
                                   const std::function<TermPtr(const std::string&)>& vars,
                                   const ActionLabel& op, const ActionLabel& anyc_a,
                                   const ActionLabel& anyc_b, const Model& m) {
  switch (pat->kind()) {
    case TermKind::PatternVar:
      return vars(pat->var());
    case TermKind::Deadlock:
      return pat;
    case TermKind::Constant: {
      const ActionLabel& l = pat->label();
      if (l.kind == LabelKind::Shadow && l.shadow_of == "$u")
        return Term::constant(ActionLabel::shadow(op.name));
      if (l.name == "$u") return Term::constant(op);
      if (l.name == "$v") return Term::constant(lbl_a());
      if (l.name == "$w") return Term::constant(lbl_b());
      if (l.name == "$a") return Term::constant(anyc_a);
      if (l.name == "$b") return Term::constant(anyc_b);
      if (l.name == "$gamma") {
        auto res = m.gamma.find(lbl_a(), lbl_b());
        return Term::constant(*res);
      }
      return pat;
    }
    default: {
      TermPtr l = instantiate_pattern(pat->left(), vars, op, anyc_a, anyc_b, m);
      TermPtr r = instantiate_pattern(pat->right(), vars, op, anyc_a, anyc_b, m);
      if (pat->kind() == TermKind::Encapsulate) return Term::encapsulate(pat->name_set(), l);
      if (pat->kind() == TermKind::Abstract) return Term::abstraction(pat->name_set(), l);
      return Term::binary(pat->kind(), l, r);
    }
  }
}

inline EquivalenceResult check_strong(const Model& m, const TermPtr& s, const TermPtr& t,
                                      const DensityMatrix& rho, double tol = kDefaultTol) {
  Lts a = build_lts({s, rho}, m, {}, tol);
  Lts b = build_lts({t, rho}, m, {}, tol);
  return strong_bisim(a, b, tol);
}

}  // namespace qpa::testing
