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
#include "qpa/e91.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace qpa {

namespace {

constexpr const char* kMeasA = "M_qa_Ka";
constexpr const char* kMeasB = "M_qb_Kb";

QuantumOperationDef measurement_channel(const std::string& name,
                                        std::vector<std::string> qubits) {
  QuantumOperationDef def;
  def.name = name;
  def.qubits = std::move(qubits);
  const Eigen::Index d = Eigen::Index(1) << def.qubits.size();
  for (Eigen::Index b = 0; b < d; ++b) {
    Matrix k = Matrix::Zero(d, d);
    k(b, b) = 1.0;  // |b><b| on the measured string
    def.kraus.push_back(std::move(k));
  }
  return def;
}

TermPtr prefixed(const ActionLabel& guard, const std::string& var, int spec) {
  return Term::seq(Term::constant(guard), Term::rec_var(var, spec));
}

TermPtr sum_over(const std::vector<std::string>& domain,
                 const std::function<TermPtr(const std::string&)>& make) {
  std::vector<TermPtr> summands;
  summands.reserve(domain.size());
  for (const auto& v : domain) summands.push_back(make(v));
  return rebuild_choice(summands);
}

}  // namespace

E91Model build_e91(const E91Options& opts) {
  if (opts.pairs < 1 || opts.pairs > 4)
    throw ModelError("build_e91: the number of EPR pairs must be in 1..4");
  if (opts.delta_i.empty() || opts.delta_o.empty())
    throw ModelError("build_e91: data domains must be nonempty");

  E91Model em;
  em.options = opts;
  Model& m = em.model;

  std::vector<std::string> alice_qubits, bob_qubits;
  for (int i = 1; i <= opts.pairs; ++i) {
    std::string qa = "qa" + std::to_string(i);
    std::string qb = "qb" + std::to_string(i);
    alice_qubits.push_back(qa);
    bob_qubits.push_back(qb);
    m.qubit_order.push_back(qa);
    m.qubit_order.push_back(qb);
    m.init_bells.push_back({1, {qa, qb}});
    em.pair_qubits.push_back({qa, qb});
  }
  m.ops.emplace(kMeasA, measurement_channel(kMeasA, alice_qubits));
  m.ops.emplace(kMeasB, measurement_channel(kMeasB, bob_qubits));
  m.domains["Di"] = opts.delta_i;
  m.domains["Do"] = opts.delta_o;

  const ActionLabel send_Q = ActionLabel::classical("send_Q", {"qb"});
  const ActionLabel recv_Q = ActionLabel::classical("receive_Q", {"qb"});
  const ActionLabel send_P_Bb = ActionLabel::classical("send_P", {"Bb"});
  const ActionLabel recv_P_Bb = ActionLabel::classical("receive_P", {"Bb"});
  const ActionLabel send_P_Ba = ActionLabel::classical("send_P", {"Ba"});
  const ActionLabel recv_P_Ba = ActionLabel::classical("receive_P", {"Ba"});
  const ActionLabel cmp = ActionLabel::classical("cmp", {"Kab", "Ka", "Kb", "Ba", "Bb"});
  const ActionLabel meas_a = ActionLabel::quantum(kMeasA, alice_qubits);
  const ActionLabel meas_b = ActionLabel::quantum(kMeasB, bob_qubits);
  const ActionLabel shadow_a = ActionLabel::shadow(kMeasA);
  const ActionLabel shadow_b = ActionLabel::shadow(kMeasB);

  m.gamma.define(send_Q, recv_Q, ActionLabel::comm_result("c_Q", {"qb"}));
  m.gamma.define(send_P_Bb, recv_P_Bb, ActionLabel::comm_result("c_P", {"Bb"}));
  m.gamma.define(send_P_Ba, recv_P_Ba, ActionLabel::comm_result("c_P", {"Ba"}));

  // Alice: spec 0. Bob: spec 1. External behavior loop: spec 2.
  RecursionSpec alice;
  alice.equations.emplace_back("A", sum_over(opts.delta_i, [&](const std::string& d) {
                                 return prefixed(ActionLabel::classical("receive_A", {d}), "A1",
                                                 0);
                               }));
  alice.equations.emplace_back("A1", prefixed(send_Q, "A2", 0));
  alice.equations.emplace_back("A2", prefixed(meas_a, "A3", 0));
  if (opts.mutation == E91Mutation::DropShadowInAliceA3)
    alice.equations.emplace_back("A3", prefixed(recv_P_Bb, "A5", 0));
  else
    alice.equations.emplace_back("A3", prefixed(shadow_b, "A4", 0));
  alice.equations.emplace_back("A4", prefixed(recv_P_Bb, "A5", 0));
  alice.equations.emplace_back("A5", prefixed(send_P_Ba, "A6", 0));
  alice.equations.emplace_back("A6", prefixed(cmp, "A", 0));

  RecursionSpec bob;
  bob.equations.emplace_back("B", prefixed(recv_Q, "B1", 1));
  if (opts.mutation == E91Mutation::DropShadowInBobB1)
    bob.equations.emplace_back("B1", prefixed(meas_b, "B3", 1));
  else
    bob.equations.emplace_back("B1", prefixed(shadow_a, "B2", 1));
  bob.equations.emplace_back("B2", prefixed(meas_b, "B3", 1));
  bob.equations.emplace_back("B3", prefixed(send_P_Bb, "B4", 1));
  bob.equations.emplace_back("B4", prefixed(recv_P_Ba, "B5", 1));
  bob.equations.emplace_back("B5", prefixed(cmp, "B6", 1));
  bob.equations.emplace_back("B6", sum_over(opts.delta_o, [&](const std::string& o) {
                               return prefixed(ActionLabel::classical("send_B", {o}), "B", 1);
                             }));

  RecursionSpec loop;
  loop.equations.emplace_back("X1", sum_over(opts.delta_i, [&](const std::string& d) {
                                return prefixed(ActionLabel::classical("receive_A", {d}), "X2",
                                                2);
                              }));
  loop.equations.emplace_back("X2", sum_over(opts.delta_o, [&](const std::string& o) {
                                return prefixed(ActionLabel::classical("send_B", {o}), "X1", 2);
                              }));

  m.recursion.push_back(std::move(alice));
  m.recursion.push_back(std::move(bob));
  m.recursion.push_back(std::move(loop));

  em.H = {send_Q.key(),     recv_Q.key(),   send_P_Bb.key(), recv_P_Bb.key(),
          send_P_Ba.key(),  recv_P_Ba.key(), meas_a.key(),    shadow_a.key(),
          meas_b.key(),     shadow_b.key()};
  em.I = {"c_Q(qb)", "c_P(Bb)", "c_P(Ba)", meas_a.key(), meas_b.key(), cmp.key()};

  TermPtr ab = Term::merge(Term::rec_var("A", 0), Term::rec_var("B", 1));
  em.encapsulated = Term::encapsulate(em.H, ab);
  em.system = Term::abstraction(em.I, em.encapsulated);
  em.spec_loop = Term::rec_var("X1", 2);
  em.initial = m.initial_state();

  m.terms.emplace_back("System", em.system);
  m.terms.emplace_back("SpecLoop", em.spec_loop);
  return em;
}

E91Report verify_e91(const E91Model& em, double tol, const ExploreLimits& limits) {
  const Model& m = em.model;
  E91Report rep;

  Lts sys = build_lts({em.system, em.initial}, m, limits, tol);
  Lts spec = build_lts({em.spec_loop, em.initial}, m, limits, tol);
  if (sys.truncated || spec.truncated)
    throw LimitError("verify_e91: LTS exploration exceeded the configured limits");
  rep.system_nodes = sys.num_nodes();
  rep.verdict = rooted_branching_bisim(sys, spec, tol);

  for (const auto& tr : sys.transitions)
    if (tr.label.name == "send_B") rep.output_reachable = true;
  for (size_t i = 0; i < sys.nodes.size(); ++i)
    if (!sys.nodes[i].terminal() && sys.out[i].empty()) rep.deadlock_reached = true;

  // Derivation chain: each protocol phase against its one-step unfolding,
  // at the quantum state the protocol has reached by that phase.
  auto enc = [&](const char* a, int sa, const char* b, int sb) {
    return Term::encapsulate(em.H,
                             Term::merge(Term::rec_var(a, sa), Term::rec_var(b, sb)));
  };
  auto seq_to = [&](const ActionLabel& l, TermPtr next) {
    return Term::seq(Term::constant(l), std::move(next));
  };
  const ActionLabel meas_a = ActionLabel::quantum(kMeasA, m.find_op(kMeasA)->qubits);
  const ActionLabel meas_b = ActionLabel::quantum(kMeasB, m.find_op(kMeasB)->qubits);
  DensityMatrix rho0 = em.initial;
  DensityMatrix rho1 = apply_operation(*m.find_op(kMeasA), rho0);
  DensityMatrix rho2 = apply_operation(*m.find_op(kMeasB), rho1);

  struct ChainEntry {
    TermPtr lhs;
    TermPtr rhs;
    const DensityMatrix* state;
  };
  std::vector<ChainEntry> entries;
  entries.push_back({enc("A", 0, "B", 1),
                     sum_over(em.options.delta_i,
                              [&](const std::string& d) {
                                return seq_to(ActionLabel::classical("receive_A", {d}),
                                              enc("A1", 0, "B", 1));
                              }),
                     &rho0});
  entries.push_back({enc("A1", 0, "B", 1),
                     seq_to(ActionLabel::comm_result("c_Q", {"qb"}), enc("A2", 0, "B1", 1)),
                     &rho0});
  entries.push_back({enc("A2", 0, "B1", 1), seq_to(meas_a, enc("A3", 0, "B2", 1)), &rho0});
  entries.push_back({enc("A3", 0, "B2", 1), seq_to(meas_b, enc("A4", 0, "B3", 1)), &rho1});
  entries.push_back({enc("A4", 0, "B3", 1),
                     seq_to(ActionLabel::comm_result("c_P", {"Bb"}), enc("A5", 0, "B4", 1)),
                     &rho2});
  entries.push_back({enc("A5", 0, "B4", 1),
                     seq_to(ActionLabel::comm_result("c_P", {"Ba"}), enc("A6", 0, "B5", 1)),
                     &rho2});
  const ActionLabel cmp = ActionLabel::classical("cmp", {"Kab", "Ka", "Kb", "Ba", "Bb"});
  entries.push_back({enc("A6", 0, "B5", 1), seq_to(cmp, enc("A", 0, "B5", 1)), &rho2});
  entries.push_back({enc("A", 0, "B5", 1), seq_to(cmp, enc("A", 0, "B6", 1)), &rho2});
  entries.push_back({enc("A", 0, "B6", 1),
                     sum_over(em.options.delta_o,
                              [&](const std::string& o) {
                                return seq_to(ActionLabel::classical("send_B", {o}),
                                              enc("A", 0, "B", 1));
                              }),
                     &rho2});

  for (const auto& e : entries) {
    ChainCheck cc;
    cc.lhs = render(e.lhs);
    cc.rhs = render(e.rhs);
    Lts la = build_lts({e.lhs, *e.state}, m, limits, tol);
    Lts lb = build_lts({e.rhs, *e.state}, m, limits, tol);
    cc.related = strong_bisim(la, lb, tol).related();
    cc.exact_single_step = la.out[la.root].size() == 1;
    rep.chain.push_back(std::move(cc));
  }

  // Post-measurement state of each pair, reduced from the full register.
  for (const auto& [qa, qb] : em.pair_qubits)
    rep.pair_states.push_back(rho2.partial_trace_keep({qa, qb}));
  Matrix ideal = Matrix::Zero(4, 4);
  ideal(0, 0) = 0.5;
  ideal(3, 3) = 0.5;
  for (const auto& ps : rep.pair_states)
    rep.max_pair_deviation =
        std::max(rep.max_pair_deviation, (ps.matrix() - ideal).cwiseAbs().maxCoeff());
  return rep;
}

}  // namespace qpa
