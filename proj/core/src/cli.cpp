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
#include "qpa/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <ostream>
#include <sstream>

#include "qpa/bisim.hpp"
#include "qpa/e91.hpp"
#include "qpa/rewrite.hpp"
#include "qpa/spec_parser.hpp"

namespace qpa {

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const TermPtr& root_term(const Model& m, const std::string& name, const std::string& path) {
  if (!name.empty()) {
    const TermPtr* t = m.find_term(name);
    if (!t) throw ModelError("no definition named '" + name + "' in " + path);
    return *t;
  }
  if (m.terms.empty()) throw ModelError("no definitions in " + path);
  return m.terms.front().second;
}

struct CommonFlags {
  double tol = kDefaultTol;
  size_t max_configs = 100000;
  size_t max_depth = static_cast<size_t>(-1);

  void attach(CLI::App* cmd) {
    cmd->add_option("--tol", tol, "quantum state comparison tolerance")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-configs", max_configs, "LTS node cap")->check(CLI::PositiveNumber);
    cmd->add_option("--max-depth", max_depth, "LTS exploration depth cap")
        ->check(CLI::PositiveNumber);
  }
  ExploreLimits limits() const { return {max_configs, max_depth}; }
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"quantum process algebra toolkit"};
  app.require_subcommand(1);

  // parse
  auto* parse_cmd = app.add_subcommand("parse", "parse a specification and print a summary");
  std::string parse_file;
  bool parse_format = false;
  parse_cmd->add_option("file", parse_file, "specification file")->required();
  parse_cmd->add_flag("--format", parse_format, "re-emit the parsed model in canonical syntax");

  // normalize
  auto* norm_cmd = app.add_subcommand("normalize", "rewrite the root term to normal form");
  std::string norm_file, norm_term;
  bool norm_trace = false;
  norm_cmd->add_option("file", norm_file, "specification file")->required();
  norm_cmd->add_option("--term", norm_term, "definition to normalize (default: first)");
  norm_cmd->add_flag("--trace", norm_trace, "print the applied rule sequence");

  // lts
  auto* lts_cmd = app.add_subcommand("lts", "build and dump the transition system");
  std::string lts_file, lts_term;
  bool lts_dump_states = false, lts_dot = false;
  CommonFlags lts_flags;
  lts_cmd->add_option("file", lts_file, "specification file")->required();
  lts_cmd->add_option("--term", lts_term, "root definition (default: first)");
  lts_cmd->add_flag("--dump-states", lts_dump_states, "include full density matrices");
  lts_cmd->add_flag("--dot", lts_dot, "emit graphviz dot instead of the record format");
  lts_flags.attach(lts_cmd);

  // bisim
  auto* bisim_cmd = app.add_subcommand("bisim", "decide bisimilarity of two specifications");
  std::string bisim_a, bisim_b, bisim_ta, bisim_tb;
  std::string relation = "strong";
  CommonFlags bisim_flags;
  bisim_cmd->add_option("fileA", bisim_a, "left specification")->required();
  bisim_cmd->add_option("fileB", bisim_b, "right specification")->required();
  bisim_cmd->add_option("--term-a", bisim_ta, "root in fileA (default: first)");
  bisim_cmd->add_option("--term-b", bisim_tb, "root in fileB (default: first)");
  bisim_cmd
      ->add_option("--relation", relation, "strong | branching | rooted-branching")
      ->check(CLI::IsMember({"strong", "branching", "rooted-branching"}));
  bisim_flags.attach(bisim_cmd);

  // verify-e91
  auto* e91_cmd = app.add_subcommand("verify-e91", "build and verify the E91 model");
  int pairs = 1;
  std::string delta_i = "d0", delta_o = "k0", drop_shadow = "none";
  CommonFlags e91_flags;
  e91_cmd->add_option("--pairs", pairs, "number of EPR pairs (1..4)")
      ->check(CLI::Range(1, 4));
  e91_cmd->add_option("--delta-i", delta_i, "comma-separated input data domain");
  e91_cmd->add_option("--delta-o", delta_o, "comma-separated output data domain");
  e91_cmd
      ->add_option("--drop-shadow", drop_shadow,
                   "mutate the model: drop a shadow constant (none | alice | bob)")
      ->check(CLI::IsMember({"none", "alice", "bob"}));
  e91_flags.attach(e91_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*parse_cmd) {
      Model m = parse_spec(slurp(parse_file));
      if (parse_format) {
        out << format_model(m);
        return kExitOk;
      }
      out << "definitions: " << m.terms.size() << "\n";
      for (const auto& [name, t] : m.terms) {
        if (t->kind() == TermKind::RecVar && t->var() == name) continue;  // listed below
        out << "  " << name << " = " << render(t) << "\n";
      }
      out << "recursion specifications: " << m.recursion.size() << "\n";
      for (size_t i = 0; i < m.recursion.size(); ++i) {
        out << "  spec " << i << ":\n";
        for (const auto& [n, body] : m.recursion[i].equations)
          out << "    " << n << " = " << render(body) << "\n";
      }
      out << "quantum operations: " << m.ops.size() << "\n";
      for (const auto& [name, def] : m.ops) {
        out << "  " << name << " on";
        for (const auto& q : def.qubits) out << " " << q;
        out << " (" << def.kraus.size() << " Kraus terms)\n";
      }
      out << "gamma entries: " << m.gamma.entries().size() << "\n";
      for (const auto& [pair, res] : m.gamma.entries())
        out << "  gamma(" << pair.first << ", " << pair.second << ") = " << res.key() << "\n";
      return kExitOk;
    }

    if (*norm_cmd) {
      Model m = parse_spec(slurp(norm_file));
      const TermPtr& t = root_term(m, norm_term, norm_file);
      auto res = normal_form(t, m);
      out << render(res.nf) << "\n";
      if (norm_trace) {
        for (size_t i = 0; i < res.trace.size(); ++i)
          out << (i ? " " : "") << res.trace[i];
        if (!res.trace.empty()) out << "\n";
      }
      return kExitOk;
    }

    if (*lts_cmd) {
      Model m = parse_spec(slurp(lts_file));
      const TermPtr& t = root_term(m, lts_term, lts_file);
      Lts lts = build_lts({t, m.initial_state()}, m, lts_flags.limits(), lts_flags.tol);
      if (lts_dot)
        dump_lts_dot(out, lts);
      else
        dump_lts(out, lts, lts_dump_states);
      return kExitOk;
    }

    if (*bisim_cmd) {
      Model ma = parse_spec(slurp(bisim_a));
      Model mb = parse_spec(slurp(bisim_b));
      Lts la = build_lts({root_term(ma, bisim_ta, bisim_a), ma.initial_state()}, ma,
                         bisim_flags.limits(), bisim_flags.tol);
      Lts lb = build_lts({root_term(mb, bisim_tb, bisim_b), mb.initial_state()}, mb,
                         bisim_flags.limits(), bisim_flags.tol);
      EquivalenceResult r;
      if (relation == "strong")
        r = strong_bisim(la, lb, bisim_flags.tol);
      else if (relation == "branching")
        r = branching_bisim(la, lb, bisim_flags.tol);
      else
        r = rooted_branching_bisim(la, lb, bisim_flags.tol);
      out << verdict_line(r) << "\n";
      if (!r.note.empty()) err << r.note << "\n";
      return verdict_exit_code(r);
    }

    if (*e91_cmd) {
      E91Options opts;
      opts.pairs = pairs;
      opts.delta_i.clear();
      opts.delta_o.clear();
      std::stringstream si(delta_i), so(delta_o);
      std::string item;
      while (std::getline(si, item, ',')) opts.delta_i.push_back(item);
      while (std::getline(so, item, ',')) opts.delta_o.push_back(item);
      if (drop_shadow == "alice") opts.mutation = E91Mutation::DropShadowInAliceA3;
      if (drop_shadow == "bob") opts.mutation = E91Mutation::DropShadowInBobB1;

      E91Model em = build_e91(opts);
      E91Report rep = verify_e91(em, e91_flags.tol, e91_flags.limits());
      out << "system nodes: " << rep.system_nodes << "\n";
      out << "external behavior: " << verdict_line(rep.verdict) << "\n";
      if (!rep.verdict.note.empty()) out << "note: " << rep.verdict.note << "\n";
      out << "derivation chain:\n";
      for (const auto& c : rep.chain)
        out << "  " << (c.related ? "ok " : "FAIL ") << c.lhs << " = " << c.rhs
            << (c.exact_single_step ? "" : "  [additional interleavings]") << "\n";
      out << "deadlock reached: " << (rep.deadlock_reached ? "yes" : "no") << "\n";
      out << "output reachable: " << (rep.output_reachable ? "yes" : "no") << "\n";
      for (size_t i = 0; i < rep.pair_states.size(); ++i) {
        const Matrix& pm = rep.pair_states[i].matrix();
        out << "pair " << (i + 1) << " post-measurement state diag:";
        for (Eigen::Index d = 0; d < pm.rows(); ++d) out << " " << pm(d, d).real();
        out << "\n";
      }
      out << "max deviation from correlated mixture: " << rep.max_pair_deviation << "\n";
      return verdict_exit_code(rep.verdict);
    }
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const LimitError& e) {
    err << "limit exceeded: " << e.what() << "\n";
    return kExitLimit;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  }
  return kExitUsage;
}

}  // namespace qpa
