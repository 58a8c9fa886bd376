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
#include "qpa/spec_parser.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace qpa {

namespace {

enum class Tok {
  Ident, Number, Equals, Plus, Minus, Dot, Par, LeftMerge, CommMerge, EntMerge,
  LParen, RParen, LBracket, RBracket, LBrace, RBrace, Comma, Semicolon, Colon, End,
};

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

class Lexer {
 public:
  Lexer(const std::string& src, int line) : src_(src), line_(line) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_ws();
      if (pos_ >= src_.size() || src_[pos_] == '#') break;
      out.push_back(next());
    }
    out.push_back({Tok::End, "", line_, static_cast<int>(pos_) + 1});
    return out;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(line_, static_cast<int>(pos_) + 1, msg);
  }

  Token next() {
    int col = static_cast<int>(pos_) + 1;
    char c = src_[pos_];
    auto tok = [&](Tok k, size_t len) {
      Token t{k, src_.substr(pos_, len), line_, col};
      pos_ += len;
      return t;
    };
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t end = pos_;
      while (end < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
        ++end;
      return tok(Tok::Ident, end - pos_);
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t end = pos_;
      while (end < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[end])) ||
                                   src_[end] == '.' || src_[end] == 'e' || src_[end] == 'E' ||
                                   ((src_[end] == '+' || src_[end] == '-') && end > pos_ &&
                                    (src_[end - 1] == 'e' || src_[end - 1] == 'E'))))
        ++end;
      return tok(Tok::Number, end - pos_);
    }
    switch (c) {
      case '=': return tok(Tok::Equals, 1);
      case '+': return tok(Tok::Plus, 1);
      case '-': return tok(Tok::Minus, 1);
      case '.': return tok(Tok::Dot, 1);
      case '(': return tok(Tok::LParen, 1);
      case ')': return tok(Tok::RParen, 1);
      case '[': return tok(Tok::LBracket, 1);
      case ']': return tok(Tok::RBracket, 1);
      case '{': return tok(Tok::LBrace, 1);
      case '}': return tok(Tok::RBrace, 1);
      case ',': return tok(Tok::Comma, 1);
      case ';': return tok(Tok::Semicolon, 1);
      case ':': return tok(Tok::Colon, 1);
      case '|':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '|') return tok(Tok::Par, 2);
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '_') return tok(Tok::LeftMerge, 2);
        return tok(Tok::CommMerge, 1);
      case '>':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '<') return tok(Tok::EntMerge, 2);
        fail("unexpected '>'");
      default:
        fail(std::string("unexpected character '") + c + "'");
    }
  }

  const std::string& src_;
  int line_;
  size_t pos_ = 0;
};

bool is_upper_start(const std::string& s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s[0]));
}

// A definition body as parsed, before name resolution. References to
// defined process names are RecVar nodes with spec_ref -1.
struct RawDef {
  std::string name;
  TermPtr body;
  int line = 0;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  Model run() {
    split_lines();
    // Declarations first so terms can resolve ops, domains and gamma.
    for (auto& [line_no, line] : lines_) {
      Lexer lx(line, line_no);
      auto toks = lx.run();
      if (toks.front().kind != Tok::Ident) continue;
      const std::string& head = toks.front().text;
      if (head == "domain" || head == "kraus" || head == "gamma" || head == "init") {
        toks_ = std::move(toks);
        at_ = 0;
        if (head == "domain") parse_domain();
        else if (head == "kraus") parse_kraus();
        else if (head == "gamma") parse_gamma();
        else parse_init();
      }
    }
    for (auto& [line_no, line] : lines_) {
      Lexer lx(line, line_no);
      auto toks = lx.run();
      if (toks.front().kind != Tok::Ident) {
        if (toks.front().kind != Tok::End)
          throw ParseError(line_no, toks.front().col, "expected a definition");
        continue;
      }
      const std::string& head = toks.front().text;
      if (head == "domain" || head == "kraus" || head == "gamma" || head == "init") continue;
      toks_ = std::move(toks);
      at_ = 0;
      parse_definition();
    }
    resolve();
    finalize_register();
    return std::move(model_);
  }

 private:
  // ---- token helpers -------------------------------------------------
  const Token& peek(int ahead = 0) const {
    size_t i = at_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  Token eat() { return toks_[std::min(at_++, toks_.size() - 1)]; }
  [[noreturn]] void fail(const Token& t, const std::string& msg) {
    throw ParseError(t.line, t.col, msg);
  }
  Token expect(Tok k, const std::string& what) {
    if (peek().kind != k) fail(peek(), "expected " + what);
    return eat();
  }

  void split_lines() {
    std::istringstream in(text_);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      size_t i = line.find_first_not_of(" \t\r");
      if (i == std::string::npos || line[i] == '#') continue;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines_.emplace_back(n, line);
    }
  }

  // ---- declarations ---------------------------------------------------
  void parse_domain() {
    eat();  // 'domain'
    Token name = expect(Tok::Ident, "domain name");
    expect(Tok::Equals, "'='");
    expect(Tok::LBrace, "'{'");
    std::vector<std::string> values;
    while (true) {
      values.push_back(expect(Tok::Ident, "domain value").text);
      if (peek().kind == Tok::Comma) { eat(); continue; }
      break;
    }
    expect(Tok::RBrace, "'}'");
    expect(Tok::End, "end of line");
    if (model_.domains.count(name.text)) fail(name, "duplicate domain '" + name.text + "'");
    model_.domains[name.text] = std::move(values);
  }

  Cplx parse_complex() {
    double sign = 1.0;
    if (peek().kind == Tok::Minus) { eat(); sign = -1.0; }
    else if (peek().kind == Tok::Plus) eat();
    Token num = expect(Tok::Number, "number");
    double first = sign * std::stod(num.text);
    bool first_imag = false;
    if (peek().kind == Tok::Ident && peek().text == "i") { eat(); first_imag = true; }
    if (first_imag) return Cplx(0.0, first);
    if (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      double s2 = eat().kind == Tok::Minus ? -1.0 : 1.0;
      Token num2 = expect(Tok::Number, "imaginary part");
      Token i = expect(Tok::Ident, "'i'");
      if (i.text != "i") fail(i, "expected 'i'");
      return Cplx(first, s2 * std::stod(num2.text));
    }
    return Cplx(first, 0.0);
  }

  Matrix parse_matrix(Eigen::Index dim) {
    expect(Tok::LBracket, "'['");
    Matrix m(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
      expect(Tok::LBracket, "'[' starting a row");
      for (Eigen::Index c = 0; c < dim; ++c) {
        m(r, c) = parse_complex();
        if (c + 1 < dim) expect(Tok::Comma, "','");
      }
      expect(Tok::RBracket, "']' ending the row");
      if (r + 1 < dim) expect(Tok::Comma, "','");
    }
    expect(Tok::RBracket, "']' ending the matrix");
    return m;
  }

  void parse_kraus() {
    eat();  // 'kraus'
    Token name = expect(Tok::Ident, "operation name");
    if (is_builtin_gate(name.text)) fail(name, "'" + name.text + "' is a builtin gate name");
    if (model_.ops.count(name.text)) fail(name, "duplicate operation '" + name.text + "'");
    expect(Tok::LBracket, "'[' and a qubit list");
    std::vector<std::string> qubits;
    while (true) {
      qubits.push_back(expect(Tok::Ident, "qubit name").text);
      if (peek().kind == Tok::Comma) { eat(); continue; }
      break;
    }
    expect(Tok::RBracket, "']'");
    expect(Tok::Equals, "'='");
    Eigen::Index dim = Eigen::Index(1) << qubits.size();
    QuantumOperationDef def;
    def.name = name.text;
    def.qubits = qubits;
    while (true) {
      def.kraus.push_back(parse_matrix(dim));
      if (peek().kind == Tok::Semicolon) { eat(); continue; }
      break;
    }
    expect(Tok::End, "end of line");
    try {
      def.validate();
    } catch (const std::invalid_argument& e) {
      fail(name, e.what());
    }
    note_qubits(qubits);
    model_.ops.emplace(name.text, std::move(def));
  }

  ActionLabel parse_plain_label() {
    Token name = expect(Tok::Ident, "action name");
    std::vector<std::string> args;
    if (peek().kind == Tok::LParen) {
      eat();
      while (true) {
        args.push_back(expect(Tok::Ident, "argument").text);
        if (peek().kind == Tok::Comma) { eat(); continue; }
        break;
      }
      expect(Tok::RParen, "')'");
    }
    return ActionLabel::classical(name.text, std::move(args));
  }

  void parse_gamma() {
    eat();  // 'gamma'
    Token open = expect(Tok::LParen, "'('");
    ActionLabel a = parse_plain_label();
    expect(Tok::Comma, "','");
    ActionLabel b = parse_plain_label();
    expect(Tok::RParen, "')'");
    expect(Tok::Equals, "'='");
    ActionLabel r = parse_plain_label();
    expect(Tok::End, "end of line");
    ActionLabel result = ActionLabel::comm_result(r.name, r.data_args);
    try {
      model_.gamma.define(a, b, result);
    } catch (const ModelError& e) {
      fail(open, e.what());
    }
  }

  void parse_init() {
    eat();  // 'init'
    Token what = expect(Tok::Ident, "'bellK'");
    if (what.text.size() != 5 || what.text.rfind("bell", 0) != 0 || what.text[4] < '1' ||
        what.text[4] > '4')
      fail(what, "expected bell1..bell4");
    int k = what.text[4] - '0';
    std::string q1 = expect(Tok::Ident, "qubit").text;
    std::string q2 = expect(Tok::Ident, "qubit").text;
    expect(Tok::End, "end of line");
    note_qubits({q1, q2});
    model_.init_bells.push_back({k, {q1, q2}});
  }

  // ---- definitions ----------------------------------------------------
  void parse_definition() {
    Token name = expect(Tok::Ident, "definition name");
    if (!is_upper_start(name.text))
      fail(name, "definition names start with an uppercase letter; lowercase names denote "
                 "actions");
    expect(Tok::Equals, "'=' (definitions have the form name = term)");
    TermPtr body = parse_expr();
    expect(Tok::End, "end of line");
    for (const auto& d : defs_)
      if (d.name == name.text) fail(name, "duplicate definition of '" + name.text + "'");
    if (model_.ops.count(name.text))
      fail(name, "'" + name.text + "' is already an operation name");
    defs_.push_back({name.text, body, name.line});
  }

  // expr := merge ('+' expr)?           right-associative
  TermPtr parse_expr() {
    TermPtr l = parse_merge();
    if (peek().kind == Tok::Plus) {
      eat();
      return Term::choice(l, parse_expr());
    }
    return l;
  }

  static bool is_merge_tok(Tok k) {
    return k == Tok::Par || k == Tok::LeftMerge || k == Tok::CommMerge || k == Tok::EntMerge;
  }

  // merge := seq (MERGE seq)*           left-associative, one kind per level
  TermPtr parse_merge() {
    TermPtr l = parse_seq();
    Tok level = Tok::End;
    while (is_merge_tok(peek().kind)) {
      Token op = eat();
      if (level != Tok::End && op.kind != level)
        fail(op, "mixed merge operators require parentheses");
      level = op.kind;
      TermPtr r = parse_seq();
      switch (op.kind) {
        case Tok::Par: l = Term::merge(l, r); break;
        case Tok::LeftMerge: l = Term::left_merge(l, r); break;
        case Tok::CommMerge: l = Term::comm_merge(l, r); break;
        default: l = Term::ent_merge(l, r); break;
      }
    }
    return l;
  }

  // seq := atom ('.' seq)?              right-associative
  TermPtr parse_seq() {
    TermPtr l = parse_atom();
    if (peek().kind == Tok::Dot) {
      eat();
      return Term::seq(l, parse_seq());
    }
    return l;
  }

  std::vector<std::string> parse_label_set() {
    expect(Tok::LBrace, "'{'");
    std::vector<std::string> entries;
    while (true) {
      Token name = expect(Tok::Ident, "label");
      std::string entry = name.text;
      if (name.text == "shadow") {
        expect(Tok::LBracket, "'['");
        entry += '[' + parse_op_name_shadow() + ']';
      } else if (peek().kind == Tok::LParen) {
        eat();
        entry += '(';
        while (true) {
          entry += expect(Tok::Ident, "argument").text;
          if (peek().kind == Tok::Comma) { eat(); entry += ','; continue; }
          break;
        }
        expect(Tok::RParen, "')'");
        entry += ')';
      }
      entries.push_back(std::move(entry));
      if (peek().kind == Tok::Comma) { eat(); continue; }
      break;
    }
    expect(Tok::RBrace, "'}'");
    return entries;
  }

  void register_builtin(const std::string& gate, const std::vector<std::string>& qubits) {
    std::string key = gate + '[';
    for (size_t i = 0; i < qubits.size(); ++i) key += (i ? "," : "") + qubits[i];
    key += ']';
    if (!model_.ops.count(key)) {
      auto def = builtin_gate(gate, qubits);
      def.name = key;
      note_qubits(qubits);
      model_.ops.emplace(key, std::move(def));
    }
  }

  TermPtr parse_atom() {
    const Token& t = peek();
    if (t.kind == Tok::LParen) {
      eat();
      TermPtr e = parse_expr();
      expect(Tok::RParen, "')'");
      return e;
    }
    if (t.kind != Tok::Ident) fail(t, "expected a term");
    Token name = eat();
    if (name.text == "delta") return Term::deadlock();
    if (name.text == "tau") return Term::tau();
    if (name.text == "shadow") {
      expect(Tok::LBracket, "'['");
      std::string op = parse_op_name_shadow();
      return Term::constant(ActionLabel::shadow(op));
    }
    if (name.text == "encap" || name.text == "abstract") {
      auto names = parse_label_set();
      expect(Tok::LParen, "'('");
      TermPtr body = parse_expr();
      expect(Tok::RParen, "')'");
      return name.text == "encap" ? Term::encapsulate(std::move(names), body)
                                  : Term::abstraction(std::move(names), body);
    }
    if (name.text == "sum") {
      expect(Tok::LParen, "'('");
      Token var = expect(Tok::Ident, "summation variable");
      expect(Tok::Colon, "':'");
      Token dom = expect(Tok::Ident, "domain name");
      expect(Tok::Comma, "','");
      TermPtr body = parse_expr();
      expect(Tok::RParen, "')'");
      auto it = model_.domains.find(dom.text);
      if (it == model_.domains.end()) fail(dom, "unbound domain '" + dom.text + "'");
      std::vector<TermPtr> instances;
      for (const auto& v : it->second) instances.push_back(expand_sum(body, var.text, v));
      return rebuild_choice(instances);
    }
    // Identifier atom: quantum operation, process reference, or classical
    // action, possibly with [qubits] and (args).
    std::vector<std::string> qubits;
    bool has_qubits = false;
    if (peek().kind == Tok::LBracket) {
      has_qubits = true;
      eat();
      while (true) {
        qubits.push_back(expect(Tok::Ident, "qubit").text);
        if (peek().kind == Tok::Comma) { eat(); continue; }
        break;
      }
      expect(Tok::RBracket, "']'");
    }
    std::vector<std::string> args;
    if (peek().kind == Tok::LParen) {
      eat();
      while (true) {
        args.push_back(expect(Tok::Ident, "argument").text);
        if (peek().kind == Tok::Comma) { eat(); continue; }
        break;
      }
      expect(Tok::RParen, "')'");
    }
    if (has_qubits && is_builtin_gate(name.text)) {
      register_builtin(name.text, qubits);
      std::string key = name.text + '[';
      for (size_t i = 0; i < qubits.size(); ++i) key += (i ? "," : "") + qubits[i];
      key += ']';
      return Term::constant(ActionLabel::quantum(key, qubits, std::move(args)));
    }
    if (auto it = model_.ops.find(name.text); it != model_.ops.end()) {
      if (has_qubits && qubits != it->second.qubits)
        fail(name, "operation '" + name.text + "' is declared on a different qubit list");
      return Term::constant(ActionLabel::quantum(name.text, it->second.qubits, std::move(args)));
    }
    if (has_qubits) fail(name, "unbound operation '" + name.text + "'");
    if (is_upper_start(name.text)) {
      if (!args.empty()) fail(name, "process references take no arguments");
      return Term::rec_var(name.text, -1);
    }
    return Term::constant(ActionLabel::classical(name.text, std::move(args)));
  }

  // shadow[...] body; the closing ']' is consumed here.
  std::string parse_op_name_shadow() {
    Token name = expect(Tok::Ident, "operation name");
    std::string out = name.text;
    if (peek().kind == Tok::LBracket) {
      eat();
      std::vector<std::string> qubits;
      while (true) {
        qubits.push_back(expect(Tok::Ident, "qubit").text);
        if (peek().kind == Tok::Comma) { eat(); continue; }
        break;
      }
      expect(Tok::RBracket, "']'");
      if (!is_builtin_gate(name.text)) fail(name, "'" + name.text + "' is not a builtin gate");
      register_builtin(name.text, qubits);
      out += '[';
      for (size_t i = 0; i < qubits.size(); ++i) out += (i ? "," : "") + qubits[i];
      out += ']';
    } else if (!model_.ops.count(out)) {
      if (is_builtin_gate(out)) fail(name, "builtin gate '" + out + "' needs qubit arguments");
      fail(name, "unbound operation '" + out + "' in shadow");
    }
    expect(Tok::RBracket, "']' closing shadow");
    return out;
  }

  TermPtr expand_sum(const TermPtr& t, const std::string& var, const std::string& value) {
    switch (t->kind()) {
      case TermKind::Constant: {
        ActionLabel l = t->label();
        bool changed = false;
        for (auto& a : l.data_args)
          if (a == var) { a = value; changed = true; }
        return changed ? Term::constant(std::move(l)) : t;
      }
      case TermKind::Deadlock:
      case TermKind::RecVar:
      case TermKind::PatternVar:
        return t;
      case TermKind::Encapsulate:
        return Term::encapsulate(t->name_set(), expand_sum(t->body(), var, value));
      case TermKind::Abstract:
        return Term::abstraction(t->name_set(), expand_sum(t->body(), var, value));
      default:
        return Term::binary(t->kind(), expand_sum(t->left(), var, value),
                            expand_sum(t->right(), var, value));
    }
  }

  // ---- name resolution -------------------------------------------------
  void collect_refs(const TermPtr& t, std::set<std::string>& out) {
    switch (t->kind()) {
      case TermKind::RecVar: out.insert(t->var()); return;
      case TermKind::Constant:
      case TermKind::Deadlock:
      case TermKind::PatternVar: return;
      case TermKind::Encapsulate:
      case TermKind::Abstract: collect_refs(t->body(), out); return;
      default:
        collect_refs(t->left(), out);
        collect_refs(t->right(), out);
    }
  }

  TermPtr resolve_refs(const TermPtr& t, const std::map<std::string, TermPtr>& repl) {
    switch (t->kind()) {
      case TermKind::RecVar: {
        auto it = repl.find(t->var());
        return it == repl.end() ? t : it->second;
      }
      case TermKind::Constant:
      case TermKind::Deadlock:
      case TermKind::PatternVar:
        return t;
      case TermKind::Encapsulate: {
        TermPtr b = resolve_refs(t->body(), repl);
        return b == t->body() ? t : Term::encapsulate(t->name_set(), b);
      }
      case TermKind::Abstract: {
        TermPtr b = resolve_refs(t->body(), repl);
        return b == t->body() ? t : Term::abstraction(t->name_set(), b);
      }
      default: {
        TermPtr l = resolve_refs(t->left(), repl);
        TermPtr r = resolve_refs(t->right(), repl);
        if (l == t->left() && r == t->right()) return t;
        return Term::binary(t->kind(), l, r);
      }
    }
  }

  void check_guarded_linear(const RawDef& def, const TermPtr& body) {
    std::vector<TermPtr> summands;
    flatten_choice(body, summands);
    for (const auto& s : summands) {
      if (s->kind() == TermKind::Constant) continue;
      if (s->kind() == TermKind::RecVar)
        throw ParseError(def.line, 1,
                         "unguarded recursion: variable '" + s->var() + "' in the body of '" +
                             def.name + "' has no action prefix");
      if (s->kind() == TermKind::Seq && s->left()->kind() == TermKind::Constant &&
          s->right()->kind() == TermKind::RecVar)
        continue;
      throw ParseError(def.line, 1,
                       "non-linear recursion body for '" + def.name +
                           "': summands must be an action or action . variable");
    }
  }

  void resolve() {
    std::map<std::string, int> index;
    for (size_t i = 0; i < defs_.size(); ++i) index[defs_[i].name] = static_cast<int>(i);

    // Reference graph and unbound-name check.
    std::vector<std::vector<int>> adj(defs_.size());
    for (size_t i = 0; i < defs_.size(); ++i) {
      std::set<std::string> refs;
      collect_refs(defs_[i].body, refs);
      for (const auto& r : refs) {
        auto it = index.find(r);
        if (it == index.end())
          throw ParseError(defs_[i].line, 1,
                           "unbound identifier '" + r + "' in definition of '" + defs_[i].name +
                               "'");
        adj[i].push_back(it->second);
      }
    }

    // Tarjan SCC to find recursive names.
    const int n = static_cast<int>(defs_.size());
    std::vector<int> idx(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack;
    int counter = 0, ncomp = 0;
    std::function<void(int)> strongconnect = [&](int v) {
      idx[v] = low[v] = counter++;
      stack.push_back(v);
      on_stack[v] = true;
      for (int w : adj[v]) {
        if (idx[w] < 0) {
          strongconnect(w);
          low[v] = std::min(low[v], low[w]);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], idx[w]);
        }
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
    };
    for (int v = 0; v < n; ++v)
      if (idx[v] < 0) strongconnect(v);

    std::vector<bool> recursive(n, false);
    std::vector<int> comp_size(ncomp, 0);
    for (int v = 0; v < n; ++v) ++comp_size[comp[v]];
    for (int v = 0; v < n; ++v) {
      if (comp_size[comp[v]] > 1) recursive[v] = true;
      for (int w : adj[v])
        if (w == v) recursive[v] = true;  // self-loop
    }

    // Recursive names that reference each other share a specification:
    // union-find over reference edges between recursive names.
    std::vector<int> parent(n);
    for (int v = 0; v < n; ++v) parent[v] = v;
    std::function<int(int)> find = [&](int v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    for (int v = 0; v < n; ++v)
      if (recursive[v])
        for (int w : adj[v])
          if (recursive[w]) parent[find(v)] = find(w);

    std::map<int, int> spec_of_root;  // union root -> spec index
    for (int v = 0; v < n; ++v) {
      if (!recursive[v]) continue;
      int r = find(v);
      if (!spec_of_root.count(r)) {
        spec_of_root[r] = static_cast<int>(model_.recursion.size());
        model_.recursion.emplace_back();
      }
    }

    // Inline plain names bottom-up (reverse topological order given by
    // Tarjan component numbering: components are numbered children-first).
    std::vector<int> order(n);
    for (int v = 0; v < n; ++v) order[v] = v;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return comp[a] < comp[b]; });

    std::map<std::string, TermPtr> resolved;  // plain name -> inlined body
    std::map<std::string, TermPtr> final_ref; // every name -> term to substitute
    // First map recursive names to their RecVar form.
    for (int v = 0; v < n; ++v)
      if (recursive[v])
        final_ref[defs_[v].name] = Term::rec_var(defs_[v].name, spec_of_root[find(v)]);

    for (int v : order) {
      if (recursive[v]) continue;
      TermPtr body = resolve_refs(defs_[v].body, final_ref);
      resolved[defs_[v].name] = body;
      final_ref[defs_[v].name] = body;
    }
    // Now resolve recursive bodies and validate them.
    std::vector<TermPtr> rec_bodies(n);
    for (int v = 0; v < n; ++v) {
      if (!recursive[v]) continue;
      rec_bodies[v] = resolve_refs(defs_[v].body, final_ref);
      check_guarded_linear(defs_[v], rec_bodies[v]);
    }
    for (int v = 0; v < n; ++v)
      if (recursive[v])
        model_.recursion[spec_of_root[find(v)]].equations.emplace_back(defs_[v].name,
                                                                       rec_bodies[v]);
    // Named terms, in file order: plain names inline, recursive names as
    // their variable.
    for (int v = 0; v < n; ++v)
      model_.terms.emplace_back(defs_[v].name,
                                recursive[v] ? final_ref[defs_[v].name] : resolved[defs_[v].name]);
  }

  void note_qubits(const std::vector<std::string>& qs) {
    for (const auto& q : qs)
      if (std::find(qubit_seen_.begin(), qubit_seen_.end(), q) == qubit_seen_.end())
        qubit_seen_.push_back(q);
  }

  void finalize_register() {
    model_.qubit_order = qubit_seen_;
    std::set<std::string> in_bell;
    for (const auto& [k, qs] : model_.init_bells) {
      (void)k;
      if (!in_bell.insert(qs.first).second || !in_bell.insert(qs.second).second)
        throw ParseError(1, 1, "qubit occurs in more than one init bell directive");
    }
  }

  const std::string& text_;
  std::vector<std::pair<int, std::string>> lines_;
  std::vector<Token> toks_;
  size_t at_ = 0;
  Model model_;
  std::vector<RawDef> defs_;
  std::vector<std::string> qubit_seen_;
};

}  // namespace

Model parse_spec(const std::string& text) {
  Parser p(text);
  return p.run();
}

namespace {

std::string format_complex(const Cplx& c) {
  std::ostringstream os;
  os.precision(17);
  if (c.imag() == 0.0) {
    os << c.real();
  } else if (c.real() == 0.0) {
    os << c.imag() << "i";
  } else {
    os << c.real();
    if (c.imag() >= 0) os << "+";
    os << c.imag() << "i";
  }
  return os.str();
}

}  // namespace

std::string format_model(const Model& m) {
  std::ostringstream os;
  for (const auto& [name, values] : m.domains) {
    os << "domain " << name << " = {";
    for (size_t i = 0; i < values.size(); ++i) os << (i ? ", " : "") << values[i];
    os << "}\n";
  }
  for (const auto& [name, def] : m.ops) {
    if (name.find('[') != std::string::npos) continue;  // builtin instances re-register on use
    os << "kraus " << name << "[";
    for (size_t i = 0; i < def.qubits.size(); ++i) os << (i ? "," : "") << def.qubits[i];
    os << "] = ";
    for (size_t k = 0; k < def.kraus.size(); ++k) {
      if (k) os << " ; ";
      os << "[";
      for (Eigen::Index r = 0; r < def.kraus[k].rows(); ++r) {
        if (r) os << ",";
        os << "[";
        for (Eigen::Index c = 0; c < def.kraus[k].cols(); ++c) {
          if (c) os << ",";
          os << format_complex(def.kraus[k](r, c));
        }
        os << "]";
      }
      os << "]";
    }
    os << "\n";
  }
  for (const auto& [pair, result] : m.gamma.entries()) {
    os << "gamma(" << pair.first << ", " << pair.second << ") = " << result.key() << "\n";
  }
  for (const auto& [k, qs] : m.init_bells)
    os << "init bell" << k << " " << qs.first << " " << qs.second << "\n";
  // Recursion equations first (definition groups), then the remaining named
  // terms that are not just a variable reference to an equation.
  for (const auto& spec : m.recursion)
    for (const auto& [name, body] : spec.equations) os << name << " = " << render(body) << "\n";
  for (const auto& [name, t] : m.terms) {
    if (t->kind() == TermKind::RecVar && t->var() == name) continue;
    os << name << " = " << render(t) << "\n";
  }
  return os.str();
}

}  // namespace qpa
