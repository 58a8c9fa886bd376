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
#include "qpa/term.hpp"

#include <algorithm>
#include <stdexcept>

namespace qpa {

namespace {

size_t mix(size_t h, size_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

size_t hash_names(const std::vector<std::string>& names) {
  size_t h = 14695981039346656037ull;
  for (const auto& n : names) {
    for (unsigned char c : n) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xfe;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

TermPtr Term::constant(ActionLabel label) {
  if (label.kind == LabelKind::Delta) return deadlock();
  auto t = std::shared_ptr<Term>(new Term());
  t->kind_ = TermKind::Constant;
  t->label_ = std::move(label);
  t->hash_ = mix(static_cast<size_t>(TermKind::Constant), t->label_.hash());
  return t;
}

TermPtr Term::deadlock() {
  static const TermPtr instance = [] {
    auto t = std::shared_ptr<Term>(new Term());
    t->kind_ = TermKind::Deadlock;
    t->hash_ = 0x5e7a0d1c;
    return TermPtr(t);
  }();
  return instance;
}

TermPtr Term::tau() {
  static const TermPtr instance = Term::constant(ActionLabel::tau());
  return instance;
}

TermPtr Term::binary(TermKind k, TermPtr l, TermPtr r) {
  auto t = std::shared_ptr<Term>(new Term());
  t->kind_ = k;
  t->hash_ = mix(mix(static_cast<size_t>(k) * 0x9e37, l->hash()), r->hash());
  t->left_ = std::move(l);
  t->right_ = std::move(r);
  return t;
}

TermPtr Term::choice(TermPtr l, TermPtr r) { return binary(TermKind::Choice, std::move(l), std::move(r)); }
TermPtr Term::seq(TermPtr l, TermPtr r) { return binary(TermKind::Seq, std::move(l), std::move(r)); }
TermPtr Term::merge(TermPtr l, TermPtr r) { return binary(TermKind::Merge, std::move(l), std::move(r)); }
TermPtr Term::left_merge(TermPtr l, TermPtr r) { return binary(TermKind::LeftMerge, std::move(l), std::move(r)); }
TermPtr Term::comm_merge(TermPtr l, TermPtr r) { return binary(TermKind::CommMerge, std::move(l), std::move(r)); }
TermPtr Term::ent_merge(TermPtr l, TermPtr r) { return binary(TermKind::EntMerge, std::move(l), std::move(r)); }

TermPtr Term::encapsulate(std::vector<std::string> names, TermPtr body) {
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  auto t = std::shared_ptr<Term>(new Term());
  t->kind_ = TermKind::Encapsulate;
  t->hash_ = mix(mix(0xE4CA, hash_names(names)), body->hash());
  t->left_ = std::move(body);
  t->names_ = std::move(names);
  return t;
}

TermPtr Term::abstraction(std::vector<std::string> names, TermPtr body) {
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  auto t = std::shared_ptr<Term>(new Term());
  t->kind_ = TermKind::Abstract;
  t->hash_ = mix(mix(0xAB57, hash_names(names)), body->hash());
  t->left_ = std::move(body);
  t->names_ = std::move(names);
  return t;
}

TermPtr Term::rec_var(std::string name, int spec_ref) {
  auto t = std::shared_ptr<Term>(new Term());
  t->kind_ = TermKind::RecVar;
  t->hash_ = mix(0x9ec, hash_names({name}));
  t->var_ = std::move(name);
  t->spec_ref_ = spec_ref;
  return t;
}

TermPtr Term::pattern_var(std::string name) {
  auto t = std::shared_ptr<Term>(new Term());
  t->kind_ = TermKind::PatternVar;
  t->hash_ = mix(0xfa7, hash_names({name}));
  t->var_ = std::move(name);
  return t;
}

int Term::compare(const TermPtr& a, const TermPtr& b) {
  if (a.get() == b.get()) return 0;
  if (a->kind_ != b->kind_)
    return static_cast<int>(a->kind_) < static_cast<int>(b->kind_) ? -1 : 1;
  switch (a->kind_) {
    case TermKind::Deadlock:
      return 0;
    case TermKind::Constant:
      return ActionLabel::compare(a->label_, b->label_);
    case TermKind::RecVar:
    case TermKind::PatternVar: {
      int c = a->var_.compare(b->var_);
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case TermKind::Encapsulate:
    case TermKind::Abstract: {
      if (a->names_ != b->names_) return a->names_ < b->names_ ? -1 : 1;
      return compare(a->left_, b->left_);
    }
    default: {
      if (int c = compare(a->left_, b->left_)) return c;
      return compare(a->right_, b->right_);
    }
  }
}

namespace {

// Rendering precedence: atoms > '.' > merges > '+'.
enum Prec { PrecChoice = 0, PrecMerge = 1, PrecSeq = 2, PrecAtom = 3 };

const char* merge_spelling(TermKind k) {
  switch (k) {
    case TermKind::Merge: return " || ";
    case TermKind::LeftMerge: return " |_ ";
    case TermKind::CommMerge: return " | ";
    case TermKind::EntMerge: return " >< ";
    default: return "?";
  }
}

std::string render_names(const std::vector<std::string>& names) {
  std::string s = "{";
  for (size_t i = 0; i < names.size(); ++i) {
    if (i) s += ", ";
    s += names[i];
  }
  s += "}";
  return s;
}

std::string render_label(const ActionLabel& l) {
  switch (l.kind) {
    case LabelKind::Shadow:
      return "shadow[" + l.shadow_of + "]";
    case LabelKind::Tau:
      return "tau";
    case LabelKind::Delta:
      return "delta";
    default:
      return l.key();
  }
}

void render_rec(const TermPtr& t, int outer, std::string& out) {
  auto wrap = [&](int inner, auto&& fn) {
    bool parens = inner < outer;
    if (parens) out += '(';
    fn();
    if (parens) out += ')';
  };
  switch (t->kind()) {
    case TermKind::Deadlock:
      out += "delta";
      return;
    case TermKind::Constant:
      out += render_label(t->label());
      return;
    case TermKind::RecVar:
    case TermKind::PatternVar:
      out += t->var();
      return;
    case TermKind::Choice:
      wrap(PrecChoice, [&] {
        render_rec(t->left(), PrecChoice + 1, out);
        out += " + ";
        render_rec(t->right(), PrecChoice, out);
      });
      return;
    case TermKind::Seq:
      wrap(PrecSeq, [&] {
        render_rec(t->left(), PrecSeq + 1, out);
        out += " . ";
        render_rec(t->right(), PrecSeq, out);
      });
      return;
    case TermKind::Merge:
    case TermKind::LeftMerge:
    case TermKind::CommMerge:
    case TermKind::EntMerge:
      wrap(PrecMerge, [&] {
        // Merges are left-associative and mixed merges need parentheses, so
        // a merge child on the left keeps its own parens only when its kind
        // differs; on the right it is always parenthesized.
        const TermPtr& l = t->left();
        bool lparen = l->is_binary() && l->kind() != TermKind::Seq && l->kind() != t->kind();
        if (l->kind() == TermKind::Choice) lparen = true;
        if (lparen) {
          out += '(';
          render_rec(l, PrecChoice, out);
          out += ')';
        } else {
          render_rec(l, PrecMerge, out);
        }
        out += merge_spelling(t->kind());
        const TermPtr& r = t->right();
        bool rparen = r->is_binary() && r->kind() != TermKind::Seq;
        if (rparen) {
          out += '(';
          render_rec(r, PrecChoice, out);
          out += ')';
        } else {
          render_rec(r, PrecMerge + 1, out);
        }
      });
      return;
    case TermKind::Encapsulate:
      out += "encap";
      out += render_names(t->name_set());
      out += '(';
      render_rec(t->body(), PrecChoice, out);
      out += ')';
      return;
    case TermKind::Abstract:
      out += "abstract";
      out += render_names(t->name_set());
      out += '(';
      render_rec(t->body(), PrecChoice, out);
      out += ')';
      return;
  }
}

}  // namespace

std::string render(const TermPtr& t) {
  std::string out;
  render_rec(t, PrecChoice, out);
  return out;
}

bool is_basic(const TermPtr& t) {
  switch (t->kind()) {
    case TermKind::PatternVar:
      throw std::invalid_argument("is_basic: open term (pattern variable '" + t->var() + "')");
    case TermKind::Deadlock:
      return true;
    case TermKind::Constant:
      return t->label().kind != LabelKind::Shadow;
    case TermKind::Choice:
    case TermKind::Seq:
      return is_basic(t->left()) && is_basic(t->right());
    default:
      return false;
  }
}

bool is_open(const TermPtr& t) {
  switch (t->kind()) {
    case TermKind::PatternVar:
      return true;
    case TermKind::Constant:
    case TermKind::Deadlock:
    case TermKind::RecVar:
      return false;
    case TermKind::Encapsulate:
    case TermKind::Abstract:
      return is_open(t->body());
    default:
      return is_open(t->left()) || is_open(t->right());
  }
}

bool contains_shadow(const TermPtr& t) {
  switch (t->kind()) {
    case TermKind::Constant:
      return t->label().kind == LabelKind::Shadow;
    case TermKind::Deadlock:
    case TermKind::RecVar:
    case TermKind::PatternVar:
      return false;
    case TermKind::Encapsulate:
    case TermKind::Abstract:
      return contains_shadow(t->body());
    default:
      return contains_shadow(t->left()) || contains_shadow(t->right());
  }
}

void flatten_choice(const TermPtr& t, std::vector<TermPtr>& out) {
  if (t->kind() == TermKind::Choice) {
    flatten_choice(t->left(), out);
    flatten_choice(t->right(), out);
  } else {
    out.push_back(t);
  }
}

TermPtr rebuild_choice(const std::vector<TermPtr>& summands) {
  if (summands.empty()) throw std::invalid_argument("rebuild_choice: empty sum");
  TermPtr acc = summands.back();
  for (size_t i = summands.size() - 1; i-- > 0;) {
    acc = Term::choice(summands[i], acc);
  }
  return acc;
}

}  // namespace qpa
