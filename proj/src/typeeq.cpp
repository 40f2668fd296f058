#include "saxcore/typeeq.hpp"

#include <cstdio>
#include <set>

namespace sax {

TypeP unfold(const Signature& sig, const TypeP& a, std::string* err) {
  if (!a) return nullptr;
  if (a->k != TK::Var) return a;
  auto it = sig.typeDefs.find(a->var);
  if (it == sig.typeDefs.end()) {
    if (err) *err = "undefined type variable '" + a->var + "'";
    return nullptr;
  }
  return it->second.body;
}

TypeP head_type(const Signature& sig, const TypeP& a) {
  TypeP t = a;
  // Contractive signatures bound the unfolding chain by the number of defs.
  std::size_t fuel = sig.typeDefs.size() + 1;
  while (t && t->k == TK::Var && fuel-- > 0) t = unfold(sig, t);
  return t;
}

namespace {

// Identity key for a type node: variables by name, other nodes by pointer.
std::string node_key(const TypeP& t) {
  if (t->k == TK::Var) return "v:" + t->var;
  char buf[32];
  std::snprintf(buf, sizeof buf, "p:%p", static_cast<const void*>(t.get()));
  return buf;
}

bool eq(const Signature& sig, const TypeP& a, const TypeP& b,
        std::set<std::pair<std::string, std::string>>& seen) {
  if (!a || !b) return false;
  if (a->k == TK::Var && b->k == TK::Var && a->var == b->var) return true;
  auto key = std::make_pair(node_key(a), node_key(b));
  if (seen.count(key)) return true;
  seen.insert(key);
  if (a->k == TK::Var) {
    TypeP ua = unfold(sig, a);
    return ua && eq(sig, ua, b, seen);
  }
  if (b->k == TK::Var) {
    TypeP ub = unfold(sig, b);
    return ub && eq(sig, a, ub, seen);
  }
  if (a->k != b->k || a->mode != b->mode) return false;
  switch (a->k) {
    case TK::One:
      return true;
    case TK::Plus:
    case TK::With: {
      if (a->branches.size() != b->branches.size()) return false;
      for (const auto& [lab, ta] : a->branches) {
        const TypeP* tb = nullptr;
        for (const auto& [lb, t] : b->branches)
          if (lb == lab) tb = &t;
        if (!tb || !eq(sig, ta, *tb, seen)) return false;
      }
      return true;
    }
    case TK::Tensor:
    case TK::Lolli:
      return eq(sig, a->a, b->a, seen) && eq(sig, a->b, b->b, seen);
    case TK::Down:
    case TK::Up:
      return a->src == b->src && eq(sig, a->a, b->a, seen);
    default:
      // Sugar constructors are lowered before equality is consulted.
      return false;
  }
}

}  // namespace

bool types_equal(const Signature& sig, const TypeP& a, const TypeP& b) {
  std::set<std::pair<std::string, std::string>> seen;
  return eq(sig, a, b, seen);
}

}  // namespace sax
