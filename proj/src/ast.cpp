#include "saxcore/ast.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace sax {

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

static TypeP mk_type(Type t) { return std::make_shared<Type>(std::move(t)); }

TypeP mk_plus(Mode m, std::vector<std::pair<std::string, TypeP>> bs) {
  Type t;
  t.k = TK::Plus;
  t.mode = std::move(m);
  t.branches = std::move(bs);
  return mk_type(std::move(t));
}
TypeP mk_with(Mode m, std::vector<std::pair<std::string, TypeP>> bs) {
  Type t;
  t.k = TK::With;
  t.mode = std::move(m);
  t.branches = std::move(bs);
  return mk_type(std::move(t));
}
TypeP mk_tensor(Mode m, TypeP a, TypeP b) {
  Type t;
  t.k = TK::Tensor;
  t.mode = std::move(m);
  t.a = std::move(a);
  t.b = std::move(b);
  return mk_type(std::move(t));
}
TypeP mk_lolli(Mode m, TypeP a, TypeP b) {
  Type t;
  t.k = TK::Lolli;
  t.mode = std::move(m);
  t.a = std::move(a);
  t.b = std::move(b);
  return mk_type(std::move(t));
}
TypeP mk_one(Mode m) {
  Type t;
  t.k = TK::One;
  t.mode = std::move(m);
  return mk_type(std::move(t));
}
TypeP mk_down(Mode src, Mode tgt, TypeP body) {
  Type t;
  t.k = TK::Down;
  t.mode = std::move(tgt);
  t.src = std::move(src);
  t.a = std::move(body);
  return mk_type(std::move(t));
}
TypeP mk_up(Mode src, Mode tgt, TypeP body) {
  Type t;
  t.k = TK::Up;
  t.mode = std::move(tgt);
  t.src = std::move(src);
  t.a = std::move(body);
  return mk_type(std::move(t));
}
TypeP mk_tvar(Mode m, const std::string& name) {
  Type t;
  t.k = TK::Var;
  t.mode = std::move(m);
  t.var = name;
  return mk_type(std::move(t));
}

VSeqP mk_vvar(const std::string& x) {
  VSeq v;
  v.k = VK::Var;
  v.var = x;
  return std::make_shared<VSeq>(std::move(v));
}
VSeqP mk_vlabel(const std::string& l, VSeqP sub) {
  VSeq v;
  v.k = VK::Label;
  v.lab = l;
  v.sub = std::move(sub);
  return std::make_shared<VSeq>(std::move(v));
}
VSeqP mk_vpair(const std::string& x, VSeqP sub) {
  VSeq v;
  v.k = VK::Pair;
  v.var = x;
  v.sub = std::move(sub);
  return std::make_shared<VSeq>(std::move(v));
}
VSeqP mk_vunit() {
  VSeq v;
  v.k = VK::Unit;
  return std::make_shared<VSeq>(std::move(v));
}
VSeqP mk_vshift(VSeqP sub) {
  VSeq v;
  v.k = VK::Shift;
  v.sub = std::move(sub);
  return std::make_shared<VSeq>(std::move(v));
}

PatP mk_pvar(const std::string& x) {
  Pat p;
  p.k = VK::Var;
  p.var = x;
  return std::make_shared<Pat>(std::move(p));
}
PatP mk_plabel(const std::string& l, PatP sub) {
  Pat p;
  p.k = VK::Label;
  p.lab = l;
  p.sub = std::move(sub);
  return std::make_shared<Pat>(std::move(p));
}
PatP mk_ppair(const std::string& x, PatP sub) {
  Pat p;
  p.k = VK::Pair;
  p.var = x;
  p.sub = std::move(sub);
  return std::make_shared<Pat>(std::move(p));
}
PatP mk_punit() {
  Pat p;
  p.k = VK::Unit;
  return std::make_shared<Pat>(std::move(p));
}
PatP mk_pshift(PatP sub) {
  Pat p;
  p.k = VK::Shift;
  p.sub = std::move(sub);
  return std::make_shared<Pat>(std::move(p));
}

static ProcP mk_proc(Process p) { return std::make_shared<Process>(std::move(p)); }

ProcP mk_cut(const std::string& x, TypeP annot, ProcP p, ProcP q, CutOrigin o,
             const Mode& varMode) {
  Process r;
  r.k = PK::Cut;
  r.var = x;
  r.annot = std::move(annot);
  r.varMode = varMode.empty() && r.annot ? r.annot->mode : varMode;
  r.left = std::move(p);
  r.right = std::move(q);
  r.origin = o;
  return mk_proc(std::move(r));
}
ProcP mk_id(const std::string& dest, const std::string& src) {
  Process r;
  r.k = PK::Id;
  r.var = dest;
  r.subject = src;
  return mk_proc(std::move(r));
}
ProcP mk_write(const std::string& subject, VSeqP v) {
  Process r;
  r.k = PK::Write;
  r.subject = subject;
  r.val = std::move(v);
  return mk_proc(std::move(r));
}
ProcP mk_case(const std::string& subject, ContP k) {
  Process r;
  r.k = PK::Case;
  r.subject = subject;
  r.cont = std::move(k);
  return mk_proc(std::move(r));
}
ProcP mk_call(const std::string& dest, const std::string& callee,
              std::vector<std::string> args) {
  Process r;
  r.k = PK::Call;
  r.subject = dest;
  r.callee = callee;
  r.args = std::move(args);
  return mk_proc(std::move(r));
}
ProcP mk_atom_val(const std::string& outer, const std::string& inner, VSeqP v) {
  Process r;
  r.k = PK::AtomVal;
  r.subject = outer;
  r.inner = inner;
  r.val = std::move(v);
  return mk_proc(std::move(r));
}
ProcP mk_atom_cont(const std::string& outer, const std::string& inner, ContP k) {
  Process r;
  r.k = PK::AtomCont;
  r.subject = outer;
  r.inner = inner;
  r.cont = std::move(k);
  return mk_proc(std::move(r));
}
ProcP mk_atom_id(const std::string& outer, const std::string& inner,
                 const std::string& src) {
  Process r;
  r.k = PK::AtomId;
  r.subject = outer;
  r.inner = inner;
  r.var = src;
  return mk_proc(std::move(r));
}

ContP mk_branches(std::vector<CBranch> bs) {
  Cont c;
  c.k = CK::Branches;
  c.branches = std::move(bs);
  return std::make_shared<Cont>(std::move(c));
}
ContP mk_pair_match(const std::string& v1, PatP p2, ProcP body) {
  Cont c;
  c.k = CK::PairMatch;
  c.v1 = v1;
  c.pat = std::move(p2);
  c.body = std::move(body);
  return std::make_shared<Cont>(std::move(c));
}
ContP mk_unit_match(ProcP body) {
  Cont c;
  c.k = CK::UnitMatch;
  c.body = std::move(body);
  return std::make_shared<Cont>(std::move(c));
}
ContP mk_shift_match(PatP p, ProcP body) {
  Cont c;
  c.k = CK::ShiftMatch;
  c.pat = std::move(p);
  c.body = std::move(body);
  return std::make_shared<Cont>(std::move(c));
}

// ---------------------------------------------------------------------------
// Kernel predicates
// ---------------------------------------------------------------------------

bool type_is_kernel(const TypeP& t) {
  switch (t->k) {
    case TK::Plus:
    case TK::With:
      return std::all_of(t->branches.begin(), t->branches.end(),
                         [](const auto& b) { return type_is_kernel(b.second); });
    case TK::Tensor:
    case TK::Lolli:
      return type_is_kernel(t->a) && type_is_kernel(t->b);
    case TK::One:
    case TK::Var:
      return true;
    case TK::Down:
    case TK::Up:
      return type_is_kernel(t->a);
    default:
      return false;
  }
}

bool type_positive(const TypeP& t) {
  switch (t->k) {
    case TK::Plus:
    case TK::Tensor:
    case TK::One:
    case TK::Down:
      return true;
    case TK::With:
    case TK::Lolli:
    case TK::Up:
      return false;
    default:
      assert(false && "polarity of non-kernel type");
      return true;
  }
}

bool vseq_is_kernel(const VSeqP& v) {
  switch (v->k) {
    case VK::Var:
      return false;  // a bare variable is not a value by itself
    case VK::Unit:
      return true;
    case VK::Label:
    case VK::Pair:
    case VK::Shift:
      return v->sub->k == VK::Var;
  }
  return false;
}

void vseq_vars(const VSeqP& v, std::vector<std::string>& out) {
  switch (v->k) {
    case VK::Var:
      out.push_back(v->var);
      break;
    case VK::Pair:
      out.push_back(v->var);
      vseq_vars(v->sub, out);
      break;
    case VK::Label:
    case VK::Shift:
      vseq_vars(v->sub, out);
      break;
    case VK::Unit:
      break;
  }
}

static bool pat_is_var(const PatP& p) { return p->k == VK::Var; }

static bool cont_is_kernel(const ContP& c);

bool process_is_kernel(const ProcP& p) {
  switch (p->k) {
    case PK::Cut:
      return p->annot && type_is_kernel(p->annot) && !p->varMode.empty() &&
             process_is_kernel(p->left) && process_is_kernel(p->right);
    case PK::Id:
      return true;
    case PK::Write:
      return vseq_is_kernel(p->val);
    case PK::Case:
      return cont_is_kernel(p->cont);
    case PK::Call:
      return true;
    case PK::AtomVal:
      return vseq_is_kernel(p->val);
    case PK::AtomCont:
      return cont_is_kernel(p->cont);
    case PK::AtomId:
      return true;
    default:
      return false;
  }
}

static bool cont_is_kernel(const ContP& c) {
  switch (c->k) {
    case CK::Branches:
      return std::all_of(c->branches.begin(), c->branches.end(),
                         [](const CBranch& b) {
                           return pat_is_var(b.pat) && process_is_kernel(b.body);
                         });
    case CK::PairMatch:
      return pat_is_var(c->pat) && process_is_kernel(c->body);
    case CK::UnitMatch:
      return process_is_kernel(c->body);
    case CK::ShiftMatch:
      return pat_is_var(c->pat) && process_is_kernel(c->body);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Free variables
// ---------------------------------------------------------------------------

static void pat_vars(const PatP& p, std::set<std::string>& out) {
  switch (p->k) {
    case VK::Var:
      out.insert(p->var);
      break;
    case VK::Pair:
      out.insert(p->var);
      pat_vars(p->sub, out);
      break;
    case VK::Label:
    case VK::Shift:
      pat_vars(p->sub, out);
      break;
    case VK::Unit:
      break;
  }
}

static void fv_proc(const ProcP& p, std::set<std::string>& out);

static void fv_minus(const ProcP& body, const std::set<std::string>& bound,
                     std::set<std::string>& out) {
  std::set<std::string> inner;
  fv_proc(body, inner);
  for (const auto& v : inner)
    if (!bound.count(v)) out.insert(v);
}

static void fv_cont(const ContP& c, std::set<std::string>& out) {
  switch (c->k) {
    case CK::Branches:
      for (const auto& b : c->branches) {
        std::set<std::string> bound;
        pat_vars(b.pat, bound);
        fv_minus(b.body, bound, out);
      }
      break;
    case CK::PairMatch: {
      std::set<std::string> bound{c->v1};
      pat_vars(c->pat, bound);
      fv_minus(c->body, bound, out);
      break;
    }
    case CK::UnitMatch:
      fv_proc(c->body, out);
      break;
    case CK::ShiftMatch: {
      std::set<std::string> bound;
      pat_vars(c->pat, bound);
      fv_minus(c->body, bound, out);
      break;
    }
  }
}

static void fv_proc(const ProcP& p, std::set<std::string>& out) {
  switch (p->k) {
    case PK::Cut:
    case PK::SeqCut:
    case PK::CbnCut:
    case PK::FutCut:
      fv_minus(p->left, {p->var}, out);
      fv_minus(p->right, {p->var}, out);
      break;
    case PK::Id:
      out.insert(p->var);
      out.insert(p->subject);
      break;
    case PK::Write: {
      out.insert(p->subject);
      std::vector<std::string> vs;
      vseq_vars(p->val, vs);
      out.insert(vs.begin(), vs.end());
      break;
    }
    case PK::Case:
      out.insert(p->subject);
      fv_cont(p->cont, out);
      break;
    case PK::Call:
      out.insert(p->subject);
      for (const auto& a : p->args) out.insert(a);
      break;
    case PK::AtomVal: {
      out.insert(p->subject);
      std::vector<std::string> vs;
      vseq_vars(p->val, vs);
      for (const auto& v : vs)
        if (v != p->inner) out.insert(v);
      break;
    }
    case PK::AtomCont: {
      out.insert(p->subject);
      std::set<std::string> kv;
      fv_cont(p->cont, kv);
      for (const auto& v : kv)
        if (v != p->inner) out.insert(v);
      break;
    }
    case PK::AtomId:
      out.insert(p->subject);
      out.insert(p->var);  // source cell
      break;
    case PK::ShortId:
      out.insert(p->subject);
      fv_minus(p->right, {p->var}, out);
      break;
    case PK::ShortCall:
      for (const auto& a : p->args) out.insert(a);
      fv_minus(p->right, {p->var}, out);
      break;
    case PK::LambdaW:
      out.insert(p->subject);
      fv_minus(p->left, {p->inner}, out);
      break;
    case PK::Apply:
      out.insert(p->var);
      fv_proc(p->left, out);
      fv_proc(p->right, out);
      break;
    case PK::ParPairW:
      out.insert(p->subject);
      fv_proc(p->left, out);
      fv_proc(p->right, out);
      break;
    case PK::MonadW:
      out.insert(p->subject);
      fv_proc(p->left, out);
      break;
    case PK::MonadBind:
      out.insert(p->var);
      fv_proc(p->left, out);
      break;
    case PK::FutureW:
      out.insert(p->subject);
      fv_proc(p->left, out);
      break;
    case PK::Touch:
      out.insert(p->subject);
      fv_minus(p->left, {p->inner}, out);
      break;
  }
}

std::set<std::string> free_vars(const ProcP& p) {
  std::set<std::string> out;
  fv_proc(p, out);
  // The destination placeholder of star-processes is not a variable.
  out.erase("*");
  return out;
}

// ---------------------------------------------------------------------------
// Substitution
// ---------------------------------------------------------------------------

using Sub = std::map<std::string, std::string>;

static std::string app(const Sub& s, const std::string& v) {
  auto it = s.find(v);
  return it == s.end() ? v : it->second;
}

static std::string fresh_like(const std::string& base,
                              const std::set<std::string>& avoid) {
  std::string cand = base;
  while (avoid.count(cand)) cand += "'";
  return cand;
}

static std::set<std::string> sub_range(const Sub& s) {
  std::set<std::string> out;
  for (const auto& [_, v] : s) out.insert(v);
  return out;
}

static ProcP subst_proc(const ProcP& p, const Sub& s);

// Rebinds `bound` away from the substitution range if needed, returning the
// possibly renamed variable and the substitution to use underneath.
static std::pair<std::string, Sub> enter_binder(const std::string& bound,
                                                const Sub& s, const ProcP& b1,
                                                const ProcP& b2 = nullptr) {
  Sub inner = s;
  inner.erase(bound);
  std::set<std::string> range = sub_range(inner);
  if (!range.count(bound)) return {bound, inner};
  std::set<std::string> avoid = range;
  if (b1)
    for (const auto& v : free_vars(b1)) avoid.insert(v);
  if (b2)
    for (const auto& v : free_vars(b2)) avoid.insert(v);
  for (const auto& [k, v] : inner) avoid.insert(k);
  std::string nb = fresh_like(bound, avoid);
  inner[bound] = nb;
  return {nb, inner};
}

static VSeqP subst_vseq(const VSeqP& v, const Sub& s) {
  VSeq out = *v;
  if (v->k == VK::Var || v->k == VK::Pair) out.var = app(s, v->var);
  if (v->sub) out.sub = subst_vseq(v->sub, s);
  return std::make_shared<VSeq>(std::move(out));
}

static ContP subst_cont(const ContP& c, const Sub& s);

// Patterns bind all their variables; we rename pattern variables only when
// they clash with the substitution range.
static std::pair<PatP, Sub> enter_pat(const PatP& p, const Sub& s,
                                      const ProcP& body) {
  switch (p->k) {
    case VK::Var: {
      auto [nv, inner] = enter_binder(p->var, s, body);
      return {nv == p->var ? p : mk_pvar(nv), inner};
    }
    case VK::Pair: {
      auto [nv, s1] = enter_binder(p->var, s, body);
      auto [nsub, s2] = enter_pat(p->sub, s1, body);
      Pat q = *p;
      q.var = nv;
      q.sub = nsub;
      return {std::make_shared<Pat>(std::move(q)), s2};
    }
    case VK::Label:
    case VK::Shift: {
      auto [nsub, s1] = enter_pat(p->sub, s, body);
      Pat q = *p;
      q.sub = nsub;
      return {std::make_shared<Pat>(std::move(q)), s1};
    }
    case VK::Unit:
      return {p, s};
  }
  return {p, s};
}

static ContP subst_cont(const ContP& c, const Sub& s) {
  Cont out = *c;
  switch (c->k) {
    case CK::Branches:
      for (auto& b : out.branches) {
        auto [np, s1] = enter_pat(b.pat, s, b.body);
        b.pat = np;
        b.body = subst_proc(b.body, s1);
      }
      break;
    case CK::PairMatch: {
      auto [nv, s1] = enter_binder(c->v1, s, c->body);
      auto [np, s2] = enter_pat(c->pat, s1, c->body);
      out.v1 = nv;
      out.pat = np;
      out.body = subst_proc(c->body, s2);
      break;
    }
    case CK::UnitMatch:
      out.body = subst_proc(c->body, s);
      break;
    case CK::ShiftMatch: {
      auto [np, s1] = enter_pat(c->pat, s, c->body);
      out.pat = np;
      out.body = subst_proc(c->body, s1);
      break;
    }
  }
  return std::make_shared<Cont>(std::move(out));
}

// The destination placeholder '*' is rebound by every star-process body,
// so substitutions never reach through into one.
static Sub no_star(const Sub& s) {
  Sub out = s;
  out.erase("*");
  return out;
}

static ProcP subst_proc(const ProcP& p, const Sub& s) {
  Process out = *p;
  switch (p->k) {
    case PK::Cut:
    case PK::SeqCut:
    case PK::CbnCut:
    case PK::FutCut: {
      auto [nv, inner] = enter_binder(p->var, s, p->left, p->right);
      out.var = nv;
      out.left = subst_proc(p->left, no_star(inner));
      out.right = subst_proc(p->right, inner);
      break;
    }
    case PK::Id:
      out.var = app(s, p->var);
      out.subject = app(s, p->subject);
      break;
    case PK::Write:
      out.subject = app(s, p->subject);
      out.val = subst_vseq(p->val, s);
      break;
    case PK::Case:
      out.subject = app(s, p->subject);
      out.cont = subst_cont(p->cont, s);
      break;
    case PK::Call:
      out.subject = app(s, p->subject);
      for (auto& a : out.args) a = app(s, a);
      break;
    case PK::AtomVal: {
      out.subject = app(s, p->subject);
      Sub inner = s;
      inner.erase(p->inner);
      out.val = subst_vseq(p->val, inner);
      break;
    }
    case PK::AtomCont: {
      out.subject = app(s, p->subject);
      Sub inner = s;
      inner.erase(p->inner);
      out.cont = subst_cont(p->cont, inner);
      break;
    }
    case PK::AtomId:
      out.subject = app(s, p->subject);
      out.var = app(s, p->var);
      break;
    case PK::ShortId: {
      out.subject = app(s, p->subject);
      auto [nv, inner] = enter_binder(p->var, s, p->right);
      out.var = nv;
      out.right = subst_proc(p->right, inner);
      break;
    }
    case PK::ShortCall: {
      for (auto& a : out.args) a = app(s, a);
      auto [nv, inner] = enter_binder(p->var, s, p->right);
      out.var = nv;
      out.right = subst_proc(p->right, inner);
      break;
    }
    case PK::LambdaW: {
      out.subject = app(s, p->subject);
      auto [nv, inner] = enter_binder(p->inner, s, p->left);
      out.inner = nv;
      out.left = subst_proc(p->left, no_star(inner));
      break;
    }
    case PK::Apply:
      out.var = app(s, p->var);
      out.left = subst_proc(p->left, no_star(s));
      out.right = subst_proc(p->right, no_star(s));
      break;
    case PK::ParPairW:
      out.subject = app(s, p->subject);
      out.left = subst_proc(p->left, no_star(s));
      out.right = subst_proc(p->right, no_star(s));
      break;
    case PK::MonadW:
      out.subject = app(s, p->subject);
      out.left = subst_proc(p->left, no_star(s));
      break;
    case PK::MonadBind:
      out.var = app(s, p->var);
      out.left = subst_proc(p->left, no_star(s));
      break;
    case PK::FutureW:
      out.subject = app(s, p->subject);
      out.left = subst_proc(p->left, no_star(s));
      break;
    case PK::Touch: {
      out.subject = app(s, p->subject);
      auto [nv, inner] = enter_binder(p->inner, s, p->left);
      out.inner = nv;
      out.left = subst_proc(p->left, inner);
      break;
    }
  }
  return mk_proc(std::move(out));
}

ProcP substitute(const ProcP& p, const std::map<std::string, std::string>& m) {
  if (m.empty()) return p;
  return subst_proc(p, m);
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

// Precedence levels: 0 arrow-like (right assoc), 1 product-like (right
// assoc), 2 prefix shifts, 3 atoms.
static void print_type_at(std::ostringstream& os, const TypeP& t,
                          const Mode& ambient, int level);

static void print_moded(std::ostringstream& os, const TypeP& t,
                        const Mode& ambient, int level) {
  if (t->k != TK::Var && !ambient.empty() && t->mode != ambient) {
    os << "(";
    print_type_at(os, t, t->mode, 0);
    os << " @ " << t->mode << ")";
    return;
  }
  if (t->k != TK::Var && ambient.empty()) {
    os << "(";
    print_type_at(os, t, t->mode, 0);
    os << " @ " << t->mode << ")";
    return;
  }
  print_type_at(os, t, t->mode, level);
}

static void print_branches(std::ostringstream& os, const TypeP& t) {
  os << (t->k == TK::Plus ? "+{" : "&{");
  bool first = true;
  for (const auto& [l, a] : t->branches) {
    if (!first) os << ", ";
    first = false;
    os << l << " : ";
    print_moded(os, a, t->mode, 0);
  }
  os << "}";
}

static void print_type_at(std::ostringstream& os, const TypeP& t,
                          const Mode& ambient, int level) {
  (void)ambient;
  auto paren = [&](int mine, auto f) {
    if (mine < level) {
      os << "(";
      f();
      os << ")";
    } else {
      f();
    }
  };
  switch (t->k) {
    case TK::Var:
      os << t->var;
      break;
    case TK::One:
      os << "1";
      break;
    case TK::Plus:
    case TK::With:
      print_branches(os, t);
      break;
    case TK::Tensor:
      paren(1, [&] {
        print_moded(os, t->a, t->mode, 2);
        os << " * ";
        print_moded(os, t->b, t->mode, 1);
      });
      break;
    case TK::Par:
      paren(1, [&] {
        print_moded(os, t->a, t->mode, 2);
        os << " || ";
        print_moded(os, t->b, t->mode, 1);
      });
      break;
    case TK::AndT:
      paren(1, [&] {
        // The left component's mode is not inferable from context; ascribe.
        print_moded(os, t->a, "", 2);
        os << " /\\ ";
        print_moded(os, t->b, t->mode, 1);
      });
      break;
    case TK::Lolli:
      paren(0, [&] {
        print_moded(os, t->a, t->mode, 1);
        os << " -o ";
        print_moded(os, t->b, t->mode, 0);
      });
      break;
    case TK::Arrow:
      paren(0, [&] {
        print_moded(os, t->a, t->mode, 1);
        os << " -> ";
        print_moded(os, t->b, t->mode, 0);
      });
      break;
    case TK::ImpT:
      paren(0, [&] {
        print_moded(os, t->a, "", 1);
        os << " ==> ";
        print_moded(os, t->b, t->mode, 0);
      });
      break;
    case TK::Down:
      paren(2, [&] {
        os << "down[" << t->src << "] ";
        print_moded(os, t->a, t->src, 2);
      });
      break;
    case TK::Up:
      paren(2, [&] {
        os << "up[" << t->src << "] ";
        print_moded(os, t->a, t->src, 2);
      });
      break;
    case TK::Monad:
      os << "{";
      print_moded(os, t->a, "", 0);
      os << "}";
      break;
    case TK::FutT:
      paren(2, [&] {
        os << "fut ";
        print_moded(os, t->a, t->mode, 2);
      });
      break;
  }
}

std::string print_type(const TypeP& t, const Mode& ambient) {
  std::ostringstream os;
  if (!ambient.empty() && (t->k == TK::Var || t->mode == ambient)) {
    print_type_at(os, t, ambient, 0);
  } else if (t->k == TK::Var) {
    print_type_at(os, t, t->mode, 0);
  } else {
    // No ambient mode known: print with an explicit ascription.
    print_type_at(os, t, t->mode, 0);
    os << " @ " << t->mode;
  }
  return os.str();
}

static void print_vseq(std::ostringstream& os, const VSeqP& v) {
  switch (v->k) {
    case VK::Var:
      os << v->var;
      break;
    case VK::Label:
      os << v->lab << "(";
      print_vseq(os, v->sub);
      os << ")";
      break;
    case VK::Pair:
      os << "<" << v->var << ", ";
      print_vseq(os, v->sub);
      os << ">";
      break;
    case VK::Unit:
      os << "<>";
      break;
    case VK::Shift:
      os << "shift(";
      print_vseq(os, v->sub);
      os << ")";
      break;
  }
}

static void print_pat(std::ostringstream& os, const PatP& p) {
  switch (p->k) {
    case VK::Var:
      os << p->var;
      break;
    case VK::Label:
      os << p->lab << "(";
      print_pat(os, p->sub);
      os << ")";
      break;
    case VK::Pair:
      os << "<" << p->var << ", ";
      print_pat(os, p->sub);
      os << ">";
      break;
    case VK::Unit:
      os << "<>";
      break;
    case VK::Shift:
      os << "shift(";
      print_pat(os, p->sub);
      os << ")";
      break;
  }
}

static void print_proc(std::ostringstream& os, const ProcP& p, int indent);

static void nl(std::ostringstream& os, int indent) {
  os << "\n";
  for (int i = 0; i < indent; i++) os << "  ";
}

static void print_cont(std::ostringstream& os, const ContP& c, int indent) {
  os << "(";
  switch (c->k) {
    case CK::Branches: {
      bool first = true;
      for (const auto& b : c->branches) {
        if (!first) {
          nl(os, indent);
          os << "| ";
        }
        first = false;
        os << b.lab << "(";
        print_pat(os, b.pat);
        os << ") => ";
        print_proc(os, b.body, indent + 1);
      }
      break;
    }
    case CK::PairMatch:
      os << "<" << c->v1 << ", ";
      print_pat(os, c->pat);
      os << "> => ";
      print_proc(os, c->body, indent + 1);
      break;
    case CK::UnitMatch:
      os << "<> => ";
      print_proc(os, c->body, indent + 1);
      break;
    case CK::ShiftMatch:
      os << "shift(";
      print_pat(os, c->pat);
      os << ") => ";
      print_proc(os, c->body, indent + 1);
      break;
  }
  os << ")";
}

static void print_annot(std::ostringstream& os, const ProcP& p) {
  if (p->annot) os << " : " << print_type(p->annot, "");
}

static void print_proc(std::ostringstream& os, const ProcP& p, int indent) {
  switch (p->k) {
    case PK::Cut:
      os << p->var;
      print_annot(os, p);
      os << (p->origin == CutOrigin::Plain ? " <- (" : " <-! (");
      print_proc(os, p->left, indent + 1);
      os << ") ;";
      nl(os, indent);
      print_proc(os, p->right, indent);
      break;
    case PK::SeqCut:
    case PK::CbnCut:
      os << p->var;
      print_annot(os, p);
      os << (p->k == PK::SeqCut ? " <= (" : " <~ (");
      print_proc(os, p->left, indent + 1);
      os << ") ;";
      nl(os, indent);
      print_proc(os, p->right, indent);
      break;
    case PK::FutCut:
      os << p->var;
      print_annot(os, p);
      os << " <- future (";
      print_proc(os, p->left, indent + 1);
      os << ") ;";
      nl(os, indent);
      print_proc(os, p->right, indent);
      break;
    case PK::Id:
      os << p->var << " <- " << p->subject;
      break;
    case PK::Write:
      os << p->subject << ".";
      if (p->val->k == VK::Var) {
        // A bare variable payload only occurs inside sequences; guard anyway.
        os << "(" << p->val->var << ")";
      } else {
        print_vseq(os, p->val);
      }
      break;
    case PK::Case:
      os << "case " << p->subject << " ";
      print_cont(os, p->cont, indent + 1);
      break;
    case PK::Call:
      os << p->subject << " <- " << p->callee;
      if (!p->args.empty()) {
        os << " <-";
        for (const auto& a : p->args) os << " " << a;
      }
      break;
    case PK::AtomVal:
      os << p->subject << ".shift(" << p->inner << ".";
      print_vseq(os, p->val);
      os << ")";
      break;
    case PK::AtomCont:
      os << p->subject << ".shift(case " << p->inner << " ";
      print_cont(os, p->cont, indent + 1);
      os << ")";
      break;
    case PK::AtomId:
      os << p->subject << ".shift(" << p->inner << " <- " << p->var << ")";
      break;
    case PK::ShortId:
      os << p->var << " <- " << p->subject << " ;";
      nl(os, indent);
      print_proc(os, p->right, indent);
      break;
    case PK::ShortCall:
      os << p->var << " <- " << p->callee;
      if (!p->args.empty()) {
        os << " <-";
        for (const auto& a : p->args) os << " " << a;
      }
      os << " ;";
      nl(os, indent);
      print_proc(os, p->right, indent);
      break;
    case PK::LambdaW:
      os << p->subject << ".(fn " << p->inner << " => ";
      print_proc(os, p->left, indent + 1);
      os << ")";
      break;
    case PK::Apply:
      os << p->var << " <- (";
      print_proc(os, p->left, indent + 1);
      if (p->annot) os << " : " << print_type(p->annot, "");
      os << ")(";
      print_proc(os, p->right, indent + 1);
      os << ")";
      break;
    case PK::ParPairW:
      os << p->subject << ".<";
      print_proc(os, p->left, indent + 1);
      os << " | ";
      print_proc(os, p->right, indent + 1);
      os << ">";
      break;
    case PK::MonadW:
      os << p->subject << ".{";
      print_proc(os, p->left, indent + 1);
      os << "}";
      break;
    case PK::MonadBind:
      os << "{" << p->var << "}";
      if (!p->varMode.empty()) os << "@" << p->varMode;
      os << " <- ";
      print_proc(os, p->left, indent);
      break;
    case PK::FutureW:
      os << p->subject << ".future(";
      print_proc(os, p->left, indent + 1);
      os << ")";
      break;
    case PK::Touch:
      os << "touch " << p->subject << " (<" << p->inner << "> => ";
      print_proc(os, p->left, indent + 1);
      os << ")";
      break;
  }
}

std::string print_process(const ProcP& p, int indent) {
  std::ostringstream os;
  print_proc(os, p, indent);
  return os.str();
}

std::string print_program(const Program& prog) {
  std::ostringstream os;
  for (const auto& [m, props] : prog.mt.modes()) {
    os << "mode " << m << " ";
    if (props.weaken && props.contract)
      os << "unr";
    else if (props.weaken)
      os << "aff";
    else if (props.contract)
      os << "strict";
    else
      os << "lin";
    if (props.seqOnly) os << " seq";
    os << "\n";
  }
  for (const auto& [below, above] : prog.mt.declared_order())
    os << "order " << below << " < " << above << "\n";
  os << "\n";
  for (const auto& name : prog.sig.typeOrder) {
    const TypeDef& td = prog.sig.typeDefs.at(name);
    os << "type " << name << " @ " << td.mode << " = "
       << print_type(td.body, td.mode) << "\n";
  }
  os << "\n";
  for (const auto& name : prog.sig.procOrder) {
    const ProcDecl& d = prog.sig.procDecls.at(name);
    os << "decl " << d.name;
    for (const auto& [an, at] : d.args)
      os << " (" << an << " : " << print_type(at, "") << ")";
    os << " : " << print_type(d.result, "") << "\n";
    auto it = prog.sig.procDefs.find(name);
    if (it != prog.sig.procDefs.end()) {
      const ProcDef& f = it->second;
      os << "def " << f.resVar << " <- " << f.name;
      if (!f.argVars.empty()) {
        os << " <-";
        for (const auto& a : f.argVars) os << " " << a;
      }
      os << " =\n  ";
      os << print_process(f.body, 1);
      os << "\n\n";
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Signature validation
// ---------------------------------------------------------------------------

namespace {

struct TypeValidator {
  const Signature& sig;
  const ModeTheory& mt;
  const std::string& file;
  std::vector<Diag>& out;

  void err(const Span& sp, const char* code, const std::string& msg) {
    out.push_back({file, sp, code, msg});
  }

  void walk(const TypeP& t, const Mode& expect) {
    if (!mt.declared(t->mode)) {
      err(t->span, code::UnknownMode, "mode " + t->mode + " not declared");
      return;
    }
    if (!expect.empty() && t->mode != expect) {
      err(t->span, code::ModeMismatch,
          "type at mode " + t->mode + " where mode " + expect + " required");
    }
    switch (t->k) {
      case TK::Var: {
        auto it = sig.typeDefs.find(t->var);
        if (it == sig.typeDefs.end()) {
          err(t->span, code::UnknownTypeVar,
              "type variable " + t->var + " has no definition");
        } else if (it->second.mode != t->mode) {
          err(t->span, code::ModeMismatch,
              "type " + t->var + " is declared at mode " + it->second.mode);
        }
        break;
      }
      case TK::One:
        break;
      case TK::Plus:
      case TK::With: {
        std::set<std::string> seen;
        if (t->branches.empty())
          err(t->span, code::ParseError, "empty branch set");
        for (const auto& [l, a] : t->branches) {
          if (!seen.insert(l).second)
            err(t->span, code::OverlappingLabels, "duplicate label " + l);
          walk(a, t->mode);
        }
        break;
      }
      case TK::Tensor:
      case TK::Lolli:
      case TK::Arrow:
      case TK::Par:
        walk(t->a, t->mode);
        walk(t->b, t->mode);
        break;
      case TK::Down:
        if (!mt.declared(t->src)) {
          err(t->span, code::UnknownMode, "mode " + t->src + " not declared");
          break;
        }
        if (!mt.geq(t->src, t->mode))
          err(t->span, code::ShiftModeViolation,
              "down shift needs " + t->src + " >= " + t->mode);
        walk(t->a, t->src);
        break;
      case TK::Up:
        if (!mt.declared(t->src)) {
          err(t->span, code::UnknownMode, "mode " + t->src + " not declared");
          break;
        }
        if (!mt.geq(t->mode, t->src))
          err(t->span, code::ShiftModeViolation,
              "up shift needs " + t->mode + " >= " + t->src);
        walk(t->a, t->src);
        break;
      case TK::Monad:
        if (!mt.declared(t->src)) {
          err(t->span, code::UnknownMode, "mode " + t->src + " not declared");
          break;
        }
        if (!mt.geq(t->mode, t->src))
          err(t->span, code::ShiftModeViolation,
              "monad type needs " + t->mode + " >= " + t->src);
        walk(t->a, t->src);
        break;
      case TK::AndT:
      case TK::ImpT:
        if (!mt.declared(t->src)) {
          err(t->span, code::UnknownMode, "mode " + t->src + " not declared");
          break;
        }
        if (!mt.geq(t->src, t->mode))
          err(t->span, code::ShiftModeViolation,
              (t->k == TK::AndT ? std::string("/\\") : std::string("==>")) +
                  " type needs " + t->src + " >= " + t->mode);
        walk(t->a, t->src);
        walk(t->b, t->mode);
        break;
      case TK::FutT:
        walk(t->a, t->mode);
        break;
    }
  }
};

}  // namespace

std::vector<Diag> validate_signature(const Signature& sig, const ModeTheory& mt,
                                     const std::string& file) {
  std::vector<Diag> out;
  TypeValidator tv{sig, mt, file, out};

  // Contractiveness: a cycle along TypeVar-only edges.
  std::map<std::string, std::string> varEdge;
  for (const auto& [name, td] : sig.typeDefs)
    if (td.body->k == TK::Var) varEdge[name] = td.body->var;
  for (const auto& [name, td] : sig.typeDefs) {
    std::set<std::string> seen{name};
    std::string cur = name;
    while (varEdge.count(cur)) {
      cur = varEdge.at(cur);
      if (!seen.insert(cur).second) {
        out.push_back({file, td.span, code::NonContractive,
                       "type " + name + " unfolds to itself without a "
                       "structural constructor"});
        break;
      }
    }
  }

  for (const auto& [name, td] : sig.typeDefs) tv.walk(td.body, td.mode);

  for (const auto& [name, d] : sig.procDecls) {
    for (const auto& [an, at] : d.args) tv.walk(at, at->mode);
    tv.walk(d.result, d.result->mode);
    if (!sig.procDefs.count(name))
      out.push_back({file, d.span, code::MissingDefinition,
                     "declared process " + name + " has no definition"});
    else {
      const ProcDef& f = sig.procDefs.at(name);
      if (f.argVars.size() != d.args.size())
        out.push_back({file, f.span, code::ArityMismatch,
                       "definition of " + name + " takes " +
                           std::to_string(f.argVars.size()) +
                           " arguments, declaration has " +
                           std::to_string(d.args.size())});
    }
  }
  for (const auto& [name, f] : sig.procDefs)
    if (!sig.procDecls.count(name))
      out.push_back({file, f.span, code::UnknownProc,
                     "definition of " + name + " has no declaration"});
  return out;
}

}  // namespace sax
