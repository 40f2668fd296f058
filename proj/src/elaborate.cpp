#include "saxcore/elaborate.hpp"

#include <map>

namespace sax {

namespace {

struct ElabErr {
  Diag d;
};

[[noreturn]] void efail(const std::string& file, Span sp, const char* code,
                        const std::string& msg) {
  throw ElabErr{{file, sp, code, msg}};
}

std::shared_ptr<Type> clone_type(const TypeP& t) {
  return std::make_shared<Type>(*t);
}

TypeP surface_down(const Mode& src, const Mode& tgt, const TypeP& body) {
  auto n = std::make_shared<Type>();
  n->k = TK::Down;
  n->mode = tgt;
  n->src = src;
  n->a = body;
  return n;
}

bool positive_head(const TypeP& h) {
  switch (h->k) {
    case TK::Plus:
    case TK::Tensor:
    case TK::One:
    case TK::Down:
    case TK::Par:
    case TK::AndT:
    case TK::FutT:
      return true;
    default:
      return false;
  }
}

void collect_names(const PatP& p, std::set<std::string>& out);

void collect_names(const VSeqP& v, std::set<std::string>& out) {
  if (!v) return;
  if (!v->var.empty()) out.insert(v->var);
  collect_names(v->sub, out);
}

void collect_names(const PatP& p, std::set<std::string>& out) {
  if (!p) return;
  if (!p->var.empty()) out.insert(p->var);
  collect_names(p->sub, out);
}

void collect_names(const ProcP& p, std::set<std::string>& out) {
  if (!p) return;
  if (!p->var.empty()) out.insert(p->var);
  if (!p->subject.empty()) out.insert(p->subject);
  if (!p->inner.empty()) out.insert(p->inner);
  for (const auto& a : p->args) out.insert(a);
  collect_names(p->val, out);
  if (p->cont) {
    const Cont& k = *p->cont;
    if (!k.v1.empty()) out.insert(k.v1);
    collect_names(k.pat, out);
    if (k.body) collect_names(k.body, out);
    for (const CBranch& b : k.branches) {
      collect_names(b.pat, out);
      collect_names(b.body, out);
    }
  }
  collect_names(p->left, out);
  collect_names(p->right, out);
}

// Rebuilds a one-level continuation from a nested pattern, used when
// flattening pattern cases.
ContP cont_of_pattern(const PatP& pat, const ProcP& body, Span sp) {
  switch (pat->k) {
    case VK::Label:
      return mk_branches({{pat->lab, pat->sub, body, sp}});
    case VK::Pair:
      return mk_pair_match(pat->var, pat->sub, body);
    case VK::Unit:
      return mk_unit_match(body);
    case VK::Shift:
      return mk_shift_match(pat->sub, body);
    default:
      return nullptr;  // Var patterns never reach this
  }
}

bool cont_is_flat(const ContP& k) {
  switch (k->k) {
    case CK::Branches:
      for (const CBranch& b : k->branches)
        if (b.pat->k != VK::Var) return false;
      return true;
    case CK::UnitMatch:
      return true;
    default:
      return k->pat->k == VK::Var;
  }
}

class Elab {
 public:
  Elab(const Program& surface, std::set<std::string> names)
      : S_(surface), used_(std::move(names)) {}

  const std::string& file() const { return S_.file; }

  std::string fresh(const std::string& hint) {
    std::string base = hint.empty() ? "t" : hint;
    for (;;) {
      std::string name = base + "_" + std::to_string(++counter_);
      if (!used_.count(name)) {
        used_.insert(name);
        return name;
      }
    }
  }

  TypeP head(const TypeP& t, Span sp) {
    TypeP h = t;
    std::size_t fuel = S_.sig.typeDefs.size() + 1;
    while (h && h->k == TK::Var && fuel-- > 0) {
      auto it = S_.sig.typeDefs.find(h->var);
      if (it == S_.sig.typeDefs.end())
        efail(file(), sp, code::UnknownTypeVar,
              "undefined type variable '" + h->var + "'");
      h = it->second.body;
    }
    return h;
  }

  using Env = std::map<std::string, TypeP>;

  TypeP env_lookup(const Env& env, const std::string& x, Span sp) {
    auto it = env.find(x);
    if (it == env.end())
      efail(file(), sp, code::UnknownVar, "unbound channel '" + x + "'");
    return it->second;
  }

  // Synthesizes the type a premise provides, when it is apparent from an
  // identity, a call, or a write into a negative channel of known type.
  TypeP synth(const ProcP& q, const Env& env, const std::string& destVar) {
    switch (q->k) {
      case PK::Id:
        return env_lookup(env, q->subject, q->span);
      case PK::Call:
      case PK::ShortCall: {
        auto it = S_.sig.procDecls.find(q->callee);
        if (it == S_.sig.procDecls.end())
          efail(file(), q->span, code::UnknownProc,
                "undeclared process '" + q->callee + "'");
        return it->second.result;
      }
      case PK::Write: {
        if (q->subject == destVar) break;
        auto it = env.find(q->subject);
        if (it == env.end()) break;
        TypeP H = head(it->second, q->span);
        if (q->val->k == VK::Label && H->k == TK::With) {
          for (const auto& [l, t] : H->branches)
            if (l == q->val->lab) return t;
          efail(file(), q->span, code::UnknownLabel,
                "label '" + q->val->lab + "' is not part of the type");
        }
        if (q->val->k == VK::Pair &&
            (H->k == TK::Lolli || H->k == TK::Arrow || H->k == TK::ImpT))
          return H->b;
        if (q->val->k == VK::Shift && (H->k == TK::Up || H->k == TK::Monad))
          return H->a;
        break;
      }
      default:
        break;
    }
    efail(file(), q->span, code::AnnotationRequired,
          "cannot determine the type of this premise; add an ascription");
  }

  // The type carried by the remainder of a value sequence layer.
  TypeP layer_comp(const TypeP& H, const VSeqP& v, Span sp) {
    switch (v->k) {
      case VK::Label:
        if (H->k == TK::Plus || H->k == TK::With) {
          for (const auto& [l, t] : H->branches)
            if (l == v->lab) return t;
          efail(file(), sp, code::UnknownLabel,
                "label '" + v->lab + "' is not part of the type");
        }
        break;
      case VK::Pair:
        switch (H->k) {
          case TK::Tensor:
          case TK::Par:
          case TK::AndT:
          case TK::Lolli:
          case TK::Arrow:
          case TK::ImpT:
            return H->b;
          default:
            break;
        }
        break;
      case VK::Shift:
        if (H->k == TK::Down || H->k == TK::Up || H->k == TK::Monad)
          return H->a;
        if (H->k == TK::FutT) return surface_down(H->mode, H->mode, H->a);
        break;
      default:
        break;
    }
    efail(file(), sp, code::TypeMismatch,
          "value shape does not match the channel type");
  }

  static VSeqP relayer(const VSeqP& v, const std::string& x) {
    switch (v->k) {
      case VK::Label:
        return mk_vlabel(v->lab, mk_vvar(x));
      case VK::Pair:
        return mk_vpair(v->var, mk_vvar(x));
      default:
        return mk_vshift(mk_vvar(x));
    }
  }

  // --- sequential cut: rewrite writes of x in a kernel premise into
  // atomic writes under x'.
  ProcP slash(const ProcP& q, const std::string& x, const std::string& xp,
              const TypeP& Alow, const Mode& m) {
    switch (q->k) {
      case PK::Cut: {
        if (q->var == x) return q;
        return mk_cut(q->var, q->annot, q->left,
                      slash(q->right, x, xp, Alow, m), q->origin, q->varMode);
      }
      case PK::Case: {
        if (q->subject == x) return mk_atom_cont(xp, x, q->cont);
        const Cont& k = *q->cont;
        auto shadowed = [&](const PatP& p) {
          std::set<std::string> names;
          collect_names(p, names);
          return names.count(x) != 0;
        };
        switch (k.k) {
          case CK::Branches: {
            std::vector<CBranch> bs;
            for (const CBranch& b : k.branches)
              bs.push_back({b.lab, b.pat,
                            shadowed(b.pat) ? b.body
                                            : slash(b.body, x, xp, Alow, m),
                            b.span});
            return mk_case(q->subject, mk_branches(std::move(bs)));
          }
          case CK::PairMatch:
            if (k.v1 == x || shadowed(k.pat)) return q;
            return mk_case(q->subject,
                           mk_pair_match(k.v1, k.pat,
                                         slash(k.body, x, xp, Alow, m)));
          case CK::UnitMatch:
            return mk_case(q->subject,
                           mk_unit_match(slash(k.body, x, xp, Alow, m)));
          case CK::ShiftMatch:
            if (shadowed(k.pat)) return q;
            return mk_case(q->subject,
                           mk_shift_match(k.pat, slash(k.body, x, xp, Alow, m)));
        }
        return q;
      }
      case PK::Write:
        if (q->subject == x) return mk_atom_val(xp, x, q->val);
        break;
      case PK::Id:
        if (q->var == x) return mk_atom_id(xp, x, q->subject);
        break;
      default:
        break;
    }
    // Remaining leaves (calls, delegating writes, atoms) wait for their
    // result in a fresh cell and move it atomically.
    std::string u = fresh(x);
    return mk_cut(u, Alow, substitute(q, {{x, u}}), mk_atom_id(xp, x, u),
                  CutOrigin::SeqMark, m);
  }

  // --- call-by-name cut: wrap every leaf reading x with a trigger that
  // materializes the suspended computation first.
  ProcP percent(const ProcP& q, const std::string& x, const std::string& xp,
                const TypeP& Alow, const Mode& m) {
    auto wrap = [&](const ProcP& body) {
      return mk_cut(x, Alow, mk_write(xp, mk_vshift(mk_vvar(x))), body,
                    CutOrigin::SeqMark, m);
    };
    switch (q->k) {
      case PK::Cut: {
        ProcP l = q->left;
        ProcP r = q->right;
        if (free_vars(q->left).count(x)) l = percent(l, x, xp, Alow, m);
        if (q->var != x && free_vars(q->right).count(x))
          r = percent(r, x, xp, Alow, m);
        if (l == q->left && r == q->right) return q;
        return mk_cut(q->var, q->annot, l, r, q->origin, q->varMode);
      }
      case PK::Case: {
        const Cont& k = *q->cont;
        auto sub_body = [&](const PatP& pat, const ProcP& body,
                            const std::string& v1) {
          std::set<std::string> bound;
          collect_names(pat, bound);
          if (!v1.empty()) bound.insert(v1);
          if (bound.count(x) || !free_vars(body).count(x)) return body;
          return percent(body, x, xp, Alow, m);
        };
        ContP k2;
        switch (k.k) {
          case CK::Branches: {
            std::vector<CBranch> bs;
            for (const CBranch& b : k.branches)
              bs.push_back({b.lab, b.pat, sub_body(b.pat, b.body, ""), b.span});
            k2 = mk_branches(std::move(bs));
            break;
          }
          case CK::PairMatch:
            k2 = mk_pair_match(k.v1, k.pat, sub_body(k.pat, k.body, k.v1));
            break;
          case CK::UnitMatch:
            k2 = mk_unit_match(sub_body(mk_punit(), k.body, ""));
            break;
          case CK::ShiftMatch:
            k2 = mk_shift_match(k.pat, sub_body(k.pat, k.body, ""));
            break;
        }
        ProcP q2 = mk_case(q->subject, k2);
        if (q->subject == x) return wrap(q2);
        return q2;
      }
      default:
        // Leaves: writes, identities, calls, atomic writes.
        if (free_vars(q).count(x)) return wrap(q);
        return q;
    }
  }

  // -------------------------------------------------------------------
  ProcP elab(const ProcP& p, Env env, const std::string& dest,
             const TypeP& destType) {
    ProcP r = elab_dispatch(p, std::move(env), dest, destType);
    if (r && r != p) stamp(r, p->span);
    return r;
  }

  // Nodes invented by an expansion inherit the position of the surface
  // form they came from, so later diagnostics always point somewhere.
  static void stamp(const ProcP& p, const Span& sp) {
    if (!p || p->span.line != 0) return;
    std::const_pointer_cast<Process>(p)->span = sp;
    stamp(p->left, sp);
    stamp(p->right, sp);
    if (p->cont) {
      stamp(p->cont->body, sp);
      for (const auto& b : p->cont->branches) stamp(b.body, sp);
    }
  }

  ProcP elab_dispatch(const ProcP& p, Env env, const std::string& dest,
                      const TypeP& destType) {
    switch (p->k) {
      case PK::Cut:
      case PK::FutCut:
        return elab_cut(p, std::move(env), dest, destType,
                        p->k == PK::FutCut ? CutOrigin::Exempt : p->origin);
      case PK::ShortId: {
        ProcP cut = mk_cut(p->var, p->annot, mk_id(p->var, p->subject),
                           p->right, CutOrigin::Plain);
        return elab(cut, std::move(env), dest, destType);
      }
      case PK::ShortCall: {
        ProcP cut = mk_cut(p->var, p->annot, mk_call(p->var, p->callee, p->args),
                           p->right, CutOrigin::Plain);
        return elab(cut, std::move(env), dest, destType);
      }
      case PK::SeqCut:
        return elab_seqcut(p, std::move(env), dest, destType);
      case PK::CbnCut:
        return elab_cbncut(p, std::move(env), dest, destType);
      case PK::Id:
      case PK::Call:
        return p;
      case PK::Write:
        return elab_write(p, std::move(env), dest, destType);
      case PK::Case:
        return elab_case(p, std::move(env), dest, destType);
      case PK::AtomVal:
      case PK::AtomCont:
        return elab_atom(p, std::move(env), dest, destType);
      case PK::AtomId:
        return p;
      case PK::LambdaW: {
        if (p->subject != dest)
          efail(file(), p->span, code::TypeMismatch,
                "a function literal must be written at the destination");
        std::string yf = fresh("r");
        ProcP body = substitute(p->left, {{"*", yf}});
        return elab(mk_case(p->subject,
                            mk_pair_match(p->inner, mk_pvar(yf), body)),
                    std::move(env), dest, destType);
      }
      case PK::Apply:
        return elab_apply(p, std::move(env), dest, destType);
      case PK::ParPairW:
        return elab_parpair(p, std::move(env), dest, destType);
      case PK::MonadW: {
        if (p->subject != dest)
          efail(file(), p->span, code::TypeMismatch,
                "a monadic value must be written at the destination");
        TypeP H = head(destType, p->span);
        if (H->k != TK::Monad && H->k != TK::Up)
          efail(file(), p->span, code::TypeMismatch,
                "monadic value at a non-monadic type");
        std::string xa = fresh("m");
        ProcP body = substitute(p->left, {{"*", xa}});
        return mk_case(dest, mk_shift_match(mk_pvar(xa),
                                            elab(body, env, xa, H->a)));
      }
      case PK::MonadBind:
        return elab_bind(p, std::move(env), dest, destType);
      case PK::FutureW:
        return elab_future(p, std::move(env), dest, destType);
      case PK::Touch: {
        TypeP fT = head(env_lookup(env, p->subject, p->span), p->span);
        TypeP A;
        Mode m;
        if (fT->k == TK::FutT) {
          A = fT->a;
          m = fT->mode;
        } else if (fT->k == TK::Down && fT->a) {
          TypeP in = head(fT->a, p->span);
          if (in->k != TK::Down)
            efail(file(), p->span, code::TypeMismatch,
                  "touch on a channel that is not a future");
          A = in->a;
          m = fT->mode;
        } else {
          efail(file(), p->span, code::TypeMismatch,
                "touch on a channel that is not a future");
        }
        std::string zf = fresh("t");
        Env env2 = env;
        env2[p->inner] = A;
        ProcP body = elab(p->left, std::move(env2), dest, destType);
        return mk_case(
            p->subject,
            mk_shift_match(mk_pvar(zf),
                           mk_case(zf, mk_shift_match(mk_pvar(p->inner), body))));
      }
    }
    efail(file(), p->span, code::ShapeMismatch, "unhandled process form");
  }

 private:
  const Program& S_;
  std::set<std::string> used_;
  int counter_ = 0;

  ProcP elab_cut(const ProcP& p, Env env, const std::string& dest,
                 const TypeP& destType, CutOrigin origin) {
    ProcP leftP = substitute(p->left, {{"*", p->var}});
    TypeP A = p->annot ? p->annot : synth(leftP, env, p->var);
    ProcP left = elab(leftP, env, p->var, A);
    Env env2 = std::move(env);
    env2[p->var] = A;
    ProcP right = elab(p->right, std::move(env2), dest, destType);
    return mk_cut(p->var, lower_type(A), left, right, origin, A->mode);
  }

  ProcP elab_seqcut(const ProcP& p, Env env, const std::string& dest,
                    const TypeP& destType) {
    ProcP leftP = substitute(p->left, {{"*", p->var}});
    TypeP A = p->annot ? p->annot : synth(leftP, env, p->var);
    const Mode m = A->mode;
    std::string xp = fresh(p->var);
    ProcP left = elab(leftP, env, p->var, A);
    TypeP Alow = lower_type(A);
    ProcP slashed = slash(left, p->var, xp, Alow, m);
    Env env2 = std::move(env);
    env2[p->var] = A;
    ProcP right = elab(p->right, std::move(env2), dest, destType);
    return mk_cut(xp, mk_down(m, m, Alow), slashed,
                  mk_case(xp, mk_shift_match(mk_pvar(p->var), right)),
                  CutOrigin::SeqMark, m);
  }

  ProcP elab_cbncut(const ProcP& p, Env env, const std::string& dest,
                    const TypeP& destType) {
    ProcP leftP = substitute(p->left, {{"*", p->var}});
    TypeP A = p->annot ? p->annot : synth(leftP, env, p->var);
    const Mode m = A->mode;
    std::string xp = fresh(p->var);
    ProcP left = elab(leftP, env, p->var, A);
    TypeP Alow = lower_type(A);
    Env env2 = env;
    env2[p->var] = A;
    ProcP right = elab(p->right, std::move(env2), dest, destType);
    ProcP triggered = percent(right, p->var, xp, Alow, m);
    return mk_cut(xp, mk_up(m, m, Alow),
                  mk_case(xp, mk_shift_match(mk_pvar(p->var), left)), triggered,
                  CutOrigin::SeqMark, m);
  }

  ProcP elab_write(const ProcP& p, Env env, const std::string& dest,
                   const TypeP& destType) {
    TypeP subjT = p->subject == dest ? destType
                                     : env_lookup(env, p->subject, p->span);
    TypeP H = head(subjT, p->span);
    const VSeqP& v = p->val;

    if (!vseq_is_kernel(v)) {
      if (v->k == VK::Unit || v->k == VK::Var)
        efail(file(), p->span, code::ShapeMismatch, "malformed value");
      TypeP comp = layer_comp(H, v, p->span);
      std::string xn = fresh("v");
      ProcP cut;
      if (positive_head(H)) {
        cut = mk_cut(xn, comp, mk_write(xn, v->sub),
                     mk_write(p->subject, relayer(v, xn)), CutOrigin::Plain);
      } else {
        cut = mk_cut(xn, comp, mk_write(p->subject, relayer(v, xn)),
                     mk_write(xn, v->sub), CutOrigin::Plain);
      }
      return elab(cut, std::move(env), dest, destType);
    }

    if ((H->k == TK::AndT || H->k == TK::ImpT) && v->k == VK::Pair) {
      // Wrap the first component into its down shift unless it already
      // sits at the pair's own mode.
      bool alreadyShifted = false;
      auto it = env.find(v->var);
      if (it != env.end()) {
        TypeP vh = head(it->second, p->span);
        alreadyShifted = vh->k == TK::Down && it->second->mode == H->mode &&
                         H->src != H->mode;
      }
      if (!alreadyShifted) {
        std::string xf = fresh("w");
        TypeP downK = mk_down(H->src, H->mode, lower_type(H->a));
        return mk_cut(xf, downK, mk_write(xf, mk_vshift(mk_vvar(v->var))),
                      mk_write(p->subject, mk_vpair(xf, mk_vvar(v->sub->var))),
                      CutOrigin::Exempt, H->mode);
      }
    }
    return mk_write(p->subject, v);
  }

  ContP normalize_cont(const ContP& k) {
    auto flat = [&](const PatP& pat, const ProcP& body)
        -> std::pair<PatP, ProcP> {
      if (pat->k == VK::Var) return {pat, body};
      std::string xb = fresh("p");
      return {mk_pvar(xb), mk_case(xb, cont_of_pattern(pat, body, pat->span))};
    };
    switch (k->k) {
      case CK::Branches: {
        std::vector<CBranch> bs;
        for (const CBranch& b : k->branches) {
          auto [pat, body] = flat(b.pat, b.body);
          bs.push_back({b.lab, pat, body, b.span});
        }
        return mk_branches(std::move(bs));
      }
      case CK::PairMatch: {
        auto [pat, body] = flat(k->pat, k->body);
        return mk_pair_match(k->v1, pat, body);
      }
      case CK::ShiftMatch: {
        auto [pat, body] = flat(k->pat, k->body);
        return mk_shift_match(pat, body);
      }
      default:
        return k;
    }
  }

  ProcP elab_case(const ProcP& p, Env env, const std::string& dest,
                  const TypeP& destType) {
    if (!cont_is_flat(p->cont))
      return elab(mk_case(p->subject, normalize_cont(p->cont)), std::move(env),
                  dest, destType);
    TypeP subjT = p->subject == dest ? destType
                                     : env_lookup(env, p->subject, p->span);
    TypeP H = head(subjT, p->span);
    const Cont& K = *p->cont;

    auto bad = [&](const char* what) -> ProcP {
      efail(file(), p->span, code::TypeMismatch, what);
    };

    if (p->subject == dest) {
      switch (H->k) {
        case TK::With: {
          if (K.k != CK::Branches) return bad("branching expected here");
          std::vector<CBranch> bs;
          for (const CBranch& b : K.branches) {
            const TypeP* comp = nullptr;
            for (const auto& [l, t] : H->branches)
              if (l == b.lab) comp = &t;
            if (!comp)
              efail(file(), b.span, code::UnknownLabel,
                    "branch '" + b.lab + "' is not part of the type");
            bs.push_back({b.lab, b.pat, elab(b.body, env, b.pat->var, *comp),
                          b.span});
          }
          return mk_case(dest, mk_branches(std::move(bs)));
        }
        case TK::Lolli:
        case TK::Arrow: {
          if (K.k != CK::PairMatch) return bad("argument pair match expected");
          Env env2 = std::move(env);
          env2[K.v1] = H->a;
          return mk_case(dest,
                         mk_pair_match(K.v1, K.pat,
                                       elab(K.body, std::move(env2),
                                            K.pat->var, H->b)));
        }
        case TK::ImpT: {
          if (K.k != CK::PairMatch) return bad("argument pair match expected");
          std::string xf = fresh("w");
          TypeP downS = surface_down(H->src, H->mode, H->a);
          ProcP inner = mk_case(xf, mk_shift_match(mk_pvar(K.v1), K.body));
          Env env2 = std::move(env);
          env2[xf] = downS;
          return mk_case(dest,
                         mk_pair_match(xf, K.pat,
                                       elab(inner, std::move(env2), K.pat->var,
                                            H->b)));
        }
        case TK::Up:
        case TK::Monad: {
          if (K.k != CK::ShiftMatch) return bad("shift match expected");
          return mk_case(dest, mk_shift_match(K.pat, elab(K.body, std::move(env),
                                                          K.pat->var, H->a)));
        }
        default:
          return bad("a continuation cannot be offered at a positive type");
      }
    }

    switch (H->k) {
      case TK::Plus: {
        if (K.k != CK::Branches) return bad("branching expected here");
        std::vector<CBranch> bs;
        for (const CBranch& b : K.branches) {
          const TypeP* comp = nullptr;
          for (const auto& [l, t] : H->branches)
            if (l == b.lab) comp = &t;
          if (!comp)
            efail(file(), b.span, code::UnknownLabel,
                  "branch '" + b.lab + "' is not part of the type");
          Env env2 = env;
          env2[b.pat->var] = *comp;
          bs.push_back({b.lab, b.pat,
                        elab(b.body, std::move(env2), dest, destType), b.span});
        }
        return mk_case(p->subject, mk_branches(std::move(bs)));
      }
      case TK::Tensor:
      case TK::Par: {
        if (K.k != CK::PairMatch) return bad("pair match expected here");
        Env env2 = std::move(env);
        env2[K.v1] = H->a;
        env2[K.pat->var] = H->b;
        return mk_case(p->subject,
                       mk_pair_match(K.v1, K.pat,
                                     elab(K.body, std::move(env2), dest,
                                          destType)));
      }
      case TK::AndT: {
        if (K.k != CK::PairMatch) return bad("pair match expected here");
        std::string xf = fresh("w");
        TypeP downS = surface_down(H->src, H->mode, H->a);
        ProcP inner = mk_case(xf, mk_shift_match(mk_pvar(K.v1), K.body));
        Env env2 = std::move(env);
        env2[xf] = downS;
        env2[K.pat->var] = H->b;
        return mk_case(p->subject,
                       mk_pair_match(xf, K.pat,
                                     elab(inner, std::move(env2), dest,
                                          destType)));
      }
      case TK::One: {
        if (K.k != CK::UnitMatch) return bad("unit match expected here");
        return mk_case(p->subject,
                       mk_unit_match(elab(K.body, std::move(env), dest,
                                          destType)));
      }
      case TK::Down: {
        if (K.k != CK::ShiftMatch) return bad("shift match expected here");
        Env env2 = std::move(env);
        env2[K.pat->var] = H->a;
        return mk_case(p->subject,
                       mk_shift_match(K.pat, elab(K.body, std::move(env2), dest,
                                                  destType)));
      }
      case TK::FutT: {
        if (K.k != CK::ShiftMatch) return bad("shift match expected here");
        Env env2 = std::move(env);
        env2[K.pat->var] = surface_down(H->mode, H->mode, H->a);
        return mk_case(p->subject,
                       mk_shift_match(K.pat, elab(K.body, std::move(env2), dest,
                                                  destType)));
      }
      default:
        return bad("a negative channel is read by sending, not by matching");
    }
  }

  ProcP elab_atom(const ProcP& p, Env env, const std::string& dest,
                  const TypeP& destType) {
    if (p->subject != dest)
      efail(file(), p->span, code::TypeMismatch,
            "atomic write must provide the destination");
    TypeP H = head(destType, p->span);
    TypeP Tin;
    if (H->k == TK::Down)
      Tin = H->a;
    else if (H->k == TK::FutT)
      Tin = surface_down(H->mode, H->mode, H->a);
    else
      efail(file(), p->span, code::TypeMismatch,
            "atomic write at a type without a down shift");
    ProcP q = p->k == PK::AtomVal ? mk_write(p->inner, p->val)
                                  : mk_case(p->inner, p->cont);
    ProcP q2 = elab(q, std::move(env), p->inner, Tin);
    if (q2->k == PK::Write && q2->subject == p->inner)
      return mk_atom_val(p->subject, p->inner, q2->val);
    if (q2->k == PK::Case && q2->subject == p->inner)
      return mk_atom_cont(p->subject, p->inner, q2->cont);
    std::string u = fresh(p->inner);
    return mk_cut(u, lower_type(Tin), substitute(q2, {{p->inner, u}}),
                  mk_atom_id(p->subject, p->inner, u), CutOrigin::SeqMark,
                  Tin->mode);
  }

  ProcP elab_apply(const ProcP& p, Env env, const std::string& dest,
                   const TypeP& destType) {
    (void)destType;
    if (p->var != dest)
      efail(file(), p->span, code::TypeMismatch,
            "application result must be the destination");
    TypeP T = p->annot ? p->annot : synth(p->left, env, "*");
    TypeP H = head(T, p->span);
    if (H->k != TK::Arrow && H->k != TK::Lolli && H->k != TK::ImpT)
      efail(file(), p->span, code::TypeMismatch,
            "application of a non-function");
    std::string f = fresh("f");
    std::string xa = fresh("x");
    ProcP fnP = substitute(p->left, {{"*", f}});
    ProcP argP = substitute(p->right, {{"*", xa}});
    Process inner;
    inner.k = PK::SeqCut;
    inner.span = p->span;
    inner.var = xa;
    inner.annot = H->a;
    inner.left = argP;
    inner.right = mk_write(f, mk_vpair(xa, mk_vvar(dest)));
    Process outer;
    outer.k = PK::SeqCut;
    outer.span = p->span;
    outer.var = f;
    outer.annot = T;
    outer.left = fnP;
    outer.right = std::make_shared<const Process>(std::move(inner));
    return elab(std::make_shared<const Process>(std::move(outer)),
                std::move(env), dest, destType);
  }

  ProcP elab_parpair(const ProcP& p, Env env, const std::string& dest,
                     const TypeP& destType) {
    if (p->subject != dest)
      efail(file(), p->span, code::TypeMismatch,
            "a parallel pair must be written at the destination");
    TypeP H = head(destType, p->span);
    if (H->k != TK::Par && H->k != TK::Tensor)
      efail(file(), p->span, code::TypeMismatch,
            "parallel pair at a non-pair type");
    std::string xa = fresh("x"), xb = fresh("y");
    std::string xap = fresh("x"), xbp = fresh("y");
    Mode ma = H->a->mode, mb = H->b->mode;
    ProcP P1 = elab(substitute(p->left, {{"*", xa}}), env, xa, H->a);
    ProcP Q1 = elab(substitute(p->right, {{"*", xb}}), env, xb, H->b);
    ProcP P2 = slash(P1, xa, xap, lower_type(H->a), ma);
    ProcP Q2 = slash(Q1, xb, xbp, lower_type(H->b), mb);
    ProcP body = mk_case(
        xap,
        mk_shift_match(
            mk_pvar(xa),
            mk_case(xbp, mk_shift_match(mk_pvar(xb),
                                        mk_write(dest,
                                                 mk_vpair(xa, mk_vvar(xb)))))));
    return mk_cut(xap, mk_down(ma, ma, lower_type(H->a)), P2,
                  mk_cut(xbp, mk_down(mb, mb, lower_type(H->b)), Q2, body,
                         CutOrigin::Exempt, mb),
                  CutOrigin::Exempt, ma);
  }

  ProcP elab_bind(const ProcP& p, Env env, const std::string& dest,
                  const TypeP& destType) {
    TypeP T;
    try {
      T = synth(p->left, env, "*");
    } catch (const ElabErr&) {
      if (!p->varMode.empty() && !p->right && p->var == dest) {
        auto n = std::make_shared<Type>();
        n->k = TK::Monad;
        n->mode = p->varMode;
        n->src = destType->mode;
        n->a = destType;
        T = n;
      } else {
        throw;
      }
    }
    TypeP H = head(T, p->span);
    if (H->k != TK::Monad && H->k != TK::Up)
      efail(file(), p->span, code::TypeMismatch,
            "bind applied to a non-monadic computation");
    TypeP A = H->a;
    std::string ys = fresh("y");
    ProcP Q = substitute(p->left, {{"*", ys}});
    Process seq;
    seq.k = PK::SeqCut;
    seq.span = p->span;
    seq.var = ys;
    seq.annot = T;
    seq.left = Q;
    seq.right = mk_write(ys, mk_vshift(mk_vvar(p->var)));
    ProcP inner = std::make_shared<const Process>(std::move(seq));
    if (!p->right) {
      if (p->var != dest)
        efail(file(), p->span, code::TypeMismatch,
              "terminal bind must provide the destination");
      return elab(inner, std::move(env), dest, destType);
    }
    ProcP cut = mk_cut(p->var, A, inner, p->right, CutOrigin::Exempt);
    return elab(cut, std::move(env), dest, destType);
  }

  ProcP elab_future(const ProcP& p, Env env, const std::string& dest,
                    const TypeP& destType) {
    if (p->subject != dest)
      efail(file(), p->span, code::TypeMismatch,
            "a future must be written at the destination");
    TypeP H = head(destType, p->span);
    if (H->k != TK::FutT)
      efail(file(), p->span, code::TypeMismatch,
            "future written at a non-future type");
    const Mode m = H->mode;
    std::string z = fresh("z"), zp = fresh("z");
    ProcP P1 = elab(substitute(p->left, {{"*", z}}), env, z, H->a);
    ProcP P2 = slash(P1, z, zp, lower_type(H->a), m);
    return mk_cut(zp, mk_down(m, m, lower_type(H->a)), P2,
                  mk_write(dest, mk_vshift(mk_vvar(zp))), CutOrigin::Exempt, m);
  }
};

}  // namespace

TypeP lower_type(const TypeP& t) {
  if (!t) return t;
  switch (t->k) {
    case TK::Var:
    case TK::One:
      return t;
    case TK::Plus:
    case TK::With: {
      auto n = clone_type(t);
      for (auto& [l, b] : n->branches) b = lower_type(b);
      return n;
    }
    case TK::Tensor:
    case TK::Lolli: {
      auto n = clone_type(t);
      n->a = lower_type(n->a);
      n->b = lower_type(n->b);
      return n;
    }
    case TK::Down:
    case TK::Up: {
      auto n = clone_type(t);
      n->a = lower_type(n->a);
      return n;
    }
    case TK::Arrow:
      return mk_lolli(t->mode, lower_type(t->a), lower_type(t->b));
    case TK::Par:
      return mk_tensor(t->mode, lower_type(t->a), lower_type(t->b));
    case TK::Monad:
      return mk_up(t->src, t->mode, lower_type(t->a));
    case TK::AndT:
      return mk_tensor(t->mode, mk_down(t->src, t->mode, lower_type(t->a)),
                       lower_type(t->b));
    case TK::ImpT:
      return mk_lolli(t->mode, mk_down(t->src, t->mode, lower_type(t->a)),
                      lower_type(t->b));
    case TK::FutT:
      return mk_down(t->mode, t->mode,
                     mk_down(t->mode, t->mode, lower_type(t->a)));
  }
  return t;
}

ElabResult elaborate(const Program& surface) {
  ElabResult res;
  res.kernel.mt = surface.mt;
  res.kernel.file = surface.file;
  Signature& K = res.kernel.sig;
  K.typeOrder = surface.sig.typeOrder;
  K.procOrder = surface.sig.procOrder;
  for (const auto& [name, td] : surface.sig.typeDefs)
    K.typeDefs[name] = {name, td.mode, lower_type(td.body), td.span};
  for (const auto& [name, decl] : surface.sig.procDecls) {
    ProcDecl d = decl;
    for (auto& [an, at] : d.args) at = lower_type(at);
    d.result = lower_type(d.result);
    K.procDecls[name] = d;
  }
  for (const auto& [name, def] : surface.sig.procDefs) {
    const ProcDecl& decl = surface.sig.procDecls.at(name);
    std::set<std::string> names;
    collect_names(def.body, names);
    for (const auto& v : def.argVars) names.insert(v);
    names.insert(def.resVar);
    Elab el(surface, std::move(names));
    Elab::Env env;
    for (std::size_t i = 0; i < decl.args.size(); ++i)
      env[def.argVars[i]] = decl.args[i].second;
    try {
      ProcP body = el.elab(def.body, std::move(env), def.resVar, decl.result);
      K.procDefs[name] = {name, def.argVars, def.resVar, body, def.span};
    } catch (const ElabErr& e) {
      res.diags.push_back(e.d);
    }
  }
  return res;
}

}  // namespace sax
