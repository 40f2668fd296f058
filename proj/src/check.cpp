#include "saxcore/check.hpp"

#include <algorithm>
#include <deque>

#include "saxcore/typeeq.hpp"

namespace sax {

namespace {

struct CheckErr {
  Diag d;
};

[[noreturn]] void fail(const std::string& file, Span sp, const char* code,
                       const std::string& msg) {
  throw CheckErr{{file, sp, code, msg}};
}

class Checker {
 public:
  explicit Checker(const Program& prog) : prog_(prog) {}

  void chk(Ctx& ctx, const ProcP& p, const std::string& dest,
           const TypeP& destType) {
    presuppose(ctx, destType->mode, p->span);
    switch (p->k) {
      case PK::Cut:
        chk_cut(ctx, p, dest, destType);
        return;
      case PK::Id:
        chk_id(ctx, p, dest, destType);
        return;
      case PK::Write:
        chk_write(ctx, p, dest, destType);
        return;
      case PK::Case:
        chk_case(ctx, p, dest, destType);
        return;
      case PK::Call:
        chk_call(ctx, p, dest, destType);
        return;
      case PK::AtomVal:
      case PK::AtomCont:
      case PK::AtomId:
        chk_atom(ctx, p, dest, destType);
        return;
      default:
        fail(file(), p->span, code::ShapeMismatch,
             "process contains unelaborated sugar");
    }
  }

  const std::string& file() const { return prog_.file; }

 private:
  const Program& prog_;

  const ModeTheory& mt() const { return prog_.mt; }
  const Signature& sig() const { return prog_.sig; }

  TypeP head(const TypeP& t, Span sp) {
    TypeP h = head_type(sig(), t);
    if (!h || h->k == TK::Var)
      fail(file(), sp, code::UnknownTypeVar,
           "type variable has no structural unfolding");
    return h;
  }

  bool weak(const Mode& m) const { return mt().allows_weaken(m); }
  bool contr(const Mode& m) const { return mt().allows_contract(m); }

  // Context presupposition: every live entry must sit at a mode >= the
  // destination mode. Entries that could be dropped or have met their
  // obligation are weakened away silently.
  void presuppose(Ctx& ctx, const Mode& k, Span sp) {
    for (auto& [name, e] : ctx) {
      if (e.consumed) continue;
      const Mode& m = e.type->mode;
      if (mt().geq(m, k)) continue;
      if (weak(m) || (contr(m) && e.used))
        e.consumed = true;
      else
        fail(file(), sp, code::ModeSideCondition,
             "channel '" + name + "' at mode " + m +
                 " may not appear in a context offering at mode " + k);
    }
  }

  // Reads an entry: single-use modes consume it, others record the use.
  TypeP use(Ctx& ctx, const std::string& x, Span sp) {
    auto it = ctx.find(x);
    if (it == ctx.end())
      fail(file(), sp, code::UnknownVar, "unbound channel '" + x + "'");
    CtxEntry& e = it->second;
    if (e.consumed)
      fail(file(), sp, code::LinearReused,
           "channel '" + x + "' is used after being consumed");
    e.used = true;
    if (!contr(e.type->mode)) e.consumed = true;
    return e.type;
  }

  // At an axiom every live entry must be droppable: weakenable, or a
  // contraction-mode entry already used on this path.
  void leaf(const Ctx& ctx, Span sp, const char* residueCode) {
    for (const auto& [name, e] : ctx) {
      if (e.consumed) continue;
      const Mode& m = e.type->mode;
      if (weak(m)) continue;
      if (contr(m) && e.used) continue;
      fail(file(), sp, residueCode,
           "channel '" + name + "' at mode " + m + " is left unused");
    }
  }

  void expect_eq(const TypeP& got, const TypeP& want, Span sp,
                 const std::string& what) {
    if (!types_equal(sig(), got, want))
      fail(file(), sp, code::TypeMismatch,
           what + ": expected " + print_type(want, "") + " but found " +
               print_type(got, ""));
  }

  void chk_cut(Ctx& ctx, const ProcP& p, const std::string& dest,
               const TypeP& destType) {
    if (!p->annot)
      fail(file(), p->span, code::AnnotationRequired,
           "cut is missing its type annotation");
    const TypeP& A = p->annot;
    const Mode& m = A->mode;
    const Mode& r = destType->mode;
    if (!mt().declared(m))
      fail(file(), p->span, code::UnknownMode, "unknown mode " + m);
    if (mt().seq_only(m) && p->origin == CutOrigin::Plain)
      fail(file(), p->span, code::SeqOnlyViolation,
           "mode " + m + " admits only sequential composition");
    if (!mt().geq(m, r))
      fail(file(), p->span, code::ModeSideCondition,
           "cut at mode " + m + " under a destination at mode " + r);

    std::set<std::string> fvP = free_vars(p->left);
    fvP.erase(p->var);
    Ctx leftCtx;
    for (const std::string& v : fvP) {
      auto it = ctx.find(v);
      if (it == ctx.end())
        fail(file(), p->left->span, code::UnknownVar,
             "unbound channel '" + v + "'");
      if (it->second.consumed)
        fail(file(), p->left->span, code::LinearReused,
             "channel '" + v + "' is used after being consumed");
      if (!mt().geq(it->second.type->mode, m))
        fail(file(), p->left->span, code::ModeSideCondition,
             "channel '" + v + "' at mode " + it->second.type->mode +
                 " may not occur free in a cut premise at mode " + m);
      leftCtx[v] = {it->second.type, false, false};
    }
    chk(leftCtx, p->left, p->var, A);
    for (const std::string& v : fvP) {
      CtxEntry& e = ctx.at(v);
      if (contr(e.type->mode))
        e.used = e.used || leftCtx.at(v).used;
      else
        e.consumed = true;
    }
    ctx[p->var] = {A, false, false};
    chk(ctx, p->right, dest, destType);
  }

  void chk_id(Ctx& ctx, const ProcP& p, const std::string& dest,
              const TypeP& destType) {
    if (p->var != dest)
      fail(file(), p->span, code::TypeMismatch,
           "identity provides '" + p->var + "' but the destination is '" +
               dest + "'");
    TypeP ty = use(ctx, p->subject, p->span);
    expect_eq(ty, destType, p->span, "identity between unequal types");
    leaf(ctx, p->span, code::LinearUnused);
  }

  void chk_write(Ctx& ctx, const ProcP& p, const std::string& dest,
                 const TypeP& destType) {
    const VSeqP& v = p->val;
    if (!vseq_is_kernel(v))
      fail(file(), p->span, code::ShapeMismatch,
           "write payload is not a flat value");
    if (p->subject == dest) {
      TypeP A = head(destType, p->span);
      switch (v->k) {
        case VK::Label: {
          if (A->k != TK::Plus)
            fail(file(), p->span, code::TypeMismatch,
                 "label written into a channel of non-choice type");
          const TypeP* comp = nullptr;
          for (const auto& [l, t] : A->branches)
            if (l == v->lab) comp = &t;
          if (!comp)
            fail(file(), p->span, code::UnknownLabel,
                 "label '" + v->lab + "' is not part of the type");
          expect_eq(use(ctx, v->sub->var, p->span), *comp, p->span,
                    "label payload");
          break;
        }
        case VK::Pair: {
          if (A->k != TK::Tensor)
            fail(file(), p->span, code::TypeMismatch,
                 "pair written into a channel of non-pair type");
          expect_eq(use(ctx, v->var, p->span), A->a, p->span,
                    "first pair component");
          expect_eq(use(ctx, v->sub->var, p->span), A->b, p->span,
                    "second pair component");
          break;
        }
        case VK::Unit:
          if (A->k != TK::One)
            fail(file(), p->span, code::TypeMismatch,
                 "unit written into a channel of non-unit type");
          break;
        case VK::Shift: {
          if (A->k != TK::Down)
            fail(file(), p->span, code::TypeMismatch,
                 "shift written into a channel whose type is not a down shift");
          expect_eq(use(ctx, v->sub->var, p->span), A->a, p->span,
                    "shift payload");
          break;
        }
        default:
          fail(file(), p->span, code::ShapeMismatch, "bare variable as value");
      }
      leaf(ctx, p->span, code::LinearUnused);
      return;
    }
    // Left rules: sending into a negative channel continues at the
    // destination, which must be the value's continuation variable.
    TypeP A = head(use(ctx, p->subject, p->span), p->span);
    auto need_dest = [&](const std::string& y) {
      if (y != dest)
        fail(file(), p->span, code::TypeMismatch,
             "continuation channel '" + y +
                 "' of a left write must be the destination '" + dest + "'");
    };
    switch (v->k) {
      case VK::Label: {
        if (A->k != TK::With)
          fail(file(), p->span, code::TypeMismatch,
               "label sent to a channel of non-external-choice type");
        const TypeP* comp = nullptr;
        for (const auto& [l, t] : A->branches)
          if (l == v->lab) comp = &t;
        if (!comp)
          fail(file(), p->span, code::UnknownLabel,
               "label '" + v->lab + "' is not part of the type");
        need_dest(v->sub->var);
        expect_eq(*comp, destType, p->span, "selected component");
        break;
      }
      case VK::Pair: {
        if (A->k != TK::Lolli)
          fail(file(), p->span, code::TypeMismatch,
               "argument pair sent to a channel of non-function type");
        expect_eq(use(ctx, v->var, p->span), A->a, p->span,
                  "function argument");
        need_dest(v->sub->var);
        expect_eq(A->b, destType, p->span, "function result");
        break;
      }
      case VK::Shift: {
        if (A->k != TK::Up)
          fail(file(), p->span, code::TypeMismatch,
               "shift sent to a channel whose type is not an up shift");
        need_dest(v->sub->var);
        expect_eq(A->a, destType, p->span, "shifted component");
        break;
      }
      default:
        fail(file(), p->span, code::TypeMismatch,
             "this value cannot be sent to another channel");
    }
    leaf(ctx, p->span, code::LinearUnused);
  }

  void chk_case(Ctx& ctx, const ProcP& p, const std::string& dest,
                const TypeP& destType) {
    const ContP& K = p->cont;
    if (p->subject == dest) {
      TypeP A = head(destType, p->span);
      switch (K->k) {
        case CK::Branches: {
          if (A->k != TK::With)
            fail(file(), p->span, code::TypeMismatch,
                 "branch continuation offered at a non-external-choice type");
          match_labels(A, K, p->span);
          for (const CBranch& b : K->branches) {
            const TypeP* comp = nullptr;
            for (const auto& [l, t] : A->branches)
              if (l == b.lab) comp = &t;
            Ctx clone = ctx;
            chk(clone, b.body, b.pat->var, *comp);
          }
          return;
        }
        case CK::PairMatch: {
          if (A->k != TK::Lolli)
            fail(file(), p->span, code::TypeMismatch,
                 "pair continuation offered at a non-function type");
          ctx[K->v1] = {A->a, false, false};
          chk(ctx, K->body, K->pat->var, A->b);
          return;
        }
        case CK::ShiftMatch: {
          if (A->k != TK::Up)
            fail(file(), p->span, code::TypeMismatch,
                 "shift continuation offered at a type without an up shift");
          chk(ctx, K->body, K->pat->var, A->a);
          return;
        }
        default:
          fail(file(), p->span, code::TypeMismatch,
               "unit match cannot be offered at the destination");
      }
    }
    TypeP A = head(use(ctx, p->subject, p->span), p->span);
    switch (K->k) {
      case CK::Branches: {
        if (A->k != TK::Plus)
          fail(file(), p->span, code::TypeMismatch,
               "branch match on a channel of non-internal-choice type");
        match_labels(A, K, p->span);
        for (const CBranch& b : K->branches) {
          const TypeP* comp = nullptr;
          for (const auto& [l, t] : A->branches)
            if (l == b.lab) comp = &t;
          Ctx clone = ctx;
          clone[b.pat->var] = {*comp, false, false};
          chk(clone, b.body, dest, destType);
        }
        return;
      }
      case CK::PairMatch: {
        if (A->k != TK::Tensor)
          fail(file(), p->span, code::TypeMismatch,
               "pair match on a channel of non-pair type");
        ctx[K->v1] = {A->a, false, false};
        ctx[K->pat->var] = {A->b, false, false};
        chk(ctx, K->body, dest, destType);
        return;
      }
      case CK::UnitMatch: {
        if (A->k != TK::One)
          fail(file(), p->span, code::TypeMismatch,
               "unit match on a channel of non-unit type");
        chk(ctx, K->body, dest, destType);
        return;
      }
      case CK::ShiftMatch: {
        if (A->k != TK::Down)
          fail(file(), p->span, code::TypeMismatch,
               "shift match on a channel whose type is not a down shift");
        ctx[K->pat->var] = {A->a, false, false};
        chk(ctx, K->body, dest, destType);
        return;
      }
    }
  }

  void match_labels(const TypeP& A, const ContP& K, Span sp) {
    for (const CBranch& b : K->branches) {
      bool found = false;
      for (const auto& [l, t] : A->branches) found = found || l == b.lab;
      if (!found)
        fail(file(), sp, code::UnknownLabel,
             "branch '" + b.lab + "' is not part of the type");
    }
    for (const auto& [l, t] : A->branches) {
      bool found = false;
      for (const CBranch& b : K->branches) found = found || b.lab == l;
      if (!found)
        fail(file(), sp, code::UnknownLabel,
             "missing branch for label '" + l + "'");
    }
  }

  void chk_call(Ctx& ctx, const ProcP& p, const std::string& dest,
                const TypeP& destType) {
    if (p->subject != dest)
      fail(file(), p->span, code::TypeMismatch,
           "call provides '" + p->subject + "' but the destination is '" +
               dest + "'");
    auto it = sig().procDecls.find(p->callee);
    if (it == sig().procDecls.end())
      fail(file(), p->span, code::UnknownProc,
           "undeclared process '" + p->callee + "'");
    const ProcDecl& decl = it->second;
    if (decl.args.size() != p->args.size())
      fail(file(), p->span, code::ArityMismatch,
           "'" + p->callee + "' expects " + std::to_string(decl.args.size()) +
               " arguments, got " + std::to_string(p->args.size()));
    expect_eq(decl.result, destType, p->span, "call result");
    for (std::size_t i = 0; i < p->args.size(); ++i)
      expect_eq(use(ctx, p->args[i], p->span), decl.args[i].second, p->span,
                "argument '" + p->args[i] + "'");
    leaf(ctx, p->span, code::LinearResidue);
  }

  // Atomic writes behave like a sequential cut whose premise fills a fresh
  // cell of the shifted body type.
  void chk_atom(Ctx& ctx, const ProcP& p, const std::string& dest,
                const TypeP& destType) {
    if (p->subject != dest)
      fail(file(), p->span, code::TypeMismatch,
           "atomic write provides '" + p->subject +
               "' but the destination is '" + dest + "'");
    TypeP A = head(destType, p->span);
    if (A->k != TK::Down)
      fail(file(), p->span, code::TypeMismatch,
           "atomic write at a type without a down shift");
    switch (p->k) {
      case PK::AtomVal:
        chk(ctx, mk_write(p->inner, p->val), p->inner, A->a);
        return;
      case PK::AtomCont:
        chk(ctx, mk_case(p->inner, p->cont), p->inner, A->a);
        return;
      default: {
        TypeP ty = use(ctx, p->var, p->span);
        expect_eq(ty, A->a, p->span, "moved cell");
        leaf(ctx, p->span, code::LinearUnused);
        return;
      }
    }
  }
};

}  // namespace

std::vector<Diag> check_process(const Program& kernel, Ctx ctx, const ProcP& p,
                                const std::string& dest,
                                const TypeP& destType) {
  Checker c(kernel);
  try {
    c.chk(ctx, p, dest, destType);
  } catch (const CheckErr& e) {
    return {e.d};
  }
  return {};
}

std::vector<Diag> check_program(const Program& kernel) {
  std::vector<Diag> out;
  for (const std::string& name : kernel.sig.procOrder) {
    auto dit = kernel.sig.procDefs.find(name);
    if (dit == kernel.sig.procDefs.end()) continue;
    const ProcDef& def = dit->second;
    const ProcDecl& decl = kernel.sig.procDecls.at(name);
    Ctx ctx;
    for (std::size_t i = 0; i < decl.args.size(); ++i)
      ctx[def.argVars[i]] = {decl.args[i].second, false, false};
    auto diags =
        check_process(kernel, std::move(ctx), def.body, def.resVar, decl.result);
    out.insert(out.end(), diags.begin(), diags.end());
  }
  return out;
}

ConfigCheck check_configuration(const Configuration& cfg) {
  ConfigCheck res;
  const Program& prog = *cfg.prog;

  // Providers: a thread provides its destination; otherwise a cell does.
  struct Obj {
    Addr provides;
    bool thread;
  };
  std::vector<Obj> objs;
  for (const auto& [a, th] : cfg.threads) objs.push_back({a, true});
  for (const auto& [a, cell] : cfg.cells)
    if (cell.k != ObjK::Empty && !cfg.threads.count(a))
      objs.push_back({a, false});
  std::map<Addr, std::size_t> providerOf;
  for (std::size_t i = 0; i < objs.size(); ++i) {
    if (providerOf.count(objs[i].provides)) {
      res.diags.push_back({prog.file, {}, code::ShapeMismatch,
                           "two objects provide the same address"});
      return res;
    }
    providerOf[objs[i].provides] = i;
  }

  auto reads_of = [&](const Obj& o) {
    std::set<std::string> fv;
    if (o.thread) {
      fv = free_vars(cfg.threads.at(o.provides).proc);
    } else {
      const SemObj& c = cfg.cells.at(o.provides);
      ProcP tmp = c.k == ObjK::FilledVal ? mk_write("#self", c.val)
                                         : mk_case("#self", c.cont);
      fv = free_vars(tmp);
      fv.erase("#self");
    }
    fv.erase(addr_name(o.provides));
    std::vector<Addr> out;
    for (const std::string& v : fv)
      if (is_addr_name(v)) out.push_back(addr_of_name(v));
    return out;
  };

  // Order objects so writers precede readers; a dependency cycle means no
  // valid interleaving of the object typings exists.
  std::vector<std::vector<std::size_t>> succ(objs.size());
  std::vector<std::size_t> indeg(objs.size(), 0);
  for (std::size_t i = 0; i < objs.size(); ++i)
    for (Addr a : reads_of(objs[i])) {
      auto it = providerOf.find(a);
      if (it == providerOf.end()) continue;  // reads an empty cell
      if (it->second == i) continue;
      succ[it->second].push_back(i);
      indeg[i]++;
    }
  std::deque<std::size_t> q;
  for (std::size_t i = 0; i < objs.size(); ++i)
    if (indeg[i] == 0) q.push_back(i);
  std::vector<std::size_t> order;
  while (!q.empty()) {
    std::size_t i = q.front();
    q.pop_front();
    order.push_back(i);
    for (std::size_t j : succ[i])
      if (--indeg[j] == 0) q.push_back(j);
  }
  if (order.size() != objs.size()) {
    res.diags.push_back({prog.file, {}, code::NoValidOrder,
                         "cyclic dependency between configuration objects"});
    return res;
  }

  // Check each object in isolation against the recorded address types.
  std::map<Addr, int> ephemeralReads;
  for (std::size_t i : order) {
    const Obj& o = objs[i];
    Ctx ctx;
    for (Addr a : reads_of(o)) {
      auto t = cfg.addrType.find(a);
      if (t == cfg.addrType.end()) {
        res.diags.push_back({prog.file, {}, code::ObjectIllTyped,
                             "object at " + addr_name(o.provides) +
                                 " reads an unallocated address"});
        return res;
      }
      ctx[addr_name(a)] = {t->second, false, false};
      if (!prog.mt.allows_contract(t->second->mode)) ephemeralReads[a]++;
    }
    ProcP body;
    if (o.thread) {
      body = cfg.threads.at(o.provides).proc;
    } else {
      const SemObj& c = cfg.cells.at(o.provides);
      body = c.k == ObjK::FilledVal ? mk_write(addr_name(o.provides), c.val)
                                    : mk_case(addr_name(o.provides), c.cont);
    }
    auto diags = check_process(prog, std::move(ctx), body,
                               addr_name(o.provides),
                               cfg.addrType.at(o.provides));
    if (!diags.empty()) {
      Diag d = diags.front();
      d.code = code::ObjectIllTyped;
      d.msg = "object at " + addr_name(o.provides) + ": " + d.msg;
      res.diags.push_back(d);
      return res;
    }
  }
  for (const auto& [a, n] : ephemeralReads)
    if (n > 1) {
      res.diags.push_back({prog.file, {}, code::ObjectIllTyped,
                           "ephemeral cell " + addr_name(a) +
                               " is read by more than one object"});
      return res;
    }

  // The offered interface: provided addresses not consumed by a reader.
  for (const Obj& o : objs)
    if (!ephemeralReads.count(o.provides) ||
        cfg.prog->mt.allows_contract(cfg.addrMode.at(o.provides)))
      res.offered[o.provides] = cfg.addrType.at(o.provides);
  // Empty cells with no thread are in flight between steps and never occur
  // in the quiescent configurations handed to this check; an empty cell
  // paired with its thread is provided by the thread, handled above.
  res.ok = true;
  return res;
}

}  // namespace sax
