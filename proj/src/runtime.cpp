#include "saxcore/runtime.hpp"

#include <algorithm>

#include "saxcore/typeeq.hpp"

namespace sax {

std::string addr_name(Addr a) { return "#" + std::to_string(a); }

bool is_addr_name(const std::string& v) {
  return !v.empty() && v[0] == '#';
}

Addr addr_of_name(const std::string& v) {
  return std::stoull(v.substr(1));
}

std::uint64_t Rng::next() {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Modulo reduction; the bias is irrelevant for scheduling purposes.
std::uint64_t Rng::below(std::uint64_t n) { return n ? next() % n : 0; }

Addr Configuration::alloc(const TypeP& type) {
  Addr a = nextAddr++;
  addrType[a] = type;
  addrMode[a] = type->mode;
  SemObj cell;
  cell.k = ObjK::Empty;
  cell.addr = a;
  cell.seq = nextSeq++;
  cells[a] = cell;
  return a;
}

std::optional<Addr> Configuration::spawn_entry(const std::string& procName,
                                               std::vector<Diag>& diags) {
  auto it = prog->sig.procDecls.find(procName);
  if (it == prog->sig.procDecls.end()) {
    diags.push_back({prog->file, {}, code::UnknownProc,
                     "undeclared process '" + procName + "'"});
    return std::nullopt;
  }
  if (!it->second.args.empty()) {
    diags.push_back({prog->file, {}, code::ArityMismatch,
                     "entry process '" + procName + "' takes arguments"});
    return std::nullopt;
  }
  Addr root = alloc(it->second.result);
  SemObj th;
  th.k = ObjK::Thread;
  th.addr = root;
  th.proc = mk_call(addr_name(root), procName, {});
  th.seq = nextSeq++;
  threads[root] = th;
  roots.push_back(root);
  return root;
}

namespace {

bool filled(const Configuration& cfg, const std::string& var) {
  if (!is_addr_name(var)) return false;
  auto it = cfg.cells.find(addr_of_name(var));
  return it != cfg.cells.end() && it->second.k != ObjK::Empty;
}

// Passes a value to a continuation: matches the shapes and substitutes the
// carried addresses for the bound variables.
ProcP pass(const VSeqP& v, const ContP& k) {
  switch (v->k) {
    case VK::Label:
      if (k->k != CK::Branches) return nullptr;
      for (const CBranch& b : k->branches)
        if (b.lab == v->lab)
          return substitute(b.body, {{b.pat->var, v->sub->var}});
      return nullptr;
    case VK::Pair:
      if (k->k != CK::PairMatch) return nullptr;
      return substitute(k->body,
                        {{k->v1, v->var}, {k->pat->var, v->sub->var}});
    case VK::Unit:
      return k->k == CK::UnitMatch ? k->body : nullptr;
    case VK::Shift:
      if (k->k != CK::ShiftMatch) return nullptr;
      return substitute(k->body, {{k->pat->var, v->sub->var}});
    default:
      return nullptr;
  }
}

}  // namespace

bool Configuration::ready(const SemObj& th) const {
  const ProcP& p = th.proc;
  const std::string self = addr_name(th.addr);
  switch (p->k) {
    case PK::Cut:
    case PK::Call:
    case PK::AtomVal:
    case PK::AtomCont:
      return true;
    case PK::Id:
      return filled(*this, p->subject);
    case PK::AtomId:
      return filled(*this, p->var);
    case PK::Write:
      return p->subject == self || filled(*this, p->subject);
    case PK::Case:
      return p->subject == self || filled(*this, p->subject);
    default:
      return false;
  }
}

std::vector<Addr> Configuration::enabled() const {
  std::vector<Addr> out;
  for (const auto& [a, th] : threads)
    if (ready(th)) out.push_back(a);
  return out;
}

StepRec Configuration::step(Addr dest) {
  SemObj& th = threads.at(dest);
  ProcP p = th.proc;
  const std::string self = addr_name(dest);
  StepRec rec;
  rec.actor = dest;

  auto consume_cell = [&](Addr a) {
    SemObj& c = cells.at(a);
    if (!c.persistent) {
      cells.erase(a);
      rec.consumed.push_back(a);
    }
  };
  auto fill_val = [&](Addr a, const VSeqP& v) {
    SemObj& c = cells.at(a);
    c.k = ObjK::FilledVal;
    c.val = v;
    c.cont = nullptr;
    c.persistent = prog->mt.allows_contract(addrMode.at(a));
  };
  auto fill_cont = [&](Addr a, const ContP& k) {
    SemObj& c = cells.at(a);
    c.k = ObjK::FilledCont;
    c.cont = k;
    c.val = nullptr;
    c.persistent = prog->mt.allows_contract(addrMode.at(a));
  };
  auto stuck = [&]() {
    rec.rule = "stuck";
    return rec;
  };

  switch (p->k) {
    case PK::Cut: {
      Addr a = alloc(p->annot);
      rec.rule = "cut";
      rec.produced.push_back(a);
      std::map<std::string, std::string> m{{p->var, addr_name(a)}};
      SemObj child;
      child.k = ObjK::Thread;
      child.addr = a;
      child.proc = substitute(p->left, m);
      child.seq = nextSeq++;
      threads[a] = child;
      th.proc = substitute(p->right, m);
      return rec;
    }
    case PK::Call: {
      auto it = prog->sig.procDefs.find(p->callee);
      if (it == prog->sig.procDefs.end()) return stuck();
      const ProcDef& def = it->second;
      if (def.argVars.size() != p->args.size()) return stuck();
      std::map<std::string, std::string> m;
      for (std::size_t i = 0; i < p->args.size(); ++i)
        m[def.argVars[i]] = p->args[i];
      m[def.resVar] = self;
      rec.rule = "call";
      th.proc = substitute(def.body, m);
      return rec;
    }
    case PK::Id: {
      Addr src = addr_of_name(p->subject);
      const SemObj c = cells.at(src);
      rec.rule = "id";
      if (c.k == ObjK::FilledVal)
        fill_val(dest, c.val);
      else
        fill_cont(dest, c.cont);
      consume_cell(src);
      threads.erase(dest);
      return rec;
    }
    case PK::Write: {
      if (p->subject == self) {
        rec.rule = "posR";
        fill_val(dest, p->val);
        threads.erase(dest);
        return rec;
      }
      Addr c = addr_of_name(p->subject);
      const SemObj cell = cells.at(c);
      if (cell.k != ObjK::FilledCont) return stuck();
      ProcP next = pass(p->val, cell.cont);
      if (!next) return stuck();
      rec.rule = "negL";
      consume_cell(c);
      th.proc = next;
      return rec;
    }
    case PK::Case: {
      if (p->subject == self) {
        rec.rule = "negR";
        fill_cont(dest, p->cont);
        threads.erase(dest);
        return rec;
      }
      Addr c = addr_of_name(p->subject);
      const SemObj cell = cells.at(c);
      if (cell.k != ObjK::FilledVal) return stuck();
      ProcP next = pass(cell.val, p->cont);
      if (!next) return stuck();
      rec.rule = "posL";
      consume_cell(c);
      th.proc = next;
      return rec;
    }
    case PK::AtomVal:
    case PK::AtomCont:
    case PK::AtomId: {
      TypeP A = head_type(prog->sig, addrType.at(dest));
      if (!A || A->k != TK::Down) return stuck();
      Addr a = alloc(A->a);
      rec.produced.push_back(a);
      if (p->k == PK::AtomVal) {
        rec.rule = "atom-val";
        fill_val(a, p->val);
      } else if (p->k == PK::AtomCont) {
        rec.rule = "atom-cont";
        fill_cont(a, p->cont);
      } else {
        rec.rule = "atom-id";
        Addr src = addr_of_name(p->var);
        const SemObj c = cells.at(src);
        if (c.k == ObjK::FilledVal)
          fill_val(a, c.val);
        else
          fill_cont(a, c.cont);
        consume_cell(src);
      }
      fill_val(dest, mk_vshift(mk_vvar(addr_name(a))));
      threads.erase(dest);
      return rec;
    }
    default:
      return stuck();
  }
}

RunResult run(Configuration& cfg, Policy policy, std::uint64_t seed,
              std::uint64_t maxSteps,
              const std::function<void(const Configuration&, const StepRec&)>&
                  onStep) {
  RunResult res;
  Rng rng{seed};
  while (res.steps < maxSteps) {
    std::vector<Addr> ready = cfg.enabled();
    if (ready.empty()) {
      res.status = cfg.threads.empty() ? RunStatus::Done : RunStatus::Stuck;
      return res;
    }
    Addr pick = ready.front();
    switch (policy) {
      case Policy::Fifo: {
        std::uint64_t best = ~0ULL;
        for (Addr a : ready)
          if (cfg.threads.at(a).seq < best) {
            best = cfg.threads.at(a).seq;
            pick = a;
          }
        break;
      }
      case Policy::Lifo: {
        std::uint64_t best = 0;
        for (Addr a : ready)
          if (cfg.threads.at(a).seq >= best) {
            best = cfg.threads.at(a).seq;
            pick = a;
          }
        break;
      }
      case Policy::Random:
        pick = ready[rng.below(ready.size())];
        break;
    }
    StepRec rec = cfg.step(pick);
    if (rec.rule == "stuck") {
      res.status = RunStatus::Stuck;
      return res;
    }
    res.steps++;
    res.trace.push_back(rec);
    if (onStep) onStep(cfg, rec);
  }
  res.status = cfg.enabled().empty()
                   ? (cfg.threads.empty() ? RunStatus::Done : RunStatus::Stuck)
                   : RunStatus::StepLimit;
  return res;
}

namespace {

std::string decode_at(const Configuration& cfg, Addr a, int depth);

std::string decode_val(const Configuration& cfg, const VSeqP& v, int depth) {
  auto follow = [&](const std::string& var) {
    if (!is_addr_name(var)) return var;
    return decode_at(cfg, addr_of_name(var), depth - 1);
  };
  switch (v->k) {
    case VK::Label:
      return v->lab + "(" + follow(v->sub->var) + ")";
    case VK::Pair:
      return "<" + follow(v->var) + ", " + follow(v->sub->var) + ">";
    case VK::Unit:
      return "<>";
    case VK::Shift:
      return "shift(" + follow(v->sub->var) + ")";
    default:
      return v->var;
  }
}

std::string decode_at(const Configuration& cfg, Addr a, int depth) {
  if (depth <= 0) return "...";
  auto it = cfg.cells.find(a);
  if (it == cfg.cells.end() || it->second.k == ObjK::Empty)
    return "?" + addr_name(a);
  if (it->second.k == ObjK::FilledCont) return "<cont>";
  return decode_val(cfg, it->second.val, depth);
}

}  // namespace

std::string decode(const Configuration& cfg, Addr root) {
  return decode_at(cfg, root, 100000);
}

std::string render_trace(const std::vector<StepRec>& trace,
                         const Configuration& cfg) {
  std::string out;
  auto fmt = [&](Addr a) {
    std::string m = cfg.addrMode.count(a) ? cfg.addrMode.at(a) : "?";
    return "a" + std::to_string(a) + "@" + m;
  };
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const StepRec& r = trace[i];
    out += "#" + std::to_string(i + 1) + " " + r.rule + " consume=[";
    for (std::size_t j = 0; j < r.consumed.size(); ++j)
      out += (j ? "," : "") + fmt(r.consumed[j]);
    out += "] produce=[";
    for (std::size_t j = 0; j < r.produced.size(); ++j)
      out += (j ? "," : "") + fmt(r.produced[j]);
    out += "]\n";
  }
  return out;
}

}  // namespace sax
