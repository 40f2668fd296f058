#include "saxcore/verify.hpp"

#include <algorithm>
#include <cctype>

#include "saxcore/check.hpp"
#include "saxcore/typeeq.hpp"

namespace sax {

namespace {

// Textual description of the object providing an address, with embedded
// raw addresses still in "#n" form.
std::string describe(const Configuration& cfg, Addr a) {
  auto th = cfg.threads.find(a);
  if (th != cfg.threads.end())
    return "thread[" + cfg.addrMode.at(a) + "] " +
           print_process(th->second.proc);
  auto it = cfg.cells.find(a);
  if (it == cfg.cells.end()) return "gone";
  const SemObj& c = it->second;
  std::string tag = c.persistent ? "!cell" : "cell";
  switch (c.k) {
    case ObjK::Empty:
      return tag + "[" + cfg.addrMode.at(a) + "] empty";
    case ObjK::FilledVal:
      return tag + "[" + cfg.addrMode.at(a) + "] " +
             print_process(mk_write(addr_name(a), c.val));
    default:
      return tag + "[" + cfg.addrMode.at(a) + "] " +
             print_process(mk_case(addr_name(a), c.cont));
  }
}

// Walks a description left to right, calling fn on every "#n" occurrence
// and splicing in its replacement.
std::string rewrite_addrs(const std::string& s,
                          const std::function<std::string(Addr)>& fn) {
  std::string out;
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] == '#' && i + 1 < s.size() && std::isdigit(s[i + 1])) {
      std::size_t j = i + 1;
      while (j < s.size() && std::isdigit(s[j])) j++;
      out += fn(std::stoull(s.substr(i + 1, j - i - 1)));
      i = j;
    } else {
      out += s[i++];
    }
  }
  return out;
}

struct CanonResult {
  std::string text;
  std::vector<Addr> order;            // reachable addresses, canonical order
  std::vector<std::pair<std::string, Addr>> garbage;  // signature, address
};

std::set<Addr> providers(const Configuration& cfg) {
  std::set<Addr> out;
  for (const auto& [a, th] : cfg.threads) out.insert(a);
  for (const auto& [a, c] : cfg.cells) out.insert(a);
  return out;
}

CanonResult canonicalize(const Configuration& cfg) {
  CanonResult res;
  std::map<Addr, std::size_t> id;
  std::vector<Addr> queue;
  auto visit = [&](Addr a) {
    auto it = id.find(a);
    if (it == id.end()) {
      id[a] = res.order.size();
      res.order.push_back(a);
      queue.push_back(a);
      return "$" + std::to_string(id[a]);
    }
    return "$" + std::to_string(it->second);
  };
  std::vector<Addr> roots = cfg.roots;
  std::sort(roots.begin(), roots.end());
  for (Addr r : roots) visit(r);
  for (std::size_t i = 0; i < queue.size(); ++i) {
    Addr a = queue[i];
    res.text += rewrite_addrs(describe(cfg, a), visit) + "\n";
  }

  // Unreachable objects are matched by structural signature; references
  // into the reachable part use its canonical ids.
  std::map<Addr, std::string> sig;
  std::set<Addr> inProgress;
  std::function<std::string(Addr)> signature = [&](Addr a) -> std::string {
    if (id.count(a)) return "$" + std::to_string(id[a]);
    auto it = sig.find(a);
    if (it != sig.end()) return it->second;
    if (inProgress.count(a)) return "cyc";
    inProgress.insert(a);
    std::string s = rewrite_addrs(describe(cfg, a), signature);
    inProgress.erase(a);
    sig[a] = s;
    return s;
  };
  for (Addr a : providers(cfg))
    if (!id.count(a)) res.garbage.emplace_back(signature(a), a);
  std::sort(res.garbage.begin(), res.garbage.end());
  return res;
}

}  // namespace

std::string canonical_form(const Configuration& cfg) {
  CanonResult c = canonicalize(cfg);
  std::string out = c.text;
  for (const auto& [s, a] : c.garbage) out += "| " + s + "\n";
  return out;
}

std::optional<std::map<Addr, Addr>> config_equiv(const Configuration& a,
                                                 const Configuration& b) {
  CanonResult ca = canonicalize(a);
  CanonResult cb = canonicalize(b);
  if (ca.text != cb.text) return std::nullopt;
  if (ca.garbage.size() != cb.garbage.size()) return std::nullopt;
  for (std::size_t i = 0; i < ca.garbage.size(); ++i)
    if (ca.garbage[i].first != cb.garbage[i].first) return std::nullopt;
  std::map<Addr, Addr> witness;
  for (std::size_t i = 0; i < ca.order.size(); ++i)
    witness[ca.order[i]] = cb.order[i];
  for (std::size_t i = 0; i < ca.garbage.size(); ++i)
    witness[ca.garbage[i].second] = cb.garbage[i].second;
  return witness;
}

namespace {

bool spawn(const Program& kernel, const std::string& entry, Configuration& cfg,
           std::string& err) {
  cfg.prog = &kernel;
  std::vector<Diag> diags;
  if (!cfg.spawn_entry(entry, diags)) {
    err = diags.empty() ? "cannot start entry" : diags.front().msg;
    return false;
  }
  return true;
}

}  // namespace

MetaReport check_preservation(const Program& kernel, const std::string& entry,
                              const std::vector<StepRec>& trace) {
  MetaReport rep;
  Configuration cfg;
  if (!spawn(kernel, entry, cfg, rep.detail)) {
    rep.ok = false;
    return rep;
  }
  ConfigCheck cur = check_configuration(cfg);
  if (!cur.ok) {
    rep.ok = false;
    rep.detail = "initial configuration ill-typed: " + cur.diags.front().msg;
    return rep;
  }
  std::map<Addr, TypeP> offered = cur.offered;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    auto th = cfg.threads.find(trace[i].actor);
    if (th == cfg.threads.end() || !cfg.ready(th->second)) {
      rep.ok = false;
      rep.detail = "replay diverged at step " + std::to_string(i + 1);
      return rep;
    }
    StepRec rec = cfg.step(trace[i].actor);
    if (rec.rule == "stuck") {
      rep.ok = false;
      rep.detail = "step " + std::to_string(i + 1) + " got stuck on replay";
      return rep;
    }
    ConfigCheck next = check_configuration(cfg);
    if (!next.ok) {
      rep.ok = false;
      rep.detail = "configuration ill-typed after step " +
                   std::to_string(i + 1) + ": " + next.diags.front().msg;
      return rep;
    }
    for (const auto& [addr, ty] : offered) {
      auto it = next.offered.find(addr);
      if (it == next.offered.end() ||
          !types_equal(kernel.sig, it->second, ty)) {
        rep.ok = false;
        rep.detail = "offered channel " + addr_name(addr) +
                     " lost after step " + std::to_string(i + 1);
        return rep;
      }
    }
    offered = std::move(next.offered);
    rep.checkedSteps++;
  }
  return rep;
}

MetaReport check_progress(const Configuration& final) {
  MetaReport rep;
  if (!final.threads.empty()) {
    rep.ok = false;
    rep.detail = "terminated run still contains " +
                 std::to_string(final.threads.size()) + " thread(s)";
    return rep;
  }
  for (Addr r : final.roots) {
    auto it = final.cells.find(r);
    if (it == final.cells.end() || it->second.k == ObjK::Empty) {
      rep.ok = false;
      rep.detail = "offered channel " + addr_name(r) + " is not filled";
      return rep;
    }
  }
  return rep;
}

MetaReport check_confluence(const Program& kernel, const std::string& entry,
                            std::uint64_t maxSteps,
                            const std::vector<std::uint64_t>& seeds) {
  MetaReport rep;
  Configuration base;
  if (!spawn(kernel, entry, base, rep.detail)) {
    rep.ok = false;
    return rep;
  }
  RunResult r0 = run(base, Policy::Fifo, 0, maxSteps);
  auto compare = [&](Policy pol, std::uint64_t seed, const char* name) {
    if (!rep.ok) return;
    Configuration cfg;
    std::string err;
    if (!spawn(kernel, entry, cfg, err)) {
      rep.ok = false;
      rep.detail = err;
      return;
    }
    RunResult r = run(cfg, pol, seed, maxSteps);
    rep.checkedSteps += r.steps;
    if (r.status != r0.status) {
      rep.ok = false;
      rep.detail = std::string("run status differs under ") + name;
      return;
    }
    if (r.status == RunStatus::Done && !config_equiv(base, cfg)) {
      rep.ok = false;
      rep.detail = std::string("final configurations differ under ") + name;
    }
  };
  compare(Policy::Lifo, 0, "lifo");
  for (std::uint64_t s : seeds)
    compare(Policy::Random, s, ("seed " + std::to_string(s)).c_str());
  return rep;
}

MetaReport check_diamond(const Program& kernel, const std::string& entry,
                         std::uint64_t maxSteps, std::size_t maxObjects) {
  MetaReport rep;
  Configuration cfg;
  if (!spawn(kernel, entry, cfg, rep.detail)) {
    rep.ok = false;
    return rep;
  }
  for (std::uint64_t n = 0; n < maxSteps; ++n) {
    std::vector<Addr> en = cfg.enabled();
    if (en.empty()) break;
    if (cfg.threads.size() + cfg.cells.size() <= maxObjects) {
      for (std::size_t i = 0; i < en.size(); ++i)
        for (std::size_t j = i + 1; j < en.size(); ++j) {
          Configuration c1 = cfg, c2 = cfg;
          c1.step(en[i]);
          c2.step(en[j]);
          rep.checkedSteps++;
          if (config_equiv(c1, c2)) continue;
          Configuration d1 = c1, d2 = c2;
          auto t1 = d1.threads.find(en[j]);
          auto t2 = d2.threads.find(en[i]);
          bool joined = false;
          if (t1 != d1.threads.end() && d1.ready(t1->second) &&
              t2 != d2.threads.end() && d2.ready(t2->second)) {
            d1.step(en[j]);
            d2.step(en[i]);
            joined = config_equiv(d1, d2).has_value();
          }
          if (!joined) {
            rep.ok = false;
            rep.detail = "diamond failed at step " + std::to_string(n) +
                         " for threads " + addr_name(en[i]) + " and " +
                         addr_name(en[j]);
            return rep;
          }
        }
    }
    cfg.step(en.front());
  }
  return rep;
}

MetaReport check_seq_active(const Program& kernel, const std::string& entry,
                            const std::vector<StepRec>& trace) {
  MetaReport rep;
  Configuration cfg;
  if (!spawn(kernel, entry, cfg, rep.detail)) {
    rep.ok = false;
    return rep;
  }
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::vector<Addr> en = cfg.enabled();
    if (en.size() > 1) {
      rep.ok = false;
      rep.detail = std::to_string(en.size()) +
                   " threads ready before step " + std::to_string(i + 1);
      return rep;
    }
    auto th = cfg.threads.find(trace[i].actor);
    if (th == cfg.threads.end() || !cfg.ready(th->second)) {
      rep.ok = false;
      rep.detail = "replay diverged at step " + std::to_string(i + 1);
      return rep;
    }
    cfg.step(trace[i].actor);
    rep.checkedSteps++;
  }
  return rep;
}

}  // namespace sax
