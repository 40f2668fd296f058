#include "sax.h"

#include <cstring>
#include <string>

#include "json.hpp"
#include "saxcore/check.hpp"
#include "saxcore/elaborate.hpp"
#include "saxcore/parser.hpp"
#include "saxcore/runtime.hpp"
#include "saxcore/verify.hpp"

using nlohmann::json;

struct sax_env {
  sax::Program surface;
  sax::Program kernel;
  bool loaded = false;
  bool checked = false;
  std::string diags;
};

namespace {

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_diags(sax_env* env, const std::vector<sax::Diag>& ds) {
  env->diags = sax::render_diags(ds);
}

bool parse_policy(const char* s, sax::Policy& out) {
  std::string p = s ? s : "fifo";
  if (p == "fifo") out = sax::Policy::Fifo;
  else if (p == "lifo") out = sax::Policy::Lifo;
  else if (p == "random") out = sax::Policy::Random;
  else return false;
  return true;
}

const char* status_name(sax::RunStatus s) {
  switch (s) {
    case sax::RunStatus::Done: return "done";
    case sax::RunStatus::StepLimit: return "steplimit";
    default: return "stuck";
  }
}

}  // namespace

extern "C" {

sax_env* sax_env_new(void) { return new sax_env; }

void sax_env_free(sax_env* env) { delete env; }

int sax_load_file(sax_env* env, const char* path) {
  if (!env || !path) return SAX_USAGE;
  env->loaded = env->checked = false;
  env->diags.clear();
  sax::ParseResult pr = sax::parse_file(path);
  if (!pr.ok()) {
    set_diags(env, pr.diags);
    return SAX_ERR;
  }
  auto vd = sax::validate_signature(pr.prog.sig, pr.prog.mt, pr.prog.file);
  auto md = pr.prog.mt.check();
  vd.insert(vd.end(), md.begin(), md.end());
  if (!vd.empty()) {
    set_diags(env, vd);
    return SAX_ERR;
  }
  env->surface = std::move(pr.prog);
  env->loaded = true;
  return SAX_OK;
}

int sax_check(sax_env* env) {
  if (!env || !env->loaded) return SAX_USAGE;
  env->checked = false;
  sax::ElabResult er = sax::elaborate(env->surface);
  if (!er.ok()) {
    set_diags(env, er.diags);
    return SAX_ERR;
  }
  auto cd = sax::check_program(er.kernel);
  if (!cd.empty()) {
    set_diags(env, cd);
    return SAX_ERR;
  }
  env->kernel = std::move(er.kernel);
  env->checked = true;
  env->diags.clear();
  return SAX_OK;
}

const char* sax_diagnostics(sax_env* env) {
  return env ? env->diags.c_str() : "";
}

int sax_expand(sax_env* env, char** out) {
  if (!env || !out || !env->checked) return SAX_USAGE;
  *out = dup_string(sax::print_program(env->kernel));
  return SAX_OK;
}

int sax_run(sax_env* env, const char* entry, const char* policy,
            uint64_t seed, uint64_t max_steps, int want_trace, char** out) {
  if (!env || !out || !entry || !env->checked) return SAX_USAGE;
  sax::Policy pol;
  if (!parse_policy(policy, pol)) return SAX_USAGE;
  sax::Configuration cfg;
  cfg.prog = &env->kernel;
  std::vector<sax::Diag> diags;
  auto root = cfg.spawn_entry(entry, diags);
  if (!root) {
    set_diags(env, diags);
    return SAX_ERR;
  }
  sax::RunResult rr = sax::run(cfg, pol, seed, max_steps);
  std::string text;
  if (want_trace) text += sax::render_trace(rr.trace, cfg);
  text += std::string("status: ") + status_name(rr.status) + "\n";
  text += "steps: " + std::to_string(rr.steps) + "\n";
  text += "value: " + sax::decode(cfg, *root) + "\n";
  *out = dup_string(text);
  return rr.status == sax::RunStatus::Done ? SAX_OK : SAX_ERR;
}

int sax_verify(sax_env* env, const char* entry, uint64_t max_steps, int json_out,
               char** out) {
  if (!env || !out || !entry || !env->checked) return SAX_USAGE;
  sax::Configuration cfg;
  cfg.prog = &env->kernel;
  std::vector<sax::Diag> diags;
  auto root = cfg.spawn_entry(entry, diags);
  if (!root) {
    set_diags(env, diags);
    return SAX_ERR;
  }
  sax::RunResult rr = sax::run(cfg, sax::Policy::Fifo, 0, max_steps);

  bool hasSeq = false;
  for (const auto& [m, props] : env->kernel.mt.modes())
    hasSeq = hasSeq || props.seqOnly;
  // A single active thread is only promised when nothing opted out of
  // sequencing: futures and fork-join pairs do so explicitly, and plain
  // cuts at a concurrent mode do so by construction.
  std::function<bool(const sax::ProcP&)> exempt = [&](const sax::ProcP& p) {
    if (!p) return false;
    if (p->k == sax::PK::Cut && p->origin == sax::CutOrigin::Exempt)
      return true;
    if (p->k == sax::PK::Cut && p->origin == sax::CutOrigin::Plain &&
        !env->kernel.mt.seq_only(p->varMode))
      return true;
    bool sub = exempt(p->left) || exempt(p->right);
    if (p->cont) {
      const sax::Cont& k = *p->cont;
      sub = sub || exempt(k.body);
      for (const auto& b : k.branches) sub = sub || exempt(b.body);
    }
    return sub;
  };
  for (const auto& [name, def] : env->kernel.sig.procDefs)
    hasSeq = hasSeq && !exempt(def.body);

  json rep;
  bool ok = true;
  auto record = [&](const char* name, const sax::MetaReport& r) {
    rep[name] = {{"ok", r.ok}, {"detail", r.detail}, {"steps", r.checkedSteps}};
    ok = ok && r.ok;
  };
  record("preservation",
         sax::check_preservation(env->kernel, entry, rr.trace));
  if (rr.status == sax::RunStatus::Done)
    record("progress", sax::check_progress(cfg));
  record("confluence",
         sax::check_confluence(env->kernel, entry, max_steps, {1, 2, 3}));
  if (hasSeq)
    record("seq-active", sax::check_seq_active(env->kernel, entry, rr.trace));

  std::string text;
  if (json_out) {
    rep["ok"] = ok;
    text = rep.dump(2) + "\n";
  } else {
    for (auto& [name, r] : rep.items()) {
      text += name + ": " + (r["ok"].get<bool>() ? "ok" : "FAIL") ;
      std::string d = r["detail"].get<std::string>();
      if (!d.empty()) text += " (" + d + ")";
      text += "\n";
    }
  }
  *out = dup_string(text);
  return ok ? SAX_OK : SAX_ERR;
}

void sax_string_free(char* s) { delete[] s; }

}  // extern "C"
