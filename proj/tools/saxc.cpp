// Command line front end. Links only against the public C interface.
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "sax.h"

namespace {

int load_and_check(sax_env* env, const std::string& file) {
  int rc = sax_load_file(env, file.c_str());
  if (rc == SAX_OK) rc = sax_check(env);
  if (rc != SAX_OK) std::fputs(sax_diagnostics(env), stderr);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"toolchain for the shared-memory session process language"};
  app.require_subcommand(1);

  std::string file, entry = "main", policy = "fifo";
  std::uint64_t seed = 0, maxSteps = 1000000;
  bool jsonOut = false;

  auto add_common = [&](CLI::App* cmd, bool runOpts) {
    cmd->add_option("file", file, "source file")->required();
    if (runOpts) {
      cmd->add_option("--entry", entry, "entry process (default: main)");
      cmd->add_option("--policy", policy, "fifo|lifo|random");
      cmd->add_option("--seed", seed, "random scheduler seed");
      cmd->add_option("--max-steps", maxSteps, "step budget");
    }
  };

  CLI::App* cCheck = app.add_subcommand("check", "typecheck a program");
  add_common(cCheck, false);
  CLI::App* cExpand = app.add_subcommand("expand", "print the kernel program");
  add_common(cExpand, false);
  CLI::App* cRun = app.add_subcommand("run", "run an entry process");
  add_common(cRun, true);
  CLI::App* cTrace = app.add_subcommand("trace", "run and print every step");
  add_common(cTrace, true);
  CLI::App* cVerify = app.add_subcommand("verify", "check run-time metatheory");
  add_common(cVerify, true);
  cVerify->add_flag("--json", jsonOut, "machine-readable report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  sax_env* env = sax_env_new();
  int rc = load_and_check(env, file);
  if (rc != SAX_OK) {
    sax_env_free(env);
    return 1;
  }

  char* out = nullptr;
  if (cExpand->parsed()) {
    rc = sax_expand(env, &out);
  } else if (cRun->parsed() || cTrace->parsed()) {
    rc = sax_run(env, entry.c_str(), policy.c_str(), seed, maxSteps,
                 cTrace->parsed() ? 1 : 0, &out);
  } else if (cVerify->parsed()) {
    rc = sax_verify(env, entry.c_str(), maxSteps, jsonOut ? 1 : 0, &out);
  }
  if (out) {
    std::fputs(out, stdout);
    sax_string_free(out);
  }
  if (rc != SAX_OK) std::fputs(sax_diagnostics(env), stderr);
  sax_env_free(env);
  if (rc == SAX_USAGE) return 2;
  return rc == SAX_OK ? 0 : 1;
}
