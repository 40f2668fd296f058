// End-to-end smoke test of the saxc binary: exit codes and the shape of
// each subcommand's output. Arguments: path to saxc, source tree root.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string g_saxc, g_root;
int g_failures = 0;

struct Result {
  int exitCode = -1;
  std::string out;
};

Result run(const std::string& args) {
  std::string outFile = "/tmp/sax_cli_smoke.out";
  std::string cmd = g_saxc + " " + args + " >" + outFile + " 2>&1";
  int rc = std::system(cmd.c_str());
  Result r;
  r.exitCode = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  std::ifstream in(outFile);
  std::ostringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

void expect(bool cond, const std::string& what, const Result& r) {
  if (cond) return;
  g_failures++;
  std::fprintf(stderr, "FAIL: %s\n  exit=%d\n  output:\n%s\n", what.c_str(),
               r.exitCode, r.out.c_str());
}

std::string corpus(const std::string& n) { return g_root + "/corpus/" + n; }

bool contains(const std::string& h, const std::string& n) {
  return h.find(n) != std::string::npos;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: cli_smoke <saxc> <source-root>\n");
    return 2;
  }
  g_saxc = argv[1];
  g_root = argv[2];

  // check: clean program exits 0 silently; mutant exits 1 with its code.
  auto ok = run("check " + corpus("bin_succ.sax"));
  expect(ok.exitCode == 0, "check accepts a clean program", ok);
  auto bad = run("check " + corpus("mutants/linear_reused.sax"));
  expect(bad.exitCode == 1, "check rejects a mutant with exit 1", bad);
  expect(contains(bad.out, "LinearReused"), "mutant output names the code",
         bad);

  // usage errors exit 2.
  auto usage = run("check");
  expect(usage.exitCode == 2, "missing file is a usage error", usage);
  auto nosub = run("");
  expect(nosub.exitCode == 2, "missing subcommand is a usage error", nosub);
  auto missing = run("check /nonexistent.sax");
  expect(missing.exitCode == 1, "unreadable file is reported", missing);

  // expand prints a kernel program that mentions the declared processes.
  auto exp = run("expand " + corpus("bin_succ.sax"));
  expect(exp.exitCode == 0, "expand succeeds", exp);
  expect(contains(exp.out, "decl succ") && contains(exp.out, "def "),
         "expansion prints declarations and definitions", exp);

  // run prints status, step count and the decoded value.
  auto r = run("run " + corpus("bin_succ.sax"));
  expect(r.exitCode == 0, "run succeeds", r);
  expect(contains(r.out, "status: done") && contains(r.out, "steps: ") &&
             contains(r.out, "value: b0(b0(b0(b1(e(<>)))))"),
         "run reports status, steps and value", r);

  auto named = run("run " + corpus("bin_succ.sax") + " --entry six");
  expect(named.exitCode == 0 && contains(named.out, "value: b0(b1(b1(e(<>))))"),
         "run honors --entry", named);

  auto lim = run("run " + corpus("lambda_komega_cbv.sax") +
                 " --max-steps 1000");
  expect(lim.exitCode == 1 && contains(lim.out, "steplimit"),
         "exhausted budget is reported and fails", lim);

  for (const char* pol : {"fifo", "lifo", "random"}) {
    auto p = run("run " + corpus("mapreduce.sax") + " --policy " +
                 std::string(pol) + " --seed 3");
    expect(p.exitCode == 0 &&
               contains(p.out, "value: s(s(s(s(s(s(z(<>)))))))"),
           std::string("scheduler ") + pol + " computes the same value", p);
  }
  auto badpol = run("run " + corpus("bin_succ.sax") + " --policy bogus");
  expect(badpol.exitCode == 2, "unknown policy is a usage error", badpol);

  // trace prints one line per step before the summary.
  auto tr = run("trace " + corpus("bin_succ.sax"));
  expect(tr.exitCode == 0 && contains(tr.out, "cut") &&
             contains(tr.out, "status: done"),
         "trace lists the applied rules", tr);

  // verify prints one report line per property.
  auto v = run("verify " + corpus("bin_succ.sax"));
  expect(v.exitCode == 0 && contains(v.out, "preservation: ok") &&
             contains(v.out, "progress: ok") && contains(v.out, "confluence: ok"),
         "verify reports the run-time properties", v);

  auto vseq = run("verify " + corpus("bin_succ_seq.sax"));
  expect(vseq.exitCode == 0 && contains(vseq.out, "seq-active: ok"),
         "verify checks sequentiality on sequential programs", vseq);

  auto vj = run("verify " + corpus("bin_succ.sax") + " --json");
  expect(vj.exitCode == 0 && contains(vj.out, "\"ok\": true") &&
             contains(vj.out, "\"preservation\""),
         "verify --json emits a machine-readable report", vj);

  // An empty program is vacuously fine.
  {
    std::ofstream empty("/tmp/sax_cli_empty.sax");
    empty << "% nothing here\n";
  }
  auto e = run("check /tmp/sax_cli_empty.sax");
  expect(e.exitCode == 0, "an empty program typechecks", e);

  if (g_failures == 0) std::printf("cli_smoke: all checks passed\n");
  return g_failures == 0 ? 0 : 1;
}
