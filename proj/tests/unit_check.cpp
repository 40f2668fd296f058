#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"

using namespace sax;

namespace {

// Every mutant file carries its expected diagnostic code in a comment.
const std::vector<std::pair<std::string, std::string>> kMutants = {
    {"arity_mismatch.sax", code::ArityMismatch},
    {"linear_reused.sax", code::LinearReused},
    {"linear_unused.sax", code::LinearUnused},
    {"missing_branch.sax", code::UnknownLabel},
    {"missing_definition.sax", code::MissingDefinition},
    {"mode_side_condition.sax", code::ModeSideCondition},
    {"noncontractive.sax", code::NonContractive},
    {"seq_only_violation.sax", code::SeqOnlyViolation},
    {"shift_mode_violation.sax", code::ShiftModeViolation},
    {"sigma_not_monotone.sax", code::SigmaNotMonotone},
    {"unknown_label.sax", code::UnknownLabel},
    {"unknown_type_var.sax", code::UnknownTypeVar},
};

std::string nat_prog(const std::string& mode, const std::string& defs) {
  return "mode m " + mode + "\ntype nat @ m = +{z: 1, s: nat}\n" + defs;
}

}  // namespace

TEST_CASE("each mutant fails with its documented code") {
  for (const auto& [name, expect] : kMutants) {
    CAPTURE(name);
    auto ds = th::reject_text(th::slurp(th::corpus_path("mutants/" + name)));
    REQUIRE_FALSE(ds.empty());
    CHECK_MESSAGE(th::has_code(ds, expect), th::render(ds));
    CHECK(ds[0].span.line > 0);
  }
}

TEST_CASE("diagnostics are deterministic across repeated checks") {
  for (const auto& [name, expect] : kMutants) {
    std::string text = th::slurp(th::corpus_path("mutants/" + name));
    CHECK(th::render(th::reject_text(text)) ==
          th::render(th::reject_text(text)));
  }
}

TEST_CASE("dropping an argument needs weakening") {
  std::string defs =
      "decl drop (a : nat) : nat\n"
      "def c <- drop <- a = c.z(<>)\n";
  CHECK(th::reject_text(nat_prog("aff", defs)).empty());
  CHECK(th::reject_text(nat_prog("unr", defs)).empty());
  CHECK(th::has_code(th::reject_text(nat_prog("lin", defs)),
                     code::LinearUnused));
  CHECK(th::has_code(th::reject_text(nat_prog("strict", defs)),
                     code::LinearUnused));
}

TEST_CASE("reusing an argument needs contraction") {
  std::string defs =
      "decl add (a : nat) (b : nat) : nat\n"
      "def c <- add <- a b =\n"
      "  case a ( z(u)  => case u (<> => c <- b)\n"
      "         | s(p) => c' <- add <- p b ; c.s(c') )\n"
      "decl dbl (a : nat) : nat\n"
      "def c <- dbl <- a = c <- add <- a a\n";
  CHECK(th::reject_text(nat_prog("strict", defs)).empty());
  CHECK(th::reject_text(nat_prog("unr", defs)).empty());
  CHECK(th::has_code(th::reject_text(nat_prog("lin", defs)),
                     code::LinearReused));
  CHECK(th::has_code(th::reject_text(nat_prog("aff", defs)),
                     code::LinearReused));
}

TEST_CASE("a leftover channel at a call site is reported") {
  auto ds = th::reject_text(nat_prog(
      "lin",
      "decl idn (a : nat) : nat\n"
      "def c <- idn <- a = c <- a\n"
      "decl bad (a : nat) (b : nat) : nat\n"
      "def c <- bad <- a b = c <- idn <- a\n"));
  CHECK(th::has_code(ds, code::LinearResidue));
}

TEST_CASE("an unknown channel is reported") {
  auto ds = th::reject_text(nat_prog(
      "lin",
      "decl p : nat\n"
      "def c <- p = c <- nowhere\n"));
  REQUIRE_FALSE(ds.empty());
  CHECK(th::has_code(ds, code::UnknownVar));
}

TEST_CASE("the identity must match types up to unfolding") {
  auto ds = th::reject_text(
      "mode m lin\n"
      "type nat @ m = +{z: 1, s: nat}\n"
      "type nat2 @ m = +{z: 1, s: +{z: 1, s: nat2}}\n"
      "type other @ m = +{a: 1}\n"
      "decl conv (a : nat) : nat2\n"
      "def c <- conv <- a = c <- a\n");
  CHECK(ds.empty());
  auto bad = th::reject_text(
      "mode m lin\n"
      "type nat @ m = +{z: 1, s: nat}\n"
      "type other @ m = +{a: 1}\n"
      "decl conv (a : nat) : other\n"
      "def c <- conv <- a = c <- a\n");
  CHECK(th::has_code(bad, code::TypeMismatch));
}

TEST_CASE("an argument below the destination mode is rejected") {
  std::string text =
      "mode lo lin\n"
      "mode hi lin\n"
      "order lo < hi\n"
      "type tlo @ lo = +{a: 1}\n"
      "type thi @ hi = +{a: 1}\n"
      "decl bad (x : tlo) : thi\n"
      "def c <- bad <- x = c.a(<>)\n";
  CHECK(th::has_code(th::reject_text(text), code::ModeSideCondition));
  // With weakening at the lower mode the context entry may be discarded.
  std::string ok =
      "mode lo aff\n"
      "mode hi aff\n"
      "order lo < hi\n"
      "type tlo @ lo = +{a: 1}\n"
      "type thi @ hi = +{a: 1}\n"
      "decl fine (x : tlo) : thi\n"
      "def c <- fine <- x = c.a(<>)\n";
  CHECK(th::reject_text(ok).empty());
}

TEST_CASE("final configurations of corpus runs typecheck") {
  for (const char* name : {"bin_succ.sax", "mapreduce.sax", "counter.sax",
                           "functions.sax", "typed_futures.sax"}) {
    CAPTURE(name);
    sax::ParseResult pr = sax::parse_file(th::corpus_path(name));
    REQUIRE(pr.ok());
    auto kernel = th::kernel_of(pr.prog);
    auto ran = th::run_prog(kernel, "main");
    REQUIRE(ran.rr.status == RunStatus::Done);
    ConfigCheck cc = check_configuration(ran.cfg);
    CHECK_MESSAGE(cc.ok, th::render(cc.diags));
    CHECK(cc.offered.count(ran.root) == 1);
  }
}

TEST_CASE("intermediate configurations typecheck as well") {
  sax::ParseResult pr = sax::parse_file(th::corpus_path("mapreduce.sax"));
  REQUIRE(pr.ok());
  auto kernel = th::kernel_of(pr.prog);
  int checked = 0;
  auto ran = th::run_prog(kernel, "main", Policy::Fifo, 0, 1000000,
                          [&](const Configuration& cfg, const StepRec&) {
                            if (checked < 40) {
                              ConfigCheck cc = check_configuration(cfg);
                              CHECK_MESSAGE(cc.ok, th::render(cc.diags));
                              checked++;
                            }
                          });
  CHECK(ran.rr.status == RunStatus::Done);
  CHECK(checked == 40);
}

TEST_CASE("a corrupted cell value fails configuration typing") {
  sax::ParseResult pr = sax::parse_file(th::corpus_path("bin_succ.sax"));
  REQUIRE(pr.ok());
  auto kernel = th::kernel_of(pr.prog);
  auto ran = th::run_prog(kernel, "main");
  REQUIRE(ran.rr.status == RunStatus::Done);
  REQUIRE(check_configuration(ran.cfg).ok);
  // Overwrite the root's label with one the type does not offer.
  SemObj& root = ran.cfg.cells.at(ran.root);
  REQUIRE(root.k == ObjK::FilledVal);
  REQUIRE(root.val->k == VK::Label);
  auto patched = mk_vlabel("nonsense", root.val->sub);
  root.val = patched;
  CHECK_FALSE(check_configuration(ran.cfg).ok);
}
