#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"

using namespace sax;

namespace {

struct Expected {
  std::string file;
  std::string value;  // decoded root under any scheduler
};

// Every terminating corpus program with its decoded result.
const std::vector<Expected> kExpected = {
    {"bin_succ.sax", "b0(b0(b0(b1(e(<>)))))"},            // 6 + 2 = 8
    {"bin_succ_seq.sax", "b1(b1(b1(e(<>))))"},            // 6 + 1 = 7
    {"counter.sax", "b1(b1(e(<>)))"},                     // three increments
    {"counter_two_mode.sax", "out(shift(b1(b1(e(<>)))))"},
    {"functions.sax", "s(s(s(s(z(<>)))))"},               // twice successor of 2
    {"futures_mixed.sax", "s(s(z(<>)))"},
    {"futures_two_mode.sax", "ans(shift(s(s(s(s(s(z(<>))))))))"},  // 2 + 3
    {"lambda.sax", "lam(<cont>)"},
    {"lambda_cbn.sax", "s(s(z(<>)))"},
    {"lambda_cbv.sax", "s(s(s(s(z(<>)))))"},
    {"lambda_komega_cbn.sax", "lam(<cont>)"},
    {"mapreduce.sax", "s(s(s(s(s(s(z(<>)))))))"},         // 1 + 2 + 3
    {"mapreduce_fj.sax", "s(s(s(s(s(s(z(<>)))))))"},
    {"mapreduce_fut.sax", "s(s(s(s(s(s(z(<>)))))))"},
    {"typed_futures.sax", "s(s(s(s(s(z(<>))))))"},        // 2 + 3
};

Program corpus_kernel(const std::string& name) {
  ParseResult pr = parse_file(th::corpus_path(name));
  REQUIRE_MESSAGE(pr.ok(), th::render(pr.diags));
  return th::kernel_of(pr.prog);
}

}  // namespace

TEST_CASE("every corpus program runs to its documented value") {
  for (const auto& e : kExpected) {
    CAPTURE(e.file);
    Program k = corpus_kernel(e.file);
    for (auto pol : {Policy::Fifo, Policy::Lifo}) {
      auto ran = th::run_prog(k, "main", pol);
      REQUIRE(ran.rr.status == RunStatus::Done);
      CHECK(ran.value == e.value);
    }
    auto ran = th::run_prog(k, "main", Policy::Random, 7);
    REQUIRE(ran.rr.status == RunStatus::Done);
    CHECK(ran.value == e.value);
  }
}

TEST_CASE("the eager K-Omega program never finishes") {
  Program k = corpus_kernel("lambda_komega_cbv.sax");
  for (auto pol : {Policy::Fifo, Policy::Lifo}) {
    auto ran = th::run_prog(k, "main", pol, 0, 20000);
    CHECK(ran.rr.status == RunStatus::StepLimit);
  }
}

TEST_CASE("every mutant is rejected") {
  for (const char* name :
       {"arity_mismatch.sax", "linear_reused.sax", "linear_unused.sax",
        "missing_branch.sax", "missing_definition.sax",
        "mode_side_condition.sax", "noncontractive.sax",
        "seq_only_violation.sax", "shift_mode_violation.sax",
        "sigma_not_monotone.sax", "unknown_label.sax",
        "unknown_type_var.sax"}) {
    CAPTURE(name);
    auto ds = th::reject_text(th::slurp(th::corpus_path(
        std::string("mutants/") + name)));
    CHECK_FALSE(ds.empty());
  }
}

TEST_CASE("the succ definition satisfies the integer oracle") {
  std::string base = th::slurp(th::corpus_path("bin_succ.sax"));
  for (std::uint64_t n : {0ULL, 1ULL, 7ULL, 8ULL, 1023ULL, 40000ULL}) {
    std::string text = base +
                       "\ndecl input : bin\ndef x <- input = x." +
                       th::bin_literal(n) +
                       "\ndecl drive : bin\ndef y <- drive = "
                       "x <- input ; y <- succ <- x\n";
    Program k = th::pipeline(text);
    auto ran = th::run_prog(k, "drive");
    REQUIRE(ran.rr.status == RunStatus::Done);
    CHECK(th::bin_value(ran.value) == static_cast<long>(n + 1));
  }
}

TEST_CASE("the tree sums equal a direct fold") {
  // sample is 1 + 2 + 3 in all three variants.
  for (const char* name :
       {"mapreduce.sax", "mapreduce_fut.sax", "mapreduce_fj.sax"}) {
    CAPTURE(name);
    Program k = corpus_kernel(name);
    auto ran = th::run_prog(k, "main");
    REQUIRE(ran.rr.status == RunStatus::Done);
    CHECK(th::nat_value(ran.value) == 6);
  }
}
