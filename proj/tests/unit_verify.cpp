#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <map>
#include <set>
#include <string>

#include "doctest.h"
#include "helpers.hpp"

using namespace sax;

namespace {

Program corpus_kernel(const std::string& name) {
  ParseResult pr = parse_file(th::corpus_path(name));
  REQUIRE_MESSAGE(pr.ok(), th::render(pr.diags));
  return th::kernel_of(pr.prog);
}

// Structural sanity of an equivalence witness: a bijection on reachable
// addresses that maps roots to roots and preserves object kind, type
// shape and mode.
void check_witness(const Configuration& a, const Configuration& b,
                   const std::map<Addr, Addr>& w) {
  std::set<Addr> image;
  for (const auto& [fa, fb] : w) {
    CHECK(image.insert(fb).second);  // injective
    REQUIRE(a.cells.count(fa) == 1);
    REQUIRE(b.cells.count(fb) == 1);
    CHECK(a.cells.at(fa).k == b.cells.at(fb).k);
    CHECK(a.cells.at(fa).persistent == b.cells.at(fb).persistent);
    CHECK(a.addrMode.at(fa) == b.addrMode.at(fb));
  }
  REQUIRE(a.roots.size() == b.roots.size());
  for (std::size_t i = 0; i < a.roots.size(); i++)
    CHECK(w.at(a.roots[i]) == b.roots[i]);
}

}  // namespace

TEST_CASE("canonical forms are identical across schedulers") {
  for (const char* name : {"bin_succ.sax", "mapreduce.sax", "mapreduce_fj.sax",
                           "typed_futures.sax", "counter.sax"}) {
    CAPTURE(name);
    Program k = corpus_kernel(name);
    auto fifo = th::run_prog(k, "main", Policy::Fifo);
    auto lifo = th::run_prog(k, "main", Policy::Lifo);
    auto rnd = th::run_prog(k, "main", Policy::Random, 99);
    REQUIRE(fifo.rr.status == RunStatus::Done);
    std::string c = canonical_form(fifo.cfg);
    CHECK(canonical_form(lifo.cfg) == c);
    CHECK(canonical_form(rnd.cfg) == c);
    CHECK_FALSE(c.empty());
  }
}

TEST_CASE("equivalent configurations yield a structural witness") {
  Program k = corpus_kernel("mapreduce.sax");
  auto a = th::run_prog(k, "main", Policy::Fifo);
  auto b = th::run_prog(k, "main", Policy::Lifo);
  auto w = config_equiv(a.cfg, b.cfg);
  REQUIRE(w.has_value());
  check_witness(a.cfg, b.cfg, *w);
}

TEST_CASE("configurations with different contents are distinguished") {
  Program k = th::pipeline(
      "mode m lin\n"
      "type nat @ m = +{z: 1, s: nat}\n"
      "decl one : nat\n"
      "def x <- one = x.s(z(<>))\n"
      "decl two : nat\n"
      "def x <- two = x.s(s(z(<>)))\n");
  auto a = th::run_prog(k, "one");
  auto b = th::run_prog(k, "two");
  CHECK_FALSE(config_equiv(a.cfg, b.cfg).has_value());
  CHECK(canonical_form(a.cfg) != canonical_form(b.cfg));
  CHECK(config_equiv(a.cfg, a.cfg).has_value());
}

TEST_CASE("preservation holds along every corpus trace") {
  for (const char* name : {"bin_succ.sax", "bin_succ_seq.sax", "counter.sax",
                           "mapreduce.sax", "mapreduce_fut.sax",
                           "futures_mixed.sax", "lambda.sax"}) {
    CAPTURE(name);
    Program k = corpus_kernel(name);
    auto ran = th::run_prog(k, "main");
    REQUIRE(ran.rr.status == RunStatus::Done);
    MetaReport r = check_preservation(k, "main", ran.rr.trace);
    CHECK_MESSAGE(r.ok, r.detail);
    CHECK(r.checkedSteps == ran.rr.trace.size());
  }
}

TEST_CASE("progress accepts finished runs and flags unfinished ones") {
  Program done = corpus_kernel("bin_succ.sax");
  auto a = th::run_prog(done, "main");
  REQUIRE(a.rr.status == RunStatus::Done);
  CHECK(check_progress(a.cfg).ok);

  Program loop = corpus_kernel("lambda_komega_cbv.sax");
  auto b = th::run_prog(loop, "main", Policy::Fifo, 0, 200);
  REQUIRE(b.rr.status == RunStatus::StepLimit);
  CHECK_FALSE(check_progress(b.cfg).ok);
}

TEST_CASE("confluence holds across seeds on the corpus") {
  for (const char* name : {"bin_succ.sax", "mapreduce.sax", "mapreduce_fj.sax",
                           "futures_two_mode.sax", "lambda_komega_cbn.sax"}) {
    CAPTURE(name);
    Program k = corpus_kernel(name);
    MetaReport r = check_confluence(k, "main", 1000000, {1, 2, 3, 4, 5});
    CHECK_MESSAGE(r.ok, r.detail);
  }
}

TEST_CASE("one-step diamonds commute on small configurations") {
  for (const char* name : {"bin_succ.sax", "mapreduce.sax"}) {
    CAPTURE(name);
    Program k = corpus_kernel(name);
    MetaReport r = check_diamond(k, "main", 1000000, 8);
    CHECK_MESSAGE(r.ok, r.detail);
    CHECK(r.checkedSteps > 0);
  }
}

TEST_CASE("sequential programs keep a single active thread") {
  for (const char* name : {"bin_succ_seq.sax", "lambda_cbv.sax"}) {
    CAPTURE(name);
    Program k = corpus_kernel(name);
    auto ran = th::run_prog(k, "main");
    REQUIRE(ran.rr.status == RunStatus::Done);
    MetaReport r = check_seq_active(k, "main", ran.rr.trace);
    CHECK_MESSAGE(r.ok, r.detail);
  }
}

TEST_CASE("concurrent pipelines violate the single-thread property") {
  Program k = corpus_kernel("bin_succ.sax");
  auto ran = th::run_prog(k, "main");
  REQUIRE(ran.rr.status == RunStatus::Done);
  MetaReport r = check_seq_active(k, "main", ran.rr.trace);
  CHECK_FALSE(r.ok);
  CHECK_FALSE(r.detail.empty());
}
