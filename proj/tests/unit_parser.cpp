#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"

namespace {

const std::vector<std::string> kCorpus = {
    "bin_succ.sax",       "bin_succ_seq.sax",      "counter.sax",
    "counter_two_mode.sax", "functions.sax",       "futures_mixed.sax",
    "futures_two_mode.sax", "lambda.sax",          "lambda_cbn.sax",
    "lambda_cbv.sax",     "lambda_komega_cbn.sax", "lambda_komega_cbv.sax",
    "mapreduce.sax",      "mapreduce_fj.sax",      "mapreduce_fut.sax",
    "typed_futures.sax"};

}  // namespace

TEST_CASE("printing a parsed program and reparsing it is stable") {
  for (const auto& name : kCorpus) {
    CAPTURE(name);
    sax::ParseResult a = sax::parse_file(th::corpus_path(name));
    REQUIRE_MESSAGE(a.ok(), th::render(a.diags));
    std::string p1 = sax::print_program(a.prog);
    sax::ParseResult b = sax::parse_string(p1, name);
    REQUIRE_MESSAGE(b.ok(), th::render(b.diags));
    CHECK(sax::print_program(b.prog) == p1);
  }
}

TEST_CASE("empty input parses to an empty program") {
  sax::ParseResult r = sax::parse_string("", "empty.sax");
  CHECK(r.ok());
  CHECK(r.prog.sig.procDefs.empty());
  CHECK(r.prog.sig.typeDefs.empty());
}

TEST_CASE("comments run to end of line") {
  auto prog = th::load_text(
      "% leading comment\n"
      "mode m lin % trailing comment\n"
      "type t @ m = 1 % another\n");
  CHECK(prog.sig.typeDefs.count("t") == 1);
}

TEST_CASE("parse errors carry a position and the ParseError code") {
  sax::ParseResult r = sax::parse_string(
      "mode m lin\n"
      "type t @ m = +{a: }\n",
      "bad.sax");
  REQUIRE_FALSE(r.ok());
  CHECK(r.diags[0].code == sax::code::ParseError);
  CHECK(r.diags[0].span.line == 2);
  CHECK(r.diags[0].span.col > 0);
}

TEST_CASE("a bad statement does not hide later items") {
  sax::ParseResult r = sax::parse_string(
      "mode m lin\n"
      "type t @ m = +{a: }\n"
      "type ok @ m = 1\n",
      "bad.sax");
  CHECK_FALSE(r.ok());
  CHECK(r.prog.sig.typeDefs.count("ok") == 1);
}

TEST_CASE("the three cut arrows parse to distinct forms") {
  auto prog = th::load_text(
      "mode m unr\n"
      "type t @ m = +{a: 1}\n"
      "decl p : t\n"
      "def x <- p = x.a(<>)\n"
      "decl q1 : t\n"
      "def x <- q1 = y <- p ; x <- y\n"
      "decl q2 : t\n"
      "def x <- q2 = y <= p ; x <- y\n"
      "decl q3 : t\n"
      "def x <- q3 = y <~ p ; x <- y\n");
  CHECK(prog.sig.procDefs.at("q1").body->k == sax::PK::ShortCall);
  CHECK(prog.sig.procDefs.at("q2").body->k == sax::PK::SeqCut);
  CHECK(prog.sig.procDefs.at("q3").body->k == sax::PK::CbnCut);
}

TEST_CASE("type operators bind as documented") {
  auto prog = th::load_text(
      "mode m lin\n"
      "type a @ m = 1\n"
      "type t1 @ m = a * a -o a\n"
      "type t2 @ m = a /\\ a\n"
      "type t3 @ m = a ==> a\n"
      "type t4 @ m = {a}\n"
      "type t5 @ m = fut a\n"
      "type t6 @ m = down [m] a\n"
      "type t7 @ m = up [m] a\n");
  const auto& sig = prog.sig;
  CHECK(sig.typeDefs.at("t1").body->k == sax::TK::Lolli);
  CHECK(sig.typeDefs.at("t1").body->a->k == sax::TK::Tensor);
  CHECK(sig.typeDefs.at("t2").body->k == sax::TK::AndT);
  CHECK(sig.typeDefs.at("t3").body->k == sax::TK::ImpT);
  CHECK(sig.typeDefs.at("t4").body->k == sax::TK::Monad);
  CHECK(sig.typeDefs.at("t5").body->k == sax::TK::FutT);
  CHECK(sig.typeDefs.at("t6").body->k == sax::TK::Down);
  CHECK(sig.typeDefs.at("t7").body->k == sax::TK::Up);
}

TEST_CASE("includes splice in the referenced file") {
  const std::string dir = "/tmp/sax_parser_test";
  std::remove((dir + "/lib.sax").c_str());
  std::remove((dir + "/main.sax").c_str());
  REQUIRE(std::system(("mkdir -p " + dir).c_str()) == 0);
  {
    std::ofstream lib(dir + "/lib.sax");
    lib << "mode m lin\ntype t @ m = +{a: 1}\n";
    std::ofstream mainf(dir + "/main.sax");
    mainf << "include \"lib.sax\"\ndecl p : t\ndef x <- p = x.a(<>)\n";
  }
  sax::ParseResult r = sax::parse_file(dir + "/main.sax");
  REQUIRE_MESSAGE(r.ok(), th::render(r.diags));
  CHECK(r.prog.sig.typeDefs.count("t") == 1);
  CHECK(r.prog.sig.procDefs.count("p") == 1);
}

TEST_CASE("duplicate names are reported") {
  sax::ParseResult r = sax::parse_string(
      "mode m lin\n"
      "type t @ m = 1\n"
      "type t @ m = 1\n",
      "dup.sax");
  bool dup = !r.ok() && th::has_code(r.diags, sax::code::DuplicateName);
  if (!dup) {
    auto vd = sax::validate_signature(r.prog.sig, r.prog.mt, r.prog.file);
    dup = th::has_code(vd, sax::code::DuplicateName);
  }
  CHECK(dup);
}

TEST_CASE("undeclared modes are reported") {
  auto ds = th::reject_text("type t @ nowhere = 1\n");
  REQUIRE_FALSE(ds.empty());
  CHECK(th::has_code(ds, sax::code::UnknownMode));
}
