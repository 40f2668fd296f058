#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <map>
#include <set>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "saxcore/modes.hpp"

using sax::Mode;
using sax::ModeProps;
using sax::ModeTheory;

TEST_CASE("declare rejects duplicates") {
  ModeTheory mt;
  CHECK(mt.declare("m", {true, false, false}));
  CHECK_FALSE(mt.declare("m", {false, false, false}));
  CHECK(mt.declared("m"));
  CHECK_FALSE(mt.declared("k"));
}

TEST_CASE("property accessors reflect the declaration") {
  ModeTheory mt;
  mt.declare("a", {true, false, true});
  mt.declare("b", {true, true, false});
  mt.close();
  CHECK(mt.allows_weaken("a"));
  CHECK_FALSE(mt.allows_contract("a"));
  CHECK(mt.seq_only("a"));
  CHECK(mt.allows_contract("b"));
  CHECK_FALSE(mt.seq_only("b"));
}

TEST_CASE("closure is reflexive and transitive") {
  ModeTheory mt;
  mt.declare("a", {});
  mt.declare("b", {});
  mt.declare("c", {});
  mt.order("a", "b");  // b >= a
  mt.order("b", "c");  // c >= b
  mt.close();
  for (const char* m : {"a", "b", "c"}) CHECK(mt.geq(m, m));
  CHECK(mt.geq("b", "a"));
  CHECK(mt.geq("c", "b"));
  CHECK(mt.geq("c", "a"));
  CHECK_FALSE(mt.geq("a", "b"));
  CHECK_FALSE(mt.geq("a", "c"));
}

namespace {

// Brute-force oracle: closes the declared order with Floyd-Warshall and
// flags any pair m >= k whose property set loses weakening or contraction.
bool monotone_oracle(const std::vector<ModeProps>& props,
                     const std::vector<std::pair<int, int>>& edges) {
  const int n = static_cast<int>(props.size());
  std::vector<std::vector<bool>> ge(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; i++) ge[i][i] = true;
  for (auto [below, above] : edges) ge[above][below] = true;
  for (int k = 0; k < n; k++)
    for (int i = 0; i < n; i++)
      for (int j = 0; j < n; j++)
        if (ge[i][k] && ge[k][j]) ge[i][j] = true;
  for (int m = 0; m < n; m++)
    for (int k = 0; k < n; k++)
      if (ge[m][k]) {
        if (props[k].weaken && !props[m].weaken) return false;
        if (props[k].contract && !props[m].contract) return false;
      }
  return true;
}

}  // namespace

TEST_CASE("sigma monotonicity agrees with a brute-force oracle") {
  sax::Rng rng{20260823};
  int violations = 0;
  for (int trial = 0; trial < 500; trial++) {
    const int n = 2 + static_cast<int>(rng.below(3));
    ModeTheory mt;
    std::vector<ModeProps> props;
    for (int i = 0; i < n; i++) {
      ModeProps p;
      p.weaken = rng.below(2) == 1;
      p.contract = rng.below(2) == 1;
      props.push_back(p);
      mt.declare("m" + std::to_string(i), p);
    }
    std::vector<std::pair<int, int>> edges;
    const int ne = static_cast<int>(rng.below(4));
    for (int e = 0; e < ne; e++) {
      int below = static_cast<int>(rng.below(n));
      int above = static_cast<int>(rng.below(n));
      if (below == above) continue;
      edges.emplace_back(below, above);
      mt.order("m" + std::to_string(below), "m" + std::to_string(above));
    }
    mt.close();
    bool ok = mt.check().empty();
    bool expect = monotone_oracle(props, edges);
    CHECK(ok == expect);
    if (!expect) violations++;
  }
  // The random trials must exercise both outcomes.
  CHECK(violations > 20);
  CHECK(violations < 480);
}

TEST_CASE("monotone orders pass and inverted orders fail") {
  ModeTheory a;
  a.declare("lin", {false, false, false});
  a.declare("unr", {true, true, false});
  a.order("lin", "unr");  // unr >= lin gains properties
  a.close();
  CHECK(a.check().empty());

  ModeTheory b;
  b.declare("lin", {false, false, false});
  b.declare("unr", {true, true, false});
  b.order("unr", "lin");  // lin >= unr loses properties
  b.close();
  auto ds = b.check();
  REQUIRE_FALSE(ds.empty());
  CHECK(ds[0].code == sax::code::SigmaNotMonotone);
}

TEST_CASE("mode declarations parse into the theory") {
  auto prog = th::load_text(
      "mode w aff\n"
      "mode c strict\n"
      "mode u unr seq\n"
      "order w < u\n"
      "order c < u\n");
  CHECK(prog.mt.allows_weaken("w"));
  CHECK_FALSE(prog.mt.allows_contract("w"));
  CHECK(prog.mt.allows_contract("c"));
  CHECK_FALSE(prog.mt.allows_weaken("c"));
  CHECK(prog.mt.seq_only("u"));
  CHECK(prog.mt.geq("u", "w"));
  CHECK(prog.mt.geq("u", "c"));
  CHECK_FALSE(prog.mt.geq("w", "c"));
}
