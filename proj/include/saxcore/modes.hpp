#ifndef SAXCORE_MODES_HPP
#define SAXCORE_MODES_HPP

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "saxcore/diag.hpp"

namespace sax {

using Mode = std::string;

// Structural properties a mode may carry: weakening and contraction.
struct ModeProps {
  bool weaken = false;
  bool contract = false;
  bool seqOnly = false;  // cuts at this mode must be sequential (or exempt)
  Span span = {};        // declaration site, carried into diagnostics
};

// Declared modes with structural-property sets and a preorder.
// The preorder is closed eagerly at load time so geq() is a set lookup.
class ModeTheory {
 public:
  bool declare(const Mode& m, ModeProps props);       // false on duplicate
  bool order(const Mode& below, const Mode& above);   // declares below < above
  void close();                                       // reflexive-transitive closure

  bool declared(const Mode& m) const { return modes_.count(m) != 0; }
  const std::map<Mode, ModeProps>& modes() const { return modes_; }

  // true iff m >= k in the closure. Both modes must be declared.
  bool geq(const Mode& m, const Mode& k) const;

  bool allows_weaken(const Mode& m) const { return modes_.at(m).weaken; }
  bool allows_contract(const Mode& m) const { return modes_.at(m).contract; }
  bool seq_only(const Mode& m) const { return modes_.at(m).seqOnly; }

  // sigma-monotonicity check over every closed pair: m >= k requires
  // sigma(m) to contain sigma(k).
  std::vector<Diag> check() const;

  const std::vector<std::pair<Mode, Mode>>& declared_order() const {
    return declaredOrder_;
  }

 private:
  std::map<Mode, ModeProps> modes_;
  std::vector<std::pair<Mode, Mode>> declaredOrder_;  // (below, above)
  std::set<std::pair<Mode, Mode>> geq_;               // (m, k) with m >= k
  bool closed_ = false;
};

}  // namespace sax

#endif
