#include "saxcore/modes.hpp"

namespace sax {

bool ModeTheory::declare(const Mode& m, ModeProps props) {
  if (modes_.count(m)) return false;
  modes_[m] = props;
  closed_ = false;
  return true;
}

bool ModeTheory::order(const Mode& below, const Mode& above) {
  if (!declared(below) || !declared(above)) return false;
  declaredOrder_.emplace_back(below, above);
  closed_ = false;
  return true;
}

void ModeTheory::close() {
  geq_.clear();
  for (const auto& [m, _] : modes_) geq_.emplace(m, m);
  for (const auto& [below, above] : declaredOrder_) geq_.emplace(above, below);
  // Floyd-Warshall style closure; mode counts are tiny.
  bool changed = true;
  while (changed) {
    changed = false;
    std::set<std::pair<Mode, Mode>> next = geq_;
    for (const auto& [m, k] : geq_)
      for (const auto& [k2, j] : geq_)
        if (k == k2 && !next.count({m, j})) {
          next.emplace(m, j);
          changed = true;
        }
    geq_ = next;
  }
  closed_ = true;
}

bool ModeTheory::geq(const Mode& m, const Mode& k) const {
  return geq_.count({m, k}) != 0;
}

std::vector<Diag> ModeTheory::check() const {
  std::vector<Diag> out;
  for (const auto& [m, k] : geq_) {
    if (m == k) continue;
    const ModeProps& pm = modes_.at(m);
    const ModeProps& pk = modes_.at(k);
    if ((pk.weaken && !pm.weaken) || (pk.contract && !pm.contract)) {
      out.push_back({"", pm.span, code::SigmaNotMonotone,
                     "sigma(" + m + ") does not contain sigma(" + k +
                         ") although " + m + " >= " + k});
    }
  }
  return out;
}

}  // namespace sax
