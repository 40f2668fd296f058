#ifndef SAXCORE_VERIFY_HPP
#define SAXCORE_VERIFY_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "saxcore/runtime.hpp"

namespace sax {

// Canonical serialization of a configuration up to address renaming:
// a deterministic traversal from the offered roots plus a sorted multiset
// of signatures for unreachable persistent garbage.
std::string canonical_form(const Configuration& cfg);

// Equivalence up to address renaming. On success returns a witness map
// from addresses of a to addresses of b (reachable part; unreachable
// objects are matched by signature).
std::optional<std::map<Addr, Addr>> config_equiv(const Configuration& a,
                                                 const Configuration& b);

struct MetaReport {
  bool ok = true;
  std::string detail;  // first failure, empty when ok
  std::uint64_t checkedSteps = 0;
};

// Replays a recorded run and re-checks the configuration after every step,
// requiring the offered interface never to shrink.
MetaReport check_preservation(const Program& kernel, const std::string& entry,
                              const std::vector<StepRec>& trace);

// A terminated run must leave no threads and every offered cell filled.
MetaReport check_progress(const Configuration& final);

// Runs the entry under pairs of seeds/policies and compares final
// configurations up to renaming.
MetaReport check_confluence(const Program& kernel, const std::string& entry,
                            std::uint64_t maxSteps,
                            const std::vector<std::uint64_t>& seeds);

// Exhaustive one-step diamond check from every configuration reached along
// a reference run whose object count stays within the bound.
MetaReport check_diamond(const Program& kernel, const std::string& entry,
                         std::uint64_t maxSteps, std::size_t maxObjects);

// Replays a run and requires at most one ready thread before every step.
MetaReport check_seq_active(const Program& kernel, const std::string& entry,
                            const std::vector<StepRec>& trace);

}  // namespace sax

#endif
