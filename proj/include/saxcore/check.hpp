#ifndef SAXCORE_CHECK_HPP
#define SAXCORE_CHECK_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "saxcore/ast.hpp"
#include "saxcore/diag.hpp"
#include "saxcore/runtime.hpp"

namespace sax {

// Typing context entry for the substructural checker. Entries at modes
// without contraction are consumed by their single use; entries with
// contraction stay and track whether they were used on this path.
struct CtxEntry {
  TypeP type;
  bool consumed = false;
  bool used = false;
};
using Ctx = std::map<std::string, CtxEntry>;

// Checks one kernel process against a destination channel and type.
// Returns at most one diagnostic (the first failure).
std::vector<Diag> check_process(const Program& kernel, Ctx ctx, const ProcP& p,
                                const std::string& dest, const TypeP& destType);

// Checks every process definition of a kernel program against its
// declaration, including the mode presupposition on contexts.
std::vector<Diag> check_program(const Program& kernel);

// Configuration typing: orders objects so writers precede readers, checks
// each object in isolation, and accounts for ephemeral reads. On success
// returns the offered interface (addresses still available to the outside).
struct ConfigCheck {
  bool ok = false;
  std::vector<Diag> diags;
  std::map<Addr, TypeP> offered;  // Delta
};
ConfigCheck check_configuration(const Configuration& cfg);

}  // namespace sax

#endif
