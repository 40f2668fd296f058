#ifndef SAXCORE_ELABORATE_HPP
#define SAXCORE_ELABORATE_HPP

#include <vector>

#include "saxcore/ast.hpp"
#include "saxcore/diag.hpp"

namespace sax {

// Rewrites surface sugar (shorthands, value sequences, nested patterns,
// sequential and call-by-name cuts, lambdas, fork-join pairs, the monadic
// forms and futures) into the kernel fragment. Every emitted cut carries
// its type and mode. Types are lowered to kernel constructors.
struct ElabResult {
  Program kernel;
  std::vector<Diag> diags;
  bool ok() const { return diags.empty(); }
};

ElabResult elaborate(const Program& surface);

// Lowers sugar type constructors to kernel ones; identity on kernel types.
TypeP lower_type(const TypeP& t);

}  // namespace sax

#endif
