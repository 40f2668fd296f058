#ifndef SAXCORE_TYPEEQ_HPP
#define SAXCORE_TYPEEQ_HPP

#include "saxcore/ast.hpp"

namespace sax {

// Equirecursive equality on kernel types: unfold type variables silently,
// match constructors, modes and label sets, and treat revisited pairs as
// equal. Pre: both types validated against sig/mt.
bool types_equal(const Signature& sig, const TypeP& a, const TypeP& b);

// One-step unfolding of a type variable to its defining body; identity on
// non-variables. Returns nullptr (and sets *err) on an undefined variable.
TypeP unfold(const Signature& sig, const TypeP& a, std::string* err = nullptr);

// Unfolds variables until a structural constructor appears. Terminates on
// contractive signatures.
TypeP head_type(const Signature& sig, const TypeP& a);

}  // namespace sax

#endif
