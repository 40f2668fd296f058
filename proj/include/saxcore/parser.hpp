#ifndef SAXCORE_PARSER_HPP
#define SAXCORE_PARSER_HPP

#include <string>
#include <vector>

#include "saxcore/ast.hpp"
#include "saxcore/diag.hpp"

namespace sax {

struct ParseResult {
  Program prog;
  std::vector<Diag> diags;
  bool ok() const { return diags.empty(); }
};

ParseResult parse_file(const std::string& path);
ParseResult parse_string(const std::string& text, const std::string& fileName);

}  // namespace sax

#endif
