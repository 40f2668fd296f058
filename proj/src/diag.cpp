#include "saxcore/diag.hpp"

#include <sstream>

namespace sax {

std::string Diag::render() const {
  std::ostringstream os;
  os << (file.empty() ? "<input>" : file) << ":" << span.line << ":" << span.col
     << ": " << code << ": " << msg;
  return os.str();
}

std::string render_diags(const std::vector<Diag>& ds) {
  std::ostringstream os;
  for (const auto& d : ds) os << d.render() << "\n";
  return os.str();
}

}  // namespace sax
