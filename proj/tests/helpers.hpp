// Shared helpers for the test binaries: loading programs through the
// pipeline, running entries, building and decoding number literals.
#ifndef TESTS_HELPERS_HPP
#define TESTS_HELPERS_HPP

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "saxcore/ast.hpp"
#include "saxcore/check.hpp"
#include "saxcore/elaborate.hpp"
#include "saxcore/parser.hpp"
#include "saxcore/runtime.hpp"
#include "saxcore/typeeq.hpp"
#include "saxcore/verify.hpp"

namespace th {

inline std::string source_dir() { return SAX_SOURCE_DIR; }

inline std::string corpus_path(const std::string& name) {
  return source_dir() + "/corpus/" + name;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string render(const std::vector<sax::Diag>& ds) {
  return sax::render_diags(ds);
}

// Parse + signature validation. Throws on any diagnostic.
inline sax::Program load_text(const std::string& text,
                              const std::string& name = "test.sax") {
  sax::ParseResult pr = sax::parse_string(text, name);
  if (!pr.ok()) throw std::runtime_error("parse: " + render(pr.diags));
  auto vd = sax::validate_signature(pr.prog.sig, pr.prog.mt, pr.prog.file);
  auto md = pr.prog.mt.check();
  vd.insert(vd.end(), md.begin(), md.end());
  if (!vd.empty()) throw std::runtime_error("validate: " + render(vd));
  return pr.prog;
}

// Elaborate + kernel typecheck. Throws on any diagnostic.
inline sax::Program kernel_of(const sax::Program& surface) {
  sax::ElabResult er = sax::elaborate(surface);
  if (!er.ok()) throw std::runtime_error("elaborate: " + render(er.diags));
  auto cd = sax::check_program(er.kernel);
  if (!cd.empty()) throw std::runtime_error("check: " + render(cd));
  return er.kernel;
}

inline sax::Program pipeline(const std::string& text,
                             const std::string& name = "test.sax") {
  return kernel_of(load_text(text, name));
}

// Runs the full pipeline and returns the diagnostics of the first stage
// that rejects the input; empty when the program is accepted.
inline std::vector<sax::Diag> reject_text(const std::string& text) {
  sax::ParseResult pr = sax::parse_string(text, "test.sax");
  if (!pr.ok()) return pr.diags;
  auto vd = sax::validate_signature(pr.prog.sig, pr.prog.mt, pr.prog.file);
  auto md = pr.prog.mt.check();
  vd.insert(vd.end(), md.begin(), md.end());
  if (!vd.empty()) return vd;
  sax::ElabResult er = sax::elaborate(pr.prog);
  if (!er.ok()) return er.diags;
  return sax::check_program(er.kernel);
}

inline bool has_code(const std::vector<sax::Diag>& ds, const std::string& c) {
  for (const auto& d : ds)
    if (d.code == c) return true;
  return false;
}

struct Ran {
  sax::Configuration cfg;
  sax::RunResult rr;
  sax::Addr root = 0;
  std::string value;  // decoded root, valid when status is Done
};

inline Ran run_prog(const sax::Program& kernel, const std::string& entry,
                    sax::Policy pol = sax::Policy::Fifo, std::uint64_t seed = 0,
                    std::uint64_t maxSteps = 1000000,
                    const std::function<void(const sax::Configuration&,
                                             const sax::StepRec&)>& onStep =
                        nullptr) {
  Ran out;
  out.cfg.prog = &kernel;
  std::vector<sax::Diag> diags;
  auto root = out.cfg.spawn_entry(entry, diags);
  if (!root) throw std::runtime_error("spawn: " + render(diags));
  out.root = *root;
  out.rr = sax::run(out.cfg, pol, seed, maxSteps, onStep);
  out.value = sax::decode(out.cfg, out.root);
  return out;
}

// ---------------------------------------------------------------------------
// Decoded-value helpers
// ---------------------------------------------------------------------------

// s(s(...z(<>)...)) -> count of s labels; -1 when the shape is different.
inline long nat_value(const std::string& s) {
  std::size_t i = 0;
  long n = 0;
  while (s.compare(i, 2, "s(") == 0) {
    n++;
    i += 2;
  }
  if (s.compare(i, 5, "z(<>)") != 0) return -1;
  return n;
}

// Least-significant-bit-first binary: b0/b1 labels ending in e(<>).
inline long bin_value(const std::string& s) {
  std::size_t i = 0;
  long n = 0, bit = 1;
  while (true) {
    if (s.compare(i, 3, "b0(") == 0) {
      i += 3;
    } else if (s.compare(i, 3, "b1(") == 0) {
      n += bit;
      i += 3;
    } else {
      break;
    }
    bit <<= 1;
  }
  if (s.compare(i, 5, "e(<>)") != 0) return -1;
  return n;
}

// Nested value-sequence literal for the binary encoding, LSB first.
inline std::string bin_literal(std::uint64_t n) {
  std::string open, close;
  while (n > 0) {
    open += (n & 1) ? "b1(" : "b0(";
    close += ")";
    n >>= 1;
  }
  return open + "e(<>)" + close;
}

// Nested value-sequence literal for unary numbers.
inline std::string nat_literal(std::uint64_t n) {
  std::string open, close;
  for (std::uint64_t i = 0; i < n; i++) {
    open += "s(";
    close += ")";
  }
  return open + "z(<>)" + close;
}

// Emits a flat chain of sequential cuts building nat n into variable v.
// Valid at sequential-only modes; ctr provides globally fresh suffixes.
inline std::string seq_nat_chain(const std::string& v, std::uint64_t n,
                                 int& ctr, const std::string& natType,
                                 const std::string& mode) {
  std::ostringstream out;
  std::string u = "u" + std::to_string(ctr++);
  out << "  " << u << " : 1 @ " << mode << " <= (" << u << ".<>) ;\n";
  std::string prev = "q" + std::to_string(ctr++);
  out << "  " << prev << " : " << natType << " <= (" << prev << ".z(" << u
      << ")) ;\n";
  for (std::uint64_t i = 0; i < n; i++) {
    std::string next = "q" + std::to_string(ctr++);
    out << "  " << next << " : " << natType << " <= (" << next << ".s(" << prev
        << ")) ;\n";
    prev = next;
  }
  out << "  " << v << " : " << natType << " <= (" << v << " <- " << prev
      << ") ;\n";
  return out.str();
}

}  // namespace th

#endif
