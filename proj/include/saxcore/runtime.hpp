#ifndef SAXCORE_RUNTIME_HPP
#define SAXCORE_RUNTIME_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "saxcore/ast.hpp"
#include "saxcore/diag.hpp"

namespace sax {

// Addresses are numeric; inside process terms and stored values they are
// encoded as the variable "#<id>", which no surface identifier can clash
// with ('#' is not an identifier character).
using Addr = std::uint64_t;

std::string addr_name(Addr a);
bool is_addr_name(const std::string& v);
Addr addr_of_name(const std::string& v);

enum class ObjK { Thread, Empty, FilledVal, FilledCont };

struct SemObj {
  ObjK k = ObjK::Empty;
  Addr addr = 0;          // destination (threads) or cell address
  ProcP proc;             // Thread
  VSeqP val;              // FilledVal
  ContP cont;             // FilledCont
  bool persistent = false;
  std::uint64_t seq = 0;  // creation stamp, used by the fifo/lifo policies
};

// One multiset rewriting step, as recorded in traces.
struct StepRec {
  std::string rule;             // cut|id|call|posR|posL|negR|negL|atom-val|...
  Addr actor = 0;               // destination of the thread that stepped
  std::vector<Addr> consumed;   // objects removed from the configuration
  std::vector<Addr> produced;   // addresses newly allocated
};

enum class RunStatus { Done, StepLimit, Stuck };

enum class Policy { Fifo, Lifo, Random };

// Deterministic 64-bit generator (splitmix64). The seed fully determines
// the random scheduling policy.
struct Rng {
  std::uint64_t state = 0;
  std::uint64_t next();
  std::uint64_t below(std::uint64_t n);  // uniform in [0, n)
};

struct Configuration {
  const Program* prog = nullptr;  // kernel program, for calls and types

  std::map<Addr, SemObj> cells;    // Empty / FilledVal / FilledCont
  std::map<Addr, SemObj> threads;  // keyed by destination address
  std::map<Addr, TypeP> addrType;  // every allocated address
  std::map<Addr, Mode> addrMode;
  std::vector<Addr> roots;  // externally offered addresses
  Addr nextAddr = 1;
  std::uint64_t nextSeq = 1;

  Addr alloc(const TypeP& type);

  // Creates the root cell and a thread calling a nullary process.
  // Returns the root address; reports UnknownProc / ArityMismatch.
  std::optional<Addr> spawn_entry(const std::string& procName,
                                  std::vector<Diag>& diags);

  // A thread is ready when every cell its next action reads is filled.
  bool ready(const SemObj& th) const;
  std::vector<Addr> enabled() const;  // ready thread destinations, ascending

  // Applies one rewriting step for the given ready thread.
  StepRec step(Addr threadDest);
};

struct RunResult {
  RunStatus status = RunStatus::Done;
  std::uint64_t steps = 0;
  std::vector<StepRec> trace;
};

RunResult run(Configuration& cfg, Policy policy, std::uint64_t seed,
              std::uint64_t maxSteps,
              const std::function<void(const Configuration&, const StepRec&)>&
                  onStep = nullptr);

// Renders the value reachable from an address: labels applied in sequence,
// pairs, units, shifts; "<cont>" for continuation cells and "?" for cells
// still empty.
std::string decode(const Configuration& cfg, Addr root);

std::string render_trace(const std::vector<StepRec>& trace,
                         const Configuration& cfg);

}  // namespace sax

#endif
