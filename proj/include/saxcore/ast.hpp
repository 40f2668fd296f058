#ifndef SAXCORE_AST_HPP
#define SAXCORE_AST_HPP

#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "saxcore/diag.hpp"
#include "saxcore/modes.hpp"

namespace sax {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

struct Type;
using TypeP = std::shared_ptr<const Type>;

enum class TK {
  // kernel constructors
  Plus,    // internal choice +{l:A,...}
  With,    // external choice &{l:A,...}
  Tensor,  // A * B
  Lolli,   // A -o B
  One,     // 1
  Down,    // down[src] A   (body at src, node at mode, src >= mode)
  Up,      // up[src] A     (body at src, node at mode, mode >= src)
  Var,     // type variable
  // surface sugar constructors, lowered before kernel checking
  Arrow,  // A -> B      =  A -o B
  Par,    // A || B      =  A * B
  Monad,  // {A}         =  up[mode(A)] A at the enclosing mode
  AndT,   // A /\ B      =  (down[mode(A)] A) * B
  ImpT,   // A ==> B     =  (down[mode(A)] A) -o B
  FutT,   // fut A       =  down[m] down[m] A at m = mode(A)
};

struct Type {
  TK k;
  Mode mode;  // mode of this node
  Mode src;   // Down/Up/Monad/AndT/ImpT: mode of the shifted body
  std::vector<std::pair<std::string, TypeP>> branches;  // Plus/With
  TypeP a, b;  // binary: a,b; unary (Down/Up/Monad/FutT): a
  std::string var;
  Span span;
};

TypeP mk_plus(Mode m, std::vector<std::pair<std::string, TypeP>> bs);
TypeP mk_with(Mode m, std::vector<std::pair<std::string, TypeP>> bs);
TypeP mk_tensor(Mode m, TypeP a, TypeP b);
TypeP mk_lolli(Mode m, TypeP a, TypeP b);
TypeP mk_one(Mode m);
TypeP mk_down(Mode src, Mode tgt, TypeP body);
TypeP mk_up(Mode src, Mode tgt, TypeP body);
TypeP mk_tvar(Mode m, const std::string& name);

bool type_is_kernel(const TypeP& t);
// true for +,*,1,down (written by the provider); false for &,-o,up.
// Pre: kernel constructor, not Var.
bool type_positive(const TypeP& t);
std::string print_type(const TypeP& t, const Mode& ambient);

// ---------------------------------------------------------------------------
// Value sequences (§3.2). A flat sequence doubles as a kernel Value.
// ---------------------------------------------------------------------------

struct VSeq;
using VSeqP = std::shared_ptr<const VSeq>;

enum class VK { Var, Label, Pair, Unit, Shift };

struct VSeq {
  VK k;
  std::string var;  // Var leaf; Pair: first component variable
  std::string lab;  // Label
  VSeqP sub;        // Label/Pair/Shift payload
  Span span;
};

VSeqP mk_vvar(const std::string& x);
VSeqP mk_vlabel(const std::string& l, VSeqP sub);
VSeqP mk_vpair(const std::string& x, VSeqP sub);
VSeqP mk_vunit();
VSeqP mk_vshift(VSeqP sub);

// A kernel value: label/pair/shift payloads are plain variables.
bool vseq_is_kernel(const VSeqP& v);
void vseq_vars(const VSeqP& v, std::vector<std::string>& out);

// ---------------------------------------------------------------------------
// Patterns and continuations. A kernel continuation has Var patterns only.
// ---------------------------------------------------------------------------

struct Pat;
using PatP = std::shared_ptr<const Pat>;

struct Pat {
  VK k;             // same shapes as value sequences
  std::string var;  // Var leaf; Pair: first bound variable
  std::string lab;
  PatP sub;
  Span span;
};

PatP mk_pvar(const std::string& x);
PatP mk_plabel(const std::string& l, PatP sub);
PatP mk_ppair(const std::string& x, PatP sub);
PatP mk_punit();
PatP mk_pshift(PatP sub);

struct Process;
using ProcP = std::shared_ptr<const Process>;

enum class CK { Branches, PairMatch, UnitMatch, ShiftMatch };

struct CBranch {
  std::string lab;
  PatP pat;  // kernel: Var
  ProcP body;
  Span span;
};

struct Cont {
  CK k;
  std::vector<CBranch> branches;  // Branches
  std::string v1;                 // PairMatch: first bound variable
  PatP pat;                       // PairMatch second / ShiftMatch payload
  ProcP body;                     // PairMatch/UnitMatch/ShiftMatch
  Span span;
};
using ContP = std::shared_ptr<const Cont>;

// ---------------------------------------------------------------------------
// Processes (kernel + sugar)
// ---------------------------------------------------------------------------

enum class PK {
  // kernel
  Cut,       // x <- P ; Q   (annot may be absent before elaboration)
  Id,        // x <- y
  Write,     // x.V          (kernel iff vseq is kernel)
  Case,      // case x K     (kernel iff patterns flat)
  Call,      // x <- p <- y1 ... yn
  AtomVal,   // x'.shift(x.V)
  AtomCont,  // x'.shift(case x K)
  AtomId,    // x'.shift(x <- y)
  // sugar
  ShortId,    // x <- y ; Q
  ShortCall,  // x <- p <- ys ; Q
  SeqCut,     // x <= P ; Q
  CbnCut,     // x <~ P ; Q
  FutCut,     // x <- future P ; Q   (untyped future: exempt concurrent cut)
  LambdaW,    // z.(fn x => P)
  Apply,      // y <- (P : T)(Q)
  ParPairW,   // z.<P | Q>
  MonadW,     // d.{P}
  MonadBind,  // {c} <- Q
  FutureW,    // x.future(P)         (typed future, Appendix A)
  Touch,      // touch x (<z> => Q)
};

// How a cut came about; seqOnly modes admit only non-Plain cuts.
enum class CutOrigin {
  Plain,      // user-written concurrent cut (includes §3.2 shorthands)
  SeqMark,    // produced by the sequential/CBN cut expansions
  Exempt,     // produced by a blessed sugar package (§§5-8, App. A)
};

struct Process {
  PK k;
  Span span;

  // Cut-like (Cut/SeqCut/CbnCut/FutCut/ShortId/ShortCall/Apply):
  std::string var;      // bound destination variable
  TypeP annot;          // optional ascription; elaboration fills kernel cuts
  Mode varMode;         // filled by the elaborator for kernel cuts
  ProcP left, right;    // premises / continuation
  CutOrigin origin = CutOrigin::Plain;

  std::string subject;            // Id src, Write/Case subject, Call dest,
                                  // Atom* outer, LambdaW/MonadW/FutureW subject
  std::string inner;              // Atom* inner, LambdaW bound var, Touch bound var
  VSeqP val;                      // Write / AtomVal
  ContP cont;                     // Case / AtomCont
  std::string callee;             // Call / ShortCall
  std::vector<std::string> args;  // Call / ShortCall
};

ProcP mk_cut(const std::string& x, TypeP annot, ProcP p, ProcP q, CutOrigin o,
             const Mode& varMode = "");
ProcP mk_id(const std::string& dest, const std::string& src);
ProcP mk_write(const std::string& subject, VSeqP v);
ProcP mk_case(const std::string& subject, ContP k);
ProcP mk_call(const std::string& dest, const std::string& callee,
              std::vector<std::string> args);
ProcP mk_atom_val(const std::string& outer, const std::string& inner, VSeqP v);
ProcP mk_atom_cont(const std::string& outer, const std::string& inner, ContP k);
ProcP mk_atom_id(const std::string& outer, const std::string& inner,
                 const std::string& src);

ContP mk_branches(std::vector<CBranch> bs);
ContP mk_pair_match(const std::string& v1, PatP p2, ProcP body);
ContP mk_unit_match(ProcP body);
ContP mk_shift_match(PatP p, ProcP body);

// Kernel predicate: no sugar node kinds, flat values and patterns,
// every Cut annotated with its type and mode.
bool process_is_kernel(const ProcP& p);

// Free variables: everything read or written and not bound within.
std::set<std::string> free_vars(const ProcP& p);

// Capture-avoiding substitution of variables (or addresses encoded as
// variables) for free variables. Total on well-formed input.
ProcP substitute(const ProcP& p, const std::map<std::string, std::string>& m);

std::string print_process(const ProcP& p, int indent = 0);

// ---------------------------------------------------------------------------
// Signatures and programs
// ---------------------------------------------------------------------------

struct TypeDef {
  std::string name;
  Mode mode;
  TypeP body;
  Span span;
};

struct ProcDecl {
  std::string name;
  std::vector<std::pair<std::string, TypeP>> args;
  TypeP result;
  Span span;
};

struct ProcDef {
  std::string name;
  std::vector<std::string> argVars;
  std::string resVar;
  ProcP body;
  Span span;
};

struct Signature {
  std::map<std::string, TypeDef> typeDefs;
  std::map<std::string, ProcDecl> procDecls;
  std::map<std::string, ProcDef> procDefs;
  std::vector<std::string> typeOrder;  // declaration order, for printing
  std::vector<std::string> procOrder;
};

struct Program {
  ModeTheory mt;
  Signature sig;
  std::string file;  // primary file, for diagnostics
};

// Contractiveness, shift side conditions, mode coherence of every type,
// decl/def pairing, duplicate labels. Does not typecheck bodies.
std::vector<Diag> validate_signature(const Signature& sig, const ModeTheory& mt,
                                     const std::string& file);

std::string print_program(const Program& p);

}  // namespace sax

#endif
