#include "saxcore/parser.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

namespace sax {

namespace {

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

enum class TkK { Ident, Keyword, String, Sym, End };

struct Token {
  TkK k;
  std::string text;
  std::string file;
  Span span;
};

const std::set<std::string> kKeywords = {
    "mode", "order",  "lin",   "aff",   "strict", "unr", "seq",
    "type", "decl",   "def",   "include", "case", "shift", "fn",
    "future", "touch", "down", "up",    "fut"};

struct ParseErr {
  Diag d;
};

[[noreturn]] void fail(const Token& t, const std::string& msg) {
  throw ParseErr{{t.file, t.span, code::ParseError, msg}};
}

std::vector<Token> lex(const std::string& text, const std::string& file,
                       std::vector<Diag>& diags) {
  std::vector<Token> out;
  size_t i = 0;
  int line = 1, col = 1;
  auto adv = [&](size_t n) {
    for (size_t j = 0; j < n; j++) {
      if (text[i + j] == '\n') {
        line++;
        col = 1;
      } else {
        col++;
      }
    }
    i += n;
  };
  auto push = [&](TkK k, std::string s, int l, int c) {
    out.push_back({k, std::move(s), file, {l, c}});
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '%') {
      while (i < text.size() && text[i] != '\n') adv(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      adv(1);
      continue;
    }
    int l0 = line, c0 = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) ||
              text[j] == '_' || text[j] == '\''))
        j++;
      std::string word = text.substr(i, j - i);
      push(kKeywords.count(word) ? TkK::Keyword : TkK::Ident, word, l0, c0);
      adv(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])))
        j++;
      push(TkK::Sym, text.substr(i, j - i), l0, c0);
      adv(j - i);
      continue;
    }
    if (c == '"') {
      size_t j = i + 1;
      while (j < text.size() && text[j] != '"') j++;
      if (j >= text.size()) {
        diags.push_back({file, {l0, c0}, code::ParseError, "unterminated string"});
        return out;
      }
      push(TkK::String, text.substr(i + 1, j - i - 1), l0, c0);
      adv(j - i + 1);
      continue;
    }
    auto two = [&](const char* s) {
      return i + 1 < text.size() && text[i] == s[0] && text[i + 1] == s[1];
    };
    if (i + 2 < text.size() && text.compare(i, 3, "==>") == 0) {
      push(TkK::Sym, "==>", l0, c0);
      adv(3);
      continue;
    }
    static const char* twos[] = {"<-", "<=", "<~", "<>", "=>", "->",
                                 "-o", "||", "/\\"};
    bool got = false;
    for (const char* s : twos) {
      if (two(s)) {
        push(TkK::Sym, s, l0, c0);
        adv(2);
        got = true;
        break;
      }
    }
    if (got) continue;
    static const std::string singles = "(){}[]<>,;:.|&+=@*!";
    if (singles.find(c) != std::string::npos) {
      push(TkK::Sym, std::string(1, c), l0, c0);
      adv(1);
      continue;
    }
    diags.push_back({file, {l0, c0}, code::ParseError,
                     std::string("unexpected character '") + c + "'"});
    adv(1);
  }
  out.push_back({TkK::End, "", file, {line, col}});
  return out;
}

// ---------------------------------------------------------------------------
// Raw items
// ---------------------------------------------------------------------------

struct Item {
  std::vector<Token> toks;  // starts with its introducing keyword
};

bool is_item_start(const Token& t) {
  return t.k == TkK::Keyword &&
         (t.text == "mode" || t.text == "order" || t.text == "type" ||
          t.text == "decl" || t.text == "def" || t.text == "include");
}

// Reads a file's token stream, splicing includes (include-once).
void collect_items(const std::string& path, std::vector<Item>& items,
                   std::set<std::string>& included, std::vector<Diag>& diags) {
  namespace fs = std::filesystem;
  std::string canon;
  try {
    canon = fs::weakly_canonical(path).string();
  } catch (...) {
    canon = path;
  }
  if (!included.insert(canon).second) return;
  std::ifstream in(path);
  if (!in) {
    diags.push_back({path, {}, code::ParseError, "cannot open file"});
    return;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  std::vector<Token> toks = lex(ss.str(), path, diags);
  size_t i = 0;
  while (i < toks.size() && toks[i].k != TkK::End) {
    if (!is_item_start(toks[i])) {
      diags.push_back({toks[i].file, toks[i].span, code::ParseError,
                       "expected a declaration, found '" + toks[i].text + "'"});
      i++;
      continue;
    }
    if (toks[i].text == "include") {
      if (i + 1 < toks.size() && toks[i + 1].k == TkK::String) {
        fs::path inc = fs::path(path).parent_path() / toks[i + 1].text;
        collect_items(inc.string(), items, included, diags);
        i += 2;
      } else {
        diags.push_back({toks[i].file, toks[i].span, code::ParseError,
                         "include expects a string path"});
        i++;
      }
      continue;
    }
    Item it;
    it.toks.push_back(toks[i++]);
    while (i < toks.size() && toks[i].k != TkK::End && !is_item_start(toks[i]))
      it.toks.push_back(toks[i++]);
    Token end = it.toks.back();
    end.k = TkK::End;
    end.text = "";
    it.toks.push_back(end);
    items.push_back(std::move(it));
  }
}

// ---------------------------------------------------------------------------
// Parser proper
// ---------------------------------------------------------------------------

struct Parser {
  const std::vector<Token>& t;
  size_t pos = 0;
  Program& prog;
  const std::map<std::string, Mode>& typeModes;  // typedef name -> mode
  const std::set<std::string>& procNames;

  const Token& peek(size_t n = 0) const {
    size_t j = pos + n;
    return j < t.size() ? t[j] : t.back();
  }
  const Token& next() {
    const Token& tk = peek();
    if (tk.k != TkK::End) pos++;
    return tk;
  }
  bool at_sym(const std::string& s, size_t n = 0) const {
    return peek(n).k == TkK::Sym && peek(n).text == s;
  }
  bool at_kw(const std::string& s, size_t n = 0) const {
    return peek(n).k == TkK::Keyword && peek(n).text == s;
  }
  void expect_sym(const std::string& s) {
    if (!at_sym(s)) fail(peek(), "expected '" + s + "'");
    pos++;
  }
  std::string expect_ident() {
    if (peek().k != TkK::Ident) fail(peek(), "expected an identifier");
    return next().text;
  }
  // A variable position also accepts the star placeholder.
  std::string expect_var() {
    if (at_sym("*")) {
      pos++;
      return "*";
    }
    return expect_ident();
  }

  // -- types ----------------------------------------------------------------

  using TypeB = std::shared_ptr<Type>;

  TypeB tnode(TK k) {
    auto n = std::make_shared<Type>();
    n->k = k;
    n->span = peek().span;
    return n;
  }

  Mode expect_mode() {
    if (peek().k != TkK::Ident) fail(peek(), "expected a mode name");
    return next().text;
  }

  TypeB parse_type() {
    TypeB a = parse_prod();
    if (at_sym("-o") || at_sym("->") || at_sym("==>")) {
      std::string op = next().text;
      TypeB b = parse_type();
      TypeB n = tnode(op == "-o" ? TK::Lolli : op == "->" ? TK::Arrow : TK::ImpT);
      n->a = a;
      n->b = b;
      return n;
    }
    return a;
  }

  TypeB parse_prod() {
    TypeB a = parse_prefix();
    if (at_sym("*") || at_sym("||") || at_sym("/\\")) {
      std::string op = next().text;
      TypeB b = parse_prod();
      TypeB n = tnode(op == "*" ? TK::Tensor : op == "||" ? TK::Par : TK::AndT);
      n->a = a;
      n->b = b;
      return n;
    }
    return a;
  }

  TypeB parse_prefix() {
    if (at_kw("down") || at_kw("up")) {
      bool down = peek().text == "down";
      TypeB n = tnode(down ? TK::Down : TK::Up);
      pos++;
      expect_sym("[");
      n->src = expect_mode();
      expect_sym("]");
      n->a = parse_prefix();
      return n;
    }
    if (at_kw("fut")) {
      TypeB n = tnode(TK::FutT);
      pos++;
      n->a = parse_prefix();
      return n;
    }
    return parse_atom();
  }

  std::vector<std::pair<std::string, TypeB>> parse_type_branches() {
    std::vector<std::pair<std::string, TypeB>> bs;
    expect_sym("{");
    while (true) {
      std::string lab = expect_ident();
      expect_sym(":");
      bs.emplace_back(lab, parse_type());
      if (at_sym(",")) {
        pos++;
        continue;
      }
      break;
    }
    expect_sym("}");
    return bs;
  }

  TypeB parse_atom() {
    if (at_sym("1")) {
      TypeB n = tnode(TK::One);
      pos++;
      return n;
    }
    if (at_sym("+") || at_sym("&")) {
      TypeB n = tnode(peek().text == "+" ? TK::Plus : TK::With);
      pos++;
      for (auto& [l, b] : parse_type_branches())
        n->branches.emplace_back(l, b);
      return n;
    }
    if (at_sym("{")) {
      TypeB n = tnode(TK::Monad);
      pos++;
      n->a = parse_type();
      expect_sym("}");
      return n;
    }
    if (at_sym("(")) {
      pos++;
      TypeB n = parse_type();
      if (at_sym("@")) {
        pos++;
        Mode m = expect_mode();
        resolve_type(n, m);
      }
      expect_sym(")");
      return n;
    }
    if (peek().k == TkK::Ident) {
      TypeB n = tnode(TK::Var);
      n->var = next().text;
      auto it = typeModes.find(n->var);
      if (it == typeModes.end())
        throw ParseErr{{n->span.line ? t.front().file : "", n->span,
                        code::UnknownTypeVar,
                        "type variable " + n->var + " has no definition"}};
      n->mode = it->second;
      return n;
    }
    fail(peek(), "expected a type");
  }

  // Fills empty modes top-down; `expect` may be empty at the top, in which
  // case the mode must be recoverable from the structure.
  void resolve_type(const TypeB& n, const Mode& expect) {
    auto t2 = std::const_pointer_cast<Type>(n);
    resolve_mut(t2, expect);
  }

  void resolve_mut(const std::shared_ptr<Type>& n, const Mode& expect) {
    auto mut = [](const TypeP& p) { return std::const_pointer_cast<Type>(p); };
    if (n->mode.empty()) {
      if (expect.empty()) {
        // Try to pull the mode up from a determinable child.
        if (n->k == TK::FutT || n->k == TK::Arrow || n->k == TK::Par ||
            n->k == TK::Tensor || n->k == TK::Lolli) {
          resolve_mut(mut(n->a), "");
          if (!n->a->mode.empty()) {
            n->mode = n->a->mode;
          }
        } else if (n->k == TK::AndT || n->k == TK::ImpT) {
          resolve_mut(mut(n->b), "");
          if (!n->b->mode.empty()) n->mode = n->b->mode;
        }
        if (n->mode.empty())
          throw ParseErr{{t.front().file, n->span, code::ModeMismatch,
                          "cannot determine the mode of this type; add an "
                          "'@ mode' ascription"}};
      } else {
        n->mode = expect;
      }
    }
    switch (n->k) {
      case TK::Var:
      case TK::One:
        break;
      case TK::Plus:
      case TK::With:
        for (auto& [l, b] : n->branches) resolve_mut(mut(b), n->mode);
        break;
      case TK::Tensor:
      case TK::Lolli:
      case TK::Arrow:
      case TK::Par:
        resolve_mut(mut(n->a), n->mode);
        resolve_mut(mut(n->b), n->mode);
        break;
      case TK::Down:
      case TK::Up:
        resolve_mut(mut(n->a), n->src);
        break;
      case TK::Monad:
        resolve_mut(mut(n->a), "");
        if (n->a->mode.empty())
          throw ParseErr{{t.front().file, n->span, code::ModeMismatch,
                          "cannot determine the body mode of {A}"}};
        n->src = n->a->mode;
        break;
      case TK::AndT:
      case TK::ImpT:
        resolve_mut(mut(n->a), "");
        if (n->a->mode.empty())
          throw ParseErr{{t.front().file, n->span, code::ModeMismatch,
                          "cannot determine the left component's mode"}};
        n->src = n->a->mode;
        resolve_mut(mut(n->b), n->mode);
        break;
      case TK::FutT:
        resolve_mut(mut(n->a), n->mode);
        break;
    }
  }

  // Parses a type with an optional trailing '@ m' ascription and resolves it.
  TypeP parse_annot_type() {
    TypeB n = parse_type();
    Mode m;
    if (at_sym("@")) {
      pos++;
      m = expect_mode();
    }
    resolve_type(n, m);
    return n;
  }

  // -- values and patterns --------------------------------------------------

  VSeqP parse_vseq() {
    if (at_sym("<>")) {
      pos++;
      return mk_vunit();
    }
    if (at_kw("shift")) {
      pos++;
      expect_sym("(");
      VSeqP s = parse_vseq();
      expect_sym(")");
      return mk_vshift(s);
    }
    if (at_sym("<")) {
      pos++;
      std::string x = expect_var();
      expect_sym(",");
      VSeqP s = parse_vseq();
      expect_sym(">");
      return mk_vpair(x, s);
    }
    std::string id = expect_var();
    if (at_sym("(")) {
      pos++;
      VSeqP s = parse_vseq();
      expect_sym(")");
      return mk_vlabel(id, s);
    }
    return mk_vvar(id);
  }

  PatP parse_pat() {
    if (at_sym("<>")) {
      pos++;
      return mk_punit();
    }
    if (at_kw("shift")) {
      pos++;
      expect_sym("(");
      PatP s = parse_pat();
      expect_sym(")");
      return mk_pshift(s);
    }
    if (at_sym("<")) {
      pos++;
      std::string x = expect_ident();
      expect_sym(",");
      PatP s = parse_pat();
      expect_sym(">");
      return mk_ppair(x, s);
    }
    std::string id = expect_ident();
    if (at_sym("(")) {
      pos++;
      PatP s = parse_pat();
      expect_sym(")");
      return mk_plabel(id, s);
    }
    return mk_pvar(id);
  }

  // -- processes ------------------------------------------------------------

  ProcP with_span(ProcP p, Span sp) {
    auto q = std::const_pointer_cast<Process>(p);
    q->span = sp;
    return p;
  }

  ContP parse_cont() {
    Span sp = peek().span;
    expect_sym("(");
    ContP out;
    if (at_sym("<>")) {
      pos++;
      expect_sym("=>");
      out = mk_unit_match(parse_process());
    } else if (at_kw("shift")) {
      pos++;
      expect_sym("(");
      PatP p = parse_pat();
      expect_sym(")");
      expect_sym("=>");
      out = mk_shift_match(p, parse_process());
    } else if (at_sym("<")) {
      pos++;
      std::string v1 = expect_ident();
      if (at_sym("|")) {
        // fork/join case: <z | w> is the plain pair match
        pos++;
        std::string v2 = expect_ident();
        expect_sym(">");
        expect_sym("=>");
        out = mk_pair_match(v1, mk_pvar(v2), parse_process());
      } else {
        expect_sym(",");
        PatP p2 = parse_pat();
        expect_sym(">");
        expect_sym("=>");
        out = mk_pair_match(v1, p2, parse_process());
      }
    } else {
      std::vector<CBranch> bs;
      while (true) {
        CBranch b;
        b.span = peek().span;
        b.lab = expect_ident();
        expect_sym("(");
        b.pat = parse_pat();
        expect_sym(")");
        expect_sym("=>");
        b.body = parse_process();
        bs.push_back(std::move(b));
        if (at_sym("|")) {
          pos++;
          continue;
        }
        break;
      }
      out = mk_branches(std::move(bs));
    }
    expect_sym(")");
    auto q = std::const_pointer_cast<Cont>(out);
    q->span = sp;
    return out;
  }

  ProcP parse_paren_process() {
    expect_sym("(");
    ProcP p = parse_process();
    expect_sym(")");
    return p;
  }

  // The premise of a sequential/CBN cut: parenthesized process, or a bare
  // call / identity for the common one-liners.
  ProcP parse_cut_premise(const std::string& dest) {
    if (at_sym("(")) return parse_paren_process();
    Span sp = peek().span;
    std::string id = expect_ident();
    if (procNames.count(id)) {
      std::vector<std::string> args;
      if (at_sym("<-")) {
        pos++;
        while (peek().k == TkK::Ident || at_sym("*")) args.push_back(expect_var());
      }
      return with_span(mk_call(dest, id, std::move(args)), sp);
    }
    return with_span(mk_id(dest, id), sp);
  }

  ProcP parse_process() {
    Span sp = peek().span;
    if (at_kw("case")) {
      pos++;
      std::string subj = expect_var();
      ContP k = parse_cont();
      return with_span(mk_case(subj, k), sp);
    }
    if (at_kw("touch")) {
      pos++;
      std::string subj = expect_var();
      expect_sym("(");
      expect_sym("<");
      std::string z = expect_ident();
      expect_sym(">");
      expect_sym("=>");
      ProcP body = parse_process();
      expect_sym(")");
      Process r;
      r.k = PK::Touch;
      r.span = sp;
      r.subject = subj;
      r.inner = z;
      r.left = body;
      return std::make_shared<Process>(std::move(r));
    }
    if (at_sym("{")) {
      // {c}@m <- Q
      pos++;
      std::string c = expect_var();
      expect_sym("}");
      Mode m;
      if (at_sym("@")) {
        pos++;
        m = expect_mode();
      }
      expect_sym("<-");
      ProcP q = parse_process();
      Process r;
      r.k = PK::MonadBind;
      r.span = sp;
      r.var = c;
      r.varMode = m;
      r.left = q;
      return std::make_shared<Process>(std::move(r));
    }
    std::string x = expect_var();
    if (at_sym(".")) {
      pos++;
      return parse_write_like(x, sp);
    }
    TypeP annot;
    if (at_sym(":")) {
      pos++;
      annot = parse_annot_type();
    }
    if (at_sym("<-")) {
      pos++;
      return parse_cut_like(x, annot, sp);
    }
    if (at_sym("<=") || at_sym("<~")) {
      bool seq = peek().text == "<=";
      pos++;
      ProcP p = parse_cut_premise(x);
      expect_sym(";");
      ProcP q = parse_process();
      Process r;
      r.k = seq ? PK::SeqCut : PK::CbnCut;
      r.span = sp;
      r.var = x;
      r.annot = annot;
      r.left = p;
      r.right = q;
      return std::make_shared<Process>(std::move(r));
    }
    fail(peek(), "expected '.', '<-', '<=', '<~' or ':' after '" + x + "'");
  }

  ProcP parse_cut_like(const std::string& x, TypeP annot, Span sp) {
    CutOrigin origin = CutOrigin::Plain;
    if (at_sym("!")) {
      pos++;
      origin = CutOrigin::Exempt;
    }
    if (at_kw("future")) {
      pos++;
      ProcP p = parse_cut_premise(x);
      expect_sym(";");
      ProcP q = parse_process();
      Process r;
      r.k = PK::FutCut;
      r.span = sp;
      r.var = x;
      r.annot = annot;
      r.left = p;
      r.right = q;
      return std::make_shared<Process>(std::move(r));
    }
    if (at_sym("(")) {
      pos++;
      ProcP p = parse_process();
      TypeP fnAnnot;
      if (at_sym(":")) {
        pos++;
        fnAnnot = parse_annot_type();
      }
      expect_sym(")");
      if (at_sym("(")) {
        // apply: y <- (P : T)(Q)
        ProcP q = parse_paren_process();
        Process r;
        r.k = PK::Apply;
        r.span = sp;
        r.var = x;
        r.annot = fnAnnot;
        r.left = p;
        r.right = q;
        return std::make_shared<Process>(std::move(r));
      }
      expect_sym(";");
      ProcP q = parse_process();
      return with_span(mk_cut(x, annot ? annot : fnAnnot, p, q, origin), sp);
    }
    std::string id = expect_var();
    if (procNames.count(id)) {
      std::vector<std::string> args;
      if (at_sym("<-")) {
        pos++;
        while (peek().k == TkK::Ident || at_sym("*")) args.push_back(expect_var());
      }
      if (at_sym(";")) {
        pos++;
        ProcP q = parse_process();
        Process r;
        r.k = PK::ShortCall;
        r.span = sp;
        r.var = x;
        r.callee = id;
        r.args = std::move(args);
        r.right = q;
        return std::make_shared<Process>(std::move(r));
      }
      return with_span(mk_call(x, id, std::move(args)), sp);
    }
    if (at_sym(";")) {
      pos++;
      ProcP q = parse_process();
      Process r;
      r.k = PK::ShortId;
      r.span = sp;
      r.var = x;
      r.subject = id;
      r.right = q;
      return std::make_shared<Process>(std::move(r));
    }
    return with_span(mk_id(x, id), sp);
  }

  ProcP parse_write_like(const std::string& x, Span sp) {
    if (at_sym("(")) {
      // x.(fn y => P)
      pos++;
      if (!at_kw("fn")) fail(peek(), "expected 'fn'");
      pos++;
      std::string y = expect_ident();
      expect_sym("=>");
      ProcP body = parse_process();
      expect_sym(")");
      Process r;
      r.k = PK::LambdaW;
      r.span = sp;
      r.subject = x;
      r.inner = y;
      r.left = body;
      return std::make_shared<Process>(std::move(r));
    }
    if (at_sym("{")) {
      pos++;
      ProcP body = parse_process();
      expect_sym("}");
      Process r;
      r.k = PK::MonadW;
      r.span = sp;
      r.subject = x;
      r.left = body;
      return std::make_shared<Process>(std::move(r));
    }
    if (at_kw("future")) {
      pos++;
      expect_sym("(");
      ProcP body = parse_process();
      expect_sym(")");
      Process r;
      r.k = PK::FutureW;
      r.span = sp;
      r.subject = x;
      r.left = body;
      return std::make_shared<Process>(std::move(r));
    }
    if (at_kw("shift")) {
      pos++;
      expect_sym("(");
      // Atomic forms: ident '.' V, ident '<-' src, 'case' ident K.
      if (at_kw("case")) {
        pos++;
        std::string inner = expect_ident();
        ContP k = parse_cont();
        expect_sym(")");
        return with_span(mk_atom_cont(x, inner, k), sp);
      }
      if (peek().k == TkK::Ident && at_sym(".", 1)) {
        std::string inner = next().text;
        pos++;  // '.'
        VSeqP v = parse_inner_value();
        expect_sym(")");
        return with_span(mk_atom_val(x, inner, v), sp);
      }
      if (peek().k == TkK::Ident && at_sym("<-", 1)) {
        std::string inner = next().text;
        pos++;  // '<-'
        std::string src = expect_ident();
        expect_sym(")");
        return with_span(mk_atom_id(x, inner, src), sp);
      }
      VSeqP v = parse_vseq();
      expect_sym(")");
      return with_span(mk_write(x, mk_vshift(v)), sp);
    }
    if (at_sym("<>")) {
      pos++;
      return with_span(mk_write(x, mk_vunit()), sp);
    }
    if (at_sym("<")) {
      // pair write vs. fork/join pair of processes
      if ((peek(1).k == TkK::Ident || at_sym("*", 1)) && at_sym(",", 2)) {
        pos++;
        std::string y = expect_var();
        expect_sym(",");
        VSeqP s = parse_vseq();
        expect_sym(">");
        return with_span(mk_write(x, mk_vpair(y, s)), sp);
      }
      pos++;
      ProcP p = parse_process();
      expect_sym("|");
      ProcP q = parse_process();
      expect_sym(">");
      Process r;
      r.k = PK::ParPairW;
      r.span = sp;
      r.subject = x;
      r.left = p;
      r.right = q;
      return std::make_shared<Process>(std::move(r));
    }
    std::string lab = expect_ident();
    expect_sym("(");
    VSeqP s = parse_vseq();
    expect_sym(")");
    return with_span(mk_write(x, mk_vlabel(lab, s)), sp);
  }

  // Value written by the inner half of an atomic write: label/pair/unit/shift.
  VSeqP parse_inner_value() {
    return parse_vseq_noleaf();
  }

  VSeqP parse_vseq_noleaf() {
    VSeqP v = parse_vseq();
    if (v->k == VK::Var)
      fail(peek(), "a written value cannot be a bare variable");
    return v;
  }
};

// ---------------------------------------------------------------------------
// Item-level parsing
// ---------------------------------------------------------------------------

struct FileParser {
  Program prog;
  std::vector<Diag> diags;
  std::map<std::string, Mode> typeModes;
  std::set<std::string> procNames;

  void run(std::vector<Item>& items) {
    // Pass A: modes, orders, headers.
    for (auto& it : items) {
      const Token& kw = it.toks[0];
      try {
        if (kw.text == "mode")
          parse_mode(it);
        else if (kw.text == "order")
          parse_order(it);
        else if (kw.text == "type")
          header_type(it);
        else if (kw.text == "decl")
          header_decl(it);
      } catch (ParseErr& e) {
        diags.push_back(e.d);
      }
    }
    prog.mt.close();
    // Pass B: bodies.
    for (auto& it : items) {
      const Token& kw = it.toks[0];
      try {
        if (kw.text == "type")
          parse_typedef(it);
        else if (kw.text == "decl")
          parse_decl(it);
        else if (kw.text == "def")
          parse_def(it);
      } catch (ParseErr& e) {
        diags.push_back(e.d);
      }
    }
  }

  void parse_mode(Item& it) {
    Parser p{it.toks, 1, prog, typeModes, procNames};
    std::string name = p.expect_ident();
    ModeProps props;
    props.span = it.toks[0].span;
    const Token& cls = p.next();
    if (cls.text == "lin") {
    } else if (cls.text == "aff") {
      props.weaken = true;
    } else if (cls.text == "strict") {
      props.contract = true;
    } else if (cls.text == "unr") {
      props.weaken = props.contract = true;
    } else {
      fail(cls, "expected lin, aff, strict or unr");
    }
    if (p.at_kw("seq")) {
      p.pos++;
      props.seqOnly = true;
    }
    if (!prog.mt.declare(name, props))
      diags.push_back({it.toks[0].file, it.toks[0].span, code::DuplicateName,
                       "mode " + name + " declared twice"});
  }

  void parse_order(Item& it) {
    Parser p{it.toks, 1, prog, typeModes, procNames};
    std::string below = p.expect_ident();
    p.expect_sym("<");
    std::string above = p.expect_ident();
    if (!prog.mt.order(below, above))
      diags.push_back({it.toks[0].file, it.toks[0].span, code::UnknownMode,
                       "order declaration uses an undeclared mode"});
  }

  void header_type(Item& it) {
    Parser p{it.toks, 1, prog, typeModes, procNames};
    std::string name = p.expect_ident();
    p.expect_sym("@");
    Mode m = p.expect_mode();
    if (typeModes.count(name)) {
      diags.push_back({it.toks[0].file, it.toks[0].span, code::DuplicateName,
                       "type " + name + " defined twice"});
      return;
    }
    typeModes[name] = m;
  }

  void header_decl(Item& it) {
    Parser p{it.toks, 1, prog, typeModes, procNames};
    std::string name = p.expect_ident();
    if (!procNames.insert(name).second)
      diags.push_back({it.toks[0].file, it.toks[0].span, code::DuplicateName,
                       "process " + name + " declared twice"});
  }

  void parse_typedef(Item& it) {
    Parser p{it.toks, 1, prog, typeModes, procNames};
    std::string name = p.expect_ident();
    p.expect_sym("@");
    Mode m = p.expect_mode();
    p.expect_sym("=");
    Parser::TypeB body = p.parse_type();
    p.resolve_type(body, m);
    TypeDef td{name, m, body, it.toks[0].span};
    if (!prog.sig.typeDefs.count(name)) {
      prog.sig.typeDefs[name] = td;
      prog.sig.typeOrder.push_back(name);
    }
  }

  void parse_decl(Item& it) {
    Parser p{it.toks, 1, prog, typeModes, procNames};
    ProcDecl d;
    d.span = it.toks[0].span;
    d.name = p.expect_ident();
    while (p.at_sym("(")) {
      p.pos++;
      std::string an = p.expect_ident();
      p.expect_sym(":");
      TypeP at = p.parse_annot_type();
      p.expect_sym(")");
      d.args.emplace_back(an, at);
    }
    p.expect_sym(":");
    d.result = p.parse_annot_type();
    if (prog.sig.procDecls.count(d.name)) return;  // duplicate reported earlier
    prog.sig.procDecls[d.name] = d;
    prog.sig.procOrder.push_back(d.name);
  }

  void parse_def(Item& it) {
    Parser p{it.toks, 1, prog, typeModes, procNames};
    ProcDef f;
    f.span = it.toks[0].span;
    f.resVar = p.expect_ident();
    p.expect_sym("<-");
    f.name = p.expect_ident();
    if (p.at_sym("<-")) {
      p.pos++;
      while (p.peek().k == TkK::Ident) f.argVars.push_back(p.expect_ident());
    }
    p.expect_sym("=");
    f.body = p.parse_process();
    if (p.peek().k != TkK::End)
      fail(p.peek(), "unexpected tokens after the process body");
    if (prog.sig.procDefs.count(f.name)) {
      diags.push_back({it.toks[0].file, it.toks[0].span, code::DuplicateName,
                       "process " + f.name + " defined twice"});
      return;
    }
    prog.sig.procDefs[f.name] = f;
  }
};

ParseResult parse_items(std::vector<Item>& items, const std::string& file,
                        std::vector<Diag> diags) {
  FileParser fp;
  fp.prog.file = file;
  fp.diags = std::move(diags);
  fp.run(items);
  ParseResult r;
  r.prog = std::move(fp.prog);
  r.diags = std::move(fp.diags);
  return r;
}

}  // namespace

ParseResult parse_file(const std::string& path) {
  std::vector<Diag> diags;
  std::vector<Item> items;
  std::set<std::string> included;
  collect_items(path, items, included, diags);
  return parse_items(items, path, std::move(diags));
}

ParseResult parse_string(const std::string& text, const std::string& fileName) {
  std::vector<Diag> diags;
  std::vector<Token> toks = lex(text, fileName, diags);
  std::vector<Item> items;
  size_t i = 0;
  while (i < toks.size() && toks[i].k != TkK::End) {
    if (!is_item_start(toks[i])) {
      diags.push_back({toks[i].file, toks[i].span, code::ParseError,
                       "expected a declaration, found '" + toks[i].text + "'"});
      i++;
      continue;
    }
    Item it;
    it.toks.push_back(toks[i++]);
    while (i < toks.size() && toks[i].k != TkK::End && !is_item_start(toks[i]))
      it.toks.push_back(toks[i++]);
    Token end = it.toks.back();
    end.k = TkK::End;
    end.text = "";
    it.toks.push_back(end);
    items.push_back(std::move(it));
  }
  return parse_items(items, fileName, std::move(diags));
}

}  // namespace sax
