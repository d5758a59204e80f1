#include "ctc/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace ctc {

// ---------------------------------------------------------------------------
// Arena

static std::string g_key(const GNode& n) {
  switch (n.k) {
    case GK::Delta: return "d||0|0";
    case GK::Eps: return "e||0|0";
    case GK::Atom: return "a|" + n.atom + "|0|0";
    case GK::Not: return "n||" + std::to_string(n.a) + "|0";
    case GK::Sum: return "s||" + std::to_string(n.a) + "|" + std::to_string(n.b);
    case GK::Prod: return "p||" + std::to_string(n.a) + "|" + std::to_string(n.b);
  }
  return "";
}

GId Arena::g_intern(GNode n) {
  auto key = g_key(n);
  auto it = gmap_.find(key);
  if (it != gmap_.end()) return it->second;
  GId id = static_cast<GId>(gnodes_.size());
  gnodes_.push_back(std::move(n));
  gmap_[key] = id;
  return id;
}

static std::string p_key(const PNode& n) {
  std::ostringstream os;
  os << static_cast<int>(n.k) << '|';
  for (const auto& a : n.acts) os << a.str() << ';';
  os << '|' << n.key << '|' << n.g << '|' << n.cname << '|';
  for (PId k : n.kids) os << k << ';';
  os << '|';
  for (const auto& w : n.ws) os << rat_str(w) << ';';
  os << '|';
  for (const auto& r : n.rset) os << r << ';';
  os << '|';
  for (const auto& m : n.rmap) os << m.first << '>' << m.second << ';';
  return os.str();
}

PId Arena::p_intern(PNode n) {
  auto key = p_key(n);
  auto it = pmap_.find(key);
  if (it != pmap_.end()) return it->second;
  PId id = static_cast<PId>(pnodes_.size());
  pnodes_.push_back(std::move(n));
  pmap_[key] = id;
  return id;
}

Arena::Arena() {
  GNode ge{GK::Eps, "", 0, 0};
  gmap_[g_key(ge)] = 0;
  gnodes_.push_back(std::move(ge));
  PNode pn;
  pmap_[p_key(pn)] = 0;
  pnodes_.push_back(std::move(pn));
}

PId Arena::nil() { return 0; }

PId Arena::constant(const std::string& name) {
  PNode n;
  n.k = PK::Const;
  n.cname = name;
  return p_intern(std::move(n));
}

PId Arena::atoms(std::vector<Action> acts, long long key) {
  PNode n;
  n.k = PK::Atoms;
  n.acts = std::move(acts);
  n.key = key;
  return p_intern(std::move(n));
}

PId Arena::guard(GId g) {
  PNode n;
  n.k = PK::Guard;
  n.g = g;
  return p_intern(std::move(n));
}

PId Arena::seq(std::vector<PId> kids) {
  if (kids.size() == 1) return kids[0];
  PNode n;
  n.k = PK::Seq;
  n.kids = std::move(kids);
  return p_intern(std::move(n));
}

PId Arena::sum(std::vector<PId> kids) {
  if (kids.size() == 1) return kids[0];
  PNode n;
  n.k = PK::Sum;
  n.kids = std::move(kids);
  return p_intern(std::move(n));
}

PId Arena::box(std::vector<PId> kids, std::vector<Rat> ws) {
  if (kids.size() == 1) return kids[0];
  PNode n;
  n.k = PK::Box;
  n.kids = std::move(kids);
  n.ws = std::move(ws);
  return p_intern(std::move(n));
}

PId Arena::par(std::vector<PId> kids) {
  if (kids.size() == 1) return kids[0];
  PNode n;
  n.k = PK::Par;
  n.kids = std::move(kids);
  return p_intern(std::move(n));
}

PId Arena::restrict_(PId p, std::vector<std::string> labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  PNode n;
  n.k = PK::Restrict;
  n.kids = {p};
  n.rset = std::move(labels);
  return p_intern(std::move(n));
}

PId Arena::relabel(PId p, std::vector<std::pair<std::string, std::string>> map) {
  std::sort(map.begin(), map.end());
  PNode n;
  n.k = PK::Relabel;
  n.kids = {p};
  n.rmap = std::move(map);
  return p_intern(std::move(n));
}

int Arena::gcmp(GId a, GId b) const {
  if (a == b) return 0;
  const GNode& x = g(a);
  const GNode& y = g(b);
  if (x.k != y.k) return x.k < y.k ? -1 : 1;
  if (x.atom != y.atom) return x.atom < y.atom ? -1 : 1;
  if (x.k == GK::Not) return gcmp(x.a, y.a);
  if (x.k == GK::Sum || x.k == GK::Prod) {
    int c = gcmp(x.a, y.a);
    if (c) return c;
    return gcmp(x.b, y.b);
  }
  return 0;
}

int Arena::cmp(PId a, PId b) const {
  if (a == b) return 0;
  const PNode& x = n(a);
  const PNode& y = n(b);
  if (x.k != y.k) return x.k < y.k ? -1 : 1;
  switch (x.k) {
    case PK::Nil: return 0;
    case PK::Const: return x.cname < y.cname ? -1 : (x.cname > y.cname ? 1 : 0);
    case PK::Atoms: {
      if (x.acts != y.acts) return x.acts < y.acts ? -1 : 1;
      if (x.key != y.key) return x.key < y.key ? -1 : 1;
      return 0;
    }
    case PK::Guard: return gcmp(x.g, y.g);
    case PK::Seq:
    case PK::Sum:
    case PK::Par: {
      if (x.kids.size() != y.kids.size()) return x.kids.size() < y.kids.size() ? -1 : 1;
      for (size_t i = 0; i < x.kids.size(); ++i) {
        int c = cmp(x.kids[i], y.kids[i]);
        if (c) return c;
      }
      return 0;
    }
    case PK::Box: {
      if (x.kids.size() != y.kids.size()) return x.kids.size() < y.kids.size() ? -1 : 1;
      for (size_t i = 0; i < x.kids.size(); ++i) {
        int c = cmp(x.kids[i], y.kids[i]);
        if (c) return c;
        if (x.ws[i] != y.ws[i]) return x.ws[i] < y.ws[i] ? -1 : 1;
      }
      return 0;
    }
    case PK::Restrict: {
      int c = cmp(x.kids[0], y.kids[0]);
      if (c) return c;
      if (x.rset != y.rset) return x.rset < y.rset ? -1 : 1;
      return 0;
    }
    case PK::Relabel: {
      int c = cmp(x.kids[0], y.kids[0]);
      if (c) return c;
      if (x.rmap != y.rmap) return x.rmap < y.rmap ? -1 : 1;
      return 0;
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tk {
  Ident,   // lowercase-start
  UIdent,  // uppercase-start
  Num,
  CoTick,  // '
  Dot,
  Plus,
  ParPar,  // ||
  Back,    // backslash
  LBrace,
  RBrace,
  LParen,
  RParen,
  LBrack,
  RBrack,
  Comma,
  Arrow,  // ->
  Amp,
  Bang,
  Slash,
  End,
};

struct Token {
  Tk t;
  std::string s;
  size_t pos;
};

long long to_ll(const std::string& s) {
  try {
    return std::stoll(s);
  } catch (const std::exception&) {
    throw CtcError(ErrKind::Syntax, "numeral '" + s + "' out of range");
  }
}

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  size_t i = 0;
  auto push = [&](Tk t, std::string s, size_t p) { out.push_back({t, std::move(s), p}); };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    size_t p = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      std::string w = text.substr(i, j - i);
      push(std::isupper(static_cast<unsigned char>(c)) ? Tk::UIdent : Tk::Ident, w, p);
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      push(Tk::Num, text.substr(i, j - i), p);
      i = j;
      continue;
    }
    if (c == '|' && i + 1 < text.size() && text[i + 1] == '|') {
      push(Tk::ParPar, "||", p);
      i += 2;
      continue;
    }
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
      push(Tk::Arrow, "->", p);
      i += 2;
      continue;
    }
    switch (c) {
      case '\'': push(Tk::CoTick, "'", p); break;
      case '.': push(Tk::Dot, ".", p); break;
      case '+': push(Tk::Plus, "+", p); break;
      case '\\': push(Tk::Back, "\\", p); break;
      case '{': push(Tk::LBrace, "{", p); break;
      case '}': push(Tk::RBrace, "}", p); break;
      case '(': push(Tk::LParen, "(", p); break;
      case ')': push(Tk::RParen, ")", p); break;
      case '[': push(Tk::LBrack, "[", p); break;
      case ']': push(Tk::RBrack, "]", p); break;
      case ',': push(Tk::Comma, ",", p); break;
      case '&': push(Tk::Amp, "&", p); break;
      case '!': push(Tk::Bang, "!", p); break;
      case '/': push(Tk::Slash, "/", p); break;
      default:
        throw CtcError(ErrKind::Syntax,
                       "unexpected character '" + std::string(1, c) + "' at position " +
                           std::to_string(p));
    }
    ++i;
  }
  out.push_back({Tk::End, "", text.size()});
  return out;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  Parser(const std::string& text, Arena& ar, const Defs& defs)
      : toks_(lex(text)), ar_(ar), defs_(defs) {}

  PId parse_term_all() {
    PId p = parse_box();
    expect(Tk::End, "end of input");
    return p;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  Arena& ar_;
  const Defs& defs_;

  const Token& cur() const { return toks_[pos_]; }
  bool at(Tk t) const { return cur().t == t; }
  bool at2(Tk t) const { return pos_ + 1 < toks_.size() && toks_[pos_ + 1].t == t; }
  void adv() { ++pos_; }
  [[noreturn]] void fail(const std::string& expected) {
    throw CtcError(ErrKind::Syntax, "expected " + expected + " at position " +
                                        std::to_string(cur().pos));
  }
  void expect(Tk t, const std::string& what) {
    if (!at(t)) fail(what);
    adv();
  }

  Rat parse_rat_tok() {
    if (!at(Tk::Num)) fail("number");
    long long num = to_ll(cur().s);
    adv();
    if (at(Tk::Slash)) {
      adv();
      if (!at(Tk::Num)) fail("denominator");
      long long den = to_ll(cur().s);
      adv();
      if (den == 0) throw CtcError(ErrKind::BadProbability, "zero denominator");
      return Rat(num, den);
    }
    return Rat(num, 1);
  }

  PId parse_box() {
    PId left = parse_sum();
    while (at(Tk::LBrack) && at2(Tk::Plus)) {
      adv();
      adv();
      Rat pi = parse_rat_tok();
      expect(Tk::RBrack, "']'");
      if (!(pi > Rat(0) && pi < Rat(1)))
        throw CtcError(ErrKind::BadProbability,
                       "probability " + rat_str(pi) + " outside (0,1)");
      PId right = parse_sum();
      left = ar_.box2(pi, left, right);
    }
    return left;
  }

  PId parse_sum() {
    PId left = parse_par();
    while (at(Tk::Plus)) {
      adv();
      PId right = parse_par();
      left = ar_.sum2(left, right);
    }
    return left;
  }

  PId parse_par() {
    PId left = parse_post();
    while (at(Tk::ParPar)) {
      adv();
      PId right = parse_post();
      left = ar_.par2(left, right);
    }
    return left;
  }

  PId parse_post() {
    PId p = parse_chain();
    for (;;) {
      if (at(Tk::Back)) {
        adv();
        expect(Tk::LBrace, "'{'");
        std::vector<std::string> labels;
        if (!at(Tk::RBrace)) {
          for (;;) {
            if (!at(Tk::Ident)) fail("label name");
            labels.push_back(cur().s);
            adv();
            if (at(Tk::Comma)) {
              adv();
              continue;
            }
            break;
          }
        }
        expect(Tk::RBrace, "'}'");
        p = ar_.restrict_(p, std::move(labels));
        continue;
      }
      if (at(Tk::LBrack) && at2(Tk::Ident)) {
        adv();
        std::vector<std::pair<std::string, std::string>> map;
        for (;;) {
          if (!at(Tk::Ident)) fail("label name");
          std::string from = cur().s;
          adv();
          expect(Tk::Arrow, "'->'");
          if (!at(Tk::Ident)) fail("label name");
          std::string to = cur().s;
          adv();
          map.emplace_back(from, to);
          if (at(Tk::Comma)) {
            adv();
            continue;
          }
          break;
        }
        expect(Tk::RBrack, "']'");
        for (size_t i = 1; i < map.size(); ++i)
          for (size_t j = 0; j < i; ++j)
            if (map[i].first == map[j].first)
              throw CtcError(ErrKind::Syntax,
                             "duplicate relabelling of '" + map[i].first + "'");
        p = ar_.relabel(p, std::move(map));
        continue;
      }
      break;
    }
    return p;
  }

  PId parse_chain() {
    std::vector<PId> parts;
    parts.push_back(parse_prim());
    while (at(Tk::Dot)) {
      adv();
      parts.push_back(parse_prim());
    }
    return ar_.seq(std::move(parts));
  }

  std::optional<Action> try_action() {
    if (at(Tk::Ident)) {
      if (cur().s == "tau") {
        adv();
        return Action::tau();
      }
      if (cur().s == "nil" || cur().s == "eps" || cur().s == "delta") return std::nullopt;
      Action a = Action::lbl(cur().s, false);
      adv();
      return a;
    }
    if (at(Tk::CoTick)) {
      adv();
      if (!at(Tk::Ident) || cur().s == "tau" || cur().s == "nil" || cur().s == "eps" ||
          cur().s == "delta")
        fail("label name after '");
      Action a = Action::lbl(cur().s, true);
      adv();
      return a;
    }
    return std::nullopt;
  }

  long long try_key() {
    if (at(Tk::LBrack) && at2(Tk::Num)) {
      adv();
      long long k = to_ll(cur().s);
      adv();
      expect(Tk::RBrack, "']'");
      return k;
    }
    return -1;
  }

  void check_vector(const std::vector<Action>& acts) {
    for (size_t i = 0; i < acts.size(); ++i)
      for (size_t j = i + 1; j < acts.size(); ++j)
        if (acts[i].is_comp_of(acts[j]))
          throw CtcError(ErrKind::Syntax, "complementary actions '" + acts[i].str() +
                                              "' and '" + acts[j].str() +
                                              "' in one vector prefix");
  }

  std::optional<PId> try_vector() {
    size_t save = pos_;
    if (!at(Tk::LParen)) return std::nullopt;
    adv();
    std::vector<Action> acts;
    std::vector<long long> keys;
    for (;;) {
      auto a = try_action();
      if (!a) {
        pos_ = save;
        return std::nullopt;
      }
      acts.push_back(*a);
      keys.push_back(try_key());
      if (at(Tk::ParPar)) {
        adv();
        continue;
      }
      if (at(Tk::RParen)) {
        adv();
        break;
      }
      pos_ = save;
      return std::nullopt;
    }
    long long key = keys[0];
    for (long long k : keys)
      if (k != key)
        throw CtcError(ErrKind::Syntax, "all actions of a keyed vector must share one key");
    check_vector(acts);
    return ar_.atoms(std::move(acts), key);
  }

  GId parse_gsum() {
    GId left = parse_gprod();
    while (at(Tk::Plus)) {
      adv();
      left = ar_.g_sum(left, parse_gprod());
    }
    return left;
  }

  GId parse_gprod() {
    GId left = parse_gunary();
    while (at(Tk::Amp)) {
      adv();
      left = ar_.g_prod(left, parse_gunary());
    }
    return left;
  }

  GId parse_gunary() {
    if (at(Tk::Bang)) {
      adv();
      return ar_.g_not(parse_gunary());
    }
    if (at(Tk::LParen)) {
      adv();
      GId g = parse_gsum();
      expect(Tk::RParen, "')'");
      return g;
    }
    if (at(Tk::Ident)) {
      std::string w = cur().s;
      adv();
      if (w == "eps") return ar_.g_eps();
      if (w == "delta") return ar_.g_delta();
      if (w == "tau" || w == "nil")
        throw CtcError(ErrKind::Syntax, "'" + w + "' is not a guard atom");
      return ar_.g_atom(w);
    }
    fail("guard expression");
  }

  PId parse_prim() {
    if (at(Tk::Ident)) {
      const std::string& w = cur().s;
      if (w == "nil") {
        adv();
        return ar_.nil();
      }
      if (w == "eps") {
        adv();
        return ar_.guard(ar_.g_eps());
      }
      if (w == "delta") {
        adv();
        return ar_.guard(ar_.g_delta());
      }
      auto a = try_action();
      long long k = try_key();
      return ar_.atoms({*a}, k);
    }
    if (at(Tk::CoTick)) {
      auto a = try_action();
      long long k = try_key();
      return ar_.atoms({*a}, k);
    }
    if (at(Tk::UIdent)) {
      std::string name = cur().s;
      adv();
      if (!defs_.has(name))
        throw CtcError(ErrKind::UnknownConstant, "unknown constant '" + name + "'");
      return ar_.constant(name);
    }
    if (at(Tk::LBrace)) {
      adv();
      GId g = parse_gsum();
      expect(Tk::RBrace, "'}'");
      return ar_.guard(g);
    }
    if (at(Tk::LParen)) {
      if (auto v = try_vector()) return *v;
      adv();
      PId p = parse_box();
      expect(Tk::RParen, "')'");
      return p;
    }
    fail("a process term");
  }
};

}  // namespace

PId parse_process(const std::string& text, Arena& ar, const Defs& defs) {
  Parser p(text, ar, defs);
  return p.parse_term_all();
}

Defs parse_defs(const std::string& text, Arena& ar) {
  Defs defs;
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<std::string, std::string>> raw;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto sep = line.find(":=");
    if (sep == std::string::npos)
      throw CtcError(ErrKind::Syntax, "definition line missing ':=' — " + line);
    std::string name = line.substr(0, sep);
    name.erase(0, name.find_first_not_of(" \t"));
    name.erase(name.find_last_not_of(" \t") + 1);
    if (name.empty() || !std::isupper(static_cast<unsigned char>(name[0])))
      throw CtcError(ErrKind::Syntax, "constant names start uppercase: '" + name + "'");
    if (defs.byName.count(name))
      throw CtcError(ErrKind::Syntax, "constant '" + name + "' defined twice");
    defs.byName[name] = 0;
    raw.emplace_back(name, line.substr(sep + 2));
  }
  for (const auto& [name, body] : raw) defs.byName[name] = parse_process(body, ar, defs);
  validate_defs(ar, defs);
  return defs;
}

namespace {

// True when every execution through p must pass an unfired prefix.
bool definitely_prefixes(const Arena& ar, PId p) {
  const PNode& n = ar.n(p);
  switch (n.k) {
    case PK::Atoms: return n.key < 0;
    case PK::Seq:
    case PK::Par: {
      for (PId k : n.kids)
        if (definitely_prefixes(ar, k)) return true;
      return false;
    }
    case PK::Sum:
    case PK::Box: {
      for (PId k : n.kids)
        if (!definitely_prefixes(ar, k)) return false;
      return true;
    }
    case PK::Restrict:
    case PK::Relabel: return definitely_prefixes(ar, n.kids[0]);
    default: return false;
  }
}

bool weakly_guarded(const Arena& ar, PId p, const Defs& defs, bool underPrefix,
                    std::set<std::string>& onPath) {
  const PNode& n = ar.n(p);
  switch (n.k) {
    case PK::Nil:
    case PK::Atoms:
    case PK::Guard: return true;
    case PK::Const: {
      if (underPrefix) return true;
      if (onPath.count(n.cname)) return false;
      onPath.insert(n.cname);
      bool ok = weakly_guarded(ar, defs.byName.at(n.cname), defs, false, onPath);
      onPath.erase(n.cname);
      return ok;
    }
    case PK::Seq: {
      bool prefixed = underPrefix;
      for (PId k : n.kids) {
        if (!weakly_guarded(ar, k, defs, prefixed, onPath)) return false;
        if (definitely_prefixes(ar, k)) prefixed = true;
      }
      return true;
    }
    default: {
      for (PId k : n.kids)
        if (!weakly_guarded(ar, k, defs, underPrefix, onPath)) return false;
      return true;
    }
  }
}

}  // namespace

void validate_defs(const Arena& ar, const Defs& defs) {
  for (const auto& [name, body] : defs.byName) {
    std::set<std::string> onPath{name};
    if (!weakly_guarded(ar, body, defs, false, onPath))
      throw CtcError(ErrKind::UnguardedRecursion,
                     "constant '" + name + "' is not weakly guarded");
  }
}

// ---------------------------------------------------------------------------
// Pretty

namespace {

// Precedence levels, loosest first.
constexpr int kBox = 0, kSum = 1, kPar = 2, kPost = 3, kChain = 4, kPrim = 5;

int level_of(const Arena& ar, PId p) {
  switch (ar.n(p).k) {
    case PK::Box: return kBox;
    case PK::Sum: return kSum;
    case PK::Par: return kPar;
    case PK::Restrict:
    case PK::Relabel: return kPost;
    case PK::Seq: return kChain;
    default: return kPrim;
  }
}

void pp(const Arena& ar, PId p, int ctx, std::string& out);

void pp_wrap(const Arena& ar, PId p, int ctx, std::string& out) {
  if (level_of(ar, p) < ctx) {
    out += '(';
    pp(ar, p, kBox, out);
    out += ')';
  } else {
    pp(ar, p, ctx, out);
  }
}

void pp_guard(const Arena& ar, GId g, int ctx, std::string& out) {
  const GNode& n = ar.g(g);
  switch (n.k) {
    case GK::Delta: out += "delta"; return;
    case GK::Eps: out += "eps"; return;
    case GK::Atom: out += n.atom; return;
    case GK::Not:
      out += '!';
      pp_guard(ar, n.a, 2, out);
      return;
    case GK::Prod: {
      bool wrap = ctx > 1;
      if (wrap) out += '(';
      pp_guard(ar, n.a, 1, out);
      out += " & ";
      pp_guard(ar, n.b, 2, out);
      if (wrap) out += ')';
      return;
    }
    case GK::Sum: {
      bool wrap = ctx > 0;
      if (wrap) out += '(';
      pp_guard(ar, n.a, 0, out);
      out += " + ";
      pp_guard(ar, n.b, 1, out);
      if (wrap) out += ')';
      return;
    }
  }
}

void pp(const Arena& ar, PId p, int ctx, std::string& out) {
  (void)ctx;
  const PNode& n = ar.n(p);
  switch (n.k) {
    case PK::Nil: out += "nil"; return;
    case PK::Const: out += n.cname; return;
    case PK::Atoms: {
      auto one = [&](const Action& a) {
        out += a.str();
        if (n.key >= 0) out += "[" + std::to_string(n.key) + "]";
      };
      if (n.acts.size() == 1) {
        one(n.acts[0]);
      } else {
        out += '(';
        for (size_t i = 0; i < n.acts.size(); ++i) {
          if (i) out += "||";
          one(n.acts[i]);
        }
        out += ')';
      }
      return;
    }
    case PK::Guard: {
      const GNode& g = ar.g(n.g);
      if (g.k == GK::Eps) {
        out += "eps";
      } else if (g.k == GK::Delta) {
        out += "delta";
      } else {
        out += '{';
        pp_guard(ar, n.g, 0, out);
        out += '}';
      }
      return;
    }
    case PK::Seq: {
      for (size_t i = 0; i < n.kids.size(); ++i) {
        if (i) out += '.';
        pp_wrap(ar, n.kids[i], kPrim, out);
      }
      return;
    }
    case PK::Sum: {
      for (size_t i = 0; i < n.kids.size(); ++i) {
        if (i) out += " + ";
        pp_wrap(ar, n.kids[i], i == 0 ? kSum : kSum + 1, out);
      }
      return;
    }
    case PK::Par: {
      for (size_t i = 0; i < n.kids.size(); ++i) {
        if (i) out += " || ";
        pp_wrap(ar, n.kids[i], i == 0 ? kPar : kPar + 1, out);
      }
      return;
    }
    case PK::Box: {
      // Right-nested display with conditional weights reparses to the same
      // distribution.
      Rat rest(1);
      for (size_t i = 0; i + 1 < n.kids.size(); ++i) {
        pp_wrap(ar, n.kids[i], i == 0 ? kBox : kBox + 1, out);
        Rat pi = n.ws[i] / rest;
        out += " [+" + rat_str(pi) + "] ";
        rest -= n.ws[i];
        if (i + 2 < n.kids.size()) out += '(';
      }
      pp_wrap(ar, n.kids.back(), kBox + 1, out);
      for (size_t i = 0; i + 2 < n.kids.size(); ++i) out += ')';
      return;
    }
    case PK::Restrict: {
      pp_wrap(ar, n.kids[0], kPost, out);
      out += " \\ {";
      for (size_t i = 0; i < n.rset.size(); ++i) {
        if (i) out += ',';
        out += n.rset[i];
      }
      out += '}';
      return;
    }
    case PK::Relabel: {
      pp_wrap(ar, n.kids[0], kPost, out);
      out += " [";
      for (size_t i = 0; i < n.rmap.size(); ++i) {
        if (i) out += ", ";
        out += n.rmap[i].first + "->" + n.rmap[i].second;
      }
      out += ']';
      return;
    }
  }
}

}  // namespace

std::string pretty(const Arena& ar, PId p) {
  std::string out;
  pp(ar, p, kBox, out);
  return out;
}

std::string pretty_guard(const Arena& ar, GId g) {
  std::string out;
  pp_guard(ar, g, 0, out);
  return out;
}

// ---------------------------------------------------------------------------
// Predicates

namespace {

enum class ScanWhat { KeyedAtom, UnkeyedAtom, UnkeyedVisibleAtom };

bool scan_any(const Arena& ar, PId p, const Defs* defs, ScanWhat what,
              std::set<std::string>& seen) {
  const PNode& n = ar.n(p);
  switch (n.k) {
    case PK::Nil:
    case PK::Guard: return false;
    case PK::Atoms:
      switch (what) {
        case ScanWhat::KeyedAtom: return n.key >= 0;
        case ScanWhat::UnkeyedAtom: return n.key < 0;
        case ScanWhat::UnkeyedVisibleAtom:
          if (n.key >= 0) return false;
          for (const auto& a : n.acts)
            if (a.visible()) return true;
          return false;
      }
      return false;
    case PK::Const: {
      if (!defs) return what != ScanWhat::KeyedAtom;
      if (seen.count(n.cname)) return false;
      seen.insert(n.cname);
      auto it = defs->byName.find(n.cname);
      if (it == defs->byName.end())
        throw CtcError(ErrKind::UnknownConstant, "unknown constant '" + n.cname + "'");
      return scan_any(ar, it->second, defs, what, seen);
    }
    default:
      for (PId k : n.kids)
        if (scan_any(ar, k, defs, what, seen)) return true;
      return false;
  }
}

}  // namespace

bool is_std(const Arena& ar, PId p) {
  std::set<std::string> seen;
  return !scan_any(ar, p, nullptr, ScanWhat::KeyedAtom, seen);
}

bool is_nstd(const Arena& ar, PId p) {
  std::set<std::string> seen;
  return !scan_any(ar, p, nullptr, ScanWhat::UnkeyedAtom, seen);
}

bool can_follow_fwd(const Arena& ar, PId p) {
  std::set<std::string> seen;
  return !scan_any(ar, p, nullptr, ScanWhat::UnkeyedAtom, seen);
}

bool can_follow_rev(const Arena& ar, PId p) {
  std::set<std::string> seen;
  return !scan_any(ar, p, nullptr, ScanWhat::UnkeyedVisibleAtom, seen);
}

namespace {

void scan_features_rec(const Arena& ar, PId p, const Defs& defs, Features& f,
                       std::set<std::string>& seen) {
  const PNode& n = ar.n(p);
  switch (n.k) {
    case PK::Nil: return;
    case PK::Atoms:
      if (n.key >= 0) f.usesKeys = true;
      return;
    case PK::Guard: {
      const GNode& g = ar.g(n.g);
      if (g.k != GK::Eps && g.k != GK::Delta) f.usesGuards = true;
      return;
    }
    case PK::Const: {
      if (seen.count(n.cname)) return;
      seen.insert(n.cname);
      scan_features_rec(ar, defs.byName.at(n.cname), defs, f, seen);
      return;
    }
    case PK::Box: f.usesBox = true; [[fallthrough]];
    default:
      for (PId k : n.kids) scan_features_rec(ar, k, defs, f, seen);
      return;
  }
}

SortSet sort_eval(const Arena& ar, PId p, const Defs& defs,
                  const std::map<std::string, SortSet>& cs) {
  const PNode& n = ar.n(p);
  SortSet out;
  switch (n.k) {
    case PK::Nil:
    case PK::Guard: return out;
    case PK::Atoms:
      for (const auto& a : n.acts)
        if (a.visible()) out.insert({a.name, a.co});
      return out;
    case PK::Const: {
      auto it = cs.find(n.cname);
      if (it != cs.end()) return it->second;
      if (!defs.byName.count(n.cname))
        throw CtcError(ErrKind::UnknownConstant, "unknown constant '" + n.cname + "'");
      return out;
    }
    case PK::Restrict: {
      SortSet in = sort_eval(ar, n.kids[0], defs, cs);
      for (const auto& l : in)
        if (std::find(n.rset.begin(), n.rset.end(), l.first) == n.rset.end())
          out.insert(l);
      return out;
    }
    case PK::Relabel: {
      SortSet in = sort_eval(ar, n.kids[0], defs, cs);
      for (const auto& l : in) {
        std::string to = l.first;
        for (const auto& m : n.rmap)
          if (m.first == l.first) {
            to = m.second;
            break;
          }
        out.insert({to, l.second});
      }
      return out;
    }
    default:
      for (PId k : n.kids) {
        SortSet in = sort_eval(ar, k, defs, cs);
        out.insert(in.begin(), in.end());
      }
      return out;
  }
}

}  // namespace

Features scan_features(const Arena& ar, PId p, const Defs& defs) {
  Features f;
  std::set<std::string> seen;
  scan_features_rec(ar, p, defs, f, seen);
  return f;
}

SortSet sort_of(const Arena& ar, PId p, const Defs& defs) {
  std::map<std::string, SortSet> cs;
  for (const auto& [name, _] : defs.byName) cs[name] = {};
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [name, body] : defs.byName) {
      SortSet s = sort_eval(ar, body, defs, cs);
      if (s != cs[name]) {
        cs[name] = std::move(s);
        changed = true;
      }
    }
  }
  return sort_eval(ar, p, defs, cs);
}

void collect_keys(const Arena& ar, PId p, std::set<long long>& out) {
  const PNode& n = ar.n(p);
  if (n.k == PK::Atoms && n.key >= 0) out.insert(n.key);
  for (PId k : n.kids) collect_keys(ar, k, out);
}

}  // namespace ctc
