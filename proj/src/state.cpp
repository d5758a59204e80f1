#include "ctc/state.hpp"

#include <sstream>

namespace ctc {

StateModel StateModel::unit() {
  StateModel m;
  m.stateNames.push_back("s0");
  m.sidOf["s0"] = 0;
  m.atomsAt.push_back({});
  return m;
}

Sid StateModel::sid(const std::string& n) const {
  auto it = sidOf.find(n);
  if (it == sidOf.end())
    throw CtcError(ErrKind::ModelError, "unknown state '" + n + "'");
  return it->second;
}

bool StateModel::test(const Arena& ar, GId g, Sid s) const {
  const GNode& n = ar.g(g);
  switch (n.k) {
    case GK::Eps: return true;
    case GK::Delta: return false;
    case GK::Atom:
      if (!atomSet.count(n.atom))
        throw CtcError(ErrKind::UnknownAtom, "unknown atom '" + n.atom + "'");
      return atomsAt[s].count(n.atom) != 0;
    case GK::Not: return !test(ar, n.a, s);
    case GK::Sum: return test(ar, n.a, s) || test(ar, n.b, s);
    case GK::Prod: return test(ar, n.a, s) && test(ar, n.b, s);
  }
  return false;
}

std::optional<Sid> StateModel::effect_opt(const Action& a, Sid s) const {
  std::string key = a.visible() ? a.name : "tau";
  auto it = effects.find({key, s});
  if (it != effects.end()) return it->second;
  if (nstates() == 1) return s;
  if (!a.visible()) return s;
  return std::nullopt;
}

Sid StateModel::effect(const Action& a, Sid s) const {
  auto r = effect_opt(a, s);
  if (!r)
    throw CtcError(ErrKind::MissingEffect, "no effect for action '" + a.str() +
                                               "' at state '" + name(s) + "'");
  return *r;
}

std::optional<Sid> StateModel::join(Sid a, Sid b) const {
  if (a == b) return a;
  auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  auto it = joins.find(key);
  if (it != joins.end()) return it->second;
  return std::nullopt;
}

std::optional<Sid> StateModel::undo_decl(const Action& a, Sid after) const {
  std::string key = a.visible() ? a.name : "tau";
  auto it = undos.find({key, after});
  if (it != undos.end()) return it->second;
  return std::nullopt;
}

bool StateModel::wp_test(const Arena& ar, const Action& a, GId phi, Sid s) const {
  return test(ar, phi, effect(a, s));
}

namespace {

std::vector<std::string> words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return std::islower(static_cast<unsigned char>(s[0])) ||
         std::isdigit(static_cast<unsigned char>(s[0]));
}

}  // namespace

StateModel parse_model(const std::string& text) {
  StateModel m;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto err = [&](const std::string& msg) -> CtcError {
    return CtcError(ErrKind::ModelError, "model line " + std::to_string(lineno) + ": " + msg);
  };
  struct Pending {
    std::string kind, label, from, to, from2;
    int lineno;
  };
  std::vector<Pending> pending;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto ws = words(line);
    if (ws.empty()) continue;
    if (ws[0] == "atoms:" || (ws[0] == "atoms" && ws.size() > 1 && ws[1] == ":")) {
      size_t start = ws[0] == "atoms:" ? 1 : 2;
      for (size_t i = start; i < ws.size(); ++i) {
        if (!valid_name(ws[i])) throw err("bad atom name '" + ws[i] + "'");
        m.atomSet.insert(ws[i]);
      }
      continue;
    }
    if (ws[0] == "state") {
      if (ws.size() < 2) throw err("state needs a name");
      std::string name = ws[1];
      size_t start = 2;
      if (!name.empty() && name.back() == ':') {
        name.pop_back();
      } else if (ws.size() > 2 && ws[2] == ":") {
        start = 3;
      }
      if (!valid_name(name)) throw err("bad state name '" + name + "'");
      if (m.sidOf.count(name)) throw err("state '" + name + "' declared twice");
      Sid s = static_cast<Sid>(m.stateNames.size());
      m.sidOf[name] = s;
      m.stateNames.push_back(name);
      std::set<std::string> atoms;
      for (size_t i = start; i < ws.size(); ++i) {
        if (!m.atomSet.count(ws[i])) throw err("atom '" + ws[i] + "' not declared");
        atoms.insert(ws[i]);
      }
      m.atomsAt.push_back(std::move(atoms));
      continue;
    }
    if (ws[0] == "effect" || ws[0] == "undo") {
      if (ws.size() != 5 || ws[3] != "->")
        throw err("expected '" + ws[0] + " <action> <state> -> <state>'");
      pending.push_back({ws[0], ws[1], ws[2], ws[4], "", lineno});
      continue;
    }
    if (ws[0] == "join") {
      if (ws.size() != 6 || ws[4] != "->")
        throw err("expected 'join <state> <state> -> <state>'");
      pending.push_back({"join", "", ws[1], ws[5], ws[2], lineno});
      continue;
    }
    throw err("unrecognized directive '" + ws[0] + "'");
  }
  if (m.stateNames.empty()) {
    m.stateNames.push_back("s0");
    m.sidOf["s0"] = 0;
    m.atomsAt.push_back({});
  }
  for (const auto& p : pending) {
    lineno = p.lineno;
    auto lookup = [&](const std::string& n) -> Sid {
      auto it = m.sidOf.find(n);
      if (it == m.sidOf.end()) throw err("unknown state '" + n + "'");
      return it->second;
    };
    if (p.kind == "join") {
      Sid a = lookup(p.from), b = lookup(p.from2), c = lookup(p.to);
      if (a == b && a != c) throw err("join of a state with itself must be that state");
      auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
      auto it = m.joins.find(key);
      if (it != m.joins.end() && it->second != c) throw err("conflicting join declared");
      m.joins[key] = c;
    } else {
      std::string label = p.label;
      if (!label.empty() && label[0] == '\'') label = label.substr(1);
      if (label != "tau" && !valid_name(label)) throw err("bad action name '" + p.label + "'");
      Sid a = lookup(p.from), b = lookup(p.to);
      auto& tab = p.kind == "effect" ? m.effects : m.undos;
      auto it = tab.find({label, a});
      if (it != tab.end() && it->second != b)
        throw err("conflicting " + p.kind + " declared for '" + label + "'");
      tab[{label, a}] = b;
    }
  }
  return m;
}

}  // namespace ctc
