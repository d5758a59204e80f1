#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ctc/syntax.hpp"

namespace ctc {

using Sid = uint32_t;

// A finite guarded-data model: states carrying atomic propositions, an effect
// table for actions, a partial join on states, and optional declared undos.
struct StateModel {
  std::vector<std::string> stateNames;
  std::map<std::string, Sid> sidOf;
  std::vector<std::set<std::string>> atomsAt;  // per state
  std::set<std::string> atomSet;
  std::map<std::pair<std::string, Sid>, Sid> effects;  // (label name | "tau", from)
  std::map<std::pair<Sid, Sid>, Sid> joins;            // key ordered (min,max)
  std::map<std::pair<std::string, Sid>, Sid> undos;    // (label name, after) -> before

  static StateModel unit();

  size_t nstates() const { return stateNames.size(); }
  const std::string& name(Sid s) const { return stateNames[s]; }
  Sid sid(const std::string& n) const;

  bool test(const Arena& ar, GId g, Sid s) const;
  std::optional<Sid> effect_opt(const Action& a, Sid s) const;
  Sid effect(const Action& a, Sid s) const;  // throws MissingEffect
  std::optional<Sid> join(Sid a, Sid b) const;
  std::optional<Sid> undo_decl(const Action& a, Sid after) const;

  // test of phi at effect(a, s); the weakest-precondition evaluation.
  bool wp_test(const Arena& ar, const Action& a, GId phi, Sid s) const;
};

StateModel parse_model(const std::string& text);

}  // namespace ctc
