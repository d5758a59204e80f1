#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ctc/rational.hpp"

namespace ctc {

// ---------------------------------------------------------------------------
// Errors

enum class ErrKind {
  Syntax,
  UnknownConstant,
  BadProbability,
  UnknownAtom,
  MissingEffect,
  NonJoinableStates,
  UnknownKey,
  UnguardedRecursion,
  StateSpaceBoundExceeded,
  BoundExceeded,
  ShapeError,
  IncompatibleModels,
  TooLarge,
  UnstablePartition,
  FeatureDisabled,
  ModelError,
  Usage,
};

struct CtcError : std::runtime_error {
  ErrKind kind;
  CtcError(ErrKind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// ---------------------------------------------------------------------------
// Actions

enum class ActKind : uint8_t { Lbl, Tau };

struct Action {
  ActKind kind = ActKind::Tau;
  std::string name;  // Lbl only
  bool co = false;   // Lbl only

  static Action tau() { return Action{}; }
  static Action lbl(std::string n, bool co_ = false) {
    Action a;
    a.kind = ActKind::Lbl;
    a.name = std::move(n);
    a.co = co_;
    return a;
  }
  bool visible() const { return kind == ActKind::Lbl; }
  Action comp() const {
    Action a = *this;
    if (a.kind == ActKind::Lbl) a.co = !a.co;
    return a;
  }
  bool is_comp_of(const Action& o) const {
    return kind == ActKind::Lbl && o.kind == ActKind::Lbl && name == o.name && co != o.co;
  }
  std::string str() const {
    if (kind == ActKind::Tau) return "tau";
    return co ? "'" + name : name;
  }
  friend bool operator==(const Action& a, const Action& b) {
    return a.kind == b.kind && a.name == b.name && a.co == b.co;
  }
  friend bool operator<(const Action& a, const Action& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.name != b.name) return a.name < b.name;
    return a.co < b.co;
  }
};

// ---------------------------------------------------------------------------
// Guards

using GId = uint32_t;

enum class GK : uint8_t { Delta, Eps, Atom, Not, Sum, Prod };

struct GNode {
  GK k = GK::Eps;
  std::string atom;  // Atom
  GId a = 0, b = 0;  // Not: a; Sum/Prod: a,b
};

// ---------------------------------------------------------------------------
// Processes (hash-consed in an Arena)

using PId = uint32_t;

enum class PK : uint8_t { Nil, Const, Atoms, Guard, Seq, Sum, Box, Par, Restrict, Relabel };

struct PNode {
  PK k = PK::Nil;
  std::vector<Action> acts;  // Atoms: the action vector
  long long key = -1;        // Atoms: shared key, -1 = unkeyed
  GId g = 0;                 // Guard
  std::string cname;         // Const
  std::vector<PId> kids;     // Seq/Sum/Par: n-ary (>= 2 for Sum/Par, >= 2 for Seq); Box kids
  std::vector<Rat> ws;       // Box: weights parallel to kids
  std::vector<std::string> rset;                          // Restrict: sorted label names
  std::vector<std::pair<std::string, std::string>> rmap;  // Relabel: sorted (from -> to)
};

class Arena {
 public:
  Arena();

  GId g_delta() { return g_intern(GNode{GK::Delta, "", 0, 0}); }
  GId g_eps() { return g_intern(GNode{GK::Eps, "", 0, 0}); }
  GId g_atom(const std::string& a) { return g_intern(GNode{GK::Atom, a, 0, 0}); }
  GId g_not(GId x) { return g_intern(GNode{GK::Not, "", x, 0}); }
  GId g_sum(GId x, GId y) { return g_intern(GNode{GK::Sum, "", x, y}); }
  GId g_prod(GId x, GId y) { return g_intern(GNode{GK::Prod, "", x, y}); }
  const GNode& g(GId id) const { return gnodes_[id]; }

  PId nil();
  PId constant(const std::string& name);
  PId atoms(std::vector<Action> acts, long long key = -1);
  PId guard(GId g);
  PId seq(std::vector<PId> kids);
  PId seq2(PId a, PId b) { return seq({a, b}); }
  PId sum(std::vector<PId> kids);
  PId sum2(PId a, PId b) { return sum({a, b}); }
  PId box(std::vector<PId> kids, std::vector<Rat> ws);
  PId box2(const Rat& pi, PId a, PId b) { return box({a, b}, {pi, Rat(1) - pi}); }
  PId par(std::vector<PId> kids);
  PId par2(PId a, PId b) { return par({a, b}); }
  PId restrict_(PId p, std::vector<std::string> labels);
  PId relabel(PId p, std::vector<std::pair<std::string, std::string>> map);

  const PNode& n(PId id) const { return pnodes_[id]; }
  size_t size() const { return pnodes_.size(); }

  // Structural total order, stable across arenas.
  int cmp(PId a, PId b) const;
  int gcmp(GId a, GId b) const;

 private:
  GId g_intern(GNode n);
  PId p_intern(PNode n);
  std::vector<GNode> gnodes_;
  std::unordered_map<std::string, GId> gmap_;
  std::vector<PNode> pnodes_;
  std::unordered_map<std::string, PId> pmap_;
};

// ---------------------------------------------------------------------------
// Definitions

struct Defs {
  std::map<std::string, PId> byName;
  bool has(const std::string& n) const { return byName.count(n) != 0; }
};

// Parses `Name := term` lines; '#' starts a comment.
Defs parse_defs(const std::string& text, Arena& ar);

// Weak guardedness: every constant occurrence sits under an action prefix.
void validate_defs(const Arena& ar, const Defs& defs);

// ---------------------------------------------------------------------------
// Parse / pretty

PId parse_process(const std::string& text, Arena& ar, const Defs& defs);
std::string pretty(const Arena& ar, PId p);
std::string pretty_guard(const Arena& ar, GId g);

// ---------------------------------------------------------------------------
// Structural predicates

bool is_std(const Arena& ar, PId p);   // no keyed action anywhere
bool is_nstd(const Arena& ar, PId p);  // no unkeyed action anywhere

// Gates for the right-hand side of a sequential composition.
bool can_follow_fwd(const Arena& ar, PId p);  // no unkeyed atom at all
bool can_follow_rev(const Arena& ar, PId p);  // no unkeyed visible atom

// Feature scan for chapter gating.
struct Features {
  bool usesBox = false;
  bool usesKeys = false;
  bool usesGuards = false;
};
Features scan_features(const Arena& ar, PId p, const Defs& defs);

// Label sort L(p); labels as (name, co) pairs.
using SortSet = std::set<std::pair<std::string, bool>>;
SortSet sort_of(const Arena& ar, PId p, const Defs& defs);

// All keys in p.
void collect_keys(const Arena& ar, PId p, std::set<long long>& out);

}  // namespace ctc
