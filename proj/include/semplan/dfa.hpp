// Deterministic automata for co-safe LTL tasks, plus the pruned-graph index
// used to bias sampling toward the accepting state.

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "semplan/ltl.hpp"

namespace semplan {

/// A symbol is the set of TRUE atoms, one bit per index into Dfa::atoms.
using Symbol = std::uint64_t;
inline constexpr std::size_t kMaxAtoms = 64;

/// Conjunction of literals: all `pos` atoms true, all `neg` atoms false.
struct Cube {
  Symbol pos = 0;
  Symbol neg = 0;

  bool admits(Symbol s) const { return (s & pos) == pos && (s & neg) == 0; }
  bool operator==(const Cube&) const = default;
};

/// Transition guard in disjunctive normal form. An empty cube list is false.
struct Guard {
  std::vector<Cube> cubes;

  bool admits(Symbol s) const;
  bool is_false() const { return cubes.empty(); }
  std::string render(const std::vector<std::string>& atoms) const;
};

struct DfaEdge {
  Guard guard;
  int target = -1;
};

class Dfa {
 public:
  std::vector<std::string> atoms;  // sorted by name; bit i of a Symbol is atoms[i]
  int initial = 0;
  std::optional<int> accepting;
  std::vector<std::vector<DfaEdge>> edges;  // outgoing edges, guards pairwise disjoint

  int num_states() const { return static_cast<int>(edges.size()); }
  /// State count of the completed automaton: an explicit rejecting sink is
  /// counted when some (state, symbol) pair has no successor.
  int complete_state_count() const;

  int atom_index(const std::string& name) const;
  Symbol symbol_of(const std::set<std::string>& names) const;
  std::set<std::string> names_of(Symbol s) const;

  /// Whether reading `word` from the initial state ends in the accepting state.
  bool accepts(std::span<const Symbol> word) const;

  /// One line per transition, `state TAB guard TAB state`.
  std::string dump() const;
};

/// delta(q, s), or nullopt when the symbol violates the formula.
std::optional<int> next_state(const Dfa& dfa, int q, Symbol s);

struct CompileOptions {
  std::size_t max_states = 100000;
  int max_state_atoms = 20;  // atoms referenced by a single state's obligations
};

class DfaCompileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Dfa compile_to_dfa(const Formula& f, const CompileOptions& options = {});

/// What an atom talks about, for pruning and landmark assignment.
enum class AtomBinding { None, Landmark, Class };

struct AtomMeta {
  int robot = -1;
  AtomBinding binding = AtomBinding::None;
  int target = -1;  // landmark id or class index
};

/// True if one robot would need to be near two different landmarks (or two
/// different required classes) at the same time.
bool symbol_infeasible(Symbol s, std::span<const AtomMeta> meta);

struct PrunedEdge {
  Guard guard;       // cubes whose minimal symbol is feasible
  Guard full_guard;  // the unpruned guard
  int target = -1;
};

class PrunedDfaIndex {
 public:
  PrunedDfaIndex() = default;
  PrunedDfaIndex(const Dfa& dfa, std::vector<std::vector<PrunedEdge>> edges);

  int num_states() const { return static_cast<int>(edges_.size()); }
  std::optional<int> accepting() const { return accepting_; }
  int initial() const { return initial_; }
  const std::vector<PrunedEdge>& out_edges(int q) const;

  /// Hop count of the shortest pruned path, nullopt when none exists.
  std::optional<int> distance(int from, int to) const;
  std::optional<int> distance_to_accept(int q) const;

  /// False when the pruned graph has no initial -> accepting path.
  bool feasible() const;
  std::size_t removed_transitions() const { return removed_; }

 private:
  void check_state(int q) const;
  std::vector<int> bfs_from(int src) const;

  std::vector<std::vector<PrunedEdge>> edges_;
  int initial_ = 0;
  std::optional<int> accepting_;
  std::vector<int> to_accept_;         // -1 = unreachable
  std::vector<std::vector<int>> all_;  // all-pairs table, filled for small automata
  std::size_t removed_ = 0;
};

PrunedDfaIndex prune_dfa(const Dfa& dfa, std::span<const AtomMeta> meta);
/// Index over the original transitions (no pruning).
PrunedDfaIndex unpruned_index(const Dfa& dfa);

std::optional<int> dfa_distance(const PrunedDfaIndex& idx, int from, int to);

/// One-hop pruned successors of `q_next` closest to `q_final`.
std::vector<int> reachable_min_set(const PrunedDfaIndex& idx, int q_next, int q_final);

/// The enabling symbol of q_next -> q_min with fewest true atoms, ties broken
/// lexicographically by atom name. Throws if the pruned edge does not exist.
Symbol select_transition_symbol(const PrunedDfaIndex& idx, int q_next, int q_min);

/// The pruned edge q_next -> q_min, or nullptr.
const PrunedEdge* find_pruned_edge(const PrunedDfaIndex& idx, int q_next, int q_min);

}  // namespace semplan
