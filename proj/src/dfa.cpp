#include "semplan/dfa.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace semplan {

bool Guard::admits(Symbol s) const {
  return std::any_of(cubes.begin(), cubes.end(), [s](const Cube& c) { return c.admits(s); });
}

std::string Guard::render(const std::vector<std::string>& atoms) const {
  if (cubes.empty()) return "false";
  std::string out;
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    if (i) out += " | ";
    const Cube& c = cubes[i];
    if (c.pos == 0 && c.neg == 0) {
      out += "true";
      continue;
    }
    bool first = true;
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      const Symbol bit = Symbol{1} << a;
      if (!((c.pos | c.neg) & bit)) continue;
      if (!first) out += " & ";
      first = false;
      if (c.neg & bit) out += "!";
      out += atoms[a];
    }
  }
  return out;
}

int Dfa::complete_state_count() const {
  // A state is total only if its guards cover every symbol. Guards here only
  // mention the state's relevant atoms, so covering is checked by counting
  // minterms over the union of mentioned atoms.
  for (const auto& out : edges) {
    Symbol mentioned = 0;
    for (const auto& e : out)
      for (const auto& c : e.guard.cubes) mentioned |= c.pos | c.neg;
    std::vector<int> bits;
    for (std::size_t a = 0; a < kMaxAtoms; ++a)
      if (mentioned & (Symbol{1} << a)) bits.push_back(static_cast<int>(a));
    if (out.empty()) return num_states() + 1;
    const std::uint64_t total = std::uint64_t{1} << bits.size();
    for (std::uint64_t m = 0; m < total; ++m) {
      Symbol s = 0;
      for (std::size_t b = 0; b < bits.size(); ++b)
        if (m & (std::uint64_t{1} << b)) s |= Symbol{1} << bits[b];
      const bool covered =
          std::any_of(out.begin(), out.end(), [s](const DfaEdge& e) { return e.guard.admits(s); });
      if (!covered) return num_states() + 1;
    }
  }
  return num_states();
}

int Dfa::atom_index(const std::string& name) const {
  auto it = std::lower_bound(atoms.begin(), atoms.end(), name);
  if (it == atoms.end() || *it != name) return -1;
  return static_cast<int>(it - atoms.begin());
}

Symbol Dfa::symbol_of(const std::set<std::string>& names) const {
  Symbol s = 0;
  for (const auto& n : names) {
    const int i = atom_index(n);
    if (i >= 0) s |= Symbol{1} << i;
  }
  return s;
}

std::set<std::string> Dfa::names_of(Symbol s) const {
  std::set<std::string> out;
  for (std::size_t i = 0; i < atoms.size(); ++i)
    if (s & (Symbol{1} << i)) out.insert(atoms[i]);
  return out;
}

bool Dfa::accepts(std::span<const Symbol> word) const {
  int q = initial;
  if (accepting && q == *accepting) return true;
  for (Symbol s : word) {
    auto n = next_state(*this, q, s);
    if (!n) return false;
    q = *n;
  }
  return accepting && q == *accepting;
}

std::string Dfa::dump() const {
  std::string out;
  for (int q = 0; q < num_states(); ++q) {
    for (const auto& e : edges[q]) {
      out += std::to_string(q);
      out += '\t';
      out += e.guard.render(atoms);
      out += '\t';
      out += std::to_string(e.target);
      out += '\n';
    }
  }
  return out;
}

std::optional<int> next_state(const Dfa& dfa, int q, Symbol s) {
  if (q < 0 || q >= dfa.num_states()) throw std::out_of_range("unknown DFA state " + std::to_string(q));
  for (const auto& e : dfa.edges[q])
    if (e.guard.admits(s)) return e.target;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Compilation: formula progression over obligations.
//
// A DFA state is a positive Boolean combination of obligations kept as an
// antichain of clauses (DNF with absorption). Obligations are Until nodes and
// top-level literals. Each clause is one state of the underlying NFA; the
// clause set is its subset construction.
// ---------------------------------------------------------------------------

namespace {

using Clause = std::vector<int>;  // sorted obligation ids
using Dnf = std::vector<Clause>;  // sorted, absorbed; {} = false, {{}} = true

const Dnf kFalse{};
const Dnf kTrue{Clause{}};

void normalize(Dnf& d) {
  for (auto& c : d) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }
  std::sort(d.begin(), d.end(), [](const Clause& a, const Clause& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  d.erase(std::unique(d.begin(), d.end()), d.end());
  Dnf kept;
  for (auto& c : d) {
    const bool absorbed = std::any_of(kept.begin(), kept.end(), [&](const Clause& k) {
      return std::includes(c.begin(), c.end(), k.begin(), k.end());
    });
    if (!absorbed) kept.push_back(std::move(c));
  }
  std::sort(kept.begin(), kept.end());
  d = std::move(kept);
}

Dnf dnf_or(Dnf a, const Dnf& b) {
  a.insert(a.end(), b.begin(), b.end());
  normalize(a);
  return a;
}

Dnf dnf_and(const Dnf& a, const Dnf& b) {
  Dnf out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a)
    for (const auto& y : b) {
      Clause c = x;
      c.insert(c.end(), y.begin(), y.end());
      out.push_back(std::move(c));
    }
  normalize(out);
  return out;
}

struct Node {
  FormulaKind kind;
  int atom = -1;
  int lhs = -1;
  int rhs = -1;
  Symbol atoms_mask = 0;
};

class Compiler {
 public:
  Compiler(const Formula& f, const CompileOptions& opt) : opt_(opt) {
    const auto names = f.atoms();
    atoms_.assign(names.begin(), names.end());
    if (atoms_.size() > kMaxAtoms)
      throw DfaCompileError("formula uses more than 64 atoms");
    root_ = intern(f);
  }

  Dfa run() {
    Dfa dfa;
    dfa.atoms = atoms_;
    std::map<Dnf, int> ids;
    std::vector<Dnf> states;
    std::deque<int> queue;

    auto discover = [&](const Dnf& d) {
      auto [it, fresh] = ids.emplace(d, static_cast<int>(states.size()));
      if (fresh) {
        if (states.size() >= opt_.max_states)
          throw DfaCompileError("DFA state cap of " + std::to_string(opt_.max_states) + " exceeded");
        states.push_back(d);
        dfa.edges.emplace_back();
        queue.push_back(it->second);
      }
      return it->second;
    };

    discover(expand(root_));
    while (!queue.empty()) {
      const int q = queue.front();
      queue.pop_front();
      const Dnf cur = states[q];
      if (cur == kTrue) dfa.accepting = q;

      Symbol relevant = 0;
      for (const auto& c : cur)
        for (int ob : c) relevant |= nodes_[ob_node_[ob]].atoms_mask;
      std::vector<int> bits;
      for (std::size_t a = 0; a < atoms_.size(); ++a)
        if (relevant & (Symbol{1} << a)) bits.push_back(static_cast<int>(a));
      if (static_cast<int>(bits.size()) > opt_.max_state_atoms)
        throw DfaCompileError("a DFA state depends on more than " +
                              std::to_string(opt_.max_state_atoms) + " atoms");

      std::vector<int> target_order;
      std::unordered_map<int, std::vector<std::uint32_t>> minterms;
      const std::uint32_t total = std::uint32_t{1} << bits.size();
      for (std::uint32_t m = 0; m < total; ++m) {
        Symbol s = 0;
        for (std::size_t b = 0; b < bits.size(); ++b)
          if (m & (1u << b)) s |= Symbol{1} << bits[b];
        Dnf succ = kFalse;
        for (const auto& c : cur) {
          Dnf conj = kTrue;
          for (int ob : c) {
            conj = dnf_and(conj, prog(ob_node_[ob], s));
            if (conj.empty()) break;
          }
          succ = dnf_or(std::move(succ), conj);
        }
        if (succ.empty()) continue;
        const int t = discover(succ);
        auto& list = minterms[t];
        if (list.empty()) target_order.push_back(t);
        list.push_back(m);
      }
      for (int t : target_order) {
        dfa.edges[q].push_back({cover(minterms[t], bits), t});
      }
    }
    return dfa;
  }

 private:
  int intern(const Formula& f) {
    const std::string key = f.to_string();
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Node n{f.kind};
    switch (f.kind) {
      case FormulaKind::True:
        break;
      case FormulaKind::Atom:
      case FormulaKind::Not: {
        n.atom = static_cast<int>(std::lower_bound(atoms_.begin(), atoms_.end(), f.atom) -
                                  atoms_.begin());
        n.atoms_mask = Symbol{1} << n.atom;
        break;
      }
      default:
        n.lhs = intern(f.children[0]);
        n.rhs = intern(f.children[1]);
        n.atoms_mask = nodes_[n.lhs].atoms_mask | nodes_[n.rhs].atoms_mask;
    }
    nodes_.push_back(n);
    const int id = static_cast<int>(nodes_.size()) - 1;
    memo_.emplace(key, id);
    return id;
  }

  int obligation(int node) {
    if (auto it = node_ob_.find(node); it != node_ob_.end()) return it->second;
    const int ob = static_cast<int>(ob_node_.size());
    ob_node_.push_back(node);
    node_ob_.emplace(node, ob);
    return ob;
  }

  // Initial state: Boolean structure unfolded, temporal parts and literals
  // deferred as obligations.
  Dnf expand(int id) {
    const Node& n = nodes_[id];
    switch (n.kind) {
      case FormulaKind::True:
        return kTrue;
      case FormulaKind::And:
        return dnf_and(expand(n.lhs), expand(n.rhs));
      case FormulaKind::Or:
        return dnf_or(expand(n.lhs), expand(n.rhs));
      case FormulaKind::Until:
        // phi U psi already holds when psi is valid
        if (expand(n.rhs) == kTrue) return kTrue;
        return Dnf{Clause{obligation(id)}};
      default:
        return Dnf{Clause{obligation(id)}};
    }
  }

  Dnf prog(int id, Symbol s) {
    const Node n = nodes_[id];
    switch (n.kind) {
      case FormulaKind::True:
        return kTrue;
      case FormulaKind::Atom:
        return (s & n.atoms_mask) ? kTrue : kFalse;
      case FormulaKind::Not:
        return (s & n.atoms_mask) ? kFalse : kTrue;
      case FormulaKind::And: {
        Dnf l = prog(n.lhs, s);
        if (l.empty()) return kFalse;
        return dnf_and(l, prog(n.rhs, s));
      }
      case FormulaKind::Or:
        return dnf_or(prog(n.lhs, s), prog(n.rhs, s));
      case FormulaKind::Until: {
        const int self = obligation(id);
        Dnf keep = dnf_and(prog(n.lhs, s), Dnf{Clause{self}});
        return dnf_or(prog(n.rhs, s), keep);
      }
    }
    return kFalse;
  }

  // Prime implicants of the minterm set (local bit space), then a greedy
  // cover, largest implicants first.
  Guard cover(const std::vector<std::uint32_t>& minterms, const std::vector<int>& bits) const {
    struct LocalCube {
      std::uint32_t value;
      std::uint32_t dc;
      bool operator==(const LocalCube&) const = default;
    };
    struct Hash {
      std::size_t operator()(const LocalCube& c) const {
        return std::hash<std::uint64_t>()((std::uint64_t{c.dc} << 32) | c.value);
      }
    };
    const std::size_t k = bits.size();
    std::vector<LocalCube> level;
    for (auto m : minterms) level.push_back({m, 0});
    std::vector<LocalCube> primes;
    while (!level.empty()) {
      std::unordered_set<LocalCube, Hash> present(level.begin(), level.end());
      std::unordered_set<LocalCube, Hash> merged_away;
      std::vector<LocalCube> next;
      std::unordered_set<LocalCube, Hash> next_set;
      for (const auto& c : level) {
        for (std::size_t b = 0; b < k; ++b) {
          const std::uint32_t bit = 1u << b;
          if ((c.dc & bit) || (c.value & bit)) continue;
          LocalCube partner{c.value | bit, c.dc};
          if (!present.count(partner)) continue;
          merged_away.insert(c);
          merged_away.insert(partner);
          LocalCube m{c.value, c.dc | bit};
          if (next_set.insert(m).second) next.push_back(m);
        }
      }
      for (const auto& c : level)
        if (!merged_away.count(c)) primes.push_back(c);
      level = std::move(next);
    }
    std::stable_sort(primes.begin(), primes.end(), [](const LocalCube& a, const LocalCube& b) {
      const int pa = std::popcount(a.dc), pb = std::popcount(b.dc);
      if (pa != pb) return pa > pb;
      if (a.dc != b.dc) return a.dc < b.dc;
      return a.value < b.value;
    });
    std::unordered_set<std::uint32_t> uncovered(minterms.begin(), minterms.end());
    Guard g;
    for (const auto& p : primes) {
      if (uncovered.empty()) break;
      bool useful = false;
      // Enumerate the minterms of p via subsets of its don't-care mask.
      std::uint32_t sub = p.dc;
      while (true) {
        const std::uint32_t m = p.value | sub;
        if (uncovered.erase(m)) useful = true;
        if (sub == 0) break;
        sub = (sub - 1) & p.dc;
      }
      if (!useful) continue;
      Cube c;
      for (std::size_t b = 0; b < k; ++b) {
        const std::uint32_t bit = 1u << b;
        if (p.dc & bit) continue;
        if (p.value & bit) c.pos |= Symbol{1} << bits[b];
        else c.neg |= Symbol{1} << bits[b];
      }
      g.cubes.push_back(c);
    }
    return g;
  }

  CompileOptions opt_;
  std::vector<std::string> atoms_;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, int> memo_;
  std::vector<int> ob_node_;
  std::unordered_map<int, int> node_ob_;
  int root_ = -1;
};

}  // namespace

Dfa compile_to_dfa(const Formula& f, const CompileOptions& options) {
  return Compiler(f, options).run();
}

// ---------------------------------------------------------------------------
// Pruning and distances
// ---------------------------------------------------------------------------

bool symbol_infeasible(Symbol s, std::span<const AtomMeta> meta) {
  std::map<int, int> landmark_of;  // robot -> landmark
  std::map<int, int> class_of;     // robot -> class
  for (std::size_t a = 0; a < meta.size() && a < kMaxAtoms; ++a) {
    if (!(s & (Symbol{1} << a))) continue;
    const AtomMeta& m = meta[a];
    if (m.robot < 0 || m.binding == AtomBinding::None) continue;
    auto& table = m.binding == AtomBinding::Landmark ? landmark_of : class_of;
    auto [it, fresh] = table.emplace(m.robot, m.target);
    if (!fresh && it->second != m.target) return true;
  }
  return false;
}

PrunedDfaIndex::PrunedDfaIndex(const Dfa& dfa, std::vector<std::vector<PrunedEdge>> edges)
    : edges_(std::move(edges)), initial_(dfa.initial), accepting_(dfa.accepting) {
  for (int q = 0; q < dfa.num_states(); ++q) removed_ += dfa.edges[q].size() - edges_[q].size();
  const int n = num_states();
  to_accept_.assign(n, -1);
  if (accepting_) {
    std::vector<std::vector<int>> rev(n);
    for (int q = 0; q < n; ++q)
      for (const auto& e : edges_[q]) rev[e.target].push_back(q);
    std::deque<int> queue{*accepting_};
    to_accept_[*accepting_] = 0;
    while (!queue.empty()) {
      const int q = queue.front();
      queue.pop_front();
      for (int p : rev[q])
        if (to_accept_[p] < 0) {
          to_accept_[p] = to_accept_[q] + 1;
          queue.push_back(p);
        }
    }
  }
  if (n <= 1024) {
    all_.reserve(n);
    for (int q = 0; q < n; ++q) all_.push_back(bfs_from(q));
  }
}

void PrunedDfaIndex::check_state(int q) const {
  if (q < 0 || q >= num_states()) throw std::out_of_range("unknown DFA state " + std::to_string(q));
}

const std::vector<PrunedEdge>& PrunedDfaIndex::out_edges(int q) const {
  check_state(q);
  return edges_[q];
}

std::vector<int> PrunedDfaIndex::bfs_from(int src) const {
  std::vector<int> dist(num_states(), -1);
  dist[src] = 0;
  std::deque<int> queue{src};
  while (!queue.empty()) {
    const int q = queue.front();
    queue.pop_front();
    for (const auto& e : edges_[q])
      if (dist[e.target] < 0) {
        dist[e.target] = dist[q] + 1;
        queue.push_back(e.target);
      }
  }
  return dist;
}

std::optional<int> PrunedDfaIndex::distance(int from, int to) const {
  check_state(from);
  check_state(to);
  const int d = all_.empty() ? bfs_from(from)[to] : all_[from][to];
  if (d < 0) return std::nullopt;
  return d;
}

std::optional<int> PrunedDfaIndex::distance_to_accept(int q) const {
  check_state(q);
  if (to_accept_[q] < 0) return std::nullopt;
  return to_accept_[q];
}

bool PrunedDfaIndex::feasible() const {
  return accepting_ && to_accept_[initial_] >= 0;
}

PrunedDfaIndex prune_dfa(const Dfa& dfa, std::span<const AtomMeta> meta) {
  std::vector<std::vector<PrunedEdge>> edges(dfa.num_states());
  for (int q = 0; q < dfa.num_states(); ++q) {
    for (const auto& e : dfa.edges[q]) {
      PrunedEdge pe{{}, e.guard, e.target};
      for (const auto& c : e.guard.cubes)
        if (!symbol_infeasible(c.pos, meta)) pe.guard.cubes.push_back(c);
      if (!pe.guard.is_false()) edges[q].push_back(std::move(pe));
    }
  }
  return PrunedDfaIndex(dfa, std::move(edges));
}

PrunedDfaIndex unpruned_index(const Dfa& dfa) {
  std::vector<std::vector<PrunedEdge>> edges(dfa.num_states());
  for (int q = 0; q < dfa.num_states(); ++q)
    for (const auto& e : dfa.edges[q]) edges[q].push_back({e.guard, e.guard, e.target});
  return PrunedDfaIndex(dfa, std::move(edges));
}

std::optional<int> dfa_distance(const PrunedDfaIndex& idx, int from, int to) {
  return idx.distance(from, to);
}

std::vector<int> reachable_min_set(const PrunedDfaIndex& idx, int q_next, int q_final) {
  std::vector<int> best;
  std::optional<int> best_d;
  bool first = true;
  for (const auto& e : idx.out_edges(q_next)) {
    const auto d = idx.distance(e.target, q_final);
    // nullopt (infinite) ranks after every finite distance
    const bool better = first || (d && (!best_d || *d < *best_d));
    const bool equal = !first && d == best_d;
    if (better) {
      best = {e.target};
      best_d = d;
      first = false;
    } else if (equal && std::find(best.begin(), best.end(), e.target) == best.end()) {
      best.push_back(e.target);
    }
  }
  std::sort(best.begin(), best.end());
  return best;
}

const PrunedEdge* find_pruned_edge(const PrunedDfaIndex& idx, int q_next, int q_min) {
  for (const auto& e : idx.out_edges(q_next))
    if (e.target == q_min) return &e;
  return nullptr;
}

namespace {

// Lexicographic order of the sorted atom-index lists of two symbols.
bool lex_less(Symbol a, Symbol b) {
  while (a && b) {
    const int ia = std::countr_zero(a), ib = std::countr_zero(b);
    if (ia != ib) return ia < ib;
    a &= a - 1;
    b &= b - 1;
  }
  return b != 0;
}

}  // namespace

Symbol select_transition_symbol(const PrunedDfaIndex& idx, int q_next, int q_min) {
  const PrunedEdge* e = find_pruned_edge(idx, q_next, q_min);
  if (!e || e->guard.is_false())
    throw std::invalid_argument("no pruned transition " + std::to_string(q_next) + " -> " +
                                std::to_string(q_min));
  Symbol best = e->guard.cubes.front().pos;
  for (const auto& c : e->guard.cubes) {
    const int pc = std::popcount(c.pos), pb = std::popcount(best);
    if (pc < pb || (pc == pb && lex_less(c.pos, best))) best = c.pos;
  }
  return best;
}

}  // namespace semplan
