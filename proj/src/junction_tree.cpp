#include "cautious/junction_tree.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

#include "cautious/cautious.hpp"

namespace cautious {

namespace {

Domain intersection(const Domain& a, const Domain& b) {
  std::vector<VarId> vars;
  std::vector<int> cards;
  for (std::size_t i = 0; i < a.arity(); ++i) {
    const int p = b.position(a.vars()[i]);
    if (p < 0) continue;
    if (b.cards()[static_cast<std::size_t>(p)] != a.cards()[i]) {
      throw StructuralError("junction tree: cliques disagree on a cardinality");
    }
    vars.push_back(a.vars()[i]);
    cards.push_back(a.cards()[i]);
  }
  return Domain(std::move(vars), std::move(cards));
}

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<std::size_t>(b)] = a;
    return true;
  }
};

std::vector<std::set<VarId>> moral_graph(const BayesianNetwork& net) {
  std::vector<std::set<VarId>> adj(net.size());
  auto link = [&](VarId a, VarId b) {
    adj[static_cast<std::size_t>(a)].insert(b);
    adj[static_cast<std::size_t>(b)].insert(a);
  };
  for (std::size_t v = 0; v < net.size(); ++v) {
    const auto& ps = net.parents(static_cast<VarId>(v));
    for (std::size_t i = 0; i < ps.size(); ++i) {
      link(static_cast<VarId>(v), ps[i]);
      for (std::size_t j = i + 1; j < ps.size(); ++j) link(ps[i], ps[j]);
    }
  }
  return adj;
}

std::size_t fill_in(const std::vector<std::set<VarId>>& adj, VarId v) {
  const auto& nb = adj[static_cast<std::size_t>(v)];
  std::size_t fill = 0;
  for (auto i = nb.begin(); i != nb.end(); ++i) {
    for (auto j = std::next(i); j != nb.end(); ++j) {
      if (!adj[static_cast<std::size_t>(*i)].contains(*j)) ++fill;
    }
  }
  return fill;
}

// Runs min-fill elimination and returns the order plus the elimination cliques.
std::pair<std::vector<VarId>, std::vector<std::vector<VarId>>> eliminate(const BayesianNetwork& net) {
  auto adj = moral_graph(net);
  std::vector<bool> done(net.size(), false);
  std::vector<VarId> order;
  std::vector<std::vector<VarId>> cliques;
  for (std::size_t step = 0; step < net.size(); ++step) {
    VarId best = -1;
    std::size_t best_fill = 0;
    for (std::size_t v = 0; v < net.size(); ++v) {
      if (done[v]) continue;
      const std::size_t f = fill_in(adj, static_cast<VarId>(v));
      if (best < 0 || f < best_fill) {
        best = static_cast<VarId>(v);
        best_fill = f;
      }
    }
    const auto nb = adj[static_cast<std::size_t>(best)];
    for (auto i = nb.begin(); i != nb.end(); ++i) {
      for (auto j = std::next(i); j != nb.end(); ++j) {
        adj[static_cast<std::size_t>(*i)].insert(*j);
        adj[static_cast<std::size_t>(*j)].insert(*i);
      }
    }
    std::vector<VarId> clique(nb.begin(), nb.end());
    clique.push_back(best);
    std::sort(clique.begin(), clique.end());
    cliques.push_back(std::move(clique));
    for (VarId u : nb) adj[static_cast<std::size_t>(u)].erase(best);
    adj[static_cast<std::size_t>(best)].clear();
    done[static_cast<std::size_t>(best)] = true;
    order.push_back(best);
  }
  return {order, cliques};
}

}  // namespace

std::vector<VarId> min_fill_order(const BayesianNetwork& net) { return eliminate(net).first; }

JunctionTree JunctionTree::from_parts(std::vector<Variable> variables, std::vector<Potential> clique_potentials,
                                      const std::vector<std::pair<int, int>>& edges, std::vector<int> home,
                                      std::vector<std::vector<VarId>> family_of, int root) {
  JunctionTree jt;
  const std::size_t n = clique_potentials.size();
  if (n == 0) throw StructuralError("junction tree: no cliques");
  if (edges.size() + 1 != n) throw StructuralError("junction tree: a tree on n cliques needs n-1 edges");
  if (root < 0 || static_cast<std::size_t>(root) >= n) throw StructuralError("junction tree: root out of range");
  if (!family_of.empty() && family_of.size() != n) throw StructuralError("junction tree: family list size mismatch");

  jt.variables_ = std::move(variables);
  for (std::size_t v = 0; v < n; ++v) {
    const Domain& d = clique_potentials[v].domain();
    for (std::size_t i = 0; i < d.arity(); ++i) {
      const VarId x = d.vars()[i];
      if (x < 0 || static_cast<std::size_t>(x) >= jt.variables_.size() ||
          jt.variables_[static_cast<std::size_t>(x)].cardinality() != d.cards()[i]) {
        throw StructuralError("junction tree: clique variable does not match the variable list");
      }
    }
    Clique c;
    c.index = static_cast<int>(v);
    c.domain = d;
    c.baseline = std::move(clique_potentials[v]);
    if (!family_of.empty()) c.family_of = std::move(family_of[v]);
    jt.cliques_.push_back(std::move(c));
  }

  DisjointSets ds(n);
  jt.incident_.assign(n, {});
  for (std::size_t s = 0; s < edges.size(); ++s) {
    auto [a, b] = edges[s];
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n || static_cast<std::size_t>(b) >= n || a == b) {
      throw StructuralError("junction tree: bad edge");
    }
    if (!ds.unite(a, b)) throw StructuralError("junction tree: edges contain a cycle");
    Separator sep;
    sep.index = static_cast<int>(s);
    const int lo = std::min(a, b), hi = std::max(a, b);
    sep.domain = intersection(jt.cliques_[static_cast<std::size_t>(lo)].domain, jt.cliques_[static_cast<std::size_t>(hi)].domain);
    sep.baseline = unit(sep.domain);
    sep.parent = a;
    sep.child = b;
    jt.separators_.push_back(std::move(sep));
    jt.incident_[static_cast<std::size_t>(a)].push_back(static_cast<int>(s));
    jt.incident_[static_cast<std::size_t>(b)].push_back(static_cast<int>(s));
  }

  // Running intersection: the cliques holding a variable form a subtree iff
  // (#cliques holding it) - (#separators holding it) == 1.
  for (std::size_t x = 0; x < jt.variables_.size(); ++x) {
    int nodes = 0, links = 0;
    for (const auto& c : jt.cliques_) nodes += c.domain.contains(static_cast<VarId>(x)) ? 1 : 0;
    for (const auto& s : jt.separators_) links += s.domain.contains(static_cast<VarId>(x)) ? 1 : 0;
    if (nodes == 0) throw StructuralError("junction tree: variable '" + jt.variables_[x].name + "' is in no clique");
    if (nodes - links != 1) {
      throw StructuralError("junction tree: running intersection fails for '" + jt.variables_[x].name + "'");
    }
  }

  if (home.empty()) {
    home.resize(jt.variables_.size(), -1);
    for (std::size_t x = 0; x < jt.variables_.size(); ++x) {
      for (const auto& c : jt.cliques_) {
        if (c.domain.contains(static_cast<VarId>(x))) {
          home[x] = c.index;
          break;
        }
      }
    }
  }
  if (home.size() != jt.variables_.size()) throw StructuralError("junction tree: home list size mismatch");
  for (std::size_t x = 0; x < home.size(); ++x) {
    if (home[x] < 0 || static_cast<std::size_t>(home[x]) >= n ||
        !jt.cliques_[static_cast<std::size_t>(home[x])].domain.contains(static_cast<VarId>(x))) {
      throw StructuralError("junction tree: home clique does not contain its variable");
    }
  }
  jt.home_ = std::move(home);
  jt.root_ = root;
  jt.orient();
  return jt;
}

void JunctionTree::orient() {
  const std::size_t n = cliques_.size();
  children_.assign(n, {});
  parent_sep_.assign(n, -1);
  enter_.assign(n, 0);
  exit_.assign(n, 0);
  preorder_.clear();
  int clock = 0;
  // iterative DFS; children visited in clique-index order
  std::vector<std::pair<int, std::size_t>> stack{{root_, 0}};
  std::vector<bool> seen(n, false);
  seen[static_cast<std::size_t>(root_)] = true;
  enter_[static_cast<std::size_t>(root_)] = clock++;
  preorder_.push_back(root_);
  auto sorted_children = [&](int v) {
    std::vector<std::pair<int, int>> kids;  // (clique, separator)
    for (int s : incident_[static_cast<std::size_t>(v)]) {
      const int u = neighbour(v, s);
      if (!seen[static_cast<std::size_t>(u)]) kids.emplace_back(u, s);
    }
    std::sort(kids.begin(), kids.end());
    return kids;
  };
  std::vector<std::vector<std::pair<int, int>>> pending(n);
  pending[static_cast<std::size_t>(root_)] = sorted_children(root_);
  while (!stack.empty()) {
    auto& [v, next] = stack.back();
    auto& kids = pending[static_cast<std::size_t>(v)];
    if (next < kids.size()) {
      auto [u, s] = kids[next++];
      auto& sep = separators_[static_cast<std::size_t>(s)];
      sep.parent = v;
      sep.child = u;
      children_[static_cast<std::size_t>(v)].push_back(s);
      parent_sep_[static_cast<std::size_t>(u)] = s;
      seen[static_cast<std::size_t>(u)] = true;
      enter_[static_cast<std::size_t>(u)] = clock++;
      preorder_.push_back(u);
      pending[static_cast<std::size_t>(u)] = sorted_children(u);
      stack.emplace_back(u, 0);
    } else {
      exit_[static_cast<std::size_t>(v)] = clock;
      stack.pop_back();
    }
  }
  if (preorder_.size() != n) throw StructuralError("junction tree: cliques are not connected");
}

int JunctionTree::neighbour(int v, int s) const {
  const auto& sep = separator(s);
  if (sep.parent == v) return sep.child;
  if (sep.child == v) return sep.parent;
  throw StructuralError("junction tree: separator " + std::to_string(s) + " is not incident to clique " + std::to_string(v));
}

bool JunctionTree::in_subtree(int s, int v) const {
  const int c = separator(s).child;
  return enter_.at(static_cast<std::size_t>(v)) >= enter_.at(static_cast<std::size_t>(c)) &&
         enter_.at(static_cast<std::size_t>(v)) < exit_.at(static_cast<std::size_t>(c));
}

int JunctionTree::smallest_clique_containing(VarId var) const {
  int best = -1;
  for (const auto& c : cliques_) {
    if (!c.domain.contains(var)) continue;
    if (best < 0 || c.domain.num_cells() < clique(best).domain.num_cells()) best = c.index;
  }
  if (best < 0) throw EvidenceError("junction tree: unknown variable " + std::to_string(var));
  return best;
}

JunctionTree JunctionTree::with_baselines(std::vector<Potential> cliques, std::vector<Potential> separators) const {
  if (cliques.size() != cliques_.size() || separators.size() != separators_.size()) {
    throw StructuralError("junction tree: baseline count mismatch");
  }
  JunctionTree out = *this;
  for (std::size_t v = 0; v < cliques.size(); ++v) {
    if (!(cliques[v].domain() == cliques_[v].domain)) throw StructuralError("junction tree: clique baseline domain mismatch");
    out.cliques_[v].baseline = std::move(cliques[v]);
  }
  for (std::size_t s = 0; s < separators.size(); ++s) {
    if (!(separators[s].domain() == separators_[s].domain)) {
      throw StructuralError("junction tree: separator baseline domain mismatch");
    }
    out.separators_[s].baseline = std::move(separators[s]);
  }
  out.calibrated_ = true;
  return out;
}

JunctionTree build_junction_tree(const BayesianNetwork& net) {
  auto [order, elim] = eliminate(net);
  const auto cards = net.cardinalities();

  // Keep elimination cliques not contained in an earlier one. A later clique
  // can never strictly contain an earlier one, since the eliminated variable
  // leaves the graph.
  std::vector<std::vector<VarId>> cliques;
  for (const auto& c : elim) {
    const bool subsumed = std::any_of(cliques.begin(), cliques.end(), [&](const auto& k) {
      return std::includes(k.begin(), k.end(), c.begin(), c.end());
    });
    if (!subsumed) cliques.push_back(c);
  }

  std::vector<Domain> domains;
  for (const auto& c : cliques) {
    std::vector<int> cc;
    for (VarId v : c) cc.push_back(cards[static_cast<std::size_t>(v)]);
    domains.emplace_back(c, cc);
  }

  // Maximum-weight spanning tree, weight = separator size; ties to the
  // smallest (i, j) pair. Zero-weight links join disconnected components.
  std::vector<std::tuple<int, int, int>> candidates;
  for (std::size_t i = 0; i < cliques.size(); ++i) {
    for (std::size_t j = i + 1; j < cliques.size(); ++j) {
      const int w = static_cast<int>(intersection(domains[i], domains[j]).arity());
      candidates.emplace_back(-w, static_cast<int>(i), static_cast<int>(j));
    }
  }
  std::sort(candidates.begin(), candidates.end());
  DisjointSets ds(cliques.size());
  std::vector<std::pair<int, int>> edges;
  for (auto [negw, i, j] : candidates) {
    if (ds.unite(i, j)) edges.emplace_back(i, j);
  }

  std::vector<Potential> potentials;
  for (const auto& d : domains) potentials.push_back(unit(d));
  std::vector<int> home(net.size(), -1);
  std::vector<std::vector<VarId>> family_of(cliques.size());
  for (std::size_t x = 0; x < net.size(); ++x) {
    const auto& fam = net.cpt(static_cast<VarId>(x)).domain();
    for (std::size_t c = 0; c < domains.size(); ++c) {
      if (fam.is_subset_of(domains[c])) {
        home[x] = static_cast<int>(c);
        family_of[c].push_back(static_cast<VarId>(x));
        potentials[c] = multiply(potentials[c], net.cpt(static_cast<VarId>(x)));
        break;
      }
    }
  }
  return JunctionTree::from_parts(net.variables(), std::move(potentials), edges, std::move(home), std::move(family_of), 0);
}

JunctionTree initialize_consistent(const JunctionTree& jt) {
  // With ones in the separators the cautious kernel is plain Shafer-Shenoy;
  // reinitialize() then multiplies the stored tables into marginals.
  auto raw = std::make_shared<const JunctionTree>(jt);
  CautiousState state(raw);
  if (state.propagate() <= 0.0) throw ModelError("junction tree: clique potentials have zero total mass");
  return state.reinitialize();
}

JunctionTree compile(const BayesianNetwork& net) { return initialize_consistent(build_junction_tree(net)); }

}  // namespace cautious
