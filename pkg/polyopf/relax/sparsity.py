"""Correlative sparsity: CSP graph, chordal extension and clique decomposition.

Variables ``i`` and ``j`` are adjacent in the correlative sparsity pattern
when they share a monomial of the objective or appear together in one
constraint. The graph is made chordal by approximate minimum-degree elimination
and its maximal cliques, arranged along a clique tree, index the moment
matrices of the sparse hierarchy.
"""

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np

from .. import config
from ..poly import PolyProgram

logger = logging.getLogger(__name__)

# Inequalities with this label are separable and redundant; they are
# restated per clique instead of coupling every variable.
SPREAD_LABELS = ("ball",)


@dataclass
class CspGraph:
    """Correlative sparsity pattern of a polynomial program."""
    n: int
    graph: nx.Graph
    objective_supports: List[Tuple[int, ...]] = field(default_factory=list)
    inequality_supports: List[Tuple[int, ...]] = field(default_factory=list)
    equality_supports: List[Tuple[int, ...]] = field(default_factory=list)
    spread: Set[int] = field(default_factory=set)  # inequality indices

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]]) -> "CspGraph":
        graph = nx.Graph()
        graph.add_nodes_from(range(n))
        graph.add_edges_from(edges)
        return cls(n=n, graph=graph)

    def adjacency(self) -> np.ndarray:
        """Boolean pattern matrix with the diagonal set."""
        pattern = np.eye(self.n, dtype=bool)
        for i, j in self.graph.edges:
            pattern[i, j] = pattern[j, i] = True
        return pattern

    def num_edges(self) -> int:
        return self.graph.number_of_edges()


def _connect(graph: nx.Graph, support: Sequence[int]) -> None:
    graph.add_edges_from(combinations(support, 2))


def build_csp(pp: PolyProgram) -> CspGraph:
    """Correlative sparsity graph of ``pp`` (equalities included)."""
    graph = nx.Graph()
    graph.add_nodes_from(range(pp.nvars))
    csp = CspGraph(n=pp.nvars, graph=graph)
    for mono in pp.objective:
        if len(mono.variables) > 1:
            csp.objective_supports.append(mono.variables)
            _connect(graph, mono.variables)
    for idx, (label, g) in enumerate(zip(pp.inequality_labels, pp.inequalities)):
        support = g.support()
        csp.inequality_supports.append(support)
        if label in SPREAD_LABELS:
            csp.spread.add(idx)
            continue
        _connect(graph, support)
    for h in pp.equalities:
        support = h.support()
        csp.equality_supports.append(support)
        _connect(graph, support)
    logger.debug("csp %s: %d vertices, %d edges", pp.name, csp.n, csp.num_edges())
    return csp


@dataclass
class CliqueDecomposition:
    """Maximal cliques of a chordal extension in a running-intersection order.

    ``parents[k]`` is the clique-tree parent of clique ``k`` (always an
    earlier clique) or -1 for a root. ``inequality_clique[i]`` is the first
    clique covering inequality ``i``, or None for a spread inequality that
    no single clique covers.
    """
    n: int
    cliques: List[Tuple[int, ...]]
    parents: List[int]
    ordering: List[int] = field(default_factory=list)
    inequality_clique: List[Optional[int]] = field(default_factory=list)
    equality_clique: List[int] = field(default_factory=list)
    fill_edges: List[Tuple[int, int]] = field(default_factory=list)

    @classmethod
    def single(cls, n: int, num_inequalities: int = 0, num_equalities: int = 0) -> "CliqueDecomposition":
        """One clique holding every variable."""
        return cls(
            n=n,
            cliques=[tuple(range(n))],
            parents=[-1],
            ordering=list(range(n)),
            inequality_clique=[0] * num_inequalities,
            equality_clique=[0] * num_equalities,
        )

    def __len__(self) -> int:
        return len(self.cliques)

    @property
    def sizes(self) -> List[int]:
        return [len(c) for c in self.cliques]

    @property
    def max_clique_size(self) -> int:
        return max(self.sizes, default=0)

    def covering(self, support: Iterable[int]) -> Optional[int]:
        """Index of the first clique containing ``support``."""
        wanted = set(support)
        for k, clique in enumerate(self.cliques):
            if wanted.issubset(clique):
                return k
        return None

    def separator(self, k: int) -> Tuple[int, ...]:
        parent = self.parents[k]
        if parent < 0:
            return ()
        return tuple(sorted(set(self.cliques[k]) & set(self.cliques[parent])))

    def satisfies_rip(self) -> bool:
        """For every k, I_k ∩ (I_0 ∪ … ∪ I_{k-1}) lies inside one earlier clique."""
        seen: Set[int] = set()
        for k, clique in enumerate(self.cliques):
            shared = seen.intersection(clique)
            if k and shared and not any(shared.issubset(self.cliques[j]) for j in range(k)):
                return False
            seen.update(clique)
        return True

    def is_maximal(self) -> bool:
        sets = [set(c) for c in self.cliques]
        return not any(a <= b for i, a in enumerate(sets) for j, b in enumerate(sets) if i != j)

    def dump(self, names: Optional[Sequence[str]] = None) -> str:
        """One clique per line: index, parent and sorted members."""
        lines = []
        for k, clique in enumerate(self.cliques):
            members = " ".join(names[i] if names else str(i) for i in clique)
            lines.append(f"{k} parent={self.parents[k]} size={len(clique)}: {members}")
        return "\n".join(lines) + "\n"


def _amd_elimination(graph: nx.Graph) -> Tuple[List[int], List[Set[int]], nx.Graph]:
    """Approximate minimum-degree elimination on the quotient graph.

    Eliminated vertices become elements; elements adjacent to a pivot are
    absorbed into the new one. Degrees are the usual AMD upper bound

        d_i = min(live - 1, d_i + |L_p \\ i|, |A_i \\ i| + |L_p \\ i| + Σ_e |L_e \\ L_p|)

    and ties go to the lowest vertex. Returns the elimination order, the
    elimination clique of each eliminated vertex and the chordal extension
    (graph plus fill).
    """
    chordal = graph.copy()
    variables: Dict[int, Set[int]] = {v: set(graph.neighbors(v)) for v in graph.nodes}
    adjacent: Dict[int, Set[int]] = {v: set() for v in graph.nodes}
    elements: Dict[int, Set[int]] = {}
    degree = {v: len(variables[v]) for v in graph.nodes}
    live = set(graph.nodes)
    order: List[int] = []
    cliques: List[Set[int]] = []
    while live:
        p = min(live, key=lambda u: (degree[u], u))
        absorbed = adjacent.pop(p)
        lp = set(variables.pop(p))
        for e in absorbed:
            lp |= elements.pop(e)
        lp.discard(p)
        live.remove(p)
        elements[p] = lp
        order.append(p)
        cliques.append({p, *lp})
        chordal.add_edges_from(combinations(sorted(cliques[-1]), 2))

        for i in lp:
            variables[i] -= lp | {p}
            adjacent[i] = (adjacent[i] - absorbed) | {p}
        for i in lp:
            external = sum(len(elements[e] - lp) for e in adjacent[i] if e != p)
            bound = len(variables[i]) + len(lp) - 1 + external
            degree[i] = min(len(live) - 1, degree[i] + len(lp) - 1, bound)
    return order, cliques, chordal


def _maximal(cliques: List[Set[int]]) -> List[Set[int]]:
    unique = []
    for c in sorted(cliques, key=lambda c: (-len(c), sorted(c))):
        if not any(c <= kept for kept in unique):
            unique.append(c)
    return sorted(unique, key=lambda c: sorted(c))


def _clique_tree(cliques: List[Set[int]]) -> Tuple[List[int], List[int]]:
    """Maximum-weight spanning forest on clique intersections, BFS ordered.

    Returns the new order of clique indices and the parent of each clique
    in that new order.
    """
    inter = nx.Graph()
    inter.add_nodes_from(range(len(cliques)))
    for a, b in combinations(range(len(cliques)), 2):
        weight = len(cliques[a] & cliques[b])
        if weight:
            inter.add_edge(a, b, weight=weight)
    tree = nx.maximum_spanning_tree(inter)

    order: List[int] = []
    parent_of: Dict[int, int] = {}
    for root in sorted(min(comp) for comp in nx.connected_components(tree)):
        parent_of[root] = -1
        queue = deque([root])
        while queue:
            u = queue.popleft()
            order.append(u)
            for v in sorted(tree.neighbors(u)):
                if v not in parent_of:
                    parent_of[v] = u
                    queue.append(v)
    position = {old: new for new, old in enumerate(order)}
    parents = [position[parent_of[old]] if parent_of[old] >= 0 else -1 for old in order]
    return order, parents


def _merge_small(
    cliques: List[Set[int]], parents: List[int], order: int, threshold: int
) -> Tuple[List[Set[int]], List[int]]:
    """Fold a clique into its parent when its moment basis is small and they overlap by half."""
    cliques = [set(c) for c in cliques]
    parents = list(parents)
    alive = [True] * len(cliques)
    changed = True
    while changed:
        changed = False
        for k in reversed(range(len(cliques))):
            p = parents[k]
            if not alive[k] or p < 0:
                continue
            child, par = cliques[k], cliques[p]
            small = math.comb(len(child) + order, order) < threshold
            overlap = len(child & par) >= min(len(child), len(par)) / 2.0
            if small and overlap:
                par |= child
                alive[k] = False
                for j in range(len(cliques)):
                    if alive[j] and parents[j] == k:
                        parents[j] = p
                changed = True
    keep = [k for k in range(len(cliques)) if alive[k]]
    remap = {old: new for new, old in enumerate(keep)}
    return [cliques[k] for k in keep], [remap[parents[k]] if parents[k] >= 0 else -1 for k in keep]


def chordal_cliques(
    g: CspGraph, order: int = 1, merge_threshold: int = config.MERGE_THRESHOLD
) -> CliqueDecomposition:
    """Clique decomposition of ``g`` with constraints assigned to covering cliques.

    ``order`` and ``merge_threshold`` drive clique merging only: a clique
    whose basis size binom(|I|+order, order) is below the threshold is folded
    into its clique-tree parent when they share at least half of the smaller
    clique. A threshold of 0 never merges.
    """
    elim, elim_cliques, chordal = _amd_elimination(g.graph)
    maximal = _maximal(elim_cliques)
    tree_order, parents = _clique_tree(maximal)
    cliques = [maximal[k] for k in tree_order]
    if merge_threshold > 0:
        cliques, parents = _merge_small(cliques, parents, order, merge_threshold)
        for clique in cliques:
            _connect(chordal, sorted(clique))

    fill = sorted(tuple(sorted(e)) for e in chordal.edges if not g.graph.has_edge(*e))
    cd = CliqueDecomposition(
        n=g.n,
        cliques=[tuple(sorted(c)) for c in cliques],
        parents=parents,
        ordering=elim,
        fill_edges=fill,
    )

    missing = []
    for idx, support in enumerate(g.inequality_supports):
        k = cd.covering(support)
        if k is None and idx not in g.spread:
            missing.append(support)
        cd.inequality_clique.append(k)
    for support in g.equality_supports:
        k = cd.covering(support)
        if k is None:
            missing.append(support)
        cd.equality_clique.append(k if k is not None else 0)
    if missing:
        logger.warning(
            "%d constraint supports are not covered by any clique; falling back to a single clique",
            len(missing),
        )
        return CliqueDecomposition.single(g.n, len(g.inequality_supports), len(g.equality_supports))

    logger.info(
        "%d cliques (max size %d), %d fill edges", len(cd), cd.max_clique_size, len(cd.fill_edges)
    )
    return cd
