"""Labeled (multi)graphs and enumeration of the graph classes the sums range over.

Vertices are positive integers; a graph is a sorted map from vertex pairs
(i <= j) to multiplicities.  Enumeration is over *labeled* graphs (vertex 1,
and vertex 2 where relevant, are distinguished), never isomorphism classes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

from .guards import guard

Pair = tuple[int, int]

# Enumeration guards (defaults; lift with LOWDEG_GUARD_OVERRIDE=1).
MAX_N = 10
MAX_EDGES = 8
MAX_TREE_N = 12
MAX_TREE_K = 2
MAX_SAW_N = 400
MAX_SAW_COUNT = 2_000_000


def _norm_pair(i: int, j: int) -> Pair:
    if i < 1 or j < 1:
        raise ValueError(f"vertex ids must be positive, got ({i}, {j})")
    return (i, j) if i <= j else (j, i)


class MultiGraph:
    """Immutable labeled multigraph with self-loops and parallel edges."""

    __slots__ = ("_edges", "_hash")

    def __init__(self, edges=()):
        acc: dict[Pair, int] = {}
        items = edges.items() if hasattr(edges, "items") else [(e, 1) for e in edges]
        for pair, mult in items:
            if mult < 0:
                raise ValueError(f"negative multiplicity for edge {pair}")
            if mult == 0:
                continue
            key = _norm_pair(*pair)
            acc[key] = acc.get(key, 0) + mult
        object.__setattr__(self, "_edges", tuple(sorted(acc.items())))
        object.__setattr__(self, "_hash", hash(self._edges))

    def __setattr__(self, *_):
        raise AttributeError("MultiGraph is immutable")

    # -- basic structure ----------------------------------------------------

    @property
    def edges(self) -> tuple[tuple[Pair, int], ...]:
        return self._edges

    @property
    def edge_count(self) -> int:
        """Total edge count |alpha| = sum of multiplicities."""
        return sum(m for _, m in self._edges)

    @property
    def support(self) -> tuple[Pair, ...]:
        return tuple(p for p, _ in self._edges)

    def multiplicity(self, i: int, j: int) -> int:
        key = _norm_pair(i, j)
        for p, m in self._edges:
            if p == key:
                return m
        return 0

    def edge_multiset(self) -> tuple[Pair, ...]:
        """Edges repeated by multiplicity, in canonical order."""
        out = []
        for p, m in self._edges:
            out.extend([p] * m)
        return tuple(out)

    @property
    def vertices(self) -> frozenset[int]:
        """V(alpha): the set of non-isolated vertices."""
        return frozenset(v for p, _ in self._edges for v in p)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    def degrees(self) -> dict[int, int]:
        deg: dict[int, int] = {}
        for (i, j), m in self._edges:
            deg[i] = deg.get(i, 0) + m
            deg[j] = deg.get(j, 0) + m  # a self-loop (i, i) contributes 2
        return deg

    def degree(self, v: int) -> int:
        return self.degrees().get(v, 0)

    @property
    def is_simple(self) -> bool:
        return all(m == 1 and i != j for (i, j), m in self._edges)

    @property
    def has_self_loops(self) -> bool:
        return any(i == j for (i, j), _ in self._edges)

    # -- connectivity -------------------------------------------------------

    def _adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {}
        for (i, j), _ in self._edges:
            adj.setdefault(i, set()).add(j)
            adj.setdefault(j, set()).add(i)
        return adj

    @property
    def connected(self) -> bool:
        """Every pair of non-isolated vertices is joined; the empty graph counts as connected."""
        verts = self.vertices
        if len(verts) <= 1:
            return True
        adj = self._adjacency()
        seen = {min(verts)}
        stack = [min(verts)]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen == verts

    def components(self) -> list["MultiGraph"]:
        adj = self._adjacency()
        remaining = set(self.vertices)
        comps = []
        while remaining:
            start = min(remaining)
            seen = {start}
            stack = [start]
            while stack:
                for w in adj[stack.pop()]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            comps.append(MultiGraph({p: m for p, m in self._edges if p[0] in seen}))
            remaining -= seen
        return comps

    @property
    def component_count(self) -> int:
        return len(self.components())

    def component_of(self, v: int) -> "MultiGraph":
        """Connected component containing v (empty graph if v is isolated)."""
        for comp in self.components():
            if v in comp.vertices:
                return comp
        return MultiGraph()

    # -- derived quantities -------------------------------------------------

    @property
    def excess(self) -> int:
        """Tree excess |alpha| - |V(alpha)| + 1.  Reported as 1 for the empty graph
        (the formula taken literally at |alpha| = |V| = 0)."""
        return self.edge_count - self.vertex_count + 1

    @property
    def excess_degree(self) -> int:
        """Sum of deg(v) over vertices of degree >= 3 (self-loops count twice)."""
        return sum(d for d in self.degrees().values() if d >= 3)

    def factorial(self) -> int:
        """alpha! = product of per-edge multiplicity factorials."""
        out = 1
        for _, m in self._edges:
            out *= math.factorial(m)
        return out

    def binom(self, other: "MultiGraph") -> int:
        """Multiplicity binomial binom(alpha, beta); zero unless beta <= alpha."""
        if not self.contains(other):
            return 0
        mults = dict(self._edges)
        out = 1
        for p, m in other._edges:
            out *= math.comb(mults.get(p, 0), m)
        return out

    # -- algebra ------------------------------------------------------------

    def plus(self, pair: Pair, mult: int = 1) -> "MultiGraph":
        d = dict(self._edges)
        key = _norm_pair(*pair)
        d[key] = d.get(key, 0) + mult
        return MultiGraph(d)

    def bar(self) -> "MultiGraph":
        """alpha + one extra copy of the (1, 2) edge."""
        return self.plus((1, 2))

    def add(self, other: "MultiGraph") -> "MultiGraph":
        d = dict(self._edges)
        for p, m in other._edges:
            d[p] = d.get(p, 0) + m
        return MultiGraph(d)

    def minus(self, other: "MultiGraph") -> "MultiGraph":
        d = dict(self._edges)
        for p, m in other._edges:
            if d.get(p, 0) < m:
                raise ValueError("minus requires other <= self")
            d[p] -= m
        return MultiGraph(d)

    def meet(self, other: "MultiGraph") -> "MultiGraph":
        omults = dict(other._edges)
        return MultiGraph({p: min(m, omults[p]) for p, m in self._edges if p in omults})

    def contains(self, other: "MultiGraph") -> bool:
        """beta <= alpha in the multiplicity partial order."""
        mults = dict(self._edges)
        return all(mults.get(p, 0) >= m for p, m in other._edges)

    def subgraphs(self):
        """All beta <= alpha (multiplicity vectors), deterministic order."""
        pairs = [p for p, _ in self._edges]
        for combo in itertools.product(*(range(m + 1) for _, m in self._edges)):
            yield MultiGraph({p: c for p, c in zip(pairs, combo) if c})

    def proper_subgraphs(self):
        for beta in self.subgraphs():
            if beta != self:
                yield beta

    def relabel(self, mapping: dict[int, int]) -> "MultiGraph":
        return MultiGraph({(mapping.get(i, i), mapping.get(j, j)): m for (i, j), m in self._edges})

    # -- ordering / identity ------------------------------------------------

    def sort_key(self) -> tuple:
        return tuple((i, j, m) for (i, j), m in self._edges)

    def __lt__(self, other: "MultiGraph") -> bool:
        return self.sort_key() < other.sort_key()

    def __eq__(self, other) -> bool:
        return isinstance(other, MultiGraph) and self._edges == other._edges

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        if not self._edges:
            return "MultiGraph()"
        body = ", ".join(f"({i},{j})x{m}" if m > 1 else f"({i},{j})" for (i, j), m in self._edges)
        return f"MultiGraph[{body}]"

    # -- serialization: `d v : i,j[,mult] ; ...` -----------------------------

    def to_line(self) -> str:
        parts = []
        for (i, j), m in self._edges:
            parts.append(f"{i},{j}" if m == 1 else f"{i},{j},{m}")
        return f"{self.edge_count} {self.vertex_count} : " + " ; ".join(parts)

    @staticmethod
    def from_line(line: str) -> "MultiGraph":
        head, _, body = line.partition(":")
        d: dict[Pair, int] = {}
        for chunk in body.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            nums = [int(x) for x in chunk.split(",")]
            if len(nums) == 2:
                i, j = nums
                m = 1
            elif len(nums) == 3:
                i, j, m = nums
            else:
                raise ValueError(f"bad edge chunk {chunk!r}")
            key = _norm_pair(i, j)
            d[key] = d.get(key, 0) + m
        g = MultiGraph(d)
        fields = head.split()
        if len(fields) >= 2 and (int(fields[0]) != g.edge_count or int(fields[1]) != g.vertex_count):
            raise ValueError(f"header {head.strip()!r} inconsistent with edges")
        return g


EMPTY = MultiGraph()


@dataclass(frozen=True)
class GraphStats:
    edge_count: int
    vertex_count: int
    excess: int
    component_count: int
    excess_degree: int


def graph_stats(g: MultiGraph) -> GraphStats:
    return GraphStats(g.edge_count, g.vertex_count, g.excess, g.component_count, g.excess_degree)


# ---------------------------------------------------------------------------
# Class membership predicates
# ---------------------------------------------------------------------------

def is_connected_rooted(alpha: MultiGraph) -> bool:
    """Empty, or connected with vertex 1 among its non-isolated vertices."""
    if alpha.edge_count == 0:
        return True
    return 1 in alpha.vertices and alpha.connected


def is_good_pair(alpha: MultiGraph) -> bool:
    """Empty, or: 1,2 in V(alpha); alpha + (1,2) connected; every vertex of
    alpha has degree >= 2 in alpha + (1,2)."""
    if alpha.edge_count == 0:
        return True
    verts = alpha.vertices
    if 1 not in verts or 2 not in verts:
        return False
    bar = alpha.bar()
    if not bar.connected:
        return False
    bar_deg = bar.degrees()
    return all(bar_deg[v] >= 2 for v in verts)


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

CLASSES = ("connected-rooted-at-1", "good-SW", "good-SBM", "tree-Tk", "saw-SD")

_SIMPLE_ONLY = {"good-SBM": True, "tree-Tk": True, "saw-SD": True}


@dataclass(frozen=True)
class GraphClassSpec:
    """Which graph class to enumerate, with ambient vertex count and size caps."""

    cls: str
    n: int
    max_edges: int | None = None
    k: int | None = None
    D: int | None = None
    parallel_edges: bool | None = None
    self_loops: bool | None = None

    def __post_init__(self):
        if self.cls not in CLASSES:
            raise ValueError(f"unknown graph class {self.cls!r}; choose from {CLASSES}")
        if self.n < 1:
            raise ValueError("ambient vertex count must be >= 1")
        if self.cls in _SIMPLE_ONLY:
            if self.parallel_edges or self.self_loops:
                raise ValueError(f"class {self.cls} is simple; multigraph flags are illegal")
            object.__setattr__(self, "parallel_edges", False)
            object.__setattr__(self, "self_loops", False)
        else:
            if self.parallel_edges is None:
                object.__setattr__(self, "parallel_edges", True)
            if self.self_loops is None:
                object.__setattr__(self, "self_loops", True)
        if self.cls in ("connected-rooted-at-1", "good-SW", "good-SBM"):
            if self.max_edges is None:
                raise ValueError(f"class {self.cls} requires max_edges")
        if self.cls == "tree-Tk" and self.k is None:
            raise ValueError("class tree-Tk requires k")
        if self.cls == "saw-SD":
            if self.D is None:
                raise ValueError("class saw-SD requires D")
            if self.D < 1:
                raise ValueError("saw-SD requires D >= 1")


def _pairs_on(v: int, loops: bool) -> list[Pair]:
    return [(i, j) for i in range(1, v + 1) for j in range(i if loops else i + 1, v + 1)]


@lru_cache(maxsize=None)
def _canonical_graphs(kind: str, v: int, d: int, loops: bool, parallel: bool) -> tuple[MultiGraph, ...]:
    """All graphs of class `kind` on exactly the vertex set {1..v} with d edges.

    kind "rooted": connected (vertex 1 is covered by construction).
    kind "good":  alpha + (1,2) connected, deg >= 2 in the barred graph.
    """
    if d == 0:
        return ()
    pairs = _pairs_on(v, loops)
    if parallel:
        combos = itertools.combinations_with_replacement(pairs, d)
    else:
        combos = itertools.combinations(pairs, d)
    full = frozenset(range(1, v + 1))
    out = []
    for combo in combos:
        g = MultiGraph(combo)
        if g.vertices != full:
            continue
        if kind == "rooted":
            if g.connected:
                out.append(g)
        elif kind == "good":
            if is_good_pair(g):
                out.append(g)
        else:
            raise ValueError(kind)
    return tuple(sorted(out, key=MultiGraph.sort_key))


def _relabeled(canon: tuple[MultiGraph, ...], fixed: int, v: int, n: int) -> list[MultiGraph]:
    """Monotone relabelings of canonical vertices {fixed+1..v} into [fixed+1..n]."""
    free = v - fixed
    out = []
    for labels in itertools.combinations(range(fixed + 1, n + 1), free):
        mapping = {fixed + 1 + t: labels[t] for t in range(free)}
        for g in canon:
            out.append(g.relabel(mapping))
    return out


def _prufer_decode(seq: tuple[int, ...], vs: tuple[int, ...]) -> tuple[Pair, ...]:
    deg = {v: 1 for v in vs}
    for s in seq:
        deg[s] += 1
    edges = []
    avail = sorted(v for v in vs if deg[v] == 1)
    seq_list = list(seq)
    for s in seq_list:
        leaf = avail.pop(0)
        edges.append(_norm_pair(leaf, s))
        deg[s] -= 1
        if deg[s] == 1:
            # insert keeping avail sorted
            lo = 0
            while lo < len(avail) and avail[lo] < s:
                lo += 1
            avail.insert(lo, s)
    edges.append(_norm_pair(avail[0], avail[1]))
    return tuple(edges)


def _trees_on(vs: tuple[int, ...]) -> list[tuple[Pair, ...]]:
    """All labeled trees on exactly the vertex set vs (Cayley: |vs|^(|vs|-2))."""
    v = len(vs)
    if v <= 1:
        return [()]
    if v == 2:
        return [(_norm_pair(vs[0], vs[1]),)]
    return [_prufer_decode(seq, vs) for seq in itertools.product(vs, repeat=v - 2)]


def _tk_trees(n: int, k: int) -> list[MultiGraph]:
    """Trees where vertex 1 has exactly two neighbors and the subtree hanging
    off each neighbor has exactly k edges (total 2k+2 edges)."""
    out = []
    others = list(range(2, n + 1))
    for a, b in itertools.combinations(others, 2):
        rest = [x for x in others if x not in (a, b)]
        for sa in itertools.combinations(rest, k):
            rem = [x for x in rest if x not in sa]
            for sb in itertools.combinations(rem, k):
                for ta in _trees_on((a,) + sa):
                    for tb in _trees_on((b,) + sb):
                        out.append(MultiGraph(((1, a), (1, b)) + ta + tb))
    return sorted(out, key=MultiGraph.sort_key)


def _saw_paths(n: int, D: int) -> list[MultiGraph]:
    """Self-avoiding paths from vertex 1 to vertex 2 with exactly D edges."""
    if D == 1:
        return [MultiGraph([(1, 2)])]
    out = []
    for inner in itertools.permutations(range(3, n + 1), D - 1):
        chain = (1,) + inner + (2,)
        out.append(MultiGraph([(chain[t], chain[t + 1]) for t in range(D)]))
    return sorted(out, key=MultiGraph.sort_key)


def enumerate_class(spec: GraphClassSpec) -> list[MultiGraph]:
    """Every distinct labeled graph in the class, exactly once, in canonical
    order (lexicographic on sorted edge lists)."""
    if spec.cls == "saw-SD":
        guard(spec.n <= MAX_SAW_N, f"saw-SD ambient n={spec.n} exceeds {MAX_SAW_N}")
        count = saw_count(spec.n, spec.D)
        guard(count <= MAX_SAW_COUNT, f"saw-SD would enumerate {count} paths")
        if spec.n < 2:
            raise ValueError("saw-SD needs vertices 1 and 2")
        return _saw_paths(spec.n, spec.D)

    if spec.cls == "tree-Tk":
        guard(spec.n <= MAX_TREE_N, f"tree-Tk ambient n={spec.n} exceeds {MAX_TREE_N}")
        guard(spec.k <= MAX_TREE_K, f"tree-Tk k={spec.k} exceeds {MAX_TREE_K}")
        if spec.k < 0:
            raise ValueError("tree-Tk requires k >= 0")
        return _tk_trees(spec.n, spec.k)

    guard(spec.n <= MAX_N, f"ambient n={spec.n} exceeds {MAX_N}")
    guard(spec.max_edges <= MAX_EDGES, f"max_edges={spec.max_edges} exceeds {MAX_EDGES}")

    out = [EMPTY]  # by convention the empty graph belongs to these classes
    if spec.cls == "connected-rooted-at-1":
        kind, fixed = "rooted", 1
    else:
        kind, fixed = "good", 2
        if spec.n < 2:
            raise ValueError(f"class {spec.cls} needs vertices 1 and 2")
    for d in range(1, spec.max_edges + 1):
        vmax = min(d + 1, spec.n)
        for v in range(fixed, vmax + 1):
            canon = _canonical_graphs(kind, v, d, spec.self_loops, spec.parallel_edges)
            out.extend(_relabeled(canon, fixed, v, spec.n))
    return sorted(out, key=MultiGraph.sort_key)


def saw_count(n: int, D: int) -> int:
    """(n-2) falling-factorial (D-1): the exact number of 1-to-2 paths with D edges."""
    out = 1
    for t in range(D - 1):
        out *= (n - 2 - t)
    return max(out, 0)


def count_by_profile(spec: GraphClassSpec, d: int, v: int) -> int:
    """Exact count of class members with edge count d and vertex count v.

    For rooted classes v counts |V(alpha) u {1}|; for good classes v = |V(alpha)|.
    """
    if spec.cls == "saw-SD":
        guard(spec.n <= MAX_SAW_N, f"saw-SD ambient n={spec.n} exceeds {MAX_SAW_N}")
        if (d, v) != (spec.D, spec.D + 1):
            return 0
        return saw_count(spec.n, spec.D)
    if spec.cls == "tree-Tk":
        trees = enumerate_class(spec)
        return sum(1 for g in trees if g.edge_count == d and g.vertex_count == v)

    guard(spec.n <= MAX_N, f"ambient n={spec.n} exceeds {MAX_N}")
    guard(d <= MAX_EDGES, f"edge count {d} exceeds {MAX_EDGES}")
    if spec.cls == "connected-rooted-at-1":
        if d == 0:
            return 1 if v == 1 else 0
        if v < 1 or v > min(d + 1, spec.n):
            return 0
        canon = _canonical_graphs("rooted", v, d, spec.self_loops, spec.parallel_edges)
        return math.comb(spec.n - 1, v - 1) * len(canon)
    # good-SW / good-SBM
    if d == 0:
        return 1 if v == 0 else 0
    if v < 2 or v > min(d + 1, spec.n):
        return 0
    canon = _canonical_graphs("good", v, d, spec.self_loops, spec.parallel_edges)
    return math.comb(spec.n - 2, v - 2) * len(canon)


def tk_closed_form_count(n: int, k: int) -> float:
    """The displayed closed form for |T_k|.  At k = 0 this is half the
    enumerated count; the enumeration is authoritative for all counts and this
    value is kept only as an analytic reference."""
    return 0.5 * math.comb(n - 1, 2) * math.comb(n - 3, k) * math.comb(n - 3 - k, k) \
        * float(k + 1) ** (2 * (k - 1))


def tk_asymptotic_count(n: int, k: int) -> float:
    """Leading-order reference (8 pi k^3)^(-1) (e n)^(2k+2), k >= 1."""
    if k < 1:
        raise ValueError("asymptotic reference needs k >= 1")
    return (math.e * n) ** (2 * k + 2) / (8 * math.pi * k ** 3)


def write_graphs(path, graphs) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for g in graphs:
            fh.write(g.to_line() + "\n")


def read_graphs(path) -> list[MultiGraph]:
    with open(path, "r", encoding="ascii") as fh:
        return [MultiGraph.from_line(line) for line in fh if line.strip()]
