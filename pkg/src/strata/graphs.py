"""Connected multigraphs with labeled legs.

A graph here is a finite connected multigraph (loops and parallel edges
allowed) together with a sequence of labeled legs attached to vertices and,
optionally, a nonnegative genus label on every vertex.  Isomorphisms fix the
leg labels and genus labels pointwise but may permute vertices, permute
parallel edges, and swap the two half-edges of a loop; automorphism orders
are always counted at the half-edge level, so a bare loop has 2 automorphisms.
"""

from __future__ import annotations

import itertools
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import lru_cache


class StrataError(Exception):
    """Base class for every domain error raised by this package."""


class Disconnected(StrataError):
    pass


class GenusMismatch(StrataError):
    pass


class BadLegLabels(StrataError):
    pass


class NegativeGenus(StrataError):
    pass


class MixedGenusLabels(StrataError):
    pass


class NotGenusLabeled(StrataError):
    pass


class EdgeNotInGraph(StrataError):
    pass


class InvalidBudget(StrataError):
    pass


@dataclass(frozen=True)
class Graph:
    """Immutable multigraph with labeled legs and optional vertex genera.

    genera -- one entry per vertex; all ints (genus-labeled) or all None
              (genus-free).
    edges  -- tuple of (i, j) vertex pairs, each normalized to i <= j and the
              whole tuple sorted; loops appear as (i, i).
    legs   -- legs[k] is the vertex carrying leg label k+1.
    """

    genera: tuple
    edges: tuple
    legs: tuple = ()

    def __post_init__(self):
        genera = tuple(self.genera)
        if not genera:
            raise Disconnected("a graph needs at least one vertex")
        kinds = {g is None for g in genera}
        if len(kinds) > 1:
            raise MixedGenusLabels("vertices mix genus labels with unlabeled")
        for g in genera:
            if g is not None:
                if not isinstance(g, int):
                    raise NegativeGenus(f"genus {g!r} is not an integer")
                if g < 0:
                    raise NegativeGenus(f"genus {g} is negative")
        v = len(genera)
        edges = []
        for e in self.edges:
            i, j = e
            if not (0 <= i < v and 0 <= j < v):
                raise EdgeNotInGraph(f"edge {e} has an endpoint outside 0..{v - 1}")
            edges.append((i, j) if i <= j else (j, i))
        edges.sort()
        legs = tuple(self.legs)
        for w in legs:
            if not isinstance(w, int) or not 0 <= w < v:
                raise BadLegLabels(f"leg vertex {w!r} outside 0..{v - 1}")
        object.__setattr__(self, "genera", genera)
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "legs", legs)

    @property
    def num_vertices(self):
        return len(self.genera)

    @property
    def num_edges(self):
        return len(self.edges)

    @property
    def num_legs(self):
        return len(self.legs)

    @property
    def is_genus_labeled(self):
        return self.genera[0] is not None

    @property
    def valences(self):
        """Half-edge count at each vertex: legs plus edge ends, loops twice."""
        val = [0] * self.num_vertices
        for i, j in self.edges:
            val[i] += 1
            val[j] += 1
        for w in self.legs:
            val[w] += 1
        return tuple(val)

    def legs_at(self, v):
        return tuple(lbl for lbl, w in enumerate(self.legs, start=1) if w == v)

    def h1(self):
        return self.num_edges - self.num_vertices + 1

    def total_genus(self):
        if not self.is_genus_labeled:
            raise NotGenusLabeled("genus-free graph has no total genus")
        return self.h1() + sum(self.genera)

    def is_connected(self):
        v = self.num_vertices
        parent = list(range(v))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, j in self.edges:
            parent[find(i)] = find(j)
        return len({find(x) for x in range(v)}) == 1

    def with_extra_leg(self, v):
        return Graph(self.genera, self.edges, self.legs + (v,))

    def without_last_leg(self):
        return Graph(self.genera, self.edges, self.legs[:-1])


def validate(graph, expected_genus=None):
    """Check the graph invariants, raising a typed error on the first failure.

    With expected_genus given (and the graph genus-labeled) the genus formula
    g = h1 + sum of vertex genera is also enforced.
    """
    if not graph.is_connected():
        raise Disconnected(f"graph with {graph.num_vertices} vertices is not connected")
    if graph.h1() < 0:
        raise Disconnected("cycle number is negative")  # unreachable for connected graphs
    if expected_genus is not None and graph.is_genus_labeled:
        got = graph.total_genus()
        if got != expected_genus:
            raise GenusMismatch(f"total genus {got} != expected {expected_genus}")
    return graph


def h1(graph):
    """Cycle number |E| - |V| + 1."""
    return graph.h1()


@dataclass(frozen=True)
class StabilityReport:
    classification: str  # "stable" | "semistable" | "general"
    vertex_status: tuple  # per vertex: "stable" | "semistable" | "unstable"

    @property
    def unstable_vertices(self):
        return tuple(
            v for v, s in enumerate(self.vertex_status) if s != "stable"
        )


def stability(graph):
    """Classify a genus-labeled graph by the per-vertex count 2g_v - 2 + n_v."""
    if not graph.is_genus_labeled:
        raise NotGenusLabeled("stability needs vertex genera")
    status = []
    for g, n in zip(graph.genera, graph.valences):
        excess = 2 * g - 2 + n
        if excess > 0:
            status.append("stable")
        elif excess == 0:
            status.append("semistable")
        else:
            status.append("unstable")
    if all(s == "stable" for s in status):
        cls = "stable"
    elif all(s != "unstable" for s in status):
        cls = "semistable"
    else:
        cls = "general"
    return StabilityReport(cls, tuple(status))


def is_stable(graph):
    return stability(graph).classification == "stable"


def contract_edges(graph, edge_indices):
    """Contract the given edges (by index into graph.edges).

    Non-loop edges merge their endpoints and add the genera; an edge that has
    become a loop by earlier merges removes itself and adds 1 to the genus of
    its vertex.  Edges are processed in sorted index order; the result does
    not depend on that order (checked by tests).
    """
    idxs = sorted(set(edge_indices))
    d = graph.num_edges
    for k in idxs:
        if not isinstance(k, int) or not 0 <= k < d:
            raise EdgeNotInGraph(f"no edge with index {k!r}")
    v = graph.num_vertices
    labeled = graph.is_genus_labeled
    genera = [g if labeled else 0 for g in graph.genera]
    parent = list(range(v))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for k in idxs:
        i, j = graph.edges[k]
        ri, rj = find(i), find(j)
        if ri == rj:
            genera[ri] += 1  # loop contraction
        else:
            ri, rj = min(ri, rj), max(ri, rj)
            parent[rj] = ri
            genera[ri] += genera[rj]
    roots = sorted({find(x) for x in range(v)})
    index = {r: t for t, r in enumerate(roots)}
    marked = set(idxs)
    new_edges = tuple(
        (index[find(i)], index[find(j)])
        for k, (i, j) in enumerate(graph.edges)
        if k not in marked
    )
    new_legs = tuple(index[find(w)] for w in graph.legs)
    new_genera = (
        tuple(genera[r] for r in roots) if labeled else (None,) * len(roots)
    )
    return Graph(new_genera, new_edges, new_legs)


# ---------------------------------------------------------------------------
# canonical labeling
#
# Desk-scale canonicalization: color vertices by invariant data, refine the
# coloring by neighbor multisets, then take the minimum encoding over all
# vertex orderings compatible with the final coloring.  Decorations (psi
# exponents on half-edges, kappa multisets on vertices) enter as colors so the
# same engine canonicalizes decorated strata.  Automorphism orders are counted
# on half-edges: a vertex permutation sigma preserving the structure
# contributes one factor m! per class of indistinguishable parallel edges plus
# a factor 2 per loop whose two half-edge decorations agree.


def _vertex_colors(graph, edge_decor, vertex_decor, leg_decor):
    nv = graph.num_vertices
    legs_at = [[] for _ in range(nv)]
    for lbl, w in enumerate(graph.legs, start=1):
        dec = leg_decor[lbl - 1] if leg_decor is not None else 0
        legs_at[w].append((lbl, dec))
    val = graph.valences
    keys = []
    for v in range(nv):
        g = graph.genera[v]
        keys.append(
            (
                -1 if g is None else g,
                tuple(sorted(legs_at[v])),
                val[v],
                vertex_decor[v] if vertex_decor is not None else (),
            )
        )
    order = {k: t for t, k in enumerate(sorted(set(keys)))}
    colors = [order[k] for k in keys]
    while True:
        items = []
        for v in range(nv):
            nb = []
            for k, (i, j) in enumerate(graph.edges):
                p, q = edge_decor[k] if edge_decor is not None else (0, 0)
                if i == v and j == v:
                    nb.append((-1, -1) + tuple(sorted((p, q))))
                elif i == v:
                    nb.append((0, colors[j], p, q))
                elif j == v:
                    nb.append((0, colors[i], q, p))
            items.append((colors[v], tuple(sorted(nb))))
        order = {it: t for t, it in enumerate(sorted(set(items)))}
        new = [order[it] for it in items]
        if new == colors:
            return colors
        colors = new


def _edge_key(pos, i, j, p, q):
    a, b = pos[i], pos[j]
    if a < b:
        return (a, b, p, q)
    if b < a:
        return (b, a, q, p)
    lo, hi = sorted((p, q))
    return (a, a, lo, hi)


def _encode(graph, ordering, edge_decor, vertex_decor, leg_decor):
    pos = {old: new for new, old in enumerate(ordering)}
    genera = tuple(
        -1 if graph.genera[o] is None else graph.genera[o] for o in ordering
    )
    vdec = (
        tuple(vertex_decor[o] for o in ordering) if vertex_decor is not None else ()
    )
    erep = []
    for k, (i, j) in enumerate(graph.edges):
        p, q = edge_decor[k] if edge_decor is not None else (0, 0)
        erep.append(_edge_key(pos, i, j, p, q))
    erep.sort()
    legs = tuple(pos[w] for w in graph.legs)
    ldec = tuple(leg_decor) if leg_decor is not None else ()
    return (len(ordering), genera, vdec, tuple(erep), legs, ldec)


def _color_orderings(colors):
    groups = defaultdict(list)
    for v, c in enumerate(colors):
        groups[c].append(v)
    keys = sorted(groups)
    for combo in itertools.product(
        *(itertools.permutations(groups[k]) for k in keys)
    ):
        yield tuple(itertools.chain.from_iterable(combo))


def _aut_order(graph, colors, edge_decor):
    identity = {v: v for v in range(graph.num_vertices)}
    base = Counter(
        _edge_key(identity, i, j, *(edge_decor[k] if edge_decor else (0, 0)))
        for k, (i, j) in enumerate(graph.edges)
    )
    loop_flips = 1
    for k, (i, j) in enumerate(graph.edges):
        if i == j:
            p, q = edge_decor[k] if edge_decor else (0, 0)
            if p == q:
                loop_flips *= 2
    group_perms = 1
    for m in base.values():
        for t in range(2, m + 1):
            group_perms *= t
    total = 0
    for ordered in _color_orderings(colors):
        sigma = {v: ordered[t] for t, v in enumerate(_sorted_by_color(colors))}
        image = Counter(
            _edge_key(sigma, i, j, *(edge_decor[k] if edge_decor else (0, 0)))
            for k, (i, j) in enumerate(graph.edges)
        )
        if image == base:
            total += group_perms * loop_flips
    return total


def _sorted_by_color(colors):
    return sorted(range(len(colors)), key=lambda v: (colors[v], v))


def _canonicalize(graph, edge_decor=None, vertex_decor=None, leg_decor=None):
    colors = _vertex_colors(graph, edge_decor, vertex_decor, leg_decor)
    best = None
    best_ordering = None
    for ordering in _color_orderings(colors):
        enc = _encode(graph, ordering, edge_decor, vertex_decor, leg_decor)
        if best is None or enc < best:
            best = enc
            best_ordering = ordering
    aut = _aut_order(graph, colors, edge_decor)
    return best, best_ordering, aut


@dataclass(frozen=True)
class CanonicalForm:
    """Byte encoding unique per isomorphism class, plus |Aut| and a canonical
    representative graph."""

    encoding: bytes
    aut_order: int
    graph: Graph = field(compare=False)


def _relabel_graph(graph, ordering):
    pos = {old: new for new, old in enumerate(ordering)}
    genera = tuple(graph.genera[o] for o in ordering)
    edges = tuple(
        (pos[i], pos[j]) if pos[i] <= pos[j] else (pos[j], pos[i])
        for i, j in graph.edges
    )
    legs = tuple(pos[w] for w in graph.legs)
    return Graph(genera, edges, legs)


@lru_cache(maxsize=None)
def canonical_form(graph):
    """Canonical form of a graph: encodings agree exactly for isomorphic
    graphs (legs and genus labels fixed), and aut_order = |Aut| counted on
    half-edges."""
    enc, ordering, aut = _canonicalize(graph)
    return CanonicalForm(
        encoding=repr(enc).encode("ascii"),
        aut_order=aut,
        graph=_relabel_graph(graph, ordering),
    )


def count_isomorphisms(a, b):
    """Number of half-edge isomorphisms a -> b: zero or |Aut(a)|."""
    ca, cb = canonical_form(a), canonical_form(b)
    return ca.aut_order if ca.encoding == cb.encoding else 0


# ---------------------------------------------------------------------------
# exhaustive enumeration


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _connected_edge_multiset(nv, edges):
    parent = list(range(nv))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in edges:
        parent[find(i)] = find(j)
    return len({find(x) for x in range(nv)}) == 1


@lru_cache(maxsize=None)
def enumerate_graphs(n, d, genus=None, mode="labeled", h1_max=None):
    """All isomorphism classes of connected multigraphs with n labeled legs
    and exactly d edges, one canonical representative each, sorted by
    encoding.

    In labeled mode every distribution of genus - h1 across the vertices is
    emitted; in genus-free mode vertices carry no genus.  h1_max caps the
    cycle number (defaults: genus in labeled mode, d otherwise).
    """
    if d < 0 or n < 0:
        raise InvalidBudget(f"need n, d >= 0, got n={n} d={d}")
    if mode == "labeled":
        if genus is None:
            raise InvalidBudget("labeled enumeration needs a genus")
        if genus < 0:
            raise InvalidBudget(f"genus {genus} is negative")
        cap = genus if h1_max is None else min(h1_max, genus)
    elif mode == "genus-free":
        cap = d if h1_max is None else h1_max
    else:
        raise InvalidBudget(f"unknown mode {mode!r}")

    out = {}
    for nv in range(1, d + 2):
        cycle = d - nv + 1
        if cycle < 0 or cycle > cap:
            continue
        pairs = [
            (i, j) for i in range(nv) for j in range(i, nv)
        ]
        for mult in itertools.combinations_with_replacement(pairs, d):
            if not _connected_edge_multiset(nv, mult):
                continue
            for legs in itertools.product(range(nv), repeat=n):
                if mode == "labeled":
                    budget = genus - cycle
                    for dist in _compositions(budget, nv):
                        g = Graph(dist, mult, legs)
                        cf = canonical_form(g)
                        out[cf.encoding] = cf
                else:
                    g = Graph((None,) * nv, mult, legs)
                    cf = canonical_form(g)
                    out[cf.encoding] = cf
    return tuple(out[k] for k in sorted(out))


# ---------------------------------------------------------------------------
# JSON interchange


def graph_to_json(graph):
    return {
        "vertices": [{"genus": g} for g in graph.genera],
        "edges": [[i, j] for i, j in graph.edges],
        "legs": list(graph.legs),
    }


def graph_from_json(data):
    try:
        vertices = data["vertices"]
        edges = data["edges"]
        legs = data.get("legs", [])
    except (TypeError, KeyError) as exc:
        raise BadLegLabels(f"malformed graph object: missing {exc}") from exc
    genera = tuple(v.get("genus") for v in vertices)
    return Graph(genera, tuple(tuple(e) for e in edges), tuple(legs))
