"""Double ramification cycles as genus-free graph sums.

The degree-d, modulus-r class is a sum over all graphs with n legs and
exactly d edges: each graph is weighted by the average over all residue
assignments mod r on half-edges (legs frozen to the input vector, edge halves
summing to zero, vertex sums zero) of the product of w(h) w(h') / 2 over the
edges, divided by |Aut|.  Each coefficient is a polynomial in r for large r;
the cycle itself is the constant term at degree d = g, recovered here by
exact Lagrange interpolation with held-out validation points.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .algebra import (
    GENUS_FREE,
    LABELED,
    AlgebraElement,
    expand_element,
)
from .graphs import Graph, StrataError, canonical_form, enumerate_graphs, validate
from .poly import lagrange_interpolate, poly_degree, poly_eval


class InconsistentLegSum(StrataError):
    pass


class InconsistentInput(StrataError):
    pass


class PolynomialityCheckFailed(StrataError):
    pass


@dataclass(frozen=True)
class DRInput:
    """Parameters of one double ramification class."""

    g: int
    n: int
    a: tuple
    d: int
    k: int = 0

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        if self.n != len(self.a) or self.n < 1:
            raise InconsistentInput("need one weight per leg and n >= 1")
        if self.g < 0 or self.d < 0:
            raise InconsistentInput("g and d must be nonnegative")
        if 2 * self.g - 2 + self.n <= 0:
            raise InconsistentInput(
                f"(g, n) = ({self.g}, {self.n}) violates 2g - 2 + n > 0"
            )
        target = self.k * (2 * self.g - 2 + self.n)
        if sum(self.a) != target:
            raise InconsistentInput(
                f"leg weights sum to {sum(self.a)}, expected {target}"
            )


@dataclass(frozen=True)
class Weighting:
    """Residues mod r on the half-edges of one graph: legs[i] is the residue
    at leg i+1, edges[k] the pair at the two ends of edge k."""

    graph: Graph
    r: int
    legs: tuple
    edges: tuple

    def edge_product(self):
        prod = 1
        for w0, w1 in self.edges:
            prod *= w0 * w1
        return prod


def _vertex_targets(graph, k, r):
    if k == 0:
        return [0] * graph.num_vertices
    return [
        (k * (2 * gv - 2 + nv)) % r
        for gv, nv in zip(graph.genera, graph.valences)
    ]


def _spanning_tree(graph):
    """BFS spanning tree: (parent edge index, parent side at child) per vertex
    plus the set of non-tree edge indices."""
    nv = graph.num_vertices
    seen = [False] * nv
    seen[0] = True
    order = [0]
    tree_edges = {}
    queue = [0]
    while queue:
        v = queue.pop(0)
        for idx, (i, j) in enumerate(graph.edges):
            if i == j:
                continue
            if i == v and not seen[j]:
                seen[j] = True
                tree_edges[j] = (idx, 1)  # child j sits at side 1
                order.append(j)
                queue.append(j)
            elif j == v and not seen[i]:
                seen[i] = True
                tree_edges[i] = (idx, 0)
                order.append(i)
                queue.append(i)
    free = [idx for idx in range(graph.num_edges) if idx not in {e for e, _ in tree_edges.values()}]
    return order, tree_edges, free


def enumerate_weightings(graph, a, r, k=0):
    """Yield every weighting mod r; there are exactly r^h1 of them.

    Parametrized by the non-tree edges of a spanning tree: their residues are
    free, and the tree-edge residues are forced leaf-to-root by the vertex
    congruences (the root congruence then holds automatically)."""
    if r < 1:
        raise InconsistentInput(f"modulus must be positive, got {r}")
    n = graph.num_legs
    if len(a) != n:
        raise InconsistentLegSum(f"{len(a)} leg weights for {n} legs")
    targets = _vertex_targets(graph, k, r)
    if (sum(a) - sum(targets)) % r:
        raise InconsistentLegSum(
            "leg weights are inconsistent with the vertex congruences mod r"
        )
    leg_w = tuple(ai % r for ai in a)
    order, tree_edges, free = _spanning_tree(graph)
    base = [0] * graph.num_vertices
    for lbl, v in enumerate(graph.legs):
        base[v] += leg_w[lbl]
    for assign in itertools.product(range(r), repeat=len(free)):
        vals = {}
        for idx, w0 in zip(free, assign):
            vals[idx] = (w0, (-w0) % r)
        sums = list(base)
        for idx, (w0, w1) in vals.items():
            i, j = graph.edges[idx]
            sums[i] += w0
            sums[j] += w1
        # force tree edges from the leaves inward
        for v in reversed(order):
            if v not in tree_edges:
                continue
            idx, side = tree_edges[v]
            need = (targets[v] - sums[v]) % r
            w = [0, 0]
            w[side] = need
            w[1 - side] = (-need) % r
            vals[idx] = tuple(w)
            i, j = graph.edges[idx]
            sums[i] += w[0]
            sums[j] += w[1]
        root = order[0]
        assert (sums[root] - targets[root]) % r == 0
        yield Weighting(
            graph, r, leg_w, tuple(vals[idx] for idx in range(graph.num_edges))
        )


def count_weightings(graph, r):
    return r ** graph.h1()


def edge_term_sum(graph, a, r, k=0):
    """Sum over weightings of the product of w(h) w(h') over edges, halved
    once per edge; integer arithmetic until the final power of two."""
    total = 0
    for wt in enumerate_weightings(graph, a, r, k=k):
        total += wt.edge_product()
    return Fraction(total, 2 ** graph.num_edges)


def dr_eval(inp, r):
    """The degree-d graph sum at one modulus, as a genus-free element.

    Classes with h1 > g expand to zero and are skipped up front."""
    if inp.k != 0:
        raise InconsistentInput("dr_eval is the untwisted evaluation; use twisted_dr_eval")
    acc = {}
    for cf in enumerate_graphs(inp.n, inp.d, mode=GENUS_FREE, h1_max=inp.g):
        graph = cf.graph
        s = edge_term_sum(graph, inp.a, r)
        if s == 0:
            continue
        coeff = s / r ** graph.h1() / cf.aut_order
        acc[cf] = coeff
    return AlgebraElement.from_dict(inp.g, inp.n, GENUS_FREE, acc, checked=True)


def twisted_dr_eval(inp, r):
    """The k-twisted evaluation over genus-labeled graphs: the vertex
    congruence becomes sum of residues = k (2 g_v - 2 + n_v) mod r, so the
    weighting set depends on the genus distribution."""
    acc = {}
    for cf in enumerate_graphs(inp.n, inp.d, genus=inp.g, mode=LABELED):
        graph = cf.graph
        s = edge_term_sum(graph, inp.a, r, k=inp.k)
        if s == 0:
            continue
        acc[cf] = s / r ** graph.h1() / cf.aut_order
    return AlgebraElement.from_dict(inp.g, inp.n, LABELED, acc, checked=True)


def dr_sample_moduli(inp, attempt=0):
    """Deterministic interpolation moduli: 2d + 2 nodes starting at
    r0 = max(sum |a_i|, 2d) + 1, plus two held-out validation points; each
    escalation doubles r0."""
    r0 = max(sum(abs(x) for x in inp.a), 2 * inp.d) + 1
    r0 <<= attempt
    nodes = list(range(r0, r0 + 2 * inp.d + 2))
    return nodes, [nodes[-1] + 1, nodes[-1] + 2]


def dr_constant_term(inp, max_attempts=3, jobs=1):
    """Constant term in r of the degree-d graph sum.

    Every basis-graph coefficient is interpolated from 2d + 2 sample moduli;
    the interpolant must have degree <= 2d and reproduce two held-out moduli
    exactly, otherwise the base modulus escalates."""
    last = None
    for attempt in range(max_attempts):
        nodes, checks = dr_sample_moduli(inp, attempt)
        values = _parallel_map(lambda r: dr_eval(inp, r), nodes + checks, jobs)
        by_r = dict(zip(nodes + checks, values))
        keys = []
        seen = set()
        for e in values:
            for cf, _ in e.terms:
                if cf.encoding not in seen:
                    seen.add(cf.encoding)
                    keys.append(cf)
        acc = {}
        try:
            for cf in keys:
                pts = [(r, by_r[r].coefficient(cf.graph)) for r in nodes]
                poly = lagrange_interpolate(pts)
                if poly_degree(poly) > 2 * inp.d:
                    raise PolynomialityCheckFailed(
                        f"degree {poly_degree(poly)} > {2 * inp.d} at r0={nodes[0]}"
                    )
                for r in checks:
                    if poly_eval(poly, r) != by_r[r].coefficient(cf.graph):
                        raise PolynomialityCheckFailed(
                            f"validation point r={r} missed at r0={nodes[0]}"
                        )
                if poly[0]:
                    acc[cf] = poly[0]
        except PolynomialityCheckFailed as exc:
            last = exc
            continue
        return AlgebraElement.from_dict(inp.g, inp.n, GENUS_FREE, acc, checked=True)
    raise last


def dr_cycle(g, a, jobs=1):
    """The double ramification cycle: constant term at degree d = g."""
    a = tuple(a)
    return dr_constant_term(DRInput(g, len(a), a, g), jobs=jobs)


def dr_relation(g, a, d, jobs=1):
    """Constant term at degree d > g: a formal element whose image in the
    tautological ring vanishes (the vanishing is not checked here)."""
    if d <= g:
        raise InconsistentInput(f"relation classes need d > g, got d={d} g={g}")
    a = tuple(a)
    return dr_constant_term(DRInput(g, len(a), a, d), jobs=jobs)


def _parallel_map(fn, items, jobs):
    if jobs and jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]
