"""Formal graph algebras over the rationals.

Elements are finite exact-rational combinations of graph isomorphism classes,
graded by edge count.  Two flavors share one type: genus-labeled elements
(context g, n fixed, every key satisfies the genus formula) and genus-free
elements (keys carry no vertex genera; g rides along as the intended target
genus for later expansion).

The product law: the coefficient of a class on a graph C in the product of
the classes on A and B is c / |Aut(C)|, where c counts triples (edge
partition E1 | E2 of C, isomorphism C/E1 -> A, isomorphism C/E2 -> B).
Candidates C are generated constructively by replacing each vertex of A with
a connected local graph and gluing, which is exhaustive; the coefficients are
then counted literally over all edge subsets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .graphs import (
    CanonicalForm,
    Graph,
    StrataError,
    canonical_form,
    contract_edges,
    count_isomorphisms,
    enumerate_graphs,
    graph_from_json,
    graph_to_json,
    validate,
)

LABELED = "labeled"
GENUS_FREE = "genus-free"


class ContextMismatch(StrataError):
    pass


class UnstablePair(StrataError):
    pass


class UnstableTarget(StrataError):
    pass


def _check_context(g, n, mode):
    if mode not in (LABELED, GENUS_FREE):
        raise ContextMismatch(f"unknown mode {mode!r}")
    if 2 * g - 2 + n <= 0:
        raise UnstablePair(f"(g, n) = ({g}, {n}) violates 2g - 2 + n > 0")


def _check_key(graph, g, n, mode):
    validate(graph)
    if graph.num_legs != n:
        raise ContextMismatch(f"graph has {graph.num_legs} legs, context wants {n}")
    if mode == LABELED:
        if not graph.is_genus_labeled:
            raise ContextMismatch("labeled context holds a genus-free graph")
        if graph.total_genus() != g:
            raise ContextMismatch(
                f"graph has genus {graph.total_genus()}, context wants {g}"
            )
    elif graph.is_genus_labeled:
        raise ContextMismatch("genus-free context holds a genus-labeled graph")


@dataclass(frozen=True)
class AlgebraElement:
    """Exact-rational combination of canonical graphs in a fixed (g, n, mode)
    context.  terms is sorted by canonical encoding and holds no zeros."""

    g: int
    n: int
    mode: str
    terms: tuple  # of (CanonicalForm, Fraction)

    @staticmethod
    def from_dict(g, n, mode, term_map, checked=False):
        _check_context(g, n, mode)
        items = []
        for cf, coeff in term_map.items():
            coeff = Fraction(coeff)
            if coeff == 0:
                continue
            if not checked:
                _check_key(cf.graph, g, n, mode)
            items.append((cf, coeff))
        items.sort(key=lambda it: it[0].encoding)
        return AlgebraElement(g, n, mode, tuple(items))

    def as_dict(self):
        return dict(self.terms)

    def is_zero(self):
        return not self.terms

    def degrees(self):
        return sorted({cf.graph.num_edges for cf, _ in self.terms})

    def coefficient(self, graph):
        cf = canonical_form(graph)
        for key, coeff in self.terms:
            if key == cf:
                return coeff
        return Fraction(0)

    def _require_same_context(self, other):
        if (self.g, self.n, self.mode) != (other.g, other.n, other.mode):
            raise ContextMismatch(
                f"contexts differ: ({self.g},{self.n},{self.mode}) vs "
                f"({other.g},{other.n},{other.mode})"
            )

    def __add__(self, other):
        self._require_same_context(other)
        out = self.as_dict()
        for cf, coeff in other.terms:
            new = out.get(cf, Fraction(0)) + coeff
            if new == 0:
                out.pop(cf, None)
            else:
                out[cf] = new
        return AlgebraElement.from_dict(self.g, self.n, self.mode, out, checked=True)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        c = Fraction(c)
        if c == 0:
            return zero(self.g, self.n, self.mode)
        return AlgebraElement.from_dict(
            self.g,
            self.n,
            self.mode,
            {cf: coeff * c for cf, coeff in self.terms},
            checked=True,
        )

    def __mul__(self, other):
        if self.mode == LABELED:
            return mul(self, other)
        return mul_genus_free(self, other)


def zero(g, n, mode=LABELED):
    _check_context(g, n, mode)
    return AlgebraElement(g, n, mode, ())


def unit(g, n, mode=LABELED):
    """Class of the edgeless graph: one vertex carrying every leg."""
    if mode == LABELED:
        graph = Graph((g,), (), (0,) * n)
    else:
        graph = Graph((None,), (), (0,) * n)
    return make_class(graph, g=g)


def make_class(graph, g=None):
    """The basis element of a single graph, coefficient one."""
    if graph.is_genus_labeled:
        gg = graph.total_genus()
        if g is not None and g != gg:
            raise ContextMismatch(f"graph genus {gg} != requested {g}")
        return AlgebraElement.from_dict(
            gg, graph.num_legs, LABELED, {canonical_form(graph): Fraction(1)}
        )
    if g is None:
        raise ContextMismatch("genus-free class needs a target genus")
    return AlgebraElement.from_dict(
        g, graph.num_legs, GENUS_FREE, {canonical_form(graph): Fraction(1)}
    )


def add(e1, e2):
    return e1 + e2


def scale(e, c):
    return e.scale(c)


# ---------------------------------------------------------------------------
# the product


def _stubs(graph):
    """Per vertex: the ordered list of attachment slots (legs and edge ends)."""
    stubs = [[] for _ in range(graph.num_vertices)]
    for lbl, v in enumerate(graph.legs, start=1):
        stubs[v].append(("l", lbl))
    for k, (i, j) in enumerate(graph.edges):
        stubs[i].append(("e", k, 0))
        stubs[j].append(("e", k, 1))
    return stubs


def _glue(base, stubs, locals_):
    """Replace each vertex of base with its local graph; base edges and legs
    reattach to the local vertex holding the matching stub."""
    offset = []
    genera = []
    total = 0
    for loc in locals_:
        offset.append(total)
        total += loc.num_vertices
        genera.extend(loc.genera)
    where = {}
    for v, loc in enumerate(locals_):
        for pos, stub in enumerate(stubs[v]):
            where[stub] = offset[v] + loc.legs[pos]
    edges = []
    for loc, off in zip(locals_, offset):
        edges.extend((i + off, j + off) for i, j in loc.edges)
    for k in range(base.num_edges):
        edges.append((where[("e", k, 0)], where[("e", k, 1)]))
    legs = tuple(where[("l", lbl)] for lbl in range(1, base.num_legs + 1))
    return Graph(tuple(genera), tuple(edges), legs)


@lru_cache(maxsize=None)
def _substitution_candidates(graph, extra):
    """Canonical forms of every graph C with |E(base)| + extra edges that
    contracts onto `graph` by collapsing the inserted edges.  Exhaustive: any
    C admitting a contraction onto `graph` shows up (possibly relabeled)."""
    stubs = _stubs(graph)
    labeled = graph.is_genus_labeled
    nv = graph.num_vertices
    found = {}
    for comp in _compositions(extra, nv):
        options = []
        for v in range(nv):
            budget = graph.genera[v] if labeled else None
            opts = enumerate_graphs(
                len(stubs[v]),
                comp[v],
                genus=budget,
                mode=LABELED if labeled else GENUS_FREE,
            )
            if not opts:
                options = None
                break
            options.append([cf.graph for cf in opts])
        if options is None:
            continue
        for locals_ in itertools.product(*options):
            cf = canonical_form(_glue(graph, stubs, locals_))
            found[cf.encoding] = cf
    return tuple(found[k] for k in sorted(found))


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _mul_classes(cf1, cf2):
    """Product of two basis classes as ((CanonicalForm, Fraction), ...)."""
    g1, g2 = cf1.graph, cf2.graph
    d1, d2 = g1.num_edges, g2.num_edges
    out = []
    for cf in _substitution_candidates(g1, d2):
        cand = cf.graph
        c = 0
        for e1 in itertools.combinations(range(cand.num_edges), d2):
            m1 = count_isomorphisms(contract_edges(cand, e1), g1)
            if not m1:
                continue
            rest = tuple(k for k in range(cand.num_edges) if k not in e1)
            m2 = count_isomorphisms(contract_edges(cand, rest), g2)
            if m2:
                c += m1 * m2
        if c:
            out.append((cf, Fraction(c, cf.aut_order)))
    return tuple(out)


def partition_count(cand, g1, g2):
    """Bare partition count: edge partitions E1 | E2 of cand with cand/E1
    isomorphic to g1 and cand/E2 isomorphic to g2 (no isomorphism choices)."""
    d2 = g2.num_edges
    if g1.num_edges + d2 != cand.num_edges:
        return 0
    c = 0
    for e1 in itertools.combinations(range(cand.num_edges), d2):
        if not count_isomorphisms(contract_edges(cand, e1), g1):
            continue
        rest = tuple(k for k in range(cand.num_edges) if k not in e1)
        if count_isomorphisms(contract_edges(cand, rest), g2):
            c += 1
    return c


def _bilinear(e1, e2):
    e1._require_same_context(e2)
    acc = {}
    for cf1, c1 in e1.terms:
        for cf2, c2 in e2.terms:
            for cf, coeff in _mul_classes(cf1, cf2):
                acc[cf] = acc.get(cf, Fraction(0)) + c1 * c2 * coeff
    return AlgebraElement.from_dict(e1.g, e1.n, e1.mode, acc, checked=True)


def mul(e1, e2):
    """Product in the genus-labeled algebra."""
    if e1.mode != LABELED or e2.mode != LABELED:
        raise ContextMismatch("mul needs genus-labeled elements")
    return _bilinear(e1, e2)


def mul_genus_free(e1, e2):
    """Product in the genus-free algebra: same counting law, no genus labels."""
    if e1.mode != GENUS_FREE or e2.mode != GENUS_FREE:
        raise ContextMismatch("mul_genus_free needs genus-free elements")
    return _bilinear(e1, e2)


# ---------------------------------------------------------------------------
# genus-free expansion and the forgetful maps


def expand_genus_free(graph, g):
    """Sum of genus-labeled graphs over all distributions of g - h1 across the
    vertices; zero when h1 exceeds g."""
    if graph.is_genus_labeled:
        raise ContextMismatch("expand_genus_free takes a genus-free graph")
    validate(graph)
    n = graph.num_legs
    _check_context(g, n, LABELED)
    budget = g - graph.h1()
    acc = {}
    if budget >= 0:
        for dist in _compositions(budget, graph.num_vertices):
            cf = canonical_form(Graph(dist, graph.edges, graph.legs))
            acc[cf] = acc.get(cf, Fraction(0)) + 1
    return AlgebraElement.from_dict(g, n, LABELED, acc, checked=True)


def expand_element(e):
    """Linear extension of expand_genus_free using the element's genus."""
    if e.mode != GENUS_FREE:
        raise ContextMismatch("expand_element takes a genus-free element")
    out = zero(e.g, e.n, LABELED)
    for cf, coeff in e.terms:
        out = out + expand_genus_free(cf.graph, e.g).scale(coeff)
    return out


def pullback_forget(e):
    """Pullback along forgetting leg n+1: attach the new leg at every vertex."""
    if e.mode != LABELED:
        raise ContextMismatch("pullback_forget needs a genus-labeled element")
    acc = {}
    for cf, coeff in e.terms:
        graph = cf.graph
        for v in range(graph.num_vertices):
            key = canonical_form(graph.with_extra_leg(v))
            acc[key] = acc.get(key, Fraction(0)) + coeff
    return AlgebraElement.from_dict(e.g, e.n + 1, LABELED, acc, checked=True)


def pushforward_psi_forget(arg):
    """Pushforward of (psi at the last leg) times the class, along forgetting
    that leg: strips leg n and scales by 2g_v - 2 + n_v measured after the
    strip.  Accepts a graph or an element (extended linearly)."""
    if isinstance(arg, Graph):
        e = make_class(arg)
    else:
        e = arg
    if e.mode != LABELED:
        raise ContextMismatch("pushforward_psi_forget needs genus labels")
    if e.n == 0:
        raise UnstableTarget("no leg to forget")
    if 2 * e.g - 2 + (e.n - 1) <= 0:
        raise UnstableTarget(
            f"target (g, n) = ({e.g}, {e.n - 1}) violates 2g - 2 + n > 0"
        )
    acc = {}
    for cf, coeff in e.terms:
        graph = cf.graph
        v = graph.legs[-1]
        stripped = graph.without_last_leg()
        factor = 2 * stripped.genera[v] - 2 + stripped.valences[v]
        if factor == 0:
            continue
        key = canonical_form(stripped)
        acc[key] = acc.get(key, Fraction(0)) + coeff * factor
    return AlgebraElement.from_dict(e.g, e.n - 1, LABELED, acc, checked=True)


# ---------------------------------------------------------------------------
# JSON interchange


def element_to_json(e):
    return {
        "g": e.g,
        "n": e.n,
        "mode": e.mode,
        "terms": [
            {"graph": graph_to_json(cf.graph), "coeff": str(coeff)}
            for cf, coeff in e.terms
        ],
    }


def element_from_json(data):
    g = data["g"]
    n = data["n"]
    mode = data["mode"]
    acc = {}
    for item in data["terms"]:
        cf = canonical_form(graph_from_json(item["graph"]))
        acc[cf] = acc.get(cf, Fraction(0)) + Fraction(item["coeff"])
    return AlgebraElement.from_dict(g, n, mode, acc)
