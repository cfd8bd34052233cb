"""Decorated stable-graph expressions and the conversion onto them.

A decorated stratum is a stable genus-labeled graph carrying psi exponents on
its half-edges (legs and edge ends) and a kappa monomial on each vertex.
Conversion sends any graph class to such an expression: semistable chains of
genus-0 valence-2 vertices collapse onto an edge or a leg with binomial psi
decorations, and genus-0 valence-1 vertices are resolved by attaching a
temporary leg, multiplying by minus its psi class, and pushing the leg
forward (which is where kappa classes come from).

The pushforward of one marking rewrites each vertex factor with the standard
comparison relations: kappa_c upstairs = kappa_c + psi_m^c, psi_i upstairs =
psi_i + D_i, with D_i D_j = D_i psi_m = D_i psi_i = 0 and D_i^2 =
-D_i psi_i-bar; then psi_m^(b+1) pushes to kappa_b (kappa_0 = 2g - 2 + n on
the target), D_i pushes to 1, and anything free of both dies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from .algebra import (
    GENUS_FREE,
    ContextMismatch,
    UnstablePair,
    UnstableTarget,
    _substitution_candidates,
    expand_element,
)
from .graphs import (
    Graph,
    StrataError,
    _canonicalize,
    canonical_form,
    contract_edges,
    count_isomorphisms,
    graph_from_json,
    graph_to_json,
    is_stable,
    stability,
    validate,
)


class NotStable(StrataError):
    pass


class DecoratedInputUnsupported(StrataError):
    pass


class MarkingNotPresent(StrataError):
    pass


class CyclicAllUnstable(StrataError):
    pass


@dataclass(frozen=True)
class DecoratedStratum:
    """Stable graph with psi exponents per half-edge and kappa indices per
    vertex.  edge_psi[k] pairs with graph.edges[k] (first entry at the first
    endpoint of the stored pair); kappa entries are sorted index tuples."""

    graph: Graph
    leg_psi: tuple = ()
    edge_psi: tuple = ()
    kappa: tuple = ()

    def __post_init__(self):
        g = self.graph
        leg_psi = tuple(self.leg_psi) or (0,) * g.num_legs
        edge_psi = tuple(tuple(pq) for pq in self.edge_psi) or ((0, 0),) * g.num_edges
        kappa = tuple(tuple(sorted(ks)) for ks in self.kappa) or ((),) * g.num_vertices
        if len(leg_psi) != g.num_legs or len(edge_psi) != g.num_edges:
            raise DecoratedInputUnsupported("psi data does not match the graph")
        if len(kappa) != g.num_vertices:
            raise DecoratedInputUnsupported("kappa data does not match the graph")
        if any(x < 0 for x in leg_psi) or any(
            p < 0 or q < 0 for p, q in edge_psi
        ):
            raise DecoratedInputUnsupported("psi exponents must be nonnegative")
        if any(k < 1 for ks in kappa for k in ks):
            raise DecoratedInputUnsupported("kappa indices must be >= 1")
        if not is_stable(g):
            raise NotStable("decorated strata live on stable graphs")
        object.__setattr__(self, "leg_psi", leg_psi)
        object.__setattr__(self, "edge_psi", edge_psi)
        object.__setattr__(self, "kappa", kappa)

    def codimension(self):
        return (
            self.graph.num_edges
            + sum(self.leg_psi)
            + sum(p + q for p, q in self.edge_psi)
            + sum(sum(ks) for ks in self.kappa)
        )


@dataclass(frozen=True)
class CanonicalStratum:
    encoding: bytes
    stratum: DecoratedStratum = field(compare=False)


@lru_cache(maxsize=None)
def canonical_stratum(st):
    """Canonical form of a decorated stratum; decorations act as colors."""
    enc, ordering, _aut = _canonicalize(
        st.graph, edge_decor=st.edge_psi, vertex_decor=st.kappa, leg_decor=st.leg_psi
    )
    pos = {old: new for new, old in enumerate(ordering)}
    genera = tuple(st.graph.genera[o] for o in ordering)
    kappa = tuple(st.kappa[o] for o in ordering)
    paired = []
    for (i, j), (p, q) in zip(st.graph.edges, st.edge_psi):
        a, b = pos[i], pos[j]
        if a < b:
            paired.append(((a, b), (p, q)))
        elif b < a:
            paired.append(((b, a), (q, p)))
        else:
            paired.append(((a, a), tuple(sorted((p, q)))))
    paired.sort(key=lambda t: t[0])
    edges = tuple(e for e, _ in paired)
    edge_psi = tuple(d for _, d in paired)
    legs = tuple(pos[v] for v in st.graph.legs)
    canon = DecoratedStratum(Graph(genera, edges, legs), st.leg_psi, edge_psi, kappa)
    return CanonicalStratum(repr(enc).encode("ascii"), canon)


@dataclass(frozen=True)
class TautExpr:
    """Exact-rational combination of canonical decorated strata on (g, n)."""

    g: int
    n: int
    terms: tuple  # of (CanonicalStratum, Fraction)

    @staticmethod
    def from_dict(g, n, term_map):
        items = []
        for key, coeff in term_map.items():
            coeff = Fraction(coeff)
            if coeff == 0:
                continue
            st = key.stratum
            if st.graph.num_legs != n or st.graph.total_genus() != g:
                raise ContextMismatch("stratum does not live on the context space")
            items.append((key, coeff))
        items.sort(key=lambda it: it[0].encoding)
        return TautExpr(g, n, tuple(items))

    def as_dict(self):
        return dict(self.terms)

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        if (self.g, self.n) != (other.g, other.n):
            raise ContextMismatch("cannot add expressions on different spaces")
        out = self.as_dict()
        for key, coeff in other.terms:
            new = out.get(key, Fraction(0)) + coeff
            if new == 0:
                out.pop(key, None)
            else:
                out[key] = new
        return TautExpr.from_dict(self.g, self.n, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        c = Fraction(c)
        if c == 0:
            return TautExpr(self.g, self.n, ())
        return TautExpr.from_dict(
            self.g, self.n, {key: coeff * c for key, coeff in self.terms}
        )

    def psi_times(self, leg_label, power=1):
        """Multiply by the psi class at a leg (projection formula: the leg's
        exponent goes up on every stratum)."""
        out = {}
        for key, coeff in self.terms:
            st = key.stratum
            if not 1 <= leg_label <= st.graph.num_legs:
                raise MarkingNotPresent(f"no leg {leg_label}")
            lp = list(st.leg_psi)
            lp[leg_label - 1] += power
            new = canonical_stratum(
                DecoratedStratum(st.graph, tuple(lp), st.edge_psi, st.kappa)
            )
            out[new] = out.get(new, Fraction(0)) + coeff
        return TautExpr.from_dict(self.g, self.n, out)


def zero_expr(g, n):
    return TautExpr(g, n, ())


def stratum_expr(st, coeff=1):
    key = canonical_stratum(st)
    return TautExpr.from_dict(
        st.graph.total_genus(), st.graph.num_legs, {key: Fraction(coeff)}
    )


def canonicalize_expr(term_map, g, n):
    """Build an expression from {DecoratedStratum: coeff}, merging
    decoration-colored isomorphic strata."""
    acc = {}
    for st, coeff in term_map.items():
        key = canonical_stratum(st)
        acc[key] = acc.get(key, Fraction(0)) + Fraction(coeff)
    return TautExpr.from_dict(g, n, acc)


# ---------------------------------------------------------------------------
# conversion of graph classes


def convert(graph):
    """The class of an arbitrary genus-labeled graph, written on decorated
    stable strata.  Stable input gives a single undecorated term."""
    if not graph.is_genus_labeled:
        raise ContextMismatch("convert needs a genus-labeled graph")
    validate(graph)
    g = graph.total_genus()
    n = graph.num_legs
    if 2 * g - 2 + n <= 0:
        raise UnstablePair(f"(g, n) = ({g}, {n}) violates 2g - 2 + n > 0")
    val = graph.valences
    ones = [
        v
        for v in range(graph.num_vertices)
        if graph.genera[v] == 0 and val[v] == 1
    ]
    work = graph
    for v in ones:
        work = work.with_extra_leg(v)
    expr = _resolve_semistable(work)
    for j in range(len(ones)):
        expr = expr.psi_times(n + 1 + j).scale(-1)
    for label in range(n + len(ones), n, -1):
        expr = forget_pushforward(expr, label)
    return expr


def convert_element(e):
    """Linear extension of convert; genus-free elements expand first."""
    if e.mode == GENUS_FREE:
        e = expand_element(e)
    out = zero_expr(e.g, e.n)
    for cf, coeff in e.terms:
        out = out + convert(cf.graph).scale(coeff)
    return out


def _resolve_semistable(graph):
    """Collapse chains of genus-0 valence-2 vertices into decorated edges and
    legs.  Every vertex must satisfy 2g_v - 2 + n_v >= 0."""
    report = stability(graph)
    if "unstable" in report.vertex_status:
        raise UnstablePair("resolution needs a semistable graph")
    nv = graph.num_vertices
    val = graph.valences
    mid = [
        v for v in range(nv) if graph.genera[v] == 0 and val[v] == 2
    ]
    midset = set(mid)
    if not mid:
        return stratum_expr(DecoratedStratum(graph))

    # half-edges at each chain vertex
    slots = [[] for _ in range(nv)]
    for lbl, v in enumerate(graph.legs, start=1):
        slots[v].append(("l", lbl))
    for k, (i, j) in enumerate(graph.edges):
        slots[i].append(("e", k, 0))
        slots[j].append(("e", k, 1))

    # chain components among the unstable vertices
    seen = set()
    chains = []
    for start in mid:
        if start in seen:
            continue
        comp = {start}
        frontier = [start]
        while frontier:
            v = frontier.pop()
            seen.add(v)
            for k, (i, j) in enumerate(graph.edges):
                if i == v and j in midset and j not in comp:
                    comp.add(j)
                    frontier.append(j)
                elif j == v and i in midset and i not in comp:
                    comp.add(i)
                    frontier.append(i)
        internal = [
            k
            for k, (i, j) in enumerate(graph.edges)
            if i in comp and j in comp
        ]
        if len(internal) != len(comp) - 1:
            raise CyclicAllUnstable(
                "a cycle of genus-0 valence-2 vertices has no stable anchor"
            )
        ends = []
        for v in comp:
            for slot in slots[v]:
                if slot[0] == "l":
                    ends.append(slot)
                else:
                    k = slot[1]
                    i, j = graph.edges[k]
                    other = j if slot[2] == 0 else i
                    if other not in comp:
                        ends.append(slot)
        assert len(ends) == 2, "chain must have exactly two outward slots"
        chains.append((sorted(comp), tuple(sorted(ends)), internal))

    keep = [v for v in range(nv) if v not in midset]
    index = {v: t for t, v in enumerate(keep)}
    genera = tuple(graph.genera[v] for v in keep)
    chain_edges = {k for _, _, internal in chains for k in internal}
    boundary = set()
    for _, ends, _ in chains:
        boundary.update(e for e in ends if e[0] == "e")

    plain_edges = []
    plain_psi = []
    for k, (i, j) in enumerate(graph.edges):
        if k in chain_edges:
            continue
        if ("e", k, 0) in boundary or ("e", k, 1) in boundary:
            continue
        plain_edges.append((index[i], index[j]))
        plain_psi.append((0, 0))
    plain_legs = {}
    for lbl, v in enumerate(graph.legs, start=1):
        if v not in midset:
            plain_legs[lbl] = (index[v], 0)

    # per chain: either a new decorated edge or a relocated decorated leg
    factors = []  # list of term lists: (coeff, kind, payload)
    for comp, ends, internal in chains:
        k = len(comp)
        leg_ends = [e for e in ends if e[0] == "l"]
        edge_ends = [e for e in ends if e[0] == "e"]
        if len(leg_ends) == 2:
            # whole graph would be a bare chain between two legs; the ambient
            # (g, n) check upstream makes this unreachable
            raise UnstablePair("chain with legs at both ends")
        if len(leg_ends) == 1:
            lbl = leg_ends[0][1]
            (_, ek, es) = edge_ends[0]
            i, j = graph.edges[ek]
            anchor = j if es == 0 else i
            sign = (-1) ** k
            factors.append(
                [
                    (
                        Fraction(sign, factorial(k)),
                        "leg",
                        (lbl, index[anchor], k),
                    )
                ]
            )
        else:
            (_, k1, s1), (_, k2, s2) = edge_ends
            i1, j1 = graph.edges[k1]
            a1 = j1 if s1 == 0 else i1
            i2, j2 = graph.edges[k2]
            a2 = j2 if s2 == 0 else i2
            u, w = index[a1], index[a2]
            sign = (-1) ** k
            terms = []
            for t in range(k + 1):
                coeff = Fraction(sign * comb(k, t), factorial(k + 1))
                terms.append((coeff, "edge", (u, w, t, k - t)))
            factors.append(terms)

    out = {}
    for picks in itertools.product(*factors):
        coeff = Fraction(1)
        edges = list(plain_edges)
        edge_psi = list(plain_psi)
        legs = dict(plain_legs)
        for c, kind, payload in picks:
            coeff *= c
            if kind == "leg":
                lbl, anchor, exp = payload
                legs[lbl] = (anchor, exp)
            else:
                u, w, p, q = payload
                if u <= w:
                    edges.append((u, w))
                    edge_psi.append((p, q))
                else:
                    edges.append((w, u))
                    edge_psi.append((q, p))
        order = sorted(range(len(edges)), key=lambda t: edges[t])
        new_graph = Graph(
            genera,
            tuple(edges[t] for t in order),
            tuple(legs[lbl][0] for lbl in sorted(legs)),
        )
        st = DecoratedStratum(
            new_graph,
            tuple(legs[lbl][1] for lbl in sorted(legs)),
            tuple(edge_psi[t] for t in order),
            ((),) * len(keep),
        )
        key = canonical_stratum(st)
        out[key] = out.get(key, Fraction(0)) + coeff
    return TautExpr.from_dict(graph.total_genus(), graph.num_legs, out)


# ---------------------------------------------------------------------------
# forgetful pushforward


def _push_vertex_monomial(e_m, markings, kappas, kappa0):
    """Pushforward of psi_m^e_m * prod psi_i^a_i * prod kappa_c at one vertex.

    markings: tuple of (key, exponent) for the retained markings; kappas: the
    vertex kappa indices; kappa0: the scalar 2g - 2 + n of the target vertex.
    Yields (coeff, {key: exponent}, kappa-out tuple).
    """
    base = dict(markings)
    out = []
    for mask in itertools.product((0, 1), repeat=len(kappas)):
        extra = sum(c for c, bit in zip(kappas, mask) if bit)
        kbar = tuple(sorted(c for c, bit in zip(kappas, mask) if not bit))
        total = e_m + extra
        if total >= 1:
            b = total - 1
            if b == 0:
                if kappa0:
                    out.append((Fraction(kappa0), dict(base), kbar))
            else:
                out.append((Fraction(1), dict(base), tuple(sorted(kbar + (b,)))))
        else:
            # no psi_m left: only the diagonal terms survive, one per marking
            for key, exp in markings:
                if exp >= 1:
                    dropped = dict(base)
                    dropped[key] = exp - 1
                    out.append((Fraction(1), dropped, kbar))
    return out


def forget_pushforward(expr, marking):
    """Push an expression on (g, n+1) forward along forgetting the last
    marking.  Every term needs a positive psi exponent at that marking or a
    vertex that stays stable once the leg is removed."""
    if marking != expr.n:
        raise MarkingNotPresent(
            f"can only forget the last marking ({expr.n}), not {marking}"
        )
    g, n_down = expr.g, expr.n - 1
    if 2 * g - 2 + n_down <= 0:
        raise UnstableTarget(
            f"target (g, n) = ({g}, {n_down}) violates 2g - 2 + n > 0"
        )
    acc = {}
    for key, coeff in expr.terms:
        st = key.stratum
        graph = st.graph
        v = graph.legs[-1]
        e_m = st.leg_psi[-1]
        stripped = graph.without_last_leg()
        down_val = stripped.valences[v]
        if 2 * graph.genera[v] - 2 + down_val <= 0:
            if e_m >= 1:
                # the vertex factor is a three-pointed rational curve, where
                # every positive-degree psi or kappa class vanishes
                continue
            raise UnstableTarget(
                "forgetting the marking destabilizes a vertex and no psi "
                "factor is present"
            )
        # retained markings at v
        markings = []
        for lbl, w in enumerate(stripped.legs, start=1):
            if w == v:
                markings.append((("l", lbl), st.leg_psi[lbl - 1]))
        for k, (i, j) in enumerate(graph.edges):
            if i == v:
                markings.append((("e", k, 0), st.edge_psi[k][0]))
            if j == v:
                markings.append((("e", k, 1), st.edge_psi[k][1]))
        kappa0 = 2 * graph.genera[v] - 2 + down_val
        for c2, psis, kbar in _push_vertex_monomial(
            e_m, tuple(markings), st.kappa[v], kappa0
        ):
            leg_psi = list(st.leg_psi[:-1])
            edge_psi = [list(pq) for pq in st.edge_psi]
            for hkey, exp in psis.items():
                if hkey[0] == "l":
                    leg_psi[hkey[1] - 1] = exp
                else:
                    edge_psi[hkey[1]][hkey[2]] = exp
            kappa = list(st.kappa)
            kappa[v] = kbar
            new = DecoratedStratum(
                stripped,
                tuple(leg_psi),
                tuple(tuple(pq) for pq in edge_psi),
                tuple(kappa),
            )
            nk = canonical_stratum(new)
            acc[nk] = acc.get(nk, Fraction(0)) + coeff * c2
    return TautExpr.from_dict(g, n_down, acc)


# ---------------------------------------------------------------------------
# the undecorated stratum product


def gp_mul_strata(g1, g2):
    """Product of two undecorated stable strata via the excess-intersection
    law: sum over stable graphs C with two disjoint edge sets E1, E2 whose
    contractions recover the factors, weighted by isomorphism counts over
    |Aut(C)|, with one factor (-psi' - psi'') for every leftover edge."""
    for graph in (g1, g2):
        if not graph.is_genus_labeled or not is_stable(graph):
            raise NotStable("gp_mul_strata needs stable genus-labeled graphs")
    if (g1.total_genus(), g1.num_legs) != (g2.total_genus(), g2.num_legs):
        raise ContextMismatch("factors live on different spaces")
    g = g1.total_genus()
    n = g1.num_legs
    d1, d2 = g1.num_edges, g2.num_edges
    acc = {}
    for total in range(max(d1, d2), d1 + d2 + 1):
        for cf in _substitution_candidates(g1, total - d1):
            cand = cf.graph
            if not is_stable(cand):
                continue
            aut = cf.aut_order
            s1, s2 = total - d1, total - d2
            for e1 in itertools.combinations(range(total), s1):
                m1 = count_isomorphisms(contract_edges(cand, e1), g1)
                if not m1:
                    continue
                rest = [k for k in range(total) if k not in e1]
                for e2 in itertools.combinations(rest, s2):
                    m2 = count_isomorphisms(contract_edges(cand, e2), g2)
                    if not m2:
                        continue
                    excess = [k for k in rest if k not in e2]
                    base = Fraction(m1 * m2, aut)
                    for sides in itertools.product((0, 1), repeat=len(excess)):
                        edge_psi = [[0, 0] for _ in range(total)]
                        for k, side in zip(excess, sides):
                            edge_psi[k][side] += 1
                        st = DecoratedStratum(
                            cand,
                            (0,) * n,
                            tuple(tuple(pq) for pq in edge_psi),
                            ((),) * cand.num_vertices,
                        )
                        key = canonical_stratum(st)
                        sign = (-1) ** len(excess)
                        acc[key] = acc.get(key, Fraction(0)) + sign * base
    return TautExpr.from_dict(g, n, acc)


# ---------------------------------------------------------------------------
# JSON interchange


def _half_edge_id(kind, *args):
    if kind == "l":
        return f"l{args[0]}"
    k, side = args
    return f"e{k}.{side}"


def stratum_to_json(st):
    psi = {}
    for lbl, exp in enumerate(st.leg_psi, start=1):
        if exp:
            psi[_half_edge_id("l", lbl)] = exp
    for k, (p, q) in enumerate(st.edge_psi):
        if p:
            psi[_half_edge_id("e", k, 0)] = p
        if q:
            psi[_half_edge_id("e", k, 1)] = q
    return {
        "graph": graph_to_json(st.graph),
        "psi": psi,
        "kappa": [list(ks) for ks in st.kappa],
    }


def stratum_from_json(data):
    graph = graph_from_json(data["graph"])
    leg_psi = [0] * graph.num_legs
    edge_psi = [[0, 0] for _ in range(graph.num_edges)]
    for key, exp in data.get("psi", {}).items():
        if key.startswith("l"):
            leg_psi[int(key[1:]) - 1] = exp
        else:
            k, side = key[1:].split(".")
            edge_psi[int(k)][int(side)] = exp
    kappa = tuple(tuple(ks) for ks in data.get("kappa", []))
    if not kappa:
        kappa = ((),) * graph.num_vertices
    return DecoratedStratum(
        graph, tuple(leg_psi), tuple(tuple(pq) for pq in edge_psi), kappa
    )


def expr_to_json(expr):
    return {
        "g": expr.g,
        "n": expr.n,
        "terms": [
            {**stratum_to_json(key.stratum), "coeff": str(coeff)}
            for key, coeff in expr.terms
        ],
    }


def expr_from_json(data):
    acc = {}
    for item in data["terms"]:
        key = canonical_stratum(stratum_from_json(item))
        acc[key] = acc.get(key, Fraction(0)) + Fraction(item["coeff"])
    return TautExpr.from_dict(data["g"], data["n"], acc)
