"""Slow, independent reference implementations used only by the tests.

Everything here avoids the shortcuts the library takes: automorphisms are
counted by brute force over half-edge permutations, isomorphism is decided by
searching vertex bijections, enumeration dedupes by pairwise isomorphism
tests, weightings are filtered from all r^(2d) assignments, and interpolation
solves the Vandermonde system by Gaussian elimination.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from strata.graphs import Graph


def half_edges(graph):
    """Half-edge ids: ("e", k, side) for edge ends, ("l", i) for legs."""
    hs = []
    for k in range(graph.num_edges):
        hs.append(("e", k, 0))
        hs.append(("e", k, 1))
    for lbl in range(1, graph.num_legs + 1):
        hs.append(("l", lbl))
    return hs


def he_vertex(graph, h):
    if h[0] == "l":
        return graph.legs[h[1] - 1]
    return graph.edges[h[1]][h[2]]


def he_partner(h):
    if h[0] == "l":
        return h
    return ("e", h[1], 1 - h[2])


def brute_aut_order(graph):
    """|Aut| by checking every permutation of the half-edge set."""
    hs = half_edges(graph)
    n = len(hs)
    count = 0
    for perm in itertools.permutations(range(n)):
        image = {hs[a]: hs[perm[a]] for a in range(n)}
        # legs fixed pointwise
        if any(h[0] == "l" and image[h] != h for h in hs):
            continue
        # commutes with the edge involution
        if any(image[he_partner(h)] != he_partner(image[h]) for h in hs):
            continue
        # induces a well-defined vertex bijection preserving genus
        vmap = {}
        ok = True
        for h in hs:
            v, w = he_vertex(graph, h), he_vertex(graph, image[h])
            if vmap.setdefault(v, w) != w:
                ok = False
                break
        if not ok:
            continue
        if graph.num_vertices > 1 and len(set(vmap.values())) != len(vmap):
            continue
        if any(graph.genera[v] != graph.genera[w] for v, w in vmap.items()):
            continue
        count += 1
    return count


def vertex_isomorphic(a, b):
    """Isomorphism test by searching vertex bijections."""
    if (
        a.num_vertices != b.num_vertices
        or a.num_edges != b.num_edges
        or a.num_legs != b.num_legs
    ):
        return False
    for perm in itertools.permutations(range(a.num_vertices)):
        if any(a.genera[v] != b.genera[perm[v]] for v in range(a.num_vertices)):
            continue
        if any(perm[a.legs[i]] != b.legs[i] for i in range(a.num_legs)):
            continue
        ae = sorted(tuple(sorted((perm[i], perm[j]))) for i, j in a.edges)
        if ae == list(b.edges):
            return True
    return False


def brute_count_isomorphisms(a, b):
    """Number of half-edge isomorphisms a -> b by brute force."""
    ha, hb = half_edges(a), half_edges(b)
    if len(ha) != len(hb):
        return 0
    n = len(ha)
    count = 0
    for perm in itertools.permutations(range(n)):
        image = {ha[t]: hb[perm[t]] for t in range(n)}
        if any(h[0] == "l" and image[h] != h for h in ha):
            continue
        if any(image[he_partner(h)] != he_partner(image[h]) for h in ha):
            continue
        vmap = {}
        ok = True
        for h in ha:
            v, w = he_vertex(a, h), he_vertex(b, image[h])
            if vmap.setdefault(v, w) != w:
                ok = False
                break
        if not ok:
            continue
        if a.num_vertices != b.num_vertices:
            continue
        if len(set(vmap.values())) != len(vmap) and a.num_vertices > 1:
            continue
        if any(a.genera[v] != b.genera[w] for v, w in vmap.items()):
            continue
        count += 1
    return count


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _connected(nv, edges):
    parent = list(range(nv))

    def find(x):
        while parent[x] != x:
            x = parent[x] = parent[parent[x]]
        return x

    for i, j in edges:
        parent[find(i)] = find(j)
    return len({find(x) for x in range(nv)}) == 1


def naive_enumerate(n, d, genus=None, mode="labeled", h1_max=None):
    """Isomorphism classes by raw generation plus pairwise-iso dedupe."""
    reps = []
    for nv in range(1, d + 2):
        cycle = d - nv + 1
        if mode == "labeled" and cycle > genus:
            continue
        if h1_max is not None and cycle > h1_max:
            continue
        pairs = [(i, j) for i in range(nv) for j in range(i, nv)]
        for mult in itertools.combinations_with_replacement(pairs, d):
            if not _connected(nv, mult):
                continue
            for legs in itertools.product(range(nv), repeat=n):
                if mode == "labeled":
                    for dist in _compositions(genus - cycle, nv):
                        g = Graph(dist, mult, legs)
                        if not any(vertex_isomorphic(g, r) for r in reps):
                            reps.append(g)
                else:
                    g = Graph((None,) * nv, mult, legs)
                    if not any(vertex_isomorphic(g, r) for r in reps):
                        reps.append(g)
    return reps


def labeled_structure_count(nv, d, n, genus=None):
    """Connected structures on labeled vertices AND labeled half-edges.

    Counts tuples (half-edge home function, perfect matching of the 2d edge
    half-edges, leg placement, genus distribution) that are connected; each
    isomorphism class contributes nv! * (2d)! / |Aut| of them, which is the
    consistency check the enumeration tests use.
    """
    total = 0
    slots = list(range(2 * d))

    def matchings(items):
        if not items:
            yield ()
            return
        first, rest = items[0], items[1:]
        for t, other in enumerate(rest):
            for sub in matchings(rest[:t] + rest[t + 1 :]):
                yield ((first, other),) + sub

    genus_choices = [None]
    if genus is not None:
        cycle = d - nv + 1
        if cycle < 0 or genus - cycle < 0:
            return 0
        genus_choices = list(_compositions(genus - cycle, nv))
    for home in itertools.product(range(nv), repeat=2 * d):
        for match in matchings(slots):
            edges = tuple(
                tuple(sorted((home[x], home[y]))) for x, y in match
            )
            if not _connected(nv, edges):
                continue
            for _legs in itertools.product(range(nv), repeat=n):
                total += len(genus_choices)
    return total


def naive_weightings(graph, a, r):
    """All residue assignments on half-edges satisfying the congruences,
    found by scanning all r^(2d) edge assignments."""
    n = graph.num_legs
    if sum(a) % r:
        return []
    leg_w = tuple(ai % r for ai in a)
    out = []
    for assign in itertools.product(range(r), repeat=2 * graph.num_edges):
        ok = True
        for k in range(graph.num_edges):
            if (assign[2 * k] + assign[2 * k + 1]) % r:
                ok = False
                break
        if not ok:
            continue
        sums = [0] * graph.num_vertices
        for k, (i, j) in enumerate(graph.edges):
            sums[i] += assign[2 * k]
            sums[j] += assign[2 * k + 1]
        for lbl in range(n):
            sums[graph.legs[lbl]] += leg_w[lbl]
        if any(s % r for s in sums):
            continue
        out.append(
            (
                leg_w,
                tuple(
                    (assign[2 * k], assign[2 * k + 1])
                    for k in range(graph.num_edges)
                ),
            )
        )
    return out


def naive_edge_term_sum(graph, a, r):
    total = 0
    for _legs, edge_vals in naive_weightings(graph, a, r):
        prod = 1
        for w0, w1 in edge_vals:
            prod *= w0 * w1
        total += prod
    return Fraction(total, 2 ** graph.num_edges)


def gauss_interpolate(points):
    """Coefficients (ascending) of the unique interpolating polynomial,
    via Gaussian elimination over exact rationals."""
    m = len(points)
    rows = [
        [Fraction(x) ** p for p in range(m)] + [Fraction(y)]
        for x, y in points
    ]
    for col in range(m):
        piv = next(t for t in range(col, m) if rows[t][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = rows[col][col]
        rows[col] = [q / inv for q in rows[col]]
        for t in range(m):
            if t != col and rows[t][col] != 0:
                factor = rows[t][col]
                rows[t] = [q - factor * p for q, p in zip(rows[t], rows[col])]
    return [rows[t][m] for t in range(m)]


def naive_dr_coefficients(g, n, a, d, r):
    """Graph -> coefficient map of the degree-d graph sum at modulus r,
    computed with no spanning-tree shortcut and no cycle-number pruning."""
    coeffs = []
    for graph in naive_enumerate(n, d, mode="genus-free"):
        s = naive_edge_term_sum(graph, a, r)
        coeff = s / r ** graph.h1() / brute_aut_order(graph)
        coeffs.append((graph, coeff))
    return coeffs


def naive_dr_constant_term(g, n, a, d):
    """Per-graph constant terms of the graph sum, by sampling enough moduli
    and solving for the interpolating polynomial; returns (graph, Fraction)
    pairs for graphs with h1 <= g and nonzero constant term."""
    r0 = max(sum(abs(x) for x in a), 2 * d) + 1
    xs = list(range(r0, r0 + 2 * d + 2))
    checks = [xs[-1] + 1, xs[-1] + 2]
    columns = {r: naive_dr_coefficients(g, n, a, d, r) for r in xs + checks}
    graphs = [gr for gr, _ in columns[xs[0]]]
    out = []
    for t, graph in enumerate(graphs):
        ys = [columns[r][t][1] for r in xs]
        poly = gauss_interpolate(list(zip(xs, ys)))
        # degree must not exceed 2d
        assert all(c == 0 for c in poly[2 * d + 1 :]), "unexpected degree"
        for extra in checks:
            val = sum(c * Fraction(extra) ** p for p, c in enumerate(poly))
            assert val == columns[extra][t][1], "interpolant fails validation"
        if graph.h1() <= g and poly[0] != 0:
            out.append((graph, poly[0]))
    return out
