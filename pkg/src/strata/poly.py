"""Exact polynomial interpolation over the rationals."""

from __future__ import annotations

from fractions import Fraction


def lagrange_interpolate(points):
    """Coefficients (ascending powers) of the unique polynomial of degree
    < len(points) through the given (x, y) pairs, as exact Fractions."""
    xs = [Fraction(x) for x, _ in points]
    if len(set(xs)) != len(xs):
        raise ValueError("interpolation nodes must be distinct")
    m = len(points)
    coeffs = [Fraction(0)] * m
    for i, (xi, yi) in enumerate(points):
        # numerator polynomial prod_{j != i} (x - x_j), built up term by term
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j, xj in enumerate(xs):
            if j == i:
                continue
            basis = [Fraction(0)] + basis
            for t in range(len(basis) - 1):
                basis[t] -= xj * basis[t + 1]
            denom *= xi - xj
        w = Fraction(yi) / denom
        for t, c in enumerate(basis):
            coeffs[t] += w * c
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def poly_eval(coeffs, x):
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_degree(coeffs):
    for t in range(len(coeffs) - 1, -1, -1):
        if coeffs[t] != 0:
            return t
    return -1
