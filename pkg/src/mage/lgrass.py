"""The affine minors chart of the Lagrangian Grassmannian LGr(n, 2n).

A point of the big cell is a symmetric n x n rational matrix P; its image
under the Plucker embedding is the projectivized list of all minors of P,
indexed by unordered pairs {I, J} of equal-size row/column subsets, with the
empty minor normalized to 1.  Along rank-one directions P + t * xi xi^T every
minor is affine in t, which is what turns the prolongation curves into
straight lines.  Hyperplane sections of the embedding are exactly the
generalized Monge-Ampere equations: linear combinations of minors.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Mapping, Sequence

from .linalg import QMatrix, nullspace_dense
from .poly import MageError, MultiPoly, RationalFunction
from .symbols import PDEFunction

ChartKey = tuple[tuple[int, ...], tuple[int, ...]]


@dataclass(frozen=True)
class LagrangianPlane:
    """A chart point: symmetric n x n matrix of rationals."""

    n: int
    P: tuple[tuple[Fraction, ...], ...]

    @staticmethod
    def make(entries: Sequence[Sequence]) -> "LagrangianPlane":
        n = len(entries)
        P = tuple(tuple(Fraction(x) for x in row) for row in entries)
        if any(len(row) != n for row in P):
            raise ValueError("matrix is not square")
        for i in range(n):
            for j in range(i + 1, n):
                if P[i][j] != P[j][i]:
                    raise ValueError("matrix is not symmetric")
        return LagrangianPlane(n, P)

    @staticmethod
    def from_point(n: int, point: Mapping[str, Fraction]) -> "LagrangianPlane":
        entries = [[Fraction(0)] * n for _ in range(n)]
        for i in range(1, n + 1):
            for j in range(i, n + 1):
                v = Fraction(point[f"p{i}{j}"])
                entries[i - 1][j - 1] = v
                entries[j - 1][i - 1] = v
        return LagrangianPlane.make(entries)


def chart_keys(n: int) -> list[ChartKey]:
    """Canonical coordinate order: by size, then by (rows, cols) ascending.

    Keys are unordered pairs represented with rows <= cols lexicographically;
    subsets are 1-based ascending tuples.
    """
    out: list[ChartKey] = []
    for size in range(n + 1):
        subs = [tuple(c) for c in combinations(range(1, n + 1), size)]
        pairs = set()
        for I in subs:
            for J in subs:
                pairs.add((I, J) if I <= J else (J, I))
        out.extend(sorted(pairs))
    return out


def all_minors(entries: Sequence[Sequence], n: int, one):
    """All (I, J)-minors of a matrix over any commutative ring.

    `one` is the ring unit, used for the empty minor.  Returns a dict over
    ordered (I, J) pairs of 1-based ascending index tuples.
    """
    memo: dict[ChartKey, object] = {((), ()): one}

    def det(I: tuple[int, ...], J: tuple[int, ...]):
        key = (I, J)
        if key in memo:
            return memo[key]
        i0 = I[0]
        rest = I[1:]
        val = None
        for pos, j in enumerate(J):
            sub = det(rest, J[:pos] + J[pos + 1:])
            term = entries[i0 - 1][j - 1] * sub
            if pos % 2:
                term = -term
            val = term if val is None else val + term
        memo[key] = val
        return val

    for size in range(1, n + 1):
        for I in combinations(range(1, n + 1), size):
            for J in combinations(range(1, n + 1), size):
                det(I, J)
    return memo


@dataclass
class PlueckerVector:
    """Chart image: one value per unordered pair of equal-size subsets."""

    n: int
    coords: dict[ChartKey, Fraction]

    def as_list(self) -> list[Fraction]:
        return [self.coords[k] for k in chart_keys(self.n)]

    def value(self, rows: Sequence[int], cols: Sequence[int]) -> Fraction:
        I, J = tuple(sorted(rows)), tuple(sorted(cols))
        key = (I, J) if I <= J else (J, I)
        return self.coords[key]

    def scale(self, c: Fraction) -> "PlueckerVector":
        return PlueckerVector(self.n, {k: v * c for k, v in self.coords.items()})

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "coords": [
                {"rows": list(k[0]), "cols": list(k[1]), "value": str(self.coords[k])}
                for k in chart_keys(self.n)
            ],
        }


def minors_chart(L: LagrangianPlane) -> PlueckerVector:
    """All minors of P, exact, with the empty minor equal to 1."""
    minors = all_minors(L.P, L.n, Fraction(1))
    coords = {}
    for key in chart_keys(L.n):
        coords[key] = Fraction(minors[key])
    return PlueckerVector(L.n, coords)


@lru_cache(maxsize=None)
def symbolic_chart(n: int) -> tuple[tuple[ChartKey, MultiPoly], ...]:
    """Minors of the generic symmetric matrix (p_ij) as polynomials."""
    entries = [[MultiPoly.var(f"p{min(i, j)}{max(i, j)}") for j in range(1, n + 1)]
               for i in range(1, n + 1)]
    minors = all_minors(entries, n, MultiPoly.one())
    return tuple((key, minors[key]) for key in chart_keys(n))


def tangent_rank(v: Sequence[Sequence]) -> int:
    """Exact rank of a symmetric tangent vector in the S^2 identification."""
    return QMatrix([[Fraction(x) for x in row] for row in v]).rank()


@dataclass
class RankOneLine:
    """The curve t -> minors_chart(P + t xi xi^T) with a straightness certificate."""

    n: int
    coords: dict[ChartKey, MultiPoly]  # polynomials in t (and any xi parameters)
    affine: bool  # True when every coordinate has t-degree <= 1
    degenerate: bool  # True when xi = 0 (constant curve)
    t2_coefficients: dict[ChartKey, MultiPoly]  # quadratic-and-higher parts


def rank_one_line(L: LagrangianPlane, xi: Sequence) -> RankOneLine:
    """Plucker image of the rank-one line through P in direction xi xi^T.

    Entries of xi may be rationals or polynomials (e.g. a symbolic slope).
    """
    n = L.n
    t = MultiPoly.var("t")
    vals = [x if isinstance(x, MultiPoly) else MultiPoly.const(Fraction(x)) for x in xi]
    if len(vals) != n:
        raise ValueError("covector length must be n")
    degenerate = all(v.is_zero() for v in vals)
    entries = []
    for i in range(n):
        row = []
        for j in range(n):
            row.append(MultiPoly.const(L.P[i][j]) + t * vals[i] * vals[j])
        entries.append(row)
    minors = all_minors(entries, n, MultiPoly.one())
    coords = {}
    t2 = {}
    affine = True
    for key in chart_keys(n):
        p = minors[key]
        coords[key] = p
        high = MultiPoly(p.vars, {e: c for e, c in p.terms.items()
                                  if "t" in p.vars and e[p.vars.index("t")] >= 2})
        if not high.is_zero():
            affine = False
            t2[key] = high
    return RankOneLine(n, coords, affine, degenerate, t2)


@dataclass
class HyperplaneCoefficients:
    """One coefficient per chart coordinate, taken modulo minor relations."""

    n: int
    values: dict[ChartKey, object]  # Fraction or MultiPoly (symbolic parameters)

    @staticmethod
    def from_list(n: int, values: Sequence) -> "HyperplaneCoefficients":
        keys = chart_keys(n)
        if len(values) != len(keys):
            raise ValueError(f"expected {len(keys)} coefficients for n={n}")
        vals = {}
        for k, v in zip(keys, values):
            if not isinstance(v, MultiPoly):
                v = Fraction(v)
            vals[k] = v
        return HyperplaneCoefficients(n, vals)

    def dense(self) -> list:
        keys = chart_keys(self.n)
        return [self.values.get(k, Fraction(0)) for k in keys]


@lru_cache(maxsize=None)
def minor_relations(n: int) -> tuple[tuple[Fraction, ...], ...]:
    """Basis (canonical RREF) of the linear relations among the chart minors.

    Derived by exact nullspace over random rational evaluations and then
    confirmed symbolically against the generic minors.
    """
    keys = chart_keys(n)
    m = len(keys)
    rng = random.Random(79 + n)
    samples = m + 12
    for _ in range(3):
        rows = []
        for _ in range(samples):
            entries = [[Fraction(0)] * n for _ in range(n)]
            for i in range(n):
                for j in range(i, n):
                    v = Fraction(rng.randint(-9, 9))
                    entries[i][j] = v
                    entries[j][i] = v
            chart = minors_chart(LagrangianPlane.make(entries))
            rows.append(chart.as_list())
        basis = nullspace_dense(rows, m)
        sym = symbolic_chart(n)
        ok = True
        for vec in basis:
            total = MultiPoly.zero()
            for c, (_, poly) in zip(vec, sym):
                if c != 0:
                    total = total + poly.scale(c)
            if not total.is_zero():
                ok = False
                break
        if ok:
            return tuple(tuple(v) for v in basis)
        samples *= 2
    raise RuntimeError("relation basis failed symbolic confirmation")


def canonicalize_coefficients(c: HyperplaneCoefficients) -> list:
    """Reduce a coefficient vector modulo the relation space (pivot entries to 0)."""
    dense = c.dense()
    keys = chart_keys(c.n)
    for rel in minor_relations(c.n):
        pivot = next(i for i, x in enumerate(rel) if x != 0)
        f = dense[pivot]
        if isinstance(f, Fraction) and f == 0:
            continue
        if isinstance(f, MultiPoly) and f.is_zero():
            continue
        for i, x in enumerate(rel):
            if x != 0:
                dense[i] = dense[i] - f * x
    return dense


def hyperplane_section(c: HyperplaneCoefficients) -> PDEFunction:
    """The generalized Monge-Ampere function F_c(P) = sum_k c_k * minor_k(P)."""
    dense = canonicalize_coefficients(c)
    if all((x == 0 if isinstance(x, Fraction) else x.is_zero()) for x in dense):
        raise MageError("hyperplane coefficients vanish modulo the minor relations")
    total = MultiPoly.zero()
    for coeff, (_, poly) in zip(c.dense(), symbolic_chart(c.n)):
        if isinstance(coeff, Fraction):
            if coeff != 0:
                total = total + poly.scale(coeff)
        elif not coeff.is_zero():
            total = total + coeff * poly
    return PDEFunction(c.n, RationalFunction.from_poly(total))


def rational_inverse(w: PlueckerVector) -> LagrangianPlane:
    """Invert the chart: recover P from the size-1 minors over the empty minor."""
    w0 = w.coords[((), ())]
    if w0 == 0:
        raise MageError("outside the big cell: the empty-minor coordinate is zero")
    n = w.n
    entries = [[Fraction(0)] * n for _ in range(n)]
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            v = w.value((i,), (j,)) / w0
            entries[i - 1][j - 1] = v
            entries[j - 1][i - 1] = v
    return LagrangianPlane.make(entries)


def ma_coefficients_n2(k0, k1, k2, k3, k4) -> HyperplaneCoefficients:
    """n=2 convenience: k0*det + k1*p11 + k2*p12 + k3*p22 + k4."""
    return HyperplaneCoefficients.from_list(2, [k4, k1, k2, k3, k0])
