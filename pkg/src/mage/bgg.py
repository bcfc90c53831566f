"""The first invariant operator on chart functions and its polynomial kernel.

The operator of order r+1 sends f to the degree-2(r+1) covector polynomial
obtained by plugging xi (.) xi into every slot of the (r+1)-st flat
derivative; concretely it is the (r+1)-st derivative of t -> f(P + t xi xi^T)
at t = 0.  Its polynomial kernel in degree <= n*r consists exactly of the
chart restrictions of degree-r polynomials in the Plucker coordinates, i.e.
of degree-r combinations of minors; for r = 1 these are the Monge-Ampere
functions.  The kernel is computed by one exact nullspace over the monomial
basis of degree <= n*r.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Mapping, Sequence

from .linalg import sparse_nullspace
from .poly import CapExceededError, MultiPoly, second_jet_vars
from .lgrass import HyperplaneCoefficients, chart_keys, symbolic_chart


@dataclass
class XiPolynomial:
    """Homogeneous covector polynomial of degree 2(r+1) with MultiPoly coefficients."""

    n: int
    r: int
    coeffs: dict[tuple[int, ...], MultiPoly]

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs.values())

    def coeff(self, exp: tuple[int, ...]) -> MultiPoly:
        return self.coeffs.get(exp, MultiPoly.zero())

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "degree": 2 * (self.r + 1),
            "terms": [
                {"xi": list(e), "coef": c.to_json()}
                for e, c in sorted(self.coeffs.items(), reverse=True)
                if not c.is_zero()
            ],
        }


def bgg_apply(f: MultiPoly, n: int, r: int) -> XiPolynomial:
    """Apply the order-(r+1) operator to a polynomial in the p_ij.

    Linear in f; kills exactly the degree <= n*r restrictions of degree-r
    Plucker polynomials.
    """
    if r < 1:
        raise ValueError("the operator order parameter r must be >= 1")
    jet = tuple(second_jet_vars(n))
    f = f.with_vars(tuple(sorted(set(jet) | set(f.vars), key=_var_key)))
    current: dict[tuple[int, ...], MultiPoly] = {(0,) * n: f}
    for _ in range(r + 1):
        nxt: dict[tuple[int, ...], MultiPoly] = {}
        for e, poly in current.items():
            for (i, j) in _pairs(n):
                d = poly.derivative(f"p{i}{j}")
                if d.is_zero():
                    continue
                key = list(e)
                key[i - 1] += 1
                key[j - 1] += 1
                key = tuple(key)
                prev = nxt.get(key)
                nxt[key] = d if prev is None else prev + d
        current = {e: p for e, p in nxt.items() if not p.is_zero()}
    return XiPolynomial(n, r, current)


def _pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(1, n + 1) for j in range(i, n + 1)]


def _var_key(name: str):
    from .poly import var_sort_key

    return var_sort_key(name)


def p_monomials(nvars: int, max_degree: int) -> list[tuple[int, ...]]:
    """Exponent tuples of total degree <= max_degree, descending graded-lex."""
    out: list[tuple[int, ...]] = []
    for d in range(max_degree + 1):
        batch = []
        for combo in combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for c in combo:
                e[c] += 1
            batch.append(tuple(e))
        out.extend(batch)
    out.sort(key=lambda e: (sum(e), e), reverse=True)
    return out


@dataclass
class KernelBasis:
    n: int
    r: int
    dimension: int
    max_degree: int
    basis: list[MultiPoly]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "dimension": self.dimension,
            "max_degree": self.max_degree,
            "basis": [p.to_json() for p in self.basis],
        }


def kernel_basis(n: int, r: int, cap: int = 20000) -> KernelBasis:
    """Exact reduced basis of {f : deg f <= n*r, operator f = 0}.

    Columns are the monomials of degree <= n*r in descending graded-lex
    order; the returned polynomials have leading coefficient 1 and distinct
    leading monomials (the basis, stacked as coefficient rows, is in reduced
    echelon form).
    """
    if n < 2 or r < 1:
        raise ValueError("need n >= 2 and r >= 1")
    jet = second_jet_vars(n)
    dn = len(jet)
    monos = p_monomials(dn, n * r)
    if len(monos) > cap:
        raise CapExceededError(
            f"monomial space needs {len(monos)} columns, above the cap {cap}")
    row_index: dict[tuple, int] = {}
    rows_data: dict[int, dict[int, Fraction]] = {}
    registry = tuple(jet)
    for col, e in enumerate(monos):
        mono = MultiPoly(registry, {e: Fraction(1)})
        image = bgg_apply(mono, n, r)
        for xi_exp, poly in image.coeffs.items():
            for p_exp, c in poly.terms.items():
                key = (xi_exp, p_exp)
                ridx = row_index.setdefault(key, len(row_index))
                rows_data.setdefault(ridx, {})[col] = c
    rows = [rows_data[i] for i in range(len(row_index))]
    kernel = sparse_nullspace(rows, len(monos))
    basis = []
    max_degree = 0
    for vec in kernel:
        terms = {monos[c]: val for c, val in vec.items()}
        poly = MultiPoly(registry, terms)
        basis.append(poly)
        max_degree = max(max_degree, poly.total_degree())
    return KernelBasis(n, r, len(basis), max_degree, basis)


def reduce_against_kernel(f: MultiPoly, kb: KernelBasis) -> MultiPoly:
    """Remainder of f after reduction by the kernel basis (zero iff in span).

    The basis is in reduced echelon form, so one pass over it suffices.
    """
    rem = f
    for b in kb.basis:
        if rem.is_zero():
            break
        a, bb = MultiPoly.align(rem, b)
        c = a.terms.get(bb.leading()[0])
        rem = a - bb.scale(c) if c else a
    return rem


def in_kernel_span(f: MultiPoly, kb: KernelBasis) -> bool:
    return reduce_against_kernel(f, kb).is_zero()


def section_function(
    c: "HyperplaneCoefficients | Mapping[tuple[int, ...], Fraction]",
    n: int,
    r: int,
    kb: KernelBasis | None = None,
) -> tuple[MultiPoly, bool]:
    """Chart polynomial of a degree-r section, with a kernel membership check.

    For r = 1 pass HyperplaneCoefficients; in general pass a map from tuples
    of chart-coordinate indices (as positions in the canonical coordinate
    order, up to r of them) to rational coefficients, encoding sums of
    products of minors.
    """
    sym = symbolic_chart(n)
    polys = [p for _, p in sym]
    if isinstance(c, HyperplaneCoefficients):
        if r != 1:
            raise ValueError("HyperplaneCoefficients encode a degree-1 section")
        total = MultiPoly.zero()
        for coeff, poly in zip(c.dense(), polys):
            if isinstance(coeff, Fraction):
                if coeff != 0:
                    total = total + poly.scale(coeff)
            else:
                total = total + coeff * poly
    else:
        total = MultiPoly.zero()
        for idx_tuple, coeff in c.items():
            if len(idx_tuple) > r:
                raise ValueError("a coefficient tensor index exceeds degree r")
            coeff = Fraction(coeff)
            if coeff == 0:
                continue
            prod = MultiPoly.one()
            for idx in idx_tuple:
                prod = prod * polys[idx]
            total = total + prod.scale(coeff)
    if kb is None:
        kb = kernel_basis(n, r)
    return total, in_kernel_span(total, kb)


def kernel_dimension_formula_r1(n: int) -> int:
    """Independent chart coordinates: C(2n, n) - C(2n, n-2)."""
    from math import comb

    return comb(2 * n, n) - comb(2 * n, n - 2)
