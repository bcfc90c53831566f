"""Symbols of chart functions and complete-exceptionality tests.

For a function F of the chart variables p_ij, the symbol is the quadratic
covector polynomial sum_{i<=j} F_{p_ij} xi_i xi_j, and the iterated symbol of
order k is the k-th derivative of t -> F(P + t * xi xi^T) at t = 0, a
homogeneous polynomial of degree 2k in xi.  A second-order equation cut out
by F is Monge-Ampere exactly when the order-2 iterated symbol is divisible by
the symbol, and this module implements that divisibility test globally and
restricted to the equation's graph, together with the classical root-based
pointwise test for n = 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Mapping, Optional

from .linalg import solve_with_residuals
from .poly import (
    DegenerateError,
    MageError,
    MultiPoly,
    RationalFunction,
    second_jet_vars,
)
from .exprparse import VariableKind, classify_name


@dataclass(frozen=True)
class PDEFunction:
    """A chart function F in p_ij; x_i, u, p_i and parameters ride along inert."""

    n: int
    F: RationalFunction

    def __post_init__(self):
        for name in sorted(self.F.variables_present()):
            kind = classify_name(name, self.n)
            if kind is VariableKind.COVECTOR:
                raise ValueError(f"covector variable {name!r} cannot appear in a PDE function")

    def jet_vars(self) -> list[str]:
        return second_jet_vars(self.n)


def _pair_of_exp(exp: tuple[int, ...]) -> tuple[int, int]:
    idx = [i for i, k in enumerate(exp) for _ in range(k)]
    return idx[0], idx[1]


def xi_exponent(n: int, i: int, j: int) -> tuple[int, ...]:
    """Exponent tuple of xi_i * xi_j (1-based indices)."""
    e = [0] * n
    e[i - 1] += 1
    e[j - 1] += 1
    return tuple(e)


def xi_monomials(n: int, degree: int) -> list[tuple[int, ...]]:
    """All exponent tuples of the given total degree, descending graded-lex."""
    out = []
    for combo in combinations_with_replacement(range(n), degree):
        e = [0] * n
        for c in combo:
            e[c] += 1
        out.append(tuple(e))
    out.sort(reverse=True)
    return out


@dataclass
class SymbolForm:
    """A homogeneous degree-2k polynomial in xi with RationalFunction coefficients."""

    n: int
    k: int
    coeffs: dict[tuple[int, ...], RationalFunction]

    def __post_init__(self):
        for e in self.coeffs:
            if sum(e) != 2 * self.k:
                raise ValueError("symbol form is not homogeneous of degree 2k")

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs.values())

    def coeff(self, exp: tuple[int, ...]) -> RationalFunction:
        c = self.coeffs.get(exp)
        if c is None:
            return RationalFunction.const(0)
        return c

    def __mul__(self, other: "SymbolForm") -> "SymbolForm":
        out: dict[tuple[int, ...], RationalFunction] = {}
        for e1, c1 in self.coeffs.items():
            if c1.is_zero():
                continue
            for e2, c2 in other.coeffs.items():
                if c2.is_zero():
                    continue
                key = tuple(a + b for a, b in zip(e1, e2))
                prev = out.get(key)
                out[key] = c1 * c2 if prev is None else prev + c1 * c2
        return SymbolForm(self.n, self.k + other.k, {e: c for e, c in out.items() if not c.is_zero()})

    def __sub__(self, other: "SymbolForm") -> "SymbolForm":
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            prev = out.get(e)
            out[e] = -c if prev is None else prev - c
        return SymbolForm(self.n, self.k, {e: c for e, c in out.items() if not c.is_zero()})

    def substitute(self, bindings) -> "SymbolForm":
        out = {}
        for e, c in self.coeffs.items():
            s = c.substitute(bindings)
            if not s.is_zero():
                out[e] = s
        return SymbolForm(self.n, self.k, out)

    def eval_coeffs(self, point: Mapping[str, Fraction]) -> dict[tuple[int, ...], Fraction]:
        return {e: c.eval(point) for e, c in self.coeffs.items()}

    def as_poly(self) -> MultiPoly:
        """Flatten into a single polynomial in the xi variables (poly coeffs only)."""
        total = MultiPoly.zero()
        for e, c in self.coeffs.items():
            mono = MultiPoly.one()
            for i, k in enumerate(e):
                if k:
                    mono = mono * MultiPoly.var(f"xi{i + 1}") ** k
            total = total + c.as_poly() * mono
        return total

    def sorted_items(self):
        return sorted(self.coeffs.items(), key=lambda t: t[0], reverse=True)

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for e, c in self.sorted_items():
            mono = "*".join(
                f"xi{i + 1}" if k == 1 else f"xi{i + 1}^{k}"
                for i, k in enumerate(e) if k
            )
            parts.append(f"({c})*{mono}" if mono else f"({c})")
        return " + ".join(parts)

    __repr__ = __str__

    def to_json(self) -> dict:
        from .exprparse import format_rf

        return {
            "n": self.n,
            "degree": 2 * self.k,
            "terms": [
                {"xi": list(e), "coef": format_rf(c)}
                for e, c in self.sorted_items()
                if not c.is_zero()
            ],
        }


def symbol(F: PDEFunction) -> SymbolForm:
    """The quadratic symbol sum_{i<=j} F_{p_ij} xi_i xi_j."""
    n = F.n
    coeffs = {}
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            d = F.F.derivative(f"p{i}{j}")
            if not d.is_zero():
                coeffs[xi_exponent(n, i, j)] = d
    return SymbolForm(n, 1, coeffs)


def iterated_symbol(F: PDEFunction, k: int) -> SymbolForm:
    """Order-k iterated symbol: k-th derivative of t -> F(P + t xi xi^T) at 0.

    For k = 1 this is the symbol; for any k it satisfies the recursion
    Smbl^k(F) = sum_{i<=j} Smbl^{k-1}(F_{p_ij}) xi_i xi_j.
    """
    if k < 1:
        raise ValueError("iteration order must be >= 1")
    n = F.n
    current: dict[tuple[int, ...], RationalFunction] = {(0,) * n: F.F}
    for _ in range(k):
        nxt: dict[tuple[int, ...], RationalFunction] = {}
        for e, c in current.items():
            for i in range(1, n + 1):
                for j in range(i, n + 1):
                    d = c.derivative(f"p{i}{j}")
                    if d.is_zero():
                        continue
                    key = tuple(a + b for a, b in zip(e, xi_exponent(n, i, j)))
                    prev = nxt.get(key)
                    nxt[key] = d if prev is None else prev + d
        current = {e: c for e, c in nxt.items() if not c.is_zero()}
    return SymbolForm(n, k, current)


# -- classification (n = 2) ---------------------------------------------------


class PointRequiredError(MageError):
    """The discriminant is non-constant, so a point is needed to classify."""


@dataclass
class ClassificationResult:
    type: str  # hyperbolic | elliptic | parabolic | degenerate
    delta: RationalFunction | Fraction
    roots: Optional[tuple] = None
    roots_exact: Optional[bool] = None


def _sqrt_fraction(q: Fraction) -> Optional[Fraction]:
    if q < 0:
        return None
    ns = math.isqrt(q.numerator)
    ds = math.isqrt(q.denominator)
    if ns * ns == q.numerator and ds * ds == q.denominator:
        return Fraction(ns, ds)
    return None


def _char_roots(a: Fraction, b: Fraction, delta: Fraction):
    """Roots of a*t^2 + b*t + c with discriminant delta, descending."""
    s = _sqrt_fraction(delta)
    if s is not None:
        roots = sorted(((-b + s) / (2 * a), (-b - s) / (2 * a)), reverse=True)
        return tuple(roots), True
    fs = math.sqrt(float(delta))
    roots = sorted(((float(-b) + fs) / float(2 * a), (float(-b) - fs) / float(2 * a)), reverse=True)
    return tuple(roots), False


def classify(F: PDEFunction, at: Optional[Mapping[str, Fraction]] = None) -> ClassificationResult:
    """Exact discriminant Delta = F_p12^2 - 4 F_p11 F_p22 and the type it decides."""
    if F.n != 2:
        raise ValueError("classification is defined for n = 2")
    fp11 = F.F.derivative("p11")
    fp12 = F.F.derivative("p12")
    fp22 = F.F.derivative("p22")
    delta = fp12 * fp12 - 4 * fp11 * fp22
    if fp11.is_zero() and fp12.is_zero() and fp22.is_zero():
        return ClassificationResult("degenerate", delta)
    if at is not None:
        a, b = fp22.eval(at), fp12.eval(at)
        c = fp11.eval(at)
        d = delta.eval(at)
        if a == 0 and b == 0 and c == 0:
            return ClassificationResult("degenerate", d)
        ty = "hyperbolic" if d > 0 else ("elliptic" if d < 0 else "parabolic")
        roots, exact = (None, None)
        if d >= 0 and a != 0:
            roots, exact = _char_roots(a, b, d)
        return ClassificationResult(ty, d, roots, exact)
    if delta.is_const():
        d = delta.const_value()
        ty = "hyperbolic" if d > 0 else ("elliptic" if d < 0 else "parabolic")
        roots, exact = (None, None)
        if d >= 0 and fp22.is_const() and fp12.is_const() and not fp22.const_value() == 0:
            roots, exact = _char_roots(fp22.const_value(), fp12.const_value(), d)
        return ClassificationResult(ty, d, roots, exact)
    raise PointRequiredError("discriminant is not constant; supply a rational point")


# -- quadratic field elements for exact root arithmetic ----------------------


@dataclass(frozen=True)
class QuadExt:
    """An element a + b*sqrt(D) of a real quadratic extension of Q."""

    a: Fraction
    b: Fraction
    D: Fraction

    def _check(self, other: "QuadExt"):
        if self.D != other.D:
            raise ValueError("mixing different quadratic extensions")

    @staticmethod
    def of(x, D) -> "QuadExt":
        if isinstance(x, QuadExt):
            return x
        return QuadExt(Fraction(x), Fraction(0), D)

    def __add__(self, other):
        o = QuadExt.of(other, self.D)
        self._check(o)
        return QuadExt(self.a + o.a, self.b + o.b, self.D)

    __radd__ = __add__

    def __neg__(self):
        return QuadExt(-self.a, -self.b, self.D)

    def __sub__(self, other):
        return self + (-QuadExt.of(other, self.D))

    def __rsub__(self, other):
        return QuadExt.of(other, self.D) + (-self)

    def __mul__(self, other):
        o = QuadExt.of(other, self.D)
        self._check(o)
        return QuadExt(self.a * o.a + self.D * self.b * o.b, self.a * o.b + self.b * o.a, self.D)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = QuadExt.of(other, self.D)
        self._check(o)
        norm = o.a * o.a - self.D * o.b * o.b
        if norm == 0:
            raise ZeroDivisionError("division by zero in quadratic extension")
        inv = QuadExt(o.a / norm, -o.b / norm, self.D)
        return self * inv

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        return f"{self.a} + {self.b}*sqrt({self.D})"

    def to_float(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(float(self.D))


@dataclass
class RootResidual:
    root: object  # Fraction or QuadExt
    residual: object
    vanishes: bool


def exceptionality_at_roots(F: PDEFunction, at: Mapping[str, Fraction]) -> list[RootResidual]:
    """Classical pointwise test: residual lambda_p11 + lambda_p12 l + lambda_p22 l^2
    per characteristic root l, with the implicit-differentiation convention
    lambda_pij = -(F_p11pij + F_p12pij l + F_p22pij l^2) / (F_p12 + 2 F_p22 l).
    """
    if F.n != 2:
        raise ValueError("the root test is defined for n = 2")
    names = ["p11", "p12", "p22"]
    first = {v: F.F.derivative(v) for v in names}
    a = first["p22"].eval(at)
    b = first["p12"].eval(at)
    c = first["p11"].eval(at)
    delta = b * b - 4 * a * c
    if delta < 0:
        raise MageError("elliptic point: no real characteristic roots")
    if delta == 0:
        raise DegenerateError("parabolic/degenerate point: double characteristic root")
    if a == 0:
        raise DegenerateError("characteristic root at infinity: F_p22 vanishes at the point")
    second = {}
    for v in names:
        dv = first[v]
        for w in names:
            second[(v, w)] = dv.derivative(w).eval(at)

    sq = _sqrt_fraction(delta)
    if sq is not None:
        roots = [(-b + sq) / (2 * a), (-b - sq) / (2 * a)]
    else:
        roots = [
            QuadExt(Fraction(-b, 1) / (2 * a), Fraction(1) / (2 * a), delta),
            QuadExt(Fraction(-b, 1) / (2 * a), Fraction(-1) / (2 * a), delta),
        ]
    out = []
    for lam in roots:
        lam_p = {}
        denom = b + 2 * a * lam
        for w in names:
            num = second[("p11", w)] + second[("p12", w)] * lam + second[("p22", w)] * lam * lam
            lam_p[w] = -1 * num / denom
        res = lam_p["p11"] + lam_p["p12"] * lam + lam_p["p22"] * lam * lam
        vanishes = res.is_zero() if isinstance(res, QuadExt) else res == 0
        out.append(RootResidual(lam, res, vanishes))
    return out


# -- the divisibility (cofactor) test ----------------------------------------


def proportionality_solve(n: int, S_coeffs: Mapping[tuple[int, ...], object],
                          L_coeffs: Mapping[tuple[int, ...], object], zero, one):
    """Solve L = S * C for a degree-2 cofactor C over an exact field.

    Entries may be Fractions or RationalFunctions.  Returns (C coefficient
    map over degree-2 xi monomials, residual list): residuals are the
    coefficients of L - S*C in descending monomial order, all zero exactly
    when the cofactor exists.
    """
    unknowns = xi_monomials(n, 2)
    equations = xi_monomials(n, 4)
    matrix = []
    rhs = []
    for m4 in equations:
        row = []
        for mb in unknowns:
            diff = tuple(a - b for a, b in zip(m4, mb))
            if any(x < 0 for x in diff):
                row.append(zero)
            else:
                row.append(S_coeffs.get(diff, zero))
        matrix.append(row)
        rhs.append(L_coeffs.get(m4, zero))
    x, residuals = solve_with_residuals(matrix, rhs, zero, one)
    cof = {mb: x[i] for i, mb in enumerate(unknowns)}
    return cof, residuals


@dataclass
class ExceptionalityReport:
    globally_proportional: bool
    on_shell_proportional: bool
    cofactor: Optional[SymbolForm]
    residuals: list[RationalFunction]
    restricted: bool  # whether the on-shell test actually substituted p_nn = h
    graph_rhs: Optional[RationalFunction] = None  # h with p_nn = h, when available

    def to_json(self) -> dict:
        from .exprparse import format_rf

        return {
            "globally_proportional": self.globally_proportional,
            "on_shell_proportional": self.on_shell_proportional,
            "cofactor": self.cofactor.to_json() if self.cofactor is not None else None,
            "residuals": [format_rf(r) for r in self.residuals],
        }


def solve_graph_form(F: RationalFunction, var: str) -> Optional[RationalFunction]:
    """If F = a*var - b with a nonzero and var-free a, b, return h = b/a."""
    num, den = F.num, F.den
    if den.degree_in(var) != 0 or num.degree_in(var) > 1:
        return None
    if var not in num.vars:
        return None
    i = num.vars.index(var)
    a_terms = {}
    b_terms = {}
    for e, c in num.terms.items():
        if e[i] == 1:
            rest = list(e)
            rest[i] = 0
            a_terms[tuple(rest)] = c
        else:
            b_terms[e] = -c
    a = MultiPoly(num.vars, a_terms)
    if a.is_zero():
        return None
    b = MultiPoly(num.vars, b_terms)
    return RationalFunction.from_polys(b, a)


def is_completely_exceptional(F: PDEFunction) -> ExceptionalityReport:
    """Divisibility test Smbl^2(F) = Smbl(F) * C, globally and on the graph.

    The global verdict asks for the identity on the whole chart; the on-shell
    verdict first restricts both forms to the equation by substituting
    p_nn = h when F is affine in p_nn.  The zero locus {F = 0} only pins the
    on-shell verdict down, so that is the Monge-Ampere criterion.
    """
    S = symbol(F)
    if S.is_zero():
        raise DegenerateError("degenerate equation: the symbol vanishes identically")
    L = iterated_symbol(F, 2)
    zero = RationalFunction.const(0)
    one = RationalFunction.const(1)

    cof_g, res_g = proportionality_solve(F.n, S.coeffs, L.coeffs, zero, one)
    ok_g = all(r.is_zero() for r in res_g)

    pnn = f"p{F.n}{F.n}"
    h = solve_graph_form(F.F, pnn)
    if h is not None:
        S_e = S.substitute({pnn: h})
        L_e = L.substitute({pnn: h})
        if S_e.is_zero():
            raise DegenerateError("symbol vanishes identically on the equation")
        cof_e, res_e = proportionality_solve(F.n, S_e.coeffs, L_e.coeffs, zero, one)
        ok_e = all(r.is_zero() for r in res_e)
        restricted = True
    else:
        cof_e, res_e, ok_e = cof_g, res_g, ok_g
        restricted = False

    if ok_g:
        chosen = cof_g
    elif ok_e:
        chosen = cof_e
    else:
        chosen = None
    cofactor = None
    if chosen is not None:
        cofactor = SymbolForm(F.n, 1, {e: c for e, c in chosen.items() if not c.is_zero()})
    residuals = [r for r in (res_e if restricted else res_g)]
    return ExceptionalityReport(ok_g, ok_e, cofactor, residuals, restricted, h)


def exceptionality_at_point(F: PDEFunction, at: Mapping[str, Fraction]) -> tuple[bool, list[Fraction]]:
    """Pointwise cofactor solve: evaluate both forms at the point, then solve."""
    S = symbol(F)
    L = iterated_symbol(F, 2)
    s = S.eval_coeffs(at)
    l = L.eval_coeffs(at)
    if all(v == 0 for v in s.values()):
        raise DegenerateError("degenerate point: symbol vanishes")
    cof, residuals = proportionality_solve(F.n, s, l, Fraction(0), Fraction(1))
    return all(r == 0 for r in residuals), residuals


def check_quasilinear_system(h: RationalFunction) -> tuple[RationalFunction, RationalFunction]:
    """Residual pair for the graph equation p22 = h(p11, p12):

        (h_p11p11 + h_p11 h_p12p12,  2 h_p11p12 + h_p12 h_p12p12)

    both zero exactly when the equation is completely exceptional.
    """
    h1 = h.derivative("p11")
    h2 = h.derivative("p12")
    h11 = h1.derivative("p11")
    h12 = h1.derivative("p12")
    h22 = h2.derivative("p12")
    return (h11 + h1 * h22, 2 * h12 + h2 * h22)
