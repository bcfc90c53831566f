"""Conformal geometry of the chart: the determinant form, fundamental forms,
hyperplane-section tests, and the 21 conformal symmetries for n = 3.

The canonical symmetric n-form on the chart is the total polarization of the
determinant on tangent vectors (under T LGr = S^2 L*).  Graph hypersurfaces
p_nn = h carry first and second fundamental forms with respect to constant
metrics built from that form, and the vanishing of the trace-free second
fundamental form (n = 2), or membership of II in the contracted subspace
(n = 3), characterizes hyperplane sections, i.e. Monge-Ampere equations.
Conformal rescalings e^{2*lambda} g are handled through the closed-form
connection correction beta(X, Y) = X(lam) Y + Y(lam) X - g(X, Y) grad(lam),
keeping every computation inside exact rational arithmetic: entries carry an
explicit integer power of e^{2*lambda} as a separate weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from .linalg import QMatrix, field_inverse, nullspace_dense, solve_with_residuals
from .poly import (
    DegenerateError,
    MageError,
    MultiPoly,
    RationalFunction,
    second_jet_vars,
)
from .symbols import PDEFunction, is_completely_exceptional, solve_graph_form, xi_monomials


def index_pairs(n: int) -> list[tuple[int, int]]:
    """Coordinate pairs (i, j), i <= j, in the canonical chart order."""
    return [(i, j) for i in range(1, n + 1) for j in range(i, n + 1)]


def basis_matrix(n: int, i: int, j: int) -> tuple[tuple[Fraction, ...], ...]:
    """Symmetric matrix of the coordinate tangent vector d/dp_ij."""
    m = [[Fraction(0)] * n for _ in range(n)]
    m[i - 1][j - 1] = Fraction(1)
    m[j - 1][i - 1] = Fraction(1)
    return tuple(tuple(row) for row in m)


def vector_to_matrix(n: int, comps: Sequence) -> list[list]:
    """Ambient tangent vector (one component per p_ij) as a symmetric matrix."""
    m = [[None] * n for _ in range(n)]
    for (i, j), c in zip(index_pairs(n), comps):
        m[i - 1][j - 1] = c
        m[j - 1][i - 1] = c
    return m


def ring_det(entries: Sequence[Sequence]):
    """Determinant over any commutative ring, by first-row expansion."""
    k = len(entries)
    if k == 1:
        return entries[0][0]
    total = None
    for pos in range(k):
        sub = [[row[q] for q in range(k) if q != pos] for row in entries[1:]]
        term = entries[0][pos] * ring_det(sub)
        if pos % 2:
            term = -term
        total = term if total is None else total + term
    return total


@dataclass(frozen=True)
class SymmetricNForm:
    """The symmetric n-form T_n with T_n(v, ..., v) = det(v) on symmetric v."""

    n: int

    def value(self, *vectors):
        """Total polarization of det, evaluated on n symmetric matrices."""
        if len(vectors) != self.n:
            raise ValueError(f"expected {self.n} arguments")
        n = self.n
        total = None
        for mask in range(1, 1 << n):
            acc = None
            for i in range(n):
                if mask >> i & 1:
                    acc = vectors[i] if acc is None else _mat_add(acc, vectors[i])
            term = ring_det(acc)
            bits = bin(mask).count("1")
            if (n - bits) % 2:
                term = -term
            total = term if total is None else total + term
        return total * Fraction(1, math.factorial(n))

    def det_poly(self, prefix: str = "v") -> MultiPoly:
        """det as a polynomial in the coordinates prefix11, prefix12, ..."""
        entries = [[MultiPoly.var(f"{prefix}{min(i, j)}{max(i, j)}")
                    for j in range(1, self.n + 1)] for i in range(1, self.n + 1)]
        return ring_det(entries)

    def bilinear_matrix(self, *fields) -> list[list]:
        """Matrix of the 2-form obtained by contracting with n-2 vectors."""
        if len(fields) != self.n - 2:
            raise ValueError(f"expected {self.n - 2} contraction arguments")
        pairs = index_pairs(self.n)
        mats = [vector_to_matrix(self.n, f) if not isinstance(f, tuple) else f for f in fields]
        out = []
        for (i, j) in pairs:
            row = []
            bi = basis_matrix(self.n, i, j)
            for (k, l) in pairs:
                row.append(self.value(*mats, bi, basis_matrix(self.n, k, l)))
            out.append(row)
        return out


def _mat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def tn_form(n: int) -> SymmetricNForm:
    if n < 2:
        raise ValueError("n must be at least 2")
    return SymmetricNForm(n)


# -- the subspace of contracted 2-forms ---------------------------------------


@dataclass
class MembershipResult:
    member: bool
    certificate: Optional[MultiPoly]  # the nonzero quartic when not a member


def s2tn_membership(Q: Sequence[Sequence], n: int) -> MembershipResult:
    """Membership of a symmetric 2-form in ker of total symmetrization.

    Q is a symmetric matrix over the d_n = n(n+1)/2 chart-pair coordinates
    (entries rational or polynomial).  Q belongs to the contracted subspace
    exactly when the quartic Q(xi xi^T, xi xi^T) vanishes identically.
    """
    pairs = index_pairs(n)
    d = len(pairs)
    nu = [MultiPoly.var(f"xi{i}") * MultiPoly.var(f"xi{j}") for (i, j) in pairs]
    quartic = MultiPoly.zero()
    for a in range(d):
        for b in range(d):
            entry = Q[a][b]
            if isinstance(entry, Fraction) or isinstance(entry, int):
                if entry == 0:
                    continue
                quartic = quartic + (nu[a] * nu[b]).scale(entry)
            else:
                if entry.is_zero():
                    continue
                quartic = quartic + entry * nu[a] * nu[b]
    if quartic.is_zero():
        return MembershipResult(True, None)
    return MembershipResult(False, quartic)


def s2tn_dimension(n: int) -> int:
    """dim ker of the symmetrization map on constant 2-forms, by exact nullspace."""
    pairs = index_pairs(n)
    d = len(pairs)
    monos = xi_monomials(n, 4)
    mono_index = {m: i for i, m in enumerate(monos)}
    cols = []
    for a in range(d):
        for b in range(a, d):
            i1, j1 = pairs[a]
            i2, j2 = pairs[b]
            e = [0] * n
            for idx in (i1, j1, i2, j2):
                e[idx - 1] += 1
            col = {mono_index[tuple(e)]: Fraction(2 if a != b else 1)}
            cols.append(col)
    rows = [[col.get(r, Fraction(0)) for col in cols] for r in range(len(monos))]
    return len(nullspace_dense(rows, len(cols)))


# -- graph hypersurfaces and their fundamental forms ---------------------------


@dataclass
class FundamentalForm:
    """A symmetric matrix of rational functions on a graph hypersurface.

    `weight` is the power of e^{2*lambda} multiplying the rational entries
    (always 0 when no conformal rescaling was requested).
    """

    n: int
    kind: str  # "I" | "II" | "traceFreeII"
    entries: tuple[tuple[RationalFunction, ...], ...]
    weight: int
    metric: str
    normal_rule: str
    solved_var: str

    def dim(self) -> int:
        return len(self.entries)

    def is_zero(self) -> bool:
        return all(x.is_zero() for row in self.entries for x in row)

    def det(self) -> RationalFunction:
        return ring_det([list(row) for row in self.entries])

    def to_json(self) -> dict:
        from .exprparse import format_rf

        return {
            "n": self.n,
            "kind": self.kind,
            "entries": [[format_rf(x) for x in row] for row in self.entries],
            "conformal_weight": self.weight,
            "metric": self.metric,
            "normal_rule": self.normal_rule,
            "solved_var": self.solved_var,
        }


def _constant_metric(n: int, X: Optional[Sequence[Sequence]] = None) -> list[list[Fraction]]:
    form = tn_form(n)
    if n == 2:
        if X is not None:
            raise ValueError("no contraction argument is needed for n = 2")
        return [[Fraction(x) for x in row] for row in form.bilinear_matrix()]
    if n == 3:
        if X is None:
            X = [[1 if i == j else 0 for j in range(3)] for i in range(3)]
        Xf = tuple(tuple(Fraction(x) for x in row) for row in X)
        if QMatrix([list(r) for r in Xf]).rank() != 3:
            raise MageError("contraction field must have maximal rank")
        return [[Fraction(x) for x in row] for row in form.bilinear_matrix(Xf)]
    raise ValueError("graph fundamental forms are implemented for n in {2, 3}")


def graph_fundamental_forms(
    n: int,
    h: RationalFunction,
    solved: str | None = None,
    *,
    metric_X: Optional[Sequence[Sequence]] = None,
    lam: Optional[RationalFunction] = None,
    normal: str = "chart",
) -> tuple[FundamentalForm, FundamentalForm, Optional[FundamentalForm]]:
    """First, second and trace-free second fundamental form of p_solved = h.

    The metric is the constant-coefficient form (T_2, or X-contracted T_3 with
    a constant maximal-rank X), optionally rescaled by e^{2*lambda}; the
    rescale is handled with the exact connection correction, and the returned
    forms carry the e^{2*lambda} power in `weight`.  The normal is fixed by
    g(N, tangent) = 0 and g(N, d/dp_solved) = 1 ("chart"), or kept at the
    unrescaled reference normal ("reference").  The trace-free part is None
    when det(I) vanishes identically (the parabolic locus).
    """
    if solved is None:
        solved = f"p{n}{n}"
    ambient = second_jet_vars(n)
    if solved not in ambient:
        raise ValueError(f"unknown chart variable {solved!r}")
    if solved in h.variables_present():
        raise ValueError("the graph right-hand side may not involve the solved variable")
    if normal not in ("chart", "reference"):
        raise ValueError("normal must be 'chart' or 'reference'")

    free = [v for v in ambient if v != solved]
    d = len(free)
    zero = RationalFunction.const(0)
    one = RationalFunction.const(1)

    G = _constant_metric(n, metric_X)
    Gf = [[RationalFunction.const(x) for x in row] for row in G]
    Ginv = field_inverse(Gf, zero, one)

    hd = {v: h.derivative(v) for v in free}
    sidx = ambient.index(solved)

    def tangent(t: str) -> list[RationalFunction]:
        comp = [zero] * len(ambient)
        comp[ambient.index(t)] = one
        comp[sidx] = hd[t]
        return comp

    frames = {t: tangent(t) for t in free}
    conormal = [zero] * len(ambient)
    conormal[sidx] = one
    for t in free:
        conormal[ambient.index(t)] = -hd[t]
    N0 = [sum((Ginv[a][b] * conormal[b] for b in range(len(ambient))), zero)
          for a in range(len(ambient))]

    def g_pair(x: Sequence[RationalFunction], y: Sequence[RationalFunction]) -> RationalFunction:
        acc = zero
        for a in range(len(ambient)):
            if not x[a]:
                continue
            for b in range(len(ambient)):
                if G[a][b] and y[b]:
                    acc = acc + x[a] * y[b] * G[a][b]
        return acc

    # Everything below lives on the graph: substitute the solved variable.
    def restrict(f: RationalFunction) -> RationalFunction:
        return f.substitute({solved: h})

    if lam is not None:
        lam_s = restrict(lam)
        dlam_ambient = [restrict(lam.derivative(v)) for v in ambient]
        grad_lam = [sum((Ginv[a][b] * dlam_ambient[b] for b in range(len(ambient))), zero)
                    for a in range(len(ambient))]
    else:
        lam_s = None
        dlam_ambient = [zero] * len(ambient)
        grad_lam = [zero] * len(ambient)

    def tangential(fun: RationalFunction, t: str) -> RationalFunction:
        # derivative along e_t of a function already restricted to the graph
        return fun.derivative(t)

    frames_r = {t: [restrict(c) for c in comp] for t, comp in frames.items()}
    N0_r = [restrict(c) for c in N0]

    I_entries = []
    for t in free:
        row = []
        for s in free:
            row.append(restrict(g_pair(frames[t], frames[s])))
        I_entries.append(row)

    II_entries = []
    for t in free:
        row = []
        et = frames_r[t]
        dN = [tangential(c, t) for c in N0_r]
        if lam is not None:
            et_lam = sum((et[a] * dlam_ambient[a] for a in range(len(ambient))), zero)
            N_lam = sum((N0_r[a] * dlam_ambient[a] for a in range(len(ambient))), zero)
            g_et_N = restrict(g_pair(frames[t], N0))
            beta = [et_lam * N0_r[a] + N_lam * et[a] - g_et_N * grad_lam[a]
                    for a in range(len(ambient))]
            full = [dN[a] + beta[a] for a in range(len(ambient))]
            if normal == "chart":
                full = [full[a] - 2 * et_lam * N0_r[a] for a in range(len(ambient))]
        else:
            full = dN
        for s in free:
            row.append(g_pair(full, frames_r[s]))
        II_entries.append(row)

    weight_I = 1 if lam is not None else 0
    weight_II = (1 if normal == "reference" else 0) if lam is not None else 0

    metric_desc = "T2" if n == 2 else "X . T3 (constant X)"
    if lam is not None:
        metric_desc = f"e^(2*lambda) * {metric_desc}"
    rule = ("g(N,T Sigma)=0, g(N,d/d" + solved + ")=1"
            if normal == "chart" else "reference normal of the unrescaled metric")

    I = FundamentalForm(n, "I", _freeze(I_entries), weight_I, metric_desc, rule, solved)
    II = FundamentalForm(n, "II", _freeze(II_entries), weight_II, metric_desc, rule, solved)

    detI = I.det()
    tf = None
    if not detI.is_zero():
        Iinv = field_inverse([list(r) for r in I.entries], zero, one)
        H = sum((sum((Iinv[a][b] * II.entries[b][a] for b in range(d)), zero) for a in range(d)), zero)
        scale = H / d
        tf_entries = [[II.entries[a][b] - scale * I.entries[a][b] for b in range(d)]
                      for a in range(d)]
        tf = FundamentalForm(n, "traceFreeII", _freeze(tf_entries), weight_II, metric_desc, rule, solved)
    return I, II, tf


def _freeze(entries: list[list[RationalFunction]]) -> tuple[tuple[RationalFunction, ...], ...]:
    return tuple(tuple(row) for row in entries)


def fundamental_forms(
    h: RationalFunction,
    *,
    lam: Optional[RationalFunction] = None,
    normal: str = "chart",
) -> tuple[FundamentalForm, FundamentalForm, FundamentalForm]:
    """n = 2 graph machinery for p22 = h(p11, p12); raises on parabolic locus."""
    I, II, tf = graph_fundamental_forms(2, h, "p22", lam=lam, normal=normal)
    if tf is None:
        raise DegenerateError("degenerate first fundamental form (parabolic locus)")
    return I, II, tf


def proportionality_residuals(II: FundamentalForm, I: FundamentalForm) -> list[RationalFunction]:
    """Cross products II_ab I_cd - II_cd I_ab; all zero iff II is proportional to I."""
    d = II.dim()
    flat_I = [I.entries[a][b] for a in range(d) for b in range(a, d)]
    flat_II = [II.entries[a][b] for a in range(d) for b in range(a, d)]
    out = []
    for x in range(len(flat_I)):
        for y in range(x + 1, len(flat_I)):
            out.append(flat_II[x] * flat_I[y] - flat_II[y] * flat_I[x])
    return out


_SOLVE_ORDER_CACHE: dict[int, list[str]] = {}


def _solve_order(n: int) -> list[str]:
    if n not in _SOLVE_ORDER_CACHE:
        _SOLVE_ORDER_CACHE[n] = list(reversed(second_jet_vars(n)))
    return _SOLVE_ORDER_CACHE[n]


def hyperplane_test(F: PDEFunction) -> bool:
    """True exactly when {F = 0} is a hyperplane section (a Monge-Ampere equation).

    n = 2 goes through the graph geometry: vanishing trace-free II where the
    first fundamental form is nondegenerate, proportionality of II and I on
    the parabolic locus.  n = 3 reduces to divisibility of the iterated
    symbol by the symbol.  When no chart variable can be solved for, the
    divisibility route decides for n = 2 as well.
    """
    if F.n == 3:
        return is_completely_exceptional(F).on_shell_proportional
    if F.n != 2:
        raise ValueError("the hyperplane test is implemented for n in {2, 3}")
    for var in _solve_order(2):
        h = solve_graph_form(F.F, var)
        if h is None:
            continue
        I, II, tf = graph_fundamental_forms(2, h, var)
        if tf is not None:
            return tf.is_zero()
        return all(r.is_zero() for r in proportionality_residuals(II, I))
    return is_completely_exceptional(F).on_shell_proportional


def membership_direct_n3(
    h: RationalFunction,
    X: Optional[Sequence[Sequence]] = None,
    solved: str = "p33",
) -> tuple[bool, list[list[RationalFunction]]]:
    """Direct n = 3 route: is II (w.r.t. the X-contracted metric) a contracted form?

    Solves II = T_3(Y, e_i, e_j) for an ambient field Y along the graph and
    returns (member, residual matrix).  X must be a constant maximal-rank
    symmetric matrix so that the flat derivative is the Levi-Civita
    connection of the contracted metric.
    """
    n = 3
    zero = RationalFunction.const(0)
    one = RationalFunction.const(1)
    I, II, _ = graph_fundamental_forms(n, h, solved, metric_X=X)
    form = tn_form(n)
    ambient = second_jet_vars(n)
    free = [v for v in ambient if v != solved]
    pairs = index_pairs(n)
    hd = {v: h.derivative(v) for v in free}

    def frame_matrix(t: str):
        comp = [zero] * len(ambient)
        comp[ambient.index(t)] = one
        comp[ambient.index(solved)] = hd[t]
        return vector_to_matrix(n, comp)

    frames = {t: frame_matrix(t) for t in free}
    rows = []
    rhs = []
    for a, t in enumerate(free):
        for b in range(a, len(free)):
            s = free[b]
            row = []
            for (i, j) in pairs:
                coeff = form.value(basis_matrix(n, i, j), frames[t], frames[s])
                if isinstance(coeff, MultiPoly):
                    coeff = RationalFunction.from_poly(coeff)
                elif not isinstance(coeff, RationalFunction):
                    coeff = RationalFunction.const(coeff)
                row.append(coeff.substitute({solved: h}) if solved in coeff.variables_present() else coeff)
            rows.append(row)
            rhs.append(II.entries[a][b])
    x, residuals = solve_with_residuals(rows, rhs, zero, one)
    member = all(r.is_zero() for r in residuals)
    res_matrix = [[zero] * len(free) for _ in range(len(free))]
    k = 0
    for a in range(len(free)):
        for b in range(a, len(free)):
            res_matrix[a][b] = residuals[k]
            res_matrix[b][a] = residuals[k]
            k += 1
    return member, res_matrix


# -- the discriminant identity (n = 2) ----------------------------------------


@dataclass
class DetIdentityResult:
    lhs: RationalFunction  # det(I) of the Monge-Ampere graph
    rhs: RationalFunction  # -Delta / (4 (k3 + k0 p11)^2)
    equal: bool


def det_I_discriminant(c: Optional[Sequence] = None) -> DetIdentityResult:
    """Verify det(I) = -Delta / (4 (k3 + k0 p11)^2) for the n = 2 family.

    With no argument the five coefficients are symbolic parameters; a
    5-sequence (k0, k1, k2, k3, k4) of rationals checks a concrete member.
    Delta = k2^2 - 4 k1 k3 + 4 k0 k4.
    """
    if c is None:
        k0, k1, k2, k3, k4 = (RationalFunction.var(f"k{i}") for i in range(5))
    else:
        k0, k1, k2, k3, k4 = (RationalFunction.const(Fraction(x)) for x in c)
        if k0.is_zero() and k3.is_zero():
            raise MageError("k0 = k3 = 0: the equation cannot be solved for p22")
    p11 = RationalFunction.var("p11")
    p12 = RationalFunction.var("p12")
    denom = k3 + k0 * p11
    if denom.is_zero():
        raise MageError("k3 + k0*p11 vanishes identically")
    h = (k0 * p12 * p12 - k1 * p11 - k2 * p12 - k4) / denom
    I, _, _ = graph_fundamental_forms(2, h, "p22")
    lhs = I.det()
    delta = k2 * k2 - 4 * k1 * k3 + 4 * k0 * k4
    rhs = -delta / (4 * denom * denom)
    return DetIdentityResult(lhs, rhs, lhs == rhs)


# -- conformal symmetries for n = 3 -------------------------------------------


@dataclass
class VectorFieldPoly:
    """A polynomial vector field on the chart, one component per p_ij."""

    n: int
    name: str
    components: dict[str, MultiPoly]

    def component(self, var: str) -> MultiPoly:
        return self.components.get(var, MultiPoly.zero())

    def to_json(self) -> dict:
        from .exprparse import format_rf

        return {
            "name": self.name,
            "components": {v: format_rf(p) for v, p in self.components.items() if not p.is_zero()},
        }


def _sym_entry(n: int, i: int, j: int) -> MultiPoly:
    return MultiPoly.var(f"p{min(i, j)}{max(i, j)}")


@lru_cache(maxsize=None)
def sp6_generators() -> tuple[VectorFieldPoly, ...]:
    """The 21 generators of the conformal symmetry algebra of T_3 (n = 3).

    Six translations d/dp_ij, nine linear fields (A^T P + P A)/2 for the
    elementary matrices A = E_ab, and six quadratic fields P C P for C
    running over the symmetrized elementary matrices.
    """
    n = 3
    pairs = index_pairs(n)
    out: list[VectorFieldPoly] = []
    for (i, j) in pairs:
        out.append(VectorFieldPoly(n, f"translation-p{i}{j}",
                                   {f"p{i}{j}": MultiPoly.one()}))
    half = Fraction(1, 2)
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            comps: dict[str, MultiPoly] = {}
            for (c, d) in pairs:
                entry = MultiPoly.zero()
                if c == b:
                    entry = entry + _sym_entry(n, a, d)
                if d == b:
                    entry = entry + _sym_entry(n, c, a)
                if not entry.is_zero():
                    comps[f"p{c}{d}"] = entry.scale(half)
            out.append(VectorFieldPoly(n, f"linear-{a}{b}", comps))
    cs = []
    for a in range(1, n + 1):
        cs.append((f"quadratic-{a}{a}", [(a, a, Fraction(1))]))
    for a in range(1, n + 1):
        for b in range(a + 1, n + 1):
            cs.append((f"quadratic-{a}{b}", [(a, b, half), (b, a, half)]))
    for name, cells in cs:
        C = [[Fraction(0)] * n for _ in range(n)]
        for (r, c, v) in cells:
            C[r - 1][c - 1] = v
        comps = {}
        for (c, d) in pairs:
            entry = MultiPoly.zero()
            for e in range(1, n + 1):
                for f in range(1, n + 1):
                    if C[e - 1][f - 1] == 0:
                        continue
                    entry = entry + (_sym_entry(n, c, e) * _sym_entry(n, f, d)).scale(C[e - 1][f - 1])
            if not entry.is_zero():
                comps[f"p{c}{d}"] = entry
        out.append(VectorFieldPoly(n, name, comps))
    return tuple(out)


def stretching_field(n: int) -> VectorFieldPoly:
    comps = {v: MultiPoly.var(v) for v in second_jet_vars(n)}
    return VectorFieldPoly(n, "stretching", comps)


@dataclass
class ConformalCheckResult:
    mu: Optional[MultiPoly]  # the factor with L_X T_n = mu * T_n, when it exists
    residuals: list[MultiPoly]
    ok: bool


def conformal_check(X: VectorFieldPoly) -> ConformalCheckResult:
    """Solve L_X T_n = mu * T_n symbolically for a polynomial field X.

    T_n has constant coefficients, so the Lie derivative evaluated on a
    constant tangent vector v is the directional derivative of det at v along
    J_X(p) v.  The check matches coefficients against det over the tangent
    monomials.
    """
    n = X.n
    pairs = index_pairs(n)
    vnames = [f"v{i}{j}" for (i, j) in pairs]
    det_v = tn_form(n).det_poly("v")
    det_grad = {name: det_v.derivative(name) for name in vnames}
    L = MultiPoly.zero()
    for (pair_d, vd) in zip(pairs, vnames):
        comp = X.component(f"p{pair_d[0]}{pair_d[1]}")
        if comp.is_zero():
            continue
        direction = MultiPoly.zero()
        for (pair_a, va) in zip(pairs, vnames):
            dpart = comp.derivative(f"p{pair_a[0]}{pair_a[1]}")
            if not dpart.is_zero():
                direction = direction + dpart * MultiPoly.var(va)
        if not direction.is_zero():
            L = L + direction * det_grad[vd]
    # Match L against mu * det over the tangent monomial basis.
    def split_tangent(p: MultiPoly) -> dict[tuple, MultiPoly]:
        out: dict[tuple, dict] = {}
        vpos = [p.vars.index(v) if v in p.vars else None for v in vnames]
        for e, c in p.terms.items():
            key = tuple(e[i] if i is not None else 0 for i in vpos)
            rest = list(e)
            for i in vpos:
                if i is not None:
                    rest[i] = 0
            out.setdefault(key, {})[tuple(rest)] = c
        return {k: MultiPoly(p.vars, t).compress() for k, t in out.items()}

    L_parts = split_tangent(L)
    det_parts = split_tangent(det_v)
    mu = None
    residuals: list[MultiPoly] = []
    for key, dcoef in det_parts.items():
        c = dcoef.const_value()
        part = L_parts.pop(key, MultiPoly.zero())
        cand = part.scale(Fraction(1) / c)
        if mu is None:
            mu = cand
        elif not (mu - cand).is_zero():
            residuals.append(mu - cand)
    for key, part in L_parts.items():
        if not part.is_zero():
            residuals.append(part)
    ok = not residuals
    return ConformalCheckResult(mu if ok else None, residuals, ok)


def sp6_rank() -> int:
    """Rank of the 21 generators as vectors of polynomial components."""
    gens = sp6_generators()
    jet = second_jet_vars(3)
    monos: list[tuple[str, tuple[int, ...]]] = []
    index: dict[tuple[str, tuple[int, ...]], int] = {}
    rows = []
    for g in gens:
        entries: dict[int, Fraction] = {}
        for v in jet:
            comp = g.component(v).with_vars(tuple(jet))
            for e, c in comp.terms.items():
                key = (v, e)
                if key not in index:
                    index[key] = len(monos)
                    monos.append(key)
                entries[index[key]] = c
        rows.append(entries)
    dense = [[row.get(c, Fraction(0)) for c in range(len(monos))] for row in rows]
    return QMatrix(dense).rank()


# -- the first-order obstruction tensor ---------------------------------------


@dataclass
class PhiReport:
    """The obstruction tensor: trace-free II for n = 2, II modulo contracted
    forms for n = 3; zero exactly on hyperplane sections."""

    n: int
    mode: str
    vanishes: bool
    tensor: list[list[RationalFunction]]

    def to_json(self) -> dict:
        from .exprparse import format_rf

        return {
            "n": self.n,
            "mode": self.mode,
            "vanishes": self.vanishes,
            "tensor": [[format_rf(x) for x in row] for row in self.tensor],
        }


def phi_obstruction(F: PDEFunction) -> PhiReport:
    if F.n == 2:
        for var in _solve_order(2):
            h = solve_graph_form(F.F, var)
            if h is None:
                continue
            I, II, tf = graph_fundamental_forms(2, h, var)
            if tf is not None:
                return PhiReport(2, f"trace-free II (graph over {var})", tf.is_zero(),
                                 [list(r) for r in tf.entries])
            res = proportionality_residuals(II, I)
            zero = RationalFunction.const(0)
            mat = [[res[0], res[1]], [res[1], res[2]]]
            return PhiReport(2, f"II vs I proportionality residuals (parabolic graph over {var})",
                             all(r.is_zero() for r in res), mat)
        raise MageError("no chart variable can be solved for; no graph form available")
    if F.n == 3:
        for var in _solve_order(3):
            h = solve_graph_form(F.F, var)
            if h is None:
                continue
            member, res = membership_direct_n3(h, solved=var)
            return PhiReport(3, f"II modulo contracted forms (graph over {var})", member, res)
        raise MageError("no chart variable can be solved for; no graph form available")
    raise ValueError("the obstruction tensor is implemented for n in {2, 3}")
