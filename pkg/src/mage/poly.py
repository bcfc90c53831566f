"""Exact sparse multivariate polynomial and rational-function arithmetic over Q.

Coefficients are `fractions.Fraction` throughout; nothing in this module ever
touches floating point.  A `MultiPoly` keeps an ordered variable registry
together with a sparse map from exponent vectors to nonzero coefficients, so
two equal polynomials over the same registry have identical term maps.  A
`RationalFunction` is a reduced quotient of two polynomials whose denominator
is monic in graded-lex order, which makes equality a structural comparison.

Variable names carry meaning for the ordering: second-jet chart variables
p11 <= p12 <= ... <= pnn come first, covector variables xi1..xin next, and
everything else (base variables x_i, the unknown u, first-jet p_i, named
parameters) after those.  The term order is graded lexicographic with respect
to that variable order.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Union

Coefficient = Union[int, Fraction]


class MageError(Exception):
    """Base class for math-domain errors raised by this package."""


class PoleError(MageError):
    """Evaluation or substitution hit a zero denominator."""


class DegenerateError(MageError):
    """The requested operation is undefined on a degenerate input."""


class CapExceededError(MageError):
    """A configurable size guard was exceeded."""


_RE_SECOND_JET = re.compile(r"^p([1-9])([1-9])$")
_RE_FIRST_JET = re.compile(r"^p([1-9])$")
_RE_COVECTOR = re.compile(r"^xi([1-9])$")
_RE_BASE = re.compile(r"^x([1-9])$")


def var_sort_key(name: str) -> tuple:
    """Total order on variable names: p_ij, then xi_i, then x_i, u, p_i, params."""
    m = _RE_SECOND_JET.match(name)
    if m:
        return (0, int(m.group(1)), int(m.group(2)), "")
    m = _RE_COVECTOR.match(name)
    if m:
        return (1, int(m.group(1)), 0, "")
    m = _RE_BASE.match(name)
    if m:
        return (2, int(m.group(1)), 0, "")
    if name == "u":
        return (3, 0, 0, "")
    m = _RE_FIRST_JET.match(name)
    if m:
        return (4, int(m.group(1)), 0, "")
    return (5, 0, 0, name)


def second_jet_vars(n: int) -> list[str]:
    """Chart variable names p11, p12, ..., pnn (i <= j) in canonical order."""
    return [f"p{i}{j}" for i in range(1, n + 1) for j in range(i, n + 1)]


def covector_vars(n: int) -> list[str]:
    return [f"xi{i}" for i in range(1, n + 1)]


def _grlex(exps: tuple[int, ...]) -> tuple:
    return (sum(exps), exps)


def rational_str(q: Fraction) -> str:
    """Serialize a rational as "num/den", omitting the denominator when 1."""
    return str(q)


def rational_from_str(s: str) -> Fraction:
    return Fraction(s)


class MultiPoly:
    """A sparse multivariate polynomial with Fraction coefficients.

    Invariants: no zero coefficients are stored, every exponent vector has
    length equal to the registry size, and the registry is sorted by
    `var_sort_key`.
    """

    __slots__ = ("vars", "terms")

    def __init__(self, vars: tuple[str, ...], terms: dict[tuple[int, ...], Fraction]):
        self.vars = vars
        self.terms = terms

    # -- constructors ------------------------------------------------------

    @staticmethod
    def make(vars: Iterable[str], terms: Mapping[tuple[int, ...], Coefficient]) -> "MultiPoly":
        """Build a polynomial, sorting the registry and dropping zero terms."""
        vs = tuple(sorted(set(vars), key=var_sort_key))
        order = {v: i for i, v in enumerate(vs)}
        raw = list(vars)
        clean: dict[tuple[int, ...], Fraction] = {}
        for exps, c in terms.items():
            c = Fraction(c)
            if c == 0:
                continue
            if len(exps) != len(raw):
                raise ValueError("exponent vector length does not match registry")
            new = [0] * len(vs)
            for name, e in zip(raw, exps):
                new[order[name]] += e
            key = tuple(new)
            c2 = clean.get(key, _ZERO_F) + c
            if c2 == 0:
                clean.pop(key, None)
            else:
                clean[key] = c2
        return MultiPoly(vs, clean)

    @staticmethod
    def const(c: Coefficient, vars: Iterable[str] = ()) -> "MultiPoly":
        vs = tuple(sorted(set(vars), key=var_sort_key))
        c = Fraction(c)
        if c == 0:
            return MultiPoly(vs, {})
        return MultiPoly(vs, {(0,) * len(vs): c})

    @staticmethod
    def var(name: str) -> "MultiPoly":
        return MultiPoly((name,), {(1,): Fraction(1)})

    @staticmethod
    def zero(vars: Iterable[str] = ()) -> "MultiPoly":
        return MultiPoly.const(0, vars)

    @staticmethod
    def one(vars: Iterable[str] = ()) -> "MultiPoly":
        return MultiPoly.const(1, vars)

    # -- basic queries -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_const(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def const_value(self) -> Fraction:
        """The value of a constant polynomial (raises if not constant)."""
        if not self.terms:
            return Fraction(0)
        if not self.is_const():
            raise ValueError("polynomial is not constant")
        return next(iter(self.terms.values()))

    def total_degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree_in(self, name: str) -> int:
        if name not in self.vars:
            return 0
        i = self.vars.index(name)
        if not self.terms:
            return 0
        return max(e[i] for e in self.terms)

    def variables_present(self) -> set[str]:
        out: set[str] = set()
        for e in self.terms:
            for i, k in enumerate(e):
                if k:
                    out.add(self.vars[i])
        return out

    def leading(self) -> tuple[tuple[int, ...], Fraction]:
        """Leading (exponent, coefficient) in graded-lex order."""
        key = max(self.terms, key=_grlex)
        return key, self.terms[key]

    def leading_coeff(self) -> Fraction:
        return self.leading()[1]

    # -- registry handling -------------------------------------------------

    def with_vars(self, vs: tuple[str, ...]) -> "MultiPoly":
        """Re-express this polynomial over a superset registry `vs`."""
        if vs == self.vars:
            return self
        pos = []
        for v in self.vars:
            pos.append(vs.index(v))
        m = len(vs)
        terms = {}
        for e, c in self.terms.items():
            new = [0] * m
            for p, k in zip(pos, e):
                new[p] = k
            terms[tuple(new)] = c
        return MultiPoly(vs, terms)

    def compress(self) -> "MultiPoly":
        """Drop registry variables that appear in no term."""
        used = self.variables_present()
        if len(used) == len(self.vars):
            return self
        vs = tuple(v for v in self.vars if v in used)
        keep = [i for i, v in enumerate(self.vars) if v in used]
        terms = {tuple(e[i] for i in keep): c for e, c in self.terms.items()}
        return MultiPoly(vs, terms)

    @staticmethod
    def align(a: "MultiPoly", b: "MultiPoly") -> tuple["MultiPoly", "MultiPoly"]:
        if a.vars == b.vars:
            return a, b
        vs = tuple(sorted(set(a.vars) | set(b.vars), key=var_sort_key))
        return a.with_vars(vs), b.with_vars(vs)

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "MultiPoly | None":
        if isinstance(other, MultiPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return MultiPoly.const(other, self.vars)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = MultiPoly.align(self, o)
        terms = dict(a.terms)
        for e, c in b.terms.items():
            s = terms.get(e, _ZERO_F) + c
            if s == 0:
                terms.pop(e, None)
            else:
                terms[e] = s
        return MultiPoly(a.vars, terms)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = MultiPoly.align(self, o)
        if not a.terms or not b.terms:
            return MultiPoly(a.vars, {})
        terms: dict[tuple[int, ...], Fraction] = {}
        bitems = list(b.terms.items())
        for ea, ca in a.terms.items():
            for eb, cb in bitems:
                key = tuple(x + y for x, y in zip(ea, eb))
                s = terms.get(key, _ZERO_F) + ca * cb
                if s == 0:
                    terms.pop(key, None)
                else:
                    terms[key] = s
        return MultiPoly(a.vars, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("exponent must be an integer")
        if k < 0:
            raise ValueError("negative exponent: use RationalFunction")
        result = MultiPoly.one(self.vars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def scale(self, c: Coefficient) -> "MultiPoly":
        c = Fraction(c)
        if c == 0:
            return MultiPoly(self.vars, {})
        return MultiPoly(self.vars, {e: v * c for e, v in self.terms.items()})

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return self.scale(Fraction(1, 1) / Fraction(other))
        if isinstance(other, MultiPoly):
            return RationalFunction.from_polys(self, other)
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.is_const() and self.const_value() == other
        if not isinstance(other, MultiPoly):
            return NotImplemented
        a, b = MultiPoly.align(self, other)
        return a.terms == b.terms

    __hash__ = None  # mutable dict payload; not intended as a dict key

    # -- calculus ----------------------------------------------------------

    def derivative(self, name: str) -> "MultiPoly":
        """Exact formal partial derivative with respect to `name`."""
        if name not in self.vars:
            return MultiPoly.zero(self.vars)
        i = self.vars.index(name)
        terms: dict[tuple[int, ...], Fraction] = {}
        for e, c in self.terms.items():
            k = e[i]
            if k == 0:
                continue
            new = list(e)
            new[i] = k - 1
            terms[tuple(new)] = c * k
        return MultiPoly(self.vars, terms)

    def eval(self, point: Mapping[str, Coefficient]) -> Fraction:
        """Evaluate at a rational point binding every present variable."""
        vals = []
        for v in self.vars:
            if v in point:
                vals.append(Fraction(point[v]))
            else:
                vals.append(None)
        total = Fraction(0)
        for e, c in self.terms.items():
            acc = c
            for i, k in enumerate(e):
                if k == 0:
                    continue
                if vals[i] is None:
                    raise ValueError(f"unbound variable {self.vars[i]!r} in evaluation")
                acc *= vals[i] ** k
            total += acc
        return total

    def subst_var_poly(self, name: str, value: "MultiPoly") -> "MultiPoly":
        """Substitute a polynomial for one variable (Horner in that variable)."""
        if name not in self.vars or self.degree_in(name) == 0:
            return self
        i = self.vars.index(name)
        by_deg: dict[int, dict[tuple[int, ...], Fraction]] = {}
        for e, c in self.terms.items():
            k = e[i]
            rest = list(e)
            rest[i] = 0
            by_deg.setdefault(k, {})[tuple(rest)] = c
        top = max(by_deg)
        acc = MultiPoly(self.vars, by_deg.get(top, {}))
        for k in range(top - 1, -1, -1):
            acc = acc * value + MultiPoly(self.vars, by_deg.get(k, {}))
        return acc

    def substitute(self, bindings: Mapping[str, "RationalFunction | MultiPoly | Coefficient"]) -> "RationalFunction":
        """Exact composition; returns a reduced RationalFunction."""
        return RationalFunction.from_poly(self).substitute(bindings)

    # -- display and serialization ------------------------------------------

    def sorted_terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        return sorted(self.terms.items(), key=lambda t: _grlex(t[0]), reverse=True)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            factors = []
            for v, k in zip(self.vars, e):
                if k == 1:
                    factors.append(v)
                elif k > 1:
                    factors.append(f"{v}^{k}")
            mono = "*".join(factors)
            if not mono:
                piece = str(c)
            elif c == 1:
                piece = mono
            elif c == -1:
                piece = f"-{mono}"
            else:
                piece = f"{c}*{mono}"
            parts.append(piece)
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    __repr__ = __str__

    def to_json(self) -> dict:
        p = self.compress()
        return {
            "vars": list(p.vars),
            "terms": [{"exps": list(e), "coef": rational_str(c)} for e, c in p.sorted_terms()],
        }

    @staticmethod
    def from_json(obj: dict) -> "MultiPoly":
        vs = obj["vars"]
        terms = {tuple(t["exps"]): rational_from_str(t["coef"]) for t in obj["terms"]}
        return MultiPoly.make(vs, terms)


_ZERO_F = Fraction(0)


# -- polynomial division and gcd -------------------------------------------


def exact_div(f: MultiPoly, g: MultiPoly) -> MultiPoly:
    """Exact division f/g in the polynomial ring; raises if not a multiple."""
    if g.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if g.is_const():
        return f.scale(Fraction(1) / g.const_value())
    f, g = MultiPoly.align(f, g)
    lg, cg = g.leading()
    q_terms: dict[tuple[int, ...], Fraction] = {}
    rem = dict(f.terms)
    g_items = list(g.terms.items())
    while rem:
        e = max(rem, key=_grlex)
        c = rem[e]
        qe = tuple(a - b for a, b in zip(e, lg))
        if any(k < 0 for k in qe):
            raise ValueError("not an exact multiple")
        qc = c / cg
        q_terms[qe] = q_terms.get(qe, _ZERO_F) + qc
        for eg, cgg in g_items:
            key = tuple(a + b for a, b in zip(qe, eg))
            s = rem.get(key, _ZERO_F) - qc * cgg
            if s == 0:
                rem.pop(key, None)
            else:
                rem[key] = s
    return MultiPoly(f.vars, {e: c for e, c in q_terms.items() if c != 0})


def _split_by_var(f: MultiPoly, i: int) -> dict[int, MultiPoly]:
    """View f as univariate in vars[i]; coefficients keep the full registry."""
    out: dict[int, dict[tuple[int, ...], Fraction]] = {}
    for e, c in f.terms.items():
        k = e[i]
        rest = list(e)
        rest[i] = 0
        out.setdefault(k, {})[tuple(rest)] = c
    return {k: MultiPoly(f.vars, t) for k, t in out.items()}


def _join_by_var(parts: dict[int, MultiPoly], vars: tuple[str, ...], i: int) -> MultiPoly:
    terms: dict[tuple[int, ...], Fraction] = {}
    for k, p in parts.items():
        for e, c in p.terms.items():
            new = list(e)
            new[i] += k
            terms[tuple(new)] = c
    return MultiPoly(vars, terms)


def _degree_at(f: MultiPoly, i: int) -> int:
    return max((e[i] for e in f.terms), default=-1)


def _lead_coeff_at(f: MultiPoly, i: int) -> MultiPoly:
    d = _degree_at(f, i)
    terms = {}
    for e, c in f.terms.items():
        if e[i] == d:
            rest = list(e)
            rest[i] = 0
            terms[tuple(rest)] = c
    return MultiPoly(f.vars, terms)


def _shift_mul(f: MultiPoly, i: int, k: int) -> MultiPoly:
    if k == 0:
        return f
    terms = {}
    for e, c in f.terms.items():
        new = list(e)
        new[i] += k
        terms[tuple(new)] = c
    return MultiPoly(f.vars, terms)


def _pseudo_rem(f: MultiPoly, g: MultiPoly, i: int) -> MultiPoly:
    """Strict pseudo-remainder: lc(g)^(deg f - deg g + 1) * f mod g."""
    df, dg = _degree_at(f, i), _degree_at(g, i)
    if df < dg:
        return f
    lg = _lead_coeff_at(g, i)
    r = f
    e = df - dg + 1
    while not r.is_zero():
        dr = _degree_at(r, i)
        if dr < dg:
            break
        lr = _lead_coeff_at(r, i)
        r = r * lg - _shift_mul(g * lr, i, dr - dg)
        e -= 1
    if e > 0:
        r = r * lg ** e
    return r


def _content_primitive(f: MultiPoly, i: int) -> tuple[MultiPoly, MultiPoly]:
    parts = _split_by_var(f, i)
    cont = MultiPoly.zero(f.vars)
    for p in parts.values():
        cont = poly_gcd(cont, p)
        if cont.is_const() and not cont.is_zero():
            break
    if cont.is_zero():
        return MultiPoly.zero(f.vars), MultiPoly.zero(f.vars)
    return cont, exact_div(f, cont)


def _monomial_gcd(f: MultiPoly, g: MultiPoly) -> MultiPoly:
    f, g = MultiPoly.align(f, g)
    mins = None
    for e in list(f.terms) + list(g.terms):
        if mins is None:
            mins = list(e)
        else:
            mins = [min(a, b) for a, b in zip(mins, e)]
    return MultiPoly(f.vars, {tuple(mins): Fraction(1)})


def _monomial_content(f: MultiPoly) -> tuple[int, ...]:
    mins = None
    for e in f.terms:
        if mins is None:
            mins = list(e)
        else:
            mins = [min(a, b) for a, b in zip(mins, e)]
        if not any(mins):
            break
    return tuple(mins)


_IMAGE_POINTS = (Fraction(2), Fraction(-3), Fraction(5), Fraction(-7), Fraction(11),
                 Fraction(1, 2), Fraction(-5, 3), Fraction(13))


def _univariate_image(f: MultiPoly, i: int, point: dict[int, Fraction]) -> dict[int, Fraction]:
    """Coefficients by degree in vars[i] after evaluating all other variables."""
    out: dict[int, Fraction] = {}
    for e, c in f.terms.items():
        acc = c
        for j, k in enumerate(e):
            if k and j != i:
                acc *= point[j] ** k
        d = e[i]
        s = out.get(d, _ZERO_F) + acc
        if s == 0:
            out.pop(d, None)
        else:
            out[d] = s
    return out


def _uni_gcd_degree(a: dict[int, Fraction], b: dict[int, Fraction]) -> int:
    """Degree of gcd of two univariate rational polynomials (dense Euclid)."""

    def to_list(d: dict[int, Fraction]) -> list[Fraction]:
        top = max(d)
        return [d.get(k, _ZERO_F) for k in range(top + 1)]

    fa, fb = to_list(a), to_list(b)
    while fb and any(x != 0 for x in fb):
        while fb and fb[-1] == 0:
            fb.pop()
        if not fb:
            break
        while len(fa) >= len(fb):
            if fa[-1] != 0:
                q = fa[-1] / fb[-1]
                off = len(fa) - len(fb)
                for k in range(len(fb)):
                    fa[off + k] -= q * fb[k]
            fa.pop()
            if not fa:
                break
        fa, fb = fb, fa
    while fa and fa[-1] == 0:
        fa.pop()
    return len(fa) - 1


def _certify_var_free(f: MultiPoly, g: MultiPoly, i: int) -> bool:
    """True when gcd(f, g) provably has degree 0 in vars[i].

    Evaluate every other variable at a rational point; if the leading
    x-coefficients of both images are nonzero (so degrees are preserved) and
    the univariate image gcd is constant, then so is the x-part of the true
    gcd (the leading coefficient of any common divisor divides both leading
    coefficients, hence cannot vanish at the point).
    """
    others = [j for j in range(len(f.vars)) if j != i]
    df, dg = _degree_at(f, i), _degree_at(g, i)
    for attempt in range(4):
        point = {j: _IMAGE_POINTS[(attempt + j) % len(_IMAGE_POINTS)] for j in others}
        fi = _univariate_image(f, i, point)
        gi = _univariate_image(g, i, point)
        if fi.get(df, _ZERO_F) == 0 or gi.get(dg, _ZERO_F) == 0:
            continue  # unlucky point: a leading coefficient vanished
        return _uni_gcd_degree(fi, gi) == 0
    return False


def _subresultant_gcd(f: MultiPoly, g: MultiPoly, i: int) -> MultiPoly:
    """Gcd of primitive f, g in the main variable vars[i] (subresultant PRS)."""
    a, b = (f, g) if _degree_at(f, i) >= _degree_at(g, i) else (g, f)
    one = MultiPoly.one(f.vars)
    gg = one
    h = one
    while True:
        delta = _degree_at(a, i) - _degree_at(b, i)
        r = _pseudo_rem(a, b, i)
        if r.is_zero():
            _, pp = _content_primitive(b, i)
            return pp
        if _degree_at(r, i) == 0:
            return one
        denom = gg * h ** delta
        a, b = b, exact_div(r, denom)
        gg = _lead_coeff_at(a, i)
        if delta == 0:
            # h unchanged
            pass
        elif delta == 1:
            h = gg
        else:
            h = exact_div(gg ** delta, h ** (delta - 1))


def poly_gcd(f: MultiPoly, g: MultiPoly) -> MultiPoly:
    """Monic gcd over Q: monomial content, variable elimination via exact
    univariate-image certificates, then a subresultant PRS on what is left."""
    if f.is_zero():
        return _make_monic(g)
    if g.is_zero():
        return _make_monic(f)
    f, g = MultiPoly.align(f, g)
    if f.is_const() or g.is_const():
        return MultiPoly.one(f.vars)
    if len(f.terms) == 1 or len(g.terms) == 1:
        return _monomial_gcd(f, g)
    # pull out the common monomial part first
    mf = _monomial_content(f)
    mg = _monomial_content(g)
    common_mono = tuple(min(a, b) for a, b in zip(mf, mg))
    if any(mf):
        f = MultiPoly(f.vars, {tuple(a - b for a, b in zip(e, mf)): c for e, c in f.terms.items()})
    if any(mg):
        g = MultiPoly(g.vars, {tuple(a - b for a, b in zip(e, mg)): c for e, c in g.terms.items()})
    mono = MultiPoly(f.vars, {common_mono: Fraction(1)})
    core = _gcd_core(f, g)
    return _make_monic(mono * core)


def _gcd_core(f: MultiPoly, g: MultiPoly) -> MultiPoly:
    if f.is_const() or g.is_const():
        return MultiPoly.one(f.vars)
    if len(f.terms) == 1 or len(g.terms) == 1:
        return _monomial_gcd(f, g)
    shared = sorted(
        {i for i, v in enumerate(f.vars) if f.degree_in(v) > 0}
        & {i for i, v in enumerate(g.vars) if g.degree_in(v) > 0}
    )
    if not shared:
        return MultiPoly.one(f.vars)
    # eliminate variables certified absent from the gcd
    active = []
    for i in shared:
        if _certify_var_free(f, g, i):
            fc = _content_list_gcd(f, i)
            gc = _content_list_gcd(g, i)
            return _gcd_core(fc, gc)
        active.append(i)
    # pick the main variable with the smallest degree sum
    idx = min(active, key=lambda i: _degree_at(f, i) + _degree_at(g, i))
    cf, pf = _content_primitive(f, idx)
    cg, pg = _content_primitive(g, idx)
    c = poly_gcd(cf, cg)
    return c * _subresultant_gcd(pf, pg, idx)


def _content_list_gcd(f: MultiPoly, i: int) -> MultiPoly:
    parts = _split_by_var(f, i)
    cont = MultiPoly.zero(f.vars)
    for p in parts.values():
        cont = poly_gcd(cont, p)
        if cont.is_const() and not cont.is_zero():
            break
    return cont


def _make_monic(f: MultiPoly) -> MultiPoly:
    if f.is_zero():
        return f
    lc = f.leading_coeff()
    if lc == 1:
        return f
    return f.scale(Fraction(1) / lc)


# -- rational functions ------------------------------------------------------


class RationalFunction:
    """A reduced quotient of two MultiPoly with a monic graded-lex denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: MultiPoly, den: MultiPoly):
        self.num = num
        self.den = den

    @staticmethod
    def from_polys(num: MultiPoly, den: MultiPoly) -> "RationalFunction":
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        num, den = MultiPoly.align(num, den)
        if num.is_zero():
            return RationalFunction(MultiPoly.zero(num.vars), MultiPoly.one(num.vars))
        if den.is_const():
            return RationalFunction(num.scale(Fraction(1) / den.const_value()), MultiPoly.one(num.vars))
        g = poly_gcd(num, den)
        if not (g.is_const()):
            num = exact_div(num, g)
            den = exact_div(den, g)
        if den.is_const():
            return RationalFunction(num.scale(Fraction(1) / den.const_value()), MultiPoly.one(num.vars))
        lc = den.leading_coeff()
        if lc != 1:
            inv = Fraction(1) / lc
            num = num.scale(inv)
            den = den.scale(inv)
        return RationalFunction(num, den)

    @staticmethod
    def from_poly(p: MultiPoly) -> "RationalFunction":
        return RationalFunction(p, MultiPoly.one(p.vars))

    @staticmethod
    def const(c: Coefficient, vars: Iterable[str] = ()) -> "RationalFunction":
        return RationalFunction.from_poly(MultiPoly.const(c, vars))

    @staticmethod
    def var(name: str) -> "RationalFunction":
        return RationalFunction.from_poly(MultiPoly.var(name))

    # -- queries --

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self) -> bool:
        return bool(self.num)

    def is_poly(self) -> bool:
        return self.den.is_const()

    def as_poly(self) -> MultiPoly:
        if not self.is_poly():
            raise ValueError("rational function has a nontrivial denominator")
        return self.num if self.den == 1 else self.num.scale(Fraction(1) / self.den.const_value())

    def is_const(self) -> bool:
        return self.num.is_const() and self.den.is_const()

    def const_value(self) -> Fraction:
        return self.num.const_value() / self.den.const_value()

    def variables_present(self) -> set[str]:
        return self.num.variables_present() | self.den.variables_present()

    # -- arithmetic --

    def _coerce(self, other) -> "RationalFunction | None":
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, MultiPoly):
            return RationalFunction.from_poly(other)
        if isinstance(other, (int, Fraction)):
            return RationalFunction.const(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.den == o.den:
            return RationalFunction.from_polys(self.num + o.num, self.den)
        return RationalFunction.from_polys(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RationalFunction.from_polys(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RationalFunction.from_polys(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("exponent must be an integer")
        if k < 0:
            if self.is_zero():
                raise ZeroDivisionError("zero to a negative power")
            return RationalFunction.from_polys(self.den ** (-k), self.num ** (-k))
        return RationalFunction.from_polys(self.num ** k, self.den ** k)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    __hash__ = None

    # -- calculus --

    def derivative(self, name: str) -> "RationalFunction":
        """Quotient rule with reduction."""
        dn = self.num.derivative(name)
        if self.is_poly():
            return RationalFunction.from_polys(dn, self.den)
        dd = self.den.derivative(name)
        return RationalFunction.from_polys(dn * self.den - self.num * dd, self.den * self.den)

    def substitute(self, bindings: Mapping[str, "RationalFunction | MultiPoly | Coefficient"]) -> "RationalFunction":
        """Exact composition, reduced; raises PoleError if the denominator dies."""
        rf_bindings: dict[str, RationalFunction] = {}
        for k, v in bindings.items():
            if isinstance(v, RationalFunction):
                rf_bindings[k] = v
            elif isinstance(v, MultiPoly):
                rf_bindings[k] = RationalFunction.from_poly(v)
            else:
                rf_bindings[k] = RationalFunction.const(v)
        num = _subst_poly_rf(self.num, rf_bindings)
        den = _subst_poly_rf(self.den, rf_bindings)
        if den.is_zero():
            raise PoleError("substitution produced an identically zero denominator")
        return num / den

    def eval(self, point: Mapping[str, Coefficient]) -> Fraction:
        d = self.den.eval(point)
        if d == 0:
            raise PoleError("evaluation at a pole")
        return self.num.eval(point) / d

    # -- display --

    def __str__(self) -> str:
        if self.is_poly():
            return str(self.as_poly())
        return f"({self.num}) / ({self.den})"

    __repr__ = __str__

    def to_json(self) -> dict:
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    @staticmethod
    def from_json(obj: dict) -> "RationalFunction":
        return RationalFunction.from_polys(MultiPoly.from_json(obj["num"]), MultiPoly.from_json(obj["den"]))


def _subst_poly_rf(p: MultiPoly, bindings: Mapping[str, RationalFunction]) -> RationalFunction:
    """Substitute rational functions into a polynomial (simultaneous semantics)."""
    relevant = [v for v in p.vars if v in bindings and p.degree_in(v) > 0]
    if not relevant:
        return RationalFunction.from_poly(p)
    # Bound names showing up inside binding values would make sequential
    # substitution wrong; route those through fresh intermediate names.
    bound = set(relevant)
    clash = any(bound & bindings[v].variables_present() for v in relevant)
    work = p
    if clash:
        fresh = {v: f"_sub{i}_{v}" for i, v in enumerate(relevant)}
        for v in relevant:
            work = work.subst_var_poly(v, MultiPoly.var(fresh[v]).with_vars(
                tuple(sorted(set(work.vars) | {fresh[v]}, key=var_sort_key))))
        table = {fresh[v]: bindings[v] for v in relevant}
        relevant = list(table)
    else:
        table = {v: bindings[v] for v in relevant}
    acc = RationalFunction.from_poly(work)
    for name in relevant:
        n = _subst_one(acc.num, name, table[name])
        d = _subst_one(acc.den, name, table[name])
        if d.is_zero():
            raise PoleError("substitution produced an identically zero denominator")
        acc = n / d
    return acc


def _subst_one(p: MultiPoly, name: str, value: RationalFunction) -> RationalFunction:
    """Substitute one variable by b/a: sum_k f_k (b/a)^k = sum f_k b^k a^(K-k) / a^K."""
    if name not in p.vars or p.degree_in(name) == 0:
        return RationalFunction.from_poly(p)
    i = p.vars.index(name)
    parts = _split_by_var(p, i)
    top = max(parts)
    b, a = value.num, value.den
    apows = [MultiPoly.one(a.vars)]
    bpows = [MultiPoly.one(b.vars)]
    for _ in range(top):
        apows.append(apows[-1] * a)
        bpows.append(bpows[-1] * b)
    num = MultiPoly.zero(p.vars)
    for k, coeff in parts.items():
        num = num + coeff * bpows[k] * apows[top - k]
    return RationalFunction.from_polys(num, apows[top])
