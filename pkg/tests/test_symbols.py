"""pde-symbols: symbols, iterated symbols, classification, exceptionality."""

import random
from fractions import Fraction

import pytest

from mage.exprparse import parse_expression
from mage.poly import DegenerateError, MageError, MultiPoly, RationalFunction
from mage.symbols import (
    PDEFunction,
    QuadExt,
    check_quasilinear_system,
    classify,
    exceptionality_at_point,
    exceptionality_at_roots,
    is_completely_exceptional,
    iterated_symbol,
    symbol,
    xi_exponent,
)


def pde(text: str, n: int = 2) -> PDEFunction:
    return PDEFunction(n, parse_expression(text, n))


def rf(text: str, n: int = 2) -> RationalFunction:
    return parse_expression(text, n)


def random_poly(rng, names, max_deg=3, terms=4):
    out = {}
    for _ in range(terms):
        exps = [0] * len(names)
        budget = rng.randint(0, max_deg)
        for _ in range(budget):
            exps[rng.randrange(len(names))] += 1
        out[tuple(exps)] = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
    return MultiPoly.make(names, out)


class TestSymbol:
    def test_single_variable(self):
        s = symbol(pde("p11"))
        assert s.coeffs == {(2, 0): RationalFunction.const(1)}

    def test_quasilinear_graph(self):
        # F = p22 - h(p11, p12): direct partials
        h = rf("p11^2*p12 + p12^3")
        F = pde("p22 - (p11^2*p12 + p12^3)")
        s = symbol(F)
        assert s.coeff((0, 2)) == RationalFunction.const(1)
        assert s.coeff((2, 0)) == -h.derivative("p11")
        assert s.coeff((1, 1)) == -h.derivative("p12")

    def test_determinant(self):
        s = symbol(pde("p11*p22 - p12^2"))
        assert s.coeff((2, 0)) == rf("p22")
        assert s.coeff((1, 1)) == rf("-2*p12")
        assert s.coeff((0, 2)) == rf("p11")


class TestIteratedSymbol:
    def test_order_one_is_symbol(self):
        for text in ["p11*p22 - p12^2", "p22 - p11^2", "p11 + 3*p12"]:
            F = pde(text)
            assert iterated_symbol(F, 1).coeffs == symbol(F).coeffs

    def test_determinant_second_symbol_vanishes(self):
        # det(P + t xi xi^T) is affine in t, so the second derivative is 0
        assert iterated_symbol(pde("p11*p22 - p12^2"), 2).is_zero()

    def test_quasilinear_chain_rule_oracle(self):
        # Smbl^2(p22 - h) = -(h_p11p11 xi1^4 + 2 h_p11p12 xi1^3 xi2 + h_p12p12 xi1^2 xi2^2)
        for text in ["p11^2", "p11^2*p12 + p12^3", "(p12^2-1)/p11"]:
            h = rf(text)
            F = PDEFunction(2, rf("p22") - h)
            got = iterated_symbol(F, 2)
            h11 = h.derivative("p11").derivative("p11")
            h12 = h.derivative("p11").derivative("p12")
            h22 = h.derivative("p12").derivative("p12")
            assert got.coeff((4, 0)) == -h11
            assert got.coeff((3, 1)) == -2 * h12
            assert got.coeff((2, 2)) == -h22
            assert got.coeff((1, 3)).is_zero()
            assert got.coeff((0, 4)).is_zero()

    def test_recursion_route_agreement(self):
        # Smbl^2(F) = sum_{i<=j} Smbl(F_p_ij) xi_i xi_j, for random F, n = 2 and 3
        rng = random.Random(113)
        for n in (2, 3):
            names = [f"p{i}{j}" for i in range(1, n + 1) for j in range(i, n + 1)]
            for _ in range(25):
                poly = random_poly(rng, names)
                F = PDEFunction(n, RationalFunction.from_poly(poly))
                direct = iterated_symbol(F, 2)
                recursed = {}
                for i in range(1, n + 1):
                    for j in range(i, n + 1):
                        inner = symbol(PDEFunction(n, F.F.derivative(f"p{i}{j}")))
                        for e, c in inner.coeffs.items():
                            key = tuple(a + b for a, b in zip(e, xi_exponent(n, i, j)))
                            recursed[key] = recursed.get(key, RationalFunction.const(0)) + c
                for key in set(direct.coeffs) | set(recursed):
                    assert direct.coeff(key) == recursed.get(key, RationalFunction.const(0))

    def test_homogeneity(self):
        rng = random.Random(5)
        names = ["p11", "p12", "p22"]
        for k in (1, 2, 3):
            F = PDEFunction(2, RationalFunction.from_poly(random_poly(rng, names)))
            s = iterated_symbol(F, k)
            assert all(sum(e) == 2 * k for e in s.coeffs)


class TestClassify:
    def test_wave(self):
        res = classify(pde("p11 - p22"))
        assert res.type == "hyperbolic"
        assert res.delta == 4
        assert res.roots == (Fraction(1), Fraction(-1))
        assert res.roots_exact

    def test_parabolic(self):
        res = classify(pde("p11"))
        assert res.type == "parabolic"
        assert res.delta == 0

    def test_elliptic_at_point(self):
        point = {"p11": Fraction(1), "p12": Fraction(0), "p22": Fraction(1)}
        res = classify(pde("p11*p22 - p12^2 - 1"), point)
        assert res.type == "elliptic"
        assert res.delta == -4

    def test_degenerate(self):
        res = classify(pde("x1 + u"))
        assert res.type == "degenerate"

    def test_irrational_roots_flagged(self):
        res = classify(pde("p11 - 2*p22"))  # lambda^2 = 1/2... delta = 8
        assert res.type == "hyperbolic"
        assert res.roots_exact is False


class TestExceptionalityAtRoots:
    def test_wave_residuals_vanish(self):
        point = {"p11": Fraction(3), "p12": Fraction(-1), "p22": Fraction(2)}
        out = exceptionality_at_roots(pde("p11 - p22"), point)
        assert [r.vanishes for r in out] == [True, True]
        assert sorted([r.root for r in out]) == [Fraction(-1), Fraction(1)]

    def test_p22_minus_p11sq(self):
        # roots +-1 at p11 = 1/2; lambda_p11 = 1/lambda, residual 1/lambda
        point = {"p11": Fraction(1, 2), "p12": Fraction(0), "p22": Fraction(0)}
        out = exceptionality_at_roots(pde("p22 - p11^2"), point)
        assert sorted([r.root for r in out]) == [Fraction(-1), Fraction(1)]
        for r in out:
            assert not r.vanishes
            assert r.residual == 1 / r.root

    def test_ma_family_residuals_vanish(self):
        rng = random.Random(31)
        found = 0
        while found < 5:
            ks = [Fraction(rng.randint(-4, 4)) for _ in range(5)]
            if ks[0] == 0:
                continue
            expr = f"({ks[0]})*(p11*p22-p12^2) + ({ks[1]})*p11 + ({ks[2]})*p12 + ({ks[3]})*p22 + ({ks[4]})"
            F = pde(expr)
            point = {"p11": Fraction(rng.randint(-3, 3)), "p12": Fraction(rng.randint(-3, 3)),
                     "p22": Fraction(rng.randint(-3, 3))}
            try:
                out = exceptionality_at_roots(F, point)
            except MageError:
                continue
            assert all(r.vanishes for r in out)
            found += 1

    def test_irrational_roots_are_exact(self):
        point = {"p11": Fraction(1), "p12": Fraction(0), "p22": Fraction(0)}
        out = exceptionality_at_roots(pde("p22 - p11^2"), point)  # lambda^2 = 2
        for r in out:
            assert isinstance(r.root, QuadExt)
            assert r.residual * r.root == QuadExt.of(1, r.root.D)  # residual = 1/root

    def test_elliptic_point_raises(self):
        point = {"p11": Fraction(0), "p12": Fraction(0), "p22": Fraction(0)}
        with pytest.raises(MageError):
            exceptionality_at_roots(pde("p11*p22 - p12^2 - 1"), point)

    def test_parabolic_point_raises(self):
        point = {"p11": Fraction(0), "p12": Fraction(0), "p22": Fraction(0)}
        with pytest.raises(DegenerateError):
            exceptionality_at_roots(pde("p11"), point)


class TestIsCompletelyExceptional:
    def test_generic_ma_family(self):
        rng = random.Random(77)
        for _ in range(5):
            ks = [Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(5)]
            if ks[0] == 0:
                ks[0] = Fraction(1)
            expr = (f"({ks[0]})*(p11*p22-p12^2) + ({ks[1]})*p11 + "
                    f"({ks[2]})*p12 + ({ks[3]})*p22 + ({ks[4]})")
            rep = is_completely_exceptional(pde(expr))
            assert rep.globally_proportional
            assert rep.on_shell_proportional
            assert rep.cofactor is not None

    def test_failure_witness(self):
        # Smbl = xi2^2 - 2 p11 xi1^2, Smbl^2 = -2 xi1^4: no cofactor exists
        rep = is_completely_exceptional(pde("p22 - p11^2"))
        assert not rep.globally_proportional
        assert not rep.on_shell_proportional
        assert rep.cofactor is None
        assert any(not r.is_zero() for r in rep.residuals)

    def test_parabolic_with_zero_cofactor(self):
        rep = is_completely_exceptional(pde("p11"))
        assert rep.globally_proportional
        assert rep.cofactor is not None and all(c.is_zero() for c in rep.cofactor.coeffs.values())

    def test_degenerate_symbol_raises(self):
        with pytest.raises(DegenerateError):
            is_completely_exceptional(pde("u + x1"))

    def test_n3_minor(self):
        rep = is_completely_exceptional(pde("p11*p22 - p12^2", 3))
        assert rep.globally_proportional

    def test_scaling_invariance(self):
        base = "p11*p22 - p12^2 + 2*p11 - p12 + 3*p22 + 1"
        expect = is_completely_exceptional(pde(base)).on_shell_proportional
        for g in ["2", "(1 + p11^2)", "(1+p12^2)/(2+p11^2)"]:
            rep = is_completely_exceptional(pde(f"({g})*({base})"))
            assert rep.on_shell_proportional == expect
        bad = "p22 - p11^2"
        expect_bad = is_completely_exceptional(pde(bad)).on_shell_proportional
        for g in ["3", "(1 + p11^2)"]:
            rep = is_completely_exceptional(pde(f"({g})*({bad})"))
            assert rep.on_shell_proportional == expect_bad is False


class TestQuasilinearSystem:
    def test_linear(self):
        r1, r2 = check_quasilinear_system(rf("3*p11 + 5*p12 - 2"))
        assert r1.is_zero() and r2.is_zero()

    def test_p12_squared_fails(self):
        r1, r2 = check_quasilinear_system(rf("p12^2"))
        assert r1.is_zero()
        assert r2 == rf("4*p12")

    def test_hyperplane_graph(self):
        r1, r2 = check_quasilinear_system(rf("(p12^2 - 1)/p11"))
        assert r1.is_zero() and r2.is_zero()

    def test_agrees_with_on_shell_verdict(self):
        rng = random.Random(55)
        texts = []
        # Monge-Ampere graphs
        for _ in range(6):
            k = [Fraction(rng.randint(-3, 3)) for _ in range(5)]
            if k[0] == 0:
                k[0] = Fraction(2)
            if k[3] == 0:
                k[3] = Fraction(1)
            texts.append(f"(({k[0]})*p12^2 - ({k[1]})*p11 - ({k[2]})*p12 - ({k[4]}))"
                         f"/(({k[3]}) + ({k[0]})*p11)")
        # polynomial non-examples and linear examples
        texts += ["p11^2", "p12^3", "p11*p12^2", "p11 - 4*p12", "p11*p12"]
        for text in texts:
            h = rf(text)
            r1, r2 = check_quasilinear_system(h)
            system_ok = r1.is_zero() and r2.is_zero()
            F = PDEFunction(2, rf("p22") - h)
            rep = is_completely_exceptional(F)
            assert rep.restricted
            assert system_ok == rep.on_shell_proportional, text


class TestPointwiseConsistency:
    def test_root_and_cofactor_routes_agree(self):
        rng = random.Random(99)
        cases = ["p11*p22 - p12^2 + p11 + 1", "p22 - p11^2", "p22 - p12^3",
                 "2*(p11*p22-p12^2) - p11 + 3*p22 + 2"]
        checked = 0
        for text in cases:
            F = pde(text)
            for _ in range(30):
                point = {v: Fraction(rng.randint(-4, 4), rng.randint(1, 2))
                         for v in ("p11", "p12", "p22")}
                try:
                    roots = exceptionality_at_roots(F, point)
                except MageError:
                    continue  # not strictly hyperbolic there, or root at infinity
                ok_roots = all(r.vanishes for r in roots)
                ok_cof, _ = exceptionality_at_point(F, point)
                assert ok_roots == ok_cof, (text, point)
                checked += 1
                break
        assert checked >= 3
