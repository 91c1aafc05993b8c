"""Field arithmetic, involution, derivatives, substitution."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ihg import (
    Coefficient,
    DenominatorVanishes,
    DivisionByZero,
    GaussianRational,
    MixedRadicals,
    QuadraticSurd,
)
from ihg.symbols import registry


def setup_symbols():
    registry.ensure_pair("t11")
    registry.ensure_pair("t21")
    registry.ensure_real("s")
    registry.ensure_char("E1")


def C(name):
    return Coefficient.symbol(name)


ONE = Coefficient.one


class TestGaussianRational:
    def test_arith(self):
        a = GaussianRational(Fraction(1, 2), Fraction(3))
        b = GaussianRational(Fraction(2), Fraction(-1, 3))
        assert a + b == GaussianRational(Fraction(5, 2), Fraction(8, 3))
        assert a * b == GaussianRational(Fraction(2), Fraction(35, 6))
        assert (a / b) * b == a
        assert a - a == GaussianRational()

    def test_conjugate_is_involution(self):
        a = GaussianRational(Fraction(2, 7), Fraction(-5, 3))
        assert a.conjugate().conjugate() == a
        assert (a * a.conjugate()).im == 0

    def test_division_by_zero(self):
        with pytest.raises(DivisionByZero):
            GaussianRational.of(1) / GaussianRational()

    def test_render_parses_shape(self):
        assert GaussianRational(Fraction(1, 2)).render() == "1/2"
        assert GaussianRational(Fraction(0), Fraction(1)).render() == "i"
        assert GaussianRational(Fraction(1), Fraction(-1)).render() == "(1 - i)"


class TestQuadraticSurd:
    def test_root_of_paper_quartic_factor(self):
        # T^2 - 4T + 1 vanishes at 2 +- sqrt(3)
        for sgn in (1, -1):
            r = QuadraticSurd(GaussianRational.of(2), GaussianRational.of(sgn), 3)
            assert (r * r - 4 * r + 1).is_zero()

    def test_field_ops(self):
        x = QuadraticSurd(GaussianRational.of(Fraction(1, 2)), GaussianRational.of(3), 3)
        y = QuadraticSurd(GaussianRational.of(-2), GaussianRational.of(Fraction(1, 5)), 3)
        assert (x / y) * y == x
        assert x * y == y * x
        assert (x + y) - y == x

    def test_sign(self):
        mk = lambda a, b: QuadraticSurd(GaussianRational.of(a), GaussianRational.of(b), 3)
        assert mk(2, -1).sign() == 1  # 2 - sqrt3 > 0
        assert mk(1, -1).sign() == -1  # 1 - sqrt3 < 0
        assert mk(-3, 2).sign() == 1  # 2 sqrt3 > 3
        assert mk(0, 0).sign() == 0

    def test_mixed_radicals_rejected(self):
        x = QuadraticSurd(GaussianRational.of(1), GaussianRational.of(1), 3)
        y = QuadraticSurd(GaussianRational.of(1), GaussianRational.of(1), 5)
        with pytest.raises(MixedRadicals):
            x + y


class TestCoefficientField:
    def test_rational_constants(self):
        half = Coefficient.from_scalar(Fraction(1, 2))
        assert half + half == ONE()
        assert Coefficient.i() * Coefficient.i() == Coefficient.from_scalar(-1)

    def test_exact_division_cancellation(self):
        setup_symbols()
        t, tc = C("t11"), C("t11_c")
        f = ONE() - t * tc
        g = (f * f * (t + 1)) / f
        assert g == f * (t + 1)
        assert (g / (t + 1)) == f

    def test_zero_test_is_numerator_only(self):
        setup_symbols()
        t, tc = C("t11"), C("t11_c")
        expr = (t * tc - t * tc) / (ONE() - t * tc)
        assert expr.is_zero()

    def test_equality_cross_multiplied(self):
        setup_symbols()
        t, tc = C("t11"), C("t11_c")
        a = t / (ONE() - t * tc)
        b = (t * (ONE() + t)) / ((ONE() - t * tc) * (ONE() + t))
        assert a == b
        assert not (a == b + ONE())

    def test_division_by_zero(self):
        with pytest.raises(DivisionByZero):
            ONE() / Coefficient.zero()

    def test_char_inverse(self):
        setup_symbols()
        E = C("E1")
        assert E * E.conjugate() == ONE()
        assert (E ** 2) * (E.conjugate() ** 2) == ONE()
        assert E.conjugate() == ONE() / E

    def test_conjugation_involution_and_morphism(self):
        setup_symbols()
        t, u, E = C("t11"), C("t21"), C("E1")
        m = (t + Coefficient.i() * E ** 2) / (ONE() - t * t.conjugate() + E * u)
        assert m.conjugate().conjugate() == m
        n = u / (ONE() + E)
        assert (m * n).conjugate() == m.conjugate() * n.conjugate()
        assert (m + n).conjugate() == m.conjugate() + n.conjugate()

    def test_real_symbol_self_conjugate(self):
        setup_symbols()
        s = C("s")
        assert s.conjugate() == s

    def test_solv_determinant_factors_when_offdiagonal_vanishes(self):
        # 1 - |a|^2 - |b|^2 + |ab|^2 = (1 - |a|^2)(1 - |b|^2)
        registry.ensure_pair("a")
        registry.ensure_pair("b")
        a, b = C("a"), C("b")
        f = ONE() - a * a.conjugate() - b * b.conjugate() \
            + (a * b) * (a * b).conjugate()
        assert f == (ONE() - a * a.conjugate()) * (ONE() - b * b.conjugate())


class TestDerivatives:
    def test_quotient_rule(self):
        setup_symbols()
        t, tc = C("t11"), C("t11_c")
        T1 = ONE() / (ONE() - t * tc)
        assert T1.diff("t11") == tc * T1 * T1
        assert T1.diff("t11_c") == t * T1 * T1
        assert T1.diff("t21").is_zero()

    def test_leibniz(self):
        setup_symbols()
        t, u = C("t11"), C("t21")
        f = t ** 2 / (ONE() + u)
        g = (u + t) / (ONE() - t)
        lhs = (f * g).diff("t11")
        rhs = f.diff("t11") * g + f * g.diff("t11")
        assert lhs == rhs

    def test_euler_derivative(self):
        setup_symbols()
        E = C("E1")
        f = E ** 3 + 2 * E + ONE()
        assert f.euler("E1") == 3 * E ** 3 + 2 * E
        # through conjugates: euler(conj E) = -conj E
        assert E.conjugate().euler("E1") == -E.conjugate()

    def test_curve_derivative_at_zero(self):
        # d/dt [ t*u*a10 / (a5 - t*u*a2) ] at t = 0 equals u*a10/a5
        registry.ensure_real("t")
        for n in ("u", "a2", "a5", "a10"):
            registry.ensure_pair(n)
        t, u, a2, a5, a10 = (C(n) for n in ("t", "u", "a2", "a5", "a10"))
        f = (t * u * a10) / (a5 - t * u * a2)
        df = f.diff("t").substitute({"t": 0})
        assert df == (u * a10) / a5


class TestSubstitution:
    def test_auto_conjugate_binding(self):
        setup_symbols()
        t, tc = C("t11"), C("t11_c")
        T1 = ONE() / (ONE() - t * tc)
        v = GaussianRational(Fraction(1, 2), Fraction(1, 3))
        got = T1.substitute({"t11": v}).scalar()
        assert got == GaussianRational(Fraction(36, 23))

    def test_explicit_conjugate_wins(self):
        setup_symbols()
        t, tc = C("t11"), C("t11_c")
        got = (t * tc).substitute({"t11": 2, "t11_c": 3}).scalar()
        assert got == GaussianRational(Fraction(6))

    def test_partial_substitution_returns_field_element(self):
        setup_symbols()
        t, u = C("t11"), C("t21")
        f = (t + u) / (ONE() - t * t.conjugate())
        g = f.substitute({"t11": GaussianRational(Fraction(1, 2))})
        assert g == (Coefficient.from_scalar(Fraction(1, 2)) + u) \
            / Coefficient.from_scalar(Fraction(3, 4))

    def test_denominator_vanishes(self):
        setup_symbols()
        t = C("t11")
        T1 = ONE() / (ONE() - t * t.conjugate())
        with pytest.raises(DenominatorVanishes):
            T1.substitute({"t11": 1})

    def test_real_symbol_rejects_complex_value(self):
        setup_symbols()
        s = C("s")
        with pytest.raises(ValueError):
            s.substitute({"s": GaussianRational.i()})

    def test_substitute_composition(self):
        setup_symbols()
        t, u = C("t11"), C("t21")
        f = (t ** 2 + u) / (ONE() + t * u)
        a = GaussianRational(Fraction(1, 3), Fraction(1, 7))
        b = GaussianRational(Fraction(-2, 5))
        both = f.substitute({"t11": a, "t21": b})
        seq = f.substitute({"t11": a}).substitute({"t21": b})
        assert both == seq

    def test_surd_substitution_full_evaluation(self):
        registry.ensure_real("T")
        T = C("T")
        P = (T + 1) ** 2 * (T ** 2 - 4 * T + 1)
        r = QuadraticSurd(GaussianRational.of(2), GaussianRational.of(-1), 3)
        assert P.substitute({"T": r}).is_zero()
        with pytest.raises(ValueError):
            registry.ensure_real("S")
            (T + C("S")).substitute({"T": r})

    def test_char_binding_zero_rejected(self):
        setup_symbols()
        E = C("E1")
        with pytest.raises(DenominatorVanishes):
            (E + ONE()).substitute({"E1": 0})


class TestSectors:
    def test_char_decompose(self):
        setup_symbols()
        t, E = C("t11"), C("E1")
        m = t * E ** 2 + t.conjugate() * E.conjugate() + ONE()
        dec = m.char_decompose()
        assert dec[(2,)] == t
        assert dec[(-1,)] == t.conjugate()
        assert dec[(0,)] == ONE()
        recomposed = sum(
            (v * E ** k[0] for k, v in dec.items()), Coefficient.zero()
        )
        assert recomposed == m

    def test_char_free(self):
        setup_symbols()
        t, E = C("t11"), C("E1")
        assert (t / (ONE() - t * t.conjugate())).char_free()
        assert not (t * E).char_free()


# -- randomized algebraic laws ------------------------------------------------

gaussians = st.builds(
    GaussianRational,
    st.fractions(min_value=-3, max_value=3, max_denominator=6),
    st.fractions(min_value=-3, max_value=3, max_denominator=6),
)


def small_elements():
    setup_symbols()
    t, u, E = C("t11"), C("t21"), C("E1")
    atoms = [
        ONE(),
        t,
        u,
        E,
        t.conjugate(),
        E.conjugate(),
        Coefficient.i(),
        ONE() - t * t.conjugate(),
    ]
    return atoms


@st.composite
def coefficients(draw, max_ops=3):
    atoms = small_elements()
    expr = draw(st.sampled_from(atoms))
    for _ in range(draw(st.integers(0, max_ops))):
        op = draw(st.sampled_from(["+", "-", "*"]))
        rhs = draw(st.sampled_from(atoms))
        expr = {"+": expr.__add__, "-": expr.__sub__, "*": expr.__mul__}[op](rhs)
    if draw(st.booleans()):
        denom = draw(st.sampled_from(atoms[1:]))
        if not denom.is_zero():
            expr = expr / denom
    return expr


@settings(max_examples=60, deadline=None)
@given(coefficients(), coefficients(), coefficients())
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)


@settings(max_examples=60, deadline=None)
@given(coefficients(), coefficients())
def test_conjugation_is_ring_morphism(a, b):
    assert (a + b).conjugate() == a.conjugate() + b.conjugate()
    assert (a * b).conjugate() == a.conjugate() * b.conjugate()
    assert a.conjugate().conjugate() == a


@settings(max_examples=40, deadline=None)
@given(coefficients(), gaussians, gaussians)
def test_substitution_is_homomorphism(a, v, w):
    bindings = {"t11": v, "t21": w, "E1": GaussianRational.of(2)}
    try:
        lhs = (a * a).substitute(bindings)
        rhs = a.substitute(bindings) * a.substitute(bindings)
    except DenominatorVanishes:
        return
    assert lhs == rhs


@settings(max_examples=40, deadline=None)
@given(coefficients(), coefficients())
def test_derivative_leibniz_random(a, b):
    lhs = (a * b).diff("t11")
    rhs = a.diff("t11") * b + a * b.diff("t11")
    assert lhs == rhs


@settings(max_examples=40, deadline=None)
@given(coefficients())
def test_conjugate_commutes_with_numeric(a):
    # characters must sit on the unit circle for conj(E) = 1/E to hold
    pt = {
        "t11": 0.21 + 0.13j, "t11_c": 0.21 - 0.13j,
        "t21": -0.4 + 0.05j, "t21_c": -0.4 - 0.05j,
        "s": 0.7, "E1": 0.6 + 0.8j,
    }
    try:
        x = a.numeric(pt)
    except ZeroDivisionError:
        return
    y = a.conjugate().numeric(pt)
    assert abs(x.conjugate() - y) < 1e-9
