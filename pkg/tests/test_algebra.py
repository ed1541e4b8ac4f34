from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from phi4mi.algebra import (
    Endo, Series, derivation_apply, derivation_endo, embed_counterterm,
    endo_apply, endo_compose, multiplicativity_check, series_multiply,
)
from phi4mi.grading import (
    ModelParams, MultiIndex, delta_n, enumerate_populated, kdelta3, precedence,
)

P = ModelParams(d=1, s=Fraction(-3, 4))
CUT = Fraction(12)
D0 = delta_n((0, 0))
E1 = delta_n((0, 1))
D3 = kdelta3(1)


def mono(beta, c=1):
    return Series.monomial(beta, P, CUT, c)


# --------------------------------------------------------------- series ops
def test_monomial_product():
    z3z0 = mono(D3) * mono(D0)
    assert z3z0.coeffs == {D3 + D0: 1}


def test_unit_law():
    a = Series({D3: Fraction(2), D0: Fraction(-1, 3)}, P, CUT)
    one = Series.unit(P, CUT)
    assert (one * a).coeffs == a.coeffs
    assert (a * one).coeffs == a.coeffs


def test_binomial_square():
    a = mono(D0) + mono(D3)
    sq = a * a
    assert sq.coeffs == {D0 + D0: 1, D0 + D3: 2, D3 + D3: 1}


def test_truncation_drops_high_indices():
    # |2 delta_3|_< = 4 + 5a + 5*D/2... large; pick cutoff below it
    small = Series({kdelta3(2): 1}, P, Fraction(5))
    assert not small.coeffs
    prod = Series.monomial(D3, P, Fraction(6)) * Series.monomial(D3, P, Fraction(6))
    assert prod.coeffs == {}


st_series = st.builds(
    lambda d: Series({b: Fraction(c) for b, c in d.items()}, P, CUT),
    st.dictionaries(
        st.builds(MultiIndex, st.integers(0, 1),
                  st.dictionaries(st.sampled_from([(0, 0), (0, 1), (1, 0)]),
                                  st.integers(1, 2), max_size=2)),
        st.integers(-4, 4), max_size=4))


@settings(max_examples=60)
@given(st_series, st_series)
def test_multiply_commutative(a, b):
    assert (a * b).coeffs == (b * a).coeffs


@settings(max_examples=20, deadline=None)
@given(st_series, st_series, st_series)
def test_multiply_associative_and_distributive(a, b, c):
    assert ((a * b) * c).coeffs == (a * (b * c)).coeffs
    assert ((a + b) * c).coeffs == (a * c + b * c).coeffs


# ------------------------------------------------------------- counterterm
def test_embed_counterterm():
    s = embed_counterterm({1: -3.2}, P, CUT)
    assert s.coeffs == {D3: -3.2}
    assert embed_counterterm({}, P, CUT).coeffs == {}
    s2 = embed_counterterm({1: 2.0, 2: 7.0}, P, Fraction(100))
    assert set(s2.coeffs) == {D3, kdelta3(2)}
    with pytest.raises(ValueError):
        embed_counterterm({0: 1.0}, P, CUT)


# -------------------------------------------------------------- derivations
def test_derivation_examples():
    z0sq = mono(D0) * mono(D0)
    d = derivation_apply((0, 0), z0sq)
    assert d.coeffs == {D0: 2}
    assert derivation_apply((0, 1), Series.unit(P, CUT)).coeffs == {}
    # d_n z_m = delta_n^m
    assert derivation_apply((0, 1), mono(E1)).coeffs == {MultiIndex(): 1}
    assert derivation_apply((1, 0), mono(E1)).coeffs == {}


@settings(max_examples=40)
@given(st_series, st_series)
def test_derivation_leibniz(a, b):
    n = (0, 0)
    lhs = derivation_apply(n, a * b)
    rhs = derivation_apply(n, a) * b + a * derivation_apply(n, b)
    assert lhs.coeffs == rhs.coeffs


def test_derivation_endo_matches_apply():
    idx = enumerate_populated(CUT, P)
    G = derivation_endo((0, 0), idx)
    a = Series({D0: Fraction(3), D0 + D0: Fraction(5), D3 + D0: Fraction(-2)}, P, CUT)
    assert endo_apply(G, a).coeffs == derivation_apply((0, 0), a).coeffs


# -------------------------------------------------------------------- endos
def test_identity_endo():
    idx = enumerate_populated(CUT, P)
    I = Endo.identity(idx)
    a = Series({D3: Fraction(1), D0: Fraction(2)}, P, CUT)
    assert I.apply(a).coeffs == a.coeffs


def test_single_entry_endo():
    G = Endo({D3 + D0: {D3: Fraction(7)}})
    a = mono(D3)
    assert G.apply(a).coeffs == {D3 + D0: 7}


def test_compose_triangular():
    idx = enumerate_populated(CUT, P)
    # strictly lower-triangular in |.|_< : map beta to the last strictly
    # lower index (precedence values can tie, e.g. at exactly 2)
    order = sorted(idx, key=lambda b: (precedence(b, P), b.length, b.sort_key()))
    G = Endo({b: {g: 1} for b in order
              for g in [max((x for x in order if precedence(x, P) < precedence(b, P)),
                            key=lambda x: precedence(x, P), default=None)]
              if g is not None})
    H = G.compose(G)
    assert any(row for row in H.rows.values())
    for b, row in H.rows.items():
        for g in row:
            assert precedence(g, P) < precedence(b, P)


def test_neumann_inverse():
    idx = enumerate_populated(CUT, P)
    order = sorted(idx, key=lambda b: (precedence(b, P), b.length, b.sort_key()))
    rows = {b: {b: 1} for b in order}
    for i, b in enumerate(order):
        lower = [x for x in order if precedence(x, P) < precedence(b, P)]
        if lower:
            rows[b][lower[-1]] = Fraction(i, 3)
        if len(lower) > 1:
            rows[b][lower[0]] = Fraction(-2)
    G = Endo(rows)
    Ginv = G.inverse(P)
    assert G.compose(Ginv).max_entry_defect(Endo.identity(order)) == 0
    assert Ginv.compose(G).max_entry_defect(Endo.identity(order)) == 0


def test_inverse_requires_unit_diagonal():
    with pytest.raises(ValueError):
        Endo({D0: {D0: 2}}).inverse(P)


# --------------------------------------------------- multiplicativity check
def test_multiplicativity_of_identity_and_counterexample():
    idx = enumerate_populated(CUT, P)
    I = Endo.identity(idx)
    samples = [(mono(D0, 2.0), mono(D3, 1.5)),
               (mono(D0) + mono(D3), mono(D0, -1.0))]
    assert multiplicativity_check(I, samples, P, CUT) == 0
    # translation action on the polynomial block: z_n -> sum binom(m,n) x^(m-n) z_m
    x1 = 0.3
    G = Endo({MultiIndex(): {MultiIndex(): 1},
              E1: {E1: 1},
              E1 + E1: {E1 + E1: 1},
              D0: {D0: 1, E1: x1},
              D0 + D0: {D0 + D0: 1, D0 + E1: 2 * x1, E1 + E1: x1 ** 2},
              D0 + E1: {D0 + E1: 1, E1 + E1: x1}})
    samples_pp = [(mono(D0), mono(D0)), (mono(D0), mono(E1))]
    assert multiplicativity_check(G, samples_pp, P, CUT) < 1e-15
    bad = Endo({MultiIndex(): {MultiIndex(): 1},
                D0: {D0: 1, E1: x1},
                E1: {E1: 1},
                D0 + D0: {D0 + D0: 1},  # missing cross terms
                D0 + E1: {D0 + E1: 1, E1 + E1: x1},
                E1 + E1: {E1 + E1: 1}})
    assert multiplicativity_check(bad, samples_pp, P, CUT) > 0.1


def test_json_dump_sorted():
    s = Series({D3 + D0: 2.0, D0: 1.0}, P, CUT)
    j = s.to_jsonable()
    assert list(j) == sorted(j, key=lambda t: MultiIndex.parse(t).sort_key())
    G = Endo({D0: {D0: 1.0}})
    assert G.to_jsonable() == {"0|(0,0):1": {"0|(0,0):1": 1.0}}
