import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from splinepde.types import DerivativeEstimates, Field, Grid1D, TermLabel, enumerate_terms


def brute_force_terms(p_max, q_max):
    """Every admissible label, generated without the canonical ordering logic."""
    out = {()}
    for k in range(q_max + 1):
        for i in range(1, p_max + 1):
            out.add(((k, i),))
    for k, l in itertools.product(range(q_max + 1), repeat=2):
        if k >= l:
            continue
        for i, j in itertools.product(range(1, p_max + 1), repeat=2):
            if i + j <= p_max:
                out.add(((k, i), (l, j)))
    return out


def test_grid_uniform_knots():
    g = Grid1D.uniform(100, 100)
    assert g.shape == (100, 100)
    assert g.x[0] == pytest.approx(0.01) and g.x[-1] == pytest.approx(1.0)
    assert g.t[0] == pytest.approx(0.001) and g.t[-1] == pytest.approx(0.1)


@pytest.mark.parametrize("x", [
    [0, 1, 2],                      # too few
    [0, 1, 1, 2],                   # repeated
    [0, 2, 1, 3],                   # not increasing
    [0, 1, np.nan, 3],              # non-finite
    [0, 1e-14, 1, 2],               # near duplicate
])
def test_grid_rejects_bad_knots(x):
    with pytest.raises(ValueError):
        Grid1D(x, [0, 1, 2, 3])


def test_grid_equality_and_immutability():
    a = Grid1D.uniform(5, 6)
    b = Grid1D.uniform(5, 6)
    assert a == b and hash(a) == hash(b)
    with pytest.raises(ValueError):
        a.x[0] = 3.0


def test_field_validation_names_index():
    g = Grid1D.uniform(4, 5)
    v = np.zeros((4, 5))
    v[2, 3] = np.inf
    with pytest.raises(ValueError, match=r"i=2, n=3"):
        Field(g, v)
    with pytest.raises(ValueError):
        Field(g, np.zeros((5, 4)))


def test_derivative_estimates_shape_check():
    g = Grid1D.uniform(4, 5)
    z = np.zeros((4, 5))
    est = DerivativeEstimates(g, z, z, z, z)
    assert est.derivative(2) is est.uxx_hat
    with pytest.raises(ValueError):
        est.derivative(3)
    with pytest.raises(ValueError):
        DerivativeEstimates(g, z, z, np.zeros((5, 4)), z)


def test_enumerate_p2_q2_listing():
    names = [str(t) for t in enumerate_terms(2, 2)]
    assert names == ["1", "u", "u^2", "u_x", "u_x^2", "u_xx", "u_xx^2",
                     "u*u_x", "u*u_xx", "u_x*u_xx"]


def test_enumerate_p1_q2():
    assert [str(t) for t in enumerate_terms(1, 2)] == ["1", "u", "u_x", "u_xx"]


def test_enumerate_p2_q1():
    assert [str(t) for t in enumerate_terms(2, 1)] == ["1", "u", "u^2", "u_x", "u_x^2", "u*u_x"]


def test_enumerate_closed_form_count_at_2_2():
    p, q = 2, 2
    k_formula = 1 + (p + 1) * q + q * (q + 1) // 2 * 1  # (p - 1)! = 1
    assert len(enumerate_terms(p, q)) == k_formula == 10


def test_enumerate_rejects_bad_bounds():
    with pytest.raises(ValueError):
        enumerate_terms(0, 2)
    with pytest.raises(ValueError):
        enumerate_terms(2, -1)


@given(st.integers(1, 5), st.integers(0, 4))
def test_enumerate_matches_brute_force(p_max, q_max):
    terms = enumerate_terms(p_max, q_max)
    facs = [t.factors for t in terms]
    assert len(set(facs)) == len(facs)
    assert set(facs) == brute_force_terms(p_max, q_max)
    assert terms[0].is_intercept
    for t in terms:
        assert t.degree <= p_max and t.max_order <= q_max


@given(st.integers(1, 5), st.integers(0, 4))
def test_enumerate_block_order(p_max, q_max):
    terms = enumerate_terms(p_max, q_max)[1:]
    pure = [t for t in terms if len(t.factors) == 1]
    cross = [t for t in terms if len(t.factors) == 2]
    assert terms == pure + cross
    assert [t.factors[0] for t in pure] == sorted(t.factors[0] for t in pure)
    keys = [(a[0], b[0], a[1], b[1]) for a, b in (t.factors for t in cross)]
    assert keys == sorted(keys)


@given(st.integers(1, 5), st.integers(0, 4))
def test_label_string_round_trip(p_max, q_max):
    for t in enumerate_terms(p_max, q_max):
        assert TermLabel.parse(str(t)) == t


def test_label_validation():
    with pytest.raises(ValueError):
        TermLabel(((1, 1), (0, 1)))
    with pytest.raises(ValueError):
        TermLabel(((0, 0),))
    with pytest.raises(ValueError):
        TermLabel(((0, 1), (1, 1), (2, 1)))
    with pytest.raises(ValueError):
        TermLabel.parse("v_x")


def test_label_evaluate():
    u, ux, uxx = np.array([2.0]), np.array([3.0]), np.array([5.0])
    assert TermLabel.parse("u*u_x").evaluate([u, ux, uxx])[0] == 6.0
    assert TermLabel.parse("u_xx^2").evaluate([u, ux, uxx])[0] == 25.0
    assert TermLabel.parse("1").evaluate([u, ux, uxx])[0] == 1.0
