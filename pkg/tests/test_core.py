import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rkcontract.core import (
    NAMED_TABLEAUX,
    build_tableau,
    euler_chain_tableau,
    euler_tableau,
    load_tableau,
    m_matrix,
    mbar_matrix,
    runge_tableau,
    tableau_from_dict,
    two_stage_first_order_tableau,
)
from rkcontract.errors import ConsistencyError, DomainError, ShapeError


def test_rational_strings_are_parsed():
    t = build_tableau([["0", "0"], ["1/3", "0"]], ["1/4", "3/4"])
    assert t.a[1, 0] == pytest.approx(1 / 3, abs=0)
    assert t.b.tolist() == [0.25, 0.75]


def test_inconsistent_weights_rejected():
    with pytest.raises(ConsistencyError):
        build_tableau([[0, 0], [1, 0]], [0.5, 0.6])


@pytest.mark.parametrize(
    "a, b",
    [([[0, 0]], [0.5, 0.5]), ([[0, 0], [1]], [0.5, 0.5]), ([], []), ([[0]], ["x"])],
)
def test_malformed_tableau_rejected(a, b):
    with pytest.raises(ShapeError):
        build_tableau(a, b)


def test_tableau_is_read_only():
    t = euler_tableau()
    with pytest.raises(ValueError):
        t.a[0, 0] = 1.0


def test_json_round_trip(tmp_path):
    t = runge_tableau()
    path = tmp_path / "runge.json"
    path.write_text(t.to_json())
    assert load_tableau(path) == t
    assert tableau_from_dict(json.loads(t.to_json())) == t


def test_builtin_names_load():
    for name in NAMED_TABLEAUX:
        t = load_tableau(name)
        assert t.consistent


def test_explicitness():
    assert runge_tableau().explicit
    assert not NAMED_TABLEAUX["backward-euler"]().explicit


def test_euler_mbar_closed_form():
    # s = 1: mbar = 2h/L - h^2
    M = mbar_matrix(euler_tableau(), 0.5, 2.0).entries
    assert M.shape == (1, 1)
    assert M[0, 0] == pytest.approx(2 * 0.5 / 2.0 - 0.25, abs=1e-15)


def test_runge_m_matrix_entries():
    # b = [0, 1], a21 = 1/2: m11 = 0, m12 = 1/2, m22 = -1
    np.testing.assert_array_equal(m_matrix(runge_tableau()), [[0.0, 0.5], [0.5, -1.0]])


def test_example_three_m_matrix():
    # a21 = 1/2, b = [1/2, 1/2] is an Euler chain, so m = 0 off the diagonal of b b^T
    t = two_stage_first_order_tableau()
    np.testing.assert_allclose(m_matrix(t), [[-0.25, 0.0], [0.0, -0.25]], atol=1e-15)


@pytest.mark.parametrize("h, L", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0)])
def test_mbar_domain(h, L):
    with pytest.raises(DomainError):
        mbar_matrix(euler_tableau(), h, L)


def test_euler_chain_negative_weight():
    with pytest.raises(DomainError):
        euler_chain_tableau([1.5, -0.5])


@settings(max_examples=50, deadline=None)
@given(
    st.integers(min_value=1, max_value=5).flatmap(
        lambda s: st.tuples(
            st.lists(st.floats(-2, 2), min_size=s * s, max_size=s * s),
            st.lists(st.floats(0.01, 1), min_size=s, max_size=s),
        )
    ),
    st.floats(1e-3, 10),
    st.floats(1e-2, 10),
)
def test_mbar_symmetric_and_scaling(data, h, L):
    flat, w = data
    s = len(w)
    b = np.array(w) / np.sum(w)
    b[-1] = 1.0 - b[:-1].sum()
    t = build_tableau(np.array(flat).reshape(s, s).tolist(), b.tolist())
    M = mbar_matrix(t, h, L).entries
    assert np.array_equal(M, M.T)
    # mbar(c h, L / c) = c^2 mbar(h, L)
    c = 2.0
    np.testing.assert_allclose(mbar_matrix(t, c * h, L / c).entries, c * c * M, rtol=1e-12, atol=1e-12)


def test_fraction_inputs():
    t = build_tableau([[0, 0], [Fraction(1, 2), 0]], [Fraction(0), Fraction(1)])
    assert t == runge_tableau()
