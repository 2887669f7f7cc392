from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinscape import chains as ch
from spinscape import elliptic as ell
from spinscape import series as se
from spinscape import spin
from spinscape.chains import ChainSpec
from spinscape.elliptic import LatticeParams as L


def norm(m):
    return float(np.linalg.norm(np.asarray(m)))


# --- interactions


def test_i1_is_heisenberg_with_constant():
    n = 4
    xxx = sum(
        spin.embed_product({i: spin.pauli(a), i % n + 1: spin.pauli(a)}, n) for i in range(1, n + 1) for a in "xyz"
    )
    # I(1) = sum_i (1 - P_{i,i+1}) = -1/2 sum sigma . sigma + N/2
    assert norm(se.interaction_i(1, n).matrix - (-xxx / 2 + n / 2 * np.eye(16))) < 1e-14


def test_i1_is_one_minus_p():
    n = 4
    ref = sum(np.eye(16) - spin.permutation(i, i % n + 1, n) for i in range(1, n + 1))
    assert norm(se.interaction_i(1, n).matrix - ref) < 1e-14


def test_ixx1_is_antiperiodic_xx():
    ixx, _ = se.interaction_combos(1, 4)
    assert norm(ixx.matrix - ch.build_hamiltonian(ChainSpec("XXantiperiodic", n_sites=4)).matrix) < 1e-14


def test_wrap_rule_y_direct_oracle():
    # each extra wrap conjugates the far spin by prod sigma^x, which flips sigma^y
    n = 3
    flip = ch.global_flip(n)
    ref = np.zeros((8, 8), dtype=complex)
    for i in range(1, n + 1):
        raw = i + 4
        wraps = (raw - 1) // n
        j = (raw - 1) % n + 1
        far = spin.embed_one_site(spin.pauli("y"), j, n)
        for _ in range(wraps):
            far = flip @ far @ flip
        ref += spin.embed_one_site(spin.pauli("y"), i, n) @ far
    ref = -ref / 2
    i4 = se.interaction_i_alpha("y", 4, n, "antiperiodic_x").matrix
    i1 = se.interaction_i_alpha("y", 1, n, "antiperiodic_x").matrix
    assert norm(i4 - ref) < 1e-14
    assert norm(i4 + i1) < 1e-14


def test_interactions_vanish_at_multiples_of_n():
    assert norm(se.interaction_i(4, 4).matrix) == 0
    assert all(norm(op.matrix) == 0 for op in se.interaction_combos(8, 4))


def test_interaction_range_validation():
    with pytest.raises(ValueError):
        se.interaction_i(0, 4)
    with pytest.raises(ValueError):
        se.interaction_i_alpha("x", 1, 4, boundary="twisted")


# --- integer layer


def test_ino_order_four():
    assert se.ino_expansion_terms(4)[3].terms == ((4, "I", 1), (2, "I", 2), (1, "I", 4))


def test_sz_order_four():
    assert se.sz_expansion_terms(4)[3].terms == ((4, "Idiag", 1), (2, "Idiag", 2), (1, "Ixx", 4))


def test_sz_order_one():
    assert se.sz_expansion_terms(1)[0].terms == ((1, "Ixx", 1),)


def test_expansion_term_json():
    obj = se.sz_expansion_terms(2)[1].to_json()
    assert json.loads(json.dumps(obj)) == {
        "order": 2,
        "terms": [
            {"coefficient": 2, "interaction": "Idiag", "range": 1},
            {"coefficient": 1, "interaction": "Ixx", "range": 2},
        ],
    }


def test_expansion_order_validation():
    with pytest.raises(ValueError):
        se.ino_expansion_terms(0)
    with pytest.raises(ValueError):
        se.divisors(0)


@given(st.integers(1, 400))
def test_divisor_structure(m):
    ref = [d for d in range(1, m + 1) if m % d == 0]
    assert se.divisors(m) == ref
    ino = se.ino_expansion_terms(m)[-1]
    sz = se.sz_expansion_terms(m)[-1]
    assert sorted((c, r) for c, _, r in ino.terms) == [(d, m // d) for d in ref]
    assert sorted((c, r) for c, _, r in sz.terms) == [(d, m // d) for d in ref]
    for c, kind, r in sz.terms:
        assert c * r == m and c > 0 and r <= m
        assert kind == ("Ixx" if c % 2 else "Idiag")
    assert [r for _, _, r in ino.terms] == sorted(r for _, _, r in ino.terms)


# --- expansions against the exact chains


@pytest.mark.parametrize("chain", ["Ino", "SZprime"])
@pytest.mark.parametrize("n", [4, 6])
@pytest.mark.parametrize("kappa", [2.5, 3.0])
def test_verify_expansion(chain, n, kappa):
    rep = se.verify_expansion(chain, n, kappa, 4)
    assert rep.verdict, (rep.residuals, rep.parameters)


def test_expansion_baseline_is_exact_norm():
    lat = L(4, 3.0)
    r = se.partial_sums("SZprime", 4, 3.0, 1)
    assert r[0] == norm(ch.sz_prime(lat) / (2 * 9.0))


def test_expansion_guards():
    with pytest.raises(ValueError):
        se.verify_expansion("Ino", 4, 1.0, 4)
    with pytest.raises(ValueError):
        se.partial_sums("XYZ", 4, 3.0, 2)


def test_resummation():
    for kappa in (0.5, 1.0, 3.0):
        rep = se.verify_resummation(kappa)
        assert rep.verdict, rep.residuals


def test_resummed_coefficients_values():
    xx, par, ino = se.resummed_coefficients(2, 1.0)
    v = ell.potential_hyp(2, 1.0).real
    assert xx == pytest.approx(v * math.cosh(2.0), rel=1e-12)
    assert par == pytest.approx(v, rel=1e-12)
    assert ino == pytest.approx(v, rel=1e-12)


def test_resummed_operator():
    rep = se.verify_resummed_operator(4, 1.0)
    assert rep.verdict, rep.residuals


# --- wrapping coefficients


def test_c0_is_minus_v():
    lat = L(4, 1.0)
    w = se.wrapping_coefficients(1, lat)
    assert abs(w.closed[0] + ell.potential_v(1, lat)) < 1e-10
    direct = -sum(ell.potential_hyp(1 + 4 * k, 1.0) for k in range(-40, 41))
    assert abs(w.closed[0] - direct) < 1e-10


def test_cy_series_at_kappa_two():
    lat = L(4, 2.0)
    w = se.wrapping_coefficients(1, lat)
    direct = sum((-1) ** k * math.cosh(2.0 * (1 + 4 * k)) * ell.potential_hyp(1 + 4 * k, 2.0) for k in range(-30, 31))
    assert abs(w.closed[2] - direct) < 1e-10
    assert abs(w.series[2] - direct) < 1e-10


@pytest.mark.parametrize("u", [1, 2, 3, 5, -1])
def test_wrapping_routes_agree(u):
    w = se.wrapping_coefficients(u, L(4, 1.0))
    assert w.max_discrepancy() < 1e-10


def test_wrapping_operator_identity():
    lat = L(3, 1.0)
    assert norm(ch.sz_prime(lat) - se.wrapping_operator(lat)) < 1e-10


def test_verify_wrapping():
    rep = se.verify_wrapping(L(4, 1.0))
    assert rep.verdict, rep.residuals


def test_wrapping_truncation_guard():
    with pytest.raises(ValueError):
        se.wrapping_coefficients(1, L(4, 1.0), truncation=5)


def test_wrapping_tail_guard():
    # at small kappa the image sums need far more terms than the minimum
    with pytest.raises(ValueError, match="tail"):
        se.wrapping_coefficients(1, L(4, 0.05), truncation=10)


def test_wrapping_rejects_multiples_of_n():
    with pytest.raises(ValueError):
        se.wrapping_coefficients(4, L(4, 1.0))
