from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from spinscape import elliptic as ell
from spinscape import oracle
from spinscape import rmatrix as rm
from spinscape.elliptic import LatticeParams as L
from spinscape.rmatrix import RMatrixParams
from spinscape.spin import PERM, pauli, rotation_u, sigma_sq

LAT = L(4, 1.0)
P = RMatrixParams(LAT, 0.3)
I4 = np.eye(4)


def norm(m):
    return float(np.linalg.norm(m))


def fd4(f, u, h=1e-3):
    """Fourth-order central difference."""
    return (-f(u + 2 * h) + 8 * f(u + h) - 8 * f(u - h) + f(u - 2 * h)) / (12 * h)


def richardson(f, u, h=1e-2):
    return (16 * fd4(f, u, h / 2) - fd4(f, u, h)) / 15


# --- eight-vertex weights


def test_g_weights_match_product_oracle():
    # independent quotient theta(u + v) theta(eta) / (theta(v) theta(u + eta)) from the product formula
    u, eta = 0.5, 0.3
    th = lambda x: complex(oracle.theta_mp(x, LAT))
    omegas = (0, LAT.n_sites, LAT.n_sites - LAT.omega, -LAT.omega)
    for alpha, g in enumerate(rm.g_weights(u, P)):
        v = (eta + omegas[alpha]) / 2
        ref = th(u + v) * th(eta) / (th(v) * th(u + eta))
        if alpha in (1, 2):
            ref *= math.exp(-LAT.kappa * u)
        assert abs(g - ref) < 1e-12 * max(1, abs(ref))


def test_g_weights_undeformed_limit():
    g = rm.g_weights(0.5, RMatrixParams(LAT, 1e-6))
    assert np.allclose(g, [2, 0, 0, 0], atol=1e-5)


def test_vertex_weights_reproduce_entries():
    a, b, c, d = rm.vertex_weights(0.7, P)
    r = rm.r8v(0.7, P)
    assert r[0, 0] == pytest.approx(a) and r[3, 3] == pytest.approx(a)
    assert r[1, 1] == pytest.approx(b) and r[2, 2] == pytest.approx(b)
    assert r[1, 2] == pytest.approx(c) and r[2, 1] == pytest.approx(c)
    assert r[0, 3] == pytest.approx(d) and r[3, 0] == pytest.approx(d)


def test_r8v_is_pauli_sum():
    g = rm.g_weights(0.4, P)
    ref = sum(g[k] * sigma_sq(k) for k in range(4)) / 2
    assert norm(rm.r8v(0.4, P) - ref) < 1e-14


def test_r8v_initial_condition():
    assert norm(rm.r8v_braid(0, P) - I4) < 1e-13


def test_r8v_unitarity_example():
    assert rm.check_unitarity(lambda u: rm.r8v_braid(u, P), 0.4) < 1e-12


def test_r8v_sans_serif_relation():
    assert rm.relation_s(0.4, P) < 1e-11


def test_r8v_sans_serif_relation_explicit():
    uu = np.kron(rotation_u(), rotation_u())
    rhs = cmath.exp(LAT.kappa * 0.3 * 0.4 / 4) * np.linalg.inv(uu) @ rm.r8v(0.4, P) @ uu
    assert norm(rm.r8v_s(0.4, P) - rhs) < 1e-11


@pytest.mark.parametrize("u", [0.5, 1.3, 0.4 + 0.3j])
def test_r8v_derivative_matches_finite_differences(u):
    ref = fd4(lambda x: rm.r8v_braid(x, P), u)
    assert np.max(np.abs(rm.r8v_braid_derivative(u, P) - ref)) < 1e-8


def test_r8v_derivative_richardson():
    ref = richardson(lambda x: rm.r8v_braid(x, P), 0.9)
    assert np.max(np.abs(rm.r8v_braid_derivative(0.9, P) - ref)) < 1e-8


def test_r8v_sans_serif_derivative():
    ref = fd4(lambda x: rm.r8v_s_braid(x, P), 0.6)
    assert np.max(np.abs(rm.r8v_s_braid_derivative(0.6, P) - ref)) < 1e-8


def test_r8v_derivative_vanishes_with_eta():
    small = norm(rm.r8v_braid_derivative(0.5, RMatrixParams(LAT, 1e-6)))
    smaller = norm(rm.r8v_braid_derivative(0.5, RMatrixParams(LAT, 1e-7)))
    assert small < 1e-4
    assert small / smaller == pytest.approx(10, rel=1e-3)


def test_ybe_example():
    assert rm.check_ybe(lambda u: rm.r8v_braid(u, P), 0.3, 0.5) < 1e-10


def test_ybe_trivial_at_zero():
    assert rm.check_ybe(lambda u: rm.r8v_braid(u, P), 0, 0) < 1e-14


# --- degenerations


def test_six_vertex_initial_condition():
    b, c = rm.six_vertex_weights(0, 0.2, 4)
    assert b == 0 and c == pytest.approx(1)
    assert norm(rm.r6v_braid(0, 0.2, 4) - I4) < 1e-15


def test_six_vertex_pole_guard():
    with pytest.raises(ell.PoleProximityError):
        rm.six_vertex_weights(-0.8, 0.2, 4)


def test_tri8v_is_rotated_six_vertex():
    uu = np.kron(rotation_u(), rotation_u())
    ref = uu @ rm.r6v_principal(0.7, 0.2, 4) @ np.linalg.inv(uu)
    assert norm(rm.r_tri8v(0.7, 0.2, 4) - ref) < 1e-14


def test_trig_limit_is_linear_in_kappa():
    # the distance to the rotated trigonometric R-matrix shrinks like kappa, not like the nome
    errs = []
    for kappa in (0.4, 0.2, 0.1, 0.05):
        p = RMatrixParams(L(4, kappa), 4 * 0.2)
        errs.append(norm(rm.r8v_braid(0.7, p) - rm.r_tri8v_braid(0.7, 0.2, 4)))
    assert all(b < a for a, b in zip(errs, errs[1:]))
    for a, b in zip(errs, errs[1:]):
        assert a / b == pytest.approx(2, rel=0.05)
    assert errs[-1] / 0.05 == pytest.approx(0.26, rel=0.05)


def test_hyp_initial_condition_and_unitarity():
    assert norm(rm.r_hyp_braid(0, 0.3, 1.0) - I4) < 1e-15
    assert rm.check_unitarity(lambda u: rm.r_hyp_braid(u, 0.3, 1.0), 0.8) < 1e-14


def test_braid_p_zero_is_permutation():
    assert norm(rm.braid_p(0) - PERM) < 1e-15


@given(st.floats(-1, 1))
def test_braid_p_square(gp):
    ph = cmath.exp(2j * math.pi * gp)
    assert norm(rm.braid_p(gp) @ rm.braid_p(gp) - np.diag([1, ph, ph, 1])) < 1e-14


@pytest.mark.parametrize("u", [1, 2])
def test_short_range_limit_rate(u):
    # the approach to the phased permutation is e^{-kappa |u|}, slower than the nome e^{-N kappa}
    ratios = []
    for kappa in (6, 8, 10, 12):
        lat = L(4, kappa)
        p = RMatrixParams(lat, lat.omega * 0.2)
        d = norm(rm.r8v_braid(u, p) - rm.braid_p(-0.2))
        ratios.append(d / math.exp(-kappa * u))
    assert max(ratios) / min(ratios) < 1.01


def test_short_range_limit_example():
    lat = L(4, 12.0)
    p = RMatrixParams(lat, lat.omega * 0.2)
    assert norm(rm.r8v_braid(1, p) - rm.braid_p(-0.2)) < 1e-4


def test_short_range_limit_sign():
    lat = L(4, 12.0)
    p = RMatrixParams(lat, lat.omega * 0.2)
    assert norm(rm.r8v_braid(-1, p) - rm.braid_p(0.2)) < 1e-4


# --- dynamical


def test_dynamical_initial_condition():
    assert norm(rm.r_dynamical(0, 1.7, P) - I4) < 1e-14


def test_dynamical_weight_preserving():
    r = rm.r_dynamical(0.6, 1.7, P)
    mask = np.ones((4, 4), bool)
    mask[1:3, 1:3] = False
    mask[0, 0] = mask[3, 3] = False
    assert np.all(r[mask] == 0)
    assert r[0, 0] == 1 and r[3, 3] == 1


def test_dynamical_unitarity():
    assert rm.check_unitarity(lambda u: rm.r_dynamical(u, 1.7, P), 0.4) < 1e-12


def test_dynamical_derivative():
    ref = fd4(lambda x: rm.r_dynamical(x, 1.7, P), 0.6)
    assert np.max(np.abs(rm.r_dynamical_derivative(0.6, 1.7, P) - ref)) < 1e-8


def test_dynamical_pole_guard():
    with pytest.raises(ell.PoleProximityError):
        rm.r_dynamical(0.5, 0.0, P)


def test_dybe_example():
    assert rm.check_dybe(lambda u, a: rm.r_dynamical(u, a, P), 0.3, 0.5, 1.7) < 1e-10


def test_dybe_sans_serif():
    assert rm.check_dybe(lambda u, a: rm.r_dynamical_s(u, a, P), 0.3, 0.5, 1.7) < 1e-10


def test_dybe_detects_missing_dynamics():
    # freezing the dynamical parameter breaks the relation
    frozen = lambda u, a: rm.r_dynamical(u, 1.7, P)
    assert rm.check_dybe(frozen, 0.3, 0.5, 1.7) > 1e-3


def test_temperley_lieb_relation():
    for gamma in (0.1, 0.2, 0.37):
        e = rm.e_tl(gamma)
        assert norm(e @ e - 2 * math.cos(math.pi * gamma) * e) < 1e-14


@given(st.floats(0.01, 0.99))
def test_hecke_relation(gamma):
    t = rm.hecke_t(gamma)
    q = cmath.exp(1j * math.pi * gamma)
    assert norm((t - q * I4) @ (t + I4 / q)) < 1e-13


def test_e_nn_entries():
    a, gp = 1.7, 0.2
    s = lambda x: math.sin(math.pi * gp * x)
    e = rm.e_nn(a, gp)
    ref = np.zeros((4, 4))
    ref[1, 1], ref[1, 2] = s(a - 1) / s(a), -s(a + 1) / s(a)
    ref[2, 1], ref[2, 2] = -s(a - 1) / s(a), s(a + 1) / s(a)
    assert norm(e - ref) < 1e-15


def test_e_nn_is_temperley_lieb():
    e = rm.e_nn(1.7, 0.2)
    assert norm(e @ e - 2 * math.cos(0.2 * math.pi) * e) < 1e-13


def test_e_dynamical_definition():
    u, a = 0.6, 1.7
    lhs = rm.r_dynamical(-u, a, P) @ rm.r_dynamical_derivative(u, a, P)
    pot = ell.theta(0.3, LAT) * ell.potential_qino(u, 0.3, LAT)
    assert norm(rm.e_dynamical(u, a, P) * pot - lhs) < 1e-13


def test_e_dynamical_undeformed_limit_has_inverse_a_floor():
    # at eta -> 0 the distance to 1 - P decays like 2 / |a|, not exponentially in Im a
    p = RMatrixParams(LAT, 1e-4)
    d = [norm(rm.e_dynamical(0.6, a, p) - (I4 - PERM)) for a in (-10j, -50j, -200j)]
    assert d[0] / d[1] == pytest.approx(5, rel=0.02)
    assert d[1] / d[2] == pytest.approx(4, rel=0.02)
    assert d[1] == pytest.approx(2 / 50, rel=0.01)


def test_a6v_unitarity():
    assert rm.check_unitarity(lambda u: rm.r_a6v(u, 0.2, 4), 0.7) < 1e-13


# --- face-vertex intertwiner


def _phi_oracle(u, v, a, p):
    """Entries psi_i(u + s_k eta a) psi_j(v + s_l eta (a - s_k)) with s = +1, -1."""
    s = (1, -1)
    out = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for m in range(2):
                    x = rm.psi_b(i + 1, u + s[k] * p.eta * a, p.lattice)
                    y = rm.psi_b(j + 1, v + s[m] * p.eta * (a - s[k]), p.lattice)
                    out[2 * i + j, 2 * k + m] = x * y
    return out


def test_fv_phi_per_sector_assembly():
    ref = _phi_oracle(0.5, 0.2, 1.7, P)
    assert norm(rm.fv_phi(0.5, 0.2, 1.7, P) - ref) < 1e-13 * norm(ref)


def test_psi_matrix_generic_invertible():
    assert abs(np.linalg.det(rm.psi_matrix(0.5, 1.7, P))) > 1e-3


def test_psi_b_index():
    with pytest.raises(ValueError):
        rm.psi_b(3, 0.1, LAT)


def test_fv_identity_example():
    assert rm.check_fv(0.5, 0.2, 1.7, P) < 1e-10


@given(
    st.floats(-1.5, 1.5),
    st.floats(-1.5, 1.5),
    st.floats(0.3, 2.5),
)
def test_fv_identity_property(u, v, a):
    # integer a makes Psi(v, a - 1) or Psi(v, a + 1) degenerate
    assume(abs(a - round(a)) > 0.05)
    assume(abs(u - v) > 0.05 and abs(u - v + 0.3) > 0.05)
    assert rm.check_fv(u, v, a, P) < 1e-10


def test_fv_phi_derivative():
    ref = fd4(lambda x: rm.fv_phi(x, 0.2, 1.7, P), 0.5)
    assert np.max(np.abs(rm.fv_phi_derivative_u(0.5, 0.2, 1.7, P) - ref)) < 1e-8


# --- random-draw properties


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-0.4, 0.4))
def test_ybe_property(u, v, y):
    assume(min(abs(u + 0.3), abs(v + 0.3), abs(u + v + 0.3)) > 0.05)
    f = lambda x: rm.r8v_braid(x, P)
    assert rm.check_ybe(f, u + 1j * y, v) < 1e-10


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_six_vertex_ybe_property(u, v):
    f = lambda x: rm.r6v_braid(x, 0.2, 4)
    for x in (u, v, u + v):
        assume(abs(math.sin(math.pi * x / 4 + 0.2 * math.pi)) > 0.05)
    assert rm.check_ybe(f, u, v) < 1e-10


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.3, 2.5))
def test_dybe_property(u, v, a):
    assume(abs(a - round(a)) > 0.05)
    for x in (u, v, u + v):
        assume(abs(x + 0.3) > 0.05)
    f = lambda x, b: rm.r_dynamical(x, b, P)
    assert rm.check_dybe(f, u, v, a) < 1e-10


@given(st.floats(-2, 2))
def test_unitarity_property(u):
    assume(abs(abs(u) - 0.3) > 0.05)
    # the trigonometric form has poles at u = +-N gamma = +-0.8
    assume(abs(abs(u) - 0.8) > 0.05)
    for f in (lambda x: rm.r8v_braid(x, P), lambda x: rm.r8v_s_braid(x, P), lambda x: rm.r_tri8v_braid(x, 0.2, 4)):
        assert rm.check_unitarity(f, u) < 1e-10


def test_tri8v_pole_raises():
    with pytest.raises(ell.PoleProximityError):
        rm.r_tri8v_braid(-0.8, 0.2, 4)


def test_pauli_pair_basis():
    # sanity of the basis ordering uu, ud, du, dd used by every R-matrix
    zz = np.kron(pauli("z"), pauli("z"))
    assert np.allclose(np.diag(zz), [1, -1, -1, 1])
