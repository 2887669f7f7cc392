from __future__ import annotations

import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from spinscape import elliptic as ell
from spinscape import oracle
from spinscape.elliptic import DeformedPotentialParams as DP
from spinscape.elliptic import LatticeParams as L

LAT = L(4, 1.0)


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b))


lattices = st.builds(L, st.integers(2, 8), st.sampled_from([0.25, 0.5, 1.0, 2.0, 4.0]))


@st.composite
def cell_points(draw, lat_strategy=lattices):
    lat = draw(lat_strategy)
    x = draw(st.floats(-0.5, 0.5)) * lat.n_sites
    y = draw(st.floats(-0.5, 0.5)) * lat.omega.imag
    u = complex(x, y)
    assume(abs(u) > 0.05)
    return lat, u


# --- lattice parameters


def test_lattice_rejects_bad_parameters():
    with pytest.raises(ValueError):
        L(1, 1.0)
    with pytest.raises(ValueError):
        L(4, 0.0)
    with pytest.raises(ValueError):
        L(4, -1.0)


@given(lattices)
def test_nome_logs_multiply_to_pi_squared(lat):
    assert math.log(lat.nome_p) * math.log(lat.nome_ps) == pytest.approx(math.pi**2, rel=1e-14)


def test_half_periods():
    hp = LAT.half_periods
    w = LAT.omega
    assert hp.omega_vec == (0, 4, 4 - w, -w)
    assert hp.omega_vec_s == (0, w, 4 + w, 4)


# --- theta


def test_theta_zero():
    assert ell.theta(0, LAT) == 0
    assert ell.theta_s(0, LAT) == 0


def test_theta_hyperbolic_leading_term():
    assert abs(ell.theta(0.5, LAT) - math.sinh(0.5)) <= 5 * LAT.nome_p**2


def test_theta_s_trigonometric_leading_term():
    assert abs(ell.theta_s(0.5, LAT) - 4 / math.pi * math.sin(math.pi * 0.5 / 4)) <= 5 * LAT.nome_ps**2


@pytest.mark.parametrize("u", [0.5, 0.3 + 0.4j, -1.7 + 0.2j])
@pytest.mark.parametrize("lat", [L(4, 1.0), L(3, 0.25), L(6, 4.0), L(2, 0.7)])
def test_theta_against_product_oracle(lat, u):
    assert rel(ell.theta(u, lat), oracle.theta_mp(u, lat)) < 1e-12


@pytest.mark.parametrize("u", [0.5, 0.3 + 0.4j])
@pytest.mark.parametrize("lat", [L(4, 1.0), L(3, 0.25)])
def test_jet_against_product_oracle(lat, u):
    d = ell.theta_jet(u, lat)
    o = oracle.theta_jet(u, lat)
    for a, b in zip(d, o):
        assert rel(a, b) < 1e-11


def test_oracle_route_switch():
    lat = L(4, 1.0).with_oracle()
    assert rel(ell.potential_v(0.7, lat), ell.potential_v(0.7, L(4, 1.0))) < 1e-12


def test_theta_jacobi_transform_point():
    u = 0.7
    assert rel(ell.theta(u, LAT), math.exp(u * u / 4) * ell.theta_s(u, LAT)) < 1e-12


@given(cell_points())
def test_theta_quasiperiodicity(lu):
    lat, u = lu
    n, k = lat.n_sites, lat.kappa
    th = ell.theta(u, lat)
    assert rel(ell.theta(u + lat.omega, lat), -th) < 1e-11
    assert rel(ell.theta(u + n, lat), -cmath.exp(k * (2 * u + n)) * th) < 1e-11
    assert rel(ell.theta_s(u + n, lat), -ell.theta_s(u, lat)) < 1e-11


@given(cell_points())
def test_parities(lu):
    lat, u = lu
    assert rel(ell.theta(-u, lat), -ell.theta(u, lat)) < 1e-12
    assert rel(ell.rho(-u, lat), -ell.rho(u, lat)) < 1e-12
    assert rel(ell.potential_v(-u, lat), ell.potential_v(u, lat)) < 1e-12
    assert rel(ell.weierstrass_p(-u, lat), ell.weierstrass_p(u, lat)) < 1e-12


@given(cell_points())
def test_jacobi_imaginary_transform(lu):
    lat, u = lu
    assert rel(ell.theta(u, lat), cmath.exp(lat.kappa * u * u / lat.n_sites) * ell.theta_s(u, lat)) < 1e-11


def test_theta_unit_slope():
    for lat in (L(4, 1.0), L(3, 0.25), L(5, 3.0)):
        assert ell.dtheta(0, lat) == pytest.approx(1, abs=1e-13)


def test_theta_series_cap_raises():
    with pytest.raises(ell.NonConvergenceError):
        ell.theta(0.3, L(4, 1.0, max_terms=1))


def test_range_overflow_is_reported():
    with pytest.raises(ell.RangeOverflowError):
        ell.theta(-1000j, L(4, 1e-5))


def test_pole_guard():
    with pytest.raises(ell.PoleProximityError):
        ell.rho(0, LAT)
    with pytest.raises(ell.PoleProximityError):
        ell.potential_v(4, LAT)


# --- general nome thetas


def test_theta_general_zero_and_slope():
    assert ell.theta_general(0, 1j) == 0
    h = 1e-5
    slope = (ell.theta_general(h, 1j) - ell.theta_general(-h, 1j)) / (2 * h)
    assert slope == pytest.approx(1, abs=1e-9)


def test_theta3_partial_sums():
    partial = 1 + 2 * sum(math.exp(-math.pi * n * n) for n in range(1, 12))
    assert ell.theta_k(3, 0, 1j) == pytest.approx(partial, abs=1e-15)


def test_theta4_leading_terms():
    # the cosine carries 2 pi z; the next correction is q^4
    q = math.exp(-2 * math.pi)
    val = ell.theta_k(4, 0.3, 2j)
    assert abs(val - (1 - 2 * q * math.cos(2 * math.pi * 0.3))) < 2 * q**4


def test_theta_k_against_mpmath():
    tau = 0.8j
    q = mp.exp(1j * mp.pi * tau)
    for k in (2, 3, 4):
        for z in (0.2, 0.3 + 0.1j):
            ref = complex(mp.jtheta(k, mp.pi * z, q))
            assert rel(ell.theta_k(k, z, tau), ref) < 1e-13


def test_theta_k_bad_index():
    with pytest.raises(ValueError):
        ell.theta_k(1, 0.2, 1j)


# --- prepotentials and potentials


def test_rho_odd():
    assert ell.rho(-0.3, LAT) == pytest.approx(-ell.rho(0.3, LAT), abs=1e-12)


def test_rho_quasiperiod_shift():
    lat = L(3, 0.7)
    assert ell.rho(0.4 + 3, lat) - ell.rho(0.4, lat) == pytest.approx(2 * 0.7, abs=1e-12)


def test_rho_against_oracle():
    assert rel(ell.rho(0.5, LAT), oracle.theta_jet(0.5, LAT).rho) < 1e-12


def test_rho_s_and_v_s_shifts():
    # forced by theta = e^{kappa u^2 / N} theta_s
    u = 0.7
    assert ell.rho_s(u, LAT) - ell.rho(u, LAT) == pytest.approx(-2 * 1.0 * u / 4, abs=1e-12)
    assert ell.potential_v_s(u, LAT) - ell.potential_v(u, LAT) == pytest.approx(2 * 1.0 / 4, abs=1e-12)


def test_v_even_and_doubly_periodic():
    u = 0.6
    v = ell.potential_v(u, LAT)
    assert ell.potential_v(-u, LAT) == pytest.approx(v, abs=1e-12)
    assert rel(ell.potential_v(u + 4, LAT), v) < 1e-11
    assert rel(ell.potential_v(u + LAT.omega, LAT), v) < 1e-11


def test_v_image_sum():
    lat = L(5, 2.0)
    ref = sum(4 / math.sinh(2 * (1 + 5 * n)) ** 2 for n in range(-30, 31))
    assert ell.potential_v(1.0, lat) == pytest.approx(ref, rel=1e-13)


@given(lattices, st.floats(0.1, 0.9))
def test_v_image_sum_property(lat, frac):
    u = frac * lat.n_sites
    # images beyond kappa |x| ~ 40 are below double precision
    k_max = int(40 / (lat.kappa * lat.n_sites)) + 2
    ref = sum(ell.potential_hyp(u + k * lat.n_sites, lat.kappa) for k in range(-k_max, k_max + 1))
    # V is a difference of O(1) terms, so the error floor is absolute
    assert abs(ell.potential_v(u, lat) - ref) < 1e-11 * max(1.0, abs(ref))


# --- Kronecker function and lattice constants


def test_kronecker_symmetric():
    assert ell.kronecker_phi(0.3, 0.7, LAT) == pytest.approx(ell.kronecker_phi(0.7, 0.3, LAT), rel=1e-14)


def test_kronecker_addition_point():
    lhs = ell.kronecker_phi(0.3, 0.7, LAT) * ell.kronecker_phi(0.3, -0.7, LAT)
    rhs = ell.weierstrass_p(0.3, LAT) - ell.weierstrass_p(0.7, LAT)
    assert abs(lhs - rhs) < 1e-11 * abs(rhs) + 1e-11


def test_kronecker_s_relation():
    ratio = ell.kronecker_phi_s(0.3, 0.7, LAT) / ell.kronecker_phi(0.3, 0.7, LAT)
    assert ratio == pytest.approx(math.exp(-2 * 0.21 / 4), rel=1e-13)


@given(cell_points(), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_kronecker_addition_property(lu, vx, vy):
    lat, u = lu
    v = complex(vx * lat.n_sites, vy * lat.omega.imag)
    assume(min(abs(v), abs(u - v), abs(u + v)) > 0.05)
    lhs = ell.kronecker_phi(u, v, lat) * ell.kronecker_phi(u, -v, lat)
    pu, pv = ell.weierstrass_p(u, lat), ell.weierstrass_p(v, lat)
    assert abs(lhs - (pu - pv)) < 1e-11 * max(abs(pu), abs(pv))


@pytest.mark.parametrize("n", range(2, 9))
@pytest.mark.parametrize("kappa", [0.25, 1.0, 4.0])
def test_legendre_relation(n, kappa):
    lat = L(n, kappa)
    c1, c1s = ell.lattice_constants(lat)
    w = lat.omega
    assert abs(w * (n * c1s) - n * (w * c1) - 2j * math.pi) < 1e-11


def test_lattice_constants_difference():
    c1, c1s = ell.lattice_constants(L(3, 0.5))
    assert c1s - c1 == pytest.approx(2 * 0.5 / 3, abs=1e-13)


def test_lattice_constant_trig_limit():
    _, c1s = ell.lattice_constants(L(4, 0.01))
    assert abs(c1s - (math.pi / 4) ** 2 / 3) < 1e-4


def test_lattice_constant_against_oracle():
    for lat in (L(4, 1.0), L(3, 0.25)):
        assert ell.lattice_constants(lat)[0].real == pytest.approx(-oracle.rho_linear_coefficient(lat), rel=1e-12)


def test_weierstrass_derivative():
    h = 1e-4
    u = 0.6 + 0.2j
    fd = (ell.weierstrass_p(u + h, LAT) - ell.weierstrass_p(u - h, LAT)) / (2 * h)
    assert rel(ell.weierstrass_dp(u, LAT), fd) < 1e-7


# --- Jacobi elliptic functions


def test_jacobi_at_zero():
    assert ell.jacobi_elliptic("sn", 0, LAT) == pytest.approx(0, abs=1e-15)
    assert ell.jacobi_elliptic("cn", 0, LAT) == pytest.approx(1, abs=1e-14)
    assert ell.jacobi_elliptic("dn", 0, LAT) == pytest.approx(1, abs=1e-14)


def test_jacobi_identities():
    u = 0.4 + 0.1j
    m = ell.elliptic_m(LAT)
    sn, cn, dn = (ell.jacobi_elliptic(k, u, LAT) for k in ("sn", "cn", "dn"))
    assert abs(sn * sn + cn * cn - 1) < 1e-11
    assert abs(dn * dn + m * sn * sn - 1) < 1e-11


def test_jacobi_against_mpmath():
    m = ell.elliptic_m(LAT)
    assert abs(m.imag) < 1e-14
    u = 0.37
    for kind in ("sn", "cn", "dn"):
        ref = complex(mp.ellipfun(kind, u, m=m.real))
        assert rel(ell.jacobi_elliptic(kind, u, LAT), ref) < 1e-12
    assert rel(ell.elliptic_K(LAT), complex(mp.ellipk(m.real))) < 1e-12


def test_anisotropy_isotropic_limit():
    g, d = ell.anisotropy(1e-9, LAT)
    assert g == pytest.approx(1, abs=1e-12)
    assert d == pytest.approx(1, abs=1e-12)


# --- deformed potential


def test_deformed_potential_undeformed_limit():
    # V(u; eta/2) / theta(eta) -> V(u); even in eta, so the approach is quadratic
    u = 0.8
    errs = []
    for eta in (1e-1, 1e-2, 1e-3):
        val = ell.deformed_potential(u, DP(eta / 2, LAT)) / ell.theta(eta, LAT)
        errs.append(abs(val - ell.potential_v(u, LAT)))
    assert errs[2] < 1e-6
    assert errs[0] / errs[1] == pytest.approx(100, rel=0.05)


@pytest.mark.parametrize("b", [1, 2, 3])
def test_deformed_potential_half_period_values(b):
    # V(omega_b / 2; eta) = -4 A_b(eta), approached quadratically from a nearby point
    a = ell.potential_coefficients(0.3, LAT)
    w = LAT.half_periods.omega_vec
    val = ell.deformed_potential(w[b] / 2 + 1e-5, DP(0.3, LAT))
    assert rel(val, -4 * a[b]) < 1e-8


@given(cell_points(st.just(LAT)), st.sampled_from([0.3, 0.45, 0.2 + 0.1j]))
def test_deformed_potential_matches_finite_difference_potential(lu, eta):
    # the vertex-side potential equals theta(2 eta) times -(rho(u+eta) - rho(u-eta)) / theta(2 eta)
    _, u = lu
    assume(min(abs(u - eta), abs(u + eta)) > 0.05)
    assume(abs(2 * u - 4) > 0.1 and abs(2 * u + 4) > 0.1)
    try:
        v = ell.deformed_potential(u, DP(eta, LAT))
    except ell.PoleProximityError:
        assume(False)
    q = ell.theta(2 * eta, LAT) * ell.potential_qino(u, eta, LAT)
    assert abs(v - q) < 1e-10 * max(1.0, abs(q))


@given(cell_points(st.just(LAT)), st.sampled_from([0.3, 0.45, 0.2 + 0.1j]))
def test_sans_serif_potential_shift(lu, eta):
    _, u = lu
    assume(min(abs(u - eta), abs(u + eta)) > 0.05)
    try:
        diff = ell.deformed_potential(u, DP(eta, LAT), sans_serif=True) - ell.deformed_potential(u, DP(eta, LAT))
    except ell.PoleProximityError:
        assume(False)
    assert abs(diff - 4 * 1.0 * eta / 4) < 1e-9


def test_deformed_potential_trig_limit_rate():
    # eta = N gamma, V(u; eta)/theta(2 eta) -> V_trig(u; gamma) at rate O(kappa)
    errs = []
    for k in (0.2, 0.1, 0.05):
        lat = L(4, k)
        v = ell.deformed_potential(1.0, DP(0.8, lat)) / ell.theta(1.6, lat)
        errs.append(abs(v - ell.potential_trig(1.0, 0.2, 4)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[1] / errs[2] == pytest.approx(2, rel=0.15)


# --- limit potentials and normalizations


def test_trig_potentials():
    assert ell.potential_trig(1.3, 0, 5) == pytest.approx(ell.potential_trig_undeformed(1.3, 5), rel=1e-15)
    ref = (math.pi / 4) ** 2 / (math.sin(math.pi / 4 + 0.2 * math.pi) * math.sin(math.pi / 4 - 0.2 * math.pi))
    assert ell.potential_trig(1, 0.2, 4) == pytest.approx(ref, rel=1e-15)


def test_hyperbolic_potentials():
    assert ell.potential_hyp_deformed(0.7, 0, 1.3) == pytest.approx(ell.potential_hyp(0.7, 1.3), rel=1e-15)


def test_normalizations():
    assert ell.normalization_residue(1.0) == pytest.approx(math.sinh(1) ** 2 / math.cosh(1), rel=1e-15)
    assert abs(ell.normalization_residue(1e-3) - 1) < 1e-5
    eta = 1e-6
    assert eta * ell.normalization(1.0, eta, LAT) == pytest.approx(ell.normalization_residue(1.0), rel=1e-9)


def test_normalization_pole():
    with pytest.raises(ell.PoleProximityError):
        ell.normalization(1.0, 0.0, LAT)


def test_vectorized_consistency():
    # evaluating the same point repeatedly gives bit-identical results
    vals = {ell.theta(0.3 + 0.2j, LAT) for _ in range(3)}
    assert len(vals) == 1
    assert np.isfinite(ell.potential_v(2.0, LAT))


@pytest.mark.parametrize("m,l", [(0, 0), (1, 0), (-2, 1)])
def test_theta_regular_at_its_zeros(m, l):
    # theta is entire: tiny offsets from a lattice zero give a finite value, only rho is singular
    z = m * LAT.n_sites + l * LAT.omega
    h = (z + 1e-14) - z
    slope = ell.dtheta(z + 1e-6, LAT)
    assert ell.theta(z + 1e-14, LAT) == pytest.approx(slope * h, rel=1e-5)
    assert ell.dtheta(z + 1e-14, LAT) == pytest.approx(slope, rel=1e-5)
    with pytest.raises(ell.PoleProximityError):
        ell.rho(z + 1e-14, LAT)
