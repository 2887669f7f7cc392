"""Two-site R-matrices: eight-vertex (both lattice specializations), their
trigonometric, hyperbolic and short-range degenerations, Felder's dynamical
R-matrix with its limits, and the face-vertex intertwiner.

All R-matrices are 4x4 in the basis uu, ud, du, dd. The braid form is P @ R.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import elliptic as ell
from .elliptic import LatticeParams, PoleProximityError
from .spin import PERM, rotation_u, sigma_sq

PI = math.pi
SQ = [sigma_sq(a) for a in range(4)]


@dataclass(frozen=True)
class RMatrixParams:
    lattice: LatticeParams
    eta: complex


@dataclass(frozen=True)
class DynamicalArg:
    a: complex


def _uu() -> np.ndarray:
    u = rotation_u()
    return np.kron(u, u)


# ---------------------------------------------------------------------------
# eight-vertex


def g_weights(u: complex, p: RMatrixParams) -> tuple[complex, complex, complex, complex]:
    """Weights g_alpha(u; eta) = phi(u, (eta + w_alpha)/2) / phi(u, eta), times e^{-kappa u} for x, y."""
    return _g_and_dg(u, p)[0]


def g_weights_derivative(u: complex, p: RMatrixParams) -> tuple[complex, ...]:
    return _g_and_dg(u, p)[1]


def _g_and_dg(u, p: RMatrixParams, sans_serif: bool = False):
    lat = p.lattice
    u, eta = complex(u), complex(p.eta)
    if sans_serif:
        w = lat.half_periods.omega_vec_s
        th, rh = ell.theta_s, ell.rho_s
        twist = 1j * PI / lat.n_sites
    else:
        w = lat.half_periods.omega_vec
        th, rh = ell.theta, ell.rho
        twist = -lat.kappa
    # phi(u, v)/phi(u, eta) = theta(u + v) theta(eta) / (theta(v) theta(u + eta)), regular at u = 0
    common = th(eta, lat) / th(u + eta, lat)
    drho_eta = rh(u + eta, lat)
    g, dg = [], []
    for alpha in range(4):
        v = (eta + w[alpha]) / 2
        val = th(u + v, lat) / th(v, lat) * common
        d = rh(u + v, lat) - drho_eta
        if alpha in (1, 2):
            val *= cmath.exp(twist * u)
            d += twist
        g.append(val)
        dg.append(val * d)
    return tuple(g), tuple(dg)


def _from_weights(g) -> np.ndarray:
    return sum(g[a] * SQ[a] for a in range(4)) / 2


def r8v(u: complex, p: RMatrixParams) -> np.ndarray:
    return _from_weights(g_weights(u, p))


def r8v_braid(u: complex, p: RMatrixParams) -> np.ndarray:
    return PERM @ r8v(u, p)


def r8v_braid_derivative(u: complex, p: RMatrixParams) -> np.ndarray:
    return PERM @ _from_weights(g_weights_derivative(u, p))


def g_weights_s(u: complex, p: RMatrixParams) -> tuple[complex, ...]:
    return _g_and_dg(u, p, sans_serif=True)[0]


def r8v_s(u: complex, p: RMatrixParams) -> np.ndarray:
    return _from_weights(g_weights_s(u, p))


def r8v_s_braid(u: complex, p: RMatrixParams) -> np.ndarray:
    return PERM @ r8v_s(u, p)


def r8v_s_braid_derivative(u: complex, p: RMatrixParams) -> np.ndarray:
    return PERM @ _from_weights(_g_and_dg(u, p, sans_serif=True)[1])


def vertex_weights(u: complex, p: RMatrixParams) -> tuple[complex, complex, complex, complex]:
    """Baxter's (a, b, c, d) read off from the g-weights."""
    g0, gx, gy, gz = g_weights(u, p)
    return (g0 + gz) / 2, (g0 - gz) / 2, (gx + gy) / 2, (gx - gy) / 2


# ---------------------------------------------------------------------------
# degenerations


def six_vertex_weights(u: complex, gamma: float, n_sites: int) -> tuple[complex, complex]:
    """(b, c) of the principal six-vertex R-matrix; a = 1, d = 0."""
    den = cmath.sin(PI * complex(u) / n_sites + PI * gamma)
    if abs(den) < 1e-14:
        raise PoleProximityError("six-vertex weights are singular")
    return cmath.sin(PI * complex(u) / n_sites) / den, math.sin(PI * gamma) / den


def _six_vertex(b: complex, c: complex) -> np.ndarray:
    r = np.eye(4, dtype=complex)
    r[1, 1] = r[2, 2] = b
    r[1, 2] = r[2, 1] = c
    return r


def r6v_principal(u: complex, gamma: float, n_sites: int) -> np.ndarray:
    return _six_vertex(*six_vertex_weights(u, gamma, n_sites))


def r6v_braid(u: complex, gamma: float, n_sites: int) -> np.ndarray:
    return PERM @ r6v_principal(u, gamma, n_sites)


def r_tri8v(u: complex, gamma: float, n_sites: int) -> np.ndarray:
    """U^{(x)2} R6v U^{-(x)2} written out explicitly."""
    h = PI * complex(u) / (2 * n_sites)
    g = PI * gamma / 2
    cden = cmath.cos(h + g)
    sden = cmath.sin(h + g)
    if min(abs(cden), abs(sden)) < ell.POLE_GUARD:
        raise PoleProximityError(f"trigonometric R-matrix pole at u = {u}")
    r = np.zeros((4, 4), dtype=complex)
    r[0, 0] = r[3, 3] = cmath.cos(h) * math.cos(g) / cden
    r[0, 3] = r[3, 0] = -cmath.sin(h) * math.sin(g) / cden
    # middle block: the diagonal carries sin(h) cos(g) so that R(0) = 1
    r[1, 1] = r[2, 2] = cmath.sin(h) * math.cos(g) / sden
    r[1, 2] = r[2, 1] = cmath.cos(h) * math.sin(g) / sden
    return r


def r_tri8v_braid(u: complex, gamma: float, n_sites: int) -> np.ndarray:
    return PERM @ r_tri8v(u, gamma, n_sites)


def r_hyp(u: complex, eta: complex, kappa: float) -> np.ndarray:
    x = kappa * complex(u)
    den = cmath.sinh(x + kappa * eta)
    return _six_vertex(cmath.sinh(x) / den, cmath.sinh(kappa * eta) / den)


def r_hyp_braid(u: complex, eta: complex, kappa: float) -> np.ndarray:
    return PERM @ r_hyp(u, eta, kappa)


def braid_p(gamma_prime: float) -> np.ndarray:
    """Permutation with phase e^{i pi gamma'} on the two hopping entries."""
    r = np.zeros((4, 4), dtype=complex)
    r[0, 0] = r[3, 3] = 1
    r[1, 2] = r[2, 1] = cmath.exp(1j * PI * gamma_prime)
    return r


# ---------------------------------------------------------------------------
# dynamical (face type)


def _dyn(u, a, p: RMatrixParams, sans_serif: bool, deriv: bool):
    lat = p.lattice
    th = ell.theta_s if sans_serif else ell.theta
    u, eta, a = complex(u), complex(p.eta), complex(a)
    ta = th(eta * a, lat)
    if abs(ta) < ell.POLE_GUARD:
        raise PoleProximityError("theta(eta a) vanishes")
    tue = th(u + eta, lat)
    te = th(eta, lat)
    tu = th(u, lat)
    d11 = te * th(eta * a + u, lat) / (tue * ta)
    d12 = tu * th(eta * (a + 1), lat) / (tue * ta)
    d21 = tu * th(eta * (a - 1), lat) / (tue * ta)
    d22 = te * th(eta * a - u, lat) / (tue * ta)
    r = np.eye(4, dtype=complex)
    if not deriv:
        r[1, 1], r[1, 2], r[2, 1], r[2, 2] = d11, d12, d21, d22
        return r
    rh = ell.rho_s if sans_serif else ell.rho
    dth = ell.dtheta if not sans_serif else _dtheta_s
    rue = rh(u + eta, lat)
    # theta(u) / theta(u + eta) differentiated without dividing by theta(u)
    q = (dth(u, lat) - tu * rue) / tue
    r = np.zeros((4, 4), dtype=complex)
    r[1, 1] = d11 * (rh(eta * a + u, lat) - rue)
    r[2, 2] = d22 * (-rh(eta * a - u, lat) - rue)
    r[1, 2] = q * th(eta * (a + 1), lat) / ta
    r[2, 1] = q * th(eta * (a - 1), lat) / ta
    return r


def _dtheta_s(u, lat):
    u = complex(u)
    return cmath.exp(-lat.kappa * u * u / lat.n_sites) * (
        ell.dtheta(u, lat) - 2 * lat.kappa * u / lat.n_sites * ell.theta(u, lat)
    )


def r_dynamical(u: complex, a: complex, p: RMatrixParams) -> np.ndarray:
    """Felder's dynamical R-matrix in braid form; preserves the total spin-z.

    The theta(eta a + u) entry sits on the up-down diagonal position. With this
    placement the dynamical braid relation holds with the parameter of sites 2, 3
    shifted to a - sigma^z_1, and the short-range and trigonometric limits come out
    as 1 - e^{-i pi gamma'} E(a; gamma') and 1 - b e(gamma).
    """
    return _dyn(u, a, p, False, False)


def r_dynamical_derivative(u: complex, a: complex, p: RMatrixParams) -> np.ndarray:
    return _dyn(u, a, p, False, True)


def r_dynamical_s(u: complex, a: complex, p: RMatrixParams) -> np.ndarray:
    return _dyn(u, a, p, True, False)


def e_dynamical(u: complex, a: complex, p: RMatrixParams) -> np.ndarray:
    """E(u, a; eta) defined by Rc(-u, a) Rc'(u, a) = theta(eta) V_qIno(u) E(u, a)."""
    lat = p.lattice
    pot = ell.theta(p.eta, lat) * ell.potential_qino(u, p.eta, lat)
    if abs(pot) < 1e-300:
        raise PoleProximityError("q-Inozemtsev potential vanishes")
    return r_dynamical(-complex(u), a, p) @ r_dynamical_derivative(u, a, p) / pot


def e_tl(gamma: float) -> np.ndarray:
    """Temperley-Lieb generator with q = e^{i pi gamma}."""
    q = cmath.exp(1j * PI * gamma)
    e = np.zeros((4, 4), dtype=complex)
    e[1, 1], e[1, 2] = 1 / q, -q
    e[2, 1], e[2, 2] = -1 / q, q
    return e


def hecke_t(gamma: float) -> np.ndarray:
    return cmath.exp(1j * PI * gamma) * np.eye(4) - e_tl(gamma)


def r_a6v(u: complex, gamma: float, n_sites: int) -> np.ndarray:
    """Asymmetric (homogeneous) six-vertex R-matrix in braid form, 1 - b e(gamma)."""
    b, _ = six_vertex_weights(u, gamma, n_sites)
    return np.eye(4) - b * e_tl(gamma)


def e_nn(a: complex, gamma_prime: float) -> np.ndarray:
    s = lambda x: cmath.sin(PI * gamma_prime * x)
    a = complex(a)
    e = np.zeros((4, 4), dtype=complex)
    e[1, 1] = s(a - 1) / s(a)
    e[1, 2] = -s(a + 1) / s(a)
    e[2, 1] = -s(a - 1) / s(a)
    e[2, 2] = s(a + 1) / s(a)
    return e


def r_dynamical_nn(a: complex, gamma_prime: float) -> np.ndarray:
    return np.eye(4) - cmath.exp(-1j * PI * gamma_prime) * e_nn(a, gamma_prime)


# ---------------------------------------------------------------------------
# face-vertex intertwiner


def psi_b(b: int, u: complex, lat: LatticeParams) -> complex:
    if b not in (1, 2):
        raise ValueError("psi_b index must be 1 or 2")
    w = lat.omega
    u = complex(u)
    return cmath.exp(-lat.kappa * u / 2) * ell.theta_k(4 - b, (u - lat.n_sites / 2) / w, -2 * lat.n_sites / w)


def psi_matrix(u: complex, a: complex, p: RMatrixParams) -> np.ndarray:
    lat, ea = p.lattice, complex(p.eta) * complex(a)
    u = complex(u)
    m = np.array(
        [
            [psi_b(1, u + ea, lat), psi_b(2, u + ea, lat)],
            [psi_b(1, u - ea, lat), psi_b(2, u - ea, lat)],
        ]
    )
    if abs(np.linalg.det(m)) < 1e-14 * max(1.0, np.abs(m).max() ** 2):
        raise PoleProximityError("face-vertex factor is singular")
    return m


def fv_phi(u: complex, v: complex, a: complex, p: RMatrixParams) -> np.ndarray:
    """Psi_1(u, a) Psi_2(v, a - sigma^z_1) as a map from face to vertex states.

    The rows of psi_matrix are labelled by the face step (+ for u + eta a, - for
    u - eta a), so as an operator the face index is the column index: the factors
    enter transposed. The face step of site 1 (+1 for up) sets the shift of site 2.
    """
    first = np.kron(psi_matrix(u, a, p).T, np.eye(2))
    second = np.zeros((4, 4), dtype=complex)
    second[:2, :2] = psi_matrix(v, complex(a) - 1, p).T
    second[2:, 2:] = psi_matrix(v, complex(a) + 1, p).T
    return first @ second


def fv_phi_derivative_u(u: complex, v: complex, a: complex, p: RMatrixParams, h: float = 1e-3) -> np.ndarray:
    """d/du of fv_phi via an 8th-order central difference on the entire function psi."""
    # psi_b is entire; the stencil is accurate to ~h^8 which is far below the target tolerances
    c = (4 / 5, -1 / 5, 4 / 105, -1 / 280)
    out = np.zeros((4, 4), dtype=complex)
    for k, ck in enumerate(c, start=1):
        out += ck * (fv_phi(u + k * h, v, a, p) - fv_phi(u - k * h, v, a, p))
    return out / h


# ---------------------------------------------------------------------------
# identity checks on C^2 (x) C^2 (x) C^2


def _on12(m: np.ndarray) -> np.ndarray:
    return np.kron(m, np.eye(2))


def _on23(m: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(2), m)


def _on23_shifted(factory: Callable[[complex], np.ndarray], a: complex, sign: int) -> np.ndarray:
    """Block diagonal in site 1: factory(a - sign * s_1) on sites 2, 3."""
    out = np.zeros((8, 8), dtype=complex)
    out[:4, :4] = factory(complex(a) - sign)
    out[4:, 4:] = factory(complex(a) + sign)
    return out


def check_ybe(r_factory: Callable[[complex], np.ndarray], u: complex, v: complex) -> float:
    lhs = _on12(r_factory(u)) @ _on23(r_factory(u + v)) @ _on12(r_factory(v))
    rhs = _on23(r_factory(v)) @ _on12(r_factory(v + u)) @ _on23(r_factory(u))
    return float(np.linalg.norm(lhs - rhs))


def check_dybe(
    r_factory: Callable[[complex, complex], np.ndarray], u: complex, v: complex, a: complex
) -> float:
    """Dynamical braid relation, sites 2-3 carrying the parameter a - sigma^z_1."""
    lhs = (
        _on12(r_factory(u, a))
        @ _on23_shifted(lambda b: r_factory(u + v, b), a, 1)
        @ _on12(r_factory(v, a))
    )
    rhs = (
        _on23_shifted(lambda b: r_factory(v, b), a, 1)
        @ _on12(r_factory(v + u, a))
        @ _on23_shifted(lambda b: r_factory(u, b), a, 1)
    )
    return float(np.linalg.norm(lhs - rhs))


def check_unitarity(r_factory: Callable[[complex], np.ndarray], u: complex) -> float:
    return float(np.linalg.norm(r_factory(-u) @ r_factory(u) - np.eye(4)))


def check_fv(u: complex, v: complex, a: complex, p: RMatrixParams) -> float:
    lhs = r8v_braid(complex(u) - v, p) @ fv_phi(u, v, a, p)
    rhs = fv_phi(v, u, a, p) @ r_dynamical(complex(u) - v, a, p)
    return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs))


def relation_s(u: complex, p: RMatrixParams) -> float:
    """Residual of R_s(u) = e^{kappa eta u/N} (U(x)U)^{-1} R(u) (U(x)U)."""
    uu = _uu()
    lat = p.lattice
    rhs = cmath.exp(lat.kappa * p.eta * u / lat.n_sites) * np.linalg.inv(uu) @ r8v(u, p) @ uu
    return float(np.linalg.norm(r8v_s(u, p) - rhs))
