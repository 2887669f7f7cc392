"""Scalar special functions on the rectangular lattice with periods N and i*pi/kappa.

The odd theta function theta(u) is evaluated from one of two rapidly convergent
series. For N*kappa >= pi the hyperbolic sine series in the nome p = exp(-N kappa)
is used; otherwise the sine series of the companion function theta_s in the dual
nome exp(-pi^2/(N kappa)) is used together with theta(u) = exp(kappa u^2/N) theta_s(u).
Either way the nome is at most exp(-pi), so a handful of terms suffice.
Derivatives come from termwise differentiation of the series.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

PI = math.pi
POLE_GUARD = 1e-13


class EllipticError(ArithmeticError):
    """Base class for special-function failures."""


class NonConvergenceError(EllipticError):
    """A series hit its term cap before reaching the requested tolerance."""


class PoleProximityError(EllipticError):
    """The argument is (numerically) at a zero of theta."""


class RangeOverflowError(EllipticError):
    """The value does not fit in double precision (large imaginary argument at small kappa)."""


@dataclass(frozen=True)
class LatticeParams:
    n_sites: int
    kappa: float
    series_tol: float = 1e-16
    max_terms: int = 200
    # route theta through the arbitrary-precision product oracle instead
    oracle: bool = False

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise ValueError(f"n_sites must be an integer >= 2, got {self.n_sites!r}")
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise ValueError(f"kappa must be positive and finite, got {self.kappa!r}")
        if not self.series_tol > 0:
            raise ValueError("series_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be positive")

    @property
    def omega(self) -> complex:
        return 1j * PI / self.kappa

    @property
    def tau(self) -> complex:
        return 1j * self.n_sites * self.kappa / PI

    @property
    def nome_p(self) -> float:
        return math.exp(-self.n_sites * self.kappa)

    @property
    def nome_ps(self) -> float:
        return math.exp(-PI**2 / (self.n_sites * self.kappa))

    @property
    def half_periods(self) -> HalfPeriods:
        return HalfPeriods.of(self)

    def with_oracle(self, flag: bool = True) -> LatticeParams:
        return LatticeParams(self.n_sites, self.kappa, self.series_tol, self.max_terms, flag)


@dataclass(frozen=True)
class HalfPeriods:
    """Lattice points indexed by alpha in (0, x, y, z); half of them are half-periods."""

    omega_vec: tuple[complex, complex, complex, complex]
    omega_vec_s: tuple[complex, complex, complex, complex]

    @classmethod
    def of(cls, lat: LatticeParams) -> HalfPeriods:
        n, w = lat.n_sites, lat.omega
        return cls((0j, complex(n), n - w, -w), (0j, w, n + w, complex(n)))


@dataclass(frozen=True)
class DeformedPotentialParams:
    eta: complex
    lattice: LatticeParams


class Jet(NamedTuple):
    theta: complex
    rho: complex
    drho: complex
    ddrho: complex


# ---------------------------------------------------------------------------
# series core


def _use_hyperbolic(lat: LatticeParams) -> bool:
    return lat.n_sites * lat.kappa >= PI


def _reduce(u: complex, lat: LatticeParams) -> tuple[complex, int, int]:
    """Write u = u0 + m N + l omega with u0 in the centred fundamental rectangle."""
    n, k = lat.n_sites, lat.kappa
    m = round(u.real / n)
    u0 = u - m * n
    period = PI / k
    l_ = round(u0.imag / period)
    u0 = u0 - 1j * l_ * period
    return u0, m, l_


def _series(u0: complex, lat: LatticeParams, hyperbolic: bool):
    """Sums S_j = sum_n c_n w_n^j f^(j)(w_n u0) for j = 0..3 and the normalizer D.

    f = sinh in the hyperbolic representation and sin in the trigonometric one.
    """
    n_sites, k = lat.n_sites, lat.kappa
    if hyperbolic:
        nome, base, grow = lat.nome_p, k, abs(u0.real)
    else:
        nome, base, grow = lat.nome_ps, PI / n_sites, abs(u0.imag)
    s = [0j, 0j, 0j, 0j]
    d = 0.0
    for n in range(lat.max_terms):
        c = (-1) ** n * nome ** (n * (n + 1))
        w = (2 * n + 1) * base
        x = w * u0
        if hyperbolic:
            f0, f1 = cmath.sinh(x), cmath.cosh(x)
            vals = (f0, w * f1, w * w * f0, w**3 * f1)
        else:
            f0, f1 = cmath.sin(x), cmath.cos(x)
            vals = (f0, w * f1, -w * w * f0, -(w**3) * f1)
        for j in range(4):
            s[j] += c * vals[j]
        d += c * (2 * n + 1)
        # size of this term relative to the leading one, derivatives included
        if n > 0 and abs(c) * math.exp(2 * n * base * grow) * (2 * n + 1) ** 3 < lat.series_tol:
            return s, d
    raise NonConvergenceError(f"theta series did not converge in {lat.max_terms} terms")


def theta_jet(u: complex, lat: LatticeParams) -> Jet:
    """theta(u) together with rho = theta'/theta and its first two derivatives."""
    if lat.oracle:
        from . import oracle

        return oracle.theta_jet(u, lat)
    u = complex(u)
    n, k = lat.n_sites, lat.kappa
    u0, m, l_ = _reduce(u, lat)
    if abs(u0) < POLE_GUARD * max(1.0, n):
        raise PoleProximityError(f"theta has a zero at the lattice point near {u}")
    hyperbolic = _use_hyperbolic(lat)
    try:
        s, d = _series(u0, lat, hyperbolic)
    except OverflowError as exc:
        raise RangeOverflowError(f"theta overflows at u={u} (N={n}, kappa={k})") from exc
    r1 = s[1] / s[0]
    r2 = s[2] / s[0]
    r3 = s[3] / s[0]
    rho = r1
    drho = r2 - r1 * r1
    ddrho = r3 - 3 * r1 * r2 + 2 * r1**3
    if hyperbolic:
        th = s[0] / (k * d)
    else:
        th = cmath.exp(k * u0 * u0 / n) * (n / PI) * s[0] / d
        rho += 2 * k * u0 / n
        drho += 2 * k / n
    # undo the reduction: theta(u0 + mN + l omega) = (-1)^(m+l) e^{k(2 m u0 + m^2 N)} theta(u0)
    th *= (-1) ** (m + l_) * cmath.exp(k * (2 * m * u0 + m * m * n))
    rho += 2 * k * m
    return Jet(th, rho, drho, ddrho)


def _taylor_linear(lat: LatticeParams) -> float:
    """Coefficient of u in rho(u) - 1/u."""
    if lat.oracle:
        from . import oracle

        return oracle.rho_linear_coefficient(lat)
    hyperbolic = _use_hyperbolic(lat)
    nome = lat.nome_p if hyperbolic else lat.nome_ps
    base = lat.kappa if hyperbolic else PI / lat.n_sites
    num = den = 0.0
    for n in range(lat.max_terms):
        c = (-1) ** n * nome ** (n * (n + 1))
        w = (2 * n + 1) * base
        num += c * w**3
        den += c * w
        if n > 0 and abs(c) * (2 * n + 1) ** 3 < lat.series_tol:
            break
    else:
        raise NonConvergenceError("Taylor series did not converge")
    if hyperbolic:
        return num / (3 * den)
    return -num / (3 * den) + 2 * lat.kappa / lat.n_sites


# ---------------------------------------------------------------------------
# theta family on the lattice


def _near_zero(u: complex, lat: LatticeParams) -> tuple[complex, complex] | None:
    """(u0, factor) with theta(u) = factor * (u0 + O(u0^3)) when u sits on a lattice zero."""
    if lat.oracle:
        return None
    u0, m, l_ = _reduce(complex(u), lat)
    if abs(u0) >= POLE_GUARD * max(1.0, lat.n_sites):
        return None
    k, n = lat.kappa, lat.n_sites
    return u0, (-1) ** (m + l_) * cmath.exp(k * (2 * m * u0 + m * m * n))


def theta(u: complex, lat: LatticeParams) -> complex:
    if u == 0:
        return 0j
    near = _near_zero(u, lat)
    if near is not None:
        return near[1] * near[0]
    return theta_jet(u, lat).theta


def theta_s(u: complex, lat: LatticeParams) -> complex:
    """Companion theta, antiperiodic with period N: theta_s(u) = exp(-kappa u^2/N) theta(u)."""
    if u == 0:
        return 0j
    u = complex(u)
    return cmath.exp(-lat.kappa * u * u / lat.n_sites) * theta(u, lat)


def dtheta(u: complex, lat: LatticeParams) -> complex:
    if u == 0:
        return 1 + 0j
    near = _near_zero(u, lat)
    if near is not None:
        u0, f = near
        m = _reduce(complex(u), lat)[1]
        return f * (1 + 2 * lat.kappa * m * u0)
    j = theta_jet(u, lat)
    return j.theta * j.rho


def rho(u: complex, lat: LatticeParams) -> complex:
    return theta_jet(u, lat).rho


def rho_s(u: complex, lat: LatticeParams) -> complex:
    return rho(u, lat) - 2 * lat.kappa * complex(u) / lat.n_sites


def potential_v(u: complex, lat: LatticeParams) -> complex:
    """V(u) = -rho'(u), even and doubly periodic."""
    return -theta_jet(u, lat).drho


def potential_v_s(u: complex, lat: LatticeParams) -> complex:
    return potential_v(u, lat) + 2 * lat.kappa / lat.n_sites


def lattice_constants(lat: LatticeParams) -> tuple[complex, complex]:
    """(c1, c1s): V = wp + c1 and V_s = wp + c1s, with c1s - c1 = 2 kappa / N."""
    c1 = -_taylor_linear(lat)
    return complex(c1), complex(c1 + 2 * lat.kappa / lat.n_sites)


def weierstrass_p(u: complex, lat: LatticeParams) -> complex:
    return potential_v(u, lat) - lattice_constants(lat)[0]


def weierstrass_dp(u: complex, lat: LatticeParams) -> complex:
    """Derivative of the Weierstrass function, -rho''(u)."""
    return -theta_jet(u, lat).ddrho


def kronecker_phi(u: complex, v: complex, lat: LatticeParams) -> complex:
    return theta(complex(u) + v, lat) / (theta(u, lat) * theta(v, lat))


def kronecker_phi_s(u: complex, v: complex, lat: LatticeParams) -> complex:
    return theta_s(complex(u) + v, lat) / (theta_s(u, lat) * theta_s(v, lat))


# ---------------------------------------------------------------------------
# general nome


def _vartheta1(z: complex, tau: complex, tol: float = 1e-16, max_terms: int = 200, deriv: bool = False):
    """Unnormalized odd theta 2 sum (-1)^n q^{(n+1/2)^2} sin((2n+1) pi z), q = e^{i pi tau}."""
    if tau.imag <= 0:
        raise ValueError("Im(tau) must be positive")
    z = complex(z)
    # quasiperiodicity: vartheta1(z + tau) = -q^{-1} e^{-2 pi i z} vartheta1(z)
    l_ = round(z.imag / tau.imag)
    z0 = z - l_ * tau
    total = 0j
    dtotal = 0j
    for n in range(max_terms):
        c = (-1) ** n * cmath.exp(1j * PI * tau * (n + 0.5) ** 2)
        w = (2 * n + 1) * PI
        total += c * cmath.sin(w * z0)
        dtotal += c * w * cmath.cos(w * z0)
        if n > 0 and abs(c) * math.exp(w * abs(z0.imag)) * (2 * n + 1) < tol * abs(
            cmath.exp(1j * PI * tau / 4)
        ):
            break
    else:
        raise NonConvergenceError("general theta series did not converge")
    factor = cmath.exp(-1j * PI * tau * l_ * l_ - 2j * PI * l_ * z0) * (-1) ** l_
    if deriv:
        return 2 * factor * total, 2 * factor * (dtotal - 2j * PI * l_ * total)
    return 2 * factor * total


def theta_general(u: complex, tau: complex) -> complex:
    """Odd theta with nome e^{i pi tau}, normalized to unit slope at the origin."""
    tau = complex(tau)
    return _vartheta1(u, tau) / _vartheta1(0, tau, deriv=True)[1]


def theta_k(k: int, u: complex, tau: complex) -> complex:
    """The even Jacobi thetas 2, 3, 4 obtained by half-period shifts of the odd one."""
    tau = complex(tau)
    z = complex(u)
    q4 = cmath.exp(1j * PI * tau / 4)
    if k == 2:
        return _vartheta1(z + 0.5, tau)
    if k == 3:
        return q4 * cmath.exp(1j * PI * z) * _vartheta1(z + (1 + tau) / 2, tau)
    if k == 4:
        return -1j * q4 * cmath.exp(1j * PI * z) * _vartheta1(z + tau / 2, tau)
    raise ValueError(f"theta_k index must be 2, 3 or 4, got {k}")


# ---------------------------------------------------------------------------
# Jacobi elliptic functions on the nome tau = -N/omega


def _jacobi_tau(lat: LatticeParams) -> complex:
    return -lat.n_sites / lat.omega


def elliptic_K(lat: LatticeParams) -> complex:
    return PI * theta_k(3, 0, _jacobi_tau(lat)) ** 2 / 2


def elliptic_m(lat: LatticeParams) -> complex:
    tau = _jacobi_tau(lat)
    return (theta_k(2, 0, tau) / theta_k(3, 0, tau)) ** 4


def jacobi_elliptic(kind: str, u: complex, lat: LatticeParams) -> complex:
    tau = _jacobi_tau(lat)
    z = complex(u) / (2 * elliptic_K(lat))
    t2, t3, t4 = (theta_k(k, 0, tau) for k in (2, 3, 4))
    den = t2 * theta_k(4, z, tau)
    if abs(den) < POLE_GUARD:
        raise PoleProximityError(f"Jacobi function has a pole near {u}")
    if kind == "sn":
        return t3 * _vartheta1(z, tau) / den
    if kind == "cn":
        return t4 * theta_k(2, z, tau) / den
    if kind == "dn":
        return t4 * theta_k(3, z, tau) / (t3 * theta_k(4, z, tau))
    raise ValueError(f"unknown Jacobi function {kind!r}")


def anisotropy(eta: complex, lat: LatticeParams) -> tuple[complex, complex]:
    """(Gamma, Delta) = (dn, cn) at the rescaled crossing parameter 2 K eta / omega."""
    arg = 2 * elliptic_K(lat) * complex(eta) / lat.omega
    return jacobi_elliptic("dn", arg, lat), jacobi_elliptic("cn", arg, lat)


# ---------------------------------------------------------------------------
# potentials


def potential_coefficients(eta: complex, lat: LatticeParams, sans_serif: bool = False) -> list[complex]:
    """A_beta(eta) for beta = 0, x, y, z."""
    if sans_serif:
        w, pre = lat.half_periods.omega_vec_s, rho_s
    else:
        w, pre = lat.half_periods.omega_vec, rho
    eta = complex(eta)
    out = [pre(eta, lat) / 2]
    for b in (1, 2, 3):
        out.append((pre(eta + w[b] / 2, lat) - pre(w[b] / 2, lat)) / 2)
    return out


def deformed_potential(u: complex, dp: DeformedPotentialParams, sans_serif: bool = False) -> complex:
    """V(u; eta), the coefficient function in the decomposition of Rc(-u) Rc'(u).

    Normalized so that V(u; eta) / theta(2 eta) -> V(u) as eta -> 0.
    """
    lat = dp.lattice
    u, eta = complex(u), complex(dp.eta)
    w = lat.half_periods.omega_vec_s if sans_serif else lat.half_periods.omega_vec
    a = potential_coefficients(eta, lat, sans_serif)
    den = weierstrass_p(2 * u, lat) - weierstrass_p(2 * eta, lat)
    if abs(den) < POLE_GUARD * (1 + abs(weierstrass_p(2 * eta, lat))):
        raise PoleProximityError(f"deformed potential is singular at u={u}")
    num = sum(a[b] * (weierstrass_p(u + w[b] / 2, lat) - weierstrass_p(eta + w[b] / 2, lat)) for b in range(4))
    return (2 * weierstrass_dp(2 * eta, lat) - num) / den


def potential_trig(u: complex, gamma: float, n_sites: int) -> complex:
    x = PI * complex(u) / n_sites
    return (PI / n_sites) ** 2 / (cmath.sin(x + PI * gamma) * cmath.sin(x - PI * gamma))


def potential_trig_undeformed(u: complex, n_sites: int) -> complex:
    return (PI / n_sites) ** 2 / cmath.sin(PI * complex(u) / n_sites) ** 2


def potential_hyp(u: complex, kappa: float) -> complex:
    return kappa**2 / cmath.sinh(kappa * complex(u)) ** 2


def potential_hyp_deformed(u: complex, eta: complex, kappa: float) -> complex:
    x = kappa * complex(u)
    return kappa**2 / (cmath.sinh(x + kappa * eta) * cmath.sinh(x - kappa * eta))


def potential_qino(u: complex, eta: complex, lat: LatticeParams) -> complex:
    u = complex(u)
    return -(rho(u + eta, lat) - rho(u - eta, lat)) / theta(2 * eta, lat)


def normalization_residue(kappa: float) -> float:
    """n_kappa = sinh(kappa)^2 / (kappa^2 cosh kappa), tending to 1 as kappa -> 0."""
    return math.sinh(kappa) ** 2 / (kappa**2 * math.cosh(kappa))


def normalization(kappa: float, eta: complex, lat: LatticeParams) -> complex:
    th = theta(eta, lat)
    if abs(th) < POLE_GUARD:
        raise PoleProximityError("normalization has a pole at eta in the lattice")
    return normalization_residue(kappa) / th
