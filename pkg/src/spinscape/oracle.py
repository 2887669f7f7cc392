"""Arbitrary-precision reference values for the lattice theta function.

Uses the infinite product representations (not the sums used in the double
precision kernel) evaluated with mpmath, with derivatives from mpmath's
high-order differentiation. Slow; meant for tests and cross-checks.
"""

from __future__ import annotations

import mpmath as mp

from .elliptic import Jet, LatticeParams

DPS = 40


def _product_theta(u, n_sites: int, kappa):
    """theta(u) from the product over hyperbolic sines, or its dual over sines."""
    n = mp.mpf(n_sites)
    k = mp.mpf(kappa)
    eps = mp.mpf(10) ** (-DPS - 5)
    if n * k >= mp.pi:
        val = mp.sinh(k * u) / k
        m = 1
        while True:
            f = mp.sinh(k * (m * n + u)) * mp.sinh(k * (m * n - u)) / mp.sinh(k * m * n) ** 2
            val *= f
            if mp.exp(-2 * k * (m * n - abs(mp.re(u)))) < eps:
                return val
            m += 1
    q = mp.exp(-mp.pi**2 / (n * k))
    x = mp.pi * u / n
    val = n / mp.pi * mp.sin(x)
    m = 1
    while True:
        q2 = q ** (2 * m)
        f = (1 - 2 * q2 * mp.cos(2 * x) + q2 * q2) / (1 - q2) ** 2
        val *= f
        if q2 * mp.exp(2 * abs(mp.im(x))) < eps:
            return mp.exp(k * u * u / n) * val
        m += 1


def theta_mp(u, lat: LatticeParams):
    with mp.workdps(DPS):
        return _product_theta(mp.mpc(u), lat.n_sites, lat.kappa)


def theta_jet(u, lat: LatticeParams) -> Jet:
    with mp.workdps(DPS):
        u = mp.mpc(u)
        f = lambda x: _product_theta(x, lat.n_sites, lat.kappa)
        t0, t1, t2, t3 = mp.diffs(f, u, 3)
        r1, r2, r3 = t1 / t0, t2 / t0, t3 / t0
        return Jet(
            complex(t0),
            complex(r1),
            complex(r2 - r1 * r1),
            complex(r3 - 3 * r1 * r2 + 2 * r1**3),
        )


def rho_linear_coefficient(lat: LatticeParams) -> float:
    """Coefficient of u in rho(u) - 1/u, from the third Taylor coefficient of theta."""
    with mp.workdps(DPS):
        f = lambda x: _product_theta(x, lat.n_sites, lat.kappa)
        t3 = mp.diff(f, mp.mpf(0), 3)
        # theta = u + t3 u^3/6 + ...  =>  rho = 1/u + (t3/3) u + ...
        return float(mp.re(t3) / 3)
