"""Nearest-neighbour expansions in t = e^{-kappa} and wrapping coefficients.

The integer layer (divisor sums) is kept separate from the operators it
multiplies so that the combinatorics can be tested on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import chains as ch
from . import elliptic as ell
from .elliptic import LatticeParams
from .spin import ChainOperator, check_sites, embed_one_site, embed_two_site, frobenius, pauli, sigma_sq
from .verify import Residual, VerificationReport

INTERACTIONS = ("I", "Ixx", "Idiag")
BOUNDARIES = ("periodic", "antiperiodic_x")
# sign picked up by sigma^alpha (x) sigma^alpha when a bond wraps once, after conjugation by prod sigma^x
_WRAP_SIGN = {"0": 1, "x": 1, "y": -1, "z": -1}
WRAP_TAIL_TOL = 1e-12


# ---------------------------------------------------------------------------
# interactions of range n


def _check_range(n: int) -> None:
    if n <= 0:
        raise ValueError(f"range must be positive, got {n}")


def interaction_i_alpha(alpha: str, n: int, n_sites: int, boundary: str = "periodic") -> ChainOperator:
    """-1/2 sum_i s^k sigma^alpha_i sigma^alpha_{i+n}, with k the number of wraps of i+n.

    s = 1 for periodic boundaries; for antiperiodic_x each wrap conjugates by
    prod sigma^x, which flips the sign of the y and z terms.
    """
    _check_range(n)
    check_sites(n_sites)
    if boundary not in BOUNDARIES:
        raise ValueError(f"unknown boundary {boundary!r}")
    s = _WRAP_SIGN[alpha] if boundary == "antiperiodic_x" else 1
    dim = 2**n_sites
    out = np.zeros((dim, dim), dtype=complex)
    one = pauli(alpha)
    for i in range(1, n_sites + 1):
        k, j = divmod(i + n - 1, n_sites)
        j += 1
        if j == i:
            out += s**k * np.eye(dim)
        else:
            out += s**k * embed_one_site(one, i, n_sites) @ embed_one_site(one, j, n_sites)
    return ChainOperator(n_sites, -out / 2)


def _zero(n_sites: int) -> ChainOperator:
    return ChainOperator(n_sites, np.zeros((2**n_sites, 2**n_sites), dtype=complex))


def interaction_i(n: int, n_sites: int) -> ChainOperator:
    """sum_i (1 - P_{i,i+n}) with periodic wrap; zero when n is a multiple of N (no such pair)."""
    _check_range(n)
    if n % n_sites == 0:
        return _zero(n_sites)
    m = sum(interaction_i_alpha(a, n, n_sites).matrix for a in "xyz") - interaction_i_alpha("0", n, n_sites).matrix
    return ChainOperator(n_sites, m)


def interaction_combos(n: int, n_sites: int) -> tuple[ChainOperator, ChainOperator]:
    """(I^x + I^y, I^z - I^0) with antiperiodic_x wrap; both zero when n is a multiple of N."""
    _check_range(n)
    if n % n_sites == 0:
        return _zero(n_sites), _zero(n_sites)
    i = {a: interaction_i_alpha(a, n, n_sites, "antiperiodic_x").matrix for a in "0xyz"}
    return ChainOperator(n_sites, i["x"] + i["y"]), ChainOperator(n_sites, i["z"] - i["0"])


# ---------------------------------------------------------------------------
# integer layer


@dataclass(frozen=True)
class ExpansionTerm:
    order: int
    # (coefficient, interaction, range), ascending in range
    terms: tuple[tuple[int, str, int], ...]

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "terms": [{"coefficient": c, "interaction": i, "range": r} for c, i, r in self.terms],
        }


def divisors(m: int) -> list[int]:
    if m < 1:
        raise ValueError(f"divisors need m >= 1, got {m}")
    small = [d for d in range(1, math.isqrt(m) + 1) if m % d == 0]
    return sorted(set(small + [m // d for d in small]))


def ino_expansion_terms(max_order: int) -> list[ExpansionTerm]:
    """Order m (power t^{2m}) carries sum_{d | m} d I(m/d)."""
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    return [
        ExpansionTerm(m, tuple((d, "I", m // d) for d in reversed(divisors(m))))
        for m in range(1, max_order + 1)
    ]


def sz_expansion_terms(max_order: int) -> list[ExpansionTerm]:
    """Order m (power t^m) carries odd d on I^xx(m/d) and even d on I^par(m/d)."""
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    return [
        ExpansionTerm(m, tuple((d, "Ixx" if d % 2 else "Idiag", m // d) for d in reversed(divisors(m))))
        for m in range(1, max_order + 1)
    ]


def resummed_coefficients(n: int, kappa: float, truncation: int = 60) -> tuple[float, float, float]:
    """Coefficients of I^xx(n), I^par(n) and I(n) after summing all orders at fixed range n.

    Returned in units of the exact chain: 2 kappa^2 for the first two, 4 kappa^2 for I(n).
    """
    t = math.exp(-kappa)
    xx = par = ino = 0.0
    for term in sz_expansion_terms(truncation * n):
        for c, kind, r in term.terms:
            if r == n:
                if kind == "Ixx":
                    xx += c * t**term.order
                else:
                    par += c * t**term.order
    for term in ino_expansion_terms(truncation * n):
        for c, _, r in term.terms:
            if r == n:
                ino += c * t ** (2 * term.order)
    return 2 * kappa**2 * xx, 2 * kappa**2 * par, 4 * kappa**2 * ino


# ---------------------------------------------------------------------------
# operators from terms


def _term_operator(term: ExpansionTerm, n_sites: int, cache: dict) -> np.ndarray:
    out = np.zeros((2**n_sites, 2**n_sites), dtype=complex)
    for c, kind, r in term.terms:
        key = (kind, r)
        if key not in cache:
            if kind == "I":
                cache[key] = interaction_i(r, n_sites).matrix
            else:
                xx, par = interaction_combos(r, n_sites)
                cache[("Ixx", r)], cache[("Idiag", r)] = xx.matrix, par.matrix
        out += c * cache[key]
    return out


def partial_sums(chain: str, n_sites: int, kappa: float, max_order: int) -> list[float]:
    """r(M) = |H/(c kappa^2) - sum_{m <= M} t^{step m} terms(m)| for M = 0..max_order."""
    lat = LatticeParams(n_sites, kappa)
    t = math.exp(-kappa)
    if chain == "Ino":
        h = ch.inozemtsev(lat) / (4 * kappa**2)
        terms, step = ino_expansion_terms(max_order), 2
    elif chain == "SZprime":
        h = ch.sz_prime(lat) / (2 * kappa**2)
        terms, step = sz_expansion_terms(max_order), 1
    else:
        raise ValueError(f"unknown chain {chain!r}; expected Ino or SZprime")
    cache: dict = {}
    acc = np.zeros_like(h)
    out = [frobenius(h)]
    for term in terms:
        acc = acc + t ** (step * term.order) * _term_operator(term, n_sites, cache)
        out.append(frobenius(h - acc))
    return out


def verify_expansion(chain: str, n_sites: int, kappa: float, max_order: int) -> VerificationReport:
    if kappa < 2:
        raise ValueError("expansion check needs kappa >= 2 so that t = e^-kappa is small")
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    step = 2 if chain == "Ino" else 1
    r = partial_sums(chain, n_sites, kappa, max_order)
    rep = VerificationReport(
        f"expansion {chain}",
        {"chain": chain, "n_sites": n_sites, "kappa": kappa, "max_order": max_order},
        convergence_table=[(float(m), v) for m, v in enumerate(r)],
    )
    expected = math.exp(-kappa * step)
    ratio = r[-1] / r[-2] / expected
    rep.parameters["ratio_over_expected"] = ratio
    rep.add(Residual.below("decreasing", r[-1] - r[-2], 0.0))
    # |log ratio| below log 3 is the factor-3 window
    rep.add(Residual.below("rate (|log ratio|)", abs(math.log(ratio)), math.log(3)))
    return rep


def verify_resummation(kappa: float, n_max: int = 4, truncation: int = 60, tol: float = 1e-10) -> VerificationReport:
    """All orders at fixed range n against V_hyp(n) (cosh(kappa n) I^xx + I^par) and V_hyp(n) I."""
    rep = VerificationReport("resummation", {"kappa": kappa, "truncation": truncation})
    for n in range(1, n_max + 1):
        xx, par, ino = resummed_coefficients(n, kappa, truncation)
        v = ell.potential_hyp(n, kappa).real
        rep.add(Residual.below(f"I^xx({n})", abs(xx - v * math.cosh(kappa * n)), tol))
        rep.add(Residual.below(f"I^par({n})", abs(par - v), tol))
        rep.add(Residual.below(f"I({n})", abs(ino - v), tol))
    return rep


def verify_resummed_operator(n_sites: int, kappa: float, tol: float = 1e-10) -> VerificationReport:
    """Exact chains as sums over all ranges n >= 1 of hyperbolic potentials times I-operators."""
    lat = LatticeParams(n_sites, kappa)
    h_sz = ch.sz_prime(lat)
    h_ino = ch.inozemtsev(lat)
    acc_sz = np.zeros_like(h_sz)
    acc_ino = np.zeros_like(h_ino)
    n = 0
    while True:
        n += 1
        v = ell.potential_hyp(n, kappa)
        if abs(v) * math.cosh(kappa * n) * 2**n_sites < 1e-17:
            break
        xx, par = interaction_combos(n, n_sites)
        acc_sz += v * (math.cosh(kappa * n) * xx.matrix + par.matrix)
        acc_ino += v * interaction_i(n, n_sites).matrix
    rep = VerificationReport("resummed_operator", {"n_sites": n_sites, "kappa": kappa, "ranges": n - 1})
    rep.add(Residual.below("SZ'", frobenius(h_sz - acc_sz), tol))
    rep.add(Residual.below("Inozemtsev", frobenius(h_ino - acc_ino), tol))
    return rep


# ---------------------------------------------------------------------------
# wrapping coefficients

# rows: C_0, C_x, C_y, C_z; columns: V at (u + w_alpha)/2 for alpha = 0, x, y, z
WRAP_MATRIX = np.array([[1, 1, 1, 1], [-1, -1, 1, 1], [-1, 1, -1, 1], [-1, 1, 1, -1]], dtype=float)


@dataclass(frozen=True)
class WrappingCoefficients:
    closed: tuple[complex, complex, complex, complex]
    hyperbolic: tuple[complex, complex, complex, complex]
    series: tuple[complex, complex, complex, complex]

    def max_discrepancy(self) -> float:
        c = np.array(self.closed)
        return float(max(np.abs(c - np.array(self.hyperbolic)).max(), np.abs(c - np.array(self.series)).max()))


def wrapping_closed(u: float, lat: LatticeParams) -> tuple[complex, ...]:
    """C = -1/4 M V((u + w)/2), so that 1/4 V((u+w)/2) . F = C . (-1/2 sigma (x) sigma)."""
    w = lat.half_periods.omega_vec
    v = np.array([ell.potential_v((u + w[a]) / 2, lat) for a in range(4)])
    return tuple(complex(c) for c in -WRAP_MATRIX @ v / 4)


def _reduce(u: float, n: int) -> tuple[float, int]:
    k0, u0 = divmod(u, n)
    if u0 == 0:
        raise ValueError("u is a multiple of N: no pair at that distance")
    return u0, int(k0)


def wrapping_hyperbolic(u: float, lat: LatticeParams, truncation: int) -> tuple[complex, ...]:
    """Image sums over |k| <= truncation of V_hyp(u + kN), with cosh and (-1)^k weights."""
    n, kappa = lat.n_sites, lat.kappa
    u0, _ = _reduce(u, n)
    d = min(u0, n - u0)
    # omitted images lie at distance >= truncation N + d; cosh V_hyp <= 4 kappa^2 e^{-kappa x} there
    tail = 8 * kappa**2 * math.exp(-kappa * (truncation * n + d)) / (1 - math.exp(-kappa * n))
    if tail > WRAP_TAIL_TOL:
        raise ValueError(f"truncation {truncation} too small: tail estimate {tail:.3g}")
    c = [0j] * 4
    for k in range(-truncation, truncation + 1):
        x = u + k * n
        v = ell.potential_hyp(x, kappa)
        ch_ = math.cosh(kappa * x)
        sgn = (-1) ** k
        c[0] -= v
        c[1] += ch_ * v
        c[2] += sgn * ch_ * v
        c[3] += sgn * v
    return tuple(c)


def wrapping_series(u: float, lat: LatticeParams, truncation: int) -> tuple[complex, ...]:
    """Expansion of the image sums in powers of t, each power resummed over k geometrically.

    Uses V_hyp(x) = 4 kappa^2 sum_m m e^{-2 m kappa |x|} and
    cosh(kappa x) V_hyp(x) = 2 kappa^2 sum_m m (e^{-(2m-1) kappa |x|} + e^{-(2m+1) kappa |x|}).
    """
    n, kappa = lat.n_sites, lat.kappa
    u0, k0 = _reduce(u, n)
    d = min(u0, n - u0)
    m_max = truncation
    tail = (
        8 * kappa**2 * (m_max + 1) * math.exp(-(2 * m_max + 1) * kappa * d)
        / ((1 - math.exp(-2 * kappa * d)) ** 2 * (1 - math.exp(-kappa * n)))
    )
    if tail > WRAP_TAIL_TOL:
        raise ValueError(f"truncation {truncation} too small: tail estimate {tail:.3g}")

    def images(c: float, s: int) -> float:
        # sum_k s^k e^{-c |u0 + kN|}
        return (math.exp(-c * u0) + s * math.exp(-c * (n - u0))) / (1 - s * math.exp(-c * n))

    c0 = cz = cx = cy = 0.0
    for m in range(1, m_max + 1):
        c0 -= 4 * kappa**2 * m * images(2 * m * kappa, 1)
        cz += 4 * kappa**2 * m * images(2 * m * kappa, -1)
        cx += 2 * kappa**2 * m * (images((2 * m - 1) * kappa, 1) + images((2 * m + 1) * kappa, 1))
        cy += 2 * kappa**2 * m * (images((2 * m - 1) * kappa, -1) + images((2 * m + 1) * kappa, -1))
    # (-1)^k weights are measured from u, not from u0
    flip = (-1) ** k0
    return complex(c0), complex(cx), complex(flip * cy), complex(flip * cz)


def wrapping_coefficients(u: float, lat: LatticeParams, truncation: int = 40) -> WrappingCoefficients:
    if truncation < 10:
        raise ValueError("truncation must be at least 10")
    _reduce(u, lat.n_sites)
    return WrappingCoefficients(
        wrapping_closed(u, lat), wrapping_hyperbolic(u, lat, truncation), wrapping_series(u, lat, truncation)
    )


def wrapping_operator(lat: LatticeParams) -> np.ndarray:
    """sum_{i<j} C(i-j) . (-1/2 sigma (x) sigma)_{ij}."""
    n = lat.n_sites
    h = np.zeros((2**n, 2**n), dtype=complex)
    for i in range(1, n):
        for j in range(i + 1, n + 1):
            c = wrapping_closed(i - j, lat)
            pair = sum(c[a] * sigma_sq(a) for a in range(4)) * -0.5
            h += embed_two_site(pair, i, j, n)
    return h


def verify_wrapping(lat: LatticeParams, truncation: int = 40, tol: float = 1e-10) -> VerificationReport:
    n = lat.n_sites
    rep = VerificationReport("wrapping", {"n_sites": n, "kappa": lat.kappa, "truncation": truncation})
    for u in range(1, n):
        w = wrapping_coefficients(u, lat, truncation)
        c, hy, se = (np.array(x) for x in (w.closed, w.hyperbolic, w.series))
        rep.add(Residual.below(f"closed vs image sums u={u}", float(np.abs(c - hy).max()), tol))
        rep.add(Residual.below(f"closed vs t-series u={u}", float(np.abs(c - se).max()), tol))
        rep.add(Residual.below(f"C_0 = -V u={u}", abs(c[0] + ell.potential_v(u, lat)), tol))
    res = frobenius(ch.sz_prime(lat) - wrapping_operator(lat))
    rep.add(Residual.below("operator identity", res, tol))
    return rep
