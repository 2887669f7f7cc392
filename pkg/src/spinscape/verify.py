"""Verification harness: operator identities, limit scans and report output.

Every check returns a VerificationReport. Limit targets are always built by
their own direct constructors, never by evaluating the deformed chain at an
extreme parameter.
"""

from __future__ import annotations

import cmath
import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import eigvalsh

from . import chains as ch
from . import elliptic as ell
from . import rmatrix as rm
from .elliptic import DeformedPotentialParams, LatticeParams
from .rmatrix import RMatrixParams
from .spin import (
    f_alpha,
    frobenius,
    relative_commutator_residual,
    spectrum,
    spectrum_distance,
    u_tensor,
)

IDENTITY_TOL = 1e-9
R_LEVEL_TOL = 1e-10
MONOTONE_SLACK = 1e-12
ORACLE_FLOOR = 1e-13


# ---------------------------------------------------------------------------
# reports


@dataclass
class Residual:
    label: str
    value: float
    tolerance: float
    passed: bool

    @classmethod
    def below(cls, label: str, value: float, tolerance: float) -> Residual:
        value = float(value)
        return cls(label, value, float(tolerance), bool(value < tolerance))

    @classmethod
    def above(cls, label: str, value: float, threshold: float) -> Residual:
        """A residual that must exceed its threshold (for gaps that are supposed to be open)."""
        value = float(value)
        return cls(label, value, float(threshold), bool(value > threshold))


@dataclass
class VerificationReport:
    name: str
    parameters: dict = field(default_factory=dict)
    residuals: list[Residual] = field(default_factory=list)
    convergence_table: list[tuple[float, float]] | None = None

    @property
    def verdict(self) -> bool:
        return all(r.passed for r in self.residuals)

    def add(self, r: Residual) -> Residual:
        self.residuals.append(r)
        return r

    def extend(self, other: VerificationReport, prefix: str = "") -> None:
        for r in other.residuals:
            self.residuals.append(replace(r, label=prefix + r.label))

    def worst(self) -> float:
        return max((r.value for r in self.residuals), default=0.0)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "parameters": {k: self.parameters[k] for k in sorted(self.parameters)},
            "residuals": [
                {"label": r.label, "value": r.value, "tolerance": r.tolerance, "pass": r.passed}
                for r in self.residuals
            ],
        }
        if self.convergence_table is not None:
            out["convergence_table"] = [{"param": p, "residual": r} for p, r in self.convergence_table]
        out["verdict"] = self.verdict
        return out

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def table_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["parameter", "residual"])
        for p, r in self.convergence_table or []:
            w.writerow([_csv_number(p), _csv_number(r)])
        return buf.getvalue()


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        # JSON has no literal for these
        return json.dumps(str(x))
    return format(x, ".17g")


def _encode(obj) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return "{" + f'"re": {_fmt_float(obj.real)}, "im": {_fmt_float(obj.imag)}' + "}"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON text with floats at 17 significant digits and insertion-ordered keys."""
    return _encode(obj) + "\n"


def _csv_number(x) -> str:
    if isinstance(x, complex) or isinstance(x, np.complexfloating):
        return repr(complex(x))
    return repr(float(x))


def _params(**kw) -> dict:
    out = {}
    for k, v in kw.items():
        if isinstance(v, LatticeParams):
            out["n_sites"], out["kappa"] = v.n_sites, v.kappa
        elif v is not None:
            out[k] = v
    return out


# ---------------------------------------------------------------------------
# special functions


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def verify_special_functions(
    n_grid=range(2, 9), kappa_grid=(0.25, 1.0, 4.0), points: int = 20, seed: int = 3, tol: float = 1e-11
) -> VerificationReport:
    """Quasiperiodicity, parity, Jacobi imaginary transform, Legendre relation and
    phi(u,v) phi(u,-v) = wp(u) - wp(v), all relative, at random points of the period cell."""
    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(("quasiperiod N", "quasiperiod omega", "parity", "imaginary transform", "phi phi"), 0.0)
    legendre = 0.0
    for n in n_grid:
        for kappa in kappa_grid:
            lat = LatticeParams(n, kappa)
            om = lat.omega
            c1, c1s = ell.lattice_constants(lat)
            legendre = max(legendre, abs(om * (n * c1s) - n * (om * c1) - 2j * math.pi) / (2 * math.pi))
            for _ in range(points):
                u = complex(rng.uniform(-n / 2, n / 2), rng.uniform(-0.5, 0.5) * om.imag)
                v = complex(rng.uniform(-n / 2, n / 2), rng.uniform(-0.5, 0.5) * om.imag)
                if min(abs(u), abs(v), abs(u - v), abs(u + v)) < 0.05:
                    continue
                th = ell.theta(u, lat)
                w = worst
                w["quasiperiod N"] = max(w["quasiperiod N"], _rel(ell.theta(u + n, lat), -cmath.exp(kappa * (2 * u + n)) * th))
                w["quasiperiod omega"] = max(w["quasiperiod omega"], _rel(ell.theta(u + om, lat), -th))
                w["parity"] = max(
                    w["parity"],
                    _rel(ell.theta(-u, lat), -th),
                    _rel(ell.rho(-u, lat), -ell.rho(u, lat)),
                    _rel(ell.potential_v(-u, lat), ell.potential_v(u, lat)),
                    _rel(ell.weierstrass_p(-u, lat), ell.weierstrass_p(u, lat)),
                )
                w["imaginary transform"] = max(
                    w["imaginary transform"], _rel(th, cmath.exp(kappa * u * u / n) * ell.theta_s(u, lat))
                )
                pu, pv = ell.weierstrass_p(u, lat), ell.weierstrass_p(v, lat)
                lhs = ell.kronecker_phi(u, v, lat) * ell.kronecker_phi(u, -v, lat)
                w["phi phi"] = max(w["phi phi"], abs(lhs - (pu - pv)) / max(abs(pu), abs(pv)))
    rep = VerificationReport(
        "special_functions",
        {"n_sites": list(n_grid), "kappa": list(kappa_grid), "points": points, "seed": seed},
    )
    for k, val in worst.items():
        rep.add(Residual.below(k, val, tol))
    rep.add(Residual.below("Legendre relation", legendre, tol))
    return rep


# ---------------------------------------------------------------------------
# nearest-neighbour decomposition


def _decomposition_residual(u: complex, p: RMatrixParams) -> float:
    lhs = rm.r8v_braid(-u, p) @ rm.r8v_braid_derivative(u, p)
    lat = p.lattice
    dp = DeformedPotentialParams(complex(p.eta) / 2, lat)
    w = lat.half_periods.omega_vec
    rhs = sum(ell.deformed_potential((u + w[a]) / 2, dp) / 4 * f_alpha(a) for a in range(4))
    return frobenius(lhs - rhs)


def verify_decomposition(
    p: RMatrixParams, u_grid, tol: float = IDENTITY_TOL, oracle: bool = False
) -> VerificationReport:
    """R(-u) R'(u) against sum_alpha 1/4 V((u + w_alpha)/2; eta/2) F^alpha on each grid point.

    With oracle=True each residual is recomputed with the arbitrary-precision
    theta underneath and must agree within 10x (floor ORACLE_FLOOR).
    """
    rep = VerificationReport("decomposition", _params(lattice=p.lattice, eta=complex(p.eta)))
    p_oracle = RMatrixParams(p.lattice.with_oracle(), p.eta) if oracle else None
    for u in u_grid:
        u = complex(u)
        res = _decomposition_residual(u, p)
        rep.add(Residual.below(f"u={_label(u)}", res, tol))
        if oracle:
            res_mp = _decomposition_residual(u, p_oracle)
            rep.add(Residual.below(f"oracle u={_label(u)}", res_mp, 10 * max(res, ORACLE_FLOOR)))
    return rep


def _label(z: complex) -> str:
    z = complex(z)
    return f"{z.real:g}" if z.imag == 0 else f"{z.real:g}{z.imag:+g}i"


# ---------------------------------------------------------------------------
# face side: potential and the limits of E


def verify_dynamical_decomposition(
    p: RMatrixParams,
    a: complex,
    u_grid,
    gamma: float = 0.2,
    gamma_prime: float = 0.2,
    trig_points=((1e-5, -10j),),
    nn_kappa: float = 8.0,
    tol: float = 1e-3,
) -> VerificationReport:
    """Checks around R(-u, a) R'(u, a) = theta(eta) V(u; eta) E(u, a).

    - the aligned-state entries of the product vanish for every a;
    - E is weight preserving and its trace does not depend on a, so the split
      into potential and E is a-independent;
    - the trigonometric limit eta = N gamma, kappa -> 0 then a -> -i inf gives
      the Temperley-Lieb generator e(gamma) (trig_points are (kappa, a) pairs
      along that iterated limit);
    - the short-range limit eta = omega gamma', kappa large gives E(a; gamma')
      for the bulk distance u = +-1.
    """
    lat = p.lattice
    n = lat.n_sites
    rep = VerificationReport("dynamical_decomposition", _params(lattice=lat, eta=complex(p.eta), a=complex(a)))
    for u in u_grid:
        u = complex(u)
        e1 = rm.e_dynamical(u, a, p)
        e2 = rm.e_dynamical(u, complex(a) + 0.37, p)
        # V is a-independent: the (uu, uu) and (dd, dd) entries of R(-u,a)R'(u,a) vanish for every a
        prod2 = rm.r_dynamical(-u, complex(a) + 0.37, p) @ rm.r_dynamical_derivative(u, complex(a) + 0.37, p)
        rep.add(Residual.below(f"aligned entries vanish u={_label(u)}", abs(prod2[0, 0]) + abs(prod2[3, 3]), 1e-12))
        leak = np.abs(e1[[0, 0, 3, 3], [1, 2, 1, 2]]).sum() + np.abs(e1[[1, 2, 1, 2], [0, 0, 3, 3]]).sum()
        rep.add(Residual.below(f"weight preserving u={_label(u)}", leak + abs(e2[0, 3]) + abs(e2[3, 0]), 1e-12))
        # the scalar split off is a-independent: the remaining trace does not move with a
        rep.add(Residual.below(f"trace a-independent u={_label(u)}", abs(np.trace(e1) - np.trace(e2)), 1e-12))
    for kappa, a_tl in trig_points:
        pt = RMatrixParams(LatticeParams(n, kappa), n * gamma)
        res = frobenius(rm.e_dynamical(0.6, a_tl, pt) - rm.e_tl(gamma))
        rep.add(Residual.below(f"E -> e(gamma) kappa={kappa:g} a={_label(a_tl)}", res, tol))
    lat_nn = LatticeParams(n, nn_kappa)
    pn = RMatrixParams(lat_nn, lat_nn.omega * gamma_prime)
    a_nn = complex(a).real if complex(a).imag == 0 else 1.7
    for u in (1.0, -1.0):
        res = frobenius(rm.e_dynamical(u, a_nn, pn) - rm.e_nn(a_nn, gamma_prime))
        rep.add(Residual.below(f"E -> E(a;gamma') kappa={nn_kappa:g} u={u:g}", res, tol))
    return rep


# ---------------------------------------------------------------------------
# limit scans

PATHS = ("kappa_to_zero", "kappa_to_infinity", "eta_to_zero", "gamma_to_zero", "a_to_minus_i_infinity")
COUPLINGS = ("fixed", "eta=N*gamma", "eta=omega*gamma_prime")


@dataclass(frozen=True)
class LimitScanSpec:
    chain: ch.ChainSpec
    path: str
    grid: tuple
    target: ch.ChainSpec
    coupling_rule: str = "fixed"
    coupling_value: float | None = None
    tolerance: float | None = 1e-3
    # compare against U^N H_target U^-N
    target_rotation: bool = False
    # if set, also require log-log slope of the residual against the path parameter
    expected_order: float | None = None
    name: str = "limit_scan"

    def validate(self) -> None:
        if self.path not in PATHS:
            raise ValueError(f"unknown path {self.path!r}")
        if self.coupling_rule not in COUPLINGS:
            raise ValueError(f"unknown coupling rule {self.coupling_rule!r}")
        if self.coupling_rule != "fixed" and self.coupling_value is None:
            raise ValueError(f"coupling rule {self.coupling_rule} needs coupling_value")
        if len(self.grid) < 2:
            raise ValueError("grid needs at least two points")
        keys = [_path_key(self.path, g) for g in self.grid]
        if any(b <= a for a, b in zip(keys, keys[1:])):
            raise ValueError(f"grid is not monotone along {self.path}")

    def point(self, value) -> ch.ChainSpec:
        spec = self.chain
        n = spec.sites
        if self.path.startswith("kappa"):
            lat = LatticeParams(n, float(value))
            spec = replace(spec, lattice=lat)
        elif self.path == "eta_to_zero":
            spec = replace(spec, eta=value)
        elif self.path == "gamma_to_zero":
            spec = replace(spec, gamma=float(value))
        else:
            spec = replace(spec, a=complex(value))
        if self.coupling_rule == "eta=N*gamma":
            spec = replace(spec, eta=complex(n * self.coupling_value))
        elif self.coupling_rule == "eta=omega*gamma_prime":
            spec = replace(spec, eta=spec.lattice.omega * self.coupling_value)
        return spec


def _path_key(path: str, value) -> float:
    """Position along the path; must increase towards the limit."""
    if path == "kappa_to_zero" or path == "gamma_to_zero":
        return -float(value)
    if path == "kappa_to_infinity":
        return float(value)
    if path == "eta_to_zero":
        return -abs(complex(value))
    return -complex(value).imag


def _path_distance(path: str, value) -> float:
    """Distance to the limit point, used for the rate fit."""
    if path == "kappa_to_infinity":
        return math.exp(-float(value))
    if path == "a_to_minus_i_infinity":
        return 1 / abs(complex(value))
    return abs(complex(value))


def limit_scan(spec: LimitScanSpec, workers: int = 1) -> VerificationReport:
    spec.validate()
    target = ch.build_hamiltonian(spec.target).matrix
    if spec.target_rotation:
        u = u_tensor(spec.target.sites)
        target = u @ target @ u.conj().T

    def residual(value) -> float:
        return frobenius(ch.build_hamiltonian(spec.point(value)).matrix - target)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            values = list(pool.map(residual, spec.grid))
    else:
        values = [residual(g) for g in spec.grid]
    grid_out = [complex(g) if isinstance(g, complex) else float(g) for g in spec.grid]
    rep = VerificationReport(
        spec.name,
        {
            "chain": spec.chain.family,
            "target": spec.target.family,
            "path": spec.path,
            "coupling_rule": spec.coupling_rule,
            "n_sites": spec.chain.sites,
        },
        convergence_table=list(zip(grid_out, values)),
    )
    if spec.coupling_value is not None:
        rep.parameters["coupling_value"] = spec.coupling_value
    bad = [b - a for a, b in zip(values, values[1:]) if b > a]
    # a single inversion at the noise floor is tolerated
    ok = not bad or (len(bad) == 1 and bad[0] < MONOTONE_SLACK)
    rep.add(Residual("monotone (largest increase)", max(bad, default=0.0), MONOTONE_SLACK, ok))
    if spec.tolerance is not None:
        rep.add(Residual.below("endpoint", values[-1], spec.tolerance))
    if spec.expected_order is not None:
        slope = fitted_order([_path_distance(spec.path, g) for g in spec.grid], values)
        rep.parameters["fitted_order"] = slope
        rep.add(Residual.below("order deviation", abs(slope - spec.expected_order), 0.25))
    return rep


def fitted_order(distance, residual) -> float:
    x = np.log(np.asarray(distance, dtype=float))
    y = np.log(np.asarray(residual, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def standard_scans(n_sites: int = 4) -> dict[str, LimitScanSpec]:
    """The limit directions of both landscapes with their endpoint tolerances."""
    lat1 = LatticeParams(n_sites, 1.0)
    lat3 = LatticeParams(3, 1.0)
    n = n_sites
    return {
        "sz-xx": LimitScanSpec(
            ch.ChainSpec("SZprime", lattice=lat1, normalize=True),
            "kappa_to_infinity",
            (6.0, 8.0, 10.0, 12.0),
            ch.ChainSpec("XXantiperiodic", n_sites=n),
            tolerance=1e-4,
            name="SZ'->XX'",
        ),
        "sz-fk": LimitScanSpec(
            ch.ChainSpec("SZprime", lattice=lat1, normalize=True),
            "kappa_to_zero",
            (0.4, 0.2, 0.1, 0.05),
            ch.ChainSpec("FKrotated", n_sites=n),
            tolerance=1e-3,
            name="SZ'->FK'",
        ),
        "mz-trig": LimitScanSpec(
            ch.ChainSpec("MZprimeL", lattice=lat1, eta=0.8, normalize=True),
            "kappa_to_zero",
            (0.4, 0.2, 0.1, 0.05),
            ch.ChainSpec("TrigMZ_L", n_sites=n, gamma=0.2, normalize=True),
            coupling_rule="eta=N*gamma",
            coupling_value=0.2,
            tolerance=1e-3,
            target_rotation=True,
            name="MZ'->trig MZ (rotated)",
        ),
        "mz-nn": LimitScanSpec(
            ch.ChainSpec("MZprimeL", lattice=lat1, eta=0.2j, normalize=True),
            "kappa_to_infinity",
            (6.0, 8.0, 10.0, 12.0),
            ch.ChainSpec("NNMZprime", n_sites=n, gamma_prime=0.2),
            coupling_rule="eta=omega*gamma_prime",
            coupling_value=0.2,
            tolerance=1e-4,
            name="MZ'->NN MZ'",
        ),
        "mz-sz": LimitScanSpec(
            ch.ChainSpec("MZprimeL", lattice=lat3, eta=0.1, normalize=True),
            "eta_to_zero",
            (0.1, 0.03, 0.01, 0.003),
            ch.ChainSpec("SZprime", lattice=lat3, normalize=True),
            tolerance=None,
            expected_order=1.0,
            name="MZ'->SZ'",
        ),
        "trig-fk": LimitScanSpec(
            ch.ChainSpec("TrigMZ_L", n_sites=n, gamma=0.1, normalize=True),
            "gamma_to_zero",
            (0.1, 0.03, 0.01, 0.003),
            ch.ChainSpec("FK", n_sites=n),
            tolerance=None,
            expected_order=1.0,
            name="trig MZ->FK",
        ),
        "qino-ino": LimitScanSpec(
            ch.ChainSpec("QInoL", lattice=lat1, eta=0.1, a=-50j, normalize=True),
            "eta_to_zero",
            (0.1, 0.03, 0.01, 0.003, 0.001),
            ch.ChainSpec("Inozemtsev", lattice=lat1, normalize=True),
            tolerance=1e-3,
            name="qIno->Ino",
        ),
    }


def macroscopic_potential_check(kappa: float = 1.0, u: float = 1.3, n_grid=(4, 6, 8, 10)) -> VerificationReport:
    """V(u) -> kappa^2 / sinh^2(kappa u) as N grows, at the scalar level only."""
    target = ell.potential_hyp(u, kappa)
    table = [(float(n), abs(ell.potential_v(u, LatticeParams(n, kappa)) - target)) for n in n_grid]
    rep = VerificationReport("macroscopic_potential", {"kappa": kappa, "u": u}, convergence_table=table)
    vals = [r for _, r in table]
    rep.add(Residual.below("monotone (largest increase)", max([0.0] + [b - a for a, b in zip(vals, vals[1:])]), MONOTONE_SLACK))
    # the leading correction is the image at distance N - u: 2 kappa^2 e^{-2 kappa (N - u)} x 2
    n_last = n_grid[-1]
    rep.add(Residual.below("endpoint", vals[-1], 10 * kappa**2 * math.exp(-2 * kappa * (n_last - abs(u)))))
    return rep


# ---------------------------------------------------------------------------
# relation to the original-convention chain


def mz_original(p: RMatrixParams, chirality: str) -> np.ndarray:
    """Chiral hamiltonian in the product form built from the companion R-matrix."""
    n = p.lattice.n_sites
    r = {}

    def braid(u):
        if u not in r:
            r[u] = rm.r8v_s_braid(u, p)
        return r[u]

    def middle(i, j):
        return braid(j - i) @ rm.r8v_s_braid_derivative(i - j, p)

    return ch._chiral(n, middle, lambda u, k: braid(u), chirality)


def verify_mz_relation(
    p: RMatrixParams, n_sites: int | None = None, points: int = 10, seed: int = 7, tol: float = IDENTITY_TOL
) -> VerificationReport:
    lat = p.lattice
    n = n_sites or lat.n_sites
    if n != lat.n_sites:
        raise ValueError("n_sites disagrees with the lattice")
    if n > 6:
        raise ValueError("the relation check is limited to 6 sites")
    eta = complex(p.eta)
    rep = VerificationReport("mz_relation", _params(lattice=lat, eta=eta))
    shift = (n - 1) * lat.kappa * eta / 2
    u = u_tensor(n)
    for c in "LR":
        h_orig = mz_original(p, c)
        h_prime = ch.mz_prime_product(p, c)
        res = frobenius(h_orig - u @ h_prime @ u.conj().T - shift * np.eye(2**n))
        rep.add(Residual.below(f"operator relation {c}", res, tol))
    # pointwise shift of the pair potential 1/4 V(u; eta/2)
    rng = np.random.default_rng(seed)
    dp = DeformedPotentialParams(eta / 2, lat)
    expected = lat.kappa * eta / (2 * n)
    worst = 0.0
    for _ in range(points):
        z = complex(rng.uniform(0.2, n - 0.2), rng.uniform(-0.3, 0.3))
        diff = (ell.deformed_potential(z, dp, sans_serif=True) - ell.deformed_potential(z, dp)) / 4
        worst = max(worst, abs(diff - expected))
    rep.add(Residual.below("pair potential shift", worst, min(tol, 1e-11)))
    return rep


# ---------------------------------------------------------------------------
# face-vertex obstruction


def _d_phi_second(u, v, a, p, h: float = 1e-3) -> np.ndarray:
    """d/dv of fv_phi(u, v, a), same stencil as rmatrix.fv_phi_derivative_u."""
    c = (4 / 5, -1 / 5, 4 / 105, -1 / 280)
    out = np.zeros((4, 4), dtype=complex)
    for k, ck in enumerate(c, start=1):
        out += ck * (rm.fv_phi(u, v + k * h, a, p) - rm.fv_phi(u, v - k * h, a, p))
    return out / h


def fv_obstruction_terms(p: RMatrixParams, a: complex, u: complex, v: complex) -> dict[str, np.ndarray]:
    """The pieces of R(v-u) R'(u-v) rewritten through the face-vertex map."""
    u, v, a = complex(u), complex(v), complex(a)
    for x in (v - u, u - v):
        # R-check(x) carries 1/theta(x + eta)
        if abs(ell.theta(x + p.eta, p.lattice)) < ell.POLE_GUARD:
            raise ell.PoleProximityError(f"R-matrix pole: argument {_label(x)} equals -eta")
    phi_uv = rm.fv_phi(u, v, a, p)
    phi_vu = rm.fv_phi(v, u, a, p)
    phi_uv_inv = np.linalg.inv(phi_uv)
    phi_vu_inv = np.linalg.inv(phi_vu)
    rd_m = rm.r_dynamical(v - u, a, p)
    rd_p = rm.r_dynamical(u - v, a, p)
    rd_dp = rm.r_dynamical_derivative(u - v, a, p)
    # d/du Phi(v, u): derivative in the second slot; d/du Phi(u, v)^{-1} = -Phi^{-1} dPhi Phi^{-1}
    d_phi_vu = _d_phi_second(v, u, a, p)
    d_phi_uv = rm.fv_phi_derivative_u(u, v, a, p)
    d_phi_uv_inv = -phi_uv_inv @ d_phi_uv @ phi_uv_inv
    return {
        "lhs": rm.r8v_braid(v - u, p) @ rm.r8v_braid_derivative(u - v, p),
        "naive": phi_uv @ rd_m @ rd_dp @ phi_uv_inv,
        "second": phi_uv @ rd_m @ phi_vu_inv @ d_phi_vu @ rd_p @ phi_uv_inv,
        "third": phi_uv @ d_phi_uv_inv,
    }


def fv_obstruction_demo(
    p: RMatrixParams, a: complex, u: complex, v: complex, tol: float = IDENTITY_TOL, gap: float = 1e-3
) -> VerificationReport:
    t = fv_obstruction_terms(p, a, u, v)
    rep = VerificationReport(
        "fv_obstruction", _params(lattice=p.lattice, eta=complex(p.eta), a=complex(a), u=complex(u), v=complex(v))
    )
    full = t["naive"] + t["second"] + t["third"]
    rep.add(Residual.below("three-term identity", frobenius(full - t["lhs"]), tol))
    rep.add(Residual.above("naive transform gap", frobenius(t["naive"] - t["lhs"]), gap))
    rep.parameters["norm_second_term"] = frobenius(t["second"])
    rep.parameters["norm_third_term"] = frobenius(t["third"])
    return rep


# ---------------------------------------------------------------------------
# R-matrix and chain suites


RMATRIX_CHECKS = ("ybe", "unitarity", "dybe", "fv")


def verify_rmatrix_suite(
    draws: int = 20,
    seed: int = 11,
    n_sites: int = 4,
    kappa: float = 1.0,
    eta: float = 0.3,
    tol: float = R_LEVEL_TOL,
    checks: tuple[str, ...] = RMATRIX_CHECKS,
) -> VerificationReport:
    """YBE / DYBE / unitarity / face-vertex on random draws for every family."""
    unknown = set(checks) - set(RMATRIX_CHECKS)
    if unknown:
        raise ValueError(f"unknown checks {sorted(unknown)}")
    rng = np.random.default_rng(seed)
    lat = LatticeParams(n_sites, kappa)
    p = RMatrixParams(lat, eta)
    gamma = 0.2
    families = {
        "8v": lambda x: rm.r8v_braid(x, p),
        "8v companion": lambda x: rm.r8v_s_braid(x, p),
        "6v": lambda x: rm.r6v_braid(x, gamma, n_sites),
        "trig 8v": lambda x: rm.r_tri8v_braid(x, gamma, n_sites),
        "hyp": lambda x: rm.r_hyp_braid(x, eta, kappa),
        "a6v": lambda x: rm.r_a6v(x, gamma, n_sites),
    }
    rep = VerificationReport("rmatrix", _params(lattice=lat, eta=eta, draws=draws))
    worst = {k: [0.0, 0.0] for k in families}
    worst_dyn = [0.0, 0.0, 0.0]
    for _ in range(draws):
        x, y = rng.uniform(-1.5, 1.5, 2) + 1j * rng.uniform(-0.3, 0.3, 2)
        a = complex(rng.uniform(0.5, 2.5), rng.uniform(-0.3, 0.3))
        for name, f in families.items():
            worst[name][0] = max(worst[name][0], rm.check_ybe(f, x, y))
            worst[name][1] = max(worst[name][1], rm.check_unitarity(f, x))
        worst_dyn[0] = max(worst_dyn[0], rm.check_dybe(lambda s, b: rm.r_dynamical(s, b, p), x, y, a))
        worst_dyn[1] = max(worst_dyn[1], rm.check_unitarity(lambda s: rm.r_dynamical(s, a, p), x))
        worst_dyn[2] = max(worst_dyn[2], rm.check_fv(x, y, a, p))
    for name, (ybe, unit) in worst.items():
        if "ybe" in checks:
            rep.add(Residual.below(f"YBE {name}", ybe, tol))
        if "unitarity" in checks:
            rep.add(Residual.below(f"unitarity {name}", unit, tol))
    if "dybe" in checks:
        rep.add(Residual.below("DYBE", worst_dyn[0], tol))
    if "unitarity" in checks:
        rep.add(Residual.below("unitarity dynamical", worst_dyn[1], tol))
    if "fv" in checks:
        rep.add(Residual.below("face-vertex", worst_dyn[2], tol))
    return rep


COMMUTING_FAMILIES = ("mz-prime", "sz-prime", "qino", "fk", "trig-mz")


def verify_commutativity(
    family: str,
    n_sites: int,
    kappa: float | None = None,
    eta: complex | None = None,
    a: complex | None = None,
    gamma: float | None = None,
    tol: float = IDENTITY_TOL,
) -> VerificationReport:
    n = n_sites
    rep = VerificationReport(
        f"commutativity {family}", _params(n_sites=n, kappa=kappa, eta=eta, a=a, gamma=gamma)
    )
    rel = relative_commutator_residual
    if family == "mz-prime":
        lat = LatticeParams(n, kappa)
        hl = ch.build_hamiltonian(ch.ChainSpec("MZprimeL", lattice=lat, eta=eta)).matrix
        hr = ch.build_hamiltonian(ch.ChainSpec("MZprimeR", lattice=lat, eta=eta)).matrix
        g = ch.build_translation(ch.TranslationSpec("GMZprime", lattice=lat, eta=eta)).matrix
        rep.add(Residual.below("[HL, HR]", rel(hl, hr), tol))
        rep.add(Residual.below("[HL, G]", rel(hl, g), tol))
        rep.add(Residual.below("[HR, G]", rel(hr, g), tol))
        flip = ch.global_flip(n)
        rep.add(Residual.below("G^N - prod sigma^x", frobenius(np.linalg.matrix_power(g, n) - flip), 1e-10))
    elif family == "sz-prime":
        lat = LatticeParams(n, kappa)
        h = ch.build_hamiltonian(ch.ChainSpec("SZprime", lattice=lat)).matrix
        g = ch.build_translation(ch.TranslationSpec("GSZprime", n_sites=n)).matrix
        rep.add(Residual.below("[H, G]", rel(h, g), tol))
        rep.add(Residual.below("[H, flip]", rel(h, ch.global_flip(n)), tol))
    elif family == "qino":
        lat = LatticeParams(n, kappa)
        hl = ch.build_hamiltonian(ch.ChainSpec("QInoL", lattice=lat, eta=eta, a=a)).matrix
        hr = ch.build_hamiltonian(ch.ChainSpec("QInoR", lattice=lat, eta=eta, a=a)).matrix
        g = ch.build_translation(ch.TranslationSpec("GQIno", lattice=lat, eta=eta, a=a)).matrix
        sz = ch.total_sz(n)
        rep.add(Residual.below("[HL, HR]", rel(hl, hr), tol))
        for name, h in (("HL", hl), ("HR", hr)):
            rep.add(Residual.below(f"[{name}, G]", rel(h, g), tol))
            rep.add(Residual.below(f"[{name}, Sz]", rel(h, sz), tol))
    elif family == "fk":
        h = ch.build_hamiltonian(ch.ChainSpec("FK", n_sites=n)).matrix
        g = ch.build_translation(ch.TranslationSpec("GFK", n_sites=n)).matrix
        rep.add(Residual.below("[H, G]", rel(h, g), tol))
        rep.add(Residual.below("[H, Sz]", rel(h, ch.total_sz(n)), tol))
    elif family == "trig-mz":
        hl = ch.build_hamiltonian(ch.ChainSpec("TrigMZ_L", n_sites=n, gamma=gamma)).matrix
        hr = ch.build_hamiltonian(ch.ChainSpec("TrigMZ_R", n_sites=n, gamma=gamma)).matrix
        g = ch.build_translation(ch.TranslationSpec("GTriMZ", n_sites=n, gamma=gamma)).matrix
        rep.add(Residual.below("[HL, HR]", rel(hl, hr), tol))
        rep.add(Residual.below("[HL, G]", rel(hl, g), tol))
        rep.add(Residual.below("[HR, G]", rel(hr, g), tol))
    else:
        raise ValueError(f"unknown family {family!r}; expected one of {COMMUTING_FAMILIES}")
    return rep


def verify_form_equivalence(p: RMatrixParams, tol: float = 1e-10) -> VerificationReport:
    rep = VerificationReport("form_equivalence", _params(lattice=p.lattice, eta=complex(p.eta)))
    for c in "LR":
        res = frobenius(ch.mz_prime_product(p, c) - ch.mz_prime_decomposed(p, c))
        rep.add(Residual.below(f"product vs decomposed {c}", res, tol))
    return rep


def verify_xyz(p: RMatrixParams, n_sites: int, tol: float = 1e-9) -> VerificationReport:
    rep = VerificationReport("xyz", _params(lattice=p.lattice, eta=complex(p.eta)))
    gam, delta, res = ch.xyz_anisotropy_check(p, n_sites)
    rep.parameters["Gamma"], rep.parameters["Delta"] = gam, delta
    rep.add(Residual.below("(Gamma, Delta) vs (dn, cn)", res, tol))
    h = ch.xyz_from_transfer(p, n_sites).matrix
    rep.add(Residual.below("log-derivative vs local chain", frobenius(h - ch.heisenberg_xyz(p)), tol))
    t1 = ch.transfer_matrix(0.31, p, n_sites).matrix
    t2 = ch.transfer_matrix(-0.57 + 0.1j, p, n_sites).matrix
    rep.add(Residual.below("[t(u), t(v)]", frobenius(t1 @ t2 - t2 @ t1), 1e-10))
    return rep


# ---------------------------------------------------------------------------
# free-fermion oracle for the antiperiodic xx chain


def pfaffian(a: np.ndarray) -> float:
    """Pfaffian of a real antisymmetric matrix by Gaussian elimination with pivoting."""
    a = np.array(a, dtype=float)
    m = a.shape[0]
    if m % 2:
        return 0.0
    pf = 1.0
    for k in range(0, m - 1, 2):
        piv = k + 1 + int(np.argmax(np.abs(a[k, k + 1 :])))
        if piv != k + 1:
            a[[k + 1, piv]] = a[[piv, k + 1]]
            a[:, [k + 1, piv]] = a[:, [piv, k + 1]]
            pf = -pf
        if a[k, k + 1] == 0:
            return 0.0
        pf *= a[k, k + 1]
        if k + 2 < m:
            tau = a[k, k + 2 :] / a[k, k + 1]
            # column/row j -= tau_j column/row k+1 clears row k beyond k+1 and keeps Pf
            a[k + 2 :, k + 2 :] += np.outer(a[k + 1, k + 2 :], tau) - np.outer(tau, a[k + 1, k + 2 :])
    return pf


def _majorana(kind: str, j: int, n: int) -> np.ndarray:
    """Coefficient vector of c_j or c_j^dagger on gamma_1..gamma_2n (j is 1-based)."""
    v = np.zeros(2 * n, dtype=complex)
    v[2 * j - 2] = 0.5
    v[2 * j - 1] = 0.5j if kind == "c" else -0.5j
    return v


def _quadratic(terms, n: int) -> tuple[np.ndarray, complex]:
    """Sum of coef * x y for fermion-linear x, y as (i/4) gamma^T A gamma + const."""
    k = np.zeros((2 * n, 2 * n), dtype=complex)
    const = 0j
    for coef, x, y in terms:
        k += coef * 0.5 * (np.outer(x, y) - np.outer(y, x))
        const += coef * np.dot(x, y)
    a = -4j * k
    if np.abs(a.imag).max() > 1e-12:
        raise ValueError("quadratic form is not hermitian")
    return a.real, const


def xx_free_fermion_spectrum(n: int) -> np.ndarray:
    """Spectrum of sum_i F^xx_{i,i+1} + sigma^x_1 F^xx_{N,1} sigma^x_1 from Jordan-Wigner fermions.

    With n_j = (1 + sigma^z_j)/2 and c_j = prod_{l<j}(-sigma^z_l) sigma^-_j the bulk
    bonds are -(c_i^+ c_{i+1} + h.c.) and the twisted boundary bond becomes
    P (c_N^+ c_1^+ - c_N c_1) with P the fermion parity. In each parity sector the
    quadratic form is diagonalised through its Majorana matrix A; a many-body level
    sum_k b_k (n_k - 1/2) + const has parity sgn Pf(A) (-1)^{sum n_k}.
    """
    levels = []
    for parity in (1, -1):
        terms = []
        for i in range(1, n):
            terms.append((-1.0, _majorana("cd", i, n), _majorana("c", i + 1, n)))
            terms.append((-1.0, _majorana("cd", i + 1, n), _majorana("c", i, n)))
        terms.append((parity, _majorana("cd", n, n), _majorana("cd", 1, n)))
        terms.append((-parity, _majorana("c", n, n), _majorana("c", 1, n)))
        a, const = _quadratic(terms, n)
        # eigenvalues of i A come in pairs +-b_k
        b = np.sort(eigvalsh(1j * a))[n:]
        pf = pfaffian(a)
        sign = 1.0 if pf >= 0 else -1.0
        for occ in range(2**n):
            bits = [(occ >> k) & 1 for k in range(n)]
            if sign * (-1) ** sum(bits) != parity:
                continue
            levels.append(const.real + sum(bk * (nk - 0.5) for bk, nk in zip(b, bits)))
    return np.sort(np.array(levels))


def verify_xx_spectrum(n: int, tol: float = 1e-10) -> VerificationReport:
    h = ch.build_hamiltonian(ch.ChainSpec("XXantiperiodic", n_sites=n)).matrix
    exact = spectrum(h)
    oracle = xx_free_fermion_spectrum(n)
    rep = VerificationReport("xx_spectrum", {"n_sites": n})
    rep.add(Residual.below("max eigenvalue mismatch", spectrum_distance(exact, oracle.astype(complex)), tol))
    return rep
