"""Command-line entry point: build operators, run checks and scans, print expansions.

Exit codes: 0 success, 1 failed verification or numerical error, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, replace

from . import chains as ch
from . import elliptic as ell
from . import series as se
from . import verify as vf
from .elliptic import DeformedPotentialParams, EllipticError, LatticeParams
from .rmatrix import RMatrixParams

EXIT_OK, EXIT_FAILED, EXIT_INVALID = 0, 1, 2

CHAIN_ALIASES = {
    "mz-prime-l": "MZprimeL",
    "mz-prime-r": "MZprimeR",
    "mz-prime-decomp-l": "MZprimeDecompL",
    "mz-prime-decomp-r": "MZprimeDecompR",
    "sz-prime": "SZprime",
    "fk": "FK",
    "fk-rotated": "FKrotated",
    "trig-mz-l": "TrigMZ_L",
    "trig-mz-r": "TrigMZ_R",
    "xx-antiperiodic": "XXantiperiodic",
    "nn-mz-prime": "NNMZprime",
    "heisenberg-xyz": "HeisenbergXYZ",
    "qino-l": "QInoL",
    "qino-r": "QInoR",
    "inozemtsev": "Inozemtsev",
    "haldane-shastry": "HaldaneShastry",
    "g-mz-prime": "GMZprime",
    "g-mz-prime-inverse": "GMZprimeInverse",
    "g-tri-mz": "GTriMZ",
    "g-nn-mz-prime": "GnnMZprime",
    "g-sz-prime": "GSZprime",
    "g-fk": "GFK",
    "g-qino": "GQIno",
}

VERIFY_SUITES = (
    "decomposition",
    "commutativity",
    "ybe",
    "fv",
    "fv-obstruction",
    "xyz",
    "mz-relation",
    "wrapping",
    "xx-spectrum",
    "dynamical",
    "special-functions",
)


class ConfigError(ValueError):
    pass


def parse_complex(x) -> complex:
    """Accepts numbers, strings like '0.3', '0.2j', '1-2i', or {"re": .., "im": ..}."""
    if isinstance(x, dict):
        return complex(float(x.get("re", 0.0)), float(x.get("im", 0.0)))
    if isinstance(x, (int, float, complex)):
        return complex(x)
    try:
        return complex(str(x).replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(f"not a number: {x!r}") from exc


def _real_or_complex(z: complex):
    return z.real if z.imag == 0 else z


def canonical_family(name: str) -> str:
    if name in ch.CHAIN_FAMILIES or name in ch.TRANSLATION_FAMILIES:
        return name
    if name in CHAIN_ALIASES:
        return CHAIN_ALIASES[name]
    raise ConfigError(f"unknown chain {name!r}")


# ---------------------------------------------------------------------------
# config


@dataclass
class CliConfig:
    command: str
    target: str | None = None
    chain: str | None = None
    n_sites: int | None = None
    kappa: float | None = None
    eta: complex | None = None
    gamma: float | None = None
    gamma_prime: float | None = None
    a: complex | None = None
    u: complex | None = None
    v: complex | None = None
    normalize: bool = False
    oracle: bool = False
    tol: float | None = None
    draws: int = 20
    seed: int = 11
    max_order: int = 4
    truncation: int = 40
    scan: dict | None = None
    workers: int = 1
    out: str | None = None
    csv_out: str | None = None

    def lattice(self) -> LatticeParams:
        if self.n_sites is None or self.kappa is None:
            raise ConfigError("this command needs --N and --kappa")
        return LatticeParams(int(self.n_sites), float(self.kappa))

    def need(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ConfigError(f"{self.command} {self.target or ''} needs {', '.join('--' + m for m in missing)}".strip())

    def rparams(self) -> RMatrixParams:
        self.need("eta")
        return RMatrixParams(self.lattice(), _real_or_complex(self.eta))


_CONFIG_KEYS = {
    "command", "target", "chain", "n_sites", "kappa", "eta", "gamma", "gamma_prime", "a", "u", "v",
    "normalize", "oracle", "tol", "draws", "seed", "max_order", "truncation", "scan", "workers",
    "out", "csv_out",
}


def _chain_spec_from_dict(d: dict) -> ch.ChainSpec:
    d = dict(d)
    try:
        family = canonical_family(d.pop("family"))
    except KeyError as exc:
        raise ConfigError("chain entry needs a family") from exc
    kw: dict = {"family": family}
    n = d.pop("n_sites", None)
    kappa = d.pop("kappa", None)
    if kappa is not None:
        if n is None:
            raise ConfigError("kappa given without n_sites")
        kw["lattice"] = LatticeParams(int(n), float(kappa))
    elif n is not None:
        kw["n_sites"] = int(n)
    for key in ("eta", "a"):
        if key in d:
            kw[key] = _real_or_complex(parse_complex(d.pop(key)))
    for key in ("gamma", "gamma_prime"):
        if key in d:
            kw[key] = float(d.pop(key))
    kw["normalize"] = bool(d.pop("normalize", False))
    if d:
        raise ConfigError(f"unknown chain keys {sorted(d)}")
    return ch.ChainSpec(**kw)


def scan_spec_from_dict(d: dict) -> vf.LimitScanSpec:
    d = dict(d)
    try:
        chain = _chain_spec_from_dict(d.pop("chain"))
        target = _chain_spec_from_dict(d.pop("target"))
        path = d.pop("path")
        grid = d.pop("grid")
    except KeyError as exc:
        raise ConfigError(f"scan needs {exc.args[0]!r}") from exc
    grid = tuple(_real_or_complex(parse_complex(g)) for g in grid)
    spec = vf.LimitScanSpec(
        chain,
        path,
        grid,
        target,
        coupling_rule=d.pop("coupling_rule", "fixed"),
        coupling_value=d.pop("coupling_value", None),
        tolerance=d.pop("tolerance", 1e-3),
        target_rotation=bool(d.pop("target_rotation", False)),
        expected_order=d.pop("expected_order", None),
        name=d.pop("name", "limit_scan"),
    )
    if d:
        raise ConfigError(f"unknown scan keys {sorted(d)}")
    spec.validate()
    return spec


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinscape", description="Elliptic spin chains: operators, checks and limit scans.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--config", help="JSON file with the same keys as the flags")
        sp.add_argument("--chain")
        sp.add_argument("--N", dest="n_sites", type=int)
        sp.add_argument("--kappa", type=float)
        sp.add_argument("--eta", type=parse_complex)
        sp.add_argument("--gamma", type=float)
        sp.add_argument("--gamma-prime", dest="gamma_prime", type=float)
        sp.add_argument("--a", type=parse_complex)
        sp.add_argument("--normalize", action="store_true", default=None)
        sp.add_argument("--out", help="output file (default standard output)")

    sp = sub.add_parser("build", help="write an operator as JSON")
    common(sp)
    sp = sub.add_parser("spectrum", help="write sorted eigenvalues as CSV (re, im)")
    common(sp)
    sp = sub.add_parser("verify", help="run an identity suite and write a report")
    sp.add_argument("target", choices=VERIFY_SUITES)
    common(sp)
    sp.add_argument("--u", type=parse_complex)
    sp.add_argument("--v", type=parse_complex)
    sp.add_argument("--tol", type=float, help="tolerance override")
    sp.add_argument("--oracle", action="store_true", default=None, help="recompute with the arbitrary-precision theta")
    sp.add_argument("--draws", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--truncation", type=int)
    sp = sub.add_parser("scan", help="run a limit scan")
    sp.add_argument("target", nargs="?", help=f"named scan: {', '.join(vf.standard_scans())}")
    sp.add_argument("--config", help="JSON file; a 'scan' entry holds the scan description")
    sp.add_argument("--N", dest="n_sites", type=int)
    sp.add_argument("--tol", type=float, help="endpoint tolerance override")
    sp.add_argument("--workers", type=int)
    sp.add_argument("--out")
    sp.add_argument("--csv", dest="csv_out", help="write the convergence table here")
    sp = sub.add_parser("expand", help="print expansion terms and check them against the exact chain")
    sp.add_argument("target", choices=("Ino", "SZprime"))
    sp.add_argument("--config")
    sp.add_argument("--N", dest="n_sites", type=int)
    sp.add_argument("--kappa", type=float)
    sp.add_argument("--max-order", dest="max_order", type=int)
    sp.add_argument("--out")
    sp = sub.add_parser("eval", help="evaluate a scalar special function")
    sp.add_argument("target", choices=sorted(EVAL_FUNCTIONS))
    sp.add_argument("--config")
    sp.add_argument("--u", type=parse_complex, required=False)
    sp.add_argument("--v", type=parse_complex)
    sp.add_argument("--N", dest="n_sites", type=int)
    sp.add_argument("--kappa", type=float)
    sp.add_argument("--eta", type=parse_complex)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--oracle", action="store_true", default=None)
    sp.add_argument("--out")
    return p


def config_from_args(argv: list[str] | None) -> CliConfig:
    parser = build_parser()
    args = parser.parse_args(argv)
    values = {k: v for k, v in vars(args).items() if v is not None and k != "config"}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        loaded = {k.replace("-", "_"): v for k, v in loaded.items()}
        if loaded.get("N") is not None:
            loaded["n_sites"] = loaded.pop("N")
        unknown = set(loaded) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        if loaded.get("command", args.command) != args.command:
            raise ConfigError("config command disagrees with the command line")
        for key in ("eta", "a", "u", "v"):
            if key in loaded and loaded[key] is not None:
                loaded[key] = parse_complex(loaded[key])
        # flags win over the file
        values = {**loaded, **values}
    return CliConfig(**values)


# ---------------------------------------------------------------------------
# commands


def _chain_spec(cfg: CliConfig) -> ch.ChainSpec | ch.TranslationSpec:
    cfg.need("chain")
    family = canonical_family(cfg.chain)
    kw: dict = {"family": family}
    if cfg.kappa is not None:
        kw["lattice"] = cfg.lattice()
    elif cfg.n_sites is not None:
        kw["n_sites"] = int(cfg.n_sites)
    if cfg.eta is not None:
        kw["eta"] = _real_or_complex(complex(cfg.eta))
    if cfg.a is not None:
        kw["a"] = _real_or_complex(complex(cfg.a))
    if cfg.gamma is not None:
        kw["gamma"] = cfg.gamma
    if cfg.gamma_prime is not None:
        kw["gamma_prime"] = cfg.gamma_prime
    if family in ch.TRANSLATION_FAMILIES:
        if cfg.normalize:
            raise ConfigError("translations take no --normalize")
        return ch.TranslationSpec(**kw)
    return ch.ChainSpec(normalize=bool(cfg.normalize), **kw)


def _operator(cfg: CliConfig):
    spec = _chain_spec(cfg)
    if isinstance(spec, ch.TranslationSpec):
        return ch.build_translation(spec)
    return ch.build_hamiltonian(spec)


def cmd_build(cfg: CliConfig) -> tuple[str, int]:
    op = _operator(cfg)
    return vf.dumps(op.to_json()), EXIT_OK


def cmd_spectrum(cfg: CliConfig) -> tuple[str, int]:
    from .spin import spectrum

    vals = spectrum(_operator(cfg).matrix)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re", "im"])
    for z in vals:
        w.writerow([repr(float(z.real)), repr(float(z.imag))])
    return buf.getvalue(), EXIT_OK


_COMMUTING_ALIASES = {
    "mz-prime": "mz-prime",
    "MZprime": "mz-prime",
    "sz-prime": "sz-prime",
    "SZprime": "sz-prime",
    "qino": "qino",
    "QIno": "qino",
    "fk": "fk",
    "FK": "fk",
    "trig-mz": "trig-mz",
    "TrigMZ": "trig-mz",
}


def _tol(cfg: CliConfig) -> dict:
    return {} if cfg.tol is None else {"tol": cfg.tol}


def run_verify(cfg: CliConfig) -> vf.VerificationReport:
    t = cfg.target
    if t == "decomposition":
        p = cfg.rparams()
        grid = [cfg.u] if cfg.u is not None else [0.45, 1.1 + 0.2j, 2.5]
        return vf.verify_decomposition(p, grid, oracle=bool(cfg.oracle), **_tol(cfg))
    if t == "commutativity":
        cfg.need("chain", "n_sites")
        fam = _COMMUTING_ALIASES.get(cfg.chain)
        if fam is None:
            raise ConfigError(f"commutativity supports {sorted(set(_COMMUTING_ALIASES.values()))}")
        return vf.verify_commutativity(
            fam, int(cfg.n_sites), kappa=cfg.kappa, eta=cfg.eta, a=cfg.a, gamma=cfg.gamma, **_tol(cfg)
        )
    if t in ("ybe", "fv"):
        checks = ("fv",) if t == "fv" else ("ybe", "unitarity", "dybe")
        kw = {k: getattr(cfg, k) for k in ("n_sites", "kappa") if getattr(cfg, k) is not None}
        if cfg.eta is not None:
            kw["eta"] = _real_or_complex(complex(cfg.eta))
        return vf.verify_rmatrix_suite(draws=cfg.draws, seed=cfg.seed, checks=checks, **kw, **_tol(cfg))
    if t == "fv-obstruction":
        p = cfg.rparams()
        cfg.need("a", "u", "v")
        return vf.fv_obstruction_demo(p, cfg.a, cfg.u, cfg.v, **_tol(cfg))
    if t == "xyz":
        p = cfg.rparams()
        return vf.verify_xyz(p, p.lattice.n_sites, **_tol(cfg))
    if t == "mz-relation":
        return vf.verify_mz_relation(cfg.rparams(), **_tol(cfg))
    if t == "wrapping":
        return se.verify_wrapping(cfg.lattice(), truncation=cfg.truncation, **_tol(cfg))
    if t == "xx-spectrum":
        cfg.need("n_sites")
        return vf.verify_xx_spectrum(int(cfg.n_sites), **_tol(cfg))
    if t == "dynamical":
        cfg.need("a")
        grid = [cfg.u] if cfg.u is not None else [0.4, 1.2]
        return vf.verify_dynamical_decomposition(cfg.rparams(), cfg.a, grid, **_tol(cfg))
    if t == "special-functions":
        kw = {}
        if cfg.n_sites is not None:
            kw["n_grid"] = (int(cfg.n_sites),)
        if cfg.kappa is not None:
            kw["kappa_grid"] = (float(cfg.kappa),)
        return vf.verify_special_functions(points=cfg.draws, seed=cfg.seed, **kw, **_tol(cfg))
    raise ConfigError(f"unknown suite {t!r}")


def cmd_verify(cfg: CliConfig) -> tuple[str, int]:
    rep = run_verify(cfg)
    return rep.to_json(), EXIT_OK if rep.verdict else EXIT_FAILED


def cmd_scan(cfg: CliConfig) -> tuple[str, int]:
    if cfg.scan is not None:
        spec = scan_spec_from_dict(cfg.scan)
    elif cfg.target:
        scans = vf.standard_scans(int(cfg.n_sites or 4))
        if cfg.target not in scans:
            raise ConfigError(f"unknown scan {cfg.target!r}; known: {', '.join(scans)}")
        spec = scans[cfg.target]
    else:
        raise ConfigError("scan needs a scan name or a config with a 'scan' entry")
    if cfg.tol is not None:
        spec = replace(spec, tolerance=cfg.tol)
    rep = vf.limit_scan(spec, workers=cfg.workers)
    if cfg.csv_out:
        with open(cfg.csv_out, "w") as fh:
            fh.write(rep.table_csv())
    return rep.to_json(), EXIT_OK if rep.verdict else EXIT_FAILED


def cmd_expand(cfg: CliConfig) -> tuple[str, int]:
    cfg.need("n_sites", "kappa")
    terms = se.ino_expansion_terms(cfg.max_order) if cfg.target == "Ino" else se.sz_expansion_terms(cfg.max_order)
    rep = se.verify_expansion(cfg.target, int(cfg.n_sites), float(cfg.kappa), cfg.max_order)
    out = {"terms": [t.to_json() for t in terms], "report": rep.to_dict()}
    return vf.dumps(out), EXIT_OK if rep.verdict else EXIT_FAILED


def _lat_fn(f):
    def g(cfg: CliConfig):
        cfg.need("u")
        lat = cfg.lattice()
        return f(cfg.u, lat.with_oracle() if cfg.oracle else lat)

    return g


def _eval_deformed(sans_serif: bool):
    def g(cfg: CliConfig):
        cfg.need("u", "eta")
        return ell.deformed_potential(cfg.u, DeformedPotentialParams(cfg.eta, cfg.lattice()), sans_serif=sans_serif)

    return g


EVAL_FUNCTIONS = {
    "theta": _lat_fn(ell.theta),
    "theta_s": _lat_fn(ell.theta_s),
    "dtheta": _lat_fn(ell.dtheta),
    "rho": _lat_fn(ell.rho),
    "rho_s": _lat_fn(ell.rho_s),
    "V": _lat_fn(ell.potential_v),
    "V_s": _lat_fn(ell.potential_v_s),
    "wp": _lat_fn(ell.weierstrass_p),
    "dwp": _lat_fn(ell.weierstrass_dp),
    "deformed_V": _eval_deformed(False),
    "deformed_V_s": _eval_deformed(True),
    "V_hyp": lambda cfg: (cfg.need("u", "kappa"), ell.potential_hyp(cfg.u, cfg.kappa))[1],
    "V_trig": lambda cfg: (cfg.need("u", "n_sites"), ell.potential_trig_undeformed(cfg.u, int(cfg.n_sites)))[1],
    "kronecker_phi": lambda cfg: (cfg.need("u", "v"), ell.kronecker_phi(cfg.u, cfg.v, cfg.lattice()))[1],
}


def cmd_eval(cfg: CliConfig) -> tuple[str, int]:
    val = complex(EVAL_FUNCTIONS[cfg.target](cfg))
    return vf.dumps({"function": cfg.target, "value": val}), EXIT_OK


COMMANDS = {
    "build": cmd_build,
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
    "scan": cmd_scan,
    "expand": cmd_expand,
    "eval": cmd_eval,
}


def run(cfg: CliConfig) -> int:
    try:
        text, code = COMMANDS[cfg.command](cfg)
    except EllipticError as exc:
        print(f"spinscape: numerical error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (ValueError, KeyError, TypeError) as exc:
        print(f"spinscape: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code == EXIT_FAILED:
        print("spinscape: verification failed", file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = config_from_args(argv)
    except ConfigError as exc:
        print(f"spinscape: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:
        # argparse reports usage errors with exit status 2 already
        return int(exc.code or 0)
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
