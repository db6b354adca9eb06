"""Command-line interface: ``scswalk <command> [options]``.

Every command prints one JSON document (or CSV for ``whittaker-table`` with
``--format csv``). Options may also come from a JSON file given with
``--config``; explicit flags win over the file, which wins over defaults.

Exit codes: 0 pass, 1 verification failure, 2 configuration error,
3 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import acceptance, borel_sim
from .padic_field import EnumerationBoundError, FieldError, LaurentSeries, averaging_expectation_exact, min_plus_law_distance
from .root_system import EnumerationCapError, RootSystemError, build_root_datum, is_minuscule
from .spectral import (
    SpectralError,
    SpectralPoint,
    asymptotic_gap,
    minuscule_character,
    b_inverse_weyl_denominator,
    scs_whittaker,
    weyl_character,
)
from .walks import ResourceCapError, WalkError, survival_dp_run, survival_mc, survival_reflection, increment_law

SCHEMA = "scswalk/1"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3
SIGMAS = 4.0
DELTA_TOL = 1e-10


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """All options any command understands, with their defaults."""

    type: str = "A"
    rank: int | None = None
    z: list[float] | None = None
    z_pairings: list[float] | None = None
    q: int = 3
    p: int = 3
    lam: list[int] | None = None
    k: int = 1
    n: int = 2
    b: list[int] | None = None
    route: str = "all"
    horizon: int = 400
    samples: int = 10_000
    seed: int = 0
    precision: int = 4
    tol: float = 1e-12
    dp_collapse: float = 0.0
    step_cap: int = 100_000
    max_k: int = 4
    enumeration_bound: int = 3
    p_list: list[int] = field(default_factory=lambda: [2, 3, 5])
    alpha: bool = False
    criteria: list[int] | None = None
    tolerance_scale: float = 1.0
    full_grid: bool = False
    threads: int = 1
    format: str = "json"

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))


# --- output helpers -------------------------------------------------------------


def _round(x: Any) -> Any:
    """Floats to 12 significant digits, recursively."""
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.12g}")
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, dict):
        return {str(k): _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    if isinstance(x, np.ndarray):
        return _round(x.tolist())
    return x


def _emit(report: dict, out) -> None:
    report = {"schema": SCHEMA, **report}
    out.write(json.dumps(_round(report), sort_keys=True, indent=2) + "\n")


# --- argument parsing -----------------------------------------------------------


def _floats(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty vector")
    return vals


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_datum(p: argparse.ArgumentParser) -> None:
    p.add_argument("--type", help="root system family (A-E) or full label such as A2")
    p.add_argument("--rank", type=int)


def _add_z(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--z", type=_floats, help="pairings <z, omega_j^vee>, comma separated")
    g.add_argument("--z-pairings", type=_floats, help="simple coroot pairings <z, alpha_i^vee>")


def _add_mc(p: argparse.ArgumentParser) -> None:
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, help="worker threads; never changes the output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scswalk", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file with default options")
    parser.add_argument("--save-config", help="write the effective configuration to this JSON file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("character", help="character values by every route")
    _add_datum(p)
    _add_z(p)
    p.add_argument("--lambda", dest="lam", type=_ints)

    p = sub.add_parser("survival", help="chamber survival probability by reflection, DP and Monte Carlo")
    _add_datum(p)
    _add_z(p)
    p.add_argument("--lambda", dest="lam", type=_ints)
    p.add_argument("--minuscule-index", dest="k", type=int, help="1-based index k of omega_k^vee")
    p.add_argument("--route", choices=["reflection", "dp", "mc", "all"])
    p.add_argument("--horizon", type=int)
    p.add_argument("--dp-collapse", type=float, help="bank states whose exit risk is below this")
    _add_mc(p)

    p = sub.add_parser("whittaker-table", help="Whittaker values over a coweight grid")
    _add_datum(p)
    _add_z(p)
    p.add_argument("--q", type=int)
    p.add_argument("--max-k", type=int, help="grid is {-1, ..., max_k}^rank")
    p.add_argument("--format", choices=["json", "csv"])

    p = sub.add_parser("padic-verify", help="averaging and min-plus identities by enumeration")
    p.add_argument("--p", dest="p_list", type=_ints)
    p.add_argument("--precision", type=int, help="window width for the min-plus check")
    p.add_argument("--enumeration-bound", type=int, help="largest |valuation| enumerated")

    for name, helptext in (("poisson", "Poisson formula by Monte Carlo"),
                           ("harmonicity", "one-step harmonicity by Monte Carlo")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--n", type=int, help="PGL_n")
        p.add_argument("--z", type=_floats)
        p.add_argument("--k", type=int, help="1-based index of the minuscule omega_k^vee")
        p.add_argument("--p", type=int)
        if name == "poisson":
            p.add_argument("--tol", type=float, help="allowed chance that a later step changes the read digit")
        else:
            p.add_argument("--precision", type=int, help="digits kept in every matrix entry")
        p.add_argument("--step-cap", type=int)
        _add_mc(p)
        if name == "poisson":
            p.add_argument("--lambda", dest="lam", type=_ints)
        else:
            p.add_argument("--b", type=_ints, help="coweight of the starting point varpi^-b")
            p.add_argument("--alpha", action="store_true", default=None,
                           help="check the eigenvalue equation of the Whittaker function instead")

    p = sub.add_parser("verify-all", help="run the acceptance criteria")
    p.add_argument("--criteria", type=_ints)
    p.add_argument("--tolerance-scale", type=float)
    p.add_argument("--full-grid", action="store_true", default=None)
    p.add_argument("--seed", type=int)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    base: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}")
    cfg = RunConfig.from_dict(base)
    for f in dataclasses.fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            setattr(cfg, f.name, value)
    return cfg


# --- shared validation ------------------------------------------------------------


def _datum(cfg: RunConfig):
    label = cfg.type
    if cfg.rank is not None and label[1:] == "":
        label = f"{label}{cfg.rank}"
    elif cfg.rank is None and len(label) == 1:
        raise ConfigError("--rank is required with a bare family letter")
    return build_root_datum(label)


def _point(datum, cfg: RunConfig) -> SpectralPoint:
    if cfg.z_pairings is not None:
        vec = cfg.z_pairings
        maker = SpectralPoint.from_coroot_pairings
    elif cfg.z is not None:
        vec = cfg.z
        maker = SpectralPoint
    else:
        raise ConfigError("a spectral point is required (--z or --z-pairings)")
    if len(vec) != datum.rank:
        raise ConfigError(f"z has {len(vec)} coordinates, rank is {datum.rank}")
    return maker(datum, vec)


def _coweight(datum, vec, name: str) -> tuple[int, ...]:
    if vec is None:
        return (0,) * datum.rank
    if len(vec) != datum.rank:
        raise ConfigError(f"{name} has {len(vec)} coordinates, rank is {datum.rank}")
    return tuple(vec)


def _minuscule(datum, k: int) -> tuple[int, ...]:
    if not 1 <= k <= datum.rank:
        raise ConfigError(f"minuscule index must lie in 1..{datum.rank}")
    Lam = datum.fundamental_coweight(k - 1)
    if not is_minuscule(datum, Lam):
        raise ConfigError(f"omega_{k}^vee is not minuscule in {datum.type_label}")
    return Lam


# --- commands -------------------------------------------------------------------


def cmd_character(cfg: RunConfig, out) -> int:
    datum = _datum(cfg)
    z = _point(datum, cfg)
    lam = _coweight(datum, cfg.lam, "lambda")
    if not datum.is_dominant(lam):
        raise ConfigError("lambda must be dominant")
    values = {"weyl_character": weyl_character(datum, lam, z)}
    if is_minuscule(datum, lam):
        values["minuscule_character"] = minuscule_character(datum, lam, z)
    b = b_inverse_weyl_denominator(datum, z)
    shift = np.array(lam) + np.array(datum.rho_vee)
    values["poisson_route"] = b * math.exp(z.pair(shift)) * survival_reflection(datum, lam, z)
    names = sorted(values)
    deltas = {f"{a}-{c}": abs(values[a] - values[c]) / max(abs(values[c]), 1e-300)
              for i, a in enumerate(names) for c in names[i + 1:]}
    passed = all(d <= DELTA_TOL for d in deltas.values())
    _emit({"command": "character", "datum": datum.type_label, "lambda": list(lam), "z": list(z.u),
           "b": b, "values": values, "relative_deltas": deltas, "passed": passed}, out)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_survival(cfg: RunConfig, out) -> int:
    datum = _datum(cfg)
    z = _point(datum, cfg)
    lam = _coweight(datum, cfg.lam, "lambda")
    Lam = _minuscule(datum, cfg.k)
    report: dict = {"command": "survival", "datum": datum.type_label, "lambda": list(lam), "z": list(z.u),
                    "Lambda": list(Lam), "horizon": cfg.horizon}
    if not datum.is_dominant(lam):
        report.update({"dominant": False, "survival": 0.0, "note": "lambda is not dominant"})
        _emit(report, out)
        return EXIT_OK
    routes = ("reflection", "dp", "mc") if cfg.route == "all" else (cfg.route,)
    results: dict = {}
    ref = survival_reflection(datum, lam, z)
    if "reflection" in routes:
        results["reflection"] = {"value": ref}
    passed = True
    if "dp" in routes:
        law = increment_law(datum, Lam, z)
        half = max(cfg.horizon // 2, 1)
        dp = survival_dp_run(law, lam, [half, cfg.horizon], collapse=cfg.dp_collapse)
        value = dp.values[cfg.horizon]
        results["dp"] = {"value": value, "value_half_horizon": dp.values[half],
                         "error_bound": dp.error_bound, "delta": value - ref}
    if "mc" in routes:
        est = survival_mc(datum, lam, z, Lam, cfg.horizon, cfg.samples, cfg.seed, threads=cfg.threads)
        sigma = est.z_score(ref)
        results["mc"] = {"value": est.mean, "stderr": est.stderr, "delta": est.mean - ref, "sigma": sigma}
        passed &= est.covers(ref, SIGMAS)
    report.update({"dominant": True, "routes": results, "passed": passed})
    _emit(report, out)
    return EXIT_OK if passed else EXIT_FAIL


def whittaker_rows(datum, z: SpectralPoint, q: int, max_k: int) -> list[dict]:
    rows = []
    for lam in sorted(np.ndindex(*([max_k + 2] * datum.rank))):
        lam = tuple(int(x) - 1 for x in lam)
        value = scs_whittaker(datum, lam, z, q)
        gap = asymptotic_gap(datum, lam, z, q) if datum.is_dominant(lam) else None
        rows.append({"lambda_coords": " ".join(map(str, lam)), "value": value, "route": "scs",
                     "delta": gap, "sigma": None})
    return rows


def cmd_whittaker_table(cfg: RunConfig, out) -> int:
    datum = _datum(cfg)
    z = _point(datum, cfg)
    if cfg.max_k < 0:
        raise ConfigError("--max-k must be non-negative")
    rows = whittaker_rows(datum, z, cfg.q, cfg.max_k)
    if cfg.format == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["lambda_coords", "value", "route", "delta", "sigma"],
                                lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if v is None else (f"{v:.12g}" if isinstance(v, float) else v))
                             for k, v in row.items()})
        out.write(buf.getvalue())
    else:
        _emit({"command": "whittaker-table", "datum": datum.type_label, "z": list(z.u), "q": cfg.q,
               "rows": rows}, out)
    return EXIT_OK


def padic_table(p_list: Sequence[int], bound: int, width: int) -> list[dict]:
    rows = []
    for p in p_list:
        for v in range(-bound, 1):
            x = LaurentSeries.from_digits(p, v, [1] + [0] * (1 - v))
            err = abs(averaging_expectation_exact(x) - (1.0 if v >= 0 else 0.0))
            rows.append({"check": "averaging", "p": p, "valuation": v, "error": err, "passed": err < 1e-12})
        for a in range(bound):
            for b in range(bound):
                tv = min_plus_law_distance(a, b, p, min(a, b) + width)
                rows.append({"check": "min_plus", "p": p, "a": a, "b": b, "tv": str(tv), "passed": tv == 0})
    return rows


def cmd_padic_verify(cfg: RunConfig, out) -> int:
    if cfg.enumeration_bound < 0 or cfg.precision < 1:
        raise ConfigError("enumeration bound must be >= 0 and precision >= 1")
    rows = padic_table(cfg.p_list, cfg.enumeration_bound, cfg.precision)
    passed = all(r["passed"] for r in rows)
    _emit({"command": "padic-verify", "rows": rows, "passed": passed}, out)
    return EXIT_OK if passed else EXIT_FAIL


def _borel_setup(cfg: RunConfig):
    datum = build_root_datum("A", cfg.n - 1) if cfg.n >= 2 else None
    if datum is None:
        raise ConfigError("--n must be at least 2")
    if cfg.z is None or len(cfg.z) != datum.rank:
        raise ConfigError(f"--z needs {datum.rank} coordinates")
    z = SpectralPoint(datum, cfg.z)
    return datum, z, _minuscule(datum, cfg.k)


def cmd_poisson(cfg: RunConfig, out) -> int:
    datum, z, Lam = _borel_setup(cfg)
    lam = _coweight(datum, cfg.lam, "lambda")
    res = borel_sim.poisson_mc(cfg.n, lam, z, cfg.p, cfg.samples, cfg.seed, Lam=Lam, tol=cfg.tol,
                               max_steps=cfg.step_cap, threads=cfg.threads)
    ref = survival_reflection(datum, lam, z)
    passed = res.estimate.covers(ref, SIGMAS)
    _emit({"command": "poisson", "n": cfg.n, "lambda": list(lam), "z": list(z.u), "p": cfg.p,
           "estimate": res.estimate.mean, "stderr": res.estimate.stderr,
           "imaginary_estimate": res.imaginary.mean, "reference": ref,
           "sigma_distance": res.estimate.z_score(ref), "steps": res.steps, "passed": passed}, out)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_harmonicity(cfg: RunConfig, out) -> int:
    datum, z, Lam = _borel_setup(cfg)
    b = _coweight(datum, cfg.b, "b")
    report: dict = {"command": "harmonicity", "n": cfg.n, "b": list(b), "z": list(z.u), "p": cfg.p}
    if cfg.alpha:
        res, eigen = borel_sim.alpha_harmonicity_mc(cfg.n, b, z, cfg.p, cfg.samples, cfg.seed, Lam=Lam,
                                                    precision=cfg.precision, threads=cfg.threads)
        report["eigenvalue"] = eigen
    else:
        res = borel_sim.harmonicity_mc(cfg.n, b, z, cfg.p, cfg.samples, cfg.seed, Lam=Lam,
                                       precision=cfg.precision, threads=cfg.threads)
    passed = res.estimate.covers(res.exact, SIGMAS)
    report.update({"alpha": bool(cfg.alpha), "estimate": res.estimate.mean, "stderr": res.estimate.stderr,
                   "reference": res.exact, "sigma_distance": res.estimate.z_score(res.exact), "passed": passed})
    _emit(report, out)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_verify_all(cfg: RunConfig, out) -> int:
    ids = cfg.criteria or sorted(acceptance.CRITERIA)
    bad = [i for i in ids if i not in acceptance.CRITERIA]
    if bad:
        raise ConfigError(f"unknown criteria {bad}")
    results = []
    for i in ids:
        kwargs = {"tolerance_scale": cfg.tolerance_scale}
        if i == 2:
            kwargs["full_grid"] = cfg.full_grid
        res = acceptance.CRITERIA[i](**kwargs)
        sys.stderr.write(res.line() + "\n")
        results.append(res)
    failed = [r.cid for r in results if not r.passed]
    _emit({"command": "verify-all", "criteria": [r.to_json() for r in results], "failed": failed,
           "passed": not failed}, out)
    return EXIT_OK if not failed else EXIT_FAIL


COMMANDS = {
    "character": cmd_character,
    "survival": cmd_survival,
    "whittaker-table": cmd_whittaker_table,
    "padic-verify": cmd_padic_verify,
    "poisson": cmd_poisson,
    "harmonicity": cmd_harmonicity,
    "verify-all": cmd_verify_all,
}


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
        if cfg.threads < 1 or cfg.samples < 1:
            raise ConfigError("--threads and --samples must be positive")
        if args.save_config:
            with open(args.save_config, "w") as fh:
                fh.write(cfg.to_json() + "\n")
        return COMMANDS[args.command](cfg, out)
    except (ResourceCapError, EnumerationCapError, EnumerationBoundError) as exc:
        sys.stderr.write(f"resource cap: {exc}\n")
        return EXIT_CAP
    except (ConfigError, RootSystemError, SpectralError, WalkError, FieldError, TypeError) as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
