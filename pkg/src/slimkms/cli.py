"""Command-line harness: ``slimkms slim | cone | rindler-verify``.

Exit codes: 0 all verdicts pass, 1 a verdict fails, 2 usage or input error,
3 the vacuum oracle gate fails (downstream numbers would be meaningless).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import re
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .distributions import BumpFunction, delta, lorentzian, power, pv_inverse
from .errors import InputError, NoScalingLimitError, NotConicallyRegularError, OracleGateError, SlimError
from .geometry import BUILTIN_REGIONS, ConeSearchConfig, conical_regularity, maximal_contractible_region
from .numerics import geometric_grid
from .scaling import ScalingFunction, estimate_degree, slim

log = logging.getLogger("slimkms")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_GATE = 0, 1, 2, 3
OUT_ENV = "SLIMKMS_OUT"

DISTRIBUTIONS = {
    "pv-inverse": lambda: pv_inverse(),
    "lorentzian-m1": lambda: lorentzian(1.0),
    "delta": lambda: delta(),
    "abs-inverse-2d": lambda: power(1.0, dim=2),
}

REPORTS = ("scaling", "slc", "l1", "beta-independence")


@dataclass
class RunConfig:
    """Resolved configuration, embedded in every output file."""

    command: str
    seed: int = 0
    out: str = "slimkms-out"
    tol: float = 1e-10
    lambda_max: float = 1.0
    lambda_min: float = 1e-4
    lambda_ratio: float = 0.5
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.tol > 0:
            raise InputError("tolerances must be positive")
        if not 0 < self.lambda_ratio < 1:
            raise InputError("lambda grid ratio must lie in (0, 1)")
        if not 0 < self.lambda_min < self.lambda_max:
            raise InputError("need 0 < lambda_min < lambda_max")

    @property
    def lambda_grid(self) -> np.ndarray:
        return geometric_grid(self.lambda_max, self.lambda_min, self.lambda_ratio)


_BETA = re.compile(r"^(?P<c>[0-9.eE+-]*)\*?pi(?:/(?P<d>[0-9.eE+-]+))?$")


def parse_beta(text: str) -> float:
    """``2pi``, ``pi/2``, ``4*pi``, ``6.5``, ``inf``."""
    t = text.strip().lower().replace(" ", "")
    m = _BETA.match(t)
    try:
        if m:
            c = float(m.group("c")) if m.group("c") not in ("", None) else 1.0
            d = float(m.group("d")) if m.group("d") else 1.0
            val = c * math.pi / d
        else:
            val = float(t)
    except ValueError:
        raise InputError(f"cannot parse beta {text!r}") from None
    if not val > 0:
        raise InputError("beta must be positive")
    return val


def parse_beta_list(text: str) -> list[float]:
    return [parse_beta(b) for b in text.split(",") if b.strip()]


def _parse_point(text: str, dim: int) -> np.ndarray | str:
    if text in ("origin", "interior"):
        return text
    try:
        p = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise InputError(f"cannot parse point {text!r}") from None
    if p.size != dim:
        raise InputError(f"point has {p.size} coordinates, region has dimension {dim}")
    return p


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def default_probes(dim: int) -> list[BumpFunction]:
    if dim == 1:
        return [BumpFunction.standard(0.3, 1.0), BumpFunction.standard(-0.4, 0.8), BumpFunction.standard(0.5, 0.6)]
    return [BumpFunction.standard((0.3,) + (0.0,) * (dim - 1), 1.0), BumpFunction.standard((0.2,) * dim, 0.7)]


def cmd_slim(cfg: RunConfig) -> tuple[int, dict]:
    from .io import write_csv, write_json
    from .plotting import plot_sequences

    opts = cfg.options
    if not opts.get("dist"):
        raise InputError("slim needs --dist (or 'dist' in the config file)")
    name = opts["dist"]
    if name not in DISTRIBUTIONS:
        raise InputError(f"unknown distribution {name!r}; choose from {sorted(DISTRIBUTIONS)}")
    u = DISTRIBUTIONS[name]()
    probes = default_probes(u.dim)
    lam = cfg.lambda_grid
    degree = None
    if opts.get("degree_auto") or not opts.get("N"):
        fit = estimate_degree(u, probes, lam, tol=cfg.tol)
        degree = fit.slope
        # integer degrees are snapped when the fit is that close
        slope = round(fit.slope) if abs(fit.slope - round(fit.slope)) < 1e-3 else fit.slope
        N = ScalingFunction(1.0, slope)
    else:
        N = ScalingFunction.parse(opts["N"])
    out = Path(cfg.out)
    rows, seq_rows, status = [], [], EXIT_OK
    summary = {"config": asdict(cfg), "distribution": name, "N": str(N), "fitted_degree": degree, "probes": []}
    for k, phi in enumerate(probes):
        try:
            est = slim(u, N, phi, lam, order=int(opts.get("order", 2)), tol=cfg.tol)
        except NoScalingLimitError as exc:
            status = EXIT_FAIL
            rows.append({"probe": k, "verdict": "diverges", "detail": str(exc)})
            summary["probes"].append({"probe": k, "verdict": "diverges", "detail": str(exc)})
            continue
        if not est.converged:
            status = EXIT_FAIL
        rows.append({"probe": k, "center": list(phi.center), "radius": phi.radius, "limit_re": est.limit.real,
                     "limit_im": est.limit.imag, "error": est.error, "verdict": est.verdict})
        summary["probes"].append({"probe": k, "limit": est.limit, "error": est.error, "verdict": est.verdict})
        seq_rows += [{"probe": k, **r} for r in est.rows()]
    write_csv(out / "slim.csv", rows, asdict(cfg))
    if seq_rows:
        write_csv(out / "slim_plotdata.csv", seq_rows, asdict(cfg))
        plot_sequences(seq_rows, out / "slim.png", y="re", title=f"N(lambda) <{name}, phi_lambda>")
    summary["passed"] = status == EXIT_OK
    write_json(out / "summary.json", summary)
    return status, summary


def cmd_cone(cfg: RunConfig) -> tuple[int, dict]:
    from .geometry import region_from_spec
    from .io import read_region, write_csv, write_json
    from .plotting import plot_slope_table

    opts = cfg.options
    if opts.get("region_file"):
        omega = read_region(opts["region_file"])
    elif not opts.get("region"):
        raise InputError("cone needs --region or --region-file")
    else:
        name = opts["region"]
        if name not in BUILTIN_REGIONS:
            raise InputError(f"unknown region {name!r}; choose from {sorted(BUILTIN_REGIONS)}")
        omega = region_from_spec({"kind": name})
    point = _parse_point(opts.get("point", "origin"), omega.dim)
    if isinstance(point, str):
        p = np.zeros(omega.dim)
        if point == "interior":
            lo, hi = np.asarray(omega.sampling_box()[0]), np.asarray(omega.sampling_box()[1])
            members = omega.sample_members(256, np.random.default_rng(cfg.seed))
            p = members[np.argmin(np.linalg.norm(members - 0.5 * (lo + hi), axis=1))]
    else:
        p = point
    sc = ConeSearchConfig(directions=int(opts.get("directions", 512)), seed=cfg.seed)
    out = Path(cfg.out)
    summary = {"config": asdict(cfg), "region": omega.name, "point": p.tolist()}
    verdict = conical_regularity(p, omega, sc)
    summary["regular"] = verdict.regular
    summary["cone"] = None if verdict.cone is None else {
        "axis": list(verdict.cone.axis), "slope": verdict.cone.slope, "height": verdict.cone.height}
    rows = []
    if verdict.regular:
        try:
            region = maximal_contractible_region(omega, p, config=sc)
        except NotConicallyRegularError as exc:
            summary["regular"] = False
            summary["detail"] = str(exc)
        else:
            summary["all_space"] = region.all_space
            if not region.all_space:
                rows = region.table()
    write_csv(out / "cone.csv", rows or [{"point": p.tolist(), "regular": summary["regular"],
                                          "all_space": summary.get("all_space", False)}], asdict(cfg))
    if rows:
        write_csv(out / "cone_plotdata.csv", rows, asdict(cfg))
        plot_slope_table(rows, out / "cone.png", title=f"{omega.name}: maximal slopes")
    summary["passed"] = bool(summary["regular"])
    write_json(out / "summary.json", summary)
    return (EXIT_OK if summary["regular"] else EXIT_FAIL), summary


def cmd_rindler_verify(cfg: RunConfig) -> tuple[int, dict]:
    from .io import read_probes, write_csv, write_json
    from .plotting import plot_ratio, plot_sequences
    from .rindler import (
        antisymmetric_part_beta_independence,
        bisognano_wichmann_gate,
        l1_family_report,
        scaling_limit_horizon,
        slc_check,
    )
    from .rindler.fields import pauli_jordan_gate
    from .rindler.kinematics import TWO_PI

    opts = cfg.options
    betas = parse_beta_list(opts.get("beta", "2pi"))
    mass = float(opts.get("mass", 1.0))
    if mass < 0:
        raise InputError("mass must be non-negative")
    reports = opts.get("report") or ["scaling", "slc", "l1"]
    probes = None
    if opts.get("probes"):
        probes, meta = read_probes(opts["probes"])
        mass = float(meta.get("mass", mass))
    out = Path(cfg.out)
    summary: dict = {"config": asdict(cfg), "betas": betas, "mass": mass, "reports": {}}

    # vacuum oracle gate
    if mass > 0:
        pauli_jordan_gate(mass)
    gate = bisognano_wichmann_gate(max(mass, 1.0) if mass > 0 else 1.0)
    summary["gate"] = {"passed": gate.passed, "max_rel_massive": gate.max_rel_massive,
                       "max_rel_massless": gate.max_rel_massless}
    write_csv(out / "gate.csv", gate.rows, asdict(cfg))
    if not gate.passed:
        write_json(out / "summary.json", summary)
        raise OracleGateError(f"vacuum gate failed: {summary['gate']}")

    ok = True
    if "scaling" in reports:
        rows, plot_rows, res = [], [], []
        for b in betas:
            rep = scaling_limit_horizon(b, mass, probes, smeared=not opts.get("no_smeared", False),
                                        smeared_kw={"seed": cfg.seed})
            ok &= rep.passed
            rows += [{"beta": b, **p.as_row()} for p in rep.probes]
            plot_rows += [{**r, "probe": f"beta={b:.4g} #{r['probe']}"} for r in rep.plot_rows()]
            res.append({"beta": b, "passed": rep.passed, "max_deviation": rep.max_deviation,
                        "probes": len(rep.probes), "smeared": rep.smeared})
        summary["reports"]["scaling"] = res
        write_csv(out / "scaling.csv", rows, asdict(cfg))
        write_csv(out / "scaling_plotdata.csv", plot_rows, asdict(cfg))
        plot_sequences(plot_rows, out / "scaling.png", y="deviation", logy=True,
                       title="relative distance of lambda^2 W to the massless limit")
    if "slc" in reports:
        rows, res = [], []
        for b in betas:
            s = slc_check(b)
            expected = math.isclose(b, TWO_PI, rel_tol=1e-12)
            match = s.satisfied == expected and (expected or s.variation > 0.10)
            ok &= match
            rows += [{"beta": b, **r} for r in s.rows]
            res.append({"beta": b, "satisfied": s.satisfied, "expected": expected, "max_dev": s.max_dev,
                        "variation": s.variation, "as_expected": match})
        summary["reports"]["slc"] = res
        write_csv(out / "slc.csv", rows, asdict(cfg))
        plot_ratio(rows, out / "slc.png", title="R = W_beta,0 / vacuum form")
    if "beta-independence" in reports:
        if len(betas) < 2:
            raise InputError("beta-independence needs at least two beta values")
        r = antisymmetric_part_beta_independence(betas, mass=mass)
        ok &= r.passed
        summary["reports"]["beta-independence"] = {
            "passed": r.passed, "max_pairwise_antisymmetric": r.max_pairwise_antisym,
            "max_closed_form_deviation": r.max_closed_form_dev, "min_symmetric_spread": r.min_pairwise_symmetric}
        write_csv(out / "beta_independence.csv", r.rows, asdict(cfg))
    if "l1" in reports:
        fam = l1_family_report(betas, mass)
        ok &= fam.passed
        summary["reports"]["l1"] = [asdict(e) for e in fam.entries]
        write_csv(out / "l1_family.csv", [asdict(e) for e in fam.entries], asdict(cfg))
    summary["passed"] = bool(ok)
    write_json(out / "summary.json", summary)
    return (EXIT_OK if ok else EXIT_FAIL), summary


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slimkms", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="JSON file of option defaults (command-line flags win)")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./slimkms-out)")
    p.add_argument("--seed", type=int, help="sampling seed (default 0)")
    p.add_argument("--tol", type=float, help="pairing tolerance (default 1e-10)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("slim", help="scaling limit of a built-in distribution")
    s.add_argument("--dist", help=f"one of {', '.join(DISTRIBUTIONS)}")
    s.add_argument("--N", dest="N", help="scaling function such as lambda^-1")
    s.add_argument("--degree-auto", action="store_true", help="fit the scaling degree first")
    s.add_argument("--order", type=int, help="extrapolation order (default 2)")
    s.add_argument("--lambda-min", type=float)
    s.add_argument("--lambda-ratio", type=float)

    c = sub.add_parser("cone", help="conical regularity and maximal contractible region")
    g = c.add_mutually_exclusive_group()
    g.add_argument("--region", help=f"one of {', '.join(BUILTIN_REGIONS)}")
    g.add_argument("--region-file", help="JSON region description")
    c.add_argument("--point", help="origin (default), interior or comma-separated coordinates")
    c.add_argument("--directions", type=int, help="direction grid size (default 512)")

    r = sub.add_parser("rindler-verify", help="horizon scaling limits and the vacuum-form condition")
    r.add_argument("--beta", help="comma-separated list, e.g. 2pi,pi,4pi (default 2pi)")
    r.add_argument("--mass", type=float, help="field mass (default 1)")
    r.add_argument("--report", action="append", choices=REPORTS,
                   help="repeatable; default scaling, slc and l1")
    r.add_argument("--probes", help="probe-set JSON file")
    r.add_argument("--no-smeared", action="store_true", help="skip the Monte Carlo smeared check")
    return p


COMMANDS = {"slim": cmd_slim, "cone": cmd_cone, "rindler-verify": cmd_rindler_verify}
_GLOBAL = ("out", "seed", "tol", "config", "verbose", "command", "lambda_min", "lambda_ratio")


def resolve_config(args: argparse.Namespace, file_cfg: dict) -> RunConfig:
    def pick(name, default):
        v = getattr(args, name, None)
        if v is None:
            v = file_cfg.get(name, default)
        return v

    options = {k: v for k, v in file_cfg.items() if k not in _GLOBAL}
    options.update({k: v for k, v in vars(args).items() if k not in _GLOBAL and v not in (None, False)})
    return RunConfig(
        command=args.command,
        seed=int(pick("seed", 0)),
        out=str(pick("out", os.environ.get(OUT_ENV, "slimkms-out"))),
        tol=float(pick("tol", 1e-10)),
        lambda_min=float(pick("lambda_min", 1e-4)),
        lambda_ratio=float(pick("lambda_ratio", 0.5)),
        options=options,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        file_cfg = {}
        if args.config:
            from .io import read_json

            file_cfg = read_json(args.config)
            if not isinstance(file_cfg, dict):
                raise InputError("config file must hold a JSON object")
        cfg = resolve_config(args, file_cfg)
        t0 = time.perf_counter()
        code, summary = COMMANDS[args.command](cfg)
        log.info("finished in %.1f s", time.perf_counter() - t0)
    except OracleGateError as exc:
        print(f"oracle gate failed: {exc}", file=sys.stderr)
        return EXIT_GATE
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SlimError as exc:
        print(f"verdict failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(json.dumps({"command": args.command, "passed": summary.get("passed"), "out": cfg.out}))
    return code


if __name__ == "__main__":
    sys.exit(main())
