"""File formats: region descriptions, correlator interchange, probe sets and CSV reports."""

from __future__ import annotations

import csv
import datetime as _dt
import json
import math
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InputError
from .geometry import Region, region_from_spec
from .kms import CorrelationFunction, DeltaTerm, Envelope
from .rindler.verify import Probe

FORMAT_VERSION = 1


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _finite(x):
    """JSON has no infinities; encode them as strings."""
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    return x


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_finite(json.loads(json.dumps(obj, default=_json_default))), indent=2, sort_keys=True)
    path.write_text(text + "\n")
    return path


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def write_csv(path, rows: list[dict], config: dict | None = None, timestamp: bool = True) -> Path:
    """CSV with a commented header: one timestamp line, then the resolved configuration."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fields: list[str] = []
    for r in rows:
        for k in r:
            if k not in fields:
                fields.append(k)
    with path.open("w", newline="") as fh:
        if timestamp:
            fh.write(f"# generated: {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}\n")
        if config is not None:
            fh.write("# config: " + json.dumps(_finite(config), sort_keys=True, default=_json_default) + "\n")
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for r in rows:
            w.writerow({k: _cell(v) for k, v in r.items()})
    return path


def _cell(v):
    if isinstance(v, complex):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return json.dumps(list(v), default=_json_default)
    if isinstance(v, float):
        return repr(v)
    return v


def read_csv(path) -> tuple[list[dict], dict]:
    """Rows (as strings) and the config embedded in the header."""
    config: dict = {}
    lines = []
    with Path(path).open() as fh:
        for line in fh:
            if line.startswith("# config: "):
                config = json.loads(line[len("# config: "):])
            elif not line.startswith("#"):
                lines.append(line)
    return list(csv.DictReader(lines)), config


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------


def read_region(path) -> Region:
    """Region file: a JSON object with ``kind`` plus constructor parameters."""
    return region_from_spec(read_json(path))


# ---------------------------------------------------------------------------
# correlators
# ---------------------------------------------------------------------------


def write_correlator(path, C: CorrelationFunction, t) -> Path:
    """Sample the smooth part on ``t`` and store it with the envelope and delta list."""
    t = np.asarray(t, dtype=float)
    g = np.asarray(C.smooth(t), dtype=complex) if C.smooth is not None else np.zeros_like(t, dtype=complex)
    doc = {
        "format": "slimkms-correlator",
        "version": FORMAT_VERSION,
        "name": C.name,
        "beta": C.beta,
        "mass": C.mass,
        "samples": [[float(a), float(b.real), float(b.imag)] for a, b in zip(t, g)],
        "envelope": None if C.envelope is None else {
            "kind": C.envelope.kind, "scale": C.envelope.scale, "rate": C.envelope.rate, "extent": C.envelope.extent,
        },
        "deltas": [[d.location, complex(d.weight).real, complex(d.weight).imag] for d in C.deltas],
        "breakpoints": list(C.breakpoints),
        "notes": list(C.notes),
    }
    return write_json(path, doc)


def _num(x):
    return float(x) if x is not None else None


def correlator_from_dict(doc: dict) -> CorrelationFunction:
    if doc.get("format") != "slimkms-correlator":
        raise InputError("not a correlator file (missing format tag)")
    samples = np.asarray(doc.get("samples") or [], dtype=float)
    smooth = None
    support = ((-math.inf, math.inf),)
    if samples.size:
        if samples.ndim != 2 or samples.shape[1] != 3 or samples.shape[0] < 4:
            raise InputError("samples must be rows (t, re, im), at least 4 of them")
        t = samples[:, 0]
        if np.any(np.diff(t) <= 0):
            raise InputError("sample times must be strictly increasing")
        re = CubicSpline(t, samples[:, 1])
        im = CubicSpline(t, samples[:, 2])
        lo, hi = float(t[0]), float(t[-1])

        def smooth(x, re=re, im=im, lo=lo, hi=hi):
            x = np.asarray(x, dtype=float)
            inside = (x >= lo) & (x <= hi)
            return np.where(inside, re(np.clip(x, lo, hi)) + 1j * im(np.clip(x, lo, hi)), 0.0)

        support = ((lo, hi),)
    env = doc.get("envelope")
    envelope = None
    if env:
        envelope = Envelope(env["kind"], float(env["scale"]), float(env["rate"]), float(env.get("extent", math.inf)))
    deltas = tuple(DeltaTerm(float(d[0]), complex(d[1], d[2])) for d in doc.get("deltas", []))
    if smooth is None and not deltas:
        raise InputError("correlator has neither samples nor deltas")
    if smooth is None:
        support = ((-math.inf, math.inf),)
    return CorrelationFunction(
        smooth, deltas, envelope, support, tuple(doc.get("breakpoints", ())), _num(doc.get("beta")),
        _num(doc.get("mass")), doc.get("name", "correlator"), tuple(doc.get("notes", ())) + ("interpolated from samples",),
    )


def read_correlator(path) -> CorrelationFunction:
    return correlator_from_dict(read_json(path))


# ---------------------------------------------------------------------------
# probe sets
# ---------------------------------------------------------------------------


def read_probes(path) -> tuple[list[Probe], dict]:
    """Probe file: ``{"beta": .., "mass": .., "probes": [{"xi", "xi_prime", "d_perp", "s"}]}``."""
    doc = read_json(path)
    items = doc.get("probes")
    if not isinstance(items, list) or not items:
        raise InputError("probe file needs a non-empty 'probes' list")
    out = []
    for k, p in enumerate(items):
        try:
            s = p["s"]
            s = tuple(float(v) for v in (s if isinstance(s, list) else [s]))
            out.append(Probe(float(p["xi"]), float(p["xi_prime"]), float(p.get("d_perp", 0.0)), s))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"probe {k}: {exc}") from None
    meta = {k: v for k, v in doc.items() if k != "probes"}
    return out, meta


def write_probes(path, probes: list[Probe], **meta) -> Path:
    return write_json(path, {**meta, "probes": [p.as_dict() for p in probes]})
