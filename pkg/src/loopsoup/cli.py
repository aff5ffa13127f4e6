"""Command-line interface: ``loopsoup {corr,blocks,mc,verify}``.

Every command prints a JSON document (or CSV where requested) carrying
``schema: 1`` and the content hash of its run manifest.  With ``--out-dir``
the artifacts and a ``manifest.json`` are also written to disk.

Exit codes: 0 success, 2 invalid input or configuration, 3 failed check.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

SCHEMA = 1
EXIT_OK, EXIT_INPUT, EXIT_CHECK = 0, 2, 3


class InputError(ValueError):
    """Invalid command-line input (exit code 2)."""


# ---------------------------------------------------------------------------
# Run manifest
# ---------------------------------------------------------------------------


def content_hash(obj) -> str:
    """Git-style content hash (sha1 over a ``blob <len>\\0`` header) of canonical JSON."""
    body = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()


@dataclass
class RunManifest:
    command: str
    parameters: dict
    config_hash: str = ""
    timestamp: str = ""
    outputs: list = field(default_factory=list)

    def __post_init__(self):
        if not self.config_hash:
            self.config_hash = content_hash({"command": self.command, "parameters": self.parameters})
        if not self.timestamp:
            # SOURCE_DATE_EPOCH pins the timestamp for reproducible manifests
            epoch = float(os.environ.get("SOURCE_DATE_EPOCH", time.time()))
            self.timestamp = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(epoch))

    def as_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "command": self.command,
            "parameters": self.parameters,
            "config_hash": self.config_hash,
            "timestamp": self.timestamp,
            "outputs": list(self.outputs),
        }


def _emit(manifest: RunManifest, out_dir, artifacts: dict, stdout_name: str) -> None:
    """Print one artifact and optionally write all of them plus the manifest."""
    if out_dir:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        for name, text in artifacts.items():
            (d / name).write_text(text)
            manifest.outputs.append(str(d / name))
        (d / "manifest.json").write_text(json.dumps(manifest.as_dict(), indent=2, sort_keys=True) + "\n")
    sys.stdout.write(artifacts[stdout_name])


def _json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Parsing helpers
# ---------------------------------------------------------------------------

_REAL = re.compile(
    r"^\s*(?P<sign>[+-]?)\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)\s*\*?\s*)?"
    r"(?P<pi>pi)?\s*(?:/\s*(?P<den>\d+(?:\.\d*)?))?\s*$"
)


def parse_real(text: str) -> float:
    """Real number, optionally a rational multiple of pi (``pi/2``, ``-2*pi/3``)."""
    m = _REAL.match(text)
    if not m or not (m.group("num") or m.group("pi")):
        raise InputError(f"cannot parse real number {text!r}")
    val = float(m.group("num")) if m.group("num") else 1.0
    if m.group("pi"):
        val *= math.pi
    if m.group("den"):
        den = float(m.group("den"))
        if den == 0:
            raise InputError(f"zero denominator in {text!r}")
        val /= den
    return -val if m.group("sign") == "-" else val


_NUM = r"(?:\d+\.?\d*|\.\d+)(?:e[+-]?\d+)?"
_TERM = re.compile(rf"([+-]?)({_NUM})?(j?)")


def parse_complex(text: str) -> complex:
    """Parse ``2``, ``1.5j``, ``i``, ``i+2``, ``-0.5+3i`` and similar sums."""
    s = text.strip().replace(" ", "").lower().replace("i", "j")
    pos, total = 0, 0j
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos or not (m.group(2) or m.group(3)):
            raise InputError(f"cannot parse complex number {text!r}")
        sign = -1.0 if m.group(1) == "-" else 1.0
        mag = float(m.group(2)) if m.group(2) else 1.0
        total += sign * mag * (1j if m.group(3) else 1.0)
        pos = m.end()
        if pos < len(s) and s[pos] not in "+-":
            raise InputError(f"cannot parse complex number {text!r}")
    if not s:
        raise InputError("empty complex number")
    return total


def _split(text: str) -> list:
    return [t for t in re.split(r"[;,]", text) if t.strip()]


def parse_points(text: str) -> list:
    return [parse_complex(t) for t in _split(text)]


def parse_reals(text: str) -> list:
    return [parse_real(t) for t in _split(text)]


# ---------------------------------------------------------------------------
# corr
# ---------------------------------------------------------------------------


def _corr_value(points, betas, lam, domain):
    from .correlators import (
        ChargeVector,
        four_point_plane,
        one_point_halfplane,
        three_point_plane,
        two_point_halfplane,
        two_point_plane,
    )
    from .weights import HalfPlanePair

    if len(points) != len(betas):
        raise InputError("need one charge per point")
    c = ChargeVector(tuple(betas), lam)
    n = len(points)
    if domain == "half-plane":
        if any(z.imag <= 0 for z in points):
            raise InputError("half-plane points need positive imaginary part")
        if n == 1:
            return one_point_halfplane(points[0], betas[0], lam)
        if n == 2:
            return two_point_halfplane(HalfPlanePair(points[0], points[1]), c)
        raise InputError("half-plane correlators are available for one or two points")
    fns = {2: two_point_plane, 3: three_point_plane, 4: four_point_plane}
    if n not in fns:
        raise InputError("plane correlators are available for two, three or four points")
    return fns[n](*points, c)


def cmd_corr(args) -> int:
    from .correlators import ChargeConservationError

    points = parse_points(args.points)
    betas = parse_reals(args.betas)
    if not args.lam > 0:
        raise InputError("--lambda must be positive")
    try:
        value = _corr_value(points, betas, args.lam, args.domain)
    except ChargeConservationError as exc:
        raise InputError(str(exc)) from None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    params = {
        "points": [[z.real, z.imag] for z in points],
        "betas": betas,
        "lambda": args.lam,
        "domain": args.domain,
    }
    man = RunManifest("corr", params)
    if args.out == "json":
        doc = {"schema": SCHEMA, "quantity": "correlator", "value": value, "manifest": man.config_hash, **params}
        text, name = _json(doc), "corr.json"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["domain", "lambda", "points", "betas", "value", "manifest"])
        pts = " ".join(f"{z.real:.17g}{z.imag:+.17g}j" for z in points)
        w.writerow([args.domain, repr(args.lam), pts, " ".join(repr(b) for b in betas), repr(value), man.config_hash])
        text, name = buf.getvalue(), "corr.csv"
    _emit(man, args.out_dir, {name: text}, name)
    return EXIT_OK


# ---------------------------------------------------------------------------
# blocks
# ---------------------------------------------------------------------------

_CASES = {"pi": "all_pi", "pi2": "all_half_pi"}


def cmd_blocks(args) -> int:
    from .blocks import (
        K_MAX,
        NullStateError,
        extract_c_products,
        null_state_scan,
        null_states,
        special_case_charges,
    )
    from .correlators import ChargeConservationError, ChargeVector

    max_p = args.max_p
    if not 0 <= max_p <= 3 * K_MAX + 2:
        raise InputError(f"--max-p must lie in [0, {3 * K_MAX + 2}]")
    if not args.lam > 0:
        raise InputError("--lambda must be positive")
    if args.case == "general":
        if not args.betas:
            raise InputError("--case general needs --betas with four charges")
        betas = parse_reals(args.betas)
        if len(betas) != 4:
            raise InputError("--betas needs four charges")
        try:
            c = ChargeVector(tuple(betas), args.lam)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    else:
        c = special_case_charges(_CASES[args.case], args.lam)
    params = {"case": args.case, "max_p": max_p, "lambda": args.lam, "betas": list(c.betas)}
    man = RunManifest("blocks", params)
    poles = null_states(c, max_p)
    error = None
    rows = []
    try:
        table = extract_c_products(c, max_p)
        rows = table.rows()
    except ChargeConservationError as exc:
        raise InputError(str(exc)) from None
    except NullStateError as exc:
        error = str(exc)
    scan = []
    if args.scan:
        lo, hi, n = args.scan
        if args.case == "general" or not (0 < lo < hi) or int(n) < 2:
            raise InputError("--scan needs --case pi|pi2 and 0 < LO < HI, N >= 2")
        grid = np.linspace(lo, hi, int(n))
        for entry in [(p, pp) for p in range(max_p + 1) for pp in range(max_p + 1) if (p - pp) % 3 == 0]:
            for lam_star, e, (a, b) in null_state_scan(_CASES[args.case], grid, max_p, entry):
                scan.append({"lambda": lam_star, "entry": list(e), "bracket": [a, b]})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "p_prime", "value"])
    for p, pp, v in rows:
        w.writerow([p, pp, repr(float(v))])
    sidecar = {
        "schema": SCHEMA,
        "manifest": man.config_hash,
        "null_states": poles,
        "extraction_error": error,
        "scan": scan,
    }
    _emit(man, args.out_dir, {"blocks.csv": buf.getvalue(), "null_poles.json": _json(sidecar)}, "blocks.csv")
    if not args.out_dir:
        sys.stderr.write(_json(sidecar))
    return EXIT_OK


# ---------------------------------------------------------------------------
# mc
# ---------------------------------------------------------------------------


def cmd_mc(args) -> int:
    from .correlators import ChargeVector
    from .montecarlo import ConfigError, SoupConfig, load_config
    from .montecarlo import checks
    from .montecarlo.estimators import estimate_alpha, estimate_alpha_bar, estimate_correlator

    try:
        cfg = load_config(args.config) if args.config else None
        if cfg is not None and args.workers:
            cfg = cfg.replace(workers=args.workers)
    except ConfigError as exc:
        raise InputError(f"config error: {exc}") from None
    records, failed = [], False
    try:
        for name in args.check or []:
            res = checks.run_check(name, cfg, workers=args.workers)
            records.append(res.record())
            failed |= not res.passed
        if args.alpha:
            S = parse_points(args.alpha)
            Sc = parse_points(args.exclude) if args.exclude else []
            records.append(estimate_alpha(cfg or SoupConfig(), S, Sc).record())
        if args.correlator:
            if not args.betas:
                raise InputError("--correlator needs --betas")
            pts = parse_points(args.correlator)
            c = ChargeVector(tuple(parse_reals(args.betas)), args.lam)
            records.append(estimate_correlator(cfg or SoupConfig(), pts, c).record())
        if args.alpha_bar:
            records.append(estimate_alpha_bar(cfg or SoupConfig(domain="upper_half_plane", window=(-6, 6, 0, 6))).record())
    except (ConfigError, ValueError) as exc:
        raise InputError(f"config error: {exc}") from None
    if not records:
        raise InputError("nothing to do: give --check, --alpha, --correlator or --alpha-bar")
    params = {"config": cfg.as_dict() if cfg else None, "check": args.check, "alpha": args.alpha,
              "exclude": args.exclude, "correlator": args.correlator, "betas": args.betas,
              "lambda": args.lam, "alpha_bar": args.alpha_bar}
    man = RunManifest("mc", params)
    doc = {"schema": SCHEMA, "manifest": man.config_hash, "records": records}
    _emit(man, args.out_dir, {"mc.json": _json(doc)}, "mc.json")
    return EXIT_CHECK if failed else EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def cmd_verify(args) -> int:
    from .verify import run_identity_suite

    report = run_identity_suite(tol=args.tol, mu_perturbation=args.perturb_mu)
    man = RunManifest("verify", {"tol": args.tol, "perturb_mu": args.perturb_mu})
    doc = {"schema": SCHEMA, "manifest": man.config_hash, **report}
    _emit(man, args.out_dir, {"verify.json": _json(doc)}, "verify.json")
    return EXIT_OK if report["passed"] else EXIT_CHECK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="loopsoup", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"loopsoup {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("corr", help="closed-form correlator")
    p.add_argument("--points", required=True, help="comma-separated complex points, e.g. '0,2' or '1j,1+2j'")
    p.add_argument("--betas", required=True, help="comma-separated charges; 'pi', 'pi/2', '-2*pi/3' accepted")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--domain", choices=("half-plane", "plane"), default="plane")
    p.add_argument("--out", choices=("json", "csv"), default="json")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser("blocks", help="three-point coefficient products from block extraction")
    p.add_argument("--case", choices=("general", "pi", "pi2"), default="pi")
    p.add_argument("--max-p", type=int, default=11)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--betas", help="four charges for --case general")
    p.add_argument("--scan", nargs=3, type=float, metavar=("LO", "HI", "N"),
                   help="scan intensities for null-state poles of every entry")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_blocks)

    p = sub.add_parser("mc", help="Monte Carlo estimators and statistical checks")
    p.add_argument("config", nargs="?", help="INI config file with a [soup] section")
    p.add_argument("--check", action="append", choices=("alpha-square", "nacu-werner", "pair-halfplane",
                                                         "ratio-halfplane", "imaginary-part"))
    p.add_argument("--alpha", help="points S that loops must fill")
    p.add_argument("--exclude", help="points Sc that loops must not fill")
    p.add_argument("--correlator", help="points of a layering correlator")
    p.add_argument("--betas")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--alpha-bar", action="store_true")
    p.add_argument("--workers", type=int, default=0, help="override the worker count")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("verify", help="closed-form identity suite")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--perturb-mu", type=float, default=0.0, help=argparse.SUPPRESS)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad flags already
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"loopsoup {args.command}: error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
