"""Command-line front end: ``hardyergodic <subcommand> [flags]``.

Every parameter can also come from ``--config file.json`` (keys are the flag
names without dashes); explicit flags win over the file.  Exit codes: 0 on
success, 2 on usage errors, 1 when a computation fails.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any, Callable, Sequence

import numpy as np

from . import arcs, ergodic, expsum, hardy, variation
from .report import Report, emit

__all__ = ["main", "run", "build_parser", "UsageError"]


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# value converters (accept flag strings or JSON-native config values)


def _split(v) -> list:
    if isinstance(v, (list, tuple)):
        return list(v)
    return [s for s in str(v).replace(" ", "").split(",") if s]


def _floats(v) -> list[float]:
    return [float(x) for x in _split(v)]


def _ints(v) -> list[int]:
    return [int(x) for x in _split(v)]


def _complexes(v) -> list[complex]:
    return [complex(str(x).replace("i", "j")) for x in _split(v)]


def _family(v) -> list[hardy.HardyFunction]:
    fam = hardy.parse_family(v)
    if not fam:
        raise ValueError("empty family")
    return fam


def _lam(v) -> float | None:
    if v is None or str(v).lower() in ("none", "full"):
        return None
    return float(v)


def _arc_boxes(v) -> list[list[tuple[float, float]]]:
    """``lo:hi[,lo:hi...]`` per box, boxes separated by ``;``."""
    if isinstance(v, (list, tuple)):
        return [[tuple(map(float, arc)) for arc in box] for box in v]
    boxes = []
    for box in str(v).split(";"):
        box = box.strip()
        if box:
            boxes.append([tuple(float(x) for x in arc.split(":")) for arc in box.split(",")])
    for box in boxes:
        if any(len(arc) != 2 for arc in box):
            raise ValueError("each arc is lo:hi")
    return boxes


def _arc_length(lo: float, hi: float) -> float:
    if lo == 0.0 and hi == 1.0:
        return 1.0
    return (hi % 1.0 - lo % 1.0) % 1.0


# ---------------------------------------------------------------------------
# subcommands


def _cmd_expsum_scan(p: dict) -> Report:
    fam = p["family"]
    res = expsum.scan(fam, p["N"][0], p["l"][0], grid_per_dim=p["grid"] or 64, seed=p["seed"])
    rows = list(res.rows())
    return Report(res.header(), rows, {"N": res.N, "l": res.l, "family": [str(f) for f in fam],
                                       "max_abs_m_minor": float(np.max(res.abs_m[~res.in_major_arc], initial=0.0))})


def _cmd_variation(p: dict) -> Report:
    if p["values"] is None:
        raise UsageError("variation needs --values")
    seq = variation.IndexedSequence.from_values(np.asarray(p["values"], dtype=complex))
    res = variation.vr_norm(seq, p["r"])
    meta = res.as_dict()
    meta["r"] = p["r"]
    if p["deltas"]:
        meta["jump_counts"] = {format(d, ".17g"): variation.jump_count(seq, d) for d in p["deltas"]}
    return Report(("value", "sup_term", "jump_term"), [(res.value, res.sup_term, res.jump_term)], meta, json_rows=False)


def _cmd_jumps(p: dict) -> Report:
    if not p["deltas"]:
        raise UsageError("jumps needs --deltas")
    exp = ergodic.jump_experiment(p["family"], p["xi"], p["deltas"], p["nmax"], lam=p["lambda"], r=p["r"])
    meta = {"n_scales": len(exp.scales), "consistent": exp.report.consistent(), "slope": exp.slope,
            "vr": exp.report.variation.value, "limit": exp.report.limit}
    return Report(ergodic.JumpExperiment.HEADER, list(exp.rows()), meta)


def _cmd_equi(p: dict) -> Report:
    fam = p["family"]
    if p["alphas"] is None or p["arcs"] is None:
        raise UsageError("equi needs --alphas and --arcs")
    m = len(fam)
    # indicator observables do not use beta; it only has to be a valid character
    system = ergodic.TorusSystem(p["alphas"], p["beta"] or [1] * m)
    x0 = p["x0"] or [0.0] * m
    scales = p["scales"] or [p["nmax"]]
    rows = []
    for b, box in enumerate(p["arcs"]):
        if len(box) != m:
            raise UsageError(f"box {b} has {len(box)} arcs for a {m}-dimensional torus")
        measure = float(np.prod([_arc_length(lo, hi) for lo, hi in box]))
        dens = ergodic.equidistribution_trace(system, fam, x0, box, scales)
        for N, d in zip(scales, dens):
            rows.append((b, int(N), float(d), measure, abs(float(d) - measure)))
    return Report(("box", "N", "density", "measure", "error"), rows, {"alphas": list(system.alphas)})


def _cmd_arcs(p: dict) -> Report:
    cfg = arcs.ArcConfig(grid_size=p["grid"])
    rows = arcs.operator_ratio_sweep(cfg, p["family"], p["N"], p["l"], p["trials"], p["seed"], workers=p["threads"])
    return Report(("N", "l", "trials", "max_ratio", "median_ratio"), rows, {})


def _cmd_orbit(p: dict) -> Report:
    fam = p["family"]
    N = p["N"][0]
    orbit = expsum.orbit_matrix(fam, N)
    rows = [(n, *orbit[:, n - 1].tolist()) for n in range(1, N + 1)]
    return Report(("n", *[f"floor_{i + 1}" for i in range(len(fam))]), rows,
                  {"classification": hardy.classify_family(fam).verdict.value})


# name -> (handler, help text, required keys)
COMMANDS: dict[str, tuple[Callable[[dict], Report], str, tuple[str, ...]]] = {
    "expsum-scan": (_cmd_expsum_scan, "Scan |m_N(xi)| over a jittered frequency grid and flag the major-arc box.",
                    ("family", "N", "l")),
    "variation": (_cmd_variation, "r-variation norm (and optional delta-jump counts) of a value list.", ()),
    "jumps": (_cmd_jumps, "Delta-jump counts of the exponential-sum averages over lacunary or full scales.",
              ("family", "xi", "nmax")),
    "equi": (_cmd_equi, "Orbit densities of a torus rotation in boxes of half-open arcs.",
             ("family", "alphas", "arcs", "nmax")),
    "arcs": (_cmd_arcs, "Minor-arc operator ratio ||A_N f|| / ||f|| over random trial functions.",
             ("family", "N", "l")),
    "orbit": (_cmd_orbit, "Floor orbit floor(P_i(n)) for n = 1..N.", ("family", "N")),
}

# flag -> (converter, default)
PARAMS: dict[str, tuple[Callable[[Any], Any], Any]] = {
    "family": (_family, None),
    "N": (_ints, None),
    "l": (_ints, None),
    "grid": (int, None),
    "lambda": (_lam, 2.0),
    "nmax": (int, None),
    "deltas": (_floats, None),
    "r": (float, 2.5),
    "xi": (_floats, None),
    "alphas": (_floats, None),
    "beta": (_ints, None),
    "x0": (_floats, None),
    "arcs": (_arc_boxes, None),
    "values": (_complexes, None),
    "scales": (_ints, None),
    "trials": (int, 32),
    "seed": (int, 0),
    "threads": (int, None),
    "format": (str, None),
    "out": (str, None),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hardyergodic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="subcommand")
    sub.required = True
    for name, (_, helptext, _) in COMMANDS.items():
        sp = sub.add_parser(name, help=helptext, description=helptext)
        sp.add_argument("--config", help="JSON file with default parameters")
        for key in PARAMS:
            if key == "format":
                sp.add_argument("--format", choices=("csv", "json"), default=None)
            elif key == "lambda":
                sp.add_argument("--lambda", dest="lambda", default=None, help="lacunarity; 'none' uses every scale")
            else:
                sp.add_argument(f"--{key}", dest=key, default=None)
    return parser


def _resolve(ns: argparse.Namespace) -> dict:
    raw: dict[str, Any] = {}
    if ns.config:
        try:
            with open(ns.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(cfg) - set(PARAMS) - {"n_max"}
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if "n_max" in cfg:
            cfg.setdefault("nmax", cfg.pop("n_max"))
        raw.update(cfg)
    for key in PARAMS:
        v = getattr(ns, key)
        if v is not None:
            raw[key] = v

    params: dict[str, Any] = {}
    for key, (conv, default) in PARAMS.items():
        if key in raw and raw[key] is not None:
            try:
                params[key] = conv(raw[key])
            except (ValueError, TypeError) as exc:
                raise UsageError(f"bad value for --{key}: {raw[key]!r} ({exc})") from exc
        else:
            params[key] = default

    if params["threads"] is None:
        env = os.environ.get("HE_THREADS")
        try:
            params["threads"] = int(env) if env else 1
        except ValueError as exc:
            raise UsageError(f"HE_THREADS must be an integer, got {env!r}") from exc
    if params["threads"] < 1:
        raise UsageError("--threads must be positive")
    if params["seed"] < 0:
        raise UsageError("--seed must be nonnegative")

    missing = [k for k in COMMANDS[ns.command][2] if params[k] is None]
    if missing:
        raise UsageError(f"{ns.command} needs " + ", ".join(f"--{k}" for k in missing))
    if params["format"] is None:
        params["format"] = "json" if ns.command == "variation" else "csv"
    return params


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(list(sys.argv[1:] if argv is None else argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        params = _resolve(ns)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"hardyergodic {ns.command}: error: {exc}", file=sys.stderr)
        return 2
    handler = COMMANDS[ns.command][0]
    try:
        report = handler(params)
        emit(report, params["format"], params["out"])
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"hardyergodic {ns.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure inside a module
        print(f"hardyergodic {ns.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


run = main


if __name__ == "__main__":
    sys.exit(main())
