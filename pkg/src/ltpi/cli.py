"""Command line entry point: ``ltpi simulate | pi | poos``.

Every flag can also be given in a ``--config`` file with one ``key = value``
per line (key = flag name without leading dashes; ``-`` and ``_`` are
interchangeable, ``#`` starts a comment).  Flags on the command line win.

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness
from ._accel import backend
from .dgp import SCENARIOS
from .exceptions import InvalidInputError, NumericalError
from .pascual import MAX_ORDER

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

logger = logging.getLogger("ltpi")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidInputError(message)


def _ints(text: str) -> tuple:
    try:
        return tuple(int(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise InvalidInputError(f"expected comma-separated integers, got {text!r}") from None


def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise InvalidInputError(f"expected comma-separated numbers, got {text!r}") from None


def _names(text: str, allowed, what: str) -> tuple:
    items = tuple(v.strip() for v in str(text).split(",") if v.strip())
    if items == ("all",):
        return tuple(allowed)
    bad = [v for v in items if v not in allowed]
    if bad or not items:
        raise InvalidInputError(f"unknown {what} {bad}; choose from {', '.join(allowed)}")
    return items


def _d_map(text, methods) -> dict:
    """``"1"`` applies to every method; ``"clt-tdist=1,kernel-boot=0.5"`` per method."""
    if text is None:
        return {}
    text = str(text)
    out = {}
    if "=" not in text:
        d = _d_value(text)
        return {me: d for me in methods}
    for part in text.split(","):
        name, _, val = part.partition("=")
        name = name.strip()
        if name not in harness.METHODS:
            raise InvalidInputError(f"unknown method {name!r} in --d")
        out[name] = _d_value(val)
    return out


def _d_value(text) -> float:
    try:
        d = float(text)
    except ValueError:
        raise InvalidInputError(f"--d must be 0, 0.5 or 1, got {text!r}") from None
    if d not in (0.0, 0.5, 1.0):
        raise InvalidInputError(f"--d must be 0, 0.5 or 1, got {text!r}")
    return d


def read_config(path) -> dict:
    """Parse ``key = value`` lines into a dict with ``_`` separated keys."""
    out = {}
    for no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep or not key.strip():
            raise InvalidInputError(f"{path}: line {no} is not 'key = value'")
        out[key.strip().lstrip("-").replace("-", "_")] = val.strip()
    return out


# flag defaults live here, not in argparse, so a config file can fill gaps
DEFAULTS = {
    "simulate": {"scenario": "all", "trials": 2000, "t": 260,
                 "horizons": "20,30,40,60,90,130", "levels": "0.90,0.67",
                 "methods": ",".join(harness.TABLE1_METHODS), "seed": 0, "out": None,
                 "format": "csv", "b_reps": 1000, "sigma": 1.31, "jobs": 1},
    "pi": {"csv": None, "column": None, "m": None, "level": 0.90,
           "method": "kernel-boot", "d": 0.0, "b_reps": 1000, "seed": 0, "trend": False},
    "poos": {"csv": None, "column": None, "window": 260,
             "horizons": "20,30,40,60,90,130", "levels": "0.90,0.67",
             "methods": ",".join(harness.TABLE1_METHODS), "d": None, "seed": 0,
             "out": None, "format": "csv", "step": None, "b_reps": 1000},
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ltpi", description="Prediction intervals for long-run averages.")
    p.add_argument("--config", default=argparse.SUPPRESS,
                   help="file of 'key = value' lines mirroring the flags")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="Monte-Carlo coverage study")
    s.add_argument("--config", default=argparse.SUPPRESS)
    s.add_argument("--scenario", help=f"comma list of {', '.join(SCENARIOS)} or 'all'")
    s.add_argument("--trials", type=int)
    s.add_argument("--t", type=int, help="in-sample length")
    s.add_argument("--horizons")
    s.add_argument("--levels")
    s.add_argument("--methods", help=f"comma list of {', '.join(harness.METHODS)} or 'all'")
    s.add_argument("--seed", type=int, help="base seed; trial i uses seed + i")
    s.add_argument("--out")
    s.add_argument("--format", choices=("csv", "text"))
    s.add_argument("--b-reps", type=int, dest="b_reps")
    s.add_argument("--sigma", type=float)
    s.add_argument("--jobs", type=int)

    q = sub.add_parser("pi", help="one interval for a CSV column",
                       description=f"ARMA orders of the model-based methods are capped "
                                   f"at {MAX_ORDER}.")
    q.add_argument("--config", default=argparse.SUPPRESS)
    q.add_argument("--csv")
    q.add_argument("--column")
    q.add_argument("--m", type=int)
    q.add_argument("--level", type=float)
    q.add_argument("--method", choices=harness.METHODS)
    q.add_argument("--d", help="differencing order 0, 0.5 or 1")
    q.add_argument("--b-reps", type=int, dest="b_reps")
    q.add_argument("--seed", type=int)
    q.add_argument("--trend", action="store_const", const=True,
                   help="with d = 1, shift the location by the mean drift")

    r = sub.add_parser("poos", help="rolling out-of-sample evaluation of a CSV column")
    r.add_argument("--config", default=argparse.SUPPRESS)
    r.add_argument("--csv")
    r.add_argument("--column")
    r.add_argument("--window", type=int)
    r.add_argument("--horizons")
    r.add_argument("--levels")
    r.add_argument("--methods")
    r.add_argument("--d", help="0, 0.5, 1 for all methods, or method=d pairs")
    r.add_argument("--seed", type=int)
    r.add_argument("--out")
    r.add_argument("--format", choices=("csv", "text"))
    r.add_argument("--step", type=int, help="window stride (default: the horizon)")
    r.add_argument("--b-reps", type=int, dest="b_reps")
    return p


def _merge(cmd: str, ns: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS[cmd])
    path = getattr(ns, "config", None)
    if path:
        cfg = read_config(path)
        unknown = set(cfg) - set(opts)
        if unknown:
            raise InvalidInputError(f"unknown config keys {sorted(unknown)}")
        opts.update(cfg)
    for key in DEFAULTS[cmd]:
        val = getattr(ns, key, None)
        if val is not None:
            opts[key] = val
    return opts


def _int(v, name):
    try:
        return int(v)
    except (TypeError, ValueError):
        raise InvalidInputError(f"{name} must be an integer, got {v!r}") from None


def _float(v, name):
    try:
        return float(v)
    except (TypeError, ValueError):
        raise InvalidInputError(f"{name} must be a number, got {v!r}") from None


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    return str(v).strip().lower() in ("1", "true", "yes", "on")


def _require(opts, *keys):
    missing = [k for k in keys if opts.get(k) in (None, "")]
    if missing:
        raise InvalidInputError(f"missing required option(s): {', '.join(missing)}")


def _output(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_simulate(opts: dict) -> int:
    methods = _names(opts["methods"], harness.METHODS, "methods")
    cfg = harness.SimConfig(
        scenarios=_names(opts["scenario"], tuple(SCENARIOS), "scenarios"),
        T=_int(opts["t"], "t"), horizons=_ints(opts["horizons"]),
        sigma=_float(opts["sigma"], "sigma"), levels=_floats(opts["levels"]),
        n_trials=_int(opts["trials"], "trials"), methods=methods,
        base_seed=_int(opts["seed"], "seed"),
        settings=harness.MethodSettings(B=_int(opts["b_reps"], "b-reps")),
    )
    logger.info("simulate: %d trials, backend %s", cfg.n_trials, backend())
    report = harness.run_simulation(cfg, n_jobs=_int(opts["jobs"], "jobs"))
    _output(harness.emit_report(report, fmt=opts["format"]), opts["out"])
    return EXIT_OK


def cmd_pi(opts: dict) -> int:
    _require(opts, "csv", "column", "m")
    y = harness.load_csv_column(opts["csv"], opts["column"])
    method = opts["method"]
    if method not in harness.METHODS:
        raise InvalidInputError(f"unknown method {method!r}")
    m = _int(opts["m"], "m")
    level = _float(opts["level"], "level")
    seed = _int(opts["seed"], "seed")
    d = _d_value(opts["d"])
    st = harness.MethodSettings(B=_int(opts["b_reps"], "b-reps"),
                                boot_paths=max(500, _int(opts["b_reps"], "b-reps")),
                                d={method: d}, trend=_bool(opts["trend"]))
    if d and method not in harness.D_AWARE:
        logger.warning("%s ignores --d", method)
    iv = harness.build_intervals(method, y, m, (level,), st, seed=seed)[level]
    print("method,horizon,level,lower,upper")
    print(f"{iv.method},{iv.horizon},{iv.level},{iv.lower!r},{iv.upper!r}")
    return EXIT_OK


def cmd_poos(opts: dict) -> int:
    _require(opts, "csv", "column")
    methods = _names(opts["methods"], harness.METHODS, "methods")
    b = _int(opts["b_reps"], "b-reps")
    cfg = harness.PoosConfig(
        csv_path=opts["csv"], column=opts["column"], T=_int(opts["window"], "window"),
        horizons=_ints(opts["horizons"]), levels=_floats(opts["levels"]),
        step=None if opts["step"] in (None, "") else _int(opts["step"], "step"),
        methods=methods, base_seed=_int(opts["seed"], "seed"),
        settings=harness.MethodSettings(B=b, boot_paths=max(500, b),
                                        d=_d_map(opts["d"], methods)),
    )
    report = harness.run_poos(cfg)
    _output(harness.emit_report(report, fmt=opts["format"]), opts["out"])
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "pi": cmd_pi, "poos": cmd_poos}


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[ns.command](_merge(ns.command, ns))
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
