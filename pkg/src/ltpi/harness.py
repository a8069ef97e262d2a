"""Monte-Carlo coverage experiments, rolling out-of-sample evaluation and reports.

Every trial owns its random streams: the data of trial ``i`` come from
``make_rng(base_seed + i)`` and each method draws from a Philox stream keyed
by ``(base_seed + i, method id, horizon)``.  Results therefore do not depend
on the order trials run in, on how many workers run them, or on which other
methods are evaluated alongside.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from . import mw, pascual, zxw
from .core import Interval, as_series
from .dgp import SCENARIOS, gen_scenario, make_rng
from .exceptions import InvalidInputError, NumericalError

__all__ = [
    "METHODS",
    "SimConfig",
    "PoosConfig",
    "CoverageCell",
    "CoverageReport",
    "CsvError",
    "load_csv_column",
    "build_intervals",
    "run_simulation",
    "run_poos",
    "relative_median_width",
    "emit_report",
    "read_report_csv",
]

logger = logging.getLogger(__name__)

METHODS = (
    "qtl-original",
    "qtl-kernel",
    "clt-original",
    "clt-tdist",
    "kernel-boot",
    "qtl-boot",
    "mw-naive",
    "4cast-anlt",
    "4cast-boot",
    "series-anlt",
    "series-boot",
)
TABLE1_METHODS = METHODS[:6]
D_AWARE = {"clt-tdist", "kernel-boot", "qtl-boot", "4cast-anlt", "4cast-boot",
           "series-anlt", "series-boot"}
CSV_FIELDS = ("scenario", "method", "horizon", "level", "coverage", "rel_width",
              "n_trials", "n_skips")


class CsvError(InvalidInputError):
    """Malformed CSV input; the message names the offending row."""


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MethodSettings:
    """Tuning shared by all interval builders."""

    B: int = 1000
    boot_paths: int = 1000
    q: int = mw.DEFAULT_Q
    k_T: int | None = None
    d: dict = field(default_factory=dict)
    trend: bool = False

    def d_for(self, method: str) -> float:
        return float(self.d.get(method, 0.0)) if method in D_AWARE else 0.0


@dataclass(frozen=True)
class SimConfig:
    """Monte-Carlo design.

    Attributes
    ----------
    scenarios : tuple of str
        Keys of :data:`ltpi.dgp.SCENARIOS`.
    T : int
        In-sample length.
    horizons : tuple of int
    sigma : float
        Innovation scale applied to every scenario.
    levels : tuple of float
    n_trials : int
    methods : tuple of str
    base_seed : int
    settings : MethodSettings
    """

    scenarios: tuple = tuple(SCENARIOS)
    T: int = 260
    horizons: tuple = (20, 30, 40, 60, 90, 130)
    sigma: float = 1.31
    levels: tuple = (0.90, 0.67)
    n_trials: int = 10_000
    methods: tuple = TABLE1_METHODS
    base_seed: int = 0
    settings: MethodSettings = field(default_factory=MethodSettings)

    def validate(self) -> "SimConfig":
        unknown = set(self.scenarios) - set(SCENARIOS)
        if unknown or not self.scenarios:
            raise InvalidInputError(f"unknown scenarios {sorted(unknown)}")
        _check_methods(self.methods)
        _check_levels(self.levels)
        if not self.horizons or min(self.horizons) < 1 or max(self.horizons) > self.T:
            raise InvalidInputError("horizons must lie in [1, T]")
        if self.n_trials < 100:
            raise InvalidInputError("n_trials must be at least 100")
        if self.sigma <= 0:
            raise InvalidInputError("sigma must be positive")
        if self.base_seed < 0:
            raise InvalidInputError("base_seed must be non-negative")
        return self


@dataclass(frozen=True)
class PoosConfig:
    """Rolling pseudo-out-of-sample design.

    ``step=None`` moves the window by ``m`` so consecutive targets do not
    overlap.
    """

    csv_path: str | Path = ""
    column: str = ""
    T: int = 260
    horizons: tuple = (20, 30, 40, 60, 90, 130)
    levels: tuple = (0.90, 0.67)
    step: int | None = None
    methods: tuple = TABLE1_METHODS
    base_seed: int = 0
    settings: MethodSettings = field(default_factory=MethodSettings)
    label: str | None = None

    def validate(self) -> "PoosConfig":
        _check_methods(self.methods)
        _check_levels(self.levels)
        if self.T < 50:
            raise InvalidInputError("window T must be at least 50")
        if not self.horizons or min(self.horizons) < 1 or max(self.horizons) > self.T:
            raise InvalidInputError("horizons must lie in [1, T]")
        if self.step is not None and self.step < 1:
            raise InvalidInputError("step must be positive")
        return self


def _check_methods(methods):
    unknown = set(methods) - set(METHODS)
    if unknown or not methods:
        raise InvalidInputError(f"unknown methods {sorted(unknown)}")


def _check_levels(levels):
    if not levels or any(not 0.0 < lv < 1.0 for lv in levels):
        raise InvalidInputError("levels must lie in (0, 1)")


# ---------------------------------------------------------------------------
# interval builders
# ---------------------------------------------------------------------------


def method_rng(seed: int, method: str, m: int) -> np.random.Generator:
    """Philox stream reserved for one (trial seed, method, horizon).

    ``qtl-boot`` reads the ``kernel-boot`` stream: both summarise the same
    bootstrap draws.
    """
    if method == "qtl-boot":
        method = "kernel-boot"
    if method not in METHODS:
        raise InvalidInputError(f"unknown method {method!r}")
    ss = np.random.SeedSequence([int(seed), METHODS.index(method), int(m)])
    return np.random.Generator(np.random.Philox(ss))


def _zcfg(method: str, st: MethodSettings) -> zxw.ZxwConfig:
    return zxw.ZxwConfig(d=st.d_for(method), B=st.B, trend=st.trend)


def _build_zxw(method, y, m, levels, st, rng, cache):
    if method in ("qtl-original", "qtl-kernel"):
        kern = method == "qtl-kernel"
        return {lv: zxw.pi_qtl_original(y, m, lv, kernel=kern) for lv in levels}
    if method == "clt-original":
        return {lv: zxw.pi_clt_original(y, m, lv, k_T=st.k_T) for lv in levels}
    cfg = _zcfg(method, st)
    if method == "clt-tdist":
        return {lv: zxw.pi_clt_tdist(y, m, lv, cfg) for lv in levels}
    # kernel-boot and qtl-boot summarise the same bootstrap draws
    key = ("boot", cfg.d, m)
    if key not in cache:
        cache[key] = zxw.kernel_boot_draws(y, m, cfg, rng)
    means, anchor = cache[key]
    kern = method == "kernel-boot"
    return {lv: zxw.interval_from_means(means, anchor, m, lv, cfg, kern) for lv in levels}


def _build_pascual(method, y, m, levels, st, rng, cache, seed):
    d = st.d_for(method)
    mode = "analytic" if method.endswith("anlt") else "bootstrap"
    if method.startswith("4cast"):
        key = ("select", d)
        if key not in cache:
            try:
                cache[key] = pascual.select(y, d=d, seed=seed)
            except (InvalidInputError, NumericalError) as exc:
                cache[key] = exc
        model = cache[key]
        if isinstance(model, Exception):
            raise model
        return _levels_from(lambda lv, r: pascual.pi_avg_forecasts(
            model, m, lv, mode, st.boot_paths, r), levels, rng)
    return _levels_from(lambda lv, r: pascual.pi_avg_series(
        y, m, lv, mode, st.boot_paths, r, d=d, seed=seed), levels, rng)


def _levels_from(fn, levels, rng):
    # reuse one stream state per level so the bootstrap draws are shared
    state = rng.bit_generator.state
    out = {}
    for lv in levels:
        rng.bit_generator.state = state
        out[lv] = fn(lv, rng)
    return out


def build_intervals(method: str, y: np.ndarray, m: int, levels: Iterable[float],
                    settings: MethodSettings | None = None,
                    rng: np.random.Generator | None = None,
                    cache: dict | None = None, seed: int = 0) -> dict:
    """Intervals of one method for several levels from the same draws.

    Returns
    -------
    dict
        ``level -> Interval``.
    """
    st = settings or MethodSettings()
    rng = rng if rng is not None else method_rng(seed, method, m)
    cache = {} if cache is None else cache
    levels = tuple(levels)
    if method == "mw-naive":
        return {lv: mw.pi_naive(y, m, st.q, lv) for lv in levels}
    if method in pascual_methods():
        return _build_pascual(method, y, m, levels, st, rng, cache, seed)
    if method in METHODS:
        return _build_zxw(method, y, m, levels, st, rng, cache)
    raise InvalidInputError(f"unknown method {method!r}")


def pascual_methods() -> tuple:
    return METHODS[7:]


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


def relative_median_width(widths, oos_means, level: float) -> float | None:
    """Median width over the inter-quantile range of realised targets.

    Returns ``None`` when that range is zero (undefined ratio).
    """
    w = np.asarray(widths, dtype=np.float64)
    t = np.asarray(oos_means, dtype=np.float64)
    if w.size == 0 or t.size == 0:
        raise InvalidInputError("widths and targets must be nonempty")
    a = (1.0 - level) / 2.0
    lo, hi = np.quantile(t, [a, 1.0 - a])
    denom = hi - lo
    if denom <= 0.0:
        return None
    return float(np.median(w) / denom)


@dataclass(frozen=True)
class CoverageCell:
    """Aggregate for one (scenario, method, horizon, level).

    ``coverage`` is stored at 4 decimals, the precision of the CSV report.
    """

    scenario: str
    method: str
    horizon: int
    level: float
    coverage: float | None
    rel_width: float | None
    n_trials: int
    n_skips: int
    median_width: float | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.coverage is not None:
            if not 0.0 <= self.coverage <= 1.0:
                raise InvalidInputError("coverage outside [0, 1]")
            object.__setattr__(self, "coverage", round(float(self.coverage), 4))


@dataclass
class CoverageReport:
    cells: list = field(default_factory=list)

    def __len__(self):
        return len(self.cells)

    def get(self, scenario, method, horizon, level) -> CoverageCell:
        for c in self.cells:
            if (c.scenario, c.method, c.horizon) == (scenario, method, horizon) \
                    and math.isclose(c.level, level):
                return c
        raise KeyError((scenario, method, horizon, level))


class _Tally:
    """Per-(method, horizon, level) containment flags and widths."""

    def __init__(self):
        self.hits, self.widths, self.skips = [], [], 0

    def add(self, interval: Interval | None, target: float):
        if interval is None:
            self.skips += 1
            return
        self.hits.append(interval.contains(target))
        self.widths.append(interval.width)


def _aggregate(label, tallies, targets, n_trials) -> list:
    cells = []
    for (method, m, lv), tl in tallies.items():
        used = len(tl.hits)
        cov = float(np.mean(tl.hits)) if used else None
        rw = relative_median_width(tl.widths, targets[m], lv) if used else None
        med = float(np.median(tl.widths)) if used else None
        cells.append(CoverageCell(label, method, m, lv, cov, rw, n_trials, tl.skips, med))
    return cells


def _evaluate(y, futures: dict, methods, levels, st, seed, tallies):
    """Build every interval for one in-sample series and score it."""
    cache = {}
    for method in methods:
        for m, target in futures.items():
            try:
                ivs = build_intervals(method, y, m, levels, st, method_rng(seed, method, m),
                                      cache, seed)
            except (InvalidInputError, NumericalError, FloatingPointError) as exc:
                logger.debug("seed %d %s m=%d skipped: %s", seed, method, m, exc)
                ivs = {lv: None for lv in levels}
            for lv in levels:
                tallies[(method, m, lv)].add(ivs[lv], target)


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------


def _trial(args):
    scenario, cfg, i = args
    spec = SCENARIOS[scenario].with_(sigma=cfg.sigma)
    seed = cfg.base_seed + i
    x = gen_scenario(spec, cfg.T + max(cfg.horizons), make_rng(seed))
    y = x[:cfg.T]
    futures = {m: float(x[cfg.T:cfg.T + m].mean()) for m in cfg.horizons}
    tallies = {(me, m, lv): _Tally() for me in cfg.methods for m in cfg.horizons
               for lv in cfg.levels}
    _evaluate(y, futures, cfg.methods, cfg.levels, cfg.settings, seed, tallies)
    return i, futures, tallies


def run_simulation(cfg: SimConfig, n_jobs: int = 1,
                   progress: Callable[[int], None] | None = None) -> CoverageReport:
    """Coverage and relative median width for every configured cell.

    Each trial draws ``T + max(horizons)`` points; the target for horizon
    ``m`` is the mean of the ``m`` values after the first ``T``.  Failed
    interval constructions are counted as skips and excluded from the
    coverage denominator.

    Parameters
    ----------
    cfg : SimConfig
    n_jobs : int
        Worker processes; the report does not depend on this.
    progress : callable, optional
        Called with the number of finished trials.
    """
    cfg.validate()
    report = CoverageReport()
    for scenario in cfg.scenarios:
        jobs = [(scenario, cfg, i) for i in range(cfg.n_trials)]
        if n_jobs > 1:
            with ProcessPoolExecutor(n_jobs) as pool:
                results = list(pool.map(_trial, jobs, chunksize=16))
        else:
            results = []
            for k, job in enumerate(jobs):
                results.append(_trial(job))
                if progress is not None:
                    progress(k + 1)
        results.sort(key=lambda r: r[0])
        targets = {m: np.array([r[1][m] for r in results]) for m in cfg.horizons}
        merged = {}
        for _, _, tallies in results:
            for key, tl in tallies.items():
                acc = merged.setdefault(key, _Tally())
                acc.hits += tl.hits
                acc.widths += tl.widths
                acc.skips += tl.skips
        report.cells += _aggregate(scenario, merged, targets, cfg.n_trials)
    return report


# ---------------------------------------------------------------------------
# rolling out-of-sample evaluation
# ---------------------------------------------------------------------------


def load_csv_column(path, column: str) -> np.ndarray:
    """Read one numeric column, in file order, from a headed CSV file.

    Raises
    ------
    CsvError
        Missing header or column, blank/NA cells, unparsable numbers; the
        message gives the 1-based file row.
    OSError
        If the file cannot be read.
    """
    path = Path(path)
    values = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvError(f"{path}: empty file, header row required") from None
        header = [h.strip() for h in header]
        if column not in header:
            raise CsvError(f"{path}: column {column!r} not in header {header}")
        k = header.index(column)
        for row_no, row in enumerate(reader, start=2):
            if not row:
                raise CsvError(f"{path}: row {row_no} is empty")
            if k >= len(row):
                raise CsvError(f"{path}: row {row_no} has no {column!r} cell")
            cell = row[k].strip()
            if cell == "" or cell.upper() in ("NA", "NAN", "N/A", "NULL"):
                raise CsvError(f"{path}: row {row_no} has a missing value")
            try:
                v = float(cell)
            except ValueError:
                raise CsvError(f"{path}: row {row_no} value {cell!r} is not a number") from None
            if not math.isfinite(v):
                raise CsvError(f"{path}: row {row_no} value {cell!r} is not finite")
            values.append(v)
    if not values:
        raise CsvError(f"{path}: no data rows")
    return np.array(values)


def poos_origins(n: int, T: int, m: int, step: int | None = None) -> range:
    """Start indices of the in-sample windows of length ``T``."""
    step = m if step is None else step
    if n < T + m:
        raise InvalidInputError(f"series of length {n} is shorter than T + m = {T + m}")
    return range(0, n - T - m + 1, step)


def run_poos(cfg: PoosConfig, series: np.ndarray | None = None) -> CoverageReport:
    """Rolling-window evaluation on a CSV column (or a supplied array).

    For each horizon ``m`` the window ``[k, k + T)`` forecasts the mean of
    ``[k + T, k + T + m)`` with ``k`` stepping by ``step`` (default ``m``).
    """
    cfg.validate()
    y_all = as_series(load_csv_column(cfg.csv_path, cfg.column) if series is None
                      else series)
    label = cfg.label or (cfg.column or "series")
    report = CoverageReport()
    for m in cfg.horizons:
        origins = poos_origins(y_all.shape[0], cfg.T, m, cfg.step)
        tallies = {(me, m, lv): _Tally() for me in cfg.methods for lv in cfg.levels}
        targets = []
        for k in origins:
            y = y_all[k:k + cfg.T]
            target = float(y_all[k + cfg.T:k + cfg.T + m].mean())
            targets.append(target)
            _evaluate(y, {m: target}, cfg.methods, cfg.levels, cfg.settings,
                      cfg.base_seed + k, tallies)
        report.cells += _aggregate(label, tallies, {m: np.array(targets)}, len(origins))
    return report


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def _write_csv(report: CoverageReport, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for c in report.cells:
        w.writerow([c.scenario, c.method, c.horizon, repr(float(c.level)),
                    "" if c.coverage is None else f"{c.coverage:.4f}",
                    _fmt(c.rel_width), c.n_trials, c.n_skips])


def _text_table(report: CoverageReport) -> str:
    lines = []
    groups = {}
    for c in report.cells:
        groups.setdefault((c.scenario, c.level), []).append(c)
    for (scenario, level), cells in groups.items():
        horizons = sorted({c.horizon for c in cells})
        methods = list(dict.fromkeys(c.method for c in cells))
        by = {(c.method, c.horizon): c for c in cells}
        lines.append(f"{scenario}  level={level:g}")
        head = f"{'method':<14}" + "".join(f"{'p' + str(m):>8}" for m in horizons) \
            + "".join(f"{'w' + str(m):>8}" for m in horizons) + f"{'skips':>8}"
        lines.append(head)
        for me in methods:
            row = f"{me:<14}"
            for m in horizons:
                c = by.get((me, m))
                row += f"{'' if c is None or c.coverage is None else f'{100 * c.coverage:.2f}':>8}"
            for m in horizons:
                c = by.get((me, m))
                row += f"{'' if c is None or c.rel_width is None else f'{c.rel_width:.2f}':>8}"
            skips = sum(by[(me, m)].n_skips for m in horizons if (me, m) in by)
            lines.append(row + f"{skips:>8}")
        lines.append("")
    return "\n".join(lines)


def emit_report(report: CoverageReport, path=None, fmt: str = "csv") -> str:
    """Serialise ``report`` as CSV or a text table.

    The text table has one block per (scenario, level): methods in rows,
    coverage in % then relative width per horizon in columns.

    Parameters
    ----------
    report : CoverageReport
    path : str or Path, optional
        Destination file; ``None`` only returns the text.
    fmt : {"csv", "text"}

    Returns
    -------
    str
        The serialised report.
    """
    if len(report) == 0:
        raise InvalidInputError("report is empty")
    if fmt == "csv":
        buf = io.StringIO()
        _write_csv(report, buf)
        text = buf.getvalue()
    elif fmt in ("text", "text-table", "table"):
        text = _text_table(report)
    else:
        raise InvalidInputError(f"unknown format {fmt!r}")
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc}") from exc
    return text


def read_report_csv(path) -> CoverageReport:
    """Parse a report written by :func:`emit_report` with ``fmt="csv"``."""
    cells = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_FIELDS:
            raise CsvError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            cells.append(CoverageCell(
                scenario=row["scenario"], method=row["method"],
                horizon=int(row["horizon"]), level=float(row["level"]),
                coverage=float(row["coverage"]) if row["coverage"] else None,
                rel_width=float(row["rel_width"]) if row["rel_width"] else None,
                n_trials=int(row["n_trials"]), n_skips=int(row["n_skips"]),
            ))
    return CoverageReport(cells)


def with_settings(cfg, **changes):
    """Copy of a config with some :class:`MethodSettings` fields replaced."""
    return replace(cfg, settings=replace(cfg.settings, **changes))
