"""Acceptance criteria 1-9, each printing one PASS/FAIL line.

Criteria 1-5 share one simulated batch: 2000 trials per scenario, T = 260,
horizons 20 and 130, levels 0.90 and 0.67, fixed base seed.  Targets are
coverage percentages with a +-3pp band unless stated otherwise.
"""

import math

import numpy as np
import pytest

from ltpi import harness, mw, pascual, zxw
from ltpi.core import frac_diff, frac_integrate
from ltpi.dgp import SCENARIOS, gen_scenario, make_rng
from ltpi.pascual import ArmaGarchModel
from ltpi.stats import (BlockPlan, carlstein_block_length, stationary_bootstrap_indices,
                        subsample_lrv)

N_TRIALS = 2000
BASE_SEED = 0
METHODS = ("qtl-original", "kernel-boot", "clt-original", "clt-tdist")


@pytest.fixture(scope="module")
def table1():
    cfg = harness.SimConfig(scenarios=tuple(SCENARIOS), T=260, horizons=(20, 130),
                            levels=(0.90, 0.67), n_trials=N_TRIALS, methods=METHODS,
                            base_seed=BASE_SEED)
    return harness.run_simulation(cfg)


def _cov(rep, scenario, method, m, level):
    cell = rep.get(scenario, method, m, level)
    assert cell.n_skips == 0
    return 100.0 * cell.coverage


def _verdict(capsys, number, checks):
    """Print one line for the criterion and return the failing checks."""
    bad = [c for c in checks if not c[1]]
    detail = "; ".join(c[0] for c in checks)
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if not bad else 'FAIL'}  {detail}")
    return bad


def _band(label, got, want, tol):
    return (f"{label} {got:.2f} (target {want} +-{tol})", abs(got - want) <= tol)


def test_criterion_1_table1a_long_horizon(table1, capsys):
    targets = [
        ("short-light", "qtl-original", 47.97), ("short-light", "kernel-boot", 78.06),
        ("short-light", "clt-original", 76.44), ("short-light", "clt-tdist", 77.51),
        ("long-light", "qtl-original", 37.31), ("long-light", "clt-tdist", 57.96),
        ("long-heavy", "qtl-original", 33.62), ("long-heavy", "kernel-boot", 54.23),
    ]
    checks = [_band(f"{sc}/{me}", _cov(table1, sc, me, 130, 0.9), want, 3.0)
              for sc, me, want in targets]
    assert not _verdict(capsys, 1, checks)


def test_criterion_2_table1a_short_horizon(table1, capsys):
    checks = [
        _band("short-light/qtl-original", _cov(table1, "short-light", "qtl-original", 20, 0.9),
              85.25, 3.0),
        _band("long-heavy/qtl-original", _cov(table1, "long-heavy", "qtl-original", 20, 0.9),
              80.64, 3.0),
    ]
    assert not _verdict(capsys, 2, checks)


def test_criterion_3_table1b(table1, capsys):
    checks = [
        _band("qtl-original", _cov(table1, "short-light", "qtl-original", 130, 0.67),
              33.48, 3.0),
        _band("kernel-boot", _cov(table1, "short-light", "kernel-boot", 130, 0.67),
              54.13, 3.0),
    ]
    assert not _verdict(capsys, 3, checks)


def test_criterion_4_relative_width(table1, capsys):
    checks = [
        _band(f"{me} w", table1.get("short-light", me, 130, 0.9).rel_width, want, 0.06)
        for me, want in (("clt-original", 0.88), ("kernel-boot", 0.91))
    ]
    assert not _verdict(capsys, 4, checks)


def test_criterion_5_ordering(table1, capsys):
    checks = []
    for sc in SCENARIOS:
        kb, qo = (_cov(table1, sc, me, 130, 0.9) for me in ("kernel-boot", "qtl-original"))
        ct, co = (_cov(table1, sc, me, 130, 0.9) for me in ("clt-tdist", "clt-original"))
        checks.append((f"{sc}: kb-qtl {kb - qo:+.2f}", kb - qo >= 10.0))
        checks.append((f"{sc}: tdist-clt {ct - co:+.2f}", ct >= co))
    assert not _verdict(capsys, 5, checks)


def _brute_force_sd(phi, theta, m, n, rng):
    # future path from a zero history; its average is the forecast error
    eps = rng.standard_normal((n, m))
    x = np.zeros((n, m))
    prev_x, prev_e = np.zeros(n), np.zeros(n)
    for i in range(m):
        x[:, i] = phi * prev_x + eps[:, i] + theta * prev_e
        prev_x, prev_e = x[:, i], eps[:, i]
    return float(x.mean(axis=1).std())


def test_criterion_6_agg_error_sd_oracle(capsys):
    checks = []
    rng = make_rng(6)
    for label, phi, theta in (("AR(1) 0.3", 0.3, 0.0), ("AR(1) 0.6", 0.6, 0.0),
                              ("MA(1) 0.5", 0.0, 0.5)):
        mdl = ArmaGarchModel.from_params(phi=[phi] if phi else [], theta=[theta] if theta else [])
        for m in (1, 5, 20):
            got = pascual.agg_error_sd(mdl, m)
            ref = _brute_force_sd(phi, theta, m, 10 ** 6, rng)
            checks.append((f"{label} m={m} {got / ref - 1:+.3%}", abs(got / ref - 1) <= 0.02))
    assert not _verdict(capsys, 6, checks)


def test_criterion_7_mw_white_noise(capsys):
    hits = 0
    for i in range(N_TRIALS):
        x = make_rng(BASE_SEED + i).standard_normal(390)
        hits += mw.pi_naive(x[:260], 130, 12, 0.9).contains(x[260:].mean())
    cov = 100.0 * hits / N_TRIALS
    checks = [(f"coverage {cov:.2f} (target [87, 93])", 87.0 <= cov <= 93.0)]
    assert not _verdict(capsys, 7, checks)


def test_criterion_8_subsample_lrv(capsys):
    sig = []
    for s in range(100):
        e = make_rng(s).standard_normal(10 ** 5)
        e = e - e.mean()
        sig.append(subsample_lrv(e, carlstein_block_length(e)).sigma)
    mean = float(np.mean(sig))
    checks = [(f"mean sigma {mean:.4f} (target [0.97, 1.03])", 0.97 <= mean <= 1.03)]
    assert not _verdict(capsys, 8, checks)


def _all_intervals(y, level, seed=3):
    out = {}
    for me in harness.TABLE1_METHODS + ("mw-naive",):
        out[me] = harness.build_intervals(me, y, 40, (level,), seed=seed)[level]
    return out


def test_criterion_9_invariants(capsys, tmp_path):
    checks = []
    ok_loc = ok_scale = ok_nest = True
    for s in range(5):
        y = gen_scenario(SCENARIOS["short-heavy"], 260, make_rng(900 + s))
        base = _all_intervals(y, 0.9)
        shifted = _all_intervals(y + 12.5, 0.9)
        scaled = _all_intervals(3.0 * y, 0.9)
        inner = _all_intervals(y, 0.67)
        for me, iv in base.items():
            tol = 1e-9 * (1 + abs(iv.lower) + abs(iv.upper))
            ok_loc &= abs(shifted[me].lower - iv.lower - 12.5) < tol + 1e-8
            ok_loc &= abs(shifted[me].upper - iv.upper - 12.5) < tol + 1e-8
            ok_scale &= abs(scaled[me].lower - 3 * iv.lower) < 3 * tol
            ok_scale &= abs(scaled[me].upper - 3 * iv.upper) < 3 * tol
            ok_nest &= iv.lower <= inner[me].lower <= inner[me].upper <= iv.upper
    checks += [("location", ok_loc), ("scale", ok_scale), ("nesting", ok_nest)]

    ok_rt = True
    for d in (0.5, 1.0):
        y = np.cumsum(make_rng(7).standard_normal(300))
        back = frac_integrate(frac_diff(y, d), d, initial=float(y[0]))
        # d = 1 loses the first observation
        ok_rt &= np.allclose(back, y[y.shape[0] - back.shape[0]:], atol=1e-8)
    checks.append(("frac round trip", ok_rt))

    y = make_rng(8).standard_normal(260)
    idx = stationary_bootstrap_indices(260, 130, 500, BlockPlan(8.0), make_rng(1))
    draws = y[idx]
    ok_boot = bool(np.isin(draws, y).all())
    a = zxw.pi_kernel_boot(y, 130, 0.9, zxw.ZxwConfig(), make_rng(2))
    b = zxw.pi_kernel_boot(y, 130, 0.9, zxw.ZxwConfig(), make_rng(2))
    ok_boot &= a == b
    checks.append(("bootstrap containment/determinism", ok_boot))

    rep = harness.run_simulation(harness.SimConfig(
        scenarios=("long-light",), horizons=(20,), n_trials=100, methods=METHODS,
        settings=harness.MethodSettings(B=100)))
    path = tmp_path / "rep.csv"
    harness.emit_report(rep, path)
    checks.append(("report round trip", harness.read_report_csv(path).cells == rep.cells))
    assert not _verdict(capsys, 9, checks)
